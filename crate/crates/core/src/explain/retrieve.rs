use std::collections::BTreeMap;

use super::chunk::{tokenize, KnowledgeChunk};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct ScoredChunk {
    pub chunk: KnowledgeChunk,
    pub score: f64,
}

/// Anything that can rank knowledge chunks against a query.
pub trait Retriever {
    /// At most `k` chunks, best first.
    fn retrieve(&self, query: &str, k: usize) -> Result<Vec<ScoredChunk>>;
}

/// Cosine similarity over tf-idf weights, `idf = ln(1 + N / df)`.
/// Ties go to the smaller chunk id.
#[derive(Debug, Clone)]
pub struct LexicalIndex {
    chunks: Vec<KnowledgeChunk>,
    idf: BTreeMap<String, f64>,
    norms: Vec<f64>,
}

impl LexicalIndex {
    pub fn new(chunks: Vec<KnowledgeChunk>) -> Result<Self> {
        if chunks.is_empty() {
            return Err(Error::Empty("knowledge index"));
        }
        let mut df: BTreeMap<&str, u32> = BTreeMap::new();
        for c in &chunks {
            for term in c.term_counts.keys() {
                *df.entry(term).or_insert(0) += 1;
            }
        }
        let n = chunks.len() as f64;
        let idf: BTreeMap<String, f64> =
            df.into_iter().map(|(t, d)| (t.to_string(), (1.0 + n / d as f64).ln())).collect();
        let norms = chunks
            .iter()
            .map(|c| {
                c.term_counts
                    .iter()
                    .map(|(t, &tf)| (tf as f64 * idf[t]).powi(2))
                    .sum::<f64>()
                    .sqrt()
            })
            .collect();
        Ok(Self { chunks, idf, norms })
    }

    pub fn chunks(&self) -> &[KnowledgeChunk] {
        &self.chunks
    }

    pub fn len(&self) -> usize {
        self.chunks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.chunks.is_empty()
    }

    pub fn idf(&self, term: &str) -> Option<f64> {
        self.idf.get(term).copied()
    }
}

impl Retriever for LexicalIndex {
    fn retrieve(&self, query: &str, k: usize) -> Result<Vec<ScoredChunk>> {
        if k == 0 {
            return Err(Error::InvalidParam("k must be >= 1".into()));
        }
        let tokens = tokenize(query);
        if tokens.is_empty() {
            return Err(Error::Empty("query"));
        }
        let mut q: BTreeMap<&str, f64> = BTreeMap::new();
        for t in &tokens {
            if let Some(&idf) = self.idf.get(t.as_str()) {
                *q.entry(t.as_str()).or_insert(0.0) += idf;
            }
        }
        let q_norm = q.values().map(|w| w * w).sum::<f64>().sqrt();

        let mut scored: Vec<(usize, f64)> = self
            .chunks
            .iter()
            .zip(&self.norms)
            .enumerate()
            .map(|(i, (c, &norm))| {
                if q_norm == 0.0 || norm == 0.0 {
                    return (i, 0.0);
                }
                let dot: f64 = q
                    .iter()
                    .filter_map(|(t, qw)| c.term_counts.get(*t).map(|&tf| qw * tf as f64 * self.idf[*t]))
                    .sum();
                (i, dot / (q_norm * norm))
            })
            .collect();
        scored.sort_by(|a, b| b.1.total_cmp(&a.1).then_with(|| self.chunks[a.0].id.cmp(&self.chunks[b.0].id)));
        Ok(scored
            .into_iter()
            .take(k)
            .map(|(i, score)| ScoredChunk { chunk: self.chunks[i].clone(), score })
            .collect())
    }
}
