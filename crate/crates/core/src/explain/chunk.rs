use std::collections::BTreeMap;
use std::fmt;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct ChunkId {
    pub source: String,
    pub ordinal: u32,
}

impl fmt::Display for ChunkId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}#{}", self.source, self.ordinal)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct KnowledgeChunk {
    pub id: ChunkId,
    pub text: String,
    pub term_counts: BTreeMap<String, u32>,
}

/// Lowercase, keep letters, digits and `_`.
fn normalize(raw: &str) -> String {
    raw.chars()
        .filter(|c| c.is_alphanumeric() || *c == '_')
        .flat_map(char::to_lowercase)
        .collect()
}

/// Whitespace tokens, normalized; tokens that normalize to nothing are dropped.
pub fn tokenize(text: &str) -> Vec<String> {
    text.split_whitespace().map(normalize).filter(|t| !t.is_empty()).collect()
}

fn term_counts(tokens: &[&str]) -> BTreeMap<String, u32> {
    let mut counts = BTreeMap::new();
    for t in tokens.iter().map(|t| normalize(t)).filter(|t| !t.is_empty()) {
        *counts.entry(t).or_insert(0) += 1;
    }
    counts
}

/// Sliding windows of `chunk_size` whitespace tokens, stepping by
/// `chunk_size - overlap`. Windows start at every step while the start lies
/// inside the document; the last one may be short.
pub fn chunk_document(name: &str, text: &str, chunk_size: usize, overlap: usize) -> Result<Vec<KnowledgeChunk>> {
    if chunk_size <= overlap {
        return Err(Error::InvalidParam(format!(
            "chunk_size ({chunk_size}) must exceed overlap ({overlap})"
        )));
    }
    let tokens: Vec<&str> = text.split_whitespace().collect();
    if tokens.is_empty() {
        return Err(Error::Empty("document"));
    }
    let stride = chunk_size - overlap;
    Ok((0..tokens.len())
        .step_by(stride)
        .enumerate()
        .map(|(ordinal, start)| {
            let window = &tokens[start..(start + chunk_size).min(tokens.len())];
            KnowledgeChunk {
                id: ChunkId { source: name.to_string(), ordinal: ordinal as u32 },
                text: window.join(" "),
                term_counts: term_counts(window),
            }
        })
        .collect())
}

/// Chunk every `.md` and `.txt` file in `dir`, in file-name order.
pub fn load_knowledge_base(dir: impl AsRef<Path>, chunk_size: usize, overlap: usize) -> Result<Vec<KnowledgeChunk>> {
    let mut files: Vec<_> = fs::read_dir(dir)?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.is_file() && matches!(p.extension().and_then(|e| e.to_str()), Some("md" | "txt")))
        .collect();
    files.sort();
    let mut chunks = Vec::new();
    for path in files {
        let name = path.file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or_default();
        chunks.extend(chunk_document(&name, &fs::read_to_string(&path)?, chunk_size, overlap)?);
    }
    if chunks.is_empty() {
        return Err(Error::Empty("knowledge base"));
    }
    Ok(chunks)
}
