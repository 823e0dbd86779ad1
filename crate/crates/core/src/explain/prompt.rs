use serde::{Deserialize, Serialize};

use super::chunk::ChunkId;
use super::retrieve::ScoredChunk;
use crate::error::Result;
use crate::ledger::StatusSnapshot;
use crate::planner::DecisionRecord;

pub const SYSTEM_TEXT: &str = "You explain decisions taken autonomously by the dispatch planner of a \
farm drone-fleet digital twin. Use only the knowledge excerpts and the runtime JSON below. Quote \
values exactly as they appear in the runtime JSON and do not introduce numbers that are not \
present there. If the provided material does not answer the question, say so.";

/// Record and snapshot of one decision, as shown to the model.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RuntimeContext {
    pub decision: DecisionRecord,
    pub snapshot: StatusSnapshot,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PromptChunk {
    pub id: ChunkId,
    pub text: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PromptContext {
    pub system_text: String,
    /// Retrieved chunks in rank order.
    pub knowledge_section: Vec<PromptChunk>,
    /// Compact JSON of a [`RuntimeContext`], serialized exactly as the ledger
    /// serializes its parts.
    pub runtime_section: String,
    pub question: String,
}

impl PromptContext {
    /// Everything after the system text.
    pub fn user_message(&self) -> String {
        let mut out = String::from("## Knowledge\n");
        if self.knowledge_section.is_empty() {
            out.push_str("(no knowledge retrieved)\n");
        }
        for c in &self.knowledge_section {
            out.push_str(&format!("### [{}]\n{}\n", c.id, c.text));
        }
        out.push_str("\n## Runtime\n");
        out.push_str(&self.runtime_section);
        out.push_str("\n\n## Question\n");
        out.push_str(&self.question);
        out.push('\n');
        out
    }

    /// The full prompt as one document.
    pub fn render(&self) -> String {
        format!("{}\n\n{}", self.system_text, self.user_message())
    }

    pub fn runtime(&self) -> Result<RuntimeContext> {
        Ok(serde_json::from_str(&self.runtime_section)?)
    }
}

pub fn assemble_prompt(
    question: &str,
    record: &DecisionRecord,
    snapshot: &StatusSnapshot,
    retrieved: &[ScoredChunk],
) -> Result<PromptContext> {
    let runtime = RuntimeContext { decision: record.clone(), snapshot: snapshot.clone() };
    Ok(PromptContext {
        system_text: SYSTEM_TEXT.to_string(),
        knowledge_section: retrieved
            .iter()
            .map(|s| PromptChunk { id: s.chunk.id.clone(), text: s.chunk.text.clone() })
            .collect(),
        runtime_section: serde_json::to_string(&runtime)?,
        question: question.to_string(),
    })
}
