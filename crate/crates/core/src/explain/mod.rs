//! Retrieval-augmented explanations of planner decisions.
//!
//! A question about one decision is answered by retrieving knowledge-base
//! chunks, laying them out next to the decision record and its fleet
//! snapshot, and handing the resulting prompt to a chat backend. The
//! prompt is kept with the answer so every claim can be traced back.

mod backend;
mod chunk;
mod grounding;
mod prompt;
mod retrieve;

use serde::Serialize;

pub use backend::{stub_answer, BackendId, ChatBackend, RemoteBackend, RemoteConfig, StubBackend};
pub use chunk::{chunk_document, load_knowledge_base, tokenize, ChunkId, KnowledgeChunk};
pub use grounding::{grounding_check, numeric_literals, GroundingReport};
pub use prompt::{assemble_prompt, PromptChunk, PromptContext, RuntimeContext, SYSTEM_TEXT};
pub use retrieve::{LexicalIndex, Retriever, ScoredChunk};

use crate::error::{Error, Result};
use crate::ledger::Ledger;

pub const DEFAULT_CHUNK_SIZE: usize = 200;
pub const DEFAULT_CHUNK_OVERLAP: usize = 40;
pub const DEFAULT_TOP_K: usize = 4;

/// An answer together with everything needed to audit it.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Explanation {
    pub answer_text: String,
    pub used_chunk_ids: Vec<ChunkId>,
    pub backend_id: BackendId,
    pub prompt_echo: PromptContext,
}

/// Answer `question` about decision `decision_id` of `ledger`.
///
/// Retrieval runs on the question plus the trigger tile and selected drone
/// identifiers, so chunks about the concrete decision rank higher.
pub fn answer(
    question: &str,
    decision_id: u64,
    ledger: &Ledger,
    retriever: &dyn Retriever,
    backend: &dyn ChatBackend,
    k: usize,
) -> Result<Explanation> {
    let (record, snapshot) = ledger.get_decision(decision_id)?;
    let mut query = format!("{question} tile {}", record.trigger.tile_id);
    if let Some(d) = record.selected_drone_id {
        query.push_str(&format!(" drone {d}"));
    }
    let retrieved = retriever.retrieve(&query, k)?;
    let prompt = assemble_prompt(question, record, snapshot, &retrieved)?;
    let answer_text = backend.complete(&prompt).map_err(|e| match e {
        Error::Backend { kind, message, prompt: None } => {
            Error::Backend { kind, message, prompt: Some(Box::new(prompt.clone())) }
        }
        other => other,
    })?;
    Ok(Explanation {
        answer_text,
        used_chunk_ids: prompt.knowledge_section.iter().map(|c| c.id.clone()).collect(),
        backend_id: backend.id(),
        prompt_echo: prompt,
    })
}
