use std::sync::OnceLock;

use regex::Regex;
use serde::Serialize;

use super::Explanation;

/// Numbers cited in an answer that the prompt does not contain.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GroundingReport {
    pub numbers_checked: usize,
    pub ungrounded: Vec<String>,
}

impl GroundingReport {
    pub fn passed(&self) -> bool {
        self.ungrounded.is_empty()
    }
}

fn number_re() -> &'static Regex {
    static RE: OnceLock<Regex> = OnceLock::new();
    RE.get_or_init(|| Regex::new(r"\d+(?:\.\d+)?(?:[eE][+-]?\d+)?").expect("valid regex"))
}

/// Unsigned decimal literals in `text`, in order of appearance.
pub fn numeric_literals(text: &str) -> Vec<&str> {
    number_re().find_iter(text).map(|m| m.as_str()).collect()
}

/// Every numeric literal of the answer must appear in the prompt, either as
/// the same string or as a literal with the same parsed value (`18` vs
/// `18.0`).
pub fn grounding_check(explanation: &Explanation) -> GroundingReport {
    let prompt = explanation.prompt_echo.render();
    let known: Vec<&str> = numeric_literals(&prompt);
    let known_values: Vec<f64> = known.iter().filter_map(|s| s.parse().ok()).collect();
    let cited = numeric_literals(&explanation.answer_text);
    let ungrounded = cited
        .iter()
        .filter(|lit| {
            let value: Option<f64> = lit.parse().ok();
            !known.contains(lit) && !value.is_some_and(|v| known_values.contains(&v))
        })
        .map(|s| s.to_string())
        .collect();
    GroundingReport { numbers_checked: cited.len(), ungrounded }
}
