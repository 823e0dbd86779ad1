use std::fmt::Write as _;
use std::time::Duration;

use serde::{Deserialize, Serialize};

use super::prompt::PromptContext;
use crate::error::{BackendErrorKind, Error, Result};
use crate::fleet::CandidateOption;
use crate::planner::{rank, Outcome};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BackendId {
    Stub,
    Remote,
}

impl BackendId {
    pub fn as_str(self) -> &'static str {
        match self {
            BackendId::Stub => "stub",
            BackendId::Remote => "remote",
        }
    }
}

/// A chat model that turns an assembled prompt into answer text.
pub trait ChatBackend {
    fn id(&self) -> BackendId;
    fn complete(&self, prompt: &PromptContext) -> Result<String>;
}

/// Offline backend answering from the runtime JSON alone.
#[derive(Debug, Clone, Copy, Default)]
pub struct StubBackend;

impl ChatBackend for StubBackend {
    fn id(&self) -> BackendId {
        BackendId::Stub
    }

    fn complete(&self, prompt: &PromptContext) -> Result<String> {
        stub_answer(prompt)
    }
}

fn num(x: f64) -> String {
    format!("{x}")
}

/// Templated explanation built only from the parsed runtime section, so it
/// never cites a value the prompt does not contain.
pub fn stub_answer(prompt: &PromptContext) -> Result<String> {
    let runtime = prompt.runtime()?;
    let d = &runtime.decision;
    let tile = d.trigger.tile_id;
    let t_b = num(d.thresholds_snapshot.t_b);
    let mut out = String::new();

    match d.outcome {
        Outcome::NoTrigger => {
            let _ = write!(
                out,
                "Tile {tile} was not sent for inspection: its confidence {} is at or above the threshold {} (T_alpha), so the survey reading was trusted.",
                num(d.trigger.confidence),
                num(d.trigger.t_alpha)
            );
        }
        Outcome::NoFeasibleDrone => {
            let _ = write!(
                out,
                "Tile {tile} was flagged because its confidence {} is below the threshold {} (T_alpha), but no drone was dispatched: ",
                num(d.trigger.confidence),
                num(d.trigger.t_alpha)
            );
            if d.candidates.is_empty() {
                let _ = write!(
                    out,
                    "no inspection drone was eligible (every one was stranded or already had a queued task), so no candidate met the battery threshold {t_b} (T_b)."
                );
            } else {
                let _ = write!(out, "no candidate met the battery threshold {t_b} (T_b).");
                for c in &d.candidates {
                    let _ = write!(
                        out,
                        " Drone {} would have had predicted battery {} with delta_t {}.",
                        c.drone_id,
                        num(c.predicted_battery),
                        num(c.delta_t)
                    );
                }
            }
            out.push_str(" The tile waits in the pending queue and is planned again whenever a drone completes a task.");
        }
        Outcome::Dispatched => {
            let sel = d
                .selected()
                .ok_or_else(|| Error::InvalidState("dispatched record without a selected candidate".into()))?;
            let id = sel.drone_id;
            let _ = write!(
                out,
                "Drone {id} was selected to inspect tile {tile}. Tile {tile} was flagged because its confidence {} is below the threshold {} (T_alpha). ",
                num(d.trigger.confidence),
                num(d.trigger.t_alpha)
            );
            let _ = write!(
                out,
                "Drone {id} has the minimum total time among the feasible candidates: delta_t {} = t_rem {} + t_disp {} + t_insp {}, with predicted battery {} above the threshold {t_b} (T_b).",
                num(sel.delta_t),
                num(sel.t_rem),
                num(sel.t_disp),
                num(sel.t_insp),
                num(sel.predicted_battery)
            );
            if sel.t_rem > 0.0 {
                let _ = write!(
                    out,
                    " Drone {id} is busy and will finish its current task first (t_rem {}); even so, its delta_t {} is the smallest, so waiting for it is faster than dispatching another drone immediately.",
                    num(sel.t_rem),
                    num(sel.delta_t)
                );
            }
            for c in rank(&d.candidates).into_iter().skip(1) {
                let state = if c.t_rem > 0.0 { "busy" } else { "ready" };
                let _ = write!(
                    out,
                    " Drone {} was {state} and feasible, but its delta_t {} is higher than drone {id}'s delta_t {}.",
                    c.drone_id,
                    num(c.delta_t),
                    num(sel.delta_t)
                );
            }
            for c in d.candidates.iter().filter(|c| !c.feasible) {
                write_rejection(&mut out, c, &t_b);
            }
        }
    }
    Ok(out)
}

fn write_rejection(out: &mut String, c: &CandidateOption, t_b: &str) {
    let reason = c.rejection_reason.map_or("rejected", |r| r.as_str());
    let _ = write!(
        out,
        " Drone {} was rejected ({reason}): its predicted battery {} does not exceed the threshold {t_b} (T_b); its delta_t was {}.",
        c.drone_id,
        num(c.predicted_battery),
        num(c.delta_t)
    );
}

/// Connection settings for an OpenAI-style `chat/completions` endpoint.
#[derive(Clone)]
pub struct RemoteConfig {
    /// Full URL of the chat-completions endpoint.
    pub endpoint: String,
    pub model: String,
    pub api_key: Option<String>,
    pub timeout: Duration,
}

impl std::fmt::Debug for RemoteConfig {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("RemoteConfig")
            .field("endpoint", &self.endpoint)
            .field("model", &self.model)
            .field("api_key", &self.api_key.as_ref().map(|_| "<redacted>"))
            .field("timeout", &self.timeout)
            .finish()
    }
}

impl RemoteConfig {
    pub const DEFAULT_TIMEOUT: Duration = Duration::from_secs(60);

    /// Reads `EXPLAIN_LLM_ENDPOINT`, `EXPLAIN_LLM_MODEL`, and optionally
    /// `EXPLAIN_LLM_API_KEY` and `EXPLAIN_LLM_TIMEOUT_SECS`.
    pub fn from_env() -> Result<Self> {
        Self::from_lookup(|k| std::env::var(k).ok())
    }

    pub fn from_lookup(get: impl Fn(&str) -> Option<String>) -> Result<Self> {
        let required = |key: &str| {
            get(key).filter(|v| !v.is_empty()).ok_or_else(|| Error::Backend {
                kind: BackendErrorKind::Config,
                message: format!("{key} is not set"),
                prompt: None,
            })
        };
        let timeout = match get("EXPLAIN_LLM_TIMEOUT_SECS") {
            Some(s) => Duration::from_secs_f64(s.parse::<f64>().ok().filter(|v| *v > 0.0).ok_or_else(|| {
                Error::Backend {
                    kind: BackendErrorKind::Config,
                    message: format!("EXPLAIN_LLM_TIMEOUT_SECS is not a positive number: {s}"),
                    prompt: None,
                }
            })?),
            None => Self::DEFAULT_TIMEOUT,
        };
        Ok(Self {
            endpoint: required("EXPLAIN_LLM_ENDPOINT")?,
            model: required("EXPLAIN_LLM_MODEL")?,
            api_key: get("EXPLAIN_LLM_API_KEY").filter(|k| !k.is_empty()),
            timeout,
        })
    }
}

#[derive(Serialize)]
struct ChatRequest<'a> {
    model: &'a str,
    messages: Vec<ChatMessage>,
}

#[derive(Serialize, Deserialize)]
struct ChatMessage {
    role: String,
    content: String,
}

#[derive(Deserialize)]
struct ChatResponse {
    choices: Vec<ChatChoice>,
}

#[derive(Deserialize)]
struct ChatChoice {
    message: ChatMessage,
}

/// Blocking chat-completion client; one request per call.
pub struct RemoteBackend {
    config: RemoteConfig,
    agent: ureq::Agent,
}

impl RemoteBackend {
    pub fn new(config: RemoteConfig) -> Self {
        let agent = ureq::Agent::config_builder()
            .timeout_global(Some(config.timeout))
            .http_status_as_error(false)
            .build()
            .into();
        Self { config, agent }
    }

    fn fail(&self, kind: BackendErrorKind, message: impl Into<String>, prompt: &PromptContext) -> Error {
        Error::Backend { kind, message: message.into(), prompt: Some(Box::new(prompt.clone())) }
    }
}

impl ChatBackend for RemoteBackend {
    fn id(&self) -> BackendId {
        BackendId::Remote
    }

    fn complete(&self, prompt: &PromptContext) -> Result<String> {
        let request = ChatRequest {
            model: &self.config.model,
            messages: vec![
                ChatMessage { role: "system".into(), content: prompt.system_text.clone() },
                ChatMessage { role: "user".into(), content: prompt.user_message() },
            ],
        };
        let body = serde_json::to_string(&request)?;
        log::debug!(
            "POST {} (authorization: {}) {}",
            self.config.endpoint,
            if self.config.api_key.is_some() { "Bearer <redacted>" } else { "none" },
            body
        );

        let mut req = self.agent.post(&self.config.endpoint).header("Content-Type", "application/json");
        if let Some(key) = &self.config.api_key {
            req = req.header("Authorization", &format!("Bearer {key}"));
        }
        let mut response = match req.send(body.as_str()) {
            Ok(r) => r,
            Err(ureq::Error::Timeout(t)) => {
                return Err(self.fail(BackendErrorKind::Timeout, format!("request timed out ({t})"), prompt))
            }
            Err(ureq::Error::Io(e)) if e.kind() == std::io::ErrorKind::TimedOut => {
                return Err(self.fail(BackendErrorKind::Timeout, e.to_string(), prompt))
            }
            Err(e) => return Err(self.fail(BackendErrorKind::Network, e.to_string(), prompt)),
        };
        let status = response.status().as_u16();
        let text = match response.body_mut().read_to_string() {
            Ok(t) => t,
            Err(ureq::Error::Timeout(t)) => {
                return Err(self.fail(BackendErrorKind::Timeout, format!("response timed out ({t})"), prompt))
            }
            Err(e) => return Err(self.fail(BackendErrorKind::Network, e.to_string(), prompt)),
        };
        log::debug!("HTTP {status} {text}");
        match status {
            200..=299 => {}
            401 | 403 => return Err(self.fail(BackendErrorKind::Auth, text, prompt)),
            429 => return Err(self.fail(BackendErrorKind::RateLimit, text, prompt)),
            code => return Err(self.fail(BackendErrorKind::Status(code), text, prompt)),
        }
        let parsed: ChatResponse = serde_json::from_str(&text)
            .map_err(|e| self.fail(BackendErrorKind::Response, format!("unexpected response body: {e}"), prompt))?;
        parsed
            .choices
            .into_iter()
            .next()
            .map(|c| c.message.content)
            .ok_or_else(|| self.fail(BackendErrorKind::Response, "response has no choices", prompt))
    }
}
