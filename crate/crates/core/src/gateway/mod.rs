//! Line-delimited JSON protocol to an external captioning model, a
//! deterministic mock model, and the two-stage self-supplemented pipeline.

mod mock;
mod pipeline;
mod transport;

use std::fmt;
use std::str::FromStr;
use std::time::Duration;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use mock::{MockModel, MockTransport, MOCK_CAPTION_WORDS};
pub use pipeline::{
    read_trace, replay_batch, run_batch, run_self_supplemented, EntityScope, GenerationRecord, PipelineConfig, ReplayTransport, SelfSupplemented,
    TraceEvent, TraceKind, TraceSink,
};
pub use transport::{Endpoint, LineTransport};

use crate::alignment::{NO, YES};
use crate::context::ContextError;

pub const DEFAULT_TIMEOUT: Duration = Duration::from_secs(60);

#[derive(Debug, Error)]
pub enum GatewayError {
    #[error("request {request_id} timed out after {after:?}")]
    Timeout { request_id: String, after: Duration },
    #[error("malformed response: {0}")]
    Malformed(String),
    #[error("request {request_id}: {message}")]
    Domain { request_id: String, message: String },
    #[error("response id {got:?} does not match request {expected:?}")]
    IdMismatch { expected: String, got: String },
    #[error("endpoint closed the connection")]
    Disconnected,
    #[error("bad endpoint {0:?} (expected mock, cmd:<command>, tcp:<host:port> or unix:<path>)")]
    BadEndpoint(String),
    #[error("replay diverged at request {0}")]
    ReplayDiverged(String),
    #[error("trace line {line}: {message}")]
    BadTrace { line: usize, message: String },
    #[error(transparent)]
    Context(#[from] ContextError),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl GatewayError {
    fn domain(request_id: &str, message: impl Into<String>) -> Self {
        GatewayError::Domain { request_id: request_id.to_string(), message: message.into() }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModelTask {
    SentSelect,
    EntSelect,
    Caption,
}

impl ModelTask {
    pub fn as_str(self) -> &'static str {
        match self {
            ModelTask::SentSelect => "sent_select",
            ModelTask::EntSelect => "ent_select",
            ModelTask::Caption => "caption",
        }
    }
}

impl fmt::Display for ModelTask {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ModelTask {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "sent_select" => Ok(ModelTask::SentSelect),
            "ent_select" => Ok(ModelTask::EntSelect),
            "caption" => Ok(ModelTask::Caption),
            _ => Err(format!("unknown task {s:?}")),
        }
    }
}

/// `text` is the sentence for `sent_select` and the context otherwise.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelRequest {
    pub request_id: String,
    pub task: ModelTask,
    pub image_ref: String,
    pub text: String,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelResponse {
    pub request_id: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub answer: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub entities: Option<Vec<String>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub caption: Option<String>,
}

/// A validated response payload.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Reply {
    Answer(bool),
    Entities(Vec<String>),
    Caption(String),
}

/// Checks the response against the request: same id, exactly the payload
/// field the task calls for, and values inside the task's domain.
pub fn validate(req: &ModelRequest, resp: ModelResponse) -> Result<Reply, GatewayError> {
    if resp.request_id != req.request_id {
        return Err(GatewayError::IdMismatch { expected: req.request_id.clone(), got: resp.request_id });
    }
    let id = req.request_id.as_str();
    let present = [resp.answer.is_some(), resp.entities.is_some(), resp.caption.is_some()];
    let expected = match req.task {
        ModelTask::SentSelect => 0,
        ModelTask::EntSelect => 1,
        ModelTask::Caption => 2,
    };
    if !present[expected] {
        return Err(GatewayError::domain(id, format!("missing payload for {}", req.task)));
    }
    if present.iter().filter(|&&p| p).count() > 1 {
        return Err(GatewayError::domain(id, format!("unexpected payload fields for {}", req.task)));
    }
    match req.task {
        ModelTask::SentSelect => match resp.answer.as_deref() {
            Some(YES) => Ok(Reply::Answer(true)),
            Some(NO) => Ok(Reply::Answer(false)),
            Some(other) => Err(GatewayError::domain(id, format!("answer {other:?} is not \"{YES}\" or \"{NO}\""))),
            None => unreachable!(),
        },
        ModelTask::EntSelect => {
            let entities = resp.entities.unwrap_or_default();
            if entities.iter().any(|e| e.trim().is_empty()) {
                return Err(GatewayError::domain(id, "empty entity surface"));
            }
            Ok(Reply::Entities(entities))
        }
        ModelTask::Caption => {
            let caption = resp.caption.unwrap_or_default();
            if caption.trim().is_empty() {
                return Err(GatewayError::domain(id, "empty caption"));
            }
            Ok(Reply::Caption(caption))
        }
    }
}

/// Sends one request line and returns one response line.
pub trait Transport {
    fn exchange(&mut self, request_id: &str, line: &str, timeout: Duration) -> Result<String, GatewayError>;
}

impl<T: Transport + ?Sized> Transport for Box<T> {
    fn exchange(&mut self, request_id: &str, line: &str, timeout: Duration) -> Result<String, GatewayError> {
        (**self).exchange(request_id, line, timeout)
    }
}

pub fn parse_response(line: &str) -> Result<ModelResponse, GatewayError> {
    serde_json::from_str(line.trim_end()).map_err(|e| GatewayError::Malformed(format!("{e}: {:?}", truncate(line, 120))))
}

fn truncate(s: &str, n: usize) -> &str {
    s.char_indices().nth(n).map_or(s, |(i, _)| &s[..i])
}

/// One request/response round trip, validated.
pub fn query<T: Transport + ?Sized>(transport: &mut T, req: &ModelRequest, timeout: Duration) -> Result<Reply, GatewayError> {
    let line = serde_json::to_string(req).expect("requests serialize");
    let resp = transport.exchange(&req.request_id, &line, timeout)?;
    validate(req, parse_response(&resp)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn req(task: ModelTask) -> ModelRequest {
        ModelRequest { request_id: "d#0".into(), task, image_ref: "img".into(), text: "t".into() }
    }

    fn answer(a: &str) -> ModelResponse {
        ModelResponse { request_id: "d#0".into(), answer: Some(a.into()), ..Default::default() }
    }

    #[test]
    fn answer_domain() {
        assert_eq!(validate(&req(ModelTask::SentSelect), answer("yes")).unwrap(), Reply::Answer(true));
        assert_eq!(validate(&req(ModelTask::SentSelect), answer("no")).unwrap(), Reply::Answer(false));
        assert!(matches!(validate(&req(ModelTask::SentSelect), answer("maybe")), Err(GatewayError::Domain { .. })));
        assert!(matches!(validate(&req(ModelTask::SentSelect), answer("Yes")), Err(GatewayError::Domain { .. })));
    }

    #[test]
    fn id_mismatch() {
        let mut r = answer("yes");
        r.request_id = "d#1".into();
        assert!(matches!(validate(&req(ModelTask::SentSelect), r), Err(GatewayError::IdMismatch { .. })));
    }

    #[test]
    fn wrong_payload_for_task() {
        assert!(matches!(validate(&req(ModelTask::Caption), answer("yes")), Err(GatewayError::Domain { .. })));
        let mut r = answer("yes");
        r.caption = Some("c".into());
        assert!(matches!(validate(&req(ModelTask::SentSelect), r), Err(GatewayError::Domain { .. })));
    }

    #[test]
    fn strict_parsing() {
        assert!(parse_response(r#"{"request_id":"a","answer":"yes"}"#).is_ok());
        assert!(matches!(parse_response(r#"{"request_id":"a","answer":"yes","score":1}"#), Err(GatewayError::Malformed(_))));
        assert!(matches!(parse_response("not json"), Err(GatewayError::Malformed(_))));
        assert!(matches!(parse_response(r#"{"request_id":"a","answer":true}"#), Err(GatewayError::Malformed(_))));
    }

    #[test]
    fn request_wire_format() {
        let line = serde_json::to_string(&req(ModelTask::EntSelect)).unwrap();
        assert_eq!(line, r#"{"request_id":"d#0","task":"ent_select","image_ref":"img","text":"t"}"#);
    }
}
