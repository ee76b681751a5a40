use std::collections::{HashMap, VecDeque};
use std::fmt;
use std::io::{BufRead, Write};
use std::str::FromStr;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;
use std::time::{Duration, SystemTime, UNIX_EPOCH};

use serde::{Deserialize, Serialize};

use super::{query, GatewayError, ModelRequest, ModelTask, Reply, Transport, DEFAULT_TIMEOUT};
use crate::context::{origin_context, supplement_context, ContextConfig, SupplementedContext};
use crate::corpus::Document;

/// What the entity-extraction request is asked over.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EntityScope {
    Origin,
    #[default]
    OriginPlusSelected,
    FullArticle,
}

impl FromStr for EntityScope {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.replace('-', "_").as_str() {
            "origin" => Ok(EntityScope::Origin),
            "origin_plus_selected" => Ok(EntityScope::OriginPlusSelected),
            "full_article" => Ok(EntityScope::FullArticle),
            _ => Err(format!("unknown entity scope {s:?}")),
        }
    }
}

impl fmt::Display for EntityScope {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            EntityScope::Origin => "origin",
            EntityScope::OriginPlusSelected => "origin_plus_selected",
            EntityScope::FullArticle => "full_article",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PipelineConfig {
    pub context: ContextConfig,
    #[serde(with = "millis")]
    pub timeout: Duration,
    pub entity_scope: EntityScope,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        PipelineConfig { context: ContextConfig::default(), timeout: DEFAULT_TIMEOUT, entity_scope: EntityScope::default() }
    }
}

mod millis {
    use std::time::Duration;

    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(d: &Duration, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_u64(d.as_millis() as u64)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Duration, D::Error> {
        u64::deserialize(d).map(Duration::from_millis)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TraceKind {
    Request,
    Response,
    Error,
}

/// One line of the trace: a request or response record verbatim, or the
/// message of a failed exchange.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TraceEvent {
    pub ts_ms: u64,
    pub doc_id: String,
    pub kind: TraceKind,
    pub line: String,
}

fn now_ms() -> u64 {
    SystemTime::now().duration_since(UNIX_EPOCH).map_or(0, |d| d.as_millis() as u64)
}

/// Append-only trace writer shared by the batch workers. Each document's
/// events are written together.
pub struct TraceSink {
    out: Mutex<Box<dyn Write + Send>>,
}

impl fmt::Debug for TraceSink {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("TraceSink")
    }
}

impl TraceSink {
    pub fn new(out: impl Write + Send + 'static) -> Self {
        TraceSink { out: Mutex::new(Box::new(out)) }
    }

    pub fn append(&self, events: &[TraceEvent]) -> std::io::Result<()> {
        let mut out = self.out.lock().unwrap_or_else(|e| e.into_inner());
        for e in events {
            serde_json::to_writer(&mut *out, e)?;
            out.write_all(b"\n")?;
        }
        out.flush()
    }
}

pub fn read_trace<R: BufRead>(reader: R) -> Result<Vec<TraceEvent>, GatewayError> {
    let mut events = Vec::new();
    for (i, line) in reader.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        events.push(serde_json::from_str(&line).map_err(|e| GatewayError::BadTrace { line: i + 1, message: e.to_string() })?);
    }
    Ok(events)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SelfSupplemented {
    pub selected_sentences: Vec<usize>,
    pub context: SupplementedContext,
    pub caption: String,
    pub requests: usize,
}

struct Session<'a, T: ?Sized> {
    transport: &'a mut T,
    doc: &'a Document,
    timeout: Duration,
    seq: usize,
    trace: &'a mut Vec<TraceEvent>,
}

impl<T: Transport + ?Sized> Session<'_, T> {
    fn event(&mut self, kind: TraceKind, line: String) {
        self.trace.push(TraceEvent { ts_ms: now_ms(), doc_id: self.doc.doc_id.clone(), kind, line });
    }

    fn ask(&mut self, task: ModelTask, text: String) -> Result<Reply, GatewayError> {
        let req = ModelRequest { request_id: format!("{}#{}", self.doc.doc_id, self.seq), task, image_ref: self.doc.image_ref.clone(), text };
        self.seq += 1;
        self.event(TraceKind::Request, serde_json::to_string(&req).expect("requests serialize"));
        let mut recorder = Recorder { inner: &mut *self.transport, response: None };
        let result = query(&mut recorder, &req, self.timeout);
        if let Some(line) = recorder.response {
            self.event(TraceKind::Response, line);
        }
        if let Err(e) = &result {
            self.event(TraceKind::Error, e.to_string());
        }
        result
    }
}

/// Keeps the raw response line for the trace.
struct Recorder<'a, T: ?Sized> {
    inner: &'a mut T,
    response: Option<String>,
}

impl<T: Transport + ?Sized> Transport for Recorder<'_, T> {
    fn exchange(&mut self, request_id: &str, line: &str, timeout: Duration) -> Result<String, GatewayError> {
        let resp = self.inner.exchange(request_id, line, timeout)?;
        self.response = Some(resp.clone());
        Ok(resp)
    }
}

/// Two-stage generation for one document: a yes/no request per article
/// sentence and one entity request, then one caption request over the
/// supplemented context. Every exchange is appended to `trace`.
pub fn run_self_supplemented<T: Transport + ?Sized>(
    doc: &Document,
    transport: &mut T,
    config: &PipelineConfig,
    trace: &mut Vec<TraceEvent>,
) -> Result<SelfSupplemented, GatewayError> {
    let cc = &config.context;
    let origin = origin_context(doc, cc.style, cc.origin_budget)?;
    let mut session = Session { transport, doc, timeout: config.timeout, seq: 0, trace };

    let mut selected = Vec::new();
    for sentence in &doc.sentences {
        if session.ask(ModelTask::SentSelect, sentence.text.clone())? == Reply::Answer(true) {
            selected.push(sentence.index);
        }
    }
    let scope_text = match config.entity_scope {
        EntityScope::Origin => origin.final_text.clone(),
        EntityScope::OriginPlusSelected => supplement_context(doc, &selected, &[], &origin, cc.sentence_cap, &cc.entity_prompt)?.final_text,
        EntityScope::FullArticle => doc.normalized_article(),
    };
    let Reply::Entities(entities) = session.ask(ModelTask::EntSelect, scope_text)? else {
        unreachable!("validated as entities")
    };

    let context = supplement_context(doc, &selected, &entities, &origin, cc.sentence_cap, &cc.entity_prompt)?;
    let Reply::Caption(caption) = session.ask(ModelTask::Caption, context.final_text.clone())? else {
        unreachable!("validated as caption")
    };
    Ok(SelfSupplemented { selected_sentences: selected, context, caption, requests: session.seq })
}

/// Outcome for one document of a batch.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GenerationRecord {
    pub doc_id: String,
    pub image_ref: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub caption: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub context: Option<SupplementedContext>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

impl GenerationRecord {
    fn from_result(doc: &Document, result: Result<SelfSupplemented, GatewayError>) -> Self {
        let mut rec = GenerationRecord { doc_id: doc.doc_id.clone(), image_ref: doc.image_ref.clone(), caption: None, context: None, error: None };
        match result {
            Ok(out) => {
                rec.caption = Some(out.caption);
                rec.context = Some(out.context);
            }
            Err(e) => rec.error = Some(e.to_string()),
        }
        rec
    }
}

/// Runs every document, up to `jobs` at a time. Each worker owns one
/// connection from `connect` and reconnects after a failed document.
/// Records come back in input order; failures are recorded, not raised.
pub fn run_batch<T, F>(docs: &[Document], connect: F, config: &PipelineConfig, jobs: usize, trace: Option<&TraceSink>) -> Vec<GenerationRecord>
where
    T: Transport,
    F: Fn() -> Result<T, GatewayError> + Sync,
{
    let next = AtomicUsize::new(0);
    let results: Mutex<Vec<Option<GenerationRecord>>> = Mutex::new(vec![None; docs.len()]);
    std::thread::scope(|scope| {
        for _ in 0..jobs.clamp(1, docs.len().max(1)) {
            scope.spawn(|| {
                let mut transport: Option<T> = None;
                loop {
                    let i = next.fetch_add(1, Ordering::Relaxed);
                    let Some(doc) = docs.get(i) else { break };
                    let mut events = Vec::new();
                    let result = match transport.as_mut() {
                        Some(t) => run_self_supplemented(doc, t, config, &mut events),
                        None => connect().and_then(|t| run_self_supplemented(doc, transport.insert(t), config, &mut events)),
                    };
                    if result.is_err() {
                        transport = None;
                    }
                    let mut record = GenerationRecord::from_result(doc, result);
                    if let Some(sink) = trace {
                        if let Err(e) = sink.append(&events) {
                            record.error.get_or_insert_with(|| format!("trace write failed: {e}"));
                        }
                    }
                    results.lock().unwrap_or_else(|e| e.into_inner())[i] = Some(record);
                }
            });
        }
    });
    results.into_inner().unwrap_or_else(|e| e.into_inner()).into_iter().map(|r| r.expect("every document processed")).collect()
}

/// Answers requests from a recorded trace, checking that each request
/// matches the recorded one byte for byte.
#[derive(Debug, Clone, Default)]
pub struct ReplayTransport {
    exchanges: VecDeque<(String, Result<String, String>)>,
}

impl ReplayTransport {
    /// Builds the replay for one document's events, in recorded order.
    pub fn new<'a>(events: impl IntoIterator<Item = &'a TraceEvent>) -> Self {
        let mut exchanges = VecDeque::new();
        let mut pending: Option<String> = None;
        for e in events {
            match e.kind {
                TraceKind::Request => pending = Some(e.line.clone()),
                TraceKind::Response => {
                    if let Some(req) = pending.take() {
                        exchanges.push_back((req, Ok(e.line.clone())));
                    }
                }
                // An error after a response is a validation failure, which
                // replays by itself from the recorded response.
                TraceKind::Error => {
                    if let Some(req) = pending.take() {
                        exchanges.push_back((req, Err(e.line.clone())));
                    }
                }
            }
        }
        ReplayTransport { exchanges }
    }
}

impl Transport for ReplayTransport {
    fn exchange(&mut self, request_id: &str, line: &str, _timeout: Duration) -> Result<String, GatewayError> {
        match self.exchanges.pop_front() {
            Some((req, outcome)) if req == line => outcome.map_err(|message| GatewayError::Malformed(format!("recorded failure: {message}"))),
            _ => Err(GatewayError::ReplayDiverged(request_id.to_string())),
        }
    }
}

/// Re-runs documents against their recorded exchanges.
pub fn replay_batch(docs: &[Document], events: &[TraceEvent], config: &PipelineConfig) -> Vec<GenerationRecord> {
    let mut by_doc: HashMap<&str, Vec<&TraceEvent>> = HashMap::new();
    for e in events {
        by_doc.entry(e.doc_id.as_str()).or_default().push(e);
    }
    docs.iter()
        .map(|doc| {
            let mut transport = ReplayTransport::new(by_doc.get(doc.doc_id.as_str()).into_iter().flatten().copied());
            GenerationRecord::from_result(doc, run_self_supplemented(doc, &mut transport, config, &mut Vec::new()))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use std::sync::Arc;

    use super::*;
    use crate::context::origin_context;
    use crate::corpus::Split;
    use crate::gateway::{MockModel, MockTransport, ModelResponse};
    use crate::ner::{GazetteerTagger, Label};

    fn doc() -> Document {
        Document::new(
            "d1",
            "Angela Merkel arrived in Paris on Monday. The weather was mild. Merkel then met Emmanuel Macron at the Elysee.",
            "Angela Merkel and Emmanuel Macron in Paris.",
            "img-d1",
            None,
            Split::Test,
        )
    }

    fn mock() -> Arc<MockModel> {
        let tagger = GazetteerTagger::from_entries([
            ("Angela Merkel", Label::Person),
            ("Merkel", Label::Person),
            ("Emmanuel Macron", Label::Person),
            ("Paris", Label::Gpe),
            ("Elysee", Label::Fac),
        ])
        .without_rules();
        let mut m = MockModel::new(tagger);
        m.register_caption("img-d1", "Angela Merkel and Emmanuel Macron in Paris.");
        Arc::new(m)
    }

    #[test]
    fn request_accounting_and_stage_order() {
        let mut t = MockTransport::new(mock());
        let mut trace = Vec::new();
        let out = run_self_supplemented(&doc(), &mut t, &PipelineConfig::default(), &mut trace).unwrap();
        assert_eq!(out.requests, 5);
        let tasks: Vec<ModelTask> = trace
            .iter()
            .filter(|e| e.kind == TraceKind::Request)
            .map(|e| serde_json::from_str::<ModelRequest>(&e.line).unwrap().task)
            .collect();
        use ModelTask::*;
        assert_eq!(tasks, vec![SentSelect, SentSelect, SentSelect, EntSelect, Caption]);
        assert_eq!(out.selected_sentences, vec![0, 2]);
        assert_eq!(out.caption, "Angela Merkel arrived in Paris on Monday.");
        assert!(out.context.final_text.ends_with("The possible related entities are: Angela Merkel, Paris, Merkel, Emmanuel Macron, Elysee"));
    }

    struct Scripted {
        answer: &'static str,
    }

    impl Transport for Scripted {
        fn exchange(&mut self, _: &str, line: &str, _: Duration) -> Result<String, GatewayError> {
            let req: ModelRequest = serde_json::from_str(line).unwrap();
            let mut resp = ModelResponse { request_id: req.request_id, ..Default::default() };
            match req.task {
                ModelTask::SentSelect => resp.answer = Some(self.answer.into()),
                ModelTask::EntSelect => resp.entities = Some(Vec::new()),
                ModelTask::Caption => resp.caption = Some("a caption".into()),
            }
            Ok(serde_json::to_string(&resp).unwrap())
        }
    }

    #[test]
    fn empty_supplement_equals_origin() {
        let config = PipelineConfig::default();
        let out = run_self_supplemented(&doc(), &mut Scripted { answer: "no" }, &config, &mut Vec::new()).unwrap();
        let origin = origin_context(&doc(), config.context.style, config.context.origin_budget).unwrap();
        assert_eq!(out.context.final_text, origin.final_text);
        assert!(out.context.entity_hints.is_empty());
    }

    #[test]
    fn domain_violation_is_a_per_document_failure() {
        let docs = vec![doc(), Document::new("d2", "Paris is calm.", "Paris.", "img-d2", None, Split::Test)];
        let records = run_batch(&docs, || Ok(Scripted { answer: "maybe" }), &PipelineConfig::default(), 2, None);
        assert_eq!(records.len(), 2);
        assert!(records.iter().all(|r| r.error.as_deref().is_some_and(|e| e.contains("maybe"))));
        assert_eq!(records[1].doc_id, "d2");
    }

    #[test]
    fn trace_replays_identically() {
        let docs = vec![doc()];
        let sink_buf = Arc::new(Mutex::new(Vec::new()));
        struct Shared(Arc<Mutex<Vec<u8>>>);
        impl Write for Shared {
            fn write(&mut self, b: &[u8]) -> std::io::Result<usize> {
                self.0.lock().unwrap().write(b)
            }
            fn flush(&mut self) -> std::io::Result<()> {
                Ok(())
            }
        }
        let sink = TraceSink::new(Shared(sink_buf.clone()));
        let m = mock();
        let config = PipelineConfig::default();
        let live = run_batch(&docs, || Ok(MockTransport::new(m.clone())), &config, 1, Some(&sink));
        let events = read_trace(sink_buf.lock().unwrap().as_slice()).unwrap();
        assert_eq!(events.len(), 10);
        assert_eq!(replay_batch(&docs, &events, &config), live);

        let mut other = config.clone();
        other.context.origin_budget = 5;
        assert!(replay_batch(&docs, &events, &other)[0].error.as_deref().unwrap().contains("replay diverged"));
    }
}
