use std::collections::HashMap;
use std::io::{BufRead, Write};
use std::net::TcpListener;
use std::time::Duration;

use super::{GatewayError, ModelRequest, ModelResponse, ModelTask, Transport};
use crate::alignment::{NO, YES};
use crate::corpus::{segment_sentences, Corpus};
use crate::ner::{dedup_surfaces, EntitySource, GazetteerTagger};
use crate::text::{contains_surface, first_words};

/// Average caption length in words of the news caption corpora.
pub const MOCK_CAPTION_WORDS: usize = 18;

/// A rule-based stand-in for the aligned model.
///
/// * `sent_select`: "yes" iff the sentence contains a gazetteer entity that
///   also occurs in the caption registered for the image.
/// * `ent_select`: the distinct gazetteer entities of the text, in order.
/// * `caption`: the first sentence of the text, cut to 18 words.
#[derive(Debug, Clone)]
pub struct MockModel {
    tagger: GazetteerTagger,
    captions: HashMap<String, String>,
}

impl MockModel {
    pub fn new(tagger: GazetteerTagger) -> Self {
        MockModel { tagger, captions: HashMap::new() }
    }

    pub fn with_corpus(tagger: GazetteerTagger, corpus: &Corpus) -> Self {
        let mut m = Self::new(tagger);
        for doc in corpus {
            m.register_caption(&doc.image_ref, &doc.caption);
        }
        m
    }

    pub fn register_caption(&mut self, image_ref: impl Into<String>, caption: impl Into<String>) {
        self.captions.insert(image_ref.into(), caption.into());
    }

    fn entities(&self, text: &str) -> Vec<String> {
        dedup_surfaces(&self.tagger.tag(text, EntitySource::Other))
    }

    pub fn respond(&self, req: &ModelRequest) -> ModelResponse {
        let mut resp = ModelResponse { request_id: req.request_id.clone(), ..Default::default() };
        match req.task {
            ModelTask::SentSelect => {
                let caption = self.captions.get(&req.image_ref).map_or("", String::as_str);
                let hit = self.entities(&req.text).iter().any(|e| contains_surface(caption, e));
                resp.answer = Some(if hit { YES } else { NO }.to_string());
            }
            ModelTask::EntSelect => resp.entities = Some(self.entities(&req.text)),
            ModelTask::Caption => {
                let first = segment_sentences(&req.text).into_iter().next().map(|s| s.text).unwrap_or_default();
                resp.caption = Some(first_words(&first, MOCK_CAPTION_WORDS));
            }
        }
        resp
    }

    /// Answers one request line. Unparseable requests get a record the
    /// client will reject.
    pub fn respond_line(&self, line: &str) -> String {
        match serde_json::from_str::<ModelRequest>(line.trim_end()) {
            Ok(req) => serde_json::to_string(&self.respond(&req)).expect("responses serialize"),
            Err(e) => serde_json::json!({ "error": e.to_string() }).to_string(),
        }
    }

    /// Serves until the input closes.
    pub fn serve<R: BufRead, W: Write>(&self, input: R, mut output: W) -> std::io::Result<()> {
        for line in input.lines() {
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            writeln!(output, "{}", self.respond_line(&line))?;
            output.flush()?;
        }
        Ok(())
    }

    /// Accepts connections one thread each until the listener fails.
    pub fn serve_tcp(&self, listener: TcpListener) -> std::io::Result<()> {
        std::thread::scope(|scope| {
            for stream in listener.incoming() {
                let stream = stream?;
                scope.spawn(move || {
                    let reader = std::io::BufReader::new(stream.try_clone()?);
                    self.serve(reader, stream)
                });
            }
            Ok(())
        })
    }
}

/// The mock called in-process, still going through the wire format.
#[derive(Debug, Clone)]
pub struct MockTransport {
    model: std::sync::Arc<MockModel>,
}

impl MockTransport {
    pub fn new(model: std::sync::Arc<MockModel>) -> Self {
        MockTransport { model }
    }
}

impl Transport for MockTransport {
    fn exchange(&mut self, _request_id: &str, line: &str, _timeout: Duration) -> Result<String, GatewayError> {
        Ok(self.model.respond_line(line))
    }
}
