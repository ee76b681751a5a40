//! Language-modeling loss arithmetic over externally produced per-token
//! log-probabilities, and the weighted multi-task total.

use std::io::{BufRead, Write};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::alignment::Task;
use crate::corpus::CorpusStyle;

#[derive(Debug, Error)]
pub enum LossError {
    #[error("empty token log-prob list")]
    EmptyTokens,
    #[error("log-prob {value} at token {index} is positive")]
    PositiveLogProb { index: usize, value: f64 },
    #[error("log-prob at token {0} is not finite")]
    NonFinite(usize),
    #[error("{task} loss is negative ({value})")]
    NegativeLoss { task: Task, value: f64 },
    #[error("invalid task weights: {0}")]
    InvalidWeights(String),
    #[error("empty batch")]
    EmptyBatch,
    #[error("line {line}: {message}")]
    Malformed { line: usize, message: String },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Natural-log conditional probabilities of each target token.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TokenLogProbs(Vec<f64>);

impl TokenLogProbs {
    pub fn new(logprobs: Vec<f64>) -> Result<Self, LossError> {
        if logprobs.is_empty() {
            return Err(LossError::EmptyTokens);
        }
        for (index, &value) in logprobs.iter().enumerate() {
            if !value.is_finite() {
                return Err(LossError::NonFinite(index));
            }
            if value > 0.0 {
                return Err(LossError::PositiveLogProb { index, value });
            }
        }
        Ok(TokenLogProbs(logprobs))
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }
}

/// Negative mean log-probability.
pub fn lm_loss(tlp: &TokenLogProbs) -> f64 {
    let sum: f64 = tlp.0.iter().sum();
    // -0.0 for all-zero inputs reads oddly in reports
    (-sum / tlp.0.len() as f64).max(0.0)
}

/// Per-sample losses averaged over the batch.
pub fn batch_loss<'a>(batch: impl IntoIterator<Item = &'a TokenLogProbs>) -> Result<f64, LossError> {
    let (mut total, mut n) = (0.0, 0usize);
    for tlp in batch {
        total += lm_loss(tlp);
        n += 1;
    }
    if n == 0 {
        return Err(LossError::EmptyBatch);
    }
    Ok(total / n as f64)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TaskWeights {
    pub w_sent: f64,
    pub w_ent: f64,
    pub w_cap: f64,
}

impl TaskWeights {
    pub fn new(w_sent: f64, w_ent: f64, w_cap: f64) -> Result<Self, LossError> {
        for (name, w) in [("w_sent", w_sent), ("w_ent", w_ent), ("w_cap", w_cap)] {
            if !w.is_finite() || w < 0.0 {
                return Err(LossError::InvalidWeights(format!("{name} = {w}")));
            }
        }
        if w_cap <= 0.0 {
            return Err(LossError::InvalidWeights("w_cap must be positive".into()));
        }
        Ok(TaskWeights { w_sent, w_ent, w_cap })
    }

    pub const fn goodnews() -> Self {
        TaskWeights { w_sent: 0.5, w_ent: 0.25, w_cap: 1.0 }
    }

    pub const fn nytimes() -> Self {
        TaskWeights { w_sent: 0.25, w_ent: 0.75, w_cap: 1.0 }
    }

    /// Captioning only.
    pub const fn base() -> Self {
        TaskWeights { w_sent: 0.0, w_ent: 0.0, w_cap: 1.0 }
    }

    pub fn for_style(style: CorpusStyle) -> Self {
        match style {
            CorpusStyle::NyTimes => Self::nytimes(),
            CorpusStyle::GoodNews | CorpusStyle::Generic => Self::goodnews(),
        }
    }

    pub fn weight(&self, task: Task) -> f64 {
        match task {
            Task::Sent => self.w_sent,
            Task::Ent => self.w_ent,
            Task::Cap => self.w_cap,
        }
    }
}

impl Default for TaskWeights {
    fn default() -> Self {
        Self::goodnews()
    }
}

pub fn weighted_total(l_sent: f64, l_ent: f64, l_cap: f64, w: &TaskWeights) -> Result<f64, LossError> {
    for (task, value) in [(Task::Sent, l_sent), (Task::Ent, l_ent), (Task::Cap, l_cap)] {
        if value.is_nan() || value < 0.0 {
            return Err(LossError::NegativeLoss { task, value });
        }
    }
    Ok(w.w_sent * l_sent + w.w_ent * l_ent + w.w_cap * l_cap)
}

/// One line of a trainer's log-prob dump.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LogProbRecord {
    pub sample_id: String,
    pub task: Task,
    pub logprobs: Vec<f64>,
}

pub fn read_logprob_records<R: BufRead>(reader: R) -> Result<Vec<(LogProbRecord, TokenLogProbs)>, LossError> {
    let mut out = Vec::new();
    for (i, line) in reader.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let malformed = |message: String| LossError::Malformed { line: i + 1, message };
        let rec: LogProbRecord = serde_json::from_str(&line).map_err(|e| malformed(e.to_string()))?;
        let tlp = TokenLogProbs::new(rec.logprobs.clone()).map_err(|e| malformed(format!("{}: {e}", rec.sample_id)))?;
        out.push((rec, tlp));
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct TaskLoss {
    pub samples: usize,
    pub loss: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LossAudit {
    pub weights: TaskWeights,
    pub sent: TaskLoss,
    pub ent: TaskLoss,
    pub cap: TaskLoss,
    pub total: f64,
}

/// Per-task batch means and their weighted total. Tasks without samples
/// contribute zero.
pub fn audit(records: &[(LogProbRecord, TokenLogProbs)], weights: TaskWeights) -> Result<LossAudit, LossError> {
    if records.is_empty() {
        return Err(LossError::EmptyBatch);
    }
    let per_task = |task: Task| -> Result<TaskLoss, LossError> {
        let batch: Vec<&TokenLogProbs> = records.iter().filter(|(r, _)| r.task == task).map(|(_, t)| t).collect();
        if batch.is_empty() {
            return Ok(TaskLoss::default());
        }
        Ok(TaskLoss { samples: batch.len(), loss: batch_loss(batch)? })
    };
    let (sent, ent, cap) = (per_task(Task::Sent)?, per_task(Task::Ent)?, per_task(Task::Cap)?);
    let total = weighted_total(sent.loss, ent.loss, cap.loss, &weights)?;
    Ok(LossAudit { weights, sent, ent, cap, total })
}

pub fn write_audit<W: Write>(audit: &LossAudit, mut w: W) -> Result<(), LossError> {
    serde_json::to_writer_pretty(&mut w, audit).map_err(std::io::Error::from)?;
    writeln!(w)?;
    Ok(())
}
