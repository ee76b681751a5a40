//! Entity-aware news image captioning toolkit.
//!
//! The crate covers the data side of caption generation with multimodal
//! language models: corpus ingestion and sentence segmentation, entity
//! recognition, construction of the sentence-selection / entity-selection /
//! captioning training samples, textual context regimes, a line-delimited
//! protocol for driving an external model through two-stage
//! self-supplemented generation, caption metrics and loss arithmetic.

pub mod alignment;
pub mod context;
pub mod gateway;
pub mod corpus;
pub mod loss;
pub mod metrics;
pub mod ner;
pub mod synth;
pub mod text;

mod seed;

pub use alignment::{AlignmentSample, MiniGroup, Task};
pub use context::{Regime, SupplementedContext};
pub use corpus::{Corpus, CorpusStyle, Document, Sentence};
pub use ner::{Entity, Label, Tagger, VisualEntityPolicy};
