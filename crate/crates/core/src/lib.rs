//! AMR graph tooling: PENMAN I/O, DFS linearization with pointer tokens,
//! seeded corruption for denoising objectives, unified text+graph training
//! samples, vocabulary construction and Smatch/BLEU evaluation.

pub mod corrupt;
pub mod generate;
pub mod graph;
pub mod iso;
pub mod linearize;
pub mod metrics;
pub mod penman;
pub mod stats;
pub mod tasks;
pub mod vocab;

#[cfg(feature = "cli")]
pub mod cli;

pub use corrupt::{CorruptError, Corrupted, Corruption, CorruptionConfig, CorruptionRecord};
pub use graph::{validate, AmrGraph, Attribute, Diagnostic, Edge, InvalidGraph, NodeId};
pub use iso::is_isomorphic;
pub use linearize::{delinearize, linearize, repair, Token, TokenSeq};
pub use penman::{parse_penman, read_corpus, serialize_graph, serialize_penman, ParseMode, PenmanDocument, PenmanError};
pub use stats::{compute_stats, GraphStats};
pub use tasks::{build_corpus, build_sample, schedule_rate, MaskSchedule, TaskSample, TaskTag};
pub use vocab::{build_vocabulary, collect_symbols, decode, encode, Vocabulary};
