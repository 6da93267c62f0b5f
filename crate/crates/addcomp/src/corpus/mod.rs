//! Corpus ingestion: vocabulary construction, target enumeration, and
//! context co-occurrence counting under ordinary sliding windows, Near-far
//! labeled windows, and exact count-partition targets.
//!
//! Input corpora are UTF-8 plain text, one sentence per line, tokens
//! separated by single spaces (tokenization/lemmatization is out of scope).

mod count;
mod table;
mod target;
mod vocab;

pub use count::{count_contexts, extract_targets, ContextConfig, TargetSet};
pub use table::{CoocTable, TargetCounts};
pub use target::TargetKey;
pub use vocab::Vocabulary;
