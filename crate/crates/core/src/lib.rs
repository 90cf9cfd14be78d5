//! Corpus curation toolkit for source-code LLM pretraining data.
//!
//! The pipeline stages live in their own modules and are pure per-file
//! functions wherever possible, so callers can fan work out across threads
//! and merge reports associatively:
//!
//! - [`corpus`] — record model plus streaming JSONL ingest/emit
//! - [`pii`] — email/IP/key detection, redaction, and benchmark scoring
//! - [`dedup`] — MinHash + LSH near-duplicate detection
//! - [`filters`] — per-file quality filters (stars, comments, line stats, fertility)
//! - [`tokenizer`] — byte-level BPE training, encoding, decoding
//! - [`fim`] — fill-in-the-middle transformation and sequence packing
//! - [`eval`] — pass@k estimation, infill task construction, decontamination

pub mod corpus;
pub mod dedup;
pub mod eval;
pub mod filters;
pub mod fim;
pub mod pii;
pub mod tokenizer;
