//! Core algorithms for extracting the top-k most representative topics of a
//! given area from a knowledge base.
//!
//! The pipeline: normalize page titles into a topic lexicon, tokenize a corpus
//! by greedy longest phrase matching, train skip-gram topic embeddings with
//! negative sampling, walk the category graph to depth-weight candidates, and
//! greedily pick the k topics that maximize a submodular representativeness
//! objective.  File formats, the CLI, and wall-clock timing live in the
//! companion `areatopics` crate; this crate is no_std + alloc so the
//! algorithms stay free of IO concerns.

#![cfg_attr(not(any(test, feature = "std")), no_std)]

extern crate alloc;

pub mod embedding;
pub mod eval;
pub mod extract;
pub mod graph;
pub mod lexicon;

mod topic;

pub use topic::TopicId;
