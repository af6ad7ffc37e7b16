//! Density-matrix word meanings: learning them from text, composing them into
//! phrase and sentence meanings, and scoring metaphor paraphrases with them.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod compose;
pub mod corpus;
pub mod error;
pub mod eval;
pub mod io;
pub mod linalg;
pub mod senses;
pub mod store;
pub mod synthetic;
pub mod train;
pub mod vectors;

pub use compose::{
    compose_fragment, compose_pair, ComposeConfig, ComposeError, Fragment, Method, OperatorSide,
};
pub use corpus::{Corpus, CorpusError, Vocabulary};
pub use error::{Error, Result};
pub use eval::{EvalError, EvalReport, Triple};
pub use linalg::{DensityMatrix, EigenSystem, LinalgError, SenseMatrix, SimMode};
pub use senses::SenseError;
pub use store::{DensityStore, MatrixLookup};
pub use train::{TrainConfig, TrainError, Variant};
pub use vectors::WordVectors;
