//! Hierarchical context-aware recurrent models for detecting out-of-context
//! words: corpus corruption, model training and threshold-sweep evaluation.

pub mod corpus;
pub mod evaluation;
pub mod error;
pub mod gradcheck;
pub mod graph;
pub mod models;
pub mod nn;
pub mod params;
pub mod seed;
pub mod synthetic;
pub mod tensor;
pub mod training;
pub mod trend;

pub use error::{Error, Result};
pub use graph::{Graph, Var};
pub use params::{Binding, ParamId, ParamStore};
pub use tensor::Tensor;
