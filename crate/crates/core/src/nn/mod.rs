//! Parameterized layers. Each layer owns [`ParamId`](crate::params::ParamId)s
//! into a shared [`ParamStore`](crate::params::ParamStore) and is bound into
//! a graph through a [`Binding`](crate::params::Binding).

mod attention;
mod embedding;
mod linear;
mod lstm;

pub use attention::{BahdanauAttention, Memory};
pub use embedding::Embedding;
pub use linear::Linear;
pub use lstm::{LstmCell, LstmState};
