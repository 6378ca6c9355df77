use rand::seq::SliceRandom;

use crate::error::{Error, Result};
use crate::seed;

use super::types::Document;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Splits {
    pub train: Vec<Document>,
    pub dev: Vec<Document>,
    pub test: Vec<Document>,
}

/// Random document-level 60/20/20 partition. Dev and test sizes are
/// rounded to nearest and train takes the remainder. The input order does
/// not matter: documents are sorted by id before shuffling.
pub fn split_corpus(docs: Vec<Document>, seed: u64) -> Result<Splits> {
    let n = docs.len();
    if n < 5 {
        return Err(Error::contract(format!("splitting needs at least 5 documents, got {n}")));
    }
    let mut docs = docs;
    docs.sort_by(|a, b| a.id.cmp(&b.id));
    let mut rng = seed::stream(seed, &[seed::SPLIT]);
    docs.shuffle(&mut rng);

    let held_out = (n as f64 * 0.2).round() as usize;
    let test = docs.split_off(n - held_out);
    let dev = docs.split_off(n - 2 * held_out);
    Ok(Splits {
        train: docs,
        dev,
        test,
    })
}
