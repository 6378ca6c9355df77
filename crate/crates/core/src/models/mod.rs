//! The five evaluated topologies and the pre-trained sentence encoders.

mod config;
mod encoder;
mod model;
mod pretrain;

pub use config::{ModelConfig, SentenceRepr, Topology};
pub use encoder::{SentenceEncoder, ENCODER_PREFIX};
pub use model::{
    attn_lm_forward, binclass_forward, encode_context, encode_sentence, lm_forward, ContextVector, Instance, LmOutput,
    Model, PreparedDoc, ReprCache,
};
pub use pretrain::{pretrain_sentenc_lm, pretrain_sentenc_nmt, PretrainConfig, Pretrained, Seq2Seq};
