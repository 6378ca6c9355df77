//! Checkpoint files.
//!
//! ```text
//! ooc-checkpoint
//! version=1
//! kind=model
//! epoch=3
//! fingerprint=1f2e...
//! [settings]
//! topology=context-lm
//! ...
//! [end]
//! <binary body>
//! ```
//!
//! The body is little-endian: the vocabulary as length-prefixed text, then
//! every parameter (name, rank, dims, f64 data), then the optional Adam
//! state, then a closing marker. Floats are stored as raw bits, so a
//! save/load round trip is exact.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

use crate::corpus::Vocabulary;
use crate::error::{Error, Result};
use crate::models::{Model, ModelConfig, SentenceEncoder, SentenceRepr};
use crate::params::ParamStore;
use crate::tensor::Tensor;

use super::adam::AdamState;

const MAGIC: &str = "ooc-checkpoint";
const VERSION: u32 = 1;
const END: &[u8; 4] = b"END\n";

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CheckpointKind {
    /// A complete model of one topology.
    Model,
    /// A pre-trained sentence encoder.
    Encoder,
}

impl CheckpointKind {
    fn as_str(self) -> &'static str {
        match self {
            CheckpointKind::Model => "model",
            CheckpointKind::Encoder => "encoder",
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Checkpoint {
    pub kind: CheckpointKind,
    /// Key/value settings; a [`ModelConfig`] for models.
    pub settings: Vec<(String, String)>,
    pub params: ParamStore,
    pub adam: Option<AdamState>,
    /// Epochs completed when the checkpoint was taken; training resumes
    /// with the shuffle stream of this epoch.
    pub epoch: usize,
    pub vocab: Vocabulary,
}

impl Checkpoint {
    pub fn from_model(model: &Model, adam: Option<AdamState>, epoch: usize) -> Self {
        Self {
            kind: CheckpointKind::Model,
            settings: model.config.to_pairs(),
            params: without_grads(&model.params),
            adam,
            epoch,
            vocab: model.vocab.clone(),
        }
    }

    pub fn from_encoder(enc: &SentenceEncoder, vocab: &Vocabulary, mut settings: Vec<(String, String)>) -> Self {
        settings.retain(|(k, _)| k != "sentence_repr");
        settings.insert(0, ("sentence_repr".into(), enc.tag.to_string()));
        Self {
            kind: CheckpointKind::Encoder,
            settings,
            params: without_grads(&enc.params),
            adam: None,
            epoch: 0,
            vocab: vocab.clone(),
        }
    }

    pub fn setting(&self, key: &str) -> Option<&str> {
        self.settings
            .iter()
            .find(|(k, _)| k == key)
            .map(|(_, v)| v.as_str())
    }

    pub fn fingerprint(&self) -> String {
        self.vocab.fingerprint()
    }

    pub fn model_config(&self) -> Result<ModelConfig> {
        self.expect_kind(CheckpointKind::Model)?;
        let map: BTreeMap<String, String> = self.settings.iter().cloned().collect();
        ModelConfig::from_pairs(&map)
    }

    pub fn to_model(&self) -> Result<Model> {
        Model::from_params(self.model_config()?, self.vocab.clone(), self.params.clone())
    }

    pub fn to_encoder(&self) -> Result<SentenceEncoder> {
        self.expect_kind(CheckpointKind::Encoder)?;
        let tag: SentenceRepr = self
            .setting("sentence_repr")
            .ok_or_else(|| Error::format("checkpoint", "encoder without sentence_repr"))?
            .parse()?;
        SentenceEncoder::from_store(tag, &self.params)
    }

    fn expect_kind(&self, kind: CheckpointKind) -> Result<()> {
        if self.kind != kind {
            return Err(Error::Config(format!(
                "expected a {} checkpoint, found a {} checkpoint",
                kind.as_str(),
                self.kind.as_str()
            )));
        }
        Ok(())
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let mut header = format!(
            "{MAGIC}\nversion={VERSION}\nkind={}\nepoch={}\nfingerprint={}\n[settings]\n",
            self.kind.as_str(),
            self.epoch,
            self.fingerprint()
        );
        for (k, v) in &self.settings {
            let _ = writeln!(header, "{k}={v}");
        }
        header.push_str("[end]\n");

        let mut out = header.into_bytes();
        put_bytes(&mut out, self.vocab.to_text().as_bytes());
        put_u64(&mut out, self.params.len() as u64);
        for (name, t) in self.params.iter() {
            put_bytes(&mut out, name.as_bytes());
            put_u64(&mut out, t.shape().len() as u64);
            for &d in t.shape() {
                put_u64(&mut out, d as u64);
            }
            put_f64s(&mut out, t.data());
        }
        match &self.adam {
            None => out.push(0),
            Some(a) => {
                out.push(1);
                for x in [a.alpha, a.beta1, a.beta2, a.eps] {
                    out.extend_from_slice(&x.to_bits().to_le_bytes());
                }
                put_u64(&mut out, a.t);
                for (m, v) in a.m.iter().zip(&a.v) {
                    put_f64s(&mut out, m);
                    put_f64s(&mut out, v);
                }
            }
        }
        out.extend_from_slice(END);
        out
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        let mut r = Reader { bytes, pos: 0 };
        let bad = |d: &str| Error::format("checkpoint", d.to_string());

        if r.line()? != MAGIC {
            return Err(bad("not a checkpoint file"));
        }
        let mut head = BTreeMap::new();
        loop {
            let line = r.line()?;
            if line == "[settings]" {
                break;
            }
            let (k, v) = line.split_once('=').ok_or_else(|| bad("malformed header line"))?;
            head.insert(k.to_string(), v.to_string());
        }
        let field = |k: &str| head.get(k).ok_or_else(|| bad(&format!("missing header field {k}")));
        let version: u32 = field("version")?.parse().map_err(|_| bad("bad version"))?;
        if version != VERSION {
            return Err(bad(&format!("unsupported version {version}")));
        }
        let kind = match field("kind")?.as_str() {
            "model" => CheckpointKind::Model,
            "encoder" => CheckpointKind::Encoder,
            k => return Err(bad(&format!("unknown kind {k}"))),
        };
        let epoch = field("epoch")?.parse().map_err(|_| bad("bad epoch"))?;
        let fingerprint = field("fingerprint")?.clone();
        let mut settings = Vec::new();
        loop {
            let line = r.line()?;
            if line == "[end]" {
                break;
            }
            let (k, v) = line.split_once('=').ok_or_else(|| bad("malformed setting"))?;
            settings.push((k.to_string(), v.to_string()));
        }

        let vocab_text = String::from_utf8(r.bytes_field()?.to_vec()).map_err(|_| bad("vocabulary is not UTF-8"))?;
        let vocab = Vocabulary::from_text(&vocab_text)?;
        if vocab.fingerprint() != fingerprint {
            return Err(bad("embedded vocabulary does not match its fingerprint"));
        }

        let count = r.u64()? as usize;
        let mut params = ParamStore::new();
        let mut sizes = Vec::with_capacity(count.min(1 << 16));
        for _ in 0..count {
            let name = String::from_utf8(r.bytes_field()?.to_vec()).map_err(|_| bad("parameter name is not UTF-8"))?;
            let rank = r.u64()? as usize;
            if rank > 8 {
                return Err(bad("implausible tensor rank"));
            }
            let shape = (0..rank).map(|_| r.u64().map(|d| d as usize)).collect::<Result<Vec<_>>>()?;
            let numel = shape.iter().try_fold(1usize, |a, &d| a.checked_mul(d)).ok_or_else(|| bad("tensor too large"))?;
            let data = r.f64s(numel)?;
            if params.id(&name).is_some() {
                return Err(bad(&format!("duplicate parameter {name}")));
            }
            params.add(name, Tensor::new(&shape, data)?);
            sizes.push(numel);
        }
        let adam = match r.take(1)?[0] {
            0 => None,
            1 => {
                let hyper = r.f64s(4)?;
                let t = r.u64()?;
                let mut m = Vec::with_capacity(sizes.len());
                let mut v = Vec::with_capacity(sizes.len());
                for &n in &sizes {
                    m.push(r.f64s(n)?);
                    v.push(r.f64s(n)?);
                }
                Some(AdamState {
                    alpha: hyper[0],
                    beta1: hyper[1],
                    beta2: hyper[2],
                    eps: hyper[3],
                    t,
                    m,
                    v,
                })
            }
            _ => return Err(bad("bad optimizer flag")),
        };
        if r.take(END.len())? != END || r.pos != bytes.len() {
            return Err(bad("missing end marker"));
        }
        Ok(Self {
            kind,
            settings,
            params,
            adam,
            epoch,
            vocab,
        })
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_bytes()).map_err(|e| Error::io(path, e))
    }

    /// Reads a checkpoint; with `expected_fingerprint`, a checkpoint built
    /// on a different vocabulary is rejected.
    pub fn load(path: &Path, expected_fingerprint: Option<&str>) -> Result<Self> {
        let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
        let c = Self::from_bytes(&bytes)?;
        if let Some(expected) = expected_fingerprint {
            let found = c.fingerprint();
            if found != expected {
                return Err(Error::Fingerprint {
                    expected: expected.to_string(),
                    found,
                });
            }
        }
        Ok(c)
    }
}

/// Gradients are transient and never stored.
fn without_grads(params: &ParamStore) -> ParamStore {
    let mut p = params.clone();
    p.zero_grad();
    p
}

fn put_u64(out: &mut Vec<u8>, v: u64) {
    out.extend_from_slice(&v.to_le_bytes());
}

fn put_bytes(out: &mut Vec<u8>, b: &[u8]) {
    put_u64(out, b.len() as u64);
    out.extend_from_slice(b);
}

fn put_f64s(out: &mut Vec<u8>, xs: &[f64]) {
    for x in xs {
        out.extend_from_slice(&x.to_bits().to_le_bytes());
    }
}

struct Reader<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8]> {
        let end = self
            .pos
            .checked_add(n)
            .filter(|&e| e <= self.bytes.len())
            .ok_or_else(|| Error::format("checkpoint", "truncated file"))?;
        let s = &self.bytes[self.pos..end];
        self.pos = end;
        Ok(s)
    }

    fn line(&mut self) -> Result<&'a str> {
        let rest = &self.bytes[self.pos..];
        let n = rest
            .iter()
            .take(4096)
            .position(|&b| b == b'\n')
            .ok_or_else(|| Error::format("checkpoint", "truncated header"))?;
        let s = std::str::from_utf8(&rest[..n]).map_err(|_| Error::format("checkpoint", "header is not UTF-8"))?;
        self.pos += n + 1;
        Ok(s)
    }

    fn u64(&mut self) -> Result<u64> {
        Ok(u64::from_le_bytes(self.take(8)?.try_into().expect("8 bytes")))
    }

    fn bytes_field(&mut self) -> Result<&'a [u8]> {
        let n = self.u64()? as usize;
        self.take(n)
    }

    fn f64s(&mut self, n: usize) -> Result<Vec<f64>> {
        let raw = self.take(n.checked_mul(8).ok_or_else(|| Error::format("checkpoint", "tensor too large"))?)?;
        Ok(raw
            .chunks_exact(8)
            .map(|c| f64::from_bits(u64::from_le_bytes(c.try_into().expect("8 bytes"))))
            .collect())
    }
}
