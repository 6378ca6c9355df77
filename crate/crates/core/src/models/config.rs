use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Topology {
    BaselineLm,
    BaselineBinclass,
    ContextLm,
    ContextAttnLm,
    ContextBinclass,
}

impl Topology {
    pub const ALL: [Topology; 5] = [
        Topology::BaselineLm,
        Topology::BaselineBinclass,
        Topology::ContextLm,
        Topology::ContextAttnLm,
        Topology::ContextBinclass,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Topology::BaselineLm => "baseline-lm",
            Topology::BaselineBinclass => "baseline-binclass",
            Topology::ContextLm => "context-lm",
            Topology::ContextAttnLm => "context-attn-lm",
            Topology::ContextBinclass => "context-binclass",
        }
    }

    /// Language models are trained without labels and scored by NLL.
    pub fn is_lm(self) -> bool {
        matches!(
            self,
            Topology::BaselineLm | Topology::ContextLm | Topology::ContextAttnLm
        )
    }

    pub fn is_contextual(self) -> bool {
        !matches!(self, Topology::BaselineLm | Topology::BaselineBinclass)
    }
}

impl fmt::Display for Topology {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Topology {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Topology::ALL
            .into_iter()
            .find(|t| t.as_str() == s)
            .ok_or_else(|| Error::Config(format!("unknown topology {s:?}")))
    }
}

/// Provenance of a pre-trained sentence encoder.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum SentenceRepr {
    LmCr,
    NmtCr,
    None,
}

impl SentenceRepr {
    pub fn as_str(self) -> &'static str {
        match self {
            SentenceRepr::LmCr => "lm-cr",
            SentenceRepr::NmtCr => "nmt-cr",
            SentenceRepr::None => "none",
        }
    }
}

impl fmt::Display for SentenceRepr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for SentenceRepr {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "lm-cr" => Ok(SentenceRepr::LmCr),
            "nmt-cr" => Ok(SentenceRepr::NmtCr),
            "none" => Ok(SentenceRepr::None),
            _ => Err(Error::Config(format!("unknown sentence representation {s:?}"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ModelConfig {
    pub topology: Topology,
    pub sentence_repr: SentenceRepr,
    pub embed_dim: usize,
    pub hidden_dim: usize,
    /// Vocabulary size including the reserved symbols.
    pub vocab_size: usize,
    /// Number of preceding sentences summarized into the context vector.
    pub context_window: usize,
    pub max_sentence_len: usize,
    pub seed: u64,
    /// Train the sentence encoder jointly instead of keeping it frozen.
    pub finetune_encoder: bool,
}

impl ModelConfig {
    /// Full-scale hyper-parameters for `topology`.
    pub fn new(topology: Topology, vocab_size: usize) -> Self {
        Self {
            topology,
            sentence_repr: if topology.is_contextual() {
                SentenceRepr::LmCr
            } else {
                SentenceRepr::None
            },
            embed_dim: 256,
            hidden_dim: 512,
            vocab_size,
            context_window: 10,
            max_sentence_len: 50,
            seed: 0,
            finetune_encoder: false,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let fail = |m: String| Err(Error::Config(m));
        if self.topology.is_contextual() == (self.sentence_repr == SentenceRepr::None) {
            return fail(format!(
                "topology {} cannot use sentence representation {}",
                self.topology, self.sentence_repr
            ));
        }
        if self.context_window == 0 {
            return fail("context window must be at least 1".into());
        }
        if self.embed_dim == 0 || self.hidden_dim == 0 {
            return fail("embedding and hidden dimensions must be positive".into());
        }
        if self.vocab_size < 5 {
            return fail(format!("vocabulary size {} is below 5", self.vocab_size));
        }
        if self.max_sentence_len == 0 {
            return fail("maximum sentence length must be positive".into());
        }
        Ok(())
    }

    pub fn to_pairs(&self) -> Vec<(String, String)> {
        [
            ("topology", self.topology.to_string()),
            ("sentence_repr", self.sentence_repr.to_string()),
            ("embed_dim", self.embed_dim.to_string()),
            ("hidden_dim", self.hidden_dim.to_string()),
            ("vocab_size", self.vocab_size.to_string()),
            ("context_window", self.context_window.to_string()),
            ("max_sentence_len", self.max_sentence_len.to_string()),
            ("seed", self.seed.to_string()),
            ("finetune_encoder", self.finetune_encoder.to_string()),
        ]
        .into_iter()
        .map(|(k, v)| (k.to_string(), v))
        .collect()
    }

    pub fn from_pairs(pairs: &BTreeMap<String, String>) -> Result<Self> {
        fn get<'a>(p: &'a BTreeMap<String, String>, k: &str) -> Result<&'a str> {
            p.get(k)
                .map(String::as_str)
                .ok_or_else(|| Error::Config(format!("missing model setting {k}")))
        }
        fn num<T: FromStr>(p: &BTreeMap<String, String>, k: &str) -> Result<T> {
            let v = get(p, k)?;
            v.parse()
                .map_err(|_| Error::Config(format!("{k}: cannot parse {v:?}")))
        }
        let c = Self {
            topology: get(pairs, "topology")?.parse()?,
            sentence_repr: get(pairs, "sentence_repr")?.parse()?,
            embed_dim: num(pairs, "embed_dim")?,
            hidden_dim: num(pairs, "hidden_dim")?,
            vocab_size: num(pairs, "vocab_size")?,
            context_window: num(pairs, "context_window")?,
            max_sentence_len: num(pairs, "max_sentence_len")?,
            seed: num(pairs, "seed")?,
            finetune_encoder: num(pairs, "finetune_encoder")?,
        };
        c.validate()?;
        Ok(c)
    }

    /// Row label in the style of the results table.
    pub fn display_name(&self) -> String {
        let base = match self.topology {
            Topology::BaselineLm => "Baseline Lang Model",
            Topology::BaselineBinclass => "Baseline Bin Class Model",
            Topology::ContextLm => "Context Lang Model",
            Topology::ContextAttnLm => "Context Attn Lang Model",
            Topology::ContextBinclass => "Context Bin Class Model",
        };
        match self.sentence_repr {
            SentenceRepr::None => base.to_string(),
            r => format!("{base} {}", r.as_str().to_uppercase()),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pairs_round_trip() {
        let mut c = ModelConfig::new(Topology::ContextAttnLm, 30_000);
        c.sentence_repr = SentenceRepr::NmtCr;
        c.seed = 99;
        let map = c.to_pairs().into_iter().collect();
        assert_eq!(ModelConfig::from_pairs(&map).unwrap(), c);
        assert_eq!(c.display_name(), "Context Attn Lang Model NMT-CR");
    }

    #[test]
    fn baseline_rejects_sentence_encoder() {
        let mut c = ModelConfig::new(Topology::BaselineLm, 100);
        c.sentence_repr = SentenceRepr::LmCr;
        assert!(matches!(c.validate(), Err(Error::Config(_))));
        let mut c = ModelConfig::new(Topology::ContextLm, 100);
        c.sentence_repr = SentenceRepr::None;
        assert!(c.validate().is_err());
        let mut c = ModelConfig::new(Topology::ContextLm, 100);
        c.context_window = 0;
        assert!(c.validate().is_err());
    }

    #[test]
    fn topology_names_parse() {
        for t in Topology::ALL {
            assert_eq!(t.as_str().parse::<Topology>().unwrap(), t);
        }
        assert!("lstm".parse::<Topology>().is_err());
    }
}
