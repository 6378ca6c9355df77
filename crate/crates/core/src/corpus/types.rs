#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash)]
pub enum Label {
    #[default]
    Valid = 0,
    OutOfContext = 1,
}

impl Label {
    pub fn as_f64(self) -> f64 {
        match self {
            Label::Valid => 0.0,
            Label::OutOfContext => 1.0,
        }
    }

    pub fn is_positive(self) -> bool {
        self == Label::OutOfContext
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash)]
pub enum Pos {
    Noun,
    #[default]
    Other,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Token {
    pub surface: String,
    pub lower: String,
    /// Set by [`Vocabulary::assign`](super::Vocabulary::assign).
    pub vocab_id: usize,
    pub label: Label,
    pub pos: Pos,
}

impl Token {
    pub fn new(surface: impl Into<String>) -> Self {
        let surface = surface.into();
        Self {
            lower: surface.to_lowercase(),
            surface,
            vocab_id: 0,
            label: Label::Valid,
            pos: Pos::Other,
        }
    }

    pub fn with_pos(mut self, pos: Pos) -> Self {
        self.pos = pos;
        self
    }

    pub fn set_surface(&mut self, surface: &str) {
        self.surface = surface.to_string();
        self.lower = surface.to_lowercase();
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Sentence {
    pub index: usize,
    pub tokens: Vec<Token>,
}

impl Sentence {
    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }

    pub fn ids(&self) -> Vec<usize> {
        self.tokens.iter().map(|t| t.vocab_id).collect()
    }

    pub fn text(&self) -> String {
        self.tokens
            .iter()
            .map(|t| t.surface.as_str())
            .collect::<Vec<_>>()
            .join(" ")
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Document {
    pub id: String,
    pub sentences: Vec<Sentence>,
    /// Part-of-speech tags came with the input and must not be re-tagged.
    pub pretagged: bool,
}

impl Document {
    pub fn token_count(&self) -> usize {
        self.sentences.iter().map(Sentence::len).sum()
    }

    pub fn tokens(&self) -> impl Iterator<Item = &Token> {
        self.sentences.iter().flat_map(|s| s.tokens.iter())
    }

    /// Renumbers sentence indices to match their positions.
    pub fn reindex(&mut self) {
        for (i, s) in self.sentences.iter_mut().enumerate() {
            s.index = i;
        }
    }
}
