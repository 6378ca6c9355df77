//! Lexicon and suffix based noun tagger, plus the plural and lemma
//! heuristics used when matching replacements.

use std::collections::HashSet;
use std::sync::OnceLock;

use super::types::{Document, Pos};

const CLOSED_CLASS: &str = "
a an the this that these those my your his her its our their some any every each no all both
either neither another such what which whose whichever whatever
i me you he him she it we us they them myself yourself himself herself itself ourselves
yourselves themselves mine yours hers ours theirs who whom someone somebody something anyone
anybody anything everyone everybody everything nobody nothing one ones
in on at by for with about against between into through during before after above below to
from up down out off over under again further then once of as than via per upon within without
across along among around behind beyond near toward towards onto unto till until since
and or but nor so yet if because although though while whereas unless whether
is am are was were be been being do does did doing done have has had having will would can
could shall should may might must ought 's 're 've 'd 'll
not very too also just only even still already always never ever often sometimes here there
where when why how now then really quite rather almost maybe perhaps yes yeah okay ok oh well
more most less least much many few several other same own else however therefore thus
together whatever later soon whenever wherever
";

const NON_NOUN: &str = "
big small large little new old good bad great different important possible able simple hard
easy real true right wrong long short high low young first last next early late whole sure
better best worse worst bigger smaller larger higher lower greater
get got make made go went gone come came say said see saw seen know knew known think thought
take took give gave find found tell told become became feel felt leave left keep kept let
begin began show showed use used want wanted need needed look looked try tried call called
like liked love loved start started help helped talk talked turn turned move moved live lived
believe believed happen happened build built create created understand understood
";

const NOUN_LEXICON: &str = "
time year people way day man woman child children thing world life lives hand part place case
week company system program question work government number night point home water room mother
area money story fact month lot right study book eye job word business issue side kind head
house service friend father power hour game line end member law car city community name
president team minute idea kid body information back parent face others level office door
health person art war history party result change morning reason research girl guy moment air
teacher force education engineering performance artist explanation brain planet science music
problem design technology energy ocean country school family food picture computer data
language culture network machine robot disease cancer patient doctor medicine space species
animal tree plant forest river earth sun star universe galaxy rocket telescope orbit
";

const NOUN_SUFFIXES: [&str; 10] = ["tion", "sion", "ment", "ness", "ity", "er", "ism", "ship", "ance", "ence"];

struct Lexicon {
    closed: HashSet<&'static str>,
    non_noun: HashSet<&'static str>,
    nouns: HashSet<&'static str>,
}

fn lexicon() -> &'static Lexicon {
    static LEX: OnceLock<Lexicon> = OnceLock::new();
    LEX.get_or_init(|| Lexicon {
        closed: CLOSED_CLASS.split_whitespace().collect(),
        non_noun: NON_NOUN.split_whitespace().collect(),
        nouns: NOUN_LEXICON.split_whitespace().collect(),
    })
}

const DETERMINERS: [&str; 15] = [
    "a", "an", "the", "this", "that", "these", "those", "my", "your", "his", "her", "its", "our", "their", "every",
];

fn is_word(lower: &str) -> bool {
    lower.chars().any(char::is_alphabetic) && !lower.chars().all(|c| c.is_numeric())
}

/// Plural by suffix: ends in `s` but not `ss`, `us` or `is`.
pub fn is_plural(word: &str) -> bool {
    let w = word.to_lowercase();
    w.chars().count() > 3 && w.ends_with('s') && !w.ends_with("ss") && !w.ends_with("us") && !w.ends_with("is")
}

/// Lowercased surface with the plural suffix stripped
/// (`-ses` → `-s`, `-ies` → `-y`, otherwise `-s` dropped).
pub fn lemma(word: &str) -> String {
    let w = word.to_lowercase();
    if !is_plural(&w) {
        return w;
    }
    if let Some(stem) = w.strip_suffix("ses") {
        format!("{stem}s")
    } else if let Some(stem) = w.strip_suffix("ies") {
        format!("{stem}y")
    } else {
        w[..w.len() - 1].to_string()
    }
}

fn heuristic_noun(lower: &str, prev: Option<&str>) -> bool {
    let lex = lexicon();
    if !is_word(lower) || lex.closed.contains(lower) {
        return false;
    }
    let base = lemma(lower);
    if lex.nouns.contains(lower) || lex.nouns.contains(base.as_str()) {
        return true;
    }
    if lex.non_noun.contains(lower) || lex.non_noun.contains(base.as_str()) {
        return false;
    }
    if NOUN_SUFFIXES
        .iter()
        .any(|s| base.len() > s.len() + 2 && base.ends_with(s))
    {
        return true;
    }
    prev.is_some_and(|p| DETERMINERS.contains(&p))
}

/// Tags every token as noun or other. Pre-tagged documents are unchanged.
pub fn pos_tag(doc: &mut Document) {
    if doc.pretagged {
        return;
    }
    for s in &mut doc.sentences {
        let mut prev: Option<String> = None;
        for t in &mut s.tokens {
            t.pos = if heuristic_noun(&t.lower, prev.as_deref()) {
                Pos::Noun
            } else {
                Pos::Other
            };
            prev = Some(t.lower.clone());
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Capitalization {
    Lower,
    Capitalized,
    Upper,
}

impl Capitalization {
    pub fn of(word: &str) -> Self {
        let letters: Vec<char> = word.chars().filter(|c| c.is_alphabetic()).collect();
        let first_upper = word.chars().next().is_some_and(char::is_uppercase);
        if letters.len() > 1 && letters.iter().all(|c| c.is_uppercase()) {
            Capitalization::Upper
        } else if first_upper {
            Capitalization::Capitalized
        } else {
            Capitalization::Lower
        }
    }

    /// Renders a lowercase word in this pattern.
    pub fn apply(self, lower: &str) -> String {
        match self {
            Capitalization::Lower => lower.to_string(),
            Capitalization::Upper => lower.to_uppercase(),
            Capitalization::Capitalized => {
                let mut chars = lower.chars();
                match chars.next() {
                    Some(c) => c.to_uppercase().chain(chars).collect(),
                    None => String::new(),
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::tokenize;

    fn tags(text: &str) -> Vec<(String, Pos)> {
        let mut d = tokenize(text).unwrap();
        pos_tag(&mut d);
        d.sentences[0]
            .tokens
            .iter()
            .map(|t| (t.surface.clone(), t.pos))
            .collect()
    }

    #[test]
    fn tags_fixture_sentence() {
        let t = tags("So many artists, so many different explanations, but my explanation for engineering is very simple.");
        let nouns: Vec<&str> = t
            .iter()
            .filter(|(_, p)| *p == Pos::Noun)
            .map(|(s, _)| s.as_str())
            .collect();
        assert_eq!(nouns, vec!["artists", "explanations", "explanation", "engineering"]);
        assert!(t.iter().filter(|(s, _)| s == ",").all(|(_, p)| *p == Pos::Other));
    }

    #[test]
    fn closed_class_and_punctuation_are_other() {
        let t = tags("The cat sat on the mat .");
        assert_eq!(t[0].1, Pos::Other);
        assert_eq!(t[1].1, Pos::Noun, "unknown word after determiner");
        assert_eq!(t[3].1, Pos::Other);
        assert_eq!(t[5].1, Pos::Noun);
        assert_eq!(t[6].1, Pos::Other);
    }

    #[test]
    fn plural_and_lemma() {
        assert!(is_plural("lives"));
        assert!(is_plural("Classes"));
        assert!(!is_plural("class"));
        assert!(!is_plural("virus"));
        assert!(!is_plural("bus"));
        assert_eq!(lemma("classes"), "class");
        assert_eq!(lemma("stories"), "story");
        assert_eq!(lemma("Artists"), "artist");
        assert_eq!(lemma("engineering"), "engineering");
    }

    #[test]
    fn capitalization_round_trip() {
        assert_eq!(Capitalization::of("Engineering"), Capitalization::Capitalized);
        assert_eq!(Capitalization::of("NASA"), Capitalization::Upper);
        assert_eq!(Capitalization::of("idea"), Capitalization::Lower);
        assert_eq!(Capitalization::of("A"), Capitalization::Capitalized);
        assert_eq!(Capitalization::Capitalized.apply("performance"), "Performance");
        assert_eq!(Capitalization::Upper.apply("performance"), "PERFORMANCE");
    }
}
