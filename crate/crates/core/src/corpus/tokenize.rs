use crate::error::{Error, Result};

use super::types::{Document, Pos, Sentence, Token};

/// Tokenizes text with one sentence per line into an anonymous document.
pub fn tokenize(raw_text: &str) -> Result<Document> {
    tokenize_document("", raw_text)
}

/// Tokenizes one document. Runs of alphanumeric characters form words and
/// every other non-space character is its own token. If every token is of
/// the form `surface/TAG`, the text is read as pre-tagged instead and tags
/// starting with `N` mark nouns. Blank lines are skipped.
pub fn tokenize_document(id: &str, raw_text: &str) -> Result<Document> {
    let pretagged = is_pretagged(raw_text);
    let sentences: Vec<Sentence> = raw_text
        .lines()
        .filter(|l| !l.trim().is_empty())
        .enumerate()
        .map(|(index, line)| Sentence {
            index,
            tokens: if pretagged {
                split_tagged(line)
            } else {
                split_plain(line)
            },
        })
        .collect();
    if sentences.is_empty() {
        return Err(Error::EmptyDocument((!id.is_empty()).then(|| id.to_string())));
    }
    Ok(Document {
        id: id.to_string(),
        sentences,
        pretagged,
    })
}

fn split_plain(line: &str) -> Vec<Token> {
    let mut out = Vec::new();
    let mut word = String::new();
    for ch in line.chars() {
        if ch.is_alphanumeric() {
            word.push(ch);
            continue;
        }
        if !word.is_empty() {
            out.push(Token::new(std::mem::take(&mut word)));
        }
        if !ch.is_whitespace() {
            out.push(Token::new(ch.to_string()));
        }
    }
    if !word.is_empty() {
        out.push(Token::new(word));
    }
    out
}

fn tagged_parts(tok: &str) -> Option<(&str, &str)> {
    tok.rsplit_once('/')
        .filter(|(surface, tag)| !surface.is_empty() && !tag.is_empty())
}

fn is_pretagged(text: &str) -> bool {
    let mut any = false;
    for tok in text.split_whitespace() {
        if tagged_parts(tok).is_none() {
            return false;
        }
        any = true;
    }
    any
}

fn split_tagged(line: &str) -> Vec<Token> {
    line.split_whitespace()
        .filter_map(tagged_parts)
        .map(|(surface, tag)| {
            let pos = if tag.starts_with('N') { Pos::Noun } else { Pos::Other };
            Token::new(surface).with_pos(pos)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn surfaces(d: &Document) -> Vec<Vec<&str>> {
        d.sentences
            .iter()
            .map(|s| s.tokens.iter().map(|t| t.surface.as_str()).collect())
            .collect()
    }

    #[test]
    fn splits_punctuation() {
        let d = tokenize("We use it everyday.").unwrap();
        assert_eq!(surfaces(&d), vec![vec!["We", "use", "it", "everyday", "."]]);
        assert_eq!(d.sentences[0].tokens[0].lower, "we");
    }

    #[test]
    fn blank_input_is_error() {
        assert!(matches!(tokenize("\n  \n"), Err(Error::EmptyDocument(_))));
        assert!(matches!(tokenize(""), Err(Error::EmptyDocument(_))));
    }

    #[test]
    fn one_sentence_per_line() {
        let d = tokenize("First line here.\nSecond, line!\n\nThird").unwrap();
        assert_eq!(d.sentences.len(), 3);
        assert_eq!(d.sentences[2].index, 2);
        assert_eq!(surfaces(&d)[1], vec!["Second", ",", "line", "!"]);
    }

    #[test]
    fn retokenizing_joined_output_is_stable() {
        let d = tokenize("So many artists, so many (different) explanations... don't panic.").unwrap();
        let again = tokenize(&d.sentences[0].text()).unwrap();
        assert_eq!(surfaces(&d), surfaces(&again));
    }

    #[test]
    fn pretagged_tokens_override_pos() {
        let d = tokenize("the/DT engineering/NN is/VBZ simple/JJ ./.").unwrap();
        let toks = &d.sentences[0].tokens;
        assert_eq!(toks.len(), 5);
        assert_eq!(toks[1].surface, "engineering");
        assert_eq!(toks[1].pos, Pos::Noun);
        assert_eq!(toks[0].pos, Pos::Other);
        assert_eq!(toks[4].surface, ".");
    }
}
