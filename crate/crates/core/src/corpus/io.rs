use std::fs;
use std::path::Path;

use crate::error::{Error, Result};

use super::tokenize::tokenize_document;
use super::types::{Document, Pos};

pub const DOC_EXTENSION: &str = "txt";

pub fn read_document(path: &Path) -> Result<Document> {
    let id = path
        .file_stem()
        .and_then(|s| s.to_str())
        .ok_or_else(|| Error::format("corpus", format!("bad file name {}", path.display())))?;
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    tokenize_document(id, &text)
}

/// Reads every `*.txt` file of `dir` as one document, sorted by file name.
pub fn read_corpus_dir(dir: &Path) -> Result<Vec<Document>> {
    let mut paths: Vec<_> = fs::read_dir(dir)
        .map_err(|e| Error::io(dir, e))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.is_file() && p.extension().is_some_and(|x| x == DOC_EXTENSION))
        .collect();
    paths.sort();
    paths.iter().map(|p| read_document(p)).collect()
}

/// One sentence per line, tokens separated by single spaces. Pre-tagged
/// documents keep a `/NN` or `/X` tag on every token.
pub fn document_text(doc: &Document) -> String {
    let mut text = String::new();
    for s in &doc.sentences {
        if doc.pretagged {
            let tagged: Vec<String> = s
                .tokens
                .iter()
                .map(|t| format!("{}/{}", t.surface, if t.pos == Pos::Noun { "NN" } else { "X" }))
                .collect();
            text.push_str(&tagged.join(" "));
        } else {
            text.push_str(&s.text());
        }
        text.push('\n');
    }
    text
}

pub fn write_document(dir: &Path, doc: &Document) -> Result<()> {
    let path = dir.join(format!("{}.{DOC_EXTENSION}", doc.id));
    fs::write(&path, document_text(doc)).map_err(|e| Error::io(path, e))
}

pub fn write_corpus_dir(dir: &Path, docs: &[Document]) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    docs.iter().try_for_each(|d| write_document(dir, d))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip_through_directory() {
        let dir = tempfile::tempdir().unwrap();
        fs::write(dir.path().join("b.txt"), "Second doc .\n").unwrap();
        fs::write(dir.path().join("a.txt"), "Hello, world.\nAgain!\n").unwrap();
        fs::write(dir.path().join("notes.md"), "ignored").unwrap();
        let docs = read_corpus_dir(dir.path()).unwrap();
        assert_eq!(docs.len(), 2);
        assert_eq!(docs[0].id, "a");
        assert_eq!(docs[0].sentences.len(), 2);

        let out = tempfile::tempdir().unwrap();
        write_corpus_dir(out.path(), &docs).unwrap();
        let text = fs::read_to_string(out.path().join("a.txt")).unwrap();
        assert_eq!(text, "Hello , world .\nAgain !\n");
        assert_eq!(read_corpus_dir(out.path()).unwrap(), docs);
    }

    #[test]
    fn pretagged_documents_keep_noun_tags() {
        let doc = tokenize_document("t", "Quickly/RB saw/VBD the/DT cat/NN\n").unwrap();
        let dir = tempfile::tempdir().unwrap();
        write_corpus_dir(dir.path(), std::slice::from_ref(&doc)).unwrap();
        assert_eq!(read_corpus_dir(dir.path()).unwrap(), vec![doc]);
    }

    #[test]
    fn missing_directory_is_io_error() {
        assert!(matches!(
            read_corpus_dir(Path::new("/nonexistent/corpus")),
            Err(Error::Io { .. })
        ));
    }
}
