//! Word-set directory: `appearance.txt` (required), and optional
//! `male.txt` / `female.txt` with extra target words. One word per line.

use std::fs;
use std::path::Path;

use gaze_core::weat::WordSets;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum WordSetError {
    #[error("appearance lexicon not found at {0}")]
    MissingLexicon(String),
    #[error("{path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
}

fn read_lines(path: &Path) -> Result<Option<String>, WordSetError> {
    match fs::read_to_string(path) {
        Ok(s) => Ok(Some(s)),
        Err(e) if e.kind() == std::io::ErrorKind::NotFound => Ok(None),
        Err(source) => Err(WordSetError::Io {
            path: path.display().to_string(),
            source,
        }),
    }
}

/// Built-in target words merged with the appearance words in `path`.
pub fn base_word_sets(path: &Path) -> Result<WordSets, WordSetError> {
    let text =
        read_lines(path)?.ok_or_else(|| WordSetError::MissingLexicon(path.display().to_string()))?;
    Ok(WordSets::base(text.lines()))
}

pub fn load_word_sets(dir: &Path) -> Result<WordSets, WordSetError> {
    let mut sets = base_word_sets(&dir.join("appearance.txt"))?;
    let male = read_lines(&dir.join("male.txt"))?.unwrap_or_default();
    let female = read_lines(&dir.join("female.txt"))?.unwrap_or_default();
    sets.extend_targets(male.lines(), female.lines());
    Ok(sets)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn thousand_and_four_words() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("appearance.txt");
        let words: Vec<String> = (0..1004).map(|i| format!("look{i}")).collect();
        fs::write(&p, words.join("\n")).unwrap();
        assert_eq!(base_word_sets(&p).unwrap().appearance.len(), 1004);
    }

    #[test]
    fn duplicates_collapse() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("appearance.txt");
        fs::write(&p, "dress\nlip\ndress\n").unwrap();
        assert_eq!(base_word_sets(&p).unwrap().appearance.len(), 2);
    }

    #[test]
    fn missing_lexicon() {
        let dir = tempfile::tempdir().unwrap();
        assert!(matches!(
            load_word_sets(dir.path()),
            Err(WordSetError::MissingLexicon(_))
        ));
    }

    #[test]
    fn extra_targets_are_merged() {
        let dir = tempfile::tempdir().unwrap();
        fs::write(dir.path().join("appearance.txt"), "dress\n").unwrap();
        fs::write(dir.path().join("male.txt"), "king\n").unwrap();
        let s = load_word_sets(dir.path()).unwrap();
        assert!(s.male.contains("king") && s.male.contains("mr"));
        assert!(s.female.contains("she"));
    }
}
