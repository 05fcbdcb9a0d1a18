//! Short-text ingestion: tokenization, frequency filtering, vocabulary.
//!
//! Tokens are produced by lowercasing (optional), splitting on Unicode
//! whitespace and trimming non-alphanumeric characters from both ends of each
//! piece. Frequency bounds are applied repeatedly until the document set and
//! the vocabulary stop changing, so running the pipeline a second time over
//! its own output is a no-op.

use std::collections::{HashMap, HashSet};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fsutil;

/// Documents with fewer retained tokens than this are dropped.
pub const MIN_DOC_TOKENS: usize = 2;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PreprocessConfig {
    pub lowercase: bool,
    pub min_token_len: usize,
    pub stopwords: Option<PathBuf>,
    pub min_doc_freq: usize,
    pub max_doc_freq_ratio: f64,
}

impl Default for PreprocessConfig {
    fn default() -> Self {
        PreprocessConfig {
            lowercase: true,
            min_token_len: 1,
            stopwords: None,
            min_doc_freq: 5,
            max_doc_freq_ratio: 0.5,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Document {
    pub id: String,
    pub tokens: Vec<String>,
    pub label: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Vocabulary {
    words: Vec<String>,
    index: HashMap<String, usize>,
    doc_freq: Vec<usize>,
}

impl Vocabulary {
    /// Builds a vocabulary from an ordered word list. Duplicates are an error.
    /// Document frequencies are unknown and recorded as zero.
    pub fn from_words<I, S>(words: I) -> Result<Self>
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let mut vocab = Vocabulary::default();
        for w in words {
            let w = w.into();
            if vocab.index.contains_key(&w) {
                return Err(Error::Contract(format!("duplicate vocabulary word '{w}'")));
            }
            vocab.push(w, 0);
        }
        Ok(vocab)
    }

    fn push(&mut self, word: String, df: usize) {
        self.index.insert(word.clone(), self.words.len());
        self.words.push(word);
        self.doc_freq.push(df);
    }

    pub fn len(&self) -> usize {
        self.words.len()
    }

    pub fn is_empty(&self) -> bool {
        self.words.is_empty()
    }

    pub fn words(&self) -> &[String] {
        &self.words
    }

    pub fn word(&self, idx: usize) -> Option<&str> {
        self.words.get(idx).map(String::as_str)
    }

    pub fn index_of(&self, word: &str) -> Option<usize> {
        self.index.get(word).copied()
    }

    pub fn contains(&self, word: &str) -> bool {
        self.index.contains_key(word)
    }

    pub fn doc_freq(&self, word: &str) -> Option<usize> {
        self.index_of(word).map(|i| self.doc_freq[i])
    }

    /// One word per line in index order.
    pub fn to_dump(&self) -> String {
        let mut out = String::new();
        for w in &self.words {
            out.push_str(w);
            out.push('\n');
        }
        out
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        fsutil::write_atomic(path, self.to_dump().as_bytes())
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = fsutil::read_to_string(path)?;
        let mut vocab = Vocabulary::default();
        for (i, line) in text.lines().enumerate() {
            let w = line.trim();
            if w.is_empty() {
                continue;
            }
            if w.split_whitespace().count() != 1 {
                return Err(Error::format(path.display().to_string(), i + 1, "expected one word per line"));
            }
            if vocab.contains(w) {
                return Err(Error::format(path.display().to_string(), i + 1, format!("duplicate word '{w}'")));
            }
            vocab.push(w.to_string(), 0);
        }
        if vocab.is_empty() {
            return Err(Error::format(path.display().to_string(), 0, "empty vocabulary"));
        }
        Ok(vocab)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorpusStats {
    pub doc_count: usize,
    pub label_count: usize,
    pub avg_length: f64,
}

#[derive(Debug, Clone)]
pub struct Corpus {
    pub documents: Vec<Document>,
    pub vocabulary: Vocabulary,
    pub stats: CorpusStats,
}

impl Corpus {
    /// Distinct labels in order of first appearance.
    pub fn labels(&self) -> Vec<String> {
        let mut seen = HashSet::new();
        self.documents
            .iter()
            .filter_map(|d| d.label.clone())
            .filter(|l| seen.insert(l.clone()))
            .collect()
    }
}

/// Splits raw text into tokens. No stopword or frequency filtering.
pub fn tokenize(text: &str, lowercase: bool) -> Vec<String> {
    text.split_whitespace()
        .filter_map(|piece| {
            let t = piece.trim_matches(|c: char| !c.is_alphanumeric());
            if t.is_empty() {
                None
            } else if lowercase {
                Some(t.to_lowercase())
            } else {
                Some(t.to_string())
            }
        })
        .collect()
}

pub fn load_stopwords(path: &Path) -> Result<HashSet<String>> {
    let text = fsutil::read_to_string(path)?;
    Ok(text
        .split_whitespace()
        .map(|w| w.to_lowercase())
        .collect())
}

pub fn preprocess_corpus(raw_docs: &[(String, Option<String>)], config: &PreprocessConfig) -> Result<Corpus> {
    if raw_docs.is_empty() {
        return Err(Error::DegenerateCorpus("no input documents".into()));
    }
    if !(config.max_doc_freq_ratio > 0.0) {
        return Err(Error::Config("max_doc_freq_ratio must be positive".into()));
    }
    let stopwords = match &config.stopwords {
        Some(p) => load_stopwords(p)?,
        None => HashSet::new(),
    };

    let mut docs: Vec<Document> = raw_docs
        .iter()
        .enumerate()
        .map(|(i, (text, label))| Document {
            id: i.to_string(),
            tokens: tokenize(text, config.lowercase)
                .into_iter()
                .filter(|t| t.chars().count() >= config.min_token_len && !stopwords.contains(t))
                .collect(),
            label: label.clone(),
        })
        .collect();

    // Filtering words can empty documents, and dropping documents shifts the
    // frequencies; iterate to the fixed point.
    loop {
        docs.retain(|d| d.tokens.len() >= MIN_DOC_TOKENS);
        if docs.is_empty() {
            return Err(Error::DegenerateCorpus("no document survives filtering".into()));
        }
        let df = document_frequencies(&docs);
        let max_df = config.max_doc_freq_ratio * docs.len() as f64;
        let keep: HashSet<&str> = df
            .iter()
            .filter(|(_, &n)| n >= config.min_doc_freq && n as f64 <= max_df)
            .map(|(w, _)| w.as_str())
            .collect();
        if keep.len() == df.len() {
            break;
        }
        let keep: HashSet<String> = keep.into_iter().map(str::to_string).collect();
        for d in &mut docs {
            d.tokens.retain(|t| keep.contains(t));
        }
    }

    let df = document_frequencies(&docs);
    let mut vocabulary = Vocabulary::default();
    for d in &docs {
        for t in &d.tokens {
            if !vocabulary.contains(t) {
                vocabulary.push(t.clone(), df[t]);
            }
        }
    }

    let total: usize = docs.iter().map(|d| d.tokens.len()).sum();
    let labels: HashSet<&str> = docs.iter().filter_map(|d| d.label.as_deref()).collect();
    let stats = CorpusStats {
        doc_count: docs.len(),
        label_count: labels.len(),
        avg_length: total as f64 / docs.len() as f64,
    };
    Ok(Corpus {
        documents: docs,
        vocabulary,
        stats,
    })
}

fn document_frequencies(docs: &[Document]) -> HashMap<String, usize> {
    let mut df: HashMap<String, usize> = HashMap::new();
    for d in docs {
        let uniq: HashSet<&String> = d.tokens.iter().collect();
        for t in uniq {
            *df.entry(t.clone()).or_insert(0) += 1;
        }
    }
    df
}

/// Reads a corpus file (one document per line) and an optional labels file
/// aligned by line number.
pub fn read_raw_corpus(corpus: &Path, labels: Option<&Path>) -> Result<Vec<(String, Option<String>)>> {
    let text = fsutil::read_to_string(corpus)?;
    let lines: Vec<&str> = text.lines().collect();
    let labels: Option<Vec<String>> = match labels {
        Some(p) => {
            let lt = fsutil::read_to_string(p)?;
            let ls: Vec<String> = lt.lines().map(|l| l.trim().to_string()).collect();
            if ls.len() != lines.len() {
                return Err(Error::format(
                    p.display().to_string(),
                    ls.len().min(lines.len()) + 1,
                    format!("{} labels for {} documents", ls.len(), lines.len()),
                ));
            }
            Some(ls)
        }
        None => None,
    };
    Ok(lines
        .iter()
        .enumerate()
        .map(|(i, l)| {
            let label = labels.as_ref().map(|ls| ls[i].clone()).filter(|l| !l.is_empty());
            (l.to_string(), label)
        })
        .collect())
}

/// Tokenized documents without any frequency filtering, for use as a
/// coherence reference corpus.
pub fn read_reference_corpus(path: &Path, lowercase: bool) -> Result<Vec<Vec<String>>> {
    let text = fsutil::read_to_string(path)?;
    let docs: Vec<Vec<String>> = text
        .lines()
        .map(|l| tokenize(l, lowercase))
        .filter(|t| !t.is_empty())
        .collect();
    if docs.is_empty() {
        return Err(Error::DegenerateCorpus(format!("reference corpus {} is empty", path.display())));
    }
    Ok(docs)
}
