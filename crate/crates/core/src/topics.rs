use std::collections::HashSet;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::corpus::Vocabulary;
use crate::error::{Error, Result};
use crate::fsutil;

/// K topics of N distinct words each, most relevant word first.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TopicSet {
    topics: Vec<Vec<String>>,
    words_per_topic: usize,
    pub provenance: String,
}

impl TopicSet {
    pub fn new(topics: Vec<Vec<String>>, provenance: impl Into<String>) -> Result<Self> {
        let n = topics.first().map(Vec::len).unwrap_or(0);
        if topics.is_empty() || n == 0 {
            return Err(Error::Contract("topic set must contain at least one non-empty topic".into()));
        }
        for (i, t) in topics.iter().enumerate() {
            if t.len() != n {
                return Err(Error::Contract(format!("topic {i} has {} words, expected {n}", t.len())));
            }
            if let Some(dup) = first_duplicate(t) {
                return Err(Error::Contract(format!("topic {i} repeats word '{dup}'")));
            }
        }
        Ok(TopicSet {
            topics,
            words_per_topic: n,
            provenance: provenance.into(),
        })
    }

    pub fn len(&self) -> usize {
        self.topics.len()
    }

    pub fn is_empty(&self) -> bool {
        self.topics.is_empty()
    }

    pub fn words_per_topic(&self) -> usize {
        self.words_per_topic
    }

    pub fn topics(&self) -> &[Vec<String>] {
        &self.topics
    }

    pub fn topic(&self, i: usize) -> &[String] {
        &self.topics[i]
    }

    pub fn into_topics(self) -> Vec<Vec<String>> {
        self.topics
    }

    /// Every word of every topic is a member of `vocab`.
    pub fn check_vocabulary(&self, vocab: &Vocabulary) -> Result<()> {
        for (i, t) in self.topics.iter().enumerate() {
            if let Some(w) = t.iter().find(|w| !vocab.contains(w)) {
                return Err(Error::Contract(format!("topic {i} word '{w}' is not in the vocabulary")));
            }
        }
        Ok(())
    }

    /// Canonical text form: one topic per line, single spaces, trailing newline.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for t in &self.topics {
            out.push_str(&t.join(" "));
            out.push('\n');
        }
        out
    }

    pub fn parse(text: &str, source: &str) -> Result<Self> {
        let mut topics = Vec::new();
        let mut n: Option<usize> = None;
        for (i, line) in text.lines().enumerate() {
            let words: Vec<String> = line.split_whitespace().map(str::to_string).collect();
            if words.is_empty() {
                continue;
            }
            match n {
                None => n = Some(words.len()),
                Some(n) if n != words.len() => {
                    return Err(Error::format(
                        source,
                        i + 1,
                        format!("expected {n} words, found {}", words.len()),
                    ))
                }
                _ => {}
            }
            if let Some(dup) = first_duplicate(&words) {
                return Err(Error::format(source, i + 1, format!("duplicate word '{dup}'")));
            }
            topics.push(words);
        }
        if topics.is_empty() {
            return Err(Error::format(source, 0, "no topics"));
        }
        TopicSet::new(topics, source)
    }
}

fn first_duplicate(words: &[String]) -> Option<&str> {
    let mut seen = HashSet::new();
    words.iter().find(|w| !seen.insert(w.as_str())).map(String::as_str)
}

pub fn load_topic_set(path: &Path) -> Result<TopicSet> {
    let text = fsutil::read_to_string(path)?;
    TopicSet::parse(&text, &path.display().to_string())
}

pub fn save_topic_set(topics: &TopicSet, path: &Path) -> Result<()> {
    fsutil::write_atomic(path, topics.to_text().as_bytes())
}
