//! Writes the two-theme synthetic corpus used by the CLI tests.
//!
//! Usage: cargo run -p topicrefine --example synthetic_fixture -- <out-dir>

use std::path::PathBuf;

use topicrefine::fsutil::write_atomic;
use topicrefine::synthetic::{two_theme_corpus, two_theme_embeddings, ThemeCorpusSpec};

const EMBEDDING_DIM: usize = 16;

fn main() -> topicrefine::Result<()> {
    let out = PathBuf::from(std::env::args().nth(1).unwrap_or_else(|| "fixture".into()));
    let spec = ThemeCorpusSpec::default();
    let docs = two_theme_corpus(&spec);
    let mut corpus = String::new();
    let mut labels = String::new();
    for (text, label) in &docs {
        corpus.push_str(text);
        corpus.push('\n');
        labels.push_str(label.as_deref().unwrap_or_default());
        labels.push('\n');
    }
    let embeddings = two_theme_embeddings::<f64>(&spec, EMBEDDING_DIM)?;
    write_atomic(&out.join("corpus.txt"), corpus.as_bytes())?;
    write_atomic(&out.join("labels.txt"), labels.as_bytes())?;
    write_atomic(&out.join("embeddings.txt"), embeddings.store.to_text().as_bytes())?;
    println!("wrote {} documents to {}", docs.len(), out.display());
    Ok(())
}
