//! Command-line front end for `topicrefine`.
//!
//! [`run`] parses arguments, resolves the configuration (flags over config
//! file over defaults), runs one subcommand and maps failures to exit codes:
//! 0 success, 1 usage or configuration, 2 data or format, 3 backend.

pub mod args;
pub mod config;
pub mod manifest;
pub mod stages;

use std::ffi::OsString;
use std::path::Path;
use std::sync::Arc;

use clap::Parser;
use serde_json::json;
use topicrefine::{Error, ErrorClass, Result};

use crate::args::{Cli, Command};
use crate::config::RunConfig;
use crate::manifest::{RunManifest, TokenUsage};
use crate::stages::Writer;

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_DATA: i32 = 2;
pub const EXIT_BACKEND: i32 = 3;

pub fn exit_code(e: &Error) -> i32 {
    match e.class() {
        ErrorClass::Usage => EXIT_USAGE,
        ErrorClass::Data => EXIT_DATA,
        ErrorClass::Backend => EXIT_BACKEND,
    }
}

/// Runs the CLI with `argv` (including the program name) and returns the
/// process exit code.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            use clap::error::ErrorKind;
            let _ = e.print();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => EXIT_OK,
                _ => {
                    eprintln!("error_code: usage");
                    EXIT_USAGE
                }
            };
        }
    };
    match execute(&cli.command) {
        Ok(()) => EXIT_OK,
        Err(e) => {
            eprintln!("error: {e}");
            eprintln!("error_code: {}", e.code());
            exit_code(&e)
        }
    }
}

/// Defaults, then the config file, then flags.
pub fn resolve_config(command: &Command) -> Result<RunConfig> {
    let mut cfg = RunConfig::load(command.common().config.as_deref())?;
    command.apply(&mut cfg);
    if let Command::Pipeline(_) = command {
        if cfg.inputs.reference.is_none() {
            cfg.inputs.reference.clone_from(&cfg.inputs.corpus);
        }
    }
    cfg.finalize()?;
    Ok(cfg)
}

fn execute(command: &Command) -> Result<()> {
    let cfg = resolve_config(command)?;
    println!("{}", serde_json::to_string_pretty(&cfg)?);
    let out = command.common().out.as_path();
    let mut manifest = RunManifest::start(&cfg);
    let mut w = Writer::new(out, "");
    w.json("config.json", &cfg)?;

    match command {
        Command::Lda(_) => {
            let r = stages::lda(&cfg, &mut w)?;
            manifest.stages.insert("lda".into(), r.summary);
        }
        Command::Refine(_) => {
            let topics = stages::load_topics(&cfg.inputs.topics, "topics")?;
            let vocabulary = stages::load_vocabulary(&cfg)?;
            let store = Arc::new(stages::load_store(&cfg)?);
            let r = stages::refine(&cfg, &topics, &vocabulary, &store, &mut w)?;
            manifest.token_usage = Some(TokenUsage::from(&r.summary));
            manifest.stages.insert("refine".into(), json!(r.summary));
        }
        Command::Eval(_) => {
            let topics = stages::load_topics(&cfg.inputs.topics, "topics")?;
            let baseline = cfg.inputs.baseline.as_deref().map(topicrefine::load_topic_set).transpose()?;
            let store = stages::load_store(&cfg)?;
            let summary = stages::eval(&cfg, &topics, baseline.as_ref(), &store, &mut w)?;
            manifest.stages.insert("eval".into(), summary);
        }
        Command::Classify(_) => {
            let topics = stages::load_topics(&cfg.inputs.topics, "topics")?;
            let store = stages::load_store(&cfg)?;
            let outcome = stages::Classifier::load(&cfg)?.run(&cfg, &topics, &store)?;
            w.json("classification.json", &outcome)?;
            manifest.stages.insert("classify".into(), json!(outcome));
        }
        Command::Pipeline(_) => pipeline(&cfg, out, &mut w, &mut manifest)?,
    }

    manifest.outputs = std::mem::take(&mut w.outputs);
    manifest.outputs.push("manifest.json".into());
    manifest.finish();
    Writer::new(out, "").json("manifest.json", &manifest)?;
    println!("wrote {} files to {}", manifest.outputs.len(), out.display());
    Ok(())
}

fn pipeline(cfg: &RunConfig, out: &Path, w: &mut Writer, manifest: &mut RunManifest) -> Result<()> {
    let store = Arc::new(stages::load_store(cfg)?);

    let mut lw = Writer::new(out, "lda");
    let lda = stages::lda(cfg, &mut lw)?;
    manifest.stages.insert("lda".into(), lda.summary);

    let mut rw = Writer::new(out, "refine");
    let refined = stages::refine(cfg, &lda.topics, &lda.vocabulary, &store, &mut rw)?;
    manifest.token_usage = Some(TokenUsage::from(&refined.summary));
    manifest.stages.insert("refine".into(), json!(refined.summary));

    let mut ew = Writer::new(out, "eval");
    let quality = stages::eval(cfg, &refined.topics, Some(&lda.topics), &store, &mut ew)?;
    manifest.stages.insert("eval".into(), quality);

    let mut cw = Writer::new(out, "classify");
    let classifier = stages::Classifier::load(cfg)?;
    let base = classifier.run(cfg, &lda.topics, &store)?;
    let after = classifier.run(cfg, &refined.topics, &store)?;
    let classification = json!({ "base": base, "refined": after });
    cw.json("classification.json", &classification)?;
    manifest.stages.insert("classify".into(), classification);

    for sub in [lw, rw, ew, cw] {
        w.outputs.extend(sub.outputs);
    }
    Ok(())
}
