//! The two-task refinement prompt and its exact inverse.

use std::collections::HashSet;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Golden template. `<TOPIC_WORDS>` and `<WORD>` each occur exactly once.
pub const TEMPLATE: &str = include_str!("prompt_template.txt");

const TOPIC_SLOT: &str = "<TOPIC_WORDS>";
const WORD_SLOT: &str = "<WORD>";
const WORD_SEPARATOR: &str = ", ";

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PromptInstance {
    pub topic_index: usize,
    /// 1-based position of the held-out word in the original topic.
    pub position: usize,
    pub context_words: Vec<String>,
    pub held_out: String,
    pub text: String,
}

fn segments() -> (&'static str, &'static str, &'static str) {
    let (head, rest) = TEMPLATE.split_once(TOPIC_SLOT).expect("template has a topic slot");
    let (middle, tail) = rest.split_once(WORD_SLOT).expect("template has a word slot");
    (head, middle, tail)
}

fn check_word(w: &str) -> Result<()> {
    if w.is_empty()
        || w.chars().any(|c| c.is_whitespace() || matches!(c, ',' | '"' | '[' | ']' | '<' | '>'))
    {
        return Err(Error::Contract(format!("word '{w}' cannot be placed in a prompt")));
    }
    Ok(())
}

pub fn build_prompt<S: AsRef<str>>(context_words: &[S], held_out: &str) -> Result<PromptInstance> {
    if context_words.is_empty() {
        return Err(Error::Contract("prompt needs at least one context word".into()));
    }
    let mut seen = HashSet::new();
    for w in context_words {
        let w = w.as_ref();
        check_word(w)?;
        if !seen.insert(w) {
            return Err(Error::Contract(format!("duplicate context word '{w}'")));
        }
    }
    check_word(held_out)?;
    if seen.contains(held_out) {
        return Err(Error::Contract(format!("held-out word '{held_out}' appears in the context")));
    }

    let context: Vec<String> = context_words.iter().map(|w| w.as_ref().to_string()).collect();
    let (head, middle, tail) = segments();
    let text = format!("{head}{}{middle}{held_out}{tail}", context.join(WORD_SEPARATOR));
    Ok(PromptInstance {
        topic_index: 0,
        position: 0,
        context_words: context,
        held_out: held_out.to_string(),
        text,
    })
}

/// Recovers (context words, held-out word) from a rendered prompt. Any
/// deviation from the template is a protocol error.
pub fn parse_prompt(text: &str) -> Result<(Vec<String>, String)> {
    let (head, middle, tail) = segments();
    let drift = || Error::Protocol("prompt does not match the refinement template".into());
    let rest = text.strip_prefix(head).ok_or_else(drift)?;
    let rest = rest.strip_suffix(tail).ok_or_else(drift)?;
    let (words, held_out) = rest.split_once(middle).ok_or_else(drift)?;
    let context: Vec<String> = words.split(WORD_SEPARATOR).map(str::to_string).collect();
    if context.iter().any(|w| check_word(w).is_err()) || check_word(held_out).is_err() {
        return Err(drift());
    }
    Ok((context, held_out.to_string()))
}
