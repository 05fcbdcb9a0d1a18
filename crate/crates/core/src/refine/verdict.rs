use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::{Error, Result};

pub const MAX_ALTERNATIVES: usize = 10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Coherence {
    Yes,
    No,
}

/// Mapped model answer: topic label, coherence judgment, replacement candidates.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LlmVerdict {
    pub topic: String,
    pub coherent: Coherence,
    pub alternatives: Vec<String>,
}

impl LlmVerdict {
    pub fn yes(topic: impl Into<String>) -> Self {
        LlmVerdict {
            topic: topic.into(),
            coherent: Coherence::Yes,
            alternatives: Vec::new(),
        }
    }

    pub fn no<I, S>(topic: impl Into<String>, alternatives: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        LlmVerdict {
            topic: topic.into(),
            coherent: Coherence::No,
            alternatives: alternatives.into_iter().map(Into::into).collect(),
        }
    }

    /// Wire form with the keys the prompt asks for.
    pub fn to_json(&self) -> String {
        serde_json::json!({
            "topic": self.topic,
            "coherent": match self.coherent { Coherence::Yes => "Yes", Coherence::No => "No" },
            "alternatives": self.alternatives,
        })
        .to_string()
    }
}

/// First balanced `{...}` block, skipping braces inside JSON strings.
pub fn extract_first_json_object(text: &str) -> Option<&str> {
    let mut search_from = 0;
    while let Some(rel) = text[search_from..].find('{') {
        let start = search_from + rel;
        let mut depth = 0usize;
        let mut in_str = false;
        let mut escaped = false;
        for (i, ch) in text[start..].char_indices() {
            if in_str {
                match ch {
                    _ if escaped => escaped = false,
                    '\\' => escaped = true,
                    '"' => in_str = false,
                    _ => {}
                }
                continue;
            }
            match ch {
                '"' => in_str = true,
                '{' => depth += 1,
                '}' => {
                    depth -= 1;
                    if depth == 0 {
                        return Some(&text[start..=start + i]);
                    }
                }
                _ => {}
            }
        }
        search_from = start + 1;
    }
    None
}

pub fn parse_response(text: &str) -> Result<LlmVerdict> {
    let block = extract_first_json_object(text)
        .ok_or_else(|| Error::ResponseParse("no JSON object in response".into()))?;
    let value: Value =
        serde_json::from_str(block).map_err(|e| Error::ResponseParse(format!("invalid JSON object: {e}")))?;

    let topic = match value.get("topic") {
        Some(Value::String(s)) => s.trim().to_string(),
        Some(other) if !other.is_null() => other.to_string(),
        _ => String::new(),
    };
    let coherent = match value.get("coherent") {
        Some(Value::String(s)) if s.trim().eq_ignore_ascii_case("yes") => Coherence::Yes,
        Some(Value::String(s)) if s.trim().eq_ignore_ascii_case("no") => Coherence::No,
        Some(other) => return Err(Error::ResponseSchema(format!("\"coherent\" must be Yes or No, got {other}"))),
        None => return Err(Error::ResponseSchema("missing \"coherent\"".into())),
    };
    if coherent == Coherence::Yes {
        return Ok(LlmVerdict::yes(topic));
    }

    let alternatives: Vec<String> = match value.get("alternatives") {
        Some(Value::Array(items)) => items
            .iter()
            .filter_map(|v| v.as_str())
            .map(|s| s.trim().to_lowercase())
            .filter(|s| !s.is_empty())
            .take(MAX_ALTERNATIVES)
            .collect(),
        Some(Value::Null) | None => Vec::new(),
        Some(other) => return Err(Error::ResponseSchema(format!("\"alternatives\" must be an array, got {other}"))),
    };
    if alternatives.is_empty() {
        return Err(Error::ResponseSchema("judged incoherent but no alternatives given".into()));
    }
    Ok(LlmVerdict::no(topic, alternatives))
}
