use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    /// Premises followed by a conclusion, as formula strings.
    Reasoning,
    /// A subject/predicate claim such as "Juliet is the sun".
    Assertion,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verbosity {
    #[default]
    Default,
    Explain,
}

/// One user turn in structured form.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Utterance {
    #[serde(default)]
    pub surface: String,
    pub mode: Mode,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub formulas: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub subject: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub predicate: Option<String>,
    #[serde(default)]
    pub is_simile: bool,
    #[serde(default)]
    pub verbosity: Verbosity,
}

impl Utterance {
    pub fn reasoning<S: Into<String>>(surface: impl Into<String>, formulas: impl IntoIterator<Item = S>) -> Self {
        Utterance {
            surface: surface.into(),
            mode: Mode::Reasoning,
            formulas: formulas.into_iter().map(Into::into).collect(),
            subject: None,
            predicate: None,
            is_simile: false,
            verbosity: Verbosity::Default,
        }
    }

    pub fn assertion(surface: impl Into<String>, subject: impl Into<String>, predicate: impl Into<String>) -> Self {
        Utterance {
            surface: surface.into(),
            mode: Mode::Assertion,
            formulas: Vec::new(),
            subject: Some(subject.into()),
            predicate: Some(predicate.into()),
            is_simile: false,
            verbosity: Verbosity::Default,
        }
    }

    pub fn simile(mut self) -> Self {
        self.is_simile = true;
        self
    }

    pub fn explain(mut self) -> Self {
        self.verbosity = Verbosity::Explain;
        self
    }
}

#[derive(Debug, Error)]
#[error("malformed utterance: {0}")]
pub struct UtteranceError(#[from] serde_json::Error);

pub fn parse_utterance(json: &str) -> Result<Utterance, UtteranceError> {
    Ok(serde_json::from_str(json)?)
}

/// Reads one utterance per non-blank line, or a single JSON array of them.
pub fn parse_utterances(text: &str) -> Result<Vec<Utterance>, UtteranceError> {
    let trimmed = text.trim_start();
    if trimmed.starts_with('[') {
        return Ok(serde_json::from_str(trimmed)?);
    }
    text.lines().filter(|l| !l.trim().is_empty()).map(parse_utterance).collect()
}
