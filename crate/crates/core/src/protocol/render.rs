//! Response wording. Default responses acknowledge or ask; they never name
//! a verdict.

use super::{AnalysisReport, ReportKind, Step};
use crate::protocol::Verbosity;

pub const UNDERSTAND: &str = "I understand what you try to say.";
pub const ASK_AGAIN: &str = "Could you put that another way for me?";
pub const FINAL_ASK: &str = "I would still like to follow you. Could you tell me once more, in your own words?";

/// Words that must not appear, as whole words, in a default response.
pub const FORBIDDEN_WORDS: [&str; 3] = ["error", "nonsense", "wrong"];

/// Verdict vocabulary; any of these as a whole phrase is a disclosure.
pub const KIND_TOKENS: [&str; 16] = [
    "valid",
    "ex_consequentia",
    "ex consequentia",
    "inverse_error",
    "inverse error",
    "fp_metaphor",
    "fn_metaphor",
    "unintelligible",
    "affirming the consequent",
    "denying the antecedent",
    "modus ponens",
    "modus tollens",
    "hypothetical syllogism",
    "fallacy",
    "robotomorphism",
    "anthropomorphism",
];

fn words(text: &str) -> Vec<String> {
    text.split(|c: char| !(c.is_alphanumeric() || c == '_')).filter(|w| !w.is_empty()).map(str::to_lowercase).collect()
}

fn contains_phrase(words: &[String], phrase: &str) -> bool {
    let target: Vec<&str> = phrase.split(' ').collect();
    words.windows(target.len()).any(|w| w.iter().zip(&target).all(|(a, b)| a == b))
}

/// First forbidden word or kind token found in `text`.
pub fn impolite_token(text: &str) -> Option<&'static str> {
    let ws = words(text);
    FORBIDDEN_WORDS.iter().chain(KIND_TOKENS.iter()).copied().find(|t| contains_phrase(&ws, t))
}

pub fn is_polite(text: &str) -> bool {
    impolite_token(text).is_none()
}

/// Uses `text` if it is polite, `fallback` otherwise. User-supplied words
/// are echoed only through this.
pub(crate) fn polite_or(text: String, fallback: &str) -> String {
    if is_polite(&text) {
        text
    } else {
        fallback.to_string()
    }
}

pub fn kind_phrase(kind: ReportKind) -> &'static str {
    match kind {
        ReportKind::Valid => "valid",
        ReportKind::ExConsequentia => "affirming the consequent",
        ReportKind::InverseError => "denying the antecedent",
        ReportKind::FpMetaphor => "Fp metaphor",
        ReportKind::FnMetaphor => "Fn metaphor",
        ReportKind::Unintelligible => "unintelligible",
    }
}

/// The response text for a report at the given verbosity.
pub fn render_response(report: &AnalysisReport, verbosity: Verbosity) -> String {
    let mut parts: Vec<String> = Vec::new();
    match report.final_step() {
        Some(Step::VI) => {
            parts.push(UNDERSTAND.to_string());
            if let Some(t) = &report.trope {
                let features: Vec<String> = t.condition_ii.shared.iter().map(|f| f.replace('_', " ")).collect();
                let vehicle = crate::ontology::normalize_term(&t.vehicle);
                if !features.is_empty() {
                    parts.push(polite_or(format!("You mean something like a {vehicle}: {}.", features.join(", ")), ""));
                }
            }
            parts.extend(report.clarifications.iter().cloned());
        }
        _ => {
            if report.clarifications.is_empty() {
                parts.push(ASK_AGAIN.to_string());
            } else {
                parts.extend(report.clarifications.iter().cloned());
            }
        }
    }
    if verbosity == Verbosity::Explain {
        parts.push(format!("kind: {}", report.kind.as_str()));
        if matches!(report.kind, ReportKind::ExConsequentia | ReportKind::InverseError) {
            parts.push(format!("pattern: {}", kind_phrase(report.kind)));
        }
        if let Some(c) = &report.containment {
            parts.push(format!("containment: {c}"));
        }
        if let Some(t) = &report.trope {
            parts.push(format!("trope: {} ({})", kind_phrase(report.kind), t.figurative_meaning));
        }
        if report.attribution != crate::trope::Attribution::None {
            parts.push(format!("attribution: {}", report.attribution));
        }
    }
    parts.retain(|p| !p.is_empty());
    parts.join(" ")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn detects_whole_words_only() {
        assert_eq!(impolite_token("That is wrong."), Some("wrong"));
        assert_eq!(impolite_token("An ERROR occurred"), Some("error"));
        assert_eq!(impolite_token("terrors and errors"), None);
        assert_eq!(impolite_token("You are affirming the consequent"), Some("affirming the consequent"));
        assert_eq!(impolite_token("kind: inverse_error"), Some("inverse_error"));
        assert!(is_polite(UNDERSTAND));
        assert!(is_polite(ASK_AGAIN));
        assert!(is_polite(FINAL_ASK));
    }
}
