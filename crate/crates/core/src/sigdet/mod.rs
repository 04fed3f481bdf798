//! Signal detection: sensitivity d′, mood-dependent criteria, error rates,
//! and a generator of labeled utterances for each detection outcome.

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub mod generator;
pub mod normal;

pub use generator::{generate_utterance, generate_with_fault, GeneratedUtterance, Generator, GeneratorError};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mood {
    Fear,
    Joy,
    Neutral,
}

impl Mood {
    pub const ALL: [Mood; 3] = [Mood::Fear, Mood::Joy, Mood::Neutral];
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Strategy {
    Reasoning,
    Creativity,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DetectionFault {
    FalseAlarm,
    Miss,
    None,
}

#[derive(Debug, Clone, Copy, PartialEq, Error)]
pub enum SigdetError {
    #[error("rate {0} must lie strictly between 0 and 1")]
    RateOutOfRange(f64),
}

fn check_rate(p: f64) -> Result<f64, SigdetError> {
    if p > 0.0 && p < 1.0 {
        Ok(p)
    } else {
        Err(SigdetError::RateOutOfRange(p))
    }
}

/// `Q(fa) − Q(hit)`, where `Q(p)` is the standard normal point with
/// right-tail mass `p`.
pub fn d_prime(hit_rate: f64, fa_rate: f64) -> Result<f64, SigdetError> {
    let hit = check_rate(hit_rate)?;
    let fa = check_rate(fa_rate)?;
    Ok(normal::right_tail_quantile(fa) - normal::right_tail_quantile(hit))
}

/// A decision criterion given by its right-tail acceptance level.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Criterion {
    pub p: f64,
    /// Position on the noise axis: `Q(p)`.
    pub z: f64,
}

impl Criterion {
    pub fn from_p(p: f64) -> Result<Criterion, SigdetError> {
        Ok(Criterion { p: check_rate(p)?, z: normal::right_tail_quantile(p) })
    }
}

/// Fear loosens the criterion, joy tightens it.
pub fn criterion_p(mood: Mood) -> f64 {
    match mood {
        Mood::Fear => 0.1,
        Mood::Joy => 0.0001,
        Mood::Neutral => 0.05,
    }
}

pub fn criterion_shift(mood: Mood) -> Criterion {
    Criterion::from_p(criterion_p(mood)).expect("mood criteria lie in (0, 1)")
}

/// Type I: noise (at 0) beyond `c`. Type II: signal (at d′) below `c`.
pub fn error_rates(d_prime: f64, c: f64) -> (f64, f64) {
    (normal::upper_tail(c), normal::cdf(c - d_prime))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DetectionParams {
    pub hit_rate: f64,
    pub fa_rate: f64,
    pub d_prime: f64,
    pub criterion: f64,
    pub mood: Mood,
}

impl DetectionParams {
    pub fn for_mood(mood: Mood, d_prime: f64) -> DetectionParams {
        let c = criterion_shift(mood);
        let (type1, type2) = error_rates(d_prime, c.z);
        DetectionParams { hit_rate: 1.0 - type2, fa_rate: type1, d_prime, criterion: c.z, mood }
    }

    pub fn type1(&self) -> f64 {
        self.fa_rate
    }

    pub fn type2(&self) -> f64 {
        1.0 - self.hit_rate
    }
}
