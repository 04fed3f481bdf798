//! Labeled utterances for each cell of the detection-fault by strategy grid.
//!
//! Randomness comes from PCG32 (`rand_pcg::Pcg32::seed_from_u64`). A uniform
//! draw is `(next_u64 >> 11) * 2^-53`; an index into `n` choices is
//! `next_u64 % n`.

use rand_pcg::rand_core::{Rng, SeedableRng};
use rand_pcg::Pcg32;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::{DetectionFault, DetectionParams, Mood, Strategy};
use crate::epivir::World;
use crate::fallacy::{content, phrase};
use crate::formula::{format_formula, Formula};
use crate::ontology::{Labels, MismatchVerdict, Ontology};
use crate::protocol::{ReportKind, Utterance};
use crate::trope::{detect_trope, ConventionStore, Orientation, TropeConfig};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct GeneratorConfig {
    pub d_prime_fear: f64,
    pub d_prime_joy: f64,
    pub d_prime_neutral: f64,
    /// Chance that a trial carries a signal.
    pub signal_prior: f64,
}

impl Default for GeneratorConfig {
    fn default() -> Self {
        GeneratorConfig { d_prime_fear: 1.0, d_prime_joy: 1.0, d_prime_neutral: 2.5, signal_prior: 0.5 }
    }
}

impl GeneratorConfig {
    pub fn d_prime(&self, mood: Mood) -> f64 {
        match mood {
            Mood::Fear => self.d_prime_fear,
            Mood::Joy => self.d_prime_joy,
            Mood::Neutral => self.d_prime_neutral,
        }
    }

    pub fn params(&self, mood: Mood) -> DetectionParams {
        DetectionParams::for_mood(mood, self.d_prime(mood))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GeneratedUtterance {
    pub surface: Utterance,
    pub true_kind: ReportKind,
    pub mood: Mood,
    pub strategy: Strategy,
    pub detection_fault: DetectionFault,
    pub signal_present: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GeneratorError {
    #[error("ontology too small: needs {0}")]
    OntologyTooSmall(&'static str),
}

/// The kind a template for this cell must be classified as.
pub fn true_kind(fault: DetectionFault, strategy: Strategy) -> ReportKind {
    match (fault, strategy) {
        (DetectionFault::FalseAlarm, Strategy::Reasoning) => ReportKind::ExConsequentia,
        (DetectionFault::FalseAlarm, Strategy::Creativity) => ReportKind::FpMetaphor,
        (DetectionFault::Miss, Strategy::Reasoning) => ReportKind::InverseError,
        (DetectionFault::Miss, Strategy::Creativity) => ReportKind::FnMetaphor,
        (DetectionFault::None, _) => ReportKind::Valid,
    }
}

pub fn uniform(rng: &mut impl Rng) -> f64 {
    (rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
}

pub fn index(rng: &mut impl Rng, n: usize) -> usize {
    (rng.next_u64() % n as u64) as usize
}

/// Template material drawn from a pair of ontologies.
#[derive(Debug, Clone)]
pub struct Generator {
    config: GeneratorConfig,
    labels: Labels,
    /// Content conditionals `A -> B` over atoms.
    conditionals: Vec<(Formula, Formula)>,
    fp_pairs: Vec<(String, String)>,
    fn_pairs: Vec<(String, String)>,
    literal_pairs: Vec<(String, String)>,
}

impl Generator {
    pub fn new(
        o_r: &Ontology,
        o_h: &Ontology,
        trope: &TropeConfig,
        config: GeneratorConfig,
    ) -> Result<Self, GeneratorError> {
        let conditionals: Vec<(Formula, Formula)> = o_r
            .tableau_clauses()
            .iter()
            .filter_map(|c| match content(c) {
                Formula::Implies(a, b) if matches!(*a, Formula::Atom(_)) && matches!(*b, Formula::Atom(_)) => {
                    Some((*a, *b))
                }
                _ => None,
            })
            .collect();
        if conditionals.is_empty() {
            return Err(GeneratorError::OntologyTooSmall("a conditional belief formula"));
        }
        let merged = o_h.overlay(o_r);
        let real: Vec<(&String, Vec<&String>)> = merged
            .categories()
            .iter()
            .filter(|(_, c)| c.world == World::Reality)
            .map(|(n, c)| (n, c.exemplars.iter().filter(|(_, e)| !e.features.is_empty()).map(|(k, _)| k).collect()))
            .filter(|(_, es): &(&String, Vec<&String>)| !es.is_empty())
            .collect();
        if real.len() < 2 {
            return Err(GeneratorError::OntologyTooSmall("two reality categories with featured exemplars"));
        }

        let store = ConventionStore::new(trope.convention_threshold);
        let accepted = |t: &str, v: &str, o: Orientation| {
            detect_trope(t, v, false, o_r, o_h, trope, &store)
                .trope()
                .is_some_and(|r| r.accepted() && r.orientation == o)
        };
        let (mut fp_pairs, mut fn_pairs, mut literal_pairs) = (Vec::new(), Vec::new(), Vec::new());
        for (cx, xs) in &real {
            for e in xs {
                if merged.category_mismatch(e, cx).verdict == MismatchVerdict::Literal {
                    literal_pairs.push(((*e).clone(), (*cx).clone()));
                }
            }
            for (cy, ys) in &real {
                if cx == cy {
                    continue;
                }
                for v in ys {
                    for e in xs {
                        if accepted(e, v, Orientation::Fp) {
                            fp_pairs.push(((*e).clone(), (*v).clone()));
                        }
                    }
                    if accepted(cx, v, Orientation::Fn) {
                        fn_pairs.push(((*cx).clone(), (*v).clone()));
                    }
                }
            }
        }
        Ok(Generator { config, labels: merged.labels().clone(), conditionals, fp_pairs, fn_pairs, literal_pairs })
    }

    pub fn config(&self) -> &GeneratorConfig {
        &self.config
    }

    /// Draws whether a signal is present and whether detection fails,
    /// using the mood's error rates.
    pub fn sample_fault(&self, mood: Mood, rng: &mut impl Rng) -> (bool, DetectionFault) {
        let params = self.config.params(mood);
        let signal = uniform(rng) < self.config.signal_prior;
        let v = uniform(rng);
        let fault = match signal {
            true if v < params.type2() => DetectionFault::Miss,
            false if v < params.type1() => DetectionFault::FalseAlarm,
            _ => DetectionFault::None,
        };
        (signal, fault)
    }

    pub fn generate(
        &self,
        mood: Mood,
        strategy: Strategy,
        rng: &mut impl Rng,
    ) -> Result<GeneratedUtterance, GeneratorError> {
        let (signal, fault) = self.sample_fault(mood, rng);
        let mut g = self.with_fault(mood, strategy, fault, rng)?;
        g.signal_present = signal;
        Ok(g)
    }

    /// Builds the template for a given cell without sampling the fault.
    pub fn with_fault(
        &self,
        mood: Mood,
        strategy: Strategy,
        fault: DetectionFault,
        rng: &mut impl Rng,
    ) -> Result<GeneratedUtterance, GeneratorError> {
        let surface = match strategy {
            Strategy::Reasoning => self.reasoning(fault, rng),
            Strategy::Creativity => self.creativity(fault, rng)?,
        };
        Ok(GeneratedUtterance {
            surface,
            true_kind: true_kind(fault, strategy),
            mood,
            strategy,
            detection_fault: fault,
            signal_present: fault == DetectionFault::Miss,
        })
    }

    fn reasoning(&self, fault: DetectionFault, rng: &mut impl Rng) -> Utterance {
        let (a, b) = &self.conditionals[index(rng, self.conditionals.len())];
        let state_rule = index(rng, 2) == 1;
        let (premise, conclusion) = match fault {
            DetectionFault::FalseAlarm => (b.clone(), a.clone()),
            DetectionFault::Miss => (a.complement(), b.complement()),
            DetectionFault::None if index(rng, 2) == 0 => (a.clone(), b.clone()),
            DetectionFault::None => (b.complement(), a.complement()),
        };
        let p = phrase(&premise, &self.labels);
        let c = phrase(&conclusion, &self.labels);
        let mut formulas = Vec::new();
        let mut surface = String::new();
        if state_rule {
            let rule = Formula::implies(a.clone(), b.clone());
            surface.push_str(&format!("If {}, then {}. ", phrase(a, &self.labels), phrase(b, &self.labels)));
            formulas.push(format_formula(&rule));
        }
        surface.push_str(&format!("{}, so {}.", capitalize(&p), c));
        formulas.push(format_formula(&premise));
        formulas.push(format_formula(&conclusion));
        Utterance::reasoning(surface, formulas)
    }

    fn creativity(&self, fault: DetectionFault, rng: &mut impl Rng) -> Result<Utterance, GeneratorError> {
        let (pairs, need) = match fault {
            DetectionFault::FalseAlarm => (&self.fp_pairs, "an exemplar pair accepted as an Fp metaphor"),
            DetectionFault::Miss => (&self.fn_pairs, "a category and vehicle accepted as an Fn metaphor"),
            DetectionFault::None => (&self.literal_pairs, "a literal membership"),
        };
        if pairs.is_empty() {
            return Err(GeneratorError::OntologyTooSmall(need));
        }
        let (t, v) = &pairs[index(rng, pairs.len())];
        let simile = fault != DetectionFault::None && index(rng, 2) == 1;
        let surface = match (fault, simile) {
            (DetectionFault::None, _) => format!("{} is one of the {v}.", capitalize(t)),
            (DetectionFault::Miss, false) => format!("{} are {v} too.", capitalize(t)),
            (_, false) => format!("{} is a {v}.", capitalize(t)),
            (_, true) => format!("{} is like a {v}.", capitalize(t)),
        };
        let u = Utterance::assertion(surface, t.clone(), v.clone());
        Ok(if simile { u.simile() } else { u })
    }

    /// `count` utterances from one seeded stream.
    pub fn corpus(
        &self,
        mood: Mood,
        strategy: Strategy,
        count: usize,
        seed: u64,
    ) -> Result<Vec<GeneratedUtterance>, GeneratorError> {
        let mut rng = Pcg32::seed_from_u64(seed);
        (0..count).map(|_| self.generate(mood, strategy, &mut rng)).collect()
    }
}

fn capitalize(s: &str) -> String {
    let mut cs = s.chars();
    match cs.next() {
        Some(c) => c.to_uppercase().chain(cs).collect(),
        None => String::new(),
    }
}

/// One utterance with its fault sampled from the mood's error rates.
pub fn generate_utterance(
    mood: Mood,
    strategy: Strategy,
    o_r: &Ontology,
    o_h: &Ontology,
    seed: u64,
) -> Result<GeneratedUtterance, GeneratorError> {
    let g = Generator::new(o_r, o_h, &TropeConfig::default(), GeneratorConfig::default())?;
    g.generate(mood, strategy, &mut Pcg32::seed_from_u64(seed))
}

/// One utterance for a fixed cell.
pub fn generate_with_fault(
    mood: Mood,
    strategy: Strategy,
    fault: DetectionFault,
    o_r: &Ontology,
    o_h: &Ontology,
    seed: u64,
) -> Result<GeneratedUtterance, GeneratorError> {
    let g = Generator::new(o_r, o_h, &TropeConfig::default(), GeneratorConfig::default())?;
    g.with_fault(mood, strategy, fault, &mut Pcg32::seed_from_u64(seed))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use crate::formula::AgentId;

    fn gen() -> Generator {
        Generator::new(
            &fixtures::ontology_basic(),
            &fixtures::ontology_user(),
            &TropeConfig::default(),
            Default::default(),
        )
        .unwrap()
    }

    #[test]
    fn grid_labels() {
        assert_eq!(true_kind(DetectionFault::FalseAlarm, Strategy::Reasoning), ReportKind::ExConsequentia);
        assert_eq!(true_kind(DetectionFault::FalseAlarm, Strategy::Creativity), ReportKind::FpMetaphor);
        assert_eq!(true_kind(DetectionFault::Miss, Strategy::Reasoning), ReportKind::InverseError);
        assert_eq!(true_kind(DetectionFault::Miss, Strategy::Creativity), ReportKind::FnMetaphor);
        assert_eq!(true_kind(DetectionFault::None, Strategy::Creativity), ReportKind::Valid);
    }

    #[test]
    fn seeded_output_repeats() {
        let g = gen();
        let a = g.corpus(Mood::Fear, Strategy::Reasoning, 50, 7).unwrap();
        let b = g.corpus(Mood::Fear, Strategy::Reasoning, 50, 7).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn templates_exist_for_every_cell() {
        let g = gen();
        assert!(!g.fp_pairs.is_empty() && !g.fn_pairs.is_empty() && !g.literal_pairs.is_empty());
        assert!(g.fn_pairs.contains(&("robots".to_string(), "human".to_string())));
    }

    #[test]
    fn small_ontology_is_rejected() {
        let empty = Ontology::new(AgentId::robot());
        let err = Generator::new(&empty, &Ontology::new(AgentId::human()), &TropeConfig::default(), Default::default());
        assert!(matches!(err, Err(GeneratorError::OntologyTooSmall(_))));
    }

    #[test]
    fn uniform_is_in_unit_interval() {
        let mut rng = Pcg32::seed_from_u64(1);
        for _ in 0..1000 {
            let u = uniform(&mut rng);
            assert!((0.0..1.0).contains(&u));
        }
    }
}
