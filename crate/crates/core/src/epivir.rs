//! Placement of propositions on a truth continuum split into reality and
//! fiction, with a separate realistic/unrealistic axis.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::formula::{format_formula, Formula};
use crate::ontology::Ontology;
use crate::tableau::{check_consequence, prove_entailment, TableauConfig};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum World {
    Reality,
    Fiction,
}

impl World {
    /// Reality strictly above one half; 0.5 itself is fiction.
    pub fn of(p: f64) -> World {
        if p > 0.5 {
            World::Reality
        } else {
            World::Fiction
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Realism {
    Realistic,
    Unrealistic,
}

/// Ordered from least to most true.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TruthStatus {
    FalseRegion,
    Possible,
    TrueRegion,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EpiVirError {
    #[error("probability {0} is outside [0, 1]")]
    ProbabilityOutOfRange(f64),
    #[error("{} contains no diaMQ node, so it is not a containment formula", format_formula(.0))]
    NotContained(Formula),
    #[error("no entry with id {0}")]
    UnknownEntry(u64),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct EpiVirConfig {
    /// Above this, `true_region`.
    pub true_cut: f64,
    /// At or below this, `false_region`.
    pub false_cut: f64,
    /// Probability given to a promoted containment formula.
    pub promotion: f64,
    /// Template-check deviation above which the detailed appraisal runs.
    pub escalation_threshold: f64,
    pub prior: f64,
    pub entailed: f64,
    pub refuted: f64,
    /// Reality entries at or above this count as firmly held.
    pub strong_belief: f64,
    pub tableau: TableauConfig,
}

impl Default for EpiVirConfig {
    fn default() -> Self {
        EpiVirConfig {
            true_cut: 0.75,
            false_cut: 0.25,
            promotion: 0.9,
            escalation_threshold: 0.3,
            prior: 0.5,
            entailed: 0.9,
            refuted: 0.1,
            strong_belief: 0.9,
            tableau: TableauConfig::default(),
        }
    }
}

/// World and status with the default cut-points.
pub fn classify_entry(p: f64) -> Result<(World, TruthStatus), EpiVirError> {
    classify_with(&EpiVirConfig::default(), p)
}

pub fn classify_with(config: &EpiVirConfig, p: f64) -> Result<(World, TruthStatus), EpiVirError> {
    if !(0.0..=1.0).contains(&p) {
        return Err(EpiVirError::ProbabilityOutOfRange(p));
    }
    let status = if p > config.true_cut {
        TruthStatus::TrueRegion
    } else if p > config.false_cut {
        TruthStatus::Possible
    } else {
        TruthStatus::FalseRegion
    };
    Ok((World::of(p), status))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AppraisalPhase {
    /// Cheap structural comparison only.
    Template,
    /// Escalated to a proof against the ontology.
    Detailed,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AsIfRole {
    Literal,
    Figurative,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Provenance {
    Appraisal {
        source: String,
        phase: AppraisalPhase,
        deviation: f64,
    },
    /// A proven fallacy pushed into the false region.
    FallacyPlacement {
        appraised: f64,
    },
    /// Containment formula promoted from a raw fallacy entry.
    Containment {
        promoted_from: Option<u64>,
    },
    /// The user confirmed the contained reading.
    Confirmed {
        from: u64,
    },
    AsIf {
        role: AsIfRole,
        link: Option<u64>,
    },
    /// Placed in fiction because the caller asserted a fictional context.
    AssumedFiction,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EpiVirEntry {
    pub id: Option<u64>,
    #[serde(rename = "formula", with = "crate::formula::dsl")]
    pub proposition: Formula,
    #[serde(rename = "p")]
    pub probability: f64,
    pub world: World,
    pub realism: Realism,
    pub status: TruthStatus,
    pub provenance: Provenance,
    #[serde(skip_serializing_if = "std::ops::Not::not")]
    pub withdrawn: bool,
}

impl EpiVirEntry {
    pub fn new(
        proposition: Formula,
        probability: f64,
        realism: Realism,
        provenance: Provenance,
        config: &EpiVirConfig,
    ) -> Result<Self, EpiVirError> {
        let (world, status) = classify_with(config, probability)?;
        Ok(EpiVirEntry { id: None, proposition, probability, world, realism, status, provenance, withdrawn: false })
    }

    /// Same proposition placed at a different probability.
    pub fn placed_at(&self, p: f64, provenance: Provenance, config: &EpiVirConfig) -> Result<Self, EpiVirError> {
        EpiVirEntry::new(self.proposition.clone(), p, self.realism, provenance, config)
    }
}

/// Fraction of the statement's distinct subformulas that occur nowhere in
/// the reference formulas and are not term names of the ontology.
pub fn template_deviation(statement: &Formula, references: &[Formula], terms: &BTreeSet<String>) -> f64 {
    let parts: BTreeSet<&Formula> = statement.subformulas().into_iter().collect();
    let known: BTreeSet<&Formula> = references.iter().flat_map(|r| r.subformulas()).collect();
    let unmatched = parts
        .iter()
        .filter(|f| !known.contains(*f))
        .filter(|f| !matches!(f, Formula::Atom(n) if terms.contains(&n.to_lowercase())))
        .count();
    unmatched as f64 / parts.len() as f64
}

fn ontology_terms(o: &Ontology) -> BTreeSet<String> {
    let mut out = BTreeSet::new();
    for (cname, c) in o.categories() {
        out.insert(cname.to_lowercase());
        out.extend(c.exemplars.keys().map(|e| e.to_lowercase()));
    }
    out
}

/// Places a statement relative to an ontology.
///
/// The template phase compares the statement's structure against the
/// ontology's formulas. Only when too much of it is unfamiliar does the
/// detailed phase run proofs for the statement and for its negation.
pub fn appraise(statement: &Formula, o: &Ontology, config: &EpiVirConfig) -> EpiVirEntry {
    let mut references: Vec<Formula> = o.belief_formulas().iter().map(|b| b.formula.clone()).collect();
    let clauses = o.tableau_clauses();
    references.extend(clauses.iter().cloned());
    let matched = o
        .belief_formulas()
        .iter()
        .zip(o.tableau_clauses_all())
        .find(|(b, wrapped)| &b.formula == statement || wrapped == statement)
        .map(|(b, _)| b.belief);
    let deviation = template_deviation(statement, &references, &ontology_terms(o));

    let (p, phase) = if deviation <= config.escalation_threshold {
        (matched.unwrap_or(config.prior), AppraisalPhase::Template)
    } else {
        let source = o.id();
        let holds =
            check_consequence(&clauses, statement, &source, &config.tableau).map(|r| r.entailed).unwrap_or(false);
        let p = if holds {
            matched.unwrap_or(0.0).max(config.entailed)
        } else {
            let refuted = check_consequence(&clauses, &Formula::not(statement.clone()), &source, &config.tableau)
                .map(|r| r.entailed)
                .unwrap_or(false);
            if refuted {
                config.refuted
            } else {
                config.prior
            }
        };
        (p, AppraisalPhase::Detailed)
    };

    let realism = if p > 0.5 && contradicts_firm_belief(statement, o, config) {
        Realism::Unrealistic
    } else {
        Realism::Realistic
    };
    let provenance = Provenance::Appraisal { source: o.id(), phase, deviation };
    EpiVirEntry::new(statement.clone(), p, realism, provenance, config).expect("appraisal probabilities lie in [0, 1]")
}

fn contradicts_firm_belief(statement: &Formula, o: &Ontology, config: &EpiVirConfig) -> bool {
    let negated = Formula::not(statement.clone());
    o.belief_formulas()
        .iter()
        .zip(o.tableau_clauses_all())
        .filter(|(b, _)| b.world == World::Reality && b.belief >= config.strong_belief)
        .any(|(_, clause)| {
            prove_entailment(std::slice::from_ref(&clause), &negated, &config.tableau)
                .map(|r| r.entailed)
                .unwrap_or(false)
        })
}

/// Promotes a contained fallacy: the containment formula goes to the
/// reality region while the raw entry keeps its own placement.
pub fn contain_and_promote(
    raw: &EpiVirEntry,
    contained: &Formula,
    config: &EpiVirConfig,
) -> Result<EpiVirEntry, EpiVirError> {
    if !contained.subformulas().iter().any(|f| matches!(f, Formula::PossMq(_))) {
        return Err(EpiVirError::NotContained(contained.clone()));
    }
    EpiVirEntry::new(
        contained.clone(),
        config.promotion,
        Realism::Realistic,
        Provenance::Containment { promoted_from: raw.id },
        config,
    )
}

/// Append-only log of entries. Ids are assigned on insertion, starting at 1.
#[derive(Debug, Clone, Default, PartialEq, Serialize)]
#[serde(transparent)]
pub struct EpiVirStore {
    entries: Vec<EpiVirEntry>,
}

impl EpiVirStore {
    pub fn insert(&mut self, mut entry: EpiVirEntry) -> u64 {
        let id = self.entries.len() as u64 + 1;
        entry.id = Some(id);
        self.entries.push(entry);
        id
    }

    pub fn get(&self, id: u64) -> Option<&EpiVirEntry> {
        id.checked_sub(1).and_then(|i| self.entries.get(i as usize))
    }

    pub fn entries(&self) -> &[EpiVirEntry] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Stores the containment formula promoted from entry `raw`.
    pub fn promote(&mut self, raw: u64, contained: &Formula, config: &EpiVirConfig) -> Result<u64, EpiVirError> {
        let raw_entry = self.get(raw).ok_or(EpiVirError::UnknownEntry(raw))?;
        let promoted = contain_and_promote(raw_entry, contained, config)?;
        Ok(self.insert(promoted))
    }

    /// Marks an entry as withdrawn. The entry itself stays in the log.
    pub fn withdraw(&mut self, id: u64) -> Result<(), EpiVirError> {
        let i =
            id.checked_sub(1).filter(|i| (*i as usize) < self.entries.len()).ok_or(EpiVirError::UnknownEntry(id))?;
        self.entries[i as usize].withdrawn = true;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::formula::parse_formula;
    use crate::ontology::load_ontology;

    fn p(s: &str) -> Formula {
        parse_formula(s).unwrap()
    }

    #[test]
    fn classification_examples() {
        assert_eq!(classify_entry(0.9).unwrap(), (World::Reality, TruthStatus::TrueRegion));
        assert_eq!(classify_entry(0.3).unwrap(), (World::Fiction, TruthStatus::Possible));
        assert_eq!(classify_entry(0.5).unwrap(), (World::Fiction, TruthStatus::Possible));
        assert_eq!(classify_entry(0.25).unwrap().1, TruthStatus::FalseRegion);
        assert_eq!(classify_entry(0.75).unwrap().1, TruthStatus::Possible);
        assert!(classify_entry(1.01).is_err());
        assert!(classify_entry(f64::NAN).is_err());
    }

    #[test]
    fn classification_is_monotone() {
        let mut last = TruthStatus::FalseRegion;
        for i in 0..=1000 {
            let (_, s) = classify_entry(i as f64 / 1000.0).unwrap();
            assert!(s >= last);
            last = s;
        }
    }

    fn danger_ontology() -> Ontology {
        load_ontology(r#"{"owner":"R","belief_formulas":[{"formula":"B(R, B(H,d) -> K(H,a))","belief":0.95}]}"#)
            .unwrap()
    }

    #[test]
    fn exact_match_stays_in_template_phase() {
        let o = danger_ontology();
        let e = appraise(&p("B(R, B(H,d) -> K(H,a))"), &o, &EpiVirConfig::default());
        assert_eq!(e.probability, 0.95);
        assert_eq!((e.world, e.status), (World::Reality, TruthStatus::TrueRegion));
        assert!(matches!(e.provenance, Provenance::Appraisal { phase: AppraisalPhase::Template, .. }));
    }

    #[test]
    fn converse_escalates_and_stays_undecided() {
        let o = danger_ontology();
        let e = appraise(&p("B(R, K(H,a) -> B(H,d))"), &o, &EpiVirConfig::default());
        match e.provenance {
            Provenance::Appraisal { phase, deviation, .. } => {
                assert_eq!(phase, AppraisalPhase::Detailed);
                assert!((deviation - 2.0 / 6.0).abs() < 1e-12);
            }
            ref other => panic!("{other:?}"),
        }
        assert_eq!(e.probability, 0.5);
        assert_eq!((e.world, e.status), (World::Fiction, TruthStatus::Possible));
    }

    #[test]
    fn refuted_statement() {
        let o = load_ontology(r#"{"owner":"R","belief_formulas":[{"formula":"x & y","belief":0.95}]}"#).unwrap();
        let e = appraise(&p("~x | (q & ~y)"), &o, &EpiVirConfig::default());
        assert_eq!(e.probability, 0.1);
        assert_eq!((e.world, e.status), (World::Fiction, TruthStatus::FalseRegion));
    }

    #[test]
    fn entailed_statement() {
        let o = load_ontology(r#"{"owner":"R","belief_formulas":[{"formula":"x & y","belief":0.95}]}"#).unwrap();
        let e = appraise(&p("(y | q) & (x | r)"), &o, &EpiVirConfig::default());
        assert_eq!(e.probability, 0.9);
        assert_eq!(e.realism, Realism::Realistic);
    }

    #[test]
    fn accepted_but_contradicting_is_unrealistic() {
        let o = load_ontology(
            r#"{"owner":"R","belief_formulas":[{"formula":"x","belief":0.95},{"formula":"~x","belief":0.8}]}"#,
        )
        .unwrap();
        let e = appraise(&p("~x"), &o, &EpiVirConfig::default());
        assert_eq!(e.probability, 0.8);
        assert_eq!(e.realism, Realism::Unrealistic);
    }

    #[test]
    fn promotion() {
        let cfg = EpiVirConfig::default();
        let mut store = EpiVirStore::default();
        let raw = appraise(&p("B(R, K(H,a) -> B(H,d))"), &danger_ontology(), &cfg)
            .placed_at(0.1, Provenance::FallacyPlacement { appraised: 0.5 }, &cfg)
            .unwrap();
        let raw_id = store.insert(raw);
        let contained = p("B(R, box(B(H,d) -> K(H,a))) & B(R, diaMQ(K(H,a) -> B(H,d)) -> diaMQ(B(H,d)))");
        let id = store.promote(raw_id, &contained, &cfg).unwrap();
        let promoted = store.get(id).unwrap();
        assert_eq!(
            (promoted.world, promoted.status, promoted.probability),
            (World::Reality, TruthStatus::TrueRegion, 0.9)
        );
        assert_eq!(promoted.provenance, Provenance::Containment { promoted_from: Some(raw_id) });
        assert_eq!(store.get(raw_id).unwrap().status, TruthStatus::FalseRegion);
        assert!(matches!(store.promote(raw_id, &p("box x"), &cfg), Err(EpiVirError::NotContained(_))));
    }

    #[test]
    fn all_world_realism_combinations_serialize() {
        let cfg = EpiVirConfig::default();
        for (prob, realism) in [
            (0.9, Realism::Realistic),
            (0.9, Realism::Unrealistic),
            (0.2, Realism::Realistic),
            (0.2, Realism::Unrealistic),
        ] {
            let e = EpiVirEntry::new(p("soap"), prob, realism, Provenance::AssumedFiction, &cfg).unwrap();
            let v = serde_json::to_value(&e).unwrap();
            for key in ["id", "formula", "p", "world", "realism", "status", "provenance"] {
                assert!(v.get(key).is_some(), "{key}");
            }
        }
    }

    #[test]
    fn withdraw_keeps_entry() {
        let cfg = EpiVirConfig::default();
        let mut s = EpiVirStore::default();
        let id = s.insert(EpiVirEntry::new(p("x"), 0.9, Realism::Realistic, Provenance::AssumedFiction, &cfg).unwrap());
        s.withdraw(id).unwrap();
        assert!(s.get(id).unwrap().withdrawn);
        assert_eq!(s.len(), 1);
        assert!(s.withdraw(7).is_err());
    }
}
