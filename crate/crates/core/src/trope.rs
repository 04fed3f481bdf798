//! Metaphors and similes: category mismatch, the three acceptance
//! conditions, as-if registration and conventional metaphor fields.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::ser::SerializeStruct;
use serde::{Deserialize, Serialize, Serializer};
use thiserror::Error;

use crate::epivir::{Realism, World};
use crate::fallacy::SyllogismKind;
use crate::formula::Formula;
use crate::ontology::{feature_overlap, Entity, EntryRef, MismatchVerdict, Ontology, OntologyError};

/// Fp: the topic is real and the vehicle carries sense alone.
/// Fn: the topic itself is the sense-only term.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Orientation {
    Fp,
    Fn,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TropeConfig {
    /// Minimum feature overlap for condition ii.
    pub theta: f64,
    /// Accepted tropes on one category pair before a field is installed.
    pub convention_threshold: usize,
    pub literal_p: f64,
    pub figurative_p: f64,
}

impl Default for TropeConfig {
    fn default() -> Self {
        TropeConfig { theta: 0.25, convention_threshold: 2, literal_p: 0.1, figurative_p: 0.9 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Condition {
    /// The topic's category differs from the vehicle's.
    I,
    /// The two share enough features.
    Ii,
    /// The as-if membership can still be registered.
    Iii,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FeatureMatch {
    /// `None` when the match is inherited from a conventional field.
    pub score: Option<f64>,
    pub shared: Vec<String>,
    #[serde(skip_serializing_if = "std::ops::Not::not")]
    pub inherited: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CreativeResult {
    pub topic: String,
    pub vehicle: String,
    /// X: the category the topic is taken from.
    pub topic_category: String,
    /// Y: the category the vehicle stands for.
    pub vehicle_category: String,
    pub orientation: Orientation,
    pub is_simile: bool,
    pub condition_i: bool,
    pub condition_ii: FeatureMatch,
    pub condition_iii: bool,
    pub theta: f64,
    pub generalization: Option<(String, String)>,
    pub figurative_meaning: String,
}

impl CreativeResult {
    pub fn condition_ii_holds(&self) -> bool {
        self.condition_ii.inherited || self.condition_ii.score.is_some_and(|s| s >= self.theta)
    }

    /// First failing condition, if any.
    pub fn rejected(&self) -> Option<Condition> {
        if !self.condition_i {
            Some(Condition::I)
        } else if !self.condition_ii_holds() {
            Some(Condition::Ii)
        } else if !self.condition_iii {
            Some(Condition::Iii)
        } else {
            None
        }
    }

    pub fn accepted(&self) -> bool {
        self.rejected().is_none()
    }

    pub fn label(&self) -> Attribution {
        attribution_label(self.orientation)
    }

    /// `in_<topic>_<Y>`: the literal, false membership claim.
    pub fn literal_formula(&self) -> Formula {
        Formula::atom(format!("in_{}_{}", slug(&self.topic), slug(&self.vehicle_category)))
    }

    /// `shares_<topic>_<Y>`: the figurative paraphrase.
    pub fn figurative_formula(&self) -> Formula {
        Formula::atom(format!("shares_{}_{}", slug(&self.topic), slug(&self.vehicle_category)))
    }

    /// The as-if reading: the membership is merely not necessarily false.
    pub fn as_if(&self) -> Formula {
        Formula::poss_mq(self.literal_formula())
    }

    pub fn literal_label(&self) -> String {
        format!("{} ∈ {}", self.topic, self.vehicle_category)
    }

    pub fn figurative_label(&self) -> String {
        format!("{} ≈ {}", self.topic, self.condition_ii.shared.join(", "))
    }

    pub fn generalization_label(&self) -> Option<String> {
        self.generalization.as_ref().map(|(x, y)| format!("{x} ≈ {y}"))
    }
}

impl Serialize for CreativeResult {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        #[derive(Serialize)]
        struct Conditions<'a> {
            i: bool,
            ii: &'a FeatureMatch,
            iii: bool,
        }
        let mut st = s.serialize_struct("CreativeResult", 12)?;
        st.serialize_field("topic", &self.topic)?;
        st.serialize_field("vehicle", &self.vehicle)?;
        st.serialize_field("orientation", &self.orientation)?;
        st.serialize_field(
            "conditions",
            &Conditions { i: self.condition_i, ii: &self.condition_ii, iii: self.condition_iii },
        )?;
        st.serialize_field("generalization", &self.generalization_label())?;
        st.serialize_field("label", &self.label())?;
        st.serialize_field("accepted", &self.accepted())?;
        st.serialize_field("rejected", &self.rejected())?;
        st.serialize_field("topic_category", &self.topic_category)?;
        st.serialize_field("vehicle_category", &self.vehicle_category)?;
        st.serialize_field("is_simile", &self.is_simile)?;
        st.serialize_field("figurative_meaning", &self.figurative_meaning)?;
        st.end()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum TropeDetection {
    /// The sentence is a literal membership claim.
    Literal,
    /// Neither ontology knows one of the terms.
    UnknownTerms {
        terms: Vec<String>,
    },
    Trope {
        result: Box<CreativeResult>,
    },
}

impl TropeDetection {
    pub fn trope(&self) -> Option<&CreativeResult> {
        match self {
            TropeDetection::Trope { result } => Some(result),
            _ => None,
        }
    }
}

pub(crate) fn slug(s: &str) -> String {
    let mut out: String =
        s.trim().to_lowercase().chars().map(|c| if c.is_ascii_alphanumeric() { c } else { '_' }).collect();
    if out.is_empty() {
        out.push('_');
    }
    out
}

fn category_of<'a>(e: &Entity<'a>) -> &'a str {
    match *e {
        Entity::Exemplar { category, .. } => category,
        Entity::Category { name, .. } => name,
    }
}

/// Conditions i–iii for `topic is (like) vehicle` against one ontology.
pub fn creative_proposition(
    topic: &str,
    vehicle: &str,
    is_simile: bool,
    o: &Ontology,
    config: &TropeConfig,
    conventions: &ConventionStore,
) -> CreativeResult {
    let mismatch = o.category_mismatch(topic, vehicle);
    let topic_entity = o.resolve(topic);
    let vehicle_entity = o.resolve(vehicle);
    let topic_name = topic_entity.map(|e| e.name().to_string()).unwrap_or_else(|| o.canonical_term(topic));
    let x = topic_entity.as_ref().map(category_of).unwrap_or(topic).to_string();
    let y = vehicle_entity.as_ref().map(category_of).unwrap_or(vehicle).to_string();
    let orientation = if o.lookup_reference(topic).has_reality_exemplar() { Orientation::Fp } else { Orientation::Fn };

    let condition_i = mismatch.verdict == MismatchVerdict::CategoryMismatch && x != y;
    let tf = topic_entity.map(|e| e.features()).unwrap_or_default();
    let vf = vehicle_entity.map(|e| e.features()).unwrap_or_default();
    let overlap = feature_overlap(&tf, &vf);
    let condition_ii = if conventions.covers(&x, &y) {
        FeatureMatch { score: None, shared: overlap.shared().to_vec(), inherited: true }
    } else {
        FeatureMatch {
            score: Some(overlap.score().unwrap_or(0.0)),
            shared: overlap.shared().to_vec(),
            inherited: false,
        }
    };

    let mut result = CreativeResult {
        topic: topic_name,
        vehicle: vehicle.trim().to_string(),
        topic_category: x.clone(),
        vehicle_category: y.clone(),
        orientation,
        is_simile,
        condition_i,
        condition_ii,
        condition_iii: false,
        theta: config.theta,
        generalization: None,
        figurative_meaning: String::new(),
    };
    let literal = result.literal_formula();
    let already_real = o.belief_formulas().iter().any(|b| b.formula == literal && b.world == World::Reality);
    result.condition_iii = !already_real;
    if result.condition_i && result.condition_ii_holds() {
        result.generalization = Some((x, y));
    }
    let features = if result.condition_ii.shared.is_empty() {
        "a conventional likeness".to_string()
    } else {
        result.condition_ii.shared.join(", ")
    };
    result.figurative_meaning = if is_simile {
        format!("{} shares {} with {}", result.topic, features, result.vehicle)
    } else {
        format!("{} is {} in the way {} is: {}", result.topic, result.vehicle, result.vehicle_category, features)
    };
    result
}

/// Runs the mismatch test on O_H over O_R (the user's knowledge is searched
/// first) and, on a mismatch, the three acceptance conditions.
pub fn detect_trope(
    subject: &str,
    predicate: &str,
    is_simile: bool,
    o_r: &Ontology,
    o_h: &Ontology,
    config: &TropeConfig,
    conventions: &ConventionStore,
) -> TropeDetection {
    let merged = o_h.overlay(o_r);
    let report = merged.category_mismatch(subject, predicate);
    match report.verdict {
        MismatchVerdict::Literal => TropeDetection::Literal,
        MismatchVerdict::UnknownTerms => {
            let mut terms = Vec::new();
            if !report.subject_has_reference {
                terms.push(subject.to_string());
            }
            if !report.predicate_has_reference_in_category {
                terms.push(predicate.to_string());
            }
            TropeDetection::UnknownTerms { terms }
        }
        MismatchVerdict::CategoryMismatch => TropeDetection::Trope {
            result: Box::new(creative_proposition(subject, predicate, is_simile, &merged, config, conventions)),
        },
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum TropeError {
    #[error("trope was rejected on condition {0:?}")]
    Rejected(Condition),
    #[error(transparent)]
    Ontology(#[from] OntologyError),
}

/// Writes the literal membership as false and unrealistic and the
/// figurative paraphrase as true and realistic, each linked to the other.
/// An existing literal belief is never raised.
pub fn register_as_if(result: &CreativeResult, o_r: &Ontology, config: &TropeConfig) -> Result<Ontology, TropeError> {
    if let Some(c) = result.rejected() {
        return Err(TropeError::Rejected(c));
    }
    let mut out = o_r.clone();
    let literal = result.literal_formula();
    let literal_p = match o_r.find_formula(&literal) {
        Some(i) => o_r.belief_formulas()[i].belief.min(config.literal_p),
        None => config.literal_p,
    };
    let li = out.set_belief(&EntryRef::Formula(literal), literal_p)?;
    let fi = out.set_belief(&EntryRef::Formula(result.figurative_formula()), config.figurative_p)?;
    out.annotate(li, Some(Realism::Unrealistic), Some(result.literal_label()), Some(fi));
    out.annotate(fi, Some(Realism::Realistic), Some(result.figurative_label()), Some(li));
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Attribution {
    Anthropomorphism,
    Robotomorphism,
    None,
}

impl fmt::Display for Attribution {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Attribution::Anthropomorphism => "anthropomorphism",
            Attribution::Robotomorphism => "robotomorphism",
            Attribution::None => "none",
        })
    }
}

/// What a verdict was: an argument form or a trope orientation.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum VerdictKind {
    Syllogism(SyllogismKind),
    Trope(Orientation),
}

impl From<SyllogismKind> for VerdictKind {
    fn from(k: SyllogismKind) -> Self {
        VerdictKind::Syllogism(k)
    }
}

impl From<Orientation> for VerdictKind {
    fn from(o: Orientation) -> Self {
        VerdictKind::Trope(o)
    }
}

/// False alarms (affirmed consequents, Fp tropes) make a human sound like a
/// machine; missed cues (denied antecedents, Fn tropes) make a machine sound
/// like a human.
pub fn attribution_label(kind: impl Into<VerdictKind>) -> Attribution {
    match kind.into() {
        VerdictKind::Syllogism(SyllogismKind::ExConsequentia) | VerdictKind::Trope(Orientation::Fp) => {
            Attribution::Robotomorphism
        }
        VerdictKind::Syllogism(SyllogismKind::InverseError) | VerdictKind::Trope(Orientation::Fn) => {
            Attribution::Anthropomorphism
        }
        VerdictKind::Syllogism(_) => Attribution::None,
    }
}

/// A standing generalization `X ≈ Y` over a pair of categories.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize)]
pub struct ConventionalField {
    pub x: String,
    pub y: String,
    pub support: usize,
}

impl ConventionalField {
    pub fn label(&self) -> String {
        format!("{} ≈ {}", self.x, self.y)
    }

    pub fn formula(&self) -> Formula {
        Formula::atom(format!("field_{}_{}", slug(&self.x), slug(&self.y)))
    }
}

/// Session record of accepted tropes per ordered category pair.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct ConventionStore {
    threshold: usize,
    counts: BTreeMap<(String, String), usize>,
    fields: BTreeSet<(String, String)>,
}

// Tuple keys are not JSON object keys, so pairs are written out as records.
impl Serialize for ConventionStore {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        #[derive(Serialize)]
        struct Pair<'a> {
            x: &'a str,
            y: &'a str,
            count: usize,
            conventional: bool,
        }
        #[derive(Serialize)]
        struct Doc<'a> {
            threshold: usize,
            pairs: Vec<Pair<'a>>,
        }
        let pairs = self
            .counts
            .iter()
            .map(|((x, y), &count)| Pair { x, y, count, conventional: self.fields.contains(&(x.clone(), y.clone())) })
            .collect();
        Doc { threshold: self.threshold, pairs }.serialize(s)
    }
}

impl ConventionStore {
    pub fn new(threshold: usize) -> Self {
        ConventionStore { threshold, ..Default::default() }
    }

    pub fn covers(&self, x: &str, y: &str) -> bool {
        self.fields.contains(&(x.to_string(), y.to_string()))
    }

    pub fn fields(&self) -> impl Iterator<Item = ConventionalField> + '_ {
        self.fields.iter().map(|(x, y)| ConventionalField {
            x: x.clone(),
            y: y.clone(),
            support: self.counts.get(&(x.clone(), y.clone())).copied().unwrap_or(0),
        })
    }

    /// Counts an accepted trope toward its pair; returns a field the first
    /// time the pair reaches the threshold.
    pub fn record(&mut self, result: &CreativeResult) -> Option<ConventionalField> {
        if !result.accepted() || result.condition_ii.inherited {
            return None;
        }
        let key = (result.topic_category.clone(), result.vehicle_category.clone());
        *self.counts.entry(key).or_default() += 1;
        self.conventionalize(&result.topic_category, &result.vehicle_category)
    }

    /// Installs `X ≈ Y` once the pair has enough support.
    pub fn conventionalize(&mut self, x: &str, y: &str) -> Option<ConventionalField> {
        let key = (x.to_string(), y.to_string());
        let support = self.counts.get(&key).copied().unwrap_or(0);
        if support < self.threshold.max(1) || self.fields.contains(&key) {
            return None;
        }
        self.fields.insert(key);
        Some(ConventionalField { x: x.to_string(), y: y.to_string(), support })
    }
}

/// Records an installed field in O_R as a figurative generalization.
pub fn install_field(
    o_r: &Ontology,
    field: &ConventionalField,
    config: &TropeConfig,
) -> Result<Ontology, OntologyError> {
    let mut out = o_r.clone();
    let i = out.set_belief(&EntryRef::Formula(field.formula()), config.literal_p)?;
    out.annotate(i, Some(Realism::Unrealistic), Some(field.label()), None);
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::formula::AgentId;
    use crate::ontology::load_ontology;

    const O: &str = r#"{"owner":"R","categories":{
        "humans":{"world":"reality","prototype_features":["arms","legs","organic"],
                  "exemplars":{"Juliet":{"features":["bright","alive","female"],"belief":0.95}}},
        "celestial":{"world":"reality","prototype_features":["bright","hot","round","gaseous"],
                  "exemplars":{"sun":{"features":["bright","hot","round","gaseous"],"belief":0.99}}},
        "robots":{"world":"reality","prototype_features":["arms","legs","mechanical"],
                  "exemplars":{"robot":{"features":["arms","legs","mechanical"],"belief":0.99}}}}}"#;

    fn o() -> Ontology {
        load_ontology(O).unwrap()
    }

    fn detect(s: &str, p: &str, cfg: &TropeConfig) -> TropeDetection {
        detect_trope(s, p, false, &o(), &Ontology::new(AgentId::human()), cfg, &ConventionStore::new(2))
    }

    #[test]
    fn juliet_is_the_sun() {
        let d = detect("Juliet", "the sun", &TropeConfig::default());
        let r = d.trope().unwrap();
        assert_eq!(r.orientation, Orientation::Fp);
        assert_eq!(r.vehicle_category, "celestial");
        assert_eq!(r.condition_ii.shared, vec!["bright"]);
        assert!((r.condition_ii.score.unwrap() - 1.0 / 6.0).abs() < 1e-12);
        assert_eq!(r.rejected(), Some(Condition::Ii));
        let low = TropeConfig { theta: 0.1, ..Default::default() };
        let r = detect("Juliet", "the sun", &low).trope().unwrap().clone();
        assert!(r.accepted());
        let reg = register_as_if(&r, &o(), &low).unwrap();
        let lit = &reg.belief_formulas()[reg.find_formula(&r.literal_formula()).unwrap()];
        assert_eq!(lit.belief, 0.1);
        assert_eq!(lit.label.as_deref(), Some("Juliet ∈ celestial"));
        assert_eq!(lit.realism, Some(Realism::Unrealistic));
        let fig = &reg.belief_formulas()[lit.link.unwrap()];
        assert_eq!(fig.belief, 0.9);
        assert_eq!(fig.label.as_deref(), Some("Juliet ≈ bright"));
        assert_eq!(fig.realism, Some(Realism::Realistic));
    }

    #[test]
    fn category_topic_is_fn() {
        let d = detect("Juliet", "zorb", &TropeConfig::default());
        assert_eq!(d, TropeDetection::UnknownTerms { terms: vec!["zorb".into()] });
        let r = detect("Robots", "human", &TropeConfig::default());
        let r = r.trope().unwrap();
        assert_eq!(r.orientation, Orientation::Fn);
        assert!(r.accepted());
        assert_eq!(r.label(), Attribution::Anthropomorphism);
    }

    #[test]
    fn membership_is_literal() {
        assert_eq!(detect("robot", "robots", &TropeConfig::default()), TropeDetection::Literal);
    }

    #[test]
    fn rejected_result_cannot_be_registered() {
        let r = detect("Juliet", "sun", &TropeConfig::default()).trope().unwrap().clone();
        assert_eq!(register_as_if(&r, &o(), &TropeConfig::default()), Err(TropeError::Rejected(Condition::Ii)));
    }

    #[test]
    fn labels() {
        assert_eq!(attribution_label(Orientation::Fp), Attribution::Robotomorphism);
        assert_eq!(attribution_label(SyllogismKind::InverseError), Attribution::Anthropomorphism);
        assert_eq!(attribution_label(SyllogismKind::ModusPonens), Attribution::None);
        assert_eq!(attribution_label(SyllogismKind::None), Attribution::None);
    }

    #[test]
    fn trope_json_shape() {
        let r = detect("Juliet", "sun", &TropeConfig::default());
        let v = serde_json::to_value(r.trope().unwrap()).unwrap();
        for key in ["topic", "vehicle", "orientation", "conditions", "generalization", "label"] {
            assert!(v.get(key).is_some(), "{key}");
        }
        assert_eq!(v["conditions"]["ii"]["shared"][0], "bright");
    }
}
