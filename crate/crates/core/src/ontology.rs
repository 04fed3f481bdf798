//! Agent-scoped knowledge bases: categories of exemplars with features, plus
//! belief formulas annotated with a probability.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::marker::PhantomData;

use serde::de::{MapAccess, Visitor};
use serde::{Deserialize, Deserializer, Serialize};
use thiserror::Error;

use crate::epivir::{Realism, World};
use crate::formula::{format_formula, parse_formula, AgentId, Formula};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum OntologyError {
    #[error("malformed ontology document: {0}")]
    Schema(String),
    #[error("probability {value} for {context} is outside [0, 1]")]
    ProbabilityOutOfRange { context: String, value: f64 },
    #[error("duplicate {kind} name {name:?}")]
    DuplicateName { kind: &'static str, name: String },
    #[error("owner must be \"R\" or \"H\", got {0:?}")]
    InvalidOwner(String),
    #[error("belief formula {index}: {message}")]
    InvalidFormula { index: usize, message: String },
    #[error("belief formula {index} is tagged {world:?} but has probability {belief}")]
    WorldMismatch { index: usize, world: World, belief: f64 },
    #[error("empty {0} name")]
    EmptyName(&'static str),
    #[error("belief formula {index} links to missing entry {link}")]
    DanglingLink { index: usize, link: usize },
    #[error("no entry {0} in this ontology")]
    UnknownEntry(String),
}

fn check_probability(context: impl FnOnce() -> String, value: f64) -> Result<f64, OntologyError> {
    if (0.0..=1.0).contains(&value) {
        Ok(value)
    } else {
        Err(OntologyError::ProbabilityOutOfRange { context: context(), value })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Exemplar {
    pub features: BTreeSet<String>,
    pub belief: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Category {
    pub world: World,
    pub prototype_features: BTreeSet<String>,
    pub exemplars: BTreeMap<String, Exemplar>,
}

impl Category {
    /// The prototype if it has features, otherwise the union of the
    /// exemplars' features.
    pub fn features(&self) -> BTreeSet<String> {
        if !self.prototype_features.is_empty() {
            return self.prototype_features.clone();
        }
        self.exemplars.values().flat_map(|e| e.features.iter().cloned()).collect()
    }
}

/// A belief formula. `world` is always derived from `belief`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BeliefEntry {
    #[serde(with = "crate::formula::dsl")]
    pub formula: Formula,
    pub belief: f64,
    pub world: World,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub realism: Option<Realism>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub label: Option<String>,
    /// Index of a related entry, used to pair literal and figurative readings.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub link: Option<usize>,
}

/// Surface phrases for atoms and conditionals, used when asking the user
/// clarification questions.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Labels {
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub atoms: BTreeMap<String, AtomLabel>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub links: BTreeMap<String, String>,
}

impl Labels {
    pub fn is_empty(&self) -> bool {
        self.atoms.is_empty() && self.links.is_empty()
    }

    /// Merge, with entries in `self` winning.
    fn merged_over(&self, other: &Labels) -> Labels {
        let mut out = other.clone();
        out.atoms.extend(self.atoms.iter().map(|(k, v)| (k.clone(), v.clone())));
        out.links.extend(self.links.iter().map(|(k, v)| (k.clone(), v.clone())));
        out
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AtomLabel {
    pub affirmed: String,
    pub denied: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Ontology {
    owner: AgentId,
    categories: BTreeMap<String, Category>,
    belief_formulas: Vec<BeliefEntry>,
    aliases: BTreeMap<String, String>,
    labels: Labels,
}

// ---- document form -------------------------------------------------------

/// A string-keyed map that rejects duplicate keys while deserializing.
struct UniqueMap<V>(Vec<(String, V)>);

impl<'de, V: Deserialize<'de>> Deserialize<'de> for UniqueMap<V> {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        struct V_<V>(PhantomData<V>);
        impl<'de, V: Deserialize<'de>> Visitor<'de> for V_<V> {
            type Value = UniqueMap<V>;
            fn expecting(&self, f: &mut fmt::Formatter) -> fmt::Result {
                f.write_str("an object with unique keys")
            }
            fn visit_map<A: MapAccess<'de>>(self, mut m: A) -> Result<Self::Value, A::Error> {
                let mut out: Vec<(String, V)> = Vec::new();
                while let Some((k, v)) = m.next_entry::<String, V>()? {
                    if out.iter().any(|(e, _)| *e == k) {
                        return Err(serde::de::Error::custom(format!("duplicate name {k:?}")));
                    }
                    out.push((k, v));
                }
                Ok(UniqueMap(out))
            }
        }
        d.deserialize_map(V_(PhantomData))
    }
}

impl<V> Default for UniqueMap<V> {
    fn default() -> Self {
        UniqueMap(Vec::new())
    }
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct ExemplarDoc {
    #[serde(default)]
    features: Vec<String>,
    belief: f64,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct CategoryDoc {
    world: World,
    #[serde(default)]
    prototype_features: Vec<String>,
    #[serde(default)]
    exemplars: UniqueMap<ExemplarDoc>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct BeliefDoc {
    formula: String,
    belief: f64,
    #[serde(default)]
    world: Option<World>,
    #[serde(default)]
    realism: Option<Realism>,
    #[serde(default)]
    label: Option<String>,
    #[serde(default)]
    link: Option<usize>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct OntologyDoc {
    owner: String,
    #[serde(default)]
    categories: UniqueMap<CategoryDoc>,
    #[serde(default)]
    belief_formulas: Vec<BeliefDoc>,
    #[serde(default)]
    aliases: UniqueMap<String>,
    #[serde(default)]
    labels: Labels,
}

fn features_of(list: Vec<String>, kind: &'static str) -> Result<BTreeSet<String>, OntologyError> {
    let mut set = BTreeSet::new();
    for f in list {
        if f.trim().is_empty() {
            return Err(OntologyError::EmptyName("feature"));
        }
        if !set.insert(f.clone()) {
            return Err(OntologyError::DuplicateName { kind, name: f });
        }
    }
    Ok(set)
}

/// Parses and validates an ontology document.
pub fn load_ontology(text: &str) -> Result<Ontology, OntologyError> {
    let doc: OntologyDoc = serde_json::from_str(text).map_err(|e| {
        let msg = e.to_string();
        match msg.find("duplicate name ") {
            Some(i) => OntologyError::DuplicateName {
                kind: "category or exemplar",
                name: msg[i + 15..].split('"').nth(1).unwrap_or_default().to_string(),
            },
            None => OntologyError::Schema(msg),
        }
    })?;
    let owner = match doc.owner.as_str() {
        "R" => AgentId::robot(),
        "H" => AgentId::human(),
        other => return Err(OntologyError::InvalidOwner(other.to_string())),
    };
    let mut categories = BTreeMap::new();
    for (cname, c) in doc.categories.0 {
        if cname.trim().is_empty() {
            return Err(OntologyError::EmptyName("category"));
        }
        let mut exemplars = BTreeMap::new();
        for (ename, e) in c.exemplars.0 {
            if ename.trim().is_empty() {
                return Err(OntologyError::EmptyName("exemplar"));
            }
            let belief = check_probability(|| format!("exemplar {cname}/{ename}"), e.belief)?;
            let features = features_of(e.features, "feature")?;
            exemplars.insert(ename, Exemplar { features, belief });
        }
        let prototype_features = features_of(c.prototype_features, "prototype feature")?;
        categories.insert(cname, Category { world: c.world, prototype_features, exemplars });
    }
    let mut belief_formulas = Vec::with_capacity(doc.belief_formulas.len());
    for (index, b) in doc.belief_formulas.into_iter().enumerate() {
        let formula =
            parse_formula(&b.formula).map_err(|e| OntologyError::InvalidFormula { index, message: e.to_string() })?;
        let belief = check_probability(|| format!("belief formula {index}"), b.belief)?;
        let world = World::of(belief);
        if let Some(tag) = b.world {
            if tag != world {
                return Err(OntologyError::WorldMismatch { index, world: tag, belief });
            }
        }
        belief_formulas.push(BeliefEntry { formula, belief, world, realism: b.realism, label: b.label, link: b.link });
    }
    for (index, b) in belief_formulas.iter().enumerate() {
        if let Some(link) = b.link {
            if link >= belief_formulas.len() {
                return Err(OntologyError::DanglingLink { index, link });
            }
        }
    }
    Ok(Ontology {
        owner,
        categories,
        belief_formulas,
        aliases: doc.aliases.0.into_iter().collect(),
        labels: doc.labels,
    })
}

impl Serialize for Ontology {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        #[derive(Serialize)]
        struct Doc<'a> {
            owner: &'a AgentId,
            categories: &'a BTreeMap<String, Category>,
            belief_formulas: &'a [BeliefEntry],
            #[serde(skip_serializing_if = "BTreeMap::is_empty")]
            aliases: &'a BTreeMap<String, String>,
            #[serde(skip_serializing_if = "Labels::is_empty")]
            labels: &'a Labels,
        }
        Doc {
            owner: &self.owner,
            categories: &self.categories,
            belief_formulas: &self.belief_formulas,
            aliases: &self.aliases,
            labels: &self.labels,
        }
        .serialize(s)
    }
}

// ---- reference lookup ----------------------------------------------------

/// One place a term occurs: as an exemplar of `category`, or (when
/// `exemplar` is `None`) as the category's own name.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Membership {
    pub category: String,
    pub world: World,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub exemplar: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ReferenceInfo {
    pub term: String,
    pub memberships: Vec<Membership>,
}

impl ReferenceInfo {
    /// No reference at all: a sense-only candidate.
    pub fn is_empty(&self) -> bool {
        self.memberships.is_empty()
    }

    pub fn categories(&self) -> BTreeSet<&str> {
        self.memberships.iter().map(|m| m.category.as_str()).collect()
    }

    /// The term is an exemplar of some reality category.
    pub fn has_reality_exemplar(&self) -> bool {
        self.memberships.iter().any(|m| m.exemplar.is_some() && m.world == World::Reality)
    }

    pub fn names_category(&self) -> Option<&str> {
        self.memberships.iter().find(|m| m.exemplar.is_none()).map(|m| m.category.as_str())
    }

    pub fn exemplar_memberships(&self) -> impl Iterator<Item = &Membership> {
        self.memberships.iter().filter(|m| m.exemplar.is_some())
    }
}

/// Lower-cases, trims and drops a leading article.
pub fn normalize_term(term: &str) -> String {
    let t = term.trim().to_lowercase();
    for article in ["a ", "an ", "the "] {
        if let Some(rest) = t.strip_prefix(article) {
            return rest.trim().to_string();
        }
    }
    t
}

fn names_match(term: &str, candidate: &str) -> bool {
    normalize_term(candidate) == term
}

// A term names a category either exactly or as its singular ("human" / "humans").
fn names_category(term: &str, category: &str) -> bool {
    let c = normalize_term(category);
    c == term || c == format!("{term}s")
}

/// Either side of a feature comparison.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Entity<'a> {
    Exemplar { category: &'a str, name: &'a str, exemplar: &'a Exemplar },
    Category { name: &'a str, category: &'a Category },
}

impl Entity<'_> {
    pub fn features(&self) -> BTreeSet<String> {
        match self {
            Entity::Exemplar { exemplar, .. } => exemplar.features.clone(),
            Entity::Category { category, .. } => category.features(),
        }
    }

    pub fn name(&self) -> &str {
        match self {
            Entity::Exemplar { name, .. } | Entity::Category { name, .. } => name,
        }
    }
}

/// Similarity of two feature sets.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Overlap {
    Score {
        score: f64,
        shared: Vec<String>,
    },
    /// Both sets were empty.
    NoEvidence,
}

impl Overlap {
    pub fn score(&self) -> Option<f64> {
        match self {
            Overlap::Score { score, .. } => Some(*score),
            Overlap::NoEvidence => None,
        }
    }

    pub fn shared(&self) -> &[String] {
        match self {
            Overlap::Score { shared, .. } => shared,
            Overlap::NoEvidence => &[],
        }
    }
}

/// Jaccard similarity `|x ∩ y| / |x ∪ y|`.
pub fn feature_overlap(x: &BTreeSet<String>, y: &BTreeSet<String>) -> Overlap {
    let union = x.union(y).count();
    if union == 0 {
        return Overlap::NoEvidence;
    }
    let shared: Vec<String> = x.intersection(y).cloned().collect();
    Overlap::Score { score: shared.len() as f64 / union as f64, shared }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum MismatchVerdict {
    Literal,
    CategoryMismatch,
    UnknownTerms,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MismatchReport {
    pub subject_term: String,
    pub predicate_term: String,
    pub subject_has_reference: bool,
    pub predicate_has_reference_in_category: bool,
    pub shared_categories: BTreeSet<String>,
    pub verdict: MismatchVerdict,
}

/// Which entry `update_belief` should change.
#[derive(Debug, Clone, PartialEq)]
pub enum EntryRef {
    Formula(Formula),
    Exemplar { category: String, exemplar: String },
}

impl Ontology {
    pub fn new(owner: AgentId) -> Self {
        Ontology {
            owner,
            categories: BTreeMap::new(),
            belief_formulas: Vec::new(),
            aliases: BTreeMap::new(),
            labels: Labels::default(),
        }
    }

    pub fn owner(&self) -> &AgentId {
        &self.owner
    }

    /// `O_R` for the robot's own ontology, `O_H` for its model of the user.
    pub fn id(&self) -> String {
        format!("O_{}", self.owner)
    }

    pub fn categories(&self) -> &BTreeMap<String, Category> {
        &self.categories
    }

    pub fn category(&self, name: &str) -> Option<&Category> {
        self.categories.get(name)
    }

    pub fn belief_formulas(&self) -> &[BeliefEntry] {
        &self.belief_formulas
    }

    pub fn labels(&self) -> &Labels {
        &self.labels
    }

    /// Resolves pronoun-like aliases ("I" → "speaker"), then normalizes.
    pub fn canonical_term(&self, term: &str) -> String {
        let t = normalize_term(term);
        for (alias, target) in &self.aliases {
            if normalize_term(alias) == t {
                return normalize_term(target);
            }
        }
        t
    }

    pub fn lookup_reference(&self, term: &str) -> ReferenceInfo {
        let t = self.canonical_term(term);
        let mut memberships = Vec::new();
        for (cname, c) in &self.categories {
            for ename in c.exemplars.keys() {
                if names_match(&t, ename) {
                    memberships.push(Membership {
                        category: cname.clone(),
                        world: c.world,
                        exemplar: Some(ename.clone()),
                    });
                }
            }
        }
        for (cname, c) in &self.categories {
            if names_category(&t, cname) {
                memberships.push(Membership { category: cname.clone(), world: c.world, exemplar: None });
            }
        }
        ReferenceInfo { term: term.to_string(), memberships }
    }

    /// The entity a term denotes, preferring exemplars of reality
    /// categories, then any exemplar, then a named category.
    pub fn resolve(&self, term: &str) -> Option<Entity<'_>> {
        let info = self.lookup_reference(term);
        let pick = info
            .exemplar_memberships()
            .find(|m| m.world == World::Reality)
            .or_else(|| info.exemplar_memberships().next());
        if let Some(m) = pick {
            let (cname, c) = self.categories.get_key_value(&m.category)?;
            let ename = m.exemplar.as_ref()?;
            let (name, exemplar) = c.exemplars.get_key_value(ename)?;
            return Some(Entity::Exemplar { category: cname, name, exemplar });
        }
        let cname = info.names_category()?;
        let (name, category) = self.categories.get_key_value(cname)?;
        Some(Entity::Category { name, category })
    }

    /// Decides whether "subject is (a) predicate" is a literal membership
    /// claim. It is literal when some category the predicate names or
    /// belongs to contains the subject, is named by the subject, or has a
    /// nonempty prototype that the subject's category prototype includes.
    pub fn category_mismatch(&self, subject: &str, predicate: &str) -> MismatchReport {
        let s = self.lookup_reference(subject);
        let p = self.lookup_reference(predicate);
        let subj_cats = s.categories();
        let pred_cats = p.categories();
        let shared: BTreeSet<String> = subj_cats.intersection(&pred_cats).map(|c| c.to_string()).collect();
        let verdict = if s.is_empty() || p.is_empty() {
            MismatchVerdict::UnknownTerms
        } else if !shared.is_empty() || self.subsumed(&subj_cats, &pred_cats) {
            MismatchVerdict::Literal
        } else {
            MismatchVerdict::CategoryMismatch
        };
        MismatchReport {
            subject_term: subject.to_string(),
            predicate_term: predicate.to_string(),
            subject_has_reference: !s.is_empty(),
            predicate_has_reference_in_category: !p.is_empty(),
            shared_categories: shared,
            verdict,
        }
    }

    fn subsumed(&self, subj_cats: &BTreeSet<&str>, pred_cats: &BTreeSet<&str>) -> bool {
        subj_cats.iter().any(|s| {
            pred_cats.iter().any(|c| {
                let (Some(sc), Some(cc)) = (self.categories.get(*s), self.categories.get(*c)) else {
                    return false;
                };
                s != c && !cc.prototype_features.is_empty() && cc.prototype_features.is_subset(&sc.prototype_features)
            })
        })
    }

    /// Belief formulas in the reality region, ready for the prover. Entries
    /// of the user model are wrapped as `B(R, ·)`: they are what the robot
    /// believes the user believes.
    pub fn tableau_clauses(&self) -> Vec<Formula> {
        self.belief_formulas
            .iter()
            .zip(self.tableau_clauses_all())
            .filter(|(b, _)| b.world == World::Reality)
            .map(|(_, f)| f)
            .collect()
    }

    /// Every belief formula in its exported form, whatever its world.
    pub(crate) fn tableau_clauses_all(&self) -> Vec<Formula> {
        let wrap = !self.owner.is_robot();
        self.belief_formulas
            .iter()
            .map(|b| match &b.formula {
                f @ Formula::Believes(agent, _) if agent.is_robot() => f.clone(),
                f if wrap => Formula::believes(AgentId::robot(), f.clone()),
                f => f.clone(),
            })
            .collect()
    }

    pub fn find_formula(&self, f: &Formula) -> Option<usize> {
        self.belief_formulas.iter().position(|b| &b.formula == f)
    }

    /// Returns a copy with the entry's probability replaced and its world tag
    /// recomputed. A formula that is not present yet is appended.
    pub fn update_belief(&self, entry: &EntryRef, p: f64) -> Result<Ontology, OntologyError> {
        let mut out = self.clone();
        out.set_belief(entry, p)?;
        Ok(out)
    }

    pub(crate) fn set_belief(&mut self, entry: &EntryRef, p: f64) -> Result<usize, OntologyError> {
        let p = check_probability(|| "update".into(), p)?;
        match entry {
            EntryRef::Formula(f) => Ok(match self.find_formula(f) {
                Some(i) => {
                    self.belief_formulas[i].belief = p;
                    self.belief_formulas[i].world = World::of(p);
                    i
                }
                None => {
                    self.belief_formulas.push(BeliefEntry {
                        formula: f.clone(),
                        belief: p,
                        world: World::of(p),
                        realism: None,
                        label: None,
                        link: None,
                    });
                    self.belief_formulas.len() - 1
                }
            }),
            EntryRef::Exemplar { category, exemplar } => {
                let e = self
                    .categories
                    .get_mut(category)
                    .and_then(|c| c.exemplars.get_mut(exemplar))
                    .ok_or_else(|| OntologyError::UnknownEntry(format!("{category}/{exemplar}")))?;
                e.belief = p;
                Ok(0)
            }
        }
    }

    pub(crate) fn annotate(
        &mut self,
        index: usize,
        realism: Option<Realism>,
        label: Option<String>,
        link: Option<usize>,
    ) {
        let b = &mut self.belief_formulas[index];
        b.realism = realism;
        b.label = label;
        b.link = link;
    }

    /// Merges two ontologies for lookup, `self` taking precedence. The
    /// owner of the result is `self`'s.
    pub fn overlay(&self, fallback: &Ontology) -> Ontology {
        let mut out = fallback.clone();
        out.owner = self.owner.clone();
        for (cname, c) in &self.categories {
            match out.categories.get_mut(cname) {
                Some(existing) => {
                    existing.world = c.world;
                    existing.prototype_features.extend(c.prototype_features.iter().cloned());
                    for (ename, e) in &c.exemplars {
                        existing.exemplars.insert(ename.clone(), e.clone());
                    }
                }
                None => {
                    out.categories.insert(cname.clone(), c.clone());
                }
            }
        }
        // Exemplars redefined by `self` in another category shadow the
        // fallback's record.
        let own: BTreeSet<String> = self.categories.values().flat_map(|c| c.exemplars.keys().cloned()).collect();
        for (cname, c) in out.categories.iter_mut() {
            if self.categories.contains_key(cname) {
                continue;
            }
            c.exemplars.retain(|e, _| !own.contains(e));
        }
        out.belief_formulas = self.belief_formulas.clone();
        out.aliases = fallback.aliases.clone();
        out.aliases.extend(self.aliases.iter().map(|(k, v)| (k.clone(), v.clone())));
        out.labels = self.labels.merged_over(&fallback.labels);
        out
    }

    /// Text summary for logs.
    pub fn describe(&self) -> String {
        let mut lines = vec![format!("{} ({} categories)", self.id(), self.categories.len())];
        for b in &self.belief_formulas {
            lines.push(format!("  {:.2} {:?} {}", b.belief, b.world, format_formula(&b.formula)));
        }
        lines.join("\n")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINI: &str = r#"{"owner":"R","categories":{"humans":{"world":"reality","exemplars":{"Juliet":{"features":["bright","alive"],"belief":0.95}}}}}"#;

    #[test]
    fn minimal_document() {
        let o = load_ontology(MINI).unwrap();
        assert_eq!(o.categories().len(), 1);
        assert_eq!(o.category("humans").unwrap().exemplars.len(), 1);
        assert_eq!(o.id(), "O_R");
    }

    #[test]
    fn probability_out_of_range() {
        let doc = MINI.replace("0.95", "1.3");
        assert!(matches!(load_ontology(&doc), Err(OntologyError::ProbabilityOutOfRange { .. })));
        let doc = r#"{"owner":"R","belief_formulas":[{"formula":"x","belief":-0.1}]}"#;
        assert!(matches!(load_ontology(doc), Err(OntologyError::ProbabilityOutOfRange { .. })));
    }

    #[test]
    fn duplicate_names_rejected() {
        let doc = r#"{"owner":"R","categories":{"a":{"world":"reality"},"a":{"world":"fiction"}}}"#;
        assert!(matches!(load_ontology(doc), Err(OntologyError::DuplicateName { .. })));
        let doc =
            r#"{"owner":"R","categories":{"a":{"world":"reality","exemplars":{"x":{"belief":1},"x":{"belief":1}}}}}"#;
        assert!(matches!(load_ontology(doc), Err(OntologyError::DuplicateName { .. })));
    }

    #[test]
    fn schema_violations() {
        assert!(matches!(load_ontology(r#"{"owner":"Q"}"#), Err(OntologyError::InvalidOwner(_))));
        assert!(matches!(load_ontology(r#"{"owner":"R","extra":1}"#), Err(OntologyError::Schema(_))));
        assert!(matches!(
            load_ontology(r#"{"owner":"R","belief_formulas":[{"formula":"a ->","belief":0.9}]}"#),
            Err(OntologyError::InvalidFormula { .. })
        ));
        assert!(matches!(
            load_ontology(r#"{"owner":"R","belief_formulas":[{"formula":"a","belief":0.9,"world":"fiction"}]}"#),
            Err(OntologyError::WorldMismatch { .. })
        ));
    }

    #[test]
    fn lookup() {
        let o = load_ontology(MINI).unwrap();
        assert_eq!(o.lookup_reference("Juliet").categories().into_iter().collect::<Vec<_>>(), vec!["humans"]);
        assert!(o.lookup_reference("xyzzy").is_empty());
        assert_eq!(o.lookup_reference("human").names_category(), Some("humans"));
    }

    #[test]
    fn overlap_cases() {
        let set = |xs: &[&str]| xs.iter().map(|s| s.to_string()).collect::<BTreeSet<_>>();
        let h = set(&["arms", "legs", "scripted_behavior", "organic"]);
        let r = set(&["arms", "legs", "scripted_behavior", "mechanical"]);
        let ov = feature_overlap(&h, &r);
        assert_eq!(ov.score(), Some(0.6));
        assert_eq!(ov.shared(), ["arms", "legs", "scripted_behavior"]);
        assert_eq!(feature_overlap(&h, &h).score(), Some(1.0));
        assert_eq!(feature_overlap(&set(&["a"]), &set(&["b"])).score(), Some(0.0));
        assert_eq!(feature_overlap(&set(&[]), &set(&[])), Overlap::NoEvidence);
    }

    #[test]
    fn update_belief_retags() {
        let o = load_ontology(r#"{"owner":"H","belief_formulas":[{"formula":"x","belief":0.3}]}"#).unwrap();
        let e = EntryRef::Formula(Formula::atom("x"));
        assert_eq!(o.update_belief(&e, 0.9).unwrap().belief_formulas()[0].world, World::Reality);
        assert_eq!(o.update_belief(&e, 0.2).unwrap().belief_formulas()[0].world, World::Fiction);
        assert_eq!(o.update_belief(&e, 0.5).unwrap().belief_formulas()[0].world, World::Fiction);
        assert!(o.update_belief(&e, 1.5).is_err());
        assert_eq!(o.belief_formulas()[0].belief, 0.3);
    }

    #[test]
    fn user_model_export_is_wrapped() {
        let o = load_ontology(
            r#"{"owner":"H","belief_formulas":[{"formula":"a -> d","belief":0.9},{"formula":"B(R, q)","belief":0.8},{"formula":"z","belief":0.2}]}"#,
        )
        .unwrap();
        let c = o.tableau_clauses();
        assert_eq!(c.len(), 2);
        for f in &c {
            assert!(matches!(f, Formula::Believes(a, _) if a.is_robot()));
        }
        assert_eq!(format_formula(&c[1]), "B(R,q)");
    }

    #[test]
    fn round_trip_document() {
        let o = load_ontology(MINI).unwrap();
        let text = serde_json::to_string(&o).unwrap();
        assert_eq!(load_ontology(&text).unwrap(), o);
    }

    #[test]
    fn articles_and_case_are_ignored() {
        assert_eq!(normalize_term("  The Sun "), "sun");
        assert_eq!(normalize_term("A dog"), "dog");
        assert_eq!(normalize_term("Anna"), "anna");
    }
}
