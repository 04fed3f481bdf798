//! Conditional argument forms: recognition, tableau confirmation, the
//! containment formulas that keep a fallacious user in good standing, and
//! clarification questions.

use std::collections::{BTreeMap, VecDeque};

use serde::ser::SerializeStruct;
use serde::{Serialize, Serializer};
use thiserror::Error;

use crate::formula::{format_formula, AgentId, Formula};
use crate::ontology::{Labels, Ontology};
use crate::tableau::{check_consequence, ProofResult, TableauConfig, TableauError};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SyllogismKind {
    ModusPonens,
    ModusTollens,
    HypotheticalSyllogism,
    /// Affirming the consequent.
    ExConsequentia,
    /// Denying the antecedent.
    InverseError,
    None,
}

impl SyllogismKind {
    pub fn is_valid_form(self) -> bool {
        matches!(self, SyllogismKind::ModusPonens | SyllogismKind::ModusTollens | SyllogismKind::HypotheticalSyllogism)
    }

    pub fn is_fallacy(self) -> bool {
        matches!(self, SyllogismKind::ExConsequentia | SyllogismKind::InverseError)
    }
}

/// The four slots are content formulas: epistemic wrappers and the
/// reasoner's belief root are stripped.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct PatternSlots {
    #[serde(with = "crate::formula::dsl")]
    pub antecedent: Formula,
    #[serde(with = "crate::formula::dsl")]
    pub consequent: Formula,
    #[serde(with = "crate::formula::dsl")]
    pub asserted: Formula,
    #[serde(with = "crate::formula::dsl")]
    pub concluded: Formula,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SyllogismPattern {
    pub kind: SyllogismKind,
    #[serde(flatten, skip_serializing_if = "Option::is_none")]
    pub slots: Option<PatternSlots>,
    /// Conditionals the match went through, in chain order.
    #[serde(with = "crate::formula::dsl::list")]
    pub via: Vec<Formula>,
}

impl SyllogismPattern {
    fn none() -> Self {
        SyllogismPattern { kind: SyllogismKind::None, slots: None, via: Vec::new() }
    }
}

/// Removes a `B(R, ·)` root and every `B`/`K` wrapper of other agents,
/// leaving the propositional content.
pub fn content(f: &Formula) -> Formula {
    match f {
        Formula::Believes(agent, inner) if agent.is_robot() => strip_wrappers(inner),
        other => strip_wrappers(other),
    }
}

fn strip_wrappers(f: &Formula) -> Formula {
    use Formula::*;
    match f {
        Believes(_, inner) | Knows(_, inner) => strip_wrappers(inner),
        Not(a) => Formula::not(strip_wrappers(a)),
        And(a, b) => Formula::and(strip_wrappers(a), strip_wrappers(b)),
        Or(a, b) => Formula::or(strip_wrappers(a), strip_wrappers(b)),
        Implies(a, b) => Formula::implies(strip_wrappers(a), strip_wrappers(b)),
        Iff(a, b) => Formula::iff(strip_wrappers(a), strip_wrappers(b)),
        other => other.clone(),
    }
}

struct Graph<'a> {
    edges: Vec<(&'a Formula, &'a Formula, &'a Formula)>,
}

impl<'a> Graph<'a> {
    fn new(conditionals: &'a [Formula]) -> Self {
        let edges = conditionals
            .iter()
            .filter_map(|c| match c {
                Formula::Implies(a, b) => Some((&**a, &**b, c)),
                _ => None,
            })
            .collect();
        Graph { edges }
    }

    /// Shortest chain of conditionals leading from `from` to `to`.
    fn path(&self, from: &Formula, to: &Formula) -> Option<Vec<Formula>> {
        let mut prev: BTreeMap<&Formula, (&Formula, &Formula)> = BTreeMap::new();
        let mut queue = VecDeque::from([from]);
        let mut seen = vec![from];
        while let Some(node) = queue.pop_front() {
            for &(a, b, cond) in &self.edges {
                if a != node || seen.contains(&b) {
                    continue;
                }
                prev.insert(b, (a, cond));
                if b == to {
                    let mut chain = vec![cond.clone()];
                    let mut cur = a;
                    while cur != from {
                        let (p, c) = prev[cur];
                        chain.push(c.clone());
                        cur = p;
                    }
                    chain.reverse();
                    return Some(chain);
                }
                seen.push(b);
                queue.push_back(b);
            }
        }
        None
    }
}

/// Recognizes the argument form of `premises ∴ conclusion`, drawing extra
/// conditionals from `background`. A conditional conclusion `P -> Q` is read
/// as the premise `P` and the conclusion `Q`. Valid forms are tried first.
pub fn match_with_background(premises: &[Formula], conclusion: &Formula, background: &[Formula]) -> SyllogismPattern {
    let mut facts: Vec<Formula> = Vec::new();
    let mut conds: Vec<Formula> = Vec::new();
    for p in premises.iter().map(content) {
        if matches!(p, Formula::Implies(..)) {
            conds.push(p);
        } else {
            facts.push(p);
        }
    }
    for b in background.iter().map(content) {
        if matches!(b, Formula::Implies(..)) && !conds.contains(&b) {
            conds.push(b);
        }
    }
    let mut goal = content(conclusion);
    if let Formula::Implies(p, q) = &goal {
        facts.push((**p).clone());
        goal = (**q).clone();
    }
    let g = Graph::new(&conds);
    let slots = |antecedent: &Formula, consequent: &Formula, asserted: &Formula| PatternSlots {
        antecedent: antecedent.clone(),
        consequent: consequent.clone(),
        asserted: asserted.clone(),
        concluded: goal.clone(),
    };
    let found = |kind, slots, via| SyllogismPattern { kind, slots: Some(slots), via };

    for f in &facts {
        if let Some(via) = g.path(f, &goal) {
            let kind = if via.len() == 1 { SyllogismKind::ModusPonens } else { SyllogismKind::HypotheticalSyllogism };
            return found(kind, slots(f, &goal, f), via);
        }
    }
    for f in &facts {
        let b = f.complement();
        let a = goal.complement();
        if let Some(via) = g.path(&a, &b) {
            return found(SyllogismKind::ModusTollens, slots(&a, &b, f), via);
        }
    }
    for f in &facts {
        if let Some(via) = g.path(&goal, f) {
            return found(SyllogismKind::ExConsequentia, slots(&goal, f, f), via);
        }
    }
    for f in &facts {
        let a = f.complement();
        let b = goal.complement();
        if let Some(via) = g.path(&a, &b) {
            return found(SyllogismKind::InverseError, slots(&a, &b, f), via);
        }
    }
    SyllogismPattern::none()
}

/// Pattern of an utterance given as `premise, ..., conclusion`; a single
/// formula is taken as the conclusion.
pub fn match_syllogism_pattern(utterance: &[Formula]) -> SyllogismPattern {
    match utterance.split_last() {
        Some((conclusion, premises)) => match_with_background(premises, conclusion, &[]),
        None => SyllogismPattern::none(),
    }
}

/// Maps content atoms to the epistemic literal they appear under in the
/// ontology's conditionals, e.g. `a ↦ K(H,a)`. First occurrence wins.
pub fn epistemic_lifting(o: &Ontology) -> BTreeMap<String, Formula> {
    fn walk(f: &Formula, out: &mut BTreeMap<String, Formula>) {
        match f {
            Formula::Believes(agent, inner) | Formula::Knows(agent, inner) if !agent.is_robot() => {
                if let Formula::Atom(name) = &**inner {
                    out.entry(name.clone()).or_insert_with(|| f.clone());
                }
            }
            other => {
                for c in other.children() {
                    walk(c, out);
                }
            }
        }
    }
    let mut out = BTreeMap::new();
    for clause in o.tableau_clauses() {
        let body = match &clause {
            Formula::Believes(agent, inner) if agent.is_robot() => &**inner,
            other => other,
        };
        walk(body, &mut out);
    }
    out
}

/// Rewraps bare atoms using a lifting table; epistemic nodes are kept.
pub fn lift(f: &Formula, table: &BTreeMap<String, Formula>) -> Formula {
    use Formula::*;
    match f {
        Atom(name) => table.get(name).cloned().unwrap_or_else(|| f.clone()),
        Not(a) => Formula::not(lift(a, table)),
        And(a, b) => Formula::and(lift(a, table), lift(b, table)),
        Or(a, b) => Formula::or(lift(a, table), lift(b, table)),
        Implies(a, b) => Formula::implies(lift(a, table), lift(b, table)),
        Iff(a, b) => Formula::iff(lift(a, table), lift(b, table)),
        other => other.clone(),
    }
}

/// The hypothesis the robot tests for a recognized pattern:
/// `B(R, asserted' -> concluded')` with atoms lifted through O_R.
pub fn hypothesis_for(pattern: &SyllogismPattern, o_r: &Ontology) -> Option<Formula> {
    let slots = pattern.slots.as_ref()?;
    let table = epistemic_lifting(o_r);
    Some(Formula::believes(
        AgentId::robot(),
        Formula::implies(lift(&slots.asserted, &table), lift(&slots.concluded, &table)),
    ))
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum FallacyError {
    #[error("statement {} is not rooted at B(R, ·)", format_formula(.0))]
    NotBeliefWrapped(Formula),
    #[error("expected {expected}, found {}", format_formula(.found))]
    ShapeMismatch { expected: &'static str, found: Formula },
    #[error("no clarification templates for {0:?}")]
    UnsupportedKind(SyllogismKind),
    #[error(transparent)]
    Tableau(#[from] TableauError),
}

/// A containment formula. `false_to_robot` is the implication node that
/// carries the "necessarily false to the robot" tag; it has no truth
/// functional meaning and is kept beside the formula, not inside it.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Containment {
    #[serde(with = "crate::formula::dsl")]
    pub formula: Formula,
    #[serde(with = "crate::formula::dsl")]
    pub false_to_robot: Formula,
}

fn robot_conditional(statement: &Formula) -> Result<(&Formula, &Formula), FallacyError> {
    match statement {
        Formula::Believes(agent, inner) if agent.is_robot() => match &**inner {
            Formula::Implies(l, c) => Ok((l, c)),
            _ => Err(FallacyError::ShapeMismatch { expected: "B(R, L -> C)", found: statement.clone() }),
        },
        _ => Err(FallacyError::NotBeliefWrapped(statement.clone())),
    }
}

fn containment(necessary: Formula, flagged: Formula, concluded: Formula) -> Containment {
    let r = AgentId::robot;
    let formula = Formula::and(
        Formula::believes(r(), Formula::nec(necessary)),
        Formula::believes(r(), Formula::implies(Formula::poss_mq(flagged.clone()), Formula::poss_mq(concluded))),
    );
    Containment { formula, false_to_robot: flagged }
}

/// For `B(R, L -> C)` read as affirming the consequent:
/// `B(R, box(C -> L)) & B(R, diaMQ(L -> C) -> diaMQ(C))`.
pub fn contain_ex_consequentia(statement: &Formula) -> Result<Containment, FallacyError> {
    let (l, c) = robot_conditional(statement)?;
    if matches!(l, Formula::Not(_)) || matches!(c, Formula::Not(_)) {
        return Err(FallacyError::ShapeMismatch {
            expected: "B(R, L -> C) with unnegated L and C",
            found: statement.clone(),
        });
    }
    Ok(containment(Formula::implies(c.clone(), l.clone()), Formula::implies(l.clone(), c.clone()), c.clone()))
}

/// For `B(R, ~L -> ~C)` read as denying the antecedent:
/// `B(R, box(K(H,l) -> C)) & B(R, diaMQ(~L -> ~C) -> diaMQ(~C))`, where a
/// belief antecedent `B(H,l)` is strengthened to knowledge `K(H,l)`.
pub fn contain_inverse_error(statement: &Formula) -> Result<Containment, FallacyError> {
    let (nl, nc) = robot_conditional(statement)?;
    let (Formula::Not(l), Formula::Not(c)) = (nl, nc) else {
        return Err(FallacyError::ShapeMismatch { expected: "B(R, ~L -> ~C)", found: statement.clone() });
    };
    let known = match &**l {
        Formula::Believes(agent, inner) => Formula::knows(agent.clone(), (**inner).clone()),
        other => other.clone(),
    };
    Ok(containment(Formula::implies(known, (**c).clone()), Formula::implies(nl.clone(), nc.clone()), nc.clone()))
}

pub(crate) fn phrase(f: &Formula, labels: &Labels) -> String {
    match f {
        Formula::Atom(name) => {
            labels.atoms.get(name).map(|l| l.affirmed.clone()).unwrap_or_else(|| name.replace('_', " "))
        }
        Formula::Not(inner) => match &**inner {
            Formula::Atom(name) => labels
                .atoms
                .get(name)
                .map(|l| l.denied.clone())
                .unwrap_or_else(|| format!("not {}", name.replace('_', " "))),
            other => format!("not {}", phrase(other, labels)),
        },
        other => format_formula(other),
    }
}

/// Three questions: about the inferred proposition, the asserted one, and
/// the link the user drew between them.
pub fn generate_clarifications(pattern: &SyllogismPattern, labels: &Labels) -> Result<[String; 3], FallacyError> {
    let slots = match (&pattern.slots, pattern.kind) {
        (Some(s), k) if k.is_fallacy() => s,
        (_, k) => return Err(FallacyError::UnsupportedKind(k)),
    };
    let asserted = phrase(&slots.asserted, labels);
    let inferred = phrase(&slots.concluded, labels);
    let key = format_formula(&Formula::implies(slots.asserted.clone(), slots.concluded.clone()));
    let link = labels.links.get(&key).cloned().unwrap_or_else(|| format!("{asserted} means {inferred}"));
    Ok(match pattern.kind {
        SyllogismKind::ExConsequentia => [
            format!("So it's {inferred} you think?"),
            format!("You're really {asserted}, aren't you?"),
            format!("Do you believe that your {link}?"),
        ],
        _ => [format!("So you see {asserted}?"), format!("You think {inferred}?"), format!("Do you believe {link}?")],
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct FallacyVerdict {
    pub pattern: SyllogismPattern,
    /// The statement is not entailed by O_R and has a fallacy form.
    pub tableau_confirmed: bool,
    /// A fallacy form was expected but O_R has no conditional to test it against.
    pub insufficient_background: bool,
    pub containment: Option<Containment>,
    pub clarifications: Vec<String>,
    pub proof: ProofResult,
}

impl Serialize for FallacyVerdict {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let mut st = s.serialize_struct("FallacyVerdict", 8)?;
        st.serialize_field("kind", &self.pattern.kind)?;
        st.serialize_field("confirmed", &self.tableau_confirmed)?;
        st.serialize_field("containment_formula", &self.containment.as_ref().map(|c| format_formula(&c.formula)))?;
        st.serialize_field("false_to_robot", &self.containment.as_ref().map(|c| format_formula(&c.false_to_robot)))?;
        st.serialize_field("clarifications", &self.clarifications)?;
        st.serialize_field("proof_trace_ref", &self.proof.source)?;
        st.serialize_field("pattern", &self.pattern)?;
        st.serialize_field("insufficient_background", &self.insufficient_background)?;
        st.end()
    }
}

/// Tests the robot's hypothesis `B(R, L -> C)` against O_R and, when the
/// form is fallacious and the proof fails, builds the containment formula
/// and the clarification questions. Labels come from O_H over O_R.
pub fn detect_fallacy(
    o_r: &Ontology,
    o_h: &Ontology,
    statement: &Formula,
    config: &TableauConfig,
) -> Result<FallacyVerdict, FallacyError> {
    robot_conditional(statement)?;
    let clauses = o_r.tableau_clauses();
    let proof = check_consequence(&clauses, statement, &o_r.id(), config)?;
    let pattern = match_with_background(&[], statement, &clauses);
    let confirmed = !proof.entailed && pattern.kind.is_fallacy();
    let (containment, clarifications) = if confirmed {
        let c = match pattern.kind {
            SyllogismKind::ExConsequentia => contain_ex_consequentia(statement)?,
            _ => contain_inverse_error(statement)?,
        };
        let labels = o_h.overlay(o_r).labels().clone();
        (Some(c), generate_clarifications(&pattern, &labels)?.to_vec())
    } else {
        (None, Vec::new())
    };
    let insufficient_background = pattern.kind == SyllogismKind::None && !proof.entailed;
    Ok(FallacyVerdict {
        pattern,
        tableau_confirmed: confirmed,
        insufficient_background,
        containment,
        clarifications,
        proof,
    })
}
