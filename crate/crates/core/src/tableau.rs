//! Refutation tableau over atomized formulas.
//!
//! `premises ⊨ conclusion` is decided by expanding `premises ∪ {~conclusion}`
//! until every branch is closed (entailed) or some branch saturates open.

use std::collections::BTreeSet;
use std::fmt;

use serde::ser::SerializeStruct;
use serde::{Deserialize, Serialize, Serializer};
use thiserror::Error;

use crate::formula::{atomize_all, format_formula, to_nnf, AtomMap, Formula, NnfError};

/// Expansion rules. `R1`..`R4` split the branch, `R5`..`R8` do not.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Rule {
    /// `X | Y`
    R1,
    /// `~(X & Y)`
    R2,
    /// `X -> Y`
    R3,
    /// `X <-> Y`, and `~(X <-> Y)` read as `X <-> ~Y`
    R4,
    /// `X & Y`
    R5,
    /// `~(X | Y)`
    R6,
    /// `~(X -> Y)`
    R7,
    /// `~~X`
    R8,
}

impl Rule {
    pub fn is_splitting(self) -> bool {
        matches!(self, Rule::R1 | Rule::R2 | Rule::R3 | Rule::R4)
    }

    pub fn id(self) -> &'static str {
        match self {
            Rule::R1 => "r1",
            Rule::R2 => "r2",
            Rule::R3 => "r3",
            Rule::R4 => "r4",
            Rule::R5 => "r5",
            Rule::R6 => "r6",
            Rule::R7 => "r7",
            Rule::R8 => "r8",
        }
    }
}

impl fmt::Display for Rule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.id())
    }
}

enum Decomposition {
    Linear(Vec<Formula>),
    Split(Vec<Formula>, Vec<Formula>),
}

/// Which rule applies to `f`, and what it produces. `None` for literals.
fn decompose(f: &Formula) -> Option<(Rule, Decomposition)> {
    use Decomposition::*;
    use Formula::*;
    let neg = |g: &Formula| Formula::not(g.clone());
    Some(match f {
        Or(x, y) => (Rule::R1, Split(vec![(**x).clone()], vec![(**y).clone()])),
        Implies(x, y) => (Rule::R3, Split(vec![neg(x)], vec![(**y).clone()])),
        Iff(x, y) => (Rule::R4, Split(vec![(**x).clone(), (**y).clone()], vec![neg(x), neg(y)])),
        And(x, y) => (Rule::R5, Linear(vec![(**x).clone(), (**y).clone()])),
        Not(inner) => match &**inner {
            And(x, y) => (Rule::R2, Split(vec![neg(x)], vec![neg(y)])),
            Iff(x, y) => (Rule::R4, Split(vec![(**x).clone(), neg(y)], vec![neg(x), (**y).clone()])),
            Or(x, y) => (Rule::R6, Linear(vec![neg(x), neg(y)])),
            Implies(x, y) => (Rule::R7, Linear(vec![(**x).clone(), neg(y)])),
            Not(x) => (Rule::R8, Linear(vec![(**x).clone()])),
            _ => return None,
        },
        _ => return None,
    })
}

/// A signed atom. After atomization every modal subformula is one of these.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Literal {
    pub atom: Formula,
    pub positive: bool,
}

impl Literal {
    /// `None` when `f` is not a literal.
    pub fn of(f: &Formula) -> Option<Literal> {
        if !f.is_literal() {
            return None;
        }
        Some(match f {
            Formula::Not(inner) => Literal { atom: (**inner).clone(), positive: false },
            other => Literal { atom: other.clone(), positive: true },
        })
    }

    pub fn complement(&self) -> Literal {
        Literal { atom: self.atom.clone(), positive: !self.positive }
    }

    pub fn to_formula(&self) -> Formula {
        if self.positive {
            self.atom.clone()
        } else {
            Formula::not(self.atom.clone())
        }
    }
}

impl fmt::Display for Literal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&format_formula(&self.to_formula()))
    }
}

impl Serialize for Literal {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

/// One rule application on one resulting branch.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct TraceStep {
    pub rule: Rule,
    #[serde(with = "crate::formula::dsl")]
    pub input: Formula,
    #[serde(with = "crate::formula::dsl::list")]
    pub outputs: Vec<Formula>,
    pub branch_id: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub closed_by: Option<Literal>,
}

/// A tableau branch. Ids are paths: the root is `1`, its two children after
/// a split are `1.1` and `1.2`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Branch {
    id: String,
    formulas: Vec<Formula>,
    expanded: Vec<bool>,
    literals: BTreeSet<Literal>,
    closed_by: Option<Literal>,
    trace: Vec<TraceStep>,
}

impl Branch {
    pub fn new(formulas: impl IntoIterator<Item = Formula>) -> Self {
        let mut b = Branch {
            id: "1".into(),
            formulas: Vec::new(),
            expanded: Vec::new(),
            literals: BTreeSet::new(),
            closed_by: None,
            trace: Vec::new(),
        };
        for f in formulas {
            b.add(f);
        }
        b
    }

    pub fn id(&self) -> &str {
        &self.id
    }

    /// Every formula introduced on this branch, in order.
    pub fn formulas(&self) -> &[Formula] {
        &self.formulas
    }

    pub fn literals(&self) -> &BTreeSet<Literal> {
        &self.literals
    }

    pub fn is_closed(&self) -> bool {
        self.closed_by.is_some()
    }

    /// The literal whose arrival closed the branch.
    pub fn closed_by(&self) -> Option<&Literal> {
        self.closed_by.as_ref()
    }

    pub fn trace(&self) -> &[TraceStep] {
        &self.trace
    }

    /// Open and nothing left to expand.
    pub fn is_saturated(&self) -> bool {
        !self.is_closed() && self.next_formula().is_none()
    }

    fn add(&mut self, f: Formula) {
        if self.formulas.contains(&f) {
            return;
        }
        if let Some(lit) = Literal::of(&f) {
            if self.closed_by.is_none() && self.literals.contains(&lit.complement()) {
                self.closed_by = Some(lit.clone());
            }
            self.literals.insert(lit);
            self.expanded.push(true);
        } else {
            self.expanded.push(false);
        }
        self.formulas.push(f);
    }

    // First unexpanded non-splitting formula, else first unexpanded splitting one.
    fn next_formula(&self) -> Option<usize> {
        let mut first_split = None;
        for (i, f) in self.formulas.iter().enumerate() {
            if self.expanded[i] {
                continue;
            }
            match decompose(f) {
                Some((rule, _)) if !rule.is_splitting() => return Some(i),
                Some(_) if first_split.is_none() => first_split = Some(i),
                _ => {}
            }
        }
        first_split
    }

    fn child(&self, suffix: Option<&str>, idx: usize, rule: Rule, outputs: Vec<Formula>) -> Branch {
        let mut b = self.clone();
        if let Some(s) = suffix {
            b.id = format!("{}.{}", self.id, s);
        }
        b.expanded[idx] = true;
        for f in outputs.iter().cloned() {
            b.add(f);
        }
        b.trace.push(TraceStep {
            rule,
            input: self.formulas[idx].clone(),
            outputs,
            branch_id: b.id.clone(),
            closed_by: b.closed_by.clone(),
        });
        b
    }
}

impl Serialize for Branch {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let formulas: Vec<String> = self.formulas.iter().map(format_formula).collect();
        let mut st = s.serialize_struct("Branch", 6)?;
        st.serialize_field("id", &self.id)?;
        st.serialize_field("formulas", &formulas)?;
        st.serialize_field("literals", &self.literals)?;
        st.serialize_field("closed", &self.is_closed())?;
        st.serialize_field("closed_by", &self.closed_by)?;
        st.serialize_field("trace", &self.trace)?;
        st.end()
    }
}

/// Applies one rule to the branch's next formula. A closed or saturated
/// branch is returned unchanged as the only element.
pub fn expand(branch: &Branch) -> Vec<Branch> {
    if branch.is_closed() {
        return vec![branch.clone()];
    }
    let Some(idx) = branch.next_formula() else {
        return vec![branch.clone()];
    };
    let (rule, parts) = decompose(&branch.formulas[idx]).expect("next_formula only picks decomposable formulas");
    match parts {
        Decomposition::Linear(out) => vec![branch.child(None, idx, rule, out)],
        Decomposition::Split(left, right) => {
            vec![branch.child(Some("1"), idx, rule, left), branch.child(Some("2"), idx, rule, right)]
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct TableauConfig {
    pub max_expansions: usize,
}

impl Default for TableauConfig {
    fn default() -> Self {
        TableauConfig { max_expansions: 100_000 }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TableauError {
    #[error("expansion budget of {limit} steps exhausted")]
    BudgetExceeded { limit: usize },
    #[error(transparent)]
    Nnf(#[from] NnfError),
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ProofResult {
    pub entailed: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub source: Option<String>,
    pub atoms: AtomMap,
    pub expansions: usize,
    pub closed_branches: usize,
    pub open_branches: Vec<Branch>,
    pub trace: Vec<TraceStep>,
}

impl ProofResult {
    /// Literal sets of the open branches with stand-in atoms written out,
    /// e.g. `{"B(R)", "K(H,a)", "~B(H,d)"}`.
    pub fn open_literals_displayed(&self) -> Vec<BTreeSet<String>> {
        self.open_branches.iter().map(|b| b.literals.iter().map(|l| self.display_literal(l)).collect()).collect()
    }

    pub fn display_literal(&self, l: &Literal) -> String {
        let body = match &l.atom {
            Formula::Atom(name) => self.atoms.display(name),
            other => format_formula(other),
        };
        if l.positive {
            body
        } else {
            format!("~{body}")
        }
    }
}

/// Decides `premises ⊨ conclusion`. Modal and epistemic subformulas are
/// atomized first, so they only ever appear as literals.
pub fn prove_entailment(
    premises: &[Formula],
    conclusion: &Formula,
    config: &TableauConfig,
) -> Result<ProofResult, TableauError> {
    let mut all = premises.to_vec();
    all.push(conclusion.clone());
    let (skeletons, atoms) = atomize_all(&all);
    let (goal, hyps) = skeletons.split_last().expect("conclusion present");
    let mut roots = Vec::with_capacity(skeletons.len());
    for h in hyps {
        roots.push(to_nnf(h)?);
    }
    roots.push(to_nnf(&Formula::not(goal.clone()))?);

    let mut stack = vec![Branch::new(roots)];
    let mut open = Vec::new();
    let mut trace = Vec::new();
    let mut closed = 0usize;
    let mut expansions = 0usize;
    while let Some(b) = stack.pop() {
        if b.is_closed() {
            closed += 1;
            continue;
        }
        if b.next_formula().is_none() {
            open.push(b);
            continue;
        }
        expansions += 1;
        if expansions > config.max_expansions {
            return Err(TableauError::BudgetExceeded { limit: config.max_expansions });
        }
        let children = expand(&b);
        for c in &children {
            trace.push(c.trace.last().expect("expanded child has a step").clone());
        }
        stack.extend(children.into_iter().rev());
    }
    Ok(ProofResult {
        entailed: open.is_empty(),
        source: None,
        atoms,
        expansions,
        closed_branches: closed,
        open_branches: open,
        trace,
    })
}

/// `prove_entailment` against an ontology's exported clauses, tagging the
/// result with the ontology's id.
pub fn check_consequence(
    clauses: &[Formula],
    hypothesis: &Formula,
    source: &str,
    config: &TableauConfig,
) -> Result<ProofResult, TableauError> {
    let mut r = prove_entailment(clauses, hypothesis, config)?;
    r.source = Some(source.to_string());
    Ok(r)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::formula::parse_formula;

    fn p(s: &str) -> Formula {
        parse_formula(s).unwrap()
    }

    fn expand_one(s: &str) -> (Rule, Vec<Vec<String>>) {
        let b = Branch::new([p(s)]);
        let out = expand(&b);
        let rule = out[0].trace()[0].rule;
        let sides = out.iter().map(|c| c.trace()[0].outputs.iter().map(format_formula).collect()).collect();
        (rule, sides)
    }

    #[test]
    fn every_rule_expands_as_tabulated() {
        let cases: [(&str, Rule, Vec<Vec<&str>>); 9] = [
            ("x | y", Rule::R1, vec![vec!["x"], vec!["y"]]),
            ("~(x & y)", Rule::R2, vec![vec!["~x"], vec!["~y"]]),
            ("x -> y", Rule::R3, vec![vec!["~x"], vec!["y"]]),
            ("x <-> y", Rule::R4, vec![vec!["x", "y"], vec!["~x", "~y"]]),
            ("~(x <-> y)", Rule::R4, vec![vec!["x", "~y"], vec!["~x", "y"]]),
            ("x & y", Rule::R5, vec![vec!["x", "y"]]),
            ("~(x | y)", Rule::R6, vec![vec!["~x", "~y"]]),
            ("~(x -> y)", Rule::R7, vec![vec!["x", "~y"]]),
            ("~~x", Rule::R8, vec![vec!["x"]]),
        ];
        for (input, rule, sides) in cases {
            let (got_rule, got_sides) = expand_one(input);
            assert_eq!(got_rule, rule, "{input}");
            assert_eq!(got_sides, sides, "{input}");
            assert_eq!(got_sides.len(), if rule.is_splitting() { 2 } else { 1 });
        }
    }

    #[test]
    fn contradiction_closes_before_expansion() {
        let b = Branch::new([p("x"), p("~x"), p("y | z")]);
        assert!(b.is_closed());
        assert_eq!(expand(&b), vec![b.clone()]);
    }

    #[test]
    fn literal_only_branch_is_fixpoint() {
        let b = Branch::new([p("x"), p("~y")]);
        assert!(b.is_saturated());
        assert_eq!(expand(&b), vec![b]);
    }

    #[test]
    fn non_splitting_preferred() {
        let b = Branch::new([p("a | b"), p("c & d")]);
        let out = expand(&b);
        assert_eq!(out.len(), 1);
        assert_eq!(out[0].trace()[0].rule, Rule::R5);
    }

    #[test]
    fn branch_ids_are_paths() {
        let b = Branch::new([p("a | b")]);
        let out = expand(&b);
        assert_eq!(out[0].id(), "1.1");
        assert_eq!(out[1].id(), "1.2");
    }

    #[test]
    fn modus_ponens_entailed() {
        let r = prove_entailment(&[p("a -> d"), p("a")], &p("d"), &TableauConfig::default()).unwrap();
        assert!(r.entailed);
        assert!(r.open_branches.is_empty());
    }

    #[test]
    fn identity_consequence() {
        let r = check_consequence(&[p("x")], &p("x"), "O_R", &TableauConfig::default()).unwrap();
        assert!(r.entailed);
        assert_eq!(r.source.as_deref(), Some("O_R"));
    }

    #[test]
    fn budget_is_enforced() {
        let big = (0..12).map(|i| format!("(a{i} | b{i})")).collect::<Vec<_>>().join(" & ");
        let err = prove_entailment(&[p(&big)], &p("q"), &TableauConfig { max_expansions: 50 }).unwrap_err();
        assert_eq!(err, TableauError::BudgetExceeded { limit: 50 });
    }

    #[test]
    fn trace_serializes() {
        let r = prove_entailment(&[p("a | b")], &p("a"), &TableauConfig::default()).unwrap();
        let v = serde_json::to_value(&r.trace[1]).unwrap();
        assert_eq!(v["rule"], "r1");
        assert_eq!(v["branch_id"], "1.2");
        assert!(v.get("closed_by").is_none());
        let closing = r.trace.iter().find(|s| s.closed_by.is_some()).unwrap();
        assert_eq!(serde_json::to_value(closing).unwrap()["closed_by"], "a");
    }
}
