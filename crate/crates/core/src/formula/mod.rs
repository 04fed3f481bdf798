//! Logical formulas with epistemic (`B`, `K`) and modal (`box`, `dia`, `diaMQ`)
//! operators, their text syntax, NNF rewriting and a truth-table oracle.

mod atomize;
mod nnf;
mod parser;
mod semantics;

use std::collections::BTreeSet;
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use atomize::{atomize_all, atomize_modal, restore, AtomBinding, AtomMap, Atomized, Atomizer};
pub use nnf::{is_nnf, to_nnf, NnfError};
pub use parser::{parse_formula, ParseError, Position};
pub use semantics::{evaluate, truth_table_entails, EntailmentError, MAX_ORACLE_ATOMS};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("invalid identifier {0:?}")]
pub struct InvalidIdentifier(pub String);

/// True when `s` matches `[A-Za-z_][A-Za-z0-9_=]*`.
pub fn is_identifier(s: &str) -> bool {
    let mut chars = s.chars();
    match chars.next() {
        Some(c) if c.is_ascii_alphabetic() || c == '_' => {}
        _ => return false,
    }
    chars.all(|c| c.is_ascii_alphanumeric() || c == '_' || c == '=')
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct AgentId(String);

impl AgentId {
    pub fn new(name: impl Into<String>) -> Result<Self, InvalidIdentifier> {
        let name = name.into();
        if is_identifier(&name) {
            Ok(AgentId(name))
        } else {
            Err(InvalidIdentifier(name))
        }
    }

    /// The reasoning agent, `R`.
    pub fn robot() -> Self {
        AgentId("R".into())
    }

    /// The conversation partner, `H`.
    pub fn human() -> Self {
        AgentId("H".into())
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }

    pub fn is_robot(&self) -> bool {
        self.0 == "R"
    }
}

impl TryFrom<String> for AgentId {
    type Error = InvalidIdentifier;
    fn try_from(s: String) -> Result<Self, Self::Error> {
        AgentId::new(s)
    }
}

impl From<AgentId> for String {
    fn from(a: AgentId) -> String {
        a.0
    }
}

impl fmt::Display for AgentId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

/// A formula tree. The serde form is an externally tagged AST, e.g.
/// `{"implies":[{"atom":"a"},{"atom":"d"}]}`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Formula {
    Atom(String),
    Not(Box<Formula>),
    And(Box<Formula>, Box<Formula>),
    Or(Box<Formula>, Box<Formula>),
    Implies(Box<Formula>, Box<Formula>),
    Iff(Box<Formula>, Box<Formula>),
    Nec(Box<Formula>),
    Poss(Box<Formula>),
    #[serde(rename = "poss_mq")]
    PossMq(Box<Formula>),
    Believes(AgentId, Box<Formula>),
    Knows(AgentId, Box<Formula>),
}

impl Formula {
    /// Builds an atom. Panics on a name that is not an identifier; use
    /// [`Formula::try_atom`] for untrusted input.
    pub fn atom(name: impl Into<String>) -> Self {
        let name = name.into();
        assert!(is_identifier(&name), "invalid atom name {name:?}");
        Formula::Atom(name)
    }

    pub fn try_atom(name: impl Into<String>) -> Result<Self, InvalidIdentifier> {
        let name = name.into();
        if is_identifier(&name) {
            Ok(Formula::Atom(name))
        } else {
            Err(InvalidIdentifier(name))
        }
    }

    #[allow(clippy::should_implement_trait)]
    pub fn not(f: Formula) -> Self {
        Formula::Not(Box::new(f))
    }
    pub fn and(a: Formula, b: Formula) -> Self {
        Formula::And(Box::new(a), Box::new(b))
    }
    pub fn or(a: Formula, b: Formula) -> Self {
        Formula::Or(Box::new(a), Box::new(b))
    }
    pub fn implies(a: Formula, b: Formula) -> Self {
        Formula::Implies(Box::new(a), Box::new(b))
    }
    pub fn iff(a: Formula, b: Formula) -> Self {
        Formula::Iff(Box::new(a), Box::new(b))
    }
    pub fn nec(f: Formula) -> Self {
        Formula::Nec(Box::new(f))
    }
    pub fn poss(f: Formula) -> Self {
        Formula::Poss(Box::new(f))
    }
    pub fn poss_mq(f: Formula) -> Self {
        Formula::PossMq(Box::new(f))
    }
    pub fn believes(agent: AgentId, f: Formula) -> Self {
        Formula::Believes(agent, Box::new(f))
    }
    pub fn knows(agent: AgentId, f: Formula) -> Self {
        Formula::Knows(agent, Box::new(f))
    }

    /// Negation that cancels an existing outer `~` instead of stacking.
    pub fn complement(&self) -> Formula {
        match self {
            Formula::Not(inner) => (**inner).clone(),
            other => Formula::not(other.clone()),
        }
    }

    pub fn is_binary(&self) -> bool {
        matches!(self, Formula::And(..) | Formula::Or(..) | Formula::Implies(..) | Formula::Iff(..))
    }

    /// Rooted at B, K, box, dia or diaMQ.
    pub fn is_modal(&self) -> bool {
        matches!(
            self,
            Formula::Nec(_) | Formula::Poss(_) | Formula::PossMq(_) | Formula::Believes(..) | Formula::Knows(..)
        )
    }

    /// An atom, a modal-rooted formula, or the negation of either.
    pub fn is_literal(&self) -> bool {
        match self {
            Formula::Not(inner) => matches!(**inner, Formula::Atom(_)) || inner.is_modal(),
            Formula::Atom(_) => true,
            other => other.is_modal(),
        }
    }

    /// Propositional: no modal or epistemic operator anywhere.
    pub fn is_propositional(&self) -> bool {
        match self {
            Formula::Atom(_) => true,
            Formula::Not(a) => a.is_propositional(),
            Formula::And(a, b) | Formula::Or(a, b) | Formula::Implies(a, b) | Formula::Iff(a, b) => {
                a.is_propositional() && b.is_propositional()
            }
            _ => false,
        }
    }

    pub fn children(&self) -> Vec<&Formula> {
        match self {
            Formula::Atom(_) => vec![],
            Formula::Not(a)
            | Formula::Nec(a)
            | Formula::Poss(a)
            | Formula::PossMq(a)
            | Formula::Believes(_, a)
            | Formula::Knows(_, a) => vec![a],
            Formula::And(a, b) | Formula::Or(a, b) | Formula::Implies(a, b) | Formula::Iff(a, b) => {
                vec![a, b]
            }
        }
    }

    pub fn depth(&self) -> usize {
        1 + self.children().into_iter().map(Formula::depth).max().unwrap_or(0)
    }

    pub fn size(&self) -> usize {
        1 + self.children().into_iter().map(Formula::size).sum::<usize>()
    }

    /// Atom names anywhere in the tree, including under modal operators.
    pub fn atoms(&self) -> BTreeSet<&str> {
        let mut out = BTreeSet::new();
        self.collect_atoms(&mut out);
        out
    }

    fn collect_atoms<'a>(&'a self, out: &mut BTreeSet<&'a str>) {
        if let Formula::Atom(name) = self {
            out.insert(name);
        }
        for c in self.children() {
            c.collect_atoms(out);
        }
    }

    /// Pre-order list of all subformulas, the formula itself first.
    pub fn subformulas(&self) -> Vec<&Formula> {
        let mut out = vec![self];
        let mut i = 0;
        while i < out.len() {
            let kids = out[i].children();
            out.extend(kids);
            i += 1;
        }
        out
    }

    pub fn count_where(&self, pred: &dyn Fn(&Formula) -> bool) -> usize {
        self.subformulas().into_iter().filter(|f| pred(f)).count()
    }
}

impl fmt::Display for Formula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&format_formula(self))
    }
}

impl std::str::FromStr for Formula {
    type Err = ParseError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        parse_formula(s)
    }
}

/// Renders a formula in the text syntax. Binary children of binary nodes are
/// always parenthesized; `box`, `dia` and `diaMQ` always take parentheses.
pub fn format_formula(f: &Formula) -> String {
    let mut out = String::new();
    write_formula(f, &mut out);
    out
}

fn write_formula(f: &Formula, out: &mut String) {
    match f {
        Formula::Atom(name) => out.push_str(name),
        Formula::Not(inner) => {
            out.push('~');
            write_grouped(inner, out);
        }
        Formula::Nec(inner) => write_keyword("box", inner, out),
        Formula::Poss(inner) => write_keyword("dia", inner, out),
        Formula::PossMq(inner) => write_keyword("diaMQ", inner, out),
        Formula::Believes(agent, inner) => write_epistemic('B', agent, inner, out),
        Formula::Knows(agent, inner) => write_epistemic('K', agent, inner, out),
        Formula::And(a, b) => write_binary(a, " & ", b, out),
        Formula::Or(a, b) => write_binary(a, " | ", b, out),
        Formula::Implies(a, b) => write_binary(a, " -> ", b, out),
        Formula::Iff(a, b) => write_binary(a, " <-> ", b, out),
    }
}

fn write_grouped(f: &Formula, out: &mut String) {
    if f.is_binary() {
        out.push('(');
        write_formula(f, out);
        out.push(')');
    } else {
        write_formula(f, out);
    }
}

fn write_keyword(kw: &str, inner: &Formula, out: &mut String) {
    out.push_str(kw);
    out.push('(');
    write_formula(inner, out);
    out.push(')');
}

fn write_epistemic(op: char, agent: &AgentId, inner: &Formula, out: &mut String) {
    out.push(op);
    out.push('(');
    out.push_str(agent.as_str());
    out.push(',');
    if !matches!(inner, Formula::Atom(_)) {
        out.push(' ');
    }
    write_formula(inner, out);
    out.push(')');
}

fn write_binary(a: &Formula, op: &str, b: &Formula, out: &mut String) {
    write_grouped(a, out);
    out.push_str(op);
    write_grouped(b, out);
}

/// Serde adapter that stores a [`Formula`] as its text form.
pub mod dsl {
    use super::{format_formula, parse_formula, Formula};
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(f: &Formula, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&format_formula(f))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Formula, D::Error> {
        let text = String::deserialize(d)?;
        parse_formula(&text).map_err(serde::de::Error::custom)
    }

    /// Same, for `Option<Formula>`.
    pub mod option {
        use super::super::{format_formula, parse_formula, Formula};
        use serde::{Deserialize, Deserializer, Serializer};

        pub fn serialize<S: Serializer>(f: &Option<Formula>, s: S) -> Result<S::Ok, S::Error> {
            match f {
                Some(f) => s.serialize_some(&format_formula(f)),
                None => s.serialize_none(),
            }
        }

        pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Option<Formula>, D::Error> {
            match Option::<String>::deserialize(d)? {
                Some(text) => parse_formula(&text).map(Some).map_err(serde::de::Error::custom),
                None => Ok(None),
            }
        }
    }

    /// Same, for `Vec<Formula>`.
    pub mod list {
        use super::super::{format_formula, parse_formula, Formula};
        use serde::ser::SerializeSeq;
        use serde::{Deserialize, Deserializer, Serializer};

        pub fn serialize<S: Serializer>(fs: &[Formula], s: S) -> Result<S::Ok, S::Error> {
            let mut seq = s.serialize_seq(Some(fs.len()))?;
            for f in fs {
                seq.serialize_element(&format_formula(f))?;
            }
            seq.end()
        }

        pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<Formula>, D::Error> {
            Vec::<String>::deserialize(d)?.iter().map(|t| parse_formula(t).map_err(serde::de::Error::custom)).collect()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(s: &str) -> Formula {
        parse_formula(s).unwrap()
    }

    #[test]
    fn formats_not_and() {
        let f = Formula::not(Formula::and(Formula::atom("x"), Formula::atom("y")));
        assert_eq!(format_formula(&f), "~(x & y)");
    }

    #[test]
    fn formats_poss_mq_of_conditional() {
        let f = Formula::poss_mq(Formula::implies(
            Formula::knows(AgentId::human(), Formula::atom("a")),
            Formula::believes(AgentId::human(), Formula::atom("d")),
        ));
        assert_eq!(format_formula(&f), "diaMQ(K(H,a) -> B(H,d))");
    }

    #[test]
    fn formats_atom() {
        assert_eq!(format_formula(&Formula::atom("p")), "p");
    }

    #[test]
    fn epistemic_spacing() {
        assert_eq!(format_formula(&p("B(R, K(H,a) -> B(H,d))")), "B(R, K(H,a) -> B(H,d))");
        assert_eq!(format_formula(&p("B(H,~cm)")), "B(H, ~cm)");
    }

    #[test]
    fn size_and_depth() {
        let f = p("~(x & y)");
        assert_eq!(f.size(), 4);
        assert_eq!(f.depth(), 3);
        assert_eq!(f.atoms().into_iter().collect::<Vec<_>>(), vec!["x", "y"]);
    }

    #[test]
    fn literal_classification() {
        assert!(p("x").is_literal());
        assert!(p("~x").is_literal());
        assert!(p("~B(H,d)").is_literal());
        assert!(p("box(x & y)").is_literal());
        assert!(!p("~~x").is_literal());
        assert!(!p("x | y").is_literal());
    }

    #[test]
    fn ast_json_shape() {
        let f = p("a -> d");
        let v = serde_json::to_value(&f).unwrap();
        assert_eq!(v, serde_json::json!({"implies": [{"atom": "a"}, {"atom": "d"}]}));
        let back: Formula = serde_json::from_value(v).unwrap();
        assert_eq!(back, f);
        let b = serde_json::to_value(p("B(R,x)")).unwrap();
        assert_eq!(b, serde_json::json!({"believes": ["R", {"atom": "x"}]}));
    }

    #[test]
    fn agent_validation() {
        assert!(AgentId::new("").is_err());
        assert!(AgentId::new("9x").is_err());
        assert!(AgentId::new("H").is_ok());
        assert!(serde_json::from_str::<AgentId>("\"\"").is_err());
    }

    #[test]
    fn complement_cancels() {
        assert_eq!(p("~x").complement(), p("x"));
        assert_eq!(p("x").complement(), p("~x"));
    }
}
