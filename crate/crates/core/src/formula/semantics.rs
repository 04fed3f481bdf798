use std::collections::{BTreeSet, HashMap};

use thiserror::Error;

use super::{atomize_all, Formula};

/// Largest number of distinct atoms the exhaustive oracle will enumerate.
pub const MAX_ORACLE_ATOMS: usize = 20;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EntailmentError {
    #[error("{count} distinct atoms after atomization; the limit is {limit}")]
    AtomBudgetExceeded { count: usize, limit: usize },
}

/// Classical truth value of a propositional formula. `None` if the formula
/// contains a modal or epistemic operator.
pub fn evaluate(f: &Formula, value: &dyn Fn(&str) -> bool) -> Option<bool> {
    use Formula::*;
    Some(match f {
        Atom(name) => value(name),
        Not(a) => !evaluate(a, value)?,
        And(a, b) => evaluate(a, value)? && evaluate(b, value)?,
        Or(a, b) => evaluate(a, value)? || evaluate(b, value)?,
        Implies(a, b) => !evaluate(a, value)? || evaluate(b, value)?,
        Iff(a, b) => evaluate(a, value)? == evaluate(b, value)?,
        _ => return None,
    })
}

enum Compiled {
    Var(usize),
    Not(Box<Compiled>),
    And(Box<Compiled>, Box<Compiled>),
    Or(Box<Compiled>, Box<Compiled>),
    Implies(Box<Compiled>, Box<Compiled>),
    Iff(Box<Compiled>, Box<Compiled>),
}

impl Compiled {
    fn new(f: &Formula, index: &HashMap<&str, usize>) -> Compiled {
        let c = |g: &Formula| Box::new(Compiled::new(g, index));
        match f {
            Formula::Atom(name) => Compiled::Var(index[name.as_str()]),
            Formula::Not(a) => Compiled::Not(c(a)),
            Formula::And(a, b) => Compiled::And(c(a), c(b)),
            Formula::Or(a, b) => Compiled::Or(c(a), c(b)),
            Formula::Implies(a, b) => Compiled::Implies(c(a), c(b)),
            Formula::Iff(a, b) => Compiled::Iff(c(a), c(b)),
            _ => unreachable!("atomized skeletons are propositional"),
        }
    }

    fn eval(&self, bits: u32) -> bool {
        match self {
            Compiled::Var(i) => bits >> i & 1 == 1,
            Compiled::Not(a) => !a.eval(bits),
            Compiled::And(a, b) => a.eval(bits) && b.eval(bits),
            Compiled::Or(a, b) => a.eval(bits) || b.eval(bits),
            Compiled::Implies(a, b) => !a.eval(bits) || b.eval(bits),
            Compiled::Iff(a, b) => a.eval(bits) == b.eval(bits),
        }
    }
}

/// Decides `premises ⊨ conclusion` by enumerating every valuation of the
/// atomized formulas. Independent of the tableau prover.
pub fn truth_table_entails(premises: &[Formula], conclusion: &Formula) -> Result<bool, EntailmentError> {
    let mut all = premises.to_vec();
    all.push(conclusion.clone());
    let (skeletons, _) = atomize_all(&all);
    let names: BTreeSet<&str> = skeletons.iter().flat_map(Formula::atoms).collect();
    if names.len() > MAX_ORACLE_ATOMS {
        return Err(EntailmentError::AtomBudgetExceeded { count: names.len(), limit: MAX_ORACLE_ATOMS });
    }
    let index: HashMap<&str, usize> = names.iter().enumerate().map(|(i, n)| (*n, i)).collect();
    let compiled: Vec<Compiled> = skeletons.iter().map(|s| Compiled::new(s, &index)).collect();
    let (goal, hyps) = compiled.split_last().expect("conclusion present");
    for bits in 0u32..(1u32 << names.len()) {
        if hyps.iter().all(|h| h.eval(bits)) && !goal.eval(bits) {
            return Ok(false);
        }
    }
    Ok(true)
}

#[cfg(test)]
mod tests {
    use super::super::parse_formula;
    use super::*;

    fn p(s: &str) -> Formula {
        parse_formula(s).unwrap()
    }

    #[test]
    fn modus_ponens() {
        assert!(truth_table_entails(&[p("a -> d"), p("a")], &p("d")).unwrap());
    }

    #[test]
    fn converse_does_not_follow() {
        assert!(!truth_table_entails(&[p("d -> a")], &p("a -> d")).unwrap());
    }

    #[test]
    fn excluded_middle() {
        assert!(truth_table_entails(&[], &p("x | ~x")).unwrap());
    }

    #[test]
    fn epistemic_atoms_are_opaque() {
        assert!(truth_table_entails(&[p("K(H,a)")], &p("K(H,a) | q")).unwrap());
        assert!(!truth_table_entails(&[p("K(H,a)")], &p("B(H,a)")).unwrap());
    }

    #[test]
    fn budget() {
        let big = (0..21).map(|i| format!("a{i}")).collect::<Vec<_>>().join(" | ");
        let err = truth_table_entails(&[], &p(&big)).unwrap_err();
        assert_eq!(err, EntailmentError::AtomBudgetExceeded { count: 21, limit: 20 });
    }

    #[test]
    fn evaluate_rejects_modal() {
        assert_eq!(evaluate(&p("box x"), &|_| true), None);
        assert_eq!(evaluate(&p("x -> y"), &|n| n == "y"), Some(true));
    }
}
