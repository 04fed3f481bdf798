#![allow(dead_code)]

use std::collections::BTreeSet;

use proptest::prelude::*;
use rand_pcg::rand_core::{Rng, SeedableRng};
use rand_pcg::Pcg32;
use trope_sense::formula::{AgentId, Formula};

pub const ATOMS: [&str; 6] = ["p", "q", "r", "s", "t", "u"];

/// Truth value under `v`, where bit `i` of `v` is the value of `atoms[i]`.
/// Believes/Knows/modal nodes are looked up by their printed form.
pub fn eval(f: &Formula, atoms: &[String], v: u64) -> bool {
    use Formula::*;
    let lookup = |name: &str| {
        let i = atoms.iter().position(|a| a == name).expect("atom listed");
        v >> i & 1 == 1
    };
    match f {
        Atom(a) => lookup(a),
        Not(a) => !eval(a, atoms, v),
        And(a, b) => eval(a, atoms, v) && eval(b, atoms, v),
        Or(a, b) => eval(a, atoms, v) || eval(b, atoms, v),
        Implies(a, b) => !eval(a, atoms, v) || eval(b, atoms, v),
        Iff(a, b) => eval(a, atoms, v) == eval(b, atoms, v),
        other => lookup(&trope_sense::format_formula(other)),
    }
}

/// Propositional letters and opaque modal/epistemic nodes, by name.
pub fn letters(fs: &[&Formula]) -> Vec<String> {
    fn walk(f: &Formula, out: &mut BTreeSet<String>) {
        use Formula::*;
        match f {
            Atom(a) => {
                out.insert(a.clone());
            }
            Not(a) => walk(a, out),
            And(a, b) | Or(a, b) | Implies(a, b) | Iff(a, b) => {
                walk(a, out);
                walk(b, out);
            }
            other => {
                out.insert(trope_sense::format_formula(other));
            }
        }
    }
    let mut out = BTreeSet::new();
    for f in fs {
        walk(f, &mut out);
    }
    out.into_iter().collect()
}

/// Brute-force entailment over every valuation.
pub fn oracle_entails(premises: &[Formula], conclusion: &Formula) -> bool {
    let mut all: Vec<&Formula> = premises.iter().collect();
    all.push(conclusion);
    let atoms = letters(&all);
    assert!(atoms.len() <= 20);
    (0..1u64 << atoms.len())
        .filter(|&v| premises.iter().all(|p| eval(p, &atoms, v)))
        .all(|v| eval(conclusion, &atoms, v))
}

pub fn equivalent(a: &Formula, b: &Formula) -> bool {
    let atoms = letters(&[a, b]);
    (0..1u64 << atoms.len()).all(|v| eval(a, &atoms, v) == eval(b, &atoms, v))
}

fn pick(rng: &mut Pcg32, n: usize) -> usize {
    (rng.next_u64() % n as u64) as usize
}

/// Random propositional formula over the first `n_atoms` letters.
pub fn random_formula(rng: &mut Pcg32, n_atoms: usize, depth: u32) -> Formula {
    if depth == 0 || pick(rng, 4) == 0 {
        return Formula::atom(ATOMS[pick(rng, n_atoms)]);
    }
    let sub = |rng: &mut Pcg32| random_formula(rng, n_atoms, depth - 1);
    match pick(rng, 5) {
        0 => Formula::not(sub(rng)),
        1 => Formula::and(sub(rng), sub(rng)),
        2 => Formula::or(sub(rng), sub(rng)),
        3 => Formula::implies(sub(rng), sub(rng)),
        _ => Formula::iff(sub(rng), sub(rng)),
    }
}

/// An entailment instance: up to 4 premises and a conclusion over at most
/// 6 letters.
pub fn random_instance(seed: u64) -> (Vec<Formula>, Formula) {
    let mut rng = Pcg32::seed_from_u64(seed);
    let n_atoms = 1 + pick(&mut rng, 6);
    let n_premises = pick(&mut rng, 5);
    let premises = (0..n_premises).map(|_| random_formula(&mut rng, n_atoms, 3)).collect();
    (premises, random_formula(&mut rng, n_atoms, 3))
}

pub fn arb_atom() -> impl Strategy<Value = Formula> {
    prop::sample::select(ATOMS.to_vec()).prop_map(Formula::atom)
}

/// Propositional formulas with occasional `B(H, ·)`/`K(H, ·)` leaves.
pub fn arb_formula() -> impl Strategy<Value = Formula> {
    let leaf = prop_oneof![
        4 => arb_atom(),
        1 => arb_atom().prop_map(|a| Formula::believes(AgentId::human(), a)),
        1 => arb_atom().prop_map(|a| Formula::knows(AgentId::human(), a)),
    ];
    leaf.prop_recursive(4, 32, 2, |inner| {
        prop_oneof![
            inner.clone().prop_map(Formula::not),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| Formula::and(a, b)),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| Formula::or(a, b)),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| Formula::implies(a, b)),
            (inner.clone(), inner).prop_map(|(a, b)| Formula::iff(a, b)),
        ]
    })
}

/// Any formula the parser accepts, modal operators included.
pub fn arb_any_formula() -> impl Strategy<Value = Formula> {
    arb_atom().prop_recursive(4, 32, 2, |inner| {
        prop_oneof![
            inner.clone().prop_map(Formula::not),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| Formula::and(a, b)),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| Formula::or(a, b)),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| Formula::implies(a, b)),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| Formula::iff(a, b)),
            inner.clone().prop_map(Formula::nec),
            inner.clone().prop_map(Formula::poss),
            inner.clone().prop_map(Formula::poss_mq),
            inner.clone().prop_map(|a| Formula::believes(AgentId::robot(), a)),
            inner.prop_map(|a| Formula::knows(AgentId::human(), a)),
        ]
    })
}
