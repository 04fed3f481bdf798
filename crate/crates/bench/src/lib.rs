//! Workloads shared by the benches.

use trope_sense::sigdet::generator::{Generator, GeneratorConfig};
use trope_sense::{fixtures, parse_formula, Formula, ProtocolState, TropeConfig, Utterance};

/// `x0 -> x1, ..., x(n-1) -> xn, x0` entails `xn`.
pub fn implication_chain(n: usize) -> (Vec<Formula>, Formula) {
    let mut premises: Vec<Formula> = (0..n).map(|i| parse_formula(&format!("x{i} -> x{}", i + 1)).unwrap()).collect();
    premises.push(Formula::atom("x0"));
    (premises, Formula::atom(format!("x{n}")))
}

/// A non-entailment whose tableau has to saturate `2^n`-ish branches:
/// `(x0 | y0) & ... & (x(n-1) | y(n-1))` does not give `x0 & ... & x(n-1)`.
pub fn disjunction_grid(n: usize) -> (Vec<Formula>, Formula) {
    let premises = (0..n).map(|i| parse_formula(&format!("x{i} | y{i}")).unwrap()).collect();
    let goal = (1..n).fold(Formula::atom("x0"), |acc, i| Formula::and(acc, Formula::atom(format!("x{i}"))));
    (premises, goal)
}

/// The robot's fixture belief pair with an epistemic wrapper on every atom.
pub fn epistemic_pair() -> (Vec<Formula>, Formula) {
    (vec![parse_formula("B(R, B(H,d) -> K(H,a))").unwrap()], parse_formula("B(R, K(H,a) -> B(H,d))").unwrap())
}

pub fn fixture_state() -> ProtocolState {
    ProtocolState::new(fixtures::ontology_basic(), fixtures::ontology_user())
}

pub fn fixture_generator() -> Generator {
    Generator::new(
        &fixtures::ontology_basic(),
        &fixtures::ontology_user(),
        &TropeConfig::default(),
        GeneratorConfig::default(),
    )
    .expect("fixture ontologies are large enough")
}

/// One utterance of each protocol route.
pub fn sample_utterances() -> Vec<Utterance> {
    vec![
        Utterance::reasoning("I feel anxious, so there must be danger", ["a", "d"]),
        Utterance::reasoning("No cues, so no robot", ["~cm", "~A=R"]),
        Utterance::reasoning("If unsafe then anxious; unsafe; so anxious", ["d -> a", "d", "a"]),
        Utterance::assertion("Robots are human too", "Robots", "human"),
        Utterance::assertion("A dog is an animal", "dog", "an animal"),
        Utterance::assertion("Zorb is a blip", "zorb", "blip"),
    ]
}
