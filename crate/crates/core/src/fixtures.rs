//! The shipped example ontologies and utterances.

use crate::ontology::{load_ontology, Ontology};
use crate::protocol::{parse_utterances, Utterance};

pub const ONTOLOGY_BASIC: &str = include_str!("../../../corpus/ontology_basic.json");
pub const ONTOLOGY_USER: &str = include_str!("../../../corpus/ontology_user.json");
pub const ONTOLOGY_CHILD: &str = include_str!("../../../corpus/ontology_child.json");
pub const ONTOLOGY_ORGANISMS: &str = include_str!("../../../corpus/ontology_organisms.json");
pub const UTTERANCES: &str = include_str!("../../../corpus/utterances.jsonl");

/// The robot's ontology: people, robots, celestial bodies, fairy tales and
/// the danger/anxiety and machine-cue conditionals.
pub fn ontology_basic() -> Ontology {
    load_ontology(ONTOLOGY_BASIC).expect("shipped fixture is valid")
}

/// An adult user who knows about animals.
pub fn ontology_user() -> Ontology {
    load_ontology(ONTOLOGY_USER).expect("shipped fixture is valid")
}

/// A child user who says they are a mermaid.
pub fn ontology_child() -> Ontology {
    load_ontology(ONTOLOGY_CHILD).expect("shipped fixture is valid")
}

pub fn ontology_organisms() -> Ontology {
    load_ontology(ONTOLOGY_ORGANISMS).expect("shipped fixture is valid")
}

pub fn utterances() -> Vec<Utterance> {
    parse_utterances(UTTERANCES).expect("shipped fixture is valid")
}
