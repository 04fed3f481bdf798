//! Sense-making of fallacies and rhetorical tropes for a dialogue robot.
//!
//! A user's utterance is appraised against the robot's ontology `O_R` and
//! its model of the user `O_H`. Conditional reasoning goes through a
//! refutation tableau; a failed proof with a fallacious form is contained
//! rather than rejected. Category mismatches go through the metaphor
//! conditions and are registered as-if.

pub mod epivir;
pub mod fallacy;
pub mod fixtures;
pub mod formula;
pub mod ontology;
pub mod protocol;
pub mod sigdet;
pub mod tableau;
pub mod trope;

pub use epivir::{appraise, EpiVirConfig, EpiVirEntry, EpiVirStore, Realism, TruthStatus, World};
pub use fallacy::{detect_fallacy, match_syllogism_pattern, FallacyVerdict, SyllogismKind, SyllogismPattern};
pub use formula::{format_formula, parse_formula, to_nnf, truth_table_entails, AgentId, Formula, ParseError};
pub use ontology::{load_ontology, Ontology, OntologyError};
pub use protocol::{
    answer_clarification, run_protocol, AnalysisReport, Answer, ProtocolOptions, ProtocolState, ReportKind, Utterance,
    Verbosity,
};
pub use sigdet::{d_prime, error_rates, DetectionFault, Mood, Strategy};
pub use tableau::{check_consequence, prove_entailment, ProofResult, TableauConfig, TableauError};
pub use trope::{attribution_label, detect_trope, Attribution, CreativeResult, Orientation, TropeConfig};
