//! The fail-safe dialogue protocol, steps I to VII:
//!
//! * I: appraise the utterance against both ontologies
//! * II: look for formula deviance or a category mismatch
//! * III: suspend disbelief (MQ) and start the turn timer
//! * IV: reasoning route, tableau and fallacy containment
//! * V: creative route, trope acceptance and as-if registration
//! * VI: respond "I understand", close the timer
//! * VII: ask for clarification, the timer stays open

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::epivir::{appraise, AsIfRole, EpiVirConfig, EpiVirEntry, EpiVirStore, Provenance, Realism};
use crate::fallacy::{
    detect_fallacy, hypothesis_for, match_syllogism_pattern, match_with_background, phrase, FallacyVerdict,
    SyllogismKind,
};
use crate::formula::{format_formula, parse_formula, Formula};
use crate::ontology::{EntryRef, MismatchVerdict, Ontology, OntologyError};
use crate::trope::{
    attribution_label, detect_trope, install_field, register_as_if, slug, Attribution, ConventionStore, CreativeResult,
    Orientation, TropeConfig, TropeDetection,
};

pub mod render;
pub mod utterance;

pub use render::{impolite_token, is_polite, render_response};
pub use utterance::{parse_utterance, parse_utterances, Mode, Utterance, UtteranceError, Verbosity};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Step {
    I,
    II,
    III,
    IV,
    V,
    VI,
    VII,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct StepRecord {
    pub step: Step,
    pub outcome: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
pub struct Timer {
    pub open: bool,
    pub remaining_turns: u32,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ReportKind {
    Valid,
    ExConsequentia,
    InverseError,
    FpMetaphor,
    FnMetaphor,
    Unintelligible,
}

impl ReportKind {
    pub fn as_str(self) -> &'static str {
        match self {
            ReportKind::Valid => "valid",
            ReportKind::ExConsequentia => "ex_consequentia",
            ReportKind::InverseError => "inverse_error",
            ReportKind::FpMetaphor => "fp_metaphor",
            ReportKind::FnMetaphor => "fn_metaphor",
            ReportKind::Unintelligible => "unintelligible",
        }
    }
}

/// Questions awaiting the user's answers, with what confirming them adds.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PendingClarifications {
    pub kind: SyllogismKind,
    pub questions: Vec<String>,
    #[serde(with = "crate::formula::dsl")]
    pub asserted: Formula,
    #[serde(with = "crate::formula::dsl")]
    pub concluded: Formula,
    pub raw_entry: u64,
    pub containment_entry: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ProtocolState {
    pub o_r: Ontology,
    pub o_h: Ontology,
    pub epivir_store: EpiVirStore,
    pub timer: Timer,
    pub step_trace: Vec<StepRecord>,
    pub pending_clarifications: Option<PendingClarifications>,
    pub conventions: ConventionStore,
    pub turn: u64,
}

impl ProtocolState {
    pub fn new(o_r: Ontology, o_h: Ontology) -> Self {
        ProtocolState {
            o_r,
            o_h,
            epivir_store: EpiVirStore::default(),
            timer: Timer::default(),
            step_trace: Vec::new(),
            pending_clarifications: None,
            conventions: ConventionStore::new(TropeConfig::default().convention_threshold),
            turn: 0,
        }
    }

    pub fn with_conventions(mut self, threshold: usize) -> Self {
        self.conventions = ConventionStore::new(threshold);
        self
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ProtocolOptions {
    /// Turns the disbelief-suspension timer stays open.
    pub duration: u32,
    /// Overrides the utterance's own verbosity.
    pub verbosity: Option<Verbosity>,
    pub epivir: EpiVirConfig,
    pub trope: TropeConfig,
    /// Probability given to beliefs the user confirms.
    pub confirmed_p: f64,
}

impl Default for ProtocolOptions {
    fn default() -> Self {
        ProtocolOptions {
            duration: 5,
            verbosity: None,
            epivir: EpiVirConfig::default(),
            trope: TropeConfig::default(),
            confirmed_p: 0.9,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ProtocolError {
    #[error("timer duration must be at least one turn")]
    ZeroDuration,
    #[error("there are no pending clarification questions")]
    NoPending,
    #[error(transparent)]
    Ontology(#[from] OntologyError),
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AnalysisReport {
    pub utterance: Utterance,
    pub kind: ReportKind,
    pub attribution: Attribution,
    pub containment: Option<String>,
    pub trope: Option<CreativeResult>,
    pub clarifications: Vec<String>,
    pub response: String,
    pub verbosity_disclosure: Option<String>,
    pub step_trace: Vec<StepRecord>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub fallacy: Option<FallacyVerdict>,
    pub timer: Timer,
}

impl AnalysisReport {
    pub fn final_step(&self) -> Option<Step> {
        self.step_trace.iter().rev().map(|s| s.step).find(|s| matches!(s, Step::VI | Step::VII))
    }
}

pub fn suspend_disbelief(state: &ProtocolState, duration_turns: u32) -> Result<ProtocolState, ProtocolError> {
    if duration_turns == 0 {
        return Err(ProtocolError::ZeroDuration);
    }
    let mut s = state.clone();
    s.timer = Timer { open: true, remaining_turns: duration_turns };
    Ok(s)
}

/// The propositions an utterance puts forward: its formulas, or the
/// membership claim of an assertion. Unparseable parts are skipped.
pub fn utterance_propositions(u: &Utterance) -> Vec<Formula> {
    match u.mode {
        Mode::Reasoning => u.formulas.iter().filter_map(|f| parse_formula(f).ok()).collect(),
        Mode::Assertion => match (&u.subject, &u.predicate) {
            (Some(s), Some(p)) => Formula::try_atom(format!("in_{}_{}", slug(s), slug(p))).into_iter().collect(),
            _ => Vec::new(),
        },
    }
}

/// Records the utterance's propositions as told within a fiction the caller
/// has declared: possible, fictional, realistic on its own terms.
pub fn assume_fiction(state: &ProtocolState, u: &Utterance, config: &EpiVirConfig) -> ProtocolState {
    let mut s = state.clone();
    for f in utterance_propositions(u) {
        let entry = EpiVirEntry::new(f, 0.5, Realism::Realistic, Provenance::AssumedFiction, config)
            .expect("0.5 is a valid probability");
        s.epivir_store.insert(entry);
    }
    s
}

pub fn close_timer(state: &ProtocolState) -> ProtocolState {
    if !state.timer.open {
        log::debug!("close_timer: timer already closed");
    }
    let mut s = state.clone();
    s.timer = Timer::default();
    s
}

/// Where the turn ended and why.
enum Outcome {
    Understood { kind: ReportKind },
    Unclear { question: Option<String> },
}

struct Turn<'a> {
    state: ProtocolState,
    options: &'a ProtocolOptions,
    trace: Vec<StepRecord>,
    clarifications: Vec<String>,
    containment: Option<String>,
    trope: Option<CreativeResult>,
    fallacy: Option<FallacyVerdict>,
    attribution: Attribution,
}

impl Turn<'_> {
    fn record(&mut self, step: Step, outcome: impl Into<String>) {
        self.trace.push(StepRecord { step, outcome: outcome.into() });
    }

    fn open_timer(&mut self) {
        if self.state.timer.open {
            self.record(
                Step::III,
                format!("MQ applied, timer inherited ({} turns left)", self.state.timer.remaining_turns),
            );
        } else {
            self.state.timer = Timer { open: true, remaining_turns: self.options.duration.max(1) };
            self.record(Step::III, format!("MQ applied, timer opened ({} turns)", self.state.timer.remaining_turns));
        }
    }

    fn appraise_both(&mut self, f: &Formula) {
        let cfg = &self.options.epivir;
        let r = appraise(f, &self.state.o_r, cfg);
        let h = appraise(f, &self.state.o_h, cfg);
        self.state.epivir_store.insert(r);
        self.state.epivir_store.insert(h);
    }

    fn reasoning(&mut self, formulas: &[String]) -> Outcome {
        let parsed: Result<Vec<Formula>, _> = formulas.iter().map(|s| parse_formula(s)).collect();
        let parsed = match parsed {
            Ok(fs) if !fs.is_empty() => fs,
            Ok(_) => {
                self.record(Step::I, "no propositions");
                return Outcome::Unclear { question: None };
            }
            Err(e) => {
                self.record(Step::I, format!("unparsed input: {e}"));
                return Outcome::Unclear { question: None };
            }
        };
        for f in &parsed {
            self.appraise_both(f);
        }
        self.record(Step::I, format!("{} propositions appraised against O_R and O_H", parsed.len()));

        let own = match_syllogism_pattern(&parsed);
        let clauses = self.state.o_r.tableau_clauses();
        let (conclusion, premises) = parsed.split_last().expect("nonempty");
        let single_robot_belief = parsed.len() == 1 && matches!(&parsed[0], Formula::Believes(a, _) if a.is_robot());
        let hypothesis = if single_robot_belief {
            Some(parsed[0].clone())
        } else {
            let background = match_with_background(premises, conclusion, &clauses);
            hypothesis_for(&background, &self.state.o_r)
        };
        let deviation = hypothesis.as_ref().map(|h| {
            let entry = appraise(h, &self.state.o_r, &self.options.epivir);
            match entry.provenance {
                Provenance::Appraisal { deviation, .. } => deviation,
                _ => 0.0,
            }
        });
        let deviant = deviation.is_some_and(|d| d > self.options.epivir.escalation_threshold);
        self.record(
            Step::II,
            match deviation {
                Some(d) if deviant => format!("formula deviance {d:.3}"),
                Some(d) => format!("no deviance ({d:.3})"),
                None => "no conditional link found".to_string(),
            },
        );
        if deviant {
            self.open_timer();
        }

        if own.kind.is_valid_form() {
            self.record(Step::IV, format!("valid form {:?} stated in full", own.kind));
            return Outcome::Understood { kind: ReportKind::Valid };
        }
        let Some(hypothesis) = hypothesis else {
            self.record(Step::IV, "insufficient background");
            return Outcome::Unclear { question: self.background_question(&parsed) };
        };
        let verdict = match detect_fallacy(&self.state.o_r, &self.state.o_h, &hypothesis, &self.options.epivir.tableau)
        {
            Ok(v) => v,
            Err(e) => {
                self.record(Step::IV, format!("not testable: {e}"));
                return Outcome::Unclear { question: None };
            }
        };
        let outcome = if verdict.proof.entailed {
            self.record(Step::IV, format!("tableau closed ({} expansions)", verdict.proof.expansions));
            Outcome::Understood { kind: ReportKind::Valid }
        } else if let (true, Some(c)) = (verdict.tableau_confirmed, &verdict.containment) {
            let kind = match verdict.pattern.kind {
                SyllogismKind::ExConsequentia => ReportKind::ExConsequentia,
                _ => ReportKind::InverseError,
            };
            let cfg = &self.options.epivir;
            let appraised = appraise(&hypothesis, &self.state.o_r, cfg);
            let raw = appraised
                .placed_at(cfg.refuted, Provenance::FallacyPlacement { appraised: appraised.probability }, cfg)
                .expect("configured probabilities lie in [0, 1]");
            let raw_id = self.state.epivir_store.insert(raw);
            let cont_id = match self.state.epivir_store.promote(raw_id, &c.formula, cfg) {
                Ok(id) => id,
                Err(e) => {
                    self.record(Step::IV, format!("containment not stored: {e}"));
                    return Outcome::Unclear { question: None };
                }
            };
            self.record(Step::IV, format!("tableau open, {:?} contained", verdict.pattern.kind));
            self.containment = Some(format_formula(&c.formula));
            self.clarifications = verdict.clarifications.clone();
            self.attribution = attribution_label(verdict.pattern.kind);
            let table = crate::fallacy::epistemic_lifting(&self.state.o_r);
            let slots = verdict.pattern.slots.as_ref().expect("confirmed patterns have slots");
            self.state.pending_clarifications = Some(PendingClarifications {
                kind: verdict.pattern.kind,
                questions: verdict.clarifications.clone(),
                asserted: crate::fallacy::lift(&slots.asserted, &table),
                concluded: crate::fallacy::lift(&slots.concluded, &table),
                raw_entry: raw_id,
                containment_entry: cont_id,
            });
            Outcome::Understood { kind }
        } else {
            self.record(Step::IV, "tableau open, form not recognized");
            Outcome::Unclear { question: self.background_question(&parsed) }
        };
        self.fallacy = Some(verdict);
        outcome
    }

    fn background_question(&self, parsed: &[Formula]) -> Option<String> {
        let (c, ps) = parsed.split_last()?;
        let p = ps.last()?;
        let labels = self.state.o_h.overlay(&self.state.o_r).labels().clone();
        let (a, b) = (phrase(&crate::fallacy::content(p), &labels), phrase(&crate::fallacy::content(c), &labels));
        Some(render::polite_or(format!("How does {a} lead you to {b}?"), render::ASK_AGAIN))
    }

    fn assertion(&mut self, subject: Option<&str>, predicate: Option<&str>, is_simile: bool) -> Outcome {
        let (Some(subject), Some(predicate)) = (subject, predicate) else {
            self.record(Step::I, "assertion lacks a subject or predicate");
            return Outcome::Unclear { question: None };
        };
        let literal = format!("in_{}_{}", slug(subject), slug(predicate));
        match Formula::try_atom(literal) {
            Ok(f) => {
                self.appraise_both(&f);
                self.record(Step::I, "membership claim appraised against O_R and O_H");
            }
            Err(_) => self.record(Step::I, "membership claim has no formula form"),
        }
        let merged = self.state.o_h.overlay(&self.state.o_r);
        let report = merged.category_mismatch(subject, predicate);
        match report.verdict {
            MismatchVerdict::Literal => {
                self.record(Step::II, "literal membership");
                self.record(Step::IV, "no deviance, trivially valid");
                return Outcome::Understood { kind: ReportKind::Valid };
            }
            MismatchVerdict::UnknownTerms => {
                self.record(Step::II, "terms without reference");
                let term = if report.subject_has_reference { predicate } else { subject };
                let q = format!("What do you mean by {}?", term.trim());
                return Outcome::Unclear { question: Some(render::polite_or(q, render::ASK_AGAIN)) };
            }
            MismatchVerdict::CategoryMismatch => self.record(Step::II, "category mismatch"),
        }
        self.open_timer();
        let detection = detect_trope(
            subject,
            predicate,
            is_simile,
            &self.state.o_r,
            &self.state.o_h,
            &self.options.trope,
            &self.state.conventions,
        );
        let TropeDetection::Trope { result } = detection else {
            self.record(Step::V, "no trope reading");
            return Outcome::Unclear { question: None };
        };
        if let Some(c) = result.rejected() {
            self.record(Step::V, format!("rejected on condition {c:?}"));
            let q = format!("In what way is {} like {}?", subject.trim(), predicate.trim());
            self.trope = Some(*result);
            return Outcome::Unclear { question: Some(render::polite_or(q, render::ASK_AGAIN)) };
        }
        let o_r = match register_as_if(&result, &self.state.o_r, &self.options.trope) {
            Ok(o) => o,
            Err(e) => {
                self.record(Step::V, format!("not registered: {e}"));
                return Outcome::Unclear { question: None };
            }
        };
        self.state.o_r = o_r;
        self.store_as_if(&result);
        self.record(Step::V, format!("accepted, {} registered as-if", result.literal_label()));
        if let Some(field) = self.state.conventions.record(&result) {
            if let Ok(o) = install_field(&self.state.o_r, &field, &self.options.trope) {
                self.state.o_r = o;
                self.record(Step::V, format!("conventional field {} installed", field.label()));
            }
        }
        let kind = match result.orientation {
            Orientation::Fp => ReportKind::FpMetaphor,
            Orientation::Fn => ReportKind::FnMetaphor,
        };
        self.attribution = result.label();
        self.trope = Some(*result);
        Outcome::Understood { kind }
    }

    fn store_as_if(&mut self, result: &CreativeResult) {
        let cfg = &self.options.epivir;
        let store = &mut self.state.epivir_store;
        let next = store.len() as u64 + 1;
        let literal = EpiVirEntry::new(
            result.literal_formula(),
            self.options.trope.literal_p,
            Realism::Unrealistic,
            Provenance::AsIf { role: AsIfRole::Literal, link: Some(next + 1) },
            cfg,
        );
        let figurative = EpiVirEntry::new(
            result.figurative_formula(),
            self.options.trope.figurative_p,
            Realism::Realistic,
            Provenance::AsIf { role: AsIfRole::Figurative, link: Some(next) },
            cfg,
        );
        if let (Ok(l), Ok(f)) = (literal, figurative) {
            store.insert(l);
            store.insert(f);
        }
    }
}

/// Runs one utterance through steps I to VII. The input state is not
/// modified; the updated state is returned with the report.
pub fn run_protocol(
    u: &Utterance,
    state: &ProtocolState,
    options: &ProtocolOptions,
) -> (AnalysisReport, ProtocolState) {
    let inherited = state.timer.open;
    let mut next = state.clone();
    next.turn += 1;
    let mut turn = Turn {
        state: next,
        options,
        trace: Vec::new(),
        clarifications: Vec::new(),
        containment: None,
        trope: None,
        fallacy: None,
        attribution: Attribution::None,
    };
    let outcome = match u.mode {
        Mode::Reasoning => turn.reasoning(&u.formulas),
        Mode::Assertion => turn.assertion(u.subject.as_deref(), u.predicate.as_deref(), u.is_simile),
    };
    let kind = match outcome {
        Outcome::Understood { kind } => {
            turn.state.timer = Timer::default();
            turn.record(Step::VI, "understood, timer closed");
            kind
        }
        Outcome::Unclear { question } => {
            turn.attribution = Attribution::None;
            turn.containment = None;
            let timer = &mut turn.state.timer;
            let mut question = question.unwrap_or_else(|| render::ASK_AGAIN.to_string());
            let outcome = if inherited && timer.open {
                timer.remaining_turns = timer.remaining_turns.saturating_sub(1);
                if timer.remaining_turns == 0 {
                    *timer = Timer::default();
                    question = render::FINAL_ASK.to_string();
                    "not understood, timer expired".to_string()
                } else {
                    format!("not understood, {} turns left", timer.remaining_turns)
                }
            } else {
                if !timer.open {
                    *timer = Timer { open: true, remaining_turns: options.duration.max(1) };
                }
                format!("not understood, timer open ({} turns)", timer.remaining_turns)
            };
            turn.clarifications = vec![question];
            turn.record(Step::VII, outcome);
            ReportKind::Unintelligible
        }
    };
    let verbosity = options.verbosity.unwrap_or(u.verbosity);
    let mut report = AnalysisReport {
        utterance: u.clone(),
        kind,
        attribution: turn.attribution,
        containment: turn.containment,
        trope: turn.trope,
        clarifications: turn.clarifications,
        response: String::new(),
        verbosity_disclosure: (verbosity == Verbosity::Explain).then(|| kind.as_str().to_string()),
        step_trace: turn.trace.clone(),
        fallacy: turn.fallacy,
        timer: turn.state.timer,
    };
    report.response = render_response(&report, verbosity);
    let mut state = turn.state;
    state.step_trace = turn.trace;
    (report, state)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Answer {
    Yes,
    No,
    Unknown,
}

impl std::str::FromStr for Answer {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s.trim().to_lowercase().as_str() {
            "y" | "yes" => Ok(Answer::Yes),
            "n" | "no" => Ok(Answer::No),
            "?" | "u" | "unknown" => Ok(Answer::Unknown),
            other => Err(format!("expected yes, no or unknown, got {other:?}")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ClarificationOutcome {
    /// The user's beliefs were added to O_H.
    Confirmed,
    /// The contained reading was dropped.
    Withdrawn,
    /// Some answer is still open.
    Pending,
}

impl ClarificationOutcome {
    pub fn response(self) -> &'static str {
        match self {
            ClarificationOutcome::Confirmed => "Thank you, now I see what you mean.",
            ClarificationOutcome::Withdrawn => "Could you say that again, perhaps in other words?",
            ClarificationOutcome::Pending => "Take your time. Tell me when you are sure.",
        }
    }
}

pub fn answer_clarification(
    state: &ProtocolState,
    answers: [Answer; 3],
    options: &ProtocolOptions,
) -> Result<(ClarificationOutcome, ProtocolState), ProtocolError> {
    let pending = state.pending_clarifications.as_ref().ok_or(ProtocolError::NoPending)?;
    let mut s = state.clone();
    if answers.contains(&Answer::No) {
        s.epivir_store.withdraw(pending.containment_entry).map_err(|_| ProtocolError::NoPending)?;
        s.pending_clarifications = None;
        return Ok((ClarificationOutcome::Withdrawn, s));
    }
    if answers.contains(&Answer::Unknown) {
        if !s.timer.open {
            s.timer = Timer { open: true, remaining_turns: options.duration.max(1) };
        }
        return Ok((ClarificationOutcome::Pending, s));
    }
    for f in [&pending.asserted, &pending.concluded] {
        s.o_h = s.o_h.update_belief(&EntryRef::Formula(f.clone()), options.confirmed_p)?;
    }
    if let Some(entry) = s.epivir_store.get(pending.containment_entry).cloned() {
        let confirmed = entry
            .placed_at(
                options.epivir.promotion,
                Provenance::Confirmed { from: pending.containment_entry },
                &options.epivir,
            )
            .map_err(|_| ProtocolError::NoPending)?;
        s.epivir_store.insert(confirmed);
    }
    s.pending_clarifications = None;
    Ok((ClarificationOutcome::Confirmed, s))
}
