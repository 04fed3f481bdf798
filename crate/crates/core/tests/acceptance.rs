//! End-to-end acceptance checks. Each criterion prints one PASS/FAIL line;
//! the test fails if any criterion fails.

mod common;

use std::f64::consts::SQRT_2;
use std::time::{Duration, Instant};

use rand_pcg::rand_core::{Rng, SeedableRng};
use rand_pcg::Pcg32;
use trope_sense::fallacy::{contain_ex_consequentia, contain_inverse_error};
use trope_sense::formula::{is_nnf, to_nnf};
use trope_sense::ontology::{feature_overlap, load_ontology};
use trope_sense::protocol::{Mode, Step};
use trope_sense::sigdet::generator::{Generator, GeneratorConfig};
use trope_sense::sigdet::{criterion_p, normal, DetectionFault, Mood, Strategy};
use trope_sense::tableau::{expand, Branch, Rule};
use trope_sense::trope::{creative_proposition, ConventionStore, TropeDetection};
use trope_sense::*;

type Outcome = Result<String, String>;
type Check = (&'static str, fn() -> Outcome);

fn p(s: &str) -> Formula {
    parse_formula(s).unwrap()
}

fn ensure(cond: bool, msg: impl Into<String>) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg.into())
    }
}

fn within(limit: Duration, took: Duration, what: &str) -> Result<(), String> {
    ensure(took < limit, format!("{what} took {took:?}, limit {limit:?}"))
}

/// Median of a few runs, so one scheduler hiccup does not decide a timing check.
fn timed<T>(mut f: impl FnMut() -> T) -> (T, Duration) {
    let mut times = Vec::new();
    let mut out = None;
    for _ in 0..5 {
        let t = Instant::now();
        out = Some(f());
        times.push(t.elapsed());
    }
    times.sort();
    (out.unwrap(), times[2])
}

fn robot_ontology(clause: &str) -> Ontology {
    load_ontology(&format!(r#"{{"owner":"R","belief_formulas":[{{"formula":"{clause}","belief":0.95}}]}}"#)).unwrap()
}

/// A failed proof whose open branches are saturated, with the expected
/// literals on them and the context atom closing the other branch.
fn open_branch_check(clause: &str, hypothesis: &str, expected: &[&[&str]]) -> Outcome {
    let o = robot_ontology(clause);
    let clauses = o.tableau_clauses();
    let h = p(hypothesis);
    let (r, took) = timed(|| check_consequence(&clauses, &h, "O_R", &TableauConfig::default()).unwrap());
    within(Duration::from_millis(10), took, "proof")?;
    ensure(!r.entailed, "hypothesis was entailed")?;
    ensure(r.open_branches.iter().all(|b| b.is_saturated()), "an open branch is not saturated")?;
    ensure(r.closed_branches >= 1, "no branch closed on the context atom")?;
    let open = r.open_literals_displayed();
    for want in expected {
        let hit = open.iter().any(|lits| want.iter().all(|w| lits.contains(*w)));
        ensure(hit, format!("no open branch contains {want:?}; open: {open:?}"))?;
    }
    Ok(format!("{} open, {} closed, {took:?}", open.len(), r.closed_branches))
}

fn criterion_1() -> Outcome {
    open_branch_check("B(R, B(H,d) -> K(H,a))", "B(R, K(H,a) -> B(H,d))", &[&["B(R)", "K(H,a)", "~B(H,d)"]])
}

fn criterion_2() -> Outcome {
    open_branch_check("B(R, B(H,cm) -> B(H,A=R))", "B(R, ~B(H,cm) -> ~B(H,A=R))", &[&["B(R)", "~B(H,cm)", "B(H,A=R)"]])
}

fn proof_records(seed_base: u64) -> (Vec<String>, usize) {
    let mut out = Vec::new();
    let mut disagreements = 0;
    for i in 0..1000 {
        let (premises, conclusion) = common::random_instance(seed_base + i);
        let r = prove_entailment(&premises, &conclusion, &TableauConfig::default()).unwrap();
        if r.entailed != truth_table_entails(&premises, &conclusion).unwrap()
            || r.entailed != common::oracle_entails(&premises, &conclusion)
        {
            disagreements += 1;
        }
        out.push(serde_json::to_string(&r).unwrap());
    }
    (out, disagreements)
}

fn criterion_3() -> Outcome {
    let t = Instant::now();
    let (_, disagreements) = proof_records(0);
    let took = t.elapsed();
    ensure(disagreements == 0, format!("{disagreements} disagreements"))?;
    within(Duration::from_secs(5), took, "1000 instances")?;
    Ok(format!("1000 instances, 0 disagreements, {took:?}"))
}

fn rule_of(f: &str) -> Option<Rule> {
    let children = expand(&Branch::new([p(f)]));
    children.first().and_then(|c| c.trace().last()).map(|s| s.rule)
}

fn criterion_4() -> Outcome {
    let cases: [(&str, Rule, &str); 8] = [
        ("x | y", Rule::R1, "x | y"),
        ("~(x & y)", Rule::R2, "~x | ~y"),
        ("x -> y", Rule::R3, "~x | y"),
        ("x <-> y", Rule::R4, "(x & y) | (~x & ~y)"),
        ("x & y", Rule::R5, "x & y"),
        ("~(x | y)", Rule::R6, "~x & ~y"),
        ("~(x -> y)", Rule::R7, "x & ~y"),
        ("~~x", Rule::R8, "x"),
    ];
    for (input, rule, nnf) in cases {
        ensure(rule_of(input) == Some(rule), format!("{input} expands by {:?}", rule_of(input)))?;
        let got = format_formula(&to_nnf(&p(input)).unwrap());
        ensure(got == nnf, format!("nnf({input}) = {got}, want {nnf}"))?;
    }
    let mut rng = Pcg32::seed_from_u64(4);
    let mut failures = 0;
    for _ in 0..1000 {
        let f = common::random_formula(&mut rng, 6, 5);
        let n = to_nnf(&f).unwrap();
        if !is_nnf(&n) || !common::equivalent(&f, &n) || to_nnf(&n).unwrap() != n {
            failures += 1;
        }
    }
    ensure(failures == 0, format!("{failures} random formulas failed"))?;
    Ok("8 rules, 1000 random formulas, 0 failures".into())
}

fn basic_state() -> ProtocolState {
    ProtocolState::new(fixtures::ontology_basic(), fixtures::ontology_user())
}

fn run(formulas: &[&str]) -> AnalysisReport {
    let u = Utterance::reasoning("", formulas.iter().copied());
    run_protocol(&u, &basic_state(), &ProtocolOptions::default()).0
}

/// `B(R, box(_)) & B(R, diaMQ(_) -> diaMQ(_))`, one box and two diaMQ.
fn containment_shape(f: &Formula) -> bool {
    use Formula::*;
    let count = |pred: fn(&Formula) -> bool| f.subformulas().into_iter().filter(|g| pred(g)).count();
    let boxes = count(|g| matches!(g, Nec(_)));
    let mqs = count(|g| matches!(g, PossMq(_)));
    let shaped = match f {
        And(l, r) => match (&**l, &**r) {
            (Believes(a, nec), Believes(b, imp)) => {
                a.is_robot()
                    && b.is_robot()
                    && matches!(&**nec, Nec(_))
                    && matches!(&**imp, Implies(x, y) if matches!(**x, PossMq(_)) && matches!(**y, PossMq(_)))
            }
            _ => false,
        },
        _ => false,
    };
    shaped && boxes == 1 && mqs == 2
}

fn criterion_5() -> Outcome {
    for (name, formulas) in [
        ("modus ponens", &["a -> d", "a", "d"][..]),
        ("modus tollens", &["a -> d", "~d", "~a"][..]),
        ("chain", &["A -> B", "B -> C", "A", "C"][..]),
        ("premise from O_R", &["d", "a"][..]),
    ] {
        let r = run(formulas);
        ensure(r.kind == ReportKind::Valid, format!("{name}: {:?}", r.kind))?;
        ensure(r.containment.is_none(), format!("{name}: containment emitted"))?;
    }
    let expected = [
        (
            &["a", "d"][..],
            ReportKind::ExConsequentia,
            "B(R, box(B(H,d) -> K(H,a))) & B(R, diaMQ(K(H,a) -> B(H,d)) -> diaMQ(B(H,d)))",
        ),
        (
            &["~cm", "~A=R"][..],
            ReportKind::InverseError,
            "B(R, box(K(H,cm) -> B(H,A=R))) & B(R, diaMQ(~B(H,cm) -> ~B(H,A=R)) -> diaMQ(~B(H,A=R)))",
        ),
    ];
    for (formulas, kind, skeleton) in expected {
        let r = run(formulas);
        ensure(r.kind == kind, format!("{formulas:?}: {:?}", r.kind))?;
        let c = p(r.containment.as_deref().ok_or("no containment")?);
        ensure(containment_shape(&c), format!("bad shape {}", format_formula(&c)))?;
        ensure(c == p(skeleton), format!("{} != {skeleton}", format_formula(&c)))?;
    }
    let direct = contain_ex_consequentia(&p("B(R, K(H,a) -> B(H,d))")).unwrap().formula;
    ensure(containment_shape(&direct), "direct affirmed-consequent containment")?;
    let direct = contain_inverse_error(&p("B(R, ~B(H,cm) -> ~B(H,A=R))")).unwrap().formula;
    ensure(containment_shape(&direct), "direct denied-antecedent containment")?;
    Ok("4 valid forms bypassed, 2 fallacies contained".into())
}

fn criterion_6() -> Outcome {
    let (o_r, o_h) = (fixtures::ontology_basic(), fixtures::ontology_user());
    let cfg = TropeConfig::default();
    let store = ConventionStore::new(2);
    let d = |s: &str, v: &str| detect_trope(s, v, false, &o_r, &o_h, &cfg, &store);
    let juliet = d("Juliet", "the sun");
    ensure(juliet.trope().map(|t| t.orientation) == Some(Orientation::Fp), format!("Juliet: {juliet:?}"))?;
    let robots = d("Robots", "human");
    ensure(robots.trope().map(|t| t.orientation) == Some(Orientation::Fn), format!("Robots: {robots:?}"))?;
    ensure(d("dog", "an animal") == TropeDetection::Literal, "dog is not literal")?;

    let org = fixtures::ontology_organisms();
    let r = creative_proposition("Human", "Machines", false, &org, &cfg, &store);
    let human = &org.category("Organisms").unwrap().exemplars["Human"].features;
    let machines = &org.category("Machines").unwrap().prototype_features;
    let shared = human.intersection(machines).count() as f64;
    let union = human.union(machines).count() as f64;
    ensure(shared / union == 0.6, "fixture overlap oracle is not 0.6")?;
    ensure(r.condition_ii.score == Some(shared / union), format!("score {:?}", r.condition_ii.score))?;
    ensure(feature_overlap(human, machines).score() == Some(0.6), "feature_overlap")?;
    ensure(r.accepted(), format!("rejected on {:?}", r.rejected()))?;
    ensure(r.generalization_label().as_deref() == Some("Organisms ≈ Machines"), "generalization")?;

    let s = ProtocolState::new(fixtures::ontology_basic(), fixtures::ontology_child());
    let u = Utterance::assertion("I am a mermaid", "I", "a mermaid");
    let (report, s) = run_protocol(&u, &s, &ProtocolOptions::default());
    let t = report.trope.as_ref().ok_or("no trope")?;
    let beliefs = s.o_r.belief_formulas();
    let li = s.o_r.find_formula(&t.literal_formula()).ok_or("no literal entry")?;
    let fi = s.o_r.find_formula(&t.figurative_formula()).ok_or("no figurative entry")?;
    ensure(beliefs[li].world == World::Fiction && beliefs[li].belief <= 0.25, "literal entry placement")?;
    ensure(beliefs[fi].world == World::Reality && beliefs[fi].belief >= 0.75, "figurative entry placement")?;
    ensure(beliefs[li].link == Some(fi) && beliefs[fi].link == Some(li), "entries not cross-linked")?;
    ensure(beliefs[li].label.as_deref() == Some("speaker ∈ mermaids"), format!("label {:?}", beliefs[li].label))?;
    Ok("orientations, literal claim, overlap 0.6, mermaid as-if entries".into())
}

const WORDS: [&str; 10] = ["error", "nonsense", "wrong", "valid", "fallacy", "mermaid", "I", "", "Juliet", "sun"];
const NOISE: &[u8] = b"~&|()-><BKR,xyz%$#= ";

fn mutate(u: &mut Utterance, rng: &mut Pcg32) {
    let pick = |rng: &mut Pcg32, n: usize| (rng.next_u64() % n.max(1) as u64) as usize;
    match pick(rng, 9) {
        0 => {}
        1 if !u.formulas.is_empty() => {
            let i = pick(rng, u.formulas.len());
            let f = &mut u.formulas[i];
            if !f.is_empty() {
                let at = pick(rng, f.len());
                if f.is_char_boundary(at) {
                    f.remove(at);
                }
            }
        }
        2 if !u.formulas.is_empty() => {
            let i = pick(rng, u.formulas.len());
            let c = NOISE[pick(rng, NOISE.len())] as char;
            let f = &mut u.formulas[i];
            let at = pick(rng, f.len() + 1).min(f.len());
            f.insert(at, c);
        }
        3 => u.formulas.push(WORDS[pick(rng, WORDS.len())].to_string()),
        4 => u.subject = Some(WORDS[pick(rng, WORDS.len())].to_string()),
        5 => u.predicate = if pick(rng, 2) == 0 { None } else { Some(WORDS[pick(rng, WORDS.len())].to_string()) },
        6 => u.mode = if u.mode == Mode::Reasoning { Mode::Assertion } else { Mode::Reasoning },
        7 => u.formulas.truncate(pick(rng, 3)),
        _ => {
            u.subject = Some(WORDS[pick(rng, WORDS.len())].to_string());
            u.predicate = Some(WORDS[pick(rng, WORDS.len())].to_string());
            u.mode = Mode::Assertion;
        }
    }
}

/// Independent of the library's own politeness check.
fn forbidden(text: &str) -> Option<String> {
    let lower = text.to_lowercase();
    let words: Vec<&str> =
        lower.split(|c: char| !(c.is_alphanumeric() || c == '_')).filter(|w| !w.is_empty()).collect();
    let singles = [
        "error",
        "nonsense",
        "wrong",
        "valid",
        "unintelligible",
        "ex_consequentia",
        "inverse_error",
        "fp_metaphor",
        "fn_metaphor",
        "fallacy",
        "robotomorphism",
        "anthropomorphism",
    ];
    if let Some(w) = words.iter().find(|w| singles.contains(w)) {
        return Some(w.to_string());
    }
    let joined = format!(" {} ", words.join(" "));
    ["affirming the consequent", "denying the antecedent", "ex consequentia", "inverse error"]
        .into_iter()
        .find(|ph| joined.contains(&format!(" {ph} ")))
        .map(str::to_string)
}

struct FuzzRun {
    json: Vec<String>,
    runs: usize,
    impolite: Vec<String>,
    unterminated: usize,
}

fn politeness_fuzz(seed: u64, count: usize) -> FuzzRun {
    let gen = Generator::new(
        &fixtures::ontology_basic(),
        &fixtures::ontology_user(),
        &TropeConfig::default(),
        GeneratorConfig::default(),
    )
    .unwrap();
    let mut rng = Pcg32::seed_from_u64(seed);
    let opts = ProtocolOptions::default();
    let mut out = FuzzRun { json: Vec::with_capacity(count), runs: 0, impolite: Vec::new(), unterminated: 0 };
    let mut state = basic_state();
    for i in 0..count {
        if i % 40 == 0 {
            state = basic_state();
        }
        let mood = Mood::ALL[(rng.next_u64() % 3) as usize];
        let strategy = if rng.next_u64() % 2 == 0 { Strategy::Reasoning } else { Strategy::Creativity };
        let mut u = gen.generate(mood, strategy, &mut rng).unwrap().surface;
        if i % 2 == 1 {
            mutate(&mut u, &mut rng);
            mutate(&mut u, &mut rng);
        }
        let (report, next) = run_protocol(&u, &state, &opts);
        state = next;
        out.runs += 1;
        if let Some(w) = forbidden(&report.response) {
            out.impolite.push(format!("{w:?} in {:?}", report.response));
        }
        if !matches!(report.step_trace.last().map(|s| s.step), Some(Step::VI | Step::VII)) {
            out.unterminated += 1;
        }
        out.json.push(serde_json::to_string(&report).unwrap());
    }
    out
}

fn criterion_7() -> Outcome {
    let t = Instant::now();
    let f = politeness_fuzz(7, 10_000);
    let took = t.elapsed();
    ensure(f.runs >= 10_000, "too few runs")?;
    ensure(f.impolite.is_empty(), format!("{} impolite, first {:?}", f.impolite.len(), f.impolite.first()))?;
    ensure(f.unterminated == 0, format!("{} runs did not end in VI or VII", f.unterminated))?;
    within(Duration::from_secs(60), took, "fuzz")?;
    Ok(format!("{} utterances, 0 impolite, all terminated, {took:?}", f.runs))
}

/// Right-tail quantile by bisection on erfc.
fn q_oracle(p: f64) -> f64 {
    let (mut lo, mut hi) = (-40.0_f64, 40.0_f64);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if 0.5 * libm::erfc(mid / SQRT_2) > p {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Simpson's rule for the standard normal density over [a, b].
fn simpson(a: f64, b: f64) -> f64 {
    let n = 4000;
    let h = (b - a) / n as f64;
    let pdf = |x: f64| (-0.5 * x * x).exp() / (2.0 * std::f64::consts::PI).sqrt();
    let mut s = pdf(a) + pdf(b);
    for i in 1..n {
        s += pdf(a + i as f64 * h) * if i % 2 == 1 { 4.0 } else { 2.0 };
    }
    s * h / 3.0
}

fn criterion_8() -> Outcome {
    ensure(d_prime(0.5, 0.5).unwrap() == 0.0, "d'(0.5, 0.5) != 0")?;
    let oracle = q_oracle(0.16) - q_oracle(0.84);
    let got = d_prime(0.84, 0.16).unwrap();
    ensure((oracle - 1.9889).abs() < 1e-3, format!("oracle {oracle}"))?;
    ensure((got - 1.9889).abs() < 1e-3 && (got - oracle).abs() < 1e-9, format!("d' = {got}, oracle {oracle}"))?;
    let got = d_prime(0.977, 0.5).unwrap();
    ensure((got - (q_oracle(0.5) - q_oracle(0.977))).abs() < 1e-9, format!("d'(0.977, 0.5) = {got}"))?;
    for i in 1..200 {
        let p = i as f64 / 200.0;
        let diff = (normal::right_tail_quantile(p) - q_oracle(p)).abs();
        ensure(diff < 1e-9, format!("Q({p}) off by {diff}"))?;
    }

    let d = 2.0;
    let mut last: Option<(f64, f64)> = None;
    for i in 0..50 {
        let c = -3.0 + 6.0 * i as f64 / 49.0;
        let (t1, t2) = error_rates(d, c);
        let (o1, o2) = (simpson(c, c + 14.0), simpson(c - d - 14.0, c - d));
        ensure(
            (t1 - o1).abs() < 1e-9 && (t2 - o2).abs() < 1e-9,
            format!("rates at c={c}: ({t1}, {t2}) vs ({o1}, {o2})"),
        )?;
        if let Some((l1, l2)) = last {
            ensure(t1 < l1 && t2 > l2, format!("not monotone at c={c}"))?;
        }
        last = Some((t1, t2));
    }
    let (t1, t2) = error_rates(0.0, 0.0);
    ensure(t1 == 0.5 && t2 == 0.5, "symmetric rates")?;
    let (t1, t2) = error_rates(2.0, 1.0);
    ensure((t1 - 0.158_655_253_931_457).abs() < 1e-9 && (t2 - t1).abs() < 1e-15, "rates at d'=2, c=1")?;
    ensure(criterion_p(Mood::Fear) == 0.1, "fear")?;
    ensure(criterion_p(Mood::Joy) == 0.0001, "joy")?;
    ensure(criterion_p(Mood::Neutral) == 0.05, "neutral")?;
    Ok(format!("d'(0.84, 0.16) = {:.6}, 50-point sweep monotone", d_prime(0.84, 0.16).unwrap()))
}

fn expected_label(kind: ReportKind) -> Attribution {
    match kind {
        ReportKind::ExConsequentia | ReportKind::FpMetaphor => Attribution::Robotomorphism,
        ReportKind::InverseError | ReportKind::FnMetaphor => Attribution::Anthropomorphism,
        _ => Attribution::None,
    }
}

fn round_trip(seed: u64) -> (Vec<String>, Vec<String>) {
    let gen = Generator::new(
        &fixtures::ontology_basic(),
        &fixtures::ontology_user(),
        &TropeConfig::default(),
        GeneratorConfig::default(),
    )
    .unwrap();
    let mut rng = Pcg32::seed_from_u64(seed);
    let mut json = Vec::new();
    let mut mismatches = Vec::new();
    let cells = [
        (DetectionFault::FalseAlarm, Strategy::Reasoning),
        (DetectionFault::FalseAlarm, Strategy::Creativity),
        (DetectionFault::Miss, Strategy::Reasoning),
        (DetectionFault::Miss, Strategy::Creativity),
    ];
    for (fault, strategy) in cells {
        for i in 0..100 {
            let mood = Mood::ALL[i % 3];
            let g = gen.with_fault(mood, strategy, fault, &mut rng).unwrap();
            let (r, _) = run_protocol(&g.surface, &basic_state(), &ProtocolOptions::default());
            if r.kind != g.true_kind || r.attribution != expected_label(g.true_kind) {
                mismatches.push(format!("{:?}: got {:?}/{:?}", g.surface.surface, r.kind, r.attribution));
            }
            json.push(serde_json::to_string(&(g, r)).unwrap());
        }
    }
    (json, mismatches)
}

fn criterion_9() -> Outcome {
    let (json, mismatches) = round_trip(9);
    ensure(json.len() == 400, "expected 400 utterances")?;
    ensure(mismatches.is_empty(), format!("{} mismatches, first {:?}", mismatches.len(), mismatches.first()))?;
    Ok("400/400 agree, labels match".into())
}

fn criterion_10() -> Outcome {
    ensure(proof_records(0).0 == proof_records(0).0, "tableau outputs differ")?;
    ensure(politeness_fuzz(7, 10_000).json == politeness_fuzz(7, 10_000).json, "fuzz outputs differ")?;
    ensure(round_trip(9).0 == round_trip(9).0, "round-trip outputs differ")?;
    Ok("repeat runs are byte-identical".into())
}

/// Written past the test harness's capture so the lines show in every run.
fn report(line: String) {
    use std::io::Write;
    let mut out = std::io::stdout().lock();
    let _ = writeln!(out, "{line}");
    let _ = out.flush();
}

#[test]
fn acceptance_criteria() {
    let criteria: [Check; 10] = [
        ("affirmed-consequent proof stays open", criterion_1),
        ("denied-antecedent proof stays open", criterion_2),
        ("tableau agrees with truth tables", criterion_3),
        ("negation normal form", criterion_4),
        ("valid forms bypass, fallacies contained", criterion_5),
        ("trope fixtures", criterion_6),
        ("politeness fuzz", criterion_7),
        ("signal detection math", criterion_8),
        ("generator and classifier agree", criterion_9),
        ("determinism", criterion_10),
    ];
    let mut failed = Vec::new();
    for (i, (name, check)) in criteria.iter().enumerate() {
        match check() {
            Ok(detail) => report(format!("criterion {:>2} PASS  {name}: {detail}", i + 1)),
            Err(why) => {
                report(format!("criterion {:>2} FAIL  {name}: {why}", i + 1));
                failed.push(i + 1);
            }
        }
    }
    assert!(failed.is_empty(), "failed criteria: {failed:?}");
}
