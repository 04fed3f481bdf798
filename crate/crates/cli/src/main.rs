mod config;
mod output;

use std::fs::OpenOptions;
use std::io::{self, BufRead, Read, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::{json, Value};
use trope_sense::protocol::assume_fiction;
use trope_sense::sigdet::generator::{Generator, GeneratorConfig};
use trope_sense::sigdet::DetectionParams;
use trope_sense::*;

use config::{CliConfig, FileConfig, Overrides};
use output::Format;

#[derive(Parser, Debug)]
#[command(name = "trope-sense", version, about = "Fallacy and trope analysis for human-robot dialogue")]
struct Cli {
    #[command(flatten)]
    global: Global,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug)]
struct Global {
    /// Robot ontology (JSON). Defaults to the bundled fixture.
    #[arg(long, global = true, env = "TROPE_SENSE_ONTOLOGY_R")]
    ontology_r: Option<PathBuf>,
    /// Human ontology (JSON). Defaults to the bundled fixture.
    #[arg(long, global = true, env = "TROPE_SENSE_ONTOLOGY_H")]
    ontology_h: Option<PathBuf>,
    #[arg(long, global = true, env = "TROPE_SENSE_SEED")]
    seed: Option<u64>,
    /// Feature-overlap threshold for accepting a trope.
    #[arg(long, global = true)]
    theta: Option<f64>,
    /// Turns the disbelief-suspension timer stays open.
    #[arg(long, global = true)]
    timer_turns: Option<u32>,
    /// Disclose verdicts in responses.
    #[arg(long, global = true)]
    explain: bool,
    /// TOML file with defaults for the options above.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[arg(long, global = true, value_enum)]
    output: Option<Format>,
    /// Append every report to this JSON-lines session log.
    #[arg(long, global = true)]
    log: Option<PathBuf>,
    /// Diagnostic logging on stderr (repeat for more).
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    verbose: u8,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Parse a formula and print its syntax tree.
    Parse { formula: String },
    /// Decide whether the premises entail the conclusion.
    Prove {
        #[arg(long = "premise")]
        premises: Vec<String>,
        #[arg(long)]
        conclusion: String,
        /// Include the step-by-step expansion trace.
        #[arg(long)]
        trace: bool,
    },
    /// Run utterances (JSON lines or an array) through the protocol.
    Analyze {
        /// Input file; stdin when absent or "-".
        file: Option<PathBuf>,
        /// Treat every utterance as told within a fiction.
        #[arg(long)]
        assume_fiction: bool,
    },
    /// Interactive session.
    Repl,
    /// Generate utterances from the detection model and classify them.
    Simulate {
        #[arg(long, value_enum)]
        mood: MoodArg,
        #[arg(long, value_enum)]
        strategy: StrategyArg,
        #[arg(long, default_value_t = 100)]
        count: usize,
    },
    /// Inspect an ontology.
    Ontology {
        #[command(subcommand)]
        action: OntologyCmd,
    },
}

#[derive(Subcommand, Debug)]
enum OntologyCmd {
    Show {
        /// Which ontology to show.
        #[arg(long, value_enum, default_value_t = Side::R)]
        which: Side,
        /// Show the EpiVir placement of each belief instead.
        #[arg(long)]
        epivir: bool,
        /// Replay these utterances first and show the resulting state.
        #[arg(long)]
        session: Option<PathBuf>,
    },
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Side {
    R,
    H,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum MoodArg {
    Fear,
    Joy,
    Neutral,
}

impl From<MoodArg> for Mood {
    fn from(m: MoodArg) -> Mood {
        match m {
            MoodArg::Fear => Mood::Fear,
            MoodArg::Joy => Mood::Joy,
            MoodArg::Neutral => Mood::Neutral,
        }
    }
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum StrategyArg {
    Reasoning,
    Creativity,
}

impl From<StrategyArg> for Strategy {
    fn from(s: StrategyArg) -> Strategy {
        match s {
            StrategyArg::Reasoning => Strategy::Reasoning,
            StrategyArg::Creativity => Strategy::Creativity,
        }
    }
}

/// Command failure carrying its exit code.
struct Failure {
    code: u8,
    message: String,
}

fn usage(message: impl ToString) -> Failure {
    Failure { code: 2, message: message.to_string() }
}

type CmdResult = Result<u8, Failure>;

struct Ctx {
    config: CliConfig,
    format: Format,
    log: Option<std::fs::File>,
}

impl Ctx {
    fn emit<T: Serialize>(&self, value: &T) {
        let v = serde_json::to_value(value).expect("outputs serialize");
        let mut out = io::stdout().lock();
        // A closed pipe is not worth a panic.
        let _ = writeln!(out, "{}", self.format.render(&v));
    }

    fn log<T: Serialize>(&mut self, value: &T) -> Result<(), Failure> {
        if let Some(f) = &mut self.log {
            let line = serde_json::to_string(value).expect("outputs serialize");
            writeln!(f, "{line}").map_err(|e| Failure { code: 2, message: format!("session log: {e}") })?;
        }
        Ok(())
    }

    fn options(&self) -> ProtocolOptions {
        let mut o = self.config.options.clone();
        if self.config.explain {
            o.verbosity = Some(Verbosity::Explain);
        }
        o
    }

    fn fresh_state(&self) -> ProtocolState {
        ProtocolState::new(self.config.o_r.clone(), self.config.o_h.clone())
            .with_conventions(self.config.options.trope.convention_threshold)
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let level = match cli.global.verbose {
        0 => log::LevelFilter::Warn,
        1 => log::LevelFilter::Info,
        2 => log::LevelFilter::Debug,
        _ => log::LevelFilter::Trace,
    };
    env_logger::Builder::new().filter_level(level).parse_default_env().init();
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(f) => {
            let _ = io::stdout().flush();
            eprintln!("trope-sense: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}

fn run(cli: Cli) -> CmdResult {
    let g = &cli.global;
    let file = match &g.config {
        Some(p) => FileConfig::load(p).map_err(usage)?,
        None => FileConfig::default(),
    };
    let format = match (g.output, file.output.as_deref()) {
        (Some(f), _) => f,
        (None, Some(s)) => Format::from_str(s, true).map_err(|_| usage(format!("unknown output format {s:?}")))?,
        (None, None) => Format::Json,
    };
    let overrides = Overrides {
        ontology_r: g.ontology_r.clone(),
        ontology_h: g.ontology_h.clone(),
        theta: g.theta,
        timer_turns: g.timer_turns,
        seed: g.seed,
        explain: g.explain,
    };
    let config = CliConfig::resolve(&overrides, &file).map_err(usage)?;
    let log = match &g.log {
        Some(p) => Some(
            OpenOptions::new()
                .create(true)
                .append(true)
                .open(p)
                .map_err(|e| usage(format!("cannot open {}: {e}", p.display())))?,
        ),
        None => None,
    };
    let mut ctx = Ctx { config, format, log };
    match cli.command {
        Command::Parse { formula } => cmd_parse(&ctx, &formula),
        Command::Prove { premises, conclusion, trace } => cmd_prove(&ctx, &premises, &conclusion, trace),
        Command::Analyze { file, assume_fiction } => cmd_analyze(&mut ctx, file, assume_fiction),
        Command::Repl => cmd_repl(&mut ctx),
        Command::Simulate { mood, strategy, count } => cmd_simulate(&ctx, mood.into(), strategy.into(), count),
        Command::Ontology { action: OntologyCmd::Show { which, epivir, session } } => {
            cmd_ontology_show(&mut ctx, which, epivir, session)
        }
    }
}

fn parse_or_usage(text: &str) -> Result<Formula, Failure> {
    parse_formula(text).map_err(|e| usage(format!("cannot parse {text:?}: {e}")))
}

fn cmd_parse(ctx: &Ctx, text: &str) -> CmdResult {
    let f = parse_or_usage(text)?;
    ctx.emit(&json!({ "formula": format_formula(&f), "ast": f }));
    Ok(0)
}

fn cmd_prove(ctx: &Ctx, premises: &[String], conclusion: &str, trace: bool) -> CmdResult {
    let ps = premises.iter().map(|p| parse_or_usage(p)).collect::<Result<Vec<_>, _>>()?;
    let c = parse_or_usage(conclusion)?;
    let r = prove_entailment(&ps, &c, &TableauConfig::default()).map_err(usage)?;
    let open: Vec<Value> = r
        .open_branches
        .iter()
        .zip(r.open_literals_displayed())
        .map(|(b, lits)| json!({ "id": b.id(), "literals": lits }))
        .collect();
    let mut v = json!({
        "entailed": r.entailed,
        "premises": ps.iter().map(format_formula).collect::<Vec<_>>(),
        "conclusion": format_formula(&c),
        "expansions": r.expansions,
        "closed_branches": r.closed_branches,
        "open_branches": open,
        "atoms": r.atoms,
    });
    if trace {
        v["trace"] = serde_json::to_value(&r.trace).expect("trace serializes");
    }
    ctx.emit(&v);
    Ok(if r.entailed { 0 } else { 1 })
}

fn read_input(file: Option<PathBuf>) -> Result<String, Failure> {
    match file {
        Some(p) if p.as_os_str() != "-" => config::read(&p).map_err(usage),
        _ => {
            let mut s = String::new();
            io::stdin().read_to_string(&mut s).map_err(|e| usage(format!("stdin: {e}")))?;
            Ok(s)
        }
    }
}

fn is_fallacy(kind: ReportKind) -> bool {
    matches!(kind, ReportKind::ExConsequentia | ReportKind::InverseError)
}

fn cmd_analyze(ctx: &mut Ctx, file: Option<PathBuf>, fiction: bool) -> CmdResult {
    let text = read_input(file)?;
    let utterances = protocol::parse_utterances(&text).map_err(usage)?;
    let options = ctx.options();
    let mut state = ctx.fresh_state();
    let mut found = false;
    for u in &utterances {
        if fiction {
            state = assume_fiction(&state, u, &options.epivir);
        }
        let (report, next) = run_protocol(u, &state, &options);
        state = next;
        found |= is_fallacy(report.kind);
        ctx.log(&report)?;
        ctx.emit(&report);
    }
    Ok(if found { 1 } else { 0 })
}

fn parse_answers(args: &str) -> Option<[Answer; 3]> {
    let parsed: Vec<Answer> = args.split_whitespace().map(str::parse).collect::<Result<_, _>>().ok()?;
    parsed.try_into().ok()
}

fn cmd_repl(ctx: &mut Ctx) -> CmdResult {
    let options = ctx.options();
    let mut state = ctx.fresh_state();
    let stdin = io::stdin();
    for line in stdin.lock().lines() {
        let line = line.map_err(|e| usage(format!("stdin: {e}")))?;
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        if line == ":quit" || line == ":q" {
            break;
        }
        if line == ":state" {
            ctx.emit(&state);
            continue;
        }
        if let Some(rest) = line.strip_prefix(":answer") {
            let Some(answers) = parse_answers(rest) else {
                ctx.emit(&json!({ "message": "usage: :answer <y|n|?> <y|n|?> <y|n|?>" }));
                continue;
            };
            match answer_clarification(&state, answers, &options) {
                Ok((outcome, next)) => {
                    state = next;
                    let v = json!({ "outcome": outcome, "response": outcome.response() });
                    ctx.log(&v)?;
                    ctx.emit(&v);
                }
                Err(e) => ctx.emit(&json!({ "message": e.to_string() })),
            }
            continue;
        }
        if line.starts_with(':') {
            ctx.emit(&json!({ "message": "commands: :state, :answer y n ?, :quit" }));
            continue;
        }
        match protocol::parse_utterance(line) {
            Ok(u) => {
                let (report, next) = run_protocol(&u, &state, &options);
                state = next;
                ctx.log(&report)?;
                ctx.emit(&report);
            }
            Err(e) => ctx.emit(&json!({ "message": e.to_string() })),
        }
    }
    Ok(0)
}

/// Per-run tallies for the simulate summary.
#[derive(Default)]
struct Tally {
    count: usize,
    agree: usize,
    faulted: usize,
    faulted_agree: usize,
    signal: usize,
    noise: usize,
    misses: usize,
    false_alarms: usize,
}

fn rate(n: usize, d: usize) -> Option<f64> {
    (d > 0).then(|| n as f64 / d as f64)
}

fn cmd_simulate(ctx: &Ctx, mood: Mood, strategy: Strategy, count: usize) -> CmdResult {
    let generator =
        Generator::new(&ctx.config.o_r, &ctx.config.o_h, &ctx.config.options.trope, GeneratorConfig::default())
            .map_err(usage)?;
    let corpus = generator.corpus(mood, strategy, count, ctx.config.seed).map_err(usage)?;
    let options = ctx.options();
    let mut t = Tally::default();
    for g in &corpus {
        let (report, _) = run_protocol(&g.surface, &ctx.fresh_state(), &options);
        let agree = report.kind == g.true_kind;
        t.count += 1;
        t.agree += agree as usize;
        if g.signal_present {
            t.signal += 1;
        } else {
            t.noise += 1;
        }
        match g.detection_fault {
            DetectionFault::Miss => t.misses += 1,
            DetectionFault::FalseAlarm => t.false_alarms += 1,
            DetectionFault::None => {}
        }
        if g.detection_fault != DetectionFault::None {
            t.faulted += 1;
            t.faulted_agree += agree as usize;
        }
        let mut line = serde_json::to_value(g).expect("generated utterances serialize");
        line["classified_kind"] = json!(report.kind);
        line["agree"] = json!(agree);
        ctx.emit(&line);
    }
    let params = DetectionParams::for_mood(mood, generator.config().d_prime(mood));
    ctx.emit(&json!({ "summary": {
        "mood": mood,
        "strategy": strategy,
        "seed": ctx.config.seed,
        "count": t.count,
        "agreement": rate(t.agree, t.count),
        "faulted": t.faulted,
        "agreement_on_faulted": rate(t.faulted_agree, t.faulted),
        "empirical_type1": rate(t.false_alarms, t.noise),
        "empirical_type2": rate(t.misses, t.signal),
        "expected_type1": params.type1(),
        "expected_type2": params.type2(),
        "d_prime": params.d_prime,
        "criterion": params.criterion,
    }}));
    Ok(0)
}

fn cmd_ontology_show(ctx: &mut Ctx, which: Side, epivir: bool, session: Option<PathBuf>) -> CmdResult {
    let mut state = ctx.fresh_state();
    if let Some(path) = session {
        let text = config::read(&path).map_err(usage)?;
        let options = ctx.options();
        for u in protocol::parse_utterances(&text).map_err(usage)? {
            state = run_protocol(&u, &state, &options).1;
        }
    }
    let o = match which {
        Side::R => &state.o_r,
        Side::H => &state.o_h,
    };
    if !epivir {
        ctx.emit(o);
        return Ok(0);
    }
    let mut store = state.epivir_store.clone();
    if store.is_empty() {
        for b in o.belief_formulas() {
            store.insert(appraise(&b.formula, o, &ctx.config.options.epivir));
        }
    }
    ctx.emit(&store);
    Ok(0)
}
