mod config;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use stpa::analysis::{
    bisim_definitional, bisim_linear, linearize_term, relevant_instants, LinearVerdict, OracleVerdict,
};
use stpa::axioms::soundness::{check_all, check_axiom};
use stpa::axioms::{classify, Ax, Normalizer, RewriteTrace};
use stpa::meadow::laws::{check_derived, check_distance, check_table};
use stpa::protocols::{self, DeliveryVerdict, ParParams, ParTrace};
use stpa::semantics::{anchor, run, Policy, Sos, Trace, TraceEnd};
use stpa::syntax::{parse_scalar, parse_sigma, parse_term};
use stpa::{Action, ActionKind, Ambient, Error, Scalar, SpeedConfig, Term};

use config::ConfigFile;

/// `println!` that ends the process quietly once stdout is closed.
macro_rules! out {
    ($($arg:tt)*) => {{
        use std::io::Write;
        if writeln!(std::io::stdout().lock(), $($arg)*).is_err() {
            std::process::exit(0);
        }
    }};
}

#[derive(Parser)]
#[command(name = "stpa", version, about = "Space-time process algebra workbench")]
struct Cli {
    /// Emit JSON lines instead of text.
    #[arg(long, global = true)]
    json: bool,
    /// Propagation speed of messages, e.g. `1` or `1/10`.
    #[arg(long, global = true)]
    speed: Option<String>,
    /// Configuration file of `key = value` lines (default: $STPA_CONFIG).
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Maximal number of recursion unfoldings per evaluation.
    #[arg(long, global = true)]
    unfold_budget: Option<usize>,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Args)]
struct AmbientArgs {
    /// Ambient time; defaults to the term's state operator, else 0.
    #[arg(long)]
    at: Option<String>,
    /// Communication state, e.g. `{(c,d,1,(0,0,0))}`.
    #[arg(long)]
    sigma: Option<String>,
}

#[derive(Subcommand)]
enum Cmd {
    /// Parse a term and print it back with its normal-form class.
    Parse { term: String },
    /// Full normal form: semi-head normal form, then the tails.
    Normalize {
        term: String,
        /// Print every rewrite step as a JSON line.
        #[arg(long)]
        trace: bool,
    },
    /// Semi-head normal form.
    Shnf {
        term: String,
        #[arg(long)]
        trace: bool,
    },
    /// Head normal form of a state-wrapped term.
    Hnf {
        term: String,
        #[arg(long)]
        trace: bool,
    },
    /// Transitions of a term at one ambient.
    Step {
        term: String,
        #[command(flatten)]
        amb: AmbientArgs,
    },
    /// Idle set of a term at one ambient.
    Idle {
        term: String,
        #[command(flatten)]
        amb: AmbientArgs,
    },
    /// Maximal runs: exhaustive, or one random run when a seed is given.
    Run {
        term: String,
        #[command(flatten)]
        amb: AmbientArgs,
        #[arg(long)]
        depth: Option<usize>,
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Linear recursive specification of a state-wrapped term.
    Linearize {
        term: String,
        #[arg(long)]
        depth: Option<usize>,
    },
    /// Bisimulation check; exit 0 iff bisimilar.
    Bisim {
        left: String,
        right: String,
        #[arg(long)]
        depth: Option<usize>,
        /// Linearize both sides and compare the specifications.
        #[arg(long)]
        linear: bool,
    },
    /// Check the meadow equations on random rationals.
    MeadowSelftest {
        #[arg(long)]
        samples: Option<usize>,
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Cross-check axiom schemas against the operational semantics.
    AxiomCheck {
        #[arg(long)]
        samples: Option<usize>,
        #[arg(long)]
        seed: Option<u64>,
        /// Schema identifiers, e.g. `S31`; all schemas when omitted.
        #[arg(long = "axiom")]
        axioms: Vec<String>,
    },
    /// The PAR protocol scenario.
    Par {
        #[arg(value_enum)]
        action: ParAction,
        #[arg(long)]
        seed: Option<u64>,
        /// Run the anomaly search without maximal progress.
        #[arg(long)]
        no_priority: bool,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum ParAction {
    /// One random run of the closed system.
    Run,
    /// Exhaustive delivery check.
    Check,
    /// The time-out inequality.
    Condition,
    /// Search for a reception instant passed over.
    Anomaly,
}

/// Settings after merging the config file and the flags.
struct Settings {
    json: bool,
    cfg: SpeedConfig,
    unfold_budget: Option<usize>,
    depth: Option<usize>,
    seed: Option<u64>,
    samples: Option<usize>,
    file: ConfigFile,
}

enum Failure {
    Usage(String),
    Error(Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Error(e)
    }
}

type Outcome = Result<bool, Failure>;

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    match dispatch(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(Failure::Usage(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(2)
        }
        Err(Failure::Error(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(match e {
                Error::NotRepresentable(_) => 3,
                _ => 2,
            })
        }
    }
}

fn settings(cli: &Cli) -> Result<Settings, Failure> {
    let path = cli.config.clone().or_else(|| std::env::var_os("STPA_CONFIG").map(PathBuf::from));
    let file = match path {
        Some(p) => ConfigFile::load(&p)?,
        None => ConfigFile::default(),
    };
    let speed = match &cli.speed {
        Some(s) => Some(parse_scalar(s)?),
        None => file.scalar("speed")?,
    };
    let cfg = match speed {
        Some(v) => SpeedConfig::new(v)?,
        None => SpeedConfig::default(),
    };
    let json = cli.json
        || match file.get("format") {
            None | Some("text") => false,
            Some("json") => true,
            Some(f) => return Err(Failure::Usage(format!("unknown format `{f}`"))),
        };
    Ok(Settings {
        json,
        cfg,
        unfold_budget: cli.unfold_budget.or(file.usize("unfold_budget")?),
        depth: file.usize("depth")?,
        seed: file.u64("seed")?,
        samples: file.usize("samples")?,
        file,
    })
}

impl Settings {
    fn sos(&self) -> Sos {
        let mut s = Sos::new(self.cfg.clone());
        if let Some(b) = self.unfold_budget {
            s.unfold_budget = b;
        }
        s
    }

    fn normalizer(&self, trace: bool) -> Normalizer {
        let n = Normalizer::new(self.cfg.clone());
        if trace {
            n.traced()
        } else {
            n
        }
    }

    fn emit(&self, text: impl std::fmt::Display, value: Value) {
        if self.json {
            out!("{value}");
        } else {
            out!("{text}");
        }
    }
}

fn dispatch(cli: Cli) -> Outcome {
    let s = settings(&cli)?;
    match cli.cmd {
        Cmd::Parse { term } => {
            let p = parse_term(&term)?;
            let class = classify(&p).to_string();
            s.emit(format!("{p}\nclass: {class}"), json!({ "term": p.to_string(), "class": class }));
            Ok(true)
        }
        Cmd::Normalize { term, trace } => normal_form(&s, &term, trace, |n, p| n.normalize(p)),
        Cmd::Shnf { term, trace } => normal_form(&s, &term, trace, |n, p| n.shnf(p)),
        Cmd::Hnf { term, trace } => normal_form(&s, &term, trace, |n, p| n.hnf(p)),
        Cmd::Step { term, amb } => {
            let p = parse_term(&term)?;
            let a = ambient(&p, &amb)?;
            let b = s.sos().eval(&p, &a)?;
            if b.steps.is_empty() && !s.json {
                out!("no transitions");
            }
            for tr in &b.steps {
                s.emit(
                    format!("--{}--> {}", tr.action, tr.succ),
                    json!({ "action": action_json(&tr.action), "successor": tr.succ.to_string() }),
                );
            }
            Ok(true)
        }
        Cmd::Idle { term, amb } => {
            let p = parse_term(&term)?;
            let a = ambient(&p, &amb)?;
            let idle = s.sos().eval(&p, &a)?.idle;
            let sup = idle.sup().map(|x| x.to_string());
            s.emit(&idle, json!({ "idle": idle.to_string(), "sup": sup }));
            Ok(true)
        }
        Cmd::Run { term, amb, depth, seed } => {
            let p = parse_term(&term)?;
            let a = ambient(&p, &amb)?;
            let depth = depth.or(s.depth).unwrap_or(20);
            let policy = match seed.or(s.seed) {
                Some(seed) => Policy::Random { seed, depth },
                None => Policy::Exhaustive { depth },
            };
            let traces = run(&s.sos(), &p, &a.time, &a.sigma, &policy)?;
            for (i, t) in traces.iter().enumerate() {
                print_trace(&s, i, t);
            }
            Ok(true)
        }
        Cmd::Linearize { term, depth } => {
            let p = parse_term(&term)?;
            let e = linearize_term(&p, depth.or(s.depth).unwrap_or(16), &s.cfg)?;
            let cut: Vec<String> = e.truncated.iter().map(|x| x.to_string()).collect();
            let text = if cut.is_empty() { e.to_string() } else { format!("{e}\ntruncated: {}", cut.join(", ")) };
            s.emit(text, json!({ "spec": e.to_string(), "truncated": cut }));
            Ok(true)
        }
        Cmd::Bisim { left, right, depth, linear } => {
            let (p, q) = (parse_term(&left)?, parse_term(&right)?);
            let depth = depth.or(s.depth).unwrap_or(8);
            if linear {
                let e1 = linearize_term(&p, depth, &s.cfg)?;
                let e2 = linearize_term(&q, depth, &s.cfg)?;
                return Ok(match bisim_linear(&e1, &e2) {
                    LinearVerdict::Bisimilar { up_to_depth } => {
                        let how = if up_to_depth { " up to the linearization depth" } else { "" };
                        s.emit(
                            format!("bisimilar{how}"),
                            json!({ "verdict": "bisimilar", "up_to_depth": up_to_depth }),
                        );
                        true
                    }
                    LinearVerdict::Distinguished { path, reason } => {
                        let labels: Vec<String> = path.iter().map(|a| a.to_string()).collect();
                        s.emit(
                            format!("distinguished after [{}]: {reason}", labels.join(", ")),
                            json!({ "verdict": "distinguished", "path": labels, "reason": reason }),
                        );
                        false
                    }
                });
            }
            let instants = relevant_instants(&p, &q);
            match bisim_definitional(&p, &q, &instants, depth, &s.sos()) {
                OracleVerdict::BisimilarUpToDepth(d) => {
                    s.emit(format!("bisimilar up to depth {d}"), json!({ "verdict": "bisimilar", "depth": d }));
                    Ok(true)
                }
                OracleVerdict::Distinguished(w) => {
                    let labels: Vec<String> = w.path.iter().map(|a| a.to_string()).collect();
                    s.emit(
                        format!("distinguished: {w}"),
                        json!({
                            "verdict": "distinguished",
                            "path": labels,
                            "time": w.ambient.time.to_string(),
                            "sigma": w.ambient.sigma.to_string(),
                            "reason": w.reason,
                        }),
                    );
                    Ok(false)
                }
                OracleVerdict::Inconclusive(m) => Err(Failure::Usage(format!("inconclusive: {m}"))),
            }
        }
        Cmd::MeadowSelftest { samples, seed } => {
            let n = samples.or(s.samples).unwrap_or(1000);
            let seed = seed.or(s.seed).unwrap_or(1);
            let mut reports = check_table(n, seed);
            reports.extend(check_derived(n, seed));
            reports.push(check_distance(n, seed));
            let mut ok = true;
            for r in &reports {
                ok &= r.passed();
                let first = r.failures.first().cloned();
                let text = match &first {
                    None => format!("{:28} pass ({} samples)", r.name, r.samples),
                    Some(f) => format!("{:28} FAIL ({} of {}): {f}", r.name, r.failures.len(), r.samples),
                };
                s.emit(
                    text,
                    json!({ "law": r.name, "samples": r.samples, "failures": r.failures.len(), "example": first }),
                );
            }
            Ok(ok)
        }
        Cmd::AxiomCheck { samples, seed, axioms } => {
            let n = samples.or(s.samples).unwrap_or(100);
            let seed = seed.or(s.seed).unwrap_or(1);
            let reports = if axioms.is_empty() {
                check_all(n, seed, &s.cfg)
            } else {
                let mut v = Vec::new();
                for id in &axioms {
                    let ax = Ax::from_id(id).ok_or_else(|| Failure::Usage(format!("unknown axiom `{id}`")))?;
                    v.push(check_axiom(ax, n, seed, &s.cfg));
                }
                v
            };
            let mut ok = true;
            for r in &reports {
                ok &= r.failures.is_empty();
                let example = r.failures.first().map(|d| format!("{} ~> {}: {}", d.lhs, d.rhs, d.witness));
                let mut text =
                    format!("{:6} instances={:4} discrepancies={}", r.axiom.to_string(), r.instances, r.failures.len());
                if let Some(e) = &example {
                    text.push_str(&format!("\n    {e}"));
                }
                s.emit(
                    text,
                    json!({
                        "axiom": r.axiom.id(),
                        "instances": r.instances,
                        "attempts": r.attempts,
                        "discrepancies": r.failures.len(),
                        "example": example,
                    }),
                );
            }
            Ok(ok)
        }
        Cmd::Par { action, seed, no_priority } => par(&s, action, seed, no_priority),
    }
}

fn normal_form(
    s: &Settings,
    src: &str,
    trace: bool,
    f: impl Fn(&mut Normalizer, &Term) -> stpa::Result<Term>,
) -> Outcome {
    let p = parse_term(src)?;
    let mut n = s.normalizer(trace);
    let r = f(&mut n, &p)?;
    if let Some(t) = n.take_trace() {
        print_rewrites(&t);
    }
    let class = classify(&r).to_string();
    s.emit(&r, json!({ "result": r.to_string(), "class": class }));
    Ok(true)
}

fn print_rewrites(t: &RewriteTrace) {
    for st in &t.steps {
        let v = json!({
            "axiom": st.axiom.id(),
            "path": st.path,
            "redex": st.redex.to_string(),
            "result": st.result.to_string(),
        });
        out!("{v}");
    }
}

fn ambient(p: &Term, args: &AmbientArgs) -> Result<Ambient, Failure> {
    let at = args.at.as_deref().map(parse_scalar).transpose()?;
    let sigma = args.sigma.as_deref().map(parse_sigma).transpose()?;
    Ok(match (at, sigma, anchor(p)) {
        (None, None, Some(a)) => a,
        (t, s, _) => Ambient::new(t.unwrap_or_else(Scalar::zero), s.unwrap_or_default()),
    })
}

fn kind_name(k: ActionKind) -> &'static str {
    match k {
        ActionKind::APSend => "ps_abs",
        ActionKind::RPSend => "ps_rel",
        ActionKind::APRecv => "pr_abs",
        ActionKind::RPRecv => "pr_rel",
        ActionKind::AESend => "es",
        ActionKind::AERecv => "er",
    }
}

fn action_json(a: &Action) -> Value {
    json!({
        "kind": kind_name(a.kind),
        "channel": a.channel.to_string(),
        "datum": a.datum.to_string(),
        "time": a.time().to_string(),
        "point": a.point.to_string(),
    })
}

fn end_name(e: TraceEnd) -> &'static str {
    match e {
        TraceEnd::Terminated => "terminated",
        TraceEnd::Deadlock => "deadlock",
        TraceEnd::DepthExhausted => "depth",
    }
}

fn print_trace(s: &Settings, index: usize, t: &Trace) {
    if s.json {
        let steps: Vec<Value> = t
            .steps
            .iter()
            .map(|st| {
                json!({
                    "from": st.time.to_string(),
                    "action": action_json(&st.action),
                    "deadline": st.deadline.as_ref().map(|d| d.to_string()),
                })
            })
            .collect();
        out!("{}", json!({ "trace": index, "steps": steps, "end": end_name(t.end) }));
        return;
    }
    out!("trace {index}:");
    for st in &t.steps {
        out!("  {}", st.action);
    }
    out!("  end: {}", end_name(t.end));
}

fn print_par_trace(s: &Settings, t: &ParTrace) {
    if s.json {
        for a in &t.actions {
            out!("{}", json!({ "action": action_json(a) }));
        }
    } else {
        for a in &t.actions {
            out!("  {a}");
        }
    }
}

fn par(s: &Settings, action: ParAction, seed: Option<u64>, no_priority: bool) -> Outcome {
    let mut p: ParParams = s.file.par_params()?;
    p.speed = s.cfg.v.clone();
    p.validate()?;
    match action {
        ParAction::Condition => {
            let len = p.cycle_length()?;
            let holds = protocols::cycle_condition(&p)?;
            s.emit(
                format!("cycle {len} < time-out {}: {holds}", p.timeout),
                json!({ "cycle": len.to_string(), "timeout": p.timeout.to_string(), "holds": holds }),
            );
            Ok(holds)
        }
        ParAction::Run => {
            let term = protocols::build_closed(&p, &p.data, true)?;
            let seed = seed.or(s.seed).unwrap_or(1);
            let traces =
                run(&s.sos(), &term, &Scalar::zero(), &Default::default(), &Policy::Random { seed, depth: p.depth })?;
            let t = &traces[0];
            let actions = ParTrace { actions: t.steps.iter().map(|st| st.action.clone()).collect() };
            print_par_trace(s, &actions);
            let delivered: Vec<&str> = actions.deliveries();
            s.emit(
                format!("end: {}; delivered: [{}]", end_name(t.end), delivered.join(", ")),
                json!({ "end": end_name(t.end), "delivered": delivered }),
            );
            Ok(true)
        }
        ParAction::Check => {
            let r = protocols::check_delivery(&p, &p.data)?;
            let counts = json!({
                "completed": r.completed,
                "truncated": r.truncated,
                "unfair": r.unfair,
                "configurations": r.configurations,
                "retransmission_after_k_error": r.retransmission_after_k_error.is_some(),
            });
            match &r.verdict {
                DeliveryVerdict::Ok => {
                    s.emit(
                        format!(
                            "ok: {} complete runs correct, {} cut at depth {}, {} unfair, {} configurations",
                            r.completed, r.truncated, p.depth, r.unfair, r.configurations
                        ),
                        json!({ "verdict": "ok", "counts": counts }),
                    );
                    Ok(true)
                }
                DeliveryVerdict::Violation { trace, reason } => {
                    s.emit(
                        format!("violation: {reason}"),
                        json!({ "verdict": "violation", "reason": reason, "counts": counts }),
                    );
                    print_par_trace(s, trace);
                    Ok(false)
                }
            }
        }
        ParAction::Anomaly => {
            let r = protocols::find_skipped_reception(&p, &p.data, !no_priority)?;
            match &r.witness {
                None => {
                    s.emit(
                        format!("no reception passed over in {} configurations", r.configurations),
                        json!({ "anomaly": false, "configurations": r.configurations }),
                    );
                    Ok(true)
                }
                Some(w) => {
                    s.emit(
                        format!("reception {} passed over", w.missed),
                        json!({ "anomaly": true, "missed": action_json(&w.missed), "configurations": r.configurations }),
                    );
                    print_par_trace(s, &w.trace);
                    Ok(false)
                }
            }
        }
    }
}
