//! Command-line surface: flags, dispatch, output and exit codes.

use std::io::{BufRead, IsTerminal, Write};

use clap::{Parser, Subcommand, ValueEnum};
use serde_json::{json, Value as Json};
use species_idr::axioms::{check_axiom, integro_differential_suite, AxiomReport, Axiom};
use species_idr::calculus::{
    composition_laws, continuity_laws, divided_power_laws, exp_log_laws, exponentiation_laws, metric_laws,
    LawSuite,
};
use species_idr::linear::LinearSpeciesRing;
use species_idr::localization::LocalizedRing;
use species_idr::oracle::{check_product_split, verify_counts, ConcreteExpr};
use species_idr::ring::IdRing;
use species_idr::series::{check_gs_homomorphism, check_joyal_series, GsMode};
use species_idr::{Error, Result, SetSpeciesRing};

use crate::eval::{build_context, build_tower, parse_weight, Bindings, Evaluator, ExprRing, Shown, Value};
use crate::expr::{Expr, TowerSpec};

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAILURE: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_RESOURCE: i32 = 3;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, ValueEnum)]
pub enum Format {
    #[default]
    Text,
    Json,
}

/// Exact computations with species, integro-differential operators and
/// their generating series.
#[derive(Clone, Debug, Parser)]
#[command(name = "species-idr", version)]
pub struct Cli {
    /// Truncation bound N.
    #[arg(long, global = true, default_value_t = 8)]
    pub trunc: usize,
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, global = true, default_value_t = 100)]
    pub samples: usize,
    #[arg(long, global = true, value_enum, default_value_t = Format::Text)]
    pub format: Format,
    /// set, linear or loc:<K>.
    #[arg(long, global = true, default_value = "set")]
    pub ring: String,
    /// Tower of the set-species ring: exp, E or const:<K>.
    #[arg(long, global = true, default_value = "exp")]
    pub tower: String,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Clone, Debug, Subcommand)]
pub enum Command {
    /// Evaluate an expression.
    Eval { expr: String },
    /// Run a check suite; `list` names them.
    Check {
        suite: String,
        /// Weight of the Leibniz and Rota-Baxter axioms.
        #[arg(long, default_value = "0")]
        lambda: String,
        /// Constants for matching-rb.
        #[arg(long = "omega")]
        omegas: Vec<String>,
    },
    /// Compare brute-force counts with generating-series counts.
    Oracle {
        #[arg(long)]
        expr: String,
        #[arg(long, default_value_t = 8)]
        upto: usize,
        /// Check |F[p+q]| = |F[p]|·|F[q]| instead, given as p,q.
        #[arg(long)]
        split: Option<String>,
    },
    /// Generating series of an expression.
    Series { expr: String },
    /// Interactive session with `let name = expr`.
    Repl,
    /// One command per line from stdin.
    Batch,
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::Eval { .. } => "eval",
            Command::Check { .. } => "check",
            Command::Oracle { .. } => "oracle",
            Command::Series { .. } => "series",
            Command::Repl => "repl",
            Command::Batch => "batch",
        }
    }
}

pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Syntax { .. }
        | Error::UnknownIdentifier(_)
        | Error::UnsupportedContext(_)
        | Error::ContextMismatch
        | Error::TruncationMismatch { .. } => EXIT_USAGE,
        Error::ResourceLimit(_) => EXIT_RESOURCE,
        _ => EXIT_FAILURE,
    }
}

pub const SUITES: [&str; 20] = [
    "section",
    "leibniz",
    "rota-baxter",
    "hybrid-rb",
    "eval-multiplicative",
    "initialization",
    "matching-rb",
    "integro-differential",
    "divided-powers",
    "exp-log",
    "exponentiation",
    "composition",
    "continuity",
    "metric",
    "calculus",
    "gs-homomorphism",
    "joyal-series",
    "modified",
    "all",
    "list",
];

enum AnyRing {
    Set(SetSpeciesRing),
    Linear(LinearSpeciesRing),
    Loc(LocalizedRing),
}

macro_rules! with_ring {
    ($any:expr, $r:ident => $body:expr) => {
        match $any {
            AnyRing::Set($r) => $body,
            AnyRing::Linear($r) => $body,
            AnyRing::Loc($r) => $body,
        }
    };
}

fn parse_tower(s: &str) -> Result<TowerSpec> {
    match Expr::parse(&format!("J[{s}](X)")) {
        Ok(Expr::Integral(Some(t), _)) => Ok(t),
        _ => Err(Error::Syntax { position: 0, message: format!("unknown tower '{s}'") }),
    }
}

fn build_ring(cli: &Cli) -> Result<AnyRing> {
    let n = cli.trunc;
    match cli.ring.as_str() {
        "set" => Ok(AnyRing::Set(SetSpeciesRing::new(build_tower(&parse_tower(&cli.tower)?, n)?))),
        "linear" => Ok(AnyRing::Linear(LinearSpeciesRing::new(n))),
        other => match other.strip_prefix("loc:") {
            Some(k) => Ok(AnyRing::Loc(LocalizedRing::new(build_context(&Expr::parse(k)?, n)?))),
            None => Err(Error::Syntax { position: 0, message: format!("unknown ring '{other}'") }),
        },
    }
}

/// Output of one command.
pub struct Outcome {
    pub code: i32,
    pub text: String,
    pub json: Json,
}

impl Outcome {
    fn ok(text: String, json: Json) -> Self {
        Outcome { code: EXIT_OK, text, json }
    }

    fn error(e: &Error) -> Self {
        Outcome { code: exit_code(e), text: format!("error: {e}"), json: json!({ "error": e.to_string() }) }
    }
}

fn eval_value<R: ExprRing>(ring: &R, expr: &Expr) -> Result<(String, &'static str)> {
    let v = Evaluator::new(ring).eval(expr)?;
    Ok((Shown(ring, &v).to_string(), v.kind()))
}

fn series_value<R: ExprRing>(ring: &R, expr: &Expr) -> Result<String> {
    Ok(match Evaluator::new(ring).eval(expr)? {
        Value::Elem(x) => ring.series(&x)?.to_string(),
        Value::Series(s) => s.to_string(),
        other => return Err(Error::Eval(format!("{expr} is a {}, not a ring element", other.kind()))),
    })
}

fn run_eval(ring: &AnyRing, src: &str, bindings: &Bindings) -> Result<Outcome> {
    let expr = bindings.resolve(&Expr::parse(src)?)?;
    let (text, kind) = with_ring!(ring, r => eval_value(r, &expr))?;
    Ok(Outcome::ok(text.clone(), json!({ "expr": expr.to_string(), "kind": kind, "value": text })))
}

fn run_series(ring: &AnyRing, src: &str) -> Result<Outcome> {
    let expr = Expr::parse(src)?;
    let text = with_ring!(ring, r => series_value(r, &expr))?;
    Ok(Outcome::ok(text.clone(), json!({ "expr": expr.to_string(), "series": text })))
}

fn suites_of(suites: Vec<LawSuite>) -> Vec<AxiomReport> {
    suites.into_iter().flat_map(|s| s.reports).collect()
}

fn generic_check<R: ExprRing>(
    ring: &R,
    suite: &str,
    lambda: &species_idr::rational::Rational,
    omegas: &[String],
    samples: usize,
    seed: u64,
) -> Result<Option<Vec<AxiomReport>>> {
    let single = |a: Axiom<R::Elem>| check_axiom(ring, &a, samples, seed).map(|r| Some(vec![r]));
    let l = lambda.clone();
    match suite {
        "section" => single(Axiom::Section),
        "leibniz" => single(Axiom::Leibniz(l)),
        "rota-baxter" => single(Axiom::RotaBaxter(l)),
        "hybrid-rb" => single(Axiom::HybridRb(l)),
        "eval-multiplicative" => single(Axiom::EvalMultiplicative),
        "initialization" => single(Axiom::InitializationWeight),
        "matching-rb" => {
            let defaults = ["1".to_string(), "1 + X^3 - 3*C3".to_string()];
            let sources = if omegas.is_empty() { &defaults[..] } else { omegas };
            let ev = Evaluator::new(ring);
            let values = sources.iter().map(|s| ev.elem(&Expr::parse(s)?)).collect::<Result<Vec<_>>>()?;
            single(Axiom::MatchingRb(values))
        }
        "integro-differential" => integro_differential_suite(ring, samples, seed).map(Some),
        "divided-powers" => Ok(Some(divided_power_laws(ring, samples, seed).reports)),
        "exp-log" => Ok(Some(exp_log_laws(ring, samples, seed).reports)),
        "exponentiation" => Ok(Some(exponentiation_laws(ring, samples, seed).reports)),
        "composition" => Ok(Some(composition_laws(ring, samples, seed).reports)),
        "continuity" => Ok(Some(continuity_laws(ring, samples, seed).reports)),
        "metric" => Ok(Some(metric_laws(ring, samples, seed).reports)),
        "calculus" => Ok(Some(suites_of(vec![
            divided_power_laws(ring, samples, seed),
            exp_log_laws(ring, samples, seed),
            exponentiation_laws(ring, samples, seed),
            composition_laws(ring, samples, seed),
            continuity_laws(ring, samples, seed),
            metric_laws(ring, samples, seed),
        ]))),
        _ => Ok(None),
    }
}

fn specific_check(cli: &Cli, ring: &AnyRing, suite: &str) -> Result<Option<Vec<AxiomReport>>> {
    let (samples, seed, n) = (cli.samples, cli.seed, cli.trunc);
    let unsupported = || Error::UnsupportedContext(format!("suite {suite} is not available for ring {}", cli.ring));
    Ok(Some(match (suite, ring) {
        ("gs-homomorphism", AnyRing::Set(_)) => vec![check_gs_homomorphism(n, samples, seed, &GsMode::Plain)?],
        ("gs-homomorphism", AnyRing::Loc(r)) => {
            vec![check_gs_homomorphism(n, samples, seed, &GsMode::Modified(r.context().k().clone()))?]
        }
        ("joyal-series", AnyRing::Set(r)) => vec![check_joyal_series(r.tower(), samples, seed)?],
        ("modified", AnyRing::Loc(r)) => r.context().check_modified_axioms(samples, seed),
        ("gs-homomorphism" | "joyal-series" | "modified", _) => return Err(unsupported()),
        _ => return Ok(None),
    }))
}

fn run_check(cli: &Cli, ring: &AnyRing, suite: &str, lambda: &str, omegas: &[String]) -> Result<Outcome> {
    if suite == "list" {
        let names: Vec<&str> = SUITES.iter().copied().filter(|s| *s != "list").collect();
        return Ok(Outcome::ok(names.join("\n"), json!(names)));
    }
    let lambda = parse_weight(lambda)?;
    let (samples, seed) = (cli.samples, cli.seed);
    let reports = if suite == "all" {
        let mut all = Vec::new();
        for s in ["integro-differential", "calculus"] {
            all.extend(with_ring!(ring, r => generic_check(r, s, &lambda, omegas, samples, seed))?.unwrap_or_default());
        }
        let extra: &[&str] = match ring {
            AnyRing::Set(_) => &["matching-rb", "gs-homomorphism", "joyal-series"],
            AnyRing::Linear(_) => &["matching-rb"],
            AnyRing::Loc(_) => &["matching-rb", "gs-homomorphism", "modified"],
        };
        for s in extra {
            let generic = with_ring!(ring, r => generic_check(r, s, &lambda, omegas, samples, seed))?;
            match generic {
                Some(r) => all.extend(r),
                None => all.extend(specific_check(cli, ring, s)?.unwrap_or_default()),
            }
        }
        all
    } else if let Some(r) = with_ring!(ring, r => generic_check(r, suite, &lambda, omegas, samples, seed))? {
        r
    } else if let Some(r) = specific_check(cli, ring, suite)? {
        r
    } else {
        return Err(Error::Syntax { position: 0, message: format!("unknown suite '{suite}'; try `check list`") });
    };
    let holds = reports.iter().all(|r| r.holds);
    let ring_name = with_ring!(ring, r => r.name());
    let mut text: Vec<String> = reports.iter().map(|r| r.to_string()).collect();
    text.push(if holds { "holds".into() } else { "fails".into() });
    Ok(Outcome {
        code: if holds { EXIT_OK } else { EXIT_FAILURE },
        text: text.join("\n"),
        json: json!({ "suite": suite, "ring": ring_name, "holds": holds, "reports": reports }),
    })
}

fn run_oracle(src: &str, upto: usize, split: Option<&str>) -> Result<Outcome> {
    let expr = ConcreteExpr::parse(src)?;
    if let Some(split) = split {
        let parts: Vec<&str> = split.split(',').map(str::trim).collect();
        let bad = || Error::Syntax { position: 0, message: format!("expected p,q in --split, got '{split}'") };
        let [p, q] = parts[..] else { return Err(bad()) };
        let (p, q): (usize, usize) = (p.parse().map_err(|_| bad())?, q.parse().map_err(|_| bad())?);
        let ok = check_product_split(&expr, p, q)?;
        return Ok(Outcome {
            code: if ok { EXIT_OK } else { EXIT_FAILURE },
            text: format!("{expr}: |F[{}]| = |F[{p}]|*|F[{q}]| is {ok}", p + q),
            json: json!({ "expr": expr.to_string(), "p": p, "q": q, "split": ok }),
        });
    }
    let report = verify_counts(&expr, upto)?;
    Ok(Outcome {
        code: if report.pass { EXIT_OK } else { EXIT_FAILURE },
        text: report.to_string(),
        json: serde_json::to_value(&report).expect("report serializes"),
    })
}

fn dispatch(cli: &Cli, input: &mut dyn BufRead, out: &mut dyn Write) -> Outcome {
    let result = (|| -> Result<Outcome> {
        match &cli.command {
            Command::Oracle { expr, upto, split } => run_oracle(expr, *upto, split.as_deref()),
            Command::Eval { expr } => run_eval(&build_ring(cli)?, expr, &Bindings::default()),
            Command::Series { expr } => run_series(&build_ring(cli)?, expr),
            Command::Check { suite, lambda, omegas } => run_check(cli, &build_ring(cli)?, suite, lambda, omegas),
            Command::Repl => repl(cli, &build_ring(cli)?, input, out),
            Command::Batch => batch(cli, input, out),
        }
    })();
    result.unwrap_or_else(|e| Outcome::error(&e))
}

fn emit(cli: &Cli, outcome: &Outcome, out: &mut dyn Write) {
    // repl and batch have already written their lines
    if outcome.text.is_empty() && outcome.json.is_null() {
        return;
    }
    let line = match cli.format {
        Format::Text => outcome.text.clone(),
        Format::Json => json!({
            "command": cli.command.name(),
            "trunc": cli.trunc,
            "seed": cli.seed,
            "result": outcome.json,
        })
        .to_string(),
    };
    if !line.is_empty() {
        let _ = writeln!(out, "{line}");
    }
}

/// Runs one parsed invocation and returns its exit code.
pub fn run(cli: &Cli, input: &mut dyn BufRead, out: &mut dyn Write) -> i32 {
    let outcome = dispatch(cli, input, out);
    emit(cli, &outcome, out);
    outcome.code
}

fn repl(cli: &Cli, ring: &AnyRing, input: &mut dyn BufRead, out: &mut dyn Write) -> Result<Outcome> {
    let interactive = std::io::stdin().is_terminal();
    let mut bindings = Bindings::default();
    let mut code = EXIT_OK;
    let mut line = String::new();
    loop {
        if interactive {
            let _ = write!(out, "> ");
            let _ = out.flush();
        }
        line.clear();
        if input.read_line(&mut line).map_err(|e| Error::Eval(e.to_string()))? == 0 {
            break;
        }
        let src = line.trim();
        if src.is_empty() || src.starts_with('#') {
            continue;
        }
        if matches!(src, ":q" | ":quit" | "quit" | "exit") {
            break;
        }
        let outcome = match src.strip_prefix("let ") {
            Some(rest) => (|| {
                let (name, body) = rest
                    .split_once('=')
                    .ok_or_else(|| Error::Syntax { position: 4, message: "expected 'let name = expr'".into() })?;
                let name = name.trim();
                let closed = bindings.bind(name, &Expr::parse(body)?)?;
                let o = run_eval(ring, &closed.to_string(), &Bindings::default())?;
                Ok(Outcome { text: format!("{name} = {}", o.text), ..o })
            })(),
            None => run_eval(ring, src, &bindings),
        }
        .unwrap_or_else(|e| Outcome::error(&e));
        code = code.max(outcome.code);
        let shown = Cli { command: Command::Eval { expr: src.to_string() }, ..cli.clone() };
        emit(&shown, &outcome, out);
    }
    Ok(Outcome { code, text: String::new(), json: Json::Null })
}

fn batch(cli: &Cli, input: &mut dyn BufRead, out: &mut dyn Write) -> Result<Outcome> {
    let mut code = EXIT_OK;
    let globals = [
        format!("--trunc={}", cli.trunc),
        format!("--seed={}", cli.seed),
        format!("--samples={}", cli.samples),
        format!("--format={}", if cli.format == Format::Json { "json" } else { "text" }),
        format!("--ring={}", cli.ring),
        format!("--tower={}", cli.tower),
    ];
    let mut line = String::new();
    loop {
        line.clear();
        if input.read_line(&mut line).map_err(|e| Error::Eval(e.to_string()))? == 0 {
            break;
        }
        let src = line.trim();
        if src.is_empty() || src.starts_with('#') {
            continue;
        }
        let Some(words) = shlex::split(src) else {
            let _ = writeln!(out, "error: unbalanced quotes in '{src}'");
            code = code.max(EXIT_USAGE);
            continue;
        };
        let args = std::iter::once("species-idr".to_string()).chain(globals.iter().cloned()).chain(words);
        match Cli::try_parse_from(args) {
            Ok(sub) if matches!(sub.command, Command::Repl | Command::Batch) => {
                let _ = writeln!(out, "error: {} is not allowed inside batch", sub.command.name());
                code = code.max(EXIT_USAGE);
            }
            Ok(sub) => {
                let mut empty = std::io::empty();
                code = code.max(run(&sub, &mut empty, out));
            }
            Err(e) => {
                let msg = e.to_string();
                let first = msg.lines().next().unwrap_or_default();
                let _ = writeln!(out, "error: {}", first.trim_start_matches("error: "));
                code = code.max(EXIT_USAGE);
            }
        }
    }
    Ok(Outcome { code, text: String::new(), json: Json::Null })
}
