use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use shdisc::axioms::Evidence;
use shdisc::discounting::EPS_RATIO;
use shdisc::elicitation::BiasHorizon;
use shdisc::fitlab::{fit_weights, generate, FeasibilityProblem, Fit, GeneratorSpec};
use shdisc::representation::EPS_INDIFF;
use shdisc::schema::{self, Document, Domain};
use shdisc::{
    audit, classify, recover_full, AxiomId, Classification, ElicitationConfig, Error, Horizon, PreferenceOracle,
    Profile, Recovery, Result, Stream, Verdict, WeightProfile, Weights,
};

mod text;

#[derive(Parser, Debug)]
#[command(name = "shdisc", version, about = "Semi-hyperbolic discounting toolkit")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    opts: Opts,
}

#[derive(Args, Debug, Clone)]
struct Opts {
    #[arg(long, value_enum, default_value_t = Format::Text, global = true)]
    format: Format,
    /// Indifference band for simulated oracles.
    #[arg(long, default_value_t = EPS_INDIFF, global = true)]
    eps_indiff: f64,
    /// Tolerance for equal weight ratios when classifying.
    #[arg(long, default_value_t = EPS_RATIO, global = true)]
    eps_ratio: f64,
    /// Bisection tolerance for elicitation.
    #[arg(long, default_value_t = 1e-9, global = true)]
    bisect_tol: f64,
    #[arg(long, global = true)]
    horizon_cap: Option<usize>,
    /// Comma-separated mixture weights, e.g. `0,0.25,0.5,0.75,1`.
    #[arg(long, value_delimiter = ',', global = true)]
    lambda_grid: Option<Vec<f64>>,
    #[arg(long, global = true)]
    seed: Option<u64>,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
enum Format {
    Text,
    Json,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Evaluate streams under a representation.
    Eval {
        #[arg(long)]
        input: PathBuf,
    },
    /// Compare stream pairs, or replay a witness.
    Compare {
        #[arg(long)]
        input: PathBuf,
    },
    /// Check an axiom profile against a representation or a relation.
    Audit {
        #[arg(long)]
        input: PathBuf,
        /// e.g. finite-exp, finite-sh2, infinite-sh3, aa.
        #[arg(long)]
        profile: Option<String>,
    },
    /// Recover utility and discount factors from a simulated oracle.
    Elicit {
        #[arg(long)]
        input: PathBuf,
        /// Bias horizon: `auto` or a positive integer.
        #[arg(long = "T", default_value = "auto")]
        t: String,
    },
    /// Classify a finite weight sequence.
    Classify {
        #[arg(long)]
        input: PathBuf,
        /// Also require strictly increasing betas.
        #[arg(long)]
        strict_betas: bool,
    },
    /// Fit weights to a tabulated relation.
    Fit {
        #[arg(long)]
        input: PathBuf,
    },
    /// Sample a model that violates one axiom, or none.
    Generate {
        #[arg(long)]
        target: Option<String>,
        #[arg(long = "T")]
        t: Option<usize>,
    },
}

struct Report {
    json: Value,
    text: String,
    violation: bool,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(r) => {
            match cli.opts.format {
                Format::Json => println!("{}", serde_json::to_string_pretty(&r.json).expect("serialisable")),
                Format::Text => print!("{}", r.text),
            }
            ExitCode::from(if r.violation { 1 } else { 0 })
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}

fn read(path: &PathBuf) -> Result<Document> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::Argument(format!("cannot read {}: {e}", path.display())))?;
    Document::parse(&text)
}

fn run(cli: &Cli) -> Result<Report> {
    let o = &cli.opts;
    match &cli.command {
        Command::Eval { input } => eval(&read(input)?),
        Command::Compare { input } => compare(&read(input)?, o),
        Command::Audit { input, profile } => run_audit(&read(input)?, profile.as_deref(), o),
        Command::Elicit { input, t } => elicit(&read(input)?, t, o),
        Command::Classify { input, strict_betas } => run_classify(&read(input)?, *strict_betas, o),
        Command::Fit { input } => fit(&read(input)?),
        Command::Generate { target, t } => run_generate(target.as_deref(), *t, o),
    }
}

fn eval(doc: &Document) -> Result<Report> {
    let d = doc.domain()?;
    let rep = d.representation(Document::require(&doc.representation, "representation")?)?;
    let streams = d.streams(Document::require(&doc.streams, "streams")?)?;
    let values = streams.iter().map(|s| rep.evaluate(s)).collect::<Result<Vec<_>>>()?;
    let text = values.iter().enumerate().map(|(i, v)| format!("s{i}\t{v}\n")).collect();
    Ok(Report { json: json!({ "schema": schema::SCHEMA, "values": values }), text, violation: false })
}

/// Evidence is the representation under `--eps-indiff`, else the relation.
fn evidence(doc: &Document, d: &Domain, eps: f64) -> Result<Box<dyn Evidence>> {
    match (&doc.representation, &doc.relation) {
        (Some(r), None) => Ok(Box::new(PreferenceOracle::with_band(d.representation(r)?, eps))),
        (None, Some(r)) => Ok(Box::new(d.relation(r)?)),
        (Some(_), Some(_)) => Err(arg_err("give either `representation` or `relation`, not both")),
        (None, None) => Err(arg_err("missing field `representation` or `relation`")),
    }
}

fn compare(doc: &Document, o: &Opts) -> Result<Report> {
    let d = doc.domain()?;
    let ev = evidence(doc, &d, o.eps_indiff)?;
    let mut pairs: Vec<(Stream, Stream, Option<Verdict>)> = Vec::new();
    if let Some(ps) = &doc.pairs {
        for (x, y) in ps {
            pairs.push((d.stream(x)?, d.stream(y)?, None));
        }
    }
    if let Some(w) = &doc.witness {
        pairs.extend(d.witness(w)?.into_iter().map(|(x, y, v)| (x, y, Some(v))));
    }
    if pairs.is_empty() {
        return Err(arg_err("missing field `pairs` or `witness`"));
    }
    let mut rows = Vec::new();
    let mut text = String::new();
    let mut mismatches = 0;
    for (i, (x, y, expected)) in pairs.iter().enumerate() {
        let got = ev.query(x, y)?;
        let sym = got.map(Verdict::symbol);
        let ok = expected.map(|e| got == Some(e));
        if ok == Some(false) {
            mismatches += 1;
        }
        rows.push(json!({ "verdict": sym, "expected": expected.map(Verdict::symbol), "matches": ok }));
        text.push_str(&format!("pair {i}: {}", sym.unwrap_or("?")));
        if let Some(e) = expected {
            text.push_str(&format!(" (recorded {}, {})", e.symbol(), if ok == Some(true) { "ok" } else { "MISMATCH" }));
        }
        text.push('\n');
    }
    let json = json!({ "schema": schema::SCHEMA, "comparisons": rows, "mismatches": mismatches });
    Ok(Report { json, text, violation: mismatches > 0 })
}

fn profile(doc: &Document, flag: Option<&str>) -> Result<Profile> {
    let raw = flag.or(doc.profile.as_deref()).ok_or_else(|| arg_err("missing --profile"))?;
    let lower = raw.trim().to_ascii_lowercase();
    if lower.ends_with("sh") {
        let t = doc.testbed.as_ref().and_then(|t| t.t).ok_or_else(|| {
            arg_err(format!("profile `{raw}` needs a bias horizon, e.g. `{raw}2`, or testbed `T`"))
        })?;
        return format!("{lower}{t}").parse();
    }
    raw.parse()
}

fn run_audit(doc: &Document, flag: Option<&str>, o: &Opts) -> Result<Report> {
    let d = doc.domain()?;
    let p = profile(doc, flag)?;
    let ev = evidence(doc, &d, o.eps_indiff)?;
    let tbj = doc.testbed.as_ref();
    let horizon = ev.backing().map(|r| r.horizon());
    let n = tbj
        .and_then(|t| t.n)
        .or(doc.n)
        .or(match horizon {
            Some(Horizon::Finite(n)) => Some(n),
            _ => None,
        })
        .or_else(|| ev.streams().and_then(|s| s.first()).and_then(Stream::len))
        .ok_or_else(|| arg_err("missing field `testbed.n`"))?;
    let mut tb = d.testbed(tbj, n)?;
    if let Some(g) = &o.lambda_grid {
        tb = tb.with_grid(g)?;
    }
    if let Some(h) = o.horizon_cap {
        tb = tb.with_horizon_cap(h)?;
    }
    if let Some(s) = o.seed {
        tb = tb.with_seed(s);
    }
    let report = audit(ev.as_ref(), &tb, p)?;
    let anchor = d.anchor.as_ref();
    Ok(Report {
        json: schema::report_json(&report, anchor),
        text: text::report(&report, anchor),
        violation: !report.all_pass(),
    })
}

fn elicit(doc: &Document, t: &str, o: &Opts) -> Result<Report> {
    let d = doc.domain()?;
    let rep = d.representation(Document::require(&doc.representation, "representation")?)?;
    let horizon = match t {
        "auto" | "AUTO" => BiasHorizon::Auto,
        k => BiasHorizon::Fixed(
            k.parse().map_err(|_| arg_err(format!("--T must be `auto` or a positive integer, got `{k}`")))?,
        ),
    };
    let n = doc
        .n
        .or(doc.testbed.as_ref().and_then(|t| t.n))
        .or(match rep.horizon() {
            Horizon::Finite(n) => Some(n),
            Horizon::Infinite => None,
        })
        .ok_or_else(|| arg_err("missing field `n` (periods to probe)"))?;
    let mut cfg = ElicitationConfig::new(d.prizes.clone(), d.anchor()?.clone(), n);
    cfg.horizon = horizon;
    cfg.infinite = rep.horizon() == Horizon::Infinite;
    cfg.tol = o.bisect_tol;
    cfg.seed = o.seed.unwrap_or(0);
    let oracle = PreferenceOracle::with_band(rep, o.eps_indiff);
    let res = recover_full(&oracle, &cfg)?;
    Ok(Report {
        json: schema::elicitation_json(&res, &cfg),
        text: text::elicitation(&res, &cfg),
        violation: matches!(res.recovery, Recovery::Rejected { .. }),
    })
}

fn run_classify(doc: &Document, strict: bool, o: &Opts) -> Result<Report> {
    let w = match (&doc.weights, &doc.representation) {
        (Some(w), _) => WeightProfile::new(w.clone())?,
        (None, Some(r)) => {
            let rep = doc.domain()?.representation(r)?;
            match (rep.weights(), rep.horizon()) {
                (Weights::Profile(p), _) => p.clone(),
                (_, Horizon::Finite(n)) => WeightProfile::new(rep.weights().upto(n))?,
                _ => return Err(arg_err("classify needs finitely many weights")),
            }
        }
        _ => return Err(arg_err("missing field `weights`")),
    };
    let c = classify(&w, o.eps_ratio);
    let mut json = schema::classification_json(&c);
    let mut text = text::classification(&c);
    let mut violation = matches!(c, Classification::None { .. });
    if strict {
        let why = c.model().and_then(|m| m.check_strict().err());
        if let Some(e) = &why {
            text.push_str(&format!("not strictly increasing: {e}\n"));
            violation = true;
        }
        json["strict_betas"] = json!(why.is_none() && c.model().is_some());
    }
    Ok(Report { json, text, violation })
}

fn fit(doc: &Document) -> Result<Report> {
    let d = doc.domain()?;
    let u = match (&doc.u, &doc.representation) {
        (Some(u), _) => d.utility(u)?,
        (None, Some(r)) => d.utility(&r.u)?,
        _ => return Err(arg_err("missing field `u`")),
    };
    let relation = d.relation(Document::require(&doc.relation, "relation")?)?;
    let p = FeasibilityProblem::new(relation, u);
    let f = fit_weights(&p)?;
    let anchor = d.anchor.as_ref();
    Ok(Report {
        json: schema::fit_json(&f, &p.relation, anchor),
        text: text::fit(&f, &p.relation, anchor),
        violation: matches!(f, Fit::Infeasible { .. }),
    })
}

fn run_generate(target: Option<&str>, t: Option<usize>, o: &Opts) -> Result<Report> {
    let seed = o.seed.ok_or_else(|| arg_err("generate needs --seed"))?;
    let target = match target {
        None | Some("none") => None,
        Some(a) => Some(a.parse::<AxiomId>()?),
    };
    let mut spec = GeneratorSpec::new(target, seed);
    if let Some(t) = t {
        spec = spec.with_t(t);
    }
    if let Some(h) = o.horizon_cap {
        spec.horizon_cap = h;
    }
    let g = generate(&spec)?;
    let json = schema::generated_json(&g, seed)?;
    let text = text::generated(&g);
    Ok(Report { json, text, violation: false })
}

fn arg_err(msg: impl Into<String>) -> Error {
    Error::Argument(msg.into())
}
