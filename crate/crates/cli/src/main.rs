//! Experiment runner: deterministic, seedable sweeps over the simulation
//! and bound modules, with CSV/JSON output. Exit codes: 0 success,
//! 1 verification failure, 2 usage error, 3 capacity error.

use std::fmt::Write as _;
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use rqc_moments::bounds::{
    self, BoundParams, LogBase, MomentVariant,
};
use rqc_moments::dense_sim::{mc_moment_rqc, StateVector};
use rqc_moments::f2::{enumerate_group, exact_walk_distribution, tv_distance, walk_spectral_gap};
use rqc_moments::fourier::{
    conjecture1_estimate, for_each_sorted_tuple, low_support_fraction, parseval_check,
    SampleMode, TuplePair,
};
use rqc_moments::phase_walk::{exact_moment_ideal, ideal_spectrum, mc_moment_ideal};
use rqc_moments::{Error as CoreError};

const VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Parser)]
#[command(name = "rqc-moments", version, about = "Random-circuit moment laboratory")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
enum Format {
    Csv,
    Json,
}

/// Flags shared by every subcommand. Flags override config-file values;
/// config-file values override built-in defaults.
#[derive(Args, Debug, Clone)]
struct Common {
    /// Qubit count
    #[arg(long)]
    n: Option<usize>,
    /// Depth / gate count (maximum of the sweep where applicable)
    #[arg(long)]
    d: Option<u64>,
    /// Moment order
    #[arg(long)]
    t: Option<u32>,
    /// Monte Carlo trials
    #[arg(long)]
    trials: Option<u64>,
    /// Master seed; per-trial streams derive from (seed, trial, stream)
    #[arg(long)]
    seed: Option<u64>,
    /// Output path (stdout when omitted)
    #[arg(long)]
    output: Option<PathBuf>,
    /// Output format
    #[arg(long, value_enum)]
    format: Option<Format>,
    /// Worker threads (output is identical regardless)
    #[arg(long)]
    workers: Option<usize>,
    /// JSON config file with the same keys as the flags
    #[arg(long)]
    config: Option<PathBuf>,
}

/// Config-file schema; unknown keys are rejected.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct FileConfig {
    n: Option<usize>,
    d: Option<u64>,
    t: Option<u32>,
    trials: Option<u64>,
    seed: Option<u64>,
    format: Option<Format>,
    workers: Option<usize>,
    d_step: Option<u64>,
    m_max: Option<u64>,
    k_max: Option<u64>,
    k_step: Option<u64>,
    c: Option<f64>,
    threshold: Option<u64>,
    delta: Option<f64>,
}

#[derive(Subcommand)]
enum Command {
    /// Depth sweep of random-circuit moments against the closed-form bound
    Moments {
        #[command(flatten)]
        common: Common,
        /// Sweep step in d
        #[arg(long)]
        d_step: Option<u64>,
    },
    /// Exact vs Monte Carlo moments of the ideal auxiliary walk
    IdealWalk {
        #[command(flatten)]
        common: Common,
        /// Largest rotation count m
        #[arg(long)]
        m_max: Option<u64>,
    },
    /// Exhaustive Parseval sweep and low-support counting
    Fourier {
        #[command(flatten)]
        common: Common,
        /// Support threshold A for the counting bound (skipped when absent)
        #[arg(long)]
        threshold: Option<u64>,
    },
    /// Monte Carlo tail estimate for the open low-support conjecture
    Conjecture {
        #[command(flatten)]
        common: Common,
        /// Polynomial exponent c in the threshold 2^n / n^c
        #[arg(long)]
        c: Option<f64>,
    },
    /// Group-walk mixing curve and spectral gap
    F2mix {
        #[command(flatten)]
        common: Common,
        /// Largest step count k
        #[arg(long)]
        k_max: Option<u64>,
        /// Sweep step in k
        #[arg(long)]
        k_step: Option<u64>,
    },
    /// Eigenvalue census of the ideal walk's moment operator
    Spectrum {
        #[command(flatten)]
        common: Common,
    },
    /// Closed-form bound formulas
    Bounds {
        #[command(flatten)]
        common: Common,
        /// Formula to evaluate
        #[arg(long, value_enum)]
        formula: Formula,
        /// Error parameter delta
        #[arg(long)]
        delta: Option<f64>,
        /// Use natural log for the unsubscripted logs (default: base 2)
        #[arg(long)]
        natural_log: bool,
    },
    /// Run the full acceptance suite; nonzero exit on any failure
    Verify {
        #[command(flatten)]
        common: Common,
    },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
enum Formula {
    Thm1Unitary,
    Thm1State,
    Thm2,
    Theorem3Eq8,
    Theorem3Eq9,
    Cor1Eq8,
    Cor1Eq9,
    Epsnet,
    DeepSplitting,
    BinomialMixing,
    CouponCollector,
    Fidelity,
}

/// Fully resolved run parameters, echoed into every output.
#[derive(Debug, Clone, Serialize)]
struct Resolved {
    n: usize,
    d: u64,
    t: u32,
    trials: u64,
    seed: u64,
    /// Scheduling detail only; skipped in the config echo so output bytes
    /// do not depend on the worker count.
    #[serde(skip)]
    workers: usize,
    d_step: u64,
    m_max: u64,
    k_max: u64,
    k_step: u64,
    c: f64,
    threshold: Option<u64>,
    delta: f64,
}

fn resolve(common: &Common) -> Result<(Resolved, Format, Option<PathBuf>, FileConfig), CliError> {
    let file: FileConfig = match &common.config {
        None => FileConfig::default(),
        Some(path) => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| CliError::Usage(format!("cannot read config {path:?}: {e}")))?;
            serde_json::from_str(&text)
                .map_err(|e| CliError::Usage(format!("bad config {path:?}: {e}")))?
        }
    };
    let resolved = Resolved {
        n: common.n.or(file.n).unwrap_or(2),
        d: common.d.or(file.d).unwrap_or(100),
        t: common.t.or(file.t).unwrap_or(1),
        trials: common.trials.or(file.trials).unwrap_or(1000),
        seed: common.seed.or(file.seed).unwrap_or(0),
        workers: common.workers.or(file.workers).unwrap_or(0),
        d_step: file.d_step.unwrap_or(10),
        m_max: file.m_max.unwrap_or(10),
        k_max: file.k_max.unwrap_or(100),
        k_step: file.k_step.unwrap_or(10),
        c: file.c.unwrap_or(2.0),
        threshold: file.threshold,
        delta: file.delta.unwrap_or(0.1),
    };
    let format = common.format.or(file.format).unwrap_or(Format::Json);
    Ok((resolved, format, common.output.clone(), file))
}

enum CliError {
    Usage(String),
    Capacity(String),
    Verification,
    /// Verification failure carrying the report so it can still be emitted.
    VerificationWith(Box<RunRecord>),
    Io(String),
}

impl From<CoreError> for CliError {
    fn from(e: CoreError) -> Self {
        match e {
            CoreError::Capacity(m) => CliError::Capacity(m),
            CoreError::Input(m) | CoreError::Domain(m) => CliError::Usage(m),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e.to_string())
    }
}

/// One output row: named values plus a provenance tag.
struct Row {
    provenance: &'static str,
    values: Vec<(&'static str, Value)>,
}

struct RunRecord {
    command: &'static str,
    config: Value,
    seed: u64,
    columns: Vec<&'static str>,
    rows: Vec<Row>,
    /// Extra scalar results (gaps, counts) outside the row sweep.
    summary: Vec<(&'static str, Value)>,
}

fn f(v: f64) -> Value {
    // shortest-roundtrip formatting keeps output bytes stable
    json!(v)
}

impl RunRecord {
    fn render_json(&self) -> String {
        let rows: Vec<Value> = self
            .rows
            .iter()
            .map(|r| {
                let mut obj = serde_json::Map::new();
                for (k, v) in &r.values {
                    obj.insert((*k).into(), v.clone());
                }
                obj.insert("provenance".into(), json!(r.provenance));
                Value::Object(obj)
            })
            .collect();
        let mut summary = serde_json::Map::new();
        for (k, v) in &self.summary {
            summary.insert((*k).into(), v.clone());
        }
        let record = json!({
            "version": VERSION,
            "command": self.command,
            "config": self.config,
            "seed": self.seed,
            "summary": Value::Object(summary),
            "rows": rows,
        });
        let mut s = serde_json::to_string_pretty(&record).unwrap();
        s.push('\n');
        s
    }

    fn render_csv(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "# version={VERSION}");
        let _ = writeln!(out, "# command={}", self.command);
        let _ = writeln!(out, "# seed={}", self.seed);
        let _ = writeln!(out, "# config={}", self.config);
        for (k, v) in &self.summary {
            let _ = writeln!(out, "# {k}={v}");
        }
        let _ = writeln!(out, "{},provenance", self.columns.join(","));
        for r in &self.rows {
            let vals: Vec<String> = self
                .columns
                .iter()
                .map(|c| {
                    r.values
                        .iter()
                        .find(|(k, _)| k == c)
                        .map(|(_, v)| match v {
                            Value::String(s) => s.clone(),
                            other => other.to_string(),
                        })
                        .unwrap_or_default()
                })
                .collect();
            let _ = writeln!(out, "{},{}", vals.join(","), r.provenance);
        }
        out
    }

    fn emit(&self, format: Format, output: &Option<PathBuf>) -> Result<(), CliError> {
        let text = match format {
            Format::Json => self.render_json(),
            Format::Csv => self.render_csv(),
        };
        match output {
            None => {
                print!("{text}");
                Ok(())
            }
            Some(path) => {
                std::fs::write(path, text)?;
                Ok(())
            }
        }
    }
}

fn config_echo(r: &Resolved) -> Value {
    serde_json::to_value(r).unwrap()
}

fn cmd_moments(r: &Resolved) -> Result<RunRecord, CliError> {
    let psi = StateVector::zero_state(r.n)?;
    let step = r.d_step.max(1);
    let mut rows = Vec::new();
    let mut d = 0u64;
    loop {
        let est = mc_moment_rqc(r.n, d, r.t, &psi, r.trials, r.seed)?;
        let eq8 = bounds::theorem3_rhs(r.n as u32, d as f64, r.t as f64, MomentVariant::Eq8)?;
        let eq9 = bounds::theorem3_rhs(r.n as u32, d as f64, r.t as f64, MomentVariant::Eq9)?;
        rows.push(Row {
            provenance: "monte-carlo",
            values: vec![
                ("n", json!(r.n)),
                ("d", json!(d)),
                ("t", json!(r.t)),
                ("estimate", f(est.estimate)),
                ("stderr", f(est.stderr)),
                ("rhs_eq8", f(eq8.value)),
                ("rhs_eq9", f(eq9.value)),
                ("vacuous", json!(eq8.vacuous)),
            ],
        });
        if d >= r.d {
            break;
        }
        d = (d + step).min(r.d);
    }
    Ok(RunRecord {
        command: "moments",
        config: config_echo(r),
        seed: r.seed,
        columns: vec!["n", "d", "t", "estimate", "stderr", "rhs_eq8", "rhs_eq9", "vacuous"],
        rows,
        summary: vec![],
    })
}

fn cmd_ideal_walk(r: &Resolved) -> Result<RunRecord, CliError> {
    let mut rows = Vec::new();
    for m in 0..=r.m_max {
        let exact = exact_moment_ideal(r.n, m, r.t)?;
        let mc = mc_moment_ideal(r.n, m, r.t, r.trials, r.seed)?;
        rows.push(Row {
            provenance: "monte-carlo",
            values: vec![
                ("n", json!(r.n)),
                ("t", json!(r.t)),
                ("m", json!(m)),
                ("exact", f(exact)),
                ("estimate", f(mc.estimate)),
                ("stderr", f(mc.stderr)),
            ],
        });
    }
    Ok(RunRecord {
        command: "ideal-walk",
        config: config_echo(r),
        seed: r.seed,
        columns: vec!["n", "t", "m", "exact", "estimate", "stderr"],
        rows,
        summary: vec![],
    })
}

fn cmd_fourier(r: &Resolved) -> Result<RunRecord, CliError> {
    let base = 1u32 << r.n;
    let t = r.t as usize;
    let mut tuples: Vec<Vec<u32>> = Vec::new();
    for_each_sorted_tuple(base, t, |tup, _| tuples.push(tup.to_vec()));
    let mut checked = 0u64;
    let mut violations = 0u64;
    let mut min_margin = f64::MAX;
    for a in &tuples {
        for b in &tuples {
            let pair = TuplePair::from_raw(r.n, a, b)?;
            if pair.reduced_len() == 0 {
                continue;
            }
            let chk = parseval_check(&pair)?;
            checked += 1;
            if !chk.holds {
                violations += 1;
            }
            min_margin = min_margin.min(chk.prob - chk.bound);
        }
    }
    let mut summary = vec![
        ("pairs_checked", json!(checked)),
        ("violations", json!(violations)),
        ("min_margin", f(min_margin)),
    ];
    let mut rows = Vec::new();
    if let Some(a) = r.threshold {
        let rep = low_support_fraction(r.n, t, a, SampleMode::Exhaustive)?;
        rows.push(Row {
            provenance: "exact",
            values: vec![
                ("n", json!(r.n)),
                ("t", json!(t)),
                ("threshold", json!(a)),
                ("fraction", f(rep.fraction)),
                ("paper_bound", f(rep.paper_bound)),
                ("bound_vacuous", json!(rep.paper_bound_vacuous)),
            ],
        });
    }
    summary.push(("provenance", json!("exact")));
    Ok(RunRecord {
        command: "fourier",
        config: config_echo(r),
        seed: r.seed,
        columns: vec!["n", "t", "threshold", "fraction", "paper_bound", "bound_vacuous"],
        rows,
        summary,
    })
}

fn cmd_conjecture(r: &Resolved) -> Result<RunRecord, CliError> {
    let rep = conjecture1_estimate(r.n, r.t as usize, r.c, r.trials, r.seed)?;
    let rows = vec![Row {
        provenance: "monte-carlo",
        values: vec![
            ("n", json!(r.n)),
            ("t", json!(r.t)),
            ("c", f(r.c)),
            ("threshold", f(rep.threshold)),
            ("tail_estimate", f(rep.tail_prob_estimate)),
            ("ci_low", f(rep.ci_low)),
            ("ci_high", f(rep.ci_high)),
            ("support_min", json!(rep.support_min)),
            ("support_median", json!(rep.support_median)),
            ("support_max", json!(rep.support_max)),
        ],
    }];
    Ok(RunRecord {
        command: "conjecture",
        config: config_echo(r),
        seed: r.seed,
        columns: vec![
            "n", "t", "c", "threshold", "tail_estimate", "ci_low", "ci_high",
            "support_min", "support_median", "support_max",
        ],
        rows,
        summary: vec![],
    })
}

fn cmd_f2mix(r: &Resolved) -> Result<RunRecord, CliError> {
    let table = enumerate_group(r.n)?;
    let mut rows = Vec::new();
    let step = r.k_step.max(1);
    let mut k = 0u64;
    loop {
        let dist = exact_walk_distribution(&table, k);
        let tv = tv_distance(&table, &dist);
        rows.push(Row {
            provenance: "exact",
            values: vec![
                ("n", json!(r.n)),
                ("k", json!(k)),
                ("tv", f(tv.tv)),
                ("bound", f(tv.bound)),
                ("bound_vacuous", json!(tv.bound_vacuous)),
            ],
        });
        if k >= r.k_max {
            break;
        }
        k = (k + step).min(r.k_max);
    }
    let (second, gap) = walk_spectral_gap(&table)?;
    Ok(RunRecord {
        command: "f2mix",
        config: config_echo(r),
        seed: r.seed,
        columns: vec!["n", "k", "tv", "bound", "bound_vacuous"],
        rows,
        summary: vec![
            ("group_size", json!(table.len())),
            ("second_singular_value", f(second)),
            ("spectral_gap", f(gap)),
        ],
    })
}

fn cmd_spectrum(r: &Resolved) -> Result<RunRecord, CliError> {
    let spec = ideal_spectrum(r.n, r.t)?;
    let rows: Vec<Row> = spec
        .eigenvalues
        .iter()
        .map(|&(ev, mult)| Row {
            provenance: "exact",
            values: vec![
                ("n", json!(r.n)),
                ("t", json!(r.t)),
                ("eigenvalue", f(ev)),
                ("multiplicity", json!(mult.to_string())),
            ],
        })
        .collect();
    Ok(RunRecord {
        command: "spectrum",
        config: config_echo(r),
        seed: r.seed,
        columns: vec!["n", "t", "eigenvalue", "multiplicity"],
        rows,
        summary: vec![
            ("top", f(spec.top)),
            (
                "second",
                spec.second.map(f).unwrap_or(Value::Null),
            ),
            (
                "min_nonzero_support",
                spec.min_nonzero_support
                    .map(|s| json!(s))
                    .unwrap_or(Value::Null),
            ),
        ],
    })
}

fn cmd_bounds(
    r: &Resolved,
    formula: Formula,
    natural_log: bool,
) -> Result<RunRecord, CliError> {
    let mut p = BoundParams::new(r.n as u32, r.d as f64, r.t as f64, r.delta)?;
    if natural_log {
        p.log_base = LogBase::Natural;
    }
    let inputs = serde_json::to_value(&p).unwrap();
    let (name, value, vacuous, extra): (&str, f64, bool, Vec<(&'static str, Value)>) =
        match formula {
            Formula::Thm1Unitary => {
                let (b, td) = bounds::thm1_unitary_bound(&p)?;
                (b.formula, b.value, b.vacuous, vec![("tilde_delta", f(td))])
            }
            Formula::Thm1State => {
                let b = bounds::thm1_state_bound(&p)?;
                (b.formula, b.value, b.vacuous, vec![])
            }
            Formula::Thm2 => {
                let (u, td, s) = bounds::thm2_bounds(&p)?;
                (
                    "thm2",
                    u.value,
                    u.vacuous || s.vacuous,
                    vec![
                        ("state_bound", f(s.value)),
                        ("state_vacuous", json!(s.vacuous)),
                        ("tilde_delta", f(td)),
                    ],
                )
            }
            Formula::Theorem3Eq8 => {
                let b = bounds::theorem3_rhs(p.n, p.d, p.t, MomentVariant::Eq8)?;
                (b.formula, b.value, b.vacuous, vec![])
            }
            Formula::Theorem3Eq9 => {
                let b = bounds::theorem3_rhs(p.n, p.d, p.t, MomentVariant::Eq9)?;
                (b.formula, b.value, b.vacuous, vec![])
            }
            Formula::Cor1Eq8 => {
                let b = bounds::cor1_rhs(&p, MomentVariant::Eq8)?;
                (b.formula, b.value, b.vacuous, vec![])
            }
            Formula::Cor1Eq9 => {
                let b = bounds::cor1_rhs(&p, MomentVariant::Eq9)?;
                (b.formula, b.value, b.vacuous, vec![])
            }
            Formula::Epsnet => {
                let rep = bounds::epsnet_and_accumulation(p.delta, p.d, p.b_const, p.log_base)?;
                (
                    "epsnet",
                    rep.net_size,
                    false,
                    vec![
                        ("epsilon", f(rep.epsilon)),
                        ("log2_net_size", f(rep.log2_net_size)),
                        ("effective_delta", f(rep.effective_delta)),
                    ],
                )
            }
            Formula::DeepSplitting => {
                let chain = bounds::deep_splitting_bound(&p)?;
                (
                    "deep_splitting",
                    chain.line3,
                    chain.vacuous,
                    vec![("line1", f(chain.line1)), ("line2", f(chain.line2))],
                )
            }
            Formula::BinomialMixing => {
                let rep = bounds::binomial_mixing_exponential(r.d, p.lambda_g, r.c)?;
                (
                    "binomial_mixing",
                    rep.exact_sum,
                    false,
                    vec![
                        ("closed_form", rep.closed_form.map(f).unwrap_or(Value::Null)),
                        ("simplified", rep.simplified.map(f).unwrap_or(Value::Null)),
                    ],
                )
            }
            Formula::CouponCollector => {
                let rep = bounds::coupon_collector(p.n, r.d)?;
                (
                    "coupon_collector",
                    rep.paper_bound,
                    rep.paper_bound >= 1.0,
                    vec![("exact_union_bound", f(rep.exact_union_bound))],
                )
            }
            Formula::Fidelity => {
                let rep = bounds::fidelity_tracenorm(p.delta)?;
                (
                    "fidelity_tracenorm",
                    rep.overlap_sq,
                    false,
                    vec![("delta_prime", f(rep.delta_prime))],
                )
            }
        };
    let mut values = vec![
        ("formula", json!(name)),
        ("value", f(value)),
        ("vacuous", json!(vacuous)),
    ];
    values.extend(extra);
    Ok(RunRecord {
        command: "bounds",
        config: config_echo(r),
        seed: r.seed,
        columns: vec!["formula", "value", "vacuous"],
        rows: vec![Row {
            provenance: "formula",
            values,
        }],
        summary: vec![("inputs", inputs)],
    })
}

fn cmd_verify(r: &Resolved) -> Result<RunRecord, CliError> {
    let outcomes = rqc_moments::acceptance::run_all(r.seed);
    let mut all_pass = true;
    for o in &outcomes {
        eprintln!("{}", o.line());
        all_pass &= o.passed;
    }
    let rows: Vec<Row> = outcomes
        .iter()
        .map(|o| Row {
            provenance: "exact",
            values: vec![
                ("id", json!(o.id)),
                ("name", json!(o.name)),
                ("passed", json!(o.passed)),
                ("details", json!(o.details)),
            ],
        })
        .collect();
    let record = RunRecord {
        command: "verify",
        config: config_echo(r),
        seed: r.seed,
        columns: vec!["id", "name", "passed", "details"],
        rows,
        summary: vec![("all_passed", json!(all_pass))],
    };
    if all_pass {
        Ok(record)
    } else {
        // still emit the record before failing
        Err(CliError::VerificationWith(Box::new(record)))
    }
}

impl CliError {
    fn code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Capacity(_) => 3,
            CliError::Verification | CliError::VerificationWith(_) => 1,
            CliError::Io(_) => 2,
        }
    }
}

fn run() -> Result<(), CliError> {
    let cli = Cli::parse();
    let started = Instant::now();
    let (common, work): (&Common, Box<dyn FnOnce(&Resolved) -> Result<RunRecord, CliError>>) =
        match &cli.command {
            Command::Moments { common, d_step } => {
                let step = *d_step;
                (common, Box::new(move |r| {
                    let mut r = r.clone();
                    if let Some(s) = step {
                        r.d_step = s;
                    }
                    cmd_moments(&r)
                }))
            }
            Command::IdealWalk { common, m_max } => {
                let m = *m_max;
                (common, Box::new(move |r| {
                    let mut r = r.clone();
                    if let Some(m) = m {
                        r.m_max = m;
                    }
                    cmd_ideal_walk(&r)
                }))
            }
            Command::Fourier { common, threshold } => {
                let a = *threshold;
                (common, Box::new(move |r| {
                    let mut r = r.clone();
                    if a.is_some() {
                        r.threshold = a;
                    }
                    cmd_fourier(&r)
                }))
            }
            Command::Conjecture { common, c } => {
                let c = *c;
                (common, Box::new(move |r| {
                    let mut r = r.clone();
                    if let Some(c) = c {
                        r.c = c;
                    }
                    cmd_conjecture(&r)
                }))
            }
            Command::F2mix { common, k_max, k_step } => {
                let (km, ks) = (*k_max, *k_step);
                (common, Box::new(move |r| {
                    let mut r = r.clone();
                    if let Some(k) = km {
                        r.k_max = k;
                    }
                    if let Some(k) = ks {
                        r.k_step = k;
                    }
                    cmd_f2mix(&r)
                }))
            }
            Command::Spectrum { common } => (common, Box::new(|r| cmd_spectrum(r))),
            Command::Bounds { common, formula, delta, natural_log } => {
                let (fm, dl, nl) = (*formula, *delta, *natural_log);
                (common, Box::new(move |r| {
                    let mut r = r.clone();
                    if let Some(d) = dl {
                        r.delta = d;
                    }
                    cmd_bounds(&r, fm, nl)
                }))
            }
            Command::Verify { common } => (common, Box::new(|r| cmd_verify(r))),
        };
    let (resolved, format, output, _file) = resolve(common)?;
    if resolved.workers > 0 {
        // worker count affects scheduling only, never output bytes
        let _ = rayon::ThreadPoolBuilder::new()
            .num_threads(resolved.workers)
            .build_global();
    }
    let result = work(&resolved);
    let record = match result {
        Ok(record) => record,
        Err(CliError::VerificationWith(record)) => {
            record.emit(format, &output)?;
            eprintln!("# wall_time_s={:.3}", started.elapsed().as_secs_f64());
            return Err(CliError::Verification);
        }
        Err(e) => return Err(e),
    };
    record.emit(format, &output)?;
    // wall time goes to stderr so output bytes stay reproducible
    eprintln!("# wall_time_s={:.3}", started.elapsed().as_secs_f64());
    Ok(())
}

fn main() -> ExitCode {
    match run() {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            match &e {
                CliError::Usage(m) => eprintln!("usage error: {m}"),
                CliError::Capacity(m) => eprintln!("capacity error: {m}"),
                CliError::Verification => eprintln!("verification failed"),
                CliError::VerificationWith(_) => eprintln!("verification failed"),
                CliError::Io(m) => eprintln!("io error: {m}"),
            }
            ExitCode::from(e.code())
        }
    }
}
