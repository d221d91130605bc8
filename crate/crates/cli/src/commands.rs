//! One handler per subcommand, generic over the arithmetic backend where
//! the computation allows it.

use std::time::Instant;

use ccp_core::decomposition::{
    power_sum_fast_with, reduction_coefficient, DecompositionWeights, Provenance, SmallPowerSums,
};
use ccp_core::numerics::{binomial, Backend, CANCELLATION_WARN_CONDITION};
use ccp_core::popularity::{Popularity, DEFAULT_ENUMERATION_GUARD};
use ccp_core::power_sums::power_sum_bruteforce_guarded;
use ccp_core::simulator::{empirical_distribution, SimConfig, GENERATOR_NAME};
use ccp_core::waiting_time::{
    ccdf_evaluated_guarded, default_k_max, expectation_guarded, pdf_guarded, WaitingTimeTable,
};
use ccp_core::Scalar;
use clap::Args;
use num_bigint::BigInt;
use num_rational::BigRational;
use serde_json::Value;

use crate::output::{Cell, Format, Output};
use crate::popfile::{load_popularity, to_usize, Source};
use crate::verify::run_suites;
use crate::CliError;

#[derive(Clone, Copy, Debug, PartialEq, Eq, clap::ValueEnum)]
pub enum BackendArg {
    /// Arbitrary-precision rationals; identities hold to equality
    Exact,
    /// 64-bit floats with compensated summation
    Float,
}

#[derive(Args, Debug)]
pub struct RenderArgs {
    /// Arithmetic backend
    #[arg(long, value_enum, default_value_t = BackendArg::Exact)]
    pub backend: BackendArg,
    /// Output format
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
}

#[derive(Args, Debug)]
pub struct InputArgs {
    #[command(flatten)]
    pub source: Source,
    /// Rescale probabilities whose sum misses 1
    #[arg(long)]
    pub renormalize: bool,
    /// Cap on subsets visited per exhaustive enumeration (default 2^28)
    #[arg(long, value_name = "LIMIT")]
    pub guard: Option<u64>,
}

impl InputArgs {
    pub fn guard(&self) -> u64 {
        self.guard.unwrap_or(DEFAULT_ENUMERATION_GUARD)
    }
}

#[derive(Args, Debug)]
pub struct DistArgs {
    #[command(flatten)]
    pub input: InputArgs,
    #[command(flatten)]
    pub render: RenderArgs,
    /// Collection size: number of distinct items to collect
    #[arg(long)]
    pub c: u64,
    /// Evaluate a single trial count
    #[arg(long, conflicts_with = "kmax")]
    pub k: Option<u64>,
    /// Tabulate k = 0..=KMAX (default max(3n, c+20))
    #[arg(long, value_name = "KMAX")]
    pub kmax: Option<u64>,
}

#[derive(Clone, Copy)]
pub enum Measure {
    Pdf,
    Cdf,
    Ccdf,
}

impl Measure {
    fn name(self) -> &'static str {
        match self {
            Measure::Pdf => "pdf",
            Measure::Cdf => "cdf",
            Measure::Ccdf => "ccdf",
        }
    }
}

fn push_condition_meta<S: Scalar>(out: &mut Output, condition: f64) {
    if S::BACKEND == Backend::Float {
        out.meta("condition", condition);
        if condition > CANCELLATION_WARN_CONDITION {
            out.warn(format!(
                "cancellation condition estimate {condition:.3e} exceeds \
                 {CANCELLATION_WARN_CONDITION:.0e}; float results may be unreliable"
            ));
        }
    }
}

pub fn dist<S: Scalar>(args: &DistArgs, measure: Measure) -> Result<Output, CliError> {
    let pop: Popularity<S> = load_popularity(&args.input.source, args.input.renormalize)?;
    let n = pop.n();
    let c = to_usize(args.c)?;
    let guard = args.input.guard();
    let mut out = Output::new(measure.name(), vec!["k", measure.name()]);
    out.meta("backend", S::BACKEND.name());
    out.meta("n", n as u64);
    out.meta("c", args.c);
    if let Some(k) = args.k {
        let cell = match measure {
            Measure::Pdf => Cell::scalar(&pdf_guarded(&pop, c, k, guard)?),
            Measure::Cdf | Measure::Ccdf => {
                let evaluated = ccdf_evaluated_guarded(&pop, c, k, guard)?;
                push_condition_meta::<S>(&mut out, evaluated.condition);
                match measure {
                    Measure::Cdf => Cell::scalar(&(S::one() - evaluated.value)),
                    _ => Cell::scalar(&evaluated.value),
                }
            }
        };
        out.row(vec![Cell::UInt(k), cell]);
    } else {
        let k_max = args.kmax.unwrap_or_else(|| default_k_max(n, c));
        let table = WaitingTimeTable::build_guarded(&pop, c, k_max, guard)?;
        push_condition_meta::<S>(&mut out, table.condition());
        for row in table.rows() {
            let cell = match measure {
                Measure::Pdf => Cell::scalar(&row.pdf),
                Measure::Cdf => Cell::scalar(&row.cdf),
                Measure::Ccdf => Cell::scalar(&row.ccdf),
            };
            out.row(vec![Cell::UInt(row.k), cell]);
        }
    }
    Ok(out)
}

#[derive(Args, Debug)]
pub struct ExpectationArgs {
    #[command(flatten)]
    pub input: InputArgs,
    #[command(flatten)]
    pub render: RenderArgs,
    /// Collection size
    #[arg(long)]
    pub c: u64,
}

pub fn expectation_cmd<S: Scalar>(args: &ExpectationArgs) -> Result<Output, CliError> {
    let pop: Popularity<S> = load_popularity(&args.input.source, args.input.renormalize)?;
    let c = to_usize(args.c)?;
    let value = expectation_guarded(&pop, c, args.input.guard())?;
    let mut out = Output::new("expectation", vec!["c", "expectation"]);
    out.meta("backend", S::BACKEND.name());
    out.meta("n", pop.n() as u64);
    out.row(vec![Cell::UInt(args.c), Cell::scalar(&value)]);
    Ok(out)
}

#[derive(Args, Debug)]
pub struct AlphaArgs {
    #[command(flatten)]
    pub input: InputArgs,
    #[command(flatten)]
    pub render: RenderArgs,
    /// Power-sum exponent (weights are indexed u = 1..=exponent)
    #[arg(long, alias = "k", value_name = "K")]
    pub exponent: u32,
}

pub fn alpha<S: Scalar>(args: &AlphaArgs) -> Result<Output, CliError> {
    let pop: Popularity<S> = load_popularity(&args.input.source, args.input.renormalize)?;
    let k = args.exponent;
    let table = if pop.is_uniform() {
        DecompositionWeights::<S>::uniform(pop.n(), k)?
    } else {
        DecompositionWeights::from_popularity_guarded(&pop, k, args.input.guard())?
    };
    let mut out = Output::new("alpha", vec!["u", "alpha"]);
    out.meta("backend", S::BACKEND.name());
    out.meta("n", pop.n() as u64);
    out.meta("exponent", k);
    out.meta(
        "provenance",
        match table.provenance() {
            Provenance::General => "general",
            Provenance::Uniform => "uniform",
        },
    );
    if table.provenance() == Provenance::General {
        push_condition_meta::<S>(&mut out, table.condition());
    }
    for u in 1..=k {
        out.row(vec![
            Cell::UInt(u64::from(u)),
            Cell::scalar(table.weight(u)),
        ]);
    }
    Ok(out)
}

#[derive(Args, Debug)]
pub struct EtaArgs {
    #[command(flatten)]
    pub input: InputArgs,
    #[command(flatten)]
    pub render: RenderArgs,
    /// Power-sum exponent
    #[arg(long, alias = "k", value_name = "K")]
    pub exponent: u32,
    /// Target subset size
    #[arg(long)]
    pub j: u64,
    /// Single coefficient index q (default: the whole row q = 1..=exponent)
    #[arg(long, value_name = "Q")]
    pub u: Option<u32>,
}

pub fn eta<S: Scalar>(args: &EtaArgs) -> Result<Output, CliError> {
    let pop: Popularity<S> = load_popularity(&args.input.source, args.input.renormalize)?;
    let n = pop.n();
    let j = to_usize(args.j)?;
    let k = args.exponent;
    let mut out = Output::new("eta", vec!["q", "eta"]);
    out.meta("backend", S::BACKEND.name());
    out.meta("n", n as u64);
    out.meta("exponent", k);
    out.meta("j", args.j);
    let range = match args.u {
        Some(q) => q..=q,
        None => 1..=k,
    };
    for q in range {
        let value: S = reduction_coefficient(n, k, j, q)?;
        out.row(vec![Cell::UInt(u64::from(q)), Cell::scalar(&value)]);
    }
    Ok(out)
}

#[derive(Args, Debug)]
pub struct PowersumArgs {
    #[command(flatten)]
    pub input: InputArgs,
    #[command(flatten)]
    pub render: RenderArgs,
    /// Subset size
    #[arg(long)]
    pub j: u64,
    /// Power-sum exponent
    #[arg(long, alias = "k", value_name = "K")]
    pub exponent: u32,
}

pub fn powersum<S: Scalar>(args: &PowersumArgs) -> Result<Output, CliError> {
    let pop: Popularity<S> = load_popularity(&args.input.source, args.input.renormalize)?;
    let j = to_usize(args.j)?;
    let k = args.exponent;
    let value = ccp_core::decomposition::power_sum_guarded(&pop, j, k, args.input.guard())?;
    let method = if k == 0 {
        "closed-form"
    } else if j > k as usize {
        "fast"
    } else {
        "bruteforce"
    };
    let mut out = Output::new("powersum", vec!["j", "exponent", "method", "value"]);
    out.meta("backend", S::BACKEND.name());
    out.meta("n", pop.n() as u64);
    out.row(vec![
        Cell::UInt(args.j),
        Cell::UInt(u64::from(k)),
        Cell::Text(method.to_owned()),
        Cell::scalar(&value),
    ]);
    Ok(out)
}

#[derive(Args, Debug)]
pub struct SimulateArgs {
    #[command(flatten)]
    pub input: InputArgs,
    /// Output format
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
    /// Collection size
    #[arg(long)]
    pub c: u64,
    /// Number of simulated collections
    #[arg(long, default_value_t = 100_000)]
    pub samples: u64,
    /// Seed for the deterministic generator stream
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Per-sample trial cap (default 1000 * n)
    #[arg(long, value_name = "CAP")]
    pub kcap: Option<u64>,
}

pub fn simulate(args: &SimulateArgs) -> Result<Output, CliError> {
    // sampling always runs on the float backend
    let pop: Popularity<f64> = load_popularity(&args.input.source, args.input.renormalize)?;
    let c = to_usize(args.c)?;
    let mut cfg = SimConfig::new(args.samples, args.seed);
    if let Some(cap) = args.kcap {
        cfg = cfg.with_k_cap(cap);
    }
    let dist = empirical_distribution(&pop, c, &cfg)?;
    let mut out = Output::new("simulate", vec!["k", "count", "frequency"]);
    out.meta("n", pop.n() as u64);
    out.meta("c", args.c);
    out.meta("samples", args.samples);
    out.meta("seed", args.seed);
    out.meta("generator", GENERATOR_NAME);
    out.meta("k_cap", cfg.k_cap.unwrap_or(1000 * pop.n() as u64));
    out.meta("truncated", dist.truncated);
    if dist.truncated > 0 {
        out.warn(format!(
            "{} of {} samples hit the trial cap; they are excluded from moment estimates",
            dist.truncated, args.samples
        ));
    }
    if let Some(mean) = dist.mean() {
        out.meta("mean", mean);
    }
    if let Some(se) = dist.std_error() {
        out.meta("std_error", se);
    }
    if let Ok(exact) = expectation_guarded(&pop, c, args.input.guard()) {
        out.meta("expectation", exact);
    }
    for (&k, &count) in &dist.counts {
        out.row(vec![
            Cell::UInt(k),
            Cell::UInt(count),
            Cell::Float(count as f64 / args.samples as f64),
        ]);
    }
    Ok(out)
}

#[derive(Args, Debug)]
pub struct CompareArgs {
    #[command(flatten)]
    pub input: InputArgs,
    #[command(flatten)]
    pub render: RenderArgs,
    /// Subset size (must exceed the exponent)
    #[arg(long)]
    pub j: u64,
    /// Power-sum exponent
    #[arg(long, alias = "exponent", value_name = "K")]
    pub k: u32,
}

pub fn compare<S: Scalar>(args: &CompareArgs) -> Result<Output, CliError> {
    let pop: Popularity<S> = load_popularity(&args.input.source, args.input.renormalize)?;
    let n = pop.n();
    let j = to_usize(args.j)?;
    let k = args.k;
    if k < 1 || j <= k as usize {
        return Err(CliError::Usage(format!(
            "the comparison needs 1 <= k < j, got j = {j}, k = {k}"
        )));
    }
    let guard = args.input.guard();

    let brute_count = binomial(n as i64, j as i64);
    let fast_count: BigInt = (1..=i64::from(k)).map(|q| binomial(n as i64, q)).sum();
    let ratio = BigRational::new(brute_count.clone(), fast_count.clone());

    let fast_started = Instant::now();
    let small = SmallPowerSums::compute_guarded(&pop, k, guard)?;
    let fast_value = power_sum_fast_with(&small, j)?;
    let fast_seconds = fast_started.elapsed().as_secs_f64();

    let mut out = Output::new("compare", vec!["metric", "value"]);
    out.meta("backend", S::BACKEND.name());
    out.meta("n", n as u64);
    out.meta("j", args.j);
    out.meta("k", k);
    let mut push = |metric: &str, cell: Cell| {
        out.row(vec![Cell::Text(metric.to_owned()), cell]);
    };
    push("brute_subsets", Cell::BigInt(brute_count.clone()));
    push("fast_subsets", Cell::BigInt(fast_count));
    push("subset_ratio", Cell::scalar(&ratio));
    push("fast_value", Cell::scalar(&fast_value));
    push("fast_seconds", Cell::Float(fast_seconds));

    if brute_count <= BigInt::from(guard) {
        let brute_started = Instant::now();
        let brute_value = power_sum_bruteforce_guarded(&pop, j, k, guard)?;
        let brute_seconds = brute_started.elapsed().as_secs_f64();
        let difference = (fast_value.to_f64() - brute_value.to_f64()).abs();
        let relative = if brute_value.to_f64() != 0.0 {
            difference / brute_value.to_f64().abs()
        } else {
            difference
        };
        push("brute_status", Cell::Text("ok".to_owned()));
        push("brute_value", Cell::scalar(&brute_value));
        push("brute_seconds", Cell::Float(brute_seconds));
        push("relative_difference", Cell::Float(relative));
        push(
            "measured_speedup",
            Cell::Float(brute_seconds / fast_seconds.max(1e-12)),
        );
    } else {
        push(
            "brute_status",
            Cell::Text("infeasible, ratio only".to_owned()),
        );
    }
    Ok(out)
}

#[derive(Args, Debug)]
pub struct VerifyArgs {
    /// Output format
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
    /// Largest reference-set size to test
    #[arg(long, default_value_t = 8)]
    pub n_max: u64,
    /// Random popularities per reference-set size
    #[arg(long, default_value_t = 50)]
    pub trials: u32,
    /// Seed for the popularity generator
    #[arg(long, default_value_t = 7)]
    pub seed: u64,
}

pub fn verify(args: &VerifyArgs) -> Result<Output, CliError> {
    let n_max = to_usize(args.n_max)?;
    let suites = run_suites(n_max, args.trials, args.seed);
    let mut out = Output::new("verify", vec!["suite", "cases", "failures", "status"]);
    out.meta("backend", "exact");
    out.meta("n_max", args.n_max);
    out.meta("trials", args.trials);
    out.meta("seed", args.seed);
    let mut failure_payload = Vec::new();
    let mut failed = false;
    for suite in &suites {
        let ok = suite.failures.is_empty();
        failed |= !ok;
        out.row(vec![
            Cell::Text(suite.name.to_owned()),
            Cell::UInt(suite.cases),
            Cell::UInt(suite.failures.len() as u64),
            Cell::Text(if ok { "ok" } else { "FAILED" }.to_owned()),
        ]);
        for failure in &suite.failures {
            out.note(format!(
                "FAILED {}: {} [{}] left = {}, right = {}",
                suite.name, failure.identity, failure.inputs, failure.lhs, failure.rhs
            ));
            failure_payload.push(serde_json::json!({
                "suite": suite.name,
                "identity": failure.identity,
                "inputs": failure.inputs,
                "lhs": failure.lhs,
                "rhs": failure.rhs,
            }));
        }
    }
    if !failure_payload.is_empty() {
        out.extra.push(("failures", Value::from(failure_payload)));
    }
    if failed {
        out.exit = 2;
    }
    Ok(out)
}
