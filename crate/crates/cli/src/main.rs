//! `p2ap` — command-line workbench around the sieve bound for least
//! almost-primes in arithmetic progressions.
//!
//! Exit codes: 0 success (for `verify`: bracket certified positive),
//! 1 computational failure or uncertified bracket, 2 infeasible
//! parameters, 64 usage errors.

use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::error::ErrorKind;
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::json;

use p2ap_core::arithmetic_lab::selberg::omega1_density;
use p2ap_core::arithmetic_lab::{
    selberg_weights, survey, weighted_sum, CutoffMode, SelbergSystem, SurveySummary,
    WeightedSumReport,
};
use p2ap_core::bound_model::{bracket, feasible, BoundError, BoundParams, BracketBreakdown};
use p2ap_core::optimizer::{min_theta, OptimizerResult};
use p2ap_core::quadrature::QuadConfig;
use p2ap_core::sieve_functions::{lower_f, upper_f};

const SCHEMA_VERSION: &str = "1";

const EXIT_COMPUTE: u8 = 1;
const EXIT_INFEASIBLE: u8 = 2;
const EXIT_USAGE: u8 = 64;

#[derive(Parser)]
#[command(
    name = "p2ap",
    version,
    about = "Workbench for the least-almost-prime sieve bound in arithmetic progressions"
)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Format {
    Text,
    Csv,
    Json,
}

#[derive(Args)]
struct IoOpts {
    /// Machine format of the payload (default depends on subcommand)
    #[arg(long, value_enum)]
    format: Option<Format>,
    /// Write the payload to a file; stdout then carries the summary
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Cmd {
    /// Evaluate the lower-bound bracket at (theta, delta); exit 0 iff
    /// it is positive beyond the certified quadrature error
    Verify {
        #[arg(long, default_value_t = 1.8345)]
        theta: f64,
        #[arg(long, default_value_t = 0.86)]
        delta: f64,
        #[arg(long, default_value_t = 0.0)]
        epsilon: f64,
        #[arg(long, default_value_t = 1e-10)]
        abs_tol: f64,
        #[command(flatten)]
        io: IoOpts,
    },
    /// Bisect for the least certifiable exponent theta
    Optimize {
        #[arg(long, default_value_t = 1.70)]
        lo: f64,
        #[arg(long, default_value_t = 1.90)]
        hi: f64,
        #[arg(long, default_value_t = 1e-4)]
        tol: f64,
        #[arg(long, default_value_t = 1e-10)]
        abs_tol: f64,
        #[command(flatten)]
        io: IoOpts,
    },
    /// Dump a table of the sieve functions F(u), f(u) on [1, 6]
    Tabulate {
        #[arg(long, default_value_t = 0.1)]
        step: f64,
        #[arg(long, default_value_t = 1e-10)]
        abs_tol: f64,
        #[command(flatten)]
        io: IoOpts,
    },
    /// Worst-case least-P2 search over a range of moduli
    Survey {
        #[arg(long)]
        q_lo: u64,
        #[arg(long)]
        q_hi: u64,
        #[arg(long, default_value_t = 1.8345)]
        theta: f64,
        #[command(flatten)]
        io: IoOpts,
    },
    /// Construct explicit Selberg upper-sieve weights
    Selberg {
        #[arg(long, default_value_t = 30)]
        z: u64,
        #[arg(long, default_value_t = 900)]
        d1: u64,
        #[command(flatten)]
        io: IoOpts,
    },
    /// Richert-weighted sifting sum on one desk instance
    WeightedSum {
        #[arg(long)]
        x: u64,
        #[arg(long)]
        q: u64,
        #[arg(long)]
        a: u64,
        #[arg(long, default_value_t = 0.86)]
        delta: f64,
        #[arg(long, default_value_t = 0.0)]
        epsilon: f64,
        /// Explicit sifting cutoff (requires --y)
        #[arg(long, requires = "y")]
        z: Option<u64>,
        /// Explicit weight cutoff (requires --z)
        #[arg(long, requires = "z")]
        y: Option<u64>,
        #[command(flatten)]
        io: IoOpts,
    },
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => EXIT_USAGE,
            };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(EXIT_COMPUTE)
        }
    }
}

/// Route the payload: to `--output` with a summary on stdout, or to
/// stdout directly.
fn emit(io: &IoOpts, payload: &str, summary: &str) -> Result<()> {
    match &io.output {
        Some(path) => {
            let mut file = std::fs::File::create(path)
                .with_context(|| format!("cannot create {}", path.display()))?;
            file.write_all(payload.as_bytes())?;
            println!("{summary}");
            println!("payload written to {}", path.display());
        }
        None => print!("{payload}"),
    }
    Ok(())
}

fn run(cli: Cli) -> Result<ExitCode> {
    match cli.cmd {
        Cmd::Verify {
            theta,
            delta,
            epsilon,
            abs_tol,
            io,
        } => cmd_verify(theta, delta, epsilon, abs_tol, io),
        Cmd::Optimize {
            lo,
            hi,
            tol,
            abs_tol,
            io,
        } => cmd_optimize(lo, hi, tol, abs_tol, io),
        Cmd::Tabulate { step, abs_tol, io } => cmd_tabulate(step, abs_tol, io),
        Cmd::Survey { q_lo, q_hi, theta, io } => cmd_survey(q_lo, q_hi, theta, io),
        Cmd::Selberg { z, d1, io } => cmd_selberg(z, d1, io),
        Cmd::WeightedSum {
            x,
            q,
            a,
            delta,
            epsilon,
            z,
            y,
            io,
        } => cmd_weighted(x, q, a, delta, epsilon, z, y, io),
    }
}

fn verify_text(p: &BoundParams, b: &BracketBreakdown) -> String {
    let mut s = String::new();
    s += &format!(
        "bracket at theta = {}, delta = {}, epsilon = {}\n",
        p.theta, p.delta, p.epsilon
    );
    s += &format!("  main   = {}\n", b.main);
    s += &format!("  corr1  = {}\n", b.corr1);
    s += &format!("  corr2  = {}\n", b.corr2);
    s += &format!("  corr3  = {}\n", b.corr3);
    s += &format!("  total  = {}\n", b.total);
    s += &format!("  err    = {}\n", b.err);
    s += &format!("  certified margin = {}\n", b.total - b.err);
    s += if b.certified_positive() {
        "  result: POSITIVE (exponent certified)\n"
    } else {
        "  result: NOT POSITIVE\n"
    };
    s
}

fn verify_json(p: &BoundParams, b: &BracketBreakdown) -> String {
    serde_json::to_string_pretty(&json!({
        "schema_version": SCHEMA_VERSION,
        "theta": p.theta,
        "delta": p.delta,
        "epsilon": p.epsilon,
        "main": b.main,
        "corr1": b.corr1,
        "corr2": b.corr2,
        "corr3": b.corr3,
        "total": b.total,
        "err": b.err,
        "certified": b.certified_positive(),
    }))
    .expect("static json")
        + "\n"
}

fn verify_csv(p: &BoundParams, b: &BracketBreakdown) -> String {
    format!(
        "theta,delta,main,corr1,corr2,corr3,total,err\n{},{},{},{},{},{},{},{}\n",
        p.theta, p.delta, b.main, b.corr1, b.corr2, b.corr3, b.total, b.err
    )
}

fn cmd_verify(
    theta: f64,
    delta: f64,
    epsilon: f64,
    abs_tol: f64,
    io: IoOpts,
) -> Result<ExitCode> {
    let p = match BoundParams::with_epsilon(theta, delta, epsilon) {
        Ok(p) => p,
        Err(e) => {
            eprintln!("infeasible: {e}");
            return Ok(ExitCode::from(EXIT_INFEASIBLE));
        }
    };
    let feas = feasible(&p);
    if !feas.ok {
        for v in &feas.violations {
            eprintln!("infeasible: {v}");
        }
        return Ok(ExitCode::from(EXIT_INFEASIBLE));
    }
    let cfg = QuadConfig::with_tol(abs_tol);
    let b = match bracket(&p, cfg) {
        Ok(b) => b,
        Err(e @ (BoundError::Infeasible(_) | BoundError::IntegrandPole { .. })) => {
            eprintln!("infeasible: {e}");
            return Ok(ExitCode::from(EXIT_INFEASIBLE));
        }
        Err(e) => return Err(e.into()),
    };
    let payload = match io.format.unwrap_or(Format::Text) {
        Format::Text => verify_text(&p, &b),
        Format::Json => verify_json(&p, &b),
        Format::Csv => verify_csv(&p, &b),
    };
    emit(&io, &payload, &verify_text(&p, &b))?;
    Ok(if b.certified_positive() {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(EXIT_COMPUTE)
    })
}

fn trace_csv(r: &OptimizerResult) -> String {
    let mut s = String::from("theta,delta,main,corr1,corr2,corr3,total,err\n");
    for tp in &r.trace {
        let b = &tp.breakdown;
        s += &format!(
            "{},{},{},{},{},{},{},{}\n",
            tp.theta, tp.delta, b.main, b.corr1, b.corr2, b.corr3, b.total, b.err
        );
    }
    s
}

fn optimize_summary(r: &OptimizerResult) -> String {
    format!(
        "theta_star = {} (resolution {})\ndelta_star = {}\nmargin = {}\nevaluations = {}",
        r.theta_star,
        r.tol,
        r.delta_star,
        r.margin,
        r.trace.len()
    )
}

fn cmd_optimize(lo: f64, hi: f64, tol: f64, abs_tol: f64, io: IoOpts) -> Result<ExitCode> {
    let cfg = QuadConfig::with_tol(abs_tol);
    let r = min_theta(lo, hi, tol, cfg).context("optimizer failed")?;
    let payload = match io.format.unwrap_or(Format::Csv) {
        Format::Csv => trace_csv(&r),
        Format::Json => {
            serde_json::to_string_pretty(&json!({
                "schema_version": SCHEMA_VERSION,
                "theta_star": r.theta_star,
                "delta_star": r.delta_star,
                "margin": r.margin,
                "tol": r.tol,
                "trace": serde_json::to_value(&r.trace)?,
            }))? + "\n"
        }
        Format::Text => optimize_summary(&r) + "\n",
    };
    emit(&io, &payload, &optimize_summary(&r))?;
    Ok(ExitCode::SUCCESS)
}

fn cmd_tabulate(step: f64, abs_tol: f64, io: IoOpts) -> Result<ExitCode> {
    anyhow::ensure!(step > 0.0 && step <= 5.0, "step must lie in (0, 5]");
    let cfg = QuadConfig::with_tol(abs_tol);
    let mut rows: Vec<(f64, Option<f64>, f64, f64)> = Vec::new();
    let mut i = 0u64;
    loop {
        let u = 1.0 + i as f64 * step;
        if u > 6.0 + 1e-9 {
            break;
        }
        let u_clamped = u.min(6.0);
        let low = lower_f(u_clamped, cfg).map_err(|e| anyhow::anyhow!("f({u_clamped}): {e}"))?;
        let (upper, err) = if u_clamped <= 5.0 {
            let up = upper_f(u_clamped, cfg).map_err(|e| anyhow::anyhow!("F({u_clamped}): {e}"))?;
            (Some(up.value), up.err.max(low.err))
        } else {
            (None, low.err)
        };
        rows.push((u_clamped, upper, low.value, err));
        i += 1;
    }
    let payload = match io.format.unwrap_or(Format::Csv) {
        Format::Csv | Format::Text => {
            let mut s = String::from("u,F,f,err\n");
            for (u, upper, low, err) in &rows {
                let f_cell = upper.map(|v| v.to_string()).unwrap_or_default();
                s += &format!("{u},{f_cell},{low},{err}\n");
            }
            s
        }
        Format::Json => {
            let items: Vec<_> = rows
                .iter()
                .map(|(u, upper, low, err)| json!({"u": u, "F": upper, "f": low, "err": err}))
                .collect();
            serde_json::to_string_pretty(&json!({
                "schema_version": SCHEMA_VERSION,
                "rows": items,
            }))? + "\n"
        }
    };
    emit(&io, &payload, &format!("{} rows on [1, 6]", rows.len()))?;
    Ok(ExitCode::SUCCESS)
}

fn survey_csv(s: &SurveySummary) -> String {
    let mut out = String::from("q,worst_a,p2,ratio,missing\n");
    for row in &s.rows {
        out += &format!(
            "{},{},{},{},{}\n",
            row.q, row.worst_a, row.p2, row.ratio, row.missing
        );
    }
    out
}

fn survey_summary_text(s: &SurveySummary) -> String {
    format!(
        "{} moduli; max ratio {} at (q = {}, a = {}); {} above theta = {}; {} flagged",
        s.rows.len(),
        s.max_ratio,
        s.argmax_q,
        s.argmax_a,
        s.exceed_count,
        s.theta,
        s.flagged
    )
}

fn cmd_survey(q_lo: u64, q_hi: u64, theta: f64, io: IoOpts) -> Result<ExitCode> {
    let s = survey(q_lo, q_hi, theta).context("survey failed")?;
    let payload = match io.format.unwrap_or(Format::Csv) {
        Format::Csv | Format::Text => survey_csv(&s),
        Format::Json => {
            serde_json::to_string_pretty(&json!({
                "schema_version": SCHEMA_VERSION,
                "theta": s.theta,
                "max_ratio": s.max_ratio,
                "argmax_q": s.argmax_q,
                "argmax_a": s.argmax_a,
                "exceed_count": s.exceed_count,
                "flagged": s.flagged,
                "rows": serde_json::to_value(&s.rows)?,
            }))? + "\n"
        }
    };
    emit(&io, &payload, &survey_summary_text(&s))?;
    Ok(ExitCode::SUCCESS)
}

fn selberg_json(sys: &SelbergSystem) -> Result<String> {
    let weights: Vec<_> = sys
        .weights
        .iter()
        .map(|(&d, &l)| json!({"d": d, "lambda_plus": l, "omega1": omega1_density(d)}))
        .collect();
    Ok(serde_json::to_string_pretty(&json!({
        "schema_version": SCHEMA_VERSION,
        "z": sys.z,
        "d1": sys.level_d1,
        "s": sys.s,
        "g_sum": sys.g_sum,
        "identity_gap": sys.identity_gap,
        "exact": sys.exact,
        "v_script": sys.v_script(),
        "asymptotic_ratio": sys.asymptotic_ratio(),
        "weights": weights,
    }))? + "\n")
}

fn cmd_selberg(z: u64, d1: u64, io: IoOpts) -> Result<ExitCode> {
    let sys = selberg_weights(z, d1).context("selberg construction failed")?;
    let payload = match io.format.unwrap_or(Format::Json) {
        Format::Json | Format::Text => selberg_json(&sys)?,
        Format::Csv => {
            let mut s = String::from("d,lambda_plus,omega1\n");
            for (&d, &l) in &sys.weights {
                s += &format!("{d},{l},{}\n", omega1_density(d));
            }
            s
        }
    };
    let summary = format!(
        "z = {}, D1 = {}, {} weights, G = {}, identity gap = {}",
        sys.z,
        sys.level_d1,
        sys.weights.len(),
        sys.g_sum,
        sys.identity_gap
    );
    emit(&io, &payload, &summary)?;
    Ok(ExitCode::SUCCESS)
}

fn weighted_text(r: &WeightedSumReport) -> String {
    let mut s = String::new();
    s += &format!("instance x = {}, q = {}, a = {}\n", r.x, r.q, r.a);
    s += &format!(
        "cutoffs z = {}, y = {} (theta realized = {}), lambda = {}\n",
        r.z, r.y, r.theta_realized, r.lambda
    );
    s += &format!("S(A, z) = {}\n", r.sifted_count);
    s += &format!("W by definition = {}\n", r.w_by_definition);
    s += &format!("W by expansion  = {}\n", r.w_by_expansion);
    s += &format!(
        "middle sum = {} split at {} and {}: [{}, {}, {}]\n",
        r.middle_total,
        r.cut_low,
        r.cut_high,
        r.middle_parts[0],
        r.middle_parts[1],
        r.middle_parts[2]
    );
    s += &format!(
        "count_p2 = {}, squarefull tail = {}, sign violations = {}\n",
        r.count_p2, r.count_squarefull_tail, r.sign_violations
    );
    s += &format!("W > 0 implies P2 member: {}\n", r.w_positive_implies_p2);
    s
}

fn weighted_csv(r: &WeightedSumReport) -> String {
    let mut s = String::from("key,value\n");
    for (k, v) in [
        ("x", r.x.to_string()),
        ("q", r.q.to_string()),
        ("a", r.a.to_string()),
        ("z", r.z.to_string()),
        ("y", r.y.to_string()),
        ("theta_realized", r.theta_realized.to_string()),
        ("lambda", r.lambda.to_string()),
        ("sifted_count", r.sifted_count.to_string()),
        ("w_by_definition", r.w_by_definition.to_string()),
        ("w_by_expansion", r.w_by_expansion.to_string()),
        ("middle_part_low", r.middle_parts[0].to_string()),
        ("middle_part_mid", r.middle_parts[1].to_string()),
        ("middle_part_high", r.middle_parts[2].to_string()),
        ("middle_total", r.middle_total.to_string()),
        ("cut_low", r.cut_low.to_string()),
        ("cut_high", r.cut_high.to_string()),
        ("count_p2", r.count_p2.to_string()),
        ("count_squarefull_tail", r.count_squarefull_tail.to_string()),
        ("sign_violations", r.sign_violations.to_string()),
        ("w_positive_implies_p2", r.w_positive_implies_p2.to_string()),
    ] {
        s += &format!("{k},{v}\n");
    }
    s
}

#[allow(clippy::too_many_arguments)]
fn cmd_weighted(
    x: u64,
    q: u64,
    a: u64,
    delta: f64,
    epsilon: f64,
    z: Option<u64>,
    y: Option<u64>,
    io: IoOpts,
) -> Result<ExitCode> {
    let params = BoundParams::with_epsilon(1.8345, delta, epsilon)
        .map_err(|e| anyhow::anyhow!("bad parameters: {e}"))?;
    let mode = match (z, y) {
        (Some(z), Some(y)) => CutoffMode::Explicit { z, y },
        _ => CutoffMode::FromExponents,
    };
    let r = weighted_sum(x, q, a, &params, mode).context("weighted sum failed")?;
    let payload = match io.format.unwrap_or(Format::Text) {
        Format::Text => weighted_text(&r),
        Format::Csv => weighted_csv(&r),
        Format::Json => {
            let mut v = serde_json::to_value(&r)?;
            v.as_object_mut()
                .expect("report is an object")
                .insert("schema_version".into(), json!(SCHEMA_VERSION));
            serde_json::to_string_pretty(&v)? + "\n"
        }
    };
    emit(&io, &payload, &weighted_text(&r))?;
    Ok(ExitCode::SUCCESS)
}
