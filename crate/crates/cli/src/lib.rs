//! Command handlers for the `diqkd` binary. Each handler returns the text to
//! emit and the process exit code; `main` only routes output.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use diqkd_core::attack::{build_optimal_attack, verify_saturation, AttackSpec};
use diqkd_core::bounds::{
    critical_qber_in, dw_rate, rate_along, BoundKind, ChshCurve, KeyRateReport, ObservedStatistics,
};
use diqkd_core::qmat::DensityMatrix;
use diqkd_core::reduction::{jordan_blocks, verify_pinching, DichotomicObservable};
use diqkd_core::simproto::{
    oracle_step3_sweep, run_protocol_with_transcript, write_transcript_csv, ProtocolConfig,
};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// Exit codes: 0 secure or verified, 2 zero-or-negative rate, 1 error or failed check.
pub const EXIT_OK: i32 = 0;
pub const EXIT_ERROR: i32 = 1;
pub const EXIT_NO_KEY: i32 = 2;

const PINCHING_TOL: f64 = 1e-9;
const COMPLETENESS_TOL: f64 = 1e-10;

#[derive(Debug, Parser)]
#[command(
    name = "diqkd",
    version,
    about = "Device-independent QKD key rates, attacks and checks"
)]
pub struct Cli {
    /// Emit a single JSON document instead of text
    #[arg(long, global = true)]
    pub json: bool,
    /// Master seed for randomized commands
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    /// Write output to FILE instead of stdout
    #[arg(long, global = true, value_name = "FILE")]
    pub out: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Key rates for an observed CHSH value and QBER
    Keyrate(KeyrateArgs),
    /// Key-rate curve as CSV (q,s,r_di,r_std)
    Curve(CurveArgs),
    /// Build the optimal attack or verify its saturation over a grid
    Attack(AttackArgs),
    /// Block decomposition of two dichotomic observables
    Reduce(ReduceArgs),
    /// Monte Carlo run of the protocol against an attack
    Simulate(SimulateArgs),
    /// Random sweep over Bell-diagonal states and planar settings
    Oracle(OracleArgs),
}

#[derive(Debug, Args)]
pub struct KeyrateArgs {
    /// CHSH value
    #[arg(long, allow_hyphen_values = true)]
    pub s: f64,
    /// QBER as a probability
    #[arg(long)]
    pub q: f64,
}

#[derive(Debug, Args)]
pub struct CurveArgs {
    #[arg(long, default_value_t = 0.0)]
    pub q_min: f64,
    #[arg(long, default_value_t = 0.15)]
    pub q_max: f64,
    #[arg(long, default_value_t = 151)]
    pub steps: usize,
    /// Hold S fixed instead of following S = 2√2(1 − 2Q)
    #[arg(long, conflicts_with = "s_file", allow_hyphen_values = true)]
    pub s_fixed: Option<f64>,
    /// CSV of (q, s) samples, linearly interpolated
    #[arg(long, value_name = "FILE")]
    pub s_file: Option<PathBuf>,
    /// Render negative rates as 0
    #[arg(long)]
    pub clamp_zero: bool,
}

#[derive(Debug, Args)]
pub struct AttackArgs {
    /// Verify saturation on START:STOP:STEP
    #[arg(long, value_name = "START:STOP:STEP", conflicts_with_all = ["s", "q"])]
    pub s_grid: Option<String>,
    /// Emit the attack for this CHSH value
    #[arg(long)]
    pub s: Option<f64>,
    #[arg(long, default_value_t = 0.0)]
    pub q: f64,
}

#[derive(Debug, Args)]
pub struct ReduceArgs {
    /// JSON file {"a1": op, "a2": op, "rho"?: op}
    #[arg(long = "in", value_name = "FILE")]
    pub input: PathBuf,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    #[arg(long, required_unless_present = "attack")]
    pub s: Option<f64>,
    #[arg(long, default_value_t = 0.0)]
    pub q: f64,
    /// AttackSpec JSON, instead of --s/--q
    #[arg(long, value_name = "FILE", conflicts_with = "s")]
    pub attack: Option<PathBuf>,
    #[arg(long, default_value_t = 100_000)]
    pub rounds: u64,
    /// p(A0),p(A1),p(A2)
    #[arg(long, value_name = "P0,P1,P2", default_value = "0.5,0.25,0.25")]
    pub alice_probs: String,
    /// p(B1),p(B2)
    #[arg(long, value_name = "P1,P2", default_value = "0.5,0.5")]
    pub bob_probs: String,
    #[arg(long)]
    pub no_symmetrize: bool,
    /// Emit the transcript as CSV instead of the summary
    #[arg(long, conflicts_with = "json")]
    pub csv: bool,
}

#[derive(Debug, Args)]
pub struct OracleArgs {
    #[arg(long, default_value_t = 100_000)]
    pub samples: u64,
}

/// Text to emit and the exit code.
#[derive(Debug, Clone, PartialEq)]
pub struct Output {
    pub text: String,
    pub code: i32,
}

pub fn run(cli: &Cli) -> Result<Output> {
    match &cli.command {
        Command::Keyrate(a) => cmd_keyrate(cli, a),
        Command::Curve(a) => cmd_curve(cli, a),
        Command::Attack(a) => cmd_attack(cli, a),
        Command::Reduce(a) => cmd_reduce(cli, a),
        Command::Simulate(a) => cmd_simulate(cli, a),
        Command::Oracle(a) => cmd_oracle(cli, a),
    }
}

fn document(command: &str, config: Value, result: Value) -> String {
    let doc = json!({
        "tool": "diqkd",
        "version": VERSION,
        "command": command,
        "config": config,
        "result": result,
    });
    serde_json::to_string_pretty(&doc).expect("JSON value") + "\n"
}

fn rate_code(r_di: f64) -> i32 {
    if r_di > 0.0 {
        EXIT_OK
    } else {
        EXIT_NO_KEY
    }
}

pub fn cmd_keyrate(cli: &Cli, args: &KeyrateArgs) -> Result<Output> {
    let report = dw_rate(ObservedStatistics::new(args.s, args.q)?)?;
    let text = if cli.json {
        document(
            "keyrate",
            json!({ "s": args.s, "q": args.q }),
            serde_json::to_value(report)?,
        )
    } else {
        format_keyrate(&report)
    };
    Ok(Output {
        text,
        code: rate_code(report.r_di),
    })
}

fn format_keyrate(r: &KeyRateReport) -> String {
    let opt = |x: Option<f64>| x.map_or_else(|| "undefined".to_string(), fmt_g);
    format!(
        "S       = {}\nQ       = {}\nI(A:B)  = {}\nchi_di  = {}\nchi_std = {}\nr_di    = {}\nr_std   = {}\n",
        fmt_g(r.chsh),
        fmt_g(r.qber),
        fmt_g(r.iab),
        fmt_g(r.chi_di),
        opt(r.chi_std),
        fmt_g(r.r_di),
        opt(r.r_std),
    )
}

/// printf-style `%.10g`.
pub fn fmt_g(x: f64) -> String {
    const P: i32 = 10;
    if x == 0.0 {
        return "0".into();
    }
    if !x.is_finite() {
        return format!("{x}");
    }
    let sci = format!("{:.*e}", (P - 1) as usize, x);
    let (mantissa, exp) = sci.split_once('e').expect("exponent");
    let exp: i32 = exp.parse().expect("integer exponent");
    if (-4..P).contains(&exp) {
        let fixed = format!("{:.*}", (P - 1 - exp) as usize, x);
        trim_zeros(&fixed).to_string()
    } else {
        let sign = if exp < 0 { '-' } else { '+' };
        format!("{}e{sign}{:02}", trim_zeros(mantissa), exp.abs())
    }
}

fn trim_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CurveRow {
    pub q: f64,
    pub s: f64,
    pub r_di: f64,
    pub r_std: Option<f64>,
}

/// Grid of (Q, S, r_di, r_std) rows.
pub fn curve_rows(
    q_min: f64,
    q_max: f64,
    steps: usize,
    curve: &ChshCurve,
) -> Result<Vec<CurveRow>> {
    if !(0.0..q_max).contains(&q_min) || q_max > 0.5 {
        bail!("need 0 <= q_min < q_max <= 0.5, got [{q_min}, {q_max}]");
    }
    if steps < 2 {
        bail!("need at least 2 steps, got {steps}");
    }
    (0..steps)
        .map(|i| {
            let q = if i == steps - 1 {
                q_max
            } else {
                q_min + (q_max - q_min) * i as f64 / (steps - 1) as f64
            };
            let s = curve.chsh_at(q)?;
            Ok(CurveRow {
                q,
                s,
                r_di: rate_along(BoundKind::DeviceIndependent, curve, q)?,
                r_std: rate_along(BoundKind::Standard, curve, q).ok(),
            })
        })
        .collect()
}

pub fn curve_csv(rows: &[CurveRow], clamp_zero: bool) -> String {
    let rate = |r: f64| fmt_g(if clamp_zero { r.max(0.0) } else { r });
    let mut out = String::from("q,s,r_di,r_std\n");
    for row in rows {
        let r_std = row.r_std.map(rate).unwrap_or_default();
        writeln!(
            out,
            "{},{},{},{}",
            fmt_g(row.q),
            fmt_g(row.s),
            rate(row.r_di),
            r_std
        )
        .expect("string write");
    }
    out
}

fn read_s_file(path: &Path) -> Result<ChshCurve> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let mut points = Vec::new();
    for (n, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') || line.starts_with('q') {
            continue;
        }
        let (q, s) = line
            .split_once(',')
            .with_context(|| format!("{}:{}: expected q,s", path.display(), n + 1))?;
        points.push((q.trim().parse::<f64>()?, s.trim().parse::<f64>()?));
    }
    Ok(ChshCurve::sampled(points)?)
}

pub fn cmd_curve(cli: &Cli, args: &CurveArgs) -> Result<Output> {
    let (curve, rule) = match (&args.s_fixed, &args.s_file) {
        (Some(s), _) => (ChshCurve::Fixed(*s), json!({ "fixed": s })),
        (None, Some(path)) => (read_s_file(path)?, json!({ "file": path })),
        (None, None) => (ChshCurve::Line, json!("line")),
    };
    let rows = curve_rows(args.q_min, args.q_max, args.steps, &curve)?;
    let text = if cli.json {
        let crossing = |kind| critical_qber_in(kind, &curve, (args.q_min, args.q_max)).ok();
        document(
            "curve",
            json!({
                "q_min": args.q_min,
                "q_max": args.q_max,
                "steps": args.steps,
                "s_rule": rule,
                "clamp_zero": args.clamp_zero,
            }),
            json!({
                "rows": rows,
                "critical_qber_di": crossing(BoundKind::DeviceIndependent),
                "critical_qber_std": crossing(BoundKind::Standard),
            }),
        )
    } else {
        curve_csv(&rows, args.clamp_zero)
    };
    Ok(Output {
        text,
        code: EXIT_OK,
    })
}

/// START:STOP:STEP, inclusive of STOP up to rounding.
pub fn parse_grid(spec: &str) -> Result<Vec<f64>> {
    let parts: Vec<f64> = spec
        .split(':')
        .map(|p| p.trim().parse::<f64>())
        .collect::<std::result::Result<_, _>>()
        .with_context(|| format!("grid {spec:?} must be START:STOP:STEP"))?;
    let [start, stop, step] = parts[..] else {
        bail!("grid {spec:?} must be START:STOP:STEP");
    };
    if !(step > 0.0) || stop < start {
        bail!("grid {spec:?} needs STEP > 0 and STOP >= START");
    }
    let n = ((stop - start) / step + 1e-9).floor() as usize;
    Ok((0..=n).map(|k| start + k as f64 * step).collect())
}

pub fn cmd_attack(cli: &Cli, args: &AttackArgs) -> Result<Output> {
    if let Some(grid) = &args.s_grid {
        let points = parse_grid(grid)?;
        let report = verify_saturation(&points)?;
        let code = if report.passed { EXIT_OK } else { EXIT_ERROR };
        let text = if cli.json {
            document(
                "attack",
                json!({ "s_grid": grid }),
                serde_json::to_value(&report)?,
            )
        } else {
            let mut t = String::from("s,chsh_reproduced,holevo_exact,holevo_bound\n");
            for p in &report.points {
                writeln!(
                    t,
                    "{},{},{},{}",
                    fmt_g(p.s),
                    fmt_g(p.chsh_reproduced),
                    fmt_g(p.holevo_exact),
                    fmt_g(p.holevo_bound)
                )?;
            }
            writeln!(
                t,
                "# max |chsh - S| = {:e}, max |chi - F(S)| = {:e}, max marginal = {:e}: {}",
                report.max_chsh_deviation,
                report.max_holevo_deviation,
                report.max_marginal,
                if report.passed { "PASS" } else { "FAIL" }
            )?;
            t
        };
        return Ok(Output { text, code });
    }
    let Some(s) = args.s else {
        bail!("attack needs --s-grid or --s");
    };
    let spec = build_optimal_attack(s, args.q)?;
    let body = serde_json::to_value(&spec)?;
    let text = if cli.json {
        document("attack", json!({ "s": s, "q": args.q }), body)
    } else {
        serde_json::to_string_pretty(&body)? + "\n"
    };
    Ok(Output {
        text,
        code: EXIT_OK,
    })
}

#[derive(Debug, Deserialize)]
struct ReduceInput {
    a1: DichotomicObservable,
    a2: DichotomicObservable,
    #[serde(default)]
    rho: Option<DensityMatrix>,
}

pub fn cmd_reduce(cli: &Cli, args: &ReduceArgs) -> Result<Output> {
    let text = fs::read_to_string(&args.input)
        .with_context(|| format!("reading {}", args.input.display()))?;
    let input: ReduceInput =
        serde_json::from_str(&text).with_context(|| format!("parsing {}", args.input.display()))?;
    let dec = jordan_blocks(&input.a1, &input.a2)?;
    let pinching = verify_pinching(&input.a1, &input.a2, &dec);
    let mut report = dec.report();
    report.pinching_deviation = Some(pinching);
    let weights = input.rho.as_ref().map(|rho| dec.weights(rho)).transpose()?;
    let passed = pinching <= PINCHING_TOL && report.completeness_deviation <= COMPLETENESS_TOL;
    let code = if passed { EXIT_OK } else { EXIT_ERROR };

    let text = if cli.json {
        let mut result = serde_json::to_value(&report)?;
        result["weights"] = json!(weights);
        result["passed"] = json!(passed);
        document("reduce", json!({ "in": args.input }), result)
    } else {
        let mut t = format!("dim {}, {} blocks\n", report.dim, report.blocks.len());
        t.push_str("block,rank,phase,a1_x,a1_y,a1_z,a2_x,a2_y,a2_z");
        t.push_str(if weights.is_some() { ",weight\n" } else { "\n" });
        for (c, b) in report.blocks.iter().enumerate() {
            write!(t, "{c},{},{}", b.rank, fmt_g(b.phase))?;
            for x in b.bloch_a1.iter().chain(&b.bloch_a2) {
                write!(t, ",{}", fmt_g(*x))?;
            }
            match &weights {
                Some(w) => writeln!(t, ",{}", fmt_g(w[c]))?,
                None => t.push('\n'),
            }
        }
        writeln!(
            t,
            "# pinching deviation {:e}, completeness deviation {:e}: {}",
            pinching,
            report.completeness_deviation,
            if passed { "PASS" } else { "FAIL" }
        )?;
        t
    };
    Ok(Output { text, code })
}

fn parse_probs<const N: usize>(flag: &str, s: &str) -> Result<[f64; N]> {
    let values: Vec<f64> = s
        .split(',')
        .map(|p| p.trim().parse::<f64>())
        .collect::<std::result::Result<_, _>>()
        .with_context(|| format!("--{flag} {s:?}"))?;
    values
        .try_into()
        .map_err(|v: Vec<f64>| anyhow::anyhow!("--{flag} needs {N} values, got {}", v.len()))
}

pub fn cmd_simulate(cli: &Cli, args: &SimulateArgs) -> Result<Output> {
    let attack: AttackSpec = match (&args.attack, args.s) {
        (Some(path), _) => {
            let text =
                fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
            serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))?
        }
        (None, Some(s)) => build_optimal_attack(s, args.q)?,
        (None, None) => bail!("simulate needs --s or --attack"),
    };
    let config = ProtocolConfig {
        n_rounds: args.rounds,
        setting_probs_alice: parse_probs("alice-probs", &args.alice_probs)?,
        setting_probs_bob: parse_probs("bob-probs", &args.bob_probs)?,
        seed: cli.seed,
        symmetrize: !args.no_symmetrize,
    };
    let run = run_protocol_with_transcript(&attack, &config)?;

    if args.csv {
        let mut buf = Vec::new();
        write_transcript_csv(&run.transcript, &mut buf)?;
        return Ok(Output {
            text: String::from_utf8(buf)?,
            code: EXIT_OK,
        });
    }
    let r = &run.report;
    let code = r.key_rates.map_or(EXIT_NO_KEY, |k| rate_code(k.r_di));
    let text = if cli.json {
        document(
            "simulate",
            json!({ "attack": attack, "protocol": config }),
            serde_json::to_value(r)?,
        )
    } else {
        let mut t = String::new();
        writeln!(
            t,
            "rounds    {} (key {}, discarded {})",
            r.n_rounds, r.n_key, r.n_discarded
        )?;
        writeln!(
            t,
            "Q_hat     {} +- {}",
            fmt_g(r.qber.value),
            fmt_g(r.qber.se)
        )?;
        writeln!(
            t,
            "S_hat     {} +- {}",
            fmt_g(r.chsh.value),
            fmt_g(r.chsh.se)
        )?;
        match &r.key_rates {
            Some(k) => {
                writeln!(t, "r_di      {}", fmt_g(k.r_di))?;
                writeln!(
                    t,
                    "r_std     {}",
                    k.r_std.map_or_else(|| "undefined".into(), fmt_g)
                )?;
            }
            None => writeln!(t, "rates     undefined (Q_hat > 1/2)")?,
        }
        t
    };
    Ok(Output { text, code })
}

pub fn cmd_oracle(cli: &Cli, args: &OracleArgs) -> Result<Output> {
    let report = oracle_step3_sweep(args.samples, cli.seed)?;
    let code = if report.passed() { EXIT_OK } else { EXIT_ERROR };
    let text = if cli.json {
        document(
            "oracle",
            json!({ "samples": args.samples, "seed": cli.seed }),
            serde_json::to_value(&report)?,
        )
    } else {
        let mut t = format!(
            "{} violations, min slack {:e} (F(S)), {:e} (entropy bound)\n",
            report.n_violations, report.min_slack_bound, report.min_slack_lambda
        );
        writeln!(t, "argmin {}", report.argmin_bound)?;
        for v in &report.violations {
            writeln!(t, "violation {v}")?;
        }
        t
    };
    Ok(Output { text, code })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fmt_g_matches_printf() {
        let cases = [
            (1.0, "1"),
            (0.1, "0.1"),
            (0.5, "0.5"),
            (2.8284271247461903, "2.828427125"),
            (-0.0123456789012, "-0.0123456789"),
            (1.5e-5, "1.5e-05"),
            (0.0001, "0.0001"),
            (123456789012.0, "1.23456789e+11"),
            (9999999999.5, "1e+10"),
            (0.15, "0.15"),
        ];
        for (x, want) in cases {
            assert_eq!(fmt_g(x), want, "{x}");
        }
    }

    #[test]
    fn grid_parsing() {
        let g = parse_grid("2.1:2.8284:0.1").unwrap();
        assert_eq!(g.len(), 8);
        assert!((g[7] - 2.8).abs() < 1e-12);
        assert_eq!(parse_grid("2.5:2.5:0.1").unwrap(), vec![2.5]);
        assert!(parse_grid("2.5:2.1:0.1").is_err());
        assert!(parse_grid("1:2").is_err());
        assert!(parse_grid("1:2:0").is_err());
    }

    #[test]
    fn curve_grid_endpoints() {
        let rows = curve_rows(0.0, 0.15, 151, &ChshCurve::Line).unwrap();
        assert_eq!(rows.len(), 151);
        assert_eq!(rows[0].q, 0.0);
        assert_eq!(rows[150].q, 0.15);
        assert!((rows[0].r_di - 1.0).abs() < 1e-12);
        assert!((rows[0].r_std.unwrap() - 1.0).abs() < 1e-12);
        assert!(curve_rows(0.1, 0.1, 5, &ChshCurve::Line).is_err());
        assert!(curve_rows(0.0, 0.6, 5, &ChshCurve::Line).is_err());
        assert!(curve_rows(0.0, 0.1, 1, &ChshCurve::Line).is_err());
    }

    #[test]
    fn undefined_standard_rate_is_empty_cell() {
        let rows = curve_rows(0.0, 0.5, 3, &ChshCurve::Fixed(2.8)).unwrap();
        let csv = curve_csv(&rows, false);
        let last = csv.lines().last().unwrap();
        assert!(last.ends_with(','), "{last}");
    }

    #[test]
    fn probability_lists() {
        assert_eq!(
            parse_probs::<3>("a", "0.5,0.25,0.25").unwrap(),
            [0.5, 0.25, 0.25]
        );
        assert!(parse_probs::<2>("b", "0.5,0.25,0.25").is_err());
        assert!(parse_probs::<2>("b", "x,1").is_err());
    }
}
