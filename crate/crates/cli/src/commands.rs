//! One function per subcommand; each returns rendered output.

use std::path::PathBuf;
use std::str::FromStr;

use clap::Args;
use num_complex::Complex64;
use serde::Serialize;
use soliton_poles::asymptotics::{match_families, MatchReport};
use soliton_poles::blowup::{construct_scenario, coupled_system_residual, BlowupScenario, CoupledResidual};
use soliton_poles::exppoly::{oracle_poles_with, OraclePole, RootOptions};
use soliton_poles::interaction::{interaction_sweep, maxima_transition, negative_speed_onset, SweepRow};
use soliton_poles::kernel::{eval_u, eval_u_x};
use soliton_poles::report::{format_float, to_json, Envelope, Table};
use soliton_poles::tracker::{track_all, PoleCurve, TrackOptions};
use soliton_poles::verify::{verify_suite, Status, VerifyReport};
use soliton_poles::{PointValue, SolitonConfig};

use crate::config::{Format, Settings};

pub enum Failure {
    Usage(anyhow::Error),
    Compute(anyhow::Error),
}

impl From<soliton_poles::Error> for Failure {
    fn from(e: soliton_poles::Error) -> Self {
        Failure::Compute(e.into())
    }
}

pub struct Output {
    pub text: String,
    pub path: Option<PathBuf>,
    /// False turns a completed run into exit code 1.
    pub passed: bool,
}

fn usage(msg: impl Into<String>) -> Failure {
    Failure::Usage(anyhow::anyhow!(msg.into()))
}

fn config(s: &Settings) -> Result<SolitonConfig, Failure> {
    s.soliton().map_err(Failure::Usage)
}

/// The flag if given, else the config-file key, else `default`.
fn pick(s: &Settings, flag: Option<f64>, key: &str, default: f64) -> Result<f64, Failure> {
    match flag {
        Some(v) => Ok(v),
        None => Ok(s.extra_f64(key).map_err(Failure::Usage)?.unwrap_or(default)),
    }
}

fn render<T: Serialize>(
    s: &Settings,
    command: &str,
    cfg: Option<&SolitonConfig>,
    seed: Option<u64>,
    result: &T,
    table: impl FnOnce(&T) -> Table,
) -> Result<Output, Failure> {
    let text = match s.format {
        Format::Json => to_json(&Envelope::new(command, cfg, seed, result))?,
        Format::Csv => table(result).to_csv()?,
    };
    Ok(Output {
        text,
        path: s.out.clone(),
        passed: true,
    })
}

fn complex_cells(z: Complex64) -> [String; 2] {
    [format_float(z.re), format_float(z.im)]
}

fn point_cells(v: PointValue) -> [String; 2] {
    match v {
        PointValue::Finite(z) => complex_cells(z),
        PointValue::Pole => ["pole".into(), "pole".into()],
    }
}

#[derive(Args, Debug)]
pub struct EvalArgs {
    /// Complex point such as `0.5`, `1-2i` or `3.14i`.
    #[arg(long, allow_hyphen_values = true)]
    pub x: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    pub t: Option<f64>,
}

#[derive(Serialize)]
struct EvalResult {
    x: Complex64,
    t: f64,
    u: PointValue,
    u_x: PointValue,
}

pub fn eval(s: &Settings, a: EvalArgs) -> Result<Output, Failure> {
    let cfg = config(s)?;
    let raw = a.x.or_else(|| s.extra.get("x").cloned()).unwrap_or_else(|| "0".into());
    let x = Complex64::from_str(raw.trim()).map_err(|e| usage(format!("--x {raw:?}: {e}")))?;
    let t = pick(s, a.t, "t", 0.0)?;
    let result = EvalResult {
        x,
        t,
        u: eval_u(&cfg, x, t)?,
        u_x: eval_u_x(&cfg, x, t)?,
    };
    render(s, "eval", Some(&cfg), None, &result, |r| {
        let mut table = Table::new(&["re_x", "im_x", "t", "re_u", "im_u", "re_u_x", "im_u_x"]);
        let mut row: Vec<String> = complex_cells(r.x).into();
        row.push(format_float(r.t));
        row.extend(point_cells(r.u));
        row.extend(point_cells(r.u_x));
        table.push(row);
        table
    })
}

#[derive(Args, Debug)]
pub struct PolesArgs {
    #[arg(long, allow_hyphen_values = true)]
    pub t: Option<f64>,
}

#[derive(Serialize)]
struct PolesResult {
    t: f64,
    total_multiplicity: usize,
    poles: Vec<OraclePole>,
}

pub fn poles(s: &Settings, a: PolesArgs) -> Result<Output, Failure> {
    let cfg = config(s)?;
    if cfg.comm().is_none() {
        return Err(usage("poles needs exact wavenumbers; pass --k1/--k2 as integers or p/q"));
    }
    let mut opts = RootOptions::default();
    if let Some(digits) = s.precision {
        if !(1..=32).contains(&digits) {
            return Err(usage(format!("--precision must lie in 1..=32, got {digits}")));
        }
        opts.digits = digits;
    }
    let t = pick(s, a.t, "t", 0.0)?;
    let poles = oracle_poles_with(&cfg, t, opts)?;
    let result = PolesResult {
        t,
        total_multiplicity: poles.iter().map(|p| p.multiplicity).sum(),
        poles,
    };
    render(s, "poles", Some(&cfg), None, &result, |r| {
        let mut table = Table::new(&["re_x", "im_x", "multiplicity", "condition"]);
        for p in &r.poles {
            let mut row: Vec<String> = complex_cells(p.x).into();
            row.push(p.multiplicity.to_string());
            row.push(format_float(p.condition));
            table.push(row);
        }
        table
    })
}

#[derive(Args, Debug)]
pub struct SpanArgs {
    /// Start time; defaults to two units before the collision time.
    #[arg(long, allow_hyphen_values = true)]
    pub t0: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub t1: Option<f64>,
}

#[derive(Serialize)]
struct TrackResult {
    t0: f64,
    t1: f64,
    curves: Vec<PoleCurve>,
}

pub fn track(s: &Settings, a: SpanArgs) -> Result<Output, Failure> {
    let cfg = config(s)?;
    let b = cfg.translation().1;
    let t0 = pick(s, a.t0, "t0", b - 2.0)?;
    let t1 = pick(s, a.t1, "t1", b + 2.0)?;
    if t1 <= t0 {
        return Err(usage(format!("--t1 must exceed --t0 (got {t0} and {t1})")));
    }
    let curves = track_all(&cfg, t0, t1, &TrackOptions::default())?;
    let result = TrackResult { t0, t1, curves };
    render(s, "track", Some(&cfg), None, &result, |r| {
        let mut table = Table::new(&["curve", "t", "re_x", "im_x", "abs_F", "flags"]);
        for (i, c) in r.curves.iter().enumerate() {
            let flags = c.flag_string();
            for p in &c.samples {
                let mut row = vec![i.to_string(), format_float(p.t)];
                row.extend(complex_cells(p.x));
                row.push(format_float(p.abs_f));
                row.push(flags.clone());
                table.push(row);
            }
        }
        table
    })
}

#[derive(Args, Debug)]
pub struct AsymptArgs {
    /// Distance from the collision time at which curves are labelled.
    #[arg(long)]
    pub horizon: Option<f64>,
}

pub fn asympt(s: &Settings, a: AsymptArgs) -> Result<Output, Failure> {
    let cfg = config(s)?;
    let horizon = pick(s, a.horizon, "horizon", 10.0)?;
    if !(horizon > 0.0) {
        return Err(usage(format!("--horizon must be positive, got {horizon}")));
    }
    let b = cfg.translation().1;
    let curves = track_all(&cfg, b - 2.0 * horizon, b + 2.0 * horizon, &TrackOptions::default())?;
    let report = match_families(&curves, &cfg, horizon)?;
    render(s, "asympt", Some(&cfg), None, &report, |r: &MatchReport| {
        let mut table = Table::new(&["curve", "end", "label", "residual", "raw_residual"]);
        for m in &r.matches {
            for (end, l) in [("past", &m.past), ("future", &m.future)] {
                if let Some(l) = l {
                    table.push(vec![
                        m.curve.to_string(),
                        end.into(),
                        l.label.to_string(),
                        format_float(l.residual),
                        format_float(l.raw_residual),
                    ]);
                }
            }
        }
        table
    })
}

pub fn verify(s: &Settings) -> Result<Output, Failure> {
    let cfg = config(s)?;
    let report = verify_suite(&cfg, s.seed);
    let mut out = render(s, "verify", Some(&cfg), Some(s.seed), &report, |r: &VerifyReport| {
        let mut table = Table::new(&["check", "status", "measured", "threshold", "detail"]);
        for c in &r.checks {
            let status = match c.status {
                Status::Pass => "pass",
                Status::Fail => "fail",
                Status::Skip => "skip",
            };
            table.push(vec![
                c.name.to_string(),
                status.into(),
                format_float(c.measured),
                format_float(c.threshold),
                c.detail.clone(),
            ]);
        }
        table
    })?;
    out.passed = report.passed();
    Ok(out)
}

#[derive(Args, Debug)]
pub struct BlowupArgs {
    #[arg(long, allow_hyphen_values = true)]
    pub t0: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub t1: Option<f64>,
    /// Line `Im x = -alpha`; chosen between pole ordinates when absent.
    #[arg(long, allow_hyphen_values = true)]
    pub alpha: Option<f64>,
}

#[derive(Serialize)]
struct BlowupResult {
    scenario: BlowupScenario,
    /// The real coupled system on the line, a quarter time unit before the crossing.
    coupled: CoupledResidual,
}

pub fn blowup(s: &Settings, a: BlowupArgs) -> Result<Output, Failure> {
    let cfg = config(s)?;
    let b = cfg.translation().1;
    let t0 = pick(s, a.t0, "t0", b - 1.0)?;
    let t1 = pick(s, a.t1, "t1", b + 1.0)?;
    if t1 <= t0 {
        return Err(usage(format!("--t1 must exceed --t0 (got {t0} and {t1})")));
    }
    let alpha = match a.alpha {
        Some(v) => Some(v),
        None => s.extra_f64("alpha").map_err(Failure::Usage)?,
    };
    let scenario = construct_scenario(&cfg, t0, t1, alpha, &TrackOptions::default())?;
    let probe_t = scenario.crossing.t_star - 0.25;
    let coupled = coupled_system_residual(&cfg, scenario.alpha, scenario.series[0].argmax, probe_t, 1e-3)?;
    let result = BlowupResult { scenario, coupled };
    render(s, "blowup", Some(&cfg), None, &result, |r| {
        let mut table = Table::new(&["t", "t_star_minus_t", "sup_abs_u", "argmax", "tail_rate_left", "tail_rate_right"]);
        let t_star = r.scenario.crossing.t_star;
        for p in &r.scenario.series {
            table.push(vec![
                format_float(p.t),
                format_float(t_star - p.t),
                format_float(p.sup_abs_u),
                format_float(p.argmax),
                format_float(p.tail_rate.0),
                format_float(p.tail_rate.1),
            ]);
        }
        table
    })
}

#[derive(Args, Debug)]
pub struct InteractionArgs {
    /// Comma-separated values of k2/k1 for the sweep.
    #[arg(long, value_delimiter = ',')]
    pub ratios: Option<Vec<f64>>,
    /// Dimensionless finite-difference step.
    #[arg(long)]
    pub h: Option<f64>,
    /// Bisection width for the transition and onset brackets.
    #[arg(long)]
    pub tol: Option<f64>,
}

#[derive(Serialize)]
struct InteractionResult {
    sweep: Vec<SweepRow>,
    maxima_transition: (f64, f64),
    negative_speed_onset: (f64, f64),
}

pub fn interaction(s: &Settings, a: InteractionArgs) -> Result<Output, Failure> {
    let cfg = config(s)?;
    let ratios = a
        .ratios
        .unwrap_or_else(|| (0..=12).map(|i| 1.25 + 0.25 * i as f64).collect());
    if ratios.iter().any(|r| !(*r > 1.0)) {
        return Err(usage("every ratio must exceed 1"));
    }
    let h = pick(s, a.h, "h", 1e-3)?;
    let tol = pick(s, a.tol, "tol", 1e-4)?;
    let result = InteractionResult {
        sweep: interaction_sweep(cfg.k1(), &ratios, cfg.variant(), h)?,
        maxima_transition: maxima_transition(2.0, 3.0, tol)?,
        negative_speed_onset: negative_speed_onset(2.0, 2.5, tol)?,
    };
    render(s, "interaction", Some(&cfg), None, &result, |r| {
        let opt = |v: Option<f64>| v.map_or_else(String::new, format_float);
        let mut table = Table::new(&[
            "ratio",
            "variant",
            "uxx_closed",
            "uxx_measured",
            "speed_closed",
            "speed_measured",
            "maxima",
        ]);
        for row in &r.sweep {
            table.push(vec![
                format_float(row.ratio),
                row.variant.to_string(),
                format_float(row.uxx_closed),
                format_float(row.uxx_measured),
                opt(row.speed_closed),
                opt(row.speed_measured),
                row.maxima.to_string(),
            ]);
        }
        table
    })
}
