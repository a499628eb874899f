//! The invariant suite run by `verify`: every check applicable to one
//! configuration, with seeded random probes.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::analysis::{
    check_no_real_poles, odd_parity_translation, parity_translation_theta, residue_at_pole, translation_residual,
    vertical_sign, Identity,
};
use crate::asymptotics::{match_families, seed_time};
use crate::error::Result;
use crate::exppoly::oracle_poles;
use crate::interaction::{extremum_speed, measure_center_derivatives, measure_extremum_speed, uxx_at_center};
use crate::kernel::{eqg_residual, eval_u, eval_u_sumform, pde_residual, Factor, SolitonConfig};
use crate::tracker::{collision_points, track_all, TrackOptions};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Pass,
    Fail,
    Skip,
}

#[derive(Clone, Debug, Serialize)]
pub struct Check {
    pub name: &'static str,
    pub status: Status,
    pub measured: f64,
    pub threshold: f64,
    pub detail: String,
}

impl Check {
    fn below(name: &'static str, measured: f64, threshold: f64, detail: impl Into<String>) -> Self {
        Self {
            name,
            status: if measured < threshold { Status::Pass } else { Status::Fail },
            measured,
            threshold,
            detail: detail.into(),
        }
    }

    fn skip(name: &'static str, why: &str) -> Self {
        Self {
            name,
            status: Status::Skip,
            measured: f64::NAN,
            threshold: f64::NAN,
            detail: why.into(),
        }
    }

    fn failed(name: &'static str, err: impl std::fmt::Display) -> Self {
        Self {
            name,
            status: Status::Fail,
            measured: f64::NAN,
            threshold: f64::NAN,
            detail: err.to_string(),
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct VerifyReport {
    pub seed: u64,
    pub checks: Vec<Check>,
}

impl VerifyReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.status != Status::Fail)
    }
}

struct Probe<'a> {
    cfg: &'a SolitonConfig,
    rng: ChaCha8Rng,
}

impl Probe<'_> {
    /// A point of the strip with every exponent of moderate size.
    fn complex_point(&mut self) -> (Complex64, f64) {
        let (a, b) = self.cfg.translation();
        let w = self.cfg.strip_scale();
        let k = self.cfg.k2();
        let (xs, ts) = ((40.0 / k).min(6.0), (40.0 / k.powi(3)).min(2.0));
        let x = Complex64::new(a + self.rng.gen_range(-xs..xs), self.rng.gen_range(-w..w));
        (x, b + self.rng.gen_range(-ts..ts))
    }

    fn real_point(&mut self) -> (f64, f64) {
        let (a, b) = self.cfg.translation();
        (a + self.rng.gen_range(-2.0..2.0), b + self.rng.gen_range(-1.0..1.0))
    }
}

fn max_over<I: Iterator<Item = Result<f64>>>(mut values: I) -> Result<f64> {
    values.try_fold(0.0f64, |m, v| v.map(|v| m.max(v)))
}

fn check_eqg(p: &mut Probe) -> Check {
    let name = "eqg_residual";
    let cfg = p.cfg;
    let points: Vec<_> = (0..100).map(|_| p.complex_point()).collect();
    match max_over(points.iter().map(|&(x, t)| eqg_residual(cfg, x, t).map(|r| r.relative()))) {
        Ok(m) => Check::below(name, m, 1e-10, "max relative residual at 100 random points"),
        Err(e) => Check::failed(name, e),
    }
}

fn check_pde(p: &mut Probe) -> Check {
    let name = "pde_richardson";
    let (x, t) = p.real_point();
    let ratio = pde_residual(p.cfg, x, t, 1e-2)
        .and_then(|r1| pde_residual(p.cfg, x, t, 5e-3).map(|r2| r1.norm() / r2.norm()));
    match ratio {
        Ok(r) => Check::below(name, (r - 4.0).abs(), 0.2, format!("h-halving ratio {r:.4} at x = {x:.4}, t = {t:.4}")),
        Err(e) => Check::failed(name, e),
    }
}

fn check_sum_form(p: &mut Probe) -> Check {
    let name = "sum_form";
    let cfg = p.cfg;
    let mut worst = 0.0f64;
    for _ in 0..100 {
        let (x, t) = p.complex_point();
        let (Ok(u), Ok(v)) = (eval_u(cfg, x, t), eval_u_sumform(cfg, x, t)) else {
            continue;
        };
        if let (Some(u), Some(v)) = (u.finite(), v.finite()) {
            worst = worst.max((u - v).norm() / u.norm().max(1.0));
        }
    }
    Check::below(name, worst, 1e-10, "quotient form against sum of one-soliton terms")
}

fn check_real_line(cfg: &SolitonConfig) -> Check {
    let name = "real_line_pole_free";
    let (a, b) = cfg.translation();
    let minima: Result<Vec<_>> = [-1.0, 0.0, 1.0]
        .iter()
        .map(|dt| check_no_real_poles(cfg, b + dt, a - 20.0, a + 20.0, 4001))
        .collect();
    match minima {
        Ok(m) => {
            let least = m.iter().flatten().map(|l| l.min_relative).fold(f64::INFINITY, f64::min);
            Check {
                name,
                status: if least > 1e-6 { Status::Pass } else { Status::Fail },
                measured: least,
                threshold: 1e-6,
                detail: "smallest relative |F| on the real lines (must stay above threshold)".into(),
            }
        }
        Err(e) => Check::failed(name, e),
    }
}

fn check_pole_count(cfg: &SolitonConfig) -> Check {
    let name = "pole_count";
    let Some(comm) = cfg.comm().copied() else {
        return Check::skip(name, "wavenumbers are not commensurable");
    };
    if cfg.exact_wavenumbers().is_none() {
        return Check::skip(name, "exact wavenumbers required");
    }
    let expected = 2 * (comm.p1 + comm.p2) as usize;
    let (_, b) = cfg.translation();
    let mut worst = 0usize;
    for dt in [-1.0, -0.1, 0.0, 0.1, 1.0] {
        match oracle_poles(cfg, b + dt) {
            Ok(p) => {
                let n: usize = p.iter().map(|p| p.multiplicity).sum();
                worst = worst.max(n.abs_diff(expected));
            }
            Err(e) => return Check::failed(name, e),
        }
    }
    Check::below(name, worst as f64, 0.5, format!("count with multiplicity against {expected}"))
}

fn check_residues(cfg: &SolitonConfig) -> Check {
    let name = "residue_quantization";
    if cfg.exact_wavenumbers().is_none() || cfg.comm().is_none() {
        return Check::skip(name, "oracle poles need exact commensurable wavenumbers");
    }
    let (_, b) = cfg.translation();
    let t = b + 0.3;
    let poles = match oracle_poles(cfg, t) {
        Ok(p) => p,
        Err(e) => return Check::failed(name, e),
    };
    let mut worst = 0.0f64;
    for p in poles.iter().filter(|p| p.multiplicity == 1) {
        match residue_at_pole(cfg, p.x, t, None) {
            Ok(r) => worst = worst.max(r.quantization_error()),
            Err(e) => return Check::failed(name, e),
        }
    }
    Check::below(name, worst, 1e-8, format!("distance of residues from +-i at t = {t}"))
}

fn check_sign_law(cfg: &SolitonConfig) -> Check {
    let name = "sign_law";
    let (a, b) = cfg.translation();
    let start = if cfg.exact_wavenumbers().is_some() && cfg.comm().is_some() {
        b - 2.0
    } else {
        seed_time(cfg, 1e-6)
    };
    let curves = match track_all(cfg, start, b + 2.0, &TrackOptions::default()) {
        Ok(c) => c,
        Err(e) => return Check::failed(name, e),
    };
    let exceptional: Vec<Complex64> = collision_points(cfg);
    let (mut checked, mut violations) = (0usize, 0usize);
    for s in curves.iter().flat_map(|c| &c.samples) {
        if s.t == b || (s.x.re - a).abs() < 1e-9 || exceptional.iter().any(|c| (s.x - c).norm() < 1e-3) {
            continue;
        }
        if let Ok(check) = vertical_sign(cfg, s.x, s.t) {
            if let Some(ok) = check.agrees {
                checked += 1;
                violations += usize::from(!ok);
            }
        }
    }
    Check::below(name, violations as f64, 0.5, format!("{violations} violations over {checked} tracked samples"))
}

fn check_translation(p: &mut Probe) -> Check {
    let name = "translation_identity";
    let cfg = p.cfg;
    let identities: Vec<(Identity, f64)> = if let Ok(tr) = parity_translation_theta(cfg) {
        vec![(Identity::Parity, tr.theta)]
    } else if let Ok(tr) = odd_parity_translation(cfg) {
        vec![
            (Identity::Factor(Factor::First), tr.theta1),
            (Identity::Factor(Factor::Second), tr.theta2),
        ]
    } else {
        return Check::skip(name, "no translation identity applies");
    };
    let mut worst = 0.0f64;
    for _ in 0..100 {
        let (x, t) = p.complex_point();
        for &(id, theta) in &identities {
            worst = worst.max(translation_residual(cfg, id, theta, x, t));
        }
    }
    Check::below(name, worst, 1e-10, "relative residual at 100 random points")
}

fn check_asymptotics(cfg: &SolitonConfig) -> Check {
    let name = "asymptotic_families";
    if cfg.exact_wavenumbers().is_none() || cfg.comm().is_none() {
        return Check::skip(name, "tracking from the oracle needs exact commensurable wavenumbers");
    }
    if !collision_points(cfg).is_empty() {
        return Check::skip(name, "exceptional configuration");
    }
    let (_, b) = cfg.translation();
    let horizon = 10.0;
    let report = track_all(cfg, b - 2.0 * horizon, b + 2.0 * horizon, &TrackOptions::default())
        .and_then(|c| match_families(&c, cfg, horizon));
    match report {
        Ok(r) if r.unmatched.is_empty() => Check::below(name, r.max_residual(), 1e-3, format!("{} curves labelled at |t| = {horizon}", r.matches.len())),
        Ok(r) => Check::failed(name, format!("unmatched curves {:?}", r.unmatched)),
        Err(e) => Check::failed(name, e),
    }
}

fn check_interaction(cfg: &SolitonConfig) -> Check {
    let name = "interaction_closed_forms";
    if cfg.has_shifts() {
        return Check::skip(name, "closed forms assume zero shifts");
    }
    let closed = uxx_at_center(cfg);
    let measured = measure_center_derivatives(cfg, 1e-3).map(|(uxx, _)| uxx);
    let speed = extremum_speed(cfg).and_then(|s| measure_extremum_speed(cfg, 1e-3).map(|m| (s, m)));
    match (measured, speed) {
        (Ok(m), Ok((s, ms))) => {
            let err = ((m - closed) / closed).abs().max(((ms - s) / s).abs());
            Check::below(name, err, 1e-6, format!("u_xx {m:.10} vs {closed:.10}, speed {ms:.10} vs {s:.10}"))
        }
        (Ok(m), Err(_)) => Check::below(name, ((m - closed) / closed).abs(), 1e-6, "degenerate centre; speed skipped"),
        (Err(e), _) => Check::failed(name, e),
    }
}

pub fn verify_suite(cfg: &SolitonConfig, seed: u64) -> VerifyReport {
    let mut probe = Probe {
        cfg,
        rng: ChaCha8Rng::seed_from_u64(seed),
    };
    let checks = vec![
        check_eqg(&mut probe),
        check_pde(&mut probe),
        check_sum_form(&mut probe),
        check_translation(&mut probe),
        check_real_line(cfg),
        check_pole_count(cfg),
        check_residues(cfg),
        check_sign_law(cfg),
        check_asymptotics(cfg),
        check_interaction(cfg),
    ];
    VerifyReport { seed, checks }
}
