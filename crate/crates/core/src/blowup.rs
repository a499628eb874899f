//! Complex solutions `u(x - i alpha, t)` on the real line that become singular
//! when a pole crosses `Im x = -alpha`.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::kernel::{eval_u, fd_jet, SolitonConfig, Variant};
use crate::tracker::{pole_velocity, track_all, PoleCurve, TrackOptions};

/// Vertical speeds below this make a crossing tangential.
const TANGENTIAL_SPEED: f64 = 1e-8;

/// A pole crossing the line `Im x = -alpha`.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct Crossing {
    pub t_star: f64,
    pub x_star: Complex64,
    /// `Im x'(t_star)`.
    pub vertical_speed: f64,
}

/// Time at which `Im x(t) = -alpha` on the curve, bracketed on the samples
/// and refined by safeguarded secant steps.
pub fn find_crossing(curve: &PoleCurve, cfg: &SolitonConfig, alpha: f64) -> Result<Crossing> {
    let level = -alpha;
    let phi = |x: Complex64| x.im - level;
    let flat = 1e-12 * cfg.strip_scale();
    for s in &curve.samples {
        if phi(s.x).abs() <= flat {
            let speed = pole_velocity(cfg, s.x, s.t).im;
            if speed.abs() < TANGENTIAL_SPEED {
                return Err(Error::TangentialCrossing { t: s.t, speed });
            }
        }
    }
    let bracket = curve
        .samples
        .windows(2)
        .find(|w| phi(w[0].x).signum() != phi(w[1].x).signum())
        .ok_or(Error::NoCrossing { level })?;
    let (mut a, mut b) = (bracket[0].t, bracket[1].t);
    let (mut fa, mut fb) = (phi(bracket[0].x), phi(bracket[1].x));
    let mut x_mid = bracket[0].x;
    for it in 0..200 {
        let secant = b - fb * (b - a) / (fb - fa);
        let mid = 0.5 * (a + b);
        let t = if it % 3 == 2 || !(secant > a && secant < b) { mid } else { secant };
        let x = curve.position_at(cfg, t)?;
        let f = phi(x);
        x_mid = x;
        if f == 0.0 || (b - a) < 1e-12 {
            a = t;
            b = t;
            break;
        }
        if f.signum() == fa.signum() {
            a = t;
            fa = f;
        } else {
            b = t;
            fb = f;
        }
    }
    let t_star = 0.5 * (a + b);
    let x_star = curve.position_at(cfg, t_star).unwrap_or(x_mid);
    let vertical_speed = pole_velocity(cfg, x_star, t_star).im;
    if vertical_speed.abs() < TANGENTIAL_SPEED {
        return Err(Error::TangentialCrossing {
            t: t_star,
            speed: vertical_speed,
        });
    }
    Ok(Crossing {
        t_star,
        x_star,
        vertical_speed,
    })
}

/// Picks the line half way between two neighbouring pole ordinates at `t_seed`
/// that is crossed transversally first after `t_seed`.
pub fn auto_alpha(curves: &[PoleCurve], cfg: &SolitonConfig, t_seed: f64) -> Result<(f64, usize, Crossing)> {
    let mut ordinates: Vec<f64> = curves
        .iter()
        .filter_map(|c| c.position_at(cfg, t_seed).ok())
        .map(|x| x.im)
        .collect();
    ordinates.sort_by(f64::total_cmp);
    ordinates.dedup_by(|a, b| (*a - *b).abs() < 1e-9);
    let mut best: Option<(f64, usize, Crossing)> = None;
    for pair in ordinates.windows(2) {
        let level = 0.5 * (pair[0] + pair[1]);
        for (i, curve) in curves.iter().enumerate() {
            let mut later = curve.clone();
            later.samples.retain(|s| s.t >= t_seed);
            if later.samples.len() < 2 {
                continue;
            }
            if let Ok(c) = find_crossing(&later, cfg, -level) {
                if best.as_ref().map_or(true, |(_, _, b)| c.t_star < b.t_star) {
                    best = Some((-level, i, c));
                }
            }
        }
    }
    best.ok_or(Error::NoCrossing { level: f64::NAN })
}

/// Real sampling grid for profiles.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct ProfileGrid {
    pub centre: f64,
    pub half_width: f64,
    pub spacing: f64,
}

impl ProfileGrid {
    /// Centred on the crossing, wide enough for both solitons over `|t - t_c| <= span`.
    pub fn around(cfg: &SolitonConfig, x_star: Complex64, span: f64) -> Self {
        let (_, b) = cfg.translation();
        let travel = cfg.k2().powi(2) * span.max((x_star.re - b).abs());
        Self {
            centre: x_star.re,
            half_width: 30.0 / cfg.k1() + travel,
            spacing: cfg.strip_scale() / 64.0,
        }
    }
}

#[derive(Clone, Copy, Debug, Serialize)]
pub struct ProfilePoint {
    pub t: f64,
    pub sup_abs_u: f64,
    pub argmax: f64,
    /// Fitted exponential decay rates `(left, right)` of the tails.
    pub tail_rate: (f64, f64),
}

fn abs_u(cfg: &SolitonConfig, alpha: f64, x: f64, t: f64) -> Result<f64> {
    let z = Complex64::new(x, -alpha);
    eval_u(cfg, z, t)?
        .finite()
        .map(|v| v.norm())
        .ok_or(Error::StencilHitsPole { node: z, t })
}

fn golden_max(f: impl Fn(f64) -> Result<f64>, mut a: f64, mut b: f64) -> Result<(f64, f64)> {
    let r = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = b - r * (b - a);
    let mut d = a + r * (b - a);
    let (mut fc, mut fd) = (f(c)?, f(d)?);
    for _ in 0..100 {
        if (b - a).abs() < 1e-15 * (1.0 + a.abs()) {
            break;
        }
        if fc > fd {
            b = d;
            d = c;
            fd = fc;
            c = b - r * (b - a);
            fc = f(c)?;
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + r * (b - a);
            fd = f(d)?;
        }
    }
    Ok(if fc > fd { (c, fc) } else { (d, fd) })
}

/// Least-squares slope of `log |u|` over `[start, start + length]` on one side.
fn tail_slope(cfg: &SolitonConfig, alpha: f64, t: f64, start: f64, length: f64) -> Result<f64> {
    let n = 41;
    let pts: Vec<(f64, f64)> = (0..n)
        .map(|k| {
            let x = start + length * k as f64 / (n - 1) as f64;
            abs_u(cfg, alpha, x, t).map(|v| (x, v.ln()))
        })
        .collect::<Result<_>>()?;
    Ok(linear_fit(&pts).0)
}

/// `(slope, intercept, r_squared)` of a least-squares line.
fn linear_fit(pts: &[(f64, f64)]) -> (f64, f64, f64) {
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let syy: f64 = pts.iter().map(|p| (p.1 - my).powi(2)).sum();
    let slope = sxy / sxx;
    let r2 = if syy == 0.0 { 1.0 } else { sxy * sxy / (sxx * syy) };
    (slope, my - slope * mx, r2)
}

/// Decay rates of `|u(x - i alpha, t)|` as `x -> -inf` and `x -> +inf`, fitted
/// beyond both solitons.
pub fn tail_rates(cfg: &SolitonConfig, alpha: f64, t: f64) -> Result<(f64, f64)> {
    let (a, b) = cfg.translation();
    let reach = cfg.k2().powi(2) * (t - b).abs() + 10.0 / cfg.k1();
    let length = 10.0 / cfg.k1();
    let right = -tail_slope(cfg, alpha, t, a + reach, length)?;
    let left = tail_slope(cfg, alpha, t, a - reach - length, length)?;
    Ok((left, right))
}

/// Sup of `|u(x - i alpha, t)|` over a real grid with local refinement.
pub fn sup_norm(cfg: &SolitonConfig, alpha: f64, t: f64, grid: &ProfileGrid) -> Result<(f64, f64)> {
    let n = (2.0 * grid.half_width / grid.spacing).ceil() as usize + 1;
    let lo = grid.centre - grid.half_width;
    let values: Vec<(f64, f64)> = (0..n)
        .map(|k| {
            let x = lo + grid.spacing * k as f64;
            abs_u(cfg, alpha, x, t).map(|v| (x, v))
        })
        .collect::<Result<_>>()?;
    let (mut x_best, mut peak) = values
        .iter()
        .copied()
        .max_by(|a, b| a.1.total_cmp(&b.1))
        .expect("non-empty grid");
    let boundary = values[0].1.max(values[n - 1].1);
    if boundary > 1e-8 * peak {
        return Err(Error::GridTooNarrow { boundary, peak });
    }
    let mut h = grid.spacing;
    for _ in 0..3 {
        let fine = h / 16.0;
        let centre = x_best;
        for k in -32..=32 {
            let x = centre + fine * k as f64;
            let v = abs_u(cfg, alpha, x, t)?;
            if v > peak {
                peak = v;
                x_best = x;
            }
        }
        h = fine;
    }
    let (x, v) = golden_max(|x| abs_u(cfg, alpha, x, t), x_best - h, x_best + h)?;
    Ok(if v > peak { (v, x) } else { (peak, x_best) })
}

/// Profile series at the given times (which must avoid `t_star`).
pub fn blowup_profile(cfg: &SolitonConfig, alpha: f64, t_star: f64, times: &[f64], grid: &ProfileGrid) -> Result<Vec<ProfilePoint>> {
    if times.iter().any(|&t| t == t_star) {
        return Err(Error::Precondition("profile times must exclude t_star".into()));
    }
    times
        .par_iter()
        .map(|&t| {
            let (sup_abs_u, argmax) = sup_norm(cfg, alpha, t, grid)?;
            Ok(ProfilePoint {
                t,
                sup_abs_u,
                argmax,
                tail_rate: tail_rates(cfg, alpha, t)?,
            })
        })
        .collect()
}

#[derive(Clone, Copy, Debug, Serialize)]
pub struct RateFit {
    /// Free least-squares slope of `log sup |u|` against `log |t - t_star|`.
    pub exponent: f64,
    /// `exp` of the intercept with the slope fixed at `-1`.
    pub amplitude: f64,
    pub r_squared: f64,
}

pub fn fit_blowup_rate(series: &[ProfilePoint], t_star: f64) -> Result<RateFit> {
    let pts: Vec<(f64, f64)> = series
        .iter()
        .map(|p| ((p.t - t_star).abs().ln(), p.sup_abs_u.ln()))
        .collect();
    let span = pts.iter().map(|p| p.0).fold(f64::NEG_INFINITY, f64::max)
        - pts.iter().map(|p| p.0).fold(f64::INFINITY, f64::min);
    if pts.len() < 4 || span < 2.0 * std::f64::consts::LN_10 {
        return Err(Error::Precondition(format!(
            "need at least 4 points over two decades, have {} over {:.2} decades",
            pts.len(),
            span / std::f64::consts::LN_10
        )));
    }
    let (exponent, _, r_squared) = linear_fit(&pts);
    if r_squared < 0.99 {
        return Err(Error::PoorFit { r_squared });
    }
    let log_amp = pts.iter().map(|p| p.1 + p.0).sum::<f64>() / pts.len() as f64;
    Ok(RateFit {
        exponent,
        amplitude: log_amp.exp(),
        r_squared,
    })
}

/// Finite-difference residuals of the real system for `r = Re u`, `s = Im u`.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct CoupledResidual {
    /// With the coupling coefficient `12` obtained by splitting `6 u^2 u_x`.
    pub derived: (f64, f64),
    /// With the coupling coefficient `2`.
    pub literal: (f64, f64),
    /// The complex equation residual, whose parts equal `derived`.
    pub complex: Complex64,
}

pub fn coupled_system_residual(cfg: &SolitonConfig, alpha: f64, x: f64, t: f64, h: f64) -> Result<CoupledResidual> {
    let shift = Complex64::new(0.0, -alpha);
    let jet = fd_jet(|z, t| eval_u(cfg, z + shift, t), Complex64::new(x, 0.0), t, h)?;
    let (r, s) = (jet.u.re, jet.u.im);
    let (r_x, s_x) = (jet.u_x.re, jet.u_x.im);
    let base_r = jet.u_t.re + jet.u_xxx.re + 6.0 * (r * r - s * s) * r_x;
    let base_s = jet.u_t.im + jet.u_xxx.im + 6.0 * (r * r - s * s) * s_x;
    let system = |c: f64| (base_r - c * r * s * s_x, base_s + c * r * s * r_x);
    Ok(CoupledResidual {
        derived: system(12.0),
        literal: system(2.0),
        complex: jet.mkdv_residual(),
    })
}

/// A constructed blowup: line, crossing, profile series and fitted rate.
#[derive(Clone, Debug, Serialize)]
pub struct BlowupScenario {
    pub k1: f64,
    pub k2: f64,
    pub variant: Variant,
    pub alpha: f64,
    pub crossing: Crossing,
    pub curve_index: usize,
    pub grid: ProfileGrid,
    pub series: Vec<ProfilePoint>,
    pub fit: RateFit,
    /// `1 / |Im x'(t_star)|`, the amplitude predicted by a unit residue.
    pub predicted_amplitude: f64,
}

/// Default offsets `|t - t_star|`: seven points from `1e-2` to `1e-5`.
pub fn default_ladder() -> Vec<f64> {
    (0..7).map(|k| 1e-2 * 10f64.powf(-(k as f64) / 2.0)).collect()
}

/// Tracks all poles over `[t0, t1]`, selects a line, and measures the blowup.
pub fn construct_scenario(cfg: &SolitonConfig, t0: f64, t1: f64, alpha: Option<f64>, opts: &TrackOptions) -> Result<BlowupScenario> {
    let curves = track_all(cfg, t0, t1, opts)?;
    let (alpha, curve_index, crossing) = match alpha {
        Some(alpha) => curves
            .iter()
            .enumerate()
            .filter_map(|(i, c)| find_crossing(c, cfg, alpha).ok().map(|x| (alpha, i, x)))
            .min_by(|a, b| a.2.t_star.total_cmp(&b.2.t_star))
            .ok_or(Error::NoCrossing { level: -alpha })?,
        None => auto_alpha(&curves, cfg, t0)?,
    };
    let ladder = default_ladder();
    let grid = ProfileGrid::around(cfg, crossing.x_star, ladder[0]);
    let times: Vec<f64> = ladder.iter().map(|d| crossing.t_star - d).collect();
    let series = blowup_profile(cfg, alpha, crossing.t_star, &times, &grid)?;
    let fit = fit_blowup_rate(&series, crossing.t_star)?;
    Ok(BlowupScenario {
        k1: cfg.k1(),
        k2: cfg.k2(),
        variant: cfg.variant(),
        alpha,
        crossing,
        curve_index,
        grid,
        series,
        fit,
        predicted_amplitude: 1.0 / crossing.vertical_speed.abs(),
    })
}
