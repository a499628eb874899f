//! Shape of the real two-soliton at the interaction point.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::kernel::{eval_u, eval_u_x, interaction_point, SolitonConfig, Variant};

/// Closed form of `u_xx` at the interaction centre and time.
pub fn uxx_at_center(cfg: &SolitonConfig) -> f64 {
    let (k1, k2) = (cfg.k1(), cfg.k2());
    match cfg.variant() {
        Variant::Plus => -(k2 - k1) * (k1 * k1 - 3.0 * k1 * k2 + k2 * k2),
        Variant::Minus => -(k2 + k1) * (k1 * k1 + 3.0 * k1 * k2 + k2 * k2),
    }
}

/// Closed-form speed `-u_xt / u_xx` of the extremum sitting at the centre.
pub fn extremum_speed(cfg: &SolitonConfig) -> Result<f64> {
    let (k1, k2) = (cfg.k1(), cfg.k2());
    let s = -cfg.variant().sign();
    let num = k1.powi(4) + s * 3.0 * k1.powi(3) * k2 + 3.0 * k1 * k1 * k2 * k2 + s * 3.0 * k1 * k2.powi(3) + k2.powi(4);
    let den = k1 * k1 + s * 3.0 * k1 * k2 + k2 * k2;
    if den.abs() <= 1e-12 * (k1 * k1 + k2 * k2) {
        return Err(Error::SingularConfiguration(format!(
            "k2/k1 = {} makes the centre a degenerate extremum",
            k2 / k1
        )));
    }
    Ok(num / den)
}

fn real_u(cfg: &SolitonConfig, x: f64, t: f64) -> Result<f64> {
    let z = Complex64::new(x, 0.0);
    eval_u(cfg, z, t)?
        .finite()
        .map(|v| v.re)
        .ok_or(Error::StencilHitsPole { node: z, t })
}

fn richardson(d: impl Fn(f64) -> Result<f64>, h: f64) -> Result<f64> {
    let (coarse, fine) = (d(h)?, d(h / 2.0)?);
    Ok((4.0 * fine - coarse) / 3.0)
}

/// `u_xx` and `u_xt` at the interaction point by Richardson-extrapolated
/// central differences. The step `h` is dimensionless: the stencil uses
/// `h / k2` in space and `h / k2^3` in time.
pub fn measure_center_derivatives(cfg: &SolitonConfig, h: f64) -> Result<(f64, f64)> {
    let (x0, t0) = interaction_point(cfg);
    let k = cfg.k2();
    let u = |x: f64, t: f64| real_u(cfg, x, t);
    let uxx = |h: f64| {
        let hx = h / k;
        Ok((u(x0 + hx, t0)? - 2.0 * u(x0, t0)? + u(x0 - hx, t0)?) / (hx * hx))
    };
    let uxt = |h: f64| {
        let (hx, ht) = (h / k, h / k.powi(3));
        Ok((u(x0 + hx, t0 + ht)? - u(x0 + hx, t0 - ht)? - u(x0 - hx, t0 + ht)? + u(x0 - hx, t0 - ht)?)
            / (4.0 * hx * ht))
    };
    Ok((richardson(uxx, h)?, richardson(uxt, h)?))
}

pub fn measure_extremum_speed(cfg: &SolitonConfig, h: f64) -> Result<f64> {
    let (uxx, uxt) = measure_center_derivatives(cfg, h)?;
    let scale = (cfg.k1() + cfg.k2()).powi(3);
    if uxx.abs() <= 1e-10 * scale {
        return Err(Error::VanishingDerivative);
    }
    Ok(-uxt / uxx)
}

/// Local maxima of `u(., t0)` at the interaction time, sorted.
///
/// Scans the sign of a centred first difference with spacing `strip / 200`.
/// The centre, where `u_x` vanishes by symmetry, is classified by its second
/// difference; maxima are then refined by bisection on `u_x`.
pub fn maxima_at_interaction(cfg: &SolitonConfig) -> Result<Vec<f64>> {
    let (x0, t0) = interaction_point(cfg);
    let spacing = cfg.strip_scale() / 200.0;
    let half_width = 30.0 / cfg.k1();
    let steps = (half_width / spacing).ceil() as i64;
    let u = |x: f64| real_u(cfg, x, t0);
    let ux = |x: f64| -> Result<f64> {
        let z = Complex64::new(x, 0.0);
        eval_u_x(cfg, z, t0)?
            .finite()
            .map(|v| v.re)
            .ok_or(Error::StencilHitsPole { node: z, t: t0 })
    };
    let floor = 1e-12 * u(x0)?.abs().max(1.0);

    let hc = 1e-4 * cfg.strip_scale();
    let centre_curv = u(x0 + hc)? - 2.0 * u(x0)? + u(x0 - hc)?;
    let side = |dir: f64| -> Result<Vec<(f64, f64)>> {
        (1..=steps)
            .map(|k| {
                let x = x0 + dir * spacing * k as f64;
                let d = u(x + dir * spacing)? - u(x - dir * spacing)?;
                Ok((x, if u(x)?.abs() < floor { 0.0 } else { d }))
            })
            .collect()
    };
    let mut maxima = Vec::new();
    if centre_curv < 0.0 {
        maxima.push(x0);
    }
    // Just outside the centre, u increases outward iff the centre is a minimum.
    let start_sign = centre_curv.signum();
    for dir in [1.0, -1.0] {
        let mut prev = (x0, start_sign);
        for (x, d) in side(dir)? {
            if d == 0.0 {
                continue;
            }
            if prev.1 > 0.0 && d < 0.0 {
                let (mut a, mut b) = (prev.0, x + dir * spacing);
                for _ in 0..100 {
                    let m = 0.5 * (a + b);
                    if m == a || m == b {
                        break;
                    }
                    if dir * ux(m)? > 0.0 {
                        a = m;
                    } else {
                        b = m;
                    }
                }
                maxima.push(0.5 * (a + b));
            }
            prev = (x, d.signum());
        }
    }
    maxima.sort_by(f64::total_cmp);
    Ok(maxima)
}

pub fn count_maxima_at_interaction(cfg: &SolitonConfig) -> Result<usize> {
    maxima_at_interaction(cfg).map(|m| m.len())
}

/// Bisects on `k2/k1` for the change from two maxima to one in the `Plus`
/// solution, starting from `[lo, hi]`.
pub fn maxima_transition(lo: f64, hi: f64, tol: f64) -> Result<(f64, f64)> {
    let count = |r: f64| SolitonConfig::new(1.0, r, Variant::Plus).and_then(|c| count_maxima_at_interaction(&c));
    let (mut lo, mut hi) = (lo, hi);
    let (c_lo, c_hi) = (count(lo)?, count(hi)?);
    if c_lo == c_hi {
        return Err(Error::Precondition(format!(
            "same maxima count {c_lo} at both ends of [{lo}, {hi}]"
        )));
    }
    while hi - lo > tol {
        let mid = 0.5 * (lo + hi);
        if count(mid)? == c_lo {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok((lo, hi))
}

/// Bracket of the smallest ratio in `[lo, hi]` above which the `Plus` centre
/// speed turns negative (sign change of the closed-form numerator).
pub fn negative_speed_onset(lo: f64, hi: f64, tol: f64) -> Result<(f64, f64)> {
    let num = |r: f64| r.powi(4) - 3.0 * r.powi(3) + 3.0 * r * r - 3.0 * r + 1.0;
    let (mut lo, mut hi) = (lo, hi);
    if num(lo).signum() == num(hi).signum() {
        return Err(Error::Precondition(format!("no sign change in [{lo}, {hi}]")));
    }
    let s_lo = num(lo).signum();
    while hi - lo > tol {
        let mid = 0.5 * (lo + hi);
        if num(mid).signum() == s_lo {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok((lo, hi))
}

#[derive(Clone, Copy, Debug, Serialize)]
pub struct SweepRow {
    pub ratio: f64,
    pub variant: Variant,
    pub uxx_closed: f64,
    pub uxx_measured: f64,
    pub speed_closed: Option<f64>,
    pub speed_measured: Option<f64>,
    pub maxima: usize,
}

/// Closed forms against measurements over `k2 = ratio * k1`.
pub fn interaction_sweep(k1: f64, ratios: &[f64], variant: Variant, h: f64) -> Result<Vec<SweepRow>> {
    ratios
        .par_iter()
        .map(|&ratio| {
            let cfg = SolitonConfig::new(k1, ratio * k1, variant)?;
            let (uxx_measured, _) = measure_center_derivatives(&cfg, h)?;
            Ok(SweepRow {
                ratio,
                variant,
                uxx_closed: uxx_at_center(&cfg),
                uxx_measured,
                speed_closed: extremum_speed(&cfg).ok(),
                speed_measured: measure_extremum_speed(&cfg, h).ok(),
                maxima: count_maxima_at_interaction(&cfg)?,
            })
        })
        .collect()
}
