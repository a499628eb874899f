//! Exceptional collisions: where they happen and how the colliding curves
//! approach them.

use std::ops::RangeInclusive;

use num_complex::Complex64;
use serde::Serialize;

use super::{BranchClass, PoleCurve};
use crate::error::{Error, Result};
use crate::kernel::{SolitonConfig, Variant};

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ExceptionalInfo {
    pub is_exceptional: bool,
    /// Collision points `a + (q + 1/2) lambda pi i` for the requested `q`.
    pub points: Vec<Complex64>,
    /// Collision time (the interaction time).
    pub time: f64,
}

/// Whether four poles collide at the interaction time, and where.
///
/// This happens iff `k2/k1 = p2/p1` with both `p_j` odd and `p2 - p1` (for
/// `Minus`) or `p2 + p1` (for `Plus`) divisible by four.
pub fn detect_exceptional(cfg: &SolitonConfig, qs: RangeInclusive<i64>) -> ExceptionalInfo {
    let (a, b) = cfg.translation();
    let hit = cfg.comm().filter(|c| c.both_odd()).map(|c| {
        let (p1, p2) = (c.p1 as i64, c.p2 as i64);
        let n = match cfg.variant() {
            Variant::Minus => p2 - p1,
            Variant::Plus => p2 + p1,
        };
        (n > 0 && n % 4 == 0, c.lambda)
    });
    match hit {
        Some((true, lambda)) => ExceptionalInfo {
            is_exceptional: true,
            points: qs
                .map(|q| Complex64::new(a, (q as f64 + 0.5) * lambda * std::f64::consts::PI))
                .collect(),
            time: b,
        },
        _ => ExceptionalInfo {
            is_exceptional: false,
            points: Vec::new(),
            time: b,
        },
    }
}

/// Collision points inside the fundamental strip (empty unless exceptional).
pub fn collision_points(cfg: &SolitonConfig) -> Vec<Complex64> {
    detect_exceptional(cfg, -1..=0).points
}

/// Local model fitted to a curve entering a collision.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct BranchFit {
    pub class: BranchClass,
    /// Extrapolated limit of `(x - x_c)^3 / (t - t_c)` or `(x - x_c) / (t - t_c)`.
    pub limit_estimate: Complex64,
    pub cubic_estimate: Complex64,
    pub linear_estimate: Complex64,
    /// Spread `log(max |q| / min |q|)` of each model quantity over the window.
    pub cubic_spread: f64,
    pub linear_spread: f64,
    pub samples_used: usize,
}

/// Solves the complex least-squares problem `sum_j c_j xi^j ~ q`.
fn polyfit(xi: &[Complex64], q: &[Complex64], degree: usize) -> Option<Vec<Complex64>> {
    let n = degree + 1;
    let mut a = vec![vec![Complex64::new(0.0, 0.0); n + 1]; n];
    for (&s, &v) in xi.iter().zip(q) {
        let pows: Vec<Complex64> = (0..n).map(|j| s.powu(j as u32)).collect();
        for r in 0..n {
            for c in 0..n {
                a[r][c] += pows[r].conj() * pows[c];
            }
            a[r][n] += pows[r].conj() * v;
        }
    }
    for col in 0..n {
        let pivot = (col..n).max_by(|&i, &j| a[i][col].norm().total_cmp(&a[j][col].norm()))?;
        if a[pivot][col].norm() == 0.0 {
            return None;
        }
        a.swap(col, pivot);
        for r in 0..n {
            if r != col {
                let f = a[r][col] / a[col][col];
                let (src, dst) = if r < col {
                    let (lo, hi) = a.split_at_mut(col);
                    (&hi[0], &mut lo[r])
                } else {
                    let (lo, hi) = a.split_at_mut(r);
                    (&lo[col], &mut hi[0])
                };
                for c in col..=n {
                    dst[c] -= f * src[c];
                }
            }
        }
    }
    Some((0..n).map(|i| a[i][n] / a[i][i]).collect())
}

fn spread(q: &[Complex64]) -> f64 {
    let (lo, hi) = q
        .iter()
        .map(|v| v.norm())
        .fold((f64::INFINITY, 0.0f64), |(lo, hi), v| (lo.min(v), hi.max(v)));
    (hi / lo).ln()
}

/// Decides between `(x - x_c)^3 ~ c (t - t_c)` and `x - x_c ~ c (t - t_c)` on
/// the samples with `|t - t_c|` in `window`, and extrapolates the constant.
pub fn classify_branch(curve: &PoleCurve, cfg: &SolitonConfig, window: (f64, f64)) -> Result<BranchFit> {
    let (Some(c), Some(tc)) = (curve.flags.collision_point, curve.flags.collision_time) else {
        return Err(Error::Precondition("curve is not flagged as entering a collision".into()));
    };
    if !detect_exceptional(cfg, 0..=0).is_exceptional {
        return Err(Error::Precondition("configuration is not exceptional".into()));
    }
    let (lo, hi) = window;
    let used: Vec<_> = curve
        .samples
        .iter()
        .filter(|s| {
            let tau = (s.t - tc).abs();
            tau >= lo && tau <= hi && s.t != tc
        })
        .collect();
    let taus = used.iter().map(|s| (s.t - tc).abs());
    let (tmin, tmax) = taus.fold((f64::INFINITY, 0.0f64), |(a, b), v| (a.min(v), b.max(v)));
    if used.len() < 6 || tmax / tmin < 100.0 || tmin > 1.5 * lo {
        return Err(Error::Precondition(format!(
            "need samples spanning two decades down to {lo:e}; have {} in [{tmin:e}, {tmax:e}]",
            used.len()
        )));
    }
    let xi: Vec<Complex64> = used.iter().map(|s| s.x - c).collect();
    let cubic: Vec<Complex64> = used.iter().zip(&xi).map(|(s, x)| x.powu(3) / (s.t - tc)).collect();
    let linear: Vec<Complex64> = used.iter().zip(&xi).map(|(s, x)| x / (s.t - tc)).collect();
    let fit = |q: &[Complex64]| {
        polyfit(&xi, q, 2)
            .map(|c| c[0])
            .ok_or_else(|| Error::Precondition("degenerate branch samples".into()))
    };
    let cubic_estimate = fit(&cubic)?;
    let linear_estimate = fit(&linear)?;
    let (cubic_spread, linear_spread) = (spread(&cubic), spread(&linear));
    let ratio = cubic_spread.max(linear_spread) / cubic_spread.min(linear_spread);
    if ratio < 2.0 {
        return Err(Error::AmbiguousFit {
            cubic: cubic_estimate,
            linear: linear_estimate,
        });
    }
    let (class, limit_estimate) = if cubic_spread < linear_spread {
        (BranchClass::Cubic, cubic_estimate)
    } else {
        (BranchClass::Linear, linear_estimate)
    };
    Ok(BranchFit {
        class,
        limit_estimate,
        cubic_estimate,
        linear_estimate,
        cubic_spread,
        linear_spread,
        samples_used: used.len(),
    })
}
