//! Continuation of pole trajectories `t -> x(t)` with `F(x(t), t) = 0`.
//!
//! Curves are followed by an Euler predictor and a Newton corrector with an
//! adaptive step. Near a declared collision point of the exceptional case the
//! tracker stops, and the curve is continued past the collision with the
//! mirror image of another incoming curve.

mod collision;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use crate::asymptotics::{labels_in_window, predicted_pole, FamilyLabel, TimeDirection};
use crate::error::{Error, Result};
use crate::exppoly::oracle_poles;
use crate::kernel::{f_jet, SolitonConfig, Variant};

pub use collision::{
    classify_branch, collision_points, detect_exceptional, BranchFit, ExceptionalInfo,
};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum BranchClass {
    Cubic,
    Linear,
    None,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct CurveSample {
    pub t: f64,
    pub x: Complex64,
    /// `|F|` relative to the sum of its term magnitudes.
    pub abs_f: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct CurveFlags {
    pub exceptional_collision: bool,
    pub branch_class: BranchClass,
    pub collision_point: Option<Complex64>,
    pub collision_time: Option<f64>,
}

impl Default for CurveFlags {
    fn default() -> Self {
        Self {
            exceptional_collision: false,
            branch_class: BranchClass::None,
            collision_point: None,
            collision_time: None,
        }
    }
}

/// A time-sampled pole trajectory.
#[derive(Clone, Debug, Serialize)]
pub struct PoleCurve {
    pub variant: Variant,
    pub samples: Vec<CurveSample>,
    pub past_family: Option<FamilyLabel>,
    pub future_family: Option<FamilyLabel>,
    pub flags: CurveFlags,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct TrackOptions {
    pub dt_initial: f64,
    pub dt_max: f64,
    /// Steps below this size are only allowed next to a declared collision.
    pub dt_min: f64,
    /// Largest displacement per step, as a fraction of the strip scale.
    pub max_dx_fraction: f64,
    pub max_newton: usize,
    /// Relative residual `|F| / sum |terms|` a corrected point must reach.
    pub tolerance: f64,
    /// Distance to a collision point at which continuation stops.
    pub collision_radius: f64,
}

impl Default for TrackOptions {
    fn default() -> Self {
        Self {
            dt_initial: 1e-3,
            dt_max: 0.05,
            dt_min: 1e-9,
            max_dx_fraction: 0.02,
            max_newton: 20,
            tolerance: 1e-12,
            collision_radius: 1e-5,
        }
    }
}

/// Result of Newton's method at fixed `t`.
#[derive(Clone, Copy, Debug)]
pub(crate) struct Corrected {
    pub x: Complex64,
    pub iterations: usize,
    pub residual: f64,
    /// `|F_x| / sum |terms|` at the solution.
    pub fx_norm: f64,
    pub velocity: Complex64,
}

/// Rounding level of the relative residual: the exponents `-k_j (x - x_j) + k_j^3 t`
/// carry an absolute error proportional to their size.
fn rounding_floor(cfg: &SolitonConfig, x: Complex64, t: f64) -> f64 {
    let size: f64 = [(cfg.k1(), cfg.x1()), (cfg.k2(), cfg.x2())]
        .iter()
        .map(|&(k, shift)| k * (x - shift).norm() + k.powi(3) * t.abs())
        .sum();
    64.0 * f64::EPSILON * size
}

/// Newton iteration on `F(., t)` from `x0`.
pub(crate) fn correct(cfg: &SolitonConfig, x0: Complex64, t: f64, max_iter: usize, tol: f64) -> Option<Corrected> {
    let mut x = x0;
    let mut last_step = f64::INFINITY;
    let floor = rounding_floor(cfg, x0, t);
    let tol = tol.max(floor);
    for it in 0..=max_iter {
        let jet = f_jet(cfg, x, t);
        let residual = jet.value.norm() / jet.magnitude;
        if !residual.is_finite() || jet.dx.norm() == 0.0 {
            return None;
        }
        let step = jet.value / jet.dx;
        let size = step.norm();
        let converged = residual <= floor.max(1e-15) || size <= 1e-14 * x.norm().max(1.0);
        let stalled = it >= 3 && size > 0.5 * last_step;
        if converged || stalled || it == max_iter {
            if residual > tol {
                return None;
            }
            return Some(Corrected {
                x,
                iterations: it,
                residual,
                fx_norm: jet.dx.norm() / jet.magnitude,
                velocity: -jet.dt / jet.dx,
            });
        }
        x -= step;
        last_step = size;
    }
    None
}

/// Polishes `x` to a zero of `F(., t)`.
pub fn refine_pole(cfg: &SolitonConfig, x: Complex64, t: f64) -> Result<Complex64> {
    let opts = TrackOptions::default();
    correct(cfg, x, t, opts.max_newton, opts.tolerance)
        .map(|c| c.x)
        .ok_or(Error::NotAZero {
            x,
            residual: crate::kernel::relative_f(cfg, x, t),
        })
}

/// Pole velocity `-F_t / F_x`.
pub fn pole_velocity(cfg: &SolitonConfig, x: Complex64, t: f64) -> Complex64 {
    let jet = f_jet(cfg, x, t);
    -jet.dt / jet.dx
}

impl PoleCurve {
    pub fn t_range(&self) -> (f64, f64) {
        (
            self.samples.first().map_or(f64::NAN, |s| s.t),
            self.samples.last().map_or(f64::NAN, |s| s.t),
        )
    }

    /// Position at time `t`, interpolated between samples and re-corrected.
    /// Fails outside the sampled span and inside a collision gap.
    pub fn position_at(&self, cfg: &SolitonConfig, t: f64) -> Result<Complex64> {
        let (lo, hi) = self.t_range();
        if !(t >= lo && t <= hi) {
            return Err(Error::Precondition(format!(
                "t = {t} outside the curve span [{lo}, {hi}]"
            )));
        }
        let k = self.samples.partition_point(|s| s.t < t);
        let s1 = self.samples[k];
        if s1.t == t {
            return Ok(s1.x);
        }
        let s0 = self.samples[k - 1];
        if let (Some(c), Some(tc)) = (self.flags.collision_point, self.flags.collision_time) {
            if s0.t < tc && s1.t > tc {
                return Err(Error::Precondition(format!(
                    "t = {t} lies in the collision gap around {c} at t = {tc}"
                )));
            }
        }
        let w = (t - s0.t) / (s1.t - s0.t);
        let guess = s0.x * (1.0 - w) + s1.x * w;
        refine_pole(cfg, guess, t)
    }

    /// Image under `(x, t) -> (2a - conj x, 2b - t)` about the interaction point.
    pub fn mirrored(&self, cfg: &SolitonConfig) -> PoleCurve {
        let (a, b) = cfg.translation();
        let samples = self
            .samples
            .iter()
            .rev()
            .map(|s| CurveSample {
                t: 2.0 * b - s.t,
                x: Complex64::new(2.0 * a - s.x.re, s.x.im),
                abs_f: s.abs_f,
            })
            .collect();
        PoleCurve {
            variant: self.variant,
            samples,
            past_family: self.future_family.map(FamilyLabel::mirrored),
            future_family: self.past_family.map(FamilyLabel::mirrored),
            flags: self.flags,
        }
    }

    /// Image under `x -> conj x`.
    pub fn conjugated(&self) -> PoleCurve {
        PoleCurve {
            variant: self.variant,
            samples: self
                .samples
                .iter()
                .map(|s| CurveSample {
                    x: s.x.conj(),
                    ..*s
                })
                .collect(),
            past_family: self.past_family.map(FamilyLabel::conjugated),
            future_family: self.future_family.map(FamilyLabel::conjugated),
            flags: CurveFlags {
                collision_point: self.flags.collision_point.map(|c| c.conj()),
                ..self.flags
            },
        }
    }

    /// Flag column used in CSV output.
    pub fn flag_string(&self) -> String {
        let mut parts = Vec::new();
        if self.flags.exceptional_collision {
            parts.push("collision");
        }
        match self.flags.branch_class {
            BranchClass::Cubic => parts.push("cubic"),
            BranchClass::Linear => parts.push("linear"),
            BranchClass::None => {}
        }
        parts.join("|")
    }
}

/// `t -> 2b - t`, `x -> 2a - conj x`.
pub fn mirror_curve(curve: &PoleCurve, cfg: &SolitonConfig) -> PoleCurve {
    curve.mirrored(cfg)
}

enum Stop {
    Reached,
    Collision(Complex64, f64),
}

/// Follows the zero of `F` through `x_start` at `t_start` until `t_end` or a
/// declared collision point.
pub fn track_curve(
    cfg: &SolitonConfig,
    x_start: Complex64,
    t_start: f64,
    t_end: f64,
    opts: &TrackOptions,
) -> Result<PoleCurve> {
    let first = correct(cfg, x_start, t_start, opts.max_newton, opts.tolerance).ok_or(
        Error::NotAZero {
            x: x_start,
            residual: crate::kernel::relative_f(cfg, x_start, t_start),
        },
    )?;
    let mut samples = vec![CurveSample {
        t: t_start,
        x: first.x,
        abs_f: first.residual,
    }];
    let stop = continue_curve(cfg, first, t_start, t_end, opts, &mut samples)?;
    let mut flags = CurveFlags::default();
    if let Stop::Collision(c, tc) = stop {
        flags.exceptional_collision = true;
        flags.collision_point = Some(c);
        flags.collision_time = Some(tc);
    }
    Ok(PoleCurve {
        variant: cfg.variant(),
        samples,
        past_family: None,
        future_family: None,
        flags,
    })
}

fn continue_curve(
    cfg: &SolitonConfig,
    start: Corrected,
    t_start: f64,
    t_end: f64,
    opts: &TrackOptions,
    samples: &mut Vec<CurveSample>,
) -> Result<Stop> {
    let strip = cfg.strip_scale();
    let max_dx = opts.max_dx_fraction * strip;
    let points = collision_points(cfg);
    let (_, tc) = cfg.translation();
    let dir = if t_end >= t_start { 1.0 } else { -1.0 };
    let mut state = start;
    let mut t = t_start;
    let mut h = opts.dt_initial;
    let mut clamp_enabled = true;

    while (t_end - t) * dir > 0.0 {
        let remaining = (t_end - t).abs();
        let approaching = points
            .iter()
            .copied()
            .find(|c| (state.x - c).norm() < 0.25 * strip && (tc - t) * dir > 0.0);
        if let Some(c) = approaching {
            if (state.x - c).norm() < opts.collision_radius {
                return Ok(Stop::Collision(c, tc));
            }
        }
        let clamp = approaching.filter(|_| clamp_enabled);
        let speed = state.velocity.norm();
        let mut step = h.min(opts.dt_max).min(remaining);
        if let Some(_) = clamp {
            step = step.min(0.5 * (tc - t).abs());
        }
        if speed * step > max_dx {
            step = max_dx / speed;
        }
        loop {
            if step < opts.dt_min {
                if let Some(c) = clamp {
                    if (state.x - c).norm() < 1e-2 * strip {
                        return Ok(Stop::Collision(c, tc));
                    }
                    clamp_enabled = false;
                    break;
                }
                return Err(Error::NearMultipleRoot { t, x: state.x });
            }
            let t_new = if step >= remaining { t_end } else { t + dir * step };
            let x_pred = state.x + state.velocity * (t_new - t);
            let accepted = correct(cfg, x_pred, t_new, opts.max_newton, opts.tolerance).filter(|c| {
                let err = (c.x - x_pred).norm();
                let allowed = (0.1 * (c.x - state.x).norm()).max(1e-8 * strip);
                c.iterations <= 5 && err <= allowed && c.fx_norm >= 0.1 * state.fx_norm
            });
            match accepted {
                Some(c) => {
                    let err = (c.x - x_pred).norm();
                    let allowed = (0.1 * (c.x - state.x).norm()).max(1e-8 * strip);
                    let growth = if err == 0.0 {
                        2.0
                    } else {
                        (0.9 * (allowed / err).sqrt()).clamp(0.5, 2.0)
                    };
                    h = step * growth;
                    t = t_new;
                    state = c;
                    samples.push(CurveSample {
                        t,
                        x: c.x,
                        abs_f: c.residual,
                    });
                    break;
                }
                None => step *= 0.5,
            }
        }
    }
    Ok(Stop::Reached)
}

/// Starting points for [`track_all`]: every pole in the fundamental strip
/// (from the global root finder) when the configuration is exact, otherwise
/// the leading-order family positions refined by Newton's method.
pub fn seed_poles(cfg: &SolitonConfig, t: f64) -> Result<Vec<Complex64>> {
    if cfg.exact_wavenumbers().is_some() && cfg.comm().is_some() {
        let poles = oracle_poles(cfg, t)?;
        if let Some(p) = poles.iter().find(|p| p.multiplicity > 1) {
            return Err(Error::Precondition(format!(
                "seed time {t} hits a multiple pole at {}",
                p.x
            )));
        }
        return Ok(poles.into_iter().map(|p| p.x).collect());
    }
    let (_, b) = cfg.translation();
    let direction = if t < b {
        TimeDirection::Past
    } else {
        TimeDirection::Future
    };
    let mut seeds: Vec<Complex64> = Vec::new();
    for label in labels_in_window(cfg, direction) {
        let guess = predicted_pole(cfg, label, t)?;
        let x = refine_pole(cfg, guess, t)?;
        if seeds.iter().any(|s| (s - x).norm() < 1e-8 * cfg.strip_scale()) {
            return Err(Error::AmbiguousMatch(format!(
                "two asymptotic seeds converge to {x} at t = {t}; seed further from the interaction"
            )));
        }
        seeds.push(x);
    }
    Ok(seeds)
}

/// Tracks every pole of the strip from `t_start` forward to `t_end`, gluing
/// curves across exceptional collisions.
pub fn track_all(cfg: &SolitonConfig, t_start: f64, t_end: f64, opts: &TrackOptions) -> Result<Vec<PoleCurve>> {
    if !(t_end > t_start) {
        return Err(Error::Precondition(format!(
            "track_all runs forward in time; got t_start = {t_start}, t_end = {t_end}"
        )));
    }
    let seeds = seed_poles(cfg, t_start)?;
    let mut curves = seeds
        .par_iter()
        .map(|&x| track_curve(cfg, x, t_start, t_end, opts))
        .collect::<Result<Vec<_>>>()?;
    glue_collisions(cfg, &mut curves, t_end, opts)?;
    curves.sort_by(|a, b| {
        let (xa, xb) = (a.samples[0].x, b.samples[0].x);
        xa.im.total_cmp(&xb.im).then(xa.re.total_cmp(&xb.re))
    });
    Ok(curves)
}

fn unit_direction(v: Complex64) -> Complex64 {
    v / v.norm()
}

/// Continues every curve that stopped at a collision with the mirror image of
/// the incoming curve whose outgoing direction is opposite to its own.
fn glue_collisions(cfg: &SolitonConfig, curves: &mut [PoleCurve], t_end: f64, opts: &TrackOptions) -> Result<()> {
    let incoming: Vec<usize> = (0..curves.len())
        .filter(|&i| curves[i].flags.exceptional_collision)
        .collect();
    if incoming.is_empty() {
        return Ok(());
    }
    for &i in &incoming {
        if let Ok(fit) = classify_branch(&curves[i], cfg, (1e-6, 1e-2)) {
            curves[i].flags.branch_class = fit.class;
        }
    }
    let mirrors: Vec<PoleCurve> = incoming.iter().map(|&i| curves[i].mirrored(cfg)).collect();
    let mut used = vec![false; mirrors.len()];
    let mut pairing = Vec::with_capacity(incoming.len());
    for &i in &incoming {
        let c = curves[i].flags.collision_point.expect("flagged curves carry a point");
        let last = curves[i].samples.last().expect("non-empty").x;
        let wanted = -unit_direction(last - c);
        let mut best: Option<(usize, f64)> = None;
        for (j, m) in mirrors.iter().enumerate() {
            if used[j] || m.flags.collision_point != Some(c) {
                continue;
            }
            let d = unit_direction(m.samples[0].x - c);
            let score = (d - wanted).norm();
            if best.map_or(true, |(_, s)| score < s) {
                best = Some((j, score));
            }
        }
        let (j, score) = best.ok_or_else(|| {
            Error::AmbiguousMatch(format!("no outgoing branch left at collision point {c}"))
        })?;
        if score > 0.5 {
            return Err(Error::AmbiguousMatch(format!(
                "outgoing direction mismatch {score:.3} at collision point {c}"
            )));
        }
        used[j] = true;
        pairing.push((i, j));
    }
    for (i, j) in pairing {
        let out = &mirrors[j];
        let curve = &mut curves[i];
        curve
            .samples
            .extend(out.samples.iter().copied().take_while(|s| s.t <= t_end));
        let last = *curve.samples.last().expect("non-empty");
        if last.t < t_end {
            let start = correct(cfg, last.x, last.t, opts.max_newton, opts.tolerance).ok_or(
                Error::NotAZero {
                    x: last.x,
                    residual: last.abs_f,
                },
            )?;
            let mut tail = Vec::new();
            continue_curve(cfg, start, last.t, t_end, opts, &mut tail)?;
            curve.samples.extend(tail);
        }
    }
    Ok(())
}

/// Assigns family labels from a match report.
pub fn assign_families(curves: &mut [PoleCurve], report: &crate::asymptotics::MatchReport) {
    for m in &report.matches {
        if let Some(curve) = curves.get_mut(m.curve) {
            curve.past_family = m.past.as_ref().map(|l| l.label);
            curve.future_family = m.future.as_ref().map(|l| l.label);
        }
    }
}
