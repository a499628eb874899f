//! Large-time pole positions: each pole eventually travels with one of the two
//! solitons, at a position fixed by a phase constant and an odd index.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kernel::{SolitonConfig, Variant};
use crate::tracker::PoleCurve;

/// Which soliton a pole family travels with.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SpeedClass {
    Slow,
    Fast,
}

/// `t -> -inf` (`Past`) or `t -> +inf` (`Future`).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum TimeDirection {
    #[serde(rename = "-inf")]
    Past,
    #[serde(rename = "+inf")]
    Future,
}

impl TimeDirection {
    pub fn sign(self) -> f64 {
        match self {
            TimeDirection::Past => -1.0,
            TimeDirection::Future => 1.0,
        }
    }
}

/// Label of an asymptotic pole family; the index is odd.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct FamilyLabel {
    pub speed: SpeedClass,
    pub index: i64,
    pub direction: TimeDirection,
}

impl FamilyLabel {
    pub fn new(speed: SpeedClass, index: i64, direction: TimeDirection) -> Result<Self> {
        if index % 2 == 0 {
            return Err(Error::InvalidConfig(format!("family index must be odd, got {index}")));
        }
        Ok(Self {
            speed,
            index,
            direction,
        })
    }

    /// Label of the image under `(x, t) -> (-conj x, -t)`.
    pub fn mirrored(self) -> Self {
        Self {
            speed: self.speed,
            index: -self.index,
            direction: match self.direction {
                TimeDirection::Past => TimeDirection::Future,
                TimeDirection::Future => TimeDirection::Past,
            },
        }
    }

    /// Label of the image under `x -> conj x`.
    pub fn conjugated(self) -> Self {
        Self {
            index: -self.index,
            ..self
        }
    }
}

impl std::fmt::Display for FamilyLabel {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self.speed {
            SpeedClass::Slow => "slow",
            SpeedClass::Fast => "fast",
        };
        let d = match self.direction {
            TimeDirection::Past => "-inf",
            TimeDirection::Future => "+inf",
        };
        write!(f, "{s}[{}]@{d}", self.index)
    }
}

/// Leading-order position of the family `label` at time `t`.
pub fn predicted_pole(cfg: &SolitonConfig, label: FamilyLabel, t: f64) -> Result<Complex64> {
    let (a, b) = cfg.translation();
    let tau = t - b;
    if tau * label.direction.sign() <= 0.0 {
        return Err(Error::DirectionMismatch);
    }
    let lg = cfg.gamma().ln();
    let m = label.index as f64;
    let (k1, k2) = (cfg.k1(), cfg.k2());
    let x = match (label.speed, label.direction) {
        (SpeedClass::Slow, TimeDirection::Past) => {
            Complex64::new(k1 * k1 * tau + lg / k1, m * PI / (2.0 * k1))
        }
        (SpeedClass::Slow, TimeDirection::Future) => {
            Complex64::new(k1 * k1 * tau - lg / k1, -m * PI / (2.0 * k1))
        }
        (SpeedClass::Fast, TimeDirection::Past) => {
            Complex64::new(k2 * k2 * tau - lg / k2, m * PI / (2.0 * k2))
        }
        (SpeedClass::Fast, TimeDirection::Future) => {
            Complex64::new(k2 * k2 * tau + lg / k2, -m * PI / (2.0 * k2))
        }
    };
    Ok(x + a)
}

/// Half-width of the imaginary window used for labelling: `lambda pi`, or `pi/k1`
/// without commensurability.
pub fn label_window(cfg: &SolitonConfig) -> f64 {
    cfg.strip_scale()
}

/// All labels whose leading-order imaginary part lies strictly inside the window.
pub fn labels_in_window(cfg: &SolitonConfig, direction: TimeDirection) -> Vec<FamilyLabel> {
    let w = label_window(cfg);
    let mut out = Vec::new();
    for (speed, k) in [(SpeedClass::Slow, cfg.k1()), (SpeedClass::Fast, cfg.k2())] {
        let max = (2.0 * k * w / PI).ceil() as i64 + 1;
        for index in (-max..=max).filter(|i| i % 2 != 0) {
            let im = index as f64 * PI / (2.0 * k);
            if im.abs() < w * (1.0 - 1e-12) {
                out.push(FamilyLabel {
                    speed,
                    index,
                    direction,
                });
            }
        }
    }
    out
}

/// Time before which both frame parameters are below `threshold`.
pub fn seed_time(cfg: &SolitonConfig, threshold: f64) -> f64 {
    let (_, b) = cfg.translation();
    let dk = cfg.k2().powi(2) - cfg.k1().powi(2);
    let slowest = cfg.k1().min(cfg.k2()) * dk;
    b - threshold.recip().ln() / slowest
}

/// The moving-frame change of variables bound to a configuration.
#[derive(Clone, Debug)]
pub struct MovingFrame {
    cfg: SolitonConfig,
    kind: SpeedClass,
}

impl MovingFrame {
    pub fn new(cfg: &SolitonConfig, kind: SpeedClass) -> Self {
        Self {
            cfg: cfg.clone(),
            kind,
        }
    }

    pub fn kind(&self) -> SpeedClass {
        self.kind
    }

    fn speed(&self) -> f64 {
        match self.kind {
            SpeedClass::Slow => self.cfg.k1().powi(2),
            SpeedClass::Fast => self.cfg.k2().powi(2),
        }
    }

    /// `z = x - k1^2 t` or `w = x - k2^2 t`, relative to the interaction point.
    pub fn coordinate(&self, x: Complex64, t: f64) -> Complex64 {
        let (a, b) = self.cfg.translation();
        x - a - self.speed() * (t - b)
    }

    /// `log r = k2 (k2^2 - k1^2) t` or `log s = k1 (k2^2 - k1^2) t`.
    pub fn log_parameter(&self, t: f64) -> f64 {
        let (_, b) = self.cfg.translation();
        let dk = self.cfg.k2().powi(2) - self.cfg.k1().powi(2);
        let k = match self.kind {
            SpeedClass::Slow => self.cfg.k2(),
            SpeedClass::Fast => self.cfg.k1(),
        };
        k * dk * (t - b)
    }

    pub fn parameter(&self, t: f64) -> f64 {
        self.log_parameter(t).exp()
    }

    /// `H(z, r)` for the slow frame, `I(w, s)` for the fast frame.
    pub fn frame_function(&self, coord: Complex64, param: f64) -> Complex64 {
        let (k1, k2, g) = (self.cfg.k1(), self.cfg.k2(), self.cfg.gamma());
        let s = self.cfg.variant().sign();
        let e1 = (-coord * k1).exp();
        let e2 = (-coord * k2).exp();
        let e12 = (-coord * (k1 + k2)).exp();
        match self.kind {
            SpeedClass::Slow => (1.0 - s * param * e12).powi(2) + g * g * (e1 + s * param * e2).powi(2),
            SpeedClass::Fast => (param - s * e12).powi(2) + g * g * (e1 + s * param * e2).powi(2),
        }
    }

    /// `F(x, t)` rebuilt from the frame: `H(z, r)` or `s^-2 I(w, s)`.
    pub fn f_via_frame(&self, x: Complex64, t: f64) -> Complex64 {
        let coord = self.coordinate(x, t);
        let p = self.parameter(t);
        match self.kind {
            SpeedClass::Slow => self.frame_function(coord, p),
            SpeedClass::Fast => self.frame_function(coord, p) / (p * p),
        }
    }
}

/// `exp(z) - 1` without cancellation for small `z`.
fn exp_m1(z: Complex64) -> Complex64 {
    let half = (z.im / 2.0).sin();
    Complex64::new(
        z.re.exp_m1() * z.im.cos() - 2.0 * half * half,
        z.re.exp() * z.im.sin(),
    )
}

fn unit(phase: f64) -> Complex64 {
    Complex64::from_polar(1.0, phase)
}

/// First-order slope of a `t -> -inf` family in its frame, `dz/dr` or `dw/ds`
/// at parameter zero, obtained by differentiating `H = 0` (or `I = 0`).
fn past_slope(cfg: &SolitonConfig, speed: SpeedClass, index: i64) -> Complex64 {
    let (k1, k2, g) = (cfg.k1(), cfg.k2(), cfg.gamma());
    let sign = -cfg.variant().sign();
    let m = index as f64;
    let dk = k2 * k2 - k1 * k1;
    let minus_i_pow = unit(-PI / 2.0 * m);
    match speed {
        SpeedClass::Slow => {
            sign * 4.0 * k2 / dk * g.powf(-k2 / k1) * minus_i_pow * unit(-k2 / (2.0 * k1) * m * PI)
        }
        SpeedClass::Fast => {
            sign * 4.0 * k1 / dk * g.powf(-k1 / k2) * minus_i_pow * unit(k1 / (2.0 * k2) * m * PI)
        }
    }
}

/// First-order slope of the family: for `Past` labels `dz/dr` (slow) or `dw/ds`
/// (fast) at zero; for `Future` labels the slope with respect to `1/r` or `1/s`.
pub fn tangent_slope(cfg: &SolitonConfig, label: FamilyLabel) -> Complex64 {
    match label.direction {
        TimeDirection::Past => past_slope(cfg, label.speed, label.index),
        TimeDirection::Future => -past_slope(cfg, label.speed, -label.index).conj(),
    }
}

/// The slope formula in its literal form, with the real sign factor
/// `(-1)^((m-1)/2)` in place of `(-i)^m`. Differs from [`tangent_slope`] by a
/// factor `i`; kept for comparison.
pub fn literal_tangent_slope(cfg: &SolitonConfig, label: FamilyLabel) -> Complex64 {
    let (k1, k2, g) = (cfg.k1(), cfg.k2(), cfg.gamma());
    let sign = match cfg.variant() {
        Variant::Plus => -1.0,
        Variant::Minus => 1.0,
    };
    let m = label.index as f64;
    let parity = if (label.index - 1).div_euclid(2) % 2 == 0 { 1.0 } else { -1.0 };
    let dk = k2 * k2 - k1 * k1;
    match label.speed {
        SpeedClass::Slow => {
            sign * parity * 4.0 * k2 / dk * g.powf(-k2 / k1) * unit(-k2 / (2.0 * k1) * m * PI)
        }
        SpeedClass::Fast => {
            sign * parity * 4.0 * k1 / dk * g.powf(-k1 / k2) * unit(k1 / (2.0 * k2) * m * PI)
        }
    }
}

/// Small frame parameter for a label at time `t`: `r`, `s`, `1/r` or `1/s`.
pub fn small_parameter(cfg: &SolitonConfig, label: FamilyLabel, t: f64) -> f64 {
    let frame = MovingFrame::new(cfg, label.speed);
    (label.direction.sign() * -frame.log_parameter(t)).exp()
}

/// Distance between two points, modulo the imaginary period when one exists.
pub fn periodic_distance(cfg: &SolitonConfig, x: Complex64, y: Complex64) -> f64 {
    let d = x - y;
    match cfg.comm() {
        Some(c) => {
            let period = 2.0 * PI * c.lambda;
            let im = d.im - period * (d.im / period).round();
            Complex64::new(d.re, im).norm()
        }
        None => d.norm(),
    }
}

/// Exact offset `delta = x - predicted_pole(label, t)` of the zero of `F` near
/// `guess`, found by Newton's method on a form of `F = 0` in which the
/// leading-order cancellation is carried out analytically. The offset is
/// therefore resolved to full relative precision even when it is far below
/// the rounding level of `x` itself.
pub fn frame_offset(cfg: &SolitonConfig, label: FamilyLabel, t: f64, guess: Complex64) -> Result<Complex64> {
    let predicted = predicted_pole(cfg, label, t)?;
    let (k1, k2, g) = (cfg.k1(), cfg.k2(), cfg.gamma());
    let (_, b) = cfg.translation();
    let tau = t - b;
    let dk = k2 * k2 - k1 * k1;
    let s = cfg.variant().sign();
    let m = label.index as f64;
    // A = exp(i phase_a + c delta)/gamma is the order-one variable, B = exp(log_b + i phase_b + c_b delta) the small one.
    let (c, phase_a, log_b, phase_b, c_b) = match (label.speed, label.direction) {
        (SpeedClass::Slow, TimeDirection::Past) => (-k1, -m * PI / 2.0, k2 * dk * tau - k2 / k1 * g.ln(), -k2 * m * PI / (2.0 * k1), -k2),
        (SpeedClass::Slow, TimeDirection::Future) => (k1, -m * PI / 2.0, -k2 * dk * tau - k2 / k1 * g.ln(), -k2 * m * PI / (2.0 * k1), k2),
        (SpeedClass::Fast, TimeDirection::Future) => (-k2, m * PI / 2.0, -k1 * dk * tau - k1 / k2 * g.ln(), k1 * m * PI / (2.0 * k2), -k1),
        (SpeedClass::Fast, TimeDirection::Past) => (k2, m * PI / 2.0, k1 * dk * tau - k1 / k2 * g.ln(), k1 * m * PI / (2.0 * k2), k1),
    };
    let mut delta = guess - predicted;
    if let Some(comm) = cfg.comm() {
        let period = 2.0 * PI * comm.lambda;
        delta.im -= period * (delta.im / period).round();
    }
    let g2 = g * g;
    for _ in 0..60 {
        let a = unit(phase_a) * (delta * c).exp() / g;
        let bb = Complex64::new(log_b, phase_b).exp() * (delta * c_b).exp();
        let main = -exp_m1(delta * (2.0 * c));
        let e = main + 2.0 * s * (g2 - 1.0) * a * bb + a * a * bb * bb + g2 * bb * bb;
        let de = -2.0 * c * (delta * (2.0 * c)).exp()
            + 2.0 * s * (g2 - 1.0) * (c + c_b) * a * bb
            + 2.0 * (c + c_b) * a * a * bb * bb
            + 2.0 * c_b * g2 * bb * bb;
        let step = e / de;
        if !(step.re.is_finite() && step.im.is_finite()) {
            break;
        }
        delta -= step;
        if step.norm() <= 1e-16 * delta.norm() || step.norm() < 1e-300 {
            return Ok(delta);
        }
    }
    Err(Error::NotAZero {
        x: guess,
        residual: f64::NAN,
    })
}

/// Measured first-order coefficient divided by [`tangent_slope`]; tends to one
/// as the frame parameter goes to zero.
pub fn tangent_ratio(cfg: &SolitonConfig, label: FamilyLabel, t: f64, x: Complex64) -> Result<Complex64> {
    let delta = frame_offset(cfg, label, t, x)?;
    Ok(delta / (tangent_slope(cfg, label) * small_parameter(cfg, label, t)))
}

/// Label assignment of one curve at one end.
#[derive(Clone, Debug, Serialize)]
pub struct LabelMatch {
    pub label: FamilyLabel,
    pub endpoint: Complex64,
    /// `|x(t_c +- T) - predicted|` with the pole refined by [`frame_offset`].
    pub residual: f64,
    /// The same distance measured from the tracked sample directly.
    pub raw_residual: f64,
    /// `(|t - t_c|, residual)` for horizons `T/8, ..., T, 2T` inside the curve's span.
    pub ladder: Vec<(f64, f64)>,
}

#[derive(Clone, Debug, Serialize)]
pub struct CurveMatch {
    pub curve: usize,
    pub past: Option<LabelMatch>,
    pub future: Option<LabelMatch>,
}

#[derive(Clone, Debug, Serialize)]
pub struct MatchReport {
    pub horizon: f64,
    pub matches: Vec<CurveMatch>,
    /// Curves that could not be labelled at some end (span too short).
    pub unmatched: Vec<usize>,
}

impl MatchReport {
    pub fn max_residual(&self) -> f64 {
        self.matches
            .iter()
            .flat_map(|m| [m.past.as_ref(), m.future.as_ref()])
            .flatten()
            .map(|l| l.residual)
            .fold(0.0, f64::max)
    }
}

const LADDER: [f64; 5] = [0.125, 0.25, 0.5, 1.0, 2.0];

fn match_direction(
    curves: &[PoleCurve],
    cfg: &SolitonConfig,
    horizon: f64,
    direction: TimeDirection,
) -> Result<Vec<Option<LabelMatch>>> {
    let (_, b) = cfg.translation();
    let labels = labels_in_window(cfg, direction);
    let mut out: Vec<Option<LabelMatch>> = Vec::with_capacity(curves.len());
    let mut taken: Vec<(FamilyLabel, usize, f64)> = Vec::new();
    for (i, curve) in curves.iter().enumerate() {
        let t = b + direction.sign() * horizon;
        let Ok(x) = curve.position_at(cfg, t) else {
            out.push(None);
            continue;
        };
        let (label, raw_residual) = labels
            .iter()
            .map(|&l| {
                let p = predicted_pole(cfg, l, t).expect("direction matches");
                (l, periodic_distance(cfg, x, p))
            })
            .min_by(|a, b| a.1.total_cmp(&b.1))
            .ok_or_else(|| Error::AmbiguousMatch("no labels in window".into()))?;
        if let Some((_, j, d)) = taken.iter().find(|(l, _, _)| *l == label) {
            return Err(Error::AmbiguousMatch(format!(
                "curves {j} and {i} are both nearest to {label} (distances {d:e}, {raw_residual:e})"
            )));
        }
        taken.push((label, i, raw_residual));
        let residual = frame_offset(cfg, label, t, x)?.norm();
        let ladder = LADDER
            .iter()
            .map(|f| horizon * f)
            .filter_map(|h| {
                let tt = b + direction.sign() * h;
                let xx = curve.position_at(cfg, tt).ok()?;
                Some((h, frame_offset(cfg, label, tt, xx).ok()?.norm()))
            })
            .collect();
        out.push(Some(LabelMatch {
            label,
            endpoint: x,
            residual,
            raw_residual,
            ladder,
        }));
    }
    Ok(out)
}

/// Labels every curve at `t_c - T` and `t_c + T` by its nearest leading-order
/// family and records the residual ladder.
pub fn match_families(curves: &[PoleCurve], cfg: &SolitonConfig, horizon: f64) -> Result<MatchReport> {
    let past = match_direction(curves, cfg, horizon, TimeDirection::Past)?;
    let future = match_direction(curves, cfg, horizon, TimeDirection::Future)?;
    let mut matches = Vec::with_capacity(curves.len());
    let mut unmatched = Vec::new();
    for (i, (p, f)) in past.into_iter().zip(future).enumerate() {
        if p.is_none() || f.is_none() {
            unmatched.push(i);
        }
        matches.push(CurveMatch {
            curve: i,
            past: p,
            future: f,
        });
    }
    Ok(MatchReport {
        horizon,
        matches,
        unmatched,
    })
}
