//! Closed-form evaluation of the two-soliton solution of
//! `u_t + u_xxx + 6 u^2 u_x = 0` at complex `x` and real `t`.
//!
//! With `f_j = exp(-k_j (x - x_j) + k_j^3 t)` and `gamma = (k2 + k1)/(k2 - k1)`,
//! the solution is `u = 2 gamma G / F` where `F` and `G` are polynomials in
//! `f1, f2`. All evaluations factor out the dominant exponential so that only
//! ratios of moderately sized numbers are formed.

mod config;
mod residual;
pub(crate) mod terms;

use num_complex::Complex64;
use serde::Serialize;

pub use config::{parse_exact, Commensurability, SolitonConfig, Variant};
pub use residual::{eqg_residual, fd_jet, pde_residual, EqgResidual, FdJet};
pub use terms::Factor;

use crate::error::{Error, Result};
use terms::{evaluate, f_terms, g_terms, Exponents, Jet, Monomial};

/// Relative threshold below which a denominator counts as vanishing.
pub const POLE_TOLERANCE: f64 = 1e-12;

/// Largest real exponent accepted by raw (unbalanced) evaluation.
const MAX_EXPONENT: f64 = 709.0;

/// Either a finite complex value or a marker for a pole.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum PointValue {
    Finite(Complex64),
    Pole,
}

impl PointValue {
    pub fn finite(self) -> Option<Complex64> {
        match self {
            PointValue::Finite(v) => Some(v),
            PointValue::Pole => None,
        }
    }

    pub fn is_pole(self) -> bool {
        matches!(self, PointValue::Pole)
    }
}

fn check_point(x: Complex64, t: f64) -> Result<()> {
    if x.re.is_finite() && x.im.is_finite() && t.is_finite() {
        Ok(())
    } else {
        Err(Error::NonFinite(format!("x = {x}, t = {t}")))
    }
}

/// True when a denominator jet is small relative to its own scale.
pub(crate) fn vanishes(jet: &Jet, strip: f64) -> bool {
    jet.value.norm() < POLE_TOLERANCE * jet.magnitude.max(jet.dx.norm() * strip)
}

/// `f_j(x, t)` for `j` in `{1, 2}`.
pub fn eval_f(cfg: &SolitonConfig, j: usize, x: Complex64, t: f64) -> Result<Complex64> {
    check_point(x, t)?;
    let e = Exponents::at(cfg, x, t);
    let z = match j {
        1 => e.z1,
        2 => e.z2,
        _ => return Err(Error::InvalidConfig(format!("soliton index must be 1 or 2, got {j}"))),
    };
    if z.re > MAX_EXPONENT {
        return Err(Error::Overflow { exponent: z.re });
    }
    Ok(z.exp())
}

/// `g = gamma (f1 - f2)/(1 + f1 f2)` for `Minus`, `-gamma (f1 + f2)/(1 - f1 f2)` for `Plus`.
pub fn eval_g(cfg: &SolitonConfig, x: Complex64, t: f64) -> Result<PointValue> {
    check_point(x, t)?;
    let g = cfg.gamma();
    let s = cfg.variant().sign();
    let num = [
        Monomial { coeff: Complex64::new(-s * g, 0.0), a: 1, b: 0 },
        Monomial { coeff: Complex64::new(-g, 0.0), a: 0, b: 1 },
    ];
    let den = [
        Monomial { coeff: Complex64::new(1.0, 0.0), a: 0, b: 0 },
        Monomial { coeff: Complex64::new(-s, 0.0), a: 1, b: 1 },
    ];
    let e = Exponents::at(cfg, x, t);
    let shift = e.linear_shift();
    let d = evaluate(&den, &e, shift);
    if vanishes(&d, cfg.strip_scale()) {
        return Ok(PointValue::Pole);
    }
    let n = evaluate(&num, &e, shift);
    Ok(PointValue::Finite(n.value / d.value))
}

/// `(F, G)` without balancing; fails when the terms are not representable.
pub fn eval_fg(cfg: &SolitonConfig, x: Complex64, t: f64) -> Result<(Complex64, Complex64)> {
    check_point(x, t)?;
    let e = Exponents::at(cfg, x, t);
    let f = evaluate(&f_terms(cfg.gamma(), cfg.variant()), &e, 0.0).value;
    let g = evaluate(&g_terms(cfg.k1(), cfg.k2(), cfg.variant()), &e, 0.0).value;
    let finite = |v: Complex64| v.re.is_finite() && v.im.is_finite();
    if e.quadratic_shift() > MAX_EXPONENT || !finite(f) || !finite(g) {
        return Err(Error::Overflow {
            exponent: e.quadratic_shift(),
        });
    }
    Ok((f, g))
}

/// `F` and `G` divided by the common factor `exp(log_scale)`.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct Balanced {
    pub f: Complex64,
    pub g: Complex64,
    pub log_scale: f64,
}

pub fn eval_fg_balanced(cfg: &SolitonConfig, x: Complex64, t: f64) -> Result<Balanced> {
    check_point(x, t)?;
    let e = Exponents::at(cfg, x, t);
    let shift = e.quadratic_shift();
    Ok(Balanced {
        f: evaluate(&f_terms(cfg.gamma(), cfg.variant()), &e, shift).value,
        g: evaluate(&g_terms(cfg.k1(), cfg.k2(), cfg.variant()), &e, shift).value,
        log_scale: shift,
    })
}

/// Balanced jets of `F` and `G` at one point.
pub(crate) fn fg_jets(cfg: &SolitonConfig, x: Complex64, t: f64) -> (Jet, Jet) {
    let e = Exponents::at(cfg, x, t);
    let shift = e.quadratic_shift();
    (
        evaluate(&f_terms(cfg.gamma(), cfg.variant()), &e, shift),
        evaluate(&g_terms(cfg.k1(), cfg.k2(), cfg.variant()), &e, shift),
    )
}

/// Balanced jet of `F` alone.
pub(crate) fn f_jet(cfg: &SolitonConfig, x: Complex64, t: f64) -> Jet {
    let e = Exponents::at(cfg, x, t);
    evaluate(&f_terms(cfg.gamma(), cfg.variant()), &e, e.quadratic_shift())
}

/// Relative size of `F` at a point: `|F| / sum |terms|`.
pub fn relative_f(cfg: &SolitonConfig, x: Complex64, t: f64) -> f64 {
    let jet = f_jet(cfg, x, t);
    jet.value.norm() / jet.magnitude
}

/// `u = 2 gamma G / F`.
pub fn eval_u(cfg: &SolitonConfig, x: Complex64, t: f64) -> Result<PointValue> {
    check_point(x, t)?;
    let (f, g) = fg_jets(cfg, x, t);
    if vanishes(&f, cfg.strip_scale()) {
        return Ok(PointValue::Pole);
    }
    Ok(PointValue::Finite(2.0 * cfg.gamma() * g.value / f.value))
}

/// Analytic `u_x`.
pub fn eval_u_x(cfg: &SolitonConfig, x: Complex64, t: f64) -> Result<PointValue> {
    check_point(x, t)?;
    let (f, g) = fg_jets(cfg, x, t);
    if vanishes(&f, cfg.strip_scale()) {
        return Ok(PointValue::Pole);
    }
    let num = g.dx * f.value - g.value * f.dx;
    Ok(PointValue::Finite(2.0 * cfg.gamma() * num / (f.value * f.value)))
}

/// One-soliton factor `2 k f/(1 + f^2)` and `(1 + f^2) exp(-2 max(0, Re z))`, from `z = log f`.
fn soliton_parts(k: f64, z: Complex64) -> Result<(Complex64, Complex64)> {
    let m = z.re.max(0.0);
    let w = if z.re > 0.0 { (-z).exp() } else { z.exp() };
    let one_plus = Complex64::new(1.0, 0.0) + w * w;
    if one_plus.norm() < 1e-14 * (1.0 + w.norm_sqr()) {
        return Err(Error::Indeterminate { x: z });
    }
    let u = 2.0 * k * w / one_plus;
    let p = (-2.0 * m).exp() + (2.0 * z - 2.0 * m).exp();
    Ok((u, p))
}

/// `u` from the sum form `gamma (u2 +- u1)/D` with `u_j = 2 k_j f_j/(1 + f_j^2)`
/// and `D = F/((1 + f1^2)(1 + f2^2))`.
pub fn eval_u_sumform(cfg: &SolitonConfig, x: Complex64, t: f64) -> Result<PointValue> {
    check_point(x, t)?;
    let e = Exponents::at(cfg, x, t);
    let f = evaluate(&f_terms(cfg.gamma(), cfg.variant()), &e, e.quadratic_shift());
    if vanishes(&f, cfg.strip_scale()) {
        return Ok(PointValue::Pole);
    }
    let (u1, p1) = soliton_parts(cfg.k1(), e.z1).map_err(|_| Error::Indeterminate { x })?;
    let (u2, p2) = soliton_parts(cfg.k2(), e.z2).map_err(|_| Error::Indeterminate { x })?;
    let d = f.value / (p1 * p2);
    Ok(PointValue::Finite(
        cfg.gamma() * (cfg.variant().sign() * u1 + u2) / d,
    ))
}

/// `-k sech(-k (x - x0) + k^3 t)`.
pub fn eval_one_soliton(k: f64, x0: f64, x: Complex64, t: f64) -> Result<PointValue> {
    check_point(x, t)?;
    if !(k > 0.0) {
        return Err(Error::InvalidConfig(format!("need k > 0, got {k}")));
    }
    let z = -(x - x0) * k + k.powi(3) * t;
    let w = if z.re > 0.0 { (-z).exp() } else { z.exp() };
    let den = Complex64::new(1.0, 0.0) + w * w;
    let scale = (1.0 + w.norm_sqr()).max(2.0 * std::f64::consts::PI * w.norm_sqr());
    if den.norm() < POLE_TOLERANCE * scale {
        return Ok(PointValue::Pole);
    }
    Ok(PointValue::Finite(-2.0 * k * w / den))
}

/// Interaction time and centre `(x0, t0)` for the parametrization in which the
/// phase constant `log(gamma)/k_j` is absorbed into the shifts, i.e.
/// `f_j = gamma^{-1} exp(-k_j (x - x_j) + k_j^3 t)`.
pub fn normalized_interaction_point(k1: f64, k2: f64, x1: f64, x2: f64) -> (f64, f64) {
    let gamma = (k2 + k1) / (k2 - k1);
    let lg = gamma.ln();
    let dk2 = k2 * k2 - k1 * k1;
    let t0 = -(x2 - x1) / dk2 - lg / ((k1 + k2) * k1 * k2);
    let x0 = (k2 * k2 * x1 - k1 * k1 * x2) / dk2
        - (k1 * k1 + k1 * k2 + k2 * k2) / ((k1 + k2) * k1 * k2) * lg;
    (x0, t0)
}

/// Interaction time and centre of the solution described by `cfg`: the point
/// about which `u(., t0)` is even.
pub fn interaction_point(cfg: &SolitonConfig) -> (f64, f64) {
    let lg = cfg.gamma().ln();
    normalized_interaction_point(
        cfg.k1(),
        cfg.k2(),
        cfg.x1() + lg / cfg.k1(),
        cfg.x2() + lg / cfg.k2(),
    )
}
