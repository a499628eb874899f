//! Monomial tables for `F`, `G` and the factors of `F`, evaluated in balanced
//! form: every term `c * f1^a * f2^b` is multiplied by `exp(-shift)` before
//! exponentiation so that large `|t|` stays representable.

use num_complex::Complex64;

use super::config::{SolitonConfig, Variant};

/// `c * f1^a * f2^b`
#[derive(Clone, Copy, Debug, PartialEq)]
pub(crate) struct Monomial {
    pub coeff: Complex64,
    pub a: u8,
    pub b: u8,
}

const fn mono(re: f64, im: f64, a: u8, b: u8) -> Monomial {
    Monomial {
        coeff: Complex64::new(re, im),
        a,
        b,
    }
}

/// Exponents of `f1` and `f2` at one point.
#[derive(Clone, Copy, Debug)]
pub(crate) struct Exponents {
    pub z1: Complex64,
    pub z2: Complex64,
    pub k1: f64,
    pub k2: f64,
}

impl Exponents {
    pub fn at(cfg: &SolitonConfig, x: Complex64, t: f64) -> Self {
        let (k1, k2) = (cfg.k1(), cfg.k2());
        Self {
            z1: -(x - cfg.x1()) * k1 + k1.powi(3) * t,
            z2: -(x - cfg.x2()) * k2 + k2.powi(3) * t,
            k1,
            k2,
        }
    }

    /// Balancing exponent for forms of total degree at most two in each `f_j`.
    pub fn quadratic_shift(&self) -> f64 {
        2.0 * self.z1.re.max(0.0) + 2.0 * self.z2.re.max(0.0)
    }

    /// Balancing exponent for forms of degree at most one in each `f_j`.
    pub fn linear_shift(&self) -> f64 {
        self.z1.re.max(0.0) + self.z2.re.max(0.0)
    }
}

/// Value and first derivatives of a monomial sum, all scaled by `exp(-shift)`.
#[derive(Clone, Copy, Debug, Default)]
pub(crate) struct Jet {
    pub value: Complex64,
    pub dx: Complex64,
    pub dt: Complex64,
    pub dxx: Complex64,
    /// Sum of absolute values of the scaled terms.
    pub magnitude: f64,
}

pub(crate) fn evaluate(terms: &[Monomial], e: &Exponents, shift: f64) -> Jet {
    let mut jet = Jet::default();
    for m in terms {
        let (a, b) = (f64::from(m.a), f64::from(m.b));
        let w = (e.z1 * a + e.z2 * b - shift).exp() * m.coeff;
        let rate_x = -(a * e.k1 + b * e.k2);
        let rate_t = a * e.k1.powi(3) + b * e.k2.powi(3);
        jet.value += w;
        jet.dx += w * rate_x;
        jet.dt += w * rate_t;
        jet.dxx += w * (rate_x * rate_x);
        jet.magnitude += w.norm();
    }
    jet
}

/// Monomials of `F`; the `f1 f2` coefficient carries the variant sign.
pub(crate) fn f_terms(gamma: f64, variant: Variant) -> [Monomial; 5] {
    let g2 = gamma * gamma;
    let mixed = variant.sign() * (2.0 * g2 - 2.0);
    [
        mono(1.0, 0.0, 0, 0),
        mono(g2, 0.0, 2, 0),
        mono(g2, 0.0, 0, 2),
        mono(mixed, 0.0, 1, 1),
        mono(1.0, 0.0, 2, 2),
    ]
}

/// Monomials of `G`.
pub(crate) fn g_terms(k1: f64, k2: f64, variant: Variant) -> [Monomial; 4] {
    let c1 = variant.sign() * k1;
    [
        mono(c1, 0.0, 1, 0),
        mono(c1, 0.0, 1, 2),
        mono(k2, 0.0, 0, 1),
        mono(k2, 0.0, 2, 1),
    ]
}

/// Which of the two factors `F = F_1 F_2`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, serde::Serialize)]
pub enum Factor {
    First,
    Second,
}

/// Monomials of the factors of `F`.
pub(crate) fn factor_terms(gamma: f64, variant: Variant, factor: Factor) -> [Monomial; 4] {
    let s = match factor {
        Factor::First => 1.0,
        Factor::Second => -1.0,
    };
    match variant {
        Variant::Plus => [
            mono(1.0, 0.0, 0, 0),
            mono(0.0, s * gamma, 1, 0),
            mono(0.0, s * gamma, 0, 1),
            mono(-1.0, 0.0, 1, 1),
        ],
        Variant::Minus => [
            mono(1.0, 0.0, 0, 0),
            mono(0.0, s * gamma, 1, 0),
            mono(0.0, -s * gamma, 0, 1),
            mono(1.0, 0.0, 1, 1),
        ],
    }
}

/// Monomials of `1 + gamma f1 + gamma f2 + f1 f2`.
pub(crate) fn kdv_terms(gamma: f64) -> [Monomial; 4] {
    [
        mono(1.0, 0.0, 0, 0),
        mono(gamma, 0.0, 1, 0),
        mono(gamma, 0.0, 0, 1),
        mono(1.0, 0.0, 1, 1),
    ]
}
