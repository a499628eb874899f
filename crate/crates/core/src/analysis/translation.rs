use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::kernel::terms::{evaluate, f_terms, factor_terms, kdv_terms, Exponents};
use crate::kernel::{Factor, SolitonConfig, Variant};

/// `F_plus(x - i theta, t) = F_minus(x, t)` with `theta / (lambda pi) = 1`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ParityTranslation {
    pub theta: f64,
    /// Which `f_j` changes sign under the shift.
    pub flipped: usize,
    /// Integers with `theta/(lambda pi) = 2m/p1 = (2n+1)/p2` (even `p1`) or
    /// `(2m+1)/p1 = 2n/p2` (even `p2`).
    pub m: u64,
    pub n: u64,
}

pub fn parity_translation_theta(cfg: &SolitonConfig) -> Result<ParityTranslation> {
    let c = cfg
        .comm()
        .ok_or_else(|| Error::NotCommensurable("vertical translation needs k2/k1 rational".into()))?;
    if !c.mixed_parity() {
        return Err(Error::Precondition(format!(
            "p1 = {} and p2 = {} must have opposite parity",
            c.p1, c.p2
        )));
    }
    let theta = c.lambda * std::f64::consts::PI;
    Ok(if c.p1 % 2 == 0 {
        ParityTranslation {
            theta,
            flipped: 2,
            m: c.p1 / 2,
            n: (c.p2 - 1) / 2,
        }
    } else {
        ParityTranslation {
            theta,
            flipped: 1,
            m: (c.p1 - 1) / 2,
            n: c.p2 / 2,
        }
    })
}

/// Shifts taking the factors of `F` to `1 + gamma f1 + gamma f2 + f1 f2`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct OddTranslation {
    pub theta1: f64,
    pub theta2: f64,
    /// `theta_j = q_j lambda pi / 2`.
    pub q1: i64,
    pub q2: i64,
}

/// Smallest `q` in `{-1, 0, 1, 2}` with `p_j q = e_j (mod 4)`.
fn quarter_turns(p1: i64, p2: i64, e1: i64, e2: i64) -> Option<i64> {
    (-1..=2).find(|q| (p1 * q - e1).rem_euclid(4) == 0 && (p2 * q - e2).rem_euclid(4) == 0)
}

pub fn odd_parity_translation(cfg: &SolitonConfig) -> Result<OddTranslation> {
    let c = cfg
        .comm()
        .ok_or_else(|| Error::NotCommensurable("vertical translation needs k2/k1 rational".into()))?;
    let (p1, p2) = (c.p1 as i64, c.p2 as i64);
    let (n, e2) = match cfg.variant() {
        Variant::Plus => (p2 - p1, -1),
        Variant::Minus => (p2 + p1, 1),
    };
    if !c.both_odd() || n % 4 != 0 {
        return Err(Error::Precondition(format!(
            "need p1, p2 odd and {} divisible by 4; have p1 = {p1}, p2 = {p2}",
            match cfg.variant() {
                Variant::Plus => "p2 - p1",
                Variant::Minus => "p2 + p1",
            }
        )));
    }
    let q1 = quarter_turns(p1, p2, -1, e2).expect("congruence solvable");
    let q2 = quarter_turns(p1, p2, 1, -e2).expect("congruence solvable");
    let quarter = c.lambda * std::f64::consts::PI / 2.0;
    Ok(OddTranslation {
        theta1: q1 as f64 * quarter,
        theta2: q2 as f64 * quarter,
        q1,
        q2,
    })
}

/// Which translation identity to check.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Identity {
    /// `F_plus(x - i theta) = F_minus(x)`.
    Parity,
    /// `F_j(x - i theta) = 1 + gamma f1 + gamma f2 + f1 f2` for the configured variant.
    Factor(Factor),
}

/// `|lhs - rhs| / max(sum |terms|)` for a translation identity at `(x, t)`.
pub fn translation_residual(cfg: &SolitonConfig, identity: Identity, theta: f64, x: Complex64, t: f64) -> f64 {
    let shifted = x - Complex64::new(0.0, theta);
    let g = cfg.gamma();
    let (lhs, rhs) = match identity {
        Identity::Parity => {
            let e = Exponents::at(cfg, shifted, t);
            let shift = e.quadratic_shift();
            (
                evaluate(&f_terms(g, Variant::Plus), &e, shift),
                evaluate(&f_terms(g, Variant::Minus), &Exponents::at(cfg, x, t), shift),
            )
        }
        Identity::Factor(f) => {
            let e = Exponents::at(cfg, shifted, t);
            let shift = e.linear_shift();
            (
                evaluate(&factor_terms(g, cfg.variant(), f), &e, shift),
                evaluate(&kdv_terms(g), &Exponents::at(cfg, x, t), shift),
            )
        }
    };
    (lhs.value - rhs.value).norm() / lhs.magnitude.max(rhs.magnitude)
}
