use std::fmt;
use std::str::FromStr;

use num_integer::Integer;
use num_rational::Rational64;
use num_traits::{Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Selects which of the two sign variants of the two-soliton solution is meant.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Variant {
    Plus,
    Minus,
}

impl Variant {
    /// +1 for `Plus`, -1 for `Minus`.
    pub fn sign(self) -> f64 {
        match self {
            Variant::Plus => 1.0,
            Variant::Minus => -1.0,
        }
    }

    pub fn flipped(self) -> Self {
        match self {
            Variant::Plus => Variant::Minus,
            Variant::Minus => Variant::Plus,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Variant::Plus => "plus",
            Variant::Minus => "minus",
        }
    }
}

impl fmt::Display for Variant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Variant {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "plus" | "+" => Ok(Variant::Plus),
            "minus" | "-" => Ok(Variant::Minus),
            other => Err(Error::InvalidConfig(format!("unknown variant '{other}'"))),
        }
    }
}

/// Integer ratio data available when `k2/k1` is rational.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Commensurability {
    pub p1: u64,
    pub p2: u64,
    /// `p1/k1 = p2/k2`; the imaginary period of the pole pattern is `2*pi*lambda`.
    pub lambda: f64,
}

impl Commensurability {
    pub fn both_odd(&self) -> bool {
        self.p1.is_odd() && self.p2.is_odd()
    }

    pub fn mixed_parity(&self) -> bool {
        self.p1.is_odd() != self.p2.is_odd()
    }

    /// Degree of `F` as a polynomial in `y = exp(-x/lambda)`.
    pub fn degree(&self) -> usize {
        2 * (self.p1 + self.p2) as usize
    }
}

/// Full parameter set of a two-soliton solution.
///
/// Exact configurations keep the rational wavenumbers so that the polynomial
/// form of `F` and `G` can be built without rounding.
#[derive(Clone, Debug, PartialEq)]
pub struct SolitonConfig {
    k1: f64,
    k2: f64,
    variant: Variant,
    x1: f64,
    x2: f64,
    gamma: f64,
    exact: Option<(Rational64, Rational64)>,
    comm: Option<Commensurability>,
}

impl SolitonConfig {
    /// Approximate-mode configuration with zero shifts.
    pub fn new(k1: f64, k2: f64, variant: Variant) -> Result<Self> {
        if !k1.is_finite() || !k2.is_finite() {
            return Err(Error::InvalidConfig("wavenumbers must be finite".into()));
        }
        if k1 <= 0.0 || k2 <= k1 {
            return Err(Error::InvalidConfig(format!(
                "need 0 < k1 < k2, got k1 = {k1}, k2 = {k2}"
            )));
        }
        Ok(Self {
            k1,
            k2,
            variant,
            x1: 0.0,
            x2: 0.0,
            gamma: (k2 + k1) / (k2 - k1),
            exact: None,
            comm: None,
        })
    }

    /// Exact-mode configuration from rational wavenumbers.
    pub fn exact(k1: Rational64, k2: Rational64, variant: Variant) -> Result<Self> {
        if !k1.is_positive() || k2 <= k1 {
            return Err(Error::InvalidConfig(format!(
                "need 0 < k1 < k2, got k1 = {k1}, k2 = {k2}"
            )));
        }
        let ratio = k2 / k1;
        let p1 = ratio.denom().to_u64().expect("positive");
        let p2 = ratio.numer().to_u64().expect("positive");
        let lambda = Rational64::from_integer(p1 as i64) / k1;
        let mut cfg = Self::new(to_f64(k1), to_f64(k2), variant)?;
        cfg.gamma = to_f64((k2 + k1) / (k2 - k1));
        cfg.exact = Some((k1, k2));
        cfg.comm = Some(Commensurability {
            p1,
            p2,
            lambda: to_f64(lambda),
        });
        Ok(cfg)
    }

    /// Shorthand for integer wavenumbers in exact mode.
    pub fn integers(k1: i64, k2: i64, variant: Variant) -> Result<Self> {
        Self::exact(Rational64::from_integer(k1), Rational64::from_integer(k2), variant)
    }

    pub fn with_shifts(mut self, x1: f64, x2: f64) -> Self {
        self.x1 = x1;
        self.x2 = x2;
        self
    }

    pub fn with_variant(mut self, variant: Variant) -> Self {
        self.variant = variant;
        self
    }

    pub fn k1(&self) -> f64 {
        self.k1
    }

    pub fn k2(&self) -> f64 {
        self.k2
    }

    pub fn variant(&self) -> Variant {
        self.variant
    }

    pub fn x1(&self) -> f64 {
        self.x1
    }

    pub fn x2(&self) -> f64 {
        self.x2
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn comm(&self) -> Option<&Commensurability> {
        self.comm.as_ref()
    }

    pub fn exact_wavenumbers(&self) -> Option<(Rational64, Rational64)> {
        self.exact
    }

    pub fn has_shifts(&self) -> bool {
        !(self.x1.is_zero() && self.x2.is_zero())
    }

    /// Exact `lambda = p1/k1`.
    pub fn lambda_exact(&self) -> Option<Rational64> {
        let (k1, _) = self.exact?;
        let comm = self.comm?;
        Some(Rational64::from_integer(comm.p1 as i64) / k1)
    }

    /// Natural imaginary length scale: `lambda*pi` when commensurable, otherwise `pi/k1`.
    pub fn strip_scale(&self) -> f64 {
        match self.comm {
            Some(c) => c.lambda * std::f64::consts::PI,
            None => std::f64::consts::PI / self.k1,
        }
    }

    /// Space-time translation `(a, b)` such that the shifted solution at `(x, t)`
    /// equals the unshifted one at `(x - a, t - b)`.
    ///
    /// Every shift pair is such a translation because `x_j = a - k_j^2 b` is
    /// uniquely solvable for distinct speeds.
    pub fn translation(&self) -> (f64, f64) {
        let b = (self.x1 - self.x2) / (self.k2 * self.k2 - self.k1 * self.k1);
        let a = self.x1 + self.k1 * self.k1 * b;
        (a, b)
    }

    /// Same wavenumbers, variant and commensurability but zero shifts.
    pub fn unshifted(&self) -> Self {
        self.clone().with_shifts(0.0, 0.0)
    }
}

fn to_f64(r: Rational64) -> f64 {
    *r.numer() as f64 / *r.denom() as f64
}

/// Parses `"p/q"` or an integer as an exact rational; returns `None` for decimals.
pub fn parse_exact(s: &str) -> Option<Rational64> {
    let s = s.trim();
    if let Some((n, d)) = s.split_once('/') {
        let n: i64 = n.trim().parse().ok()?;
        let d: i64 = d.trim().parse().ok()?;
        if d == 0 {
            return None;
        }
        return Some(Rational64::new(n, d));
    }
    s.parse::<i64>().ok().map(Rational64::from_integer)
}
