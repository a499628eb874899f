//! Exact polynomial form of `F` and `G` in the commensurable case.
//!
//! With `k2/k1 = p2/p1` and `lambda = p1/k1`, the variable `y = exp(-x/lambda)`
//! gives `f_j = exp(k_j^3 t) y^(p_j)`, so `F` and `G` become polynomials in `y`
//! whose coefficients are rationals times `exp(sigma t)`.

mod dd;
mod roots;

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_complex::Complex64;
use num_rational::{BigRational, Rational64};
use num_traits::{One, ToPrimitive, Zero};
use serde::{Serialize, Serializer};

pub use roots::{RootEntry, RootOptions, RootSet};

use crate::error::{Error, Result};
use crate::kernel::{SolitonConfig, Variant};
use dd::{exp_split, ratio_to_dd, Scaled};
use roots::ScaledPoly;

/// `coeff * exp(rate * t) * y^power`
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ExpTerm {
    pub power: i64,
    pub coeff: BigRational,
    pub rate: BigRational,
}

/// Sum of [`ExpTerm`]s, sorted by `(power, rate)` with no zero coefficients.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ExpPoly {
    terms: Vec<ExpTerm>,
    lambda: BigRational,
}

fn big(r: Rational64) -> BigRational {
    BigRational::new(BigInt::from(*r.numer()), BigInt::from(*r.denom()))
}

fn ratio_to_f64(r: &BigRational) -> f64 {
    r.to_f64().unwrap_or(f64::NAN)
}

impl ExpPoly {
    /// Builds a polynomial, merging terms with equal `(power, rate)` and pruning zeros.
    pub fn from_terms(terms: impl IntoIterator<Item = ExpTerm>, lambda: BigRational) -> Self {
        let mut merged: BTreeMap<(i64, BigRational), BigRational> = BTreeMap::new();
        for t in terms {
            *merged.entry((t.power, t.rate)).or_insert_with(BigRational::zero) += t.coeff;
        }
        let terms = merged
            .into_iter()
            .filter(|(_, c)| !c.is_zero())
            .map(|((power, rate), coeff)| ExpTerm { power, coeff, rate })
            .collect();
        Self { terms, lambda }
    }

    pub fn terms(&self) -> &[ExpTerm] {
        &self.terms
    }

    pub fn lambda(&self) -> &BigRational {
        &self.lambda
    }

    pub fn lambda_f64(&self) -> f64 {
        ratio_to_f64(&self.lambda)
    }

    /// Highest power of `y`.
    pub fn degree(&self) -> i64 {
        self.terms.iter().map(|t| t.power).max().unwrap_or(0)
    }

    /// Lowest power of `y`.
    pub fn low_power(&self) -> i64 {
        self.terms.iter().map(|t| t.power).min().unwrap_or(0)
    }

    /// Exact coefficient of `exp(rate t) y^power`, zero if absent.
    pub fn coefficient(&self, power: i64, rate: &BigRational) -> BigRational {
        self.terms
            .iter()
            .find(|t| t.power == power && &t.rate == rate)
            .map(|t| t.coeff.clone())
            .unwrap_or_else(BigRational::zero)
    }

    /// Direct double-precision evaluation.
    pub fn eval(&self, y: Complex64, t: f64) -> Complex64 {
        self.terms
            .iter()
            .map(|term| {
                ratio_to_f64(&term.coeff) * (ratio_to_f64(&term.rate) * t).exp() * y.powi(term.power as i32)
            })
            .sum()
    }

    /// Coefficients at time `t` in extended precision, with `y^low` stripped.
    fn specialize(&self, t: f64) -> ScaledPoly {
        let low = self.low_power();
        let n = (self.degree() - low) as usize;
        let mut coeffs = vec![Scaled::zero(); n + 1];
        let td = dd::dd(t);
        for term in &self.terms {
            let (mant, exp2) = exp_split(ratio_to_dd(&term.rate) * td);
            let value = Scaled {
                m: dd::CDd::new(mant * ratio_to_dd(&term.coeff), dd::dd(0.0)),
                e: exp2,
            }
            .normalized();
            let slot = &mut coeffs[(term.power - low) as usize];
            *slot = slot.add(value);
        }
        ScaledPoly { coeffs }
    }
}

#[derive(Serialize)]
struct RationalDto {
    num: String,
    den: String,
}

impl From<&BigRational> for RationalDto {
    fn from(r: &BigRational) -> Self {
        Self {
            num: r.numer().to_string(),
            den: r.denom().to_string(),
        }
    }
}

#[derive(Serialize)]
struct TermDto {
    power: i64,
    coeff: RationalDto,
    rate: RationalDto,
}

#[derive(Serialize)]
struct ExpPolyDto {
    lambda: RationalDto,
    terms: Vec<TermDto>,
}

impl Serialize for ExpPoly {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        ExpPolyDto {
            lambda: (&self.lambda).into(),
            terms: self
                .terms
                .iter()
                .map(|t| TermDto {
                    power: t.power,
                    coeff: (&t.coeff).into(),
                    rate: (&t.rate).into(),
                })
                .collect(),
        }
        .serialize(s)
    }
}

/// Exact wavenumbers, integer ratio and `lambda`, refusing shifted or approximate configurations.
fn exact_data(cfg: &SolitonConfig) -> Result<(BigRational, BigRational, i64, i64, BigRational)> {
    let (k1, k2) = cfg.exact_wavenumbers().ok_or_else(|| {
        Error::NotCommensurable("exact rational wavenumbers are required".into())
    })?;
    let comm = cfg
        .comm()
        .ok_or_else(|| Error::NotCommensurable("missing integer ratio".into()))?;
    if cfg.has_shifts() {
        return Err(Error::ShiftedExactPoly);
    }
    let lambda = big(cfg.lambda_exact().expect("exact config has lambda"));
    Ok((big(k1), big(k2), comm.p1 as i64, comm.p2 as i64, lambda))
}

fn monomial(coeff: BigRational, a: i64, b: i64, data: &(BigRational, BigRational, i64, i64, BigRational)) -> ExpTerm {
    let (k1, k2, p1, p2, _) = data;
    let cube = |k: &BigRational| k * k * k;
    ExpTerm {
        power: a * p1 + b * p2,
        coeff,
        rate: cube(k1) * BigInt::from(a) + cube(k2) * BigInt::from(b),
    }
}

fn gamma(k1: &BigRational, k2: &BigRational) -> BigRational {
    (k2 + k1) / (k2 - k1)
}

/// `F` as an exact polynomial in `y` for the given variant.
pub fn build_f_poly(cfg: &SolitonConfig, variant: Variant) -> Result<ExpPoly> {
    let data = exact_data(cfg)?;
    let g2 = {
        let g = gamma(&data.0, &data.1);
        &g * &g
    };
    let two = BigRational::from_integer(BigInt::from(2));
    let mixed = (&two * &g2 - &two)
        * BigRational::from_integer(BigInt::from(match variant {
            Variant::Plus => 1,
            Variant::Minus => -1,
        }));
    let terms = [
        monomial(BigRational::one(), 0, 0, &data),
        monomial(g2.clone(), 2, 0, &data),
        monomial(g2, 0, 2, &data),
        monomial(mixed, 1, 1, &data),
        monomial(BigRational::one(), 2, 2, &data),
    ];
    Ok(ExpPoly::from_terms(terms, data.4.clone()))
}

/// `G` as an exact polynomial in `y` for the given variant.
pub fn build_g_poly(cfg: &SolitonConfig, variant: Variant) -> Result<ExpPoly> {
    let data = exact_data(cfg)?;
    let c1 = match variant {
        Variant::Plus => data.0.clone(),
        Variant::Minus => -data.0.clone(),
    };
    let k2 = data.1.clone();
    let terms = [
        monomial(c1.clone(), 1, 0, &data),
        monomial(c1, 1, 2, &data),
        monomial(k2.clone(), 0, 1, &data),
        monomial(k2, 2, 1, &data),
    ];
    Ok(ExpPoly::from_terms(terms, data.4.clone()))
}

/// All roots in `y` (other than `y = 0`) of the polynomial at time `t`.
pub fn roots_at_time(poly: &ExpPoly, t: f64) -> Result<RootSet> {
    roots_at_time_with(poly, t, RootOptions::default())
}

pub fn roots_at_time_with(poly: &ExpPoly, t: f64, opts: RootOptions) -> Result<RootSet> {
    if !t.is_finite() {
        return Err(Error::NonFinite(format!("t = {t}")));
    }
    let specialized = poly.specialize(t);
    let degree = specialized.degree();
    if degree == 0 {
        return Err(Error::DegreeTooLow(degree));
    }
    roots::solve(&specialized, t, opts)
}

/// Inverse of `y = exp(-x/lambda)` with `Im x` in `(-lambda pi, lambda pi]`.
pub fn y_to_x(y: Complex64, lambda: f64) -> Result<Complex64> {
    if y.norm() == 0.0 {
        return Err(Error::ZeroY);
    }
    let arg = y.arg();
    let im = if arg.abs() == std::f64::consts::PI {
        lambda * std::f64::consts::PI
    } else {
        -lambda * arg
    };
    Ok(Complex64::new(-lambda * y.norm().ln(), im))
}

/// Inverse of [`y_to_x`].
pub fn x_to_y(x: Complex64, lambda: f64) -> Complex64 {
    (-x / lambda).exp()
}

/// One pole of `u` with its multiplicity as a zero of `F`.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct OraclePole {
    pub x: Complex64,
    pub multiplicity: usize,
    pub condition: f64,
}

/// All poles of `u` in the fundamental strip at time `t`, through the global root finder.
///
/// Shifted configurations are handled through the equivalent space-time translation.
pub fn oracle_poles(cfg: &SolitonConfig, t: f64) -> Result<Vec<OraclePole>> {
    oracle_poles_with(cfg, t, RootOptions::default())
}

pub fn oracle_poles_with(cfg: &SolitonConfig, t: f64, opts: RootOptions) -> Result<Vec<OraclePole>> {
    let (a, b) = cfg.translation();
    let poly = build_f_poly(&cfg.unshifted(), cfg.variant())?;
    let lambda = poly.lambda_f64();
    let set = roots_at_time_with(&poly, t - b, opts)?;
    set.roots
        .iter()
        .map(|r| {
            Ok(OraclePole {
                x: y_to_x(r.y, lambda)? + a,
                multiplicity: r.multiplicity,
                condition: r.condition,
            })
        })
        .collect()
}
