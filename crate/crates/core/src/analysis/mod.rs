//! Checks on the zero set of `F`: its factorization, the lines it avoids, the
//! trigonometric relations at zeros, the sign of the vertical velocity, the
//! vertical translations relating different factors, and residues.

mod residue;
mod signlaw;
mod translation;

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::kernel::terms::{evaluate, factor_terms, Exponents, Jet};
use crate::kernel::{relative_f, Factor, SolitonConfig, Variant};

pub use residue::{residue_at_pole, ResidueReport};
pub use signlaw::{vertical_sign, SignCheck};
pub use translation::{
    odd_parity_translation, parity_translation_theta, translation_residual, Identity,
    OddTranslation, ParityTranslation,
};

/// `x` split as `alpha = -Im x` and the moduli `A_j = |f_j(x, t)|`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct RealDecomp {
    pub alpha: f64,
    pub a1: f64,
    pub a2: f64,
}

impl RealDecomp {
    pub fn at(cfg: &SolitonConfig, x: Complex64, t: f64) -> Self {
        let (k1, k2) = (cfg.k1(), cfg.k2());
        Self {
            alpha: -x.im,
            a1: (-k1 * (x.re - cfg.x1()) + k1.powi(3) * t).exp(),
            a2: (-k2 * (x.re - cfg.x2()) + k2.powi(3) * t).exp(),
        }
    }

    /// `f_j = A_j exp(i k_j alpha)`.
    pub fn reconstruct(&self, cfg: &SolitonConfig) -> (Complex64, Complex64) {
        (
            Complex64::from_polar(self.a1, cfg.k1() * self.alpha),
            Complex64::from_polar(self.a2, cfg.k2() * self.alpha),
        )
    }
}

/// The factors of `F`, each divided by `exp(log_scale / 2)`.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct Factored {
    pub first: Complex64,
    pub second: Complex64,
    pub log_scale: f64,
}

pub(crate) fn factor_jet(cfg: &SolitonConfig, variant: Variant, factor: Factor, x: Complex64, t: f64) -> Jet {
    let e = Exponents::at(cfg, x, t);
    evaluate(&factor_terms(cfg.gamma(), variant, factor), &e, e.linear_shift())
}

/// `F = F_1 F_2` in balanced form; the product matches `eval_fg_balanced`.
pub fn factor_f(cfg: &SolitonConfig, variant: Variant, x: Complex64, t: f64) -> Factored {
    let e = Exponents::at(cfg, x, t);
    let shift = e.linear_shift();
    let first = evaluate(&factor_terms(cfg.gamma(), variant, Factor::First), &e, shift).value;
    let second = evaluate(&factor_terms(cfg.gamma(), variant, Factor::Second), &e, shift).value;
    Factored {
        first,
        second,
        log_scale: 2.0 * shift,
    }
}

/// Which factor vanishes at a zero of `F`.
pub fn vanishing_factor(cfg: &SolitonConfig, x: Complex64, t: f64) -> Result<Factor> {
    let rel = |f| {
        let j = factor_jet(cfg, cfg.variant(), f, x, t);
        j.value.norm() / j.magnitude
    };
    let (r1, r2) = (rel(Factor::First), rel(Factor::Second));
    let (small, large) = if r1 <= r2 { (r1, r2) } else { (r2, r1) };
    if small > 1e-8 {
        return Err(Error::NotAZero {
            x,
            residual: relative_f(cfg, x, t),
        });
    }
    if large < 1e-8 {
        return Err(Error::Precondition(format!("both factors vanish at {x}")));
    }
    Ok(if r1 <= r2 { Factor::First } else { Factor::Second })
}

/// Evenly spaced sample line `Im x = im`, `Re x` in `[lo, hi]`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct LineGrid {
    pub im: f64,
    pub lo: f64,
    pub hi: f64,
    pub points: usize,
}

#[derive(Clone, Copy, Debug, Serialize)]
pub struct LineMinimum {
    pub im: f64,
    /// Minimum of `|F| / sum |terms|` along the line.
    pub min_relative: f64,
    pub argmin: f64,
}

/// Smallest relative `|F|` along a horizontal line, refined by golden-section
/// search around the best grid point.
pub fn line_minimum(cfg: &SolitonConfig, t: f64, grid: LineGrid) -> Result<LineMinimum> {
    if grid.points < 3 || !(grid.hi > grid.lo) {
        return Err(Error::Precondition("line grid needs at least 3 points and hi > lo".into()));
    }
    let h = (grid.hi - grid.lo) / (grid.points - 1) as f64;
    let value = |re: f64| relative_f(cfg, Complex64::new(re, grid.im), t);
    let (k, _) = (0..grid.points)
        .map(|k| (k, value(grid.lo + h * k as f64)))
        .min_by(|a, b| a.1.total_cmp(&b.1))
        .expect("non-empty grid");
    let centre = grid.lo + h * k as f64;
    let (mut a, mut b) = ((centre - h).max(grid.lo), (centre + h).min(grid.hi));
    let ratio = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = b - ratio * (b - a);
    let mut d = a + ratio * (b - a);
    let (mut fc, mut fd) = (value(c), value(d));
    for _ in 0..80 {
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - ratio * (b - a);
            fc = value(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + ratio * (b - a);
            fd = value(d);
        }
    }
    let candidates = [(centre, value(centre)), (c, fc), (d, fd)];
    let (argmin, min_relative) = candidates
        .into_iter()
        .min_by(|a, b| a.1.total_cmp(&b.1))
        .expect("non-empty");
    Ok(LineMinimum {
        im: grid.im,
        min_relative,
        argmin,
    })
}

/// Minima of relative `|F|` on the real axis and, when commensurable, on
/// `Im x = lambda pi`.
pub fn check_no_real_poles(cfg: &SolitonConfig, t: f64, lo: f64, hi: f64, points: usize) -> Result<Vec<LineMinimum>> {
    let mut lines = vec![0.0];
    if let Some(c) = cfg.comm() {
        lines.push(c.lambda * std::f64::consts::PI);
    }
    lines
        .into_iter()
        .map(|im| line_minimum(cfg, t, LineGrid { im, lo, hi, points }))
        .collect()
}

/// Residuals of the three trigonometric relations at a zero of a `Plus` factor.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct CosResiduals {
    /// `(A2 - 1/A2) cos k1 alpha + (A1 - 1/A1) cos k2 alpha`, relative.
    pub combined: f64,
    /// `(A1 + 1/A1) cos k2 alpha - sin((k2 + k1) alpha)/gamma + gamma sin((k2 - k1) alpha)`, relative.
    pub second: f64,
    /// `(A2 + 1/A2) cos k1 alpha - sin((k2 + k1) alpha)/gamma - gamma sin((k2 - k1) alpha)`, relative.
    pub first: f64,
    pub decomp: RealDecomp,
}

impl CosResiduals {
    pub fn max(&self) -> f64 {
        self.combined.max(self.second).max(self.first)
    }
}

fn relative(terms: &[f64]) -> f64 {
    let scale: f64 = terms.iter().map(|v| v.abs()).sum();
    let sum: f64 = terms.iter().sum();
    if scale == 0.0 {
        0.0
    } else {
        sum.abs() / scale
    }
}

/// Evaluates the relations satisfied at zeros of `F_1` for the `Plus`
/// variant. Zeros of `F_2` are handled through `x -> conj x`.
pub fn cos_identities_residual(cfg: &SolitonConfig, x: Complex64, t: f64) -> Result<CosResiduals> {
    if cfg.variant() != Variant::Plus {
        return Err(Error::Precondition("the relations concern the Plus variant".into()));
    }
    let x = match vanishing_factor(cfg, x, t)? {
        Factor::First => x,
        Factor::Second => x.conj(),
    };
    let d = RealDecomp::at(cfg, x, t);
    let (k1, k2, g) = (cfg.k1(), cfg.k2(), cfg.gamma());
    let (c1, c2) = ((k1 * d.alpha).cos(), (k2 * d.alpha).cos());
    let sum = ((k2 + k1) * d.alpha).sin();
    let diff = ((k2 - k1) * d.alpha).sin();
    Ok(CosResiduals {
        combined: relative(&[(d.a2 - 1.0 / d.a2) * c1, (d.a1 - 1.0 / d.a1) * c2]),
        second: relative(&[(d.a1 + 1.0 / d.a1) * c2, -sum / g, g * diff]),
        first: relative(&[(d.a2 + 1.0 / d.a2) * c1, -sum / g, -g * diff]),
        decomp: d,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exppoly::oracle_poles;
    use crate::kernel::eval_fg_balanced;
    use std::f64::consts::PI;

    #[test]
    fn factors_at_origin() {
        let cfg = SolitonConfig::integers(1, 2, Variant::Plus).unwrap();
        let f = factor_f(&cfg, Variant::Plus, Complex64::new(0.0, 0.0), 0.0);
        let g = cfg.gamma();
        assert!((f.first - Complex64::new(0.0, 2.0 * g)).norm() < 1e-14);
        assert!((f.second - Complex64::new(0.0, -2.0 * g)).norm() < 1e-14);
        assert!((f.first * f.second - 4.0 * g * g).norm() < 1e-13);
    }

    #[test]
    fn product_matches_f() {
        let cfg = SolitonConfig::new(0.7, 1.9, Variant::Minus).unwrap().with_shifts(0.2, -0.1);
        for (x, t) in [(Complex64::new(3.0, 0.4), -1.5), (Complex64::new(-2.0, -1.1), 0.8)] {
            let f = factor_f(&cfg, Variant::Minus, x, t);
            let b = eval_fg_balanced(&cfg, x, t).unwrap();
            assert!((f.first * f.second - b.f).norm() < 1e-12 * b.f.norm().max(1e-300));
        }
    }

    #[test]
    fn decomposition_reconstructs() {
        let cfg = SolitonConfig::new(1.0, 2.5, Variant::Plus).unwrap().with_shifts(0.3, 0.0);
        let x = Complex64::new(0.4, -0.9);
        let d = RealDecomp::at(&cfg, x, 0.3);
        let (f1, f2) = d.reconstruct(&cfg);
        let e1 = crate::kernel::eval_f(&cfg, 1, x, 0.3).unwrap();
        let e2 = crate::kernel::eval_f(&cfg, 2, x, 0.3).unwrap();
        assert!((f1 - e1).norm() < 1e-12 * e1.norm());
        assert!((f2 - e2).norm() < 1e-12 * e2.norm());
    }

    #[test]
    fn lines_avoided_and_pole_line_hit() {
        let cfg = SolitonConfig::integers(1, 5, Variant::Minus).unwrap();
        for m in check_no_real_poles(&cfg, 0.0, -20.0, 20.0, 4001).unwrap() {
            assert!(m.min_relative > 1e-6, "{m:?}");
        }
        let hit = line_minimum(
            &cfg,
            0.0,
            LineGrid {
                im: PI / 2.0,
                lo: -20.0,
                hi: 20.0,
                points: 4001,
            },
        )
        .unwrap();
        assert!(hit.min_relative < 1e-14 && hit.argmin.abs() < 1e-3, "{hit:?}");
    }

    #[test]
    fn cos_relations_at_oracle_zeros() {
        let cfg = SolitonConfig::integers(1, 2, Variant::Plus).unwrap();
        for t in [-0.7, 0.3] {
            for p in oracle_poles(&cfg, t).unwrap() {
                let r = cos_identities_residual(&cfg, p.x, t).unwrap();
                assert!(r.max() < 1e-8, "{r:?}");
            }
        }
        assert!(cos_identities_residual(&cfg, Complex64::new(0.1, 0.1), 0.0).is_err());
    }

    #[test]
    fn factor_zero_conjugation() {
        let cfg = SolitonConfig::integers(2, 3, Variant::Minus).unwrap();
        for p in oracle_poles(&cfg, 0.4).unwrap() {
            let f = vanishing_factor(&cfg, p.x, 0.4).unwrap();
            let g = vanishing_factor(&cfg, p.x.conj(), 0.4).unwrap();
            assert_ne!(f, g);
        }
    }
}
