use std::f64::consts::PI;

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::kernel::{eval_u, fg_jets, SolitonConfig};

const CONTOUR_NODES: usize = 256;

#[derive(Clone, Copy, Debug, Serialize)]
pub struct ResidueReport {
    pub x: Complex64,
    /// `2 gamma G / F_x` at the pole.
    pub residue: Complex64,
    /// Trapezoid-rule value of `(2 pi i)^-1` times the integral of `u` around the pole.
    pub contour: Complex64,
    pub radius: f64,
}

impl ResidueReport {
    pub fn discrepancy(&self) -> f64 {
        (self.residue - self.contour).norm()
    }

    /// Distance of the residue from the nearer of `+i` and `-i`.
    pub fn quantization_error(&self) -> f64 {
        let i = Complex64::new(0.0, 1.0);
        (self.residue - i).norm().min((self.residue + i).norm())
    }
}

/// Residue of `u` at a simple zero of `F`, cross-checked by contour integration
/// on a circle of radius `1e-3 min(isolation, strip/4)`. Without an
/// `isolation` distance the Newton radius `2 |F_x / F_xx|` is used.
pub fn residue_at_pole(cfg: &SolitonConfig, x: Complex64, t: f64, isolation: Option<f64>) -> Result<ResidueReport> {
    let (f, g) = fg_jets(cfg, x, t);
    let residual = f.value.norm() / f.magnitude;
    if residual > 1e-10 {
        return Err(Error::NotAZero { x, residual });
    }
    let derivative = f.dx.norm() / f.magnitude;
    if derivative < 1e-8 {
        return Err(Error::MultipleZero { x, derivative });
    }
    let residue = 2.0 * cfg.gamma() * g.value / f.dx;
    let isolation = isolation.unwrap_or_else(|| 2.0 * (f.dx / f.dxx).norm());
    let radius = 1e-3 * isolation.min(cfg.strip_scale() / 4.0);
    let mut sum = Complex64::new(0.0, 0.0);
    for k in 0..CONTOUR_NODES {
        let w = Complex64::from_polar(radius, 2.0 * PI * k as f64 / CONTOUR_NODES as f64);
        let u = eval_u(cfg, x + w, t)?
            .finite()
            .ok_or(Error::StencilHitsPole { node: x + w, t })?;
        sum += u * w;
    }
    Ok(ResidueReport {
        x,
        residue,
        contour: sum / CONTOUR_NODES as f64,
        radius,
    })
}
