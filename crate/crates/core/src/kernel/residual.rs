use num_complex::Complex64;
use serde::Serialize;

use super::{eval_u, PointValue, SolitonConfig, Variant};
use crate::error::{Error, Result};

/// Left side of `(1 + g^2)(g_t + g_xxx) + 6 g_x (g_x^2 - g g_xx) = 0` and the
/// size of its largest term.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct EqgResidual {
    pub residual: Complex64,
    pub scale: f64,
}

impl EqgResidual {
    pub fn relative(&self) -> f64 {
        if self.scale == 0.0 {
            self.residual.norm()
        } else {
            self.residual.norm() / self.scale
        }
    }
}

/// Evaluates the `g` equation from the closed-form derivatives of `g`.
///
/// The `Plus` variant is obtained from the `Minus` formulas by `f1 -> -f1`.
pub fn eqg_residual(cfg: &SolitonConfig, x: Complex64, t: f64) -> Result<EqgResidual> {
    let (k1, k2) = (cfg.k1(), cfg.k2());
    let gamma = cfg.gamma();
    let mut z1 = -(x - cfg.x1()) * k1 + k1.powi(3) * t;
    let mut z2 = -(x - cfg.x2()) * k2 + k2.powi(3) * t;
    // Replacing both f_j by 1/f_j maps g to -g with the formulas below
    // returning g_x, -g_xx, g_xxx and g_t; the residual is unchanged.
    if z1.re + z2.re > 0.0 {
        z1 = -z1;
        z2 = -z2;
    }
    let mut f1 = z1.exp();
    let f2 = z2.exp();
    if cfg.variant() == Variant::Plus {
        f1 = -f1;
    }
    let den = 1.0 + f1 * f2;
    if den.norm() < 1e-10 * (1.0 + (f1 * f2).norm()) {
        return Err(Error::PoleOfG { x });
    }
    let (k1_2, k2_2, k1_3, k2_3) = (k1 * k1, k2 * k2, k1.powi(3), k2.powi(3));

    let g = gamma * (f1 - f2) / den;
    let g_t = gamma * (k1_3 * f1 - k2_3 * f2 + k1_3 * f1 * f2 * f2 - k2_3 * f1 * f1 * f2)
        / den.powi(2);
    let g_x = gamma * (k2 * f2 - k1 * f1 - k1 * f1 * f2 * f2 + k2 * f1 * f1 * f2) / den.powi(2);
    let g_xx = gamma / den.powi(3)
        * (k1_2 * f1 - k2_2 * f2
            + (k1_2 + 4.0 * k1 * k2 + k2_2) * (f1 * f2 * f2 - f1 * f1 * f2)
            - k1_2 * f1 * f1 * f2.powi(3)
            + k2_2 * f1.powi(3) * f2 * f2);
    let c1 = k1_3 + 4.0 * k2_3 + 6.0 * k1_2 * k2 + 12.0 * k1 * k2_2;
    let c2 = 4.0 * k1_3 + k2_3 + 6.0 * k1 * k2_2 + 12.0 * k1_2 * k2;
    let g_xxx = gamma / den.powi(4)
        * (k2_3 * f2 - k1_3 * f1 - c1 * (f1 * f2 * f2 + f1.powi(3) * f2 * f2)
            + c2 * (f1 * f1 * f2 + f1 * f1 * f2.powi(3))
            - k1_3 * f1.powi(3) * f2.powi(4)
            + k2_3 * f1.powi(4) * f2.powi(3));

    let one_g2 = 1.0 + g * g;
    let parts = [
        one_g2 * g_t,
        one_g2 * g_xxx,
        6.0 * g_x * g_x * g_x,
        -6.0 * g_x * g * g_xx,
    ];
    let residual: Complex64 = parts.iter().sum();
    if !(residual.re.is_finite() && residual.im.is_finite()) {
        return Err(Error::Overflow {
            exponent: z1.re.max(z2.re),
        });
    }
    let scale = parts.iter().map(|p| p.norm()).fold(0.0, f64::max);
    Ok(EqgResidual { residual, scale })
}

/// Centred finite-difference derivatives of a complex function of `(x, t)`.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct FdJet {
    pub u: Complex64,
    pub u_t: Complex64,
    pub u_x: Complex64,
    pub u_xxx: Complex64,
}

impl FdJet {
    /// `u_t + u_xxx + 6 u^2 u_x`
    pub fn mkdv_residual(&self) -> Complex64 {
        self.u_t + self.u_xxx + 6.0 * self.u * self.u * self.u_x
    }
}

/// Second-order stencils: `u_x` and `u_t` from `+-h`, `u_xxx` from the staggered
/// nodes `+-h/2, +-3h/2`.
pub fn fd_jet<F>(u: F, x: Complex64, t: f64, h: f64) -> Result<FdJet>
where
    F: Fn(Complex64, f64) -> Result<PointValue>,
{
    if !(h > 0.0) {
        return Err(Error::Precondition(format!("step must be positive, got {h}")));
    }
    let at = |dx: f64, dt: f64| -> Result<Complex64> {
        let node = x + dx;
        u(node, t + dt)?
            .finite()
            .ok_or(Error::StencilHitsPole { node, t: t + dt })
    };
    let centre = at(0.0, 0.0)?;
    let u_t = (at(0.0, h)? - at(0.0, -h)?) / (2.0 * h);
    let u_x = (at(h, 0.0)? - at(-h, 0.0)?) / (2.0 * h);
    let u_xxx = (at(1.5 * h, 0.0)? - 3.0 * at(0.5 * h, 0.0)? + 3.0 * at(-0.5 * h, 0.0)?
        - at(-1.5 * h, 0.0)?)
        / h.powi(3);
    Ok(FdJet {
        u: centre,
        u_t,
        u_x,
        u_xxx,
    })
}

/// Finite-difference residual of the mKdV equation for the two-soliton solution at real `x`.
pub fn pde_residual(cfg: &SolitonConfig, x: f64, t: f64, h: f64) -> Result<Complex64> {
    fd_jet(|x, t| eval_u(cfg, x, t), Complex64::new(x, 0.0), t, h).map(|j| j.mkdv_residual())
}
