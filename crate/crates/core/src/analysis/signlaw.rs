use num_complex::Complex64;
use serde::Serialize;

use super::{vanishing_factor, RealDecomp};
use crate::error::{Error, Result};
use crate::kernel::{f_jet, Factor, SolitonConfig, Variant};

/// Relative size below which a law value or a vertical speed counts as zero.
pub const DEAD_ZONE: f64 = 1e-10;

/// Predicted and measured sign of `Im x'(t)` at a simple zero of `F`.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct SignCheck {
    pub factor: Factor,
    /// `(A1 - 1/A1) cos(k2 alpha)`.
    pub law_value: f64,
    pub predicted: i8,
    pub measured: f64,
    /// `None` when either side is inside its dead zone.
    pub agrees: Option<bool>,
}

fn sign(v: f64, zero: f64) -> i8 {
    if v.abs() <= zero {
        0
    } else if v > 0.0 {
        1
    } else {
        -1
    }
}

/// The sign of `Im x'` follows `(A1 - 1/A1) cos(k2 alpha)` at zeros of `F_1`
/// for `Plus` and of `F_2` for `Minus`, and its negative at zeros of the other
/// factor.
pub fn vertical_sign(cfg: &SolitonConfig, x: Complex64, t: f64) -> Result<SignCheck> {
    let jet = f_jet(cfg, x, t);
    let fx = jet.dx.norm() / jet.magnitude;
    if fx < 1e-10 {
        return Err(Error::MultipleZero { x, derivative: fx });
    }
    let factor = vanishing_factor(cfg, x, t)?;
    let velocity = -jet.dt / jet.dx;
    let measured = velocity.im;
    let d = RealDecomp::at(cfg, x, t);
    let orientation = match (cfg.variant(), factor) {
        (Variant::Plus, Factor::First) | (Variant::Minus, Factor::Second) => 1.0,
        _ => -1.0,
    };
    let law_value = (d.a1 - 1.0 / d.a1) * (cfg.k2() * d.alpha).cos();
    let predicted = sign(orientation * law_value, DEAD_ZONE * (d.a1 + 1.0 / d.a1));
    let observed = sign(measured, DEAD_ZONE * velocity.norm().max(1.0));
    let agrees = (predicted != 0 && observed != 0).then_some(predicted == observed);
    Ok(SignCheck {
        factor,
        law_value,
        predicted,
        measured,
        agrees,
    })
}
