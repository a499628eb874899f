//! Direct evaluation of the two-soliton formulas, kept separate from the library
//! so that tests compare against an independent implementation.
#![allow(dead_code)]

use num_complex::Complex64;

pub const I: Complex64 = Complex64::new(0.0, 1.0);

/// `coeff * f1^a * f2^b`
#[derive(Clone, Copy, Debug)]
pub struct Mono {
    pub coeff: Complex64,
    pub a: i32,
    pub b: i32,
}

fn mono(coeff: Complex64, a: i32, b: i32) -> Mono {
    Mono { coeff, a, b }
}

fn re(v: f64) -> Complex64 {
    Complex64::new(v, 0.0)
}

/// A sum of monomials evaluated as `value * exp(shift)`.
#[derive(Clone, Copy, Debug)]
pub struct Scaled {
    pub value: Complex64,
    /// Sum of term magnitudes at the same scale.
    pub magnitude: f64,
    pub shift: f64,
}

impl Scaled {
    pub fn relative(&self) -> f64 {
        self.value.norm() / self.magnitude
    }
}

/// Unshifted two-soliton data; `plus` selects same-sign solitons.
#[derive(Clone, Copy, Debug)]
pub struct Pair {
    pub k1: f64,
    pub k2: f64,
    pub plus: bool,
}

impl Pair {
    pub fn new(k1: f64, k2: f64, plus: bool) -> Self {
        Self { k1, k2, plus }
    }

    pub fn gamma(&self) -> f64 {
        (self.k2 + self.k1) / (self.k2 - self.k1)
    }

    fn s(&self) -> f64 {
        if self.plus {
            1.0
        } else {
            -1.0
        }
    }

    /// `(log f1, log f2)`
    pub fn logs(&self, x: Complex64, t: f64) -> (Complex64, Complex64) {
        (
            -self.k1 * x + self.k1.powi(3) * t,
            -self.k2 * x + self.k2.powi(3) * t,
        )
    }

    pub fn f_monos(&self) -> Vec<Mono> {
        let (g2, s) = (self.gamma().powi(2), self.s());
        vec![
            mono(re(1.0), 0, 0),
            mono(re(2.0 * s * (g2 - 1.0)), 1, 1),
            mono(re(1.0), 2, 2),
            mono(re(g2), 2, 0),
            mono(re(g2), 0, 2),
        ]
    }

    pub fn g_monos(&self) -> Vec<Mono> {
        let (k1, k2, s) = (self.k1, self.k2, self.s());
        vec![
            mono(re(s * k1), 1, 0),
            mono(re(s * k1), 1, 2),
            mono(re(k2), 0, 1),
            mono(re(k2), 2, 1),
        ]
    }

    /// The two factors of `F`: `index` 1 or 2.
    pub fn factor_monos(&self, index: u8) -> Vec<Mono> {
        let g = self.gamma();
        let e = if index == 1 { 1.0 } else { -1.0 };
        if self.plus {
            vec![
                mono(re(1.0), 0, 0),
                mono(I * e * g, 1, 0),
                mono(I * e * g, 0, 1),
                mono(re(-1.0), 1, 1),
            ]
        } else {
            vec![
                mono(re(1.0), 0, 0),
                mono(I * e * g, 1, 0),
                mono(-I * e * g, 0, 1),
                mono(re(1.0), 1, 1),
            ]
        }
    }

    /// `1 + gamma f1 + gamma f2 + f1 f2`
    pub fn kdv_monos(&self) -> Vec<Mono> {
        let g = self.gamma();
        vec![
            mono(re(1.0), 0, 0),
            mono(re(g), 1, 0),
            mono(re(g), 0, 1),
            mono(re(1.0), 1, 1),
        ]
    }

    /// Evaluates `sum weight(m) * m` scaled by the largest exponent among `monos`.
    pub fn eval(&self, monos: &[Mono], x: Complex64, t: f64, weight: impl Fn(&Mono) -> f64) -> Scaled {
        let (l1, l2) = self.logs(x, t);
        let exps: Vec<Complex64> = monos.iter().map(|m| m.a as f64 * l1 + m.b as f64 * l2).collect();
        let shift = exps.iter().map(|e| e.re).fold(f64::NEG_INFINITY, f64::max);
        let mut value = Complex64::new(0.0, 0.0);
        let mut magnitude = 0.0;
        for (m, e) in monos.iter().zip(&exps) {
            let term = m.coeff * weight(m) * (e - shift).exp();
            value += term;
            magnitude += term.norm();
        }
        Scaled {
            value,
            magnitude,
            shift,
        }
    }

    /// `d/dx` weight of a monomial.
    pub fn dx_weight(&self) -> impl Fn(&Mono) -> f64 {
        let (k1, k2) = (self.k1, self.k2);
        move |m| -(m.a as f64 * k1 + m.b as f64 * k2)
    }

    /// `d/dt` weight of a monomial.
    pub fn dt_weight(&self) -> impl Fn(&Mono) -> f64 {
        let (k1, k2) = (self.k1, self.k2);
        move |m| m.a as f64 * k1.powi(3) + m.b as f64 * k2.powi(3)
    }

    pub fn f(&self, x: Complex64, t: f64) -> Scaled {
        self.eval(&self.f_monos(), x, t, |_| 1.0)
    }

    pub fn u(&self, x: Complex64, t: f64) -> Complex64 {
        let f = self.f(x, t);
        let g = self.eval(&self.g_monos(), x, t, |_| 1.0);
        2.0 * self.gamma() * g.value / f.value * (g.shift - f.shift).exp()
    }

    /// `x'(t) = -F_t / F_x` at a zero of `F`.
    pub fn velocity(&self, x: Complex64, t: f64) -> Complex64 {
        let monos = self.f_monos();
        let ft = self.eval(&monos, x, t, self.dt_weight());
        let fx = self.eval(&monos, x, t, self.dx_weight());
        -ft.value / fx.value
    }

    /// `2 gamma G / F_x`, the residue of `u` at a simple zero of `F`.
    pub fn residue(&self, x: Complex64, t: f64) -> Complex64 {
        let fx = self.eval(&self.f_monos(), x, t, self.dx_weight());
        let g = self.eval(&self.g_monos(), x, t, |_| 1.0);
        2.0 * self.gamma() * g.value / fx.value * (g.shift - fx.shift).exp()
    }

    /// Newton's method on `F(., t)`.
    pub fn newton(&self, mut x: Complex64, t: f64) -> Option<Complex64> {
        let monos = self.f_monos();
        for _ in 0..100 {
            let f = self.eval(&monos, x, t, |_| 1.0);
            let fx = self.eval(&monos, x, t, self.dx_weight());
            let step = f.value / fx.value;
            x -= step;
            if step.norm() < 1e-15 * x.norm().max(1.0) {
                return Some(x);
            }
        }
        (self.f(x, t).relative() < 1e-13).then_some(x)
    }

    /// Trapezoid rule for `(2 pi i)^-1` times the integral of `u` over a circle.
    pub fn contour(&self, centre: Complex64, t: f64, radius: f64, points: usize) -> Complex64 {
        let sum: Complex64 = (0..points)
            .map(|j| {
                let w = Complex64::from_polar(1.0, 2.0 * std::f64::consts::PI * j as f64 / points as f64);
                self.u(centre + radius * w, t) * radius * w
            })
            .sum();
        sum / points as f64
    }
}

/// Number of zeros of `F(., t)` inside the counterclockwise rectangle
/// `[-half_width, half_width] x [im_lo, im_hi]`, by accumulated argument.
pub fn winding_count(pair: &Pair, t: f64, half_width: f64, im_lo: f64, im_hi: f64, per_unit: f64) -> Result<i64, String> {
    let corners = [
        Complex64::new(-half_width, im_lo),
        Complex64::new(half_width, im_lo),
        Complex64::new(half_width, im_hi),
        Complex64::new(-half_width, im_hi),
    ];
    let mut total = 0.0;
    let mut prev = pair.f(corners[0], t).value;
    for e in 0..4 {
        let (a, b) = (corners[e], corners[(e + 1) % 4]);
        let n = ((b - a).norm() * per_unit).ceil() as usize;
        for j in 1..=n {
            let x = a + (b - a) * (j as f64 / n as f64);
            let f = pair.f(x, t);
            if f.relative() < 1e-9 {
                return Err(format!("contour passes within 1e-9 of a zero at {x}"));
            }
            let step = (f.value / prev).arg();
            if step.abs() > 1.0 {
                return Err(format!("argument jumps by {step:.3} near {x}; refine the contour"));
            }
            total += step;
            prev = f.value;
        }
    }
    Ok((total / (2.0 * std::f64::consts::PI)).round() as i64)
}
