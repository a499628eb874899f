//! Double-double helpers: an accurate `exp`, conversion from big rationals and
//! complex numbers carrying a separate binary exponent.

use num_bigint::BigInt;
use num_complex::Complex;
use num_rational::BigRational;
use num_traits::{FromPrimitive, ToPrimitive, Zero};
use twofloat::{consts::LN_2, TwoFloat};

pub(crate) type Dd = TwoFloat;
pub(crate) type CDd = Complex<TwoFloat>;

pub(crate) fn dd(x: f64) -> Dd {
    TwoFloat::from(x)
}

pub(crate) fn cdd(re: f64, im: f64) -> CDd {
    Complex::new(dd(re), dd(im))
}

pub(crate) fn to_c64(z: CDd) -> num_complex::Complex64 {
    num_complex::Complex64::new(z.re.hi() + z.re.lo(), z.im.hi() + z.im.lo())
}

pub(crate) fn norm(z: CDd) -> f64 {
    z.re.hi().hypot(z.im.hi())
}

/// Exact power of two, split to stay inside the `f64` exponent range.
fn pow2(k: i64) -> (f64, i64) {
    let k1 = k.clamp(-1000, 1000);
    (2f64.powi(k1 as i32), k - k1)
}

pub(crate) fn ldexp(mut x: Dd, mut k: i64) -> Dd {
    while k != 0 {
        let (factor, rest) = pow2(k);
        x = TwoFloat::try_from((x.hi() * factor, x.lo() * factor)).unwrap_or(TwoFloat::from(x.hi() * factor));
        k = rest;
        if x.hi() == 0.0 || !x.hi().is_finite() {
            break;
        }
    }
    x
}

pub(crate) fn cldexp(z: CDd, k: i64) -> CDd {
    Complex::new(ldexp(z.re, k), ldexp(z.im, k))
}

fn bigint_to_dd(n: &BigInt) -> Dd {
    let hi = n.to_f64().unwrap_or(f64::INFINITY);
    if !hi.is_finite() {
        return dd(hi);
    }
    let rest = n - BigInt::from_f64(hi).unwrap_or_else(BigInt::zero);
    let lo = rest.to_f64().unwrap_or(0.0);
    TwoFloat::new_add(hi, lo)
}

pub(crate) fn ratio_to_dd(r: &BigRational) -> Dd {
    div(bigint_to_dd(r.numer()), bigint_to_dd(r.denom()))
}

/// Double-double quotient by three rounds of long division.
///
/// `TwoFloat`'s own division forms the reciprocal residual without a fused
/// multiply-add and is only accurate to double precision.
pub(crate) fn div(a: Dd, b: Dd) -> Dd {
    let q1 = a.hi() / b.hi();
    let r = a - b * q1;
    let q2 = r.hi() / b.hi();
    let r = r - b * q2;
    let q3 = r.hi() / b.hi();
    TwoFloat::new_add(q1, q2) + q3
}

/// Complex double-double quotient with the divisor rescaled to unit size.
pub(crate) fn cdiv(a: CDd, b: CDd) -> CDd {
    let mag = b.re.hi().abs().max(b.im.hi().abs());
    if mag == 0.0 {
        return cdd(f64::INFINITY, f64::INFINITY);
    }
    let k = mag.log2().floor() as i64;
    let b = cldexp(b, -k);
    let den = b.re * b.re + b.im * b.im;
    let num = a * b.conj();
    cldexp(Complex::new(div(num.re, den), div(num.im, den)), -k)
}

/// `exp(x) = mantissa * 2^exponent` with the mantissa in `[0.7, 1.5)`.
pub(crate) fn exp_split(x: Dd) -> (Dd, i64) {
    let k = (x.hi() / LN_2.hi()).round();
    let r = x - LN_2 * k;
    let mut sum = dd(1.0);
    let mut term = dd(1.0);
    for n in 1..40 {
        term = term * r / (n as f64);
        sum += term;
        if term.hi().abs() < 1e-34 * sum.hi().abs() {
            break;
        }
    }
    (sum, k as i64)
}

/// A complex double-double scaled by a power of two: `m * 2^e`.
#[derive(Clone, Copy, Debug)]
pub(crate) struct Scaled {
    pub m: CDd,
    pub e: i64,
}

impl Scaled {
    pub fn zero() -> Self {
        Self { m: cdd(0.0, 0.0), e: 0 }
    }

    pub fn from_cdd(m: CDd) -> Self {
        Self { m, e: 0 }.normalized()
    }

    pub fn is_zero(&self) -> bool {
        self.m.re.hi() == 0.0 && self.m.im.hi() == 0.0
    }

    pub fn normalized(self) -> Self {
        let mag = self.m.re.hi().abs().max(self.m.im.hi().abs());
        if mag == 0.0 || !mag.is_finite() {
            return self;
        }
        let k = mag.log2().floor() as i64;
        Self {
            m: cldexp(self.m, -k),
            e: self.e + k,
        }
    }

    /// `log2 |self|`, or `-inf` for zero.
    pub fn log2_abs(&self) -> f64 {
        if self.is_zero() {
            f64::NEG_INFINITY
        } else {
            norm(self.m).log2() + self.e as f64
        }
    }

    pub fn mul(self, z: CDd) -> Self {
        Self { m: self.m * z, e: self.e }.normalized()
    }

    pub fn mul_scaled(self, other: Scaled) -> Self {
        Self {
            m: self.m * other.m,
            e: self.e + other.e,
        }
        .normalized()
    }

    pub fn add(self, other: Scaled) -> Self {
        if other.is_zero() {
            return self;
        }
        if self.is_zero() {
            return other;
        }
        let (big, small) = if self.e >= other.e { (self, other) } else { (other, self) };
        let gap = small.e - big.e;
        if gap < -240 {
            return big;
        }
        Self {
            m: big.m + cldexp(small.m, gap),
            e: big.e,
        }
        .normalized()
    }

    /// Converts to a plain complex double-double, saturating on overflow.
    pub fn to_cdd(self) -> CDd {
        cldexp(self.m, self.e)
    }
}
