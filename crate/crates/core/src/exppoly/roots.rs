//! Simultaneous (Aberth–Ehrlich) root finding in complex double-double
//! arithmetic, for polynomials whose coefficients may span thousands of
//! binary orders of magnitude.

use num_complex::Complex64;
use serde::Serialize;

use super::dd::{cdd, cdiv, norm, to_c64, CDd, Scaled};
use crate::error::{Error, Result};

/// Dense polynomial `sum_i coeffs[i] y^i` with scaled coefficients.
#[derive(Clone, Debug)]
pub(crate) struct ScaledPoly {
    pub coeffs: Vec<Scaled>,
}

/// Value, derivative (times `y`) and absolute term sum at a point.
#[derive(Clone, Copy, Debug)]
struct Eval {
    p: Scaled,
    /// `y p'(y)`
    yp: Scaled,
    /// `log2 sum_i |a_i y^i|`
    log2_abs: f64,
}

impl ScaledPoly {
    pub fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    fn eval(&self, y: CDd) -> Eval {
        let mut p = Scaled::zero();
        let mut yp = Scaled::zero();
        let log2_y = norm(y).log2();
        let mut max_log = f64::NEG_INFINITY;
        let mut logs = Vec::with_capacity(self.coeffs.len());
        for (i, a) in self.coeffs.iter().enumerate().rev() {
            p = p.mul(y).add(*a);
            yp = yp.mul(y).add(a.mul(cdd(i as f64, 0.0)));
            let l = a.log2_abs() + i as f64 * log2_y;
            max_log = max_log.max(l);
            logs.push(l);
        }
        let sum: f64 = logs.iter().map(|l| (l - max_log).exp2()).sum();
        Eval {
            p,
            yp,
            log2_abs: max_log + sum.log2(),
        }
    }

    /// `log2` of the backward error `|p(y)| / sum |a_i y^i|`.
    fn log2_backward(&self, e: &Eval) -> f64 {
        e.p.log2_abs() - e.log2_abs
    }

    /// `p(y)/p'(y)`
    fn newton_ratio(&self, y: CDd, e: &Eval) -> CDd {
        let q = Scaled {
            m: cdiv(e.p.m, e.yp.m),
            e: e.p.e - e.yp.e,
        };
        q.to_cdd() * y
    }

    /// Initial points on circles whose radii come from the upper convex hull
    /// of `(i, log|a_i|)`.
    fn initial_points(&self) -> Vec<CDd> {
        let pts: Vec<(usize, f64)> = self
            .coeffs
            .iter()
            .enumerate()
            .filter(|(_, a)| !a.is_zero())
            .map(|(i, a)| (i, a.log2_abs()))
            .collect();
        let mut hull: Vec<(usize, f64)> = Vec::new();
        for p in pts {
            while hull.len() >= 2 {
                let (a, b) = (hull[hull.len() - 2], hull[hull.len() - 1]);
                let cross = (b.0 as f64 - a.0 as f64) * (p.1 - a.1) - (b.1 - a.1) * (p.0 as f64 - a.0 as f64);
                if cross >= 0.0 {
                    hull.pop();
                } else {
                    break;
                }
            }
            hull.push(p);
        }
        let mut out = Vec::with_capacity(self.degree());
        for (edge, w) in hull.windows(2).enumerate() {
            let (i, li) = w[0];
            let (j, lj) = w[1];
            let count = j - i;
            let radius = ((li - lj) / count as f64).exp2();
            let offset = 0.4 + 0.7 * edge as f64;
            for q in 0..count {
                let angle = std::f64::consts::TAU * q as f64 / count as f64 + offset;
                out.push(cdd(radius * angle.cos(), radius * angle.sin()));
            }
        }
        out
    }

    /// Taylor terms `y^j p^(j)(y)/j!` for `j <= order`, each with `log2` of its own term sum.
    fn taylor(&self, y: CDd, order: usize) -> Vec<(Scaled, f64)> {
        let mut powers = Vec::with_capacity(self.coeffs.len());
        let mut acc = Scaled::from_cdd(cdd(1.0, 0.0));
        for a in &self.coeffs {
            powers.push(a.mul_scaled(acc));
            acc = acc.mul(y);
        }
        (0..=order)
            .map(|j| {
                let mut total = Scaled::zero();
                let mut logs = Vec::new();
                for (i, term) in powers.iter().enumerate().skip(j) {
                    let binom = binomial(i, j);
                    total = total.add(term.mul(cdd(binom, 0.0)));
                    if !term.is_zero() {
                        logs.push(term.log2_abs() + binom.log2());
                    }
                }
                let max = logs.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
                let norm_log = max + logs.iter().map(|l| (l - max).exp2()).sum::<f64>().log2();
                (total, norm_log)
            })
            .collect()
    }

    /// Taylor terms relative to their term sums.
    fn relative_taylor(&self, y: CDd, order: usize) -> Vec<f64> {
        self.taylor(y, order)
            .into_iter()
            .map(|(v, norm_log)| (v.log2_abs() - norm_log).exp2())
            .collect()
    }

    /// Newton on `p^(m-1)`, which has a simple zero at an `m`-fold root of `p`.
    fn refine_multiple(&self, mut y: CDd, m: usize) -> CDd {
        for _ in 0..8 {
            let t = self.taylor(y, m);
            let (lower, upper) = (t[m - 1].0, t[m].0);
            if lower.is_zero() || upper.is_zero() {
                break;
            }
            let ratio = Scaled {
                m: cdiv(lower.m, upper.m),
                e: lower.e - upper.e,
            }
            .to_cdd();
            let step = CDd::new(ratio.re / m as f64, ratio.im / m as f64) * y;
            y -= step;
            if norm(step) < 1e-31 * norm(y) {
                break;
            }
        }
        y
    }
}

fn binomial(n: usize, k: usize) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

/// Controls for the root finder.
#[derive(Clone, Copy, Debug)]
pub struct RootOptions {
    /// Target number of significant decimal digits (at most 32).
    pub digits: u32,
    pub max_iterations: usize,
}

impl Default for RootOptions {
    fn default() -> Self {
        Self {
            digits: 30,
            max_iterations: 500,
        }
    }
}

/// One distinct root with its multiplicity.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct RootEntry {
    pub y: Complex64,
    pub multiplicity: usize,
    /// Relative condition estimate: term sum over `|y p'(y)|` for simple
    /// roots, over the leading nonvanishing Taylor term for clusters.
    pub condition: f64,
}

/// All roots of a polynomial specialized at time `t`.
#[derive(Clone, Debug, Serialize)]
pub struct RootSet {
    pub t: f64,
    pub roots: Vec<RootEntry>,
    pub iterations: usize,
}

impl RootSet {
    pub fn total_multiplicity(&self) -> usize {
        self.roots.iter().map(|r| r.multiplicity).sum()
    }
}

pub(crate) fn solve(poly: &ScaledPoly, t: f64, opts: RootOptions) -> Result<RootSet> {
    let n = poly.degree();
    if n == 0 {
        return Err(Error::DegreeTooLow(0));
    }
    let digits = opts.digits.min(32) as f64;
    let log2_step_tol = -(digits - 1.0) * std::f64::consts::LOG2_10;
    let log2_back_tol = -(digits + 1.0) * std::f64::consts::LOG2_10 + (n as f64).log2();

    let mut ys = poly.initial_points();
    let mut frozen = vec![false; n];
    let mut iterations = 0;
    while iterations < opts.max_iterations && frozen.iter().any(|f| !f) {
        iterations += 1;
        for k in 0..n {
            if frozen[k] {
                continue;
            }
            let e = poly.eval(ys[k]);
            if e.p.is_zero() || poly.log2_backward(&e) < log2_back_tol {
                frozen[k] = true;
                continue;
            }
            let ratio = poly.newton_ratio(ys[k], &e);
            let mut sum = cdd(0.0, 0.0);
            for (j, yj) in ys.iter().enumerate() {
                if j != k {
                    sum += cdiv(cdd(1.0, 0.0), ys[k] - yj);
                }
            }
            let w = cdiv(ratio, cdd(1.0, 0.0) - ratio * sum);
            ys[k] -= w;
            if norm(w).log2() - norm(ys[k]).log2() < log2_step_tol {
                frozen[k] = true;
            }
        }
    }

    let backward: Vec<f64> = ys.iter().map(|y| poly.log2_backward(&poly.eval(*y)).exp2()).collect();
    let worst = backward.iter().cloned().fold(0.0, f64::max);
    if frozen.iter().any(|f| !f) && worst > 1e-20 {
        return Err(Error::RootsNotConverged {
            iterations,
            worst_residual: worst,
        });
    }

    let clusters = cluster(&ys);
    let mut roots = Vec::with_capacity(clusters.len());
    for members in clusters {
        let m = members.len();
        let total = members.iter().fold(cdd(0.0, 0.0), |acc, &i| acc + ys[i]);
        let mut centre = CDd::new(total.re / m as f64, total.im / m as f64);
        if m > 1 {
            centre = poly.refine_multiple(centre, m);
        } else {
            for _ in 0..3 {
                let e = poly.eval(centre);
                if e.p.is_zero() {
                    break;
                }
                centre -= poly.newton_ratio(centre, &e);
            }
        }
        let taylor = poly.relative_taylor(centre, m);
        let multiplicity = confirmed_multiplicity(&taylor, m);
        let condition = 1.0 / taylor[multiplicity].max(f64::MIN_POSITIVE);
        if multiplicity == m {
            roots.push(RootEntry {
                y: to_c64(centre),
                multiplicity,
                condition,
            });
        } else {
            // The cluster is not a genuine multiple root; report members separately.
            for &i in &members {
                let t1 = poly.relative_taylor(ys[i], 1);
                roots.push(RootEntry {
                    y: to_c64(ys[i]),
                    multiplicity: 1,
                    condition: 1.0 / t1[1].max(f64::MIN_POSITIVE),
                });
            }
        }
    }
    roots.sort_by(|a, b| {
        (a.y.im, a.y.re)
            .partial_cmp(&(b.y.im, b.y.re))
            .unwrap_or(std::cmp::Ordering::Equal)
    });
    Ok(RootSet { t, roots, iterations })
}

/// Largest `m' <= m` such that the Taylor terms below `m'` vanish and term `m'` does not.
fn confirmed_multiplicity(taylor: &[f64], m: usize) -> usize {
    const ZERO: f64 = 1e-18;
    const NONZERO: f64 = 1e-12;
    if taylor[..m].iter().all(|&v| v < ZERO) && taylor[m] > NONZERO {
        m
    } else {
        1
    }
}

/// Groups indices whose points lie within `1e-6` relative distance.
fn cluster(ys: &[CDd]) -> Vec<Vec<usize>> {
    let n = ys.len();
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(parent: &mut [usize], i: usize) -> usize {
        let mut r = i;
        while parent[r] != r {
            r = parent[r];
        }
        parent[i] = r;
        r
    }
    for i in 0..n {
        for j in i + 1..n {
            let d = norm(ys[i] - ys[j]);
            let scale = norm(ys[i]).max(norm(ys[j]));
            if d < 1e-6 * scale {
                let (a, b) = (find(&mut parent, i), find(&mut parent, j));
                parent[a] = b;
            }
        }
    }
    let mut groups: std::collections::BTreeMap<usize, Vec<usize>> = Default::default();
    for i in 0..n {
        let r = find(&mut parent, i);
        groups.entry(r).or_default().push(i);
    }
    groups.into_values().collect()
}
