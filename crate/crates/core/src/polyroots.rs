//! Real roots of polynomials up to degree four.
//!
//! Roots are isolated recursively: the real roots of `p'` split the real line
//! into intervals on which `p` is monotone, so each interval whose endpoints
//! bracket a sign change holds exactly one root, found by safeguarded Newton
//! iteration. Critical points where `p` touches zero are reported as (even
//! multiplicity) roots. Coefficients are normalized by their largest magnitude
//! first, which makes the whole procedure scale invariant.

use crate::error::{Error, Result};

/// Relative distance under which two roots are reported once.
pub const MERGE_TOL: f64 = 1e-7;
/// Backward-error bound: with coefficients scaled to `max|c_i| = 1`, a root
/// `r` is returned only if `|p(r)| <= RESIDUAL_TOL · max(1, Σ|c_i||r|^i)`.
/// Measuring against `Σ|c_i||r|^i` keeps genuine roots of large magnitude,
/// where rounding alone exceeds any absolute bound.
pub const RESIDUAL_TOL: f64 = 1e-8;

/// A real polynomial with coefficients in ascending degree order.
#[derive(Debug, Clone, PartialEq)]
pub struct Polynomial {
    coeffs: Vec<f64>,
}

impl Polynomial {
    /// At most five coefficients (degree four); all must be finite.
    pub fn new(coeffs: Vec<f64>) -> Result<Self> {
        if coeffs.is_empty() || coeffs.len() > 5 {
            return Err(Error::invalid(
                "coeffs",
                format!("expected 1 to 5 coefficients, got {}", coeffs.len()),
            ));
        }
        if coeffs.iter().any(|c| !c.is_finite()) {
            return Err(Error::invalid("coeffs", "coefficients must be finite"));
        }
        Ok(Polynomial { coeffs })
    }

    /// `a·x² + b·x + c`.
    pub fn quadratic(a: f64, b: f64, c: f64) -> Result<Self> {
        Self::new(vec![c, b, a])
    }

    /// `c[0] + c[1]·x + c[2]·x² + c[3]·x³ + c[4]·x⁴`.
    pub fn quartic(c: [f64; 5]) -> Result<Self> {
        Self::new(c.to_vec())
    }

    /// Monic expansion of `Π (x − r)`.
    pub fn from_roots(roots: &[f64]) -> Result<Self> {
        let mut coeffs = vec![1.0];
        for &r in roots {
            let mut next = vec![0.0; coeffs.len() + 1];
            for (i, &c) in coeffs.iter().enumerate() {
                next[i + 1] += c;
                next[i] -= r * c;
            }
            coeffs = next;
        }
        Self::new(coeffs)
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    /// Degree after dropping zero leading coefficients; `None` for the zero polynomial.
    pub fn degree(&self) -> Option<usize> {
        self.coeffs.iter().rposition(|&c| c != 0.0)
    }

    pub fn eval(&self, x: f64) -> f64 {
        horner(&self.coeffs, x)
    }

    /// `max(1, max|coeff|)`, the scale of the residual bound.
    pub fn residual_scale(&self) -> f64 {
        self.coeffs.iter().fold(1.0f64, |m, c| m.max(c.abs()))
    }
}

fn horner(c: &[f64], x: f64) -> f64 {
    c.iter().rev().fold(0.0, |acc, &ci| acc * x + ci)
}

/// Value and first derivative.
fn horner_d(c: &[f64], x: f64) -> (f64, f64) {
    let mut p = 0.0;
    let mut dp = 0.0;
    for &ci in c.iter().rev() {
        dp = dp * x + p;
        p = p * x + ci;
    }
    (p, dp)
}

/// `Σ|c_i||x|^i`, the magnitude against which rounding in `p(x)` is measured.
fn eval_scale(c: &[f64], x: f64) -> f64 {
    let ax = x.abs();
    c.iter().rev().fold(0.0, |acc, &ci| acc * ax + ci.abs())
}

/// Small fixed-capacity root buffer used on the hot path.
#[derive(Debug, Clone, Copy, Default)]
pub(crate) struct RootSet {
    buf: [f64; 4],
    len: usize,
}

impl RootSet {
    fn push(&mut self, r: f64) {
        if self.len < 4 {
            self.buf[self.len] = r;
            self.len += 1;
        }
    }

    pub(crate) fn as_slice(&self) -> &[f64] {
        &self.buf[..self.len]
    }

    fn sort_merge(&mut self) {
        let s = &mut self.buf[..self.len];
        s.sort_by(f64::total_cmp);
        let mut out = RootSet::default();
        for &r in s.iter() {
            match out.as_slice().last() {
                Some(&prev) if (r - prev).abs() <= MERGE_TOL * prev.abs().max(r.abs()).max(1.0) => {}
                _ => out.push(r),
            }
        }
        *self = out;
    }
}

/// Roots of a normalized polynomial of exact degree `c.len() - 1 <= 4`.
fn roots_normalized(c: &[f64]) -> RootSet {
    let n = c.len() - 1;
    let mut out = RootSet::default();
    match n {
        0 => {}
        1 => out.push(-c[0] / c[1]),
        2 => quadratic_into(c[2], c[1], c[0], &mut out),
        _ => {
            let mut d = [0.0; 4];
            for i in 1..=n {
                d[i - 1] = c[i] * i as f64;
            }
            let crit = roots_normalized(&d[..n]);
            let lead = c[n].abs();
            let bound = 1.0 + c[..n].iter().fold(0.0f64, |m, ci| m.max(ci.abs() / lead));

            let mut points = [0.0; 5];
            let mut np = 0;
            points[np] = -bound;
            np += 1;
            for &x in crit.as_slice() {
                if x > -bound && x < bound {
                    points[np] = x;
                    np += 1;
                }
            }
            points[np] = bound;
            np += 1;

            for w in points[..np].windows(2) {
                let (a, b) = (w[0], w[1]);
                let (fa, fb) = (horner(c, a), horner(c, b));
                if fa == 0.0 {
                    out.push(a);
                } else if fb != 0.0 && fa.signum() != fb.signum() {
                    out.push(bracketed_root(c, a, b, fa));
                }
            }
            if horner(c, points[np - 1]) == 0.0 {
                out.push(points[np - 1]);
            }
            // Even-multiplicity roots appear as critical points where p touches zero.
            for &x in crit.as_slice() {
                let fx = horner(c, x);
                if fx != 0.0 && fx.abs() <= 1e-12 * eval_scale(c, x).max(1.0) {
                    out.push(x);
                }
            }
        }
    }
    out.sort_merge();
    out
}

fn quadratic_into(a: f64, b: f64, c: f64, out: &mut RootSet) {
    let mut disc = b * b - 4.0 * a * c;
    if disc < 0.0 {
        if -disc <= 8.0 * f64::EPSILON * (b * b + 4.0 * (a * c).abs()) {
            disc = 0.0;
        } else {
            return;
        }
    }
    let q = -0.5 * (b + b.signum() * disc.sqrt());
    if q == 0.0 {
        // b = 0 and disc = 0, so c = 0 too
        out.push(0.0);
        return;
    }
    out.push(q / a);
    out.push(c / q);
}

/// Safeguarded Newton on `[a, b]` where `p` is monotone and changes sign.
fn bracketed_root(c: &[f64], a: f64, b: f64, fa: f64) -> f64 {
    let (mut lo, mut hi) = (a, b);
    let rising = fa < 0.0;
    let mut x = 0.5 * (lo + hi);
    for _ in 0..200 {
        let (f, df) = horner_d(c, x);
        if f == 0.0 {
            return x;
        }
        if (f < 0.0) == rising {
            lo = x;
        } else {
            hi = x;
        }
        let newton = x - f / df;
        let next = if df != 0.0 && newton > lo && newton < hi {
            newton
        } else {
            0.5 * (lo + hi)
        };
        if next == x || hi - lo <= 2.0 * f64::EPSILON * lo.abs().max(hi.abs()) {
            return next;
        }
        x = next;
    }
    x
}

/// Strips zero leading coefficients and rescales so the largest magnitude is 1.
fn normalize(coeffs: &[f64]) -> Result<([f64; 5], usize)> {
    let deg = coeffs.iter().rposition(|&c| c != 0.0).ok_or(Error::ZeroPolynomial)?;
    let scale = coeffs[..=deg].iter().fold(0.0f64, |m, c| m.max(c.abs()));
    let mut out = [0.0; 5];
    for (o, c) in out.iter_mut().zip(&coeffs[..=deg]) {
        *o = c / scale;
    }
    Ok((out, deg))
}

pub(crate) fn real_roots_into(coeffs: &[f64]) -> Result<RootSet> {
    debug_assert!(coeffs.len() <= 5);
    let (norm, deg) = normalize(coeffs)?;
    let c = &norm[..=deg];
    let raw = roots_normalized(c);
    let mut out = RootSet::default();
    for &r in raw.as_slice() {
        if r.is_finite() && horner(c, r).abs() <= RESIDUAL_TOL * eval_scale(c, r).max(1.0) {
            out.push(r);
        }
    }
    Ok(out)
}

/// Real roots of `a·x² + b·x + c`, ascending. A vanishing `a` degrades to the
/// linear case; `a = b = 0, c ≠ 0` has no roots; all-zero input is an error.
pub fn real_roots_quadratic(a: f64, b: f64, c: f64) -> Result<Vec<f64>> {
    let p = Polynomial::quadratic(a, b, c)?;
    Ok(real_roots_into(p.coeffs())?.as_slice().to_vec())
}

/// Real roots of a polynomial of degree at most four, ascending. Roots closer
/// than `1e-7` (relative) are reported once; see [`RESIDUAL_TOL`] for the
/// residual guarantee.
pub fn real_roots_quartic(p: &Polynomial) -> Result<Vec<f64>> {
    Ok(real_roots_into(p.coeffs())?.as_slice().to_vec())
}
