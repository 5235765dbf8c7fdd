//! Moyal products on polynomial phase-space functions.
//!
//! ```text
//! f ⋆ g = Σₙ (iℏ/2)ⁿ/n! Σₖ C(n, k) (−1)ᵏ (∂_q^{n−k} ∂_p^k f)(∂_p^{n−k} ∂_q^k g)
//! ```
//!
//! The series terminates on polynomials, so products and brackets are exact up
//! to float rounding. For functions that are only available pointwise the
//! same series is evaluated through finite-difference stencils.

use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};
use std::str::FromStr;

use num_complex::Complex64;

use crate::catalog::KTransform;
use crate::error::{Error, Result};

/// `Σ c_{ij} qⁱ pʲ`. Zero coefficients are never stored.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct PhasePoly {
    coeffs: BTreeMap<(u32, u32), Complex64>,
}

impl PhasePoly {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn constant(c: impl Into<Complex64>) -> Self {
        Self::monomial(0, 0, c)
    }

    pub fn one() -> Self {
        Self::constant(1.0)
    }

    pub fn monomial(i: u32, j: u32, c: impl Into<Complex64>) -> Self {
        let mut p = Self::zero();
        p.add_term(i, j, c.into());
        p
    }

    /// The coordinate function `q` (first slot).
    pub fn q() -> Self {
        Self::monomial(1, 0, 1.0)
    }

    /// The coordinate function `p` (second slot).
    pub fn p() -> Self {
        Self::monomial(0, 1, 1.0)
    }

    pub fn from_terms(terms: impl IntoIterator<Item = ((u32, u32), Complex64)>) -> Self {
        let mut p = Self::zero();
        for ((i, j), c) in terms {
            p.add_term(i, j, c);
        }
        p
    }

    fn add_term(&mut self, i: u32, j: u32, c: Complex64) {
        if c == Complex64::new(0.0, 0.0) {
            return;
        }
        let e = self.coeffs.entry((i, j)).or_insert(Complex64::new(0.0, 0.0));
        *e += c;
        if *e == Complex64::new(0.0, 0.0) {
            self.coeffs.remove(&(i, j));
        }
    }

    pub fn coeff(&self, i: u32, j: u32) -> Complex64 {
        self.coeffs.get(&(i, j)).copied().unwrap_or_default()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&(u32, u32), &Complex64)> {
        self.coeffs.iter()
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Total degree; 0 for the zero polynomial.
    pub fn degree(&self) -> u32 {
        self.coeffs.keys().map(|(i, j)| i + j).max().unwrap_or(0)
    }

    pub fn scale(&self, c: impl Into<Complex64>) -> Self {
        let c = c.into();
        Self::from_terms(self.coeffs.iter().map(|(k, v)| (*k, v * c)))
    }

    /// `∂ᵏ/∂qᵏ`.
    pub fn d_q(&self, k: u32) -> Self {
        Self::from_terms(self.coeffs.iter().filter(|((i, _), _)| *i >= k).map(|(&(i, j), v)| {
            ((i - k, j), v * falling(i, k))
        }))
    }

    /// `∂ᵏ/∂pᵏ`.
    pub fn d_p(&self, k: u32) -> Self {
        Self::from_terms(self.coeffs.iter().filter(|((_, j), _)| *j >= k).map(|(&(i, j), v)| {
            ((i, j - k), v * falling(j, k))
        }))
    }

    pub fn eval(&self, q: f64, p: f64) -> Complex64 {
        self.coeffs.iter().map(|(&(i, j), v)| v * (q.powi(i as i32) * p.powi(j as i32))).sum()
    }

    pub fn pow(&self, n: u32) -> Self {
        (0..n).fold(Self::one(), |acc, _| &acc * self)
    }

    /// `f(a(Q, P), b(Q, P))`.
    pub fn compose(&self, a: &PhasePoly, b: &PhasePoly) -> Self {
        let mut out = Self::zero();
        let mut a_pows: Vec<PhasePoly> = vec![Self::one()];
        let mut b_pows: Vec<PhasePoly> = vec![Self::one()];
        for (&(i, j), v) in &self.coeffs {
            while a_pows.len() <= i as usize {
                let next = a_pows.last().expect("non-empty") * a;
                a_pows.push(next);
            }
            while b_pows.len() <= j as usize {
                let next = b_pows.last().expect("non-empty") * b;
                b_pows.push(next);
            }
            out = &out + &(&a_pows[i as usize] * &b_pows[j as usize]).scale(*v);
        }
        out
    }

    /// Largest `|imaginary part|` of any coefficient.
    pub fn max_imag(&self) -> f64 {
        self.coeffs.values().map(|v| v.im.abs()).fold(0.0, f64::max)
    }

    /// Largest coefficient-wise modulus of `self − other`.
    pub fn distance(&self, other: &PhasePoly) -> f64 {
        (self - other).coeffs.values().map(|v| v.norm()).fold(0.0, f64::max)
    }

    /// Drop coefficients with modulus below `tol`.
    pub fn pruned(&self, tol: f64) -> Self {
        Self::from_terms(self.coeffs.iter().filter(|(_, v)| v.norm() >= tol).map(|(k, v)| (*k, *v)))
    }

    /// One `(i,j):coeff` line per term in key order.
    pub fn serialize(&self) -> String {
        self.to_string()
    }
}

fn falling(n: u32, k: u32) -> f64 {
    (0..k).map(|m| (n - m) as f64).product()
}

fn binomial(n: u32, k: u32) -> f64 {
    falling(n, k) / falling(k, k)
}

impl fmt::Display for PhasePoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (&(i, j), v) in &self.coeffs {
            if v.im == 0.0 {
                writeln!(f, "({i},{j}):{:e}", v.re)?;
            } else {
                writeln!(f, "({i},{j}):{:e}{:+e}i", v.re, v.im)?;
            }
        }
        Ok(())
    }
}

impl FromStr for PhasePoly {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        let bad = |line: &str| Error::InvalidParameter(format!("malformed polynomial term {line:?}"));
        let mut out = PhasePoly::zero();
        for line in s.lines().map(str::trim).filter(|l| !l.is_empty()) {
            let (key, val) = line.split_once(':').ok_or_else(|| bad(line))?;
            let key = key.strip_prefix('(').and_then(|k| k.strip_suffix(')')).ok_or_else(|| bad(line))?;
            let (i, j) = key.split_once(',').ok_or_else(|| bad(line))?;
            let i: u32 = i.trim().parse().map_err(|_| bad(line))?;
            let j: u32 = j.trim().parse().map_err(|_| bad(line))?;
            let c = parse_complex(val).ok_or_else(|| bad(line))?;
            out.add_term(i, j, c);
        }
        Ok(out)
    }
}

fn parse_complex(s: &str) -> Option<Complex64> {
    let s = s.trim();
    let Some(body) = s.strip_suffix('i') else {
        return s.parse().ok().map(|re| Complex64::new(re, 0.0));
    };
    let bytes = body.as_bytes();
    let split = (1..bytes.len()).rev().find(|&k| (bytes[k] == b'+' || bytes[k] == b'-') && bytes[k - 1] != b'e')?;
    Some(Complex64::new(body[..split].parse().ok()?, body[split..].parse().ok()?))
}

impl Add for &PhasePoly {
    type Output = PhasePoly;
    fn add(self, rhs: &PhasePoly) -> PhasePoly {
        let mut out = self.clone();
        for (&(i, j), v) in &rhs.coeffs {
            out.add_term(i, j, *v);
        }
        out
    }
}

impl Sub for &PhasePoly {
    type Output = PhasePoly;
    fn sub(self, rhs: &PhasePoly) -> PhasePoly {
        let mut out = self.clone();
        for (&(i, j), v) in &rhs.coeffs {
            out.add_term(i, j, -v);
        }
        out
    }
}

impl Neg for &PhasePoly {
    type Output = PhasePoly;
    fn neg(self) -> PhasePoly {
        self.scale(-1.0)
    }
}

impl Mul for &PhasePoly {
    type Output = PhasePoly;
    fn mul(self, rhs: &PhasePoly) -> PhasePoly {
        let mut out = PhasePoly::zero();
        for (&(i, j), a) in &self.coeffs {
            for (&(k, l), b) in &rhs.coeffs {
                out.add_term(i + k, j + l, a * b);
            }
        }
        out
    }
}

/// Exact Moyal product.
pub fn star(f: &PhasePoly, g: &PhasePoly, hbar: f64) -> PhasePoly {
    let top = f.degree().min(g.degree());
    let mut out = f * g;
    let half = Complex64::new(0.0, hbar / 2.0);
    let mut pref = Complex64::new(1.0, 0.0);
    for n in 1..=top {
        pref = pref * half / n as f64;
        for k in 0..=n {
            let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
            let lf = f.d_q(n - k).d_p(k);
            if lf.is_zero() {
                continue;
            }
            let rg = g.d_p(n - k).d_q(k);
            out = &out + &(&lf * &rg).scale(pref * (sign * binomial(n, k)));
        }
    }
    out
}

/// `{f, g}_M = (f ⋆ g − g ⋆ f)/(iℏ)`.
pub fn moyal_bracket(f: &PhasePoly, g: &PhasePoly, hbar: f64) -> Result<PhasePoly> {
    if hbar == 0.0 {
        return Err(Error::DivisionByZero("Moyal bracket at ℏ = 0; use the Poisson bracket"));
    }
    let d = &star(f, g, hbar) - &star(g, f, hbar);
    Ok(d.scale(Complex64::new(0.0, -1.0 / hbar)))
}

/// `{f, g} = ∂_q f ∂_p g − ∂_p f ∂_q g`.
pub fn poisson_bracket(f: &PhasePoly, g: &PhasePoly) -> PhasePoly {
    &(&f.d_q(1) * &g.d_p(1)) - &(&f.d_p(1) * &g.d_q(1))
}

/// `(q, p)` as polynomials in `(Q, P)`: `Q(1 + λR²)`, `P(1 + λR²)`.
pub fn k_forward_polys(t: &KTransform) -> (PhasePoly, PhasePoly) {
    let r2 = &PhasePoly::monomial(2, 0, t.lambda()) + &PhasePoly::monomial(0, 2, t.lambda());
    let factor = &PhasePoly::one() + &r2;
    (&PhasePoly::q() * &factor, &PhasePoly::p() * &factor)
}

/// Chart in which the star product differentiates.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Chart {
    /// `(q, p)`.
    Standard,
    /// `(Q, P)` of the cubic deformation.
    Deformed(KTransform),
}

/// `f ⋆ g` for `(q, p)`-polynomials, taken in `chart`. For the deformed
/// chart both arguments are first rewritten in `(Q, P)` and the result is a
/// polynomial in `(Q, P)`.
pub fn star_in_chart(f: &PhasePoly, g: &PhasePoly, hbar: f64, chart: &Chart) -> PhasePoly {
    match chart {
        Chart::Standard => star(f, g, hbar),
        Chart::Deformed(t) => {
            let (a, b) = k_forward_polys(t);
            star(&f.compose(&a, &b), &g.compose(&a, &b), hbar)
        }
    }
}

/// Moyal bracket in `chart`, evaluated at the old-chart point `(q, p)`.
pub fn bracket_in_chart_at(f: &PhasePoly, g: &PhasePoly, hbar: f64, chart: &Chart, q: f64, p: f64) -> Result<Complex64> {
    match chart {
        Chart::Standard => Ok(moyal_bracket(f, g, hbar)?.eval(q, p)),
        Chart::Deformed(t) => {
            let (a, b) = k_forward_polys(t);
            let br = moyal_bracket(&f.compose(&a, &b), &g.compose(&a, &b), hbar)?;
            let big = t.inverse(nalgebra::Vector2::new(q, p));
            Ok(br.eval(big[0], big[1]))
        }
    }
}

/// Extrapolate `v(h)` to `h = 0` assuming an expansion in powers of `h²`
/// (Neville's scheme on `x = h²`).
pub fn richardson_limit(hs: &[f64], values: &[f64]) -> f64 {
    let xs: Vec<f64> = hs.iter().map(|h| h * h).collect();
    let mut t = values.to_vec();
    let n = t.len();
    for level in 1..n {
        for i in 0..n - level {
            let (xi, xj) = (xs[i], xs[i + level]);
            t[i] = (xj * t[i] - xi * t[i + 1]) / (xj - xi);
        }
    }
    t[0]
}

/// Step of the sampled stencils.
pub const STENCIL_STEP: f64 = 1e-3;

/// Order-4 central stencils for derivatives 0–3 as `(offset, weight)` pairs
/// in units of `h`, weights already divided by `hᵏ`.
fn stencil(order: u32, h: f64) -> Vec<(i32, f64)> {
    match order {
        0 => vec![(0, 1.0)],
        1 => [(-2, 1.0), (-1, -8.0), (1, 8.0), (2, -1.0)].iter().map(|&(o, w)| (o, w / (12.0 * h))).collect(),
        2 => [(-2, -1.0), (-1, 16.0), (0, -30.0), (1, 16.0), (2, -1.0)]
            .iter()
            .map(|&(o, w)| (o, w / (12.0 * h * h)))
            .collect(),
        3 => [(-3, 1.0), (-2, -8.0), (-1, 13.0), (1, -13.0), (2, 8.0), (3, -1.0)]
            .iter()
            .map(|&(o, w)| (o, w / (8.0 * h * h * h)))
            .collect(),
        _ => panic!("stencils are tabulated up to third order"),
    }
}

/// `∂_x^a ∂_y^b f` at `(x, y)` by tensor-product stencils.
fn sampled_derivative(f: &dyn Fn(f64, f64) -> f64, x: f64, y: f64, a: u32, b: u32, h: f64) -> Result<f64> {
    let mut acc = 0.0;
    for (ox, wx) in stencil(a, h) {
        for (oy, wy) in stencil(b, h) {
            let v = f(x + ox as f64 * h, y + oy as f64 * h);
            if !v.is_finite() {
                return Err(Error::Sampling(format!("non-finite sample near ({x}, {y})")));
            }
            acc += wx * wy * v;
        }
    }
    Ok(acc)
}

/// Sampled Moyal series up to third order at one point, approximate.
pub fn sampled_star_at(f: &dyn Fn(f64, f64) -> f64, g: &dyn Fn(f64, f64) -> f64, hbar: f64, x: f64, y: f64) -> Result<Complex64> {
    let h = STENCIL_STEP;
    let half = Complex64::new(0.0, hbar / 2.0);
    let mut out = Complex64::new(f(x, y) * g(x, y), 0.0);
    let mut pref = Complex64::new(1.0, 0.0);
    for n in 1..=3u32 {
        pref = pref * half / n as f64;
        for k in 0..=n {
            let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
            let lf = sampled_derivative(f, x, y, n - k, k, h)?;
            let rg = sampled_derivative(g, x, y, k, n - k, h)?;
            out += pref * (sign * binomial(n, k) * lf * rg);
        }
    }
    Ok(out)
}

/// `(f ⋆ g − g ⋆ f)/(iℏ)` from [`sampled_star_at`].
pub fn sampled_bracket_at(f: &dyn Fn(f64, f64) -> f64, g: &dyn Fn(f64, f64) -> f64, hbar: f64, x: f64, y: f64) -> Result<Complex64> {
    if hbar == 0.0 {
        return Err(Error::DivisionByZero("Moyal bracket at ℏ = 0; use the Poisson bracket"));
    }
    let d = sampled_star_at(f, g, hbar, x, y)? - sampled_star_at(g, f, hbar, x, y)?;
    Ok(d / Complex64::new(0.0, hbar))
}

/// Sampled bracket in the deformed chart of functions given in `(q, p)`,
/// evaluated at the old-chart point `(q, p)`.
pub fn sampled_bracket_in_chart_at(
    f: &dyn Fn(f64, f64) -> f64,
    g: &dyn Fn(f64, f64) -> f64,
    hbar: f64,
    t: &KTransform,
    q: f64,
    p: f64,
) -> Result<Complex64> {
    let lift = |h: &dyn Fn(f64, f64) -> f64, big_q: f64, big_p: f64| {
        let v = t.forward(nalgebra::Vector2::new(big_q, big_p));
        h(v[0], v[1])
    };
    let fk = |a: f64, b: f64| lift(f, a, b);
    let gk = |a: f64, b: f64| lift(g, a, b);
    let big = t.inverse(nalgebra::Vector2::new(q, p));
    if !(big[0].is_finite() && big[1].is_finite()) {
        return Err(Error::Sampling(format!("({q}, {p}) has no preimage in the deformed chart")));
    }
    sampled_bracket_at(&fk, &gk, hbar, big[0], big[1])
}
