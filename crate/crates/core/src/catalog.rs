//! Concrete diffeomorphisms and the linear structures they induce.
//!
//! - [`KTransform`]: the radial cubic deformation `q = Q(1 + λR²)`,
//!   `p = P(1 + λR²)` of the plane, inverted through the positive root of
//!   `λr²K³ + K − 1 = 0`.
//! - [`TanhStructure`]: `x ↦ tanh x` from `R` onto `(−1, 1)`, whose addition is
//!   the relativistic composition of collinear velocities.
//! - [`MagneticGauge`]: the fibre translation `(q, u) ↦ (q, u + A(q))` of
//!   `TQ = R³ × R³` by a vector potential.

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use nalgebra::{DMatrix, Matrix2, Matrix3, Vector2, Vector3};
use rand::Rng;

use crate::error::{Error, Result};
use crate::linstruct::{AxiomSample, Diffeo, Point};

/// The radial cubic deformation of `R²`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KTransform {
    lambda: f64,
}

impl KTransform {
    /// Negative `λ` is rejected: the forward map then folds over and stops
    /// being globally invertible.
    pub fn new(lambda: f64) -> Result<Self> {
        if !lambda.is_finite() || lambda < 0.0 {
            return Err(Error::InvalidParameter(format!("k-transform needs λ ≥ 0, got {lambda}")));
        }
        Ok(Self { lambda })
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    /// Positive root of `λr²K³ + K − 1 = 0`.
    ///
    /// The root lies in `(0, 1]`: the cubic is −1 at `K = 0` and `λr² ≥ 0` at
    /// `K = 1`, and is strictly increasing in between. Newton steps that leave
    /// the current bracket are replaced by bisection.
    pub fn solve_k(&self, r: f64) -> f64 {
        let c = self.lambda * r * r;
        if c == 0.0 {
            return 1.0;
        }
        let f = |k: f64| c * k * k * k + k - 1.0;
        let (mut lo, mut hi) = (0.0_f64, 1.0_f64);
        // 1/(1+c) and c^{-1/3} bracket the root from the small- and large-c sides.
        let mut k = (1.0 / (1.0 + c)).max(c.cbrt().recip().min(1.0) * 0.5);
        for _ in 0..200 {
            let fk = f(k);
            if fk == 0.0 {
                return k;
            }
            if fk < 0.0 {
                lo = k;
            } else {
                hi = k;
            }
            let dk = 3.0 * c * k * k + 1.0;
            let mut next = k - fk / dk;
            if !(next > lo && next < hi) {
                next = 0.5 * (lo + hi);
            }
            if (next - k).abs() <= 1e-17 * k.max(1e-300) || hi - lo <= f64::EPSILON * hi {
                k = next;
                break;
            }
            k = next;
        }
        k
    }

    /// `(Q, P) ↦ (q, p)`.
    pub fn forward(&self, qp: Vector2<f64>) -> Vector2<f64> {
        qp * (1.0 + self.lambda * qp.norm_squared())
    }

    /// `(q, p) ↦ (Q, P) = K(r)·(q, p)`.
    pub fn inverse(&self, qp: Vector2<f64>) -> Vector2<f64> {
        qp * self.solve_k(qp.norm())
    }

    /// `A = ∂(q, p)/∂(Q, P)` at a new-chart point `(Q, P)`.
    pub fn jacobian(&self, big: Vector2<f64>) -> Matrix2<f64> {
        let (q, p) = (big[0], big[1]);
        let l = self.lambda;
        let off = 2.0 * l * p * q;
        Matrix2::new(1.0 + l * (3.0 * q * q + p * p), off, off, 1.0 + l * (q * q + 3.0 * p * p))
    }
}

impl Diffeo for KTransform {
    fn dim(&self) -> usize {
        2
    }
    fn forward(&self, w: &Point) -> Point {
        let v = KTransform::forward(self, Vector2::new(w[0], w[1]));
        Point::from_column_slice(v.as_slice())
    }
    fn inverse(&self, u: &Point) -> Result<Point> {
        if !self.in_image(u) {
            return Err(Error::Domain(format!("k-transform inverse needs a finite point of R², got {:?}", u.as_slice())));
        }
        let v = KTransform::inverse(self, Vector2::new(u[0], u[1]));
        Ok(Point::from_column_slice(v.as_slice()))
    }
    fn jacobian(&self, w: &Point) -> DMatrix<f64> {
        let a = KTransform::jacobian(self, Vector2::new(w[0], w[1]));
        DMatrix::from_column_slice(2, 2, a.as_slice())
    }
    fn domain_note(&self) -> &str {
        "global diffeomorphism of R²"
    }
}

/// `x ↦ tanh x`, a diffeomorphism of `R` onto the open interval `(−1, 1)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TanhStructure {
    margin: f64,
}

impl Default for TanhStructure {
    fn default() -> Self {
        Self { margin: 1e-12 }
    }
}

impl TanhStructure {
    pub fn with_margin(margin: f64) -> Self {
        Self { margin }
    }
}

impl Diffeo for TanhStructure {
    fn dim(&self) -> usize {
        1
    }
    fn forward(&self, w: &Point) -> Point {
        w.map(f64::tanh)
    }
    fn inverse(&self, u: &Point) -> Result<Point> {
        if !self.in_image(u) {
            return Err(Error::Domain(format!("tanh structure lives on (-1, 1), got {:?}", u.as_slice())));
        }
        Ok(u.map(f64::atanh))
    }
    fn jacobian(&self, w: &Point) -> DMatrix<f64> {
        DMatrix::from_element(1, 1, 1.0 - w[0].tanh().powi(2))
    }
    fn in_image(&self, u: &Point) -> bool {
        u.len() == 1 && u[0].is_finite() && u[0].abs() < 1.0 - self.margin
    }
    fn domain_note(&self) -> &str {
        "open interval (-1, 1)"
    }
}

/// Relativistic composition `(x + y)/(1 + xy)`.
pub fn relativistic_add(x: f64, y: f64) -> f64 {
    (x + y) / (1.0 + x * y)
}

/// Closed form of a triple relativistic composition.
pub fn relativistic_add3(x: f64, y: f64, z: f64) -> f64 {
    (x + y + z + x * y * z) / (1.0 + x * y + x * z + y * z)
}

/// Velocity in `S` of a particle moving with `v` in `S''`, where `S''` moves
/// with `u_prime` relative to `S'` and `S'` with `u` relative to `S`. Composes
/// `u_prime` with `v` first, then the result with `u`.
pub fn compose_velocity_inner_first(u: f64, u_prime: f64, v: f64) -> f64 {
    let v_prime = relativistic_add(u_prime, v);
    relativistic_add(u, v_prime)
}

/// Same velocity obtained by composing the frame velocities `u`, `u_prime`
/// first and then adding `v`.
pub fn compose_velocity_frames_first(u: f64, u_prime: f64, v: f64) -> f64 {
    let u_second = relativistic_add(u_prime, u);
    relativistic_add(v, u_second)
}

/// Expanded form `(v + u + u′ + v u′ u)/(1 + u′u + uv + u′v)`.
pub fn compose_velocity_closed(u: f64, u_prime: f64, v: f64) -> f64 {
    (v + u + u_prime + v * u_prime * u) / (1.0 + u_prime * u + u * v + u_prime * v)
}

pub type Potential = Arc<dyn Fn(&Vector3<f64>) -> Vector3<f64> + Send + Sync>;
/// `m[(k, j)] = ∂A_k/∂qʲ`.
pub type PotentialJacobian = Arc<dyn Fn(&Vector3<f64>) -> Matrix3<f64> + Send + Sync>;

/// A vector potential on `R³` viewed as the fibre translation
/// `φ(q, u) = (q, u + A(q))` of `TQ`. Points are `(q¹, q², q³, u¹, u², u³)`.
#[derive(Clone)]
pub struct MagneticGauge {
    name: String,
    potential: Potential,
    jac: Option<PotentialJacobian>,
    linear: bool,
}

impl fmt::Debug for MagneticGauge {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("MagneticGauge").field("name", &self.name).finish_non_exhaustive()
    }
}

impl MagneticGauge {
    /// Symmetric gauge `A = ½ B × q` of a constant field.
    pub fn symmetric(b: Vector3<f64>) -> Self {
        let half = 0.5 * b;
        let m = half.cross_matrix();
        Self {
            name: format!("symmetric(B = [{}, {}, {}])", b.x, b.y, b.z),
            potential: Arc::new(move |q| half.cross(q)),
            jac: Some(Arc::new(move |_| m)),
            linear: true,
        }
    }

    /// Symmetric gauge of a field of strength `b` along `ẑ`:
    /// `A = (b/2)(−q², q¹, 0)`.
    pub fn symmetric_z(b: f64) -> Self {
        Self::symmetric(Vector3::new(0.0, 0.0, b))
    }

    /// Landau gauge `A = (−b q², 0, 0)` of the same field `b ẑ`.
    pub fn landau_z(b: f64) -> Self {
        Self {
            name: format!("landau(B = {b})"),
            potential: Arc::new(move |q| Vector3::new(-b * q.y, 0.0, 0.0)),
            jac: Some(Arc::new(move |_| Matrix3::new(0.0, -b, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0))),
            linear: true,
        }
    }

    /// `A = (0, c (q¹)², 0)`, a gauge that is not homogeneous of degree one.
    pub fn quadratic(c: f64) -> Self {
        Self {
            name: format!("quadratic(c = {c})"),
            potential: Arc::new(move |q| Vector3::new(0.0, c * q.x * q.x, 0.0)),
            jac: Some(Arc::new(move |q| Matrix3::new(0.0, 0.0, 0.0, 2.0 * c * q.x, 0.0, 0.0, 0.0, 0.0, 0.0))),
            linear: c == 0.0,
        }
    }

    /// A user-supplied potential. Without an analytic Jacobian, derivatives
    /// are taken by central differences with step `1e-6`. `linear` records
    /// whether `A` is linear in `q` (used only as metadata).
    pub fn custom(
        name: impl Into<String>,
        potential: impl Fn(&Vector3<f64>) -> Vector3<f64> + Send + Sync + 'static,
        jacobian: Option<PotentialJacobian>,
        linear: bool,
    ) -> Self {
        Self { name: name.into(), potential: Arc::new(potential), jac: jacobian, linear }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    /// Declared linearity of `A` in `q`.
    pub fn is_declared_linear(&self) -> bool {
        self.linear
    }

    pub fn potential(&self, q: &Vector3<f64>) -> Vector3<f64> {
        (self.potential)(q)
    }

    /// `∂A_k/∂qʲ` as the matrix with row `k` and column `j`.
    pub fn potential_jacobian(&self, q: &Vector3<f64>) -> Matrix3<f64> {
        match &self.jac {
            Some(j) => j(q),
            None => {
                let mut m = Matrix3::zeros();
                for j in 0..3 {
                    let h = 1e-6 * q[j].abs().max(1.0);
                    let mut qp = *q;
                    let mut qm = *q;
                    qp[j] += h;
                    qm[j] -= h;
                    m.set_column(j, &((self.potential(&qp) - self.potential(&qm)) / (2.0 * h)));
                }
                m
            }
        }
    }

    /// Magnetic field `B = ∇ × A` at `q`.
    pub fn field(&self, q: &Vector3<f64>) -> Vector3<f64> {
        let d = self.potential_jacobian(q);
        Vector3::new(d[(2, 1)] - d[(1, 2)], d[(0, 2)] - d[(2, 0)], d[(1, 0)] - d[(0, 1)])
    }

    /// `(Q, U) +φ (Q′, U′) = (Q + Q′, U + U′ + [A(Q + Q′) − A(Q) − A(Q′)])`.
    pub fn add(&self, x1: &Point, x2: &Point) -> Point {
        let (q1, u1) = split6(x1);
        let (q2, u2) = split6(x2);
        let qs = q1 + q2;
        let us = u1 + u2 + (self.potential(&qs) - self.potential(&q1) - self.potential(&q2));
        join6(&qs, &us)
    }

    /// `λ ·φ (Q, U) = (λQ, λU + [A(λQ) − λA(Q)])`.
    pub fn scale(&self, lambda: f64, x: &Point) -> Point {
        let (q, u) = split6(x);
        let lq = q * lambda;
        let lu = u * lambda + (self.potential(&lq) - self.potential(&q) * lambda);
        join6(&lq, &lu)
    }

    /// `(Q, U) −φ (Q′, U′) = (Q − Q′, U − U′ + A(Q − Q′) + A(Q′) − A(Q))`.
    pub fn subtract(&self, x1: &Point, x2: &Point) -> Point {
        let (q1, u1) = split6(x1);
        let (q2, u2) = split6(x2);
        let qd = q1 - q2;
        let ud = u1 - u2 + self.potential(&qd) + self.potential(&q2) - self.potential(&q1);
        join6(&qd, &ud)
    }

    /// Pushed-forward Liouville field
    /// `Δ = Qⁱ∂/∂Qⁱ + [Uⁱ + Qʲ∂A_i/∂Qʲ − A_i]∂/∂Uⁱ`.
    pub fn liouville(&self, x: &Point) -> Point {
        let (q, u) = split6(x);
        let du = u + self.potential_jacobian(&q) * q - self.potential(&q);
        join6(&q, &du)
    }

    /// Origin of the deformed structure, `φ(0, 0) = (0, A(0))`.
    pub fn origin(&self) -> Point {
        join6(&Vector3::zeros(), &self.potential(&Vector3::zeros()))
    }
}

impl Diffeo for MagneticGauge {
    fn dim(&self) -> usize {
        6
    }
    fn forward(&self, w: &Point) -> Point {
        let (q, u) = split6(w);
        join6(&q, &(u + self.potential(&q)))
    }
    fn inverse(&self, x: &Point) -> Result<Point> {
        if !self.in_image(x) {
            return Err(Error::Domain(format!("magnetic gauge map needs a finite point of R⁶, got {:?}", x.as_slice())));
        }
        let (q, big_u) = split6(x);
        Ok(join6(&q, &(big_u - self.potential(&q))))
    }
    fn jacobian(&self, w: &Point) -> DMatrix<f64> {
        let (q, _) = split6(w);
        let d = self.potential_jacobian(&q);
        let mut m = DMatrix::identity(6, 6);
        for k in 0..3 {
            for j in 0..3 {
                m[(3 + k, j)] = d[(k, j)];
            }
        }
        m
    }
    fn domain_note(&self) -> &str {
        "global diffeomorphism of TR³ = R⁶"
    }
}

/// Split a 6-vector into `(q, u)`.
pub fn split6(x: &Point) -> (Vector3<f64>, Vector3<f64>) {
    (Vector3::new(x[0], x[1], x[2]), Vector3::new(x[3], x[4], x[5]))
}

pub fn join6(q: &Vector3<f64>, u: &Vector3<f64>) -> Point {
    Point::from_vec(vec![q.x, q.y, q.z, u.x, u.y, u.z])
}

/// String identifiers of catalog entries, as used in scenario files.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum CatalogId {
    KTransform,
    Tanh,
    MagneticSymmetric,
    MagneticCustom,
}

impl CatalogId {
    pub const ALL: [CatalogId; 4] =
        [CatalogId::KTransform, CatalogId::Tanh, CatalogId::MagneticSymmetric, CatalogId::MagneticCustom];

    pub fn as_str(&self) -> &'static str {
        match self {
            CatalogId::KTransform => "k-transform",
            CatalogId::Tanh => "tanh",
            CatalogId::MagneticSymmetric => "magnetic-symmetric",
            CatalogId::MagneticCustom => "magnetic-custom",
        }
    }
}

impl fmt::Display for CatalogId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for CatalogId {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        CatalogId::ALL
            .into_iter()
            .find(|id| id.as_str() == s)
            .ok_or_else(|| Error::InvalidParameter(format!("unknown catalog id {s:?}")))
    }
}

/// A catalog entry ready to be wrapped in a linear structure, together with a
/// sampler for its natural test region.
#[derive(Debug, Clone)]
pub enum Structure {
    KTransform(KTransform),
    Tanh(TanhStructure),
    Magnetic(MagneticGauge),
}

impl Structure {
    /// A random point of the image, drawn by pushing forward a uniform sample
    /// of a box in the preimage (for `tanh`, a uniform sample of
    /// `(−0.99, 0.99)`).
    pub fn sample_image<R: Rng + ?Sized>(&self, rng: &mut R) -> Point {
        match self {
            Structure::KTransform(k) => {
                let w = Point::from_fn(2, |_, _| rng.gen_range(-1.5..1.5));
                Diffeo::forward(k, &w)
            }
            Structure::Tanh(_) => Point::from_element(1, rng.gen_range(-0.99..0.99)),
            Structure::Magnetic(m) => {
                let w = Point::from_fn(6, |_, _| rng.gen_range(-2.0..2.0));
                m.forward(&w)
            }
        }
    }
}

impl Structure {
    /// `count` axiom draws: three image points each and scalars in
    /// `(−1.5, 1.5)`.
    pub fn axiom_samples<R: Rng + ?Sized>(&self, rng: &mut R, count: usize) -> Vec<AxiomSample> {
        (0..count)
            .map(|_| AxiomSample {
                u: self.sample_image(rng),
                v: self.sample_image(rng),
                w: self.sample_image(rng),
                a: rng.gen_range(-1.5..1.5),
                b: rng.gen_range(-1.5..1.5),
            })
            .collect()
    }
}

impl Diffeo for Structure {
    fn dim(&self) -> usize {
        match self {
            Structure::KTransform(d) => d.dim(),
            Structure::Tanh(d) => d.dim(),
            Structure::Magnetic(d) => d.dim(),
        }
    }
    fn forward(&self, w: &Point) -> Point {
        match self {
            Structure::KTransform(d) => Diffeo::forward(d, w),
            Structure::Tanh(d) => d.forward(w),
            Structure::Magnetic(d) => d.forward(w),
        }
    }
    fn inverse(&self, u: &Point) -> Result<Point> {
        match self {
            Structure::KTransform(d) => Diffeo::inverse(d, u),
            Structure::Tanh(d) => d.inverse(u),
            Structure::Magnetic(d) => d.inverse(u),
        }
    }
    fn jacobian(&self, w: &Point) -> DMatrix<f64> {
        match self {
            Structure::KTransform(d) => Diffeo::jacobian(d, w),
            Structure::Tanh(d) => d.jacobian(w),
            Structure::Magnetic(d) => d.jacobian(w),
        }
    }
    fn in_image(&self, u: &Point) -> bool {
        match self {
            Structure::KTransform(d) => d.in_image(u),
            Structure::Tanh(d) => d.in_image(u),
            Structure::Magnetic(d) => d.in_image(u),
        }
    }
    fn domain_note(&self) -> &str {
        match self {
            Structure::KTransform(d) => d.domain_note(),
            Structure::Tanh(d) => d.domain_note(),
            Structure::Magnetic(d) => d.domain_note(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linstruct::{LinearStructure, Tolerances};

    /// Plain bisection on `[0, 1]`, independent of the safeguarded Newton.
    fn bisect_k(lambda: f64, r: f64) -> f64 {
        let f = |k: f64| lambda * r * r * k * k * k + k - 1.0;
        let (mut lo, mut hi) = (0.0, 1.0);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if f(mid) < 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        0.5 * (lo + hi)
    }

    #[test]
    fn solve_k_edge_values() {
        let t = KTransform::new(0.7).unwrap();
        assert_eq!(t.solve_k(0.0), 1.0);
        let flat = KTransform::new(0.0).unwrap();
        assert_eq!(flat.solve_k(12.0), 1.0);
    }

    #[test]
    fn solve_k_matches_bisection_oracle() {
        // Frozen from the bisection oracle: real root of K³ + K − 1 = 0.
        let t = KTransform::new(1.0).unwrap();
        let k = t.solve_k(1.0);
        assert!((k - 0.682_327_803_828_019_3).abs() < 1e-15);
        assert!((k - bisect_k(1.0, 1.0)).abs() < 1e-15);
        for &(l, r) in &[(0.1, 1.1), (0.1, 50.0), (3.0, 1e-4), (2.0, 1e4), (1e-8, 1.0)] {
            let t = KTransform::new(l).unwrap();
            let k = t.solve_k(r);
            let residual = l * r * r * k.powi(3) + k - 1.0;
            assert!(residual.abs() < 1e-13, "λ={l} r={r} residual={residual}");
            assert!((k - bisect_k(l, r)).abs() < 1e-14 * k.max(1e-3));
        }
    }

    #[test]
    fn solve_k_is_decreasing() {
        let t = KTransform::new(0.3).unwrap();
        let ks: Vec<f64> = (0..50).map(|i| t.solve_k(i as f64 * 0.2)).collect();
        assert!(ks.windows(2).all(|w| w[1] < w[0]));
    }

    #[test]
    fn negative_lambda_is_rejected() {
        assert!(matches!(KTransform::new(-1.0), Err(Error::InvalidParameter(_))));
        assert!(KTransform::new(f64::NAN).is_err());
    }

    #[test]
    fn k_forward_inverse_examples() {
        let t = KTransform::new(0.1).unwrap();
        let q = t.forward(Vector2::new(1.0, 0.0));
        assert!((q - Vector2::new(1.1, 0.0)).norm() < 1e-15);
        assert_eq!(t.forward(Vector2::zeros()), Vector2::zeros());
        let back = t.inverse(Vector2::new(1.1, 0.0));
        assert!((back - Vector2::new(1.0, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn k_jacobian_examples() {
        let t = KTransform::new(0.1).unwrap();
        assert_eq!(t.jacobian(Vector2::zeros()), Matrix2::identity());
        let a = t.jacobian(Vector2::new(1.0, 0.0));
        assert!((a - Matrix2::new(1.3, 0.0, 0.0, 1.1)).amax() < 1e-15);
        let a = t.jacobian(Vector2::new(0.4, -1.2));
        assert_eq!(a[(0, 1)], a[(1, 0)]);
    }

    #[test]
    fn k_structure_addition_example() {
        let s = LinearStructure::new(KTransform::new(0.1).unwrap()).unwrap();
        let u = Point::from_vec(vec![1.1, 0.0]);
        let sum = s.add(&u, &u).unwrap();
        assert!((sum[0] - 2.8).abs() < 1e-14 && sum[1].abs() < 1e-15);
    }

    #[test]
    fn k_structure_linearity() {
        let tol = Tolerances::default();
        let samples = vec![Point::from_vec(vec![1.1, 0.0]), Point::from_vec(vec![-0.3, 0.8])];
        let flat = LinearStructure::new(KTransform::new(0.0).unwrap()).unwrap();
        assert!(flat.is_linear(&samples, &tol).unwrap().linear);
        let bent = LinearStructure::new(KTransform::new(0.1).unwrap()).unwrap();
        let lin = bent.is_linear(&samples, &tol).unwrap();
        assert!(!lin.linear);
        // Δ(1.1, 0) = A(1, 0)·(1, 0) = (1.3, 0).
        let d = bent.liouville_field(&samples[0]).unwrap();
        assert!((d[0] - 1.3).abs() < 1e-14 && d[1].abs() < 1e-15);
    }

    #[test]
    fn tanh_operations() {
        let s = LinearStructure::new(TanhStructure::default()).unwrap();
        let x = |v: f64| Point::from_element(1, v);
        assert!((s.add(&x(0.5), &x(0.5)).unwrap()[0] - 0.8).abs() < 1e-15);
        assert!((s.scale(2.0, &x(0.5)).unwrap()[0] - 0.8).abs() < 1e-15);
        assert!((s.subtract(&x(0.8), &x(0.5)).unwrap()[0] - 0.5).abs() < 1e-15);
        assert_eq!(s.liouville_field(&x(0.0)).unwrap()[0], 0.0);
        let xv = 0.6_f64;
        let d = s.liouville_field(&x(xv)).unwrap()[0];
        assert!((d - (1.0 - xv * xv) * xv.atanh()).abs() < 1e-15);
    }

    #[test]
    fn tanh_rejects_points_outside_interval() {
        let s = LinearStructure::new(TanhStructure::default()).unwrap();
        let out = Point::from_element(1, 1.0);
        assert!(matches!(s.add(&out, &out), Err(Error::Domain(_))));
        assert!(matches!(s.scale(2.0, &Point::from_element(1, -3.0)), Err(Error::Domain(_))));
    }

    #[test]
    fn tanh_triple_sum_example() {
        let v = relativistic_add3(0.5, 0.5, 0.5);
        assert!((v - 1.625 / 1.75).abs() < 1e-16);
        assert!((v - 0.928_571_428_571_428_6).abs() < 1e-15);
    }

    #[test]
    fn velocity_compositions_agree() {
        for &(u, up, v) in &[(0.3, -0.7, 0.9), (0.99, 0.99, -0.5), (0.0, 0.2, 0.1)] {
            let a = compose_velocity_inner_first(u, up, v);
            let b = compose_velocity_frames_first(u, up, v);
            let c = compose_velocity_closed(u, up, v);
            assert!((a - b).abs() < 1e-14 && (a - c).abs() < 1e-14);
        }
    }

    fn pt(v: [f64; 6]) -> Point {
        Point::from_column_slice(&v)
    }

    #[test]
    fn magnetic_add_examples() {
        let sym = MagneticGauge::symmetric_z(1.3);
        let x1 = pt([0.4, -1.0, 0.2, 1.0, 0.5, -0.3]);
        let x2 = pt([1.5, 0.3, -0.7, -0.2, 0.1, 0.9]);
        assert!((sym.add(&x1, &x2) - (&x1 + &x2)).amax() < 1e-15);

        let quad = MagneticGauge::quadratic(1.0);
        let sum = quad.add(&x1, &x2);
        let bracket = &sum - (&x1 + &x2);
        let expected = pt([0.0, 0.0, 0.0, 0.0, 2.0 * 0.4 * 1.5, 0.0]);
        assert!((bracket - expected).amax() < 1e-15);

        assert!((quad.add(&x1, &quad.origin()) - &x1).amax() < 1e-15);

        let s = LinearStructure::new(quad.clone()).unwrap();
        assert!((s.add(&x1, &x2).unwrap() - sum).amax() < 1e-12);
    }

    #[test]
    fn magnetic_scale_examples() {
        let quad = MagneticGauge::quadratic(1.0);
        let x = pt([0.4, -1.0, 0.2, 1.0, 0.5, -0.3]);
        assert!((quad.scale(1.0, &x) - &x).amax() < 1e-15);
        assert!((quad.scale(0.0, &x) - quad.origin()).amax() < 1e-15);
        let sym = MagneticGauge::symmetric_z(2.0);
        assert!((sym.scale(-1.7, &x) - &x * -1.7).amax() < 1e-15);
        let s = LinearStructure::new(quad.clone()).unwrap();
        assert!((s.scale(2.5, &x).unwrap() - quad.scale(2.5, &x)).amax() < 1e-12);
    }

    #[test]
    fn magnetic_scale_generates_liouville_field() {
        let quad = MagneticGauge::quadratic(1.0);
        let x = pt([0.4, -1.0, 0.2, 1.0, 0.5, -0.3]);
        let h: f64 = 1e-5;
        let fd = (quad.scale(h.exp(), &x) - quad.scale((-h).exp(), &x)) / (2.0 * h);
        assert!((fd - quad.liouville(&x)).amax() < 1e-6);
        let s = LinearStructure::new(quad.clone()).unwrap();
        assert!((s.liouville_field(&x).unwrap() - quad.liouville(&x)).amax() < 1e-12);
    }

    #[test]
    fn magnetic_subtract_matches_generic_rule() {
        let quad = MagneticGauge::quadratic(0.8);
        let s = LinearStructure::new(quad.clone()).unwrap();
        let x1 = pt([0.4, -1.0, 0.2, 1.0, 0.5, -0.3]);
        let x2 = pt([-1.2, 0.6, 0.3, 0.0, 2.0, 1.0]);
        assert!((s.subtract(&x1, &x2).unwrap() - quad.subtract(&x1, &x2)).amax() < 1e-12);
        assert!((quad.subtract(&x1, &x1) - quad.origin()).amax() < 1e-15);
    }

    #[test]
    fn magnetic_linearity_depends_on_gauge() {
        let tol = Tolerances::default();
        let samples: Vec<Point> =
            vec![pt([0.4, -1.0, 0.2, 1.0, 0.5, -0.3]), pt([1.1, 0.6, -0.9, 0.0, 2.0, 1.0])];
        let sym = LinearStructure::new(MagneticGauge::symmetric_z(1.0)).unwrap();
        assert!(sym.is_linear(&samples, &tol).unwrap().linear);
        let quad = LinearStructure::new(MagneticGauge::quadratic(1.0)).unwrap();
        assert!(!quad.is_linear(&samples, &tol).unwrap().linear);
    }

    #[test]
    fn custom_gauge_uses_finite_difference_jacobian() {
        let g = MagneticGauge::custom("quad-fd", |q| Vector3::new(0.0, q.x * q.x, 0.0), None, false);
        let q = Vector3::new(0.7, 0.1, -0.4);
        let d = g.potential_jacobian(&q);
        assert!((d[(1, 0)] - 1.4).abs() < 1e-8);
        let field = MagneticGauge::symmetric(Vector3::new(0.3, -0.2, 1.1)).field(&q);
        assert!((field - Vector3::new(0.3, -0.2, 1.1)).norm() < 1e-14);
    }

    #[test]
    fn catalog_ids_round_trip() {
        for id in CatalogId::ALL {
            assert_eq!(id.as_str().parse::<CatalogId>().unwrap(), id);
        }
        assert!("sphere".parse::<CatalogId>().is_err());
    }
}
