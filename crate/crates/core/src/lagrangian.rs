//! Adapted frames and Darboux charts of regular Lagrangians on `TQ = R^n × R^n`.
//!
//! States are `(q¹ … qⁿ, u¹ … uⁿ)`. With momenta `πᵢ = ∂L/∂uⁱ`, velocity
//! Hessian `H` and mixed block `Cᵢⱼ = ∂²L/∂uⁱ∂qʲ`, the two-form is fixed as
//!
//! ```text
//! ω_L = dπᵢ ∧ dqⁱ = [[Cᵀ − C, −H], [H, 0]]     (components in (q, u)).
//! ```
//!
//! With this sign `i_{X_j} ω_L = −dπⱼ`, `i_{Yʲ} ω_L = dqʲ` and the
//! Euler–Lagrange field satisfies `i_Γ ω_L = −dE_L`. The opposite convention
//! `dqⁱ ∧ dπᵢ` is `−ω_L` and turns the last identity into `i_Γ ω = dE_L`.

use nalgebra::{DMatrix, DVector};

use crate::catalog::MagneticGauge;
use crate::error::{Error, Result};
use crate::linalg::max_abs;
use crate::linstruct::Point;
use nalgebra::Vector3;

/// Regularity threshold on `|det H|` for analytic Hessians.
pub const REGULARITY: f64 = 1e-10;

/// Regularity threshold when the Hessian comes from nested differences,
/// whose rounding floor sits near `ε/FD_STEP²`.
pub const FD_REGULARITY: f64 = 1e-6;

/// Relative step of the finite-difference fallbacks.
pub const FD_STEP: f64 = 1e-5;

/// A Lagrangian on `TQ`. Only `value` is required; every derivative falls
/// back to central differences of the next lower one.
pub trait Lagrangian: Send + Sync {
    /// `dim Q`.
    fn n(&self) -> usize;

    fn value(&self, q: &DVector<f64>, u: &DVector<f64>) -> f64;

    /// `∂L/∂qʲ`.
    fn grad_q(&self, q: &DVector<f64>, u: &DVector<f64>) -> DVector<f64> {
        fd_gradient(|x| self.value(x, u), q)
    }

    /// `πᵢ = ∂L/∂uⁱ`.
    fn momenta(&self, q: &DVector<f64>, u: &DVector<f64>) -> DVector<f64> {
        fd_gradient(|x| self.value(q, x), u)
    }

    /// `Hᵢₖ = ∂²L/∂uⁱ∂uᵏ`.
    fn hessian(&self, q: &DVector<f64>, u: &DVector<f64>) -> DMatrix<f64> {
        let h = fd_jac(|x| self.momenta(q, x), u);
        (&h + h.transpose()) * 0.5
    }

    /// `Cᵢⱼ = ∂²L/∂uⁱ∂qʲ`.
    fn mixed(&self, q: &DVector<f64>, u: &DVector<f64>) -> DMatrix<f64> {
        fd_jac(|x| self.momenta(x, u), q)
    }

    /// Whether `u ↦ π(q, u)` is a global diffeomorphism of each fibre, so that
    /// `(q, π)` is a global chart.
    fn momenta_globally_invertible(&self) -> bool {
        false
    }

    /// Threshold below which `|det H|` counts as singular.
    fn regularity(&self) -> f64 {
        FD_REGULARITY
    }

    fn name(&self) -> &str {
        "lagrangian"
    }
}

fn fd_gradient(f: impl Fn(&DVector<f64>) -> f64, x: &DVector<f64>) -> DVector<f64> {
    DVector::from_fn(x.len(), |j, _| {
        let h = FD_STEP * x[j].abs().max(1.0);
        let mut xp = x.clone();
        let mut xm = x.clone();
        xp[j] += h;
        xm[j] -= h;
        (f(&xp) - f(&xm)) / (2.0 * h)
    })
}

fn fd_jac(f: impl Fn(&DVector<f64>) -> DVector<f64>, x: &DVector<f64>) -> DMatrix<f64> {
    crate::linalg::fd_jacobian(f, x, FD_STEP)
}

/// Split a `2n` state into `(q, u)`.
pub fn split(state: &Point) -> (DVector<f64>, DVector<f64>) {
    let n = state.len() / 2;
    (state.rows(0, n).into_owned(), state.rows(n, n).into_owned())
}

fn join(q: &DVector<f64>, u: &DVector<f64>) -> Point {
    let mut v = Point::zeros(q.len() + u.len());
    v.rows_mut(0, q.len()).copy_from(q);
    v.rows_mut(q.len(), u.len()).copy_from(u);
    v
}

fn check_state<L: Lagrangian + ?Sized>(m: &L, state: &Point) -> Result<()> {
    if state.len() != 2 * m.n() {
        return Err(Error::InvalidParameter(format!(
            "state of dim {} for a Lagrangian on T R^{}",
            state.len(),
            m.n()
        )));
    }
    Ok(())
}

/// `L = ½ δᵢⱼ uⁱ uʲ`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FreeParticle {
    pub n: usize,
}

impl Lagrangian for FreeParticle {
    fn n(&self) -> usize {
        self.n
    }
    fn value(&self, _q: &DVector<f64>, u: &DVector<f64>) -> f64 {
        0.5 * u.norm_squared()
    }
    fn grad_q(&self, _q: &DVector<f64>, _u: &DVector<f64>) -> DVector<f64> {
        DVector::zeros(self.n)
    }
    fn momenta(&self, _q: &DVector<f64>, u: &DVector<f64>) -> DVector<f64> {
        u.clone()
    }
    fn hessian(&self, _q: &DVector<f64>, _u: &DVector<f64>) -> DMatrix<f64> {
        DMatrix::identity(self.n, self.n)
    }
    fn mixed(&self, _q: &DVector<f64>, _u: &DVector<f64>) -> DMatrix<f64> {
        DMatrix::zeros(self.n, self.n)
    }
    fn momenta_globally_invertible(&self) -> bool {
        true
    }
    fn regularity(&self) -> f64 {
        REGULARITY
    }
    fn name(&self) -> &str {
        "free"
    }
}

/// Charged particle `L = ½ δᵢⱼ uⁱ uʲ + uᵏ A_k(q)` on `T R³`, with momenta
/// `πᵢ = δᵢⱼ uʲ + Aᵢ`.
#[derive(Debug, Clone)]
pub struct MagneticLagrangian {
    pub gauge: MagneticGauge,
}

impl MagneticLagrangian {
    pub fn new(gauge: MagneticGauge) -> Self {
        Self { gauge }
    }
}

fn v3(x: &DVector<f64>) -> Vector3<f64> {
    Vector3::new(x[0], x[1], x[2])
}

impl Lagrangian for MagneticLagrangian {
    fn n(&self) -> usize {
        3
    }
    fn value(&self, q: &DVector<f64>, u: &DVector<f64>) -> f64 {
        0.5 * u.norm_squared() + v3(u).dot(&self.gauge.potential(&v3(q)))
    }
    fn grad_q(&self, q: &DVector<f64>, u: &DVector<f64>) -> DVector<f64> {
        let d = self.gauge.potential_jacobian(&v3(q));
        let g = d.transpose() * v3(u);
        DVector::from_column_slice(g.as_slice())
    }
    fn momenta(&self, q: &DVector<f64>, u: &DVector<f64>) -> DVector<f64> {
        let a = self.gauge.potential(&v3(q));
        DVector::from_fn(3, |i, _| u[i] + a[i])
    }
    fn hessian(&self, _q: &DVector<f64>, _u: &DVector<f64>) -> DMatrix<f64> {
        DMatrix::identity(3, 3)
    }
    fn mixed(&self, q: &DVector<f64>, _u: &DVector<f64>) -> DMatrix<f64> {
        let d = self.gauge.potential_jacobian(&v3(q));
        DMatrix::from_fn(3, 3, |i, j| d[(i, j)])
    }
    fn momenta_globally_invertible(&self) -> bool {
        true
    }
    fn regularity(&self) -> f64 {
        REGULARITY
    }
    fn name(&self) -> &str {
        "magnetic"
    }
}

/// `L = ½ Σ mᵢ (1 + κ qᵢ²) uᵢ² + β q¹ u² + γ sin(q²) u³` on `T R³`.
///
/// Position-dependent Hessian and a non-symmetric mixed block, with momenta
/// affine in `u` (hence globally invertible).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Anisotropic {
    pub masses: [f64; 3],
    pub kappa: f64,
    pub beta: f64,
    pub gamma: f64,
}

impl Default for Anisotropic {
    fn default() -> Self {
        Self { masses: [1.0, 2.0, 0.5], kappa: 0.3, beta: 0.7, gamma: -0.4 }
    }
}

impl Lagrangian for Anisotropic {
    fn n(&self) -> usize {
        3
    }
    fn value(&self, q: &DVector<f64>, u: &DVector<f64>) -> f64 {
        let kinetic: f64 = (0..3).map(|i| 0.5 * self.masses[i] * (1.0 + self.kappa * q[i] * q[i]) * u[i] * u[i]).sum();
        kinetic + self.beta * q[0] * u[1] + self.gamma * q[1].sin() * u[2]
    }
    fn grad_q(&self, q: &DVector<f64>, u: &DVector<f64>) -> DVector<f64> {
        let mut g = DVector::from_fn(3, |i, _| self.masses[i] * self.kappa * q[i] * u[i] * u[i]);
        g[0] += self.beta * u[1];
        g[1] += self.gamma * q[1].cos() * u[2];
        g
    }
    fn momenta(&self, q: &DVector<f64>, u: &DVector<f64>) -> DVector<f64> {
        let mut p = DVector::from_fn(3, |i, _| self.masses[i] * (1.0 + self.kappa * q[i] * q[i]) * u[i]);
        p[1] += self.beta * q[0];
        p[2] += self.gamma * q[1].sin();
        p
    }
    fn hessian(&self, q: &DVector<f64>, _u: &DVector<f64>) -> DMatrix<f64> {
        DMatrix::from_fn(3, 3, |i, k| if i == k { self.masses[i] * (1.0 + self.kappa * q[i] * q[i]) } else { 0.0 })
    }
    fn mixed(&self, q: &DVector<f64>, u: &DVector<f64>) -> DMatrix<f64> {
        let mut c = DMatrix::from_fn(3, 3, |i, j| if i == j { 2.0 * self.masses[i] * self.kappa * q[i] * u[i] } else { 0.0 });
        c[(1, 0)] += self.beta;
        c[(2, 1)] += self.gamma * q[1].cos();
        c
    }
    fn momenta_globally_invertible(&self) -> bool {
        self.masses.iter().all(|m| *m > 0.0) && self.kappa >= 0.0
    }
    fn regularity(&self) -> f64 {
        REGULARITY
    }
    fn name(&self) -> &str {
        "anisotropic"
    }
}

/// A Lagrangian given only by its value; all derivatives are finite
/// differences and the Darboux chart is reported as local.
pub struct FnLagrangian<F> {
    n: usize,
    f: F,
}

impl<F> FnLagrangian<F>
where
    F: Fn(&DVector<f64>, &DVector<f64>) -> f64 + Send + Sync,
{
    pub fn new(n: usize, f: F) -> Self {
        Self { n, f }
    }
}

impl<F> Lagrangian for FnLagrangian<F>
where
    F: Fn(&DVector<f64>, &DVector<f64>) -> f64 + Send + Sync,
{
    fn n(&self) -> usize {
        self.n
    }
    fn value(&self, q: &DVector<f64>, u: &DVector<f64>) -> f64 {
        (self.f)(q, u)
    }
}

/// Lagrangians addressable from scenario files.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LagrangianId {
    Free,
    MagneticSymmetric,
    MagneticQuadraticGauge,
}

impl LagrangianId {
    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "free" => Ok(Self::Free),
            "magnetic-symmetric" => Ok(Self::MagneticSymmetric),
            "magnetic-quadratic-gauge" => Ok(Self::MagneticQuadraticGauge),
            _ => Err(Error::InvalidParameter(format!("unknown lagrangian id {s:?}"))),
        }
    }

    /// Build the model; `b` is the field strength along `ẑ` for the symmetric
    /// gauge and the coefficient `c` of `A = (0, c (q¹)², 0)` otherwise.
    pub fn build(self, b: f64) -> Box<dyn Lagrangian> {
        match self {
            Self::Free => Box::new(FreeParticle { n: 3 }),
            Self::MagneticSymmetric => Box::new(MagneticLagrangian::new(MagneticGauge::symmetric_z(b))),
            Self::MagneticQuadraticGauge => Box::new(MagneticLagrangian::new(MagneticGauge::quadratic(b))),
        }
    }
}

/// The frame `(X_j, Yʲ)` with dual coframe `(αⁱ, βᵢ)` at one state. Vector
/// and covector components are stored over `(∂/∂q, ∂/∂u)` and `(dq, du)`.
#[derive(Debug, Clone, PartialEq)]
pub struct AdaptedFrame {
    pub point: Point,
    pub x: Vec<DVector<f64>>,
    pub y: Vec<DVector<f64>>,
    pub alpha: Vec<DVector<f64>>,
    pub beta: Vec<DVector<f64>>,
}

impl AdaptedFrame {
    /// `Σᵢ βᵢ ∧ αⁱ` as a component matrix.
    pub fn two_form(&self) -> DMatrix<f64> {
        let dim = self.point.len();
        let mut w = DMatrix::zeros(dim, dim);
        for (a, b) in self.alpha.iter().zip(&self.beta) {
            w += b * a.transpose() - a * b.transpose();
        }
        w
    }

    /// Largest deviation of `αⁱ(X_j), αⁱ(Yʲ), βᵢ(Yʲ), βᵢ(X_j)` from `δ, 0, δ, 0`.
    pub fn duality_residual(&self) -> f64 {
        let n = self.x.len();
        let mut worst = 0.0_f64;
        for i in 0..n {
            for j in 0..n {
                let delta = if i == j { 1.0 } else { 0.0 };
                worst = worst
                    .max((self.alpha[i].dot(&self.x[j]) - delta).abs())
                    .max(self.alpha[i].dot(&self.y[j]).abs())
                    .max((self.beta[i].dot(&self.y[j]) - delta).abs())
                    .max(self.beta[i].dot(&self.x[j]).abs());
            }
        }
        worst
    }
}

fn regular_inverse(h: &DMatrix<f64>, tol: f64) -> Result<DMatrix<f64>> {
    let det = h.determinant();
    if det.is_nan() || det.abs() <= tol {
        return Err(Error::SingularHessian { det: det.abs() });
    }
    h.clone().try_inverse().ok_or(Error::SingularHessian { det: det.abs() })
}

/// `X_j = ∂/∂qʲ − (H⁻¹C)ₖⱼ ∂/∂uᵏ`, `Yʲ = (H⁻¹)ʲᵏ ∂/∂uᵏ`, `αⁱ = dqⁱ`,
/// `βᵢ = dπᵢ`.
pub fn adapted_frame<L: Lagrangian + ?Sized>(m: &L, state: &Point) -> Result<AdaptedFrame> {
    check_state(m, state)?;
    let n = m.n();
    let (q, u) = split(state);
    let h = m.hessian(&q, &u);
    let c = m.mixed(&q, &u);
    let h_inv = regular_inverse(&h, m.regularity())?;
    let mc = &h_inv * &c;
    let unit = |i: usize| {
        let mut v = DVector::zeros(2 * n);
        v[i] = 1.0;
        v
    };
    let x = (0..n)
        .map(|j| {
            let mut v = unit(j);
            for k in 0..n {
                v[n + k] = -mc[(k, j)];
            }
            v
        })
        .collect();
    let y = (0..n)
        .map(|j| {
            let mut v = DVector::zeros(2 * n);
            for k in 0..n {
                v[n + k] = h_inv[(j, k)];
            }
            v
        })
        .collect();
    let alpha = (0..n).map(unit).collect();
    let beta = (0..n)
        .map(|i| {
            let mut v = DVector::zeros(2 * n);
            for j in 0..n {
                v[j] = c[(i, j)];
                v[n + j] = h[(i, j)];
            }
            v
        })
        .collect();
    Ok(AdaptedFrame { point: state.clone(), x, y, alpha, beta })
}

/// Components of `ω_L = dπᵢ ∧ dqⁱ` in `(q, u)` coordinates.
pub fn lagrangian_two_form<L: Lagrangian + ?Sized>(m: &L, state: &Point) -> Result<DMatrix<f64>> {
    check_state(m, state)?;
    let n = m.n();
    let (q, u) = split(state);
    let h = m.hessian(&q, &u);
    let c = m.mixed(&q, &u);
    let mut w = DMatrix::zeros(2 * n, 2 * n);
    w.view_mut((0, 0), (n, n)).copy_from(&(c.transpose() - &c));
    w.view_mut((0, n), (n, n)).copy_from(&(-&h));
    w.view_mut((n, 0), (n, n)).copy_from(&h);
    Ok(w)
}

/// Components of `i_v ω`, i.e. `(i_v ω)_b = ω_ab vᵃ`.
pub fn interior_product(v: &DVector<f64>, omega: &DMatrix<f64>) -> DVector<f64> {
    omega.transpose() * v
}

/// Largest residual of `i_{X_j} ω_L + dπⱼ` and `i_{Yʲ} ω_L − dqʲ`.
pub fn interior_residuals<L: Lagrangian + ?Sized>(m: &L, state: &Point) -> Result<(f64, f64)> {
    let frame = adapted_frame(m, state)?;
    let w = lagrangian_two_form(m, state)?;
    let mut rx = 0.0_f64;
    let mut ry = 0.0_f64;
    for j in 0..m.n() {
        rx = rx.max((interior_product(&frame.x[j], &w) + &frame.beta[j]).amax());
        ry = ry.max((interior_product(&frame.y[j], &w) - &frame.alpha[j]).amax());
    }
    Ok((rx, ry))
}

/// Where the Darboux chart `(q, π)` is valid.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ChartScope {
    Global,
    /// Only pointwise: the momentum map is not known to be invertible on
    /// whole fibres.
    Local,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DarbouxChart {
    /// `(qⁱ, πᵢ)` at the queried state.
    pub coords: Point,
    pub scope: ChartScope,
}

/// `(q, u) ↦ (q, ∂L/∂u)`, the chart in which `ω_L = dπᵢ ∧ dqⁱ` is constant.
pub fn darboux_chart<L: Lagrangian + ?Sized>(m: &L, state: &Point) -> Result<DarbouxChart> {
    check_state(m, state)?;
    let (q, u) = split(state);
    regular_inverse(&m.hessian(&q, &u), m.regularity())?;
    let scope = if m.momenta_globally_invertible() { ChartScope::Global } else { ChartScope::Local };
    Ok(DarbouxChart { coords: join(&q, &m.momenta(&q, &u)), scope })
}

/// Canonical block `[[0, −I], [I, 0]]` of `dπᵢ ∧ dqⁱ` in `(q, π)`.
pub fn canonical_block(n: usize) -> DMatrix<f64> {
    -crate::linalg::canonical_symplectic(n)
}

/// `|Jc⁻ᵀ ω_L Jc⁻¹ − [[0, −I], [I, 0]]|` with `Jc = ∂(q, π)/∂(q, u)`.
pub fn darboux_residual<L: Lagrangian + ?Sized>(m: &L, state: &Point) -> Result<f64> {
    let n = m.n();
    let (q, u) = split(state);
    let w = lagrangian_two_form(m, state)?;
    let mut jc = DMatrix::identity(2 * n, 2 * n);
    jc.view_mut((n, 0), (n, n)).copy_from(&m.mixed(&q, &u));
    jc.view_mut((n, n), (n, n)).copy_from(&m.hessian(&q, &u));
    let inv = regular_inverse(&jc, m.regularity())?;
    let pulled = inv.transpose() * w * &inv;
    Ok(max_abs(&(pulled - canonical_block(n))))
}

/// Largest component of `dω_L`, i.e. of `∂ₐω_bc + ∂_bω_ca + ∂_cω_ab`, by
/// central differences with step `h`.
pub fn closedness_residual<L: Lagrangian + ?Sized>(m: &L, state: &Point, h: f64) -> Result<f64> {
    let dim = state.len();
    let mut derivs = Vec::with_capacity(dim);
    for a in 0..dim {
        let mut sp = state.clone();
        let mut sm = state.clone();
        sp[a] += h;
        sm[a] -= h;
        derivs.push((lagrangian_two_form(m, &sp)? - lagrangian_two_form(m, &sm)?) / (2.0 * h));
    }
    let mut worst = 0.0_f64;
    for a in 0..dim {
        for b in a + 1..dim {
            for c in b + 1..dim {
                let s = derivs[a][(b, c)] + derivs[b][(c, a)] + derivs[c][(a, b)];
                worst = worst.max(s.abs());
            }
        }
    }
    Ok(worst)
}

/// Largest component of the pairwise Lie brackets of `{X_j, Yʲ}`, with the
/// field derivatives taken by central differences of step `h`.
pub fn commutator_check<L: Lagrangian + ?Sized>(m: &L, state: &Point, h: f64) -> Result<f64> {
    let n = m.n();
    let dim = 2 * n;
    let fields = |s: &Point| -> Result<Vec<DVector<f64>>> {
        let f = adapted_frame(m, s)?;
        Ok(f.x.into_iter().chain(f.y).collect())
    };
    let here = fields(state)?;
    // jac[f] has column b = ∂_b of field f.
    let mut jac = vec![DMatrix::<f64>::zeros(dim, dim); here.len()];
    for b in 0..dim {
        let mut sp = state.clone();
        let mut sm = state.clone();
        sp[b] += h;
        sm[b] -= h;
        let (fp, fm) = (fields(&sp)?, fields(&sm)?);
        for (k, jk) in jac.iter_mut().enumerate() {
            jk.set_column(b, &((&fp[k] - &fm[k]) / (2.0 * h)));
        }
    }
    let mut worst = 0.0_f64;
    for z in 0..here.len() {
        for w in z + 1..here.len() {
            let bracket = &jac[w] * &here[z] - &jac[z] * &here[w];
            worst = worst.max(bracket.amax());
        }
    }
    Ok(worst)
}

/// `Γ = uⁱ ∂/∂qⁱ + aⁱ ∂/∂uⁱ` with `a = H⁻¹(∂L/∂q − C u)`.
pub fn euler_lagrange_field<L: Lagrangian + ?Sized>(m: &L, state: &Point) -> Result<DVector<f64>> {
    check_state(m, state)?;
    let (q, u) = split(state);
    let h_inv = regular_inverse(&m.hessian(&q, &u), m.regularity())?;
    let acc = h_inv * (m.grad_q(&q, &u) - m.mixed(&q, &u) * &u);
    Ok(join(&u, &acc))
}

/// `E_L = uⁱπᵢ − L`.
pub fn energy<L: Lagrangian + ?Sized>(m: &L, state: &Point) -> f64 {
    let (q, u) = split(state);
    u.dot(&m.momenta(&q, &u)) - m.value(&q, &u)
}

/// Largest deviation of the analytic derivatives from finite differences of
/// the next lower derivative.
pub fn derivative_check<L: Lagrangian + ?Sized>(m: &L, state: &Point) -> f64 {
    let (q, u) = split(state);
    let gq = fd_gradient(|x| m.value(x, &u), &q);
    let gu = fd_gradient(|x| m.value(&q, x), &u);
    let hh = fd_jac(|x| m.momenta(&q, x), &u);
    let cc = fd_jac(|x| m.momenta(x, &u), &q);
    let h = m.hessian(&q, &u);
    [
        (m.grad_q(&q, &u) - gq).amax(),
        (m.momenta(&q, &u) - gu).amax(),
        max_abs(&(&h - hh)),
        max_abs(&(m.mixed(&q, &u) - cc)),
        max_abs(&(&h - h.transpose())),
    ]
    .into_iter()
    .fold(0.0, f64::max)
}

/// Residuals of the Darboux construction at one state.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FrameReport {
    pub duality: f64,
    pub reconstruction: f64,
    pub interior_x: f64,
    pub interior_y: f64,
    pub darboux: f64,
}

impl FrameReport {
    pub fn max(&self) -> f64 {
        [self.duality, self.reconstruction, self.interior_x, self.interior_y, self.darboux]
            .into_iter()
            .fold(0.0, f64::max)
    }
}

pub fn frame_report<L: Lagrangian + ?Sized>(m: &L, state: &Point) -> Result<FrameReport> {
    let frame = adapted_frame(m, state)?;
    let w = lagrangian_two_form(m, state)?;
    let (interior_x, interior_y) = interior_residuals(m, state)?;
    Ok(FrameReport {
        duality: frame.duality_residual(),
        reconstruction: max_abs(&(frame.two_form() - w)),
        interior_x,
        interior_y,
        darboux: darboux_residual(m, state)?,
    })
}
