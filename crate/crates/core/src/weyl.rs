//! Desk-scale Weyl systems.
//!
//! Two realizations: the exact clock/shift pair on `Z_N`, and wavefunctions
//! sampled on a periodic grid `x_k = −X + kΔ`, `Δ = 2X/N`, on which `x̂`, `π̂`
//! and the Weyl operators act as matrices. Adjoints are taken with respect to
//! one of two measures on the same grid: `dq` (weight 1) or `dQ` (weight
//! `dQ/dq = (1 + 3λQ²)⁻¹` with `Q = qK(|q|)` the deformed coordinate along
//! `p = 0`).

use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector, Matrix4};
use num_complex::Complex64;

use crate::catalog::KTransform;
use crate::dynamics::MagneticSystem;
use crate::error::{Error, Result};

pub type CVector = DVector<Complex64>;
pub type CMatrix = DMatrix<Complex64>;

const I: Complex64 = Complex64::new(0.0, 1.0);

fn c(re: f64) -> Complex64 {
    Complex64::new(re, 0.0)
}

/// Periodic 1D grid `x_k = −X + kΔ`, `k = 0 … N−1`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid1D {
    n: usize,
    extent: f64,
}

impl Grid1D {
    /// `N` must be even and at least 8.
    pub fn new(n: usize, extent: f64) -> Result<Self> {
        if n < 8 || !n.is_multiple_of(2) {
            return Err(Error::InvalidParameter(format!("grid size must be even and ≥ 8, got {n}")));
        }
        if !(extent > 0.0 && extent.is_finite()) {
            return Err(Error::InvalidParameter(format!("grid half-width must be positive, got {extent}")));
        }
        Ok(Self { n, extent })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn extent(&self) -> f64 {
        self.extent
    }

    pub fn delta(&self) -> f64 {
        2.0 * self.extent / self.n as f64
    }

    pub fn point(&self, k: usize) -> f64 {
        -self.extent + k as f64 * self.delta()
    }

    pub fn points(&self) -> Vec<f64> {
        (0..self.n).map(|k| self.point(k)).collect()
    }

    /// `exp(−(x − c)²/(2s²)) e^{ik₀x}` sampled on the grid.
    pub fn gaussian(&self, center: f64, width: f64, k0: f64) -> CVector {
        CVector::from_fn(self.n, |k, _| {
            let x = self.point(k);
            let env = (-(x - center).powi(2) / (2.0 * width * width)).exp();
            Complex64::from_polar(env, k0 * x)
        })
    }
}

/// Measure on the grid used for inner products and adjoints.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Measure {
    /// `dq`.
    Lebesgue,
    /// `dQ`, with `Q` the deformed coordinate of the cubic `K` deformation.
    Deformed(KTransform),
}

impl Measure {
    pub fn deformed(lambda: f64) -> Result<Self> {
        Ok(Measure::Deformed(KTransform::new(lambda)?))
    }

    /// Density with respect to `dq` at grid value `q`.
    pub fn weight(&self, q: f64) -> f64 {
        match self {
            Measure::Lebesgue => 1.0,
            Measure::Deformed(t) => {
                let big = deformed_coordinate(t, q);
                1.0 / (1.0 + 3.0 * t.lambda() * big * big)
            }
        }
    }

    pub fn weights(&self, g: &Grid1D) -> Vec<f64> {
        g.points().into_iter().map(|q| self.weight(q)).collect()
    }

    pub fn label(&self) -> &'static str {
        match self {
            Measure::Lebesgue => "dq",
            Measure::Deformed(_) => "dQ",
        }
    }
}

/// `Q = qK(|q|)`, the deformed coordinate along `p = P = 0`.
pub fn deformed_coordinate(t: &KTransform, q: f64) -> f64 {
    q * t.solve_k(q.abs())
}

/// `⟨φ, ψ⟩ = Σ φ̄_k ψ_k w_k Δ`.
pub fn inner(g: &Grid1D, m: &Measure, phi: &CVector, psi: &CVector) -> Complex64 {
    let d = g.delta();
    (0..g.n).map(|k| phi[k].conj() * psi[k] * (m.weight(g.point(k)) * d)).sum()
}

pub fn norm(g: &Grid1D, m: &Measure, psi: &CVector) -> f64 {
    inner(g, m, psi, psi).re.max(0.0).sqrt()
}

pub fn normalized(g: &Grid1D, m: &Measure, psi: &CVector) -> CVector {
    psi / c(norm(g, m, psi))
}

/// A matrix acting on grid functions.
#[derive(Debug, Clone, PartialEq)]
pub struct GridOperator {
    pub matrix: CMatrix,
    pub grid: Grid1D,
}

impl GridOperator {
    pub fn new(matrix: CMatrix, grid: Grid1D) -> Self {
        Self { matrix, grid }
    }

    pub fn identity(grid: Grid1D) -> Self {
        Self::new(CMatrix::identity(grid.n, grid.n), grid)
    }

    pub fn diagonal(grid: Grid1D, f: impl Fn(f64) -> Complex64) -> Self {
        let d = CVector::from_fn(grid.n, |k, _| f(grid.point(k)));
        Self::new(CMatrix::from_diagonal(&d), grid)
    }

    pub fn apply(&self, psi: &CVector) -> CVector {
        &self.matrix * psi
    }

    pub fn mul(&self, other: &GridOperator) -> GridOperator {
        Self::new(&self.matrix * &other.matrix, self.grid)
    }

    pub fn add(&self, other: &GridOperator) -> GridOperator {
        Self::new(&self.matrix + &other.matrix, self.grid)
    }

    pub fn sub(&self, other: &GridOperator) -> GridOperator {
        Self::new(&self.matrix - &other.matrix, self.grid)
    }

    pub fn scale(&self, z: Complex64) -> GridOperator {
        Self::new(&self.matrix * z, self.grid)
    }

    /// `[A, B] = AB − BA`.
    pub fn commutator(&self, other: &GridOperator) -> GridOperator {
        self.mul(other).sub(&other.mul(self))
    }

    /// Adjoint for the inner product of `m`: `A† = W⁻¹ Aᴴ W`, `W = diag(wΔ)`.
    pub fn adjoint_wrt(&self, m: &Measure) -> GridOperator {
        let w = m.weights(&self.grid);
        let mut a = self.matrix.adjoint();
        for r in 0..self.grid.n {
            for col in 0..self.grid.n {
                a[(r, col)] *= w[col] / w[r];
            }
        }
        Self::new(a, self.grid)
    }

    pub fn max_abs(&self) -> f64 {
        self.matrix.iter().fold(0.0_f64, |acc, z| acc.max(z.norm()))
    }

    pub fn is_finite(&self) -> bool {
        self.matrix.iter().all(|z| z.re.is_finite() && z.im.is_finite())
    }
}

/// Clock `U = diag(e^{2πik/N})` and shift `V e_k = e_{k+1}`, with
/// `UV = e^{2πi/N} VU`.
pub fn finite_weyl_pair(n: usize) -> Result<(CMatrix, CMatrix)> {
    if n < 2 {
        return Err(Error::InvalidParameter(format!("finite Weyl pair needs N ≥ 2, got {n}")));
    }
    let u = CMatrix::from_diagonal(&CVector::from_fn(n, |k, _| Complex64::from_polar(1.0, 2.0 * PI * k as f64 / n as f64)));
    let mut v = CMatrix::zeros(n, n);
    for k in 0..n {
        v[((k + 1) % n, k)] = c(1.0);
    }
    Ok((u, v))
}

/// `max |UV − e^{2πi/N} VU|`.
pub fn finite_weyl_residual(n: usize) -> Result<f64> {
    let (u, v) = finite_weyl_pair(n)?;
    let q = Complex64::from_polar(1.0, 2.0 * PI / n as f64);
    let d = &u * &v - (&v * &u) * q;
    Ok(d.iter().fold(0.0_f64, |a, z| a.max(z.norm())))
}

/// Grid Weyl operator with the displacement actually used.
#[derive(Debug, Clone, PartialEq)]
pub struct WeylOperator {
    pub op: GridOperator,
    /// `x` rounded to the nearest multiple of `Δ`.
    pub x: f64,
    pub snapped: bool,
}

/// `(Ŵ(x, π)ψ)(q_k) = e^{−iπ(q_k + x/2)/ℏ} ψ(q_{k+s})`, `x = sΔ`, indices
/// taken mod `N`.
pub fn weyl_operator(g: &Grid1D, x: f64, pi: f64, hbar: f64) -> WeylOperator {
    let d = g.delta();
    let s = (x / d).round();
    let snapped_x = s * d;
    let snapped = (snapped_x - x).abs() > 1e-12 * d.max(x.abs());
    if snapped {
        log::warn!("weyl displacement {x} snapped to grid value {snapped_x}");
    }
    let n = g.n as i64;
    let shift = s as i64;
    let mut m = CMatrix::zeros(g.n, g.n);
    for k in 0..g.n {
        let phase = -pi * (g.point(k) + snapped_x / 2.0) / hbar;
        let col = (k as i64 + shift).rem_euclid(n) as usize;
        m[(k, col)] = Complex64::from_polar(1.0, phase);
    }
    WeylOperator { op: GridOperator::new(m, *g), x: snapped_x, snapped }
}

/// `max |Ŵ(e₁)Ŵ(e₂) − e^{(i/2ℏ)ω(e₁,e₂)} Ŵ(e₁+e₂)|` with
/// `ω(e₁, e₂) = π₁x₂ − x₁π₂`.
pub fn weyl_composition_residual(g: &Grid1D, e1: (f64, f64), e2: (f64, f64), hbar: f64) -> f64 {
    let w1 = weyl_operator(g, e1.0, e1.1, hbar);
    let w2 = weyl_operator(g, e2.0, e2.1, hbar);
    let w12 = weyl_operator(g, w1.x + w2.x, e1.1 + e2.1, hbar);
    let omega = e1.1 * w2.x - w1.x * e2.1;
    let phase = Complex64::from_polar(1.0, omega / (2.0 * hbar));
    w1.op.mul(&w2.op).sub(&w12.op.scale(phase)).max_abs()
}

/// Discretization of `∂/∂q`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Derivative {
    /// Periodic central difference `(ψ_{k+1} − ψ_{k−1})/(2Δ)`.
    #[default]
    Central,
    /// Periodic Fourier differentiation matrix.
    Spectral,
}

fn derivative_matrix(g: &Grid1D, kind: Derivative) -> DMatrix<f64> {
    let n = g.n;
    let mut d = DMatrix::zeros(n, n);
    match kind {
        Derivative::Central => {
            let h = 1.0 / (2.0 * g.delta());
            for k in 0..n {
                d[(k, (k + 1) % n)] = h;
                d[(k, (k + n - 1) % n)] = -h;
            }
        }
        Derivative::Spectral => {
            let l = 2.0 * g.extent;
            for j in 0..n {
                for k in 0..n {
                    if j != k {
                        let m = j as i64 - k as i64;
                        let sign = if m.rem_euclid(2) == 0 { 1.0 } else { -1.0 };
                        d[(j, k)] = (2.0 * PI / l) * 0.5 * sign / (m as f64 * PI / n as f64).tan();
                    }
                }
            }
        }
    }
    d
}

/// `x̂ = diag(q_k)` and `π̂ = −iℏ ∂/∂q`.
pub fn position_momentum(g: &Grid1D, hbar: f64, kind: Derivative) -> (GridOperator, GridOperator) {
    let x = GridOperator::diagonal(*g, c);
    let d = derivative_matrix(g, kind);
    let p = GridOperator::new(d.map(|v| Complex64::new(0.0, -hbar * v)), *g);
    (x, p)
}

/// `x̂′ = diag(Q(q_k))` and `π̂′ = −iℏ ∂/∂Q = (1 + 3λQ²) π̂`.
pub fn deformed_position_momentum(g: &Grid1D, t: &KTransform, hbar: f64, kind: Derivative) -> (GridOperator, GridOperator) {
    let (_, p) = position_momentum(g, hbar, kind);
    let xq = GridOperator::diagonal(*g, |q| c(deformed_coordinate(t, q)));
    let stretch = GridOperator::diagonal(*g, |q| {
        let big = deformed_coordinate(t, q);
        c(1.0 + 3.0 * t.lambda() * big * big)
    });
    (xq, stretch.mul(&p))
}

/// `⟨ψ|[x̂, π̂]|ψ⟩ / (iℏ⟨ψ|ψ⟩)` in the `dq` inner product.
pub fn ccr_expectation(g: &Grid1D, hbar: f64, kind: Derivative, psi: &CVector) -> Complex64 {
    let (x, p) = position_momentum(g, hbar, kind);
    let comm = x.commutator(&p);
    let m = Measure::Lebesgue;
    inner(g, &m, psi, &comm.apply(psi)) / (I * hbar * inner(g, &m, psi, psi))
}

/// `6ℏλQ(1 + 3λQ²)⁻²`; `π̂†′ − π̂` is `i` times this multiplication operator.
pub fn adjoint_mismatch_profile(t: &KTransform, hbar: f64, q: f64) -> f64 {
    let big = deformed_coordinate(t, q);
    let l = t.lambda();
    6.0 * hbar * l * big / (1.0 + 3.0 * l * big * big).powi(2)
}

/// Relative residual `max_ψ |(π̂†′ − π̂)ψ − iσ·mψ| / |ψ|` over normalized
/// test states, comparing against the multiplication operator
/// `i σ 6ℏλQ(1 + 3λQ²)⁻²`. Norms use `dq`.
pub fn adjoint_mismatch_residual(g: &Grid1D, t: &KTransform, hbar: f64, sign: f64, tests: &[CVector]) -> f64 {
    let (_, p) = position_momentum(g, hbar, Derivative::Central);
    let pd = p.adjoint_wrt(&Measure::Deformed(*t));
    let diff = pd.sub(&p);
    let target = GridOperator::diagonal(*g, |q| I * (sign * adjoint_mismatch_profile(t, hbar, q)));
    let m = Measure::Lebesgue;
    tests
        .iter()
        .map(|psi| {
            let psi = normalized(g, &m, psi);
            norm(g, &m, &(diff.apply(&psi) - target.apply(&psi)))
        })
        .fold(0.0, f64::max)
}

/// Gaussians of width `0.07X` centred at `{0, ±0.1X, ±0.2X}`, all well
/// inside the periodic box.
pub fn interior_gaussians(g: &Grid1D) -> Vec<CVector> {
    let x = g.extent();
    [-0.2, -0.1, 0.0, 0.1, 0.2].iter().map(|f| g.gaussian(f * x, 0.07 * x, 0.0)).collect()
}

/// Gaussians of width `0.08X` centred at `{0, 0.15X, 0.3X}`, drifting into
/// the region where the two measures differ most.
pub fn drifting_gaussians(g: &Grid1D) -> Vec<CVector> {
    let x = g.extent();
    [0.0, 0.15, 0.3].iter().map(|f| g.gaussian(f * x, 0.08 * x, 0.0)).collect()
}

/// Largest deviation of `‖ψ‖_{dQ}` from 1 over `dq`-normalized states.
pub fn non_isometry_witness(g: &Grid1D, t: &KTransform, tests: &[CVector]) -> f64 {
    let dq = Measure::Lebesgue;
    let dqq = Measure::Deformed(*t);
    tests
        .iter()
        .map(|psi| (norm(g, &dqq, &normalized(g, &dq, psi)) - 1.0).abs())
        .fold(0.0, f64::max)
}

/// Action of `[π̂, π̂†′]` on test states.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NonClosure {
    /// `max_ψ ‖Cψ‖/‖ψ‖` over the test states (`dQ` norms).
    pub norm: f64,
    /// Largest part of `Cψ` left after projecting on `span{ψ, x̂ψ, π̂ψ}`,
    /// relative to `‖ψ‖`.
    pub outside_span: f64,
}

/// The commutator `[π̂, π̂†′]`, a new operator (multiplication by a
/// non-affine function of `q`), evaluated on test states.
pub fn non_closure_witness(g: &Grid1D, t: &KTransform, hbar: f64, tests: &[CVector]) -> NonClosure {
    let m = Measure::Deformed(*t);
    let (x, p) = position_momentum(g, hbar, Derivative::Central);
    let pd = p.adjoint_wrt(&m);
    let comm = p.commutator(&pd);
    let mut out = NonClosure { norm: 0.0, outside_span: 0.0 };
    for psi in tests {
        let psi = normalized(g, &m, psi);
        let cpsi = comm.apply(&psi);
        out.norm = out.norm.max(norm(g, &m, &cpsi));
        let basis = [psi.clone(), x.apply(&psi), p.apply(&psi)];
        out.outside_span = out.outside_span.max(norm(g, &m, &residual_after_projection(g, &m, &cpsi, &basis)));
    }
    out
}

/// `v` minus its orthogonal projection onto `span(basis)` (Gram–Schmidt).
fn residual_after_projection(g: &Grid1D, m: &Measure, v: &CVector, basis: &[CVector]) -> CVector {
    let mut ortho: Vec<CVector> = Vec::new();
    for b in basis {
        let mut e = b.clone();
        for o in &ortho {
            e -= o * inner(g, m, o, &e);
        }
        let n = norm(g, m, &e);
        if n > 1e-12 {
            ortho.push(e / c(n));
        }
    }
    let mut r = v.clone();
    for o in &ortho {
        r -= o * inner(g, m, o, &r);
    }
    r
}

/// Ladder operators and ground state of one realization.
#[derive(Debug, Clone)]
pub struct FockLadder {
    pub lower: GridOperator,
    pub raise: GridOperator,
    pub measure: Measure,
    /// Normalized in `measure`.
    pub ground: CVector,
    pub smallest_singular_values: (f64, f64),
}

impl FockLadder {
    /// `|n⟩ ∝ (a†)ⁿ|0⟩`, normalized in the ladder's measure.
    pub fn state(&self, level: usize) -> CVector {
        let g = self.lower.grid;
        let mut v = self.ground.clone();
        for _ in 0..level {
            v = normalized(&g, &self.measure, &self.raise.apply(&v));
        }
        v
    }

    /// `⟨ψ|[a, a†]|ψ⟩/⟨ψ|ψ⟩` in the ladder's measure.
    pub fn commutator_expectation(&self, psi: &CVector) -> Complex64 {
        let g = self.lower.grid;
        let comm = self.lower.commutator(&self.raise);
        inner(&g, &self.measure, psi, &comm.apply(psi)) / inner(&g, &self.measure, psi, psi)
    }
}

/// `a = (x̂ + iπ̂)/√(2ℏ)` with `a†` its adjoint in `measure`. For the
/// deformed measure the primed pair `(x̂′, π̂′)` is used. The ground state is
/// the right singular vector of the smallest singular value of `a`.
pub fn fock_ladder(g: &Grid1D, hbar: f64, measure: Measure) -> Result<FockLadder> {
    let (x, p) = match &measure {
        Measure::Lebesgue => position_momentum(g, hbar, Derivative::Central),
        Measure::Deformed(t) => deformed_position_momentum(g, t, hbar, Derivative::Central),
    };
    let lower = x.add(&p.scale(I)).scale(c(1.0 / (2.0 * hbar).sqrt()));
    let raise = lower.adjoint_wrt(&measure);
    // Right singular vectors in the weighted inner product: factor W^{1/2}.
    let w: Vec<f64> = measure.weights(g).iter().map(|v| (v * g.delta()).sqrt()).collect();
    let mut a_w = lower.matrix.clone();
    for r in 0..g.n {
        for col in 0..g.n {
            a_w[(r, col)] *= w[r] / w[col];
        }
    }
    let svd = a_w.svd(false, true);
    let vt = svd.v_t.ok_or_else(|| Error::Sampling("SVD did not return singular vectors".into()))?;
    let mut order: Vec<usize> = (0..g.n).collect();
    order.sort_by(|&i, &j| svd.singular_values[i].total_cmp(&svd.singular_values[j]));
    let (s0, s1) = (svd.singular_values[order[0]], svd.singular_values[order[1]]);
    if (s1 - s0).abs() < 1e-8 {
        return Err(Error::DegenerateKernel { smallest: s0, next: s1 });
    }
    let row = vt.row(order[0]);
    let mut ground = CVector::from_fn(g.n, |k, _| row[k].conj() / c(w[k]));
    // Fix the global phase so the state is real and positive at its peak.
    let peak = (0..g.n).max_by(|&i, &j| ground[i].norm().total_cmp(&ground[j].norm())).unwrap_or(0);
    let phase = ground[peak] / c(ground[peak].norm());
    ground /= phase;
    let ground = normalized(g, &measure, &ground);
    Ok(FockLadder { lower, raise, measure, ground, smallest_singular_values: (s0, s1) })
}

/// Periodic `N × N` grid on `[−X, X)²`; index `i·N + j` is `(Q¹_i, Q²_j)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid2D {
    pub axis: Grid1D,
}

impl Grid2D {
    pub fn new(n: usize, extent: f64) -> Result<Self> {
        Ok(Self { axis: Grid1D::new(n, extent)? })
    }

    pub fn len(&self) -> usize {
        self.axis.n * self.axis.n
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn gaussian(&self, center: (f64, f64), width: f64, k0: (f64, f64)) -> CVector {
        let a = self.axis.gaussian(center.0, width, k0.0);
        let b = self.axis.gaussian(center.1, width, k0.1);
        let n = self.axis.n;
        CVector::from_fn(self.len(), |idx, _| a[idx / n] * b[idx % n])
    }

    pub fn inner(&self, phi: &CVector, psi: &CVector) -> Complex64 {
        let d = self.axis.delta();
        phi.dotc(psi) * (d * d)
    }
}

/// `X̂ = (Û¹, Û², Q̂¹, Q̂²)` on a 2D grid, applied matrix-free: `Q̂ⁱ`
/// multiply by the grid coordinate, `Ûⁱ = −iℏ ∂/∂Qⁱ` by periodic central
/// differences.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PlaneOperators {
    pub grid: Grid2D,
    pub hbar: f64,
}

impl PlaneOperators {
    pub fn new(grid: Grid2D, hbar: f64) -> Self {
        Self { grid, hbar }
    }

    /// Apply the `a`-th component of `X̂`.
    pub fn apply_base(&self, a: usize, psi: &CVector) -> CVector {
        let n = self.grid.axis.n;
        let g = &self.grid.axis;
        match a {
            0 | 1 => {
                let h = Complex64::new(0.0, -self.hbar / (2.0 * g.delta()));
                CVector::from_fn(self.grid.len(), |idx, _| {
                    let (i, j) = (idx / n, idx % n);
                    let (p, m) = if a == 0 {
                        (((i + 1) % n) * n + j, ((i + n - 1) % n) * n + j)
                    } else {
                        (i * n + (j + 1) % n, i * n + (j + n - 1) % n)
                    };
                    (psi[p] - psi[m]) * h
                })
            }
            2 => CVector::from_fn(self.grid.len(), |idx, _| psi[idx] * g.point(idx / n)),
            3 => CVector::from_fn(self.grid.len(), |idx, _| psi[idx] * g.point(idx % n)),
            _ => panic!("operator index {a} out of range"),
        }
    }

    /// `Σ_b coeffs[b] X̂_b ψ`.
    pub fn apply_linear(&self, coeffs: &[f64; 4], psi: &CVector) -> CVector {
        let mut out = CVector::zeros(self.grid.len());
        for (b, &cb) in coeffs.iter().enumerate() {
            if cb != 0.0 {
                out += self.apply_base(b, psi) * c(cb);
            }
        }
        out
    }

    /// `Ĥ = ½[(Û¹ + (B/2)Q̂²)² + (Û² − (B/2)Q̂¹)²]` built from the operator
    /// rows of `f_tilde` (the identity gives the untransformed Hamiltonian).
    pub fn apply_hamiltonian(&self, b: f64, f_tilde: &Matrix4<f64>, psi: &CVector) -> CVector {
        let row = |a: usize| [f_tilde[(a, 0)], f_tilde[(a, 1)], f_tilde[(a, 2)], f_tilde[(a, 3)]];
        let comb = |x: [f64; 4], y: [f64; 4], s: f64| [x[0] + s * y[0], x[1] + s * y[1], x[2] + s * y[2], x[3] + s * y[3]];
        let pi1 = comb(row(0), row(3), b / 2.0);
        let pi2 = comb(row(1), row(2), -b / 2.0);
        let t1 = self.apply_linear(&pi1, &self.apply_linear(&pi1, psi));
        let t2 = self.apply_linear(&pi2, &self.apply_linear(&pi2, psi));
        (t1 + t2) * c(0.5)
    }
}

/// `g = diag(1, 1, −1, −1)`.
fn metric_g() -> Matrix4<f64> {
    Matrix4::from_diagonal(&nalgebra::Vector4::new(1.0, 1.0, -1.0, -1.0))
}

/// `F̃(t) = g F(t)ᵀ g`: row `a` gives `X̂_a(t)` as a combination of
/// `X̂ = (Û¹, Û², Q̂¹, Q̂²)`.
pub fn heisenberg_evolution(sys: &MagneticSystem, t: f64) -> Matrix4<f64> {
    let g = metric_g();
    g * sys.f(t).transpose() * g
}

/// `d/dt F̃ at 0 = g Gᵀ g`, the coefficient matrix of `(i/ℏ)[X̂, Ĥ]`.
pub fn heisenberg_generator(sys: &MagneticSystem) -> Matrix4<f64> {
    let g = metric_g();
    g * sys.g().transpose() * g
}

/// Relative residuals `|(i/ℏ)[X̂_a, Ĥ]ψ − Σ_b (gGᵀg)_ab X̂_b ψ| / |rhs|`.
pub fn hamiltonian_commutator_residuals(ops: &PlaneOperators, sys: &MagneticSystem, psi: &CVector) -> [f64; 4] {
    let gen = heisenberg_generator(sys);
    let id = Matrix4::identity();
    let h_psi = ops.apply_hamiltonian(sys.b, &id, psi);
    let mut out = [0.0; 4];
    for (a, slot) in out.iter_mut().enumerate() {
        let lhs = (ops.apply_base(a, &h_psi) - ops.apply_hamiltonian(sys.b, &id, &ops.apply_base(a, psi))) * (I / ops.hbar);
        let coeffs = [gen[(a, 0)], gen[(a, 1)], gen[(a, 2)], gen[(a, 3)]];
        let rhs = ops.apply_linear(&coeffs, psi);
        let scale = ops.grid.inner(&rhs, &rhs).re.sqrt().max(1e-300);
        let d = &lhs - &rhs;
        *slot = ops.grid.inner(&d, &d).re.sqrt() / scale;
    }
    out
}

/// `⟨ψ|Ĥ(t)|ψ⟩/⟨ψ|ψ⟩` with `Ĥ(t)` assembled from the evolved operators.
pub fn hamiltonian_expectation(ops: &PlaneOperators, sys: &MagneticSystem, t: f64, psi: &CVector) -> f64 {
    let ft = heisenberg_evolution(sys, t);
    let h = ops.apply_hamiltonian(sys.b, &ft, psi);
    (ops.grid.inner(psi, &h) / ops.grid.inner(psi, psi)).re
}
