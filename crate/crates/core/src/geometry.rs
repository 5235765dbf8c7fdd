//! Pointwise geometric tensors on `R^{2n}` and their pushforwards.
//!
//! Components are stored as matrices in the `(q, p)` chart, with
//! `ω(v₁, v₂) = v₁ᵀ ω v₂`, `g(v₁, v₂) = v₁ᵀ g v₂`, `(Jv)ⁱ = Jⁱ_k vᵏ` and
//! `{f, h} = df ᵀ Λ dh`. The Jacobian `A = ∂(q, p)/∂(Q, P)` maps new-chart
//! tangent components to old-chart ones, so a constant tensor written in the
//! new chart reads in the old one as
//!
//! ```text
//! J′ = A J A⁻¹,   g′ = A⁻ᵀ g A⁻¹,   ω′ = A⁻ᵀ ω A⁻¹,   Λ′ = A Λ Aᵀ,   Δ′ = A w.
//! ```

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linalg::{canonical_symplectic, max_abs};
use crate::linstruct::{Diffeo, Point};

/// Below this `|det A|` a pushforward is refused.
pub const SINGULAR_DET: f64 = 1e-14;

/// Values of `(Δ, ω, J, g, Λ)` at one point, plus `D = det A`.
#[derive(Debug, Clone, PartialEq)]
pub struct TensorFrame {
    pub point: Point,
    pub delta: DVector<f64>,
    pub omega: DMatrix<f64>,
    pub j: DMatrix<f64>,
    pub g: DMatrix<f64>,
    pub lambda: DMatrix<f64>,
    pub d: f64,
}

/// The constant tensors of the standard structure: `ω = dqⁱ∧dpᵢ`, `g`
/// Euclidean, `J` with `J² = −I`, `Λ = (−ω)⁻¹` and `Δ = qⁱ∂/∂qⁱ + pᵢ∂/∂pᵢ`.
///
/// # Panics
///
/// If the point has odd dimension.
pub fn standard_frame(point: &Point) -> TensorFrame {
    assert!(point.len().is_multiple_of(2), "phase-space points have even dimension");
    let n = point.len() / 2;
    let j = canonical_symplectic(n);
    TensorFrame {
        point: point.clone(),
        delta: point.clone(),
        omega: j.clone(),
        lambda: j.clone(),
        j,
        g: DMatrix::identity(2 * n, 2 * n),
        d: 1.0,
    }
}

/// Primed tensors at `point` (old-chart coordinates) by matrix algebra, for
/// any even dimension.
pub fn pushforward_frame_general<D: Diffeo + ?Sized>(d: &D, point: &Point) -> Result<TensorFrame> {
    let (w, a) = preimage_and_jacobian(d, point)?;
    frame_from_jacobian(point, &w, &a)
}

/// Same as [`pushforward_frame_general`] using the explicit 2×2 entries.
/// Writing `A = [[a, b], [d, c]]` and `D = ac − bd`:
///
/// ```text
/// J′ = D⁻¹ [[−(ad + bc), a² + b²], [−(c² + d²), ad + bc]]
/// g′ = D⁻² [[c² + d², −(ad + bc)], [−(ad + bc), a² + b²]]
/// ω′ = D⁻¹ ω,   Λ′ = D Λ.
/// ```
pub fn pushforward_frame_2d<D: Diffeo + ?Sized>(d: &D, point: &Point) -> Result<TensorFrame> {
    if point.len() != 2 {
        return Err(Error::InvalidParameter(format!("2D fast path needs a 2D point, got dim {}", point.len())));
    }
    let (w, jac) = preimage_and_jacobian(d, point)?;
    let (a, b, dd, c) = (jac[(0, 0)], jac[(0, 1)], jac[(1, 0)], jac[(1, 1)]);
    let det = a * c - b * dd;
    if det.is_nan() || det.abs() < SINGULAR_DET {
        return Err(Error::SingularJacobian { det: det.abs() });
    }
    let s = a * dd + b * c;
    let omega0 = canonical_symplectic(1);
    Ok(TensorFrame {
        point: point.clone(),
        delta: &jac * &w,
        j: DMatrix::from_row_slice(2, 2, &[-s, a * a + b * b, -(c * c + dd * dd), s]) / det,
        g: DMatrix::from_row_slice(2, 2, &[c * c + dd * dd, -s, -s, a * a + b * b]) / (det * det),
        omega: &omega0 / det,
        lambda: omega0 * det,
        d: det,
    })
}

/// Dispatches to the 2D fast path in dimension two.
pub fn pushforward_frame<D: Diffeo + ?Sized>(d: &D, point: &Point) -> Result<TensorFrame> {
    if point.len() == 2 {
        pushforward_frame_2d(d, point)
    } else {
        pushforward_frame_general(d, point)
    }
}

fn preimage_and_jacobian<D: Diffeo + ?Sized>(d: &D, point: &Point) -> Result<(Point, DMatrix<f64>)> {
    if !point.len().is_multiple_of(2) || point.len() != d.dim() {
        return Err(Error::InvalidParameter(format!(
            "point of dim {} does not fit a {}-dimensional phase space",
            point.len(),
            d.dim()
        )));
    }
    let w = d.inverse(point)?;
    let a = d.jacobian(&w);
    Ok((w, a))
}

/// Build the primed frame from `w = φ⁻¹(point)` and `A = Dφ(w)`.
pub fn frame_from_jacobian(point: &Point, w: &Point, a: &DMatrix<f64>) -> Result<TensorFrame> {
    let det = a.determinant();
    if det.is_nan() || det.abs() < SINGULAR_DET {
        return Err(Error::SingularJacobian { det: det.abs() });
    }
    let a_inv = a.clone().try_inverse().ok_or(Error::SingularJacobian { det: det.abs() })?;
    let n = point.len() / 2;
    let omega0 = canonical_symplectic(n);
    let lambda0 = -omega0.clone().try_inverse().expect("canonical matrix is invertible");
    Ok(TensorFrame {
        point: point.clone(),
        delta: a * w,
        j: a * &omega0 * &a_inv,
        g: a_inv.transpose() * &a_inv,
        omega: a_inv.transpose() * &omega0 * &a_inv,
        lambda: a * lambda0 * a.transpose(),
        d: det,
    })
}

/// `{f, h} = df ᵀ Λ dh` from gradients at `frame.point`.
pub fn poisson_bracket(frame: &TensorFrame, df: &DVector<f64>, dh: &DVector<f64>) -> f64 {
    (df.transpose() * &frame.lambda * dh)[(0, 0)]
}

/// `h(v₁, v₂) = g(v₁, v₂) + i ω(v₁, v₂)`.
pub fn hermitian_product(frame: &TensorFrame, v1: &DVector<f64>, v2: &DVector<f64>) -> Complex64 {
    let re = (v1.transpose() * &frame.g * v2)[(0, 0)];
    let im = (v1.transpose() * &frame.omega * v2)[(0, 0)];
    Complex64::new(re, im)
}

/// Maximum residuals of the compatibility identities.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Compatibility {
    /// `g·J − ω`.
    pub gj_minus_omega: f64,
    /// `J·J + I`.
    pub jj_plus_identity: f64,
    pub omega_antisymmetry: f64,
    pub g_symmetry: f64,
    /// `Λ − (−ω)⁻¹`.
    pub lambda_vs_inverse: f64,
    /// Smallest eigenvalue of the symmetric part of `g`.
    pub g_min_eigenvalue: f64,
    /// `det ω − D⁻²` (dimension 2 only, else 0).
    pub det_omega: f64,
}

impl Compatibility {
    /// All residuals below `tol` and `g` positive definite.
    pub fn passes(&self, tol: f64) -> bool {
        [self.gj_minus_omega, self.jj_plus_identity, self.omega_antisymmetry, self.g_symmetry, self.lambda_vs_inverse, self.det_omega]
            .iter()
            .all(|r| *r <= tol)
            && self.g_min_eigenvalue > 0.0
    }

    pub fn max_residual(&self) -> f64 {
        [self.gj_minus_omega, self.jj_plus_identity, self.omega_antisymmetry, self.g_symmetry, self.lambda_vs_inverse, self.det_omega]
            .into_iter()
            .fold(0.0, f64::max)
    }
}

pub fn compatibility_check(frame: &TensorFrame) -> Compatibility {
    let dim = frame.omega.nrows();
    let id = DMatrix::<f64>::identity(dim, dim);
    let lambda_vs_inverse = match (-&frame.omega).try_inverse() {
        Some(inv) => max_abs(&(&frame.lambda - inv)),
        None => f64::INFINITY,
    };
    let sym = (&frame.g + frame.g.transpose()) * 0.5;
    let g_min_eigenvalue = sym.symmetric_eigenvalues().min();
    let det_omega = if dim == 2 { (frame.omega.determinant() - frame.d.powi(-2)).abs() } else { 0.0 };
    Compatibility {
        gj_minus_omega: max_abs(&(&frame.g * &frame.j - &frame.omega)),
        jj_plus_identity: max_abs(&(&frame.j * &frame.j + id)),
        omega_antisymmetry: max_abs(&(frame.omega.transpose() + &frame.omega)),
        g_symmetry: max_abs(&(&frame.g - frame.g.transpose())),
        lambda_vs_inverse,
        g_min_eigenvalue,
        det_omega,
    }
}

/// `|J(Δ) − J′(Δ′)|∞` at the frame's point: the standard complex structure
/// applied to the standard dilation field against the primed pair.
pub fn oscillator_residual(frame: &TensorFrame) -> f64 {
    let n = frame.point.len() / 2;
    let lhs = canonical_symplectic(n) * &frame.point;
    let rhs = &frame.j * &frame.delta;
    (lhs - rhs).amax()
}

/// Components in the new chart of a vector given in the old chart at
/// `point`, i.e. `A⁻¹ v`.
pub fn to_new_chart<D: Diffeo + ?Sized>(d: &D, point: &Point, v: &DVector<f64>) -> Result<DVector<f64>> {
    let w = d.inverse(point)?;
    let a = d.jacobian(&w);
    let det = a.determinant();
    a.lu().solve(v).ok_or(Error::SingularJacobian { det: det.abs() })
}
