//! Linear structures induced by diffeomorphisms.
//!
//! Given an invertible smooth map `φ: R^n → M`, the operations
//!
//! ```text
//! u +φ v = φ(φ⁻¹(u) + φ⁻¹(v))        λ ·φ u = φ(λ φ⁻¹(u))
//! ```
//!
//! satisfy every vector-space axiom on `M`. The zero of the new structure is
//! `φ(0)`, and its dilation (Liouville) field is the pushforward of
//! `Δ₀ = wⁱ∂/∂wⁱ`, namely `Δ(u) = Dφ(w)·w` with `w = φ⁻¹(u)`.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::linalg::fd_jacobian;

/// A point of `R^n`, in whichever chart the caller is working.
pub type Point = DVector<f64>;

/// Numerical tolerances. Every value is relative: comparisons at a point `u`
/// are scaled by `max(1, |u|∞)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerances {
    /// Round trip `φ⁻¹(φ(x)) = x`.
    pub round: f64,
    /// Agreement of analytic derivatives with finite differences.
    pub fd: f64,
    /// Associativity, commutativity, distributivity, scalar composition.
    pub assoc: f64,
    /// Linearity test `Δ(u) = u`.
    pub lin: f64,
    /// One-parameter group law of the dilation flow.
    pub flow: f64,
    /// Margin kept from the boundary of open domains.
    pub domain_margin: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            round: 1e-12,
            fd: 1e-6,
            assoc: 1e-9,
            lin: 1e-9,
            flow: 1e-8,
            domain_margin: 1e-12,
        }
    }
}

impl Tolerances {
    /// Multiply every comparison tolerance by `factor` (the domain margin is
    /// geometric and stays fixed).
    pub fn scaled(&self, factor: f64) -> Self {
        Self {
            round: self.round * factor,
            fd: self.fd * factor,
            assoc: self.assoc * factor,
            lin: self.lin * factor,
            flow: self.flow * factor,
            domain_margin: self.domain_margin,
        }
    }
}

/// Relative distance `|a − b|∞ / max(1, |a|∞)`.
pub fn relative_diff(a: &Point, b: &Point) -> f64 {
    let scale = a.amax().max(1.0);
    (a - b).amax() / scale
}

/// An invertible smooth map `φ` from a parameter space `R^dim` onto its image.
///
/// Only `forward` is mandatory. The inverse defaults to damped Newton
/// iteration and the Jacobian to central finite differences.
pub trait Diffeo: Send + Sync {
    fn dim(&self) -> usize;

    /// `φ(w)`.
    fn forward(&self, w: &Point) -> Point;

    /// `φ⁻¹(u)`.
    fn inverse(&self, u: &Point) -> Result<Point> {
        newton_inverse(self, u, &NewtonOptions::default())
    }

    /// `Dφ(w)`, the matrix `∂φⁱ/∂wʲ` evaluated at a preimage point.
    fn jacobian(&self, w: &Point) -> DMatrix<f64> {
        fd_jacobian(|x| self.forward(x), w, 1e-6)
    }

    /// Whether `u` belongs to the image `φ(R^dim)`.
    fn in_image(&self, u: &Point) -> bool {
        u.len() == self.dim() && u.iter().all(|x| x.is_finite())
    }

    /// Whether `w` belongs to the domain of `φ`.
    fn in_preimage(&self, w: &Point) -> bool {
        w.len() == self.dim() && w.iter().all(|x| x.is_finite())
    }

    fn domain_note(&self) -> &str {
        "all of R^n"
    }
}

impl<T: Diffeo + ?Sized> Diffeo for Box<T> {
    fn dim(&self) -> usize {
        (**self).dim()
    }
    fn forward(&self, w: &Point) -> Point {
        (**self).forward(w)
    }
    fn inverse(&self, u: &Point) -> Result<Point> {
        (**self).inverse(u)
    }
    fn jacobian(&self, w: &Point) -> DMatrix<f64> {
        (**self).jacobian(w)
    }
    fn in_image(&self, u: &Point) -> bool {
        (**self).in_image(u)
    }
    fn in_preimage(&self, w: &Point) -> bool {
        (**self).in_preimage(w)
    }
    fn domain_note(&self) -> &str {
        (**self).domain_note()
    }
}

#[derive(Debug, Clone, Copy)]
pub struct NewtonOptions {
    pub max_iterations: usize,
    /// Converged once `|φ(w) − u|∞ ≤ tolerance · max(1, |u|∞)`.
    pub tolerance: f64,
}

impl Default for NewtonOptions {
    fn default() -> Self {
        Self { max_iterations: 50, tolerance: 1e-12 }
    }
}

/// Solve `φ(w) = u` by damped Newton iteration started at `w = u`.
pub fn newton_inverse<D: Diffeo + ?Sized>(d: &D, u: &Point, opts: &NewtonOptions) -> Result<Point> {
    if !d.in_image(u) {
        return Err(Error::Domain(format!("point {:?} is outside the image ({})", u.as_slice(), d.domain_note())));
    }
    let target = opts.tolerance * u.amax().max(1.0);
    let mut w = u.clone();
    let mut residual = d.forward(&w) - u;
    for _ in 0..opts.max_iterations {
        let r_norm = residual.amax();
        if r_norm <= target {
            return Ok(w);
        }
        let jac = d.jacobian(&w);
        let step = jac
            .lu()
            .solve(&(-&residual))
            .ok_or_else(|| Error::Domain("singular Jacobian during Newton inverse".into()))?;
        let mut alpha = 1.0;
        let mut accepted = false;
        for _ in 0..30 {
            let trial = &w + &step * alpha;
            if d.in_preimage(&trial) {
                let r_trial = d.forward(&trial) - u;
                if r_trial.amax() < r_norm {
                    w = trial;
                    residual = r_trial;
                    accepted = true;
                    break;
                }
            }
            alpha *= 0.5;
        }
        if !accepted {
            break;
        }
    }
    if residual.amax() <= target {
        Ok(w)
    } else {
        Err(Error::Domain(format!(
            "Newton inverse did not converge (residual {:e})",
            residual.amax()
        )))
    }
}

type VecMap = Box<dyn Fn(&Point) -> Point + Send + Sync>;
type FallibleVecMap = Box<dyn Fn(&Point) -> Result<Point> + Send + Sync>;
type MatMap = Box<dyn Fn(&Point) -> DMatrix<f64> + Send + Sync>;

/// A diffeomorphism assembled from closures. Missing pieces fall back to the
/// trait defaults (Newton inverse, finite-difference Jacobian).
pub struct FnDiffeo {
    dim: usize,
    forward: VecMap,
    inverse: Option<FallibleVecMap>,
    jacobian: Option<MatMap>,
    note: String,
}

impl FnDiffeo {
    pub fn new(dim: usize, forward: impl Fn(&Point) -> Point + Send + Sync + 'static) -> Self {
        Self { dim, forward: Box::new(forward), inverse: None, jacobian: None, note: "all of R^n".into() }
    }

    pub fn with_inverse(mut self, inverse: impl Fn(&Point) -> Result<Point> + Send + Sync + 'static) -> Self {
        self.inverse = Some(Box::new(inverse));
        self
    }

    pub fn with_jacobian(mut self, jacobian: impl Fn(&Point) -> DMatrix<f64> + Send + Sync + 'static) -> Self {
        self.jacobian = Some(Box::new(jacobian));
        self
    }

    pub fn with_note(mut self, note: impl Into<String>) -> Self {
        self.note = note.into();
        self
    }
}

impl Diffeo for FnDiffeo {
    fn dim(&self) -> usize {
        self.dim
    }
    fn forward(&self, w: &Point) -> Point {
        (self.forward)(w)
    }
    fn inverse(&self, u: &Point) -> Result<Point> {
        match &self.inverse {
            Some(inv) => inv(u),
            None => newton_inverse(self, u, &NewtonOptions::default()),
        }
    }
    fn jacobian(&self, w: &Point) -> DMatrix<f64> {
        match &self.jacobian {
            Some(j) => j(w),
            None => fd_jacobian(|x| self.forward(x), w, 1e-6),
        }
    }
    fn domain_note(&self) -> &str {
        &self.note
    }
}

/// The identity map of `R^n`; it induces the standard linear structure.
#[derive(Debug, Clone, Copy)]
pub struct IdentityDiffeo(pub usize);

impl Diffeo for IdentityDiffeo {
    fn dim(&self) -> usize {
        self.0
    }
    fn forward(&self, w: &Point) -> Point {
        w.clone()
    }
    fn inverse(&self, u: &Point) -> Result<Point> {
        Ok(u.clone())
    }
    fn jacobian(&self, _w: &Point) -> DMatrix<f64> {
        DMatrix::identity(self.0, self.0)
    }
}

/// Sampled checks of the three `Diffeo` invariants.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct DiffeoReport {
    pub max_round_trip: f64,
    pub max_jacobian_fd: f64,
    pub min_abs_det: f64,
}

/// Check round trip, Jacobian against finite differences (step `1e-6`) and
/// non-vanishing determinant at the given preimage points.
pub fn check_diffeo<D: Diffeo + ?Sized>(d: &D, preimages: &[Point]) -> Result<DiffeoReport> {
    let mut report = DiffeoReport { min_abs_det: f64::INFINITY, ..Default::default() };
    for w in preimages {
        let u = d.forward(w);
        let back = d.inverse(&u)?;
        report.max_round_trip = report.max_round_trip.max(relative_diff(w, &back));
        let jac = d.jacobian(w);
        let fd = fd_jacobian(|x| d.forward(x), w, 1e-6);
        let scale = jac.amax().max(1.0);
        report.max_jacobian_fd = report.max_jacobian_fd.max((&jac - fd).amax() / scale);
        report.min_abs_det = report.min_abs_det.min(jac.determinant().abs());
    }
    Ok(report)
}

/// The linear structure `(+φ, ·φ)` transported by a diffeomorphism.
#[derive(Debug, Clone)]
pub struct LinearStructure<D> {
    diffeo: D,
    origin: Point,
}

impl<D: Diffeo> LinearStructure<D> {
    pub fn new(diffeo: D) -> Result<Self> {
        let origin = diffeo.forward(&Point::zeros(diffeo.dim()));
        if !diffeo.in_image(&origin) {
            return Err(Error::Domain("φ(0) is outside the declared image".into()));
        }
        Ok(Self { diffeo, origin })
    }

    pub fn diffeo(&self) -> &D {
        &self.diffeo
    }

    /// The zero of the deformed structure, `φ(0)`.
    pub fn origin(&self) -> &Point {
        &self.origin
    }

    pub fn dim(&self) -> usize {
        self.diffeo.dim()
    }

    fn pull(&self, u: &Point) -> Result<Point> {
        if !self.diffeo.in_image(u) {
            return Err(Error::Domain(format!(
                "point {:?} is outside the image ({})",
                u.as_slice(),
                self.diffeo.domain_note()
            )));
        }
        self.diffeo.inverse(u)
    }

    fn push(&self, w: &Point) -> Result<Point> {
        if !self.diffeo.in_preimage(w) {
            return Err(Error::Domain(format!("preimage point {:?} is outside the domain of φ", w.as_slice())));
        }
        let u = self.diffeo.forward(w);
        if !self.diffeo.in_image(&u) {
            return Err(Error::Domain(format!(
                "result {:?} falls outside the image ({})",
                u.as_slice(),
                self.diffeo.domain_note()
            )));
        }
        Ok(u)
    }

    /// `u +φ v`.
    pub fn add(&self, u: &Point, v: &Point) -> Result<Point> {
        let w = self.pull(u)? + self.pull(v)?;
        self.push(&w)
    }

    /// `λ ·φ u`.
    pub fn scale(&self, lambda: f64, u: &Point) -> Result<Point> {
        let w = self.pull(u)? * lambda;
        self.push(&w)
    }

    /// `(−1) ·φ u`.
    pub fn negate(&self, u: &Point) -> Result<Point> {
        self.scale(-1.0, u)
    }

    /// `u −φ v = u +φ ((−1) ·φ v)`.
    pub fn subtract(&self, u: &Point, v: &Point) -> Result<Point> {
        let neg = self.negate(v)?;
        self.add(u, &neg)
    }

    /// The dilation flow `Ψ(u, t) = e^t ·φ u`.
    pub fn flow(&self, u: &Point, t: f64) -> Result<Point> {
        self.scale(t.exp(), u)
    }

    /// `Δ(u) = Dφ(w)·w` with `w = φ⁻¹(u)`.
    pub fn liouville_field(&self, u: &Point) -> Result<Point> {
        let w = self.pull(u)?;
        Ok(self.diffeo.jacobian(&w) * &w)
    }

    /// Whether `φ_*Δ₀ = Δ₀` at every sample, i.e. the structure coincides with
    /// the standard one there.
    pub fn is_linear(&self, samples: &[Point], tol: &Tolerances) -> Result<Linearity> {
        let mut max_residual = 0.0_f64;
        for u in samples {
            let delta = self.liouville_field(u)?;
            max_residual = max_residual.max(relative_diff(u, &delta));
        }
        Ok(Linearity { linear: max_residual <= tol.lin, max_residual, empty: samples.is_empty() })
    }
}

/// Outcome of [`LinearStructure::is_linear`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Linearity {
    pub linear: bool,
    pub max_residual: f64,
    /// Set when no samples were supplied; `linear` is then vacuously true.
    pub empty: bool,
}

/// One random draw for the axiom suite: three points and two scalars.
#[derive(Debug, Clone)]
pub struct AxiomSample {
    pub u: Point,
    pub v: Point,
    pub w: Point,
    pub a: f64,
    pub b: f64,
}

/// Maximum relative residual of each vector-space law over a sample set.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct AxiomReport {
    pub samples: usize,
    pub associativity: f64,
    pub commutativity: f64,
    pub distributivity: f64,
    pub scalar_composition: f64,
    pub additive_identity: f64,
    pub zero_scalar: f64,
    pub unit_scalar: f64,
    pub self_difference: f64,
    pub flow_group: f64,
    pub liouville_vs_flow: f64,
}

impl AxiomReport {
    /// `(law, residual, tolerance)` rows in a fixed order.
    pub fn rows(&self, tol: &Tolerances) -> Vec<(&'static str, f64, f64)> {
        vec![
            ("associativity", self.associativity, tol.assoc),
            ("commutativity", self.commutativity, tol.assoc),
            ("distributivity", self.distributivity, tol.assoc),
            ("scalar_composition", self.scalar_composition, tol.assoc),
            ("additive_identity", self.additive_identity, tol.assoc),
            ("zero_scalar", self.zero_scalar, tol.assoc),
            ("unit_scalar", self.unit_scalar, tol.assoc),
            ("self_difference", self.self_difference, tol.assoc),
            ("flow_group", self.flow_group, tol.flow),
            ("liouville_vs_flow", self.liouville_vs_flow, tol.fd),
        ]
    }

    pub fn passes(&self, tol: &Tolerances) -> bool {
        self.rows(tol).iter().all(|(_, r, t)| r <= t)
    }
}

/// Run every vector-space law on the supplied samples.
pub fn check_axioms<D: Diffeo>(s: &LinearStructure<D>, samples: &[AxiomSample]) -> Result<AxiomReport> {
    let mut r = AxiomReport { samples: samples.len(), ..Default::default() };
    let upd = |slot: &mut f64, a: &Point, b: &Point| *slot = slot.max(relative_diff(a, b));
    let h = 1e-5;
    for smp in samples {
        let (u, v, w) = (&smp.u, &smp.v, &smp.w);

        let uv = s.add(u, v)?;
        let vw = s.add(v, w)?;
        upd(&mut r.associativity, &s.add(&uv, w)?, &s.add(u, &vw)?);
        upd(&mut r.commutativity, &uv, &s.add(v, u)?);

        let lhs = s.scale(smp.a, &uv)?;
        let rhs = s.add(&s.scale(smp.a, u)?, &s.scale(smp.a, v)?)?;
        upd(&mut r.distributivity, &lhs, &rhs);

        let lhs = s.scale(smp.a * smp.b, u)?;
        let rhs = s.scale(smp.a, &s.scale(smp.b, u)?)?;
        upd(&mut r.scalar_composition, &lhs, &rhs);

        upd(&mut r.additive_identity, &s.add(u, s.origin())?, u);
        upd(&mut r.zero_scalar, &s.scale(0.0, u)?, s.origin());
        upd(&mut r.unit_scalar, &s.scale(1.0, u)?, u);
        upd(&mut r.self_difference, &s.subtract(u, u)?, s.origin());

        let (t, tp) = (0.5 * smp.a, 0.5 * smp.b);
        let lhs = s.flow(&s.flow(u, tp)?, t)?;
        let rhs = s.flow(u, t + tp)?;
        upd(&mut r.flow_group, &lhs, &rhs);

        let fd = (s.flow(u, h)? - s.flow(u, -h)?) / (2.0 * h);
        upd(&mut r.liouville_vs_flow, &s.liouville_field(u)?, &fd);
    }
    Ok(r)
}
