//! Flows of vector fields: fixed-step RK4, integral curves of the deformed
//! coordinate fields, and the charged particle in a constant field.

use nalgebra::{DMatrix, Matrix4, Vector2, Vector3, Vector4};

use crate::catalog::{join6, split6, KTransform, MagneticGauge};
use crate::error::{Error, Result};
use crate::linalg::expm;
use crate::linstruct::Point;

/// Default bound on `|x|∞` past which integration stops.
pub const DEFAULT_BOUND: f64 = 1e12;

/// An initial-value problem `ẋ = field(x)` on `[t0, t1]`.
pub struct FlowProblem<F> {
    pub field: F,
    pub t_span: (f64, f64),
    pub dt: f64,
    pub initial: Point,
    pub bound: f64,
}

impl<F: Fn(&Point) -> Point> FlowProblem<F> {
    pub fn new(field: F, t_span: (f64, f64), dt: f64, initial: Point) -> Self {
        Self { field, t_span, dt, initial, bound: DEFAULT_BOUND }
    }

    pub fn with_bound(mut self, bound: f64) -> Self {
        self.bound = bound;
        self
    }
}

/// Sampled solution, one state per step including both endpoints.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub states: Vec<Point>,
}

impl Trajectory {
    pub fn last(&self) -> &Point {
        self.states.last().expect("trajectories are never empty")
    }

    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }
}

/// Classical RK4 with a fixed step. The span is divided into
/// `n = ⌈(t1 − t0)/dt⌉` equal steps so that the last sample lands on `t1`.
pub fn integrate<F: Fn(&Point) -> Point>(p: &FlowProblem<F>) -> Result<Trajectory> {
    let (t0, t1) = p.t_span;
    if !p.dt.is_finite() || p.dt <= 0.0 {
        return Err(Error::InvalidParameter(format!("step must be positive, got {}", p.dt)));
    }
    if !(t0.is_finite() && t1.is_finite() && t1 >= t0) {
        return Err(Error::InvalidParameter(format!("bad time span [{t0}, {t1}]")));
    }
    let span = t1 - t0;
    let n = if span == 0.0 { 0 } else { ((span / p.dt) - 1e-9).ceil().max(1.0) as usize };
    let h = if n == 0 { 0.0 } else { span / n as f64 };
    let admissible = |x: &Point| x.iter().all(|v| v.is_finite() && v.abs() <= p.bound);
    if !admissible(&p.initial) {
        return Err(Error::NonFiniteState { t: t0 });
    }
    let mut times = Vec::with_capacity(n + 1);
    let mut states = Vec::with_capacity(n + 1);
    let mut x = p.initial.clone();
    times.push(t0);
    states.push(x.clone());
    for i in 1..=n {
        let k1 = (p.field)(&x);
        let k2 = (p.field)(&(&x + &k1 * (0.5 * h)));
        let k3 = (p.field)(&(&x + &k2 * (0.5 * h)));
        let k4 = (p.field)(&(&x + &k3 * h));
        x += (k1 + k2 * 2.0 + k3 * 2.0 + k4) * (h / 6.0);
        let t = if i == n { t1 } else { t0 + i as f64 * h };
        if !admissible(&x) {
            return Err(Error::NonFiniteState { t });
        }
        times.push(t);
        states.push(x.clone());
    }
    Ok(Trajectory { times, states })
}

/// Least-squares slope of `log err` against `log dt`.
pub fn fitted_order(dts: &[f64], errs: &[f64]) -> f64 {
    let xs: Vec<f64> = dts.iter().map(|d| d.ln()).collect();
    let ys: Vec<f64> = errs.iter().map(|e| e.ln()).collect();
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    sxy / sxx
}

/// `Γ = p ∂/∂q − q ∂/∂p`.
pub fn harmonic_oscillator(x: &Point) -> Point {
    Point::from_vec(vec![x[1], -x[0]])
}

/// Which coordinate field of the deformed chart is followed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum FrameField {
    /// `∂/∂Q`.
    DQ,
    /// `∂/∂P`.
    DP,
}

impl FrameField {
    pub fn label(&self) -> &'static str {
        match self {
            FrameField::DQ => "dQ",
            FrameField::DP => "dP",
        }
    }
}

/// `∂/∂Q` or `∂/∂P` expressed in `(q, p)`: a column of `A` at `φ⁻¹(x)`.
pub fn k_frame_field(t: &KTransform, which: FrameField, x: &Point) -> Point {
    let big = t.inverse(Vector2::new(x[0], x[1]));
    let a = t.jacobian(big);
    let col = match which {
        FrameField::DQ => a.column(0),
        FrameField::DP => a.column(1),
    };
    Point::from_vec(vec![col[0], col[1]])
}

/// One integral curve of a deformed coordinate field.
#[derive(Debug, Clone, PartialEq)]
pub struct Curve {
    pub seed: usize,
    pub field: FrameField,
    pub trajectory: Trajectory,
}

/// Integral curves of `∂/∂Q` and `∂/∂P` through every seed, in seed order,
/// `∂/∂Q` first.
pub fn figure1_curves(t: &KTransform, seeds: &[Point], t_span: (f64, f64), dt: f64) -> Result<Vec<Curve>> {
    let mut out = Vec::with_capacity(2 * seeds.len());
    for (i, seed) in seeds.iter().enumerate() {
        if seed.len() != 2 {
            return Err(Error::InvalidParameter(format!("seed {i} is not a point of the plane")));
        }
        for which in [FrameField::DQ, FrameField::DP] {
            let p = FlowProblem::new(|x: &Point| k_frame_field(t, which, x), t_span, dt, seed.clone());
            out.push(Curve { seed: i, field: which, trajectory: integrate(&p)? });
        }
    }
    Ok(out)
}

/// Exact integral curve: `φ(Q₀ + s, P₀)` or `φ(Q₀, P₀ + s)`.
pub fn figure1_exact(t: &KTransform, which: FrameField, seed: &Point, s: f64) -> Point {
    let mut big = t.inverse(Vector2::new(seed[0], seed[1]));
    match which {
        FrameField::DQ => big[0] += s,
        FrameField::DP => big[1] += s,
    }
    let v = t.forward(big);
    Point::from_vec(vec![v[0], v[1]])
}

/// Below this `|Bt|` the `1/B` entries of `F(t)` use their Taylor branch.
pub const SERIES_THRESHOLD: f64 = 1e-6;

/// Constant field `B ẑ` in the symmetric gauge, reduced to the plane
/// `(Q¹, Q², U¹, U²)` of the fibre-translated chart.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MagneticSystem {
    pub b: f64,
}

impl MagneticSystem {
    pub fn new(b: f64) -> Self {
        Self { b }
    }

    /// Generator of `d/dt (Q, U) = G (Q, U)`.
    pub fn g(&self) -> Matrix4<f64> {
        let b = self.b;
        Matrix4::new(
            0.0, b / 2.0, 1.0, 0.0,
            -b / 2.0, 0.0, 0.0, 1.0,
            -b * b / 4.0, 0.0, 0.0, b / 2.0,
            0.0, -b * b / 4.0, -b / 2.0, 0.0,
        )
    }

    /// Closed form of `exp(tG)`.
    pub fn f(&self, t: f64) -> Matrix4<f64> {
        let b = self.b;
        let bt = b * t;
        let (s, c) = bt.sin_cos();
        // sin(Bt)/B and (1 − cos Bt)/B, with removable singularities at B = 0.
        let (sb, cb) = if bt.abs() < SERIES_THRESHOLD {
            (t * (1.0 - bt * bt / 6.0), b * t * t / 2.0 * (1.0 - bt * bt / 12.0))
        } else {
            (s / b, (1.0 - c) / b)
        };
        let h = (1.0 + c) / 2.0;
        Matrix4::new(
            h, s / 2.0, sb, cb,
            -s / 2.0, h, -cb, sb,
            -b * s / 4.0, b * (c - 1.0) / 4.0, h, s / 2.0,
            b * (1.0 - c) / 4.0, -b * s / 4.0, -s / 2.0, h,
        )
    }

    /// `exp(tG)` by scaling and squaring, the oracle for [`Self::f`].
    pub fn f_expm(&self, t: f64) -> Matrix4<f64> {
        let g = DMatrix::from_column_slice(4, 4, (self.g() * t).as_slice());
        let e = expm(&g);
        Matrix4::from_column_slice(e.as_slice())
    }

    pub fn evolve(&self, state: &Vector4<f64>, t: f64) -> Vector4<f64> {
        self.f(t) * state
    }

    /// `|F(t)ᵀ Ω F(t) − Ω|` with `Ω` the matrix of `dQⁱ ∧ dUᵢ`.
    pub fn symplectic_residual(&self, t: f64) -> f64 {
        let f = self.f(t);
        let om = omega4();
        (f.transpose() * om * f - om).amax()
    }

    /// `H̃ = ½ |U − A(Q)|²`.
    pub fn hamiltonian(&self, x: &Vector4<f64>) -> f64 {
        let v1 = x[2] + self.b / 2.0 * x[1];
        let v2 = x[3] - self.b / 2.0 * x[0];
        0.5 * (v1 * v1 + v2 * v2)
    }
}

/// Matrix of `dQ¹∧dU¹ + dQ²∧dU²` in `(Q¹, Q², U¹, U²)`.
pub fn omega4() -> Matrix4<f64> {
    let mut m = Matrix4::zeros();
    m[(0, 2)] = 1.0;
    m[(1, 3)] = 1.0;
    m[(2, 0)] = -1.0;
    m[(3, 1)] = -1.0;
    m
}

/// `(χ₁, χ₂) = (U¹ − (B/2)Q², U² + (B/2)Q¹)`.
pub fn larmor_constants(state: &Vector4<f64>, b: f64) -> (f64, f64) {
    (state[2] - b / 2.0 * state[1], state[3] + b / 2.0 * state[0])
}

/// Centre `(χ₂/B, −χ₁/B)` of the Larmor orbit; `None` when `B = 0`.
pub fn larmor_center(state: &Vector4<f64>, b: f64) -> Option<(f64, f64)> {
    if b == 0.0 {
        return None;
    }
    let (c1, c2) = larmor_constants(state, b);
    Some((c2 / b, -c1 / b))
}

/// `φ_*Γ = (Uⁱ − Aⁱ) ∂/∂Qⁱ + (Uᵏ − Aᵏ) ∂ᵢA_k ∂/∂Uⁱ` at a point `(Q, U)`.
pub fn pushforward_dynamics(m: &MagneticGauge, state: &Point) -> Point {
    let (q, big_u) = split6(state);
    let v = big_u - m.potential(&q);
    let du = m.potential_jacobian(&q).transpose() * v;
    join6(&v, &du)
}

/// `H̃(Q, U) = ½ |U − A(Q)|²`.
pub fn pushforward_hamiltonian(m: &MagneticGauge, state: &Point) -> f64 {
    let (q, big_u) = split6(state);
    0.5 * (big_u - m.potential(&q)).norm_squared()
}

/// `|i_{φ_*Γ}(dQⁱ∧dUᵢ) − dH̃|∞`, with `dH̃` by central differences.
pub fn hamiltonian_residual(m: &MagneticGauge, state: &Point) -> f64 {
    let f = pushforward_dynamics(m, state);
    let dh = crate::linalg::fd_jacobian(|x| Point::from_element(1, pushforward_hamiltonian(m, x)), state, 1e-5);
    let mut worst = 0.0_f64;
    for i in 0..3 {
        // i_v(dQ∧dU) has dQ-component −v_U and dU-component v_Q.
        worst = worst.max((-f[3 + i] - dh[(0, i)]).abs());
        worst = worst.max((f[i] - dh[(0, 3 + i)]).abs());
    }
    worst
}

/// `q̇ = u`, `u̇ = u × B(q)` on `T R³`.
pub fn lorentz_field(m: &MagneticGauge, state: &Point) -> Point {
    let (q, u) = split6(state);
    join6(&u, &u.cross(&m.field(&q)))
}

pub fn speed(state: &Point) -> f64 {
    Vector3::new(state[3], state[4], state[5]).norm()
}
