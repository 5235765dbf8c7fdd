//! Alternative linear structures on phase spaces.
//!
//! A nonlinear diffeomorphism `φ` transports the standard vector-space
//! operations of `R^n` to new ones, `u + v ↦ φ(φ⁻¹u + φ⁻¹v)`, and with them
//! every tensor built from the linear structure: Liouville field, symplectic
//! form, complex structure, metric and Poisson tensor. This crate evaluates
//! those objects pointwise, builds Darboux charts adapted to regular
//! Lagrangians, integrates the associated flows and realizes two
//! inequivalent Weyl/Moyal quantizations at desk scale.
//!
//! Module map:
//!
//! - [`linstruct`]: diffeomorphisms and the deformed operations they induce.
//! - [`catalog`]: the concrete maps (cubic `K` deformation, `tanh`, magnetic gauges).
//! - [`geometry`]: pointwise tensors and their pushforwards.
//! - [`lagrangian`]: adapted frames and Darboux charts of regular Lagrangians.
//! - [`dynamics`]: RK4 flows, integral curves and the constant-field charged particle.
//! - [`weyl`]: finite and grid Weyl systems, adjoints under two measures, Fock ladders.
//! - [`moyal`]: exact polynomial star products and brackets in both charts.

pub mod catalog;
pub mod dynamics;
pub mod error;
pub mod geometry;
pub mod lagrangian;
pub mod linalg;
pub mod linstruct;
pub mod moyal;
pub mod weyl;

pub use error::{Error, Result};
pub use linstruct::{Diffeo, LinearStructure, Point, Tolerances};
