//! Very weak solutions of 1D parabolic initial-boundary problems whose
//! coefficients and data may be distributions.
//!
//! The equation is the divergence-form problem
//!   du/dt - d/dx(a du/dx) + b du/dx + q u = f   on [0,T] x (0,1)
//! with Dirichlet boundary nets g0, g1 and initial datum u0. Distributional
//! data are regularized by convolution with a mollifier at scale epsilon;
//! each regularized problem is solved by a theta-scheme finite-difference
//! integrator (with a spectral Galerkin oracle for cross-checks), and the
//! behaviour of the solution net across an epsilon ladder is measured in
//! discrete energy norms: moderateness exponents, kernel-independence, and
//! consistency with classical solutions for smooth data.
//!
//! The numerical kernels are generic over the scalar type; the aliases at
//! the crate root pin the common `f64` instantiation.

pub mod cases;
pub mod config;
pub mod dist;
pub mod fdsolver;
pub mod galerkin;
pub mod grid;
pub mod linalg;
pub mod norms;
pub mod problem;
pub mod scalar;
pub mod svg;
pub mod sweep;

pub use scalar::Real;

/// Default scalar type.
pub type Scalar = f64;

pub type Expr = dist::DistExpr<Scalar>;
pub type Net = dist::MollifierNet<Scalar>;
pub type Field = dist::SampledField1D<Scalar>;
pub type Spec = problem::ProblemSpec<Scalar>;
pub type Instance = problem::RegularizedInstance<Scalar>;
pub type Trajectory = fdsolver::SolutionTrajectory<Scalar>;
pub type Report = norms::EnergyReport<Scalar>;
