//! Robin functions of punctured domains.
//!
//! Let `D ⊂ ℝᴺ` be a smooth domain with Green function `G_D(x,y)` and
//! regular part `H_D(x,y)`, so that `G_D = S - H_D` with `S` the free-space
//! fundamental solution. The *Robin function* is the diagonal
//! `R_D(x) = H_D(x,x)`; it blows up at `∂D` and its critical points govern
//! concentration phenomena for several semilinear elliptic problems.
//!
//! This crate studies what happens when a small ball `B(P,ε)` is removed
//! from a smooth bounded domain `Ω`:
//!
//! * [`kernels`] — closed-form fundamental solutions, Green functions and
//!   Robin functions (with analytic derivatives) for the ball and the
//!   exterior of a ball, in any dimension `N ≥ 2`. These anchor every other
//!   module.
//! * [`quad`] — trapezoid rule on circles and product Gauss–Legendre ×
//!   trapezoid rules on spheres, with node-doubling convergence drivers.
//! * [`geom`] — domain descriptions (ball, perturbed ellipsoid, star-shaped
//!   2-D) and punctured domains.
//! * [`mfs`] — a method-of-fundamental-solutions collocation solver for the
//!   regular part `H(·,y)` on the supported domains, plus the Robin
//!   function, its gradient (boundary-integral or finite-difference) and
//!   finite-difference Hessian.
//! * [`asym`] — the asymptotic machinery: expansions of `R`, `∇R`, `∇²R` on
//!   the punctured domain, the scalar radius equations, the near-hole limit
//!   fields and predicted critical points.
//! * [`critical`] — multistart Newton search, classification (Morse index,
//!   degeneracy), deduplication, degenerate-ring detection, and comparison
//!   of found points against predictions.
//! * [`ellipsoid`] — the perturbed-ellipsoid eigenvalue study: linear-in-δ
//!   predicted Hessian eigenvalues at the centre vs. numerically computed
//!   ones.
//! * [`identity`] — quadrature verification of the closed-form boundary
//!   integral identities on the exterior ball; the correctness anchor for
//!   the whole toolkit.
//!
//! Closed forms and asymptotics are generic over the scalar type through
//! the [`Real`] trait (`f32` or `f64`); the collocation solver and
//! everything downstream of it is pinned to `f64` via the [`Scalar`] alias,
//! since truncated-SVD collocation below `f64` cannot reach the tolerances
//! the toolkit targets.

pub mod asym;
pub mod context;
pub mod critical;
pub mod ellipsoid;
pub mod error;
pub mod geom;
pub mod identity;
pub mod kernels;
pub mod mfs;
pub mod quad;

use nalgebra::{DMatrix, DVector};
use num_traits::FromPrimitive;

/// Scalar type for the generic closed-form layer: `f32` or `f64`.
///
/// `nalgebra::RealField` supplies the elementary functions and lets the
/// generic code use nalgebra's decompositions; `FromPrimitive` supplies the
/// constant conversions.
pub trait Real: nalgebra::RealField + FromPrimitive + Copy {}
impl<T: nalgebra::RealField + FromPrimitive + Copy> Real for T {}

/// Convert an `f64` constant into the generic scalar type.
#[inline]
pub(crate) fn real<T: Real>(x: f64) -> T {
    T::from_f64(x).expect("f64 constant must convert into the scalar type")
}

/// Concrete scalar used by the solver layer.
pub type Scalar = f64;

/// A point of ℝᴺ with generic scalar entries.
pub type Point<T> = DVector<T>;
/// A point of ℝᴺ at solver precision.
pub type PointF = DVector<Scalar>;
/// An N×N matrix at solver precision.
pub type MatrixF = DMatrix<Scalar>;

pub use context::KernelContext;
pub use error::{Error, Result};
