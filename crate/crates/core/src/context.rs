//! Dimension-dependent constants shared by all kernels.

use crate::{real, Error, Real, Result};

/// Geometric constants of ℝᴺ used by the closed-form kernels.
///
/// * `omega` — volume ω_N of the unit ball, ω_N = π^{N/2}/Γ(N/2+1);
/// * `c` — the fundamental-solution constant C_N = 1/(N(N−2)ω_N),
///   defined only for N ≥ 3;
/// * `d` — D_N = 2/(Nω_N), the constant governing the exterior-ball
///   contribution to the Robin gradient.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KernelContext<T: Real> {
    pub dim: usize,
    pub omega: T,
    pub c: Option<T>,
    pub d: T,
}

impl<T: Real> KernelContext<T> {
    pub fn new(dim: usize) -> Result<Self> {
        if dim < 2 {
            return Err(Error::BadDimension(dim));
        }
        let omega = unit_ball_volume(dim);
        let n = real::<T>(dim as f64);
        let c = if dim >= 3 {
            Some(T::one() / (n * (n - real(2.0)) * omega))
        } else {
            None
        };
        let d = real::<T>(2.0) / (n * omega);
        Ok(Self { dim, omega, c, d })
    }

    /// C_N; panics if N = 2 where the constant is undefined.
    pub fn c_n(&self) -> T {
        self.c.expect("C_N requires dimension >= 3")
    }
}

/// Volume of the unit ball via the two-step recurrence
/// ω_1 = 2, ω_2 = π, ω_N = 2π ω_{N−2} / N.
pub fn unit_ball_volume<T: Real>(dim: usize) -> T {
    let two_pi = T::two_pi();
    let mut k = if dim % 2 == 0 { 2 } else { 1 };
    let mut v: T = if dim % 2 == 0 { T::pi() } else { real(2.0) };
    while k < dim {
        k += 2;
        v *= two_pi / real(k as f64);
    }
    v
}
