//! Closed-form kernels for the ball and the exterior of a ball.
//!
//! With ω_N the unit-ball volume and C_N = 1/(N(N−2)ω_N), the free-space
//! fundamental solution is
//!
//! ```text
//! S(x,y) = -ln|x-y| / 2π          (N = 2)
//! S(x,y) = C_N / |x-y|^{N-2}      (N ≥ 3)
//! ```
//!
//! The Green function of the exterior domain ℝᴺ∖B(0,ε) is obtained by the
//! Kelvin reflection y ↦ ε²y/|y|², and its Robin function is
//!
//! ```text
//! R(x) = (1/2π) ln( ε/(|x|²-ε²) )          (N = 2)
//! R(x) = C_N ε^{N-2} / (|x|²-ε²)^{N-2}     (N ≥ 3)
//! ```
//!
//! with gradient −D_N ε^{N-2} x/(|x|²−ε²)^{N−1}, D_N = 2/(Nω_N). The ball
//! B(0,ρ) is handled by the same reflection from the inside; its Robin
//! Hessian at the centre is (2/(Nω_N))·I.
//!
//! All derivatives here are analytic (no differencing): this module is the
//! reference oracle for the numerical solver, so its own correctness is
//! checked against finite differences and quadrature identities in the
//! test suites. For N = 2 the hole radius enters only through logarithms
//! and the expressions are arranged in log space so that ε as small as
//! 1e-300 stays finite.

use crate::{real, Error, KernelContext, Point, Real, Result};
use nalgebra::DMatrix;

fn check_dim<T: Real>(x: &Point<T>, ctx: &KernelContext<T>) -> Result<()> {
    if x.len() != ctx.dim {
        return Err(Error::DimMismatch {
            expected: ctx.dim,
            got: x.len(),
        });
    }
    Ok(())
}

/// Fundamental solution S(x,y) of −Δ in free space.
pub fn fundamental_solution<T: Real>(
    x: &Point<T>,
    y: &Point<T>,
    ctx: &KernelContext<T>,
) -> Result<T> {
    check_dim(x, ctx)?;
    check_dim(y, ctx)?;
    let r2 = (x - y).norm_squared();
    if r2 == T::zero() {
        return Err(Error::CoincidentPoints);
    }
    Ok(if ctx.dim == 2 {
        -r2.ln() / (real::<T>(2.0) * T::two_pi())
    } else {
        ctx.c_n() * r2.powf(-real::<T>((ctx.dim as f64 - 2.0) / 2.0))
    })
}

/// Gradient of S(·,y) with respect to the first argument.
pub fn grad_x_fundamental_solution<T: Real>(
    x: &Point<T>,
    y: &Point<T>,
    ctx: &KernelContext<T>,
) -> Result<Point<T>> {
    check_dim(x, ctx)?;
    check_dim(y, ctx)?;
    let d = x - y;
    let r2 = d.norm_squared();
    if r2 == T::zero() {
        return Err(Error::CoincidentPoints);
    }
    let n = real::<T>(ctx.dim as f64);
    // both branches reduce to -(1/(N ω_N)) (x-y)/|x-y|^N
    let scale = -T::one() / (n * ctx.omega * r2.powf(n / real(2.0)));
    Ok(d * scale)
}

fn require_closed_exterior<T: Real>(p: &Point<T>, eps: T) -> Result<()> {
    let dist = p.norm();
    if dist < eps {
        return Err(Error::InsideHole {
            dist: nalgebra::try_convert(dist).unwrap_or(f64::NAN),
            eps: nalgebra::try_convert(eps).unwrap_or(f64::NAN),
        });
    }
    Ok(())
}

fn require_open_exterior<T: Real>(p: &Point<T>, eps: T) -> Result<()> {
    let dist = p.norm();
    if dist <= eps {
        return Err(Error::InsideHole {
            dist: nalgebra::try_convert(dist).unwrap_or(f64::NAN),
            eps: nalgebra::try_convert(eps).unwrap_or(f64::NAN),
        });
    }
    Ok(())
}

/// |x|²|y|² − 2ε² x·y + ε⁴, the squared reflected distance ||x| y − ε² x/|x||².
fn reflected_dist_sq<T: Real>(x: &Point<T>, y: &Point<T>, eps: T) -> T {
    let e2 = eps * eps;
    x.norm_squared() * y.norm_squared() - real::<T>(2.0) * e2 * x.dot(y) + e2 * e2
}

/// Green function of ℝᴺ∖B(0,ε). The hole sits at the origin; callers with a
/// hole at P evaluate at x−P, y−P (translation covariance).
pub fn green_exterior_ball<T: Real>(
    x: &Point<T>,
    y: &Point<T>,
    eps: T,
    ctx: &KernelContext<T>,
) -> Result<T> {
    check_dim(x, ctx)?;
    check_dim(y, ctx)?;
    if eps <= T::zero() {
        return Err(Error::InvalidParam("hole radius must be positive".into()));
    }
    require_open_exterior(x, eps)?;
    require_closed_exterior(y, eps)?;
    let r2 = (x - y).norm_squared();
    if r2 == T::zero() {
        return Err(Error::CoincidentPoints);
    }
    let q = reflected_dist_sq(x, y, eps);
    let half = real::<T>(0.5);
    Ok(if ctx.dim == 2 {
        // -(1/2π)(ln|x-y| - ln sqrt(q)/ε) kept in log space
        -(half * r2.ln() - half * q.ln() + eps.ln()) / T::two_pi()
    } else {
        let p = real::<T>((ctx.dim as f64 - 2.0) / 2.0);
        ctx.c_n() * (r2.powf(-p) - (eps * eps / q).powf(p))
    })
}

/// ∇_y of the exterior-ball Green function:
/// (1/(Nω_N)) [ (x−y)/|x−y|^N + ε^{N−2}(|x|²y − ε²x)/q^{N/2} ].
pub fn grad_y_green_exterior_ball<T: Real>(
    x: &Point<T>,
    y: &Point<T>,
    eps: T,
    ctx: &KernelContext<T>,
) -> Result<Point<T>> {
    check_dim(x, ctx)?;
    check_dim(y, ctx)?;
    require_open_exterior(x, eps)?;
    require_closed_exterior(y, eps)?;
    let d = x - y;
    let r2 = d.norm_squared();
    if r2 == T::zero() {
        return Err(Error::CoincidentPoints);
    }
    let n = real::<T>(ctx.dim as f64);
    let half_n = n / real(2.0);
    let q = reflected_dist_sq(x, y, eps);
    // ε^{N-2}/q^{N/2} = (ε²/q)^{(N-2)/2} / q, stable for tiny ε
    let efac = (eps * eps / q).powf(half_n - T::one()) / q;
    let reflected = y * x.norm_squared() - x * (eps * eps);
    let free = d / r2.powf(half_n);
    Ok((free + reflected * efac) / (n * ctx.omega))
}

/// Normal derivative ∂G_{B_ε^c}(x,y)/∂ν_y on |y| = ε, with ν the outer
/// normal of the exterior domain (ν = −y/ε, pointing into the hole):
/// −(|x|²−ε²)/(N ω_N ε |x−y|^N).
pub fn poisson_exterior_ball<T: Real>(
    x: &Point<T>,
    y: &Point<T>,
    eps: T,
    ctx: &KernelContext<T>,
) -> Result<T> {
    check_dim(x, ctx)?;
    check_dim(y, ctx)?;
    require_open_exterior(x, eps)?;
    let n = real::<T>(ctx.dim as f64);
    let rn = (x - y).norm_squared().powf(n / real(2.0));
    Ok(-(x.norm_squared() - eps * eps) / (n * ctx.omega * eps * rn))
}

/// Robin function of ℝᴺ∖B(0,ε) at x, |x| > ε.
pub fn robin_exterior_ball<T: Real>(x: &Point<T>, eps: T, ctx: &KernelContext<T>) -> Result<T> {
    check_dim(x, ctx)?;
    require_open_exterior(x, eps)?;
    let m = x.norm_squared() - eps * eps;
    Ok(if ctx.dim == 2 {
        (eps.ln() - m.ln()) / T::two_pi()
    } else {
        ctx.c_n() * (eps / m).powi(ctx.dim as i32 - 2)
    })
}

/// Gradient of the exterior-ball Robin function:
/// −D_N ε^{N−2} x / (|x|²−ε²)^{N−1}.
pub fn robin_exterior_ball_grad<T: Real>(
    x: &Point<T>,
    eps: T,
    ctx: &KernelContext<T>,
) -> Result<Point<T>> {
    check_dim(x, ctx)?;
    require_open_exterior(x, eps)?;
    let m = x.norm_squared() - eps * eps;
    let scale = -ctx.d * (eps / m).powi(ctx.dim as i32 - 2) / m;
    Ok(x * scale)
}

/// Hessian of the exterior-ball Robin function:
/// −D_N ε^{N−2} [ δ_ij (|x|²−ε²) + 2(1−N) x_i x_j ] / (|x|²−ε²)^N.
pub fn robin_exterior_ball_hessian<T: Real>(
    x: &Point<T>,
    eps: T,
    ctx: &KernelContext<T>,
) -> Result<DMatrix<T>> {
    check_dim(x, ctx)?;
    require_open_exterior(x, eps)?;
    let n = ctx.dim;
    let m = x.norm_squared() - eps * eps;
    let pref = -ctx.d * (eps / m).powi(n as i32 - 2) / (m * m);
    let two_1n = real::<T>(2.0 * (1.0 - n as f64));
    let mut h = DMatrix::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            let mut v = two_1n * x[i] * x[j];
            if i == j {
                v += m;
            }
            h[(i, j)] = pref * v;
        }
    }
    Ok(h)
}

fn require_in_unit_ball<T: Real>(p: &Point<T>) -> Result<()> {
    if p.norm_squared() >= T::one() {
        return Err(Error::OutsideDomain);
    }
    Ok(())
}

/// Regular part H(x,y) of the Green function of the unit ball.
///
/// Both arguments in the open ball. Writing t² = |x|²|y|² − 2x·y + 1
/// (the squared product |y|·|x − y/|y|²|), the closed form is
/// −ln(t²)/4π for N = 2 and C_N t^{2−N} for N ≥ 3; t² → 1 as y → 0, so the
/// removable singularity at y = 0 needs no special casing.
pub fn regular_part_ball<T: Real>(
    x: &Point<T>,
    y: &Point<T>,
    ctx: &KernelContext<T>,
) -> Result<T> {
    check_dim(x, ctx)?;
    check_dim(y, ctx)?;
    require_in_unit_ball(x)?;
    require_in_unit_ball(y)?;
    let t2 = x.norm_squared() * y.norm_squared() - real::<T>(2.0) * x.dot(y) + T::one();
    Ok(if ctx.dim == 2 {
        -t2.ln() / (real::<T>(2.0) * T::two_pi())
    } else {
        ctx.c_n() * t2.powf(-real::<T>((ctx.dim as f64 - 2.0) / 2.0))
    })
}

/// Robin function of the ball B(0, radius).
///
/// The unit-ball diagonal H(x,x) scales by the Green-function scaling law
/// G_{B_ρ}(x,y) = ρ^{2−N} G_{B_1}(x/ρ, y/ρ) (with an additive −ln ρ/2π for
/// N = 2), giving −(1/2π) ln((ρ²−|x|²)/ρ) and C_N ρ^{N−2}/(ρ²−|x|²)^{N−2}.
pub fn robin_ball<T: Real>(x: &Point<T>, radius: T, ctx: &KernelContext<T>) -> Result<T> {
    check_dim(x, ctx)?;
    let m = radius * radius - x.norm_squared();
    if m <= T::zero() {
        return Err(Error::OutsideDomain);
    }
    Ok(if ctx.dim == 2 {
        -(m.ln() - radius.ln()) / T::two_pi()
    } else {
        ctx.c_n() * (radius / m).powi(ctx.dim as i32 - 2)
    })
}

/// Gradient of the ball Robin function: D_N ρ^{N−2} x/(ρ²−|x|²)^{N−1}.
pub fn robin_ball_grad<T: Real>(
    x: &Point<T>,
    radius: T,
    ctx: &KernelContext<T>,
) -> Result<Point<T>> {
    check_dim(x, ctx)?;
    let m = radius * radius - x.norm_squared();
    if m <= T::zero() {
        return Err(Error::OutsideDomain);
    }
    let scale = ctx.d * (radius / m).powi(ctx.dim as i32 - 2) / m;
    Ok(x * scale)
}

/// Hessian of the ball Robin function:
/// D_N ρ^{N−2} [ δ_ij (ρ²−|x|²) + 2(N−1) x_i x_j ] / (ρ²−|x|²)^N.
///
/// At the centre this is (2/(Nω_N)) ρ^{−N} · I, the identity multiple that
/// all near-centre Hessian baselines are checked against.
pub fn robin_ball_hessian<T: Real>(
    x: &Point<T>,
    radius: T,
    ctx: &KernelContext<T>,
) -> Result<DMatrix<T>> {
    check_dim(x, ctx)?;
    let n = ctx.dim;
    let m = radius * radius - x.norm_squared();
    if m <= T::zero() {
        return Err(Error::OutsideDomain);
    }
    let pref = ctx.d * (radius / m).powi(n as i32 - 2) / (m * m);
    let two_n1 = real::<T>(2.0 * (n as f64 - 1.0));
    let mut h = DMatrix::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            let mut v = two_n1 * x[i] * x[j];
            if i == j {
                v += m;
            }
            h[(i, j)] = pref * v;
        }
    }
    Ok(h)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use nalgebra::dvector;
    use rand::Rng;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::PI;

    fn ctx(dim: usize) -> KernelContext<f64> {
        KernelContext::new(dim).unwrap()
    }

    #[test]
    fn fundamental_solution_examples() {
        let c2 = ctx(2);
        let v = fundamental_solution(&dvector![1.0, 0.0], &dvector![0.0, 0.0], &c2).unwrap();
        assert_relative_eq!(v, 0.0, epsilon = 1e-15);
        let v = fundamental_solution(&dvector![2.0, 0.0], &dvector![0.0, 0.0], &c2).unwrap();
        assert_relative_eq!(v, -0.110317800076325797, max_relative = 1e-14);

        let c3 = ctx(3);
        let v =
            fundamental_solution(&dvector![1.0, 0.0, 0.0], &dvector![0.0, 0.0, 0.0], &c3).unwrap();
        assert_relative_eq!(v, 1.0 / (4.0 * PI), max_relative = 1e-14);

        let x = dvector![1.0, 1.0];
        assert!(matches!(
            fundamental_solution(&x, &x, &c2),
            Err(Error::CoincidentPoints)
        ));
    }

    #[test]
    fn green_exterior_examples() {
        let c2 = ctx(2);
        // vanishes on the hole boundary, sampled at 64 points
        for k in 0..64 {
            let t = std::f64::consts::TAU * k as f64 / 64.0;
            let y = dvector![t.cos(), t.sin()];
            let v = green_exterior_ball(&dvector![2.0, 0.0], &y, 1.0, &c2).unwrap();
            assert!(v.abs() < 1e-12, "boundary value {v} at angle {t}");
        }

        let c3 = ctx(3);
        // Kelvin reflection of x = (2,0,0) is (0.25,0,0); the scaled image
        // distance |x|·|y − ε²x/|x|²| equals 5, so G = C₃(1/4 − 1/5) = 1/(80π)
        let v = green_exterior_ball(
            &dvector![2.0, 0.0, 0.0],
            &dvector![-2.0, 0.0, 0.0],
            1.0,
            &c3,
        )
        .unwrap();
        assert_relative_eq!(v, 0.0039788735772973836, max_relative = 1e-12);

        // inside-hole precondition
        assert!(green_exterior_ball(&dvector![0.5, 0.0], &dvector![2.0, 0.0], 1.0, &c2).is_err());
    }

    #[test]
    fn green_exterior_symmetry_random_pairs() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for dim in [2usize, 3] {
            let c = ctx(dim);
            for _ in 0..20 {
                let draw = |rng: &mut ChaCha8Rng| {
                    loop {
                        let p =
                            Point::<f64>::from_fn(dim, |_, _| rng.gen_range(-3.0..3.0));
                        if p.norm() > 1.3 {
                            return p;
                        }
                    }
                };
                let x = draw(&mut rng);
                let y = draw(&mut rng);
                if (&x - &y).norm() < 1e-6 {
                    continue;
                }
                let a = green_exterior_ball(&x, &y, 1.0, &c).unwrap();
                let b = green_exterior_ball(&y, &x, 1.0, &c).unwrap();
                assert_relative_eq!(a, b, max_relative = 1e-12, epsilon = 1e-14);
            }
        }
    }

    /// Central finite difference of a scalar field, the derivative oracle.
    fn fd_grad(
        f: &dyn Fn(&Point<f64>) -> f64,
        x: &Point<f64>,
        h: f64,
    ) -> Point<f64> {
        Point::from_fn(x.len(), |i, _| {
            let mut xp = x.clone();
            let mut xm = x.clone();
            xp[i] += h;
            xm[i] -= h;
            (f(&xp) - f(&xm)) / (2.0 * h)
        })
    }

    #[test]
    fn grad_y_green_matches_finite_differences() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for dim in [2usize, 3] {
            let c = ctx(dim);
            let eps = 0.7;
            for _ in 0..20 {
                let draw = |rng: &mut ChaCha8Rng| loop {
                    let p = Point::<f64>::from_fn(dim, |_, _| rng.gen_range(-3.0..3.0));
                    if p.norm() > 1.1 {
                        return p;
                    }
                };
                let x = draw(&mut rng);
                let y = draw(&mut rng);
                if (&x - &y).norm() < 0.3 {
                    continue;
                }
                let g = grad_y_green_exterior_ball(&x, &y, eps, &c).unwrap();
                let fd = fd_grad(
                    &|yy: &Point<f64>| green_exterior_ball(&x, yy, eps, &c).unwrap(),
                    &y,
                    1e-6,
                );
                assert_relative_eq!(g, fd, max_relative = 1e-7, epsilon = 1e-12);
            }
        }
    }

    #[test]
    fn grad_y_green_reflection_symmetry() {
        // x on the axis: first components agree, second components flip
        let c = ctx(2);
        let x = dvector![2.0, 0.0];
        let g1 = grad_y_green_exterior_ball(&x, &dvector![0.0, 1.5], 1.0, &c).unwrap();
        let g2 = grad_y_green_exterior_ball(&x, &dvector![0.0, -1.5], 1.0, &c).unwrap();
        assert_relative_eq!(g1[0], g2[0], max_relative = 1e-14);
        assert_relative_eq!(g1[1], -g2[1], max_relative = 1e-14);
    }

    #[test]
    fn poisson_kernel_far_field() {
        // N = 3: |∂G/∂ν| ~ 1/(4πR) on |y| = 1 as the source recedes
        let c3 = ctx(3);
        let y3 = dvector![0.0, 1.0, 0.0];
        for r in [50.0, 100.0, 200.0] {
            let x = dvector![r, 0.0, 0.0];
            let k = poisson_exterior_ball(&x, &y3, 1.0, &c3).unwrap().abs();
            assert_relative_eq!(k * 4.0 * PI * r, 1.0, max_relative = 0.05);
        }
        // N = 2: the kernel magnitude tends to the uniform density 1/(2π)
        let c2 = ctx(2);
        let y2 = dvector![0.0, 1.0];
        let k = poisson_exterior_ball(&dvector![500.0, 0.0], &y2, 1.0, &c2)
            .unwrap()
            .abs();
        assert_relative_eq!(k, 1.0 / (2.0 * PI), max_relative = 0.01);
    }

    #[test]
    fn robin_exterior_examples_and_derivatives() {
        let c2 = ctx(2);
        let x = dvector![2.0f64.sqrt(), 0.0];
        assert_relative_eq!(robin_exterior_ball(&x, 1.0, &c2).unwrap(), 0.0, epsilon = 1e-15);

        let c3 = ctx(3);
        let x3 = dvector![2.0f64.sqrt(), 0.0, 0.0];
        assert_relative_eq!(
            robin_exterior_ball(&x3, 1.0, &c3).unwrap(),
            1.0 / (4.0 * PI),
            max_relative = 1e-14
        );

        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for dim in [2usize, 3] {
            let c = ctx(dim);
            let eps = 0.6;
            for _ in 0..20 {
                let x = loop {
                    let p = Point::<f64>::from_fn(dim, |_, _| rng.gen_range(-3.0..3.0));
                    if p.norm() > 1.0 {
                        break p;
                    }
                };
                let g = robin_exterior_ball_grad(&x, eps, &c).unwrap();
                let fd = fd_grad(
                    &|xx: &Point<f64>| robin_exterior_ball(xx, eps, &c).unwrap(),
                    &x,
                    1e-6,
                );
                assert_relative_eq!(g, fd, max_relative = 1e-7, epsilon = 1e-13);

                let h = robin_exterior_ball_hessian(&x, eps, &c).unwrap();
                for j in 0..dim {
                    let col = fd_grad(
                        &|xx: &Point<f64>| robin_exterior_ball_grad(xx, eps, &c).unwrap()[j],
                        &x,
                        1e-6,
                    );
                    for i in 0..dim {
                        assert_relative_eq!(h[(j, i)], col[i], max_relative = 1e-6, epsilon = 1e-11);
                    }
                }
            }
        }
    }

    #[test]
    fn robin_exterior_blows_up_monotonically_toward_hole() {
        let c = ctx(2);
        let eps = 0.5;
        let mut last = f64::NEG_INFINITY;
        for k in 1..=12 {
            let r = eps + 10f64.powi(-k);
            let v = robin_exterior_ball(&dvector![r, 0.0], eps, &c).unwrap();
            assert!(v > last, "not monotone at distance 1e-{k}");
            last = v;
        }
        assert!(last > 2.0, "value near the hole should be large, got {last}");
        // on-hole point is rejected
        assert!(robin_exterior_ball(&dvector![eps, 0.0], eps, &c).is_err());
    }

    #[test]
    fn robin_exterior_log_space_stability_for_tiny_holes() {
        let c = ctx(2);
        let x = dvector![0.5, 0.0];
        let v = robin_exterior_ball(&x, 1e-300, &c).unwrap();
        assert!(v.is_finite());
        // (ln ε - ln|x|²)/2π
        assert_relative_eq!(v, (1e-300f64.ln() - 0.25f64.ln()) / (2.0 * PI), max_relative = 1e-14);
        let g = robin_exterior_ball_grad(&x, 1e-300, &c).unwrap();
        assert!(g[0].is_finite());
        assert_relative_eq!(g[0], -1.0 / PI * 0.5 / 0.25, max_relative = 1e-13);
    }

    #[test]
    fn regular_part_ball_examples() {
        let c2 = ctx(2);
        let z2 = dvector![0.0, 0.0];
        assert_relative_eq!(regular_part_ball(&z2, &z2, &c2).unwrap(), 0.0, epsilon = 1e-15);

        let c3 = ctx(3);
        let z3 = dvector![0.0, 0.0, 0.0];
        assert_relative_eq!(
            regular_part_ball(&z3, &z3, &c3).unwrap(),
            1.0 / (4.0 * PI),
            max_relative = 1e-15
        );

        // diagonal matches -(1/2π) ln(1-|x|²)
        let x = dvector![0.3, 0.4];
        assert_relative_eq!(
            regular_part_ball(&x, &x, &c2).unwrap(),
            -(1.0 - 0.25f64).ln() / (2.0 * PI),
            max_relative = 1e-14
        );

        assert!(regular_part_ball(&dvector![1.1, 0.0], &z2, &c2).is_err());
    }

    #[test]
    fn regular_part_ball_symmetry() {
        let mut rng = ChaCha8Rng::seed_from_u64(23);
        for dim in [2usize, 3] {
            let c = ctx(dim);
            for _ in 0..20 {
                let draw = |rng: &mut ChaCha8Rng| loop {
                    let p = Point::<f64>::from_fn(dim, |_, _| rng.gen_range(-1.0..1.0));
                    if p.norm() < 0.95 {
                        return p;
                    }
                };
                let x = draw(&mut rng);
                let y = draw(&mut rng);
                let a = regular_part_ball(&x, &y, &c).unwrap();
                let b = regular_part_ball(&y, &x, &c).unwrap();
                assert_relative_eq!(a, b, max_relative = 1e-13);
            }
        }
    }

    #[test]
    fn robin_ball_examples() {
        let c2 = ctx(2);
        let zero = dvector![0.0, 0.0];
        assert_relative_eq!(robin_ball(&zero, 1.0, &c2).unwrap(), 0.0, epsilon = 1e-15);

        let g = robin_ball_grad(&dvector![0.3, 0.0], 1.0, &c2).unwrap();
        assert_relative_eq!(g[0], 0.104937325115535386, max_relative = 1e-14);
        assert_relative_eq!(g[1], 0.0, epsilon = 1e-15);

        let h = robin_ball_hessian(&zero, 1.0, &c2).unwrap();
        for i in 0..2 {
            for j in 0..2 {
                let want = if i == j { 1.0 / PI } else { 0.0 };
                assert_relative_eq!(h[(i, j)], want, max_relative = 1e-14, epsilon = 1e-15);
            }
        }

        // scaling law: hessian at centre of B(0,ρ) is D_N ρ^{-N} I
        let c3 = ctx(3);
        let z3 = dvector![0.0, 0.0, 0.0];
        let h3 = robin_ball_hessian(&z3, 2.0, &c3).unwrap();
        assert_relative_eq!(h3[(0, 0)], 1.0 / (2.0 * PI) / 8.0, max_relative = 1e-14);

        assert!(robin_ball(&dvector![1.0, 0.0], 1.0, &c2).is_err());
    }

    #[test]
    fn robin_ball_derivatives_match_finite_differences() {
        let mut rng = ChaCha8Rng::seed_from_u64(41);
        for dim in [2usize, 3] {
            let c = ctx(dim);
            for _ in 0..20 {
                let x = loop {
                    let p = Point::<f64>::from_fn(dim, |_, _| rng.gen_range(-0.8..0.8));
                    if p.norm() < 0.85 {
                        break p;
                    }
                };
                let g = robin_ball_grad(&x, 1.0, &c).unwrap();
                let fd = fd_grad(&|xx: &Point<f64>| robin_ball(xx, 1.0, &c).unwrap(), &x, 1e-6);
                assert_relative_eq!(g, fd, max_relative = 1e-7, epsilon = 1e-12);

                let h = robin_ball_hessian(&x, 1.0, &c).unwrap();
                for j in 0..dim {
                    let col = fd_grad(
                        &|xx: &Point<f64>| robin_ball_grad(xx, 1.0, &c).unwrap()[j],
                        &x,
                        1e-6,
                    );
                    for i in 0..dim {
                        assert_relative_eq!(h[(j, i)], col[i], max_relative = 1e-6, epsilon = 1e-11);
                    }
                }
            }
        }
    }
}
