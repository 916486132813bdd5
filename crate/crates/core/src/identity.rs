//! Quadrature verification of the exterior-ball boundary identities.
//!
//! Every closed form the toolkit leans on reduces to a surface integral
//! over the hole boundary |y| = ε that is known exactly. This module
//! recomputes each side independently — high-order quadrature against the
//! closed forms of [`crate::kernels`] — and records the discrepancy. The
//! checks double the node count until the quadrature stops moving, so a
//! failure localizes a kernel bug rather than a quadrature artifact.
//!
//! Normal convention: ∂G/∂ν_y uses the outer normal of the exterior domain
//! on |y| = ε, i.e. ν = −y/ε pointing into the hole.

use crate::kernels;
use crate::quad::BoundaryRule;
use crate::{Error, KernelContext, PointF, Result, Scalar};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

/// Fixed seed of the randomized (x, ε) sampling, for reproducible tables.
pub const DEFAULT_SEED: u64 = 20260809;

/// The verified identities.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Identity {
    /// ∫ ∂G/∂ν dσ = −ε^{N−2}/|x|^{N−2}
    FluxTotal,
    /// ∫ y_j ∂G/∂ν dσ = −x_j ε^N/|x|^N
    FluxMoment1,
    /// ∫ y_i y_j ∂G/∂ν dσ = −(ε^N/|x|^N)[ε² x_i x_j/|x|² + δ_ij(|x|²−ε²)/N]
    FluxMoment2,
    /// ∫ (y/ε)(∂G/∂ν)² dσ = D_N ε^{N−2} x/(|x|²−ε²)^{N−1} = −∇R_{B_ε^c}(x)
    SquaredFluxMoment,
    /// −∫ (∂G/∂ν) S(x,y) dσ = R_{B_ε^c}(x) (+ (1/2π) ln(|x|/ε) in 2-D)
    FundSolFluxMoment,
    /// ∫ C_N/|x−y|^{N−2} dσ = ε^{N−1}/((N−2)|x|^{N−2})   (N ≥ 3)
    InvDistanceSurface,
    /// ∫ ln|x−y| dσ = 2πε ln|x|   (N = 2)
    LogSurface,
    /// ∫ |ln|x−y|| dσ = O(ε |ln|x||)   (N = 2, bound check)
    AbsLogSurfaceBound,
    /// Poisson reconstruction of a harmonic polynomial inside the ball
    PoissonReconstruction,
    /// ∇R_{B_ε^c}(x) = ∫ ν(y)(∂G/∂ν_y)² dσ with ν the domain outer normal
    GradientRepresentation,
}

impl Identity {
    pub const ALL: [Identity; 10] = [
        Identity::FluxTotal,
        Identity::FluxMoment1,
        Identity::FluxMoment2,
        Identity::SquaredFluxMoment,
        Identity::FundSolFluxMoment,
        Identity::InvDistanceSurface,
        Identity::LogSurface,
        Identity::AbsLogSurfaceBound,
        Identity::PoissonReconstruction,
        Identity::GradientRepresentation,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            Identity::FluxTotal => "flux_total",
            Identity::FluxMoment1 => "flux_moment1",
            Identity::FluxMoment2 => "flux_moment2",
            Identity::SquaredFluxMoment => "squared_flux_moment",
            Identity::FundSolFluxMoment => "fund_sol_flux_moment",
            Identity::InvDistanceSurface => "inv_distance_surface",
            Identity::LogSurface => "log_surface",
            Identity::AbsLogSurfaceBound => "abs_log_surface_bound",
            Identity::PoissonReconstruction => "poisson_reconstruction",
            Identity::GradientRepresentation => "gradient_representation",
        }
    }

    pub fn dims(&self) -> &'static [usize] {
        match self {
            Identity::InvDistanceSurface => &[3],
            Identity::LogSurface | Identity::AbsLogSurfaceBound => &[2],
            _ => &[2, 3],
        }
    }

    /// The bound checks report a ratio instead of an equality error.
    pub fn is_bound(&self) -> bool {
        matches!(self, Identity::AbsLogSurfaceBound)
    }
}

/// Result of one identity check at one sample.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct IdentityCheck {
    pub name: String,
    pub dim: usize,
    pub eps: Scalar,
    pub x: Vec<Scalar>,
    /// Worst component for vector/matrix identities.
    pub lhs_quadrature: Scalar,
    pub rhs_closed_form: Scalar,
    pub abs_err: Scalar,
    /// abs_err over the largest closed-form component magnitude.
    pub rel_err: Scalar,
    pub nodes_used: usize,
    /// lhs/rhs for bound-type identities (must stay bounded).
    pub bound_ratio: Option<Scalar>,
}

fn hole_rule(dim: usize, eps: Scalar, n: usize) -> BoundaryRule {
    let c = PointF::zeros(dim);
    if dim == 2 {
        BoundaryRule::circle(&c, eps, n)
    } else {
        BoundaryRule::sphere(&c, eps, n)
    }
}

/// Integrate a multi-component integrand with node doubling until the
/// worst component moves by less than 1e-12 (relative floor included).
fn converged_components(
    dim: usize,
    eps: Scalar,
    f: &dyn Fn(&PointF, &PointF) -> Vec<Scalar>,
    m: usize,
) -> (Vec<Scalar>, usize) {
    let mut n = if dim == 2 { 64 } else { 16 };
    let eval = |n: usize| -> Vec<Scalar> {
        let rule = hole_rule(dim, eps, n);
        let mut acc = vec![0.0; m];
        for i in 0..rule.len() {
            let vals = f(&rule.nodes[i], &rule.normals[i]);
            for (a, v) in acc.iter_mut().zip(vals) {
                *a += rule.weights[i] * v;
            }
        }
        acc
    };
    let mut prev = eval(n);
    for _ in 0..8 {
        let next_n = n * 2;
        let v = eval(next_n);
        let scale = v.iter().fold(1.0_f64, |s, x| s.max(x.abs()));
        let change = v
            .iter()
            .zip(&prev)
            .fold(0.0_f64, |c, (a, b)| c.max((a - b).abs()));
        n = next_n;
        prev = v;
        if change < 1e-12 * scale {
            break;
        }
    }
    let nodes = if dim == 2 { n } else { n * 2 * n };
    (prev, nodes)
}

fn worst_component(lhs: &[Scalar], rhs: &[Scalar]) -> (Scalar, Scalar, Scalar, Scalar) {
    let mut worst = 0usize;
    let mut abs_err = -1.0;
    for i in 0..lhs.len() {
        let e = (lhs[i] - rhs[i]).abs();
        if e > abs_err {
            abs_err = e;
            worst = i;
        }
    }
    let scale = rhs.iter().fold(0.0_f64, |s, x| s.max(x.abs()));
    let rel = if scale > 0.0 { abs_err / scale } else { abs_err };
    (lhs[worst], rhs[worst], abs_err, rel)
}

/// Run one identity at a given admissible sample.
pub fn check_identity(
    id: Identity,
    x: &PointF,
    eps: Scalar,
    dim: usize,
) -> Result<IdentityCheck> {
    if !id.dims().contains(&dim) {
        return Err(Error::Unsupported(format!(
            "{} is not defined in dimension {dim}",
            id.name()
        )));
    }
    if x.len() != dim {
        return Err(Error::DimMismatch {
            expected: dim,
            got: x.len(),
        });
    }
    let ctx = KernelContext::<Scalar>::new(dim)?;
    let interior_sample = matches!(id, Identity::PoissonReconstruction);
    if interior_sample {
        if x.norm() >= eps {
            return Err(Error::InvalidParam(
                "reconstruction point must lie inside the ball".into(),
            ));
        }
    } else if x.norm() <= eps {
        return Err(Error::InsideHole {
            dist: x.norm(),
            eps,
        });
    }

    let n = dim as f64;
    let xn2 = x.norm_squared();
    let e2 = eps * eps;
    let mut bound_ratio = None;

    let (lhs_v, rhs_v, nodes): (Vec<Scalar>, Vec<Scalar>, usize) = match id {
        Identity::FluxTotal => {
            let (l, nodes) = converged_components(
                dim,
                eps,
                &|y, _| vec![kernels::poisson_exterior_ball(x, y, eps, &ctx).unwrap()],
                1,
            );
            let rhs = -(eps / x.norm()).powi(dim as i32 - 2);
            (l, vec![rhs], nodes)
        }
        Identity::FluxMoment1 => {
            let (l, nodes) = converged_components(
                dim,
                eps,
                &|y, _| {
                    let k = kernels::poisson_exterior_ball(x, y, eps, &ctx).unwrap();
                    y.iter().map(|yi| yi * k).collect()
                },
                dim,
            );
            let rhs: Vec<Scalar> = x
                .iter()
                .map(|xi| -xi * eps.powi(dim as i32) / x.norm().powi(dim as i32))
                .collect();
            (l, rhs, nodes)
        }
        Identity::FluxMoment2 => {
            let (l, nodes) = converged_components(
                dim,
                eps,
                &|y, _| {
                    let k = kernels::poisson_exterior_ball(x, y, eps, &ctx).unwrap();
                    let mut out = Vec::with_capacity(dim * dim);
                    for i in 0..dim {
                        for j in 0..dim {
                            out.push(y[i] * y[j] * k);
                        }
                    }
                    out
                },
                dim * dim,
            );
            let pref = -eps.powi(dim as i32) / x.norm().powi(dim as i32);
            let mut rhs = Vec::with_capacity(dim * dim);
            for i in 0..dim {
                for j in 0..dim {
                    let mut v = e2 * x[i] * x[j] / xn2;
                    if i == j {
                        v += (xn2 - e2) / n;
                    }
                    rhs.push(pref * v);
                }
            }
            (l, rhs, nodes)
        }
        Identity::SquaredFluxMoment => {
            let (l, nodes) = converged_components(
                dim,
                eps,
                &|y, _| {
                    let k = kernels::poisson_exterior_ball(x, y, eps, &ctx).unwrap();
                    y.iter().map(|yi| yi / eps * k * k).collect()
                },
                dim,
            );
            let grad = kernels::robin_exterior_ball_grad(x, eps, &ctx)?;
            let rhs: Vec<Scalar> = grad.iter().map(|g| -g).collect();
            (l, rhs, nodes)
        }
        Identity::FundSolFluxMoment => {
            let (l, nodes) = converged_components(
                dim,
                eps,
                &|y, _| {
                    let k = kernels::poisson_exterior_ball(x, y, eps, &ctx).unwrap();
                    let s = kernels::fundamental_solution(x, y, &ctx).unwrap();
                    vec![-k * s]
                },
                1,
            );
            let mut rhs = kernels::robin_exterior_ball(x, eps, &ctx)?;
            if dim == 2 {
                rhs += (x.norm() / eps).ln() / (2.0 * std::f64::consts::PI);
            }
            (l, vec![rhs], nodes)
        }
        Identity::InvDistanceSurface => {
            let (l, nodes) = converged_components(
                dim,
                eps,
                &|y, _| vec![kernels::fundamental_solution(x, y, &ctx).unwrap()],
                1,
            );
            let rhs = eps.powi(dim as i32 - 1) / ((n - 2.0) * x.norm().powi(dim as i32 - 2));
            (l, vec![rhs], nodes)
        }
        Identity::LogSurface => {
            let (l, nodes) = converged_components(
                dim,
                eps,
                &|y, _| vec![(x - y).norm().ln()],
                1,
            );
            let rhs = std::f64::consts::TAU * eps * x.norm().ln();
            (l, vec![rhs], nodes)
        }
        Identity::AbsLogSurfaceBound => {
            let (l, nodes) = converged_components(
                dim,
                eps,
                &|y, _| vec![(x - y).norm().ln().abs()],
                1,
            );
            let rhs = eps * x.norm().ln().abs();
            bound_ratio = Some(l[0] / rhs);
            (l, vec![rhs], nodes)
        }
        Identity::PoissonReconstruction => {
            // harmonic test function u = y_1 y_2, reconstructed at x ∈ B_ε
            let (l, nodes) = converged_components(
                dim,
                eps,
                &|y, _| {
                    let k = (e2 - xn2) / (n * ctx.omega * eps * (x - y).norm().powi(dim as i32));
                    vec![k * y[0] * y[1]]
                },
                1,
            );
            (l, vec![x[0] * x[1]], nodes)
        }
        Identity::GradientRepresentation => {
            let (l, nodes) = converged_components(
                dim,
                eps,
                &|y, nu| {
                    let k = kernels::poisson_exterior_ball(x, y, eps, &ctx).unwrap();
                    // outer normal of the exterior domain is −(radial ν)
                    nu.iter().map(|ni| -ni * k * k).collect()
                },
                dim,
            );
            let rhs = kernels::robin_exterior_ball_grad(x, eps, &ctx)?;
            (l, rhs.iter().copied().collect(), nodes)
        }
    };

    let (lhs, rhs, abs_err, rel_err) = worst_component(&lhs_v, &rhs_v);
    Ok(IdentityCheck {
        name: id.name().to_string(),
        dim,
        eps,
        x: x.iter().copied().collect(),
        lhs_quadrature: lhs,
        rhs_closed_form: rhs,
        abs_err,
        rel_err: if id.is_bound() { 0.0 } else { rel_err },
        nodes_used: nodes,
        bound_ratio,
    })
}

/// Draw an admissible sample for an identity: ε ∈ [0.05, 0.4] and |x|
/// away from both the hole and (for the log identities) the unit circle
/// where the closed form degenerates.
fn sample_point(id: Identity, dim: usize, rng: &mut ChaCha8Rng) -> (PointF, Scalar) {
    let eps = rng.gen_range(0.05..0.4);
    let dir = loop {
        let v = PointF::from_fn(dim, |_, _| rng.gen_range(-1.0..1.0_f64));
        let n = v.norm();
        if n > 1e-3 {
            break v / n;
        }
    };
    if matches!(id, Identity::PoissonReconstruction) {
        let r = eps * rng.gen_range(0.2..0.7);
        return (dir * r, eps);
    }
    loop {
        let r = if rng.gen_bool(0.5) {
            eps * rng.gen_range(1.6..3.0)
        } else {
            rng.gen_range(1.3..3.5)
        };
        if r <= 1.5 * eps {
            continue;
        }
        // keep |ln|x|| bounded away from zero for the log identities
        if matches!(id, Identity::LogSurface | Identity::AbsLogSurfaceBound)
            && r.ln().abs() < 0.2
        {
            continue;
        }
        return (&dir * r, eps);
    }
}

/// Run every identity at `samples` randomized admissible points per
/// supported dimension, seeded for reproducibility.
pub fn run_suite(seed: u64, samples: usize) -> Vec<IdentityCheck> {
    let mut out = Vec::new();
    for id in Identity::ALL {
        for &dim in id.dims() {
            let mut rng = ChaCha8Rng::seed_from_u64(seed ^ (dim as u64) << 8 ^ id_tag(id));
            for _ in 0..samples {
                let (x, eps) = sample_point(id, dim, &mut rng);
                out.push(check_identity(id, &x, eps, dim).expect("admissible sample"));
            }
        }
    }
    out
}

fn id_tag(id: Identity) -> u64 {
    Identity::ALL.iter().position(|&i| i == id).unwrap() as u64
}
