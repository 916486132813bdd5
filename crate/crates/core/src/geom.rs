//! Domain descriptions and punctured domains.
//!
//! Supported outer domains: balls (any supported dimension), the
//! perturbed-ellipsoid family Ω_δ = {Σ x_i²(1+α_i δ)² < 1}, and 2-D
//! star-shaped domains r(θ) = c₀ + Σ (a_k cos kθ + b_k sin kθ). The solver
//! works in dimensions 2 and 3; the closed-form kernel layer is
//! dimension-generic and does not use this module.

use crate::quad::BoundaryRule;
use crate::{Error, PointF, Result, Scalar};
use serde::{Deserialize, Serialize};

/// Description of the outer domain Ω.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum DomainSpec {
    Ball {
        radius: Scalar,
        dim: usize,
    },
    /// Ω_δ = {Σ x_i²(1+α_i δ)² < 1}: an ellipsoid with semi-axes
    /// 1/(1+α_i δ), convex and coordinate-symmetric.
    PerturbedEllipsoid {
        alpha: Vec<Scalar>,
        delta: Scalar,
    },
    /// r(θ) = c₀ + Σ_k (a_k cos kθ + b_k sin kθ), strictly positive.
    /// The collocation solver assumes the coefficients decay at least
    /// geometrically (analytic boundary).
    StarShaped2d {
        base_radius: Scalar,
        #[serde(default)]
        cos_coeffs: Vec<Scalar>,
        #[serde(default)]
        sin_coeffs: Vec<Scalar>,
    },
}

impl DomainSpec {
    pub fn dim(&self) -> usize {
        match self {
            DomainSpec::Ball { dim, .. } => *dim,
            DomainSpec::PerturbedEllipsoid { alpha, .. } => alpha.len(),
            DomainSpec::StarShaped2d { .. } => 2,
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            DomainSpec::Ball { radius, dim } => {
                if !(2..=3).contains(dim) {
                    return Err(Error::Geometry(format!(
                        "solver supports dimensions 2 and 3, got {dim}"
                    )));
                }
                if !(*radius > 0.0) {
                    return Err(Error::Geometry("ball radius must be positive".into()));
                }
            }
            DomainSpec::PerturbedEllipsoid { alpha, delta } => {
                let n = alpha.len();
                if !(2..=3).contains(&n) {
                    return Err(Error::Geometry(format!(
                        "solver supports dimensions 2 and 3, got {n}"
                    )));
                }
                if !(*delta >= 0.0) {
                    return Err(Error::Geometry("delta must be nonnegative".into()));
                }
                let mut prev = 0.0;
                for &a in alpha {
                    if !(a > 0.0) || a < prev {
                        return Err(Error::Geometry(
                            "alpha must be positive and ascending".into(),
                        ));
                    }
                    prev = a;
                }
                if delta * alpha[n - 1] >= 0.5 {
                    return Err(Error::Geometry(
                        "delta * alpha_max must stay below 0.5 (near-ball regime)".into(),
                    ));
                }
            }
            DomainSpec::StarShaped2d { .. } => {
                let mut min_r = Scalar::INFINITY;
                for k in 0..720 {
                    let t = std::f64::consts::TAU * k as f64 / 720.0;
                    min_r = min_r.min(self.star_radius(t).0);
                }
                if !(min_r > 0.0) {
                    return Err(Error::Geometry(
                        "star-shaped radius function must be strictly positive".into(),
                    ));
                }
            }
        }
        Ok(())
    }

    /// Semi-axes of the perturbed ellipsoid.
    fn semi_axes(alpha: &[Scalar], delta: Scalar) -> Vec<Scalar> {
        alpha.iter().map(|a| 1.0 / (1.0 + a * delta)).collect()
    }

    /// Radius function and derivative of the star-shaped boundary.
    fn star_radius(&self, theta: Scalar) -> (Scalar, Scalar) {
        match self {
            DomainSpec::StarShaped2d {
                base_radius,
                cos_coeffs,
                sin_coeffs,
            } => {
                let mut r = *base_radius;
                let mut dr = 0.0;
                for (k, &a) in cos_coeffs.iter().enumerate() {
                    let kf = (k + 1) as f64;
                    r += a * (kf * theta).cos();
                    dr -= a * kf * (kf * theta).sin();
                }
                for (k, &b) in sin_coeffs.iter().enumerate() {
                    let kf = (k + 1) as f64;
                    r += b * (kf * theta).sin();
                    dr += b * kf * (kf * theta).cos();
                }
                (r, dr)
            }
            _ => unreachable!("star_radius only applies to StarShaped2d"),
        }
    }

    pub fn contains(&self, x: &PointF) -> bool {
        self.signed_margin(x) > 0.0
    }

    /// Approximate distance from x to the boundary, positive inside.
    /// Exact for balls; first-order estimates otherwise.
    pub fn signed_margin(&self, x: &PointF) -> Scalar {
        match self {
            DomainSpec::Ball { radius, .. } => radius - x.norm(),
            DomainSpec::PerturbedEllipsoid { alpha, delta } => {
                // level of sqrt(Σ x_i² k_i²), gradient magnitude ≤ k_max
                let mut q = 0.0;
                for (xi, a) in x.iter().zip(alpha) {
                    let k = 1.0 + a * delta;
                    q += xi * xi * k * k;
                }
                let kmax = 1.0 + alpha[alpha.len() - 1] * delta;
                (1.0 - q.sqrt()) / kmax
            }
            DomainSpec::StarShaped2d { .. } => {
                let theta = x[1].atan2(x[0]);
                let (r, dr) = self.star_radius(theta);
                // radial gap scaled by the boundary slope
                (r - x.norm()) * r / (r * r + dr * dr).sqrt()
            }
        }
    }

    pub fn diameter(&self) -> Scalar {
        match self {
            DomainSpec::Ball { radius, .. } => 2.0 * radius,
            DomainSpec::PerturbedEllipsoid { alpha, delta } => {
                2.0 / (1.0 + alpha[0] * delta)
            }
            DomainSpec::StarShaped2d { .. } => {
                let mut m: Scalar = 0.0;
                for k in 0..720 {
                    let t = std::f64::consts::TAU * k as f64 / 720.0;
                    m = m.max(self.star_radius(t).0);
                }
                2.0 * m
            }
        }
    }

    pub fn bounding_box(&self) -> (PointF, PointF) {
        let n = self.dim();
        let half = self.diameter() / 2.0;
        (
            PointF::from_element(n, -half),
            PointF::from_element(n, half),
        )
    }

    fn boundary_point_2d(&self, theta: Scalar, scale: Scalar) -> PointF {
        match self {
            DomainSpec::Ball { radius, .. } => {
                PointF::from_vec(vec![scale * radius * theta.cos(), scale * radius * theta.sin()])
            }
            DomainSpec::PerturbedEllipsoid { alpha, delta } => {
                let ax = Self::semi_axes(alpha, *delta);
                PointF::from_vec(vec![
                    scale * ax[0] * theta.cos(),
                    scale * ax[1] * theta.sin(),
                ])
            }
            DomainSpec::StarShaped2d { .. } => {
                let (r, _) = self.star_radius(theta);
                PointF::from_vec(vec![scale * r * theta.cos(), scale * r * theta.sin()])
            }
        }
    }

    fn surface_points_3d(&self, n: usize, scale: Scalar, rot: Scalar) -> Vec<PointF> {
        let ax = match self {
            DomainSpec::Ball { radius, .. } => vec![*radius; 3],
            DomainSpec::PerturbedEllipsoid { alpha, delta } => Self::semi_axes(alpha, *delta),
            DomainSpec::StarShaped2d { .. } => unreachable!("star-shaped domains are 2-D"),
        };
        fibonacci_sphere(n, rot)
            .into_iter()
            .map(|u| {
                PointF::from_vec(vec![
                    scale * ax[0] * u[0],
                    scale * ax[1] * u[1],
                    scale * ax[2] * u[2],
                ])
            })
            .collect()
    }

    /// Collocation nodes on the boundary.
    pub fn collocation_points(&self, n: usize) -> Vec<PointF> {
        if self.dim() == 2 {
            (0..n)
                .map(|k| self.boundary_point_2d(std::f64::consts::TAU * k as f64 / n as f64, 1.0))
                .collect()
        } else {
            self.surface_points_3d(n, 1.0, 0.0)
        }
    }

    /// Off-lattice nodes used to measure the boundary residual.
    pub fn validation_points(&self, n: usize) -> Vec<PointF> {
        if self.dim() == 2 {
            (0..n)
                .map(|k| {
                    self.boundary_point_2d(std::f64::consts::TAU * (k as f64 + 0.5) / n as f64, 1.0)
                })
                .collect()
        } else {
            self.surface_points_3d(n + 61, 1.0, 0.731)
        }
    }

    /// Fundamental-solution pole locations on a dilated copy of the boundary.
    pub fn charge_points(&self, n: usize, dilation: Scalar) -> Vec<PointF> {
        if self.dim() == 2 {
            (0..n)
                .map(|k| {
                    self.boundary_point_2d(
                        std::f64::consts::TAU * (k as f64 + 0.5) / n as f64,
                        dilation,
                    )
                })
                .collect()
        } else {
            self.surface_points_3d(n, dilation, 0.317)
        }
    }

    /// Quadrature rule over the boundary; `n` is the angular count in 2-D
    /// and the polar count of the product rule in 3-D.
    pub fn boundary_rule(&self, n: usize) -> BoundaryRule {
        match self.dim() {
            2 => {
                let mut nodes = Vec::with_capacity(n);
                let mut normals = Vec::with_capacity(n);
                let mut weights = Vec::with_capacity(n);
                let dt = std::f64::consts::TAU / n as f64;
                for k in 0..n {
                    let t = dt * k as f64;
                    match self {
                        DomainSpec::Ball { radius, .. } => {
                            let nrm = PointF::from_vec(vec![t.cos(), t.sin()]);
                            nodes.push(&nrm * *radius);
                            normals.push(nrm);
                            weights.push(radius * dt);
                        }
                        DomainSpec::PerturbedEllipsoid { alpha, delta } => {
                            let ax = Self::semi_axes(alpha, *delta);
                            let (a, b) = (ax[0], ax[1]);
                            nodes.push(PointF::from_vec(vec![a * t.cos(), b * t.sin()]));
                            let speed = ((a * t.sin()).powi(2) + (b * t.cos()).powi(2)).sqrt();
                            let nrm =
                                PointF::from_vec(vec![b * t.cos() / speed, a * t.sin() / speed]);
                            normals.push(nrm);
                            weights.push(speed * dt);
                        }
                        DomainSpec::StarShaped2d { .. } => {
                            let (r, dr) = self.star_radius(t);
                            nodes.push(PointF::from_vec(vec![r * t.cos(), r * t.sin()]));
                            let (dx, dy) = (
                                dr * t.cos() - r * t.sin(),
                                dr * t.sin() + r * t.cos(),
                            );
                            let speed = (dx * dx + dy * dy).sqrt();
                            normals.push(PointF::from_vec(vec![dy / speed, -dx / speed]));
                            weights.push(speed * dt);
                        }
                    }
                }
                BoundaryRule {
                    nodes,
                    normals,
                    weights,
                }
            }
            3 => {
                let ax = match self {
                    DomainSpec::Ball { radius, .. } => vec![*radius; 3],
                    DomainSpec::PerturbedEllipsoid { alpha, delta } => {
                        Self::semi_axes(alpha, *delta)
                    }
                    DomainSpec::StarShaped2d { .. } => unreachable!(),
                };
                let unit = BoundaryRule::sphere(&PointF::zeros(3), 1.0, n);
                let det = ax[0] * ax[1] * ax[2];
                let mut nodes = Vec::with_capacity(unit.len());
                let mut normals = Vec::with_capacity(unit.len());
                let mut weights = Vec::with_capacity(unit.len());
                for i in 0..unit.len() {
                    let u = &unit.normals[i];
                    let x = PointF::from_vec(vec![ax[0] * u[0], ax[1] * u[1], ax[2] * u[2]]);
                    // surface element of the linear map diag(ax)
                    let co = PointF::from_vec(vec![u[0] / ax[0], u[1] / ax[1], u[2] / ax[2]]);
                    let jac = det * co.norm();
                    nodes.push(x);
                    normals.push(&co / co.norm());
                    weights.push(unit.weights[i] * jac);
                }
                BoundaryRule {
                    nodes,
                    normals,
                    weights,
                }
            }
            d => panic!("unsupported dimension {d}"),
        }
    }

    /// Minimum distance from p to the (sampled) boundary.
    pub fn min_boundary_dist(&self, p: &PointF) -> Scalar {
        let pts = if self.dim() == 2 {
            self.collocation_points(1024)
        } else {
            self.surface_points_3d(2048, 1.0, 0.0)
        };
        pts.iter()
            .map(|b| (b - p).norm())
            .fold(Scalar::INFINITY, Scalar::min)
    }
}

/// Near-uniform point set on the unit sphere (golden-angle spiral).
/// `rot` offsets the azimuth so distinct sets do not share nodes.
pub fn fibonacci_sphere(n: usize, rot: Scalar) -> Vec<[Scalar; 3]> {
    let golden = std::f64::consts::PI * (3.0 - 5.0_f64.sqrt());
    (0..n)
        .map(|k| {
            let z = 1.0 - 2.0 * (k as f64 + 0.5) / n as f64;
            let r = (1.0 - z * z).sqrt();
            let t = golden * k as f64 + rot;
            [r * t.cos(), r * t.sin(), z]
        })
        .collect()
}

/// Ω with a closed ball B(center, radius) removed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PuncturedDomain {
    pub outer: DomainSpec,
    pub center: PointF,
    pub radius: Scalar,
}

impl PuncturedDomain {
    pub fn new(outer: DomainSpec, center: PointF, radius: Scalar) -> Result<Self> {
        let pd = Self {
            outer,
            center,
            radius,
        };
        pd.validate()?;
        Ok(pd)
    }

    pub fn dim(&self) -> usize {
        self.outer.dim()
    }

    pub fn validate(&self) -> Result<()> {
        self.outer.validate()?;
        if self.center.len() != self.outer.dim() {
            return Err(Error::DimMismatch {
                expected: self.outer.dim(),
                got: self.center.len(),
            });
        }
        if !(self.radius > 0.0) {
            return Err(Error::Geometry("hole radius must be positive".into()));
        }
        if !self.outer.contains(&self.center) {
            return Err(Error::Geometry("hole center must lie inside the domain".into()));
        }
        let clearance = self.outer.min_boundary_dist(&self.center);
        if clearance <= self.radius {
            return Err(Error::Geometry(format!(
                "hole of radius {:.3e} does not fit: boundary clearance is {:.3e}",
                self.radius, clearance
            )));
        }
        Ok(())
    }

    pub fn contains(&self, x: &PointF) -> bool {
        self.outer.contains(x) && (x - &self.center).norm() > self.radius
    }

    /// Quadrature rule on the hole sphere with normals pointing away from
    /// the hole center (the domain's outer normal there is the negative).
    pub fn hole_rule(&self, n: usize) -> BoundaryRule {
        if self.dim() == 2 {
            BoundaryRule::circle(&self.center, self.radius, n)
        } else {
            BoundaryRule::sphere(&self.center, self.radius, n)
        }
    }

    pub fn hole_collocation(&self, n: usize) -> Vec<PointF> {
        self.hole_rule(if self.dim() == 2 { n } else { polar_of(n) })
            .nodes
    }

    pub fn hole_validation(&self, n: usize) -> Vec<PointF> {
        if self.dim() == 2 {
            (0..n)
                .map(|k| {
                    let t = std::f64::consts::TAU * (k as f64 + 0.5) / n as f64;
                    &self.center
                        + PointF::from_vec(vec![t.cos(), t.sin()]) * self.radius
                })
                .collect()
        } else {
            fibonacci_sphere(n + 23, 0.4142)
                .into_iter()
                .map(|u| &self.center + PointF::from_vec(u.to_vec()) * self.radius)
                .collect()
        }
    }

    /// Pole locations inside the hole, on a sphere of radius `depth`·ε.
    pub fn hole_charges(&self, n: usize, depth: Scalar) -> Vec<PointF> {
        let r = depth * self.radius;
        if self.dim() == 2 {
            (0..n)
                .map(|k| {
                    let t = std::f64::consts::TAU * (k as f64 + 0.5) / n as f64;
                    &self.center + PointF::from_vec(vec![t.cos(), t.sin()]) * r
                })
                .collect()
        } else {
            fibonacci_sphere(n, 0.9)
                .into_iter()
                .map(|u| &self.center + PointF::from_vec(u.to_vec()) * r)
                .collect()
        }
    }
}

/// Polar count whose product rule has roughly `n` nodes.
pub(crate) fn polar_of(n: usize) -> usize {
    (((n as f64) / 2.0).sqrt().ceil() as usize).max(4)
}
