//! Boundary quadrature: trapezoid rule on circles (spectrally accurate for
//! smooth periodic integrands) and product Gauss–Legendre × trapezoid rules
//! on spheres, plus a node-doubling convergence driver.

use crate::{PointF, Scalar};

/// Nodes, outward unit normals and weights of a boundary quadrature rule.
#[derive(Debug, Clone)]
pub struct BoundaryRule {
    pub nodes: Vec<PointF>,
    pub normals: Vec<PointF>,
    pub weights: Vec<Scalar>,
}

impl BoundaryRule {
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// ∫ f(y, ν(y)) dσ_y
    pub fn integrate<F: Fn(&PointF, &PointF) -> Scalar>(&self, f: F) -> Scalar {
        let mut acc = 0.0;
        for i in 0..self.len() {
            acc += self.weights[i] * f(&self.nodes[i], &self.normals[i]);
        }
        acc
    }

    /// Vector-valued surface integral.
    pub fn integrate_vec<F: Fn(&PointF, &PointF) -> PointF>(&self, dim: usize, f: F) -> PointF {
        let mut acc = PointF::zeros(dim);
        for i in 0..self.len() {
            acc += f(&self.nodes[i], &self.normals[i]) * self.weights[i];
        }
        acc
    }

    /// Composite trapezoid rule on the circle |y − c| = r (exact weights for
    /// periodic smooth integrands; geometric convergence).
    pub fn circle(center: &PointF, radius: Scalar, n: usize) -> Self {
        let mut nodes = Vec::with_capacity(n);
        let mut normals = Vec::with_capacity(n);
        let w = std::f64::consts::TAU * radius / n as f64;
        for k in 0..n {
            let t = std::f64::consts::TAU * k as f64 / n as f64;
            let nrm = PointF::from_vec(vec![t.cos(), t.sin()]);
            nodes.push(center + &nrm * radius);
            normals.push(nrm);
        }
        Self {
            nodes,
            normals,
            weights: vec![w; n],
        }
    }

    /// Product rule on the sphere |y − c| = r: Gauss–Legendre in cos θ
    /// (`n_polar` nodes) × trapezoid in φ (`2 n_polar` nodes).
    pub fn sphere(center: &PointF, radius: Scalar, n_polar: usize) -> Self {
        let (ts, ws) = gauss_legendre(n_polar);
        let n_phi = 2 * n_polar;
        let dphi = std::f64::consts::TAU / n_phi as f64;
        let mut nodes = Vec::with_capacity(n_polar * n_phi);
        let mut normals = Vec::with_capacity(n_polar * n_phi);
        let mut weights = Vec::with_capacity(n_polar * n_phi);
        for (t, wt) in ts.iter().zip(&ws) {
            let st = (1.0 - t * t).sqrt();
            for k in 0..n_phi {
                let phi = dphi * k as f64;
                let nrm = PointF::from_vec(vec![st * phi.cos(), st * phi.sin(), *t]);
                nodes.push(center + &nrm * radius);
                normals.push(nrm);
                weights.push(wt * dphi * radius * radius);
            }
        }
        Self {
            nodes,
            normals,
            weights,
        }
    }
}

/// Gauss–Legendre nodes and weights on [−1, 1] by Newton iteration on the
/// three-term recurrence.
pub fn gauss_legendre(n: usize) -> (Vec<Scalar>, Vec<Scalar>) {
    assert!(n >= 1);
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        // Tricomi-style initial guess
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre_with_deriv(n, x);
            dp = d;
            let dx = p / d;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    (nodes, weights)
}

fn legendre_with_deriv(n: usize, x: Scalar) -> (Scalar, Scalar) {
    let mut p0 = 1.0;
    let mut p1 = x;
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

/// Evaluate a quadrature at doubling resolutions until two consecutive
/// values differ by less than `tol` (absolute, floored at `tol`·|value|).
/// Returns the converged value and the node parameter actually used.
pub fn converge<F: FnMut(usize) -> Scalar>(
    mut eval: F,
    n0: usize,
    tol: Scalar,
    max_doublings: usize,
) -> (Scalar, usize) {
    let mut n = n0;
    let mut prev = eval(n);
    for _ in 0..max_doublings {
        let next_n = n * 2;
        let v = eval(next_n);
        if (v - prev).abs() <= tol.max(tol * v.abs()) {
            return (v, next_n);
        }
        prev = v;
        n = next_n;
    }
    (prev, n)
}
