//! Method-of-fundamental-solutions solver for the regular part H(·,y).
//!
//! H(·,y) is harmonic in the solution region with boundary data S(·,y), so
//! it is approximated by a combination of fundamental solutions with poles
//! outside the region: on a dilated copy of ∂Ω and, for punctured domains,
//! on a small sphere inside the hole. A constant basis element is added in
//! 2-D (log sources represent constants badly when the pole curve has unit
//! capacity). The collocation system is oversampled 2× and solved by
//! truncated-SVD least squares; the factorization depends only on the
//! geometry, so one system serves any number of singularities y.
//!
//! The approximation error is harmonic in the region, hence bounded by the
//! boundary residual (maximum principle); the residual is measured at
//! off-lattice validation nodes and recorded on every solution.
//!
//! Accuracy envelope: the boundary data has angular bandwidth growing like
//! |ln tol| / dist(y, ∂Ω), so evaluation needs y (and x) to keep some
//! clearance from ∂Ω. The default presets target clearance ≥ 0.1·radius in
//! 2-D and ≥ 0.45·radius in 3-D at ~1e-9 / 1e-7 residuals respectively, and
//! direct solving of punctured domains assumes ε ≥ 1e-3 · diam(Ω); smaller
//! holes belong to the asymptotic expansions.

use crate::geom::{polar_of, DomainSpec, PuncturedDomain};
use crate::{Error, MatrixF, PointF, Result, Scalar};
use nalgebra::{DMatrix, DVector};
use std::sync::Arc;

/// Resolution knobs for the collocation solver.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct MfsConfig {
    /// Collocation nodes on the outer boundary (poles are half as many).
    pub outer_collocation: usize,
    /// Collocation nodes on the hole boundary.
    pub inner_collocation: usize,
    /// Pole curve dilation factor for the outer boundary.
    pub charge_dilation: Scalar,
    /// Hole poles sit on a sphere of this fraction of the hole radius.
    pub inner_depth: Scalar,
    /// Relative singular-value cutoff of the least-squares solve.
    pub svd_rel_tol: Scalar,
    /// Declared convergence tolerance on the boundary residual.
    pub residual_tol: Scalar,
    /// Node-doubling tolerance for the boundary-integral gradient.
    pub quad_tol: Scalar,
}

impl MfsConfig {
    pub fn for_dim(dim: usize) -> Self {
        match dim {
            2 => Self {
                outer_collocation: 512,
                inner_collocation: 128,
                charge_dilation: 1.10,
                inner_depth: 0.6,
                svd_rel_tol: 1e-12,
                residual_tol: 1e-6,
                quad_tol: 1e-9,
            },
            _ => Self {
                outer_collocation: 1400,
                inner_collocation: 260,
                charge_dilation: 1.25,
                inner_depth: 0.6,
                svd_rel_tol: 1e-12,
                residual_tol: 1e-4,
                quad_tol: 1e-9,
            },
        }
    }

    /// Higher-resolution preset (wider evaluation envelope).
    pub fn fine(dim: usize) -> Self {
        let mut c = Self::for_dim(dim);
        match dim {
            2 => {
                c.outer_collocation = 768;
                c.charge_dilation = 1.07;
            }
            _ => {
                c.outer_collocation = 2300;
            }
        }
        c
    }

    /// Scale the collocation counts by `f` (convergence studies).
    pub fn scaled(&self, f: Scalar) -> Self {
        let mut c = self.clone();
        c.outer_collocation = ((c.outer_collocation as f64 * f).round() as usize).max(16);
        c.inner_collocation = ((c.inner_collocation as f64 * f).round() as usize).max(8);
        c
    }
}

/// The region a system solves on.
#[derive(Debug, Clone)]
pub enum SolveDomain {
    Plain(DomainSpec),
    Punctured(PuncturedDomain),
}

impl SolveDomain {
    pub fn dim(&self) -> usize {
        match self {
            SolveDomain::Plain(d) => d.dim(),
            SolveDomain::Punctured(pd) => pd.dim(),
        }
    }

    pub fn outer(&self) -> &DomainSpec {
        match self {
            SolveDomain::Plain(d) => d,
            SolveDomain::Punctured(pd) => &pd.outer,
        }
    }

    pub fn hole(&self) -> Option<(&PointF, Scalar)> {
        match self {
            SolveDomain::Plain(_) => None,
            SolveDomain::Punctured(pd) => Some((&pd.center, pd.radius)),
        }
    }

    pub fn contains(&self, x: &PointF) -> bool {
        match self {
            SolveDomain::Plain(d) => d.contains(x),
            SolveDomain::Punctured(pd) => pd.contains(x),
        }
    }
}

/// Truncated-SVD factorization of the collocation matrix.
struct TsvdOperator {
    u: MatrixF,
    vt: MatrixF,
    inv_sigma: DVector<Scalar>, // zero where truncated
}

impl TsvdOperator {
    fn new(a: MatrixF, rel_tol: Scalar) -> Self {
        let svd = a.svd(true, true);
        let u = svd.u.expect("svd requested u");
        let vt = svd.v_t.expect("svd requested v_t");
        let smax = svd.singular_values.max();
        let inv_sigma = svd
            .singular_values
            .map(|s| if s > rel_tol * smax { 1.0 / s } else { 0.0 });
        Self { u, vt, inv_sigma }
    }

    fn solve(&self, b: &DVector<Scalar>) -> DVector<Scalar> {
        let mut y = self.u.tr_mul(b);
        y.component_mul_assign(&self.inv_sigma);
        self.vt.tr_mul(&y)
    }
}

/// Free-space kernel at solver precision.
#[inline]
fn kernel(dim: usize, x: &PointF, q: &PointF) -> Scalar {
    let r2 = (x - q).norm_squared();
    if dim == 2 {
        -r2.ln() / (4.0 * std::f64::consts::PI)
    } else {
        1.0 / (4.0 * std::f64::consts::PI * r2.sqrt())
    }
}

/// A solved regular part H(·, y), evaluable with derivatives.
///
/// The representation is `constant + Σ_j c_j S(·, q_j)` with poles `q_j`
/// outside the solution region, so evaluations are harmonic by
/// construction. Immutable and cheap to share across threads.
#[derive(Debug, Clone)]
pub struct HarmonicSolution {
    dim: usize,
    pub charge_points: Arc<Vec<PointF>>,
    pub coefficients: DVector<Scalar>,
    pub constant: Scalar,
    pub singularity: PointF,
    pub boundary_residual: Scalar,
}

impl HarmonicSolution {
    pub fn eval(&self, x: &PointF) -> Scalar {
        let mut v = self.constant;
        let xs = x.as_slice();
        for (c, q) in self.coefficients.iter().zip(self.charge_points.iter()) {
            let qs = q.as_slice();
            let mut r2 = 0.0;
            for k in 0..self.dim {
                let d = xs[k] - qs[k];
                r2 += d * d;
            }
            v += c * if self.dim == 2 {
                -r2.ln() / (4.0 * std::f64::consts::PI)
            } else {
                1.0 / (4.0 * std::f64::consts::PI * r2.sqrt())
            };
        }
        v
    }

    pub fn grad(&self, x: &PointF) -> PointF {
        let mut acc = [0.0_f64; 3];
        let xs = x.as_slice();
        for (c, q) in self.coefficients.iter().zip(self.charge_points.iter()) {
            let qs = q.as_slice();
            let mut d = [0.0_f64; 3];
            let mut r2 = 0.0;
            for k in 0..self.dim {
                d[k] = xs[k] - qs[k];
                r2 += d[k] * d[k];
            }
            let w = if self.dim == 2 {
                -c / (2.0 * std::f64::consts::PI * r2)
            } else {
                -c / (4.0 * std::f64::consts::PI * r2 * r2.sqrt())
            };
            for k in 0..self.dim {
                acc[k] += w * d[k];
            }
        }
        PointF::from_iterator(self.dim, acc.iter().copied().take(self.dim))
    }

    pub fn is_converged(&self, tol: Scalar) -> bool {
        self.boundary_residual <= tol
    }

    /// Gradient accumulated into a fixed-size buffer (hot quadrature path).
    fn grad_into(&self, xs: &[Scalar]) -> [Scalar; 3] {
        let mut acc = [0.0_f64; 3];
        for (c, q) in self.coefficients.iter().zip(self.charge_points.iter()) {
            let qs = q.as_slice();
            let mut d = [0.0_f64; 3];
            let mut r2 = 0.0;
            for k in 0..self.dim {
                d[k] = xs[k] - qs[k];
                r2 += d[k] * d[k];
            }
            let w = if self.dim == 2 {
                -c / (2.0 * std::f64::consts::PI * r2)
            } else {
                -c / (4.0 * std::f64::consts::PI * r2 * r2.sqrt())
            };
            for k in 0..self.dim {
                acc[k] += w * d[k];
            }
        }
        acc
    }
}

/// Geometry + factorized collocation operator; one per (domain, resolution).
pub struct MfsSystem {
    domain: SolveDomain,
    cfg: MfsConfig,
    colloc: Vec<PointF>,
    validation: Vec<PointF>,
    a_val: MatrixF,
    charges: Arc<Vec<PointF>>,
    op: TsvdOperator,
    with_constant: bool,
    quad_outer: Vec<crate::quad::BoundaryRule>,
    quad_hole: Vec<crate::quad::BoundaryRule>,
}

impl MfsSystem {
    pub fn plain(domain: DomainSpec, cfg: MfsConfig) -> Result<Self> {
        domain.validate()?;
        Self::build(SolveDomain::Plain(domain), cfg)
    }

    pub fn punctured(pd: PuncturedDomain, cfg: MfsConfig) -> Result<Self> {
        pd.validate()?;
        if pd.radius < 1e-3 * pd.outer.diameter() {
            return Err(Error::Geometry(format!(
                "hole radius {:.3e} below the direct-solve envelope (1e-3 · diam = {:.3e}); \
                 use the asymptotic expansions instead",
                pd.radius,
                1e-3 * pd.outer.diameter()
            )));
        }
        Self::build(SolveDomain::Punctured(pd), cfg)
    }

    fn build(domain: SolveDomain, cfg: MfsConfig) -> Result<Self> {
        let dim = domain.dim();
        let outer = domain.outer().clone();

        let mut colloc = outer.collocation_points(cfg.outer_collocation);
        // residual probes can be sparser than the collocation grid
        let n_val = (cfg.outer_collocation / 2).max(64);
        let mut validation = outer.validation_points(n_val);
        let mut charges = outer.charge_points(cfg.outer_collocation / 2, cfg.charge_dilation);

        if let SolveDomain::Punctured(pd) = &domain {
            colloc.extend(pd.hole_collocation(cfg.inner_collocation));
            validation.extend(pd.hole_validation((cfg.inner_collocation / 2).max(32)));
            charges.extend(pd.hole_charges(cfg.inner_collocation / 2, cfg.inner_depth));
        }

        let with_constant = dim == 2;
        let m = colloc.len();
        let n = charges.len() + usize::from(with_constant);
        let mut a = DMatrix::zeros(m, n);
        for (i, x) in colloc.iter().enumerate() {
            let mut j = 0;
            if with_constant {
                a[(i, 0)] = 1.0;
                j = 1;
            }
            for q in &charges {
                a[(i, j)] = kernel(dim, x, q);
                j += 1;
            }
        }
        let op = TsvdOperator::new(a, cfg.svd_rel_tol);
        let mut a_val = DMatrix::zeros(validation.len(), n);
        for (i, v) in validation.iter().enumerate() {
            let mut j = 0;
            if with_constant {
                a_val[(i, 0)] = 1.0;
                j = 1;
            }
            for q in &charges {
                a_val[(i, j)] = kernel(dim, v, q);
                j += 1;
            }
        }
        // boundary quadrature levels for the gradient representation,
        // doubled in resolution per level
        let (o0, h0) = if dim == 2 { (128usize, 32usize) } else { (400, 100) };
        let mut quad_outer = Vec::new();
        let mut quad_hole = Vec::new();
        for lvl in 0..4 {
            let n_o = o0 << lvl;
            let n_h = h0 << lvl;
            quad_outer.push(outer.boundary_rule(if dim == 2 { n_o } else { polar_of(n_o) }));
            if let SolveDomain::Punctured(pd) = &domain {
                quad_hole.push(pd.hole_rule(if dim == 2 { n_h } else { polar_of(n_h) }));
            }
        }
        Ok(Self {
            domain,
            cfg,
            colloc,
            validation,
            a_val,
            charges: Arc::new(charges),
            op,
            with_constant,
            quad_outer,
            quad_hole,
        })
    }

    pub fn domain(&self) -> &SolveDomain {
        &self.domain
    }

    pub fn dim(&self) -> usize {
        self.domain.dim()
    }

    pub fn config(&self) -> &MfsConfig {
        &self.cfg
    }

    /// Solve for the regular part with singularity y (strictly interior).
    pub fn solve_regular_part(&self, y: &PointF) -> Result<HarmonicSolution> {
        if y.len() != self.dim() {
            return Err(Error::DimMismatch {
                expected: self.dim(),
                got: y.len(),
            });
        }
        if !self.domain.contains(y) {
            return Err(Error::OutsideDomain);
        }
        let dim = self.dim();
        let b = DVector::from_iterator(
            self.colloc.len(),
            self.colloc.iter().map(|x| kernel(dim, x, y)),
        );
        let c = self.op.solve(&b);
        let mut res: Scalar = 0.0;
        let fitted = &self.a_val * &c;
        for (i, v) in self.validation.iter().enumerate() {
            res = res.max((fitted[i] - kernel(dim, v, y)).abs());
        }
        let (constant, coeffs) = if self.with_constant {
            (c[0], DVector::from_iterator(c.len() - 1, c.iter().skip(1).copied()))
        } else {
            (0.0, c)
        };
        Ok(HarmonicSolution {
            dim,
            charge_points: self.charges.clone(),
            coefficients: coeffs,
            constant,
            singularity: y.clone(),
            boundary_residual: res,
        })
    }

    /// Robin function R(x) = H(x,x).
    pub fn robin(&self, x: &PointF) -> Result<Scalar> {
        let sol = self.solve_regular_part(x)?;
        if !sol.is_converged(self.cfg.residual_tol) {
            return Err(Error::NonConverged {
                residual: sol.boundary_residual,
                tol: self.cfg.residual_tol,
            });
        }
        Ok(sol.eval(x))
    }

    /// ∇R(x), either from the boundary representation
    /// ∇R(x) = ∫_{∂D} ν(y) (∂G(x,y)/∂ν_y)² dσ_y over both boundary
    /// components (high-order quadrature, node-doubled), or by central
    /// finite differences of `robin`.
    pub fn robin_gradient(&self, x: &PointF, method: GradientMethod) -> Result<PointF> {
        match method {
            GradientMethod::FiniteDifference => {
                let h = Scalar::EPSILON.cbrt() * x.norm().max(1.0);
                let dim = self.dim();
                let mut g = PointF::zeros(dim);
                for i in 0..dim {
                    let mut xp = x.clone();
                    let mut xm = x.clone();
                    xp[i] += h;
                    xm[i] -= h;
                    g[i] = (self.robin(&xp)? - self.robin(&xm)?) / (2.0 * h);
                }
                Ok(g)
            }
            GradientMethod::BoundaryFormula => {
                let sol = self.solve_regular_part(x)?;
                if !sol.is_converged(self.cfg.residual_tol) {
                    return Err(Error::NonConverged {
                        residual: sol.boundary_residual,
                        tol: self.cfg.residual_tol,
                    });
                }
                Ok(self.gradient_by_boundary_formula(x, &sol))
            }
        }
    }

    fn gradient_by_boundary_formula(&self, x: &PointF, sol: &HarmonicSolution) -> PointF {
        let dim = self.dim();
        let xs_owned: Vec<Scalar> = x.iter().copied().collect();
        let xs = &xs_owned[..];
        // squared normal derivative of G(·,x) = S(·,x) − H(·,x), written out
        // to keep the quadrature loop allocation-free
        let flux_sq = |y: &PointF, nu: &PointF| -> Scalar {
            let ys = y.as_slice();
            let mut d = [0.0_f64; 3];
            let mut r2 = 0.0;
            for k in 0..dim {
                d[k] = ys[k] - xs[k];
                r2 += d[k] * d[k];
            }
            let w = if dim == 2 {
                -1.0 / (2.0 * std::f64::consts::PI * r2)
            } else {
                -1.0 / (4.0 * std::f64::consts::PI * r2 * r2.sqrt())
            };
            let hg = sol.grad_into(ys);
            let mut k_nu = 0.0;
            for k in 0..dim {
                k_nu += nu[k] * (w * d[k] - hg[k]);
            }
            k_nu * k_nu
        };
        let eval = |lvl: usize| -> PointF {
            let mut g = PointF::zeros(dim);
            let outer_rule = &self.quad_outer[lvl];
            for i in 0..outer_rule.len() {
                let f = flux_sq(&outer_rule.nodes[i], &outer_rule.normals[i]);
                g.axpy(outer_rule.weights[i] * f, &outer_rule.normals[i], 1.0);
            }
            if !self.quad_hole.is_empty() {
                // the domain's outer normal on the hole points to its center
                let hole_rule = &self.quad_hole[lvl];
                for i in 0..hole_rule.len() {
                    let f = flux_sq(&hole_rule.nodes[i], &hole_rule.normals[i]);
                    g.axpy(-hole_rule.weights[i] * f, &hole_rule.normals[i], 1.0);
                }
            }
            g
        };
        let mut prev = eval(0);
        for lvl in 1..self.quad_outer.len() {
            let next = eval(lvl);
            let change = (&next - &prev).abs().max();
            prev = next;
            if change < self.cfg.quad_tol {
                break;
            }
        }
        prev
    }

    /// Finite-difference Hessian of R (symmetrized central differences of
    /// the boundary-formula gradient). The symmetry defect of the raw
    /// matrix is reported as a conditioning diagnostic.
    pub fn robin_hessian(&self, x: &PointF) -> Result<NumericHessian> {
        let dim = self.dim();
        let h = Scalar::EPSILON.powf(0.25) * x.norm().max(1.0);
        let mut m = DMatrix::zeros(dim, dim);
        for i in 0..dim {
            let mut xp = x.clone();
            let mut xm = x.clone();
            xp[i] += h;
            xm[i] -= h;
            let gp = self.robin_gradient(&xp, GradientMethod::BoundaryFormula)?;
            let gm = self.robin_gradient(&xm, GradientMethod::BoundaryFormula)?;
            for j in 0..dim {
                m[(i, j)] = (gp[j] - gm[j]) / (2.0 * h);
            }
        }
        let mut defect: Scalar = 0.0;
        for i in 0..dim {
            for j in (i + 1)..dim {
                defect = defect.max((m[(i, j)] - m[(j, i)]).abs());
            }
        }
        let sym = (&m + m.transpose()) * 0.5;
        Ok(NumericHessian {
            matrix: sym,
            symmetry_defect: defect,
        })
    }
}

/// How `robin_gradient` differentiates.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GradientMethod {
    BoundaryFormula,
    FiniteDifference,
}

/// Symmetrized finite-difference Hessian with its symmetry defect
/// (large defect means differencing noise dominates).
#[derive(Debug, Clone)]
pub struct NumericHessian {
    pub matrix: MatrixF,
    pub symmetry_defect: Scalar,
}
