//! Asymptotics of the Robin function near a small hole.
//!
//! Remove B(P,ε) from Ω. Away from the hole, R_{Ω_ε} ≈ R_Ω; near the hole
//! the exterior-ball Robin function takes over and, after rescaling, the
//! near-hole behaviour is governed by explicit limit fields:
//!
//! * when ∇R_Ω(P) ≠ 0, the rescaled limit is the [`GradientLimit`]
//!   `F(y) = ∇R_Ω(P)·y + D_N/((2N−4)|y|^{2N−4})` (log form in 2-D), whose
//!   unique critical point fixes the location of one new critical point of
//!   R_{Ω_ε} at scale ε^{(N−2)/(2N−3)} (the root of `r = ln r/ln ε` in 2-D);
//! * when ∇R_Ω(P) = 0 with nondegenerate Hessian, the limit is the
//!   [`HessianLimit`] `F̂(y) = ½ yᵀ∇²R_Ω(P) y + D_N/((2N−4)|y|^{2N−4})`,
//!   with one antipodal pair of critical points per simple positive
//!   eigenvalue at scale ε^{(N−2)/(2N−2)} (root of `r² = ln r/(λπ ln ε)`
//!   in 2-D).
//!
//! The module also carries the uniform expansions of R, ∇R and ∇²R on the
//! punctured domain (exact leading terms; remainders exposed as evaluable
//! budget shapes so tests can set tolerances) and the critical-point count
//! bookkeeping.

use crate::kernels;
use crate::{real, Error, KernelContext, Point, PointF, Real, Result, Scalar};
use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

// ---------------------------------------------------------------------------
// scalar radius equations (2-D near-hole distance scales)
// ---------------------------------------------------------------------------

/// Bisection to ~1e-15 absolute on a bracketed monotone root.
fn bisect<T: Real>(f: impl Fn(T) -> T, mut lo: T, mut hi: T) -> T {
    let half = real::<T>(0.5);
    for _ in 0..200 {
        let mid = (lo + hi) * half;
        if mid <= lo || mid >= hi {
            break;
        }
        if f(mid) < T::zero() {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo < real(1e-15) {
            break;
        }
    }
    (lo + hi) * half
}

/// Widen a candidate bracket until f changes sign across it (f increasing).
fn ensure_bracket<T: Real>(f: &impl Fn(T) -> T, lo: T, hi: T) -> (T, T) {
    let mut lo = lo;
    let mut hi = hi;
    let half = real::<T>(0.5);
    let two = real::<T>(2.0);
    let mut guard = 0;
    while f(lo) >= T::zero() && guard < 2000 {
        lo *= half;
        guard += 1;
    }
    let mut guard = 0;
    while f(hi) <= T::zero() && guard < 2000 {
        hi *= two;
        guard += 1;
    }
    (lo, hi)
}

/// Interval (1/|ln ε|, 1/√|ln ε|) that brackets [`gradient_case_scale`]
/// whenever |ln ε| > e.
pub fn gradient_case_scale_bracket<T: Real>(eps: T) -> (T, T) {
    let l = -eps.ln();
    (T::one() / l, T::one() / l.sqrt())
}

/// Unique positive root r_ε of `r − ln r / ln ε = 0` for ε ∈ (0,1): the
/// 2-D distance scale of the near-hole critical point when ∇R_Ω(P) ≠ 0.
///
/// The function is strictly increasing (g' = 1 − 1/(r ln ε) > 0), so the
/// root is unique on (0,∞). The standard bracket is checked for an actual
/// sign change each call and widened when ε is too moderate for it.
pub fn gradient_case_scale<T: Real>(eps: T) -> Result<T> {
    if !(eps > T::zero() && eps < T::one()) {
        return Err(Error::InvalidParam("eps must lie in (0,1)".into()));
    }
    let ln_eps = eps.ln();
    let g = move |r: T| r - r.ln() / ln_eps;
    let (lo, hi) = gradient_case_scale_bracket(eps);
    let (lo, hi) = ensure_bracket(&g, lo, hi);
    Ok(bisect(g, lo, hi))
}

/// Interval (K^{-1/2}, K^{-1/4}) with K = λπ|ln ε| that brackets
/// [`degenerate_case_scale`] whenever K > e².
pub fn degenerate_case_scale_bracket<T: Real>(eps: T, lambda: T) -> (T, T) {
    let k = lambda * T::pi() * -eps.ln();
    (
        T::one() / k.sqrt(),
        T::one() / k.sqrt().sqrt(),
    )
}

/// Unique positive root r̂_{ε,λ} of `r² − ln r / (λ π ln ε) = 0`: the 2-D
/// distance scale of the near-hole critical points generated by a positive
/// Hessian eigenvalue λ.
///
/// h is strictly increasing, so the root is unique; the standard bracket
/// only contains it for λπ|ln ε| > e² (its lower endpoint h-value is
/// (2 − ln K)/(2K)), so the sign change is verified and the bracket
/// widened when needed.
pub fn degenerate_case_scale<T: Real>(eps: T, lambda: T) -> Result<T> {
    if !(eps > T::zero() && eps < T::one()) {
        return Err(Error::InvalidParam("eps must lie in (0,1)".into()));
    }
    if !(lambda > T::zero()) {
        return Err(Error::InvalidParam("lambda must be positive".into()));
    }
    let k = lambda * T::pi() * eps.ln();
    let h = move |r: T| r * r - r.ln() / k;
    let (lo, hi) = degenerate_case_scale_bracket(eps, lambda);
    let (lo, hi) = ensure_bracket(&h, lo, hi);
    Ok(bisect(h, lo, hi))
}

// ---------------------------------------------------------------------------
// limit fields
// ---------------------------------------------------------------------------

/// −D_N ( δ_ik/|y|^{2N−2} − (2N−2) y_i y_k / |y|^{2N} ): the Hessian of the
/// exterior contribution shared by both limit fields.
fn exterior_limit_hessian<T: Real>(y: &Point<T>, ctx: &KernelContext<T>) -> DMatrix<T> {
    let n = ctx.dim;
    let y2 = y.norm_squared();
    let pow = y2.powf(real::<T>(n as f64 - 1.0));
    let a = ctx.d / pow;
    let b = real::<T>(2.0 * n as f64 - 2.0) * ctx.d / (pow * y2);
    let mut h = DMatrix::zeros(n, n);
    for i in 0..n {
        for k in 0..n {
            h[(i, k)] = b * y[i] * y[k] - if i == k { a } else { T::zero() };
        }
    }
    h
}

fn check_nonzero<T: Real>(y: &Point<T>) -> Result<()> {
    if y.norm_squared() == T::zero() {
        return Err(Error::InvalidParam(
            "limit fields are singular at the origin".into(),
        ));
    }
    Ok(())
}

/// Near-hole limit field for the nonzero-gradient case:
/// `F(y) = g·y + D_N/((2N−4)|y|^{2N−4})` (N ≥ 3),
/// `F(y) = g·y − D_2 ln|y|` (N = 2), where g = ∇R_Ω(P).
#[derive(Debug, Clone)]
pub struct GradientLimit<T: Real> {
    pub grad_outer: Point<T>,
    pub ctx: KernelContext<T>,
}

impl<T: Real> GradientLimit<T> {
    pub fn new(grad_outer: Point<T>, ctx: KernelContext<T>) -> Result<Self> {
        if grad_outer.len() != ctx.dim {
            return Err(Error::DimMismatch {
                expected: ctx.dim,
                got: grad_outer.len(),
            });
        }
        if grad_outer.norm_squared() == T::zero() {
            return Err(Error::InvalidParam(
                "gradient-case limit needs a nonzero outer gradient".into(),
            ));
        }
        Ok(Self { grad_outer, ctx })
    }

    pub fn value(&self, y: &Point<T>) -> Result<T> {
        check_nonzero(y)?;
        let lin = self.grad_outer.dot(y);
        Ok(lin + exterior_limit_value(y, &self.ctx))
    }

    /// ∇F(y) = g − D_N y/|y|^{2N−2}.
    pub fn grad(&self, y: &Point<T>) -> Result<Point<T>> {
        check_nonzero(y)?;
        let y2 = y.norm_squared();
        let s = self.ctx.d / y2.powf(real::<T>(self.ctx.dim as f64 - 1.0));
        Ok(&self.grad_outer - y * s)
    }

    pub fn hessian(&self, y: &Point<T>) -> Result<DMatrix<T>> {
        check_nonzero(y)?;
        Ok(exterior_limit_hessian(y, &self.ctx))
    }

    /// The unique critical point: y₀ = (D_N/|g|)^{1/(2N−3)} g/|g|.
    pub fn critical_point(&self) -> Point<T> {
        let g = self.grad_outer.norm();
        let expo = T::one() / real::<T>(2.0 * self.ctx.dim as f64 - 3.0);
        let mag = (self.ctx.d / g).powf(expo);
        &self.grad_outer * (mag / g)
    }

    /// det ∇²F(y₀) = (−1)^N (3−2N) |g|^{N(2N−2)/(2N−3)} / D_N^{N/(2N−3)}.
    pub fn det_hessian_at_critical(&self) -> T {
        let n = self.ctx.dim as f64;
        let g = self.grad_outer.norm();
        let sign = if self.ctx.dim % 2 == 0 { T::one() } else { -T::one() };
        sign * real::<T>(3.0 - 2.0 * n)
            * g.powf(real::<T>(n * (2.0 * n - 2.0) / (2.0 * n - 3.0)))
            / self.ctx.d.powf(real::<T>(n / (2.0 * n - 3.0)))
    }
}

/// D_N/((2N−4)|y|^{2N−4}) for N ≥ 3, −D_2 ln|y| for N = 2.
fn exterior_limit_value<T: Real>(y: &Point<T>, ctx: &KernelContext<T>) -> T {
    let y2 = y.norm_squared();
    if ctx.dim == 2 {
        -ctx.d * y2.ln() * real::<T>(0.5)
    } else {
        let p = real::<T>(ctx.dim as f64 - 2.0);
        ctx.d / (real::<T>(2.0) * p) / y2.powf(p)
    }
}

/// Near-hole limit field for the critical-center case:
/// `F̂(y) = ½ yᵀ A y + D_N/((2N−4)|y|^{2N−4})` with A = ∇²R_Ω(P)
/// (log form in 2-D).
#[derive(Debug, Clone)]
pub struct HessianLimit<T: Real> {
    pub hess_outer: DMatrix<T>,
    pub ctx: KernelContext<T>,
}

impl<T: Real> HessianLimit<T> {
    pub fn new(hess_outer: DMatrix<T>, ctx: KernelContext<T>) -> Result<Self> {
        if hess_outer.nrows() != ctx.dim || hess_outer.ncols() != ctx.dim {
            return Err(Error::DimMismatch {
                expected: ctx.dim,
                got: hess_outer.nrows(),
            });
        }
        Ok(Self { hess_outer, ctx })
    }

    pub fn value(&self, y: &Point<T>) -> Result<T> {
        check_nonzero(y)?;
        let quad = (&self.hess_outer * y).dot(y) * real::<T>(0.5);
        Ok(quad + exterior_limit_value(y, &self.ctx))
    }

    /// ∇F̂(y) = A y − D_N y/|y|^{2N−2}.
    pub fn grad(&self, y: &Point<T>) -> Result<Point<T>> {
        check_nonzero(y)?;
        let y2 = y.norm_squared();
        let s = self.ctx.d / y2.powf(real::<T>(self.ctx.dim as f64 - 1.0));
        Ok(&self.hess_outer * y - y * s)
    }

    pub fn hessian(&self, y: &Point<T>) -> Result<DMatrix<T>> {
        check_nonzero(y)?;
        Ok(&self.hess_outer + exterior_limit_hessian(y, &self.ctx))
    }
}

/// Eigen-decomposition of a symmetric matrix, eigenvalues ascending.
pub fn eigen_ascending<T: Real>(m: &DMatrix<T>) -> (Vec<T>, Vec<Point<T>>) {
    let sym = (m + m.transpose()) * real::<T>(0.5);
    let eig = sym.symmetric_eigen();
    let n = m.nrows();
    let mut idx: Vec<usize> = (0..n).collect();
    idx.sort_by(|&a, &b| {
        eig.eigenvalues[a]
            .partial_cmp(&eig.eigenvalues[b])
            .expect("eigenvalues are finite")
    });
    let vals = idx.iter().map(|&i| eig.eigenvalues[i]).collect();
    let vecs = idx
        .iter()
        .map(|&i| Point::<T>::from_iterator(n, eig.eigenvectors.column(i).iter().copied()))
        .collect();
    (vals, vecs)
}

/// Critical points ±ȳ^{(l)} = ±(D_N/λ_l)^{1/(2N−2)} v^{(l)} of the
/// [`HessianLimit`] field, one antipodal pair per simple positive
/// eigenvalue, with the closed-form Hessian determinant
/// (2N−2) λ_l ∏_{s≠l} (λ_s − λ_l) at each.
pub fn hessian_limit_critical_points<T: Real>(
    hess_outer: &DMatrix<T>,
    ctx: &KernelContext<T>,
) -> Result<Vec<(Point<T>, T)>> {
    let (vals, vecs) = eigen_ascending(hess_outer);
    let n = ctx.dim;
    require_simple_positive(&vals)?;
    let mut out = Vec::new();
    let expo = T::one() / real::<T>(2.0 * n as f64 - 2.0);
    for (l, (&lam, v)) in vals.iter().zip(&vecs).enumerate() {
        if lam <= T::zero() {
            continue;
        }
        let mag = (ctx.d / lam).powf(expo);
        let mut det = real::<T>(2.0 * n as f64 - 2.0) * lam;
        for (s, &other) in vals.iter().enumerate() {
            if s != l {
                det *= other - lam;
            }
        }
        out.push((v * mag, det));
        out.push((v * (-mag), det));
    }
    Ok(out)
}

/// Relative tolerance at which two eigenvalues count as equal.
pub const EIGEN_SIMPLE_REL_TOL: f64 = 1e-9;

fn require_simple_positive<T: Real>(vals: &[T]) -> Result<()> {
    let tol = real::<T>(EIGEN_SIMPLE_REL_TOL);
    for i in 0..vals.len() {
        if vals[i] <= T::zero() {
            continue;
        }
        for j in (i + 1)..vals.len() {
            if vals[j] <= T::zero() {
                continue;
            }
            let gap = (vals[i] - vals[j]).abs();
            let scale = vals[i].abs().max(vals[j].abs());
            if gap <= tol * scale {
                return Err(Error::Unsupported(
                    "multiple positive Hessian eigenvalue: near-hole critical set is a manifold \
                     and the point count is not determined at this order"
                        .into(),
                ));
            }
        }
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// predicted critical points
// ---------------------------------------------------------------------------

/// Inputs for the nonzero-gradient prediction.
#[derive(Debug, Clone)]
pub struct GradientCaseInput<T: Real> {
    pub ctx: KernelContext<T>,
    pub eps: T,
    pub grad_at_center: Point<T>,
    pub center: Point<T>,
}

/// Inputs for the critical-center prediction; eigen-decomposition cached
/// ascending.
#[derive(Debug, Clone)]
pub struct DegenerateCaseInput<T: Real> {
    pub ctx: KernelContext<T>,
    pub eps: T,
    pub hessian_at_center: DMatrix<T>,
    pub center: Point<T>,
    pub eigenvalues: Vec<T>,
    pub eigenvectors: Vec<Point<T>>,
}

impl<T: Real> DegenerateCaseInput<T> {
    pub fn new(
        ctx: KernelContext<T>,
        eps: T,
        hessian_at_center: DMatrix<T>,
        center: Point<T>,
    ) -> Result<Self> {
        let (vals, vecs) = eigen_ascending(&hessian_at_center);
        let max = vals
            .iter()
            .fold(T::zero(), |m, v| m.max(v.abs()));
        if vals.iter().any(|v| v.abs() <= real::<T>(1e-12) * max) || max == T::zero() {
            return Err(Error::InvalidParam(
                "Hessian at the hole center must be nondegenerate".into(),
            ));
        }
        Ok(Self {
            ctx,
            eps,
            hessian_at_center,
            center,
            eigenvalues: vals,
            eigenvectors: vecs,
        })
    }

    pub fn positive_count(&self) -> usize {
        self.eigenvalues.iter().filter(|&&v| v > T::zero()).count()
    }
}

/// Where a prediction came from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum PredictionSource {
    GradientCase,
    /// Eigenvalue index (ascending) and branch sign ±1.
    Eigenvalue { l: usize, branch: i8 },
}

/// A predicted near-hole critical point.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PredictedCriticalPoint {
    pub location: Vec<Scalar>,
    /// Alternative 2-D gradient-case location using the 1/π² normalization
    /// (the literature shows both; the primary location uses 1/π).
    pub location_alt: Option<Vec<Scalar>>,
    /// Expected index (−1)^{Morse index} of ∇R at the point.
    pub expected_index: i8,
    pub source: PredictionSource,
    /// ε^{(N−2)/(2N−3)}, ε^{(N−2)/(2N−2)}, r_ε or r̂_{ε,λ} as applicable.
    pub leading_scale: Scalar,
}

fn to_vec<T: Real>(p: &Point<T>) -> Vec<Scalar> {
    p.iter()
        .map(|&v| nalgebra::try_convert(v).expect("scalar fits f64"))
        .collect()
}

/// Location of the single near-hole critical point when ∇R_Ω(P) ≠ 0:
/// P + ε^{(N−2)/(2N−3)} y₀ for N ≥ 3 and P + r_ε y₀ for N = 2, where y₀ is
/// the critical point of the gradient limit field. Its index is (−1)^{N+1}.
pub fn predict_gradient_case<T: Real>(
    inp: &GradientCaseInput<T>,
) -> Result<PredictedCriticalPoint> {
    let n = inp.ctx.dim;
    if inp.grad_at_center.norm_squared() == T::zero() {
        return Err(Error::InvalidParam(
            "gradient at the hole center must be nonzero".into(),
        ));
    }
    let limit = GradientLimit::new(inp.grad_at_center.clone(), inp.ctx)?;
    let y0 = limit.critical_point();
    let scale: T = if n == 2 {
        gradient_case_scale(inp.eps)?
    } else {
        inp.eps
            .powf(real::<T>((n as f64 - 2.0) / (2.0 * n as f64 - 3.0)))
    };
    let location = &inp.center + &y0 * scale;
    let location_alt = if n == 2 {
        // same direction, coefficient 1/π² instead of 1/π
        let y_alt = &y0 / T::pi();
        Some(to_vec(&(&inp.center + y_alt * scale)))
    } else {
        None
    };
    let expected_index = if n % 2 == 0 { -1 } else { 1 };
    Ok(PredictedCriticalPoint {
        location: to_vec(&location),
        location_alt,
        expected_index,
        source: PredictionSource::GradientCase,
        leading_scale: nalgebra::try_convert(scale).expect("scalar fits f64"),
    })
}

/// Locations of the 2m near-hole critical points when ∇R_Ω(P) = 0 and the
/// Hessian has m simple positive eigenvalues λ_l (unit eigenvectors v_l):
/// P ± (D_N/λ_l)^{1/(2N−2)} ε^{(N−2)/(2N−2)} v_l for N ≥ 3 and
/// P ± r̂_{ε,λ_l} v_l for N = 2.
pub fn predict_degenerate_case<T: Real>(
    inp: &DegenerateCaseInput<T>,
) -> Result<Vec<PredictedCriticalPoint>> {
    let n = inp.ctx.dim;
    require_simple_positive(&inp.eigenvalues)?;
    let mut out = Vec::new();
    for (l, (&lam, v)) in inp.eigenvalues.iter().zip(&inp.eigenvectors).enumerate() {
        if lam <= T::zero() {
            continue;
        }
        let scale: T = if n == 2 {
            degenerate_case_scale(inp.eps, lam)?
        } else {
            (inp.ctx.d / lam).powf(T::one() / real::<T>(2.0 * n as f64 - 2.0))
                * inp
                    .eps
                    .powf(real::<T>((n as f64 - 2.0) / (2.0 * n as f64 - 2.0)))
        };
        // index is the sign of det ∇²F̂ = (2N−2) λ_l ∏_{s≠l}(λ_s−λ_l)
        let mut det = real::<T>(2.0 * n as f64 - 2.0) * lam;
        for (s, &other) in inp.eigenvalues.iter().enumerate() {
            if s != l {
                det *= other - lam;
            }
        }
        let expected_index = if det > T::zero() { 1 } else { -1 };
        for branch in [1i8, -1i8] {
            let sgn = if branch == 1 { T::one() } else { -T::one() };
            let location = &inp.center + v * (scale * sgn);
            out.push(PredictedCriticalPoint {
                location: to_vec(&location),
                location_alt: None,
                expected_index,
                source: PredictionSource::Eigenvalue { l, branch },
                leading_scale: nalgebra::try_convert(scale).expect("scalar fits f64"),
            });
        }
    }
    Ok(out)
}

/// Structure of ∇R_Ω and its Hessian at the hole center, as far as the
/// count bookkeeping needs it.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum CenterClass {
    /// ∇R_Ω(P) ≠ 0.
    NonzeroGradient,
    /// ∇R_Ω(P) = 0, Hessian nondegenerate with this many positive
    /// eigenvalues, all simple.
    SimplePositive(usize),
    /// Radially symmetric configuration (concentric ball): the minimum set
    /// is a sphere.
    RadiallySymmetric,
}

/// Total critical-point count of R_{Ω_ε}.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum CriticalPointCount {
    Finite(usize),
    Infinite,
}

/// Count of critical points of R_{Ω_ε} for small ε, given the count for the
/// unpunctured domain (all assumed nondegenerate): outer + 1 in the
/// nonzero-gradient case, outer + 2m − 1 when the center is a nondegenerate
/// critical point with m simple positive eigenvalues, infinite in the
/// radially symmetric case.
pub fn predict_count(outer_critical_points: usize, class: CenterClass) -> CriticalPointCount {
    match class {
        CenterClass::NonzeroGradient => CriticalPointCount::Finite(outer_critical_points + 1),
        CenterClass::SimplePositive(m) => {
            CriticalPointCount::Finite(outer_critical_points + 2 * m - 1)
        }
        CenterClass::RadiallySymmetric => CriticalPointCount::Infinite,
    }
}

/// Axis-point prediction for convex domains symmetric in every coordinate
/// with the hole at the center. Equal eigenvalues are allowed here (the
/// points exist by symmetry); the on-axis second derivative tends to
/// (2N−2)λ_i.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AxisPrediction {
    pub point: PredictedCriticalPoint,
    pub axis: usize,
    pub axis_second_derivative: Scalar,
}

/// Predicted 2N on-axis critical points for a convex coordinate-symmetric
/// domain, from the diagonal Hessian entries λ_i > 0 of R_Ω at the origin.
///
/// The amplitude uses the (D_N/λ)^{1/(2N−2)} ε^{(N−2)/(2N−2)} scaling for
/// N ≥ 3 (an alternative 1/(N−2) exponent appears in print for the same
/// configuration; this implementation keeps the 1/(2N−2) one, consistent
/// with [`predict_degenerate_case`]) and r̂_{ε,λ_i} in 2-D.
pub fn symmetric_axis_prediction<T: Real>(
    hess_diag: &[T],
    eps: T,
    ctx: &KernelContext<T>,
) -> Result<Vec<AxisPrediction>> {
    let n = ctx.dim;
    if hess_diag.len() != n {
        return Err(Error::DimMismatch {
            expected: n,
            got: hess_diag.len(),
        });
    }
    if hess_diag.iter().any(|&l| l <= T::zero()) {
        return Err(Error::InvalidParam(
            "axis prediction needs positive diagonal Hessian entries".into(),
        ));
    }
    let mut out = Vec::new();
    for (i, &lam) in hess_diag.iter().enumerate() {
        let scale: T = if n == 2 {
            degenerate_case_scale(eps, lam)?
        } else {
            (ctx.d / lam).powf(T::one() / real::<T>(2.0 * n as f64 - 2.0))
                * eps.powf(real::<T>((n as f64 - 2.0) / (2.0 * n as f64 - 2.0)))
        };
        let second = real::<T>(2.0 * n as f64 - 2.0) * lam;
        for branch in [1i8, -1i8] {
            let sgn = if branch == 1 { T::one() } else { -T::one() };
            let mut loc = Point::<T>::zeros(n);
            loc[i] = sgn * scale;
            out.push(AxisPrediction {
                point: PredictedCriticalPoint {
                    location: to_vec(&loc),
                    location_alt: None,
                    expected_index: 0, // not asserted here; sign depends on the spectrum
                    source: PredictionSource::Eigenvalue { l: i, branch },
                    leading_scale: nalgebra::try_convert(scale).expect("scalar fits f64"),
                },
                axis: i,
                axis_second_derivative: nalgebra::try_convert(second).expect("scalar fits f64"),
            });
        }
    }
    Ok(out)
}

// ---------------------------------------------------------------------------
// expansions on the punctured domain (solver precision)
// ---------------------------------------------------------------------------

use crate::geom::PuncturedDomain;

fn f64_ctx(dim: usize) -> KernelContext<Scalar> {
    KernelContext::new(dim).expect("dimension validated upstream")
}

/// Leading-order expansion of R_{Ω_ε}(x): R_Ω(x) + R_{B_ε^c}(x−P) for
/// N ≥ 3; in 2-D the exterior term and the exact logarithmic correction
/// combine into R_Ω(x) + (1/2π) ln(|x−P|²/(|x−P|²−ε²)).
pub fn expansion_robin(
    x: &PointF,
    pd: &PuncturedDomain,
    outer_robin: &dyn Fn(&PointF) -> Scalar,
) -> Result<Scalar> {
    let d = x - &pd.center;
    let s2 = d.norm_squared();
    let e2 = pd.radius * pd.radius;
    if s2 <= e2 {
        return Err(Error::InsideHole {
            dist: s2.sqrt(),
            eps: pd.radius,
        });
    }
    let base = outer_robin(x);
    Ok(if pd.dim() == 2 {
        base + (s2 / (s2 - e2)).ln() / (2.0 * std::f64::consts::PI)
    } else {
        let ctx = f64_ctx(pd.dim());
        base + kernels::robin_exterior_ball(&d, pd.radius, &ctx)?
    })
}

/// Evaluable remainder shape of [`expansion_robin`] (unit constant):
/// (ε/s)^{N−2} + ε for N ≥ 3, (|ln s| + 1)/|ln ε| for N = 2, with
/// s = |x−P|.
pub fn expansion_robin_budget(dim: usize, eps: Scalar, dist: Scalar) -> Scalar {
    if dim == 2 {
        (dist.ln().abs() + 1.0) / eps.ln().abs()
    } else {
        (eps / dist).powi(dim as i32 - 2) + eps
    }
}

/// Two-term Schiffer–Spencer-type expansion for N ≥ 3:
/// R_Ω(x) + G_Ω²(x,P) / (N(N−2)ω_N (ε^{2−N} − R_Ω(P))).
pub fn expansion_robin_schiffer(
    x: &PointF,
    pd: &PuncturedDomain,
    outer_robin: &dyn Fn(&PointF) -> Scalar,
    outer_green: &dyn Fn(&PointF, &PointF) -> Scalar,
) -> Result<Scalar> {
    let dim = pd.dim();
    if dim == 2 {
        return Err(Error::Unsupported(
            "the Schiffer–Spencer-type expansion is implemented for N >= 3".into(),
        ));
    }
    let n = dim as f64;
    let ctx = f64_ctx(dim);
    let g = outer_green(x, &pd.center);
    let denom = n * (n - 2.0) * ctx.omega * (pd.radius.powi(2 - dim as i32) - outer_robin(&pd.center));
    Ok(outer_robin(x) + g * g / denom)
}

/// Leading-order expansion of ∇R_{Ω_ε}(x): ∇R_Ω(x) + ∇R_{B_ε^c}(x−P),
/// plus the exact 2-D extra term (1/π)(1 − ln|x−P|/ln ε)(x−P)/|x−P|².
pub fn expansion_grad(
    x: &PointF,
    pd: &PuncturedDomain,
    outer_grad: &dyn Fn(&PointF) -> PointF,
) -> Result<PointF> {
    let d = x - &pd.center;
    let s2 = d.norm_squared();
    if s2 <= pd.radius * pd.radius {
        return Err(Error::InsideHole {
            dist: s2.sqrt(),
            eps: pd.radius,
        });
    }
    let ctx = f64_ctx(pd.dim());
    let mut g = outer_grad(x) + kernels::robin_exterior_ball_grad(&d, pd.radius, &ctx)?;
    if pd.dim() == 2 {
        let corr = (1.0 - 0.5 * s2.ln() / pd.radius.ln()) / (std::f64::consts::PI * s2);
        g += &d * corr;
    }
    Ok(g)
}

/// Remainder shape of [`expansion_grad`]: (ε/s)^{N−2}/s + ε (N ≥ 3),
/// 1/(s |ln ε|) (N = 2).
pub fn expansion_grad_budget(dim: usize, eps: Scalar, dist: Scalar) -> Scalar {
    if dim == 2 {
        1.0 / (dist * eps.ln().abs())
    } else {
        (eps / dist).powi(dim as i32 - 2) / dist + eps
    }
}

/// Leading-order Hessian expansion with its validity flag.
#[derive(Debug, Clone)]
pub struct HessianExpansion {
    pub matrix: MatrixFAlias,
    /// Set when x is so close to the hole that the dropped remainder is not
    /// smaller than the kept terms (|x−P| below a few ε).
    pub near_hole_warning: bool,
}

type MatrixFAlias = DMatrix<Scalar>;

/// Leading-order expansion of ∇²R_{Ω_ε}(x): ∇²R_Ω(x) + ∇²R_{B_ε^c}(x−P),
/// plus the exact 2-D extra term
/// (1/π)(1 − ln s/ln ε)(δ_ij s² − 2 d_i d_j)/s⁴, s = |x−P|.
pub fn expansion_hessian(
    x: &PointF,
    pd: &PuncturedDomain,
    outer_hessian: &dyn Fn(&PointF) -> MatrixFAlias,
) -> Result<HessianExpansion> {
    let d = x - &pd.center;
    let s2 = d.norm_squared();
    if s2 <= pd.radius * pd.radius {
        return Err(Error::InsideHole {
            dist: s2.sqrt(),
            eps: pd.radius,
        });
    }
    let dim = pd.dim();
    let ctx = f64_ctx(dim);
    let mut m = outer_hessian(x) + kernels::robin_exterior_ball_hessian(&d, pd.radius, &ctx)?;
    if dim == 2 {
        let corr = (1.0 - 0.5 * s2.ln() / pd.radius.ln()) / std::f64::consts::PI;
        for i in 0..2 {
            for j in 0..2 {
                let mut t = -2.0 * d[i] * d[j] / (s2 * s2);
                if i == j {
                    t += 1.0 / s2;
                }
                m[(i, j)] += corr * t;
            }
        }
    }
    Ok(HessianExpansion {
        matrix: m,
        near_hole_warning: s2.sqrt() < 5.0 * pd.radius,
    })
}

/// Remainder shape of [`expansion_hessian`]: ε^{N−2}/s^N + ε/s (N ≥ 3),
/// 1/(s² |ln ε|) (N = 2).
pub fn expansion_hessian_budget(dim: usize, eps: Scalar, dist: Scalar) -> Scalar {
    if dim == 2 {
        1.0 / (dist * dist * eps.ln().abs())
    } else {
        eps.powi(dim as i32 - 2) / dist.powi(dim as i32) + eps / dist
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geom::DomainSpec;
    use approx::assert_relative_eq;
    use nalgebra::{dmatrix, dvector};
    use std::f64::consts::PI;

    #[test]
    fn gradient_scale_known_root() {
        // at ε = e^{-10} the equation reads 10 r + ln r = 0
        let eps = (-10.0f64).exp();
        let r = gradient_case_scale(eps).unwrap();
        assert_relative_eq!(r, 0.17455280027406994, max_relative = 1e-12);
        // root definition residual
        assert!((r - r.ln() / eps.ln()).abs() < 1e-14);
    }

    #[test]
    fn gradient_scale_bracket_membership_small_eps() {
        for k in 3..=12 {
            let eps = 10f64.powi(-k);
            let r = gradient_case_scale(eps).unwrap();
            let (lo, hi) = gradient_case_scale_bracket(eps);
            assert!(r > lo && r < hi, "eps=1e-{k}: {r} not in ({lo},{hi})");
            assert!((r - r.ln() / eps.ln()).abs() < 1e-14);
        }
    }

    #[test]
    fn gradient_scale_moderate_eps_still_roots() {
        // bracket is invalid here (|ln ε| < e) but the root must still come back
        let eps = 0.2_f64;
        let r = gradient_case_scale(eps).unwrap();
        assert!((r - r.ln() / eps.ln()).abs() < 1e-14);
        assert!(gradient_case_scale(0.0).is_err());
        assert!(gradient_case_scale(1.0).is_err());
    }

    #[test]
    fn degenerate_scale_known_values() {
        let r = degenerate_case_scale(1e-6, 1.0 / PI).unwrap();
        assert_relative_eq!(r, 0.29659989913443899, max_relative = 1e-12);
        let k = (1.0 / PI) * PI * 1e-6f64.ln();
        assert!((r * r - r.ln() / k).abs() < 1e-14);
        assert!(degenerate_case_scale(1e-6, -1.0).is_err());
    }

    #[test]
    fn degenerate_scale_root_outside_cited_bracket_for_small_k() {
        // K = λπ|ln ε| < e² puts the root below the cited bracket; the
        // solver must still return the true root.
        let (eps, lam) = (1e-3, 0.1);
        let r = degenerate_case_scale(eps, lam).unwrap();
        let k = lam * PI * eps.ln();
        assert!((r * r - r.ln() / k).abs() < 1e-14);
        let (lo, _hi) = degenerate_case_scale_bracket(eps, lam);
        assert!(r < lo, "root {r} should sit below the invalid bracket ({lo})");
    }

    #[test]
    fn gradient_limit_critical_point_and_determinant() {
        // N = 3, |∇R| = 1: y0 magnitude (1/2π)^{1/3}, det Hess = 6π
        let ctx = KernelContext::<f64>::new(3).unwrap();
        let lim = GradientLimit::new(dvector![1.0, 0.0, 0.0], ctx).unwrap();
        let y0 = lim.critical_point();
        assert_relative_eq!(y0[0], 0.541926070139289, max_relative = 1e-12);
        assert!(lim.grad(&y0).unwrap().norm() < 1e-12);
        assert_relative_eq!(lim.det_hessian_at_critical(), 6.0 * PI, max_relative = 1e-12);
        // numeric determinant at y0 agrees
        let h = lim.hessian(&y0).unwrap();
        assert_relative_eq!(h.determinant(), 6.0 * PI, max_relative = 1e-10);

        // N = 2: y0 = g/(π|g|²)
        let ctx2 = KernelContext::<f64>::new(2).unwrap();
        let g = dvector![0.3, 0.4];
        let lim2 = GradientLimit::new(g.clone(), ctx2).unwrap();
        let y0 = lim2.critical_point();
        assert_relative_eq!(
            (&y0 - &g / (PI * 0.25)).norm(),
            0.0,
            epsilon = 1e-14
        );
        assert!(lim2.grad(&y0).unwrap().norm() < 1e-12);
    }

    #[test]
    fn limit_field_derivatives_match_finite_differences() {
        for dim in [2usize, 3] {
            let ctx = KernelContext::<f64>::new(dim).unwrap();
            let g = PointF::from_fn(dim, |i, _| 0.3 + 0.2 * i as f64);
            let a = DMatrix::from_fn(dim, dim, |i, j| {
                if i == j {
                    0.5 + 0.3 * i as f64
                } else {
                    0.1
                }
            });
            let lim = GradientLimit::new(g, ctx).unwrap();
            let lih = HessianLimit::new(a, ctx).unwrap();
            let y = PointF::from_fn(dim, |i, _| 0.8 - 0.2 * i as f64);
            let h = 1e-6;
            for fld in 0..2 {
                let value = |p: &PointF| -> f64 {
                    if fld == 0 {
                        lim.value(p).unwrap()
                    } else {
                        lih.value(p).unwrap()
                    }
                };
                let grad = |p: &PointF| -> PointF {
                    if fld == 0 {
                        lim.grad(p).unwrap()
                    } else {
                        lih.grad(p).unwrap()
                    }
                };
                let hess = if fld == 0 {
                    lim.hessian(&y).unwrap()
                } else {
                    lih.hessian(&y).unwrap()
                };
                let ga = grad(&y);
                for i in 0..dim {
                    let mut yp = y.clone();
                    let mut ym = y.clone();
                    yp[i] += h;
                    ym[i] -= h;
                    let fd = (value(&yp) - value(&ym)) / (2.0 * h);
                    assert_relative_eq!(ga[i], fd, max_relative = 1e-7, epsilon = 1e-10);
                    let gp = grad(&yp);
                    let gm = grad(&ym);
                    for j in 0..dim {
                        let fd2 = (gp[j] - gm[j]) / (2.0 * h);
                        assert_relative_eq!(hess[(i, j)], fd2, max_relative = 1e-6, epsilon = 1e-9);
                    }
                }
            }
        }
    }

    #[test]
    fn hessian_limit_critical_points_and_determinants() {
        let ctx = KernelContext::<f64>::new(2).unwrap();
        let a = dmatrix![1.0 / PI, 0.0; 0.0, 2.0 / PI];
        let pts = hessian_limit_critical_points(&a, &ctx).unwrap();
        assert_eq!(pts.len(), 4);
        // determinant signs: l=1 positive, l=2 negative, values 2/π² and −4/π²
        let mut pos = 0;
        let mut neg = 0;
        for (y, det) in &pts {
            let lim = HessianLimit::new(a.clone(), ctx).unwrap();
            assert!(lim.grad(y).unwrap().norm() < 1e-12);
            if *det > 0.0 {
                pos += 1;
                assert_relative_eq!(*det, 2.0 / (PI * PI), max_relative = 1e-12);
            } else {
                neg += 1;
                assert_relative_eq!(*det, -4.0 / (PI * PI), max_relative = 1e-12);
            }
            // numeric Hessian determinant of the limit field agrees
            let h = lim.hessian(y).unwrap();
            assert_relative_eq!(h.determinant(), *det, max_relative = 1e-9);
        }
        assert_eq!((pos, neg), (2, 2));

        // amplitude is 1 when λ = D_N
        let a1 = dmatrix![1.0 / PI, 0.0; 0.0, 3.0 / PI];
        let pts = hessian_limit_critical_points(&a1, &ctx).unwrap();
        let with_unit = pts
            .iter()
            .filter(|(y, _)| (y.norm() - 1.0).abs() < 1e-12)
            .count();
        assert_eq!(with_unit, 2);

        // multiple positive eigenvalue is rejected
        let amult = dmatrix![1.0, 0.0; 0.0, 1.0];
        assert!(hessian_limit_critical_points(&amult, &ctx).is_err());

        // negative-definite: no critical points
        let aneg = dmatrix![-1.0, 0.0; 0.0, -2.0];
        assert!(hessian_limit_critical_points(&aneg, &ctx)
            .unwrap()
            .is_empty());
    }

    #[test]
    fn gradient_case_prediction() {
        // N = 3: magnitude (1/2π)^{1/3} ε^{1/3} along the gradient
        let ctx = KernelContext::<f64>::new(3).unwrap();
        let inp = GradientCaseInput {
            ctx,
            eps: 1e-6,
            grad_at_center: dvector![1.0, 0.0, 0.0],
            center: dvector![0.0, 0.0, 0.0],
        };
        let p = predict_gradient_case(&inp).unwrap();
        assert_eq!(p.expected_index, 1);
        assert_relative_eq!(
            p.location[0],
            0.541926070139289 * 1e-2,
            max_relative = 1e-10
        );
        assert!(p.location[1].abs() < 1e-15);

        // N = 2 on the unit disk at P = (0.3, 0)
        let ctx2 = KernelContext::<f64>::new(2).unwrap();
        let g = dvector![0.104937325115535386, 0.0];
        let inp2 = GradientCaseInput {
            ctx: ctx2,
            eps: 1e-2,
            grad_at_center: g.clone(),
            center: dvector![0.3, 0.0],
        };
        let p2 = predict_gradient_case(&inp2).unwrap();
        assert_eq!(p2.expected_index, -1);
        let r_eps = gradient_case_scale(1e-2f64).unwrap();
        assert_relative_eq!(
            p2.location[0],
            0.3 + r_eps / (PI * g[0]),
            max_relative = 1e-12
        );
        // direction parallel to the gradient, and alt normalization exposed
        assert!(p2.location[1].abs() < 1e-15);
        let alt = p2.location_alt.as_ref().unwrap();
        assert_relative_eq!(alt[0], 0.3 + r_eps / (PI * PI * g[0]), max_relative = 1e-12);
    }

    #[test]
    fn degenerate_case_prediction_axes() {
        let ctx = KernelContext::<f64>::new(2).unwrap();
        let a = dmatrix![1.0 / PI, 0.0; 0.0, 2.0 / PI];
        let inp =
            DegenerateCaseInput::new(ctx, 1e-2, a, dvector![0.0, 0.0]).unwrap();
        let pts = predict_degenerate_case(&inp).unwrap();
        assert_eq!(pts.len(), 4);
        for p in &pts {
            // on an axis, at radius r̂
            let on_x = p.location[1].abs() < 1e-14;
            let on_y = p.location[0].abs() < 1e-14;
            assert!(on_x || on_y);
            let r = (p.location[0].powi(2) + p.location[1].powi(2)).sqrt();
            let lam = if on_x { 1.0 / PI } else { 2.0 / PI };
            let want = degenerate_case_scale(1e-2f64, lam).unwrap();
            assert_relative_eq!(r, want, max_relative = 1e-12);
        }

        // negative-definite Hessian: nothing predicted
        let ctx = KernelContext::<f64>::new(2).unwrap();
        let inp = DegenerateCaseInput::new(
            ctx,
            1e-2,
            dmatrix![-1.0, 0.0; 0.0, -2.0],
            dvector![0.0, 0.0],
        )
        .unwrap();
        assert!(predict_degenerate_case(&inp).unwrap().is_empty());

        // N = 3 with λ = D_3: radius ε^{1/4}
        let ctx3 = KernelContext::<f64>::new(3).unwrap();
        let d3 = ctx3.d;
        let inp3 = DegenerateCaseInput::new(
            ctx3,
            1e-4,
            DMatrix::from_diagonal(&dvector![d3, 2.0 * d3, 3.0 * d3]),
            dvector![0.0, 0.0, 0.0],
        )
        .unwrap();
        let pts3 = predict_degenerate_case(&inp3).unwrap();
        assert_eq!(pts3.len(), 6);
        let r_min = pts3
            .iter()
            .map(|p| p.location.iter().map(|v| v * v).sum::<f64>().sqrt())
            .fold(f64::INFINITY, f64::min);
        // smallest eigenvalue owns the largest radius: λ₁ = D_3 gives ε^{1/4}
        let r_of_l0 = pts3
            .iter()
            .filter(|p| matches!(p.source, PredictionSource::Eigenvalue { l: 0, .. }))
            .map(|p| p.location.iter().map(|v| v * v).sum::<f64>().sqrt())
            .next()
            .unwrap();
        assert_relative_eq!(r_of_l0, 1e-1, max_relative = 1e-12); // (1e-4)^{1/4}
        assert!(r_min <= r_of_l0);
    }

    #[test]
    fn gradient_case_location_trend_over_eps() {
        // |x_ε − P| → 0 while |x_ε − P|/ε → ∞, monotonically over 4 decades
        let ctx = KernelContext::<f64>::new(2).unwrap();
        let mut dist_prev = f64::INFINITY;
        let mut ratio_prev = 0.0_f64;
        for k in [3, 4, 5, 6, 7] {
            let eps = 10f64.powi(-k);
            let inp = GradientCaseInput {
                ctx,
                eps,
                grad_at_center: dvector![0.104937325115535386, 0.0],
                center: dvector![0.3, 0.0],
            };
            let p = predict_gradient_case(&inp).unwrap();
            let dist = (PointF::from_column_slice(&p.location) - dvector![0.3, 0.0]).norm();
            assert!(dist < dist_prev, "distance not shrinking at eps=1e-{k}");
            let ratio = dist / eps;
            assert!(ratio > ratio_prev, "distance/eps not growing at eps=1e-{k}");
            dist_prev = dist;
            ratio_prev = ratio;
        }
        assert!(dist_prev < 0.25 && ratio_prev > 1e4);
    }

    #[test]
    fn prediction_annihilates_expansion_gradient_as_eps_shrinks() {
        // N = 3 ball: the predicted location drives the leading-order
        // gradient toward zero relative to |∇R_Ω(P)|
        let ctx = KernelContext::<f64>::new(3).unwrap();
        let center = dvector![0.3, 0.0, 0.0];
        let g_p = crate::kernels::robin_ball_grad(&center, 1.0, &ctx).unwrap();
        let mut prev = f64::INFINITY;
        for k in [3, 5, 7, 9] {
            let eps = 10f64.powi(-k);
            let inp = GradientCaseInput {
                ctx,
                eps,
                grad_at_center: g_p.clone(),
                center: center.clone(),
            };
            let pred = predict_gradient_case(&inp).unwrap();
            let pd = PuncturedDomain {
                outer: DomainSpec::Ball { radius: 1.0, dim: 3 },
                center: center.clone(),
                radius: eps,
            };
            let og = |x: &PointF| crate::kernels::robin_ball_grad(x, 1.0, &ctx).unwrap();
            let g = expansion_grad(&PointF::from_column_slice(&pred.location), &pd, &og)
                .unwrap()
                .norm();
            let rel = g / g_p.norm();
            assert!(rel < prev, "expansion gradient not shrinking at eps=1e-{k}");
            prev = rel;
        }
        assert!(prev < 1e-2, "relative residual gradient {prev}");
    }

    #[test]
    fn determinant_signs_alternate_with_the_eigenvalue_gaps() {
        // 3-D, all eigenvalues positive: det signs follow ∏_{s≠l}(λ_s − λ_l)
        let ctx = KernelContext::<f64>::new(3).unwrap();
        let a = DMatrix::from_diagonal(&dvector![0.2, 0.5, 0.9]);
        let pts = hessian_limit_critical_points(&a, &ctx).unwrap();
        assert_eq!(pts.len(), 6);
        for (y, det) in pts {
            let l = [0.2, 0.5, 0.9]
                .iter()
                .position(|&lam| {
                    ((ctx.d / lam).powf(0.25) - y.norm()).abs() < 1e-12
                })
                .unwrap();
            let expected_sign: f64 = match l {
                0 => 1.0,  // (0.5-0.2)(0.9-0.2) > 0
                1 => -1.0, // (0.2-0.5)(0.9-0.5) < 0
                _ => 1.0,  // (0.2-0.9)(0.5-0.9) > 0
            };
            assert!(det * expected_sign > 0.0, "sign at l={l}: det={det}");
        }
    }

    #[test]
    fn count_bookkeeping() {
        assert_eq!(
            predict_count(1, CenterClass::NonzeroGradient),
            CriticalPointCount::Finite(2)
        );
        assert_eq!(
            predict_count(1, CenterClass::SimplePositive(2)),
            CriticalPointCount::Finite(4)
        );
        assert_eq!(
            predict_count(1, CenterClass::RadiallySymmetric),
            CriticalPointCount::Infinite
        );
    }

    #[test]
    fn axis_prediction_allows_equal_eigenvalues() {
        let ctx = KernelContext::<f64>::new(2).unwrap();
        let lam = 1.0 / PI;
        let preds = symmetric_axis_prediction(&[lam, lam], 1e-2, &ctx).unwrap();
        assert_eq!(preds.len(), 4);
        for p in &preds {
            assert_relative_eq!(p.axis_second_derivative, 2.0 * lam, max_relative = 1e-14);
        }
    }

    #[test]
    fn expansions_reduce_and_decay() {
        let pd = PuncturedDomain::new(
            DomainSpec::Ball { radius: 1.0, dim: 2 },
            dvector![0.3, 0.0],
            0.01,
        )
        .unwrap();
        let ctx = KernelContext::<f64>::new(2).unwrap();
        let outer_robin = move |x: &PointF| kernels::robin_ball(x, 1.0, &ctx).unwrap();
        // vanishing hole: expansion tends to R_Ω(x)
        let x = dvector![0.6, 0.1];
        let mut last = f64::INFINITY;
        for eps in [1e-2, 1e-4, 1e-6] {
            let mut pd2 = pd.clone();
            pd2.radius = eps;
            let v = expansion_robin(&x, &pd2, &outer_robin).unwrap();
            let gap = (v - outer_robin(&x)).abs();
            assert!(gap < last);
            last = gap;
        }
        assert!(last < 1e-10);

        // inside-hole error
        assert!(expansion_robin(&dvector![0.3005, 0.0], &pd, &outer_robin).is_err());
    }

    #[test]
    fn expansion_grad_exterior_term_matches_kernel_in_3d() {
        let pd = PuncturedDomain::new(
            DomainSpec::Ball { radius: 1.0, dim: 3 },
            dvector![0.0, 0.0, 0.0],
            0.05,
        )
        .unwrap();
        let zero_grad = |_: &PointF| PointF::zeros(3);
        let x = dvector![0.4, 0.0, 0.0];
        let g = expansion_grad(&x, &pd, &zero_grad).unwrap();
        let ctx = KernelContext::<f64>::new(3).unwrap();
        let want = kernels::robin_exterior_ball_grad(&x, 0.05, &ctx).unwrap();
        assert_relative_eq!((g - want).norm(), 0.0, epsilon = 1e-15);
    }

    #[test]
    fn schiffer_expansion_consistency_on_3d_ball() {
        let pd = PuncturedDomain::new(
            DomainSpec::Ball { radius: 1.0, dim: 3 },
            dvector![0.0, 0.0, 0.0],
            1e-3,
        )
        .unwrap();
        let ctx = KernelContext::<f64>::new(3).unwrap();
        let outer_robin = move |x: &PointF| kernels::robin_ball(x, 1.0, &ctx).unwrap();
        let outer_green = move |x: &PointF, y: &PointF| {
            kernels::fundamental_solution(x, y, &ctx).unwrap()
                - kernels::regular_part_ball(x, y, &ctx).unwrap()
        };
        let x = dvector![0.5, 0.0, 0.0];
        let a = expansion_robin(&x, &pd, &outer_robin).unwrap();
        let b = expansion_robin_schiffer(&x, &pd, &outer_robin, &outer_green).unwrap();
        // both are R_Ω(x) + O(ε): they agree within the shared budget
        let budget = expansion_robin_budget(3, 1e-3, 0.5);
        assert!((a - b).abs() < 5.0 * budget, "gap {} budget {}", a - b, budget);
        // boundary limit: correction vanishes with G → 0
        let xb = dvector![0.999, 0.0, 0.0];
        let c = expansion_robin_schiffer(&xb, &pd, &outer_robin, &outer_green).unwrap();
        assert!((c - outer_robin(&xb)).abs() < 1e-6);
        // correction positivity for small ε
        assert!(b - outer_robin(&x) > 0.0);
        // N = 2 unsupported
        let pd2 = PuncturedDomain::new(
            DomainSpec::Ball { radius: 1.0, dim: 2 },
            dvector![0.0, 0.0],
            1e-3,
        )
        .unwrap();
        let r2 = move |x: &PointF| {
            let ctx = KernelContext::<f64>::new(2).unwrap();
            kernels::robin_ball(x, 1.0, &ctx).unwrap()
        };
        assert!(expansion_robin_schiffer(&dvector![0.5, 0.0], &pd2, &r2, &|_, _| 0.0).is_err());
    }
}
