//! Locating, refining and classifying critical points of a numerically
//! evaluated Robin function.
//!
//! The search is damped Newton on the gradient from many starts: asymptotic
//! predictions first (the near-hole point has a small basin), then a
//! low-discrepancy grid clipped to the search region. Results are sorted
//! before deduplication so the output does not depend on evaluation order.

use crate::asym::PredictedCriticalPoint;
use crate::mfs::{GradientMethod, MfsSystem};
use crate::{Error, MatrixF, PointF, Result, Scalar};
use serde::{Deserialize, Serialize};

/// A gradient field the finder can search. Implementations report domain
/// membership with whatever standoff keeps their evaluation trustworthy.
pub trait GradientField {
    fn dim(&self) -> usize;
    fn grad(&self, x: &PointF) -> Result<PointF>;
    fn robin(&self, x: &PointF) -> Result<Scalar>;
    fn contains(&self, x: &PointF) -> bool;
    fn diameter(&self) -> Scalar;

    /// Symmetrized finite-difference Hessian of the underlying scalar field.
    fn hessian(&self, x: &PointF) -> Result<MatrixF> {
        let dim = self.dim();
        let h = Scalar::EPSILON.powf(0.25) * x.norm().max(1.0);
        let mut m = MatrixF::zeros(dim, dim);
        for i in 0..dim {
            let mut xp = x.clone();
            let mut xm = x.clone();
            xp[i] += h;
            xm[i] -= h;
            let gp = self.grad(&xp)?;
            let gm = self.grad(&xm)?;
            for j in 0..dim {
                m[(i, j)] = (gp[j] - gm[j]) / (2.0 * h);
            }
        }
        Ok((&m + m.transpose()) * 0.5)
    }
}

/// The solver-backed Robin gradient field with boundary standoff.
pub struct MfsRobinField<'a> {
    pub system: &'a MfsSystem,
    pub method: GradientMethod,
    /// Minimum clearance from the outer boundary, as a fraction of the
    /// domain diameter.
    pub outer_standoff_frac: Scalar,
    /// Minimum clearance from the hole boundary, in units of ε.
    pub hole_standoff_eps: Scalar,
}

impl<'a> MfsRobinField<'a> {
    pub fn new(system: &'a MfsSystem) -> Self {
        Self {
            system,
            method: GradientMethod::BoundaryFormula,
            outer_standoff_frac: 0.02,
            hole_standoff_eps: 0.5,
        }
    }
}

impl GradientField for MfsRobinField<'_> {
    fn dim(&self) -> usize {
        self.system.dim()
    }

    fn grad(&self, x: &PointF) -> Result<PointF> {
        self.system.robin_gradient(x, self.method)
    }

    fn robin(&self, x: &PointF) -> Result<Scalar> {
        self.system.robin(x)
    }

    fn contains(&self, x: &PointF) -> bool {
        let outer = self.system.domain().outer();
        if outer.signed_margin(x) < self.outer_standoff_frac * outer.diameter() {
            return false;
        }
        if let Some((c, eps)) = self.system.domain().hole() {
            if (x - c).norm() < eps * (1.0 + self.hole_standoff_eps) {
                return false;
            }
        }
        true
    }

    fn diameter(&self) -> Scalar {
        self.system.domain().outer().diameter()
    }
}

/// Where to search.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SearchRegion {
    FullDomain,
    AnnulusAroundHole {
        center: Vec<Scalar>,
        inner: Scalar,
        outer: Scalar,
    },
    BallAround {
        center: Vec<Scalar>,
        radius: Scalar,
    },
}

impl SearchRegion {
    pub fn contains(&self, x: &PointF) -> bool {
        match self {
            SearchRegion::FullDomain => true,
            SearchRegion::AnnulusAroundHole {
                center,
                inner,
                outer,
            } => {
                let c = PointF::from_column_slice(center);
                let d = (x - c).norm();
                d >= *inner && d <= *outer
            }
            SearchRegion::BallAround { center, radius } => {
                let c = PointF::from_column_slice(center);
                (x - c).norm() <= *radius
            }
        }
    }
}

/// A refined, classified critical point.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CriticalPoint {
    pub location: Vec<Scalar>,
    pub robin_value: Scalar,
    pub grad_norm: Scalar,
    pub hessian: Vec<Vec<Scalar>>,
    /// Ascending.
    pub eigenvalues: Vec<Scalar>,
    /// Number of negative eigenvalues.
    pub morse_index: usize,
    pub degenerate: bool,
    /// (−1)^{morse_index}.
    pub sign_index: i8,
}

impl CriticalPoint {
    pub fn point(&self) -> PointF {
        PointF::from_column_slice(&self.location)
    }
}

/// Newton and acceptance tolerances.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SearchConfig {
    pub grad_tol: Scalar,
    pub step_tol: Scalar,
    pub max_iters: usize,
    /// Number of low-discrepancy grid starts.
    pub grid_starts: usize,
    /// Dedup radius as a fraction of the domain diameter.
    pub dedup_frac: Scalar,
    /// |λ_min| ≤ this fraction of |λ_max| flags a degenerate point.
    pub degeneracy_rel_tol: Scalar,
}

impl SearchConfig {
    pub fn for_dim(dim: usize) -> Self {
        Self {
            grad_tol: if dim == 2 { 1e-8 } else { 1e-6 },
            step_tol: 1e-12,
            max_iters: 60,
            grid_starts: if dim == 2 { 200 } else { 1000 },
            dedup_frac: 1e-5,
            degeneracy_rel_tol: 1e-4,
        }
    }
}

/// Per-run bookkeeping.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct SearchDiagnostics {
    pub starts: usize,
    pub converged: usize,
    pub out_of_region: usize,
    pub failed: usize,
}

/// Damped Newton on the gradient. Steps are halved until the gradient norm
/// square decreases and the iterate stays inside the field's domain;
/// convergence means grad_norm < grad_tol with a sub-step_tol final step.
pub fn newton_refine(
    field: &dyn GradientField,
    x0: &PointF,
    cfg: &SearchConfig,
) -> Result<CriticalPoint> {
    let (x, gn) = newton_core(field, x0, cfg)?;
    classify(field, &x, gn, cfg)
}

fn newton_core(
    field: &dyn GradientField,
    x0: &PointF,
    cfg: &SearchConfig,
) -> Result<(PointF, Scalar)> {
    if !field.contains(x0) {
        return Err(Error::IterationFailed("start is outside the domain".into()));
    }
    let mut x = x0.clone();
    let mut g = field.grad(&x)?;
    for _ in 0..cfg.max_iters {
        let gn = g.norm();
        if gn < cfg.grad_tol {
            return Ok((x, gn));
        }
        let jac = newton_jacobian(field, &x, &g)?;
        let step = jac
            .lu()
            .solve(&(-&g))
            .ok_or_else(|| Error::IterationFailed("singular Newton system".into()))?;
        let mut t = 1.0;
        let g0 = gn * gn;
        let mut moved = false;
        while t >= 1e-14 {
            let xn = &x + &step * t;
            if field.contains(&xn) {
                if let Ok(gneu) = field.grad(&xn) {
                    if gneu.norm_squared() < g0 {
                        let step_len = (&xn - &x).norm();
                        x = xn;
                        g = gneu;
                        moved = true;
                        if step_len < cfg.step_tol && g.norm() < cfg.grad_tol {
                            return Ok((x, g.norm()));
                        }
                        break;
                    }
                }
            }
            t *= 0.5;
        }
        if !moved {
            return Err(Error::IterationFailed(
                "damping underflow: no descent direction inside the domain".into(),
            ));
        }
    }
    let gn = g.norm();
    if gn < cfg.grad_tol {
        Ok((x, gn))
    } else {
        Err(Error::IterationFailed(format!(
            "no convergence after {} iterations (|∇R| = {:.3e})",
            cfg.max_iters, gn
        )))
    }
}

fn newton_jacobian(field: &dyn GradientField, x: &PointF, g0: &PointF) -> Result<MatrixF> {
    // forward differences: one extra gradient per coordinate is enough for
    // a Newton direction
    let dim = field.dim();
    let h = 1e-5 * x.norm().max(1.0);
    let mut j = MatrixF::zeros(dim, dim);
    for i in 0..dim {
        let mut xp = x.clone();
        xp[i] += h;
        let gp = if field.contains(&xp) {
            field.grad(&xp)?
        } else {
            xp[i] -= 2.0 * h;
            let gm = field.grad(&xp)?;
            for k in 0..dim {
                j[(k, i)] = (g0[k] - gm[k]) / h;
            }
            continue;
        };
        for k in 0..dim {
            j[(k, i)] = (gp[k] - g0[k]) / h;
        }
    }
    Ok(j)
}

fn classify(
    field: &dyn GradientField,
    x: &PointF,
    grad_norm: Scalar,
    cfg: &SearchConfig,
) -> Result<CriticalPoint> {
    let h = field.hessian(x)?;
    let eig = h.clone().symmetric_eigen();
    let mut ev: Vec<Scalar> = eig.eigenvalues.iter().copied().collect();
    ev.sort_by(|a, b| a.partial_cmp(b).expect("finite eigenvalues"));
    let max_abs = ev.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
    let min_abs = ev.iter().fold(f64::INFINITY, |m, v| m.min(v.abs()));
    let morse = ev.iter().filter(|&&v| v < 0.0).count();
    let robin_value = field.robin(x)?;
    Ok(CriticalPoint {
        location: x.iter().copied().collect(),
        robin_value,
        grad_norm,
        hessian: (0..h.nrows())
            .map(|i| (0..h.ncols()).map(|j| h[(i, j)]).collect())
            .collect(),
        eigenvalues: ev,
        morse_index: morse,
        degenerate: min_abs <= cfg.degeneracy_rel_tol * max_abs,
        sign_index: if morse % 2 == 0 { 1 } else { -1 },
    })
}

/// Halton low-discrepancy sequence in the unit cube.
fn halton(index: usize, base: usize) -> Scalar {
    let mut f = 1.0;
    let mut r = 0.0;
    let mut i = index + 1;
    while i > 0 {
        f /= base as f64;
        r += f * (i % base) as f64;
        i /= base;
    }
    r
}

const HALTON_BASES: [usize; 3] = [2, 3, 5];

/// Multistart search: refine from the predicted locations and a Halton grid
/// clipped to the region, then sort and deduplicate.
pub fn find_critical_points(
    field: &dyn GradientField,
    region: &SearchRegion,
    predictions: &[PredictedCriticalPoint],
    cfg: &SearchConfig,
) -> (Vec<CriticalPoint>, SearchDiagnostics) {
    let dim = field.dim();
    let mut seeds: Vec<PointF> = predictions
        .iter()
        .map(|p| PointF::from_column_slice(&p.location))
        .collect();
    let half = field.diameter() / 2.0;
    let mut k = 0;
    let mut produced = 0;
    while produced < cfg.grid_starts && k < 50 * cfg.grid_starts {
        let x = PointF::from_fn(dim, |i, _| (2.0 * halton(k, HALTON_BASES[i]) - 1.0) * half);
        k += 1;
        if field.contains(&x) && region.contains(&x) {
            seeds.push(x);
            produced += 1;
        }
    }

    let mut diag = SearchDiagnostics {
        starts: seeds.len(),
        ..Default::default()
    };
    let mut found: Vec<(PointF, Scalar)> = Vec::new();
    for s in &seeds {
        match newton_core(field, s, cfg) {
            Ok((x, gn)) => {
                if region.contains(&x) {
                    diag.converged += 1;
                    found.push((x, gn));
                } else {
                    diag.out_of_region += 1;
                }
            }
            Err(_) => diag.failed += 1,
        }
    }

    // deterministic merge: lexicographic sort, then greedy clustering;
    // classification (FD Hessian + value) runs once per representative
    found.sort_by(|a, b| {
        a.0.as_slice()
            .partial_cmp(b.0.as_slice())
            .expect("finite coordinates")
    });
    let radius = cfg.dedup_frac * field.diameter();
    let mut reps: Vec<(PointF, Scalar)> = Vec::new();
    for (x, gn) in found {
        match reps.iter_mut().find(|(m, _)| (m as &PointF - &x).norm() <= radius) {
            Some(best) => {
                if gn < best.1 {
                    *best = (x, gn);
                }
            }
            None => reps.push((x, gn)),
        }
    }
    let merged: Vec<CriticalPoint> = reps
        .iter()
        .filter_map(|(x, gn)| classify(field, x, *gn, cfg).ok())
        .collect();
    (merged, diag)
}

/// Scan for a radial ring of critical points around `center`: accepted when
/// the tangential gradient stays below `tang_tol` at `n_angles` sampled
/// angles for every probed radius and the mean radial component changes
/// sign; the sign-change radius is then bisected.
pub fn detect_degenerate_ring(
    field: &dyn GradientField,
    center: &PointF,
    bracket: (Scalar, Scalar),
    n_angles: usize,
    tang_tol: Scalar,
) -> Result<Option<Scalar>> {
    let dim = field.dim();
    let dirs: Vec<PointF> = if dim == 2 {
        (0..n_angles)
            .map(|k| {
                let t = std::f64::consts::TAU * k as f64 / n_angles as f64;
                PointF::from_vec(vec![t.cos(), t.sin()])
            })
            .collect()
    } else {
        crate::geom::fibonacci_sphere(n_angles, 0.0)
            .into_iter()
            .map(|u| PointF::from_vec(u.to_vec()))
            .collect()
    };

    let radial_mean = |r: Scalar| -> Result<Scalar> {
        let mut acc = 0.0;
        for d in &dirs {
            let x = center + d * r;
            if !field.contains(&x) {
                return Err(Error::OutsideDomain);
            }
            let g = field.grad(&x)?;
            let rad = g.dot(d);
            let tang = (&g - d * rad).norm();
            if tang > tang_tol {
                return Err(Error::IterationFailed(format!(
                    "tangential gradient {tang:.3e} breaks radial symmetry"
                )));
            }
            acc += rad;
        }
        Ok(acc / dirs.len() as f64)
    };

    let (mut lo, mut hi) = bracket;
    let n_scan = 24;
    let mut prev_r = lo;
    let mut prev_v = match radial_mean(lo) {
        Ok(v) => v,
        Err(Error::IterationFailed(_)) => return Ok(None),
        Err(e) => return Err(e),
    };
    let mut found = None;
    for k in 1..=n_scan {
        let r = lo + (hi - lo) * k as f64 / n_scan as f64;
        let v = match radial_mean(r) {
            Ok(v) => v,
            Err(Error::IterationFailed(_)) => return Ok(None),
            Err(e) => return Err(e),
        };
        if prev_v < 0.0 && v >= 0.0 {
            found = Some((prev_r, r));
            break;
        }
        prev_r = r;
        prev_v = v;
    }
    let Some((mut a, mut b)) = found else {
        return Ok(None);
    };
    for _ in 0..60 {
        let mid = 0.5 * (a + b);
        if radial_mean(mid)? < 0.0 {
            a = mid;
        } else {
            b = mid;
        }
    }
    let _ = (&mut lo, &mut hi);
    Ok(Some(0.5 * (a + b)))
}

/// Pairing of found points against predictions.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MatchedPair {
    pub predicted: Vec<Scalar>,
    pub found: Vec<Scalar>,
    pub distance: Scalar,
    /// distance / |predicted − hole center|.
    pub rel_location_error: Scalar,
    pub index_agreement: bool,
    pub found_sign_index: i8,
    pub expected_index: i8,
    pub robin_value: Scalar,
    /// |R(found) − R_Ω(P)| when the outer Robin value at the center is known.
    pub robin_gap_to_center: Option<Scalar>,
}

/// Report of [`compare_to_prediction`].
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ComparisonReport {
    pub pairs: Vec<MatchedPair>,
    pub unmatched_found: usize,
    pub unmatched_predicted: usize,
    pub cardinality_mismatch: bool,
}

/// Greedy nearest matching of found points to predictions, with per-pair
/// location error, index agreement and the Robin-value gap to the
/// unpunctured value at the hole center.
pub fn compare_to_prediction(
    found: &[CriticalPoint],
    predicted: &[PredictedCriticalPoint],
    hole_center: &PointF,
    outer_robin_at_center: Option<Scalar>,
) -> ComparisonReport {
    let mut free: Vec<usize> = (0..found.len()).collect();
    let mut pairs = Vec::new();
    for p in predicted {
        let ploc = PointF::from_column_slice(&p.location);
        let best = free
            .iter()
            .enumerate()
            .min_by(|(_, &i), (_, &j)| {
                let di = (found[i].point() - &ploc).norm();
                let dj = (found[j].point() - &ploc).norm();
                di.partial_cmp(&dj).expect("finite distances")
            })
            .map(|(slot, &i)| (slot, i));
        let Some((slot, i)) = best else { break };
        free.remove(slot);
        let f = &found[i];
        let d = (f.point() - &ploc).norm();
        let scale = (&ploc - hole_center).norm();
        pairs.push(MatchedPair {
            predicted: p.location.clone(),
            found: f.location.clone(),
            distance: d,
            rel_location_error: if scale > 0.0 { d / scale } else { d },
            index_agreement: p.expected_index == 0 || f.sign_index == p.expected_index,
            found_sign_index: f.sign_index,
            expected_index: p.expected_index,
            robin_value: f.robin_value,
            robin_gap_to_center: outer_robin_at_center.map(|r| (f.robin_value - r).abs()),
        });
    }
    ComparisonReport {
        unmatched_found: free.len(),
        unmatched_predicted: predicted.len().saturating_sub(pairs.len()),
        cardinality_mismatch: found.len() != predicted.len(),
        pairs,
    }
}
