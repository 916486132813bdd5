//! Batch front end: configure a domain, run a study, emit CSV/JSON tables.
//!
//! Exit codes: 0 success, 2 configuration error, 3 solver non-convergence,
//! 4 result/prediction mismatch (for CI gating).

mod config;

use clap::{Args, Parser, Subcommand};
use config::{fmt_float, FileConfig, GridConfig, HoleConfig, SCHEMA_VERSION};
use nalgebra::dvector;
use robin_core::asym::{
    self, CenterClass, CriticalPointCount, DegenerateCaseInput, GradientCaseInput,
    PredictedCriticalPoint,
};
use robin_core::critical::{
    compare_to_prediction, detect_degenerate_ring, find_critical_points, ComparisonReport,
    CriticalPoint, GradientField, MfsRobinField, SearchConfig, SearchDiagnostics, SearchRegion,
};
use robin_core::geom::{DomainSpec, PuncturedDomain};
use robin_core::identity;
use robin_core::mfs::{GradientMethod, MfsConfig, MfsSystem};
use robin_core::{KernelContext, PointF};
use serde::Serialize;
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(
    name = "robin",
    version,
    about = "Robin functions of domains with a small spherical hole: fields, critical points, validation tables"
)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Args)]
struct Common {
    /// JSON experiment manifest (see README for the schema)
    #[arg(short, long)]
    config: Option<PathBuf>,
    /// Output file; stdout when omitted. Written only on success.
    #[arg(short, long)]
    out: Option<PathBuf>,
    /// Random seed override (identity sampling)
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Subcommand)]
enum Cmd {
    /// Sample the Robin function on a grid (CSV: x,y[,z],robin)
    RobinField {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        nx: Option<usize>,
        #[arg(long)]
        ny: Option<usize>,
    },
    /// Locate, classify and count critical points; compare to predictions (JSON)
    CriticalPoints {
        #[command(flatten)]
        common: Common,
        /// Hole radius override
        #[arg(long)]
        eps: Option<f64>,
    },
    /// Verify the exterior-ball boundary identities by quadrature (CSV)
    ValidateIdentities {
        #[command(flatten)]
        common: Common,
        /// Randomized samples per identity and dimension
        #[arg(long)]
        samples: Option<usize>,
    },
    /// Predicted vs numeric Hessian eigenvalues of the perturbed ellipsoid (CSV)
    EllipsoidStudy {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_delimiter = ',')]
        alpha: Option<Vec<f64>>,
        #[arg(long, value_delimiter = ',')]
        deltas: Option<Vec<f64>>,
    },
    /// Expansion error against the solver over a hole-radius sweep (CSV)
    ConvergenceStudy {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_delimiter = ',')]
        eps_sweep: Option<Vec<f64>>,
    },
}

enum Failure {
    Config(String),
    Solver(String),
    Mismatch(String),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Config(_) => 2,
            Failure::Solver(_) => 3,
            Failure::Mismatch(_) => 4,
        }
    }
    fn message(&self) -> &str {
        match self {
            Failure::Config(m) | Failure::Solver(m) | Failure::Mismatch(m) => m,
        }
    }
}

impl From<robin_core::Error> for Failure {
    fn from(e: robin_core::Error) -> Self {
        match e {
            robin_core::Error::NonConverged { .. } | robin_core::Error::IterationFailed(_) => {
                Failure::Solver(e.to_string())
            }
            other => Failure::Config(other.to_string()),
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.cmd {
        Cmd::RobinField { common, nx, ny } => cmd_robin_field(common, nx, ny),
        Cmd::CriticalPoints { common, eps } => cmd_critical_points(common, eps),
        Cmd::ValidateIdentities { common, samples } => cmd_validate_identities(common, samples),
        Cmd::EllipsoidStudy {
            common,
            alpha,
            deltas,
        } => cmd_ellipsoid_study(common, alpha, deltas),
        Cmd::ConvergenceStudy { common, eps_sweep } => cmd_convergence_study(common, eps_sweep),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message());
            ExitCode::from(f.code())
        }
    }
}

fn load_config(common: &Common) -> Result<FileConfig, Failure> {
    let mut cfg = match &common.config {
        Some(path) => FileConfig::load(path).map_err(Failure::Config)?,
        None => FileConfig::default(),
    };
    if let Some(seed) = common.seed {
        cfg.seed = Some(seed);
    }
    Ok(cfg)
}

/// Write the finished output: stdout, or an atomically renamed file so a
/// failure never leaves a partial artifact behind.
fn emit(common: &Common, content: &str) -> Result<(), Failure> {
    match &common.out {
        None => {
            print!("{content}");
            Ok(())
        }
        Some(path) => {
            let tmp = path.with_extension("tmp");
            std::fs::write(&tmp, content)
                .and_then(|_| std::fs::rename(&tmp, path))
                .map_err(|e| Failure::Config(format!("cannot write {}: {e}", path.display())))
        }
    }
}

fn need_domain(cfg: &FileConfig) -> Result<DomainSpec, Failure> {
    let d = cfg
        .domain
        .clone()
        .ok_or_else(|| Failure::Config("config must provide a domain".into()))?;
    d.validate().map_err(Failure::from)?;
    Ok(d)
}

fn punctured(domain: DomainSpec, hole: &HoleConfig) -> Result<PuncturedDomain, Failure> {
    PuncturedDomain::new(
        domain,
        PointF::from_column_slice(&hole.center),
        hole.radius,
    )
    .map_err(Failure::from)
}

fn resolution(cfg: &FileConfig, dim: usize) -> MfsConfig {
    cfg.resolution
        .clone()
        .unwrap_or_else(|| MfsConfig::for_dim(dim))
}

// ---------------------------------------------------------------------
// robin-field
// ---------------------------------------------------------------------

fn cmd_robin_field(common: Common, nx: Option<usize>, ny: Option<usize>) -> Result<(), Failure> {
    let cfg = load_config(&common)?;
    let domain = need_domain(&cfg)?;
    let dim = domain.dim();
    let grid = cfg.grid.clone().unwrap_or(GridConfig { nx: 101, ny: 101 });
    let nx = nx.unwrap_or(grid.nx).max(2);
    let ny = ny.unwrap_or(grid.ny).max(2);

    let hole = cfg.hole.clone();
    let res = resolution(&cfg, dim);
    let (sys, pd) = match &hole {
        Some(h) => {
            let pd = punctured(domain.clone(), h)?;
            (
                MfsSystem::punctured(pd.clone(), res).map_err(Failure::from)?,
                Some(pd),
            )
        }
        None => (
            MfsSystem::plain(domain.clone(), res).map_err(Failure::from)?,
            None,
        ),
    };

    let (lo, hi) = domain.bounding_box();
    // grid points keep the clearance the solver's accuracy envelope needs
    let margin = if dim == 2 { 0.05 } else { 0.225 } * domain.diameter();
    let mut out = String::new();
    out.push_str(if dim == 2 { "x,y,robin\n" } else { "x,y,z,robin\n" });
    for iy in 0..ny {
        for ix in 0..nx {
            let gx = lo[0] + (hi[0] - lo[0]) * ix as f64 / (nx - 1) as f64;
            let gy = lo[1] + (hi[1] - lo[1]) * iy as f64 / (ny - 1) as f64;
            let x = if dim == 2 {
                dvector![gx, gy]
            } else {
                dvector![gx, gy, 0.0]
            };
            // absent: outside the domain or inside the solver's standoff
            if domain.signed_margin(&x) < margin {
                continue;
            }
            if let Some(pd) = &pd {
                if (&x - &pd.center).norm() < 1.25 * pd.radius {
                    continue;
                }
            }
            let v = sys.robin(&x).map_err(Failure::from)?;
            if dim == 2 {
                out.push_str(&format!(
                    "{},{},{}\n",
                    fmt_float(gx),
                    fmt_float(gy),
                    fmt_float(v)
                ));
            } else {
                out.push_str(&format!(
                    "{},{},{},{}\n",
                    fmt_float(gx),
                    fmt_float(gy),
                    fmt_float(0.0),
                    fmt_float(v)
                ));
            }
        }
    }
    emit(&common, &out)
}

// ---------------------------------------------------------------------
// critical-points
// ---------------------------------------------------------------------

#[derive(Serialize)]
struct NormalizationProbe {
    measured_ratio: f64,
    scale: f64,
    candidate_one_over_pi: f64,
    candidate_one_over_pi_sq: f64,
    nearest_candidate: &'static str,
}

#[derive(Serialize)]
struct CriticalPointReport {
    schema_version: u32,
    domain: DomainSpec,
    hole: HoleConfig,
    center_class: Option<CenterClass>,
    grad_norm_at_center: f64,
    hessian_eigenvalues_at_center: Vec<f64>,
    outer_critical_point_count: usize,
    predicted_count: Option<CriticalPointCount>,
    found_count: usize,
    predicted: Vec<PredictedCriticalPoint>,
    found: Vec<CriticalPoint>,
    comparison: Option<ComparisonReport>,
    degenerate_ring_radius: Option<f64>,
    normalization_probe: Option<NormalizationProbe>,
    diagnostics: SearchDiagnostics,
    notes: Vec<String>,
}

fn cmd_critical_points(common: Common, eps_override: Option<f64>) -> Result<(), Failure> {
    let cfg = load_config(&common)?;
    let domain = need_domain(&cfg)?;
    let dim = domain.dim();
    let mut hole = cfg
        .hole
        .clone()
        .ok_or_else(|| Failure::Config("critical-points needs a hole".into()))?;
    if let Some(e) = eps_override {
        hole.radius = e;
    }
    let pd = punctured(domain.clone(), &hole)?;
    let p = PointF::from_column_slice(&hole.center);
    let res = resolution(&cfg, dim);

    // unpunctured reference: gradient/Hessian at the hole center and the
    // outer critical-point count
    let outer_sys = MfsSystem::plain(domain.clone(), res.clone()).map_err(Failure::from)?;
    let grad_p = outer_sys
        .robin_gradient(&p, GradientMethod::BoundaryFormula)
        .map_err(Failure::from)?;
    let hess_p = outer_sys.robin_hessian(&p).map_err(Failure::from)?.matrix;
    let (eigs_p, _) = asym::eigen_ascending(&hess_p);
    let ctx = KernelContext::<f64>::new(dim).map_err(Failure::from)?;

    let search_cfg = SearchConfig::for_dim(dim);
    let outer_field = MfsRobinField::new(&outer_sys);
    let (outer_found, _) =
        find_critical_points(&outer_field, &SearchRegion::FullDomain, &[], &search_cfg);
    let outer_count = outer_found.len();

    let mut notes = Vec::new();
    let grad_threshold = 1e-6;
    let radially_symmetric =
        matches!(domain, DomainSpec::Ball { .. }) && p.norm() <= 1e-9 * domain.diameter();
    let mut center_class = if grad_p.norm() > grad_threshold {
        Some(CenterClass::NonzeroGradient)
    } else if radially_symmetric {
        Some(CenterClass::RadiallySymmetric)
    } else {
        None // refined below from the Hessian spectrum
    };

    let mut predicted: Vec<PredictedCriticalPoint> = Vec::new();
    match center_class {
        Some(CenterClass::NonzeroGradient) => {
            let inp = GradientCaseInput {
                ctx,
                eps: pd.radius,
                grad_at_center: grad_p.clone(),
                center: p.clone(),
            };
            predicted.push(asym::predict_gradient_case(&inp).map_err(Failure::from)?);
        }
        Some(CenterClass::RadiallySymmetric) => {}
        _ => match DegenerateCaseInput::new(ctx, pd.radius, hess_p.clone(), p.clone()) {
            Ok(inp) => match asym::predict_degenerate_case(&inp) {
                Ok(pts) => {
                    center_class = Some(CenterClass::SimplePositive(inp.positive_count()));
                    predicted = pts;
                }
                Err(e) => notes.push(format!("no location predictions: {e}")),
            },
            Err(e) => notes.push(format!("no location predictions: {e}")),
        },
    }

    let sys = MfsSystem::punctured(pd.clone(), res).map_err(Failure::from)?;
    let field = MfsRobinField::new(&sys);

    // clip overshooting asymptotic seeds back toward the hole center
    let mut seeds = predicted.clone();
    for s in &mut seeds {
        let mut t = 1.0;
        while t > 0.05 {
            let loc = &p + (PointF::from_column_slice(&s.location) - &p) * t;
            if field.contains(&loc) {
                s.location = loc.iter().copied().collect();
                break;
            }
            t *= 0.8;
        }
    }
    let (found, diagnostics) =
        find_critical_points(&field, &SearchRegion::FullDomain, &seeds, &search_cfg);

    let ring = if matches!(center_class, Some(CenterClass::RadiallySymmetric)) {
        let clearance = domain.min_boundary_dist(&p);
        detect_degenerate_ring(&field, &p, (1.6 * pd.radius, 0.9 * clearance), 32, 1e-6)
            .map_err(Failure::from)?
    } else {
        None
    };

    let predicted_count = center_class.map(|c| asym::predict_count(outer_count, c));

    let outer_robin_at_p = outer_sys.robin(&p).ok();
    let comparison = if predicted.is_empty() {
        None
    } else {
        Some(compare_to_prediction(&found, &predicted, &p, outer_robin_at_p))
    };

    // 2-D nonzero-gradient case: record which near-hole scaling constant the
    // measurement favors
    let normalization_probe = if dim == 2
        && matches!(center_class, Some(CenterClass::NonzeroGradient))
        && !found.is_empty()
    {
        let scale = asym::gradient_case_scale(pd.radius).map_err(Failure::from)?;
        let near = found
            .iter()
            .map(|c| (c.point() - &p).norm())
            .fold(f64::INFINITY, f64::min);
        let measured = near / scale;
        let gn = grad_p.norm();
        let c1 = 1.0 / (std::f64::consts::PI * gn);
        let c2 = 1.0 / (std::f64::consts::PI * std::f64::consts::PI * gn);
        Some(NormalizationProbe {
            measured_ratio: measured,
            scale,
            candidate_one_over_pi: c1,
            candidate_one_over_pi_sq: c2,
            nearest_candidate: if (measured - c1).abs() <= (measured - c2).abs() {
                "1/pi"
            } else {
                "1/pi^2"
            },
        })
    } else {
        None
    };

    let isolated_nondegenerate = found.iter().filter(|c| !c.degenerate).count();
    let report = CriticalPointReport {
        schema_version: SCHEMA_VERSION,
        domain,
        hole,
        center_class,
        grad_norm_at_center: grad_p.norm(),
        hessian_eigenvalues_at_center: eigs_p,
        outer_critical_point_count: outer_count,
        predicted_count,
        found_count: found.len(),
        predicted,
        found,
        comparison,
        degenerate_ring_radius: ring,
        normalization_probe,
        diagnostics,
        notes,
    };
    let mismatch = match (report.degenerate_ring_radius, report.predicted_count) {
        (Some(_), _) => isolated_nondegenerate > 0,
        (None, Some(CriticalPointCount::Finite(n))) => n != report.found_count,
        _ => false,
    };
    let mut body = serde_json::to_string_pretty(&report)
        .map_err(|e| Failure::Config(format!("serialization: {e}")))?;
    body.push('\n');
    emit(&common, &body)?;
    if mismatch {
        return Err(Failure::Mismatch(format!(
            "found {} critical points, predicted {:?}",
            report.found_count, report.predicted_count
        )));
    }
    Ok(())
}

// ---------------------------------------------------------------------
// validate-identities
// ---------------------------------------------------------------------

fn cmd_validate_identities(common: Common, samples: Option<usize>) -> Result<(), Failure> {
    let cfg = load_config(&common)?;
    let seed = cfg.seed.unwrap_or(identity::DEFAULT_SEED);
    let samples = samples.or(cfg.samples_per_identity).unwrap_or(20);
    let checks = identity::run_suite(seed, samples);

    let mut out = String::from("name,dim,eps,x,lhs,rhs,abs_err,rel_err,nodes,bound_ratio,pass\n");
    let mut all_pass = true;
    for c in &checks {
        let pass = match c.bound_ratio {
            Some(r) => r.is_finite() && r < 10.0,
            None => c.rel_err <= 1e-10,
        };
        all_pass &= pass;
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{},{},{},{}\n",
            c.name,
            c.dim,
            fmt_float(c.eps),
            c.x.iter()
                .map(|v| fmt_float(*v))
                .collect::<Vec<_>>()
                .join(";"),
            fmt_float(c.lhs_quadrature),
            fmt_float(c.rhs_closed_form),
            fmt_float(c.abs_err),
            fmt_float(c.rel_err),
            c.nodes_used,
            c.bound_ratio.map(fmt_float).unwrap_or_default(),
            pass
        ));
    }
    emit(&common, &out)?;
    if !all_pass {
        return Err(Failure::Mismatch(
            "one or more identity checks exceeded tolerance".into(),
        ));
    }
    Ok(())
}

// ---------------------------------------------------------------------
// ellipsoid-study
// ---------------------------------------------------------------------

fn cmd_ellipsoid_study(
    common: Common,
    alpha: Option<Vec<f64>>,
    deltas: Option<Vec<f64>>,
) -> Result<(), Failure> {
    let cfg = load_config(&common)?;
    let alpha = alpha.or(cfg.alpha.clone()).unwrap_or_else(|| vec![1.0, 2.0]);
    let deltas = deltas
        .or(cfg.deltas.clone())
        .unwrap_or_else(|| vec![0.02, 0.04, 0.08]);
    let dim = alpha.len();
    let res = resolution(&cfg, dim);
    let study =
        robin_core::ellipsoid::run_study(dim, &alpha, &deltas, &res).map_err(Failure::from)?;

    let mut out = String::from(
        "delta,index,alpha,predicted,numeric,residual,ratio,max_offdiag,grad_norm_origin,error\n",
    );
    let mut solver_error = None;
    for row in &study.rows {
        for i in 0..dim {
            out.push_str(&format!(
                "{},{},{},{},{},{},{},{},{},{}\n",
                fmt_float(row.delta),
                i,
                fmt_float(alpha[i]),
                fmt_float(row.predicted[i]),
                row.numeric
                    .as_ref()
                    .map(|v| fmt_float(v[i]))
                    .unwrap_or_default(),
                row.residuals
                    .as_ref()
                    .map(|v| fmt_float(v[i]))
                    .unwrap_or_default(),
                row.ratios
                    .as_ref()
                    .map(|v| fmt_float(v[i]))
                    .unwrap_or_default(),
                row.max_offdiag.map(fmt_float).unwrap_or_default(),
                row.grad_norm_at_origin.map(fmt_float).unwrap_or_default(),
                row.error.clone().unwrap_or_default()
            ));
        }
        if let Some(e) = &row.error {
            solver_error = Some(e.clone());
        }
    }
    emit(&common, &out)?;
    if let Some(e) = solver_error {
        return Err(Failure::Solver(e));
    }
    Ok(())
}

// ---------------------------------------------------------------------
// convergence-study
// ---------------------------------------------------------------------

fn cmd_convergence_study(common: Common, eps_sweep: Option<Vec<f64>>) -> Result<(), Failure> {
    let cfg = load_config(&common)?;
    let domain = need_domain(&cfg)?;
    let dim = domain.dim();
    let hole = cfg
        .hole
        .clone()
        .ok_or_else(|| Failure::Config("convergence-study needs a hole center".into()))?;
    let mut sweep = eps_sweep
        .or(cfg.eps_sweep.clone())
        .unwrap_or_else(|| vec![3e-2, 1e-2, 3e-3]);
    sweep.sort_by(|a, b| b.partial_cmp(a).expect("finite eps"));
    let p = PointF::from_column_slice(&hole.center);

    // the expansion needs the unpunctured Robin function: closed form on
    // balls, solver-backed elsewhere
    let res = resolution(&cfg, dim);
    let ctx = KernelContext::<f64>::new(dim).map_err(Failure::from)?;
    let ball_radius = match &domain {
        DomainSpec::Ball { radius, .. } => Some(*radius),
        _ => None,
    };
    let outer_sys = if ball_radius.is_none() {
        Some(MfsSystem::plain(domain.clone(), res.clone()).map_err(Failure::from)?)
    } else {
        None
    };
    let outer_robin = |x: &PointF| -> f64 {
        match ball_radius {
            Some(r) => robin_core::kernels::robin_ball(x, r, &ctx).expect("interior point"),
            None => outer_sys
                .as_ref()
                .expect("solver-backed outer domain")
                .robin(x)
                .expect("outer solve"),
        }
    };
    let outer_grad = |x: &PointF| -> PointF {
        match ball_radius {
            Some(r) => robin_core::kernels::robin_ball_grad(x, r, &ctx).expect("interior point"),
            None => outer_sys
                .as_ref()
                .expect("solver-backed outer domain")
                .robin_gradient(x, GradientMethod::BoundaryFormula)
                .expect("outer solve"),
        }
    };

    // fixed probe: configured, or halfway from the hole center to the boundary
    let probe = match &cfg.probe {
        Some(v) => PointF::from_column_slice(v),
        None => {
            let clearance = domain.min_boundary_dist(&p);
            let mut dir = PointF::zeros(dim);
            dir[0] = 1.0;
            &p + dir * (0.5 * clearance)
        }
    };

    let mut out = String::from(
        "eps,robin_solver,robin_expansion,robin_abs_err,robin_budget,grad_abs_err,grad_budget,slope_from_prev\n",
    );
    let mut prev: Option<(f64, f64)> = None;
    for &eps in &sweep {
        let pd = punctured(
            domain.clone(),
            &HoleConfig {
                center: hole.center.clone(),
                radius: eps,
            },
        )?;
        let sys = MfsSystem::punctured(pd.clone(), res.clone()).map_err(Failure::from)?;
        let rv = sys.robin(&probe).map_err(Failure::from)?;
        let re = robin_core::asym::expansion_robin(&probe, &pd, &outer_robin)
            .map_err(Failure::from)?;
        let ge =
            robin_core::asym::expansion_grad(&probe, &pd, &outer_grad).map_err(Failure::from)?;
        let gv = sys
            .robin_gradient(&probe, GradientMethod::BoundaryFormula)
            .map_err(Failure::from)?;
        let dist = (&probe - &p).norm();
        let robin_err = (rv - re).abs();
        let grad_err = (gv - ge).norm();
        let slope = prev
            .map(|(peps, perr)| (perr / robin_err).ln() / (peps / eps).ln())
            .map(fmt_float)
            .unwrap_or_default();
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{}\n",
            fmt_float(eps),
            fmt_float(rv),
            fmt_float(re),
            fmt_float(robin_err),
            fmt_float(robin_core::asym::expansion_robin_budget(dim, eps, dist)),
            fmt_float(grad_err),
            fmt_float(robin_core::asym::expansion_grad_budget(dim, eps, dist)),
            slope
        ));
        prev = Some((eps, robin_err));
    }
    emit(&common, &out)
}
