//! Dispatch of configured tasks to the library.

use freeprod::freegroup::{haagerup_check, leinert_check, GroupBall};
use freeprod::freepoly::{approximating_radius, StatePreservingMap};
use freeprod::khintchine::{enclose_norm, verify_kd, verify_projection_bounds, NormEnclosure};
use freeprod::linalg::min_eigenvalue;
use freeprod::schur::{cb_norm, polarize, CbNorm};
use freeprod::{Error, FockSpace, MatrixElement};

use crate::config::{self, ConfigError, Task, TaskConfig};
use crate::report::{Certificate::*, Report};
use crate::RunError;

/// Default bracket width for the cb-norm tasks.
pub const DEFAULT_CB_TOL: f64 = 1e-7;
const ENCLOSURE_TOL: f64 = 1e-8;
const COEFFICIENT_TOL: f64 = 1e-12;
const POLARIZE_RECONSTRUCTION_TOL: f64 = 1e-10;
const POLARIZE_EPS_TOL: f64 = 1e-9;
const PSD_TOL: f64 = 1e-10;

type Outcome = std::result::Result<Report, RunError>;

pub fn dispatch(cfg: &TaskConfig) -> Outcome {
    match cfg.task {
        Task::VerifyKd => run_verify_kd(cfg),
        Task::EncloseNorm => run_enclose_norm(cfg),
        Task::ProjectionBounds => run_projection_bounds(cfg),
        Task::Poisson => run_poisson(cfg),
        Task::Haagerup => run_haagerup(cfg),
        Task::Leinert => run_leinert(cfg),
        Task::Cbnorm => run_cbnorm(cfg),
        Task::Polarize => run_polarize(cfg),
    }
}

struct Instance {
    x: MatrixElement,
    seed: Option<u64>,
    fock: FockSpace,
    len: usize,
}

/// Builds the element and a Fock space long enough for domain length `L`.
fn instance(cfg: &TaskConfig) -> std::result::Result<Instance, RunError> {
    let family = config::build_family(cfg)?;
    let (x, seed) = config::build_element(cfg, &family)?;
    let len = cfg.parameter("L", cfg.parameters.L)?;
    let d = x.degree();
    let fock = FockSpace::new(&family, len.max(d) + d)?;
    Ok(Instance { x, seed, fock, len })
}

fn record_enclosure(report: &mut Report, prefix: &str, e: &NormEnclosure) {
    report.quantity(format!("{prefix}lower"), e.lower, SvdCertified);
    report.quantity(format!("{prefix}upper"), e.upper, SvdCertified);
    report.quantity(format!("{prefix}band_sum"), e.band_sum, SvdCertified);
    report.quantity(format!("{prefix}khintchine_sum"), e.khintchine_sum, SvdCertified);
}

fn run_verify_kd(cfg: &TaskConfig) -> Outcome {
    let inst = instance(cfg)?;
    let r = verify_kd(&inst.x, &inst.fock, inst.len)?;
    let mut report = Report::new(cfg, inst.seed);
    report.quantity("degree", r.degree as f64, Exact);
    report.quantity("amplification", r.amplification as f64, Exact);
    report.quantity("ed_norm", r.ed.value, SvdCertified);
    report.quantity("ed_norm_upper", r.ed.upper, SvdCertified);
    for (k, v) in r.ed.plain.iter().enumerate() {
        report.quantity(format!("plain_block[{k}]"), *v, SvdCertified);
    }
    for (k, v) in r.ed.diagonal.iter().enumerate() {
        report.quantity(format!("diagonal_block[{k}]"), *v, SvdCertified);
    }
    report.quantity("truncated_norm", r.truncated_norm, SvdCertified);
    report.quantity("truncated_residual", r.truncated_residual, SvdCertified);
    report.quantity("ratio", r.ratio, SvdCertified);
    report.quantity("constant", r.constant, Exact);
    report.quantity("tol", r.tol, Exact);
    report.check("ed_norm <= truncated_norm", r.ed.value, r.truncated_norm + r.tol);
    report.check(
        "truncated_norm <= constant * ed_norm",
        r.truncated_norm,
        r.constant * r.ed.upper + r.tol,
    );
    if let Some(fi) = &r.finite_index {
        report.quantity("finite_index_constant", fi.constant, Exact);
        report.quantity("finite_index_diagonal_norm", fi.diagonal_norm, SvdCertified);
        report.note(
            "truncated_norm <= finite_index_constant * diagonal_norm",
            r.truncated_norm,
            fi.constant * fi.diagonal_norm + r.tol,
        );
    }
    Ok(report)
}

fn run_enclose_norm(cfg: &TaskConfig) -> Outcome {
    let inst = instance(cfg)?;
    let e = enclose_norm(&inst.x, &inst.fock, inst.len)?;
    let mut report = Report::new(cfg, inst.seed);
    record_enclosure(&mut report, "", &e);
    for b in &e.band {
        report.quantity(format!("band[{}]", b.n), b.upper, SvdCertified);
    }
    for (p, v) in e.lower_profile.iter().enumerate() {
        report.quantity(format!("lower_profile[{p}]"), *v, SvdCertified);
    }
    report.check("lower <= upper", e.lower, e.upper + ENCLOSURE_TOL * e.upper.max(1.0));
    Ok(report)
}

fn run_projection_bounds(cfg: &TaskConfig) -> Outcome {
    let inst = instance(cfg)?;
    let d = cfg.parameter("d", cfg.parameters.d)?;
    let r = verify_projection_bounds(&inst.x, &inst.fock, d, inst.len)?;
    let mut report = Report::new(cfg, inst.seed);
    report.quantity("upper_x", r.upper_x, SvdCertified);
    report.quantity("lower_qd", r.lower_qd, SvdCertified);
    report.quantity("lower_pd", r.lower_pd, SvdCertified);
    report.quantity("qd_constant", r.qd_constant, Exact);
    report.quantity("pd_constant", r.pd_constant, Exact);
    report.check(
        "lower_qd <= qd_constant * upper_x",
        r.lower_qd,
        r.qd_constant * r.upper_x + r.tol,
    );
    report.check(
        "lower_pd <= pd_constant * upper_x",
        r.lower_pd,
        r.pd_constant * r.upper_x + r.tol,
    );
    Ok(report)
}

fn distance(a: &MatrixElement, b: &MatrixElement) -> f64 {
    a.parts()
        .iter()
        .zip(b.parts())
        .map(|((_, x), (_, y))| x.coefficient_distance(y))
        .fold(0.0, f64::max)
}

fn run_poisson(cfg: &TaskConfig) -> Outcome {
    let inst = instance(cfg)?;
    let r = cfg.parameter("r", cfg.parameters.r)?;
    if !(0.0..1.0).contains(&r) {
        return Err(ConfigError::new("/parameters/r", format!("r = {r} must lie in [0, 1)")).into());
    }
    let family = inst.fock.family().clone();
    let poisson = |x: &MatrixElement, r: f64| x.map(|p| p.poisson(r).expect("r checked"));
    let y = poisson(&inst.x, r);
    let mut report = Report::new(cfg, inst.seed);

    let semigroup = distance(&poisson(&y, r), &poisson(&inst.x, r * r));
    report.quantity("semigroup_defect", semigroup, Exact);
    report.check("semigroup_defect", semigroup, COEFFICIENT_TOL);

    let letters = StatePreservingMap::poisson_letters(&family, r);
    let bd = inst.x.map(|p| p.bd_free_product_map(&letters).expect("same family"));
    let bd_defect = distance(&bd, &y);
    report.quantity("letterwise_defect", bd_defect, Exact);
    report.check("letterwise_defect", bd_defect, COEFFICIENT_TOL);

    let whole = enclose_norm(&inst.x, &inst.fock, inst.len)?;
    record_enclosure(&mut report, "x.", &whole);
    let image = enclose_norm(&y, &inst.fock, inst.len)?;
    record_enclosure(&mut report, "poisson.", &image);
    let tol = ENCLOSURE_TOL * whole.upper.max(1.0);
    report.check("poisson.lower <= x.upper", image.lower, whole.upper + tol);

    if let Some(n) = cfg.parameters.n {
        let truncated = inst.x.map(|p| p.poisson_truncated(r, n).expect("r checked").0);
        let bound = freeprod::freepoly::truncated_poisson_bound(r, n);
        let t = enclose_norm(&truncated, &inst.fock, inst.len)?;
        record_enclosure(&mut report, "truncated.", &t);
        report.quantity("truncation_bound", bound, Exact);
        report.quantity("approximating_radius", approximating_radius(n), Exact);
        report.check(
            "truncated.lower <= truncation_bound * x.upper",
            t.lower,
            bound * whole.upper + tol,
        );
    }
    Ok(report)
}

fn run_haagerup(cfg: &TaskConfig) -> Outcome {
    let g = config::group(cfg)?;
    let coeffs = config::group_coeffs(g)?;
    let radius = cfg.parameter("R", cfg.parameters.R)?;
    let degree = coeffs
        .iter()
        .map(|(w, _)| freeprod::freegroup::reduce(w).len())
        .max()
        .unwrap_or(0);
    let ball = GroupBall::new(g.k, radius + degree).map_err(|e| ConfigError::new("/group/k", e.to_string()))?;
    let r = haagerup_check(&ball, &coeffs, radius)?;
    let mut report = Report::new(cfg, None);
    report.quantity("degree", r.degree as f64, Exact);
    report.quantity("l2_norm", r.l2_norm, Exact);
    report.quantity("vacuum_norm", r.vacuum_norm, Exact);
    report.quantity("truncated_norm", r.truncated_norm, SvdCertified);
    report.quantity("constant", r.constant, Exact);
    report.check("l2_norm <= truncated_norm", r.l2_norm, r.truncated_norm + r.tol);
    report.check(
        "truncated_norm <= constant * l2_norm",
        r.truncated_norm,
        r.constant * r.l2_norm + r.tol,
    );
    Ok(report)
}

fn run_leinert(cfg: &TaskConfig) -> Outcome {
    let g = config::group(cfg)?;
    let xs = config::group_matrices(g)?;
    let radius = cfg.parameter("R", cfg.parameters.R)?;
    let ball = GroupBall::new(g.k, radius + 1).map_err(|e| ConfigError::new("/group/k", e.to_string()))?;
    let r = leinert_check(&ball, &xs, radius)?;
    let mut report = Report::new(cfg, None);
    report.quantity("column", r.column, SvdCertified);
    report.quantity("row", r.row, SvdCertified);
    report.quantity("truncated_norm", r.truncated_norm, SvdCertified);
    report.quantity("bound", r.bound, SvdCertified);
    report.check("truncated_norm <= bound", r.truncated_norm, r.bound + r.tol);
    if radius >= 1 {
        report.check(
            "max(column, row) <= truncated_norm",
            r.column.max(r.row),
            r.truncated_norm + r.tol,
        );
    }
    Ok(report)
}

fn cb_tol(cfg: &TaskConfig) -> std::result::Result<f64, ConfigError> {
    let tol = cfg.parameters.tol.unwrap_or(DEFAULT_CB_TOL);
    if !(tol > 0.0 && tol.is_finite()) {
        return Err(ConfigError::new("/parameters/tol", "tol must be positive"));
    }
    Ok(tol)
}

/// Runs `cb_norm`; a solver that stops short of `tol` yields a failed check
/// carrying its best bracket rather than an error.
fn solve(cfg: &TaskConfig, report: &mut Report) -> std::result::Result<Option<CbNorm>, RunError> {
    let a = config::build_symbol(cfg)?;
    let tol = cb_tol(cfg)?;
    report.quantity("tol", tol, Exact);
    report.quantity("max_abs_entry", a.max_abs_entry(), Exact);
    match cb_norm(&a, tol) {
        Ok(cb) => {
            report.quantity("cb_norm.lower", cb.lower, SdpBracketed);
            report.quantity("cb_norm.upper", cb.upper, SdpBracketed);
            let err = cb.factorization.max_error(&a);
            report.quantity("factorization_error", err, Exact);
            report.check("cb_norm.upper - cb_norm.lower", cb.gap(), tol);
            report.check("factorization_error", err, 1e-9 * a.max_abs_entry().max(1.0));
            Ok(Some(cb))
        }
        Err(Error::NoConvergence { lower, upper, .. }) => {
            report.quantity("cb_norm.lower", lower, SdpBracketed);
            report.quantity("cb_norm.upper", upper, SdpBracketed);
            report.check("cb_norm.upper - cb_norm.lower", upper - lower, tol);
            Ok(None)
        }
        Err(e) => Err(e.into()),
    }
}

fn run_cbnorm(cfg: &TaskConfig) -> Outcome {
    let mut report = Report::new(cfg, None);
    solve(cfg, &mut report)?;
    Ok(report)
}

fn run_polarize(cfg: &TaskConfig) -> Outcome {
    let mut report = Report::new(cfg, None);
    let Some(cb) = solve(cfg, &mut report)? else {
        return Ok(report);
    };
    let fact = &cb.factorization;
    let p = polarize(&fact.x, &fact.y, cfg.parameters.eps)?;
    let half_diff = p.b_cb_norm;
    report.quantity("eps", p.eps, Exact);
    report.quantity("b_cb_norm", half_diff, Exact);
    report.quantity("reconstruction_error", p.reconstruction_error, Exact);
    let (min_a, min_b) = (min_eigenvalue(&p.a), min_eigenvalue(&p.b));
    report.quantity("min_eigenvalue_a", min_a, SvdCertified);
    report.quantity("min_eigenvalue_b", min_b, SvdCertified);
    report.check(
        "reconstruction_error",
        p.reconstruction_error,
        POLARIZE_RECONSTRUCTION_TOL,
    );
    report.check("b_cb_norm <= eps", half_diff, p.eps + POLARIZE_EPS_TOL);
    report.check("-min_eigenvalue_a", -min_a, PSD_TOL);
    report.check("-min_eigenvalue_b", -min_b, PSD_TOL);
    Ok(report)
}
