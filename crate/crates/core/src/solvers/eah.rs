//! Ellipsoid against hope over deviation space `(K, c)`.
//!
//! The ellipsoid runs on the program "find `(K, c)` in the endomorphism
//! polytope with `<F(x), Kx + c - x> <= -eps` for every `x`", which has no
//! solution. Centers outside the polytope are cut by the membership
//! separator; centers inside have a fixed point `x`, where the payoff is
//! zero, so the constraint at `x` cuts them off. The fixed points met along
//! the way carry weights that certify an approximate solution.

use log::{debug, info};
use serde::{Deserialize, Serialize};

use super::certificate::{extract_certificate, Certificate};
use super::ellipsoid::{CutOutcome, Ellipsoid};
use super::report::{Method, SolveReport};
use crate::endomap::{minimize_over_endos, semi_separation, AffineEndo, SemiSeparation};
use crate::error::{Error, Result};
use crate::evicore::{evi_gap_constants, evi_gap_linear, EVIProblem, FiniteDistribution, PhiClass};
use crate::polytope::Polytope;
use crate::tolerance::ToleranceConfig;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EahConfig {
    pub tol: ToleranceConfig,
    /// Cut good-enough responses at `-eps` instead of through the center.
    pub deep_cuts: bool,
    /// Overrides the iteration cap.
    pub max_iterations: Option<usize>,
}

impl Default for EahConfig {
    fn default() -> Self {
        Self { tol: ToleranceConfig::default(), deep_cuts: true, max_iterations: None }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CutKind {
    /// Separation from the endomorphism polytope.
    Sep,
    /// Good-enough response: a fixed point of the center.
    Ger,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CutRecord {
    pub kind: CutKind,
    pub h: Vec<f64>,
    pub rhs: f64,
    /// Fixed point for GER cuts, the vertex behind the violated row for SEP.
    pub point: Vec<f64>,
    pub depth: f64,
}

#[derive(Debug, Clone)]
pub struct EahState {
    pub ellipsoid: Ellipsoid,
    pub cuts: Vec<CutRecord>,
    pub iterations: usize,
    /// `ln det` of the shape after each iteration.
    pub log_det_history: Vec<f64>,
}

/// Radius of a ball around the origin containing the endomorphism polytope:
/// the larger of `sqrt(d)(R+1)(1+max(1,R))` and the norm of its coordinate
/// bounding box.
pub fn deviation_radius(x_set: &Polytope, tol: &ToleranceConfig) -> Result<f64> {
    let d = x_set.dim();
    let r = x_set.outer_radius();
    let formula = (d as f64).sqrt() * (r + 1.0) * (1.0 + r.max(1.0));
    let n = d * d + d;
    let mut sq = 0.0;
    for j in 0..n {
        let mut extreme = 0.0_f64;
        for sign in [1.0, -1.0] {
            let mut g_mat = vec![0.0; d * d];
            let mut g_vec = vec![0.0; d];
            if j < d * d {
                g_mat[j] = sign;
            } else {
                g_vec[j - d * d] = sign;
            }
            let (v, _, _) = minimize_over_endos(x_set, &g_mat, &g_vec, tol)?;
            extreme = extreme.max(v.abs());
        }
        sq += extreme * extreme;
    }
    Ok(formula.max(sq.sqrt()))
}

pub fn iteration_cap(n_y: usize, r_y: f64, b: f64, eps: f64) -> usize {
    let n = n_y as f64;
    (20.0 * n * n * (r_y * b / eps).max(std::f64::consts::E).ln()).ceil() as usize
}

pub fn solve_eah(p: &EVIProblem, cfg: &EahConfig) -> Result<(SolveReport, EahState)> {
    if p.phi != PhiClass::Linear {
        return Err(Error::DomainError("the ellipsoid solver handles the linear deviation class".into()));
    }
    let x_set = &p.polytope;
    x_set.require_well_conditioned()?;
    let tol = cfg.tol;
    let eps = p.epsilon;
    let d = x_set.dim();
    let n_y = d * d + d;
    let big_r = x_set.outer_radius();
    let b = p.operator.bound().max(f64::MIN_POSITIVE);
    let r_y = deviation_radius(x_set, &tol)?;
    let rho = eps / (b * (r_y + big_r + 1.0));
    let target_log_det = n_y as f64 * (rho * rho).ln();
    let cap = cfg.max_iterations.unwrap_or_else(|| iteration_cap(n_y, r_y, b, eps));
    info!("eah: n_y = {n_y}, R_y = {r_y:.4}, B = {b:.4}, cap = {cap}");

    let mut state = EahState {
        ellipsoid: Ellipsoid::ball(vec![0.0; n_y], r_y)?,
        cuts: Vec::new(),
        iterations: 0,
        log_det_history: Vec::new(),
    };
    let mut points: Vec<Vec<f64>> = Vec::new();
    let mut values: Vec<Vec<f64>> = Vec::new();
    let mut termination = "iteration cap".to_string();

    while state.iterations < cap {
        state.iterations += 1;
        let center: Vec<f64> = state.ellipsoid.center.iter().copied().collect();
        let phi = AffineEndo::from_vec(d, &center)?;
        let (kind, h, rhs, point) = match semi_separation(x_set, &phi, &tol)? {
            SemiSeparation::Separation(s) => (CutKind::Sep, s.h, s.rhs, s.point),
            SemiSeparation::FixedPoint(x) => {
                let f = p.evaluate(&x, &tol)?;
                if f.iter().all(|v| *v == 0.0) {
                    // F vanishes: the point mass is an exact solution.
                    points.push(x.clone());
                    values.push(f);
                    termination = "exact solution".into();
                    break;
                }
                let mut h = Vec::with_capacity(n_y);
                for r in 0..d {
                    for s in 0..d {
                        h.push(f[r] * x[s]);
                    }
                }
                h.extend_from_slice(&f);
                let fx: f64 = f.iter().zip(&x).map(|(a, b)| a * b).sum();
                let nominal = if cfg.deep_cuts { fx - eps } else { fx };
                // The center's payoff at its fixed point is zero up to the
                // fixed-point residual; never cut shallower than the center.
                let at_center: f64 = h.iter().zip(&center).map(|(a, b)| a * b).sum();
                let rhs = nominal.min(at_center);
                points.push(x.clone());
                values.push(f);
                (CutKind::Ger, h, rhs, x)
            }
        };
        let outcome = state.ellipsoid.cut(&h, rhs)?;
        let depth = match outcome {
            CutOutcome::Updated { depth } => depth,
            _ => f64::NAN,
        };
        state.cuts.push(CutRecord { kind, h, rhs, point, depth });
        state.log_det_history.push(state.ellipsoid.log_det);
        match outcome {
            CutOutcome::Empty => {
                termination = "empty ellipsoid".into();
                break;
            }
            CutOutcome::Shallow => {
                return Err(Error::NumericalFailure(format!(
                    "{kind:?} cut does not cut the center at iteration {}",
                    state.iterations
                )));
            }
            CutOutcome::Updated { .. } => {}
        }
        if state.ellipsoid.log_det < target_log_det {
            termination = "volume".into();
            break;
        }
    }
    debug!("eah: {} iterations, {} fixed points, stopped by {termination}", state.iterations, points.len());
    if points.is_empty() {
        return Err(Error::CertificateNotFound { value: f64::NEG_INFINITY, epsilon: eps });
    }

    let mut retried = false;
    let mut cert = extract_certificate(x_set, &points, &values, &tol)?;
    let mut report = finish(p, &points, &cert, &tol);
    if !report.as_ref().map_or(false, |r| r.gap_linear_raw <= eps) {
        retried = true;
        info!("eah: certificate value {:e} not accepted, retrying with tightened tolerances", cert.value);
        let tight = tol.tightened();
        cert = extract_certificate(x_set, &points, &values, &tight)?;
        report = finish(p, &points, &cert, &tight);
    }
    let mut report = match report {
        Ok(r) if r.gap_linear_raw <= eps => r,
        Ok(r) => return Err(Error::CertificateNotFound { value: -r.gap_linear_raw, epsilon: eps }),
        Err(e) => return Err(e),
    };
    let ger = state.cuts.iter().filter(|c| c.kind == CutKind::Ger).count();
    report.iterations = state.iterations;
    report.ger_iterations = ger + usize::from(termination == "exact solution");
    report.sep_iterations = state.cuts.len() - ger;
    report.termination = termination;
    report.retried = retried;
    report.deviation_radius = r_y;
    Ok((report, state))
}

/// Builds the distribution from the weights and re-verifies its gaps.
fn finish(p: &EVIProblem, points: &[Vec<f64>], cert: &Certificate, tol: &ToleranceConfig) -> Result<SolveReport> {
    let (support, weights): (Vec<Vec<f64>>, Vec<f64>) = points
        .iter()
        .zip(&cert.lambda)
        .filter(|(_, w)| **w > 0.0)
        .map(|(x, w)| (x.clone(), *w))
        .unzip();
    let mu = FiniteDistribution::normalized(support, weights)?;
    let lin = evi_gap_linear(p, &mu, tol)?;
    let con = evi_gap_constants(p, &mu, tol)?;
    Ok(SolveReport {
        method: Method::Eah,
        epsilon: p.epsilon,
        support_size: mu.len(),
        solution: mu,
        gap_constants: con.gap,
        gap_constants_raw: con.raw,
        gap_linear: lin.gap,
        gap_linear_raw: lin.raw,
        gap_product: None,
        worst_deviation: lin.deviation,
        lambda: cert.lambda.clone(),
        certificate_value: Some(cert.value),
        iterations: 0,
        ger_iterations: 0,
        sep_iterations: 0,
        termination: String::new(),
        retried: false,
        operator_bound: p.operator.bound(),
        outer_radius: p.polytope.outer_radius(),
        deviation_radius: 0.0,
        average_regret: None,
        self_payoff: None,
        step_size: None,
        wall_time_secs: None,
    })
}
