//! Sample-based structural checks (smoothness, quasar-concavity), welfare
//! bounds, collapse of expected solutions to their mean, and the local
//! deviation bound.

use serde::{Deserialize, Serialize};

use crate::error::{check_dim, Error, Result};
use crate::evicore::{
    eval_polynomial, evi_gap_constants, EVIProblem, FiniteDistribution, Monomial, Operator, OperatorKind, PhiClass,
};
use crate::polytope::{vi_gap, Polytope};
use crate::tolerance::ToleranceConfig;

/// Slack allowed in every pointwise inequality.
pub const CHECK_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SmoothnessParams {
    pub lambda: f64,
    pub nu: f64,
    pub x_star: Vec<f64>,
}

impl SmoothnessParams {
    pub fn new(lambda: f64, nu: f64, x_star: Vec<f64>) -> Result<Self> {
        if !(lambda > 0.0 && lambda.is_finite()) || !(nu > -1.0 && nu.is_finite()) {
            return Err(Error::DomainError(format!("smoothness needs lambda > 0 and nu > -1, got ({lambda}, {nu})")));
        }
        Ok(Self { lambda, nu, x_star })
    }

    /// `lambda / (1 + nu)`.
    pub fn ratio(&self) -> f64 {
        self.lambda / (1.0 + self.nu)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuasarParams {
    pub gamma: f64,
    pub x_star: Vec<f64>,
}

impl QuasarParams {
    pub fn new(gamma: f64, x_star: Vec<f64>) -> Result<Self> {
        if !(gamma > 0.0 && gamma <= 1.0) {
            return Err(Error::DomainError(format!("gamma must lie in (0, 1], got {gamma}")));
        }
        Ok(Self { gamma, x_star })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ViolationKind {
    /// The defining inequality fails.
    Inequality,
    /// A sample beats the claimed maximizer.
    NotMaximizer,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Violation {
    pub kind: ViolationKind,
    pub point: Vec<f64>,
    pub lhs: f64,
    pub rhs: f64,
}

/// Outcome of a pointwise check over a sample set.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampleCheck {
    pub samples: usize,
    /// First violation in sample order.
    pub violation: Option<Violation>,
}

impl SampleCheck {
    pub fn passed(&self) -> bool {
        self.violation.is_none()
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn exceeds(lhs: f64, rhs: f64) -> bool {
    lhs > rhs + CHECK_TOL * (1.0 + lhs.abs().max(rhs.abs()))
}

/// Checks `<F(x), x* - x> <= -lambda W(x*) + (nu + 1) W(x)` and
/// `W(x) <= W(x*)` at every sample.
pub fn check_smoothness(
    f: &dyn Fn(&[f64]) -> Vec<f64>,
    w: &dyn Fn(&[f64]) -> f64,
    sp: &SmoothnessParams,
    samples: &[Vec<f64>],
) -> SampleCheck {
    let w_star = w(&sp.x_star);
    for x in samples {
        let wx = w(x);
        if exceeds(wx, w_star) {
            return SampleCheck {
                samples: samples.len(),
                violation: Some(Violation { kind: ViolationKind::NotMaximizer, point: x.clone(), lhs: wx, rhs: w_star }),
            };
        }
        let diff: Vec<f64> = sp.x_star.iter().zip(x).map(|(a, b)| a - b).collect();
        let lhs = dot(&f(x), &diff);
        let rhs = -sp.lambda * w_star + (sp.nu + 1.0) * wx;
        if exceeds(lhs, rhs) {
            return SampleCheck {
                samples: samples.len(),
                violation: Some(Violation { kind: ViolationKind::Inequality, point: x.clone(), lhs, rhs }),
            };
        }
    }
    SampleCheck { samples: samples.len(), violation: None }
}

/// Checks `u(x*) <= u(x) + <grad u(x), x* - x> / gamma` at every sample.
pub fn check_quasar(
    u: &dyn Fn(&[f64]) -> f64,
    grad_u: &dyn Fn(&[f64]) -> Vec<f64>,
    qp: &QuasarParams,
    samples: &[Vec<f64>],
) -> SampleCheck {
    let u_star = u(&qp.x_star);
    for x in samples {
        let diff: Vec<f64> = qp.x_star.iter().zip(x).map(|(a, b)| a - b).collect();
        let rhs = u(x) + dot(&grad_u(x), &diff) / qp.gamma;
        if exceeds(u_star, rhs) {
            return SampleCheck {
                samples: samples.len(),
                violation: Some(Violation { kind: ViolationKind::Inequality, point: x.clone(), lhs: u_star, rhs }),
            };
        }
    }
    SampleCheck { samples: samples.len(), violation: None }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WelfareBound {
    pub bound: f64,
    pub expected: f64,
    pub pass: bool,
}

/// `rho W(x*) - eps / (1 + nu)` against `E_mu W`.
pub fn welfare_bound(
    mu: &FiniteDistribution,
    w: &dyn Fn(&[f64]) -> f64,
    sp: &SmoothnessParams,
    eps: f64,
) -> WelfareBound {
    let bound = sp.ratio() * w(&sp.x_star) - eps / (1.0 + sp.nu);
    let expected: f64 = mu.iter().map(|(x, p)| p * w(x)).sum();
    WelfareBound { bound, expected, pass: expected >= bound - CHECK_TOL }
}

/// Lower bound `u(x*) - eps / gamma` on the expected utility of an
/// `eps`-approximate solution of a `gamma`-quasar-concave instance.
pub fn quasar_collapse_bound(u_star: f64, eps: f64, gamma: f64) -> f64 {
    u_star - eps / gamma
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum CollapseStatus {
    /// Flags hold and the mean's VI gap is within the constants gap.
    Verified,
    /// Flags are absent; numbers are reported without a guarantee.
    Advisory { reason: String },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MeanCollapse {
    pub mean: Vec<f64>,
    pub vi_gap: f64,
    pub constants_gap: f64,
    pub status: CollapseStatus,
}

impl MeanCollapse {
    /// Turns an advisory result into [`Error::PreconditionUnverified`].
    pub fn require_verified(self) -> Result<Self> {
        match &self.status {
            CollapseStatus::Verified => Ok(self),
            CollapseStatus::Advisory { reason } => Err(Error::PreconditionUnverified(reason.clone())),
        }
    }
}

/// Slack of the collapse assertion `vi_gap(mean) <= constants gap`.
pub const COLLAPSE_TOL: f64 = 1e-6;

/// The mean of `mu` and its VI gap. With an affine `F` and `<F(x), x> = 0`
/// the gap is asserted to be at most the constants gap of `mu`.
pub fn mean_collapse(p: &EVIProblem, mu: &FiniteDistribution, tol: &ToleranceConfig) -> Result<MeanCollapse> {
    check_dim("distribution dimension", mu.dim(), p.dim())?;
    let mean = mu.mean();
    let vg = vi_gap(&p.polytope, &p.operator, &mean, tol)?;
    let cg = evi_gap_constants(p, mu, tol)?.raw;
    if !p.flags.qualifies() {
        return Ok(MeanCollapse {
            mean,
            vi_gap: vg,
            constants_gap: cg,
            status: CollapseStatus::Advisory {
                reason: format!(
                    "collapse flags not verified (linear operator: {}, zero self-pairing: {})",
                    p.flags.linear_operator, p.flags.zero_self_pairing
                ),
            },
        });
    }
    if vg > cg.max(0.0) + COLLAPSE_TOL {
        return Err(Error::InvariantViolation(format!(
            "mean has VI gap {vg:e} above the constants gap {cg:e}"
        )));
    }
    Ok(MeanCollapse { mean, vi_gap: vg, constants_gap: cg, status: CollapseStatus::Verified })
}

/// `delta eps / D + delta^2 L / 2`.
pub fn local_phi_bound(eps: f64, delta: f64, diameter: f64, smoothness: f64) -> Result<f64> {
    if !(diameter > 0.0) {
        return Err(Error::DomainError(format!("diameter must be positive, got {diameter}")));
    }
    if eps < 0.0 || delta < 0.0 || smoothness < 0.0 {
        return Err(Error::DomainError("eps, delta and L must be nonnegative".into()));
    }
    Ok(delta * eps / diameter + delta * delta * smoothness / 2.0)
}

/// Domain `[-1, 2]` of the one-dimensional quartic family.
pub const QUARTIC_DOMAIN: (f64, f64) = (-1.0, 2.0);

/// `u(x) = -(3/4) p x^4 + p x^3 + 1`.
pub fn quartic_utility(p: f64) -> Vec<Monomial> {
    vec![
        Monomial { coef: -0.75 * p, powers: vec![4] },
        Monomial { coef: p, powers: vec![3] },
        Monomial { coef: 1.0, powers: vec![0] },
    ]
}

/// `F = -u' = 3p x^3 - 3p x^2` on [`QUARTIC_DOMAIN`], with the utility attached.
pub fn quartic_problem(p: f64, eps: f64) -> Result<EVIProblem> {
    let x = Polytope::cube(1, QUARTIC_DOMAIN.0, QUARTIC_DOMAIN.1)?.renamed(format!("quartic p={p} domain"));
    let comps = vec![vec![Monomial { coef: 3.0 * p, powers: vec![3] }, Monomial { coef: -3.0 * p, powers: vec![2] }]];
    let op = Operator::new(OperatorKind::Polynomial { components: comps }, &x)?;
    EVIProblem::new(x, op, PhiClass::Linear, eps)?.with_utility(quartic_utility(p))
}

/// `n` evenly spaced points of `[lo, hi]`, ends included.
pub fn grid_1d(lo: f64, hi: f64, n: usize) -> Vec<Vec<f64>> {
    if n == 1 {
        return vec![vec![lo]];
    }
    (0..n).map(|k| vec![lo + (hi - lo) * k as f64 / (n - 1) as f64]).collect()
}

/// Gradient of a polynomial utility.
pub fn polynomial_gradient(terms: &[Monomial], x: &[f64]) -> Vec<f64> {
    (0..x.len())
        .map(|j| terms.iter().filter_map(|t| t.derivative(j)).map(|t| t.eval(x)).sum())
        .collect()
}

/// Utility of the problem as a closure; `None` when it carries none.
pub fn utility_fn(p: &EVIProblem) -> Option<impl Fn(&[f64]) -> f64 + '_> {
    p.utility.as_ref().map(|u| move |x: &[f64]| eval_polynomial(u, x))
}
