use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::operator::{Monomial, Operator, OperatorKind};
use crate::error::{check_dim, Error, Result};
use crate::polytope::{Polytope, PolytopeSpec};
use crate::tolerance::ToleranceConfig;

/// Deviation class.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "PhiRepr", into = "PhiRepr")]
pub enum PhiClass {
    /// Constant maps `x -> x'`.
    Constants,
    /// Affine self-maps of `X`.
    Linear,
    /// Blockwise affine self-maps of `X = X_1 x ... x X_n`; the sizes of the
    /// coordinate blocks.
    ProductLinear(Vec<usize>),
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(untagged)]
enum PhiRepr {
    Name(String),
    Product { product: Vec<usize> },
}

impl TryFrom<PhiRepr> for PhiClass {
    type Error = Error;

    fn try_from(r: PhiRepr) -> Result<Self> {
        match r {
            PhiRepr::Name(s) => match s.as_str() {
                "con" => Ok(PhiClass::Constants),
                "lin" => Ok(PhiClass::Linear),
                other => Err(Error::ParseError(format!("unknown deviation class '{other}' (expected con, lin or {{\"product\": [...]}})"))),
            },
            PhiRepr::Product { product } => Ok(PhiClass::ProductLinear(product)),
        }
    }
}

impl From<PhiClass> for PhiRepr {
    fn from(p: PhiClass) -> Self {
        match p {
            PhiClass::Constants => PhiRepr::Name("con".into()),
            PhiClass::Linear => PhiRepr::Name("lin".into()),
            PhiClass::ProductLinear(product) => PhiRepr::Product { product },
        }
    }
}

/// Coordinate ranges of the blocks and the polytope of each block, checking
/// that every row of `X` touches exactly one block.
pub fn split_blocks(x_set: &Polytope, sizes: &[usize]) -> Result<Vec<(std::ops::Range<usize>, Polytope)>> {
    let d = x_set.dim();
    if sizes.iter().any(|&s| s == 0) || sizes.iter().sum::<usize>() != d {
        return Err(Error::InvariantViolation(format!(
            "block sizes {sizes:?} do not partition {d} coordinates"
        )));
    }
    let mut ranges = Vec::with_capacity(sizes.len());
    let mut start = 0;
    for &s in sizes {
        ranges.push(start..start + s);
        start += s;
    }
    let mut rows: Vec<(Vec<Vec<f64>>, Vec<f64>)> = vec![(Vec::new(), Vec::new()); sizes.len()];
    for i in 0..x_set.rows() {
        let row = x_set.row(i);
        let touched: Vec<usize> = ranges
            .iter()
            .enumerate()
            .filter(|(_, r)| row[(*r).clone()].iter().any(|v| *v != 0.0))
            .map(|(k, _)| k)
            .collect();
        if touched.len() != 1 {
            return Err(Error::InvariantViolation(format!(
                "row {i} of '{}' couples {} blocks; X is not a product over {sizes:?}",
                x_set.name(),
                touched.len()
            )));
        }
        let k = touched[0];
        rows[k].0.push(row[ranges[k].clone()].to_vec());
        rows[k].1.push(x_set.rhs()[i]);
    }
    ranges
        .into_iter()
        .zip(rows)
        .enumerate()
        .map(|(k, (r, (a, b)))| Ok((r, Polytope::new(&a, &b, format!("{} block {k}", x_set.name()))?)))
        .collect()
}

/// Structural facts that make expected solutions collapse to their mean.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct CollapseFlags {
    /// `F` is affine.
    pub linear_operator: bool,
    /// `<F(x), x> = 0` on `X`.
    pub zero_self_pairing: bool,
}

impl CollapseFlags {
    pub fn qualifies(&self) -> bool {
        self.linear_operator && self.zero_self_pairing
    }
}

/// Number of random points used by the structural sampling checks.
pub const FLAG_SAMPLES: usize = 100;

/// Checks affinity of `f` along random chords and `<f(x), x> = 0` at random
/// points of `x_set`.
pub fn sample_collapse_flags(
    x_set: &Polytope,
    f: &dyn Fn(&[f64]) -> Vec<f64>,
    seed: u64,
) -> Result<CollapseFlags> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let pts = x_set.sample(&mut rng, 2 * FLAG_SAMPLES, &ToleranceConfig::default())?;
    let mut linear = true;
    let mut pairing = true;
    for pair in pts.chunks(2) {
        let (x, y) = (&pair[0], &pair[1]);
        let fx = f(x);
        let fy = f(y);
        let scale = 1.0 + fx.iter().chain(&fy).fold(0.0_f64, |acc, v| acc.max(v.abs()));
        for alpha in [0.25, 0.5] {
            let z: Vec<f64> = x.iter().zip(y).map(|(a, b)| alpha * a + (1.0 - alpha) * b).collect();
            let fz = f(&z);
            let dev = fz
                .iter()
                .zip(fx.iter().zip(&fy))
                .fold(0.0_f64, |acc, (v, (a, b))| acc.max((v - alpha * a - (1.0 - alpha) * b).abs()));
            if dev > 1e-9 * scale {
                linear = false;
            }
        }
        for (p, fp) in [(x, &fx), (y, &fy)] {
            let s: f64 = fp.iter().zip(p.iter()).map(|(a, b)| a * b).sum();
            if s.abs() > 1e-9 * scale {
                pairing = false;
            }
        }
    }
    Ok(CollapseFlags { linear_operator: linear, zero_self_pairing: pairing })
}

/// `(X, F, Phi, eps)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "ProblemFile", into = "ProblemFile")]
pub struct EVIProblem {
    pub polytope: Polytope,
    pub operator: Operator,
    pub phi: PhiClass,
    pub epsilon: f64,
    /// Scalar utility or welfare whose negative gradient is `F`, when known.
    pub utility: Option<Vec<Monomial>>,
    pub flags: CollapseFlags,
}

/// On-disk problem schema.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProblemFile {
    pub polytope: PolytopeSpec,
    pub operator: OperatorKind,
    pub phi: PhiClass,
    pub epsilon: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub utility: Option<Vec<Monomial>>,
}

impl TryFrom<ProblemFile> for EVIProblem {
    type Error = Error;

    fn try_from(f: ProblemFile) -> Result<Self> {
        let x = Polytope::from_spec(&f.polytope)?;
        let op = Operator::new(f.operator, &x)?;
        let mut p = EVIProblem::new(x, op, f.phi, f.epsilon)?;
        if let Some(u) = f.utility {
            p = p.with_utility(u)?;
        }
        Ok(p)
    }
}

impl From<EVIProblem> for ProblemFile {
    fn from(p: EVIProblem) -> Self {
        ProblemFile {
            polytope: p.polytope.to_spec(),
            operator: p.operator.kind().clone(),
            phi: p.phi,
            epsilon: p.epsilon,
            utility: p.utility,
        }
    }
}

impl EVIProblem {
    pub fn new(polytope: Polytope, operator: Operator, phi: PhiClass, epsilon: f64) -> Result<Self> {
        check_dim("operator dimension", operator.dim(), polytope.dim())?;
        if !(epsilon.is_finite() && epsilon > 0.0) {
            return Err(Error::InvariantViolation(format!("epsilon must be positive, got {epsilon}")));
        }
        if let PhiClass::ProductLinear(sizes) = &phi {
            split_blocks(&polytope, sizes)?;
        }
        let flags = structural_flags(&polytope, &operator)?;
        Ok(Self { polytope, operator, phi, epsilon, utility: None, flags })
    }

    pub fn with_utility(mut self, utility: Vec<Monomial>) -> Result<Self> {
        for (k, t) in utility.iter().enumerate() {
            check_dim(&format!("utility term {k}"), t.powers.len(), self.dim())?;
        }
        self.utility = Some(utility);
        Ok(self)
    }

    pub fn with_phi(mut self, phi: PhiClass) -> Result<Self> {
        if let PhiClass::ProductLinear(sizes) = &phi {
            split_blocks(&self.polytope, sizes)?;
        }
        self.phi = phi;
        Ok(self)
    }

    pub fn with_epsilon(mut self, epsilon: f64) -> Result<Self> {
        if !(epsilon.is_finite() && epsilon > 0.0) {
            return Err(Error::InvariantViolation(format!("epsilon must be positive, got {epsilon}")));
        }
        self.epsilon = epsilon;
        Ok(self)
    }

    pub fn dim(&self) -> usize {
        self.polytope.dim()
    }

    /// Tolerance used to decide whether an evaluation point lies in `X`.
    pub fn domain_tol(&self, tol: &ToleranceConfig) -> f64 {
        tol.proj * (1.0 + self.polytope.outer_radius())
    }

    /// `F(x)` for `x` in `X`.
    pub fn evaluate(&self, x: &[f64], tol: &ToleranceConfig) -> Result<Vec<f64>> {
        let m = self.polytope.membership(x, self.domain_tol(tol))?;
        if !m.inside {
            return Err(Error::DomainError(format!(
                "point violates row {} of X by {:e}",
                m.separator.unwrap_or(0),
                m.max_violation
            )));
        }
        self.operator.evaluate(x)
    }
}

/// Collapse flags; game fields are checked in stacked-strategy coordinates,
/// which an affine change to first-action coordinates preserves for gaps.
fn structural_flags(x_set: &Polytope, op: &Operator) -> Result<CollapseFlags> {
    match op.kind() {
        OperatorKind::GameGradient { game, .. } => {
            let full = game.full_polytope()?;
            let g = game.clone();
            sample_collapse_flags(&full, &move |x: &[f64]| g.gradient_full(x), 0xf1a9)
        }
        OperatorKind::Affine { .. } => {
            let mut flags = sample_collapse_flags(x_set, &|x: &[f64]| op.evaluate(x).expect("dimension checked"), 0xf1a9)?;
            flags.linear_operator = true;
            Ok(flags)
        }
        _ => sample_collapse_flags(x_set, &|x: &[f64]| op.evaluate(x).expect("dimension checked"), 0xf1a9),
    }
}
