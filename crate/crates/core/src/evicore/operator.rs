use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{check_dim, Error, Result};
use crate::games::NormalFormGame;
use crate::polytope::Polytope;
use crate::tolerance::ToleranceConfig;

/// Number of sampled points used to estimate the operator bound.
pub const BOUND_SAMPLES: usize = 1000;
pub const MAX_POLY_DEGREE: u32 = 4;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Monomial {
    pub coef: f64,
    /// One exponent per coordinate.
    pub powers: Vec<u32>,
}

impl Monomial {
    pub fn eval(&self, x: &[f64]) -> f64 {
        self.powers.iter().zip(x).fold(self.coef, |acc, (&p, &v)| acc * v.powi(p as i32))
    }

    pub fn degree(&self) -> u32 {
        self.powers.iter().sum()
    }

    /// Partial derivative along coordinate `j`.
    pub fn derivative(&self, j: usize) -> Option<Monomial> {
        let p = self.powers[j];
        if p == 0 {
            return None;
        }
        let mut powers = self.powers.clone();
        powers[j] -= 1;
        Some(Monomial { coef: self.coef * p as f64, powers })
    }
}

pub fn eval_polynomial(terms: &[Monomial], x: &[f64]) -> f64 {
    terms.iter().map(|t| t.eval(x)).sum()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GameCoordinates {
    /// Stacked mixed strategies.
    #[default]
    Full,
    /// First-action probabilities; two-action games only.
    Reduced,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TableEntry {
    pub x: Vec<f64>,
    pub value: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum OperatorKind {
    Affine {
        #[serde(rename = "M")]
        m: Vec<Vec<f64>>,
        q: Vec<f64>,
    },
    GameGradient {
        game: NormalFormGame,
        #[serde(default)]
        coordinates: GameCoordinates,
    },
    /// One polynomial per output coordinate.
    Polynomial { components: Vec<Vec<Monomial>> },
    /// `F(x) = -1` for `x < 0`, `+1` otherwise (one dimension).
    Sign,
    /// A base operator overridden at finitely many points.
    Table { base: Box<OperatorKind>, points: Vec<TableEntry> },
}

impl OperatorKind {
    pub fn dim(&self) -> Result<usize> {
        match self {
            OperatorKind::Affine { m, q } => {
                for (i, row) in m.iter().enumerate() {
                    if row.len() != q.len() {
                        return Err(Error::ParseError(format!(
                            "operator matrix row {i} has {} entries, expected {}",
                            row.len(),
                            q.len()
                        )));
                    }
                }
                check_dim("operator matrix rows", m.len(), q.len())?;
                Ok(q.len())
            }
            OperatorKind::GameGradient { game, coordinates } => match coordinates {
                GameCoordinates::Full => Ok(game.full_dim()),
                GameCoordinates::Reduced => {
                    game.require_binary()?;
                    Ok(game.players())
                }
            },
            OperatorKind::Polynomial { components } => {
                let d = components.len();
                for (i, terms) in components.iter().enumerate() {
                    for t in terms {
                        if t.powers.len() != d {
                            return Err(Error::ParseError(format!(
                                "monomial in component {i} has {} exponents, expected {d}",
                                t.powers.len()
                            )));
                        }
                        if t.degree() > MAX_POLY_DEGREE {
                            return Err(Error::DomainError(format!(
                                "polynomial degree {} exceeds {MAX_POLY_DEGREE}",
                                t.degree()
                            )));
                        }
                    }
                }
                Ok(d)
            }
            OperatorKind::Sign => Ok(1),
            OperatorKind::Table { base, points } => {
                let d = base.dim()?;
                for (i, p) in points.iter().enumerate() {
                    if p.x.len() != d || p.value.len() != d {
                        return Err(Error::ParseError(format!("table entry {i} has wrong dimension")));
                    }
                }
                Ok(d)
            }
        }
    }

    fn eval(&self, x: &[f64]) -> Vec<f64> {
        match self {
            OperatorKind::Affine { m, q } => m
                .iter()
                .zip(q)
                .map(|(row, qi)| qi + row.iter().zip(x).map(|(a, b)| a * b).sum::<f64>())
                .collect(),
            OperatorKind::GameGradient { game, coordinates } => match coordinates {
                GameCoordinates::Full => game.gradient_full(x),
                GameCoordinates::Reduced => game.gradient_reduced(x),
            },
            OperatorKind::Polynomial { components } => components.iter().map(|t| eval_polynomial(t, x)).collect(),
            OperatorKind::Sign => vec![if x[0] < 0.0 { -1.0 } else { 1.0 }],
            OperatorKind::Table { base, points } => {
                for p in points {
                    if p.x.iter().zip(x).all(|(a, b)| (a - b).abs() <= 1e-12) {
                        return p.value.clone();
                    }
                }
                base.eval(x)
            }
        }
    }
}

/// A bounded map `F : X -> R^d` with its estimated bound `B`.
#[derive(Debug, Clone, PartialEq)]
pub struct Operator {
    kind: OperatorKind,
    dim: usize,
    bound: f64,
}

impl Operator {
    /// Builds the operator and estimates `B = max |F(x)|` over vertices (when
    /// enumerable), table points and seeded samples of `X`.
    pub fn new(kind: OperatorKind, x_set: &Polytope) -> Result<Self> {
        let dim = kind.dim()?;
        check_dim("operator dimension", dim, x_set.dim())?;
        let tol = ToleranceConfig::default();
        let mut points = match x_set.enumerate_vertices() {
            Ok(v) => v.vertices,
            Err(Error::TooLarge(_)) => Vec::new(),
            Err(e) => return Err(e),
        };
        let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
        points.extend(x_set.sample(&mut rng, BOUND_SAMPLES, &tol)?);
        points.push(x_set.center().to_vec());
        if let OperatorKind::Table { points: extra, .. } = &kind {
            points.extend(extra.iter().map(|p| p.x.clone()));
        }
        let mut bound = 0.0_f64;
        for x in &points {
            let f = kind.eval(x);
            if f.iter().any(|v| !v.is_finite()) {
                return Err(Error::DomainError(format!("operator is not finite at {x:?}")));
            }
            bound = bound.max(f.iter().map(|v| v * v).sum::<f64>().sqrt());
        }
        Ok(Self { kind, dim, bound })
    }

    pub fn zero(x_set: &Polytope) -> Result<Self> {
        let d = x_set.dim();
        Self::new(OperatorKind::Affine { m: vec![vec![0.0; d]; d], q: vec![0.0; d] }, x_set)
    }

    pub fn kind(&self) -> &OperatorKind {
        &self.kind
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Estimated `B` with `|F(x)| <= B` on `X`.
    pub fn bound(&self) -> f64 {
        self.bound
    }

    pub fn evaluate(&self, x: &[f64]) -> Result<Vec<f64>> {
        check_dim("point", x.len(), self.dim)?;
        if x.iter().any(|v| !v.is_finite()) {
            return Err(Error::DomainError("operator evaluated at a non-finite point".into()));
        }
        Ok(self.kind.eval(x))
    }

    /// `(M, q)` when `F(x) = Mx + q` exactly.
    pub fn affine_parts(&self) -> Option<(Vec<Vec<f64>>, Vec<f64>)> {
        match &self.kind {
            OperatorKind::Affine { m, q } => Some((m.clone(), q.clone())),
            _ => None,
        }
    }
}
