use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::polytope::Polytope;

/// Games with more players or actions are rejected.
pub const MAX_PLAYERS: usize = 3;
pub const MAX_ACTIONS: usize = 4;

/// Utilities are indexed by pure profiles in row-major order, player 0's
/// action being the most significant digit.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "GameRepr", into = "GameRepr")]
pub struct NormalFormGame {
    name: String,
    actions: Vec<usize>,
    utilities: Vec<Vec<f64>>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct GameRepr {
    #[serde(default)]
    name: String,
    actions: Vec<usize>,
    utilities: Vec<Vec<f64>>,
}

impl TryFrom<GameRepr> for NormalFormGame {
    type Error = Error;

    fn try_from(r: GameRepr) -> Result<Self> {
        NormalFormGame::new(r.name, r.actions, r.utilities)
    }
}

impl From<NormalFormGame> for GameRepr {
    fn from(g: NormalFormGame) -> Self {
        GameRepr { name: g.name, actions: g.actions, utilities: g.utilities }
    }
}

impl NormalFormGame {
    pub fn new(name: impl Into<String>, actions: Vec<usize>, utilities: Vec<Vec<f64>>) -> Result<Self> {
        let n = actions.len();
        if n == 0 || actions.iter().any(|&a| a == 0) {
            return Err(Error::InvariantViolation("every player needs at least one action".into()));
        }
        if n > MAX_PLAYERS || actions.iter().any(|&a| a > MAX_ACTIONS) {
            return Err(Error::TooLarge(format!(
                "games are limited to {MAX_PLAYERS} players with {MAX_ACTIONS} actions each"
            )));
        }
        if utilities.len() != n {
            return Err(Error::InvariantViolation(format!(
                "{} utility tensors for {n} players",
                utilities.len()
            )));
        }
        let profiles: usize = actions.iter().product();
        for (i, u) in utilities.iter().enumerate() {
            if u.len() != profiles {
                return Err(Error::InvariantViolation(format!(
                    "utility tensor of player {i} has {} entries, expected {profiles}",
                    u.len()
                )));
            }
            if u.iter().any(|v| !v.is_finite()) {
                return Err(Error::InvariantViolation(format!("utility tensor of player {i} is not finite")));
            }
        }
        Ok(Self { name: name.into(), actions, utilities })
    }

    /// Bach or Stravinsky: (3,2) on (B,B), (2,3) on (S,S), (0,0) otherwise.
    pub fn bach_or_stravinsky() -> Self {
        Self::new(
            "bach-or-stravinsky",
            vec![2, 2],
            vec![vec![3.0, 0.0, 0.0, 2.0], vec![2.0, 0.0, 0.0, 3.0]],
        )
        .expect("valid game")
    }

    pub fn matching_pennies() -> Self {
        Self::new(
            "matching-pennies",
            vec![2, 2],
            vec![vec![1.0, -1.0, -1.0, 1.0], vec![-1.0, 1.0, 1.0, -1.0]],
        )
        .expect("valid game")
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn players(&self) -> usize {
        self.actions.len()
    }

    pub fn actions(&self) -> &[usize] {
        &self.actions
    }

    pub fn utilities(&self, player: usize) -> &[f64] {
        &self.utilities[player]
    }

    pub fn profile_count(&self) -> usize {
        self.actions.iter().product()
    }

    /// Pure profile with the given flat index.
    pub fn profile(&self, mut index: usize) -> Vec<usize> {
        let mut p = vec![0; self.players()];
        for i in (0..self.players()).rev() {
            p[i] = index % self.actions[i];
            index /= self.actions[i];
        }
        p
    }

    pub fn profile_index(&self, profile: &[usize]) -> usize {
        profile.iter().zip(&self.actions).fold(0, |acc, (a, n)| acc * n + a)
    }

    pub fn utility(&self, player: usize, profile: &[usize]) -> f64 {
        self.utilities[player][self.profile_index(profile)]
    }

    /// True when every player has exactly two actions.
    pub fn is_binary(&self) -> bool {
        self.actions.iter().all(|&a| a == 2)
    }

    pub fn full_dim(&self) -> usize {
        self.actions.iter().sum()
    }

    /// Offsets of each player's block in full coordinates.
    pub fn block_offsets(&self) -> Vec<usize> {
        let mut off = Vec::with_capacity(self.players() + 1);
        let mut acc = 0;
        off.push(0);
        for &a in &self.actions {
            acc += a;
            off.push(acc);
        }
        off
    }

    /// Product of simplices.
    pub fn full_polytope(&self) -> Result<Polytope> {
        let parts: Vec<Polytope> = self.actions.iter().map(|&a| Polytope::simplex(a)).collect::<Result<_>>()?;
        Ok(Polytope::product(&parts)?.renamed(format!("{} strategies", self.name)))
    }

    /// `[0,1]^n` of first-action probabilities, for two-action games.
    pub fn reduced_polytope(&self) -> Result<Polytope> {
        self.require_binary()?;
        Ok(Polytope::cube(self.players(), 0.0, 1.0)?.renamed(format!("{} first-action probabilities", self.name)))
    }

    pub fn require_binary(&self) -> Result<()> {
        if self.is_binary() {
            Ok(())
        } else {
            Err(Error::DimensionMismatch(format!(
                "reduced coordinates need two actions per player, got {:?}",
                self.actions
            )))
        }
    }

    pub fn to_full(&self, reduced: &[f64]) -> Vec<f64> {
        reduced.iter().flat_map(|&p| [p, 1.0 - p]).collect()
    }

    pub fn to_reduced(&self, full: &[f64]) -> Vec<f64> {
        full.chunks(2).map(|c| c[0]).collect()
    }

    /// Expected utility of `player` under the product of the mixed strategies
    /// in full coordinates.
    pub fn expected_utility(&self, player: usize, full: &[f64]) -> f64 {
        let off = self.block_offsets();
        (0..self.profile_count())
            .map(|k| {
                let p = self.profile(k);
                let prob: f64 = p.iter().enumerate().map(|(j, &a)| full[off[j] + a]).product();
                prob * self.utilities[player][k]
            })
            .sum()
    }

    /// `-grad_{x_i} u_i` stacked over players, in full coordinates.
    pub fn gradient_full(&self, full: &[f64]) -> Vec<f64> {
        let n = self.players();
        let off = self.block_offsets();
        let mut grad = vec![0.0; self.full_dim()];
        for k in 0..self.profile_count() {
            let p = self.profile(k);
            for i in 0..n {
                let others: f64 = (0..n).filter(|&j| j != i).map(|j| full[off[j] + p[j]]).product();
                grad[off[i] + p[i]] -= self.utilities[i][k] * others;
            }
        }
        grad
    }

    /// Gradient field in first-action coordinates: `F_i = F_{i,0} - F_{i,1}`.
    pub fn gradient_reduced(&self, reduced: &[f64]) -> Vec<f64> {
        let g = self.gradient_full(&self.to_full(reduced));
        g.chunks(2).map(|c| c[0] - c[1]).collect()
    }

    /// Largest absolute utility, a bound on every gradient entry.
    pub fn utility_scale(&self) -> f64 {
        self.utilities.iter().flatten().fold(0.0_f64, |acc, v| acc.max(v.abs()))
    }

    /// Point mass on a pure profile, in full coordinates.
    pub fn pure_full(&self, profile: &[usize]) -> Vec<f64> {
        let off = self.block_offsets();
        let mut x = vec![0.0; self.full_dim()];
        for (i, &a) in profile.iter().enumerate() {
            x[off[i] + a] = 1.0;
        }
        x
    }
}
