//! JSON loading for problems, games and distributions, and the bundled
//! fixtures.

use std::path::Path;

use serde::de::DeserializeOwned;
use serde::Serialize;
use serde_json::Value;

use crate::error::{Error, Result};
use crate::evicore::{EVIProblem, FiniteDistribution, GameCoordinates, PhiClass, ProblemFile};
use crate::games::{game_gradient_field, polymatrix_zero_sum, NormalFormGame, PolymatrixSpec};

/// Bundled fixtures by file name.
pub const FIXTURES: &[(&str, &str)] = &[
    ("sign.json", include_str!("../fixtures/sign.json")),
    ("sign-modified.json", include_str!("../fixtures/sign-modified.json")),
    ("bos.json", include_str!("../fixtures/bos.json")),
    ("matching-pennies.json", include_str!("../fixtures/matching-pennies.json")),
    ("polymatrix-cycle.json", include_str!("../fixtures/polymatrix-cycle.json")),
    ("quartic-p1.json", include_str!("../fixtures/quartic-p1.json")),
    ("quartic-p2.json", include_str!("../fixtures/quartic-p2.json")),
    ("quartic-p4.json", include_str!("../fixtures/quartic-p4.json")),
    ("quartic-p8.json", include_str!("../fixtures/quartic-p8.json")),
];

pub fn fixture(name: &str) -> Option<&'static str> {
    FIXTURES.iter().find(|(n, _)| *n == name).map(|(_, text)| *text)
}

pub const SCHEMA_HELP: &str = "\
accepted inputs:
  problem:    {\"polytope\": {\"A\": [[..]], \"b\": [..]}, \"operator\": {\"kind\": ..}, \"phi\": \"con\"|\"lin\"|{\"product\": [..]}, \"epsilon\": e, \"utility\"?: [..]}
  game:       {\"name\"?: s, \"actions\": [n1, ..], \"utilities\": [[..], ..]}   (one flat tensor per player, player 0 most significant)
  polymatrix: {\"name\"?: s, \"actions\": [..], \"edges\": [{\"i\", \"j\", \"a\": [[..]], \"b\": [[..]]}]}   (b = -a' on every edge)
  distribution: {\"support\": [[..], ..], \"weights\": [..]}
operator kinds: affine {M, q} | game_gradient {game, coordinates} | polynomial {components} | sign | table {base, points}";

#[derive(Debug, Clone, PartialEq)]
pub enum Input {
    Problem(EVIProblem),
    Game(NormalFormGame),
}

impl Input {
    /// The problem itself, or the game's gradient field (first-action
    /// coordinates for two-action games) with the given class and epsilon.
    pub fn into_problem(self, phi: Option<PhiClass>, epsilon: Option<f64>) -> Result<EVIProblem> {
        let mut p = match self {
            Input::Problem(p) => p,
            Input::Game(g) => game_problem(&g, phi.clone().unwrap_or(PhiClass::Linear), epsilon.unwrap_or(1e-3))?,
        };
        if let Some(phi) = phi {
            p = p.with_phi(phi)?;
        }
        if let Some(e) = epsilon {
            p = p.with_epsilon(e)?;
        }
        Ok(p)
    }
}

pub fn game_problem(g: &NormalFormGame, phi: PhiClass, epsilon: f64) -> Result<EVIProblem> {
    let coords = if g.is_binary() { GameCoordinates::Reduced } else { GameCoordinates::Full };
    let (x, op) = game_gradient_field(g, coords)?;
    EVIProblem::new(x, op, phi, epsilon)
}

fn parse_value<T: DeserializeOwned>(v: Value, what: &str) -> Result<T> {
    serde_json::from_value(v).map_err(|e| Error::ParseError(format!("{what}: {e}")))
}

fn check_rows(rows: &[Vec<f64>], what: &str) -> Result<()> {
    let d = rows.first().map_or(0, Vec::len);
    for (i, r) in rows.iter().enumerate() {
        if r.len() != d {
            return Err(Error::ParseError(format!("{what} row {i} has {} entries, expected {d}", r.len())));
        }
    }
    Ok(())
}

pub fn parse_input(text: &str) -> Result<Input> {
    let v: Value = serde_json::from_str(text).map_err(|e| Error::ParseError(e.to_string()))?;
    let obj = v.as_object().ok_or_else(|| Error::ParseError(format!("expected a JSON object\n{SCHEMA_HELP}")))?;
    if obj.contains_key("polytope") {
        let f: ProblemFile = parse_value(v, "problem")?;
        check_rows(&f.polytope.a, "polytope")?;
        Ok(Input::Problem(EVIProblem::try_from(f)?))
    } else if obj.contains_key("edges") {
        let spec: PolymatrixSpec = parse_value(v, "polymatrix game")?;
        Ok(Input::Game(polymatrix_zero_sum(&spec)?.0))
    } else if obj.contains_key("utilities") {
        Ok(Input::Game(parse_value(v, "game")?))
    } else {
        Err(Error::ParseError(format!("unrecognized input\n{SCHEMA_HELP}")))
    }
}

fn read(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|e| Error::ParseError(format!("{}: {e}", path.display())))
}

/// Loads a file, falling back to the bundled fixture of the same name.
pub fn load_input(path: &Path) -> Result<Input> {
    match read(path) {
        Ok(text) => parse_input(&text),
        Err(e) => match path.file_name().and_then(|n| n.to_str()).and_then(fixture) {
            Some(text) if !path.exists() => parse_input(text),
            _ => Err(e),
        },
    }
}

pub fn load_problem(path: &Path) -> Result<EVIProblem> {
    load_input(path)?.into_problem(None, None)
}

pub fn parse_distribution(text: &str) -> Result<FiniteDistribution> {
    let v: Value = serde_json::from_str(text).map_err(|e| Error::ParseError(e.to_string()))?;
    parse_value(v, "distribution")
}

pub fn load_distribution(path: &Path) -> Result<FiniteDistribution> {
    parse_distribution(&read(path)?)
}

/// Pretty JSON with a trailing newline.
pub fn to_json<T: Serialize>(value: &T) -> Result<String> {
    let mut s = serde_json::to_string_pretty(value).map_err(|e| Error::ParseError(e.to_string()))?;
    s.push('\n');
    Ok(s)
}
