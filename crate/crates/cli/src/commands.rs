use std::fs;
use std::path::Path;
use std::time::Instant;

use evikit::analysis::{
    check_quasar, check_smoothness, grid_1d, mean_collapse, polynomial_gradient, quartic_problem,
    quasar_collapse_bound, utility_fn, welfare_bound, QuasarParams, SampleCheck, SmoothnessParams, WelfareBound,
};
use evikit::evicore::{
    evi_gap_constants, evi_gap_linear, evi_gap_product, EVIProblem, FiniteDistribution, PhiClass,
};
use evikit::games::{
    matching_pennies_spec, phi_gap, polymatrix_zero_sum, reduced_to_full, region_scan, GapMode, NormalFormGame,
    RegionConfig, Verdict,
};
use evikit::io::{self, Input};
use evikit::polytope::vi_gap;
use evikit::solvers::{run_linear_swap_pgd, solve_eah, EahConfig, PgdConfig, RegretTrace, SolveReport};
use evikit::{Error, Result, ToleranceConfig};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use serde_json::{json, Value};

use crate::args::{
    AnalyzeArgs, Command, GameArgs, GapArgs, MethodArg, ModeArg, PhiArg, RegionArgs, SolveArgs,
    VerifyArgs,
};
use crate::svg;

/// Slack on `gap <= epsilon` comparisons.
const VERIFY_SLACK: f64 = 1e-9;

pub struct Outcome {
    pub result: Value,
    pub verified: bool,
    pub summary: String,
}

#[derive(Serialize)]
struct Report<'a> {
    tool: &'static str,
    version: &'static str,
    command: &'static str,
    config: Value,
    tolerances: ToleranceConfig,
    seed: u64,
    verified: bool,
    result: &'a Value,
    #[serde(skip_serializing_if = "Option::is_none")]
    wall_time_secs: Option<f64>,
}

fn to_value<T: Serialize>(v: &T) -> Result<Value> {
    serde_json::to_value(v).map_err(|e| Error::ParseError(e.to_string()))
}

fn within(gap: f64, eps: f64) -> bool {
    gap <= eps + VERIFY_SLACK * (1.0 + eps)
}

fn phi_of(arg: Option<PhiArg>) -> Option<PhiClass> {
    arg.map(|a| match a {
        PhiArg::Con => PhiClass::Constants,
        PhiArg::Lin => PhiClass::Linear,
    })
}

fn write_file(dir: &Path, name: &str, contents: &str) -> Result<()> {
    let path = dir.join(name);
    fs::write(&path, contents).map_err(|e| Error::ParseError(format!("cannot write {}: {e}", path.display())))?;
    log::info!("wrote {}", path.display());
    Ok(())
}

fn csv_string<T: Serialize>(rows: &[T]) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for r in rows {
        w.serialize(r).map_err(|e| Error::ParseError(e.to_string()))?;
    }
    let bytes = w.into_inner().map_err(|e| Error::ParseError(e.to_string()))?;
    String::from_utf8(bytes).map_err(|e| Error::ParseError(e.to_string()))
}

/// Runs a parsed command, writes `report.json` and any side files, and
/// returns whether the run verified.
pub fn dispatch(cmd: &Command) -> Result<bool> {
    let tol = ToleranceConfig::from_env();
    let common = cmd.common();
    fs::create_dir_all(&common.out)
        .map_err(|e| Error::ParseError(format!("cannot create {}: {e}", common.out.display())))?;
    let start = Instant::now();
    let (outcome, config) = match cmd {
        Command::Solve(a) => (solve(a, &tol)?, to_value(a)?),
        Command::Verify(a) => (verify(a, &tol)?, to_value(a)?),
        Command::Gap(a) => (gap(a, &tol)?, to_value(a)?),
        Command::Game(a) => (game(a, &tol)?, to_value(a)?),
        Command::Region(a) => (region(a, &tol)?, to_value(a)?),
        Command::Analyze(a) => (analyze(a, &tol)?, to_value(a)?),
        Command::Selftest(a) => (selftest(&tol)?, to_value(a)?),
    };
    let report = Report {
        tool: "evikit",
        version: env!("CARGO_PKG_VERSION"),
        command: cmd.name(),
        config,
        tolerances: tol,
        seed: common.seed,
        verified: outcome.verified,
        result: &outcome.result,
        wall_time_secs: common.timing.then(|| start.elapsed().as_secs_f64()),
    };
    write_file(&common.out, "report.json", &io::to_json(&report)?)?;
    println!("{}: {} ({})", cmd.name(), if outcome.verified { "ok" } else { "FAILED" }, outcome.summary);
    Ok(outcome.verified)
}

fn class_gap(r: &SolveReport, phi: &PhiClass) -> f64 {
    match phi {
        PhiClass::Constants => r.gap_constants,
        PhiClass::Linear => r.gap_linear,
        PhiClass::ProductLinear(_) => r.gap_product.unwrap_or(r.gap_linear),
    }
}

#[derive(Serialize)]
struct TraceCsvRow {
    round: usize,
    payoff: f64,
    running_gap: Option<f64>,
}

fn trace_csv(trace: &RegretTrace) -> Result<String> {
    let rows: Vec<TraceCsvRow> = trace
        .rows
        .iter()
        .map(|r| TraceCsvRow { round: r.round, payoff: r.payoff, running_gap: r.running_gap })
        .collect();
    csv_string(&rows)
}

fn solve(a: &SolveArgs, tol: &ToleranceConfig) -> Result<Outcome> {
    let p = io::load_input(&a.problem)?.into_problem(phi_of(a.phi), a.epsilon)?;
    let report = match a.method {
        MethodArg::Eah => {
            let cfg = EahConfig { tol: *tol, deep_cuts: !a.central_cuts, max_iterations: a.max_iterations };
            solve_eah(&p, &cfg)?.0
        }
        MethodArg::Pgd => {
            if a.rounds == 0 {
                return Err(Error::DomainError("rounds must be positive".into()));
            }
            let cfg = PgdConfig { tol: *tol, step_size: a.step, ..PgdConfig::default() };
            let (report, trace) = run_linear_swap_pgd(&p, a.rounds, &cfg)?;
            write_file(&a.common.out, "trace.csv", &trace_csv(&trace)?)?;
            report
        }
    };
    let g = class_gap(&report, &p.phi);
    let verified = within(g, p.epsilon);
    let summary = format!("gap {g:.3e} vs epsilon {:.3e}, support {}", p.epsilon, report.support_size);
    Ok(Outcome { result: to_value(&report)?, verified, summary })
}

#[derive(Serialize)]
struct GapSummary {
    epsilon: f64,
    phi: PhiClass,
    gap_constants: f64,
    gap_constants_raw: f64,
    gap_linear: f64,
    gap_linear_raw: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    gap_product: Option<f64>,
    /// Gap for the problem's own class.
    gap: f64,
    constant_deviation: Vec<f64>,
    linear_deviation: evikit::endomap::AffineEndo,
}

fn distribution_gaps(p: &EVIProblem, mu: &FiniteDistribution, tol: &ToleranceConfig) -> Result<GapSummary> {
    mu.check_support(&p.polytope, p.domain_tol(tol))?;
    let c = evi_gap_constants(p, mu, tol)?;
    let l = evi_gap_linear(p, mu, tol)?;
    let prod = match &p.phi {
        PhiClass::ProductLinear(sizes) => Some(evi_gap_product(p, sizes, mu, tol)?.gap),
        _ => None,
    };
    let gap = match &p.phi {
        PhiClass::Constants => c.gap,
        PhiClass::Linear => l.gap,
        PhiClass::ProductLinear(_) => prod.unwrap_or(l.gap),
    };
    Ok(GapSummary {
        epsilon: p.epsilon,
        phi: p.phi.clone(),
        gap_constants: c.gap,
        gap_constants_raw: c.raw,
        gap_linear: l.gap,
        gap_linear_raw: l.raw,
        gap_product: prod,
        gap,
        constant_deviation: c.deviation,
        linear_deviation: l.deviation,
    })
}

fn verify(a: &VerifyArgs, tol: &ToleranceConfig) -> Result<Outcome> {
    let p = io::load_input(&a.problem)?.into_problem(phi_of(a.phi), a.epsilon)?;
    let mu = io::load_distribution(&a.distribution)?;
    let s = distribution_gaps(&p, &mu, tol)?;
    let verified = within(s.gap, p.epsilon);
    let summary = format!(
        "constants gap {:.3e}, linear gap {:.3e}, epsilon {:.3e}",
        s.gap_constants, s.gap_linear, p.epsilon
    );
    Ok(Outcome { result: to_value(&s)?, verified, summary })
}

fn gap(a: &GapArgs, tol: &ToleranceConfig) -> Result<Outcome> {
    let p = io::load_problem(&a.problem)?;
    let f = p.evaluate(&a.point, tol)?;
    let g = vi_gap(&p.polytope, &p.operator, &a.point, tol)?;
    let verified = within(g, p.epsilon);
    let result = json!({ "point": a.point, "operator_value": f, "vi_gap": g, "epsilon": p.epsilon });
    Ok(Outcome { result, verified, summary: format!("VI gap {g:.3e} vs epsilon {:.3e}", p.epsilon) })
}

fn load_game(path: &Path) -> Result<NormalFormGame> {
    match io::load_input(path)? {
        Input::Game(g) => Ok(g),
        Input::Problem(_) => Err(Error::ParseError(format!("{} is a problem, not a game", path.display()))),
    }
}

fn game(a: &GameArgs, tol: &ToleranceConfig) -> Result<Outcome> {
    let g = load_game(&a.game)?;
    let mut mu = io::load_distribution(&a.distribution)?;
    if g.is_binary() && mu.dim() == g.players() && g.players() != g.full_dim() {
        mu = reduced_to_full(&g, &mu)?;
    }
    let modes: &[GapMode] = match a.mode {
        ModeArg::Cce => &[GapMode::Cce],
        ModeArg::Lce => &[GapMode::Lce],
        ModeArg::Alce => &[GapMode::Alce],
        ModeArg::All => &[GapMode::Cce, GapMode::Lce, GapMode::Alce],
    };
    let mut gaps = Vec::new();
    let mut verified = true;
    let mut parts = Vec::new();
    for &m in modes {
        let pg = phi_gap(&g, &mu, m, tol)?;
        verified &= within(pg.total(), a.epsilon);
        parts.push(format!("{m:?} {:.3e}", pg.total()).to_lowercase());
        gaps.push(json!({ "mode": m, "total": pg.total(), "detail": pg }));
    }
    let result = json!({ "game": g.name(), "epsilon": a.epsilon, "gaps": gaps });
    Ok(Outcome { result, verified, summary: parts.join(", ") })
}

#[derive(Serialize)]
struct RegionCsvRow {
    i: usize,
    j: usize,
    p: f64,
    q: f64,
    verdict: &'static str,
    value: Option<f64>,
}

fn region(a: &RegionArgs, tol: &ToleranceConfig) -> Result<Outcome> {
    let g = load_game(&a.game)?;
    let cfg =
        RegionConfig { resolution: a.resolution, support_points: a.support_points, eps_region: a.eps_region, tol: *tol };
    let scan = region_scan(&g, &cfg)?;
    let rows: Vec<RegionCsvRow> = scan
        .cells
        .iter()
        .map(|c| RegionCsvRow { i: c.i, j: c.j, p: c.p, q: c.q, verdict: c.verdict.as_str(), value: c.value })
        .collect();
    write_file(&a.common.out, "region.csv", &csv_string(&rows)?)?;
    write_file(&a.common.out, "region.svg", &svg::region_svg(&scan, &g, a.hyperbola))?;
    let count = |v: Verdict| scan.cells.iter().filter(|c| c.verdict == v).count();
    let unknown = count(Verdict::Unknown);
    let result = json!({
        "game": scan.game,
        "size": scan.size,
        "feasible": count(Verdict::Feasible),
        "boundary": count(Verdict::Boundary),
        "infeasible": count(Verdict::Infeasible),
        "unknown": unknown,
        "hyperbola": scan.hyperbola,
    });
    let summary = format!(
        "{} of {} cells feasible, {unknown} unknown",
        count(Verdict::Feasible) + count(Verdict::Boundary),
        scan.cells.len()
    );
    Ok(Outcome { result, verified: unknown == 0, summary })
}

fn sample_points(p: &EVIProblem, a: &AnalyzeArgs, tol: &ToleranceConfig) -> Result<Vec<Vec<f64>>> {
    let mut pts = Vec::new();
    if p.dim() == 1 && a.grid > 0 {
        let (lo, hi) = p.polytope.coordinate_bounds();
        pts = grid_1d(lo[0], hi[0], a.grid);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(a.common.seed);
    pts.extend(p.polytope.sample(&mut rng, a.samples, tol)?);
    if pts.is_empty() {
        return Err(Error::DomainError("no sample points; raise --grid or --samples".into()));
    }
    Ok(pts)
}

#[derive(Serialize)]
struct Analysis {
    samples: usize,
    x_star: Option<Vec<f64>>,
    distribution_source: &'static str,
    constants_gap: f64,
    expected_utility: Option<f64>,
    smoothness: Option<SampleCheck>,
    welfare: Option<WelfareBound>,
    quasar: Option<SampleCheck>,
    quasar_bound: Option<f64>,
    mean_collapse: Value,
}

fn analyze(a: &AnalyzeArgs, tol: &ToleranceConfig) -> Result<Outcome> {
    let p = io::load_input(&a.problem)?.into_problem(None, a.epsilon)?;
    let (mu, source) = match &a.distribution {
        Some(path) => (io::load_distribution(path)?, "file"),
        None => (solve_eah(&p, &EahConfig { tol: *tol, ..EahConfig::default() })?.0.solution, "eah"),
    };
    mu.check_support(&p.polytope, p.domain_tol(tol))?;
    let eps = evi_gap_constants(&p, &mu, tol)?.gap;
    let pts = sample_points(&p, a, tol)?;
    let mut verified = true;
    let mut notes = Vec::new();

    let util = utility_fn(&p);
    let x_star = match (&a.x_star, &util) {
        (Some(x), _) => Some(x.clone()),
        (None, Some(u)) => pts.iter().max_by(|x, y| u(x).total_cmp(&u(y))).cloned(),
        (None, None) => None,
    };
    // Everything the closures below touch must be in the domain of F.
    let mut checked: Vec<&[f64]> = pts.iter().map(Vec::as_slice).collect();
    if let Some(x) = &x_star {
        checked.push(x);
    }
    for x in checked {
        p.evaluate(x, tol)?;
    }
    let f = |x: &[f64]| p.operator.evaluate(x).expect("point checked above");

    let mut out = Analysis {
        samples: pts.len(),
        x_star: x_star.clone(),
        distribution_source: source,
        constants_gap: eps,
        expected_utility: None,
        smoothness: None,
        welfare: None,
        quasar: None,
        quasar_bound: None,
        mean_collapse: Value::Null,
    };
    let wants_structure = a.lambda.is_some() || a.nu.is_some() || a.gamma.is_some();
    if wants_structure && util.is_none() {
        return Err(Error::PreconditionUnverified("smoothness and quasar checks need a problem with a utility".into()));
    }
    if let (Some(u), Some(xs)) = (&util, &x_star) {
        let eu: f64 = mu.iter().map(|(x, w)| w * u(x)).sum();
        out.expected_utility = Some(eu);
        if let (Some(lambda), Some(nu)) = (a.lambda, a.nu) {
            let sp = SmoothnessParams::new(lambda, nu, xs.clone())?;
            let check = check_smoothness(&f, u, &sp, &pts);
            let wb = welfare_bound(&mu, u, &sp, eps);
            verified &= check.passed() && wb.pass;
            notes.push(format!("smoothness {}", if check.passed() { "holds" } else { "fails" }));
            notes.push(format!("welfare {:.4} vs bound {:.4}", wb.expected, wb.bound));
            out.smoothness = Some(check);
            out.welfare = Some(wb);
        } else if a.lambda.is_some() || a.nu.is_some() {
            return Err(Error::DomainError("--lambda and --nu must be given together".into()));
        }
        if let Some(gamma) = a.gamma {
            let qp = QuasarParams::new(gamma, xs.clone())?;
            let terms = p.utility.as_deref().unwrap_or_default();
            let grad = |x: &[f64]| polynomial_gradient(terms, x);
            let check = check_quasar(u, &grad, &qp, &pts);
            let bound = quasar_collapse_bound(u(xs), eps, gamma);
            let ok = check.passed() && eu >= bound - 1e-6;
            verified &= ok;
            notes.push(format!("quasar {}", if ok { "holds" } else { "fails" }));
            out.quasar = Some(check);
            out.quasar_bound = Some(bound);
        }
    }
    out.mean_collapse = match mean_collapse(&p, &mu, tol) {
        Ok(mc) => to_value(&mc)?,
        Err(Error::InvariantViolation(msg)) => {
            verified = false;
            notes.push("mean collapse fails".into());
            json!({ "status": "violated", "reason": msg })
        }
        Err(e) => return Err(e),
    };
    if notes.is_empty() {
        notes.push(format!("constants gap {eps:.3e}"));
    }
    Ok(Outcome { result: to_value(&out)?, verified, summary: notes.join(", ") })
}

fn selftest(tol: &ToleranceConfig) -> Result<Outcome> {
    let mut checks = Vec::new();
    let mut record = |name: &str, pass: bool, detail: String| {
        checks.push(json!({ "check": name, "pass": pass, "detail": detail }));
        pass
    };
    let mut all = true;

    let sign = io::parse_input(io::fixture("sign.json").expect("bundled"))?.into_problem(None, Some(0.01))?;
    let r = solve_eah(&sign, &EahConfig { tol: *tol, ..EahConfig::default() })?.0;
    all &= record("sign_eah", within(r.gap_linear, 0.01), format!("linear gap {:.3e}", r.gap_linear));

    let bos = NormalFormGame::bach_or_stravinsky();
    let bos_p = io::game_problem(&bos, PhiClass::Linear, 1e-3)?;
    let nash = FiniteDistribution::point_mass(vec![0.6, 0.4]);
    let s = distribution_gaps(&bos_p, &nash, tol)?;
    all &= record("bos_mixed_nash", s.gap_linear <= 1e-9, format!("linear gap {:.3e}", s.gap_linear));

    let alce_example = FiniteDistribution::uniform(vec![vec![1.0, 1.0], vec![0.0, 0.0], vec![1.0, 0.0]])?;
    let full = reduced_to_full(&bos, &alce_example)?;
    let lce = phi_gap(&bos, &full, GapMode::Lce, tol)?.total();
    let alce = phi_gap(&bos, &full, GapMode::Alce, tol)?.total();
    all &= record(
        "alce_separates",
        lce <= 1e-9 && alce >= 4.0 / 3.0 - 1e-6,
        format!("lce {lce:.3e}, alce {alce:.6}"),
    );

    let q = quartic_problem(4.0, 1e-3)?;
    let u = utility_fn(&q).expect("quartic carries a utility");
    let f = |x: &[f64]| q.operator.evaluate(x).expect("grid inside domain");
    let sp = SmoothnessParams::new(1.0, 1.0, vec![1.0])?;
    let grid = grid_1d(-1.0, 2.0, 1001);
    all &= record("quartic_smoothness", check_smoothness(&f, &u, &sp, &grid).passed(), "p = 4".into());

    let (mp, _) = polymatrix_zero_sum(&matching_pennies_spec())?;
    let mp_p = io::game_problem(&mp, PhiClass::Linear, 1e-3)?;
    let r = solve_eah(&mp_p, &EahConfig { tol: *tol, ..EahConfig::default() })?.0;
    let mc = mean_collapse(&mp_p, &r.solution, tol)?;
    all &= record("matching_pennies_collapse", within(mc.vi_gap, 1e-3), format!("mean VI gap {:.3e}", mc.vi_gap));

    let passed = checks.iter().filter(|c| c["pass"] == true).count();
    let summary = format!("{passed} of {} checks passed", checks.len());
    Ok(Outcome { result: json!({ "checks": checks }), verified: all, summary })
}
