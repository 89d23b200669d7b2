//! Instance generators, brute-force oracles and invariant checks shared by
//! the property suites and the acceptance runner. Every check takes a seed
//! and returns a description of the first failure.

#![allow(dead_code)]

use evikit::analysis::{check_quasar, check_smoothness, QuasarParams, SmoothnessParams};
use evikit::endomap::{endo_membership, fixed_point, AffineEndo, EndoMembership};
use evikit::evicore::{
    evi_gap_constants, evi_gap_linear, EVIProblem, FiniteDistribution, Operator, OperatorKind, PhiClass,
};
use evikit::games::{phi_gap, GapMode, NormalFormGame};
use evikit::linsolve::{project_polytope, solve_lp, Bound, Direction, LinearProgram, LpStatus, Sense};
use evikit::polytope::{vi_gap, Polytope};
use evikit::solvers::{central_cut_log_det_drop, run_linear_swap_pgd, solve_eah, EahConfig, Ellipsoid, PgdConfig};
use evikit::ToleranceConfig;
use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub type Check = Result<(), String>;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn tol() -> ToleranceConfig {
    ToleranceConfig::default()
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Check {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn unit_vector(rng: &mut ChaCha8Rng, d: usize) -> Vec<f64> {
    loop {
        let v: Vec<f64> = (0..d).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let n = dot(&v, &v).sqrt();
        if n > 0.1 {
            return v.iter().map(|x| x / n).collect();
        }
    }
}

/// A bounded polytope with unit-norm rows and at most `max_rows` facets,
/// containing the unit ball around `shift` (the origin when `shift` is off).
pub fn random_polytope(rng: &mut ChaCha8Rng, d: usize, max_rows: usize, shift: bool) -> Polytope {
    loop {
        let m = rng.gen_range(d + 1..=max_rows);
        let t: Vec<f64> = if shift { (0..d).map(|_| rng.gen_range(-1.0..1.0)).collect() } else { vec![0.0; d] };
        let mut rows = Vec::with_capacity(m);
        let mut b = Vec::with_capacity(m);
        for _ in 0..m {
            let a = unit_vector(rng, d);
            b.push(rng.gen_range(1.0..2.0) + dot(&a, &t));
            rows.push(a);
        }
        if let Ok(p) = Polytope::new(&rows, &b, "random") {
            if p.outer_radius() <= 20.0 {
                return p;
            }
        }
    }
}

pub fn random_endo(rng: &mut ChaCha8Rng, d: usize) -> AffineEndo {
    let s = [0.2, 0.5, 1.0, 1.5][rng.gen_range(0..4)];
    let k: Vec<f64> = (0..d * d).map(|_| s * rng.gen_range(-1.0..1.0)).collect();
    let c: Vec<f64> = (0..d).map(|_| s * rng.gen_range(-1.0..1.0)).collect();
    AffineEndo::new(d, k, c).unwrap()
}

/// Vertices from every `d`-subset of rows, kept when feasible.
pub fn brute_vertices(x: &Polytope) -> Vec<Vec<f64>> {
    let d = x.dim();
    let m = x.rows();
    let mut out: Vec<Vec<f64>> = Vec::new();
    let mut idx: Vec<usize> = (0..d).collect();
    loop {
        let a = DMatrix::from_fn(d, d, |r, c| x.row(idx[r])[c]);
        let b = DVector::from_iterator(d, idx.iter().map(|&i| x.rhs()[i]));
        if a.determinant().abs() > 1e-10 {
            if let Some(v) = a.lu().solve(&b) {
                let v: Vec<f64> = v.iter().copied().collect();
                if (0..m).all(|i| x.slack(i, &v) >= -1e-9)
                    && !out.iter().any(|w| w.iter().zip(&v).all(|(p, q)| (p - q).abs() < 1e-7))
                {
                    out.push(v);
                }
            }
        }
        // Next combination.
        let mut k = d;
        while k > 0 && idx[k - 1] == m - d + k - 1 {
            k -= 1;
        }
        if k == 0 {
            break;
        }
        idx[k - 1] += 1;
        for j in k..d {
            idx[j] = idx[j - 1] + 1;
        }
    }
    out
}

/// Largest violation of `X` over the images of the vertices.
pub fn vertex_image_violation(x: &Polytope, verts: &[Vec<f64>], phi: &AffineEndo) -> f64 {
    verts
        .iter()
        .map(|v| {
            let y = phi.apply(v);
            (0..x.rows()).map(|i| -x.slack(i, &y)).fold(f64::NEG_INFINITY, f64::max)
        })
        .fold(f64::NEG_INFINITY, f64::max)
}

/// Membership oracle against the vertex-image brute force on one instance;
/// returns whether the map was a member.
pub fn membership_agrees(x: &Polytope, verts: &[Vec<f64>], phi: &AffineEndo) -> Result<bool, String> {
    let t = tol();
    let brute = vertex_image_violation(x, verts, phi) <= 1e-9 * (1.0 + x.outer_radius());
    let oracle = endo_membership(x, phi, &t).map_err(|e| e.to_string())?;
    if oracle.is_member() != brute {
        return Err(format!(
            "membership disagrees (oracle {}, brute {brute}, violation {:e}) for {phi:?}",
            oracle.is_member(),
            vertex_image_violation(x, verts, phi)
        ));
    }
    if oracle.is_member() {
        let xf = fixed_point(x, phi, &t).map_err(|e| e.to_string())?;
        let r = phi.fixed_point_residual(&xf);
        ensure(r <= 1e-7, || format!("fixed-point residual {r:e}"))?;
        ensure(x.contains(&xf, 1e-9 * (1.0 + x.outer_radius())), || "fixed point outside X".into())?;
    }
    Ok(oracle.is_member())
}

pub fn affine_operator(rng: &mut ChaCha8Rng, x: &Polytope, scale: f64) -> Operator {
    let d = x.dim();
    let m: Vec<Vec<f64>> = (0..d).map(|_| (0..d).map(|_| scale * rng.gen_range(-1.0..1.0)).collect()).collect();
    let q: Vec<f64> = (0..d).map(|_| scale * rng.gen_range(-1.0..1.0)).collect();
    Operator::new(OperatorKind::Affine { m, q }, x).unwrap()
}

pub fn random_distribution(rng: &mut ChaCha8Rng, x: &Polytope, max_support: usize) -> FiniteDistribution {
    let k = rng.gen_range(1..=max_support);
    let pts = x.sample(rng, k, &tol()).unwrap();
    let w: Vec<f64> = (0..k).map(|_| rng.gen_range(0.05..1.0)).collect();
    FiniteDistribution::normalized(pts, w).unwrap()
}

pub fn random_problem(rng: &mut ChaCha8Rng, d: usize) -> EVIProblem {
    let x = random_polytope(rng, d, 6, true);
    let op = affine_operator(rng, &x, 1.0);
    EVIProblem::new(x, op, PhiClass::Linear, 0.05).unwrap()
}

// ---- linsolve ----

fn random_bounded_lp(rng: &mut ChaCha8Rng) -> LinearProgram {
    let n = rng.gen_range(2..=6);
    let m = rng.gen_range(1..=6);
    let x0: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
    let dir = if rng.gen_bool(0.5) { Direction::Minimize } else { Direction::Maximize };
    let mut lp = LinearProgram::new(dir, (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect());
    for _ in 0..m {
        let a: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
        if rng.gen_bool(0.3) {
            let v = dot(&a, &x0);
            lp.add_row(&a, Sense::Eq, v);
        } else {
            let v = dot(&a, &x0) + rng.gen_range(0.0..1.0);
            lp.add_row(&a, Sense::Le, v);
        }
    }
    for j in 0..n {
        let lo = x0[j] - rng.gen_range(0.0..2.0);
        let hi = x0[j] + rng.gen_range(0.0..2.0);
        lp.set_bound(j, Bound::new(lo, hi));
    }
    lp
}

pub fn check_lp_duality(seed: u64) -> Check {
    let mut r = rng(seed);
    let lp = random_bounded_lp(&mut r);
    let out = solve_lp(&lp, &tol()).map_err(|e| e.to_string())?;
    ensure(out.status == LpStatus::Optimal, || format!("bounded feasible LP reported {:?}", out.status))?;
    let g = (out.objective - out.dual_objective).abs();
    ensure(g <= 1e-8 * (1.0 + out.objective.abs()), || format!("duality gap {g:e}"))?;
    ensure(out.primal_residual <= 1e-9, || format!("primal residual {:e}", out.primal_residual))
}

pub fn check_farkas(seed: u64) -> Check {
    let mut r = rng(seed);
    let mut lp = random_bounded_lp(&mut r);
    lp.direction = Direction::Minimize;
    // Add a row contradicting a nonnegative combination of two others.
    let n = lp.vars();
    let a: Vec<f64> = (0..n).map(|_| r.gen_range(-1.0..1.0)).collect();
    let b = r.gen_range(-1.0..1.0);
    lp.add_row(&a, Sense::Le, b);
    let neg: Vec<f64> = a.iter().map(|v| -v).collect();
    lp.add_row(&neg, Sense::Le, -b - r.gen_range(0.1..1.0));
    let out = solve_lp(&lp, &tol()).map_err(|e| e.to_string())?;
    ensure(out.status == LpStatus::Infeasible, || format!("contradictory LP reported {:?}", out.status))?;
    let f = out.farkas.ok_or("missing certificate")?;
    let (resid, rhs) = f.check(&lp);
    ensure(resid <= 1e-9 && rhs < 0.0, || format!("certificate combination residual {resid:e}, rhs {rhs:e}"))?;
    for (i, s) in lp.senses.iter().enumerate() {
        if *s == Sense::Le {
            ensure(f.rows[i] >= 0.0, || format!("negative multiplier on <= row {i}"))?;
        }
    }
    Ok(())
}

pub fn check_lp_determinism(seed: u64) -> Check {
    let mut r = rng(seed);
    let lp = random_bounded_lp(&mut r);
    let a = solve_lp(&lp, &tol()).map_err(|e| e.to_string())?;
    let b = solve_lp(&lp, &tol()).map_err(|e| e.to_string())?;
    ensure(format!("{a:?}") == format!("{b:?}"), || "two solves differ".into())
}

pub fn check_projection(seed: u64) -> Check {
    let mut r = rng(seed);
    let d = r.gen_range(2..=3);
    let x = random_polytope(&mut r, d, 8, true);
    let p: Vec<f64> = (0..d).map(|_| r.gen_range(-4.0..4.0)).collect();
    let proj = project_polytope(&p, x.matrix(), x.rhs(), &tol()).map_err(|e| e.to_string())?;
    ensure(proj.kkt_residual <= 1e-7, || format!("KKT residual {:e}", proj.kkt_residual))?;
    ensure(proj.multipliers.iter().all(|m| *m >= 0.0), || "negative multiplier".into())?;
    let dist = |z: &[f64]| z.iter().zip(&p).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt();
    let best = dist(&proj.point);
    for v in brute_vertices(&x) {
        ensure(best <= dist(&v) + 1e-9, || format!("vertex {v:?} is closer than the projection"))?;
    }
    Ok(())
}

// ---- polytope ----

pub fn check_vi_gap_nonnegative(seed: u64) -> Check {
    let mut r = rng(seed);
    let d = r.gen_range(1..=3);
    let x = random_polytope(&mut r, d, 8, true);
    let f = affine_operator(&mut r, &x, 2.0);
    for pt in x.sample(&mut r, 5, &tol()).map_err(|e| e.to_string())? {
        let g = vi_gap(&x, &f, &pt, &tol()).map_err(|e| e.to_string())?;
        ensure(g >= -1e-9, || format!("vi_gap {g:e} at {pt:?}"))?;
    }
    Ok(())
}

pub fn check_separator(seed: u64) -> Check {
    let mut r = rng(seed);
    let d = r.gen_range(2..=3);
    let x = random_polytope(&mut r, d, 8, true);
    let dir = unit_vector(&mut r, d);
    let pt: Vec<f64> = x.center().iter().zip(&dir).map(|(c, u)| c + (x.outer_radius() + 1.0) * 2.0 * u).collect();
    let m = x.membership(&pt, 1e-9).map_err(|e| e.to_string())?;
    ensure(!m.inside, || "far point reported inside".into())?;
    let i = m.separator.ok_or("no separator")?;
    let h = x.row(i);
    let (_, top) = x.maximize(h, &tol()).map_err(|e| e.to_string())?;
    ensure(dot(h, &pt) > top - 1e-9, || format!("row {i} does not separate"))
}

pub fn check_vertices(seed: u64) -> Check {
    let mut r = rng(seed);
    let x = random_polytope(&mut r, 2, 8, true);
    let listed = x.enumerate_vertices().map_err(|e| e.to_string())?.vertices;
    let brute = brute_vertices(&x);
    ensure(listed.len() == brute.len(), || format!("{} vertices listed, {} by brute force", listed.len(), brute.len()))?;
    for v in &brute {
        ensure(listed.iter().any(|w| w.iter().zip(v).all(|(a, b)| (a - b).abs() < 1e-7)), || format!("missing {v:?}"))?;
    }
    Ok(())
}

// ---- endomap ----

pub fn check_oracle_equivalence(seed: u64) -> Check {
    let mut r = rng(seed);
    let d = r.gen_range(2..=3);
    let shift = r.gen_bool(0.5);
    let x = random_polytope(&mut r, d, 8, shift);
    let verts = brute_vertices(&x);
    for _ in 0..5 {
        membership_agrees(&x, &verts, &random_endo(&mut r, d))?;
    }
    Ok(())
}

pub fn check_separation_soundness(seed: u64) -> Check {
    let mut r = rng(seed);
    let d = r.gen_range(2..=3);
    let x = random_polytope(&mut r, d, 8, true);
    let t = tol();
    let mut pool = vec![AffineEndo::identity(d), AffineEndo::constant(x.center())];
    pool.extend(brute_vertices(&x).iter().map(|v| AffineEndo::constant(v)));
    let mut cut = None;
    for _ in 0..50 {
        let phi = random_endo(&mut r, d);
        match endo_membership(&x, &phi, &t).map_err(|e| e.to_string())? {
            EndoMembership::Member(_) => pool.push(phi),
            EndoMembership::NonMember(s) => {
                if cut.is_none() {
                    cut = Some((phi, s));
                }
            }
        }
        if cut.is_some() && pool.len() > d + 4 {
            break;
        }
    }
    let Some((phi, s)) = cut else { return Ok(()) };
    let at_query = s.eval(&phi);
    for _ in 0..100 {
        // Convex combinations of members are members.
        let w: Vec<f64> = pool.iter().map(|_| -r.gen_range(1e-9_f64..1.0).ln()).collect();
        let tw: f64 = w.iter().sum();
        let mut y = vec![0.0; d * d + d];
        for (wk, m) in w.iter().zip(&pool) {
            for (a, b) in y.iter_mut().zip(m.to_vec()) {
                *a += wk / tw * b;
            }
        }
        let member = AffineEndo::from_vec(d, &y).unwrap();
        let v = s.eval(&member);
        ensure(v < at_query, || format!("member scores {v} >= query {at_query}"))?;
        ensure(v <= s.rhs + 1e-9, || format!("member violates the cut: {v} > {}", s.rhs))?;
    }
    Ok(())
}

pub fn check_member_norm_bound(seed: u64) -> Check {
    let mut r = rng(seed);
    let d = r.gen_range(2..=3);
    let x = random_polytope(&mut r, d, 8, false);
    for _ in 0..5 {
        let phi = random_endo(&mut r, d);
        if endo_membership(&x, &phi, &tol()).map_err(|e| e.to_string())?.is_member() {
            let k = DMatrix::from_row_slice(d, d, phi.k());
            let norm = k.singular_values().max();
            ensure(norm <= 2.0 * x.outer_radius() + 1e-9, || format!("|K|_2 = {norm} above 2R"))?;
        }
    }
    Ok(())
}

// ---- evicore ----

pub fn check_class_monotonicity(seed: u64) -> Check {
    let mut r = rng(seed);
    let d = r.gen_range(1..=3);
    let p = random_problem(&mut r, d);
    let mu = random_distribution(&mut r, &p.polytope, 5);
    let c = evi_gap_constants(&p, &mu, &tol()).map_err(|e| e.to_string())?.raw;
    let l = evi_gap_linear(&p, &mu, &tol()).map_err(|e| e.to_string())?.raw;
    ensure(l >= c - 1e-9, || format!("linear gap {l} below constants gap {c}"))
}

pub fn check_zero_gap_at_vi_solution(seed: u64) -> Check {
    let mut r = rng(seed);
    let d = r.gen_range(1..=3);
    let x = random_polytope(&mut r, d, 6, true);
    let star = x.sample(&mut r, 1, &tol()).unwrap().remove(0);
    let m: Vec<Vec<f64>> = (0..d).map(|_| (0..d).map(|_| r.gen_range(-1.0..1.0)).collect()).collect();
    let q: Vec<f64> = m.iter().map(|row| -dot(row, &star)).collect();
    let op = Operator::new(OperatorKind::Affine { m, q }, &x).unwrap();
    let p = EVIProblem::new(x, op, PhiClass::Linear, 0.1).unwrap();
    let vg = vi_gap(&p.polytope, &p.operator, &star, &tol()).map_err(|e| e.to_string())?;
    if vg > 1e-9 {
        return Err(format!("constructed solution has vi_gap {vg:e}"));
    }
    let mu = FiniteDistribution::point_mass(star);
    let c = evi_gap_constants(&p, &mu, &tol()).map_err(|e| e.to_string())?.raw;
    let l = evi_gap_linear(&p, &mu, &tol()).map_err(|e| e.to_string())?.raw;
    ensure(c <= 1e-9 && l <= 1e-9, || format!("point mass at a VI solution has gaps {c:e}, {l:e}"))
}

pub fn check_mixture_convexity(seed: u64) -> Check {
    let mut r = rng(seed);
    let d = r.gen_range(1..=3);
    let p = random_problem(&mut r, d);
    let m1 = random_distribution(&mut r, &p.polytope, 4);
    let m2 = random_distribution(&mut r, &p.polytope, 4);
    let alpha = r.gen_range(0.0..1.0);
    let mix = m1.mixture(&m2, alpha).map_err(|e| e.to_string())?;
    let t = tol();
    for linear in [false, true] {
        let g = |mu: &FiniteDistribution| -> Result<f64, String> {
            if linear {
                Ok(evi_gap_linear(&p, mu, &t).map_err(|e| e.to_string())?.raw)
            } else {
                Ok(evi_gap_constants(&p, mu, &t).map_err(|e| e.to_string())?.raw)
            }
        };
        let (g1, g2, gm) = (g(&m1)?, g(&m2)?, g(&mix)?);
        ensure(gm <= alpha * g1 + (1.0 - alpha) * g2 + 1e-9, || format!("mixture gap {gm} above {g1}, {g2} at {alpha}"))?;
    }
    Ok(())
}

pub fn check_pointwise_domination(seed: u64) -> Check {
    let mut r = rng(seed);
    let d = r.gen_range(1..=3);
    let p = random_problem(&mut r, d);
    let mu = random_distribution(&mut r, &p.polytope, 5);
    let t = tol();
    let l = evi_gap_linear(&p, &mu, &t).map_err(|e| e.to_string())?.raw;
    let mut bound = 0.0;
    for (x, w) in mu.iter() {
        bound += w * vi_gap(&p.polytope, &p.operator, x, &t).map_err(|e| e.to_string())?;
    }
    ensure(l <= bound + 1e-9, || format!("linear gap {l} above expected VI gap {bound}"))
}

// ---- solvers ----

pub fn check_ellipsoid_monotone(seed: u64) -> Check {
    let mut r = rng(seed);
    let n = r.gen_range(2..=8);
    let mut e = Ellipsoid::ball(vec![0.0; n], r.gen_range(0.5..5.0)).unwrap();
    let drop = central_cut_log_det_drop(n);
    ensure(drop >= 1.0 / (2.0 * (n as f64 + 1.0)), || format!("central drop {drop} below 1/(2(n+1))"))?;
    for _ in 0..20 {
        let a: Vec<f64> = (0..n).map(|_| r.gen_range(-1.0..1.0)).collect();
        let center: Vec<f64> = e.center.iter().copied().collect();
        let before = e.log_det;
        e.cut(&a, dot(&a, &center)).map_err(|e| e.to_string())?;
        let d = before - e.log_det;
        ensure(d >= 1.0 / (2.0 * (n as f64 + 1.0)) - 1e-9, || format!("log det dropped by {d}"))?;
        let sym = (&e.shape - e.shape.transpose()).amax();
        ensure(sym == 0.0 && e.is_positive_definite(), || "shape lost symmetry or definiteness".into())?;
    }
    Ok(())
}

pub fn check_eah_output(seed: u64) -> Check {
    let mut r = rng(seed);
    let p = random_problem(&mut r, 2);
    let (rep, state) = solve_eah(&p, &EahConfig::default()).map_err(|e| e.to_string())?;
    let t = tol();
    let verified = evi_gap_linear(&p, &rep.solution, &t).map_err(|e| e.to_string())?.raw;
    ensure(verified <= p.epsilon, || format!("re-verified gap {verified} above {}", p.epsilon))?;
    ensure(rep.support_size <= rep.ger_iterations && rep.ger_iterations <= rep.iterations, || {
        format!("support {} ger {} iterations {}", rep.support_size, rep.ger_iterations, rep.iterations)
    })?;
    let s: f64 = rep.lambda.iter().sum();
    ensure((s - 1.0).abs() <= 1e-12 && rep.lambda.iter().all(|v| *v >= 0.0), || "lambda off the simplex".into())?;
    ensure(state.ellipsoid.is_positive_definite() || rep.termination != "volume", || "shape not PD".into())?;
    for pt in rep.solution.support() {
        ensure(p.polytope.contains(pt, 1e-7), || format!("support point {pt:?} outside X"))?;
    }
    Ok(())
}

pub fn check_pgd_self_payoff(seed: u64) -> Check {
    let mut r = rng(seed);
    let p = random_problem(&mut r, 2);
    let rounds = 30;
    let (rep, trace) = run_linear_swap_pgd(&p, rounds, &PgdConfig::default()).map_err(|e| e.to_string())?;
    let sp = rep.self_payoff.unwrap();
    ensure(sp.abs() <= rounds as f64 * 2.0 * 1e-7 * (1.0 + p.operator.bound()), || format!("self payoff {sp:e}"))?;
    let avg = rep.average_regret.unwrap();
    ensure((avg - rep.gap_linear_raw).abs() <= 1e-9, || format!("average regret {avg} vs gap {}", rep.gap_linear_raw))?;
    let last = trace.rows.last().and_then(|row| row.running_gap).ok_or("no final checkpoint")?;
    ensure((last - avg).abs() <= 1e-9, || format!("trace ends at {last}, report says {avg}"))
}

// ---- games ----

pub fn random_game(rng: &mut ChaCha8Rng) -> NormalFormGame {
    let players = rng.gen_range(2..=3);
    let actions: Vec<usize> = if players == 2 { (0..2).map(|_| rng.gen_range(2..=3)).collect() } else { vec![2; 3] };
    let profiles: usize = actions.iter().product();
    let u: Vec<Vec<f64>> = (0..players).map(|_| (0..profiles).map(|_| rng.gen_range(-1.0..1.0)).collect()).collect();
    NormalFormGame::new("random", actions, u).unwrap()
}

pub fn random_mixed_profile(rng: &mut ChaCha8Rng, g: &NormalFormGame) -> Vec<f64> {
    let mut x = Vec::with_capacity(g.full_dim());
    for &a in g.actions() {
        let w: Vec<f64> = (0..a).map(|_| -rng.gen_range(1e-9_f64..1.0).ln()).collect();
        let s: f64 = w.iter().sum();
        x.extend(w.iter().map(|v| v / s));
    }
    x
}

pub fn check_gap_ordering(seed: u64) -> Check {
    let mut r = rng(seed);
    let g = random_game(&mut r);
    let k = r.gen_range(1..=4);
    let pts: Vec<Vec<f64>> = (0..k).map(|_| random_mixed_profile(&mut r, &g)).collect();
    let mu = FiniteDistribution::normalized(pts, (0..k).map(|_| r.gen_range(0.1..1.0)).collect()).unwrap();
    let t = tol();
    let cce = phi_gap(&g, &mu, GapMode::Cce, &t).map_err(|e| e.to_string())?;
    let lce = phi_gap(&g, &mu, GapMode::Lce, &t).map_err(|e| e.to_string())?;
    let alce = phi_gap(&g, &mu, GapMode::Alce, &t).map_err(|e| e.to_string())?;
    for i in 0..g.players() {
        ensure(cce.raw[i] <= lce.raw[i] + 1e-9, || format!("player {i}: CCE {} above LCE {}", cce.raw[i], lce.raw[i]))?;
    }
    let lce_sum: f64 = lce.gap.iter().sum();
    ensure(lce_sum <= alce.raw[0] + 1e-9, || format!("LCE total {lce_sum} above ALCE {}", alce.raw[0]))?;
    let full = g.full_polytope().unwrap();
    let member = endo_membership(&full, &alce.witnesses[0], &t).map_err(|e| e.to_string())?;
    ensure(member.is_member(), || "ALCE witness outside the endomorphism polytope".into())
}

pub fn check_pure_nash_zero_gaps(seed: u64) -> Check {
    let mut r = rng(seed);
    let g = random_game(&mut r);
    let t = tol();
    for k in 0..g.profile_count() {
        let prof = g.profile(k);
        let nash = (0..g.players()).all(|i| {
            (0..g.actions()[i]).all(|b| {
                let mut q = prof.clone();
                q[i] = b;
                g.utility(i, &q) <= g.utility(i, &prof)
            })
        });
        if !nash {
            continue;
        }
        let mu = FiniteDistribution::point_mass(g.pure_full(&prof));
        for mode in [GapMode::Cce, GapMode::Lce, GapMode::Alce] {
            let pg = phi_gap(&g, &mu, mode, &t).map_err(|e| e.to_string())?;
            ensure(pg.raw.iter().all(|v| *v <= 1e-9), || format!("{mode:?} gap {:?} at pure Nash {prof:?}", pg.raw))?;
        }
    }
    Ok(())
}

// ---- analysis ----

/// Random cubic-plus-quadratic utility on a box, maximized over a grid.
pub fn check_quasar_implies_smooth(seed: u64) -> Check {
    let mut r = rng(seed);
    let (a, b, c) = (r.gen_range(-1.0..1.0), r.gen_range(-2.0..0.5), r.gen_range(-1.0..1.0));
    let u = move |x: &[f64]| a * x[0].powi(3) + b * x[0].powi(2) + c * x[0];
    let du = move |x: &[f64]| vec![3.0 * a * x[0].powi(2) + 2.0 * b * x[0] + c];
    let f = move |x: &[f64]| du(x).iter().map(|v| -v).collect::<Vec<f64>>();
    let grid: Vec<Vec<f64>> = (0..=200).map(|k| vec![-1.0 + k as f64 / 100.0]).collect();
    let star = grid.iter().cloned().fold(grid[0].clone(), |best, x| if u(&x) > u(&best) { x } else { best });
    let gamma = r.gen_range(0.05..=1.0);
    let q = check_quasar(&u, &du, &QuasarParams::new(gamma, star.clone()).unwrap(), &grid);
    if q.passed() {
        let sp = SmoothnessParams::new(gamma, gamma - 1.0, star).unwrap();
        let s = check_smoothness(&f, &u, &sp, &grid);
        ensure(s.passed(), || format!("quasar({gamma}) passed but smoothness failed: {:?}", s.violation))?;
    }
    Ok(())
}

/// Concave quadratic utility: every distribution with constants gap `e`
/// has expected utility at least `u(x*) - e`.
pub fn check_quasar_collapse(seed: u64) -> Check {
    let mut r = rng(seed);
    let d = r.gen_range(1..=2);
    let x = Polytope::cube(d, -1.0, 1.0).unwrap();
    let a: Vec<f64> = (0..d).map(|_| r.gen_range(-0.9..0.9)).collect();
    let w: Vec<f64> = (0..d).map(|_| r.gen_range(0.2..2.0)).collect();
    // u = -sum w_j (x_j - a_j)^2, F = -grad u = 2 w (x - a).
    let m: Vec<Vec<f64>> = (0..d).map(|i| (0..d).map(|j| if i == j { 2.0 * w[i] } else { 0.0 }).collect()).collect();
    let q: Vec<f64> = (0..d).map(|i| -2.0 * w[i] * a[i]).collect();
    let op = Operator::new(OperatorKind::Affine { m, q }, &x).unwrap();
    let p = EVIProblem::new(x, op, PhiClass::Constants, 0.1).unwrap();
    let mu = random_distribution(&mut r, &p.polytope, 4);
    let e = evi_gap_constants(&p, &mu, &tol()).map_err(|e| e.to_string())?.raw.max(0.0);
    let u = |x: &[f64]| -(0..d).map(|j| w[j] * (x[j] - a[j]).powi(2)).sum::<f64>();
    let eu: f64 = mu.iter().map(|(x, p)| p * u(x)).sum();
    ensure(eu >= u(&a) - e - 1e-9, || format!("E u = {eu} below u* - e = {}", u(&a) - e))
}

pub type NamedCheck = (&'static str, fn(u64) -> Check);

pub const PROPERTY_CHECKS: &[NamedCheck] = &[
    ("lp strong duality", check_lp_duality),
    ("farkas soundness", check_farkas),
    ("lp determinism", check_lp_determinism),
    ("projection kkt", check_projection),
    ("vi gap nonnegative", check_vi_gap_nonnegative),
    ("separator validity", check_separator),
    ("vertex enumeration", check_vertices),
    ("endo oracle equivalence", check_oracle_equivalence),
    ("separation soundness", check_separation_soundness),
    ("member norm bound", check_member_norm_bound),
    ("class monotonicity", check_class_monotonicity),
    ("zero gap at vi solutions", check_zero_gap_at_vi_solution),
    ("mixture convexity", check_mixture_convexity),
    ("pointwise domination", check_pointwise_domination),
    ("ellipsoid monotonicity", check_ellipsoid_monotone),
    ("eah output", check_eah_output),
    ("pgd self payoff", check_pgd_self_payoff),
    ("game gap ordering", check_gap_ordering),
    ("pure nash zero gaps", check_pure_nash_zero_gaps),
    ("quasar implies smoothness", check_quasar_implies_smooth),
    ("quasar collapse", check_quasar_collapse),
];
