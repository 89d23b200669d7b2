//! Direct SVG rendering of a marginal region scan.

use std::fmt::Write;

use evikit::games::{MarginalRegionScan, NormalFormGame, Verdict};

const SIZE: f64 = 420.0;
const MARGIN: f64 = 40.0;
const PLOT: f64 = SIZE - 2.0 * MARGIN;

fn sx(p: f64) -> f64 {
    MARGIN + p * PLOT
}

fn sy(q: f64) -> f64 {
    MARGIN + (1.0 - q) * PLOT
}

fn color(v: Verdict) -> &'static str {
    match v {
        Verdict::Feasible => "#6fa8dc",
        Verdict::Boundary => "#1f4e79",
        Verdict::Infeasible => "#f3f3f3",
        Verdict::Unknown => "#e06666",
    }
}

/// Nash equilibria of a two-by-two game in first-action coordinates: the
/// pure ones plus the fully mixed one when it exists.
pub fn nash_points(g: &NormalFormGame) -> Vec<(f64, f64)> {
    let u = |i: usize, a: usize, b: usize| g.utility(i, &[a, b]);
    let mut out = Vec::new();
    for a in 0..2 {
        for b in 0..2 {
            if u(0, a, b) >= u(0, 1 - a, b) && u(1, a, b) >= u(1, a, 1 - b) {
                out.push((if a == 0 { 1.0 } else { 0.0 }, if b == 0 { 1.0 } else { 0.0 }));
            }
        }
    }
    // Player 0 is indifferent at q, player 1 at p.
    let d0 = u(0, 0, 0) - u(0, 0, 1) - u(0, 1, 0) + u(0, 1, 1);
    let d1 = u(1, 0, 0) - u(1, 1, 0) - u(1, 0, 1) + u(1, 1, 1);
    if d0.abs() > 1e-12 && d1.abs() > 1e-12 {
        let q = (u(0, 1, 1) - u(0, 0, 1)) / d0;
        let p = (u(1, 1, 1) - u(1, 1, 0)) / d1;
        if 0.0 < p && p < 1.0 && 0.0 < q && q < 1.0 {
            out.push((p, q));
        }
    }
    out
}

/// Branches of `10x^2 - 25xy + 10y^2 - 6x + 11y = 0` inside the unit square.
fn hyperbola_paths() -> Vec<String> {
    let mut paths = Vec::new();
    for sign in [-1.0, 1.0] {
        let mut current = String::new();
        for k in 0..=400 {
            let x = k as f64 / 400.0;
            let (a, b, c) = (10.0, 11.0 - 25.0 * x, 10.0 * x * x - 6.0 * x);
            let disc = b * b - 4.0 * a * c;
            let y = (-b + sign * disc.max(0.0).sqrt()) / (2.0 * a);
            if disc >= 0.0 && (0.0..=1.0).contains(&y) {
                let cmd = if current.is_empty() { 'M' } else { 'L' };
                let _ = write!(current, "{cmd}{:.2},{:.2} ", sx(x), sy(y));
            } else if !current.is_empty() {
                paths.push(std::mem::take(&mut current));
            }
        }
        if !current.is_empty() {
            paths.push(current);
        }
    }
    paths
}

pub fn region_svg(scan: &MarginalRegionScan, g: &NormalFormGame, hyperbola: bool) -> String {
    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{SIZE}" height="{SIZE}" viewBox="0 0 {SIZE} {SIZE}">"#
    );
    let _ = writeln!(s, r#"<rect width="{SIZE}" height="{SIZE}" fill="white"/>"#);
    let w = scan.resolution * PLOT;
    for c in &scan.cells {
        let x = (sx(c.p) - w / 2.0).max(MARGIN);
        let y = (sy(c.q) - w / 2.0).max(MARGIN);
        let x1 = (sx(c.p) + w / 2.0).min(MARGIN + PLOT);
        let y1 = (sy(c.q) + w / 2.0).min(MARGIN + PLOT);
        let _ = writeln!(
            s,
            r#"<rect x="{x:.2}" y="{y:.2}" width="{:.2}" height="{:.2}" fill="{}"/>"#,
            x1 - x,
            y1 - y,
            color(c.verdict)
        );
    }
    let _ = writeln!(
        s,
        r#"<rect x="{MARGIN}" y="{MARGIN}" width="{PLOT}" height="{PLOT}" fill="none" stroke="black"/>"#
    );
    if hyperbola {
        for d in hyperbola_paths() {
            let _ = writeln!(s, r##"<path d="{}" fill="none" stroke="#cc0000" stroke-width="1.5"/>"##, d.trim_end());
        }
    }
    if g.actions() == [2, 2] {
        for (p, q) in nash_points(g) {
            let _ = writeln!(
                s,
                r#"<circle cx="{:.2}" cy="{:.2}" r="4" fill="black" stroke="white"/>"#,
                sx(p),
                sy(q)
            );
        }
    }
    for t in [0.0, 0.5, 1.0] {
        let _ = writeln!(s, r#"<text x="{:.2}" y="{:.2}" font-size="11" text-anchor="middle">{t}</text>"#, sx(t), SIZE - MARGIN + 15.0);
        let _ = writeln!(s, r#"<text x="{:.2}" y="{:.2}" font-size="11" text-anchor="end">{t}</text>"#, MARGIN - 5.0, sy(t) + 4.0);
    }
    let _ = writeln!(
        s,
        r#"<text x="{:.2}" y="{:.2}" font-size="12" text-anchor="middle">p (player 1, first action)</text>"#,
        SIZE / 2.0,
        SIZE - 8.0
    );
    let _ = writeln!(
        s,
        r#"<text x="12" y="{:.2}" font-size="12" text-anchor="middle" transform="rotate(-90 12 {:.2})">q (player 2, first action)</text>"#,
        SIZE / 2.0,
        SIZE / 2.0
    );
    let _ = writeln!(
        s,
        r#"<text x="{:.2}" y="24" font-size="13" text-anchor="middle">{}</text>"#,
        SIZE / 2.0,
        escape(&scan.game)
    );
    s.push_str("</svg>\n");
    s
}

fn escape(t: &str) -> String {
    t.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}
