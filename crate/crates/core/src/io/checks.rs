//! Verification checks run after a decomposition.

use std::f64::consts::PI;

use rand::Rng;
use rand_chacha::ChaCha8Rng;

use super::report::CheckOutcome;
use crate::error::Result;
use crate::faber::{principal_part, DEFAULT_HEAD};
use crate::schiffer::schiffer_contour;
use crate::series::{invariance_check, SeriesDecomposition, SeriesOptions, TargetForm, Transport};
use crate::surface::Surface;
use crate::C64;

/// Identifier, anchor and one-line description of a check.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CheckInfo {
    pub id: &'static str,
    pub anchor: &'static str,
    pub description: &'static str,
}

pub const CHECKS: [CheckInfo; 7] = [
    CheckInfo {
        id: "pole-structure",
        anchor: "theorem: f_k^* α^m_k = (m ζ^{−m−1} + holomorphic) dζ",
        description: "Laurent coefficients of every pulled-back α^m_k at ζ^{−(m+1)} .. ζ^{−(m+5)}",
    },
    CheckInfo {
        id: "harmonicity",
        anchor: "Green's function definition: harmonic in w off {z, q}",
        description: "five-point Laplacian (step 1e-3) of the Green's function at random points",
    },
    CheckInfo {
        id: "q-independence",
        anchor: "Schiffer operator definition: kernel independent of q",
        description: "finite-difference ∂_z∂_w 𝒢 for two base points",
    },
    CheckInfo {
        id: "r0-independence",
        anchor: "pole-structure proof: contour integral independent of the radius",
        description: "reduced Schiffer integral at r0 = 0.4, 0.6, 0.8",
    },
    CheckInfo {
        id: "convergence",
        anchor: "theorem: the Faber-Tietz series converges in L²",
        description: "L² residual decreases over the truncations and ends below tolerance",
    },
    CheckInfo {
        id: "uniform-convergence",
        anchor: "theorem: partial sums converge uniformly on compact sets",
        description: "sup error on circles around the caps decreases and ends below tolerance",
    },
    CheckInfo {
        id: "invariance",
        anchor: "theorem: conformal invariance of Faber-Tietz series",
        description: "coefficients of ν and of its transport under a translation agree",
    },
];

pub fn info(id: &str) -> Option<&'static CheckInfo> {
    CHECKS.iter().find(|c| c.id == id)
}

/// Everything a check may look at.
pub(crate) struct Context<'a> {
    pub surface: &'a Surface,
    pub target: &'a TargetForm,
    pub decomposition: &'a SeriesDecomposition,
    pub sup_errors: &'a [(u32, f64)],
    pub run: &'a super::config::RunBlock,
    pub shift: C64,
    pub recovery: Option<f64>,
}

fn outcome(id: &str, measured: f64, threshold: f64, passed: bool, detail: String) -> CheckOutcome {
    let anchor = info(id).map_or("", |c| c.anchor).to_string();
    let measured = if measured.is_finite() { measured } else { f64::MAX };
    CheckOutcome { id: id.to_string(), anchor, passed: passed && measured <= threshold, measured, threshold, detail }
}

fn failed(id: &str, threshold: f64, err: impl std::fmt::Display) -> CheckOutcome {
    outcome(id, f64::MAX, threshold, false, format!("could not evaluate: {err}"))
}

pub(crate) fn run_check(id: &str, ctx: &Context<'_>, rng: &mut ChaCha8Rng) -> CheckOutcome {
    match id {
        "pole-structure" => pole_structure(ctx),
        "harmonicity" => harmonicity(ctx, rng),
        "q-independence" => q_independence(ctx, rng),
        "r0-independence" => r0_independence(ctx, rng),
        "convergence" => convergence(ctx),
        "uniform-convergence" => uniform(ctx),
        "invariance" => invariance(ctx),
        other => failed(other, 0.0, "unknown check"),
    }
}

/// Random points of the chart region (box on the sphere, cell on the torus)
/// accepted by `keep`.
pub(crate) fn random_points<F: Fn(C64) -> bool>(
    surface: &Surface,
    count: usize,
    rng: &mut ChaCha8Rng,
    keep: F,
) -> std::result::Result<Vec<C64>, String> {
    let reach = surface
        .caps()
        .maps()
        .iter()
        .map(|m| m.center_image().norm() + m.outer_radius())
        .fold(0.0, f64::max)
        + 1.5;
    let mut out = Vec::with_capacity(count);
    for _ in 0..200_000 {
        if out.len() == count {
            return Ok(out);
        }
        let (u, v): (f64, f64) = (rng.gen(), rng.gen());
        let z = match surface.lattice() {
            Some(l) => surface.corner() + u + l.tau() * v,
            None => C64::new(reach * (2.0 * u - 1.0), reach * (2.0 * v - 1.0)),
        };
        if keep(z) {
            out.push(z);
        }
    }
    Err(format!("only {} of {count} admissible sample points found", out.len()))
}

fn lattice_distance(surface: &Surface, a: C64, b: C64) -> f64 {
    match surface.lattice() {
        Some(l) => l.distance_to_lattice(a - b),
        None => (a - b).norm(),
    }
}

fn in_sigma(surface: &Surface, z: C64, clearance: f64) -> bool {
    surface.cap_containing(z).is_none() && surface.distance_to_caps(z) >= clearance
}

fn pole_structure(ctx: &Context<'_>) -> CheckOutcome {
    let tol = ctx.run.pole_tolerance;
    let basis = match ctx.decomposition.basis() {
        Some(b) => b,
        None => return failed("pole-structure", tol, "no basis"),
    };
    let mut worst: f64 = 0.0;
    let mut at = (0, 0);
    for k in 0..ctx.surface.cap_count() {
        for m in 1..=ctx.run.pole_orders {
            let result = basis
                .evaluator(k)
                .and_then(|e| e.element(m))
                .and_then(|el| principal_part(&el, ctx.surface.cap(k)?, DEFAULT_HEAD));
            match result {
                Ok(p) if p.pole_error() > worst => {
                    worst = p.pole_error();
                    at = (k + 1, m);
                }
                Ok(_) => {}
                Err(e) => return failed("pole-structure", tol, e),
            }
        }
    }
    outcome(
        "pole-structure",
        worst,
        tol,
        true,
        format!("m = 1..{} on {} caps; worst at cap {}, m = {}", ctx.run.pole_orders, ctx.surface.cap_count(), at.0, at.1),
    )
}

fn harmonicity(ctx: &Context<'_>, rng: &mut ChaCha8Rng) -> CheckOutcome {
    const TOL: f64 = 1e-4;
    const STEP: f64 = 1e-3;
    // the stencil's own truncation error is about STEP² Σ |w − s|^{−4} over the
    // singularities; admit points where that bound is at most TOL / 2
    const STENCIL_BUDGET: f64 = 0.5 * TOL / (STEP * STEP);
    let s = ctx.surface;
    let z = s.caps().maps()[0].center_image();
    let q = s.base_point();
    let points = match random_points(s, 100, rng, |w| {
        let bound = lattice_distance(s, w, z).powi(-4) + q.map_or(0.0, |q| lattice_distance(s, w, q).powi(-4));
        bound <= STENCIL_BUDGET
    }) {
        Ok(p) => p,
        Err(e) => return failed("harmonicity", TOL, e),
    };
    let laplacian = |w: C64| -> Result<f64> {
        let g = |d: C64| s.green(w + d, z);
        let h = C64::new(STEP, 0.0);
        let v = C64::new(0.0, STEP);
        Ok((g(h)? + g(-h)? + g(v)? + g(-v)? - 4.0 * g(C64::new(0.0, 0.0))?) / (STEP * STEP))
    };
    let mut worst: f64 = 0.0;
    for w in &points {
        match laplacian(*w) {
            Ok(l) => worst = worst.max(l.abs()),
            Err(e) => return failed("harmonicity", TOL, e),
        }
    }
    outcome("harmonicity", worst, TOL, true, format!("{} points, pole z = {z}", points.len()))
}

/// `∂_z∂_w 𝒢` by central differences with step `h`.
pub(crate) fn mixed_derivative(surface: &Surface, w: C64, z: C64, h: f64) -> Result<C64> {
    let g = |dw: C64, dz: C64| surface.green(w + dw, z + dz);
    let (hx, hy) = (C64::new(h, 0.0), C64::new(0.0, h));
    let dw = |dz: C64| -> Result<C64> {
        let dx = (g(hx, dz)? - g(-hx, dz)?) / (2.0 * h);
        let dy = (g(hy, dz)? - g(-hy, dz)?) / (2.0 * h);
        Ok(C64::new(dx, -dy) * 0.5)
    };
    let zx = (dw(hx)? - dw(-hx)?) / (2.0 * h);
    let zy = (dw(hy)? - dw(-hy)?) / (2.0 * h);
    Ok((zx - C64::new(0.0, 1.0) * zy) * 0.5)
}

fn q_independence(ctx: &Context<'_>, rng: &mut ChaCha8Rng) -> CheckOutcome {
    const TOL: f64 = 1e-9;
    const STEP: f64 = 1e-2;
    let s = ctx.surface;
    let q1 = s.base_point();
    let q2 = match random_points(s, 1, rng, |p| {
        in_sigma(s, p, 0.1)
            && lattice_distance(s, p, s.normalization_point()) > 0.1
            && q1.map_or(true, |q| lattice_distance(s, p, q) > 0.1)
    }) {
        Ok(p) => p[0],
        Err(e) => return failed("q-independence", TOL, e),
    };
    let other = match s.with_base_point(Some(q2)) {
        Ok(o) => o,
        Err(e) => return failed("q-independence", TOL, e),
    };
    let far = |p: C64| {
        [Some(q2), q1].into_iter().flatten().all(|q| lattice_distance(s, p, q) > 0.1)
            && lattice_distance(s, p, s.normalization_point()) > 0.05
    };
    let points = match random_points(s, 2 * ctx.run.sample_points, rng, |p| in_sigma(s, p, 0.05) && far(p)) {
        Ok(p) => p,
        Err(e) => return failed("q-independence", TOL, e),
    };
    let mut worst: f64 = 0.0;
    let mut pairs = 0;
    for pair in points.chunks(2) {
        let (w, z) = (pair[0], pair[1]);
        if lattice_distance(s, w, z) < 0.2 {
            continue;
        }
        match (mixed_derivative(s, w, z, STEP), mixed_derivative(&other, w, z, STEP)) {
            (Ok(a), Ok(b)) => worst = worst.max((a - b).norm()),
            (Err(e), _) | (_, Err(e)) => return failed("q-independence", TOL, e),
        }
        pairs += 1;
    }
    outcome("q-independence", worst, TOL, pairs > 0, format!("{pairs} point pairs, second base point {q2}"))
}

fn r0_independence(ctx: &Context<'_>, rng: &mut ChaCha8Rng) -> CheckOutcome {
    const TOL: f64 = 1e-9;
    let s = ctx.surface;
    let points = match random_points(s, ctx.run.sample_points, rng, |p| in_sigma(s, p, 0.05)) {
        Ok(p) => p,
        Err(e) => return failed("r0-independence", TOL, e),
    };
    let mut worst: f64 = 0.0;
    for k in 0..s.cap_count() {
        for m in 1..=5 {
            for z in &points {
                let values: Result<Vec<C64>> =
                    [0.4, 0.6, 0.8].iter().map(|r0| schiffer_contour(s, k, m, *z, *r0)).collect();
                match values {
                    Ok(v) => {
                        let scale = v[2].norm().max(1.0);
                        worst = worst.max((v[0] - v[2]).norm() / scale).max((v[1] - v[2]).norm() / scale);
                    }
                    Err(e) => return failed("r0-independence", TOL, e),
                }
            }
        }
    }
    outcome("r0-independence", worst, TOL, true, format!("{} points, m = 1..5, all caps", points.len()))
}

fn sci(values: &[f64]) -> String {
    let parts: Vec<String> = values.iter().map(|v| format!("{v:.3e}")).collect();
    format!("[{}]", parts.join(", "))
}

fn decreasing(values: &[f64], strict: bool) -> bool {
    values.windows(2).all(|w| if strict { w[1] < w[0] } else { w[1] <= w[0] + 1e-10 })
}

fn convergence(ctx: &Context<'_>) -> CheckOutcome {
    let tol = ctx.run.residual_tolerance;
    let history: Vec<f64> = ctx.decomposition.residual_history.iter().map(|t| t.l2_residual).collect();
    let monotone = decreasing(&history, ctx.run.strictly_decreasing);
    let mut passed = monotone;
    let mut detail = format!(
        "residuals {} ({}decreasing: {monotone})",
        sci(&history),
        if ctx.run.strictly_decreasing { "strictly " } else { "" }
    );
    if let Some(err) = ctx.recovery {
        passed &= err < 1e-8;
        detail.push_str(&format!("; max coefficient recovery error {err:.3e}"));
    }
    outcome("convergence", ctx.decomposition.residual(), tol, passed, detail)
}

/// Points on circles of radius `outer + distance` about each cap centre that
/// keep `distance` from every cap.
pub(crate) fn uniform_points(surface: &Surface, distance: f64) -> Vec<C64> {
    let mut out = Vec::new();
    for map in surface.caps().maps() {
        let r = map.outer_radius() + distance;
        for j in 0..64 {
            let z = map.center_image() + C64::from_polar(r, 2.0 * PI * j as f64 / 64.0);
            if in_sigma(surface, z, 0.999 * distance) {
                out.push(z);
            }
        }
    }
    out
}

fn uniform(ctx: &Context<'_>) -> CheckOutcome {
    let tol = ctx.run.uniform_tolerance;
    if ctx.sup_errors.is_empty() || ctx.sup_errors.iter().any(|(_, e)| !e.is_finite()) {
        return failed("uniform-convergence", tol, "no admissible compact set at the configured distance");
    }
    let values: Vec<f64> = ctx.sup_errors.iter().map(|(_, e)| *e).collect();
    let monotone = decreasing(&values, ctx.run.strictly_decreasing);
    outcome(
        "uniform-convergence",
        *values.last().expect("non-empty"),
        tol,
        monotone,
        format!("sup errors {} at distance {}", sci(&values), ctx.run.uniform_distance),
    )
}

fn invariance(ctx: &Context<'_>) -> CheckOutcome {
    let tol = ctx.run.invariance_tolerance;
    let options = SeriesOptions {
        truncations: vec![ctx.run.invariance_order],
        boundary_nodes: ctx.run.boundary_nodes,
        ..SeriesOptions::default()
    };
    match invariance_check(ctx.surface, Transport::Translation(ctx.shift), ctx.target, &options) {
        Ok(dev) => outcome(
            "invariance",
            dev,
            tol,
            true,
            format!("translation by {} at truncation {}", ctx.shift, ctx.run.invariance_order),
        ),
        Err(e) => failed("invariance", tol, e),
    }
}
