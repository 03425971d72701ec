//! One function per subcommand. Each returns the `results` JSON value and
//! writes its CSV tables through the reporter.

use anyhow::{bail, Result};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};

use circlemap::circle_map::LiftMap;
use circlemap::dual_deriv::{self, CompatibilityVerdict, DualDerivativeTable};
use circlemap::error::Error as CoreError;
use circlemap::grid::GridHomeomorphism;
use circlemap::linear_model;
use circlemap::measures;
use circlemap::symbolic::{self, SymbolWord};
use circlemap::{ba, conjugacy};

use crate::report::Reporter;

fn check_tol(tol: f64) -> Result<f64> {
    if !(tol > 0.0 && tol < 1.0) {
        bail!("tolerance must lie in (0, 1), got {tol}");
    }
    Ok(tol)
}

fn check_positive(name: &str, v: u32) -> Result<u32> {
    if v == 0 {
        bail!("{name} must be positive");
    }
    Ok(v)
}

pub fn map_report(rep: &Reporter, m: &LiftMap, depth: u32, scales: &[f64]) -> Result<Value> {
    check_positive("depth", depth)?;
    let expansion = m.expansion_report(depth)?;
    let modulus = m.symmetry_modulus(depth, scales)?;
    let geometry = symbolic::bounded_geometry_report(m, depth)?;

    let mut csv = String::from("t,sup_deviation\n");
    for e in &modulus.entries {
        csv.push_str(&format!("{},{:.17}\n", e.t, e.sup_deviation));
    }
    rep.write_csv("modulus.csv", &csv)?;

    Ok(json!({
        "map": m.kind_name(),
        "degree": m.degree(),
        "expansion": {
            "depth": expansion.depth,
            "iota": expansion.iota,
            "lambda": expansion.lambda,
            "expanding": expansion.expanding,
        },
        "modulus": modulus.entries.iter().map(|e| json!({"t": e.t, "sup_deviation": e.sup_deviation})).collect::<Vec<_>>(),
        "derivative_modulus": modulus.derivative_modulus.as_ref().map(|v| {
            v.iter().map(|(t, w)| json!({"t": t, "omega": w})).collect::<Vec<_>>()
        }),
        "geometry": {
            "adjacent_ratio": geometry.adjacent_ratio,
            "child_parent_ratio": geometry.child_parent_ratio,
        },
    }))
}

pub fn dual_deriv(
    rep: &Reporter,
    m: &LiftMap,
    depth: u32,
    word: Option<&str>,
    tol: f64,
) -> Result<Value> {
    check_positive("depth", depth)?;
    check_tol(tol)?;
    let table = DualDerivativeTable::compute(m, depth)?;
    rep.write_csv("dual_deriv.csv", &table.to_csv())?;
    let residual = dual_deriv::summation_residual(&table);
    let mut results = json!({
        "depth": depth,
        "degree": m.degree(),
        "min": table.values().iter().copied().fold(f64::INFINITY, f64::min),
        "max": table.values().iter().copied().fold(f64::NEG_INFINITY, f64::max),
        "max_gap": table.gaps().iter().copied().fold(0.0, f64::max),
        "summation_residual": residual,
    });
    if table.values().len() <= 256 {
        results["values"] = json!(table.values());
    }
    if let Some(word) = word {
        let w = SymbolWord::parse(word, m.degree())?;
        let est = dual_deriv::dual_derivative(m, &w, depth, tol)?;
        results["word"] = json!({
            "digits": w.to_string(),
            "value": est.value,
            "gap": est.gap,
            "depth_reached": est.depth_reached,
            "converged": est.converged,
            "trace": est.trace,
        });
    }
    Ok(results)
}

pub fn check_conditions(
    rep: &Reporter,
    m: &LiftMap,
    depth: u32,
    terms: u32,
    bases: Option<&str>,
) -> Result<Value> {
    check_positive("depth", depth)?;
    check_positive("terms", terms)?;
    let mut per_depth = Vec::new();
    let mut worst = 0.0f64;
    for n in 2..=depth {
        let r = dual_deriv::check_summation(m, n)?;
        worst = worst.max(r);
        per_depth.push(json!({"depth": n, "residual": r}));
    }
    let summation_pass = worst <= 1e-12;

    let compatibility = if m.degree() == 2 {
        let base_words: Vec<SymbolWord> = match bases {
            Some(list) => list
                .split(',')
                .map(|s| SymbolWord::parse(s.trim(), 2))
                .collect::<circlemap::Result<_>>()?,
            None => (0..8u64).map(|k| SymbolWord::from_index(k, 3, 2)).collect(),
        };
        let c = dual_deriv::check_compatibility(m, &base_words, terms)?;
        let mut csv = String::from("word,term,factor,partial\n");
        for wrep in &c.per_word {
            for (i, (f, p)) in wrep.terms.iter().zip(&wrep.partials).enumerate() {
                csv.push_str(&format!("{},{},{:.17},{:.17}\n", wrep.base, i, f, p));
            }
        }
        rep.write_csv("compatibility.csv", &csv)?;
        // witness: the word with the final partial farthest from the mean
        let finals: Vec<f64> = c.per_word.iter().map(|w| *w.partials.last().unwrap()).collect();
        let mean = finals.iter().sum::<f64>() / finals.len() as f64;
        let (wi, _) = finals
            .iter()
            .enumerate()
            .max_by(|a, b| (a.1 - mean).abs().partial_cmp(&(b.1 - mean).abs()).unwrap())
            .unwrap();
        json!({
            "terms": c.terms,
            "depth": c.depth,
            "spread": c.spread,
            "tail_deviation": c.tail_deviation,
            "verdict": match c.verdict {
                CompatibilityVerdict::ConvergingConstant => "PASS",
                CompatibilityVerdict::Diverging => "FAIL",
            },
            "witness": {
                "word": c.per_word[wi].base.to_string(),
                "depth": c.per_word[wi].base.len() + terms as usize,
                "value": finals[wi],
            },
            "partial_products": c.per_word.iter().map(|w| json!({
                "word": w.base.to_string(),
                "final": w.partials.last().unwrap(),
            })).collect::<Vec<_>>(),
        })
    } else {
        Value::Null
    };

    Ok(json!({
        "summation": {
            "verdict": if summation_pass { "PASS" } else { "FAIL" },
            "worst_residual": worst,
            "per_depth": per_depth,
        },
        "compatibility": compatibility,
    }))
}

pub fn conjugacy_cmd(
    rep: &Reporter,
    f: &LiftMap,
    g: &LiftMap,
    depth: u32,
    scales: &[f64],
) -> Result<Value> {
    check_positive("depth", depth)?;
    let h = conjugacy::conjugacy_map(f, g, depth)?;
    let residual = conjugacy::equivariance_residual(f, g, &h);
    let (xs, ys) = h.knots();
    let mut csv = String::from("x,y\n");
    for (x, y) in xs.iter().zip(ys) {
        csv.push_str(&format!("{x:.17},{y:.17}\n"));
    }
    rep.write_csv("conjugacy.csv", &csv)?;
    let qs = conjugacy::qs_report(&h, scales)?;
    // round trip through the reverse conjugacy on decimated knots
    let hba = conjugacy::conjugacy_map(g, f, depth)?;
    let mut comp = 0.0f64;
    for &x in xs.iter().step_by(16) {
        comp = comp.max((h.eval(hba.eval(x)) - x).abs());
    }
    Ok(json!({
        "depth": depth,
        "knots": xs.len(),
        "equivariance_residual": residual,
        "composition_residual": comp,
        "qs_report": qs.iter().map(|(t, m)| json!({"t": t, "M": m})).collect::<Vec<_>>(),
    }))
}

pub fn measure_cmd(
    rep: &Reporter,
    m: &LiftMap,
    depth: u32,
    grid: usize,
    cesaro_terms: u32,
    samples: u32,
    seed: u64,
    tol: f64,
) -> Result<Value> {
    check_positive("depth", depth)?;
    check_tol(tol)?;
    let (dist, density_info) = invariant_distribution(m, grid, tol)?;
    if m.has_branch_derivative() {
        let density = measures::invariant_density(m, grid, 300, tol)?;
        let mut csv = String::from("x,rho\n");
        let n = density.grid().intervals();
        for (i, v) in density.grid().values().iter().enumerate().step_by((n / 1024).max(1)) {
            csv.push_str(&format!("{},{v:.17}\n", i as f64 / n as f64));
        }
        rep.write_csv("density.csv", &csv)?;
    }

    let mu = measures::dual_cylinder_measure(m, &dist, depth)?;
    let mu_coarse = measures::dual_cylinder_measure(m, &dist, depth - 1)?;
    rep.write_csv("cylinder_measure.csv", &mu.to_csv())?;
    let mut dist_csv = String::from("x,H\n");
    let (dx, dy) = dist.knots();
    for (x, y) in dx.iter().zip(dy).step_by((dx.len() / 1024).max(1)) {
        dist_csv.push_str(&format!("{x:.17},{y:.17}\n"));
    }
    rep.write_csv("distribution.csv", &dist_csv)?;

    let (cesaro, oscillations) = measures::cesaro_distribution(m, cesaro_terms, grid)?;
    let cesaro_vs_invariant = {
        let (cx, cy) = cesaro.knots();
        cx.iter()
            .zip(cy)
            .map(|(x, y)| (dist.eval(*x) - y).abs())
            .fold(0.0, f64::max)
    };

    let gibbs = measures::gibbs_report(m, &mu)?;
    let table = DualDerivativeTable::compute(m, depth)?;
    let deviations = measures::rn_vs_dual_deviation(&mu, &table)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let sampled: Vec<Value> = (0..samples)
        .map(|_| {
            let k = rng.gen_range(0..deviations.len());
            let w = SymbolWord::from_index(k as u64, depth, m.degree());
            json!({"word": w.to_string(), "deviation": deviations[k]})
        })
        .collect();

    Ok(json!({
        "depth": depth,
        "density": density_info,
        "measure": {
            "total": mu.total(),
            "sigma_star_defect": mu_coarse.prepend_consistency(&mu)?,
            "refinement_defect": mu_coarse.refinement_consistency(&mu)?,
        },
        "gibbs_bracket": {"depth": gibbs.depth, "lower": gibbs.lower, "upper": gibbs.upper},
        "radon_nikodym": {
            "max_deviation_vs_dual": deviations.iter().copied().fold(0.0, f64::max),
            "sampled": sampled,
            "seed": seed,
        },
        "cesaro": {
            "terms": cesaro_terms,
            "sup_vs_invariant": cesaro_vs_invariant,
            "oscillations": oscillations,
        },
    }))
}

/// Invariant distribution: the transfer fixed point for differentiable
/// kinds, Lebesgue for the two-slope map (exactly invariant there).
fn invariant_distribution(m: &LiftMap, grid: usize, tol: f64) -> Result<(GridHomeomorphism, Value)> {
    if m.has_branch_derivative() {
        let density = measures::invariant_density(m, grid, 300, tol)?;
        let info = json!({
            "kind": "transfer-fixed-point",
            "residual": density.residual,
            "iterations": density.iterations,
        });
        Ok((density.distribution(), info))
    } else {
        Ok((GridHomeomorphism::identity(grid), json!({"kind": "lebesgue"})))
    }
}

pub fn entropy_cmd(rep: &Reporter, m: &LiftMap, depth: u32, grid: usize, tol: f64) -> Result<Value> {
    check_positive("depth", depth)?;
    check_tol(tol)?;
    let (dist, density_info) = invariant_distribution(m, grid, tol)?;
    let mu = measures::dual_cylinder_measure(m, &dist, depth)?;
    let cyl = measures::entropy_cylinder(&mu)?;
    let rohlin = if m.has_branch_derivative() {
        let density = measures::invariant_density(m, grid, 300, tol)?;
        Some(measures::entropy_rohlin(m, &density)?)
    } else {
        // Lebesgue is invariant for the two-slope map; log F' integrates in
        // closed form against it, but the kind carries no derivative
        None
    };
    let mut csv = String::from("depth,raw_estimate\n");
    for (d, v) in &cyl.per_depth {
        csv.push_str(&format!("{d},{v:.17}\n"));
    }
    rep.write_csv("entropy_series.csv", &csv)?;
    Ok(json!({
        "depth": depth,
        "density": density_info,
        "entropy_cylinder": cyl.conditional,
        "entropy_cylinder_raw": cyl.per_depth.last().unwrap().1,
        "entropy_rohlin": rohlin,
        "per_depth": cyl.per_depth.iter().map(|(d, v)| json!({"depth": d, "estimate": v})).collect::<Vec<_>>(),
    }))
}

pub fn linear_model_cmd(rep: &Reporter, m: &LiftMap, depth: u32, range_pow: u32) -> Result<Value> {
    check_positive("depth", depth)?;
    let model = linear_model::linear_model_map(m, depth, range_pow)?;
    let (_, diffs) = linear_model::theta_n(m, depth, range_pow, 512)?;
    let functional_residual = linear_model::check_functional_eq(&model)?;
    let reconstruction = if m.degree() == 2 {
        let table_depth = (range_pow + 8).min(depth.max(range_pow + 2));
        let table = DualDerivativeTable::compute(m, table_depth)?;
        let knots = linear_model::reconstruct_from_dual(&table, range_pow)?;
        let max_diff = knots
            .iter()
            .zip(&model.l_knots)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        json!({"table_depth": table_depth, "max_knot_diff": max_diff})
    } else {
        Value::Null
    };
    let mut csv = String::from("k,L_k_of_0\n");
    for (k, v) in model.l_knots.iter().enumerate() {
        csv.push_str(&format!("{k},{v:.17}\n"));
    }
    rep.write_csv("linear_model.csv", &csv)?;
    Ok(json!({
        "depth": depth,
        "range_pow": range_pow,
        "delta": {"value": model.delta.value, "gap": model.delta.gap},
        "theta_cauchy_tail": diffs.last(),
        "l_knots": model.l_knots,
        "functional_eq_residual": functional_residual,
        "reconstruction": reconstruction,
    }))
}

pub fn ba_field(
    rep: &Reporter,
    line: &ba::LineMap,
    label: &str,
    heights: &[f64],
    x_count: u32,
) -> Result<Value> {
    if heights.iter().any(|&y| y <= 0.0) {
        bail!("heights must be positive");
    }
    let xs: Vec<f64> = (0..x_count).map(|i| i as f64 / x_count as f64).collect();
    let mut csv = String::from("x,y,re_mu,im_mu,abs_mu\n");
    let mut min_b = f64::INFINITY;
    for &y in heights {
        for &x in &xs {
            let s = ba::beltrami_at(line, x, y)?;
            min_b = min_b.min(s.b);
            csv.push_str(&format!(
                "{x:.17},{y:.17},{:.17},{:.17},{:.17}\n",
                s.mu.re,
                s.mu.im,
                s.mu.norm()
            ));
        }
    }
    rep.write_csv("beltrami_field.csv", &csv)?;
    let profile = ba::vanishing_profile(line, heights, &xs)?;
    Ok(json!({
        "line_map": label,
        "min_b": min_b,
        "profile": profile.iter().map(|(y, s)| json!({"y": y, "sup_abs_mu": s})).collect::<Vec<_>>(),
    }))
}

pub fn entropy_scan_fs(
    rep: &Reporter,
    s_values: &[f64],
    m_bound: f64,
    grid: usize,
    tol: f64,
) -> Result<Value> {
    if s_values.is_empty() {
        bail!("need at least one breakpoint value");
    }
    check_tol(tol)?;
    let mut rows = Vec::new();
    let mut csv = String::from("s,entropy_rohlin,entropy_bound\n");
    for &s in s_values {
        let m = LiftMap::fs_smooth(s, m_bound)?;
        let density = measures::invariant_density(&m, grid, 300, tol)?;
        let h = measures::entropy_rohlin(&m, &density)?;
        let r = 1.0 - s;
        let bound = -s.ln() - r * (1.0 + s) * (r / m_bound).ln();
        csv.push_str(&format!("{s},{h:.17},{bound:.17}\n"));
        rows.push(json!({"s": s, "entropy_rohlin": h, "entropy_bound": bound, "within_bound": h <= bound}));
    }
    rep.write_csv("entropy_scan.csv", &csv)?;
    let hs: Vec<f64> = rows.iter().map(|r| r["entropy_rohlin"].as_f64().unwrap()).collect();
    let decreasing = hs.windows(2).all(|w| w[1] < w[0]);
    Ok(json!({
        "m_bound": m_bound,
        "rows": rows,
        "strictly_decreasing": decreasing,
    }))
}

pub fn dmax_cmd(m: &LiftMap, other: &LiftMap, depth: u32) -> Result<Value> {
    check_positive("depth", depth)?;
    let a = DualDerivativeTable::compute(m, depth)?;
    let b = DualDerivativeTable::compute(other, depth)?;
    let value = dual_deriv::dmax_distance(&a, &b)?;
    let prev = if depth > 2 {
        let a2 = DualDerivativeTable::compute(m, depth - 1)?;
        let b2 = DualDerivativeTable::compute(other, depth - 1)?;
        Some(dual_deriv::dmax_distance(&a2, &b2)?)
    } else {
        None
    };
    Ok(json!({
        "depth_a": depth,
        "depth_b": depth,
        "dmax": value,
        "dmax_previous_depth": prev,
        "depth_stability": prev.map(|p| (value - p).abs()),
    }))
}

/// Build the line map for `ba-field`: either a named closed form or the
/// periodic lift of a conjugacy between two maps.
pub fn resolve_line_map(
    name: Option<&str>,
    f: Option<&LiftMap>,
    g: Option<&LiftMap>,
    depth: u32,
) -> Result<(ba::LineMap, String)> {
    if let Some(name) = name {
        let lm = match name {
            "identity" => ba::LineMap::Identity,
            "two-slope" => ba::LineMap::two_slope(),
            other => {
                if let Some(rest) = other.strip_prefix("affine:") {
                    let mut slope = 1.0;
                    let mut offset = 0.0;
                    for pair in rest.split(',') {
                        match pair.split_once('=') {
                            Some(("a", v)) => slope = v.parse()?,
                            Some(("b", v)) => offset = v.parse()?,
                            _ => bail!("bad affine parameter {pair:?}"),
                        }
                    }
                    ba::LineMap::affine(slope, offset)?
                } else {
                    bail!("unknown line map {other:?}");
                }
            }
        };
        return Ok((lm, name.to_string()));
    }
    let (f, g) = match (f, g) {
        (Some(f), Some(g)) => (f, g),
        _ => bail!("ba-field needs either --line or both --map and --other"),
    };
    let h = conjugacy::conjugacy_map(f, g, depth)?;
    let lm = ba::LineMap::periodic_lift(h)?;
    Ok((lm, format!("conjugacy({}, {})", f.kind_name(), g.kind_name())))
}

/// Exit-code classification: numerical non-convergence is 3, everything
/// else that reaches main is config-level (2).
pub fn is_nonconvergence(err: &anyhow::Error) -> bool {
    matches!(err.downcast_ref::<CoreError>(), Some(CoreError::NonConvergence { .. }))
}
