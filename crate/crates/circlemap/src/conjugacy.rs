//! Topological conjugacy between same-degree maps from partition
//! endpoints, quasisymmetric distortion reports, and the zeta(M)
//! displacement bound.

use crate::circle_map::LiftMap;
use crate::error::{Error, Result};
use crate::grid::GridHomeomorphism;
use crate::symbolic;

/// Conjugacy h with f o h = h o g, sampled on level-n endpoints: the knot
/// at the level-n endpoint x of g is the level-n endpoint of f with the
/// same word. Normalization h(1) = 1 holds because both enumerations pin
/// the endpoint 1.
pub fn conjugacy_map(f: &LiftMap, g: &LiftMap, depth: u32) -> Result<GridHomeomorphism> {
    if f.degree() != g.degree() {
        return Err(Error::DegreeMismatch(f.degree(), g.degree()));
    }
    let probe = depth.min(6).max(2);
    for m in [f, g] {
        let rep = m.expansion_report(probe)?;
        if !rep.expanding {
            return Err(Error::NotExpanding { n: probe, lambda: rep.lambda });
        }
    }
    let xs = symbolic::partition_endpoints(g, depth)?;
    let ys = symbolic::partition_endpoints(f, depth)?;
    GridHomeomorphism::new(xs.endpoints().to_vec(), ys.endpoints().to_vec())
}

/// Max equivariance residual |F(H(x)) - H(G(x))| mod 1 over the level-(n-1)
/// knots of a depth-n conjugacy.
pub fn equivariance_residual(f: &LiftMap, g: &LiftMap, h: &GridHomeomorphism) -> f64 {
    let (xs, _) = h.knots();
    let d = g.degree() as usize;
    let mut worst = 0.0f64;
    // every d-th knot is a level-(n-1) endpoint
    for &x in xs.iter().step_by(d) {
        let lhs = f.eval(h.eval_lifted(x));
        let rhs = h.eval_lifted(g.eval(x));
        let diff = (lhs - rhs).abs();
        let wrapped = diff - diff.round();
        worst = worst.max(wrapped.abs().min(diff));
    }
    worst
}

/// Per-scale quasisymmetry bound M(t) = max over sampled x of
/// max(rho_H(x, t), 1/rho_H(x, t)) for the periodic lift of H.
pub fn qs_report(h: &GridHomeomorphism, scales: &[f64]) -> Result<Vec<(f64, f64)>> {
    let min_t = scales.iter().copied().fold(f64::INFINITY, f64::min);
    let spacing = h.max_knot_spacing();
    if min_t < 4.0 * spacing {
        return Err(Error::ScaleBelowResolution { t: min_t, spacing });
    }
    let samples = 256;
    let mut out = Vec::with_capacity(scales.len());
    for &t in scales {
        let mut m_t = 1.0f64;
        for i in 0..samples {
            let x = i as f64 / samples as f64;
            let num = h.eval_lifted(x + t) - h.eval_lifted(x);
            let den = h.eval_lifted(x) - h.eval_lifted(x - t);
            if den == 0.0 {
                return Err(Error::ZeroDenominator(x));
            }
            let rho = num / den;
            m_t = m_t.max(rho).max(1.0 / rho);
        }
        out.push((t, m_t));
    }
    Ok(out)
}

/// Displacement bound zeta(M) for an M-quasisymmetric homeomorphism of
/// [0, 1] fixing the endpoints, from the term-by-term series
/// tau_k = max{(M/(M+1))^k - 2^{-k}, 2^{-k} - (1/(M+1))^k},
/// summed until the relative geometric tail drops below 1e-12.
pub fn zeta(m: f64, term_budget: u32) -> Result<f64> {
    if m < 1.0 {
        return Err(Error::InvalidParameter(format!("zeta needs M >= 1, got {m}")));
    }
    let a = m / (m + 1.0);
    let b = 1.0 / (m + 1.0);
    let mut acc = 0.0f64;
    let (mut ak, mut bk, mut hk) = (1.0f64, 1.0f64, 1.0f64);
    for _ in 0..term_budget.max(1) {
        ak *= a;
        bk *= b;
        hk *= 0.5;
        let tau = (ak - hk).max(hk - bk);
        acc += tau;
        // remaining terms are below the geometric tail of a^k
        let tail = ak * a / (1.0 - a);
        if tail <= 1e-12 * acc.max(f64::MIN_POSITIVE) {
            break;
        }
    }
    Ok(acc)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identity_conjugacy() {
        let f = LiftMap::trig_perturbed(2, 0.5).unwrap();
        let h = conjugacy_map(&f, &f, 8).unwrap();
        let (xs, ys) = h.knots();
        for (x, y) in xs.iter().zip(ys) {
            assert!((x - y).abs() < 1e-13);
        }
    }

    #[test]
    fn pl_level1_knot() {
        let f = LiftMap::piecewise_linear(0.3).unwrap();
        let g = LiftMap::power(2).unwrap();
        let h = conjugacy_map(&f, &g, 1).unwrap();
        assert!((h.eval(0.5) - 0.3).abs() < 1e-13);
    }

    #[test]
    fn equivariance_and_composition() {
        let f = LiftMap::trig_perturbed(2, 0.5).unwrap();
        let g = LiftMap::power(2).unwrap();
        let h = conjugacy_map(&f, &g, 10).unwrap();
        assert!(equivariance_residual(&f, &g, &h) <= 1e-9);

        // H_fg o H_gf = id on shared knots
        let hba = conjugacy_map(&g, &f, 10).unwrap();
        let (xs, _) = hba.knots();
        for &x in xs.iter().step_by(7) {
            let y = h.eval(hba.eval(x));
            assert!((y - x).abs() <= 1e-9);
        }
    }

    #[test]
    fn degree_mismatch_rejected() {
        let f = LiftMap::power(3).unwrap();
        let g = LiftMap::power(2).unwrap();
        assert!(matches!(conjugacy_map(&f, &g, 4), Err(Error::DegreeMismatch(3, 2))));
    }

    #[test]
    fn qs_report_identity_and_pl() {
        let id = GridHomeomorphism::identity(512);
        for (_, m_t) in qs_report(&id, &[0.5, 0.25, 0.125]).unwrap() {
            assert!((m_t - 1.0).abs() < 1e-12);
        }

        let f = LiftMap::piecewise_linear(0.3).unwrap();
        let g = LiftMap::power(2).unwrap();
        let h = conjugacy_map(&f, &g, 10).unwrap();
        let rep = qs_report(&h, &[0.5]).unwrap();
        // witness at x = 0.5: rho = (H(1)-H(0.5)) / (H(0.5)-H(0)) = r/s
        assert!(rep[0].1 >= 0.7 / 0.3 - 1e-9);
    }

    #[test]
    fn qs_report_resolution_guard() {
        let id = GridHomeomorphism::identity(8);
        assert!(matches!(
            qs_report(&id, &[0.1]),
            Err(Error::ScaleBelowResolution { .. })
        ));
    }

    #[test]
    fn zeta_series_values() {
        // M = 1: every term vanishes
        assert_eq!(zeta(1.0, 200).unwrap(), 0.0);
        // M = 2: tau_1 = 1/6 and the rest telescopes to 1 (series oracle)
        let mut oracle = 0.0;
        for k in 1..200 {
            let a = (2.0f64 / 3.0).powi(k);
            let b = (1.0f64 / 3.0).powi(k);
            let h = 0.5f64.powi(k);
            oracle += (a - h).max(h - b);
        }
        let z2 = zeta(2.0, 400).unwrap();
        assert!((z2 - 1.0).abs() < 1e-9, "{z2}");
        assert!((z2 - oracle).abs() < 1e-12);
        // nondecreasing in M
        let ms = [1.0, 1.1, 1.5, 2.0, 3.0];
        let zs: Vec<f64> = ms.iter().map(|&m| zeta(m, 600).unwrap()).collect();
        for pair in zs.windows(2) {
            assert!(pair[1] > pair[0] - 1e-15);
        }
        assert!(zs[1] > 0.0 && zs[1] < zs[3]);
    }

    #[test]
    fn zeta_bounds_knot_displacement() {
        // power-law homeomorphisms H(x) = x^p: measure the dyadic-knot
        // quasisymmetry constant, then check |H(x) - x| <= zeta(M)
        for &p in &[1.1f64, 1.3, 0.8] {
            let n = 1 << 10;
            let h: Vec<f64> = (0..=n).map(|i| ((i as f64) / n as f64).powf(p)).collect();
            let mut m_emp = 1.0f64;
            for i in 1..n {
                let rho = (h[i + 1] - h[i]) / (h[i] - h[i - 1]);
                m_emp = m_emp.max(rho).max(1.0 / rho);
            }
            let z = zeta(m_emp, 2000).unwrap();
            let disp = h
                .iter()
                .enumerate()
                .map(|(i, v)| (v - i as f64 / n as f64).abs())
                .fold(0.0, f64::max);
            assert!(disp <= z + 1e-12, "p = {p}: disp {disp} > zeta {z}");
        }
    }
}
