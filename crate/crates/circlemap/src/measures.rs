//! Transfer operators, invariant densities, Cesaro distributions, cylinder
//! measures on the dual symbolic space, Gibbs-ratio diagnostics,
//! Radon-Nikodym tables, and entropy by cylinder sums and Rohlin's formula.

use crate::circle_map::LiftMap;
use crate::dual_deriv::DualDerivativeTable;
use crate::error::{Error, Result};
use crate::grid::{compensated_sum, GridFn, GridHomeomorphism};
use crate::symbolic::{self, SymbolWord};

/// Default uniform grid (2^14 intervals) with composite trapezoid rule.
pub const DEFAULT_GRID: usize = 1 << 14;

/// Pullback cache: G_k(x_i) and F'(G_k(x_i)) for every grid point.
#[derive(Debug, Clone)]
pub struct TransferOperator {
    grid_n: usize,
    branches: Vec<Vec<f64>>,
    branch_derivs: Option<Vec<Vec<f64>>>,
}

impl TransferOperator {
    pub fn new(m: &LiftMap, grid_n: usize) -> Result<Self> {
        let d = m.degree();
        let mut branches = Vec::with_capacity(d as usize);
        for k in 0..d {
            let col: Vec<f64> = (0..=grid_n)
                .map(|i| m.inverse01(i as f64 / grid_n as f64 + k as f64))
                .collect();
            branches.push(col);
        }
        let branch_derivs = if m.has_branch_derivative() {
            Some(
                branches
                    .iter()
                    .map(|col| col.iter().map(|&y| m.derivative_sides(y).1).collect())
                    .collect(),
            )
        } else {
            None
        };
        Ok(Self { grid_n, branches, branch_derivs })
    }

    pub fn grid_intervals(&self) -> usize {
        self.grid_n
    }

    /// (L_psi phi)(x) = sum_k phi(G_k(x)) psi(G_k(x)).
    pub fn apply(&self, psi: &GridFn, phi: &GridFn) -> Result<GridFn> {
        if psi.intervals() != self.grid_n || phi.intervals() != self.grid_n {
            return Err(Error::GridMismatch(psi.intervals(), self.grid_n));
        }
        let mut out = vec![0.0; self.grid_n + 1];
        for col in &self.branches {
            for (o, &y) in out.iter_mut().zip(col) {
                *o += phi.eval(y) * psi.eval(y);
            }
        }
        GridFn::from_values(out)
    }

    /// One step of the Perron-Frobenius operator with weight 1/F'.
    fn apply_density(&self, rho: &GridFn) -> Result<GridFn> {
        let derivs = self.branch_derivs.as_ref().ok_or(Error::NoDerivative)?;
        let mut out = vec![0.0; self.grid_n + 1];
        for (col, dcol) in self.branches.iter().zip(derivs) {
            for ((o, &y), &fp) in out.iter_mut().zip(col).zip(dcol) {
                *o += rho.eval(y) / fp;
            }
        }
        GridFn::from_values(out)
    }
}

/// One-off transfer application on a fresh pullback cache.
pub fn transfer_apply(m: &LiftMap, psi: &GridFn, phi: &GridFn) -> Result<GridFn> {
    if psi.intervals() != phi.intervals() {
        return Err(Error::GridMismatch(psi.intervals(), phi.intervals()));
    }
    TransferOperator::new(m, psi.intervals())?.apply(psi, phi)
}

/// Nonnegative density on the uniform grid with unit mass.
#[derive(Debug, Clone)]
pub struct GridDensity {
    values: GridFn,
    pub residual: f64,
    pub iterations: u32,
}

impl GridDensity {
    pub fn grid(&self) -> &GridFn {
        &self.values
    }

    /// Distribution function x -> integral of the density over [0, x].
    pub fn distribution(&self) -> GridHomeomorphism {
        let cum = self.values.cumulative();
        let total = *cum.values().last().unwrap();
        let n = cum.intervals();
        let xs: Vec<f64> = (0..=n).map(|i| i as f64 / n as f64).collect();
        let ys: Vec<f64> = cum.values().iter().map(|v| v / total).collect();
        GridHomeomorphism::new(xs, ys).expect("positive density gives a strictly increasing distribution")
    }
}

/// Fixed point of the Perron-Frobenius operator with weight 1/F', iterated
/// from the constant density until the sup-norm step residual meets `tol`.
pub fn invariant_density(m: &LiftMap, grid_n: usize, max_iters: u32, tol: f64) -> Result<GridDensity> {
    let op = TransferOperator::new(m, grid_n)?;
    let mut rho = GridFn::constant(grid_n, 1.0);
    let mut residual = f64::INFINITY;
    for it in 1..=max_iters {
        let next = op.apply_density(&rho)?;
        residual = next.sup_diff(&rho)?;
        rho = next;
        if residual <= tol {
            let mass = rho.trapezoid();
            for v in rho.values_mut() {
                *v /= mass;
            }
            return Ok(GridDensity { values: rho, residual, iterations: it });
        }
    }
    Err(Error::NonConvergence { residual, iterations: max_iters })
}

/// Cesaro average H_n(x) = (1/n) sum_{k<n} D_k(x) of the push-forward
/// distributions D_k of Lebesgue measure, via the recursion
/// D_{k+1}(x) = sum_c [D_k(G_c(x)) - D_k(G_c(0))].
///
/// Returns the average together with the successive oscillations
/// sup|H_{j+1} - H_j|, so convergence is an observed quantity.
pub fn cesaro_distribution(m: &LiftMap, terms: u32, grid_n: usize) -> Result<(GridHomeomorphism, Vec<f64>)> {
    if terms < 1 {
        return Err(Error::InvalidParameter("cesaro needs >= 1 term".into()));
    }
    let op = TransferOperator::new(m, grid_n)?;
    let mut dk = GridFn::sample(grid_n, |x| x);
    let mut acc = vec![0.0f64; grid_n + 1];
    let mut oscillations = Vec::with_capacity(terms as usize - 1);
    let mut prev_avg: Option<Vec<f64>> = None;
    for j in 1..=terms {
        for (a, v) in acc.iter_mut().zip(dk.values()) {
            *a += v;
        }
        let avg: Vec<f64> = acc.iter().map(|a| a / j as f64).collect();
        if let Some(p) = prev_avg {
            let osc = avg.iter().zip(&p).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
            oscillations.push(osc);
        }
        prev_avg = Some(avg);
        if j < terms {
            let mut next = vec![0.0f64; grid_n + 1];
            for col in &op.branches {
                let base = dk.eval(col[0]);
                for (o, &y) in next.iter_mut().zip(col) {
                    *o += dk.eval(y) - base;
                }
            }
            dk = GridFn::from_values(next)?;
        }
    }
    let ys = prev_avg.unwrap();
    let xs: Vec<f64> = (0..=grid_n).map(|i| i as f64 / grid_n as f64).collect();
    Ok((GridHomeomorphism::new(xs, ys)?, oscillations))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    Sigma,
    SigmaStar,
}

/// Masses on the words of one depth, indexed by the base-d word value.
#[derive(Debug, Clone)]
pub struct CylinderMeasure {
    degree: u32,
    depth: u32,
    side: Side,
    masses: Vec<f64>,
}

impl CylinderMeasure {
    pub fn new(degree: u32, depth: u32, side: Side, masses: Vec<f64>) -> Result<Self> {
        let cells = (degree as u64).pow(depth);
        if masses.len() as u64 != cells {
            return Err(Error::InvalidParameter(format!(
                "expected {cells} masses, got {}",
                masses.len()
            )));
        }
        if masses.iter().any(|&v| v < 0.0) {
            return Err(Error::InvalidParameter("masses must be nonnegative".into()));
        }
        Ok(Self { degree, depth, side, masses })
    }

    pub fn degree(&self) -> u32 {
        self.degree
    }

    pub fn depth(&self) -> u32 {
        self.depth
    }

    pub fn side(&self) -> Side {
        self.side
    }

    pub fn masses(&self) -> &[f64] {
        &self.masses
    }

    pub fn total(&self) -> f64 {
        compensated_sum(self.masses.iter().copied())
    }

    /// Coarsen one depth by summing sibling masses (append-digit children).
    pub fn coarsen(&self) -> CylinderMeasure {
        let d = self.degree as usize;
        let masses = self
            .masses
            .chunks_exact(d)
            .map(|c| compensated_sum(c.iter().copied()))
            .collect();
        CylinderMeasure { degree: self.degree, depth: self.depth - 1, side: self.side, masses }
    }

    /// Max defect of mass(w) = sum_j mass(j w) against a measure one depth
    /// deeper: the finite-depth shift-invariance (sigma on the left-read
    /// side, sigma* on the right-read side).
    pub fn prepend_consistency(&self, finer: &CylinderMeasure) -> Result<f64> {
        if finer.depth != self.depth + 1 || finer.degree != self.degree {
            return Err(Error::DepthMismatch(finer.depth, self.depth + 1));
        }
        let stride = self.masses.len();
        let mut worst = 0.0f64;
        for (k, &coarse) in self.masses.iter().enumerate() {
            let s = compensated_sum((0..self.degree as usize).map(|j| finer.masses[j * stride + k]));
            worst = worst.max((s - coarse).abs());
        }
        Ok(worst)
    }

    /// Max defect of mass(w) = sum_j mass(w j) against a finer measure:
    /// refinement consistency of the underlying distribution.
    pub fn refinement_consistency(&self, finer: &CylinderMeasure) -> Result<f64> {
        if finer.depth != self.depth + 1 || finer.degree != self.degree {
            return Err(Error::DepthMismatch(finer.depth, self.depth + 1));
        }
        let coarse = finer.coarsen();
        let mut worst = 0.0f64;
        for (a, b) in coarse.masses.iter().zip(&self.masses) {
            worst = worst.max((a - b).abs());
        }
        Ok(worst)
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("word,mass\n");
        for (k, v) in self.masses.iter().enumerate() {
            let w = SymbolWord::from_index(k as u64, self.depth, self.degree);
            out.push_str(&format!("{w},{v:.17}\n"));
        }
        out
    }
}

/// Dual cylinder measure of a distribution function: the mass of the dual
/// word w*_n is the distribution increment over the interval of the
/// reversed-read word, which shares its storage.
pub fn dual_cylinder_measure(m: &LiftMap, dist: &GridHomeomorphism, depth: u32) -> Result<CylinderMeasure> {
    let level = symbolic::partition_endpoints(m, depth)?;
    let vals: Vec<f64> = level.endpoints().iter().map(|&x| dist.eval(x)).collect();
    let masses: Vec<f64> = vals.windows(2).map(|w| w[1] - w[0]).collect();
    CylinderMeasure::new(m.degree(), depth, Side::SigmaStar, masses)
}

/// Lebesgue dual measure (interval lengths themselves).
pub fn lebesgue_cylinder_measure(m: &LiftMap, depth: u32) -> Result<CylinderMeasure> {
    let level = symbolic::partition_endpoints(m, depth)?;
    let masses: Vec<f64> = level.lengths().to_vec();
    CylinderMeasure::new(m.degree(), depth, Side::SigmaStar, masses)
}

/// Gibbs bracket at the measure's depth: extremes over words of
/// mass(w*_n) / exp(sum_l -log D*((sigma*)^l w*_n)), every dual-derivative
/// factor truncated to the depth of its shifted word.
#[derive(Debug, Clone, Copy)]
pub struct GibbsBracket {
    pub depth: u32,
    pub lower: f64,
    pub upper: f64,
}

pub fn gibbs_report(m: &LiftMap, measure: &CylinderMeasure) -> Result<GibbsBracket> {
    if m.degree() != measure.degree {
        return Err(Error::DegreeMismatch(m.degree(), measure.degree));
    }
    let n = measure.depth;
    let levels = symbolic::partition_family(m, n)?;
    let d = m.degree() as u64;
    let mut lower = f64::INFINITY;
    let mut upper = f64::NEG_INFINITY;
    for (k, &mass) in measure.masses.iter().enumerate() {
        let mut log_denom = 0.0;
        let mut idx = k as u64;
        for l in 0..n {
            let t = (n - l) as usize;
            let dstar = levels[t - 1].length(idx / d) / levels[t].length(idx);
            log_denom -= dstar.ln();
            idx /= d;
        }
        let ratio = mass / log_denom.exp();
        lower = lower.min(ratio);
        upper = upper.max(ratio);
    }
    Ok(GibbsBracket { depth: n, lower, upper })
}

/// Radon-Nikodym table mass(w*_n) / mass(sigma*(w*_n)). The parent masses
/// come from coarsening, so a depth-n measure suffices.
pub fn radon_nikodym(measure: &CylinderMeasure) -> Result<Vec<f64>> {
    if measure.depth < 1 {
        return Err(Error::InvalidParameter("radon-nikodym needs depth >= 1".into()));
    }
    let parent = measure.coarsen();
    let d = measure.degree as usize;
    measure
        .masses
        .iter()
        .enumerate()
        .map(|(k, &v)| {
            let p = parent.masses[k / d];
            if p == 0.0 {
                Err(Error::ZeroParentMass((k / d) as u64))
            } else {
                Ok(v / p)
            }
        })
        .collect()
}

/// Entropy estimates from one cylinder measure: the per-depth raw
/// estimates (1/n) sum -m log m obtained by coarsening, and the
/// conditional form sum -m log(m / parent m) at the full depth.
#[derive(Debug, Clone)]
pub struct CylinderEntropy {
    /// (depth, raw estimate), deepest last
    pub per_depth: Vec<(u32, f64)>,
    pub conditional: f64,
}

pub fn entropy_cylinder(measure: &CylinderMeasure) -> Result<CylinderEntropy> {
    if measure.depth < 2 {
        return Err(Error::InvalidParameter("cylinder entropy needs depth >= 2".into()));
    }
    let d = measure.degree as usize;
    let plogp = |m: f64| if m > 0.0 { -m * m.ln() } else { 0.0 };
    let conditional = {
        let parent = measure.coarsen();
        compensated_sum(measure.masses.iter().enumerate().map(|(k, &v)| {
            if v > 0.0 {
                -v * (v / parent.masses[k / d]).ln()
            } else {
                0.0
            }
        }))
    };
    let mut per_depth = Vec::with_capacity(measure.depth as usize);
    let mut cur = measure.clone();
    loop {
        let raw = compensated_sum(cur.masses.iter().map(|&v| plogp(v))) / cur.depth as f64;
        per_depth.push((cur.depth, raw));
        if cur.depth == 1 {
            break;
        }
        cur = cur.coarsen();
    }
    per_depth.reverse();
    Ok(CylinderEntropy { per_depth, conditional })
}

/// Rohlin integral of log F' against a density by composite trapezoid.
pub fn entropy_rohlin(m: &LiftMap, density: &GridDensity) -> Result<f64> {
    if !m.has_branch_derivative() {
        return Err(Error::NoDerivative);
    }
    let n = density.grid().intervals();
    let integrand = GridFn::from_values(
        (0..=n)
            .map(|i| {
                let x = i as f64 / n as f64;
                m.derivative_sides(x).1.ln() * density.grid().values()[i]
            })
            .collect(),
    )?;
    Ok(integrand.trapezoid())
}

/// Finite-depth image of sigma-invariance for the left-read lift of a dual
/// measure; kept next to the dual check because both are prepend sums.
pub fn sigma_invariance_defect(coarse: &CylinderMeasure, fine: &CylinderMeasure) -> Result<f64> {
    coarse.prepend_consistency(fine)
}

/// Convenience: |mu* ratio - 1/D*| per word between a measure and a dual
/// table at the same depth.
pub fn rn_vs_dual_deviation(measure: &CylinderMeasure, table: &DualDerivativeTable) -> Result<Vec<f64>> {
    if measure.depth != table.depth() || measure.degree != table.degree() {
        return Err(Error::DepthMismatch(measure.depth, table.depth()));
    }
    let ratios = radon_nikodym(measure)?;
    Ok(ratios
        .iter()
        .zip(table.values())
        .map(|(r, v)| (r - 1.0 / v).abs())
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid(n: usize, f: impl Fn(f64) -> f64) -> GridFn {
        GridFn::sample(n, f)
    }

    #[test]
    fn transfer_constant_g_function() {
        let m = LiftMap::power(2).unwrap();
        let psi = grid(512, |_| 0.5);
        let out = transfer_apply(&m, &psi, &grid(512, |_| 1.0)).unwrap();
        for &v in out.values() {
            assert!((v - 1.0).abs() < 1e-13);
        }
    }

    #[test]
    fn transfer_cosine_cancels() {
        use std::f64::consts::PI;
        let m = LiftMap::power(2).unwrap();
        let psi = grid(4096, |_| 0.5);
        let phi = grid(4096, |x| (2.0 * PI * x).cos());
        let out = transfer_apply(&m, &psi, &phi).unwrap();
        for &v in out.values() {
            assert!(v.abs() < 1e-7, "{v}");
        }
    }

    #[test]
    fn transfer_smooth_g_function() {
        // 1/F' is a genuine continuous g-function for the Lebesgue-preserving
        // smooth family, so L_psi 1 = 1 up to grid interpolation
        let m = LiftMap::fs_smooth(0.7, 4.0).unwrap();
        let op = TransferOperator::new(&m, 8192).unwrap();
        let psi = grid(8192, |x| 1.0 / m.derivative_sides(x).1);
        let out = op.apply(&psi, &grid(8192, |_| 1.0)).unwrap();
        for &v in out.values() {
            assert!((v - 1.0).abs() < 1e-5, "{v}");
        }
    }

    #[test]
    fn transfer_pl_branch_weights() {
        // the two-slope pullback weights are the branch slopes; at the
        // breakpoint the one-sided derivative facing the branch interior
        // applies, and the weights sum to s + r = 1
        let m = LiftMap::piecewise_linear(0.3).unwrap();
        for i in 0..=16 {
            let x = i as f64 / 16.0;
            let g0 = m.inverse_branch(0, x).unwrap();
            let g1 = m.inverse_branch(1, x).unwrap();
            let w0 = 1.0 / if g0 >= 0.3 { m.derivative_sides(g0).0 } else { m.derivative_sides(g0).1 };
            let w1 = 1.0 / if g1 <= 0.3 { m.derivative_sides(g1).1 } else { m.derivative_sides(g1).0 };
            assert!((w0 + w1 - 1.0).abs() < 1e-12, "x = {x}: {}", w0 + w1);
        }
    }

    #[test]
    fn invariant_density_power_and_fs() {
        let m = LiftMap::power(2).unwrap();
        let rho = invariant_density(&m, 1024, 50, 1e-12).unwrap();
        for &v in rho.grid().values() {
            assert!((v - 1.0).abs() < 1e-10);
        }
        let fs = LiftMap::fs_smooth(0.7, 4.0).unwrap();
        let rho = invariant_density(&fs, 512, 60, 1e-9).unwrap();
        for &v in rho.grid().values() {
            assert!((v - 1.0).abs() < 1e-6, "{v}");
        }
    }

    #[test]
    fn invariant_density_rejects_pl() {
        let m = LiftMap::piecewise_linear(0.3).unwrap();
        assert!(invariant_density(&m, 128, 10, 1e-6).is_err());
    }

    #[test]
    fn cesaro_identity_for_lebesgue_preserving() {
        for m in [LiftMap::power(2).unwrap(), LiftMap::piecewise_linear(0.3).unwrap()] {
            let (h, _) = cesaro_distribution(&m, 6, 512).unwrap();
            let (xs, ys) = h.knots();
            for (x, y) in xs.iter().zip(ys) {
                assert!((x - y).abs() < 1e-10, "{}: {x} vs {y}", m.kind_name());
            }
        }
    }

    #[test]
    fn dual_measure_power_uniform() {
        let m = LiftMap::power(2).unwrap();
        let lebesgue = GridHomeomorphism::identity(4);
        let mu = dual_cylinder_measure(&m, &lebesgue, 6).unwrap();
        for &v in mu.masses() {
            assert!((v - 2f64.powi(-6)).abs() < 1e-13);
        }
        assert!((mu.total() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn dual_measure_pl_bernoulli() {
        let m = LiftMap::piecewise_linear(0.3).unwrap();
        let mu = lebesgue_cylinder_measure(&m, 6).unwrap();
        for (k, &v) in mu.masses().iter().enumerate() {
            let ones = (k as u64).count_ones();
            let want = 0.3f64.powi(6 - ones as i32) * 0.7f64.powi(ones as i32);
            assert!((v - want).abs() < 1e-12);
        }
        // sigma*-consistency is exact for the invariant measure
        let coarse = lebesgue_cylinder_measure(&m, 5).unwrap();
        assert!(coarse.prepend_consistency(&mu).unwrap() <= 1e-12);
        assert!(coarse.refinement_consistency(&mu).unwrap() <= 1e-12);
    }

    #[test]
    fn gibbs_brackets() {
        let m = LiftMap::power(2).unwrap();
        let mu = lebesgue_cylinder_measure(&m, 8).unwrap();
        let b = gibbs_report(&m, &mu).unwrap();
        assert!((b.lower - 1.0).abs() < 1e-9 && (b.upper - 1.0).abs() < 1e-9);

        let pl = LiftMap::piecewise_linear(0.3).unwrap();
        let mu = lebesgue_cylinder_measure(&pl, 8).unwrap();
        let b = gibbs_report(&pl, &mu).unwrap();
        assert!((b.lower - 1.0).abs() < 1e-9 && (b.upper - 1.0).abs() < 1e-9);
    }

    #[test]
    fn radon_nikodym_tables() {
        let m = LiftMap::power(2).unwrap();
        let mu = lebesgue_cylinder_measure(&m, 6).unwrap();
        for r in radon_nikodym(&mu).unwrap() {
            assert!((r - 0.5).abs() < 1e-11);
        }
        let pl = LiftMap::piecewise_linear(0.3).unwrap();
        let mu = lebesgue_cylinder_measure(&pl, 6).unwrap();
        for (k, r) in radon_nikodym(&mu).unwrap().iter().enumerate() {
            let want = if k % 2 == 0 { 0.3 } else { 0.7 };
            assert!((r - want).abs() < 1e-11);
        }
    }

    #[test]
    fn entropy_cylinder_values() {
        let m = LiftMap::power(2).unwrap();
        let mu = lebesgue_cylinder_measure(&m, 10).unwrap();
        let e = entropy_cylinder(&mu).unwrap();
        assert!((e.conditional - 2f64.ln()).abs() < 1e-10);
        for &(_, raw) in &e.per_depth {
            assert!((raw - 2f64.ln()).abs() < 1e-10);
        }

        let pl = LiftMap::piecewise_linear(0.3).unwrap();
        let mu = lebesgue_cylinder_measure(&pl, 10).unwrap();
        let e = entropy_cylinder(&mu).unwrap();
        let bern = -(0.3f64.ln() * 0.3 + 0.7f64.ln() * 0.7);
        assert!((e.conditional - bern).abs() < 1e-9);
        assert!((e.per_depth.last().unwrap().1 - bern).abs() < 1e-9);
    }

    #[test]
    fn entropy_zero_mass_convention() {
        let mu = CylinderMeasure::new(2, 2, Side::SigmaStar, vec![0.5, 0.5, 0.0, 0.0]).unwrap();
        let e = entropy_cylinder(&mu).unwrap();
        assert!(e.conditional.is_finite());
    }

    #[test]
    fn entropy_max_is_log_d() {
        let tr = LiftMap::trig_perturbed(2, 0.5).unwrap();
        let mu = lebesgue_cylinder_measure(&tr, 10).unwrap();
        let e = entropy_cylinder(&mu).unwrap();
        for &(_, raw) in &e.per_depth {
            assert!(raw <= 2f64.ln() + 1e-9);
        }
    }

    #[test]
    fn rohlin_power() {
        let m = LiftMap::power(2).unwrap();
        let rho = invariant_density(&m, 1024, 50, 1e-12).unwrap();
        let h = entropy_rohlin(&m, &rho).unwrap();
        assert!((h - 2f64.ln()).abs() < 1e-10);
    }
}
