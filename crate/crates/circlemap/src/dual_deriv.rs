//! Dual derivatives D*(f) on the dual symbolic space, the summation and
//! compatibility conditions, the solenoid ratios, and the maximum metric.
//!
//! At finite depth n the dual derivative of the word with stored digits
//! i_0 .. i_{n-1} is |I_parent| / |I_word| where the parent drops the last
//! stored digit (the right shift). All per-level values in a table come
//! from one deep endpoint enumeration whose parents are exact subsamples,
//! so the summation identity holds to roundoff by construction.

use crate::circle_map::LiftMap;
use crate::error::{Error, Result};
use crate::symbolic::{self, SymbolWord};

/// Finite-depth dual derivatives for every word of one depth.
#[derive(Debug, Clone)]
pub struct DualDerivativeTable {
    degree: u32,
    depth: u32,
    values: Vec<f64>,
    /// |D*_n - D*_{n-1}| per word; the depth-(n-1) value drops the oldest
    /// dual digit.
    gaps: Vec<f64>,
}

impl DualDerivativeTable {
    /// Build tables for all depths 2..=depth in one pass; returns them
    /// shallow-to-deep.
    pub fn family(m: &LiftMap, depth: u32) -> Result<Vec<DualDerivativeTable>> {
        if depth < 2 {
            return Err(Error::InvalidParameter("dual derivative tables need depth >= 2".into()));
        }
        let levels = symbolic::partition_family(m, depth)?;
        let d = m.degree() as usize;
        let mut per_depth: Vec<Vec<f64>> = Vec::with_capacity(depth as usize);
        for n in 1..=depth as usize {
            let level = &levels[n];
            let parent = &levels[n - 1];
            let values: Vec<f64> = (0..level.cells())
                .map(|k| parent.length((k / d) as u64) / level.length(k as u64))
                .collect();
            per_depth.push(values);
        }
        let mut out = Vec::with_capacity(depth as usize - 1);
        for n in 2..=depth as usize {
            let values = per_depth[n - 1].clone();
            let prev = &per_depth[n - 2];
            let cells_prev = prev.len();
            let gaps = values
                .iter()
                .enumerate()
                .map(|(k, v)| (v - prev[k % cells_prev]).abs())
                .collect();
            out.push(DualDerivativeTable { degree: m.degree(), depth: n as u32, values, gaps });
        }
        Ok(out)
    }

    pub fn compute(m: &LiftMap, depth: u32) -> Result<DualDerivativeTable> {
        Ok(Self::family(m, depth)?.pop().unwrap())
    }

    pub fn degree(&self) -> u32 {
        self.degree
    }

    pub fn depth(&self) -> u32 {
        self.depth
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn gaps(&self) -> &[f64] {
        &self.gaps
    }

    /// Value at a dual word given by its rightmost digits, zero-padded on
    /// the dual-left to the table depth. Padding does not change the index.
    pub fn value_padded(&self, word: &SymbolWord) -> Result<f64> {
        if word.len() > self.depth as usize {
            return Err(Error::DepthMismatch(word.len() as u32, self.depth));
        }
        Ok(self.values[word.index(self.degree) as usize])
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("word,value,gap\n");
        for (k, (v, g)) in self.values.iter().zip(&self.gaps).enumerate() {
            let w = SymbolWord::from_index(k as u64, self.depth, self.degree);
            out.push_str(&format!("{w},{v:.17},{g:.3e}\n"));
        }
        out
    }
}

/// Depth-by-depth dual derivative of one dual word, refining until the
/// successive gap drops below `tol` or the depth budget runs out. The word
/// supplies the rightmost dual digits; beyond its length the history is
/// zero-padded.
#[derive(Debug, Clone)]
pub struct DualDerivEstimate {
    pub value: f64,
    pub gap: f64,
    pub depth_reached: u32,
    pub converged: bool,
    /// per-depth finite values, shallowest first (starting at depth 2)
    pub trace: Vec<f64>,
}

pub fn dual_derivative(m: &LiftMap, word: &SymbolWord, max_depth: u32, tol: f64) -> Result<DualDerivEstimate> {
    if max_depth < 2 {
        return Err(Error::InvalidParameter("dual derivative needs depth >= 2".into()));
    }
    let mut trace = Vec::new();
    let mut prev = f64::NAN;
    let mut gap = f64::INFINITY;
    for n in 2..=max_depth {
        let padded = word.zero_padded(n as usize);
        let use_word = if padded.len() > n as usize {
            // deep word: depth-n approximant keeps the rightmost n digits
            SymbolWord::new(padded.digits()[padded.len() - n as usize..].to_vec(), m.degree())?
        } else {
            padded
        };
        let (a, b) = symbolic::interval_for_word(m, &use_word)?;
        let (pa, pb) = symbolic::interval_for_word(m, &use_word.dual_shift())?;
        let value = (pb - pa) / (b - a);
        if !prev.is_nan() {
            gap = (value - prev).abs();
        }
        prev = value;
        trace.push(value);
        if gap < tol {
            return Ok(DualDerivEstimate { value, gap, depth_reached: n, converged: true, trace });
        }
    }
    Ok(DualDerivEstimate {
        value: prev,
        gap,
        depth_reached: max_depth,
        converged: gap < tol,
        trace,
    })
}

/// Worst summation-condition residual at one depth:
/// max over parents of |sum_j 1/D*(w* j) - 1|.
pub fn check_summation(m: &LiftMap, depth: u32) -> Result<f64> {
    let table = DualDerivativeTable::compute(m, depth)?;
    Ok(summation_residual(&table))
}

pub fn summation_residual(table: &DualDerivativeTable) -> f64 {
    let d = table.degree as usize;
    let mut worst = 0.0f64;
    for chunk in table.values.chunks_exact(d) {
        let s: f64 = chunk.iter().map(|v| 1.0 / v).sum();
        worst = worst.max((s - 1.0).abs());
    }
    worst
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CompatibilityVerdict {
    ConvergingConstant,
    Diverging,
}

#[derive(Debug, Clone)]
pub struct CompatibilityWordReport {
    pub base: SymbolWord,
    /// partial products P_1 .. P_N
    pub partials: Vec<f64>,
    /// the N individual factors D*(w 0 1^i) / D*(w 1 0^i)
    pub terms: Vec<f64>,
}

#[derive(Debug, Clone)]
pub struct CompatibilityReport {
    pub terms: u32,
    pub depth: u32,
    pub per_word: Vec<CompatibilityWordReport>,
    /// max |P_N - P'_N| across base words
    pub spread: f64,
    pub verdict: CompatibilityVerdict,
    /// worst |last term - 1| across words, the divergence witness
    pub tail_deviation: f64,
}

/// Compatibility-condition check (degree 2 only): for each base word w*
/// form P_N = prod_{i<N} D*(w* 0 1^i) / D*(w* 1 0^i) with every factor
/// evaluated at its own full word depth, so numerator and denominator
/// always carry the same number of known trailing digits.
pub fn check_compatibility(m: &LiftMap, bases: &[SymbolWord], terms: u32) -> Result<CompatibilityReport> {
    if m.degree() != 2 {
        return Err(Error::DegreeTwoOnly(m.degree()));
    }
    if terms < 1 || bases.is_empty() {
        return Err(Error::InvalidParameter("need >= 1 term and >= 1 base word".into()));
    }
    let max_len = bases.iter().map(|b| b.len()).max().unwrap() + terms as usize;
    let levels = symbolic::partition_family(m, max_len as u32)?;
    // finite-depth value of a word at its own length
    let value_at = |word: &SymbolWord| -> f64 {
        let len = word.len();
        let k = word.index(2);
        levels[len - 1].length(k / 2) / levels[len].length(k)
    };

    let mut per_word = Vec::with_capacity(bases.len());
    let mut tail_dev = 0.0f64;
    for base in bases {
        let mut partials = Vec::with_capacity(terms as usize);
        let mut factors = Vec::with_capacity(terms as usize);
        let mut p = 1.0;
        for i in 0..terms as usize {
            let mut num = base.push_digit(0);
            let mut den = base.push_digit(1);
            for _ in 0..i {
                num = num.push_digit(1);
                den = den.push_digit(0);
            }
            let factor = value_at(&num) / value_at(&den);
            factors.push(factor);
            p *= factor;
            partials.push(p);
        }
        tail_dev = tail_dev.max((factors.last().unwrap() - 1.0).abs());
        per_word.push(CompatibilityWordReport { base: base.clone(), partials, terms: factors });
    }
    let finals: Vec<f64> = per_word.iter().map(|w| *w.partials.last().unwrap()).collect();
    let spread = finals.iter().fold(f64::NEG_INFINITY, |a, &b| a.max(b))
        - finals.iter().fold(f64::INFINITY, |a, &b| a.min(b));
    let verdict = if tail_dev <= 0.05 {
        CompatibilityVerdict::ConvergingConstant
    } else {
        CompatibilityVerdict::Diverging
    };
    Ok(CompatibilityReport { terms, depth: max_len as u32, per_word, spread, verdict, tail_deviation: tail_dev })
}

/// Solenoid value at a dual word ending in 1 (degree 2 only).
#[derive(Debug, Clone)]
pub struct SolenoidResult {
    /// one-step ratio D*(v* 0) / D*(v* 1) at the word's own depth
    pub ratio_form: f64,
    /// n-term product form: the solenoid value at v* 1 0^{n-1}
    pub product_form: f64,
    pub product_partials: Vec<f64>,
}

pub fn solenoid(m: &LiftMap, word: &SymbolWord, terms: u32) -> Result<SolenoidResult> {
    if m.degree() != 2 {
        return Err(Error::DegreeTwoOnly(m.degree()));
    }
    if word.is_empty() || word.dual_digit(0) != 1 {
        return Err(Error::InvalidParameter("solenoid words must end in digit 1".into()));
    }
    let prefix = word.dual_shift();
    let compat = check_compatibility(m, &[prefix.clone()], terms.max(1))?;
    let report = &compat.per_word[0];
    Ok(SolenoidResult {
        ratio_form: report.partials[0],
        product_form: *report.partials.last().unwrap(),
        product_partials: report.partials.clone(),
    })
}

/// Finite-depth maximum metric between two dual-derivative tables of equal
/// depth and degree: max over level words of |A - B|.
pub fn dmax_distance(a: &DualDerivativeTable, b: &DualDerivativeTable) -> Result<f64> {
    if a.degree != b.degree {
        return Err(Error::DegreeMismatch(a.degree, b.degree));
    }
    if a.depth != b.depth {
        return Err(Error::DepthMismatch(a.depth, b.depth));
    }
    Ok(a.values
        .iter()
        .zip(&b.values)
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max))
}
