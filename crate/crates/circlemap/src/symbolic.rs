//! Words, cylinders, Markov partition levels, point coding, and the dual
//! metric.
//!
//! A word is stored most-significant-first: the digit string i_0 .. i_{n-1}
//! labels the interval I_w = G_{i_0}(... G_{i_{n-1}}([0,1])). Read
//! right-to-left the same storage is the dual word j_{n-1} .. j_0 with
//! j_k = i_{n-1-k}; the left shift drops the first stored digit and the
//! right shift drops the last. The numeric index of a word is its base-d
//! value, which equals the integer m with I_w = F^{-n}([m, m+1]).

use crate::circle_map::{LiftMap, DEFAULT_CELL_BUDGET};
use crate::error::{Error, Result};

/// Finite word over {0, .., d-1}, most-significant digit first.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct SymbolWord {
    digits: Vec<u8>,
}

impl SymbolWord {
    pub fn new(digits: Vec<u8>, degree: u32) -> Result<Self> {
        for &g in &digits {
            if u32::from(g) >= degree {
                return Err(Error::DigitOutOfRange { digit: g, degree });
            }
        }
        Ok(Self { digits })
    }

    pub fn empty() -> Self {
        Self { digits: Vec::new() }
    }

    /// Parse a digit string such as "0121".
    pub fn parse(s: &str, degree: u32) -> Result<Self> {
        let mut digits = Vec::with_capacity(s.len());
        for c in s.chars() {
            let g = c
                .to_digit(10)
                .ok_or_else(|| Error::Parse(format!("bad word digit {c:?}")))? as u8;
            digits.push(g);
        }
        Self::new(digits, degree)
    }

    /// Word of length `len` whose index is `index` (base-d expansion).
    pub fn from_index(index: u64, len: u32, degree: u32) -> Self {
        let mut digits = vec![0u8; len as usize];
        let mut m = index;
        for slot in digits.iter_mut().rev() {
            *slot = (m % degree as u64) as u8;
            m /= degree as u64;
        }
        Self { digits }
    }

    pub fn digits(&self) -> &[u8] {
        &self.digits
    }

    pub fn len(&self) -> usize {
        self.digits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.digits.is_empty()
    }

    /// Base-d numeric value; equals the integer m with I_w = F^{-n}([m, m+1]).
    pub fn index(&self, degree: u32) -> u64 {
        self.digits
            .iter()
            .fold(0u64, |acc, &g| acc * degree as u64 + g as u64)
    }

    /// Dual digit j_k (k-th from the right).
    pub fn dual_digit(&self, k: usize) -> u8 {
        self.digits[self.digits.len() - 1 - k]
    }

    /// Digit string reversed in place: maps a left-read word to the
    /// right-read word with the same dual digits and back.
    pub fn reversed(&self) -> Self {
        let mut digits = self.digits.clone();
        digits.reverse();
        Self { digits }
    }

    /// Left shift (drop i_0).
    pub fn shift(&self) -> Self {
        Self { digits: self.digits[1..].to_vec() }
    }

    /// Right shift (drop j_0 = last stored digit).
    pub fn dual_shift(&self) -> Self {
        Self { digits: self.digits[..self.digits.len() - 1].to_vec() }
    }

    /// Append a digit at the deep end (new j_0).
    pub fn push_digit(&self, g: u8) -> Self {
        let mut digits = self.digits.clone();
        digits.push(g);
        Self { digits }
    }

    /// Pad with zeros on the dual-left (prepend stored zeros) to `len`.
    pub fn zero_padded(&self, len: usize) -> Self {
        if self.digits.len() >= len {
            return self.clone();
        }
        let mut digits = vec![0u8; len - self.digits.len()];
        digits.extend_from_slice(&self.digits);
        Self { digits }
    }
}

impl std::fmt::Display for SymbolWord {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        for g in &self.digits {
            write!(f, "{g}")?;
        }
        Ok(())
    }
}

/// d(w*, v*) = sum_k |j_k - j'_k| / d^k over represented digits, shorter
/// word padded with zeros on the dual-left.
pub fn dual_metric(u: &SymbolWord, v: &SymbolWord, degree: u32) -> f64 {
    let len = u.len().max(v.len());
    let up = u.zero_padded(len);
    let vp = v.zero_padded(len);
    let mut acc = 0.0;
    let mut weight = 1.0;
    for k in 0..len {
        acc += (up.dual_digit(k) as f64 - vp.dual_digit(k) as f64).abs() * weight;
        weight /= degree as f64;
    }
    acc
}

/// All endpoints of the level-n Markov partition in circle order:
/// e[m] = F^{-n}(m) for m = 0 ..= d^n, together with the interval lengths.
///
/// Lengths are carried separately so that kinds with affine branches
/// (power, piecewise-linear) get them as exact slope products instead of
/// differences of nearby endpoints; parents obtained by [`PartitionLevel::parent`]
/// sum their children, so telescoping identities hold to roundoff.
#[derive(Debug, Clone)]
pub struct PartitionLevel {
    depth: u32,
    degree: u32,
    endpoints: Vec<f64>,
    lengths: Vec<f64>,
}

impl PartitionLevel {
    pub fn depth(&self) -> u32 {
        self.depth
    }

    pub fn degree(&self) -> u32 {
        self.degree
    }

    pub fn endpoints(&self) -> &[f64] {
        &self.endpoints
    }

    pub fn cells(&self) -> usize {
        self.endpoints.len() - 1
    }

    /// Interval of the word with the given index at this depth.
    pub fn interval(&self, index: u64) -> (f64, f64) {
        (self.endpoints[index as usize], self.endpoints[index as usize + 1])
    }

    pub fn length(&self, index: u64) -> f64 {
        self.lengths[index as usize]
    }

    pub fn lengths(&self) -> &[f64] {
        &self.lengths
    }

    /// Parent level: endpoints are the exact stride-d subsample, lengths
    /// the sums of the d children, so children telescope bitwise.
    pub fn parent(&self) -> PartitionLevel {
        assert!(self.depth > 0, "level 0 has no parent");
        let endpoints = self.endpoints.iter().copied().step_by(self.degree as usize).collect();
        let lengths = self
            .lengths
            .chunks_exact(self.degree as usize)
            .map(|c| c.iter().sum())
            .collect();
        PartitionLevel { depth: self.depth - 1, degree: self.degree, endpoints, lengths }
    }

    /// CSV rows (word, left, right, length) in lexicographic word order.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("word,left,right,length\n");
        for m in 0..self.cells() as u64 {
            let w = SymbolWord::from_index(m, self.depth, self.degree);
            let (a, b) = self.interval(m);
            out.push_str(&format!("{w},{a:.17},{b:.17},{:.17}\n", self.length(m)));
        }
        out
    }
}

fn check_budget(degree: u32, depth: u32, budget: u64) -> Result<()> {
    let mut cells = 1u64;
    for _ in 0..depth {
        cells = cells
            .checked_mul(degree as u64)
            .filter(|&c| c <= budget)
            .ok_or(Error::DepthBudget { requested: depth, budget })?;
    }
    Ok(())
}

/// Compute level-n endpoints by the leading-digit recursion
/// e_{k+1}[c d^k + i] = G_c(e_k[i]).
pub fn partition_endpoints(m: &LiftMap, depth: u32) -> Result<PartitionLevel> {
    partition_endpoints_budget(m, depth, DEFAULT_CELL_BUDGET)
}

pub fn partition_endpoints_budget(m: &LiftMap, depth: u32, budget: u64) -> Result<PartitionLevel> {
    let d = m.degree();
    check_budget(d, depth, budget)?;
    // branch contraction factors, constant exactly when every inverse
    // branch is affine on [0, 1]
    let affine_slopes: Option<Vec<f64>> = match m.kind() {
        crate::circle_map::MapKind::Power => Some(vec![1.0 / d as f64; d as usize]),
        crate::circle_map::MapKind::PiecewiseLinear { s } => Some(vec![*s, 1.0 - s]),
        _ => None,
    };
    if matches!(m.kind(), crate::circle_map::MapKind::Power) {
        // closed form F^{-n}(k) = k / d^n avoids n nested roundings
        let cells = (d as u64).pow(depth);
        let scale = cells as f64;
        let endpoints: Vec<f64> = (0..=cells).map(|k| k as f64 / scale).collect();
        let lengths = affine_lengths(&affine_slopes.unwrap(), depth);
        return Ok(PartitionLevel { depth, degree: d, endpoints, lengths });
    }
    let mut e = vec![0.0, 1.0];
    for _ in 0..depth {
        let mut next = Vec::with_capacity((e.len() - 1) * d as usize + 1);
        for c in 0..d {
            let skip = usize::from(c > 0);
            for &y in &e[skip..] {
                next.push(m.inverse01(y + c as f64));
            }
        }
        e = next;
    }
    let lengths = match affine_slopes {
        Some(slopes) => affine_lengths(&slopes, depth),
        None => e.windows(2).map(|w| w[1] - w[0]).collect(),
    };
    Ok(PartitionLevel { depth, degree: d, endpoints: e, lengths })
}

/// Level-n lengths as exact products of constant branch contractions:
/// len_{k+1}[c d^k + i] = slope_c * len_k[i].
fn affine_lengths(slopes: &[f64], depth: u32) -> Vec<f64> {
    let mut lengths = vec![1.0f64];
    for _ in 0..depth {
        let mut next = Vec::with_capacity(lengths.len() * slopes.len());
        for &s in slopes {
            next.extend(lengths.iter().map(|&l| s * l));
        }
        lengths = next;
    }
    lengths
}

/// Levels 0..=n derived from a single deep enumeration by exact
/// subsampling, so child lengths telescope to their parents bitwise.
pub fn partition_family(m: &LiftMap, depth: u32) -> Result<Vec<PartitionLevel>> {
    let deepest = partition_endpoints(m, depth)?;
    let mut levels = Vec::with_capacity(depth as usize + 1);
    levels.push(deepest);
    for _ in 0..depth {
        let next = levels.last().unwrap().parent();
        levels.push(next);
    }
    levels.reverse();
    Ok(levels)
}

/// I_w = G_{i_0}( ... G_{i_{n-1}}([0,1])), evaluated inside-out with O(n)
/// root solves and no level storage.
pub fn interval_for_word(m: &LiftMap, word: &SymbolWord) -> Result<(f64, f64)> {
    let d = m.degree();
    let (mut a, mut b) = (0.0f64, 1.0f64);
    for &g in word.digits().iter().rev() {
        if u32::from(g) >= d {
            return Err(Error::DigitOutOfRange { digit: g, degree: d });
        }
        a = m.inverse01(a + g as f64);
        b = m.inverse01(b + g as f64);
    }
    Ok((a, b))
}

/// Itinerary of x under the lift: digit k is the branch cell of F^k(x).
/// Partition endpoints are assigned to the cell on their right.
pub fn encode_point(m: &LiftMap, x: f64, depth: u32) -> Result<SymbolWord> {
    if !(0.0..1.0).contains(&x) {
        return Err(Error::InvalidParameter(format!("point {x} outside [0, 1)")));
    }
    let d = m.degree();
    let mut digits = Vec::with_capacity(depth as usize);
    let mut y = x;
    for _ in 0..depth {
        let fy = m.eval01(y);
        let cell = (fy.floor() as i64).clamp(0, d as i64 - 1) as u8;
        digits.push(cell);
        y = fy - cell as f64;
        // guard roundoff drift out of the fundamental domain
        y = y.clamp(0.0, 1.0);
        if y == 1.0 {
            y = 0.0;
        }
    }
    SymbolWord::new(digits, d)
}

/// Nearby-geometry constants at one level: the worst adjacent-interval
/// ratio (mod 1) and the worst child/parent ratio.
#[derive(Debug, Clone, Copy)]
pub struct GeometryReport {
    pub depth: u32,
    /// max over adjacent same-level intervals of |I'| / |I|
    pub adjacent_ratio: f64,
    /// min over children of |L| / |I|
    pub child_parent_ratio: f64,
}

pub fn bounded_geometry_report(m: &LiftMap, depth: u32) -> Result<GeometryReport> {
    let level = partition_endpoints(m, depth)?;
    let parent = level.parent();
    let d = m.degree() as usize;
    let lens: Vec<f64> = level.lengths().to_vec();
    let mut adj = 1.0f64;
    let n = lens.len();
    for i in 0..n {
        let j = (i + 1) % n; // wrap pairs share an endpoint mod 1
        let r = lens[j] / lens[i];
        adj = adj.max(r).max(1.0 / r);
    }
    let mut cp = f64::INFINITY;
    if depth > 0 {
        for (i, &len) in lens.iter().enumerate() {
            cp = cp.min(len / parent.length((i / d) as u64));
        }
    } else {
        cp = 1.0;
    }
    Ok(GeometryReport { depth, adjacent_ratio: adj, child_parent_ratio: cp })
}
