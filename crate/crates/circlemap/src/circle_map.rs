//! Circle endomorphisms represented by their lifts on [0, 1].
//!
//! A degree-d lift F satisfies F(0) = 0, F(1) = d and extends to the real
//! line by F(x + 1) = F(x) + d. The periodicity is applied by reduction at
//! evaluation time and never stored. Inverse branches G_k(y) = F^{-1}(y + k)
//! are obtained by safeguarded bisection on the strictly monotone lift, with
//! a Newton polish for the closed-form kinds.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::grid::MonotoneCubic;
use crate::roots;
use crate::symbolic;

const TWO_PI: f64 = 2.0 * PI;

/// Default cap on d^n cells for level enumerations.
pub const DEFAULT_CELL_BUDGET: u64 = 1 << 22;

/// Smooth bump data for the entropy-degeneration family. The profile on
/// [-r, 0] is flat at 1/r, then a raised-cosine bump of amplitude `amp`,
/// then a raised-cosine ramp from 1/r down to 1/s on [-r^2, 0].
#[derive(Debug, Clone)]
pub struct FsParams {
    pub s: f64,
    pub r: f64,
    pub m_bound: f64,
    pub amp: f64,
}

impl FsParams {
    fn bump_window(&self) -> (f64, f64) {
        (-self.r / 2.0, -self.r * self.r)
    }

    /// Branch-derivative profile phi on [-r, s].
    pub fn phi(&self, x: f64) -> f64 {
        let (a, b) = self.bump_window();
        let (s, r) = (self.s, self.r);
        if x <= a {
            1.0 / r
        } else if x < b {
            let w = b - a;
            let t = (x - a) / w;
            1.0 / r + (self.amp - 1.0 / r) * 0.5 * (1.0 - (TWO_PI * t).cos())
        } else if x <= 0.0 {
            let t = if b < 0.0 { (x - b) / (0.0 - b) } else { 1.0 };
            1.0 / s + (1.0 / r - 1.0 / s) * 0.5 * (1.0 + (PI * t).cos())
        } else {
            1.0 / s
        }
    }

    /// Closed-form antiderivative: integral of phi over [-r, t], t in [-r, 0].
    pub fn phi_integral(&self, t: f64) -> f64 {
        let (a, b) = self.bump_window();
        let (s, r) = (self.s, self.r);
        let w = b - a;
        let seg1 = |t: f64| (t + r) / r;
        let seg2 = |t: f64| {
            let u = t - a;
            seg1(a) + u / r + (self.amp - 1.0 / r) * 0.5 * (u - (w / TWO_PI) * (TWO_PI * u / w).sin())
        };
        let seg2_end = if w > 0.0 { seg2(b) } else { seg1(a) };
        let seg3 = |t: f64| {
            let u = t - b;
            let rr = -b;
            seg2_end + u / s + (1.0 / r - 1.0 / s) * 0.5 * (u + (rr / PI) * (PI * u / rr).sin())
        };
        if t <= a {
            seg1(t)
        } else if t < b && w > 0.0 {
            seg2(t)
        } else {
            seg3(t)
        }
    }

    /// Inverse of the antiderivative on [0, 1] -> [-r, 0].
    pub fn phi_integral_inv(&self, y: f64) -> f64 {
        roots::solve_increasing_newton(
            |t| self.phi_integral(t),
            |t| self.phi(t),
            -self.r,
            0.0,
            y.clamp(0.0, 1.0),
        )
        .expect("phi integral is a bijection onto [0, 1]")
    }

    /// Left-branch inverse g_0(y) = y - r - PhiInv(y) on [0, 1] -> [0, s].
    fn g0(&self, y: f64) -> f64 {
        y - self.r - self.phi_integral_inv(y)
    }

    /// g_0'(y) = 1 - 1/phi, the left-branch mass of the Lebesgue splitting.
    fn g0_deriv(&self, y: f64) -> f64 {
        1.0 - 1.0 / self.phi(self.phi_integral_inv(y))
    }
}

#[derive(Debug, Clone)]
pub enum MapKind {
    /// F(x) = d x.
    Power,
    /// F(x) = d x + (eps / 2 pi) sin(2 pi x).
    TrigPerturbed { eps: f64 },
    /// Two-slope lift with breakpoint s: F(s) = 1.
    PiecewiseLinear { s: f64 },
    /// Lebesgue-preserving smoothing of the two-slope map (degree 2).
    FsSmooth(FsParams),
    /// Monotone piecewise-cubic interpolation of samples on [0, 1].
    Sampled(MonotoneCubic),
}

/// A circle endomorphism as an immutable lift. All evaluation paths are
/// pure, so sharing a `LiftMap` across workers needs no coordination.
#[derive(Debug, Clone)]
pub struct LiftMap {
    degree: u32,
    kind: MapKind,
}

impl LiftMap {
    pub fn power(d: u32) -> Result<Self> {
        check_degree(d)?;
        Ok(Self { degree: d, kind: MapKind::Power })
    }

    pub fn trig_perturbed(d: u32, eps: f64) -> Result<Self> {
        check_degree(d)?;
        if !eps.is_finite() || eps.abs() >= d as f64 - 1.0 {
            return Err(Error::InvalidParameter(format!(
                "trig-perturbed requires |eps| < d - 1 for expansion, got eps = {eps}"
            )));
        }
        Ok(Self { degree: d, kind: MapKind::TrigPerturbed { eps } })
    }

    pub fn piecewise_linear(s: f64) -> Result<Self> {
        if !(s > 0.0 && s < 1.0) {
            return Err(Error::InvalidParameter(format!("breakpoint s must lie in (0,1), got {s}")));
        }
        Ok(Self { degree: 2, kind: MapKind::PiecewiseLinear { s } })
    }

    /// Build the degree-2 smooth Lebesgue-preserving map for breakpoint s.
    /// The bump amplitude is the single scalar solved so the branch profile
    /// integrates to 1; it must stay within the ceiling M/r.
    pub fn fs_smooth(s: f64, m_bound: f64) -> Result<Self> {
        if !(s > 0.0 && s < 1.0) {
            return Err(Error::InvalidParameter(format!("breakpoint s must lie in (0,1), got {s}")));
        }
        if m_bound <= 1.0 {
            return Err(Error::InvalidParameter(format!("bump scale M must exceed 1, got {m_bound}")));
        }
        if s < 0.5 {
            return Err(Error::InfeasibleConstraint(format!(
                "s = {s} < 1/2 makes the ramp ceiling 1/r smaller than its floor 1/s"
            )));
        }
        let r = 1.0 - s;
        let mut params = FsParams { s, r, m_bound, amp: 1.0 / r };
        let (a, b) = params.bump_window();
        let w = b - a;
        if w > 1e-300 {
            // integral is affine in amp: solve I(amp) = 1 from one probe
            let base = params.phi_integral(0.0);
            params.amp = 1.0 / r + (1.0 - base) * 2.0 / w;
        }
        if params.amp < 1.0 / r - 1e-12 || params.amp > m_bound / r + 1e-12 {
            return Err(Error::InfeasibleConstraint(format!(
                "bump amplitude {} exceeds ceiling M/r = {}",
                params.amp,
                m_bound / r
            )));
        }
        let total = params.phi_integral(0.0);
        if (total - 1.0).abs() > 1e-12 {
            return Err(Error::InfeasibleConstraint(format!(
                "branch profile mass {total} != 1 after amplitude solve"
            )));
        }
        Ok(Self { degree: 2, kind: MapKind::FsSmooth(params) })
    }

    /// Monotone-interpolated lift from samples (x, F(x)) on [0, 1] with
    /// F(0) = 0 and F(1) = d pinned to 1e-12.
    pub fn sampled(d: u32, xs: Vec<f64>, ys: Vec<f64>) -> Result<Self> {
        check_degree(d)?;
        if xs.len() < 3 {
            return Err(Error::InvalidParameter("sampled lift needs at least 3 samples".into()));
        }
        if xs[0].abs() > 1e-12 || (xs.last().unwrap() - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidParameter("sample grid must span [0, 1]".into()));
        }
        if ys[0].abs() > 1e-12 || (ys.last().unwrap() - d as f64).abs() > 1e-12 {
            return Err(Error::InvalidParameter(format!("samples must satisfy F(0) = 0, F(1) = {d}")));
        }
        let cubic = MonotoneCubic::new(xs, ys)?;
        // construction-time monotonicity sweep on the evaluation grid
        let mut prev = cubic.eval(0.0);
        for i in 1..=4096 {
            let v = cubic.eval(i as f64 / 4096.0);
            if v <= prev {
                return Err(Error::NonMonotone(i));
            }
            prev = v;
        }
        Ok(Self { degree: d, kind: MapKind::Sampled(cubic) })
    }

    pub fn degree(&self) -> u32 {
        self.degree
    }

    pub fn kind(&self) -> &MapKind {
        &self.kind
    }

    pub fn kind_name(&self) -> &'static str {
        match self.kind {
            MapKind::Power => "power",
            MapKind::TrigPerturbed { .. } => "trig-perturbed",
            MapKind::PiecewiseLinear { .. } => "piecewise-linear",
            MapKind::FsSmooth(_) => "fs-smooth",
            MapKind::Sampled(_) => "sampled",
        }
    }

    pub fn has_branch_derivative(&self) -> bool {
        matches!(
            self.kind,
            MapKind::Power | MapKind::TrigPerturbed { .. } | MapKind::FsSmooth(_) | MapKind::Sampled(_)
        )
    }

    /// F on [0, 1] (image [0, d]).
    pub fn eval01(&self, x: f64) -> f64 {
        let d = self.degree as f64;
        match &self.kind {
            MapKind::Power => d * x,
            MapKind::TrigPerturbed { eps } => d * x + (eps / TWO_PI) * (TWO_PI * x).sin(),
            MapKind::PiecewiseLinear { s } => {
                if x <= *s {
                    x / s
                } else {
                    1.0 + (x - s) / (1.0 - s)
                }
            }
            MapKind::FsSmooth(p) => {
                if x >= p.s {
                    1.0 + p.phi_integral(x - 1.0)
                } else {
                    // invert g_0 on [0, 1]
                    roots::solve_increasing_newton(|y| p.g0(y), |y| p.g0_deriv(y), 0.0, 1.0, x)
                        .expect("g0 is a bijection onto [0, s]")
                }
            }
            MapKind::Sampled(c) => c.eval(x),
        }
    }

    /// Lift on the whole line: F(x) = F(frac x) + d floor(x).
    pub fn eval(&self, x: f64) -> f64 {
        let q = x.floor();
        self.eval01(x - q) + self.degree as f64 * q
    }

    /// Branch derivative F'(x) reduced mod 1; right-continuous value at
    /// breakpoints. Errors for the piecewise-linear kind whose derivative
    /// jumps; use [`LiftMap::derivative_sides`] there.
    pub fn derivative(&self, x: f64) -> Result<f64> {
        if !self.has_branch_derivative() {
            return Err(Error::NoDerivative);
        }
        Ok(self.derivative_sides(x).1)
    }

    /// One-sided derivatives (left, right) at frac(x).
    pub fn derivative_sides(&self, x: f64) -> (f64, f64) {
        let d = self.degree as f64;
        let u = x - x.floor();
        match &self.kind {
            MapKind::Power => (d, d),
            MapKind::TrigPerturbed { eps } => {
                let v = d + eps * (TWO_PI * u).cos();
                (v, v)
            }
            MapKind::PiecewiseLinear { s } => {
                let lo = 1.0 / s;
                let hi = 1.0 / (1.0 - s);
                if u == 0.0 {
                    (hi, lo)
                } else if u < *s {
                    (lo, lo)
                } else if u == *s {
                    (lo, hi)
                } else {
                    (hi, hi)
                }
            }
            MapKind::FsSmooth(p) => {
                let v = if u >= p.s {
                    p.phi(u - 1.0)
                } else {
                    1.0 / p.g0_deriv(self.eval01(u))
                };
                (v, v)
            }
            MapKind::Sampled(c) => {
                let v = c.derivative(u);
                (v, v)
            }
        }
    }

    /// F^{-1} on [0, d] -> [0, 1].
    pub fn inverse01(&self, t: f64) -> f64 {
        let d = self.degree as f64;
        let t = t.clamp(0.0, d);
        match &self.kind {
            MapKind::Power => t / d,
            MapKind::TrigPerturbed { eps } => roots::solve_increasing_newton(
                |x| d * x + (eps / TWO_PI) * (TWO_PI * x).sin(),
                |x| d + eps * (TWO_PI * x).cos(),
                0.0,
                1.0,
                t,
            )
            .expect("trig lift is strictly increasing"),
            MapKind::PiecewiseLinear { s } => {
                if t <= 1.0 {
                    t * s
                } else {
                    s + (t - 1.0) * (1.0 - s)
                }
            }
            MapKind::FsSmooth(p) => {
                if t <= 1.0 {
                    p.g0(t)
                } else {
                    1.0 + p.phi_integral_inv(t - 1.0)
                }
            }
            MapKind::Sampled(c) => {
                roots::solve_increasing_newton(|x| c.eval(x), |x| c.derivative(x), 0.0, 1.0, t)
                    .expect("sampled lift validated strictly increasing")
            }
        }
    }

    /// F^{-1} on the whole line via F^{-1}(t + d) = F^{-1}(t) + 1.
    pub fn inverse(&self, t: f64) -> f64 {
        let d = self.degree as f64;
        let q = (t / d).floor();
        q + self.inverse01(t - q * d)
    }

    /// Inverse branch G_k(y) = F^{-1}(y + k), y in [0, 1].
    pub fn inverse_branch(&self, k: u32, y: f64) -> Result<f64> {
        if k >= self.degree {
            return Err(Error::DigitOutOfRange { digit: k as u8, degree: self.degree });
        }
        if !(0.0..=1.0).contains(&y) {
            return Err(Error::InvalidParameter(format!("branch argument y = {y} outside [0, 1]")));
        }
        Ok(self.inverse01(y + k as f64))
    }

    /// n-fold inverse iterate of a real point.
    pub fn inverse_iterate(&self, x: f64, n: u32) -> f64 {
        let mut y = x;
        for _ in 0..n {
            y = self.inverse(y);
        }
        y
    }

    /// Level-n expansion diagnostics from the Markov partition.
    pub fn expansion_report(&self, n: u32) -> Result<ExpansionReport> {
        let level = symbolic::partition_endpoints(self, n)?;
        let iota = level.lengths().iter().copied().fold(0.0, f64::max);
        let lambda = iota.powf(-1.0 / n as f64);
        Ok(ExpansionReport { depth: n, iota, lambda, expanding: lambda > 1.0 })
    }

    /// Empirical uniform-symmetry modulus: for each scale t the sup over
    /// sampled x and inverse depths n <= n_max of |three-point ratio - 1|.
    pub fn symmetry_modulus(&self, n_max: u32, scales: &[f64]) -> Result<ModulusReport> {
        if n_max < 1 {
            return Err(Error::InvalidParameter("n_max must be >= 1".into()));
        }
        let mut ts: Vec<f64> = scales.to_vec();
        for &t in &ts {
            if !(t > 0.0 && t <= 1.0) {
                return Err(Error::InvalidParameter(format!("scale t = {t} outside (0, 1]")));
            }
        }
        ts.sort_by(|a, b| b.partial_cmp(a).unwrap());
        ts.dedup();
        let xs: Vec<f64> = (0..64).map(|i| i as f64 / 64.0).collect();
        let mut entries = Vec::with_capacity(ts.len());
        for &t in &ts {
            let mut sup = 0.0f64;
            for &x in &xs {
                let (mut p, mut q, mut rr) = (x + t, x, x - t);
                for _ in 0..n_max {
                    p = self.inverse(p);
                    q = self.inverse(q);
                    rr = self.inverse(rr);
                    let ratio = (p - q) / (q - rr);
                    sup = sup.max((ratio - 1.0).abs());
                }
            }
            entries.push(ModulusEntry { t, sup_deviation: sup });
        }
        let omega = if self.has_branch_derivative() {
            Some(
                ts.iter()
                    .map(|&t| {
                        let m = 512;
                        let mut w = 0.0f64;
                        let steps = ((t * m as f64).ceil() as usize).max(1);
                        for i in 0..m {
                            let x = i as f64 / m as f64;
                            let fx = self.derivative_sides(x).1;
                            for j in 1..=steps {
                                let y = x + j as f64 / m as f64;
                                if y - x > t {
                                    break;
                                }
                                w = w.max((fx - self.derivative_sides(y).1).abs());
                            }
                        }
                        (t, w)
                    })
                    .collect(),
            )
        } else {
            None
        };
        Ok(ModulusReport { depth: n_max, entries, derivative_modulus: omega })
    }
}

fn check_degree(d: u32) -> Result<()> {
    if d < 2 {
        return Err(Error::InvalidParameter(format!("degree must be >= 2, got {d}")));
    }
    Ok(())
}

#[derive(Debug, Clone, Copy)]
pub struct ExpansionReport {
    pub depth: u32,
    /// max level-n interval length
    pub iota: f64,
    /// iota^{-1/n}, the per-level expansion estimate
    pub lambda: f64,
    pub expanding: bool,
}

#[derive(Debug, Clone, Copy)]
pub struct ModulusEntry {
    pub t: f64,
    pub sup_deviation: f64,
}

#[derive(Debug, Clone)]
pub struct ModulusReport {
    pub depth: u32,
    /// scales in strictly decreasing order
    pub entries: Vec<ModulusEntry>,
    /// empirical modulus of continuity of F' at each scale, when F' exists
    pub derivative_modulus: Option<Vec<(f64, f64)>>,
}
