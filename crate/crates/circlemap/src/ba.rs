//! Beurling-Ahlfors extension of a line homeomorphism and its Beltrami
//! coefficient, from closed-form window integrals.
//!
//! Grid homeomorphisms are stored piecewise-linear between knots, so the
//! cumulative integrals entering L' and R' are exact antiderivatives, not
//! quadrature. The ratios a, b, c are computed from L, R, L', R' directly;
//! see `beltrami_at`.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::grid::GridHomeomorphism;

/// Increasing homeomorphism of the real line with an exact integral.
#[derive(Debug, Clone)]
pub enum LineMap {
    Identity,
    /// x -> slope x + offset, slope > 0
    Affine { slope: f64, offset: f64 },
    /// piecewise-linear through knots, extended by the end-segment slopes
    PiecewiseLinear { xs: Vec<f64>, ys: Vec<f64>, cum: Vec<f64> },
    /// periodic lift H(x + 1) = H(x) + 1 of a [0,1] homeomorphism
    PeriodicLift { knots: GridHomeomorphism, cum: Vec<f64>, unit_mass: f64 },
}

impl LineMap {
    pub fn affine(slope: f64, offset: f64) -> Result<Self> {
        if slope <= 0.0 {
            return Err(Error::InvalidParameter("affine slope must be positive".into()));
        }
        Ok(LineMap::Affine { slope, offset })
    }

    pub fn piecewise_linear(xs: Vec<f64>, ys: Vec<f64>) -> Result<Self> {
        if xs.len() != ys.len() || xs.len() < 2 {
            return Err(Error::InvalidParameter("need >= 2 knots".into()));
        }
        for (i, w) in xs.windows(2).enumerate() {
            if w[1] <= w[0] {
                return Err(Error::NonMonotone(i + 1));
            }
        }
        for (i, w) in ys.windows(2).enumerate() {
            if w[1] <= w[0] {
                return Err(Error::NonMonotone(i + 1));
            }
        }
        let cum = trapezoid_cumulative(&xs, &ys);
        Ok(LineMap::PiecewiseLinear { xs, ys, cum })
    }

    /// The two-slope benchmark map H(x) = 2x for x < 0, x for x >= 0.
    pub fn two_slope() -> Self {
        LineMap::piecewise_linear(vec![-1.0, 0.0, 1.0], vec![-2.0, 0.0, 1.0]).unwrap()
    }

    pub fn periodic_lift(knots: GridHomeomorphism) -> Result<Self> {
        let (d0, d1) = knots.domain();
        let (r0, r1) = knots.range();
        if d0 != 0.0 || (d1 - 1.0).abs() > 1e-12 || r0 != 0.0 || (r1 - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidParameter("periodic lift needs knots on [0,1] with pinned endpoints".into()));
        }
        let (xs, ys) = knots.knots();
        let cum = trapezoid_cumulative(xs, ys);
        let unit_mass = *cum.last().unwrap();
        Ok(LineMap::PeriodicLift { knots, cum, unit_mass })
    }

    pub fn eval(&self, x: f64) -> f64 {
        match self {
            LineMap::Identity => x,
            LineMap::Affine { slope, offset } => slope * x + offset,
            LineMap::PiecewiseLinear { xs, ys, .. } => {
                let n = xs.len();
                if x <= xs[0] {
                    let s = (ys[1] - ys[0]) / (xs[1] - xs[0]);
                    ys[0] + s * (x - xs[0])
                } else if x >= xs[n - 1] {
                    let s = (ys[n - 1] - ys[n - 2]) / (xs[n - 1] - xs[n - 2]);
                    ys[n - 1] + s * (x - xs[n - 1])
                } else {
                    let i = segment(xs, x);
                    let t = (x - xs[i]) / (xs[i + 1] - xs[i]);
                    ys[i] * (1.0 - t) + ys[i + 1] * t
                }
            }
            LineMap::PeriodicLift { knots, .. } => knots.eval_lifted(x),
        }
    }

    /// Exact integral of H over [a, b] (sign-aware).
    pub fn integral(&self, a: f64, b: f64) -> f64 {
        self.antiderivative(b) - self.antiderivative(a)
    }

    /// Antiderivative with an arbitrary fixed base point.
    fn antiderivative(&self, x: f64) -> f64 {
        match self {
            LineMap::Identity => 0.5 * x * x,
            LineMap::Affine { slope, offset } => 0.5 * slope * x * x + offset * x,
            LineMap::PiecewiseLinear { xs, ys, cum } => {
                let n = xs.len();
                if x <= xs[0] {
                    let s = (ys[1] - ys[0]) / (xs[1] - xs[0]);
                    let u = x - xs[0];
                    ys[0] * u + 0.5 * s * u * u
                } else if x >= xs[n - 1] {
                    let s = (ys[n - 1] - ys[n - 2]) / (xs[n - 1] - xs[n - 2]);
                    let u = x - xs[n - 1];
                    cum[n - 1] + ys[n - 1] * u + 0.5 * s * u * u
                } else {
                    let i = segment(xs, x);
                    let u = x - xs[i];
                    let s = (ys[i + 1] - ys[i]) / (xs[i + 1] - xs[i]);
                    cum[i] + ys[i] * u + 0.5 * s * u * u
                }
            }
            LineMap::PeriodicLift { knots, cum, unit_mass } => {
                let m = x.floor();
                let u = x - m;
                let (xs, ys) = knots.knots();
                let partial = {
                    if u == 0.0 {
                        0.0
                    } else {
                        let i = segment(xs, u);
                        let du = u - xs[i];
                        let s = (ys[i + 1] - ys[i]) / (xs[i + 1] - xs[i]);
                        cum[i] + ys[i] * du + 0.5 * s * du * du
                    }
                };
                // integral of floor(s) over [0, x] plus periodic part
                0.5 * m * (m - 1.0) + m * u + m * unit_mass + partial
            }
        }
    }
}

fn segment(xs: &[f64], x: f64) -> usize {
    match xs.binary_search_by(|v| v.partial_cmp(&x).unwrap()) {
        Ok(i) => i.min(xs.len() - 2),
        Err(i) => (i - 1).min(xs.len() - 2),
    }
}

fn trapezoid_cumulative(xs: &[f64], ys: &[f64]) -> Vec<f64> {
    let mut cum = Vec::with_capacity(xs.len());
    cum.push(0.0);
    for i in 1..xs.len() {
        let area = 0.5 * (ys[i] + ys[i - 1]) * (xs[i] - xs[i - 1]);
        cum.push(cum[i - 1] + area);
    }
    cum
}

/// The extension point H~(z) = U + iV and every intermediate quantity of
/// its dilatation, retained for audit.
#[derive(Debug, Clone, Copy)]
pub struct BeltramiSample {
    pub x: f64,
    pub y: f64,
    pub u: f64,
    pub v: f64,
    pub l: f64,
    pub r: f64,
    pub l_prime: f64,
    pub r_prime: f64,
    pub rho: f64,
    pub rho_plus: f64,
    pub rho_minus: f64,
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub k: Complex64,
    pub mu: Complex64,
}

/// U(x, y) = (1/2y) int_{x-y}^{x+y} H,
/// V(x, y) = (1/y) [int_x^{x+y} H - int_{x-y}^x H].
pub fn extend_at(h: &LineMap, x: f64, y: f64) -> Result<(f64, f64)> {
    if y <= 0.0 {
        return Err(Error::InvalidParameter(format!("extension needs y > 0, got {y}")));
    }
    let left = h.integral(x - y, x);
    let right = h.integral(x, x + y);
    Ok(((left + right) / (2.0 * y), (right - left) / y))
}

/// Window quantities and complex dilatation at z = x + iy. The ratios are
/// assembled from L, R, L', R' via the partial-derivative identities
/// U_x = (R+L)/2y, V_x = (R-L)/y, V_y = (R+L-R'-L')/y,
/// U_y = (R-L-R'+L')/2y; the identity map then gives a = c = 0, b = 1
/// exactly, which the collapsed printed ratio form does not.
pub fn beltrami_at(h: &LineMap, x: f64, y: f64) -> Result<BeltramiSample> {
    if y <= 0.0 {
        return Err(Error::InvalidParameter(format!("extension needs y > 0, got {y}")));
    }
    let hx = h.eval(x);
    let l = hx - h.eval(x - y);
    let r = h.eval(x + y) - hx;
    let l_prime = hx - h.integral(x - y, x) / y;
    let r_prime = h.integral(x, x + y) / y - hx;
    let (u, v) = extend_at(h, x, y)?;

    let u_x = (r + l) / (2.0 * y);
    if u_x <= 0.0 {
        return Err(Error::InvalidParameter(format!(
            "U_x = {u_x} <= 0 at ({x}, {y}); increasing H cannot produce this"
        )));
    }
    let v_x = (r - l) / y;
    let v_y = (r + l - r_prime - l_prime) / y;
    let u_y = (r - l - r_prime + l_prime) / (2.0 * y);

    let a = v_x / u_x;
    let b = v_y / u_x;
    let c = u_y / u_x;
    let k = Complex64::new(1.0, a) / Complex64::new(b, -c);
    let mu = (k - 1.0) / (k + 1.0);

    Ok(BeltramiSample {
        x,
        y,
        u,
        v,
        l,
        r,
        l_prime,
        r_prime,
        rho: r / l,
        rho_plus: r_prime / l,
        rho_minus: l_prime / r,
        a,
        b,
        c,
        k,
        mu,
    })
}

/// Skew quasisymmetric distortion
/// rho(x, y, k) = (H(x + ky) - H(x)) / (H(x) - H(x - y)); the same formula
/// serves y < 0.
pub fn skew_rho(h: &LineMap, x: f64, y: f64, k: f64) -> Result<f64> {
    if y == 0.0 {
        return Err(Error::InvalidParameter("skew rho needs y != 0".into()));
    }
    if !(k > 0.0 && k <= 1.0) {
        return Err(Error::InvalidParameter(format!("skew rho needs 0 < k <= 1, got {k}")));
    }
    let den = h.eval(x) - h.eval(x - y);
    if den == 0.0 {
        return Err(Error::ZeroDenominator(x));
    }
    Ok((h.eval(x + k * y) - h.eval(x)) / den)
}

/// Per-height sup of |mu| over the sampled x values.
pub fn vanishing_profile(h: &LineMap, heights: &[f64], xs: &[f64]) -> Result<Vec<(f64, f64)>> {
    heights
        .iter()
        .map(|&y| {
            let mut sup = 0.0f64;
            for &x in xs {
                sup = sup.max(beltrami_at(h, x, y)?.mu.norm());
            }
            Ok((y, sup))
        })
        .collect()
}

/// Per-height sup of |mu_0 - mu_1| for two extensions.
pub fn difference_profile(
    h0: &LineMap,
    h1: &LineMap,
    heights: &[f64],
    xs: &[f64],
) -> Result<Vec<(f64, f64)>> {
    heights
        .iter()
        .map(|&y| {
            let mut sup = 0.0f64;
            for &x in xs {
                let m0 = beltrami_at(h0, x, y)?.mu;
                let m1 = beltrami_at(h1, x, y)?.mu;
                sup = sup.max((m0 - m1).norm());
            }
            Ok((y, sup))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identity_extension_is_identity() {
        let h = LineMap::Identity;
        let (u, v) = extend_at(&h, 0.3, 0.2).unwrap();
        assert!((u - 0.3).abs() < 1e-15 && (v - 0.2).abs() < 1e-15);
        let s = beltrami_at(&h, 0.3, 0.2).unwrap();
        assert!(s.mu.norm() < 1e-15);
        assert!((s.b - 1.0).abs() < 1e-15 && s.a.abs() < 1e-15 && s.c.abs() < 1e-15);
    }

    #[test]
    fn affine_extension_scales() {
        let h = LineMap::affine(2.0, 0.0).unwrap();
        for &(x, y) in &[(0.1, 0.4), (-1.2, 0.03)] {
            let (u, v) = extend_at(&h, x, y).unwrap();
            assert!((u - 2.0 * x).abs() < 1e-13 && (v - 2.0 * y).abs() < 1e-13);
            assert!(beltrami_at(&h, x, y).unwrap().mu.norm() < 1e-13);
        }
    }

    #[test]
    fn two_slope_closed_forms() {
        // U(iy) = -y/4, V(iy) = 3y/2, mu(iy) = (5 - 20i)/51
        let h = LineMap::two_slope();
        for &y in &[0.1, 0.25, 0.6] {
            let (u, v) = extend_at(&h, 0.0, y).unwrap();
            assert!((u + y / 4.0).abs() < 1e-13, "U = {u}");
            assert!((v - 1.5 * y).abs() < 1e-13, "V = {v}");
            let s = beltrami_at(&h, 0.0, y).unwrap();
            let want = Complex64::new(5.0 / 51.0, -20.0 / 51.0);
            assert!((s.mu - want).norm() < 1e-12, "mu = {}", s.mu);
            assert!((s.mu.norm() - (425f64).sqrt() / 51.0).abs() < 1e-12);
            assert!(s.b > 0.0);
        }
    }

    #[test]
    fn two_slope_integrals_are_exact() {
        let h = LineMap::two_slope();
        // int_{-2}^{3} H = int_{-2}^0 2s ds + int_0^3 s ds = -4 + 4.5
        assert!((h.integral(-2.0, 3.0) - 0.5).abs() < 1e-13);
    }

    #[test]
    fn periodic_lift_integrals() {
        let knots = GridHomeomorphism::identity(8);
        let h = LineMap::periodic_lift(knots).unwrap();
        // H = id: antiderivative difference must match (b^2 - a^2)/2
        for &(a, b) in &[(-1.7, 2.3), (0.2, 0.9), (-3.0, -0.4)] {
            assert!((h.integral(a, b) - 0.5 * (b * b - a * a)).abs() < 1e-12);
        }
    }

    #[test]
    fn affine_naturality() {
        // extension of A o H o B equals A o H~ o B for affine A, B
        let h = LineMap::two_slope();
        let (a1, b1) = (1.7, -0.3); // A(w) = a1 w + b1
        let (a2, b2) = (0.6, 0.8); // B(x) = a2 x + b2
        // knots of A o H o B on a window around the composed breakpoint
        let break_x = -b2 / a2;
        let xs: Vec<f64> = vec![break_x - 10.0, break_x, break_x + 10.0];
        let ys: Vec<f64> = xs.iter().map(|&x| a1 * h.eval(a2 * x + b2) + b1).collect();
        let composed = LineMap::piecewise_linear(xs, ys).unwrap();
        for &(x, y) in &[(0.4, 0.5), (-2.0, 1.1), (break_x, 0.7)] {
            let (u_c, v_c) = extend_at(&composed, x, y).unwrap();
            // A acts on the extension values, B on the base point: z -> a2 z + b2
            let (u_i, v_i) = extend_at(&h, a2 * x + b2, a2 * y).unwrap();
            let (u_want, v_want) = (a1 * u_i + b1, a1 * v_i);
            assert!((u_c - u_want).abs() <= 1e-10, "{u_c} vs {u_want}");
            assert!((v_c - v_want).abs() <= 1e-10, "{v_c} vs {v_want}");
        }
    }

    #[test]
    fn derivative_consistency_finite_difference() {
        // finite differences of U, V agree with the closed-form U_x, V_y
        let knots = GridHomeomorphism::new(
            (0..=64).map(|i| i as f64 / 64.0).collect(),
            (0..=64).map(|i| ((i as f64 / 64.0) + 0.05 * (std::f64::consts::PI * i as f64 / 64.0).sin()).min(1.0)).collect(),
        )
        .unwrap();
        let h = LineMap::periodic_lift(knots).unwrap();
        let (x, y) = (0.37, 0.21);
        let s = beltrami_at(&h, x, y).unwrap();
        let e = 1e-6;
        let (u_p, _) = extend_at(&h, x + e, y).unwrap();
        let (u_m, _) = extend_at(&h, x - e, y).unwrap();
        let u_x_fd = (u_p - u_m) / (2.0 * e);
        let (_, v_p) = extend_at(&h, x, y + e).unwrap();
        let (_, v_m) = extend_at(&h, x, y - e).unwrap();
        let v_y_fd = (v_p - v_m) / (2.0 * e);
        let u_x = (s.r + s.l) / (2.0 * y);
        let v_y = (s.r + s.l - s.r_prime - s.l_prime) / y;
        assert!((u_x_fd - u_x).abs() < 1e-5, "{u_x_fd} vs {u_x}");
        assert!((v_y_fd - v_y).abs() < 1e-5, "{v_y_fd} vs {v_y}");
    }

    #[test]
    fn skew_rho_values() {
        let id = LineMap::Identity;
        for &k in &[0.25, 0.5, 1.0] {
            assert!((skew_rho(&id, 1.3, 0.4, k).unwrap() - k).abs() < 1e-14);
            assert!((skew_rho(&id, 1.3, -0.4, k).unwrap() - k).abs() < 1e-14);
        }
        let h = LineMap::two_slope();
        for &k in &[0.3, 1.0] {
            assert!((skew_rho(&h, 0.0, 0.5, k).unwrap() - k / 2.0).abs() < 1e-14);
        }
        assert!(skew_rho(&id, 0.0, 0.0, 0.5).is_err());
        assert!(skew_rho(&id, 0.0, 0.5, 1.5).is_err());
    }

    #[test]
    fn skew_rho_bounded_by_theta_of_m() {
        // |rho(x, y, k) - k| <= M - 1 + M zeta(M) on M-quasisymmetric maps
        use crate::conjugacy::zeta;
        let knots = GridHomeomorphism::new(
            (0..=256).map(|i| i as f64 / 256.0).collect(),
            (0..=256).map(|i| (i as f64 / 256.0).powf(1.2)).collect(),
        )
        .unwrap();
        let h = LineMap::periodic_lift(knots).unwrap();
        // empirical M over symmetric triples at many positions and scales,
        // denser than the assertion set below
        let mut m_emp = 1.0f64;
        for i in 0..320 {
            let x = i as f64 / 320.0;
            for j in 1..=100 {
                let t = 0.11 * j as f64 / 100.0;
                let num = h.eval(x + t) - h.eval(x);
                let den = h.eval(x) - h.eval(x - t);
                m_emp = m_emp.max(num / den).max(den / num);
            }
        }
        let bound = m_emp - 1.0 + m_emp * zeta(m_emp, 400).unwrap();
        let trials: Vec<(f64, f64)> = (0..40).map(|i| (i as f64 * 0.025, 0.11)).collect();
        for &(x, y) in &trials {
            for j in 1..=20 {
                let k = j as f64 / 20.0;
                let rho = skew_rho(&h, x, y, k).unwrap();
                assert!((rho - k).abs() <= bound + 1e-9, "rho - k = {} > {bound}", rho - k);
            }
        }
    }

    #[test]
    fn profiles() {
        let id = LineMap::Identity;
        let xs: Vec<f64> = (0..16).map(|i| i as f64 / 16.0).collect();
        for (_, sup) in vanishing_profile(&id, &[0.5, 0.1, 0.01], &xs).unwrap() {
            assert!(sup < 1e-12);
        }
        // two-slope is scale-invariant at the origin: profile constant
        let h = LineMap::two_slope();
        let prof = vanishing_profile(&h, &[0.5, 0.25, 0.1], &[0.0]).unwrap();
        let want = (425f64).sqrt() / 51.0;
        for (_, sup) in prof {
            assert!((sup - want).abs() < 1e-12);
        }
        // difference of a map against itself vanishes
        let d = difference_profile(&h, &h, &[0.3, 0.1], &xs).unwrap();
        for (_, sup) in d {
            assert!(sup == 0.0);
        }
    }
}
