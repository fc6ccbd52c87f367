//! Quadrature: trapezoid rules on circles, polar tensor rules on annuli,
//! composite Gauss–Legendre panels, and principal-value limits.
//!
//! All reductions use [`pairwise_sum`] in a fixed order, so results are
//! bitwise reproducible regardless of how the caller schedules work.

use crate::error::{Error, Result};
use num_complex::Complex64;
use std::f64::consts::{PI, TAU};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const I: Complex64 = Complex64::new(0.0, 1.0);

pub const DEFAULT_CIRCLE_NODES: usize = 2048;
pub const DEFAULT_PANELS: usize = 32;
pub const DEFAULT_ORDER: usize = 16;
pub const DEFAULT_N_THETA: usize = 1024;

/// Sum in a fixed binary tree.
pub fn pairwise_sum(values: &[Complex64]) -> Complex64 {
    const BLOCK: usize = 8;
    if values.len() <= BLOCK {
        return values.iter().fold(ZERO, |a, &b| a + b);
    }
    let mid = values.len() / 2;
    pairwise_sum(&values[..mid]) + pairwise_sum(&values[mid..])
}

/// Real counterpart of [`pairwise_sum`].
pub fn pairwise_sum_real(values: &[f64]) -> f64 {
    const BLOCK: usize = 8;
    if values.len() <= BLOCK {
        return values.iter().sum();
    }
    let mid = values.len() / 2;
    pairwise_sum_real(&values[..mid]) + pairwise_sum_real(&values[mid..])
}

/// Gauss–Legendre nodes and weights on `[-1, 1]`, by Newton iteration on
/// the Legendre recurrence.
pub fn gauss_legendre(order: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(order >= 1, "Gauss-Legendre order must be positive");
    let n = order;
    // P_n(z) and P_n'(z) by the three-term recurrence
    let legendre = |z: f64| {
        let (mut p0, mut p1) = (1.0, z);
        for k in 2..=n {
            let p2 = ((2 * k - 1) as f64 * z * p1 - (k - 1) as f64 * p0) / k as f64;
            p0 = p1;
            p1 = p2;
        }
        let dp = if n == 1 { 1.0 } else { n as f64 * (z * p1 - p0) / (z * z - 1.0) };
        (p1, dp)
    };
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        let mut z = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        for _ in 0..100 {
            let (p, dp) = legendre(z);
            let dz = p / dp;
            z -= dz;
            if dz.abs() < 1e-16 {
                break;
            }
        }
        let (_, dp) = legendre(z);
        let wi = 2.0 / ((1.0 - z * z) * dp * dp);
        x[i] = -z;
        x[n - 1 - i] = z;
        w[i] = wi;
        w[n - 1 - i] = wi;
    }
    (x, w)
}

/// Composite Gauss–Legendre nodes `(x, w)` on `[points[0], points.last()]`.
///
/// Every interval between consecutive break points receives at least one
/// panel; the remaining panels of `total_panels` are shared in proportion
/// to interval length. Zero-length intervals are skipped.
pub fn composite_gauss_legendre(points: &[f64], total_panels: usize, order: usize) -> Vec<(f64, f64)> {
    let (gx, gw) = gauss_legendre(order);
    let pieces: Vec<(f64, f64)> = points.windows(2).map(|p| (p[0], p[1])).filter(|(a, b)| b > a).collect();
    if pieces.is_empty() {
        return Vec::new();
    }
    let total_len: f64 = pieces.iter().map(|(a, b)| b - a).sum();
    let spare = total_panels.saturating_sub(pieces.len()) as f64;
    let mut out = Vec::with_capacity(total_panels.max(pieces.len()) * order);
    for &(a, b) in &pieces {
        let m = 1 + (spare * (b - a) / total_len).round() as usize;
        let h = (b - a) / m as f64;
        for p in 0..m {
            let lo = a + p as f64 * h;
            let hi = if p + 1 == m { b } else { lo + h };
            let (c, r) = (0.5 * (lo + hi), 0.5 * (hi - lo));
            for (x, w) in gx.iter().zip(&gw) {
                out.push((c + r * x, r * w));
            }
        }
    }
    out
}

/// Trapezoid rule on the circle `|τ − center| = radius`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CircleRule {
    pub center: Complex64,
    pub radius: f64,
    pub n: usize,
}

impl CircleRule {
    pub fn new(radius: f64, n: usize) -> Result<Self> {
        Self::centered(ZERO, radius, n)
    }

    pub fn centered(center: Complex64, radius: f64, n: usize) -> Result<Self> {
        if !(radius > 0.0 && radius.is_finite()) {
            return Err(Error::InvalidArgument(format!("circle radius must be positive, got {radius}")));
        }
        if n == 0 {
            return Err(Error::InvalidArgument("circle rule needs at least one node".into()));
        }
        Ok(Self { center, radius, n })
    }

    /// Nodes `τ_k` and weights `dτ_k = i(τ_k − center)·2π/n`.
    pub fn nodes(&self) -> impl Iterator<Item = (Complex64, Complex64)> + '_ {
        let h = TAU / self.n as f64;
        (0..self.n).map(move |k| {
            let d = Complex64::from_polar(self.radius, h * k as f64);
            (self.center + d, I * d * h)
        })
    }
}

/// `∮ f(τ) dτ` by the trapezoid rule.
pub fn integrate_circle<F>(mut f: F, rule: &CircleRule) -> Result<Complex64>
where
    F: FnMut(Complex64) -> Complex64,
{
    let mut vals = Vec::with_capacity(rule.n);
    for (tau, w) in rule.nodes() {
        let v = f(tau);
        if !(v.re.is_finite() && v.im.is_finite()) {
            return Err(Error::NonFinite { at: format!("{tau}") });
        }
        vals.push(v * w);
    }
    Ok(pairwise_sum(&vals))
}

/// Polar tensor rule on `{eps < |τ| < rho}`: composite Gauss–Legendre in
/// the radius (panel edges at `eps`, `rho` and any extra `breaks`) times
/// the trapezoid rule in the angle.
#[derive(Debug, Clone, PartialEq)]
pub struct AnnulusRule {
    pub eps: f64,
    pub rho: f64,
    pub panels: usize,
    pub order: usize,
    pub n_theta: usize,
    pub breaks: Vec<f64>,
}

impl AnnulusRule {
    pub fn new(eps: f64, rho: f64) -> Result<Self> {
        if !(eps >= 0.0 && rho > eps && rho.is_finite()) {
            return Err(Error::InvalidArgument(format!("annulus needs 0 <= eps < rho, got ({eps}, {rho})")));
        }
        Ok(Self {
            eps,
            rho,
            panels: DEFAULT_PANELS,
            order: DEFAULT_ORDER,
            n_theta: DEFAULT_N_THETA,
            breaks: Vec::new(),
        })
    }

    pub fn with_panels(mut self, panels: usize, order: usize) -> Self {
        self.panels = panels.max(1);
        self.order = order.max(1);
        self
    }

    pub fn with_n_theta(mut self, n_theta: usize) -> Self {
        self.n_theta = n_theta.max(1);
        self
    }

    /// Extra radii where the integrand is not smooth.
    pub fn with_breaks(mut self, breaks: impl IntoIterator<Item = f64>) -> Self {
        self.breaks = breaks.into_iter().collect();
        self
    }

    /// Radial nodes and weights (without the Jacobian `r`).
    pub fn radial_nodes(&self) -> Vec<(f64, f64)> {
        let mut pts = vec![self.eps];
        pts.extend(self.breaks.iter().copied().filter(|&b| b > self.eps && b < self.rho));
        pts.push(self.rho);
        pts.sort_by(f64::total_cmp);
        pts.dedup();
        composite_gauss_legendre(&pts, self.panels, self.order)
    }

    /// Area weight of the rule, `π(rho² − eps²)` up to rounding.
    pub fn total_weight(&self) -> f64 {
        let radial: Vec<f64> = self.radial_nodes().iter().map(|(r, w)| r * w).collect();
        pairwise_sum_real(&radial) * TAU
    }
}

/// `∫∫ f dA` over the annulus of `rule`.
pub fn integrate_annulus<F>(mut f: F, rule: &AnnulusRule) -> Result<Complex64>
where
    F: FnMut(Complex64) -> Complex64,
{
    let h = TAU / rule.n_theta as f64;
    let dirs: Vec<Complex64> = (0..rule.n_theta).map(|j| Complex64::from_polar(1.0, h * j as f64)).collect();
    let mut rings = Vec::new();
    let mut ring = Vec::with_capacity(rule.n_theta);
    for (r, w) in rule.radial_nodes() {
        ring.clear();
        for d in &dirs {
            let tau = d * r;
            let v = f(tau);
            if !(v.re.is_finite() && v.im.is_finite()) {
                return Err(Error::NonFinite { at: format!("{tau}") });
            }
            ring.push(v);
        }
        rings.push(pairwise_sum(&ring) * (r * w * h));
    }
    Ok(pairwise_sum(&rings))
}

/// Controls for the inner-radius limit at the singular parameter.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PVConfig {
    pub eps0: f64,
    pub shrink: f64,
    pub max_steps: usize,
    pub tol: f64,
}

impl Default for PVConfig {
    fn default() -> Self {
        Self { eps0: 0.05, shrink: 0.5, max_steps: 60, tol: 1e-12 }
    }
}

impl PVConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.shrink > 0.0 && self.shrink < 1.0) {
            return Err(Error::InvalidArgument(format!("shrink must lie in (0,1), got {}", self.shrink)));
        }
        if !(self.eps0 > 0.0 && self.tol > 0.0 && self.max_steps > 0) {
            return Err(Error::InvalidArgument("eps0, tol and max_steps must be positive".into()));
        }
        Ok(())
    }
}

/// Result of [`pv_limit`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PvOutcome {
    pub value: Complex64,
    /// Last inner radius evaluated.
    pub eps: f64,
    pub steps: usize,
    /// `|F(eps) − F(eps/shrink)|` at the stopping step.
    pub increment: f64,
}

/// Evaluates `F(eps0·shrinkᵏ)` for `k = 0, 1, …` until two successive values
/// differ by less than `tol·max(1, |F|)`.
///
/// `F` is called with strictly decreasing radii, so it may accumulate
/// integrals over successive rings.
pub fn pv_limit<F>(mut f: F, cfg: &PVConfig) -> Result<PvOutcome>
where
    F: FnMut(f64) -> Result<Complex64>,
{
    cfg.validate()?;
    let mut eps = cfg.eps0;
    let mut prev = f(eps)?;
    let mut increment = f64::INFINITY;
    for step in 1..=cfg.max_steps {
        eps *= cfg.shrink;
        let cur = f(eps)?;
        increment = (cur - prev).norm();
        if increment < cfg.tol * cur.norm().max(1.0) {
            return Ok(PvOutcome { value: cur, eps, steps: step, increment });
        }
        prev = cur;
    }
    Err(Error::NoConvergence { steps: cfg.max_steps, increment })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn gauss_legendre_is_exact_to_degree_2n_minus_1() {
        for order in [1usize, 2, 5, 16] {
            let (x, w) = gauss_legendre(order);
            assert!((w.iter().sum::<f64>() - 2.0).abs() < 1e-14);
            for d in 0..2 * order {
                let got: f64 = x.iter().zip(&w).map(|(x, w)| w * x.powi(d as i32)).sum();
                let exact = if d % 2 == 1 { 0.0 } else { 2.0 / (d as f64 + 1.0) };
                assert!((got - exact).abs() < 1e-14, "order {order} degree {d}: {got}");
            }
        }
    }

    #[test]
    fn circle_examples() {
        let rule = CircleRule::new(0.7, 64).unwrap();
        let v = integrate_circle(|t| 1.0 / t, &rule).unwrap();
        assert!((v - c(0.0, TAU)).norm() < 1e-14);
        for m in [0i32, 1, 2, 5, -2, -3] {
            let v = integrate_circle(|t| t.powi(m), &rule).unwrap();
            assert!(v.norm() < 1e-13, "{m}: {v}");
        }
        let v = integrate_circle(|t| t.exp() / t, &CircleRule::new(1.0, 64).unwrap()).unwrap();
        assert!((v - c(0.0, TAU)).norm() < 1e-14);
        assert!(matches!(integrate_circle(|_| c(f64::NAN, 0.0), &rule), Err(Error::NonFinite { .. })));
    }

    #[test]
    fn circle_rule_converges_geometrically() {
        let err = |n| {
            let v = integrate_circle(|t| 1.0 / (t - 2.0), &CircleRule::new(1.0, n).unwrap()).unwrap();
            v.norm()
        };
        // error is 2πi·2^{-n}/(1 − 2^{-n}) in closed form
        let (e8, e16, e32) = (err(8), err(16), err(32));
        assert!(e16 < e8 * e8 * 20.0 && e32 < 1e-8, "{e8} {e16} {e32}");
        assert!(e16 / e8 < 1e-2);
    }

    #[test]
    fn annulus_examples() {
        let rule = AnnulusRule::new(0.1, 1.0).unwrap().with_panels(4, 8).with_n_theta(64);
        let v = integrate_annulus(|_| c(1.0, 0.0), &rule).unwrap();
        assert!((v.re - PI * 0.99).abs() < 1e-12 && v.im == 0.0);
        assert!((rule.total_weight() - PI * 0.99).abs() < 1e-12 * PI);
        let disc = AnnulusRule::new(0.0, 1.0).unwrap().with_panels(4, 8).with_n_theta(64);
        let v = integrate_annulus(|t| c(t.norm_sqr(), 0.0), &disc).unwrap();
        assert!((v.re - PI / 2.0).abs() < 1e-13);
        assert!(integrate_annulus(|t| t, &disc).unwrap().norm() < 1e-14);
    }

    #[test]
    fn annulus_exact_on_polynomials() {
        // ∫ τᵃτ̄ᵇ dA vanishes unless a = b, when it is 2π(ρ^{2a+2} − ε^{2a+2})/(2a+2)
        let order = 6;
        let rule = AnnulusRule::new(0.2, 1.3).unwrap().with_panels(3, order).with_n_theta(32);
        for a in 0..order as u32 {
            for b in 0..order as u32 {
                if a + b > 2 * order as u32 - 1 {
                    continue;
                }
                let v = integrate_annulus(|t| t.powu(a) * t.conj().powu(b), &rule).unwrap();
                let e = if a == b {
                    let p = 2 * a as i32 + 2;
                    TAU * (1.3f64.powi(p) - 0.2f64.powi(p)) / p as f64
                } else {
                    0.0
                };
                assert!((v - e).norm() < 1e-12 * e.abs().max(1.0), "({a},{b}): {v} vs {e}");
            }
        }
    }

    #[test]
    fn breaks_split_panels() {
        let rule = AnnulusRule::new(0.0, 1.0).unwrap().with_panels(4, 4).with_breaks([0.3, 0.5, 2.0]);
        let nodes = rule.radial_nodes();
        assert!(nodes.iter().all(|&(r, _)| (0.0..1.0).contains(&r)));
        assert!(!nodes.iter().any(|&(r, _)| r == 0.3 || r == 0.5));
        let total: f64 = nodes.iter().map(|(_, w)| w).sum();
        assert!((total - 1.0).abs() < 1e-14);
        // exactness for a function with a kink at a break
        let kinked: f64 = nodes.iter().map(|&(r, w)| w * (r - 0.3).abs()).sum();
        assert!((kinked - (0.045 + 0.245)).abs() < 1e-14);
    }

    #[test]
    fn pv_examples() {
        let cfg = PVConfig::default();
        let out = pv_limit(|e| Ok(c(2.0, 1.0) + 3.0 * e), &cfg).unwrap();
        assert!((out.value - c(2.0, 1.0)).norm() < 1e-11);
        assert!(out.increment < 1e-12 * out.value.norm().max(1.0));
        let out = pv_limit(|_| Ok(c(0.0, TAU)), &cfg).unwrap();
        assert_eq!(out.steps, 1);
        let err = pv_limit(|e| Ok(c((1.0 / e).ln(), 0.0)), &cfg).unwrap_err();
        assert!(err.is_convergence());
        let bad = PVConfig { shrink: 1.0, ..cfg };
        assert!(pv_limit(|_| Ok(ZERO), &bad).is_err());
    }
}
