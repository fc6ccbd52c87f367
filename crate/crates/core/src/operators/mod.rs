//! Integral operators on the curve and the checks built on them.
//!
//! * [`represent_boundary`]: `P_ρφ(t) = ∮_{|τ|=ρ} φ(τ)·C(t,τ)·ω(τ) dτ`.
//! * [`solve_area`]: `K_μφ(t) = ∫ κ_μ(t,τ)·φ̂(τ) dA(τ)`, solving `∂̄u = φ`.
//! * [`moment_check`]: the pairings `∮_{|τ|=ε} φ·τʲ·ω dτ` that decide strong
//!   holomorphy on a cusp.
//! * [`verify_koppelman`], [`dbar_fd`], [`growth_profile`]: numerical checks.

mod area;

pub use area::{solve_area, Resolution, SolveOptions, SolveReport, TransformRoute};

use crate::curve::Curve;
use crate::error::{Error, Result};
use crate::forms::{FormDegree, MonomialFormSum};
use crate::kernel::KernelContext;
use crate::quad::{integrate_circle, CircleRule};
use area::AreaSolver;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

const I: Complex64 = Complex64::new(0.0, 1.0);

/// `P_ρφ(t)` for a function `φ` given by its values on `|τ| = ρ`.
pub fn represent_boundary_fn<F>(curve: &Curve, phi: F, rho: f64, t: Complex64, n: usize) -> Result<Complex64>
where
    F: Fn(Complex64) -> Complex64,
{
    if !(t.norm() < rho) {
        return Err(Error::Domain(format!("target |t| = {} must lie inside the circle of radius {rho}", t.norm())));
    }
    if t == Complex64::new(0.0, 0.0) && curve.is_singular() {
        return Err(Error::Domain("target t = 0 is the singular parameter".into()));
    }
    let ctx = KernelContext::new(curve.clone(), 0);
    let rule = CircleRule::new(rho, n)?;
    let mut err = None;
    let v = integrate_circle(
        |tau| match (ctx.cauchy_c(t, tau), curve.canonical_weight(tau)) {
            (Ok(c), Ok(w)) => phi(tau) * c * w,
            (Err(e), _) | (_, Err(e)) => {
                err.get_or_insert(e);
                Complex64::new(f64::NAN, 0.0)
            }
        },
        &rule,
    );
    match err {
        Some(e) => Err(e),
        None => v,
    }
}

/// `P_ρφ(t)` for a symbolic function `φ`.
pub fn represent_boundary(curve: &Curve, phi: &MonomialFormSum, rho: f64, t: Complex64, n: usize) -> Result<Complex64> {
    if phi.degree() != FormDegree::Function {
        return Err(Error::InvalidArgument("boundary representation needs a function, not a (0,1)-form".into()));
    }
    represent_boundary_fn(curve, |tau| phi.eval(tau), rho, t, n)
}

/// Controls for [`moment_check`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MomentConfig {
    pub eps: f64,
    pub nodes: usize,
    /// A pairing counts as zero when its modulus is below this.
    pub moment_tol: f64,
    /// Allowed difference between pairings at `eps` and `2·eps`.
    pub agree_tol: f64,
}

impl Default for MomentConfig {
    fn default() -> Self {
        Self { eps: 0.5, nodes: crate::quad::DEFAULT_CIRCLE_NODES, moment_tol: 1e-6, agree_tol: 1e-9 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MomentEntry {
    pub j: u32,
    pub re: f64,
    pub im: f64,
    pub zero: bool,
}

impl MomentEntry {
    pub fn value(&self) -> Complex64 {
        Complex64::new(self.re, self.im)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MomentReport {
    pub entries: Vec<MomentEntry>,
    /// True iff every pairing vanishes, i.e. `φ` is strongly holomorphic.
    pub verdict: bool,
    pub eps_used: f64,
    pub eps_check: f64,
}

/// Pairings `m_j = ∮_{|τ|=ε} φ·τʲ·ω dτ` for `j ∈ ⟨r,s⟩`, `j ≤` Frobenius
/// number, recomputed on `|τ| = 2ε` as a holomorphy check.
pub fn moment_check(curve: &Curve, phi: &MonomialFormSum, cfg: &MomentConfig) -> Result<MomentReport> {
    let cusp =
        curve.as_cusp().ok_or_else(|| Error::InvalidArgument("moment criterion is implemented for cusps".into()))?;
    if phi.degree() != FormDegree::Function {
        return Err(Error::InvalidArgument("moment criterion needs a function, not a (0,1)-form".into()));
    }
    if !(cfg.eps > 0.0 && cfg.eps.is_finite()) {
        return Err(Error::InvalidArgument(format!("eps must be positive, got {}", cfg.eps)));
    }
    let sg = cusp.semigroup();
    let pairing = |j: u32, eps: f64| -> Result<Complex64> {
        let rule = CircleRule::new(eps, cfg.nodes)?;
        let m = cusp.pole_order() as i32;
        integrate_circle(|tau| phi.eval(tau) * tau.powi(j as i32 - m), &rule)
    };
    let mut entries = Vec::new();
    for j in (0..=sg.frobenius.max(0) as u32).filter(|&j| sg.contains(j)) {
        let v = pairing(j, cfg.eps)?;
        let check = pairing(j, 2.0 * cfg.eps)?;
        let diff = (v - check).norm();
        if !(diff <= cfg.agree_tol) {
            return Err(Error::RadiusMismatch { j, diff });
        }
        entries.push(MomentEntry { j, re: v.re, im: v.im, zero: v.norm() < cfg.moment_tol });
    }
    let verdict = entries.iter().all(|e| e.zero);
    Ok(MomentReport { entries, verdict, eps_used: cfg.eps, eps_check: 2.0 * cfg.eps })
}

/// Centered finite-difference `∂u/∂t̄`:
/// `([u(t+h) − u(t−h)] + i[u(t+ih) − u(t−ih)])/(4h)`.
pub fn dbar_fd<F>(u: F, t: Complex64, h: f64) -> Complex64
where
    F: Fn(Complex64) -> Complex64,
{
    ((u(t + h) - u(t - h)) + I * (u(t + I * h) - u(t - I * h))) / (4.0 * h)
}

/// Per-target outcome of [`verify_koppelman`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct KoppelmanPoint {
    pub t: Complex64,
    pub u: Complex64,
    pub residual: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct KoppelmanReport {
    pub points: Vec<KoppelmanPoint>,
    pub max_residual: f64,
    pub resolution: Resolution,
}

/// `max_t |∂̄_FD(K_μφ)(t) − φ̂(t)|` over the targets.
pub fn verify_koppelman(
    ctx: &KernelContext,
    phi: &MonomialFormSum,
    targets: &[Complex64],
    h: f64,
    opts: &SolveOptions,
) -> Result<KoppelmanReport> {
    use rayon::prelude::*;
    if !(h > 0.0 && h.is_finite()) {
        return Err(Error::InvalidArgument(format!("finite-difference step must be positive, got {h}")));
    }
    let solver = AreaSolver::new(ctx, phi, opts)?;
    let stencil: Vec<Complex64> = targets.iter().flat_map(|&t| [t, t + h, t - h, t + I * h, t - I * h]).collect();
    let values: Vec<Complex64> = stencil.par_iter().map(|&p| solver.eval(p).map(|v| v.0)).collect::<Result<_>>()?;
    let points: Vec<KoppelmanPoint> = targets
        .iter()
        .zip(values.chunks(5))
        .map(|(&t, v)| {
            let fd = ((v[1] - v[2]) + I * (v[3] - v[4])) / (4.0 * h);
            KoppelmanPoint { t, u: v[0], residual: (fd - phi.eval(t)).norm() }
        })
        .collect();
    let max_residual = points.iter().map(|p| p.residual).fold(0.0, f64::max);
    Ok(KoppelmanReport { points, max_residual, resolution: solver.resolution() })
}

/// Least-squares fit of `log|u|` against `log r` along a ray.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GrowthFit {
    pub slope: f64,
    pub intercept: f64,
    /// Root-mean-square deviation of the samples from the fitted line.
    pub residual: f64,
    /// `(log r, log|u|)` samples used in the fit.
    pub samples: Vec<(f64, f64)>,
}

/// Fits `log|u(r·e^{iθ})| ≈ slope·log r + intercept` over the given radii.
///
/// Samples where `u` vanishes are dropped; at least two must remain.
pub fn growth_profile<F>(u: F, theta: f64, radii: &[f64]) -> Result<GrowthFit>
where
    F: Fn(Complex64) -> Result<Complex64>,
{
    if radii.len() < 2 {
        return Err(Error::InvalidArgument("growth fit needs at least two radii".into()));
    }
    let mut samples = Vec::new();
    for &r in radii {
        if !(r > 0.0 && r.is_finite()) {
            return Err(Error::InvalidArgument(format!("radii must be positive, got {r}")));
        }
        let v = u(Complex64::from_polar(r, theta))?;
        if !(v.re.is_finite() && v.im.is_finite()) {
            return Err(Error::NonFinite { at: format!("r = {r}") });
        }
        if v.norm() > 0.0 {
            samples.push((r.ln(), v.norm().ln()));
        }
    }
    if samples.len() < 2 {
        return Err(Error::VanishingSamples);
    }
    let n = samples.len() as f64;
    let mx = samples.iter().map(|s| s.0).sum::<f64>() / n;
    let my = samples.iter().map(|s| s.1).sum::<f64>() / n;
    let sxx: f64 = samples.iter().map(|s| (s.0 - mx).powi(2)).sum();
    if sxx == 0.0 {
        return Err(Error::InvalidArgument("growth fit needs distinct radii".into()));
    }
    let sxy: f64 = samples.iter().map(|s| (s.0 - mx) * (s.1 - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let residual = (samples.iter().map(|s| (s.1 - slope * s.0 - intercept).powi(2)).sum::<f64>() / n).sqrt();
    Ok(GrowthFit { slope, intercept, residual, samples })
}
