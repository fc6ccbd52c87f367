//! The area solution operator `K_μφ(t) = ∫ κ_μ(t,τ)·φ̂(τ) dA(τ)`.
//!
//! The weighted density is split as
//!
//! ```text
//! κ_μ(t,τ) = R₀(t,τ)·W(t,τ) − W(t,τ)/(π(τ − t)),     W = w₀^μ
//! ```
//!
//! where `R₀ = κ₀ + 1/(π(τ − t))` is holomorphic across the diagonal. The
//! first piece is integrated with the polar tensor rule about the origin;
//! the second is the classical Cauchy transform
//! `T[g](t) = −(1/π)∫ g(τ)/(τ − t) dA` of `g = W·φ̂`.
//!
//! When both `π₁` and `π₂` are monomials, `W·φ̂` is a sum of terms
//! `F(|τ|²)·τᵃτ̄ᵇ` and the angular integral of `T` is done exactly:
//!
//! ```text
//! T[F τᵃτ̄ᵇ](t) = −2·t^{m−1}·∫_{|t|}^{∞} F(ρ²) ρ^{2b+1} dρ    (m = a − b ≥ 1)
//!              = +2·t^{m−1}·∫_0^{|t|}  F(ρ²) ρ^{2b+1} dρ    (m ≤ 0)
//! ```
//!
//! Otherwise `T` is integrated in polar coordinates centred at `t`, where
//! the Jacobian cancels the pole.

use crate::error::{Error, Result};
use crate::forms::{Envelope, FormDegree, MonomialFormSum};
use crate::kernel::{KernelContext, RegularPart};
use crate::quad::{composite_gauss_legendre, pairwise_sum, pv_limit, AnnulusRule, PVConfig, PvOutcome};
use num_complex::Complex64;
use serde::Serialize;
use std::f64::consts::{PI, TAU};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

/// How the Cauchy-transform part is integrated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum TransformRoute {
    /// Radial when the parametrization is monomial, polar otherwise.
    #[default]
    Auto,
    Radial,
    Polar,
}

/// Resolution and limit controls for [`solve_area`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolveOptions {
    pub panels: usize,
    pub order: usize,
    pub n_theta: usize,
    pub pv: PVConfig,
    /// Outer radius of integration; required when the form is not compactly
    /// supported, and truncates the support otherwise.
    pub rho: Option<f64>,
    pub route: TransformRoute,
}

impl Default for SolveOptions {
    fn default() -> Self {
        Self {
            panels: crate::quad::DEFAULT_PANELS,
            order: crate::quad::DEFAULT_ORDER,
            n_theta: crate::quad::DEFAULT_N_THETA,
            pv: PVConfig::default(),
            rho: None,
            route: TransformRoute::Auto,
        }
    }
}

/// Integration region and quadrature actually used.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Resolution {
    pub panels: usize,
    pub order: usize,
    pub n_theta: usize,
    /// Inner radius of the base annulus (the hole of the form, or the first
    /// principal-value radius).
    pub inner: f64,
    pub outer: f64,
    pub principal_value: bool,
    pub route: TransformRoute,
}

/// Values of `K_μφ` at the requested targets.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SolveReport {
    pub values: Vec<(Complex64, Complex64)>,
    pub resolution: Resolution,
    /// Principal-value increments per target, when the limit was engaged.
    pub pv_increments: Option<Vec<f64>>,
}

#[derive(Debug, Clone, Copy)]
struct Node {
    tau: Complex64,
    /// `φ̂(τ)` times the area weight.
    phi_w: Complex64,
    /// `conj(π₁(τ))/|π(τ)|²`, `conj(π₂(τ))/|π(τ)|²`.
    u1: Complex64,
    u2: Complex64,
}

/// One `(a, b)` group of the exact radial transform: `τᵃτ̄ᵇ·Σ cᵢ·Eᵢ(|τ|²)·D(|τ|²)`
/// with `cᵢ` multiplied by `π₁(t)^k π₂(t)^{μ−k}`.
#[derive(Debug, Clone)]
struct RadialGroup {
    a: u32,
    b: u32,
    parts: Vec<(Complex64, u32, Option<Envelope>)>,
}

#[derive(Debug, Clone)]
struct MonomialParam {
    /// `|c₁|²`, `|c₂|²` and exponents of `π₁ = c₁τ^{e₁}`, `π₂ = c₂τ^{e₂}`.
    n1: f64,
    n2: f64,
    e1: u32,
    e2: u32,
}

/// Prepared solver for one form; evaluates `K_μφ` at arbitrary targets.
pub(crate) struct AreaSolver<'a> {
    ctx: &'a KernelContext,
    phi: &'a MonomialFormSum,
    opts: SolveOptions,
    hole: f64,
    outer: f64,
    knots: Vec<f64>,
    pv: bool,
    base: Vec<Node>,
    radial: Option<(MonomialParam, Vec<RadialGroup>)>,
}

fn binomial(n: u32, k: u32) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

impl<'a> AreaSolver<'a> {
    pub(crate) fn new(ctx: &'a KernelContext, phi: &'a MonomialFormSum, opts: &SolveOptions) -> Result<Self> {
        if phi.degree() != FormDegree::Form01 {
            return Err(Error::InvalidArgument("solve needs a (0,1)-form; append ', dbar'".into()));
        }
        if opts.panels == 0 || opts.order == 0 || opts.n_theta == 0 {
            return Err(Error::InvalidArgument("quadrature resolution must be positive".into()));
        }
        opts.pv.validate()?;
        let curve = ctx.curve();
        let support = phi.support();
        let outer = match (support.outer, opts.rho) {
            (Some(o), Some(r)) => o.min(r),
            (Some(o), None) => o,
            (None, Some(r)) => r,
            (None, None) => {
                return Err(Error::InvalidArgument(
                    "form is not compactly supported; give an outer radius (rho)".into(),
                ))
            }
        };
        if !(outer > 0.0 && outer.is_finite()) && !phi.is_zero() {
            return Err(Error::InvalidArgument(format!("outer radius must be positive, got {outer}")));
        }
        let hole = support.hole.min(outer);
        let knots: Vec<f64> = support.knots.into_iter().filter(|&k| k > hole && k < outer).collect();

        let weight_order = if ctx.mu() > 0 { ctx.mu() as i64 * curve.min_order() as i64 } else { 0 };
        let mut singular = false;
        if hole == 0.0 {
            for (a, b, _) in phi.near_zero_terms() {
                let exponent = a as i64 + b as i64 - curve.pole_order() as i64 - weight_order;
                if exponent <= -2 {
                    return Err(Error::NonIntegrable { exponent });
                }
                singular |= exponent < 0 || curve.pole_order() > 0 || weight_order > 0;
            }
        }

        let mut solver =
            Self { ctx, phi, opts: *opts, hole, outer, knots, pv: singular, base: Vec::new(), radial: None };
        let inner = solver.inner();
        if outer > inner {
            let rule = AnnulusRule::new(inner, outer)?
                .with_panels(opts.panels, opts.order)
                .with_n_theta(opts.n_theta)
                .with_breaks(solver.knots.clone());
            solver.base = solver.nodes(&rule);
        }

        let monomial = match (curve.pi1().as_monomial(), curve.pi2().as_monomial()) {
            (Some((c1, e1)), Some((c2, e2))) => {
                Some(MonomialParam { n1: c1.norm_sqr(), n2: c2.norm_sqr(), e1: e1 as u32, e2: e2 as u32 })
                    .map(|m| (m, c1, c2))
            }
            _ => None,
        };
        let use_radial = match opts.route {
            TransformRoute::Auto => monomial.is_some(),
            TransformRoute::Radial => {
                if monomial.is_none() {
                    return Err(Error::InvalidArgument("radial transform needs a monomial parametrization".into()));
                }
                true
            }
            TransformRoute::Polar => false,
        };
        if use_radial {
            let (m, c1, c2) = monomial.expect("checked above");
            let mu = ctx.mu();
            let mut groups: Vec<RadialGroup> = Vec::new();
            for term in phi.terms() {
                for k in 0..=mu {
                    let coeff = term.coeff * binomial(mu, k) * c1.conj().powu(k) * c2.conj().powu(mu - k);
                    let b = term.b + m.e1 * k + m.e2 * (mu - k);
                    let part = (coeff, k, term.envelope);
                    match groups.iter_mut().find(|g| g.a == term.a && g.b == b) {
                        Some(g) => g.parts.push(part),
                        None => groups.push(RadialGroup { a: term.a, b, parts: vec![part] }),
                    }
                }
            }
            solver.radial = Some((m, groups));
        }
        Ok(solver)
    }

    fn inner(&self) -> f64 {
        if self.pv {
            self.opts.pv.eps0.min(0.5 * self.outer)
        } else {
            self.hole
        }
    }

    pub(crate) fn resolution(&self) -> Resolution {
        Resolution {
            panels: self.opts.panels,
            order: self.opts.order,
            n_theta: self.opts.n_theta,
            inner: self.inner(),
            outer: self.outer,
            principal_value: self.pv,
            route: if self.radial.is_some() { TransformRoute::Radial } else { TransformRoute::Polar },
        }
    }

    fn nodes(&self, rule: &AnnulusRule) -> Vec<Node> {
        let curve = self.ctx.curve();
        let h = TAU / rule.n_theta as f64;
        let dirs: Vec<Complex64> = (0..rule.n_theta).map(|j| Complex64::from_polar(1.0, h * j as f64)).collect();
        let mut out = Vec::with_capacity(rule.n_theta * rule.order * rule.panels);
        for (r, w) in rule.radial_nodes() {
            for d in &dirs {
                let tau = d * r;
                let phi = self.phi.eval(tau);
                let (b1, b2) = curve.pi(tau);
                let den = b1.norm_sqr() + b2.norm_sqr();
                out.push(Node { tau, phi_w: phi * (r * w * h), u1: b1.conj() / den, u2: b2.conj() / den });
            }
        }
        out
    }

    fn regular_sum(&self, nodes: &[Node], t: Complex64, reg: &RegularPart) -> Result<Complex64> {
        let mu = self.ctx.mu();
        let (a1, a2) = self.ctx.curve().pi(t);
        let mut vals = Vec::with_capacity(nodes.len());
        for n in nodes {
            if n.phi_w == ZERO {
                vals.push(ZERO);
                continue;
            }
            let w = if mu == 0 { ONE } else { (a1 * n.u1 + a2 * n.u2).powu(mu) };
            let v = reg.eval(n.tau) * w * n.phi_w;
            if !(v.re.is_finite() && v.im.is_finite()) {
                return Err(Error::NonFinite { at: format!("tau = {} for target {t}", n.tau) });
            }
            vals.push(v);
        }
        Ok(pairwise_sum(&vals))
    }

    fn radial_transform(&self, t: Complex64, m: &MonomialParam, groups: &[RadialGroup]) -> Complex64 {
        let mu = self.ctx.mu();
        let (a1, a2) = self.ctx.curve().pi(t);
        let tfac: Vec<Complex64> = (0..=mu).map(|k| a1.powu(k) * a2.powu(mu - k)).collect();
        let at = t.norm();
        let mut total = Vec::with_capacity(groups.len());
        for g in groups {
            let mexp = g.a as i64 - g.b as i64;
            let (lo, hi) = if mexp >= 1 { (at.max(self.hole), self.outer) } else { (self.hole, at.min(self.outer)) };
            if hi <= lo {
                continue;
            }
            let mut pts = vec![lo];
            pts.extend(self.knots.iter().copied().filter(|&k| k > lo && k < hi));
            pts.push(hi);
            let coeffs: Vec<(Complex64, Option<Envelope>)> =
                g.parts.iter().map(|&(c, k, env)| (c * tfac[k as usize], env)).collect();
            let mut vals = Vec::new();
            for (rho, w) in composite_gauss_legendre(&pts, self.opts.panels, self.opts.order) {
                let x = rho * rho;
                let d = if mu == 0 {
                    1.0
                } else {
                    (m.n1 * x.powi(m.e1 as i32) + m.n2 * x.powi(m.e2 as i32)).powi(-(mu as i32))
                };
                let f: Complex64 = coeffs.iter().map(|(c, env)| c * env.map_or(1.0, |e| e.value(x))).sum();
                vals.push(f * (d * rho.powi(2 * g.b as i32 + 1) * w));
            }
            let integral = pairwise_sum(&vals);
            let tp = t.powi((mexp - 1) as i32);
            total.push(if mexp >= 1 { -2.0 * tp * integral } else { 2.0 * tp * integral });
        }
        pairwise_sum(&total)
    }

    fn polar_transform(&self, t: Complex64) -> Result<Complex64> {
        let ctx = self.ctx;
        let mut circles: Vec<f64> = self.knots.clone();
        circles.push(self.outer);
        if self.hole > 0.0 {
            circles.push(self.hole);
        }
        let h = TAU / self.opts.n_theta as f64;
        let t2 = t.norm_sqr();
        let mut rays = Vec::with_capacity(self.opts.n_theta);
        for j in 0..self.opts.n_theta {
            let e = Complex64::from_polar(1.0, h * j as f64);
            let p = (t.conj() * e).re;
            let mut pts = vec![0.0];
            for &rad in &circles {
                let disc = p * p - t2 + rad * rad;
                if disc >= 0.0 {
                    let sq = disc.sqrt();
                    pts.extend([-p - sq, -p + sq].into_iter().filter(|&x| x > 0.0));
                }
            }
            pts.sort_by(f64::total_cmp);
            pts.dedup();
            let mut vals = Vec::new();
            for (rho, w) in composite_gauss_legendre(&pts, self.opts.panels, self.opts.order) {
                let tau = t + e * rho;
                if tau.norm() >= self.outer {
                    continue;
                }
                let phi = self.phi.eval(tau);
                if phi == ZERO {
                    continue;
                }
                let v = ctx.weight_factor(t, tau)? * phi * w;
                if !(v.re.is_finite() && v.im.is_finite()) {
                    return Err(Error::NonFinite { at: format!("tau = {tau} for target {t}") });
                }
                vals.push(v);
            }
            rays.push(pairwise_sum(&vals) * e.conj());
        }
        Ok(pairwise_sum(&rays) * (-h / PI))
    }

    /// `K_μφ(t)` and the principal-value outcome when the limit was engaged.
    pub(crate) fn eval(&self, t: Complex64) -> Result<(Complex64, Option<PvOutcome>)> {
        if t == ZERO {
            return Err(Error::Domain("target t = 0 is the singular parameter".into()));
        }
        if !(t.re.is_finite() && t.im.is_finite()) {
            return Err(Error::Domain(format!("target {t} is not finite")));
        }
        let reg = self.ctx.regular_part(t);
        let transform = match &self.radial {
            Some((m, groups)) => self.radial_transform(t, m, groups),
            None => self.polar_transform(t)?,
        };
        if !self.pv {
            return Ok((self.regular_sum(&self.base, t, &reg)? + transform, None));
        }
        let mut acc = ZERO;
        let mut prev_eps = f64::NAN;
        let outcome = pv_limit(
            |eps| {
                if prev_eps.is_nan() {
                    acc = self.regular_sum(&self.base, t, &reg)?;
                } else {
                    let ring = AnnulusRule::new(eps, prev_eps)?
                        .with_panels(1, self.opts.order)
                        .with_n_theta(self.opts.n_theta);
                    acc += self.regular_sum(&self.nodes(&ring), t, &reg)?;
                }
                prev_eps = eps;
                Ok(acc)
            },
            &PVConfig { eps0: self.inner(), ..self.opts.pv },
        )?;
        Ok((outcome.value + transform, Some(outcome)))
    }
}

/// `K_μφ` at each target, for a `(0,1)`-form `φ`.
pub fn solve_area(
    ctx: &KernelContext,
    phi: &MonomialFormSum,
    targets: &[Complex64],
    opts: &SolveOptions,
) -> Result<SolveReport> {
    use rayon::prelude::*;
    let solver = AreaSolver::new(ctx, phi, opts)?;
    let results: Vec<(Complex64, Option<PvOutcome>)> =
        targets.par_iter().map(|&t| solver.eval(t)).collect::<Result<_>>()?;
    let pv_increments = solver.pv.then(|| results.iter().map(|(_, o)| o.map_or(0.0, |o| o.increment)).collect());
    Ok(SolveReport {
        values: targets.iter().zip(&results).map(|(&t, (u, _))| (t, *u)).collect(),
        resolution: solver.resolution(),
        pv_increments,
    })
}
