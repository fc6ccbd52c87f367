//! Hefer quotients, the meromorphic kernel `C(t,τ)`, the weight factor
//! `w₀^μ` and the area density `κ(t,τ) = −2i·C·w₀^μ·ω`.
//!
//! With `z = π(t)`, `ζ = π(τ)` the Hefer quotients are
//!
//! ```text
//! q₁ = (f(ζ₁,ζ₂) − f(z₁,ζ₂))/(ζ₁ − z₁),   q₂ = (f(z₁,ζ₂) − f(z₁,z₂))/(ζ₂ − z₂)
//! ```
//!
//! and on the curve `C = q₁/(2πi·η₂) = −q₂/(2πi·η₁)`, `ηᵢ = πᵢ(τ) − πᵢ(t)`.
//! On the cusp `C = (1/2πi)(τ^{rs} − t^{rs})/((τʳ − tʳ)(τˢ − tˢ))`, which
//! has removable singularities at `τ = ωt` for nontrivial `r`-th and `s`-th
//! roots of unity `ω`; it is evaluated in the cancelled form
//! `G_s(τʳ,tʳ)/((τ − t)·G_s(τ,t))` with `G_n(u,v) = Σ uᵏv^{n−1−k}`, or the
//! same with `r` and `s` exchanged near an `s`-th root.

use crate::curve::Curve;
use crate::error::{Error, Result};
use crate::polyalg::UniPoly;
use num_complex::Complex64;
use std::f64::consts::PI;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);
const I: Complex64 = Complex64::new(0.0, 1.0);

pub const DEFAULT_GUARD_REMOVABLE: f64 = 1e-3;

/// `G_n(u, v) = Σ_{k<n} uᵏ v^{n−1−k} = (uⁿ − vⁿ)/(u − v)`.
fn geometric_quotient(n: u32, u: Complex64, v: Complex64) -> Complex64 {
    let mut acc = ONE;
    let mut vp = ONE;
    for _ in 1..n {
        vp *= v;
        acc = acc * u + vp;
    }
    acc
}

/// Curve, weight power and the removable-point threshold.
#[derive(Debug, Clone)]
pub struct KernelContext {
    curve: Curve,
    mu: u32,
    guard_removable: f64,
    f1_on: UniPoly,
    f2_on: UniPoly,
}

impl KernelContext {
    pub fn new(curve: Curve, mu: u32) -> Self {
        let f1_on = curve.grad(1).compose(curve.pi1(), curve.pi2());
        let f2_on = curve.grad(2).compose(curve.pi1(), curve.pi2());
        Self { curve, mu, guard_removable: DEFAULT_GUARD_REMOVABLE, f1_on, f2_on }
    }

    pub fn with_guard_removable(mut self, guard: f64) -> Result<Self> {
        if !(guard > 0.0 && guard.is_finite()) {
            return Err(Error::InvalidArgument(format!("guard_removable must be positive, got {guard}")));
        }
        self.guard_removable = guard;
        Ok(self)
    }

    pub fn curve(&self) -> &Curve {
        &self.curve
    }

    pub fn mu(&self) -> u32 {
        self.mu
    }

    pub fn guard_removable(&self) -> f64 {
        self.guard_removable
    }

    /// Same context with another weight power.
    pub fn with_mu(&self, mu: u32) -> Self {
        Self { mu, ..self.clone() }
    }

    /// Hefer quotients `(q₁, q₂)` at `z = π(t)`, `ζ = π(τ)`.
    pub fn hefer(&self, t: Complex64, tau: Complex64) -> (Complex64, Complex64) {
        let (z1, z2) = self.curve.pi(t);
        let (w1, w2) = self.curve.pi(tau);
        hefer_at(&self.curve, (z1, z2), (w1, w2))
    }

    /// `C(t, τ)`.
    pub fn cauchy_c(&self, t: Complex64, tau: Complex64) -> Result<Complex64> {
        if tau == t {
            return Err(Error::Domain(format!("kernel C has a pole on the diagonal tau = t = {t}")));
        }
        let v = match self.curve.as_cusp() {
            Some(c) => {
                let (r, s) = (c.r(), c.s());
                let scale = t.norm() + tau.norm();
                let gs = geometric_quotient(s, tau, t);
                if gs.norm() >= self.guard_removable * scale.powi(s as i32 - 1) {
                    geometric_quotient(s, tau.powu(r), t.powu(r)) / ((tau - t) * gs)
                } else {
                    let gr = geometric_quotient(r, tau, t);
                    geometric_quotient(r, tau.powu(s), t.powu(s)) / ((tau - t) * gr)
                }
            }
            None => {
                let (q1, q2) = self.hefer(t, tau);
                let d1 = self.curve.pi1().diff_quotient(tau, t);
                let d2 = self.curve.pi2().diff_quotient(tau, t);
                if d2.norm() >= d1.norm() {
                    q1 / ((tau - t) * d2)
                } else {
                    -q2 / ((tau - t) * d1)
                }
            }
        };
        let v = v / (2.0 * PI * I);
        if !(v.re.is_finite() && v.im.is_finite()) {
            return Err(Error::Domain(format!("kernel C is singular at (t, tau) = ({t}, {tau})")));
        }
        Ok(v)
    }

    /// `w₀(t,τ)^μ`, holomorphic in `t`, equal to 1 on the diagonal.
    pub fn weight_factor(&self, t: Complex64, tau: Complex64) -> Result<Complex64> {
        if self.mu == 0 {
            return Ok(ONE);
        }
        let (a1, a2) = self.curve.pi(t);
        let (b1, b2) = self.curve.pi(tau);
        let den = b1.norm_sqr() + b2.norm_sqr();
        if den == 0.0 {
            return Err(Error::Domain(format!("weight factor undefined where pi(tau) = 0, tau = {tau}")));
        }
        Ok(((a1 * b1.conj() + a2 * b2.conj()) / den).powu(self.mu))
    }

    /// Area density `κ(t,τ) = −2i·C(t,τ)·w₀^μ·ω(τ)`.
    pub fn kernel_density(&self, t: Complex64, tau: Complex64) -> Result<Complex64> {
        let c = self.cauchy_c(t, tau)?;
        let w = self.weight_factor(t, tau)?;
        let omega = self.curve.canonical_weight(tau)?;
        Ok(-2.0 * I * c * w * omega)
    }

    /// The smooth part of the unweighted density at a fixed target.
    pub fn regular_part(&self, t: Complex64) -> RegularPart {
        RegularPart::new(self, t)
    }
}

/// Hefer quotients at ambient points `z`, `ζ`.
pub fn hefer_at(curve: &Curve, z: (Complex64, Complex64), zeta: (Complex64, Complex64)) -> (Complex64, Complex64) {
    let f = curve.f();
    (f.quotient_first(zeta.0, z.0, zeta.1), f.quotient_second(z.0, zeta.1, z.1))
}

/// Numerator/denominator pair of one route for `R₀`.
#[derive(Debug, Clone)]
struct Route {
    /// `(q·π′ − D·(∂f∘π))/(τ − t)`.
    num: UniPoly,
    /// `D`, the divided difference of the route's component at `t`.
    diff: UniPoly,
    /// `∂f∘π` of the route.
    grad_on: UniPoly,
    /// `π′` of the other component, used to compare routes.
    other_deriv: UniPoly,
    usable: bool,
}

/// `R₀(τ) = κ₀(t,τ) + 1/(π(τ − t))` for a fixed target `t`, where `κ₀` is
/// the unweighted density. `R₀` extends smoothly across `τ = t` and is
/// singular only where `κ₀` is (at `τ = 0` on singular curves).
///
/// With `Q = (q₁π₂′ − D₂·(∂₁f∘π))/(τ − t)` and `D₂ = (π₂(τ) − π₂(t))/(τ − t)`
/// one has `R₀ = −Q/(π·D₂·(∂₁f∘π))`; the mirrored route through `q₂` is
/// used where `D₂` is small relative to `D₁`.
#[derive(Debug, Clone)]
pub struct RegularPart {
    routes: [Route; 2],
}

impl RegularPart {
    pub fn new(ctx: &KernelContext, t: Complex64) -> Self {
        let curve = &ctx.curve;
        let (z1, z2) = curve.pi(t);
        let f = curve.f();

        // q₁(τ) = Σ_j π₂(τ)ʲ·(row_j[X] divided at z₁)∘π₁
        let mut q1 = UniPoly::zero();
        let mut p2pow = UniPoly::constant(ONE);
        let mut j = 0;
        while let Some(row) = f.row(j) {
            let piece = row.divide_by_linear(z1).compose(curve.pi1());
            q1 = &q1 + &(&piece * &p2pow);
            p2pow = &p2pow * curve.pi2();
            j += 1;
        }
        let q2 = f.restrict_first(z1).divide_by_linear(z2).compose(curve.pi2());

        let route2 = Self::route(&q1, curve.dpi2(), curve.pi2().divide_by_linear(t), &ctx.f1_on, curve.dpi1(), t);
        let route1 = Self::route(&q2, curve.dpi1(), curve.pi1().divide_by_linear(t), &ctx.f2_on, curve.dpi2(), t);
        Self { routes: [route2, route1] }
    }

    fn route(
        q: &UniPoly,
        deriv: &UniPoly,
        diff: UniPoly,
        grad_on: &UniPoly,
        other_deriv: &UniPoly,
        t: Complex64,
    ) -> Route {
        let usable = !grad_on.is_zero() && !deriv.is_zero();
        let p = &(q * deriv) - &(&diff * grad_on);
        let mut num = p.divide_by_linear(t);
        if let Some(ord) = p.order() {
            let mut c = num.coeffs().to_vec();
            for x in c.iter_mut().take(ord) {
                *x = ZERO;
            }
            num = UniPoly::new(c);
        }
        Route { num, diff, grad_on: grad_on.clone(), other_deriv: other_deriv.clone(), usable }
    }

    pub fn eval(&self, tau: Complex64) -> Complex64 {
        let [r2, r1] = &self.routes;
        let use_second = if !r1.usable {
            true
        } else if !r2.usable {
            false
        } else {
            // |D₂/π₂′| ≥ |D₁/π₁′|, cross-multiplied
            (r2.diff.eval(tau) * r1.other_deriv.eval(tau)).norm()
                >= (r1.diff.eval(tau) * r2.other_deriv.eval(tau)).norm()
        };
        let r = if use_second { r2 } else { r1 };
        // Both routes give R₀ = −Q/(π·D·(∂f∘π)): in the mirrored one the
        // signs of C = −q₂/(2πi·η₁) and ω = −π₁′/(∂₂f∘π) cancel.
        let b = r.diff.eval(tau) * r.grad_on.eval(tau);
        -r.num.eval(tau) / (PI * b)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::curve::CuspCurve;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    /// `(1/2πi)·Π(τ − ωt)/(τ − t)` over `ω^{rs} = 1` with `ωʳ ≠ 1`, `ωˢ ≠ 1`,
    /// the fully cancelled product form of the cusp kernel.
    fn product_oracle(r: u32, s: u32, t: Complex64, tau: Complex64) -> Complex64 {
        let n = r * s;
        let mut p = ONE;
        for k in 0..n {
            if k % s == 0 || k % r == 0 {
                continue;
            }
            let w = Complex64::from_polar(1.0, 2.0 * PI * k as f64 / n as f64);
            p *= tau - w * t;
        }
        p / ((tau - t) * 2.0 * PI * I)
    }

    #[test]
    fn hefer_examples() {
        let ctx = KernelContext::new(Curve::cusp(2, 3).unwrap(), 0);
        // q₁ = (ζ₁² − z₁²)/(ζ₁ − z₁) = ζ₁ + z₁
        let (q1, _) = hefer_at(ctx.curve(), (c(1.0, 0.0), c(0.3, 0.0)), (c(2.0, 0.0), c(0.7, 0.0)));
        assert_eq!(q1, c(3.0, 0.0));
        let f = ctx.curve().f();
        let z = (c(0.3, -0.2), c(1.1, 0.4));
        let w = (c(-0.5, 0.9), c(0.2, 0.6));
        let (q1, q2) = hefer_at(ctx.curve(), z, w);
        let lhs = q1 * (w.0 - z.0) + q2 * (w.1 - z.1);
        assert!((lhs - (f.eval(w.0, w.1) - f.eval(z.0, z.1))).norm() < 1e-14);
        let (t, tau) = (c(0.4, 0.3), c(-0.6, 0.2));
        let (q1, q2) = ctx.hefer(t, tau);
        let (a, b) = (ctx.curve().pi(tau), ctx.curve().pi(t));
        assert!((q1 * (a.0 - b.0) + q2 * (a.1 - b.1)).norm() < 1e-15);
    }

    #[test]
    fn cauchy_c_examples() {
        let ctx = KernelContext::new(Curve::cusp(2, 3).unwrap(), 0);
        let v = ctx.cauchy_c(c(1.0, 0.0), c(2.0, 0.0)).unwrap() * 2.0 * PI * I;
        assert!((v - c(3.0, 0.0)).norm() < 1e-14);
        let v = ctx.cauchy_c(c(1.0, 0.0), c(-1.0, 0.0)).unwrap();
        assert!((v - c(0.0, 3.0 / (4.0 * PI))).norm() < 1e-15);
        assert!(matches!(ctx.cauchy_c(c(0.5, 0.0), c(0.5, 0.0)), Err(Error::Domain(_))));
        for d in [1e-3, 1e-6] {
            let tau = c(1.0 + d, 0.0);
            let v = ctx.cauchy_c(c(1.0, 0.0), tau).unwrap() * 2.0 * PI * I * (tau - 1.0);
            assert!((v - 1.0).norm() < 3.0 * d);
        }
    }

    #[test]
    fn cusp_closed_form_matches_product_oracle() {
        for (r, s) in [(2, 3), (2, 5), (3, 4), (3, 5)] {
            let ctx = KernelContext::new(Curve::cusp(r, s).unwrap(), 0);
            let t = c(0.45, 0.2);
            for k in 1..r * s {
                let w = Complex64::from_polar(1.0, 2.0 * PI * k as f64 / (r * s) as f64);
                for d in [c(1e-3, 0.0), c(0.0, -1e-3), c(0.3, 0.1)] {
                    let tau = w * t + d;
                    let got = ctx.cauchy_c(t, tau).unwrap();
                    let want = product_oracle(r, s, t, tau);
                    assert!((got - want).norm() <= 1e-12 * want.norm().max(1e-3), "({r},{s}) k={k}: {got} vs {want}");
                }
            }
        }
    }

    #[test]
    fn param_view_agrees_with_cusp_closed_form() {
        for (r, s) in [(2, 3), (3, 5)] {
            let cusp = KernelContext::new(Curve::cusp(r, s).unwrap(), 0);
            let view = KernelContext::new(Curve::from_param(CuspCurve::new(r, s).unwrap().param()).unwrap(), 0);
            for (t, tau) in [(c(0.3, 0.1), c(-0.5, 0.4)), (c(0.6, -0.2), c(0.61, -0.19)), (c(0.2, 0.2), c(0.9, 0.0))] {
                let a = cusp.cauchy_c(t, tau).unwrap();
                let b = view.cauchy_c(t, tau).unwrap();
                assert!((a - b).norm() < 1e-12 * a.norm(), "{a} vs {b}");
            }
        }
    }

    #[test]
    fn weight_factor_examples() {
        let ctx = KernelContext::new(Curve::cusp(2, 3).unwrap(), 3);
        let tau = c(0.4, -0.3);
        assert_eq!(ctx.with_mu(0).weight_factor(c(0.1, 0.0), tau).unwrap(), ONE);
        assert!((ctx.weight_factor(tau, tau).unwrap() - ONE).norm() < 1e-15);
        assert_eq!(ctx.weight_factor(ZERO, tau).unwrap(), ZERO);
        assert!(ctx.weight_factor(c(0.1, 0.0), ZERO).is_err());
        // holomorphic in t
        let h = 1e-4;
        let u = |t: Complex64| ctx.weight_factor(t, tau).unwrap();
        let t = c(0.3, 0.2);
        let fd = ((u(t + h) - u(t - h)) + I * (u(t + I * h) - u(t - I * h))) / (4.0 * h);
        assert!(fd.norm() < 1e-6);
    }

    #[test]
    fn smooth_model_density_is_cauchy_kernel() {
        let ctx = KernelContext::new(Curve::smooth_model(), 0);
        for (t, tau) in [(c(0.2, 0.1), c(-0.3, 0.5)), (c(0.0, 0.0), c(0.7, 0.0)), (c(1.5, -2.0), c(1.5, -1.99))] {
            let got = ctx.kernel_density(t, tau).unwrap();
            let want = -1.0 / (PI * (tau - t));
            assert!((got - want).norm() <= 4.0 * f64::EPSILON * want.norm(), "{got} vs {want}");
            assert_eq!(ctx.regular_part(t).eval(tau), ZERO);
        }
    }

    #[test]
    fn density_components_on_cusp() {
        let ctx = KernelContext::new(Curve::cusp(2, 3).unwrap(), 0);
        let (t, tau) = (c(0.3, 0.25), c(-0.4, 0.35));
        let c_val =
            (tau.powi(6) - t.powi(6)) / ((tau.powi(2) - t.powi(2)) * (tau.powi(3) - t.powi(3))) / (2.0 * PI * I);
        let want = -2.0 * I * c_val * tau.powi(-2);
        let got = ctx.kernel_density(t, tau).unwrap();
        assert!((got - want).norm() < 1e-13 * want.norm());
        assert!(ctx.kernel_density(t, ZERO).is_err());
    }

    #[test]
    fn regular_part_matches_density_off_diagonal() {
        let curves = [
            Curve::cusp(2, 3).unwrap(),
            Curve::cusp(3, 5).unwrap(),
            Curve::from_param(CuspCurve::new(3, 4).unwrap().param()).unwrap(),
        ];
        for curve in curves {
            let ctx = KernelContext::new(curve, 0);
            let t = c(0.35, 0.15);
            let reg = ctx.regular_part(t);
            for tau in [c(-0.3, 0.4), c(0.5, -0.1), c(0.1, 0.05), -t, t * I] {
                let want = ctx.kernel_density(t, tau).unwrap() + 1.0 / (PI * (tau - t));
                let got = reg.eval(tau);
                assert!((got - want).norm() < 1e-9 * want.norm().max(1.0), "{tau}: {got} vs {want}");
            }
            // continuous across the diagonal
            let a = reg.eval(t + c(1e-7, 0.0));
            let b = reg.eval(t);
            assert!((a - b).norm() < 1e-5 * b.norm().max(1.0));
        }
    }
}
