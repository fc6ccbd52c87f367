//! Plane curves `Z = {f = 0}` with a polynomial parametrization
//! `τ ↦ π(τ) = (π₁(τ), π₂(τ))`, singular only at `τ = 0`.
//!
//! The canonical weight `ω(τ)` is the coefficient of the pullback of
//! `(1/2πi)·γ⌟dζ₁∧dζ₂`, so that kernel measures are `ω(τ)dτ`:
//!
//! ```text
//! ω = (conj(∂₁f)·π₂′ − conj(∂₂f)·π₁′) / |∇f|²      evaluated at π(τ)
//! ```
//!
//! On the curve this equals `π₂′/(∂₁f∘π) = −π₁′/(∂₂f∘π)`. For the cusp
//! `z₁ʳ = z₂ˢ` with `π = (τˢ, τʳ)` it is `τ^{−(r−1)(s−1)}`.

use crate::error::{Error, Result};
use crate::forms::{FormDegree, MonomialFormSum, Parser, Term};
use crate::polyalg::{BiPoly, UniPoly};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

fn gcd(a: u32, b: u32) -> u32 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

/// The cusp `z₁ʳ = z₂ˢ`, `2 ≤ r < s`, `gcd(r,s) = 1`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct CuspCurve {
    r: u32,
    s: u32,
}

impl CuspCurve {
    pub fn new(r: u32, s: u32) -> Result<Self> {
        if r < 2 || r >= s {
            return Err(Error::InvalidCurve(format!("cusp needs 2 <= r < s, got r={r}, s={s}")));
        }
        if gcd(r, s) != 1 {
            return Err(Error::InvalidCurve(format!("cusp needs gcd(r,s) = 1, got gcd({r},{s}) = {}", gcd(r, s))));
        }
        Ok(Self { r, s })
    }

    pub fn r(&self) -> u32 {
        self.r
    }

    pub fn s(&self) -> u32 {
        self.s
    }

    /// `(r−1)(s−1)`, the pole order of `ω`.
    pub fn pole_order(&self) -> u32 {
        (self.r - 1) * (self.s - 1)
    }

    /// `π = (τˢ, τʳ)`, `f = z₁ʳ − z₂ˢ`.
    pub fn param(&self) -> ParamCurve {
        ParamCurve {
            pi1: UniPoly::monomial(ONE, self.s as usize),
            pi2: UniPoly::monomial(ONE, self.r as usize),
            f: BiPoly::from_real(&[(self.r, 0, 1.0), (0, self.s, -1.0)]),
        }
    }

    pub fn semigroup(&self) -> SemigroupInfo {
        semigroup_unchecked(self.r, self.s)
    }
}

/// Raw parametrization data `(π₁, π₂, f)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParamCurve {
    pub pi1: UniPoly,
    pub pi2: UniPoly,
    pub f: BiPoly,
}

/// Text/JSON description of a curve.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase")]
pub enum CurveSpec {
    Cusp { r: u32, s: u32 },
    Param { pi1: UniPoly, pi2: UniPoly, f: BiPoly },
}

#[derive(Debug, Clone, PartialEq)]
pub enum CurveKind {
    Cusp(CuspCurve),
    Param,
}

/// A validated curve with derived data used by the kernels.
#[derive(Debug, Clone, PartialEq)]
pub struct Curve {
    kind: CurveKind,
    param: ParamCurve,
    dpi1: UniPoly,
    dpi2: UniPoly,
    f1: BiPoly,
    f2: BiPoly,
    pole_order: u32,
    min_order: u32,
}

/// Validates a curve description.
pub fn make_curve(spec: &CurveSpec) -> Result<Curve> {
    match spec {
        CurveSpec::Cusp { r, s } => Ok(Curve::cusp(*r, *s)?),
        CurveSpec::Param { pi1, pi2, f } => {
            Curve::from_param(ParamCurve { pi1: pi1.clone(), pi2: pi2.clone(), f: f.clone() })
        }
    }
}

/// Deterministic sample parameters in `0.3 ≤ |τ| ≤ 1.5`.
fn sample_params(n: usize) -> impl Iterator<Item = Complex64> {
    const GOLDEN: f64 = 0.618_033_988_749_894_8;
    (0..n).map(|k| {
        let r = 0.3 + 1.2 * ((k as f64 * GOLDEN) % 1.0);
        Complex64::from_polar(r, 2.399_963_229_728_653 * k as f64 + 0.5)
    })
}

impl Curve {
    pub fn cusp(r: u32, s: u32) -> Result<Self> {
        let c = CuspCurve::new(r, s)?;
        let mut curve = Self::build(c.param())?;
        curve.kind = CurveKind::Cusp(c);
        Ok(curve)
    }

    /// The line `π = (τ, τ)`, `f = z₁ − z₂`, with `ω ≡ 1`.
    pub fn smooth_model() -> Self {
        Self::build(ParamCurve {
            pi1: UniPoly::from_real(&[0.0, 1.0]),
            pi2: UniPoly::from_real(&[0.0, 1.0]),
            f: BiPoly::from_real(&[(1, 0, 1.0), (0, 1, -1.0)]),
        })
        .expect("the smooth model is a valid curve")
    }

    pub fn from_param(param: ParamCurve) -> Result<Self> {
        Self::build(param)
    }

    fn build(param: ParamCurve) -> Result<Self> {
        let ParamCurve { pi1, pi2, f } = &param;
        let (Some(d1), Some(d2)) = (pi1.degree(), pi2.degree()) else {
            return Err(Error::InvalidCurve("parametrization components must be nonzero".into()));
        };
        if d1 == 0 && d2 == 0 {
            return Err(Error::InvalidCurve("parametrization is constant".into()));
        }
        if f.is_zero() {
            return Err(Error::InvalidCurve("defining polynomial is zero".into()));
        }

        // τ ↦ π(τ) must not factor through τ ↦ τᵈ, d > 1.
        let g = [pi1, pi2]
            .iter()
            .flat_map(|p| p.coeffs().iter().enumerate().skip(1))
            .filter(|(_, c)| **c != ZERO)
            .fold(0u32, |g, (k, _)| gcd(g, k as u32));
        if g != 1 {
            return Err(Error::InvalidCurve(format!("parametrization is not primitive: it is a function of tau^{g}")));
        }

        for tau in sample_params(32) {
            let (z1, z2) = (pi1.eval(tau), pi2.eval(tau));
            let scale: f64 =
                f.terms().iter().map(|&(i, j, c)| c.norm() * z1.norm().powi(i as i32) * z2.norm().powi(j as i32)).sum();
            let v = f.eval(z1, z2);
            if !(v.norm() <= 1e-10 * scale.max(f64::MIN_POSITIVE)) {
                return Err(Error::InvalidCurve(format!(
                    "f(pi(tau)) = {v} at tau = {tau} is not zero (relative {:e})",
                    v.norm() / scale
                )));
            }
        }

        let dpi1 = pi1.derivative();
        let dpi2 = pi2.derivative();
        let f1 = f.partial(1);
        let f2 = f.partial(2);

        // ω = π₂′/(∂₁f∘π) = −π₁′/(∂₂f∘π); the pole order is an order difference.
        let f1_on = f1.compose(pi1, pi2);
        let f2_on = f2.compose(pi1, pi2);
        let (num, den) = if !f1_on.is_zero() && !dpi2.is_zero() {
            (&dpi2, &f1_on)
        } else if !f2_on.is_zero() && !dpi1.is_zero() {
            (&dpi1, &f2_on)
        } else {
            return Err(Error::InvalidCurve("gradient of f vanishes identically on the curve".into()));
        };
        let (num_ord, den_ord) = (num.order().unwrap_or(0) as i64, den.order().unwrap_or(0) as i64);
        let pole = den_ord - num_ord;
        if pole < 0 {
            return Err(Error::InvalidCurve(format!(
                "canonical weight vanishes to order {} at tau = 0; f is not reduced along the curve",
                -pole
            )));
        }
        let pole_order = pole as u32;

        let ord1 = pi1.order().unwrap_or(0) as u32;
        let ord2 = pi2.order().unwrap_or(0) as u32;
        let at_origin = pi1.coeff(0) == ZERO && pi2.coeff(0) == ZERO;
        let min_order = if at_origin { ord1.min(ord2) } else { 0 };

        if pole_order > 0 {
            if !at_origin {
                return Err(Error::InvalidCurve("a singular curve must satisfy pi(0) = (0,0)".into()));
            }
            if dpi1.coeff(0) != ZERO || dpi2.coeff(0) != ZERO {
                return Err(Error::InvalidCurve("pi'(0) != 0 but the canonical weight has a pole at 0".into()));
            }
            // Necessary conditions for a single plane branch: the conductor is
            // even and conductor − 1 is a gap of every subsemigroup.
            if pole_order % 2 == 1 {
                return Err(Error::InvalidCurve(format!(
                    "pole order {pole_order} of the canonical weight is odd; the germ at 0 is not a single plane branch"
                )));
            }
            if in_monoid(&[ord1, ord2], pole_order - 1) {
                return Err(Error::InvalidCurve(format!(
                    "{} lies in the monomial semigroup <{ord1},{ord2}>; the germ at 0 is not a single plane branch",
                    pole_order - 1
                )));
            }
        }

        Ok(Self { kind: CurveKind::Param, param, dpi1, dpi2, f1, f2, pole_order, min_order })
    }

    pub fn kind(&self) -> &CurveKind {
        &self.kind
    }

    pub fn as_cusp(&self) -> Option<&CuspCurve> {
        match &self.kind {
            CurveKind::Cusp(c) => Some(c),
            CurveKind::Param => None,
        }
    }

    pub fn param(&self) -> &ParamCurve {
        &self.param
    }

    pub fn pi1(&self) -> &UniPoly {
        &self.param.pi1
    }

    pub fn pi2(&self) -> &UniPoly {
        &self.param.pi2
    }

    pub fn f(&self) -> &BiPoly {
        &self.param.f
    }

    pub fn dpi1(&self) -> &UniPoly {
        &self.dpi1
    }

    pub fn dpi2(&self) -> &UniPoly {
        &self.dpi2
    }

    /// `∂f/∂z₁` (`which = 1`) or `∂f/∂z₂` (`which = 2`).
    pub fn grad(&self, which: u8) -> &BiPoly {
        if which == 1 {
            &self.f1
        } else {
            &self.f2
        }
    }

    pub fn pi(&self, tau: Complex64) -> (Complex64, Complex64) {
        (self.param.pi1.eval(tau), self.param.pi2.eval(tau))
    }

    /// Pole order of `ω` at `τ = 0`; zero iff the curve is smooth there.
    pub fn pole_order(&self) -> u32 {
        self.pole_order
    }

    pub fn is_singular(&self) -> bool {
        self.pole_order > 0
    }

    /// Vanishing order of `π` at `τ = 0` (`0` when `π(0) ≠ (0,0)`).
    pub fn min_order(&self) -> u32 {
        self.min_order
    }

    /// `ω(τ)`; the closed form on cusps, the gradient formula otherwise.
    pub fn canonical_weight(&self, tau: Complex64) -> Result<Complex64> {
        if tau == ZERO && self.is_singular() {
            return Err(Error::Domain("canonical weight has a pole at tau = 0".into()));
        }
        match &self.kind {
            CurveKind::Cusp(c) => Ok(tau.powi(-(c.pole_order() as i32))),
            CurveKind::Param => self.canonical_weight_general(tau),
        }
    }

    /// `ω(τ)` by the gradient formula, on any curve.
    pub fn canonical_weight_general(&self, tau: Complex64) -> Result<Complex64> {
        let (z1, z2) = self.pi(tau);
        let g1 = self.f1.eval(z1, z2);
        let g2 = self.f2.eval(z1, z2);
        let n = g1.norm_sqr() + g2.norm_sqr();
        if n == 0.0 {
            return Err(Error::Domain(format!("gradient of f vanishes at pi({tau})")));
        }
        Ok((g1.conj() * self.dpi2.eval(tau) - g2.conj() * self.dpi1.eval(tau)) / n)
    }

    /// Pulls back a polynomial expression in `z1, z2, ~z1, ~z2` (aliases
    /// `z = z1`, `w = z2`) with an optional `dz̄₁`/`dz̄₂` factor written
    /// `, dbar1` / `, dbar2` (aliases `dzbar`, `dwbar`).
    ///
    /// Bump factors are kept as parameter-space envelopes.
    pub fn pullback(&self, ambient: &str) -> Result<MonomialFormSum> {
        let parsed = Parser::new(ambient).parse_sum()?;
        let conj1 = self.pi1().conj_coeffs();
        let conj2 = self.pi2().conj_coeffs();
        let (anti_factor, degree) = match &parsed.suffix {
            None => (UniPoly::constant(ONE), FormDegree::Function),
            Some((s, _)) if s == "dbar1" || s == "dzbar" => (self.dpi1.conj_coeffs(), FormDegree::Form01),
            Some((s, _)) if s == "dbar2" || s == "dwbar" => (self.dpi2.conj_coeffs(), FormDegree::Form01),
            Some((s, pos)) => {
                return Err(Error::Parse { pos: *pos, msg: format!("expected 'dbar1' or 'dbar2', found '{s}'") })
            }
        };
        let mut terms = Vec::new();
        for raw in parsed.terms {
            let mut holo = UniPoly::constant(raw.coeff);
            let mut anti = anti_factor.clone();
            for (name, exp, pos) in &raw.vars {
                match name.as_str() {
                    "z1" | "z" => holo = &holo * &self.pi1().pow(*exp),
                    "z2" | "w" => holo = &holo * &self.pi2().pow(*exp),
                    "~z1" | "~z" => anti = &anti * &conj1.pow(*exp),
                    "~z2" | "~w" => anti = &anti * &conj2.pow(*exp),
                    other => {
                        return Err(Error::Parse { pos: *pos, msg: format!("unknown ambient variable '{other}'") })
                    }
                }
            }
            for (a, &ca) in holo.coeffs().iter().enumerate() {
                for (b, &cb) in anti.coeffs().iter().enumerate() {
                    terms.push(Term { a: a as u32, b: b as u32, coeff: ca * cb, envelope: raw.envelope });
                }
            }
        }
        Ok(MonomialFormSum::new(terms, degree))
    }
}

/// `ω(τ)` of a curve.
pub fn canonical_weight(curve: &Curve, tau: Complex64) -> Result<Complex64> {
    curve.canonical_weight(tau)
}

/// Pullback of an ambient expression to the curve parameter.
pub fn pullback(ambient: &str, curve: &Curve) -> Result<MonomialFormSum> {
    curve.pullback(ambient)
}

fn in_monoid(gens: &[u32], k: u32) -> bool {
    let mut reach = vec![false; k as usize + 1];
    reach[0] = true;
    for n in 1..=k as usize {
        reach[n] = gens.iter().any(|&g| g > 0 && g as usize <= n && reach[n - g as usize]);
    }
    reach[k as usize]
}

/// Numerical semigroup `⟨r, s⟩` of a cusp.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SemigroupInfo {
    pub r: u32,
    pub s: u32,
    pub frobenius: i64,
    pub gaps: Vec<u32>,
}

impl SemigroupInfo {
    /// `k = a·r + b·s` for some `0 ≤ a ≤ s`, `0 ≤ b ≤ r`.
    pub fn contains(&self, k: u32) -> bool {
        (0..=self.s).any(|a| (0..=self.r).any(|b| a * self.r + b * self.s == k)) || k as i64 > self.frobenius
    }
}

/// Frobenius number and gaps of `⟨r, s⟩`, by enumeration.
pub fn semigroup(r: u32, s: u32) -> Result<SemigroupInfo> {
    CuspCurve::new(r, s).map(|c| c.semigroup())
}

fn semigroup_unchecked(r: u32, s: u32) -> SemigroupInfo {
    let frobenius = (r * s) as i64 - r as i64 - s as i64;
    let mut info = SemigroupInfo { r, s, frobenius, gaps: Vec::new() };
    info.gaps = (0..=frobenius.max(0) as u32).filter(|&k| !info.contains(k)).collect();
    info
}
