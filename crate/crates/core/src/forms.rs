//! Symbolic functions and `(0,1)`-forms on the curve, written in the
//! parameter `τ`.
//!
//! A [`MonomialFormSum`] is a finite sum of terms `c·τᵃ·τ̄ᵇ·E(|τ|²)`, where
//! the optional envelope `E` is a smooth radial cutoff ([`RadialBump`]) or its
//! derivative. Degree-1 forms carry one implicit `dτ̄` factor. `∂̄` is exact
//! on this representation.
//!
//! Text grammar (whitespace-insensitive):
//!
//! ```text
//! form   := sum [ ',' 'dbar' ]
//! sum    := ['+'|'-'] term ( ('+'|'-') term )*
//! term   := factor ( '*' factor )*
//! factor := coeff | 'tau' ['^' int] | '~tau' ['^' int] | '(' sum ')'
//!         | 'bump(' real ',' real ')' | 'dbump(' real ',' real ')'
//! coeff  := real | real ('+'|'-') [real] 'i' | [real] 'i' | '(' coeff ')'
//! ```
//!
//! The arguments of `bump` are `ρ₀²` and `ρ₁²`. A real number followed by
//! `±b i` is read as one complex literal, so `3 + 2i*tau` means `(3+2i)·τ`;
//! write `2i*tau + 3` for the sum. A sign in front of such a literal belongs
//! to its real part: `-0.4+2.5i` is `(-0.4) + 2.5i`. Parenthesized sums are multiplied out;
//! each resulting term may carry at most one bump. `dbump` is the derivative envelope `β′`
//! produced by [`MonomialFormSum::dbar`].

use crate::error::{Error, Result};
use num_complex::Complex64;
use std::fmt;
use std::str::FromStr;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// Smooth radial cutoff `β(x)` of `x = |τ|²`: `1` for `x ≤ ρ₀²`, `0` for
/// `x ≥ ρ₁²`, monotone and `C^∞` in between.
///
/// `β(x) = ψ((ρ₁² − x)/(ρ₁² − ρ₀²))` with `ψ(u) = σ(u)/(σ(u) + σ(1 − u))`,
/// `σ(u) = exp(−1/u)` for `u > 0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RadialBump {
    rho0sq: f64,
    rho1sq: f64,
}

impl RadialBump {
    pub fn new(rho0sq: f64, rho1sq: f64) -> Result<Self> {
        if !(rho0sq.is_finite() && rho1sq.is_finite() && 0.0 <= rho0sq && rho0sq < rho1sq) {
            return Err(Error::InvalidArgument(format!("bump needs 0 <= rho0sq < rho1sq, got ({rho0sq}, {rho1sq})")));
        }
        Ok(Self { rho0sq, rho1sq })
    }

    pub fn rho0sq(&self) -> f64 {
        self.rho0sq
    }

    pub fn rho1sq(&self) -> f64 {
        self.rho1sq
    }

    fn u(&self, x: f64) -> f64 {
        (self.rho1sq - x) / (self.rho1sq - self.rho0sq)
    }

    /// `β(x)`.
    pub fn value(&self, x: f64) -> f64 {
        let u = self.u(x);
        if u >= 1.0 {
            1.0
        } else if u <= 0.0 {
            0.0
        } else {
            // ψ(u) = 1 / (1 + exp(1/u − 1/(1−u)))
            1.0 / (1.0 + (1.0 / u - 1.0 / (1.0 - u)).exp())
        }
    }

    /// `β′(x)`; zero outside `(ρ₀², ρ₁²)`.
    pub fn slope(&self, x: f64) -> f64 {
        let u = self.u(x);
        if u <= 0.0 || u >= 1.0 {
            return 0.0;
        }
        let psi = 1.0 / (1.0 + (1.0 / u - 1.0 / (1.0 - u)).exp());
        let dpsi = psi * (1.0 - psi) * (1.0 / (u * u) + 1.0 / ((1.0 - u) * (1.0 - u)));
        -dpsi / (self.rho1sq - self.rho0sq)
    }
}

/// Radial factor of a term, as a function of `x = |τ|²`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Envelope {
    Bump(RadialBump),
    /// `β′(x)`, produced by `∂̄` of a bumped term.
    BumpSlope(RadialBump),
}

impl Envelope {
    pub fn value(&self, x: f64) -> f64 {
        match self {
            Envelope::Bump(b) => b.value(x),
            Envelope::BumpSlope(b) => b.slope(x),
        }
    }

    pub fn bump(&self) -> &RadialBump {
        match self {
            Envelope::Bump(b) | Envelope::BumpSlope(b) => b,
        }
    }

    /// Value on `x < ρ₀²`.
    fn inner_value(&self) -> f64 {
        match self {
            Envelope::Bump(_) => 1.0,
            Envelope::BumpSlope(_) => 0.0,
        }
    }
}

/// One term `c·τᵃ·τ̄ᵇ·E(|τ|²)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Term {
    pub a: u32,
    pub b: u32,
    pub coeff: Complex64,
    pub envelope: Option<Envelope>,
}

impl Term {
    pub fn eval(&self, tau: Complex64) -> Complex64 {
        let env = self.envelope.map_or(1.0, |e| e.value(tau.norm_sqr()));
        if env == 0.0 {
            return ZERO;
        }
        self.coeff * tau.powu(self.a) * tau.conj().powu(self.b) * env
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FormDegree {
    /// A function.
    Function,
    /// A `(0,1)`-form `φ̂ dτ̄`.
    Form01,
}

/// Where a form can be nonzero, in radii: it vanishes on `|τ| < hole` and,
/// when `outer` is known, on `|τ| > outer`.
#[derive(Debug, Clone, PartialEq)]
pub struct FormSupport {
    pub hole: f64,
    pub outer: Option<f64>,
    /// Radii at which some envelope is not analytic.
    pub knots: Vec<f64>,
}

/// Symbolic function or `(0,1)`-form on the curve.
#[derive(Debug, Clone, PartialEq)]
pub struct MonomialFormSum {
    terms: Vec<Term>,
    degree: FormDegree,
}

impl MonomialFormSum {
    /// Builds a form, merging terms with equal exponents and envelope and
    /// dropping zero coefficients.
    pub fn new(terms: impl IntoIterator<Item = Term>, degree: FormDegree) -> Self {
        let mut merged: Vec<Term> = Vec::new();
        for t in terms {
            match merged.iter_mut().find(|m| m.a == t.a && m.b == t.b && m.envelope == t.envelope) {
                Some(m) => m.coeff += t.coeff,
                None => merged.push(t),
            }
        }
        merged.retain(|t| t.coeff != ZERO);
        Self { terms: merged, degree }
    }

    pub fn zero(degree: FormDegree) -> Self {
        Self { terms: Vec::new(), degree }
    }

    pub fn terms(&self) -> &[Term] {
        &self.terms
    }

    pub fn degree(&self) -> FormDegree {
        self.degree
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// Same terms with the other degree (attach or drop the `dτ̄`).
    pub fn with_degree(&self, degree: FormDegree) -> Self {
        Self { terms: self.terms.clone(), degree }
    }

    /// Coefficient value `Σ c τᵃ τ̄ᵇ E(|τ|²)` (of `1` or of `dτ̄`).
    pub fn eval(&self, tau: Complex64) -> Complex64 {
        self.terms.iter().map(|t| t.eval(tau)).sum()
    }

    /// True when every term is `c·τᵃ` without envelope.
    pub fn is_holomorphic_polynomial(&self) -> bool {
        self.terms.iter().all(|t| t.b == 0 && t.envelope.is_none())
    }

    /// Exact `∂̄` of a function: `τᵃτ̄ᵇβ(|τ|²) ↦ (b τᵃτ̄ᵇ⁻¹ β + τᵃ⁺¹τ̄ᵇ β′) dτ̄`.
    pub fn dbar(&self) -> Result<Self> {
        if self.degree != FormDegree::Function {
            return Err(Error::InvalidArgument("dbar of a (0,1)-form is zero on a curve; expected a function".into()));
        }
        let mut out = Vec::new();
        for t in &self.terms {
            if t.b > 0 {
                out.push(Term { a: t.a, b: t.b - 1, coeff: t.coeff * t.b as f64, envelope: t.envelope });
            }
            match t.envelope {
                None => {}
                Some(Envelope::Bump(bump)) => {
                    out.push(Term { a: t.a + 1, b: t.b, coeff: t.coeff, envelope: Some(Envelope::BumpSlope(bump)) })
                }
                Some(Envelope::BumpSlope(_)) => {
                    return Err(Error::InvalidArgument("dbar of a bump-derivative envelope is not supported".into()))
                }
            }
        }
        Ok(Self::new(out, FormDegree::Form01))
    }

    /// Effective `(a, b, c)` coefficients on a small disc around `τ = 0`,
    /// where bumps equal 1 and bump derivatives vanish.
    pub fn near_zero_terms(&self) -> Vec<(u32, u32, Complex64)> {
        let mut out: Vec<(u32, u32, Complex64, f64)> = Vec::new();
        for t in &self.terms {
            let v = t.coeff * t.envelope.map_or(1.0, |e| e.inner_value());
            match out.iter_mut().find(|o| o.0 == t.a && o.1 == t.b) {
                Some(o) => {
                    o.2 += v;
                    o.3 = o.3.max(t.coeff.norm());
                }
                None => out.push((t.a, t.b, v, t.coeff.norm())),
            }
        }
        out.into_iter().filter(|o| o.2.norm() > 1e-14 * o.3).map(|o| (o.0, o.1, o.2)).collect()
    }

    pub fn support(&self) -> FormSupport {
        let mut knots: Vec<f64> = self
            .terms
            .iter()
            .filter_map(|t| t.envelope)
            .flat_map(|e| [e.bump().rho0sq.sqrt(), e.bump().rho1sq.sqrt()])
            .filter(|&r| r > 0.0)
            .collect();
        knots.sort_by(f64::total_cmp);
        knots.dedup();

        let outer = if self.terms.is_empty() {
            Some(0.0)
        } else if self.terms.iter().any(|t| t.envelope.is_none()) {
            None
        } else {
            Some(self.terms.iter().map(|t| t.envelope.map_or(0.0, |e| e.bump().rho1sq.sqrt())).fold(0.0, f64::max))
        };

        let hole = if self.terms.is_empty() || !self.near_zero_terms().is_empty() {
            0.0
        } else {
            // Every monomial group cancels near 0; it stays zero up to the
            // smallest plateau radius of its envelopes.
            self.terms.iter().map(|t| t.envelope.map_or(0.0, |e| e.bump().rho0sq.sqrt())).fold(f64::INFINITY, f64::min)
        };
        FormSupport { hole, outer, knots }
    }
}

impl fmt::Display for MonomialFormSum {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            write!(f, "0")?;
        }
        for (k, t) in self.terms.iter().enumerate() {
            if k > 0 {
                write!(f, " + ")?;
            }
            write!(f, "({}{:+}i)", t.coeff.re, t.coeff.im)?;
            if t.a > 0 {
                write!(f, "*tau^{}", t.a)?;
            }
            if t.b > 0 {
                write!(f, "*~tau^{}", t.b)?;
            }
            match t.envelope {
                Some(Envelope::Bump(b)) => write!(f, "*bump({},{})", b.rho0sq, b.rho1sq)?,
                Some(Envelope::BumpSlope(b)) => write!(f, "*dbump({},{})", b.rho0sq, b.rho1sq)?,
                None => {}
            }
        }
        if self.degree == FormDegree::Form01 {
            write!(f, ", dbar")?;
        }
        Ok(())
    }
}

impl FromStr for MonomialFormSum {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        parse_expr(s)
    }
}

/// Parses a form in the grammar described in the module docs.
pub fn parse_expr(text: &str) -> Result<MonomialFormSum> {
    let parsed = Parser::new(text).parse_sum()?;
    let degree = match &parsed.suffix {
        None => FormDegree::Function,
        Some((s, _)) if s == "dbar" => FormDegree::Form01,
        Some((s, pos)) => return Err(Error::Parse { pos: *pos, msg: format!("expected 'dbar', found '{s}'") }),
    };
    let mut terms = Vec::new();
    for raw in parsed.terms {
        let (mut a, mut b) = (0u32, 0u32);
        for (name, exp, pos) in &raw.vars {
            match name.as_str() {
                "tau" => a += exp,
                "~tau" => b += exp,
                other => return Err(Error::Parse { pos: *pos, msg: format!("unknown variable '{other}'") }),
            }
        }
        terms.push(Term { a, b, coeff: raw.coeff, envelope: raw.envelope });
    }
    Ok(MonomialFormSum::new(terms, degree))
}

/// Parses a standalone complex literal (`a+bi`, `a`, `bi`, `(a+bi)`).
pub fn parse_complex_literal(text: &str) -> Result<Complex64> {
    let mut p = Parser::new(text);
    let sign = p.sign();
    let z = p.coeff(sign)?.ok_or_else(|| p.err("expected a complex number"))?;
    p.skip_ws();
    if p.pos < p.chars.len() {
        return Err(p.err("trailing characters after complex number"));
    }
    Ok(z)
}

/// Term of a generic polynomial expression, before the caller maps variable
/// names to exponents.
#[derive(Debug, Clone)]
pub(crate) struct RawTerm {
    pub coeff: Complex64,
    /// `(name, exponent, position)`; names include a leading `~` when barred.
    pub vars: Vec<(String, u32, usize)>,
    pub envelope: Option<Envelope>,
}

#[derive(Debug, Clone)]
pub(crate) struct RawSum {
    pub terms: Vec<RawTerm>,
    pub suffix: Option<(String, usize)>,
}

pub(crate) struct Parser {
    chars: Vec<char>,
    pos: usize,
}

impl Parser {
    pub(crate) fn new(text: &str) -> Self {
        Self { chars: text.chars().collect(), pos: 0 }
    }

    fn err(&self, msg: &str) -> Error {
        Error::Parse { pos: self.pos, msg: msg.to_string() }
    }

    fn skip_ws(&mut self) {
        while self.chars.get(self.pos).is_some_and(|c| c.is_whitespace()) {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<char> {
        self.skip_ws();
        self.chars.get(self.pos).copied()
    }

    fn eat(&mut self, c: char) -> bool {
        if self.peek() == Some(c) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expect(&mut self, c: char) -> Result<()> {
        if self.eat(c) {
            Ok(())
        } else {
            Err(self.err(&format!("expected '{c}'")))
        }
    }

    fn sign(&mut self) -> f64 {
        if self.eat('-') {
            -1.0
        } else {
            self.eat('+');
            1.0
        }
    }

    /// Unsigned decimal number with optional exponent, no leading whitespace skip.
    fn raw_number(&mut self) -> Option<f64> {
        let start = self.pos;
        let mut end = self.pos;
        let digits = |c: &char| c.is_ascii_digit();
        while self.chars.get(end).is_some_and(digits) {
            end += 1;
        }
        if self.chars.get(end) == Some(&'.') {
            end += 1;
            while self.chars.get(end).is_some_and(digits) {
                end += 1;
            }
        }
        let mantissa: String = self.chars[start..end].iter().collect();
        if mantissa.is_empty() || mantissa == "." {
            return None;
        }
        if matches!(self.chars.get(end), Some('e') | Some('E')) {
            let mut k = end + 1;
            if matches!(self.chars.get(k), Some('+') | Some('-')) {
                k += 1;
            }
            if self.chars.get(k).is_some_and(digits) {
                while self.chars.get(k).is_some_and(digits) {
                    k += 1;
                }
                end = k;
            }
        }
        let text: String = self.chars[start..end].iter().collect();
        let v = text.parse().ok()?;
        self.pos = end;
        Some(v)
    }

    fn number(&mut self) -> Option<f64> {
        self.skip_ws();
        self.raw_number()
    }

    /// Imaginary suffix `i` not followed by an identifier character.
    fn imag_unit(&mut self) -> bool {
        self.skip_ws();
        if self.chars.get(self.pos) == Some(&'i')
            && !self.chars.get(self.pos + 1).is_some_and(|c| c.is_ascii_alphanumeric() || *c == '_')
        {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    /// Complex literal; `None` if the input does not start with one. `lead`
    /// is the sign already read in front of it, which binds to the first
    /// component (`-a+bi` is `(-a)+bi`) or to a whole parenthesized literal.
    fn coeff(&mut self, lead: f64) -> Result<Option<Complex64>> {
        let save = self.pos;
        if self.peek() == Some('(') {
            self.pos += 1;
            let s = self.sign();
            match self.coeff(s)? {
                Some(z) if self.eat(')') => return Ok(Some(z * lead)),
                _ => {
                    self.pos = save;
                    return Ok(None);
                }
            }
        }
        if self.imag_unit() {
            return Ok(Some(Complex64::new(0.0, lead)));
        }
        let Some(re) = self.number().map(|x| x * lead) else {
            return Ok(None);
        };
        if self.imag_unit() {
            return Ok(Some(Complex64::new(0.0, re)));
        }
        // Greedy a±bi.
        let after_re = self.pos;
        if let Some(op) = self.peek().filter(|c| *c == '+' || *c == '-') {
            self.pos += 1;
            let s = if op == '-' { -1.0 } else { 1.0 };
            if self.imag_unit() {
                return Ok(Some(Complex64::new(re, s)));
            }
            if let Some(im) = self.number() {
                if self.imag_unit() {
                    return Ok(Some(Complex64::new(re, s * im)));
                }
            }
            self.pos = after_re;
        }
        Ok(Some(Complex64::new(re, 0.0)))
    }

    fn ident(&mut self) -> Option<(String, usize)> {
        self.skip_ws();
        let start = self.pos;
        let mut end = start;
        if self.chars.get(end) == Some(&'~') {
            end += 1;
        }
        let body_start = end;
        while self.chars.get(end).is_some_and(|c| c.is_ascii_alphanumeric() || *c == '_') {
            end += 1;
        }
        if end == body_start {
            return None;
        }
        self.pos = end;
        Some((self.chars[start..end].iter().collect(), start))
    }

    fn exponent(&mut self) -> Result<u32> {
        if !self.eat('^') {
            return Ok(1);
        }
        self.skip_ws();
        if self.chars.get(self.pos) == Some(&'-') {
            return Err(self.err("negative exponent"));
        }
        let start = self.pos;
        while self.chars.get(self.pos).is_some_and(|c| c.is_ascii_digit()) {
            self.pos += 1;
        }
        let s: String = self.chars[start..self.pos].iter().collect();
        s.parse().map_err(|_| Error::Parse { pos: start, msg: "expected a non-negative integer exponent".into() })
    }

    fn bump_args(&mut self) -> Result<RadialBump> {
        self.expect('(')?;
        let s0 = self.sign();
        let r0 = self.number().ok_or_else(|| self.err("expected a real number"))? * s0;
        self.expect(',')?;
        let s1 = self.sign();
        let r1 = self.number().ok_or_else(|| self.err("expected a real number"))? * s1;
        let pos = self.pos;
        self.expect(')')?;
        RadialBump::new(r0, r1).map_err(|e| Error::Parse { pos, msg: e.to_string() })
    }

    /// One product with a leading `sign`, expanded over parenthesized sums.
    fn term(&mut self, sign: f64) -> Result<Vec<RawTerm>> {
        let mut acc = vec![RawTerm { coeff: Complex64::new(1.0, 0.0), vars: Vec::new(), envelope: None }];
        let mut pending = sign;
        loop {
            let pos = {
                self.skip_ws();
                self.pos
            };
            let factor: Vec<RawTerm> = if let Some(c) = self.coeff(pending)? {
                pending = 1.0;
                vec![RawTerm { coeff: c, vars: Vec::new(), envelope: None }]
            } else if self.eat('(') {
                let group = self.terms()?;
                self.expect(')')?;
                group
            } else if let Some((name, pos)) = self.ident() {
                let mut t = RawTerm { coeff: Complex64::new(1.0, 0.0), vars: Vec::new(), envelope: None };
                if name == "bump" || name == "dbump" {
                    let b = self.bump_args()?;
                    t.envelope = Some(if name == "bump" { Envelope::Bump(b) } else { Envelope::BumpSlope(b) });
                } else {
                    let exp = self.exponent()?;
                    t.vars.push((name, exp, pos));
                }
                vec![t]
            } else {
                return Err(self.err("expected a coefficient, variable, bump or '('"));
            };
            let mut next = Vec::with_capacity(acc.len() * factor.len());
            for x in &acc {
                for y in &factor {
                    let envelope = match (x.envelope, y.envelope) {
                        (Some(_), Some(_)) => {
                            return Err(Error::Parse { pos, msg: "at most one bump per term".into() })
                        }
                        (e, None) | (None, e) => e,
                    };
                    let mut vars = x.vars.clone();
                    vars.extend(y.vars.iter().cloned());
                    next.push(RawTerm { coeff: x.coeff * y.coeff, vars, envelope });
                }
            }
            acc = next;
            if pending != 1.0 {
                acc.iter_mut().for_each(|t| t.coeff *= pending);
                pending = 1.0;
            }
            if !self.eat('*') {
                return Ok(acc);
            }
        }
    }

    fn terms(&mut self) -> Result<Vec<RawTerm>> {
        let mut terms = Vec::new();
        let mut sign = self.sign();
        loop {
            terms.extend(self.term(sign)?);
            match self.peek() {
                Some('+') => {
                    self.pos += 1;
                    sign = 1.0;
                }
                Some('-') => {
                    self.pos += 1;
                    sign = -1.0;
                }
                _ => return Ok(terms),
            }
        }
    }

    pub(crate) fn parse_sum(&mut self) -> Result<RawSum> {
        let terms = self.terms()?;
        let suffix = if self.eat(',') {
            Some(self.ident().ok_or_else(|| self.err("expected an identifier after ','"))?)
        } else {
            None
        };
        self.skip_ws();
        if self.pos < self.chars.len() {
            return Err(self.err("unexpected character"));
        }
        Ok(RawSum { terms, suffix })
    }
}
