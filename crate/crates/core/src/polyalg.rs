//! Complex polynomial arithmetic in one and two variables.
//!
//! Coefficients are `Complex64`. Difference quotients `(p(z) − p(w))/(z − w)`
//! are always formed by synthetic division of `p(X) − p(w)` by `X − w`, so the
//! confluent case `z = w` needs no special branch and yields `p′(w)`.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

/// Univariate polynomial, coefficients in ascending degree.
#[derive(Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(try_from = "UniPolyJson", into = "UniPolyJson")]
pub struct UniPoly {
    coeffs: Vec<Complex64>,
}

impl UniPoly {
    /// Builds a polynomial, trimming trailing zero coefficients.
    pub fn new(mut coeffs: Vec<Complex64>) -> Self {
        while coeffs.last().is_some_and(|c| *c == ZERO) {
            coeffs.pop();
        }
        Self { coeffs }
    }

    pub fn from_real(coeffs: &[f64]) -> Self {
        Self::new(coeffs.iter().map(|&c| Complex64::new(c, 0.0)).collect())
    }

    pub fn zero() -> Self {
        Self { coeffs: Vec::new() }
    }

    pub fn constant(c: Complex64) -> Self {
        Self::new(vec![c])
    }

    /// `c·Xᵏ`.
    pub fn monomial(c: Complex64, k: usize) -> Self {
        let mut coeffs = vec![ZERO; k + 1];
        coeffs[k] = c;
        Self::new(coeffs)
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Degree, `None` for the zero polynomial.
    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    /// Index of the lowest nonzero coefficient (order of vanishing at 0).
    pub fn order(&self) -> Option<usize> {
        self.coeffs.iter().position(|c| *c != ZERO)
    }

    /// If the polynomial is a single term `c·Xᵈ`, returns `(c, d)`.
    pub fn as_monomial(&self) -> Option<(Complex64, usize)> {
        let d = self.order()?;
        (d + 1 == self.coeffs.len()).then(|| (self.coeffs[d], d))
    }

    pub fn coeff(&self, k: usize) -> Complex64 {
        self.coeffs.get(k).copied().unwrap_or(ZERO)
    }

    /// Horner evaluation.
    pub fn eval(&self, z: Complex64) -> Complex64 {
        self.coeffs.iter().rev().fold(ZERO, |acc, &c| acc * z + c)
    }

    pub fn derivative(&self) -> Self {
        Self::new(self.coeffs.iter().enumerate().skip(1).map(|(k, &c)| c * k as f64).collect())
    }

    /// Polynomial whose coefficients are the complex conjugates of these,
    /// so that `conj_coeffs().eval(conj(z)) == conj(eval(z))`.
    pub fn conj_coeffs(&self) -> Self {
        Self { coeffs: self.coeffs.iter().map(|c| c.conj()).collect() }
    }

    pub fn scale(&self, c: Complex64) -> Self {
        Self::new(self.coeffs.iter().map(|&a| a * c).collect())
    }

    pub fn pow(&self, n: u32) -> Self {
        let mut out = Self::constant(ONE);
        for _ in 0..n {
            out = &out * self;
        }
        out
    }

    /// `self ∘ inner`, by Horner's scheme on polynomials.
    pub fn compose(&self, inner: &UniPoly) -> Self {
        self.coeffs.iter().rev().fold(Self::zero(), |acc, &c| &(&acc * inner) + &Self::constant(c))
    }

    /// Quotient of `p(X) − p(w)` by `X − w` (synthetic division, remainder
    /// dropped). Its value at `z` is the divided difference `p[z, w]`.
    pub fn divide_by_linear(&self, w: Complex64) -> Self {
        let n = self.coeffs.len();
        if n <= 1 {
            return Self::zero();
        }
        let mut q = vec![ZERO; n - 1];
        q[n - 2] = self.coeffs[n - 1];
        for k in (1..n - 1).rev() {
            q[k - 1] = self.coeffs[k] + w * q[k];
        }
        Self::new(q)
    }

    /// Divided difference `(p(z) − p(w))/(z − w)`; equals `p′(z)` when `z = w`.
    ///
    /// Synthetic division and the Horner pass over the quotient are fused, so
    /// no intermediate polynomial is allocated.
    pub fn diff_quotient(&self, z: Complex64, w: Complex64) -> Complex64 {
        let n = self.coeffs.len();
        if n <= 1 {
            return ZERO;
        }
        let mut q = self.coeffs[n - 1];
        let mut acc = q;
        for k in (1..n - 1).rev() {
            q = self.coeffs[k] + w * q;
            acc = acc * z + q;
        }
        acc
    }
}

impl fmt::Debug for UniPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "UniPoly{:?}", self.coeffs)
    }
}

impl Add for &UniPoly {
    type Output = UniPoly;
    fn add(self, rhs: &UniPoly) -> UniPoly {
        let n = self.coeffs.len().max(rhs.coeffs.len());
        UniPoly::new((0..n).map(|k| self.coeff(k) + rhs.coeff(k)).collect())
    }
}

impl Sub for &UniPoly {
    type Output = UniPoly;
    fn sub(self, rhs: &UniPoly) -> UniPoly {
        let n = self.coeffs.len().max(rhs.coeffs.len());
        UniPoly::new((0..n).map(|k| self.coeff(k) - rhs.coeff(k)).collect())
    }
}

impl Neg for &UniPoly {
    type Output = UniPoly;
    fn neg(self) -> UniPoly {
        UniPoly { coeffs: self.coeffs.iter().map(|c| -c).collect() }
    }
}

impl Mul for &UniPoly {
    type Output = UniPoly;
    fn mul(self, rhs: &UniPoly) -> UniPoly {
        if self.is_zero() || rhs.is_zero() {
            return UniPoly::zero();
        }
        let mut out = vec![ZERO; self.coeffs.len() + rhs.coeffs.len() - 1];
        for (i, &a) in self.coeffs.iter().enumerate() {
            if a == ZERO {
                continue;
            }
            for (j, &b) in rhs.coeffs.iter().enumerate() {
                out[i + j] += a * b;
            }
        }
        UniPoly::new(out)
    }
}

#[derive(Serialize, Deserialize)]
struct UniPolyJson {
    coeffs: Vec<[f64; 2]>,
}

impl From<UniPoly> for UniPolyJson {
    fn from(p: UniPoly) -> Self {
        Self { coeffs: p.coeffs.iter().map(|c| [c.re, c.im]).collect() }
    }
}

impl TryFrom<UniPolyJson> for UniPoly {
    type Error = String;
    fn try_from(j: UniPolyJson) -> Result<Self, String> {
        if j.coeffs.iter().flatten().any(|x| !x.is_finite()) {
            return Err("non-finite coefficient".into());
        }
        Ok(UniPoly::new(j.coeffs.iter().map(|c| Complex64::new(c[0], c[1])).collect()))
    }
}

/// Bivariate polynomial `Σ c_ij z₁ⁱ z₂ʲ`.
///
/// Terms are kept sorted by `(i, j)` without duplicates or zero coefficients.
/// For evaluation the polynomial is also stored as a list of univariate
/// polynomials in `z₁`, one per power of `z₂`.
#[derive(Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "BiPolyJson", into = "BiPolyJson")]
pub struct BiPoly {
    terms: Vec<(u32, u32, Complex64)>,
    #[serde(skip)]
    rows: Vec<UniPoly>,
}

impl BiPoly {
    /// Builds a polynomial from `(i, j, c)` triples, merging duplicates.
    pub fn new(terms: impl IntoIterator<Item = (u32, u32, Complex64)>) -> Self {
        let mut merged: Vec<(u32, u32, Complex64)> = Vec::new();
        let mut all: Vec<_> = terms.into_iter().collect();
        all.sort_by_key(|&(i, j, _)| (i, j));
        for (i, j, c) in all {
            match merged.last_mut() {
                Some(last) if last.0 == i && last.1 == j => last.2 += c,
                _ => merged.push((i, j, c)),
            }
        }
        merged.retain(|t| t.2 != ZERO);

        let max_j = merged.iter().map(|t| t.1).max().map_or(0, |j| j as usize + 1);
        let mut rows = vec![Vec::new(); max_j];
        for &(i, j, c) in &merged {
            let row = &mut rows[j as usize];
            if row.len() <= i as usize {
                row.resize(i as usize + 1, ZERO);
            }
            row[i as usize] += c;
        }
        let rows = rows.into_iter().map(UniPoly::new).collect();
        Self { terms: merged, rows }
    }

    pub fn from_real(terms: &[(u32, u32, f64)]) -> Self {
        Self::new(terms.iter().map(|&(i, j, c)| (i, j, Complex64::new(c, 0.0))))
    }

    pub fn terms(&self) -> &[(u32, u32, Complex64)] {
        &self.terms
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// Coefficient of `z₂ʲ` as a polynomial in `z₁`.
    pub fn row(&self, j: usize) -> Option<&UniPoly> {
        self.rows.get(j)
    }

    /// Horner in `z₁` for every power of `z₂`, then Horner in `z₂`.
    pub fn eval(&self, z1: Complex64, z2: Complex64) -> Complex64 {
        self.rows.iter().rev().fold(ZERO, |acc, row| acc * z2 + row.eval(z1))
    }

    /// Formal partial derivative in `z₁` (`which = 1`) or `z₂` (`which = 2`).
    pub fn partial(&self, which: u8) -> Self {
        assert!(which == 1 || which == 2, "variable index must be 1 or 2");
        Self::new(self.terms.iter().filter_map(|&(i, j, c)| match which {
            1 if i > 0 => Some((i - 1, j, c * i as f64)),
            2 if j > 0 => Some((i, j - 1, c * j as f64)),
            _ => None,
        }))
    }

    /// `f(p₁(τ), p₂(τ))` as a univariate polynomial.
    pub fn compose(&self, p1: &UniPoly, p2: &UniPoly) -> UniPoly {
        self.rows.iter().rev().fold(UniPoly::zero(), |acc, row| &(&acc * p2) + &row.compose(p1))
    }

    /// `f(z₁, ·)` as a polynomial in `z₂`.
    pub fn restrict_first(&self, z1: Complex64) -> UniPoly {
        UniPoly::new(self.rows.iter().map(|row| row.eval(z1)).collect())
    }

    /// `(f(ζ₁, ζ₂) − f(z₁, ζ₂)) / (ζ₁ − z₁)`, exact at `ζ₁ = z₁`.
    pub fn quotient_first(&self, zeta1: Complex64, z1: Complex64, zeta2: Complex64) -> Complex64 {
        self.rows.iter().rev().fold(ZERO, |acc, row| acc * zeta2 + row.diff_quotient(zeta1, z1))
    }

    /// `(f(z₁, ζ₂) − f(z₁, z₂)) / (ζ₂ − z₂)`, exact at `ζ₂ = z₂`.
    pub fn quotient_second(&self, z1: Complex64, zeta2: Complex64, z2: Complex64) -> Complex64 {
        self.restrict_first(z1).diff_quotient(zeta2, z2)
    }
}

impl fmt::Debug for BiPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "BiPoly{:?}", self.terms)
    }
}

#[derive(Serialize, Deserialize)]
struct BiPolyJson {
    terms: Vec<(u32, u32, f64, f64)>,
}

impl From<BiPoly> for BiPolyJson {
    fn from(p: BiPoly) -> Self {
        Self { terms: p.terms.iter().map(|&(i, j, c)| (i, j, c.re, c.im)).collect() }
    }
}

impl TryFrom<BiPolyJson> for BiPoly {
    type Error = String;
    fn try_from(j: BiPolyJson) -> Result<Self, String> {
        if j.terms.iter().any(|t| !t.2.is_finite() || !t.3.is_finite()) {
            return Err("non-finite coefficient".into());
        }
        Ok(BiPoly::new(j.terms.iter().map(|&(i, j, re, im)| (i, j, Complex64::new(re, im)))))
    }
}
