use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;

use num_complex::Complex64;
use num_traits::{One, Zero};

use super::AlgebraError;
use crate::scalar::GaussRational;

/// Exponent tuple `g ∈ Z^n` of a monomial `z^g`.
pub type Exponent = Vec<i64>;

/// Graded lexicographic order: total degree first, then lex with `z1 > z2 > …`.
pub fn grlex_cmp(a: &[i64], b: &[i64]) -> Ordering {
    let da: i64 = a.iter().sum();
    let db: i64 = b.iter().sum();
    da.cmp(&db).then_with(|| a.cmp(b))
}

fn divides(small: &[i64], big: &[i64]) -> bool {
    small.iter().zip(big).all(|(s, b)| s <= b)
}

/// Componentwise extremes of the exponents of a nonzero Laurent polynomial.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DegreeBox {
    pub min: Exponent,
    pub max: Exponent,
    /// `max ‖g‖∞` over the exponents present.
    pub inf_norm: u64,
}

/// Result of a single-divisor exact division.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Division {
    Quotient(LaurentPoly),
    NotDivisible,
}

impl Division {
    pub fn quotient(self) -> Option<LaurentPoly> {
        match self {
            Division::Quotient(q) => Some(q),
            Division::NotDivisible => None,
        }
    }
}

/// A finite Laurent series `Σ c_g z^g` over the Gaussian rationals.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct LaurentPoly {
    dimension: usize,
    terms: BTreeMap<Exponent, GaussRational>,
}

impl LaurentPoly {
    pub fn zero(dimension: usize) -> Self {
        Self { dimension, terms: BTreeMap::new() }
    }

    pub fn one(dimension: usize) -> Self {
        Self::constant(dimension, GaussRational::one())
    }

    pub fn constant(dimension: usize, c: GaussRational) -> Self {
        Self::monomial(dimension, vec![0; dimension], c)
    }

    pub fn monomial(dimension: usize, exp: Exponent, c: GaussRational) -> Self {
        assert_eq!(exp.len(), dimension, "exponent length must equal the dimension");
        let mut terms = BTreeMap::new();
        if !c.is_zero() {
            terms.insert(exp, c);
        }
        Self { dimension, terms }
    }

    /// The variable `z_{axis+1}` raised to `power`.
    pub fn var(dimension: usize, axis: usize, power: i64) -> Self {
        let mut e = vec![0; dimension];
        e[axis] = power;
        Self::monomial(dimension, e, GaussRational::one())
    }

    pub fn from_terms(dimension: usize, terms: impl IntoIterator<Item = (Exponent, GaussRational)>) -> Self {
        let mut p = Self::zero(dimension);
        for (e, c) in terms {
            assert_eq!(e.len(), dimension, "exponent length must equal the dimension");
            p.add_term(e, &c);
        }
        p
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Exponent, &GaussRational)> {
        self.terms.iter()
    }

    pub fn coeff(&self, exp: &[i64]) -> GaussRational {
        self.terms.get(exp).cloned().unwrap_or_else(GaussRational::zero)
    }

    pub fn is_constant(&self) -> bool {
        self.terms.keys().all(|e| e.iter().all(|&x| x == 0))
    }

    /// The constant coefficient if the polynomial is constant.
    pub fn as_constant(&self) -> Option<GaussRational> {
        if self.is_constant() {
            Some(self.coeff(&vec![0; self.dimension]))
        } else {
            None
        }
    }

    /// True when every exponent is componentwise nonnegative.
    pub fn is_polynomial(&self) -> bool {
        self.terms.keys().all(|e| e.iter().all(|&x| x >= 0))
    }

    pub fn has_real_coefficients(&self) -> bool {
        self.terms.values().all(|c| c.is_real())
    }

    pub(crate) fn add_term(&mut self, exp: Exponent, c: &GaussRational) {
        if c.is_zero() {
            return;
        }
        match self.terms.entry(exp) {
            std::collections::btree_map::Entry::Occupied(mut e) => {
                *e.get_mut() += c;
                if e.get().is_zero() {
                    e.remove();
                }
            }
            std::collections::btree_map::Entry::Vacant(e) => {
                e.insert(c.clone());
            }
        }
    }

    fn check_dim(&self, other: &Self) -> Result<(), AlgebraError> {
        if self.dimension != other.dimension {
            return Err(AlgebraError::DimensionMismatch { left: self.dimension, right: other.dimension });
        }
        Ok(())
    }

    pub fn try_add(&self, other: &Self) -> Result<Self, AlgebraError> {
        self.check_dim(other)?;
        let mut out = self.clone();
        for (e, c) in &other.terms {
            out.add_term(e.clone(), c);
        }
        Ok(out)
    }

    pub fn try_sub(&self, other: &Self) -> Result<Self, AlgebraError> {
        self.check_dim(other)?;
        let mut out = self.clone();
        for (e, c) in &other.terms {
            out.add_term(e.clone(), &-c);
        }
        Ok(out)
    }

    pub fn try_mul(&self, other: &Self) -> Result<Self, AlgebraError> {
        self.check_dim(other)?;
        let mut out = Self::zero(self.dimension);
        for (ea, ca) in &self.terms {
            for (eb, cb) in &other.terms {
                let e: Exponent = ea.iter().zip(eb).map(|(x, y)| x + y).collect();
                out.add_term(e, &(ca * cb));
            }
        }
        Ok(out)
    }

    pub fn add(&self, other: &Self) -> Self {
        self.try_add(other).expect("dimension mismatch in LaurentPoly::add")
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.try_sub(other).expect("dimension mismatch in LaurentPoly::sub")
    }

    pub fn mul(&self, other: &Self) -> Self {
        self.try_mul(other).expect("dimension mismatch in LaurentPoly::mul")
    }

    pub fn neg(&self) -> Self {
        Self { dimension: self.dimension, terms: self.terms.iter().map(|(e, c)| (e.clone(), -c)).collect() }
    }

    pub fn scale(&self, c: &GaussRational) -> Self {
        if c.is_zero() {
            return Self::zero(self.dimension);
        }
        Self { dimension: self.dimension, terms: self.terms.iter().map(|(e, v)| (e.clone(), v * c)).collect() }
    }

    /// `z^shift · self`.
    pub fn mul_monomial(&self, shift: &[i64]) -> Self {
        assert_eq!(shift.len(), self.dimension);
        Self {
            dimension: self.dimension,
            terms: self
                .terms
                .iter()
                .map(|(e, c)| (e.iter().zip(shift).map(|(a, b)| a + b).collect(), c.clone()))
                .collect(),
        }
    }

    pub fn pow(&self, k: u32) -> Self {
        let mut acc = Self::one(self.dimension);
        for _ in 0..k {
            acc = acc.mul(self);
        }
        acc
    }

    /// Componentwise minimum exponent (the largest monomial dividing every term).
    pub fn min_exponent(&self) -> Option<Exponent> {
        let mut it = self.terms.keys();
        let first = it.next()?.clone();
        Some(it.fold(first, |acc, e| acc.iter().zip(e).map(|(a, b)| *a.min(b)).collect()))
    }

    pub fn max_exponent(&self) -> Option<Exponent> {
        let mut it = self.terms.keys();
        let first = it.next()?.clone();
        Some(it.fold(first, |acc, e| acc.iter().zip(e).map(|(a, b)| *a.max(b)).collect()))
    }

    /// Writes `self = z^{-shift} · poly` with `poly` a polynomial that no
    /// variable divides.
    pub fn clear_to_polynomial(&self) -> Result<(LaurentPoly, Exponent), AlgebraError> {
        let min = self.min_exponent().ok_or(AlgebraError::ZeroInput)?;
        let shift: Exponent = min.iter().map(|m| -m).collect();
        Ok((self.mul_monomial(&shift), shift))
    }

    /// Splits `self = z^q · rest` where `rest` has no monomial content.
    pub fn split_monomial_content(&self) -> Result<(Exponent, LaurentPoly), AlgebraError> {
        let (poly, shift) = self.clear_to_polynomial()?;
        Ok((shift.iter().map(|s| -s).collect(), poly))
    }

    pub fn degree_box(&self) -> Result<DegreeBox, AlgebraError> {
        let min = self.min_exponent().ok_or(AlgebraError::ZeroInput)?;
        let max = self.max_exponent().expect("nonzero");
        Ok(DegreeBox { inf_norm: self.inf_norm(), min, max })
    }

    /// `max ‖g‖∞` over the exponents present; zero for the zero polynomial.
    pub fn inf_norm(&self) -> u64 {
        self.terms.keys().flat_map(|e| e.iter().map(|x| x.unsigned_abs())).max().unwrap_or(0)
    }

    /// Degree in one variable (maximum exponent), `None` for zero.
    pub fn degree_in(&self, axis: usize) -> Option<i64> {
        self.terms.keys().map(|e| e[axis]).max()
    }

    pub fn total_degree(&self) -> Option<i64> {
        self.terms.keys().map(|e| e.iter().sum()).max()
    }

    /// Leading term under graded lex.
    pub fn leading_term(&self) -> Option<(&Exponent, &GaussRational)> {
        self.terms.iter().max_by(|a, b| grlex_cmp(a.0, b.0))
    }

    /// Single-divisor multivariate division under graded lex. Both inputs
    /// must be polynomials (nonnegative exponents).
    pub fn exact_divide(&self, divisor: &LaurentPoly) -> Result<Division, AlgebraError> {
        self.check_dim(divisor)?;
        if divisor.is_zero() {
            return Err(AlgebraError::ZeroDivisor);
        }
        if !self.is_polynomial() || !divisor.is_polynomial() {
            return Err(AlgebraError::NotPolynomial);
        }
        let (lead_exp, lead_c) = divisor.leading_term().map(|(e, c)| (e.clone(), c.clone())).expect("nonzero");
        let mut rem = self.clone();
        let mut quot = Self::zero(self.dimension);
        while let Some((e, c)) = rem.leading_term().map(|(e, c)| (e.clone(), c.clone())) {
            // A multiple of d always has a leading term divisible by LT(d).
            if !divides(&lead_exp, &e) {
                return Ok(Division::NotDivisible);
            }
            let m: Exponent = e.iter().zip(&lead_exp).map(|(a, b)| a - b).collect();
            let factor = &c / &lead_c;
            for (de, dc) in &divisor.terms {
                let te: Exponent = de.iter().zip(&m).map(|(a, b)| a + b).collect();
                rem.add_term(te, &-(dc * &factor));
            }
            quot.add_term(m, &factor);
        }
        Ok(Division::Quotient(quot))
    }

    /// Exact division in the Laurent ring: clears both sides first.
    pub fn exact_divide_laurent(&self, divisor: &LaurentPoly) -> Result<Division, AlgebraError> {
        self.check_dim(divisor)?;
        if divisor.is_zero() {
            return Err(AlgebraError::ZeroDivisor);
        }
        if self.is_zero() {
            return Ok(Division::Quotient(Self::zero(self.dimension)));
        }
        let (p, sp) = self.clear_to_polynomial()?;
        let (d, sd) = divisor.clear_to_polynomial()?;
        Ok(match p.exact_divide(&d)? {
            Division::Quotient(q) => {
                let back: Exponent = sd.iter().zip(&sp).map(|(a, b)| a - b).collect();
                Division::Quotient(q.mul_monomial(&back))
            }
            Division::NotDivisible => Division::NotDivisible,
        })
    }

    pub fn eval_exact(&self, z: &[GaussRational]) -> Result<GaussRational, AlgebraError> {
        if z.len() != self.dimension {
            return Err(AlgebraError::DimensionMismatch { left: self.dimension, right: z.len() });
        }
        if z.iter().any(|x| x.is_zero()) {
            return Err(AlgebraError::EvaluationAtZero);
        }
        Ok(self
            .terms
            .iter()
            .map(|(e, c)| e.iter().zip(z).fold(c.clone(), |acc, (k, zi)| &acc * &zi.powi(*k)))
            .sum())
    }

    pub fn eval(&self, z: &[Complex64]) -> Complex64 {
        assert_eq!(z.len(), self.dimension);
        self.terms
            .iter()
            .map(|(e, c)| e.iter().zip(z).fold(c.to_complex(), |acc, (k, zi)| acc * zi.powi(*k as i32)))
            .sum()
    }

    /// Partial evaluation of every variable except `keep`, giving univariate
    /// complex coefficients indexed by the exponent of `z_keep` (offset by the
    /// minimum exponent, which is returned too).
    pub fn eval_except(&self, keep: usize, z: &[Complex64]) -> (i64, Vec<Complex64>) {
        let lo = self.terms.keys().map(|e| e[keep]).min().unwrap_or(0);
        let hi = self.terms.keys().map(|e| e[keep]).max().unwrap_or(0);
        let mut coeffs = vec![Complex64::new(0.0, 0.0); (hi - lo + 1) as usize];
        for (e, c) in &self.terms {
            let mut v = c.to_complex();
            for (axis, k) in e.iter().enumerate() {
                if axis != keep {
                    v *= z[axis].powi(*k as i32);
                }
            }
            coeffs[(e[keep] - lo) as usize] += v;
        }
        (lo, coeffs)
    }

    /// Canonical rendering: graded lex descending, exact coefficients.
    pub fn render(&self) -> String {
        if self.terms.is_empty() {
            return "0".to_string();
        }
        let mut keys: Vec<&Exponent> = self.terms.keys().collect();
        keys.sort_by(|a, b| grlex_cmp(b, a));
        let mut out = String::new();
        for (i, e) in keys.into_iter().enumerate() {
            let c = &self.terms[e];
            let mono = render_monomial(e);
            let (neg, body) = if c.is_negative_real() {
                (true, render_coeff(&-c, &mono))
            } else {
                (false, render_coeff(c, &mono))
            };
            match (i, neg) {
                (0, false) => out.push_str(&body),
                (0, true) => {
                    out.push('-');
                    out.push_str(&body);
                }
                (_, false) => {
                    out.push_str(" + ");
                    out.push_str(&body);
                }
                (_, true) => {
                    out.push_str(" - ");
                    out.push_str(&body);
                }
            }
        }
        out
    }
}

fn render_monomial(e: &[i64]) -> String {
    let parts: Vec<String> = e
        .iter()
        .enumerate()
        .filter(|(_, &k)| k != 0)
        .map(|(i, &k)| if k == 1 { format!("z{}", i + 1) } else { format!("z{}^{}", i + 1, k) })
        .collect();
    parts.join("*")
}

fn render_coeff(c: &GaussRational, mono: &str) -> String {
    let c_txt = if c.is_real() { c.to_string() } else { format!("({c})") };
    if mono.is_empty() {
        c_txt
    } else if c.is_one() {
        mono.to_string()
    } else {
        format!("{c_txt}*{mono}")
    }
}

impl fmt::Display for LaurentPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.render())
    }
}

impl fmt::Debug for LaurentPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "LaurentPoly({})", self.render())
    }
}
