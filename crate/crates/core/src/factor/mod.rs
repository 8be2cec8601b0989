//! Desk-scale factorization and irreducibility over the rationals.
//!
//! Univariate inputs are split into square-free parts, peeled of rational
//! roots and then factored by Kronecker interpolation (small degree) or
//! Zassenhaus. Bivariate inputs go through the Kronecker substitution
//! `z2 -> t^D` with `D` above the total degree, a complete univariate
//! factorization of the image, and recombination of image factors checked
//! by exact bivariate division.

pub mod intpoly;
pub mod kronecker;
pub mod modp;
pub mod zassenhaus;

use std::collections::BTreeMap;
use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};

use crate::laurent::{AlgebraError, Division, Exponent, LaurentPoly};
use crate::scalar::GaussRational;
use intpoly::ZPoly;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FactorStatus {
    Exact,
    Unknown,
}

/// `unit · z^monomial · Π factor^multiplicity`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Factorization {
    pub unit: GaussRational,
    pub monomial: Exponent,
    pub factors: Vec<(LaurentPoly, u32)>,
    pub status: FactorStatus,
}

impl Factorization {
    pub fn expand(&self) -> LaurentPoly {
        let dim = self.monomial.len();
        let mut acc = LaurentPoly::monomial(dim, self.monomial.clone(), self.unit.clone());
        for (f, m) in &self.factors {
            acc = acc.mul(&f.pow(*m));
        }
        acc
    }

    pub fn render(&self) -> String {
        let mut parts = vec![self.unit.to_string()];
        if self.monomial.iter().any(|&e| e != 0) {
            parts.push(LaurentPoly::monomial(self.monomial.len(), self.monomial.clone(), GaussRational::one()).render());
        }
        for (f, m) in &self.factors {
            if *m == 1 {
                parts.push(format!("({f})"));
            } else {
                parts.push(format!("({f})^{m}"));
            }
        }
        parts.join(" * ")
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Irreducibility {
    Irreducible,
    Reducible(Factorization),
    Unknown(String),
}

impl Irreducibility {
    pub fn label(&self) -> &'static str {
        match self {
            Irreducibility::Irreducible => "irreducible",
            Irreducibility::Reducible(_) => "reducible",
            Irreducibility::Unknown(_) => "unknown",
        }
    }

    pub fn is_irreducible(&self) -> bool {
        matches!(self, Irreducibility::Irreducible)
    }
}

impl fmt::Display for Irreducibility {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Irreducibility::Irreducible => write!(f, "irreducible over Q"),
            Irreducibility::Reducible(fac) => write!(f, "reducible over Q: {}", fac.render()),
            Irreducibility::Unknown(why) => write!(f, "unknown ({why})"),
        }
    }
}

/// Degree limits beyond which the checker answers `Unknown`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct FactorBudget {
    pub univariate_degree: usize,
    pub bivariate_total_degree: usize,
    /// Largest degree handled by Kronecker interpolation before Zassenhaus.
    pub interpolation_degree: usize,
}

impl Default for FactorBudget {
    fn default() -> Self {
        Self { univariate_degree: 12, bivariate_total_degree: 8, interpolation_degree: 12 }
    }
}

/// Complete factorization of a primitive univariate integer polynomial into
/// irreducibles with multiplicities, or `None` if a search cap was hit.
pub fn factor_integer_poly(f: &[BigInt], interpolation_degree: usize) -> Option<Vec<(ZPoly, u32)>> {
    let mut out: Vec<(ZPoly, u32)> = Vec::new();
    for (part, mult) in intpoly::square_free_decomposition(f) {
        for g in factor_square_free(&part, interpolation_degree)? {
            out.push((g, mult));
        }
    }
    out.sort_by(|a, b| a.0.len().cmp(&b.0.len()).then_with(|| a.0.cmp(&b.0)).then_with(|| a.1.cmp(&b.1)));
    Some(out)
}

fn factor_square_free(f: &[BigInt], interpolation_degree: usize) -> Option<Vec<ZPoly>> {
    let mut rest = intpoly::primitive(f);
    let mut out = Vec::new();
    if let Some(lins) = kronecker::rational_root_factors(&rest) {
        for l in lins {
            rest = intpoly::z_exact_div(&rest, &l).expect("root factor divides");
            out.push(l);
        }
    }
    rest = intpoly::primitive(&rest);
    if intpoly::degree(&rest) >= 1 {
        let via_kronecker = if intpoly::degree(&rest) as usize <= interpolation_degree {
            kronecker::kronecker_factor_all(&rest)
        } else {
            None
        };
        match via_kronecker {
            Some(fs) => out.extend(fs),
            None => out.extend(zassenhaus::zassenhaus(&rest)?),
        }
    }
    Some(out)
}

/// Irreducibility of a Laurent polynomial over `Q` with the default budget.
/// Monomials are units of the Laurent ring, so the input is first written
/// as `z^q · p` with `p` free of monomial content.
pub fn irreducibility_check(p: &LaurentPoly) -> Result<Irreducibility, AlgebraError> {
    irreducibility_check_with(p, FactorBudget::default())
}

pub fn irreducibility_check_with(p: &LaurentPoly, budget: FactorBudget) -> Result<Irreducibility, AlgebraError> {
    let (q, poly) = p.split_monomial_content()?;
    if poly.is_constant() {
        return Err(AlgebraError::ConstantInput);
    }
    let (_, lead) = poly.leading_term().expect("nonconstant");
    let lead = lead.clone();
    let normalized = poly.scale(&lead.inv());
    if !normalized.has_real_coefficients() {
        return Ok(Irreducibility::Unknown(
            "coefficients are not a Gaussian multiple of a rational polynomial".to_string(),
        ));
    }
    let active: Vec<usize> = (0..poly.dimension()).filter(|&a| poly.degree_in(a).unwrap_or(0) > 0).collect();
    let factors = match active.len() {
        1 => {
            let axis = active[0];
            let deg = normalized.degree_in(axis).unwrap() as usize;
            if deg > budget.univariate_degree {
                return Ok(Irreducibility::Unknown(format!(
                    "univariate degree {deg} exceeds budget {}",
                    budget.univariate_degree
                )));
            }
            let (_, z) = intpoly::from_rational(&univariate_coeffs(&normalized, axis));
            match factor_integer_poly(&z, budget.interpolation_degree) {
                Some(fs) => fs.into_iter().map(|(f, m)| (embed_univariate(&f, axis, poly.dimension()), m)).collect(),
                None => return Ok(Irreducibility::Unknown("univariate search cap exceeded".to_string())),
            }
        }
        2 => {
            let total = normalized.total_degree().unwrap() as usize;
            if total > budget.bivariate_total_degree {
                return Ok(Irreducibility::Unknown(format!(
                    "bivariate total degree {total} exceeds budget {}",
                    budget.bivariate_total_degree
                )));
            }
            match bivariate_split(&normalized, active[0], active[1]) {
                Split::Irreducible => vec![(normalized.clone(), 1)],
                Split::Factors(g, h) => vec![(g, 1), (h, 1)],
                Split::GaveUp(why) => return Ok(Irreducibility::Unknown(why)),
            }
        }
        n => return Ok(Irreducibility::Unknown(format!("{n} active variables; only one or two are supported"))),
    };
    let count: u32 = factors.iter().map(|(_, m)| *m).sum();
    if count == 1 {
        return Ok(Irreducibility::Irreducible);
    }
    let mut fac = Factorization { unit: GaussRational::one(), monomial: q, factors, status: FactorStatus::Exact };
    let probe = fac.expand();
    let (e, c) = probe.leading_term().expect("nonzero");
    fac.unit = &p.coeff(e) / c;
    debug_assert_eq!(&fac.expand(), p);
    Ok(Irreducibility::Reducible(fac))
}

/// Full univariate factorization of a one-variable Laurent polynomial with
/// rational (up to a Gaussian unit) coefficients.
pub fn factor_univariate(p: &LaurentPoly) -> Result<Factorization, AlgebraError> {
    if p.dimension() != 1 {
        return Err(AlgebraError::DimensionMismatch { left: 1, right: p.dimension() });
    }
    let (q, poly) = p.split_monomial_content()?;
    let lead = poly.leading_term().expect("nonzero").1.clone();
    let normalized = poly.scale(&lead.inv());
    let mut fac = Factorization { unit: lead.clone(), monomial: q, factors: Vec::new(), status: FactorStatus::Exact };
    if poly.is_constant() {
        return Ok(fac);
    }
    if !normalized.has_real_coefficients() {
        fac.unit = GaussRational::one();
        fac.factors = vec![(poly, 1)];
        fac.status = FactorStatus::Unknown;
        return Ok(fac);
    }
    let (_, z) = intpoly::from_rational(&univariate_coeffs(&normalized, 0));
    match factor_integer_poly(&z, FactorBudget::default().interpolation_degree) {
        Some(fs) => fac.factors = fs.into_iter().map(|(f, m)| (embed_univariate(&f, 0, 1), m)).collect(),
        None => {
            fac.unit = GaussRational::one();
            fac.factors = vec![(poly, 1)];
            fac.status = FactorStatus::Unknown;
            return Ok(fac);
        }
    }
    let probe = fac.expand();
    let (e, c) = probe.leading_term().expect("nonzero");
    fac.unit = &(&p.coeff(e) / c) * &fac.unit;
    Ok(fac)
}

fn univariate_coeffs(p: &LaurentPoly, axis: usize) -> Vec<BigRational> {
    let deg = p.degree_in(axis).unwrap_or(0) as usize;
    let mut out = vec![BigRational::zero(); deg + 1];
    for (e, c) in p.terms() {
        out[e[axis] as usize] = c.re.clone();
    }
    out
}

fn embed_univariate(f: &[BigInt], axis: usize, dim: usize) -> LaurentPoly {
    LaurentPoly::from_terms(
        dim,
        f.iter().enumerate().filter(|(_, c)| !c.is_zero()).map(|(i, c)| {
            let mut e = vec![0; dim];
            e[axis] = i as i64;
            (e, GaussRational::real(BigRational::from_integer(c.clone())))
        }),
    )
}

enum Split {
    Irreducible,
    Factors(LaurentPoly, LaurentPoly),
    GaveUp(String),
}

/// Subsets of image factors examined before the bivariate search gives up.
const BIVARIATE_SUBSET_CAP: usize = 1 << 16;

/// Content of `p` viewed as a polynomial in `other` with coefficients in `Q[along]`.
fn content_along(p: &LaurentPoly, along: usize, other: usize) -> Vec<BigRational> {
    let mut rows: BTreeMap<i64, Vec<BigRational>> = BTreeMap::new();
    for (e, c) in p.terms() {
        let row = rows.entry(e[other]).or_default();
        let k = e[along] as usize;
        if row.len() <= k {
            row.resize(k + 1, BigRational::zero());
        }
        row[k] = c.re.clone();
    }
    rows.values().fold(Vec::new(), |acc, r| if acc.is_empty() { r.clone() } else { intpoly::q_gcd(&acc, r) })
}

fn bivariate_split(p: &LaurentPoly, x: usize, y: usize) -> Split {
    let dim = p.dimension();
    for (along, other) in [(x, y), (y, x)] {
        let c = content_along(p, along, other);
        if intpoly::degree(&c) > 0 {
            let g = embed_univariate(&intpoly::from_rational(&c).1, along, dim);
            let h = p.exact_divide(&g).expect("polynomial inputs").quotient().expect("content divides");
            return Split::Factors(g, h);
        }
    }
    let total = p.total_degree().unwrap();
    let d = total + 1;
    let deg_u = (0..=total).map(|j| j * d + (total - j)).max().unwrap() as usize;
    let mut image = vec![BigRational::zero(); deg_u + 1];
    for (e, c) in p.terms() {
        image[(e[x] + d * e[y]) as usize] += &c.re;
    }
    intpoly::trim(&mut image);
    let (_, u) = intpoly::from_rational(&image);
    let t_power = u.iter().position(|c| !c.is_zero()).unwrap();
    let rest: ZPoly = u[t_power..].to_vec();
    let mut pieces: Vec<ZPoly> = vec![vec![BigInt::zero(), BigInt::one()]; t_power];
    if intpoly::degree(&rest) >= 1 {
        match factor_integer_poly(&rest, 0) {
            Some(fs) => {
                for (f, m) in fs {
                    for _ in 0..m {
                        pieces.push(f.clone());
                    }
                }
            }
            None => return Split::GaveUp("image factorization cap exceeded".to_string()),
        }
    }
    let mut examined = 0usize;
    for size in 1..=pieces.len() / 2 {
        let mut idx: Vec<usize> = (0..size).collect();
        loop {
            examined += 1;
            if examined > BIVARIATE_SUBSET_CAP {
                return Split::GaveUp("recombination cap exceeded".to_string());
            }
            let prod = idx.iter().fold(vec![BigInt::one()], |acc, &i| intpoly::mul(&acc, &pieces[i]));
            let g = LaurentPoly::from_terms(
                dim,
                prod.iter().enumerate().filter(|(_, c)| !c.is_zero()).map(|(k, c)| {
                    let mut e = vec![0; dim];
                    e[x] = k as i64 % d;
                    e[y] = k as i64 / d;
                    (e, GaussRational::real(BigRational::from_integer(c.clone())))
                }),
            );
            if !g.is_constant() && g.total_degree().unwrap() < total {
                if let Ok(Division::Quotient(h)) = p.exact_divide(&g) {
                    return Split::Factors(g, h);
                }
            }
            // Next combination in lexicographic order.
            let n = pieces.len();
            let mut i = size;
            let mut advanced = false;
            while i > 0 {
                i -= 1;
                if idx[i] < n - size + i {
                    idx[i] += 1;
                    for j in i + 1..size {
                        idx[j] = idx[j - 1] + 1;
                    }
                    advanced = true;
                    break;
                }
            }
            if !advanced {
                break;
            }
        }
    }
    Split::Irreducible
}
