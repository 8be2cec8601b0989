//! Floquet transform `f̂(v,z) = Σ_g f(v at g) z^{-g}`, its inverse, and the
//! symbol `A(z)` of a periodic operator.

use num_complex::Complex64;
use num_traits::Zero;
use thiserror::Error;

use crate::lattice::{LatticeError, LatticeFunction, PeriodicOperator, Shift, VertexSite};
use crate::laurent::{AlgebraError, LaurentPoly, PolyMatrix};
use crate::scalar::GaussRational;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum FloquetError {
    #[error(transparent)]
    Lattice(#[from] LatticeError),
    #[error(transparent)]
    Algebra(#[from] AlgebraError),
    #[error("operator is not symmetric: {0}")]
    InvalidOperator(String),
}

/// One Laurent polynomial per fundamental-domain vertex.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TransformedFunction {
    pub dimension: usize,
    pub components: Vec<LaurentPoly>,
}

impl TransformedFunction {
    pub fn zero(dimension: usize, domain_size: usize) -> Self {
        Self { dimension, components: vec![LaurentPoly::zero(dimension); domain_size] }
    }

    pub fn is_zero(&self) -> bool {
        self.components.iter().all(|c| c.is_zero())
    }

    /// Largest `‖g‖∞` over all components.
    pub fn inf_norm(&self) -> u64 {
        self.components.iter().map(|c| c.inf_norm()).max().unwrap_or(0)
    }

    pub fn mul_monomial(&self, shift: &[i64]) -> Self {
        Self { dimension: self.dimension, components: self.components.iter().map(|c| c.mul_monomial(shift)).collect() }
    }
}

pub fn transform(f: &LatticeFunction, domain_size: usize) -> Result<TransformedFunction, LatticeError> {
    let mut out = TransformedFunction::zero(f.dimension(), domain_size);
    for (site, value) in f.iter() {
        if site.vertex >= domain_size {
            return Err(LatticeError::VertexIndex { index: site.vertex, size: domain_size });
        }
        let exp: Vec<i64> = site.cell.0.iter().map(|g| -g).collect();
        let c = &mut out.components[site.vertex];
        *c = c.add(&LaurentPoly::monomial(f.dimension(), exp, value.clone()));
    }
    Ok(out)
}

/// `f̂` evaluated at an arbitrary site `v at g`: `Σ_h f(v at g+h) z^{-h}`.
/// The cyclic identity says this equals `z^g f̂(v)`.
pub fn transform_at(f: &LatticeFunction, site: &VertexSite) -> LaurentPoly {
    let mut out = LaurentPoly::zero(f.dimension());
    for (s, value) in f.iter().filter(|(s, _)| s.vertex == site.vertex) {
        let exp: Vec<i64> = s.cell.sub(&site.cell).0.iter().map(|g| -g).collect();
        out = out.add(&LaurentPoly::monomial(f.dimension(), exp, value.clone()));
    }
    out
}

pub fn inverse_transform(ft: &TransformedFunction) -> LatticeFunction {
    LatticeFunction::from_pairs(
        ft.dimension,
        ft.components.iter().enumerate().flat_map(|(v, comp)| {
            comp.terms()
                .map(move |(e, c)| (VertexSite { vertex: v, cell: Shift(e.iter().map(|g| -g).collect()) }, c.clone()))
        }),
    )
}

/// `|W| × |W|` Laurent matrix with entry `(u,v) = Σ c·z^g` over terms `(u,v,g,c)`.
pub fn symbol(a: &PeriodicOperator) -> Result<PolyMatrix, FloquetError> {
    let report = a.validate();
    if !report.is_valid() {
        return Err(FloquetError::InvalidOperator(report.to_string()));
    }
    Ok(symbol_unchecked(a))
}

pub(crate) fn symbol_unchecked(a: &PeriodicOperator) -> PolyMatrix {
    let n = a.domain_size();
    let dim = a.dimension();
    let mut m = PolyMatrix::zeros(n, n, dim);
    for t in a.terms() {
        let entry = m.get(t.u, t.v).add(&LaurentPoly::monomial(dim, t.shift.0.clone(), t.coeff.clone()));
        m.set(t.u, t.v, entry);
    }
    m
}

/// Apply a symbol to a transformed function.
pub fn apply_symbol(m: &PolyMatrix, f: &TransformedFunction) -> Result<TransformedFunction, AlgebraError> {
    Ok(TransformedFunction { dimension: f.dimension, components: m.mul_vec(&f.components)? })
}

pub fn evaluate_symbol(m: &PolyMatrix, z: &[Complex64]) -> Result<Vec<Vec<Complex64>>, AlgebraError> {
    if z.len() != m.dimension() {
        return Err(AlgebraError::DimensionMismatch { left: m.dimension(), right: z.len() });
    }
    if z.iter().any(|x| x.is_zero()) {
        return Err(AlgebraError::EvaluationAtZero);
    }
    Ok(m.eval(z))
}

pub fn evaluate_symbol_exact(m: &PolyMatrix, z: &[GaussRational]) -> Result<Vec<Vec<GaussRational>>, AlgebraError> {
    m.eval_exact(z)
}

/// `e^{ik}` componentwise.
pub fn torus_point(k: &[f64]) -> Vec<Complex64> {
    k.iter().map(|&x| Complex64::from_polar(1.0, x)).collect()
}

/// Coefficient-level Parseval: `Σ |f|²` against `Σ |coefficients|²`.
pub fn coefficient_norm_sqr(ft: &TransformedFunction) -> num_rational::BigRational {
    ft.components
        .iter()
        .flat_map(|c| c.terms().map(|(_, v)| v.norm_sqr()))
        .fold(num_rational::BigRational::zero(), |a, b| a + b)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;

    fn g(n: i64, d: i64) -> GaussRational {
        GaussRational::from_ratio(n, d)
    }

    #[test]
    fn transform_examples() {
        let f = LatticeFunction::delta(2, VertexSite::new(1, vec![1, 0]));
        let ft = transform(&f, 3).unwrap();
        assert!(ft.components[0].is_zero() && ft.components[2].is_zero());
        assert_eq!(ft.components[1], LaurentPoly::var(2, 0, -1));
        assert_eq!(inverse_transform(&ft), f);
        let d0 = LatticeFunction::delta(1, VertexSite::new(0, vec![0]));
        assert_eq!(transform(&d0, 1).unwrap().components[0], LaurentPoly::one(1));
        assert!(inverse_transform(&TransformedFunction::zero(2, 2)).is_zero());
    }

    #[test]
    fn four_site_symbol_matches_golden_matrix() {
        let m = symbol(&fixtures::four_site_laplacian()).unwrap();
        let third = g(-1, 3);
        let c = |x: GaussRational| LaurentPoly::constant(2, x);
        let zt = |axis: usize, p: i64| LaurentPoly::monomial(2, {
            let mut e = vec![0, 0];
            e[axis] = p;
            e
        }, third.clone());
        let one = c(g(1, 1));
        let expected = vec![
            vec![one.clone(), c(third.clone()), zt(1, 1), c(third.clone())],
            vec![c(third.clone()), one.clone(), c(third.clone()), zt(0, 1)],
            vec![zt(1, -1), c(third.clone()), one.clone(), c(third.clone())],
            vec![c(third.clone()), zt(0, -1), c(third.clone()), one],
        ];
        assert_eq!(m, PolyMatrix::from_rows(2, expected).unwrap());
        assert_eq!(
            m.render(),
            "[1, -1/3, -1/3*z2, -1/3]\n[-1/3, 1, -1/3, -1/3*z1]\n[-1/3*z2^-1, -1/3, 1, -1/3]\n[-1/3, -1/3*z1^-1, -1/3, 1]\n"
        );
    }

    #[test]
    fn chain_and_identity_symbols() {
        let m = symbol(&fixtures::chain_laplacian()).unwrap();
        assert_eq!(m.get(0, 0).render(), "-1/2*z1 + 1 - 1/2*z1^-1");
        let at = |x: f64| evaluate_symbol(&m, &[Complex64::new(x, 0.0)]).unwrap()[0][0];
        assert!((at(1.0) - Complex64::new(0.0, 0.0)).norm() < 1e-15);
        assert!((at(-1.0) - Complex64::new(2.0, 0.0)).norm() < 1e-15);
        assert_eq!(symbol(&fixtures::identity_operator(2, 3)).unwrap(), PolyMatrix::identity(3, 2));
        assert_eq!(evaluate_symbol(&m, &[Complex64::new(0.0, 0.0)]), Err(AlgebraError::EvaluationAtZero));
    }

    #[test]
    fn four_site_at_one_has_zero_row_sums() {
        let m = symbol(&fixtures::four_site_laplacian()).unwrap();
        let e = evaluate_symbol_exact(&m, &[g(1, 1), g(1, 1)]).unwrap();
        for (i, row) in e.iter().enumerate() {
            assert!(row.iter().cloned().sum::<GaussRational>().is_zero());
            for (j, x) in row.iter().enumerate() {
                assert_eq!(*x, e[j][i].conj());
            }
        }
    }

    #[test]
    fn invalid_operator_is_rejected() {
        let a = PeriodicOperator::new_unchecked(
            fixtures::chain_graph(),
            vec![crate::lattice::Term { u: 0, v: 0, shift: Shift(vec![1]), coeff: g(1, 1) }],
        );
        assert!(matches!(symbol(&a), Err(FloquetError::InvalidOperator(_))));
    }
}
