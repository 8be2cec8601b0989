//! Random instances shared by the integration tests.
#![allow(dead_code)]

use std::collections::BTreeSet;

use floqcert::{GaussRational, GraphEdge, LatticeFunction, PeriodicGraph, PeriodicOperator, Shift, Term, VertexSite};
use num_rational::BigRational;
use proptest::prelude::*;

pub fn rat(n: i64, d: i64) -> BigRational {
    BigRational::new(n.into(), d.into())
}

pub fn small_rational() -> impl Strategy<Value = BigRational> {
    (-4i64..=4, 1i64..=3).prop_map(|(n, d)| rat(n, d))
}

pub fn real_scalar() -> impl Strategy<Value = GaussRational> {
    small_rational().prop_map(GaussRational::real)
}

pub fn gauss_scalar() -> impl Strategy<Value = GaussRational> {
    (small_rational(), small_rational(), any::<bool>())
        .prop_map(|(re, im, complex)| if complex { GaussRational::new(re, im) } else { GaussRational::real(re) })
}

pub fn shift_in(dim: usize, r: i64) -> impl Strategy<Value = Shift> {
    proptest::collection::vec(-r..=r, dim).prop_map(Shift)
}

pub fn site_in(dim: usize, nverts: usize, r: i64) -> impl Strategy<Value = VertexSite> {
    (0..nverts, shift_in(dim, r)).prop_map(|(vertex, cell)| VertexSite { vertex, cell })
}

/// A nonzero function on at most `max_len` sites in the box of radius `r`.
pub fn function_in(dim: usize, nverts: usize, r: i64, max_len: usize) -> impl Strategy<Value = LatticeFunction> {
    proptest::collection::vec((site_in(dim, nverts, r), gauss_scalar()), 1..=max_len)
        .prop_map(move |pairs| LatticeFunction::from_pairs(dim, pairs))
        .prop_filter("nonzero", |f| !f.is_zero())
}

pub fn real_function_in(dim: usize, nverts: usize, r: i64, max_len: usize) -> impl Strategy<Value = LatticeFunction> {
    proptest::collection::vec((site_in(dim, nverts, r), real_scalar()), 1..=max_len)
        .prop_map(move |pairs| LatticeFunction::from_pairs(dim, pairs))
        .prop_filter("nonzero", |f| !f.is_zero())
}

/// Hopping candidates `(u, v, g)` with `|g| ≤ 1`, one per conjugate pair.
fn hopping_candidates(dim: usize, nverts: usize) -> Vec<(usize, usize, Shift)> {
    let mut seen = BTreeSet::new();
    let mut out = Vec::new();
    for cell in Shift::box_cells(dim, 1) {
        for u in 0..nverts {
            for v in 0..nverts {
                if u == v && cell.is_zero() {
                    continue;
                }
                let key = (u, v, cell.clone()).min((v, u, cell.neg()));
                if seen.insert(key.clone()) {
                    out.push(key);
                }
            }
        }
    }
    out
}

/// A random symmetric operator of range at most one with `nverts` vertices
/// per cell. Every vertex keeps at least one hopping so degrees stay positive.
pub fn operator(dim: usize, nverts: usize) -> impl Strategy<Value = PeriodicOperator> {
    let cands = hopping_candidates(dim, nverts);
    let n = cands.len();
    (
        proptest::collection::vec(prop_oneof![2 => Just(None), 1 => gauss_scalar().prop_map(Some)], n),
        proptest::collection::vec(real_scalar(), nverts),
    )
        .prop_map(move |(hops, diag)| {
            let mut edges = Vec::new();
            let mut terms = Vec::new();
            for v in 0..nverts {
                terms.push(Term { u: v, v, shift: Shift::zero(dim), coeff: diag[v].clone() });
            }
            let mut hops = hops;
            // Guarantee a hop through every vertex along the first axis.
            for v in 0..nverts {
                let i = cands.iter().position(|(a, b, g)| *a == v && *b == v && g == &Shift::unit(dim, 0).neg()).unwrap();
                if hops[i].as_ref().map_or(true, |c| num_traits::Zero::is_zero(c)) {
                    hops[i] = Some(GaussRational::from_int(-1));
                }
            }
            for ((u, v, g), c) in cands.iter().zip(hops) {
                let Some(c) = c else { continue };
                if num_traits::Zero::is_zero(&c) {
                    continue;
                }
                edges.push(GraphEdge { u: *u, v: *v, shift: g.clone() });
                terms.push(Term { u: *u, v: *v, shift: g.clone(), coeff: c.clone() });
                terms.push(Term { u: *v, v: *u, shift: g.neg(), coeff: c.conj() });
            }
            let names = (0..nverts).map(|i| format!("v{i}")).collect();
            let graph = PeriodicGraph::new(dim, names, edges).expect("random graph");
            PeriodicOperator::new(graph, terms).expect("random operator")
        })
}

pub fn any_operator() -> impl Strategy<Value = PeriodicOperator> {
    (1usize..=2, 1usize..=3).prop_flat_map(|(dim, n)| operator(dim, if dim == 2 { n.min(2) } else { n }))
}

/// An operator together with a function on its vertices.
pub fn operator_and_function(r: i64, max_len: usize) -> impl Strategy<Value = (PeriodicOperator, LatticeFunction)> {
    any_operator().prop_flat_map(move |a| {
        let f = function_in(a.dimension(), a.domain_size(), r, max_len);
        (Just(a), f)
    })
}

/// An operator together with two functions on its vertices.
pub fn operator_and_two_functions(
    r: i64,
    max_len: usize,
) -> impl Strategy<Value = (PeriodicOperator, LatticeFunction, LatticeFunction)> {
    any_operator().prop_flat_map(move |a| {
        let f = function_in(a.dimension(), a.domain_size(), r, max_len);
        let g = function_in(a.dimension(), a.domain_size(), r, max_len);
        (Just(a), f, g)
    })
}
