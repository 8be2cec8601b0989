use std::collections::BTreeSet;
use std::f64::consts::PI;

use floqcert::exact_linalg::span_contains;
use floqcert::fixtures::{free_chain, quantum_necklace, quantum_square_lattice, stepped_chain};
use floqcert::quantum::{
    dirichlet_hit, fermi_equality_check, numeric_embedded_kernel, quantum_support_bound, reduce, subdivide,
    subdivide_safe,
};
use floqcert::{
    fermi_samples, find_embedded, plant_embedded, verify_bound, GaussRational, LatticeFunction, MetricGraph, Shift,
    VertexSite,
};
use num_complex::Complex64;
use num_rational::BigRational;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn safe(g: &MetricGraph, lambda: f64) -> bool {
    g.edges.iter().all(|e| !dirichlet_hit(e, lambda) && (e.length_f64() * lambda.sqrt() / PI).fract() > 1e-3)
}

fn same_points(a: &[Vec<Complex64>], b: &[Vec<Complex64>], tol: f64) -> bool {
    let covered = |x: &[Vec<Complex64>], y: &[Vec<Complex64>]| {
        x.iter().all(|p| y.iter().any(|q| p.iter().zip(q).all(|(s, t)| (s - t).norm() < tol)))
    };
    covered(a, b) && covered(b, a)
}

#[test]
fn floquet_surfaces_agree_on_every_fixture() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let fixtures: Vec<(&str, MetricGraph, usize)> = vec![
        ("free chain", free_chain(BigRational::from_integer(1.into())), 0),
        ("stepped chain", stepped_chain(3.0, -1.0), 0),
        ("necklace", quantum_necklace(), 0),
        ("square lattice", quantum_square_lattice(), 8),
    ];
    for (name, g, grid) in fixtures {
        let mut checked = 0;
        while checked < 20 {
            let lambda = rng.gen_range(0.2..30.0);
            if !safe(&g, lambda) {
                continue;
            }
            let cmp = fermi_equality_check(&g, lambda, grid).unwrap();
            assert!(cmp.agree, "{name} at λ = {lambda}: {cmp:?}");
            checked += 1;
        }
    }
}

#[test]
fn subdivision_keeps_floquet_multipliers() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for g in [free_chain(BigRational::from_integer(1.into())), stepped_chain(2.0, 0.0), quantum_necklace()] {
        let mut checked = 0;
        while checked < 10 {
            let lambda = rng.gen_range(0.3..20.0);
            let sub = subdivide(&g, &vec![3; g.edges.len()]);
            if !safe(&g, lambda) || !safe(&sub.graph, lambda) {
                continue;
            }
            let before = fermi_samples(&reduce(&g, lambda, &[]).unwrap().operator, 0.0, 0).unwrap().points;
            let after = fermi_samples(&reduce(&sub.graph, lambda, &[]).unwrap().operator, 0.0, 0).unwrap().points;
            assert!(same_points(&before, &after, 1e-8), "λ = {lambda}: {before:?} vs {after:?}");
            checked += 1;
        }
    }
}

#[test]
fn resonant_edges_are_refused_then_subdivided() {
    let g = free_chain(BigRational::from_integer(1.into()));
    for k in 1..=3 {
        let lambda = (k as f64 * PI).powi(2);
        assert!(reduce(&g, lambda, &[]).is_err());
        let sub = subdivide_safe(&g, lambda).unwrap();
        let red = reduce(&sub.graph, lambda, &[]).unwrap();
        assert_eq!(red.operator.domain_size(), sub.graph.vertices.len());
        // Both multipliers collapse onto (-1)^k, a double root, so only
        // square-root accuracy is available here.
        let cmp = fermi_equality_check(&sub.graph, lambda, 0).unwrap();
        let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
        for p in cmp.metric.iter().chain(&cmp.combinatorial) {
            assert!((p[0] - Complex64::new(sign, 0.0)).norm() < 1e-6, "{cmp:?}");
        }
        assert!(!cmp.metric.is_empty() && !cmp.combinatorial.is_empty());
    }
}

/// Plant an eigenfunction in the reduced operator, find it again, and check
/// both the combinatorial and the quantum support bounds.
#[test]
fn planted_eigenfunctions_of_the_reduction() {
    for (g, lambda) in [(free_chain(BigRational::from_integer(1.into())), 2.0), (quantum_necklace(), 5.5)] {
        let red = reduce(&g, lambda, &[]).unwrap();
        let a = red.operator;
        let dim = a.dimension();
        let f = LatticeFunction::from_pairs(
            dim,
            [
                (VertexSite::new(0, vec![0]), GaussRational::from_int(1)),
                (VertexSite::new(a.domain_size() - 1, vec![1]), GaussRational::from_ratio(-1, 2)),
            ],
        );
        let zero = GaussRational::from_int(0);
        let b = plant_embedded(&a, &f, &zero).unwrap();
        let report = find_embedded(&a, &b, &zero).unwrap();
        assert!(span_contains(&report.basis, &f));
        let s: BTreeSet<VertexSite> = b.site_set();
        let touched: Vec<(usize, Shift)> = g
            .edges
            .iter()
            .enumerate()
            .flat_map(|(i, e)| {
                s.iter().flat_map(move |x| {
                    let mut out = vec![];
                    if x.vertex == e.u {
                        out.push((i, x.cell.clone()));
                    }
                    if x.vertex == e.v {
                        out.push((i, x.cell.sub(&e.shift)));
                    }
                    out
                })
            })
            .collect();
        let qbound = quantum_support_bound(&g, &touched);
        for u in &report.basis {
            assert!(verify_bound(u, &s, &a).satisfied);
            assert!(u.radius() <= qbound, "{} > {qbound}", u.radius());
        }
        let numeric = numeric_embedded_kernel(&a, Some(&b), &zero, report.search_radius, 1e-9);
        assert_eq!(numeric.len(), report.basis.len());
    }
}
