//! Standard small instances used by tests, benches and documentation.

use num_rational::BigRational;

use crate::lattice::{GraphEdge, PeriodicGraph, PeriodicOperator, Shift, Term};
use crate::quantum::{MetricEdge, MetricGraph, Segment};
use crate::scalar::GaussRational;

fn labels(names: &[&str]) -> Vec<String> {
    names.iter().map(|s| s.to_string()).collect()
}

fn rat(n: i64, d: i64) -> BigRational {
    BigRational::new(n.into(), d.into())
}

/// One vertex per cell of `Z`, joined to its translate by `+1`.
pub fn chain_graph() -> PeriodicGraph {
    PeriodicGraph::new(1, labels(&["a"]), vec![GraphEdge { u: 0, v: 0, shift: Shift(vec![1]) }])
        .expect("chain graph")
        .with_positions(vec![vec![rat(0, 1)]])
}

/// `f(v) - (f(v-1) + f(v+1))/2`, symbol `1 - (z + 1/z)/2`.
pub fn chain_laplacian() -> PeriodicOperator {
    PeriodicOperator::normalized_laplacian(chain_graph()).expect("chain laplacian")
}

/// The four-vertex `Z^2`-periodic graph whose normalized Laplacian has the
/// symbol with `(a,c) = -z2/3` and `(b,d) = -z1/3`: every pair of `a,b,c,d`
/// is joined once, with `a–c` crossing to the cell above and `b–d` to the
/// cell on the right.
pub fn four_site_graph() -> PeriodicGraph {
    let e = |u, v, s: [i64; 2]| GraphEdge { u, v, shift: Shift(s.to_vec()) };
    PeriodicGraph::new(
        2,
        labels(&["a", "b", "c", "d"]),
        vec![e(0, 1, [0, 0]), e(0, 2, [0, 1]), e(0, 3, [0, 0]), e(1, 2, [0, 0]), e(1, 3, [1, 0]), e(2, 3, [0, 0])],
    )
    .expect("four_site graph")
}

pub fn four_site_laplacian() -> PeriodicOperator {
    PeriodicOperator::normalized_laplacian(four_site_graph()).expect("four_site laplacian")
}

/// Identity on `Z^dim` with `nverts` vertices per cell and no edges.
pub fn identity_operator(dim: usize, nverts: usize) -> PeriodicOperator {
    let names: Vec<String> = (0..nverts).map(|i| format!("v{i}")).collect();
    let graph = PeriodicGraph::new(dim, names, vec![]).expect("edgeless graph");
    let terms = (0..nverts)
        .map(|v| Term { u: v, v, shift: Shift::zero(dim), coeff: GaussRational::from_int(1) })
        .collect();
    PeriodicOperator::new(graph, terms).expect("identity")
}

/// Chain `a` with two pendant vertices `p, q` hanging off every `a`, all at
/// the same position. Its adjacency operator has a flat band at 0 carried by
/// `δ_p - δ_q`.
pub fn pendant_pair_graph() -> PeriodicGraph {
    let e = |u, v, s: i64| GraphEdge { u, v, shift: Shift(vec![s]) };
    PeriodicGraph::new(1, labels(&["a", "p", "q"]), vec![e(0, 0, 1), e(0, 1, 0), e(0, 2, 0)])
        .expect("pendant pair graph")
        .with_positions(vec![vec![rat(0, 1)]; 3])
}

pub fn pendant_pair() -> PeriodicOperator {
    PeriodicOperator::adjacency(pendant_pair_graph(), None).expect("pendant pair")
}

/// `-Δ + V` on `Z^2` with one vertex per cell and constant potential `v`.
pub fn z2_schrodinger(v: GaussRational) -> PeriodicOperator {
    let graph = PeriodicGraph::new(
        2,
        labels(&["a"]),
        vec![
            GraphEdge { u: 0, v: 0, shift: Shift(vec![1, 0]) },
            GraphEdge { u: 0, v: 0, shift: Shift(vec![0, 1]) },
        ],
    )
    .expect("z2 graph")
    .with_positions(vec![vec![rat(0, 1), rat(0, 1)]]);
    schrodinger(graph, vec![v])
}

/// `-Δ + V` on `Z^2` with a potential periodic under `2Z × Z`: two vertices
/// per cell, `a` at offset `(0,0)` and `b` at `(1/2,0)`.
pub fn z2_schrodinger_pair(va: GaussRational, vb: GaussRational) -> PeriodicOperator {
    let e = |u, v, s: [i64; 2]| GraphEdge { u, v, shift: Shift(s.to_vec()) };
    let graph = PeriodicGraph::new(
        2,
        labels(&["a", "b"]),
        vec![e(0, 1, [0, 0]), e(1, 0, [1, 0]), e(0, 0, [0, 1]), e(1, 1, [0, 1])],
    )
    .expect("z2 pair graph")
    .with_positions(vec![vec![rat(0, 1), rat(0, 1)], vec![rat(1, 2), rat(0, 1)]]);
    schrodinger(graph, vec![va, vb])
}

/// `Σ_{y~x} (f(x) - f(y)) + V(x) f(x)`.
fn schrodinger(graph: PeriodicGraph, potential: Vec<GaussRational>) -> PeriodicOperator {
    let deg = graph.degrees();
    let dim = graph.dimension;
    let mut terms = Vec::new();
    for (v, pot) in potential.into_iter().enumerate() {
        terms.push(Term { u: v, v, shift: Shift::zero(dim), coeff: GaussRational::from_int(deg[v] as i64) + pot });
    }
    for e in &graph.edges {
        terms.push(Term { u: e.u, v: e.v, shift: e.shift.clone(), coeff: GaussRational::from_int(-1) });
        terms.push(Term { u: e.v, v: e.u, shift: e.shift.neg(), coeff: GaussRational::from_int(-1) });
    }
    PeriodicOperator::new(graph, terms).expect("schrodinger operator")
}

/// Quantum chain: one vertex per cell, one edge of length `len` to the next cell.
pub fn free_chain(len: BigRational) -> MetricGraph {
    MetricGraph::new(1, labels(&["a"]), vec![MetricEdge::new(0, 0, Shift(vec![1]), len)]).expect("free chain")
}

/// Unit-length quantum chain whose edges carry the step potential
/// `v_left` on the first half and `v_right` on the second.
pub fn stepped_chain(v_left: f64, v_right: f64) -> MetricGraph {
    let edge = MetricEdge::new(0, 0, Shift(vec![1]), rat(1, 1)).with_potential(vec![
        Segment { length: rat(1, 2), value: v_left },
        Segment { length: rat(1, 2), value: v_right },
    ]);
    MetricGraph::new(1, labels(&["a"]), vec![edge]).expect("stepped chain")
}

/// Quantum square lattice with horizontal edges of length 1 and vertical
/// edges of length 3/4.
pub fn quantum_square_lattice() -> MetricGraph {
    let e = |s: [i64; 2], len| MetricEdge::new(0, 0, Shift(s.to_vec()), len);
    MetricGraph::new(2, labels(&["a"]), vec![e([1, 0], rat(1, 1)), e([0, 1], rat(3, 4))]).expect("square lattice")
}

/// Two vertices per cell joined by two parallel edges of lengths 1/2 and
/// 2/3, with a unit edge from `b` to the next cell's `a`.
pub fn quantum_necklace() -> MetricGraph {
    MetricGraph::new(
        1,
        labels(&["a", "b"]),
        vec![
            MetricEdge::new(0, 1, Shift(vec![0]), rat(1, 2)),
            MetricEdge::new(0, 1, Shift(vec![0]), rat(2, 3)),
            MetricEdge::new(1, 0, Shift(vec![1]), rat(1, 1)),
        ],
    )
    .expect("necklace")
}
