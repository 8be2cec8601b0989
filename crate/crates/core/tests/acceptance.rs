//! Acceptance run: one PASS/FAIL line per criterion, nonzero exit on any failure.

use std::f64::consts::PI;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::process::ExitCode;
use std::time::Instant;

use floqcert::exact_linalg::span_contains;
use floqcert::fixtures;
use floqcert::floquet::{apply_symbol, coefficient_norm_sqr};
use floqcert::quantum::{dirichlet_hit, fermi_equality_check, reduce, subdivide_safe, QuantumError};
use floqcert::solver::residual_source;
use floqcert::spectrum::DEFAULT_RESOLUTION;
use floqcert::{
    bands, dispersion, fermi_samples, find_embedded, floquet_surface_poly, halfspace_no_compact_support,
    inverse_transform, plant_embedded, solve, solve_truncated_oracle, symbol, transform, verify_bound,
    GaussRational, Irreducibility, LatticeFunction, LaurentPoly, LocalPerturbation, Membership, PeriodicOperator,
    PerturbedOperator, Shift, SolveOutcome, SpectrumError, VertexSite,
};
use num_complex::Complex64;
use num_rational::BigRational;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Outcome = Result<String, String>;

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn q(n: i64, d: i64) -> GaussRational {
    GaussRational::from_ratio(n, d)
}

fn random_scalar(rng: &mut ChaCha8Rng, complex: bool) -> GaussRational {
    let mut r = || {
        let n = loop {
            let n = rng.gen_range(-5i64..=5);
            if n != 0 {
                break n;
            }
        };
        BigRational::new(n.into(), rng.gen_range(1i64..=4).into())
    };
    let re = r();
    if complex {
        GaussRational::new(re, r())
    } else {
        GaussRational::real(re)
    }
}

/// A nonzero function on up to `len` sites with cells in `[-r, r]^n`.
fn random_function(rng: &mut ChaCha8Rng, a: &PeriodicOperator, r: i64, len: usize, complex: bool) -> LatticeFunction {
    let dim = a.dimension();
    loop {
        let count = rng.gen_range(1..=len);
        let pairs: Vec<(VertexSite, GaussRational)> = (0..count)
            .map(|_| {
                let cell: Vec<i64> = (0..dim).map(|_| rng.gen_range(-r..=r)).collect();
                (VertexSite::new(rng.gen_range(0..a.domain_size()), cell), random_scalar(rng, complex))
            })
            .collect();
        let f = LatticeFunction::from_pairs(dim, pairs);
        if !f.is_zero() {
            return f;
        }
    }
}

fn criterion_1() -> Outcome {
    // Entry-by-entry golden copy of the published 4×4 symbol of the four-site graph.
    let golden = "[1, -1/3, -1/3*z2, -1/3]\n\
                  [-1/3, 1, -1/3, -1/3*z1]\n\
                  [-1/3*z2^-1, -1/3, 1, -1/3]\n\
                  [-1/3, -1/3*z1^-1, -1/3, 1]\n";
    let m = symbol(&fixtures::four_site_laplacian()).map_err(|e| e.to_string())?;
    let got = m.render();
    ensure(got == golden, || format!("rendered symbol differs:\n{got}"))?;
    Ok("16 entries match exactly".into())
}

fn criterion_2() -> Outcome {
    let b = bands(&fixtures::chain_laplacian(), DEFAULT_RESOLUTION).map_err(|e| e.to_string())?;
    ensure(b.bands.len() == 1, || format!("expected one band, got {:?}", b.bands))?;
    let band = b.bands[0];
    ensure(band.lower.abs() < 1e-8 && (band.upper - 2.0).abs() < 1e-8, || format!("band {band:?}"))?;
    Ok(format!("band [{:.3e}, {:.12}]", band.lower, band.upper))
}

fn criterion_3() -> Outcome {
    let a = fixtures::chain_laplacian();
    let lambda = q(1, 2);
    let psi = LatticeFunction::delta(1, VertexSite::new(0, vec![0]));
    let report = solve(&a, &lambda, &psi).map_err(|e| e.to_string())?;
    ensure(report.outcome == SolveOutcome::NoCompactSolution, || format!("outcome {}", report.outcome.label()))?;
    let surface = floquet_surface_poly(&a, &lambda).map_err(|e| e.to_string())?;
    let target = LaurentPoly::from_terms(1, [(vec![2], q(1, 1)), (vec![1], q(-1, 1)), (vec![0], q(1, 1))]);
    ensure(surface.delta1.scale(&q(-2, 1)) == target, || format!("Δ₁ = {}", surface.delta1.render()))?;
    ensure(report.irreducibility == Irreducibility::Irreducible, || format!("{:?}", report.irreducibility))?;
    let oracle = solve_truncated_oracle(&a, &lambda, &psi, 3).map_err(|e| e.to_string())?;
    ensure(oracle.is_none(), || "truncated system at radius 3 is consistent".into())?;
    Ok(format!("Δ₁ = {} irreducible, box of radius 3 inconsistent", surface.delta1.render()))
}

/// Shared by criteria 4 and 5: 200 round trips with their degree ledgers.
struct RoundTrips {
    recovered: usize,
    bound_failures: Vec<String>,
    ledger_failures: Vec<String>,
    ledgers: usize,
}

fn round_trips() -> RoundTrips {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let energies = [q(1, 3), q(1, 2), q(2, 3), q(1, 1), q(5, 3), q(3, 1), q(-1, 2), q(7, 4)];
    let mut out = RoundTrips { recovered: 0, bound_failures: vec![], ledger_failures: vec![], ledgers: 0 };
    for (a, r, len) in [(fixtures::chain_laplacian(), 4, 6), (fixtures::four_site_laplacian(), 2, 5)] {
        for _ in 0..100 {
            let u0 = random_function(&mut rng, &a, r, len, true);
            let lambda = energies.choose(&mut rng).unwrap().clone();
            let psi = residual_source(&a, &lambda, &u0).unwrap();
            let report = match catch_unwind(AssertUnwindSafe(|| solve(&a, &lambda, &psi))) {
                Ok(Ok(rep)) => rep,
                Ok(Err(e)) => {
                    out.bound_failures.push(format!("solve failed: {e}"));
                    continue;
                }
                Err(_) => {
                    out.ledger_failures.push(format!("solver assertion fired at λ = {lambda}"));
                    continue;
                }
            };
            if let Some(ledger) = &report.ledger {
                out.ledgers += 1;
                let v = ledger.violations();
                if !v.is_empty() {
                    out.ledger_failures.push(v.join("; "));
                }
            }
            if report.solution() == Some(&u0) {
                out.recovered += 1;
            }
            if let Some(u) = report.solution() {
                let bound = psi.radius() + a.interaction_radius() * (2 * a.domain_size() as u64 + 1) - 1;
                if u.radius() > bound {
                    out.bound_failures.push(format!("radius {} > {bound}", u.radius()));
                }
            }
        }
    }
    out
}

fn criterion_4(rt: &RoundTrips) -> Outcome {
    ensure(rt.recovered == 200, || format!("{} of 200 recovered", rt.recovered))?;
    ensure(rt.bound_failures.is_empty(), || rt.bound_failures.join("; "))?;
    Ok("200 of 200 recovered within the support bound".into())
}

fn criterion_5(rt: &RoundTrips) -> Outcome {
    ensure(rt.ledgers == 200, || format!("only {} ledgers recorded", rt.ledgers))?;
    ensure(rt.ledger_failures.is_empty(), || rt.ledger_failures.join("; "))?;
    Ok(format!("{} ledgers, zero violations", rt.ledgers))
}

fn criterion_6() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    // Band-interior energies at which Δ₁ is irreducible for each fixture.
    let cases: Vec<(PeriodicOperator, Vec<GaussRational>, i64, usize, usize)> = vec![
        (fixtures::chain_laplacian(), vec![q(1, 3), q(1, 2), q(3, 4), q(5, 4), q(3, 2), q(7, 4)], 2, 4, 50),
        (fixtures::four_site_laplacian(), vec![q(1, 2), q(1, 1), q(5, 3)], 1, 3, 20),
        (fixtures::z2_schrodinger_pair(q(1, 1), q(0, 1)), vec![q(5, 2), q(7, 2), q(9, 2)], 1, 3, 30),
    ];
    let mut done = 0;
    for (a, energies, r, len, count) in cases {
        for _ in 0..count {
            let f = random_function(&mut rng, &a, r, len, false);
            let lambda = energies.choose(&mut rng).unwrap().clone();
            let b = plant_embedded(&a, &f, &lambda).map_err(|e| e.to_string())?;
            let report = find_embedded(&a, &b, &lambda).map_err(|e| e.to_string())?;
            ensure(matches!(report.band_status, Some(Membership::InBandInterior { .. })), || {
                format!("λ = {lambda} not band interior: {:?}", report.band_status)
            })?;
            ensure(report.irreducibility == Irreducibility::Irreducible, || {
                format!("Δ₁ not certified irreducible at λ = {lambda}: {:?}", report.irreducibility)
            })?;
            ensure(span_contains(&report.basis, &f), || format!("planted {f:?} missing at λ = {lambda}"))?;
            let sites = b.site_set();
            ensure(report.basis.iter().all(|g| verify_bound(g, &sites, &a).satisfied), || "bound failed".into())?;
            done += 1;
        }
    }
    Ok(format!("{done} planted eigenfunctions recovered, all within the bound"))
}

/// Diagonal entries plus couplings between sites sharing the first
/// coordinate, so the half-space certificate in direction `e1` applies.
fn column_perturbation(rng: &mut ChaCha8Rng) -> LocalPerturbation {
    let x = rng.gen_range(-1i64..=1);
    let mut ys: Vec<i64> = (-2..=2).collect();
    ys.shuffle(rng);
    let mut sites: Vec<VertexSite> = ys[..rng.gen_range(1..=3)].iter().map(|&y| VertexSite::new(0, vec![x, y])).collect();
    if rng.gen_bool(0.5) {
        sites.push(VertexSite::new(0, vec![x + 1, rng.gen_range(-1..=1)]));
    }
    let n = sites.len();
    let mut m = vec![vec![GaussRational::default(); n]; n];
    for i in 0..n {
        m[i][i] = random_scalar(rng, false);
        for j in i + 1..n {
            if sites[i].cell.0[0] == sites[j].cell.0[0] {
                m[i][j] = random_scalar(rng, true);
                m[j][i] = m[i][j].conj();
            }
        }
    }
    LocalPerturbation::new(sites, m).expect("hermitian by construction")
}

fn criterion_7() -> Outcome {
    let a = fixtures::z2_schrodinger(q(0, 1));
    let band_list = bands(&a, DEFAULT_RESOLUTION).map_err(|e| e.to_string())?;
    let energies = [q(1, 2), q(3, 2), q(3, 1), q(9, 2), q(13, 2)];
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut checked = 0;
    for _ in 0..20 {
        let b = column_perturbation(&mut rng);
        for lambda in &energies {
            let op = PerturbedOperator::new(&a, Some(&b), lambda.clone());
            let certified = halfspace_no_compact_support(&op, &[1, 0]).map_err(|e| e.to_string())?;
            ensure(certified, || format!("half-space certificate failed for {b:?} at λ = {lambda}"))?;
            let report = floqcert::perturbation::find_embedded_with_bands(&a, &b, lambda, Some(&band_list))
                .map_err(|e| e.to_string())?;
            ensure(matches!(report.band_status, Some(Membership::InBandInterior { .. })), || {
                format!("λ = {lambda} not band interior")
            })?;
            ensure(report.basis.is_empty(), || format!("found {} eigenfunctions at λ = {lambda}", report.basis.len()))?;
            checked += 1;
        }
    }
    Ok(format!("{checked} (perturbation, energy) pairs certified and searched empty"))
}

fn criterion_8() -> Outcome {
    let a = fixtures::pendant_pair();
    let zero = q(0, 1);
    ensure(matches!(floquet_surface_poly(&a, &zero), Err(SpectrumError::FlatBandDegenerate)), || "Δ is not identically zero".into())?;
    let grid = dispersion(&a, DEFAULT_RESOLUTION).map_err(|e| e.to_string())?;
    let flat = (0..grid.branch_count()).any(|j| grid.samples.iter().all(|(_, ev)| ev[j].abs() < 1e-10));
    ensure(flat, || "no constant branch at 0".into())?;
    let report = find_embedded(&a, &LocalPerturbation::empty(), &zero).map_err(|e| e.to_string())?;
    let pq = LatticeFunction::from_pairs(
        1,
        [(VertexSite::new(1, vec![0]), q(1, 1)), (VertexSite::new(2, vec![0]), q(-1, 1))],
    );
    ensure(span_contains(&report.basis, &pq), || "δ_p - δ_q not found".into())?;
    Ok(format!("Δ ≡ 0, flat branch at 0, kernel of dimension {} contains δ_p - δ_q", report.basis.len()))
}

fn multipliers(op: &PeriodicOperator) -> Result<Vec<Vec<Complex64>>, String> {
    fermi_samples(op, 0.0, 0).map(|s| s.points).map_err(|e| e.to_string())
}

fn same_points(a: &[Vec<Complex64>], b: &[Vec<Complex64>], tol: f64) -> bool {
    let covered = |x: &[Vec<Complex64>], y: &[Vec<Complex64>]| {
        x.iter().all(|p| y.iter().any(|w| p.iter().zip(w).all(|(s, t)| (s - t).norm() < tol)))
    };
    covered(a, b) && covered(b, a)
}

fn criterion_9() -> Outcome {
    let g = fixtures::free_chain(BigRational::from_integer(1.into()));
    // Fake vertices fixed once, at the first resonance of the unit edge.
    let sub = subdivide_safe(&g, PI * PI).map_err(|e| e.to_string())?;
    for j in 0..20 {
        let k = 0.15 * j as f64 + 0.05;
        let lambda = k * k;
        let cmp = fermi_equality_check(&g, lambda, 0).map_err(|e| e.to_string())?;
        ensure(cmp.agree && cmp.metric.len() == 2, || format!("Floquet surfaces differ at k = {k}: {cmp:?}"))?;
        let before = multipliers(&reduce(&g, lambda, &[]).map_err(|e| e.to_string())?.operator)?;
        let after = multipliers(&reduce(&sub.graph, lambda, &[]).map_err(|e| e.to_string())?.operator)?;
        ensure(same_points(&before, &after, 1e-8), || format!("subdivision changed multipliers at k = {k}"))?;
    }
    let resonant = PI * PI;
    ensure(matches!(reduce(&g, resonant, &[]), Err(QuantumError::DirichletCollision(_))), || "π² not refused".into())?;
    ensure(sub.graph.edges.iter().all(|e| !dirichlet_hit(e, resonant)), || "sub-edges still resonant".into())?;
    let red = reduce(&sub.graph, resonant, &[]).map_err(|e| e.to_string())?;
    ensure(red.operator.domain_size() == 2, || "unexpected fundamental domain".into())?;
    Ok("20 energies agree, subdivision invariant, π² refused then reduced after subdivision".into())
}

fn criterion_10() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(10);
    let ops = [
        fixtures::chain_laplacian(),
        fixtures::four_site_laplacian(),
        fixtures::pendant_pair(),
        fixtures::z2_schrodinger_pair(q(1, 2), q(-1, 3)),
    ];
    let mut failures = 0;
    for i in 0..500 {
        let a = &ops[i % ops.len()];
        let f = random_function(&mut rng, a, 3, 6, true);
        let n = a.domain_size();
        let ft = transform(&f, n).unwrap();
        if inverse_transform(&ft) != f {
            failures += 1;
        }
        let lhs = transform(&a.apply(&f).unwrap(), n).unwrap();
        if apply_symbol(&symbol(a).unwrap(), &ft).unwrap() != lhs {
            failures += 1;
        }
        if coefficient_norm_sqr(&ft) != f.norm_sqr() {
            failures += 1;
        }
        let g = Shift((0..a.dimension()).map(|_| rng.gen_range(-2..=2)).collect());
        let neg: Vec<i64> = g.0.iter().map(|x| -x).collect();
        if transform(&f.translate(&g), n).unwrap() != ft.mul_monomial(&neg) {
            failures += 1;
        }
    }
    ensure(failures == 0, || format!("{failures} failed assertions"))?;
    Ok("500 instances, 2000 exact identities, zero failures".into())
}

fn main() -> ExitCode {
    let mut all_pass = true;
    let mut report = |id: usize, name: &str, run: &dyn Fn() -> Outcome| {
        let start = Instant::now();
        let result = catch_unwind(AssertUnwindSafe(run)).unwrap_or_else(|e| {
            let msg = e.downcast_ref::<String>().cloned().or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()));
            Err(format!("panicked: {}", msg.unwrap_or_default()))
        });
        let secs = start.elapsed().as_secs_f64();
        match result {
            Ok(detail) => println!("criterion {id:>2} PASS  {name} ({secs:.2}s): {detail}"),
            Err(why) => {
                all_pass = false;
                println!("criterion {id:>2} FAIL  {name} ({secs:.2}s): {why}");
            }
        }
    };
    report(1, "four-site symbol golden matrix", &criterion_1);
    report(2, "chain band", &criterion_2);
    report(3, "solver negative case", &criterion_3);
    let start = Instant::now();
    let rt = round_trips();
    let shared = format!(" [shared run {:.2}s]", start.elapsed().as_secs_f64());
    report(4, "solver round trips", &|| criterion_4(&rt).map(|d| d + &shared));
    report(5, "degree ledger", &|| criterion_5(&rt).map(|d| d + &shared));
    report(6, "plant and detect", &criterion_6);
    report(7, "no false embeddings", &criterion_7);
    report(8, "flat band", &criterion_8);
    report(9, "quantum reduction", &criterion_9);
    report(10, "Floquet round trip and intertwining", &criterion_10);
    if all_pass {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
