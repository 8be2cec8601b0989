//! Kronecker's interpolation search for integer factors and rational roots.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use super::intpoly::{self, QPoly, ZPoly};

/// Divisor-sign combinations examined before giving up.
pub const COMBINATION_CAP: usize = 200_000;

/// Positive divisors of `n`, or `None` when `|n|` is too large for trial division.
fn divisors(n: &BigInt) -> Option<Vec<u64>> {
    let mut m = n.abs().to_u64()?;
    if m == 0 || m > (1u64 << 62) {
        return None;
    }
    let mut primes: Vec<(u64, u32)> = Vec::new();
    let mut d = 2u64;
    while d * d <= m {
        if m % d == 0 {
            let mut e = 0;
            while m % d == 0 {
                m /= d;
                e += 1;
            }
            primes.push((d, e));
        }
        d += 1;
        if d > 3_000_000 {
            return None;
        }
    }
    if m > 1 {
        primes.push((m, 1));
    }
    let mut out = vec![1u64];
    for (p, e) in primes {
        let mut next = Vec::with_capacity(out.len() * (e as usize + 1));
        for &x in &out {
            let mut pw = 1u64;
            for i in 0..=e {
                next.push(x * pw);
                if i < e {
                    pw *= p;
                }
            }
        }
        out = next;
    }
    out.sort_unstable();
    Some(out)
}

/// Rational roots `a/b` of `f`, returned as primitive linear factors `b x - a`.
/// `None` when the end coefficients are too large to enumerate.
pub fn rational_root_factors(f: &[BigInt]) -> Option<Vec<ZPoly>> {
    let mut out = Vec::new();
    if f.first().is_some_and(|c| c.is_zero()) {
        out.push(vec![BigInt::zero(), BigInt::one()]);
    }
    let lead = f.iter().position(|c| !c.is_zero())?;
    let a0 = &f[lead];
    let an = f.last().unwrap();
    let num = divisors(a0)?;
    let den = divisors(an)?;
    let qf = intpoly::to_rational(f);
    let mut seen = std::collections::BTreeSet::new();
    for &q in &den {
        for &p in &num {
            for sign in [1i64, -1] {
                let r = BigRational::new(BigInt::from(p) * sign, BigInt::from(q));
                if !seen.insert(r.clone()) {
                    continue;
                }
                let v = qf.iter().rev().fold(BigRational::zero(), |acc, c| acc * &r + c);
                if v.is_zero() {
                    out.push(vec![-r.numer().clone(), r.denom().clone()]);
                }
            }
        }
    }
    Some(out)
}

fn interpolate(xs: &[BigInt], ys: &[BigInt]) -> QPoly {
    let mut out: QPoly = vec![BigRational::zero(); xs.len()];
    for (i, (xi, yi)) in xs.iter().zip(ys).enumerate() {
        let mut basis: QPoly = vec![BigRational::one()];
        let mut denom = BigRational::one();
        for (j, xj) in xs.iter().enumerate() {
            if i == j {
                continue;
            }
            let mut next = vec![BigRational::zero(); basis.len() + 1];
            for (k, c) in basis.iter().enumerate() {
                next[k + 1] += c;
                next[k] -= c * BigRational::from_integer(xj.clone());
            }
            basis = next;
            denom *= BigRational::from_integer(xi - xj);
        }
        let scale = BigRational::from_integer(yi.clone()) / denom;
        for (k, c) in basis.iter().enumerate() {
            out[k] += c * &scale;
        }
    }
    intpoly::trim(&mut out);
    out
}

/// Outcome of a bounded search.
#[derive(Debug, PartialEq, Eq)]
pub enum Search {
    Factor(ZPoly),
    NoFactor,
    GaveUp,
}

/// Looks for a nontrivial factor of a primitive polynomial by interpolating
/// every admissible choice of divisor values at `deg/2 + 1` integer points.
pub fn kronecker_factor(f: &[BigInt]) -> Search {
    let n = intpoly::degree(f);
    if n <= 1 {
        return Search::NoFactor;
    }
    let mut combos_used = 0usize;
    for d in 1..=(n / 2) as usize {
        // Candidate points 0, 1, -1, 2, -2, … ranked by divisor count.
        let mut pts: Vec<(usize, BigInt, Vec<u64>)> = Vec::new();
        for k in 0..(4 * (d + 1) + 4) as i64 {
            let x = BigInt::from(if k % 2 == 0 { k / 2 } else { -(k + 1) / 2 });
            let v = intpoly::eval(f, &x);
            if v.is_zero() {
                return Search::Factor(vec![-x, BigInt::one()]);
            }
            match divisors(&v) {
                Some(ds) => pts.push((ds.len(), x, ds)),
                None => return Search::GaveUp,
            }
        }
        pts.sort_by(|a, b| a.0.cmp(&b.0));
        pts.truncate(d + 1);
        let xs: Vec<BigInt> = pts.iter().map(|p| p.1.clone()).collect();
        let choices: Vec<&Vec<u64>> = pts.iter().map(|p| &p.2).collect();
        // First value taken positive: g and -g are the same factor.
        let total: usize = choices.iter().enumerate().map(|(i, c)| c.len() * if i == 0 { 1 } else { 2 }).product();
        combos_used += total;
        if combos_used > COMBINATION_CAP {
            return Search::GaveUp;
        }
        let mut idx = vec![0usize; d + 1];
        loop {
            let ys: Vec<BigInt> = idx
                .iter()
                .enumerate()
                .map(|(i, &k)| {
                    let len = choices[i].len();
                    let (pos, neg) = if i == 0 { (k, false) } else { (k % len, k >= len) };
                    let v = BigInt::from(choices[i][pos]);
                    if neg {
                        -v
                    } else {
                        v
                    }
                })
                .collect();
            let g = interpolate(&xs, &ys);
            if intpoly::degree(&g) == d as isize && g.iter().all(|c| c.is_integer()) {
                let gz: ZPoly = g.iter().map(|c| c.to_integer()).collect();
                let gz = intpoly::primitive(&gz);
                if intpoly::z_exact_div(f, &gz).is_some() {
                    return Search::Factor(gz);
                }
            }
            // Odometer increment.
            let mut i = 0;
            loop {
                if i == idx.len() {
                    break;
                }
                let limit = choices[i].len() * if i == 0 { 1 } else { 2 };
                idx[i] += 1;
                if idx[i] < limit {
                    break;
                }
                idx[i] = 0;
                i += 1;
            }
            if i == idx.len() {
                break;
            }
        }
    }
    Search::NoFactor
}

/// Splits a square-free primitive polynomial completely with repeated
/// Kronecker searches.
pub fn kronecker_factor_all(f: &[BigInt]) -> Option<Vec<ZPoly>> {
    match kronecker_factor(f) {
        Search::NoFactor => Some(vec![intpoly::primitive(f)]),
        Search::GaveUp => None,
        Search::Factor(g) => {
            let h = intpoly::primitive(&intpoly::z_exact_div(f, &g).expect("factor divides"));
            let mut out = kronecker_factor_all(&g)?;
            out.extend(kronecker_factor_all(&h)?);
            out.sort_by(|a, b| a.len().cmp(&b.len()).then_with(|| a.cmp(b)));
            Some(out)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn z(v: &[i64]) -> ZPoly {
        v.iter().map(|&x| BigInt::from(x)).collect()
    }

    #[test]
    fn rational_roots() {
        // (2x - 1)(x + 3)(x^2 + 1)
        let p = intpoly::mul(&intpoly::mul(&z(&[-1, 2]), &z(&[3, 1])), &z(&[1, 0, 1]));
        let mut r = rational_root_factors(&p).unwrap();
        r.sort();
        assert_eq!(r, vec![z(&[-1, 2]), z(&[3, 1])]);
    }

    #[test]
    fn finds_quadratic_factors() {
        let a = z(&[1, 1, 1]);
        let b = z(&[2, 0, 3]);
        let p = intpoly::mul(&a, &b);
        let mut got = kronecker_factor_all(&p).unwrap();
        got.sort();
        let mut want = vec![a, b];
        want.sort();
        assert_eq!(got, want);
        assert_eq!(kronecker_factor(&z(&[1, -1, 1])), Search::NoFactor);
    }
}
