//! Zassenhaus factorization of square-free integer polynomials: Berlekamp
//! modulo a small prime, multifactor Hensel lifting, subset recombination.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Zero};

use super::intpoly::{self, ZPoly};
use super::modp::{Fp, FpPoly};

const PRIMES: [u64; 30] =
    [3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47, 53, 59, 61, 67, 71, 73, 79, 83, 89, 97, 101, 103, 107, 109, 113, 127];

/// Number of usable primes compared before committing to the one with the
/// fewest modular factors.
const PRIME_TRIALS: usize = 5;

/// Subsets examined during recombination before giving up.
pub const RECOMBINATION_CAP: usize = 1 << 18;

fn modulo(x: &BigInt, m: &BigInt) -> BigInt {
    x.mod_floor(m)
}

fn symmetric(x: &BigInt, m: &BigInt) -> BigInt {
    let r = x.mod_floor(m);
    if &r * 2 > *m {
        r - m
    } else {
        r
    }
}

fn to_big(p: &[u64]) -> ZPoly {
    p.iter().map(|&c| BigInt::from(c)).collect()
}

fn reduce_mod(p: &[BigInt], m: &BigInt) -> ZPoly {
    let mut out: ZPoly = p.iter().map(|c| modulo(c, m)).collect();
    intpoly::trim(&mut out);
    out
}

/// Lifts `f ≡ g·h (mod p)` with `g` monic and `gcd(g,h) = 1` to a
/// factorization modulo `p^k`.
fn lift_pair(f: &[BigInt], g: &[u64], h: &[u64], fp: Fp, k: u32) -> (ZPoly, ZPoly) {
    let (one, _, t) = fp.ext_gcd(g, h);
    debug_assert_eq!(one, vec![1]);
    let p = BigInt::from(fp.p);
    let mut big_g = to_big(g);
    let mut big_h = to_big(h);
    let mut m = p.clone();
    for _ in 1..k {
        let prod = intpoly::mul(&big_g, &big_h);
        let n = f.len().max(prod.len());
        let e: ZPoly = (0..n)
            .map(|i| {
                let d = f.get(i).cloned().unwrap_or_default() - prod.get(i).cloned().unwrap_or_default();
                debug_assert!(d.is_multiple_of(&m));
                d / &m
            })
            .collect();
        let ebar = fp.reduce_poly(&e);
        let r = fp.divrem(&fp.mul(&t, &ebar), g).1;
        let (dh, rem) = fp.divrem(&fp.sub(&ebar, &fp.mul(&r, h)), g);
        debug_assert!(rem.is_empty());
        for (i, c) in r.iter().enumerate() {
            big_g[i] += &m * BigInt::from(*c);
        }
        if big_h.len() < dh.len() {
            big_h.resize(dh.len(), BigInt::zero());
        }
        for (i, c) in dh.iter().enumerate() {
            big_h[i] += &m * BigInt::from(*c);
        }
        m *= &p;
    }
    (reduce_mod(&big_g, &m), reduce_mod(&big_h, &m))
}

/// Lifts the modular factorization `f ≡ lc(f) Π factors (mod p)` to monic
/// factors modulo `p^k`.
fn lift_tree(f: &[BigInt], factors: &[FpPoly], fp: Fp, k: u32, pk: &BigInt) -> Vec<ZPoly> {
    if factors.len() == 1 {
        let lc = f.last().expect("nonzero");
        let inv = lc.extended_gcd(pk).x;
        return vec![reduce_mod(&f.iter().map(|c| c * &inv).collect::<ZPoly>(), pk)];
    }
    let mid = factors.len() / 2;
    let a = factors[..mid].iter().fold(vec![1u64], |acc, u| fp.mul(&acc, u));
    let (b, rem) = fp.divrem(&fp.reduce_poly(f), &a);
    debug_assert!(rem.is_empty());
    let (big_a, big_b) = lift_pair(f, &a, &b, fp, k);
    let mut out = lift_tree(&big_a, &factors[..mid], fp, k, pk);
    out.extend(lift_tree(&big_b, &factors[mid..], fp, k, pk));
    out
}

struct Combinations {
    n: usize,
    idx: Vec<usize>,
    first: bool,
}

impl Combinations {
    fn new(n: usize, k: usize) -> Self {
        Self { n, idx: (0..k).collect(), first: true }
    }
}

impl Iterator for Combinations {
    type Item = Vec<usize>;

    fn next(&mut self) -> Option<Vec<usize>> {
        let k = self.idx.len();
        if self.first {
            self.first = false;
            return (k <= self.n).then(|| self.idx.clone());
        }
        let mut i = k;
        while i > 0 {
            i -= 1;
            if self.idx[i] < self.n - k + i {
                self.idx[i] += 1;
                for j in i + 1..k {
                    self.idx[j] = self.idx[j - 1] + 1;
                }
                return Some(self.idx.clone());
            }
        }
        None
    }
}

/// Irreducible factors over `Z` of a primitive square-free polynomial with
/// positive leading coefficient, or `None` when recombination exceeds
/// [`RECOMBINATION_CAP`].
pub fn zassenhaus(f: &[BigInt]) -> Option<Vec<ZPoly>> {
    if intpoly::degree(f) <= 1 {
        return Some(vec![f.to_vec()]);
    }
    let lc = f.last().unwrap().clone();
    let mut best: Option<(Fp, Vec<FpPoly>)> = None;
    let mut tried = 0;
    for &p in PRIMES.iter() {
        let fp = Fp::new(p);
        if fp.reduce_int(&lc) == 0 {
            continue;
        }
        let fbar = fp.reduce_poly(f);
        if !fp.is_square_free(&fbar) {
            continue;
        }
        let parts = fp.berlekamp(&fp.monic(&fbar));
        if parts.len() == 1 {
            return Some(vec![f.to_vec()]);
        }
        if best.as_ref().map_or(true, |(_, b)| parts.len() < b.len()) {
            best = Some((fp, parts));
        }
        tried += 1;
        if tried == PRIME_TRIALS {
            break;
        }
    }
    let (fp, parts) = best.expect("some small prime keeps a square-free polynomial square-free");
    let bound = intpoly::factor_coefficient_bound(f) * 2;
    let p = BigInt::from(fp.p);
    let mut k = 1u32;
    let mut pk = p.clone();
    while pk <= bound {
        pk *= &p;
        k += 1;
    }
    let mut remaining = lift_tree(f, &parts, fp, k, &pk);
    let mut current = f.to_vec();
    let mut found = Vec::new();
    let mut examined = 0usize;
    let mut s = 1;
    while 2 * s <= remaining.len() {
        let mut hit = None;
        for subset in Combinations::new(remaining.len(), s) {
            examined += 1;
            if examined > RECOMBINATION_CAP {
                return None;
            }
            let lc_cur = current.last().unwrap().clone();
            let const_prod = subset.iter().fold(lc_cur.clone(), |acc, &i| {
                modulo(&(acc * remaining[i].first().cloned().unwrap_or_default()), &pk)
            });
            let c0 = symmetric(&const_prod, &pk);
            let target = &lc_cur * current.first().cloned().unwrap_or_default();
            if !c0.is_zero() && !target.is_zero() && !target.is_multiple_of(&c0) {
                continue;
            }
            let prod = subset
                .iter()
                .fold(vec![lc_cur.clone()], |acc, &i| reduce_mod(&intpoly::mul(&acc, &remaining[i]), &pk));
            let g: ZPoly = prod.iter().map(|c| symmetric(c, &pk)).collect();
            let g = intpoly::primitive(&g);
            if let Some(q) = intpoly::z_exact_div(&current, &g) {
                hit = Some((subset, g, q));
                break;
            }
        }
        match hit {
            Some((subset, g, q)) => {
                found.push(g);
                current = q;
                remaining = remaining.into_iter().enumerate().filter(|(i, _)| !subset.contains(i)).map(|(_, u)| u).collect();
            }
            None => s += 1,
        }
    }
    if intpoly::degree(&current) >= 1 {
        let c = intpoly::primitive(&current);
        found.push(c);
    }
    found.sort_by(|a, b| a.len().cmp(&b.len()).then_with(|| a.cmp(b)));
    Some(found)
}

/// Checks that the product of `factors` equals `p` up to sign and integer content.
pub fn reproduces(p: &[BigInt], factors: &[ZPoly]) -> bool {
    let prod = factors.iter().fold(vec![BigInt::one()], |acc, f| intpoly::mul(&acc, f));
    intpoly::primitive(p) == intpoly::primitive(&prod)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn z(v: &[i64]) -> ZPoly {
        v.iter().map(|&x| BigInt::from(x)).collect()
    }

    #[test]
    fn irreducible_quadratic() {
        assert_eq!(zassenhaus(&z(&[1, -1, 1])).unwrap(), vec![z(&[1, -1, 1])]);
    }

    #[test]
    fn swinnerton_dyer_like_x4_plus_1_is_irreducible() {
        // Splits modulo every prime but is irreducible over Q.
        assert_eq!(zassenhaus(&z(&[1, 0, 0, 0, 1])).unwrap(), vec![z(&[1, 0, 0, 0, 1])]);
    }

    #[test]
    fn splits_products_with_non_monic_factors() {
        let a = z(&[1, 0, 3]);
        let b = z(&[-2, 5]);
        let c = z(&[7, 1, 0, 1]);
        let p = intpoly::mul(&intpoly::mul(&a, &b), &c);
        let mut got = zassenhaus(&p).unwrap();
        got.sort();
        let mut want = vec![a, b, c];
        want.sort();
        assert_eq!(got, want);
    }

    #[test]
    fn cyclotomic_product() {
        // x^12 - 1 = Π_{d | 12} Φ_d.
        let mut p = vec![BigInt::zero(); 13];
        p[0] = BigInt::from(-1);
        p[12] = BigInt::one();
        let got = zassenhaus(&p).unwrap();
        assert_eq!(got.len(), 6);
        assert!(reproduces(&p, &got));
    }
}
