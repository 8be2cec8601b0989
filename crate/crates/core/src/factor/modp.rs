//! Polynomials over a small prime field and Berlekamp factorization.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::ToPrimitive;

/// Coefficients in `[0, p)`, low degree first, no trailing zeros.
pub type FpPoly = Vec<u64>;

#[derive(Clone, Copy, Debug)]
pub struct Fp {
    pub p: u64,
}

impl Fp {
    pub fn new(p: u64) -> Self {
        assert!(p >= 2 && p < (1 << 31));
        Self { p }
    }

    pub fn reduce_int(&self, x: &BigInt) -> u64 {
        x.mod_floor(&BigInt::from(self.p)).to_u64().expect("residue fits")
    }

    pub fn reduce_poly(&self, p: &[BigInt]) -> FpPoly {
        let mut out: FpPoly = p.iter().map(|c| self.reduce_int(c)).collect();
        trim(&mut out);
        out
    }

    pub fn inv(&self, a: u64) -> u64 {
        assert!(a % self.p != 0, "inverse of zero");
        self.pow(a, self.p - 2)
    }

    pub fn pow(&self, mut a: u64, mut e: u64) -> u64 {
        let mut acc = 1u64;
        a %= self.p;
        while e > 0 {
            if e & 1 == 1 {
                acc = acc * a % self.p;
            }
            a = a * a % self.p;
            e >>= 1;
        }
        acc
    }

    pub fn add(&self, a: &[u64], b: &[u64]) -> FpPoly {
        let n = a.len().max(b.len());
        let mut out: FpPoly = (0..n)
            .map(|i| (a.get(i).copied().unwrap_or(0) + b.get(i).copied().unwrap_or(0)) % self.p)
            .collect();
        trim(&mut out);
        out
    }

    pub fn sub(&self, a: &[u64], b: &[u64]) -> FpPoly {
        let n = a.len().max(b.len());
        let mut out: FpPoly = (0..n)
            .map(|i| (a.get(i).copied().unwrap_or(0) + self.p - b.get(i).copied().unwrap_or(0)) % self.p)
            .collect();
        trim(&mut out);
        out
    }

    pub fn scale(&self, a: &[u64], c: u64) -> FpPoly {
        let mut out: FpPoly = a.iter().map(|x| x * c % self.p).collect();
        trim(&mut out);
        out
    }

    pub fn mul(&self, a: &[u64], b: &[u64]) -> FpPoly {
        if a.is_empty() || b.is_empty() {
            return Vec::new();
        }
        let mut out = vec![0u64; a.len() + b.len() - 1];
        for (i, x) in a.iter().enumerate() {
            for (j, y) in b.iter().enumerate() {
                out[i + j] = (out[i + j] + x * y) % self.p;
            }
        }
        trim(&mut out);
        out
    }

    pub fn divrem(&self, a: &[u64], b: &[u64]) -> (FpPoly, FpPoly) {
        assert!(!b.is_empty(), "division by zero polynomial");
        let mut rem = a.to_vec();
        trim(&mut rem);
        if rem.len() < b.len() {
            return (Vec::new(), rem);
        }
        let inv_lb = self.inv(*b.last().unwrap());
        let mut quot = vec![0u64; rem.len() - b.len() + 1];
        while rem.len() >= b.len() {
            let shift = rem.len() - b.len();
            let c = rem.last().unwrap() * inv_lb % self.p;
            for (i, bc) in b.iter().enumerate() {
                rem[shift + i] = (rem[shift + i] + self.p - c * bc % self.p) % self.p;
            }
            quot[shift] = c;
            trim(&mut rem);
        }
        trim(&mut quot);
        (quot, rem)
    }

    pub fn monic(&self, a: &[u64]) -> FpPoly {
        match a.last() {
            Some(&lc) => self.scale(a, self.inv(lc)),
            None => Vec::new(),
        }
    }

    pub fn gcd(&self, a: &[u64], b: &[u64]) -> FpPoly {
        let mut x = a.to_vec();
        let mut y = b.to_vec();
        trim(&mut x);
        trim(&mut y);
        while !y.is_empty() {
            let (_, r) = self.divrem(&x, &y);
            x = y;
            y = r;
        }
        self.monic(&x)
    }

    /// `(g, s, t)` with `s·a + t·b = g` monic.
    pub fn ext_gcd(&self, a: &[u64], b: &[u64]) -> (FpPoly, FpPoly, FpPoly) {
        let (mut r0, mut r1) = (a.to_vec(), b.to_vec());
        let (mut s0, mut s1): (FpPoly, FpPoly) = (vec![1], Vec::new());
        let (mut t0, mut t1): (FpPoly, FpPoly) = (Vec::new(), vec![1]);
        trim(&mut r0);
        trim(&mut r1);
        while !r1.is_empty() {
            let (q, r) = self.divrem(&r0, &r1);
            let s2 = self.sub(&s0, &self.mul(&q, &s1));
            let t2 = self.sub(&t0, &self.mul(&q, &t1));
            r0 = std::mem::replace(&mut r1, r);
            s0 = std::mem::replace(&mut s1, s2);
            t0 = std::mem::replace(&mut t1, t2);
        }
        let inv = self.inv(*r0.last().expect("gcd of zero polynomials"));
        (self.scale(&r0, inv), self.scale(&s0, inv), self.scale(&t0, inv))
    }

    pub fn derivative(&self, a: &[u64]) -> FpPoly {
        let mut out: FpPoly = a.iter().enumerate().skip(1).map(|(i, c)| (i as u64 % self.p) * c % self.p).collect();
        trim(&mut out);
        out
    }

    pub fn is_square_free(&self, a: &[u64]) -> bool {
        self.gcd(a, &self.derivative(a)).len() == 1
    }

    /// Berlekamp factorization of a monic square-free polynomial into monic
    /// irreducible factors.
    pub fn berlekamp(&self, f: &[u64]) -> Vec<FpPoly> {
        let n = f.len() - 1;
        if n <= 1 {
            return vec![f.to_vec()];
        }
        // Row i of Q holds x^{ip} mod f.
        let xp = self.powmod(&[0, 1], self.p, f);
        let mut rows: Vec<FpPoly> = Vec::with_capacity(n);
        let mut cur: FpPoly = vec![1];
        for _ in 0..n {
            rows.push(cur.clone());
            cur = self.divrem(&self.mul(&cur, &xp), f).1;
        }
        // Kernel of (Q - I)^T: vectors v with Σ_i v_i (row_i - e_i) = 0.
        let mut m = vec![vec![0u64; n]; n];
        for (i, row) in rows.iter().enumerate() {
            for j in 0..n {
                let q = row.get(j).copied().unwrap_or(0);
                let id = u64::from(i == j);
                m[j][i] = (q + self.p - id) % self.p;
            }
        }
        let basis = self.nullspace(m, n);
        let r = basis.len();
        let mut factors = vec![f.to_vec()];
        for v in basis.iter() {
            if factors.len() == r {
                break;
            }
            let mut vp = v.clone();
            trim(&mut vp);
            if vp.len() <= 1 {
                continue;
            }
            let mut next = Vec::new();
            for u in factors {
                if u.len() <= 2 {
                    next.push(u);
                    continue;
                }
                let mut rest = u;
                for s in 0..self.p {
                    if rest.len() <= 2 {
                        break;
                    }
                    let shifted = self.sub(&vp, &[s]);
                    let g = self.gcd(&rest, &shifted);
                    if g.len() > 1 && g.len() < rest.len() {
                        rest = self.divrem(&rest, &g).0;
                        next.push(g);
                    }
                }
                next.push(self.monic(&rest));
            }
            factors = next;
        }
        factors.sort();
        factors
    }

    fn powmod(&self, base: &[u64], mut e: u64, m: &[u64]) -> FpPoly {
        let mut acc: FpPoly = vec![1];
        let mut b = self.divrem(base, m).1;
        while e > 0 {
            if e & 1 == 1 {
                acc = self.divrem(&self.mul(&acc, &b), m).1;
            }
            b = self.divrem(&self.mul(&b, &b), m).1;
            e >>= 1;
        }
        acc
    }

    /// Basis of `{x : M x = 0}` for an `n`-column matrix.
    fn nullspace(&self, mut m: Vec<Vec<u64>>, n: usize) -> Vec<FpPoly> {
        let rows = m.len();
        let mut pivot_cols = Vec::new();
        let mut r = 0;
        for c in 0..n {
            let Some(pr) = (r..rows).find(|&i| m[i][c] != 0) else { continue };
            m.swap(r, pr);
            let inv = self.inv(m[r][c]);
            for x in m[r].iter_mut() {
                *x = *x * inv % self.p;
            }
            for i in 0..rows {
                if i != r && m[i][c] != 0 {
                    let f = m[i][c];
                    for j in 0..n {
                        m[i][j] = (m[i][j] + self.p - f * m[r][j] % self.p) % self.p;
                    }
                }
            }
            pivot_cols.push(c);
            r += 1;
            if r == rows {
                break;
            }
        }
        let free: Vec<usize> = (0..n).filter(|c| !pivot_cols.contains(c)).collect();
        free.iter()
            .map(|&fc| {
                let mut v = vec![0u64; n];
                v[fc] = 1;
                for (ri, &pc) in pivot_cols.iter().enumerate() {
                    v[pc] = (self.p - m[ri][fc]) % self.p;
                }
                v
            })
            .collect()
    }
}

pub fn trim(p: &mut FpPoly) {
    while p.last() == Some(&0) {
        p.pop();
    }
}
