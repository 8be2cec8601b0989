//! Dense univariate polynomials over `Z` and `Q`, coefficients low degree first.

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

pub type ZPoly = Vec<BigInt>;
pub type QPoly = Vec<BigRational>;

pub fn trim<T: Zero>(p: &mut Vec<T>) {
    while p.last().is_some_and(|c| c.is_zero()) {
        p.pop();
    }
}

/// Degree, `-1` for the zero polynomial.
pub fn degree<T>(p: &[T]) -> isize {
    p.len() as isize - 1
}

pub fn content(p: &[BigInt]) -> BigInt {
    let g = p.iter().fold(BigInt::zero(), |acc, c| acc.gcd(c));
    match p.last() {
        Some(lc) if lc.is_negative() => -g,
        _ => g,
    }
}

/// Primitive part with positive leading coefficient.
pub fn primitive(p: &[BigInt]) -> ZPoly {
    if p.is_empty() {
        return Vec::new();
    }
    let c = content(p);
    p.iter().map(|x| x / &c).collect()
}

/// `q = scale · z` with `z` primitive and positive leading coefficient.
pub fn from_rational(q: &[BigRational]) -> (BigRational, ZPoly) {
    if q.is_empty() {
        return (BigRational::one(), Vec::new());
    }
    let den = q.iter().fold(BigInt::one(), |acc, c| acc.lcm(c.denom()));
    let ints: ZPoly = q.iter().map(|c| (c * BigRational::from_integer(den.clone())).to_integer()).collect();
    let c = content(&ints);
    let z = ints.iter().map(|x| x / &c).collect();
    (BigRational::new(c, den), z)
}

pub fn to_rational(p: &[BigInt]) -> QPoly {
    p.iter().map(|c| BigRational::from_integer(c.clone())).collect()
}

pub fn mul(a: &[BigInt], b: &[BigInt]) -> ZPoly {
    if a.is_empty() || b.is_empty() {
        return Vec::new();
    }
    let mut out = vec![BigInt::zero(); a.len() + b.len() - 1];
    for (i, x) in a.iter().enumerate() {
        if x.is_zero() {
            continue;
        }
        for (j, y) in b.iter().enumerate() {
            out[i + j] += x * y;
        }
    }
    trim(&mut out);
    out
}

pub fn derivative(p: &[BigInt]) -> ZPoly {
    let mut out: ZPoly = p.iter().enumerate().skip(1).map(|(i, c)| c * BigInt::from(i)).collect();
    trim(&mut out);
    out
}

pub fn eval(p: &[BigInt], x: &BigInt) -> BigInt {
    p.iter().rev().fold(BigInt::zero(), |acc, c| acc * x + c)
}

pub fn q_divrem(a: &[BigRational], b: &[BigRational]) -> (QPoly, QPoly) {
    assert!(!b.is_empty(), "division by the zero polynomial");
    let mut rem: QPoly = a.to_vec();
    trim(&mut rem);
    if rem.len() < b.len() {
        return (Vec::new(), rem);
    }
    let lb = b.last().unwrap();
    let mut quot = vec![BigRational::zero(); rem.len() - b.len() + 1];
    while rem.len() >= b.len() {
        let shift = rem.len() - b.len();
        let c = rem.last().unwrap() / lb;
        for (i, bc) in b.iter().enumerate() {
            rem[shift + i] -= &c * bc;
        }
        quot[shift] = c;
        rem.pop();
        trim(&mut rem);
    }
    (quot, rem)
}

/// Monic gcd over `Q`.
pub fn q_gcd(a: &[BigRational], b: &[BigRational]) -> QPoly {
    let mut x = a.to_vec();
    let mut y = b.to_vec();
    trim(&mut x);
    trim(&mut y);
    while !y.is_empty() {
        let (_, r) = q_divrem(&x, &y);
        x = y;
        y = r;
    }
    if let Some(lc) = x.last().cloned() {
        for c in x.iter_mut() {
            *c /= &lc;
        }
    }
    x
}

/// `a / b` when `b` divides `a` in `Z[x]`.
pub fn z_exact_div(a: &[BigInt], b: &[BigInt]) -> Option<ZPoly> {
    let (q, r) = q_divrem(&to_rational(a), &to_rational(b));
    if !r.is_empty() || q.iter().any(|c| !c.is_integer()) {
        return None;
    }
    Some(q.into_iter().map(|c| c.to_integer()).collect())
}

/// Yun's square-free decomposition of a primitive polynomial of positive
/// degree: `p = Π a_i^i` with each `a_i` primitive and square-free.
pub fn square_free_decomposition(p: &[BigInt]) -> Vec<(ZPoly, u32)> {
    let f = to_rational(p);
    let df = to_rational(&derivative(p));
    let a0 = q_gcd(&f, &df);
    let mut b = q_divrem(&f, &a0).0;
    let mut c = q_divrem(&df, &a0).0;
    let mut out = Vec::new();
    let mut i = 1u32;
    loop {
        let db: QPoly = {
            let mut d: QPoly =
                b.iter().enumerate().skip(1).map(|(k, x)| x * BigRational::from_integer(k.into())).collect();
            trim(&mut d);
            d
        };
        let mut d = c.clone();
        for (k, x) in db.iter().enumerate() {
            if k < d.len() {
                d[k] -= x;
            } else {
                d.push(-x.clone());
            }
        }
        trim(&mut d);
        if degree(&b) <= 0 {
            break;
        }
        let a = q_gcd(&b, &d);
        if degree(&a) > 0 {
            out.push((from_rational(&a).1, i));
        }
        b = q_divrem(&b, &a).0;
        c = q_divrem(&d, &a).0;
        i += 1;
    }
    out
}

pub fn max_abs_coeff(p: &[BigInt]) -> BigInt {
    p.iter().map(|c| c.abs()).max().unwrap_or_else(BigInt::zero)
}

/// Upper bound on `‖g‖∞` for any integer factor `g` of `p`, times `|lc(p)|`
/// (Mignotte-type: `2^deg · ‖p‖₂ · |lc|`).
pub fn factor_coefficient_bound(p: &[BigInt]) -> BigInt {
    let sumsq: BigInt = p.iter().map(|c| c * c).sum();
    let norm = sumsq.sqrt() + BigInt::one();
    let lc = p.last().map(|c| c.abs()).unwrap_or_else(BigInt::one);
    (BigInt::one() << p.len()) * norm * lc
}

#[cfg(test)]
mod tests {
    use super::*;

    fn z(v: &[i64]) -> ZPoly {
        v.iter().map(|&x| BigInt::from(x)).collect()
    }

    #[test]
    fn yun_splits_multiplicities() {
        // (x - 1)^2 (x + 2)^3 x
        let a = z(&[-1, 1]);
        let b = z(&[2, 1]);
        let p = mul(&mul(&mul(&a, &a), &mul(&mul(&b, &b), &b)), &z(&[0, 1]));
        let sf = square_free_decomposition(&p);
        assert_eq!(sf, vec![(z(&[0, 1]), 1), (a, 2), (b, 3)]);
    }

    #[test]
    fn exact_division_over_z() {
        let p = z(&[-1, 0, 1]);
        assert_eq!(z_exact_div(&p, &z(&[-1, 1])), Some(z(&[1, 1])));
        assert_eq!(z_exact_div(&p, &z(&[1, 2])), None);
        assert_eq!(z_exact_div(&z(&[1, 1]), &z(&[2])), None);
    }

    #[test]
    fn rational_normalization() {
        let q: QPoly = vec![BigRational::new(1.into(), 2.into()), BigRational::new((-3).into(), 4.into())];
        let (s, p) = from_rational(&q);
        assert_eq!(p, z(&[2, -3]).iter().map(|c| -c).collect::<ZPoly>());
        assert_eq!(s, BigRational::new((-1).into(), 4.into()));
    }
}
