//! Small dense numeric kernels: cyclic Jacobi eigensolver, polynomial roots,
//! singular values and a tolerance-based nullspace.

use num_complex::Complex64;

/// Off-diagonal Frobenius norm at which Jacobi sweeps stop, relative to
/// `max(1, ‖A‖_F)`.
pub const JACOBI_TOL: f64 = 1e-12;

const MAX_SWEEPS: usize = 100;

/// Eigenvalues (ascending) and orthonormal eigenvectors (as columns, returned
/// one vector per eigenvalue) of a real symmetric matrix.
pub fn symmetric_eigen(a: &[Vec<f64>]) -> (Vec<f64>, Vec<Vec<f64>>) {
    let n = a.len();
    let mut m: Vec<Vec<f64>> = a.to_vec();
    let mut v: Vec<Vec<f64>> = (0..n).map(|i| (0..n).map(|j| f64::from(u8::from(i == j))).collect()).collect();
    let scale = m.iter().flatten().map(|x| x * x).sum::<f64>().sqrt().max(1.0);
    for _ in 0..MAX_SWEEPS {
        let off: f64 = (0..n).flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j))).map(|(i, j)| m[i][j] * m[i][j]).sum::<f64>().sqrt();
        if off < JACOBI_TOL * scale {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                if m[p][q].abs() < f64::MIN_POSITIVE {
                    continue;
                }
                let theta = (m[q][q] - m[p][p]) / (2.0 * m[p][q]);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let mkp = m[k][p];
                    let mkq = m[k][q];
                    m[k][p] = c * mkp - s * mkq;
                    m[k][q] = s * mkp + c * mkq;
                }
                for k in 0..n {
                    let mpk = m[p][k];
                    let mqk = m[q][k];
                    m[p][k] = c * mpk - s * mqk;
                    m[q][k] = s * mpk + c * mqk;
                }
                for row in v.iter_mut() {
                    let vkp = row[p];
                    let vkq = row[q];
                    row[p] = c * vkp - s * vkq;
                    row[q] = s * vkp + c * vkq;
                }
            }
        }
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| m[i][i].total_cmp(&m[j][j]));
    let vals = order.iter().map(|&i| m[i][i]).collect();
    let vecs = order.iter().map(|&i| (0..n).map(|k| v[k][i]).collect()).collect();
    (vals, vecs)
}

/// Largest deviation from Hermitian symmetry, `max |a_ij - conj(a_ji)|`.
pub fn hermitian_defect(a: &[Vec<Complex64>]) -> f64 {
    let n = a.len();
    let mut worst = 0.0f64;
    for i in 0..n {
        for j in 0..n {
            worst = worst.max((a[i][j] - a[j][i].conj()).norm());
        }
    }
    worst
}

/// Ascending eigenvalues of a Hermitian matrix, via the real symmetric
/// embedding `[[Re, -Im], [Im, Re]]` whose spectrum doubles each eigenvalue.
pub fn hermitian_eigenvalues(a: &[Vec<Complex64>]) -> Vec<f64> {
    let n = a.len();
    let mut big = vec![vec![0.0; 2 * n]; 2 * n];
    for i in 0..n {
        for j in 0..n {
            let z = a[i][j];
            big[i][j] = z.re;
            big[i + n][j + n] = z.re;
            big[i][j + n] = -z.im;
            big[i + n][j] = z.im;
        }
    }
    let (vals, _) = symmetric_eigen(&big);
    vals.into_iter().step_by(2).collect()
}

/// Singular values (ascending) of a complex matrix: square roots of the
/// eigenvalues of `MᴴM`.
pub fn singular_values(m: &[Vec<Complex64>]) -> Vec<f64> {
    let rows = m.len();
    let cols = m.first().map_or(0, |r| r.len());
    let mut g = vec![vec![Complex64::new(0.0, 0.0); cols]; cols];
    for i in 0..cols {
        for j in 0..cols {
            g[i][j] = (0..rows).map(|k| m[k][i].conj() * m[k][j]).sum();
        }
    }
    hermitian_eigenvalues(&g).into_iter().map(|x| x.max(0.0).sqrt()).collect()
}

/// Orthonormal basis of the approximate kernel of a real matrix: right
/// singular vectors whose singular value is below `tol · max(1, σ_max)`.
pub fn real_nullspace(m: &[Vec<f64>], cols: usize, tol: f64) -> Vec<Vec<f64>> {
    if cols == 0 {
        return Vec::new();
    }
    // Zero rows pad short systems so the thin SVD carries all `cols` right vectors.
    let rows = m.len().max(cols);
    let mat = nalgebra::DMatrix::from_fn(rows, cols, |i, j| m.get(i).map_or(0.0, |r| r[j]));
    let svd = mat.svd(false, true);
    let v_t = svd.v_t.expect("right singular vectors requested");
    let smax = svd.singular_values.max().max(1.0);
    svd.singular_values
        .iter()
        .enumerate()
        .filter(|(_, s)| **s < tol * smax)
        .map(|(k, _)| v_t.row(k).iter().copied().collect())
        .collect()
}

/// Determinant of a complex square matrix by LU with partial pivoting.
pub fn complex_det(a: &[Vec<Complex64>]) -> Complex64 {
    let n = a.len();
    let mut m = a.to_vec();
    let mut det = Complex64::new(1.0, 0.0);
    for col in 0..n {
        let pivot = (col..n).max_by(|&i, &j| m[i][col].norm().total_cmp(&m[j][col].norm())).unwrap_or(col);
        if m[pivot][col].norm() == 0.0 {
            return Complex64::new(0.0, 0.0);
        }
        if pivot != col {
            m.swap(pivot, col);
            det = -det;
        }
        det *= m[col][col];
        for r in col + 1..n {
            let factor = m[r][col] / m[col][col];
            if factor.norm() == 0.0 {
                continue;
            }
            for c in col..n {
                let delta = factor * m[col][c];
                m[r][c] -= delta;
            }
        }
    }
    det
}

/// Coefficients `c_{-d..=d}` of a Laurent polynomial of degree at most `d`
/// from its values at the `2d+1` roots of unity.
pub fn laurent_from_samples(d: usize, eval: impl Fn(Complex64) -> Complex64) -> Vec<Complex64> {
    let n = 2 * d + 1;
    let samples: Vec<Complex64> =
        (0..n).map(|j| eval(Complex64::from_polar(1.0, 2.0 * std::f64::consts::PI * j as f64 / n as f64))).collect();
    (0..n)
        .map(|idx| {
            let k = idx as f64 - d as f64;
            samples
                .iter()
                .enumerate()
                .map(|(j, s)| s * Complex64::from_polar(1.0, -2.0 * std::f64::consts::PI * j as f64 * k / n as f64))
                .sum::<Complex64>()
                / n as f64
        })
        .collect()
}

/// Drops coefficients at either end below `rel` times the largest.
pub fn trim_relative(coeffs: &[Complex64], rel: f64) -> Vec<Complex64> {
    let big = coeffs.iter().map(|c| c.norm()).fold(0.0, f64::max);
    let keep = |c: &Complex64| c.norm() > rel * big;
    let Some(lo) = coeffs.iter().position(keep) else { return Vec::new() };
    let hi = coeffs.iter().rposition(keep).unwrap_or(lo);
    coeffs[lo..=hi].to_vec()
}

fn horner(coeffs: &[Complex64], z: Complex64) -> (Complex64, Complex64) {
    let mut p = Complex64::new(0.0, 0.0);
    let mut dp = Complex64::new(0.0, 0.0);
    for c in coeffs.iter().rev() {
        dp = dp * z + p;
        p = p * z + c;
    }
    (p, dp)
}

/// All complex roots of `Σ coeffs[k] z^k` (Aberth–Ehrlich iteration with a
/// final Newton polish). Trailing zero coefficients are ignored.
pub fn poly_roots(coeffs: &[Complex64]) -> Vec<Complex64> {
    let mut c: Vec<Complex64> = coeffs.to_vec();
    while c.last().is_some_and(|x| x.norm() == 0.0) {
        c.pop();
    }
    let zeros = c.iter().position(|x| x.norm() != 0.0).unwrap_or(0);
    let mut roots = vec![Complex64::new(0.0, 0.0); zeros];
    let c: Vec<Complex64> = c[zeros..].to_vec();
    let n = c.len().saturating_sub(1);
    if n == 0 {
        return roots;
    }
    let lead = c[n];
    let monic: Vec<Complex64> = c.iter().map(|x| x / lead).collect();
    let radius = 1.0 + monic[..n].iter().map(|x| x.norm()).fold(0.0, f64::max);
    let start = radius.min(
        monic[..n]
            .iter()
            .enumerate()
            .map(|(k, x)| x.norm().powf(1.0 / (n - k) as f64))
            .fold(0.0, f64::max)
            .max(1e-3),
    );
    let mut z: Vec<Complex64> =
        (0..n).map(|k| Complex64::from_polar(start, 2.0 * std::f64::consts::PI * (k as f64 + 0.25) / n as f64 + 0.4)).collect();
    for _ in 0..500 {
        let mut moved = 0.0f64;
        for i in 0..n {
            let (p, dp) = horner(&monic, z[i]);
            if p.norm() == 0.0 {
                continue;
            }
            let ratio = p / dp;
            let repulsion: Complex64 = (0..n).filter(|&j| j != i).map(|j| 1.0 / (z[i] - z[j])).sum();
            let step = ratio / (1.0 - ratio * repulsion);
            if step.is_finite() {
                z[i] -= step;
                moved = moved.max(step.norm() / z[i].norm().max(1.0));
            }
        }
        if moved < 1e-15 {
            break;
        }
    }
    for zi in z.iter_mut() {
        for _ in 0..3 {
            let (p, dp) = horner(&monic, *zi);
            if dp.norm() == 0.0 {
                break;
            }
            let step = p / dp;
            if !step.is_finite() || step.norm() > 1e-6 * zi.norm().max(1.0) {
                break;
            }
            *zi -= step;
        }
    }
    roots.extend(z);
    roots
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn jacobi_diagonalizes() {
        let a = vec![vec![2.0, 1.0, 0.0], vec![1.0, 2.0, 1.0], vec![0.0, 1.0, 2.0]];
        let (vals, vecs) = symmetric_eigen(&a);
        let s = 2f64.sqrt();
        for (got, want) in vals.iter().zip([2.0 - s, 2.0, 2.0 + s]) {
            assert!((got - want).abs() < 1e-12);
        }
        for (lam, v) in vals.iter().zip(&vecs) {
            for i in 0..3 {
                let av: f64 = (0..3).map(|j| a[i][j] * v[j]).sum();
                assert!((av - lam * v[i]).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn hermitian_embedding() {
        let a = vec![vec![c(1.0, 0.0), c(0.0, -1.0)], vec![c(0.0, 1.0), c(1.0, 0.0)]];
        let vals = hermitian_eigenvalues(&a);
        assert!((vals[0] - 0.0).abs() < 1e-12 && (vals[1] - 2.0).abs() < 1e-12);
        assert!(hermitian_defect(&a) < 1e-15);
    }

    #[test]
    fn roots_of_cyclotomic_like() {
        let r = poly_roots(&[c(1.0, 0.0), c(-1.0, 0.0), c(1.0, 0.0)]);
        let want = [Complex64::from_polar(1.0, std::f64::consts::FRAC_PI_3), Complex64::from_polar(1.0, -std::f64::consts::FRAC_PI_3)];
        for w in want {
            assert!(r.iter().any(|x| (x - w).norm() < 1e-12));
        }
        let r = poly_roots(&[c(0.0, 0.0), c(-2.0, 0.0), c(1.0, 0.0)]);
        assert!(r.iter().any(|x| x.norm() < 1e-14));
        assert!(r.iter().any(|x| (x - c(2.0, 0.0)).norm() < 1e-12));
    }

    #[test]
    fn determinant_and_interpolation() {
        let m = vec![vec![c(2.0, 0.0), c(0.0, 1.0)], vec![c(1.0, 0.0), c(3.0, 0.0)]];
        assert!((complex_det(&m) - c(6.0, -1.0)).norm() < 1e-14);
        // z^-1 + 2 + 3z
        let coeffs = laurent_from_samples(2, |z| 1.0 / z + 2.0 + 3.0 * z);
        let want = [0.0, 1.0, 2.0, 3.0, 0.0];
        for (got, w) in coeffs.iter().zip(want) {
            assert!((got - c(w, 0.0)).norm() < 1e-13);
        }
        assert_eq!(trim_relative(&coeffs, 1e-12).len(), 3);
    }

    #[test]
    fn nullspace_and_singular_values() {
        let m = vec![vec![1.0, 1.0, 0.0], vec![0.0, 0.0, 1.0]];
        let ns = real_nullspace(&m, 3, 1e-9);
        assert_eq!(ns.len(), 1);
        assert!((ns[0][0] + ns[0][1]).abs() < 1e-12 && ns[0][2].abs() < 1e-12);
        let sv = singular_values(&[vec![c(3.0, 0.0), c(0.0, 0.0)], vec![c(0.0, 0.0), c(0.0, 4.0)]]);
        assert!((sv[0] - 3.0).abs() < 1e-12 && (sv[1] - 4.0).abs() < 1e-12);
    }
}
