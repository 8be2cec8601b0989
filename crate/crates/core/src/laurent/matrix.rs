use num_complex::Complex64;

use super::poly::{Division, LaurentPoly};
use super::AlgebraError;
use crate::scalar::GaussRational;

/// Dense matrix of Laurent polynomials sharing one dimension.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PolyMatrix {
    rows: usize,
    cols: usize,
    dimension: usize,
    entries: Vec<LaurentPoly>,
}

impl PolyMatrix {
    pub fn zeros(rows: usize, cols: usize, dimension: usize) -> Self {
        Self { rows, cols, dimension, entries: vec![LaurentPoly::zero(dimension); rows * cols] }
    }

    pub fn identity(size: usize, dimension: usize) -> Self {
        let mut m = Self::zeros(size, size, dimension);
        for i in 0..size {
            m.set(i, i, LaurentPoly::one(dimension));
        }
        m
    }

    pub fn from_rows(dimension: usize, rows: Vec<Vec<LaurentPoly>>) -> Result<Self, AlgebraError> {
        let r = rows.len();
        let c = rows.first().map_or(0, |row| row.len());
        let mut entries = Vec::with_capacity(r * c);
        for row in rows {
            if row.len() != c {
                return Err(AlgebraError::Shape { rows: r, cols: c });
            }
            for p in row {
                if p.dimension() != dimension {
                    return Err(AlgebraError::DimensionMismatch { left: dimension, right: p.dimension() });
                }
                entries.push(p);
            }
        }
        Ok(Self { rows: r, cols: c, dimension, entries })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn get(&self, i: usize, j: usize) -> &LaurentPoly {
        &self.entries[i * self.cols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, p: LaurentPoly) {
        assert_eq!(p.dimension(), self.dimension);
        self.entries[i * self.cols + j] = p;
    }

    pub fn entries(&self) -> impl Iterator<Item = &LaurentPoly> {
        self.entries.iter()
    }

    pub fn row(&self, i: usize) -> &[LaurentPoly] {
        &self.entries[i * self.cols..(i + 1) * self.cols]
    }

    pub fn transpose(&self) -> Self {
        let mut t = Self::zeros(self.cols, self.rows, self.dimension);
        for i in 0..self.rows {
            for j in 0..self.cols {
                t.set(j, i, self.get(i, j).clone());
            }
        }
        t
    }

    pub fn mul(&self, other: &Self) -> Result<Self, AlgebraError> {
        if self.cols != other.rows {
            return Err(AlgebraError::Shape { rows: other.rows, cols: self.cols });
        }
        let mut out = Self::zeros(self.rows, other.cols, self.dimension);
        for i in 0..self.rows {
            for j in 0..other.cols {
                let mut acc = LaurentPoly::zero(self.dimension);
                for k in 0..self.cols {
                    acc = acc.try_add(&self.get(i, k).try_mul(other.get(k, j))?)?;
                }
                out.set(i, j, acc);
            }
        }
        Ok(out)
    }

    pub fn mul_vec(&self, v: &[LaurentPoly]) -> Result<Vec<LaurentPoly>, AlgebraError> {
        if v.len() != self.cols {
            return Err(AlgebraError::Shape { rows: v.len(), cols: self.cols });
        }
        (0..self.rows)
            .map(|i| {
                let mut acc = LaurentPoly::zero(self.dimension);
                for (k, vk) in v.iter().enumerate() {
                    acc = acc.try_add(&self.get(i, k).try_mul(vk)?)?;
                }
                Ok(acc)
            })
            .collect()
    }

    /// `self - c·I`.
    pub fn sub_identity(&self, c: &GaussRational) -> Result<Self, AlgebraError> {
        if !self.is_square() {
            return Err(AlgebraError::NotSquare { rows: self.rows, cols: self.cols });
        }
        let mut out = self.clone();
        for i in 0..self.rows {
            let d = out.get(i, i).sub(&LaurentPoly::constant(self.dimension, c.clone()));
            out.set(i, i, d);
        }
        Ok(out)
    }

    /// Every entry multiplied by `z^shift`.
    pub fn mul_monomial(&self, shift: &[i64]) -> Self {
        Self {
            rows: self.rows,
            cols: self.cols,
            dimension: self.dimension,
            entries: self.entries.iter().map(|p| p.mul_monomial(shift)).collect(),
        }
    }

    /// Largest `‖g‖∞` over all entries.
    pub fn inf_norm(&self) -> u64 {
        self.entries.iter().map(|p| p.inf_norm()).max().unwrap_or(0)
    }

    fn minor(&self, skip_row: usize, skip_col: usize) -> Self {
        let mut entries = Vec::with_capacity((self.rows - 1) * (self.cols - 1));
        for i in (0..self.rows).filter(|&i| i != skip_row) {
            for j in (0..self.cols).filter(|&j| j != skip_col) {
                entries.push(self.get(i, j).clone());
            }
        }
        Self { rows: self.rows - 1, cols: self.cols - 1, dimension: self.dimension, entries }
    }

    /// Cofactor expansion for size ≤ 4, fraction-free Bareiss otherwise.
    pub fn determinant(&self) -> Result<LaurentPoly, AlgebraError> {
        if !self.is_square() {
            return Err(AlgebraError::NotSquare { rows: self.rows, cols: self.cols });
        }
        if self.rows <= 4 {
            Ok(self.determinant_cofactor())
        } else {
            self.determinant_bareiss()
        }
    }

    /// Laplace expansion along the first row. Square input assumed.
    pub fn determinant_cofactor(&self) -> LaurentPoly {
        let n = self.rows;
        match n {
            0 => LaurentPoly::one(self.dimension),
            1 => self.get(0, 0).clone(),
            2 => self.get(0, 0).mul(self.get(1, 1)).sub(&self.get(0, 1).mul(self.get(1, 0))),
            _ => {
                let mut acc = LaurentPoly::zero(self.dimension);
                for j in 0..n {
                    if self.get(0, j).is_zero() {
                        continue;
                    }
                    let term = self.get(0, j).mul(&self.minor(0, j).determinant_cofactor());
                    acc = if j % 2 == 0 { acc.add(&term) } else { acc.sub(&term) };
                }
                acc
            }
        }
    }

    /// Fraction-free Bareiss elimination over the polynomial ring, after
    /// clearing each row to nonnegative exponents.
    pub fn determinant_bareiss(&self) -> Result<LaurentPoly, AlgebraError> {
        if !self.is_square() {
            return Err(AlgebraError::NotSquare { rows: self.rows, cols: self.cols });
        }
        let n = self.rows;
        let dim = self.dimension;
        if n == 0 {
            return Ok(LaurentPoly::one(dim));
        }
        let mut total_shift = vec![0i64; dim];
        let mut m: Vec<Vec<LaurentPoly>> = Vec::with_capacity(n);
        for i in 0..n {
            let row = self.row(i);
            let mut min = vec![i64::MAX; dim];
            for p in row.iter().filter(|p| !p.is_zero()) {
                for (a, b) in min.iter_mut().zip(p.min_exponent().unwrap()) {
                    *a = (*a).min(b);
                }
            }
            if min[0] == i64::MAX {
                return Ok(LaurentPoly::zero(dim));
            }
            let shift: Vec<i64> = min.iter().map(|x| -x).collect();
            for (t, s) in total_shift.iter_mut().zip(&shift) {
                *t += s;
            }
            m.push(row.iter().map(|p| p.mul_monomial(&shift)).collect());
        }
        let mut negate = false;
        let mut prev = LaurentPoly::one(dim);
        for k in 0..n - 1 {
            if m[k][k].is_zero() {
                match (k + 1..n).find(|&i| !m[i][k].is_zero()) {
                    Some(i) => {
                        m.swap(k, i);
                        negate = !negate;
                    }
                    None => return Ok(LaurentPoly::zero(dim)),
                }
            }
            for i in k + 1..n {
                for j in k + 1..n {
                    let num = m[i][j].mul(&m[k][k]).sub(&m[i][k].mul(&m[k][j]));
                    m[i][j] = match num.exact_divide(&prev)? {
                        Division::Quotient(q) => q,
                        Division::NotDivisible => unreachable!("Bareiss step is always exact"),
                    };
                }
                m[i][k] = LaurentPoly::zero(dim);
            }
            prev = m[k][k].clone();
        }
        let mut det = m[n - 1][n - 1].clone();
        if negate {
            det = det.neg();
        }
        let back: Vec<i64> = total_shift.iter().map(|s| -s).collect();
        Ok(det.mul_monomial(&back))
    }

    /// Transpose of the cofactor matrix: `M · adj(M) = det(M) · I`.
    pub fn adjugate(&self) -> Result<Self, AlgebraError> {
        if !self.is_square() {
            return Err(AlgebraError::NotSquare { rows: self.rows, cols: self.cols });
        }
        let n = self.rows;
        let mut adj = Self::zeros(n, n, self.dimension);
        if n == 1 {
            adj.set(0, 0, LaurentPoly::one(self.dimension));
            return Ok(adj);
        }
        for i in 0..n {
            for j in 0..n {
                let cof = self.minor(i, j).determinant()?;
                let cof = if (i + j) % 2 == 0 { cof } else { cof.neg() };
                adj.set(j, i, cof);
            }
        }
        Ok(adj)
    }

    pub fn eval(&self, z: &[Complex64]) -> Vec<Vec<Complex64>> {
        (0..self.rows).map(|i| (0..self.cols).map(|j| self.get(i, j).eval(z)).collect()).collect()
    }

    pub fn eval_exact(&self, z: &[GaussRational]) -> Result<Vec<Vec<GaussRational>>, AlgebraError> {
        (0..self.rows)
            .map(|i| (0..self.cols).map(|j| self.get(i, j).eval_exact(z)).collect())
            .collect()
    }

    /// One rendered row per line: `[p11, p12, …]`.
    pub fn render(&self) -> String {
        let mut out = String::new();
        for i in 0..self.rows {
            let cells: Vec<String> = self.row(i).iter().map(|p| p.render()).collect();
            out.push('[');
            out.push_str(&cells.join(", "));
            out.push_str("]\n");
        }
        out
    }
}
