//! Square matrices of [`SpectralPolynomial`] with exact determinant and
//! generic-rank computation.

use super::poly::SpectralPolynomial;

/// Dense row-major matrix of polynomials.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PolyMatrix {
    rows: usize,
    cols: usize,
    nvars: usize,
    data: Vec<SpectralPolynomial>,
}

impl PolyMatrix {
    pub fn zeros(rows: usize, cols: usize, nvars: usize) -> Self {
        Self {
            rows,
            cols,
            nvars,
            data: vec![SpectralPolynomial::zero(nvars); rows * cols],
        }
    }

    pub fn from_rows(nvars: usize, rows: Vec<Vec<SpectralPolynomial>>) -> Self {
        let r = rows.len();
        let c = rows.first().map_or(0, Vec::len);
        let data: Vec<_> = rows.into_iter().flatten().collect();
        assert_eq!(data.len(), r * c, "ragged rows");
        Self {
            rows: r,
            cols: c,
            nvars,
            data,
        }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn get(&self, i: usize, j: usize) -> &SpectralPolynomial {
        &self.data[i * self.cols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: SpectralPolynomial) {
        self.data[i * self.cols + j] = v;
    }

    pub fn transpose(&self) -> Self {
        let mut t = Self::zeros(self.cols, self.rows, self.nvars);
        for i in 0..self.rows {
            for j in 0..self.cols {
                t.set(j, i, self.get(i, j).clone());
            }
        }
        t
    }

    pub fn neg(&self) -> Self {
        Self {
            data: self.data.iter().map(|p| -p).collect(),
            ..self.clone()
        }
    }

    /// Sub-matrix on the given row and column index lists.
    pub fn select(&self, rows: &[usize], cols: &[usize]) -> Self {
        let mut out = Self::zeros(rows.len(), cols.len(), self.nvars);
        for (a, &i) in rows.iter().enumerate() {
            for (b, &j) in cols.iter().enumerate() {
                out.set(a, b, self.get(i, j).clone());
            }
        }
        out
    }

    /// Numeric evaluation at a point, row-major.
    pub fn eval_f64(&self, point: &[f64]) -> Vec<f64> {
        self.data
            .iter()
            .map(|p| p.eval_f64(point).expect("matrix entry dimension"))
            .collect()
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(SpectralPolynomial::is_zero)
    }

    /// Exact determinant: cofactor expansion up to 4×4, Bareiss elimination
    /// beyond.
    pub fn determinant(&self) -> SpectralPolynomial {
        assert_eq!(self.rows, self.cols, "determinant of a non-square matrix");
        if self.rows <= 4 {
            let idx: Vec<usize> = (0..self.rows).collect();
            self.cofactor_det(&idx, &idx)
        } else {
            self.bareiss().0
        }
    }

    fn cofactor_det(&self, rows: &[usize], cols: &[usize]) -> SpectralPolynomial {
        match rows.len() {
            0 => SpectralPolynomial::one(self.nvars),
            1 => self.get(rows[0], cols[0]).clone(),
            2 => {
                &(self.get(rows[0], cols[0]) * self.get(rows[1], cols[1]))
                    - &(self.get(rows[0], cols[1]) * self.get(rows[1], cols[0]))
            }
            _ => {
                let mut acc = SpectralPolynomial::zero(self.nvars);
                let sub_rows = &rows[1..];
                for (k, &c) in cols.iter().enumerate() {
                    let entry = self.get(rows[0], c);
                    if entry.is_zero() {
                        continue;
                    }
                    let sub_cols: Vec<usize> = cols.iter().copied().filter(|&x| x != c).collect();
                    let minor = self.cofactor_det(sub_rows, &sub_cols);
                    let term = entry * &minor;
                    acc = if k % 2 == 0 { &acc + &term } else { &acc - &term };
                }
                acc
            }
        }
    }

    /// Fraction-free (Bareiss) elimination. Returns the determinant (zero if
    /// rank-deficient or non-square) and the rank over the field of rational
    /// functions in λ.
    fn bareiss(&self) -> (SpectralPolynomial, usize) {
        let mut a: Vec<Vec<SpectralPolynomial>> = (0..self.rows)
            .map(|i| (0..self.cols).map(|j| self.get(i, j).clone()).collect())
            .collect();
        let mut prev = SpectralPolynomial::one(self.nvars);
        let mut sign_flip = false;
        let mut rank = 0;
        let mut col = 0;
        while rank < self.rows && col < self.cols {
            let Some(p) = (rank..self.rows).find(|&r| !a[r][col].is_zero()) else {
                col += 1;
                continue;
            };
            if p != rank {
                a.swap(p, rank);
                sign_flip = !sign_flip;
            }
            let pivot = a[rank][col].clone();
            for r in rank + 1..self.rows {
                for c in col + 1..self.cols {
                    let num = &(&pivot * &a[r][c]) - &(&a[r][col] * &a[rank][c]);
                    a[r][c] = num
                        .div_exact(&prev)
                        .expect("Bareiss step divides exactly by the previous pivot");
                }
                a[r][col] = SpectralPolynomial::zero(self.nvars);
            }
            prev = pivot;
            rank += 1;
            col += 1;
        }
        let det = if self.rows == self.cols && rank == self.rows {
            if sign_flip {
                -prev
            } else {
                prev
            }
        } else {
            SpectralPolynomial::zero(self.nvars)
        };
        (det, rank)
    }

    /// Rank over the field of rational functions in λ.
    pub fn generic_rank(&self) -> usize {
        self.bareiss().1
    }

    /// Determinant through elimination regardless of size; used to
    /// cross-check the cofactor path.
    pub fn determinant_by_elimination(&self) -> SpectralPolynomial {
        assert_eq!(self.rows, self.cols);
        self.bareiss().0
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn lin(nvars: usize, c: &[i64]) -> SpectralPolynomial {
        assert_eq!(c.len(), nvars);
        SpectralPolynomial::linear(
            &c.iter()
                .map(|&x| num_rational::BigRational::from_integer(x.into()))
                .collect::<Vec<_>>(),
        )
    }

    #[test]
    fn constant_identity_has_unit_determinant() {
        let n = 5;
        let mut m = PolyMatrix::zeros(n, n, 2);
        for i in 0..n {
            m.set(i, i, SpectralPolynomial::one(2));
        }
        assert_eq!(m.determinant(), SpectralPolynomial::one(2));
        assert_eq!(m.generic_rank(), 5);
    }

    #[test]
    fn elimination_agrees_with_cofactor() {
        // 3×3 circulant-like matrix in three variables
        let rows = vec![
            vec![lin(3, &[1, 0, 0]), lin(3, &[0, 1, 0]), lin(3, &[0, 0, 1])],
            vec![lin(3, &[0, 1, 0]), lin(3, &[0, 0, 1]), lin(3, &[1, 0, 0])],
            vec![lin(3, &[0, 0, 1]), lin(3, &[1, 0, 0]), lin(3, &[0, 1, 0])],
        ];
        let m = PolyMatrix::from_rows(3, rows);
        assert_eq!(m.determinant(), m.determinant_by_elimination());
    }

    #[test]
    fn rank_of_skew_matrix_with_zero_row() {
        let rows = vec![
            vec![SpectralPolynomial::zero(1), lin(1, &[1])],
            vec![lin(1, &[-1]), SpectralPolynomial::zero(1)],
        ];
        let m = PolyMatrix::from_rows(1, rows);
        assert_eq!(m.generic_rank(), 2);
        let z = PolyMatrix::zeros(3, 3, 1);
        assert_eq!(z.generic_rank(), 0);
        assert!(z.determinant().is_zero());
    }
}
