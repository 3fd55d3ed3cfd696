//! Minimal deterministic dense linear algebra and seeded pseudo-randomness.
//!
//! Everything else in the crate is built on two types: [`Matrix`], a row-major
//! dense matrix of `f64`, and [`Rng`], a splitmix64 generator with labelled
//! sub-streams. Operations are pure (inputs are never mutated) and dot
//! products accumulate strictly left to right, so results are bit-identical
//! across runs and platforms. That reproducibility is the design priority
//! here, not throughput.

use crate::error::{Error, Result};

/// Dense 2-D matrix of 64-bit floats, row-major.
///
/// Invariants: `data.len() == rows * cols` and every entry is finite. Public
/// constructors and operations uphold both.
#[derive(Debug, Clone, PartialEq)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl Matrix {
    /// Builds a matrix from row-major data. Rejects length mismatches and
    /// non-finite entries.
    pub fn from_vec(rows: usize, cols: usize, data: Vec<f64>) -> Result<Matrix> {
        if rows == 0 || cols == 0 {
            return Err(Error::Param(format!(
                "matrix dimensions must be positive, got {rows}x{cols}"
            )));
        }
        if data.len() != rows * cols {
            return Err(Error::Param(format!(
                "data length {} does not match {rows}x{cols}",
                data.len()
            )));
        }
        if !data.iter().all(|v| v.is_finite()) {
            return Err(Error::Param("matrix entries must be finite".into()));
        }
        Ok(Matrix { rows, cols, data })
    }

    /// All-zero matrix.
    pub fn zeros(rows: usize, cols: usize) -> Matrix {
        Matrix {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    /// Convenience constructor from nested rows; every row must have the same
    /// length. Mostly used in tests and examples.
    pub fn from_rows(rows: &[&[f64]]) -> Result<Matrix> {
        if rows.is_empty() || rows[0].is_empty() {
            return Err(Error::Param("from_rows needs at least one element".into()));
        }
        let cols = rows[0].len();
        let mut data = Vec::with_capacity(rows.len() * cols);
        for r in rows {
            if r.len() != cols {
                return Err(Error::Param("ragged rows".into()));
            }
            data.extend_from_slice(r);
        }
        Matrix::from_vec(rows.len(), cols, data)
    }

    /// Identity matrix of order `n`.
    pub fn identity(n: usize) -> Matrix {
        let mut m = Matrix::zeros(n, n);
        for i in 0..n {
            m.data[i * n + i] = 1.0;
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    /// Row-major backing slice.
    pub fn data(&self) -> &[f64] {
        &self.data
    }

    /// Row `i` as a slice.
    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        debug_assert!(i < self.rows && j < self.cols);
        self.data[i * self.cols + j]
    }

    /// Applies `f` elementwise, producing a new matrix.
    pub fn map(&self, f: impl Fn(f64) -> f64) -> Matrix {
        Matrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|&v| f(v)).collect(),
        }
    }

    /// Standard matrix product.
    ///
    /// The `k` accumulation for each output element runs strictly left to
    /// right, which keeps results bit-reproducible.
    pub fn matmul(&self, b: &Matrix) -> Result<Matrix> {
        if self.cols != b.rows {
            return Err(Error::shape("matmul", self.shape(), b.shape()));
        }
        let mut out = Matrix::zeros(self.rows, b.cols);
        for i in 0..self.rows {
            let a_row = self.row(i);
            let o_row = &mut out.data[i * b.cols..(i + 1) * b.cols];
            for (k, &aik) in a_row.iter().enumerate() {
                let b_row = &b.data[k * b.cols..(k + 1) * b.cols];
                for (o, &bkj) in o_row.iter_mut().zip(b_row) {
                    *o += aik * bkj;
                }
            }
        }
        Ok(out)
    }

    /// `self . bᵀ` without materializing the transpose.
    ///
    /// Bitwise identical to `self.matmul(&b.transpose())`: each output element
    /// is the same left-to-right dot product of two stored rows.
    pub fn matmul_nt(&self, b: &Matrix) -> Result<Matrix> {
        if self.cols != b.cols {
            return Err(Error::shape("matmul_nt", self.shape(), b.shape()));
        }
        let mut out = Matrix::zeros(self.rows, b.rows);
        for i in 0..self.rows {
            let a_row = self.row(i);
            for j in 0..b.rows {
                let b_row = b.row(j);
                let mut acc = 0.0;
                for (&x, &y) in a_row.iter().zip(b_row) {
                    acc += x * y;
                }
                out.data[i * b.rows + j] = acc;
            }
        }
        Ok(out)
    }

    /// `selfᵀ . b` without materializing the transpose.
    ///
    /// Bitwise identical to `self.transpose().matmul(&b)` (the `k` loop runs
    /// outermost, still in increasing order per output element).
    pub fn matmul_tn(&self, b: &Matrix) -> Result<Matrix> {
        if self.rows != b.rows {
            return Err(Error::shape("matmul_tn", self.shape(), b.shape()));
        }
        let mut out = Matrix::zeros(self.cols, b.cols);
        for k in 0..self.rows {
            let a_row = self.row(k);
            let b_row = b.row(k);
            for (i, &aki) in a_row.iter().enumerate() {
                let o_row = &mut out.data[i * b.cols..(i + 1) * b.cols];
                for (o, &bkj) in o_row.iter_mut().zip(b_row) {
                    *o += aki * bkj;
                }
            }
        }
        Ok(out)
    }

    /// Transpose; `(i, j) -> (j, i)`.
    pub fn transpose(&self) -> Matrix {
        let mut out = Matrix::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                out.data[j * self.rows + i] = self.data[i * self.cols + j];
            }
        }
        out
    }

    /// Elementwise product. Operands must share a shape.
    pub fn hadamard(&self, b: &Matrix) -> Result<Matrix> {
        if self.shape() != b.shape() {
            return Err(Error::shape("hadamard", self.shape(), b.shape()));
        }
        let data = self
            .data
            .iter()
            .zip(&b.data)
            .map(|(&x, &y)| x * y)
            .collect();
        Ok(Matrix {
            rows: self.rows,
            cols: self.cols,
            data,
        })
    }

    /// Column means as a `1 x cols` row (the batch mean when rows are
    /// examples).
    pub fn mean_rows(&self) -> Matrix {
        let mut sums = vec![0.0; self.cols];
        for i in 0..self.rows {
            for (s, &v) in sums.iter_mut().zip(self.row(i)) {
                *s += v;
            }
        }
        let n = self.rows as f64;
        Matrix {
            rows: 1,
            cols: self.cols,
            data: sums.into_iter().map(|s| s / n).collect(),
        }
    }

    /// Elementwise sum.
    pub fn add(&self, b: &Matrix) -> Result<Matrix> {
        if self.shape() != b.shape() {
            return Err(Error::shape("add", self.shape(), b.shape()));
        }
        let data = self
            .data
            .iter()
            .zip(&b.data)
            .map(|(&x, &y)| x + y)
            .collect();
        Ok(Matrix {
            rows: self.rows,
            cols: self.cols,
            data,
        })
    }

    /// Elementwise difference.
    pub fn sub(&self, b: &Matrix) -> Result<Matrix> {
        if self.shape() != b.shape() {
            return Err(Error::shape("sub", self.shape(), b.shape()));
        }
        let data = self
            .data
            .iter()
            .zip(&b.data)
            .map(|(&x, &y)| x - y)
            .collect();
        Ok(Matrix {
            rows: self.rows,
            cols: self.cols,
            data,
        })
    }

    /// `self + alpha * b`, the SGD workhorse.
    pub fn add_scaled(&self, alpha: f64, b: &Matrix) -> Result<Matrix> {
        if self.shape() != b.shape() {
            return Err(Error::shape("add_scaled", self.shape(), b.shape()));
        }
        let data = self
            .data
            .iter()
            .zip(&b.data)
            .map(|(&x, &y)| x + alpha * y)
            .collect();
        Ok(Matrix {
            rows: self.rows,
            cols: self.cols,
            data,
        })
    }

    /// Scalar multiple.
    pub fn scale(&self, alpha: f64) -> Matrix {
        self.map(|v| alpha * v)
    }

    /// Adds a `1 x cols` row to every row of `self` (bias broadcast).
    pub fn add_row_broadcast(&self, row: &Matrix) -> Result<Matrix> {
        if row.rows != 1 || row.cols != self.cols {
            return Err(Error::shape("add_row_broadcast", self.shape(), row.shape()));
        }
        let mut out = self.clone();
        for i in 0..out.rows {
            let r = &mut out.data[i * out.cols..(i + 1) * out.cols];
            for (o, &v) in r.iter_mut().zip(&row.data) {
                *o += v;
            }
        }
        Ok(out)
    }

    /// Multiplies every row of `self` elementwise by a `1 x cols` row (the
    /// surrogate-derivative broadcast used by the temporal-differencing
    /// rules).
    pub fn mul_row_broadcast(&self, row: &Matrix) -> Result<Matrix> {
        if row.rows != 1 || row.cols != self.cols {
            return Err(Error::shape("mul_row_broadcast", self.shape(), row.shape()));
        }
        let mut out = self.clone();
        for i in 0..out.rows {
            let r = &mut out.data[i * out.cols..(i + 1) * out.cols];
            for (o, &v) in r.iter_mut().zip(&row.data) {
                *o *= v;
            }
        }
        Ok(out)
    }

    /// Frobenius norm.
    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|&v| v * v).sum::<f64>().sqrt()
    }

    /// Angle between two same-shape matrices viewed as flat vectors, in
    /// degrees, clamped to `[0, 180]`.
    ///
    /// The cosine is clamped to `[-1, 1]` and the endpoints map to exactly
    /// `0.0` and `180.0`, so `angle(a, -a) == 180.0` holds bitwise. Zero-norm
    /// operands are a degenerate-input error.
    pub fn angle_degrees(&self, b: &Matrix) -> Result<f64> {
        if self.shape() != b.shape() {
            return Err(Error::shape("angle_degrees", self.shape(), b.shape()));
        }
        let mut dot = 0.0;
        let mut sa = 0.0;
        let mut sb = 0.0;
        for (&x, &y) in self.data.iter().zip(&b.data) {
            dot += x * y;
            sa += x * x;
            sb += y * y;
        }
        if sa == 0.0 || sb == 0.0 {
            return Err(Error::Degenerate(
                "angle_degrees needs nonzero-norm operands".into(),
            ));
        }
        // Endpoint test in squared form: sqrt never runs, so `b == a` and
        // `b == -a` hit the exact 0 / 180 branches bitwise.
        if dot * dot >= sa * sb {
            return Ok(if dot >= 0.0 { 0.0 } else { 180.0 });
        }
        let c = (dot / (sa.sqrt() * sb.sqrt())).clamp(-1.0, 1.0);
        Ok(c.acos().to_degrees())
    }

    /// Matrix with i.i.d. entries uniform in `[lo, hi)`, drawn row-major from
    /// `rng`.
    pub fn rand_uniform(
        rng: &mut Rng,
        rows: usize,
        cols: usize,
        lo: f64,
        hi: f64,
    ) -> Result<Matrix> {
        if lo >= hi || !lo.is_finite() || !hi.is_finite() {
            return Err(Error::Param(format!(
                "rand_uniform needs finite lo < hi, got [{lo}, {hi})"
            )));
        }
        if rows == 0 || cols == 0 {
            return Err(Error::Param(format!(
                "matrix dimensions must be positive, got {rows}x{cols}"
            )));
        }
        let span = hi - lo;
        let data = (0..rows * cols)
            .map(|_| lo + rng.next_f64() * span)
            .collect();
        Ok(Matrix { rows, cols, data })
    }

    /// True when every entry is finite. Constructors enforce this; training
    /// loops re-check after arithmetic that could overflow.
    pub fn all_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }
}

const GOLDEN_GAMMA: u64 = 0x9E37_79B9_7F4A_7C15;

fn mix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Seeded splitmix64 stream.
///
/// Identical seeds produce identical sequences on every platform. Consumers
/// never share a stream; each derives its own with [`Rng::substream`], which
/// hashes the master seed with a purpose label so adding a new consumer never
/// perturbs existing streams.
#[derive(Debug, Clone)]
pub struct Rng {
    state: u64,
}

impl Rng {
    pub fn new(seed: u64) -> Rng {
        Rng { state: seed }
    }

    /// Independent stream for one purpose, e.g. `substream(seed, "init")`.
    pub fn substream(seed: u64, label: &str) -> Rng {
        // FNV-1a over the label, folded into the seed, then finalized.
        let mut h: u64 = 0xcbf2_9ce4_8422_2325;
        for &b in label.as_bytes() {
            h ^= b as u64;
            h = h.wrapping_mul(0x0000_0100_0000_01B3);
        }
        Rng {
            state: mix64(seed ^ h),
        }
    }

    pub fn next_u64(&mut self) -> u64 {
        self.state = self.state.wrapping_add(GOLDEN_GAMMA);
        mix64(self.state)
    }

    /// Uniform in `[0, 1)` with 53 random bits.
    pub fn next_f64(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Uniform integer in `[0, n)`. Plain modulo; the bias is far below
    /// anything our shuffling can observe and determinism is what matters.
    pub fn next_below(&mut self, n: u64) -> u64 {
        debug_assert!(n > 0);
        self.next_u64() % n
    }

    /// Standard normal deviate via Box-Muller.
    pub fn next_gaussian(&mut self) -> f64 {
        // Avoid ln(0) by nudging u1 away from zero.
        let u1 = (self.next_u64() >> 11) as f64 + 0.5;
        let u1 = u1 * (1.0 / (1u64 << 53) as f64);
        let u2 = self.next_f64();
        (-2.0 * u1.ln()).sqrt() * (std::f64::consts::TAU * u2).cos()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Independent naive triple-loop oracle for matmul.
    fn matmul_oracle(a: &Matrix, b: &Matrix) -> Matrix {
        let mut out = Matrix::zeros(a.rows(), b.cols());
        for i in 0..a.rows() {
            for j in 0..b.cols() {
                let mut s = 0.0;
                for k in 0..a.cols() {
                    s += a.get(i, k) * b.get(k, j);
                }
                out.data[i * b.cols() + j] = s;
            }
        }
        out
    }

    fn m(rows: &[&[f64]]) -> Matrix {
        Matrix::from_rows(rows).unwrap()
    }

    #[test]
    fn matmul_identity() {
        let a = m(&[&[1.0, 2.0], &[3.0, 4.0]]);
        let i2 = Matrix::identity(2);
        assert_eq!(i2.matmul(&a).unwrap(), a);
    }

    #[test]
    fn matmul_matches_oracle() {
        let a = m(&[&[1.0, 2.0], &[3.0, 4.0]]);
        let b = m(&[&[5.0], &[6.0]]);
        let got = a.matmul(&b).unwrap();
        assert_eq!(got, m(&[&[17.0], &[39.0]]));
        assert_eq!(got, matmul_oracle(&a, &b));
    }

    #[test]
    fn matmul_zero_annihilates() {
        let z = Matrix::zeros(2, 2);
        let b = m(&[&[5.0], &[6.0]]);
        assert_eq!(z.matmul(&b).unwrap(), Matrix::zeros(2, 1));
    }

    #[test]
    fn matmul_shape_error_names_both_shapes() {
        let a = Matrix::zeros(2, 3);
        let b = Matrix::zeros(2, 3);
        let err = a.matmul(&b).unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("2x3"), "got: {msg}");
    }

    #[test]
    fn matmul_nt_tn_bitwise_equal_transposed_matmul() {
        let mut rng = Rng::new(7);
        let a = Matrix::rand_uniform(&mut rng, 4, 5, -2.0, 2.0).unwrap();
        let b = Matrix::rand_uniform(&mut rng, 3, 5, -2.0, 2.0).unwrap();
        assert_eq!(a.matmul_nt(&b).unwrap(), a.matmul(&b.transpose()).unwrap());
        let c = Matrix::rand_uniform(&mut rng, 4, 6, -2.0, 2.0).unwrap();
        assert_eq!(a.matmul_tn(&c).unwrap(), a.transpose().matmul(&c).unwrap());
    }

    #[test]
    fn transpose_permutes_indices() {
        let a = m(&[&[1.0, 2.0], &[3.0, 4.0]]);
        // index-permutation oracle: out[j][i] == a[i][j]
        let t = a.transpose();
        for i in 0..2 {
            for j in 0..2 {
                assert_eq!(t.get(j, i), a.get(i, j));
            }
        }
        assert_eq!(t, m(&[&[1.0, 3.0], &[2.0, 4.0]]));
    }

    #[test]
    fn transpose_is_involution() {
        let mut rng = Rng::new(3);
        let a = Matrix::rand_uniform(&mut rng, 3, 5, -1.0, 1.0).unwrap();
        assert_eq!(a.transpose().transpose(), a);
        let one = m(&[&[42.0]]);
        assert_eq!(one.transpose(), one);
    }

    #[test]
    fn hadamard_examples() {
        let a = m(&[&[2.0, 3.0]]);
        let ones = m(&[&[1.0, 1.0]]);
        let zeros = Matrix::zeros(1, 2);
        assert_eq!(a.hadamard(&ones).unwrap(), a);
        assert_eq!(
            a.hadamard(&m(&[&[4.0, 5.0]])).unwrap(),
            m(&[&[8.0, 15.0]])
        );
        assert_eq!(a.hadamard(&zeros).unwrap(), zeros);
        assert!(a.hadamard(&Matrix::zeros(2, 2)).is_err());
    }

    #[test]
    fn mean_rows_examples() {
        // sum/count oracle
        let a = m(&[&[1.0, 3.0], &[3.0, 5.0]]);
        assert_eq!(a.mean_rows(), m(&[&[2.0, 4.0]]));
        let single = m(&[&[7.0, 8.0, 9.0]]);
        assert_eq!(single.mean_rows(), single);
        let c = m(&[&[5.5, 5.5], &[5.5, 5.5], &[5.5, 5.5]]);
        assert_eq!(c.mean_rows(), m(&[&[5.5, 5.5]]));
    }

    #[test]
    fn angle_degrees_analytic_cases() {
        let a = m(&[&[1.0, 0.0]]);
        let b = m(&[&[0.0, 1.0]]);
        let c = m(&[&[1.0, 1.0]]);
        assert_eq!(a.angle_degrees(&a).unwrap(), 0.0);
        assert!((a.angle_degrees(&b).unwrap() - 90.0).abs() < 1e-12);
        assert!((a.angle_degrees(&c).unwrap() - 45.0).abs() < 1e-12);
    }

    #[test]
    fn angle_degrees_symmetry_and_opposition() {
        let mut rng = Rng::new(11);
        for _ in 0..32 {
            let a = Matrix::rand_uniform(&mut rng, 3, 4, -1.0, 1.0).unwrap();
            let b = Matrix::rand_uniform(&mut rng, 3, 4, -1.0, 1.0).unwrap();
            // Exact symmetry: same products, same summation order.
            assert_eq!(
                a.angle_degrees(&b).unwrap().to_bits(),
                b.angle_degrees(&a).unwrap().to_bits()
            );
            assert_eq!(a.angle_degrees(&a.scale(-1.0)).unwrap(), 180.0);
        }
    }

    #[test]
    fn angle_degrees_zero_norm_is_degenerate() {
        let a = m(&[&[1.0, 0.0]]);
        let z = Matrix::zeros(1, 2);
        assert!(matches!(
            a.angle_degrees(&z),
            Err(Error::Degenerate(_))
        ));
    }

    #[test]
    fn rand_uniform_deterministic_and_bounded() {
        let mut r1 = Rng::substream(99, "x");
        let mut r2 = Rng::substream(99, "x");
        let a = Matrix::rand_uniform(&mut r1, 5, 7, -0.25, 0.25).unwrap();
        let b = Matrix::rand_uniform(&mut r2, 5, 7, -0.25, 0.25).unwrap();
        assert_eq!(a, b);
        assert!(a.data().iter().all(|&v| (-0.25..0.25).contains(&v)));
        assert!(Matrix::rand_uniform(&mut r1, 2, 2, 1.0, 1.0).is_err());
    }

    #[test]
    fn rand_uniform_sample_mean_near_half() {
        // statistical check against uniform moments: mean of 10^4 draws
        let mut rng = Rng::substream(12345, "mean-check");
        let m = Matrix::rand_uniform(&mut rng, 100, 100, 0.0, 1.0).unwrap();
        let mean = m.data().iter().sum::<f64>() / 1e4;
        assert!((mean - 0.5).abs() < 0.02, "mean {mean}");
    }

    #[test]
    fn substreams_differ_by_label() {
        let mut a = Rng::substream(5, "init");
        let mut b = Rng::substream(5, "feedback");
        assert_ne!(a.next_u64(), b.next_u64());
    }

    #[test]
    fn operations_do_not_mutate_inputs() {
        let a = m(&[&[1.0, 2.0], &[3.0, 4.0]]);
        let b = m(&[&[5.0, 6.0], &[7.0, 8.0]]);
        let (ac, bc) = (a.clone(), b.clone());
        let _ = a.matmul(&b).unwrap();
        let _ = a.hadamard(&b).unwrap();
        let _ = a.transpose();
        let _ = a.mean_rows();
        let _ = a.angle_degrees(&b).unwrap();
        assert_eq!(a, ac);
        assert_eq!(b, bc);
    }

    mod properties {
        use super::*;
        use proptest::prelude::*;

        fn entry() -> impl Strategy<Value = f64> {
            -3.0..3.0f64
        }

        fn matrix(rows: usize, cols: usize) -> impl Strategy<Value = Matrix> {
            proptest::collection::vec(entry(), rows * cols)
                .prop_map(move |d| Matrix::from_vec(rows, cols, d).unwrap())
        }

        proptest! {
            #[test]
            fn transposed_products_are_bitwise_equal(
                (a, b, c) in (1usize..6, 1usize..6, 1usize..6, 1usize..6)
                    .prop_flat_map(|(m, k, n, p)| (matrix(m, k), matrix(n, k), matrix(m, p)))
            ) {
                prop_assert_eq!(a.matmul_nt(&b)?, a.matmul(&b.transpose())?);
                prop_assert_eq!(a.matmul_tn(&c)?, a.transpose().matmul(&c)?);
            }

            #[test]
            fn matmul_associates_within_1e9(
                (a, b, c) in (1usize..5, 1usize..5, 1usize..5, 1usize..5)
                    .prop_flat_map(|(m, k, n, p)| (matrix(m, k), matrix(k, n), matrix(n, p)))
            ) {
                let left = a.matmul(&b)?.matmul(&c)?;
                let right = a.matmul(&b.matmul(&c)?)?;
                let diff = left.sub(&right)?.frobenius_norm();
                prop_assert!(diff / left.frobenius_norm().max(1.0) <= 1e-9);
            }

            #[test]
            fn hadamard_commutes_bitwise(
                (a, b) in (1usize..6, 1usize..6)
                    .prop_flat_map(|(m, n)| (matrix(m, n), matrix(m, n)))
            ) {
                prop_assert_eq!(a.hadamard(&b)?, b.hadamard(&a)?);
            }

            #[test]
            fn angle_is_symmetric_and_oppositional(
                (a, b) in (1usize..6, 1usize..6)
                    .prop_flat_map(|(m, n)| (matrix(m, n), matrix(m, n)))
            ) {
                if a.frobenius_norm() > 0.0 && b.frobenius_norm() > 0.0 {
                    prop_assert_eq!(
                        a.angle_degrees(&b)?.to_bits(),
                        b.angle_degrees(&a)?.to_bits()
                    );
                    prop_assert_eq!(a.angle_degrees(&a.scale(-1.0))?, 180.0);
                }
            }
        }
    }
}
