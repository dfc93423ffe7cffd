//! Dense vector and matrix kernels.
//!
//! Every output entry of a matrix-vector product is a single sequential dot
//! product, so the sequential and rayon paths produce bit-identical results.
//! Which path runs is decided by [`Exec`] at call time; without the
//! `parallel` feature both variants run sequentially.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

/// Execution mode for data-parallel kernels.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub enum Exec {
    Sequential,
    Parallel,
}

impl Default for Exec {
    fn default() -> Self {
        if cfg!(feature = "parallel") {
            Exec::Parallel
        } else {
            Exec::Sequential
        }
    }
}

impl Exec {
    pub fn is_parallel(self) -> bool {
        cfg!(feature = "parallel") && self == Exec::Parallel
    }
}

/// Fills `out[i] = f(i)` using the requested execution mode.
pub fn fill_indexed<F>(exec: Exec, out: &mut [f64], f: F)
where
    F: Fn(usize) -> f64 + Sync + Send,
{
    #[cfg(feature = "parallel")]
    if exec.is_parallel() && out.len() >= 64 {
        out.par_iter_mut().enumerate().for_each(|(i, o)| *o = f(i));
        return;
    }
    let _ = exec;
    for (i, o) in out.iter_mut().enumerate() {
        *o = f(i);
    }
}

#[inline]
pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

#[inline]
pub fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

pub fn norm_inf(a: &[f64]) -> f64 {
    a.iter().fold(0.0f64, |m, v| m.max(v.abs()))
}

pub fn sub(a: &[f64], b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

pub fn add(a: &[f64], b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x + y).collect()
}

pub fn scale(a: &[f64], s: f64) -> Vec<f64> {
    a.iter().map(|x| x * s).collect()
}

/// `y += alpha * x`
pub fn axpy(alpha: f64, x: &[f64], y: &mut [f64]) {
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += alpha * xi;
    }
}

pub fn dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        .sqrt()
}

/// Convex combination `(1 - t) a + t b`.
pub fn lerp(a: &[f64], b: &[f64], t: f64) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| (1.0 - t) * x + t * y).collect()
}

/// Row-major dense matrix that also keeps a row-major copy of its transpose,
/// so both `A x` and `Aᵀ y` are computed as contiguous row dot products.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseMatrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
    data_t: Vec<f64>,
}

impl DenseMatrix {
    pub fn from_row_major(rows: usize, cols: usize, data: Vec<f64>) -> Self {
        assert_eq!(data.len(), rows * cols, "matrix payload has wrong length");
        let mut data_t = vec![0.0; rows * cols];
        for i in 0..rows {
            for j in 0..cols {
                data_t[j * rows + i] = data[i * cols + j];
            }
        }
        Self {
            rows,
            cols,
            data,
            data_t,
        }
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self::from_row_major(rows, cols, vec![0.0; rows * cols])
    }

    pub fn identity(n: usize) -> Self {
        let mut d = vec![0.0; n * n];
        for i in 0..n {
            d[i * n + i] = 1.0;
        }
        Self::from_row_major(n, n, d)
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.cols + j]
    }

    pub fn matvec(&self, x: &[f64], exec: Exec) -> Vec<f64> {
        assert_eq!(x.len(), self.cols);
        let mut out = vec![0.0; self.rows];
        let cols = self.cols;
        let data = &self.data;
        fill_indexed(exec, &mut out, |i| dot(&data[i * cols..(i + 1) * cols], x));
        out
    }

    pub fn matvec_t(&self, y: &[f64], exec: Exec) -> Vec<f64> {
        assert_eq!(y.len(), self.rows);
        let mut out = vec![0.0; self.cols];
        let rows = self.rows;
        let data_t = &self.data_t;
        fill_indexed(exec, &mut out, |j| dot(&data_t[j * rows..(j + 1) * rows], y));
        out
    }

    /// Largest singular value by power iteration on `AᵀA`.
    pub fn spectral_norm(&self, max_iter: usize, tol: f64, exec: Exec) -> f64 {
        power_iteration(
            self.cols,
            |v| self.matvec_t(&self.matvec(v, exec), exec),
            max_iter,
            tol,
        )
        .sqrt()
    }
}

/// Dominant eigenvalue of a symmetric PSD operator by power iteration.
///
/// Starts from a fixed deterministic vector and stops once the Rayleigh
/// quotient changes by less than `tol` relative.
pub fn power_iteration<F>(n: usize, apply: F, max_iter: usize, tol: f64) -> f64
where
    F: Fn(&[f64]) -> Vec<f64>,
{
    if n == 0 {
        return 0.0;
    }
    let mut v: Vec<f64> = (0..n).map(|i| 1.0 + (i % 7) as f64 * 0.1).collect();
    let nv = norm(&v);
    v.iter_mut().for_each(|x| *x /= nv);
    let mut lambda = 0.0;
    for _ in 0..max_iter {
        let w = apply(&v);
        let next = dot(&v, &w);
        let nw = norm(&w);
        if nw == 0.0 {
            return 0.0;
        }
        v = w.into_iter().map(|x| x / nw).collect();
        if (next - lambda).abs() <= tol * next.abs() {
            return next.max(lambda);
        }
        lambda = next;
    }
    lambda
}

/// Solves the square system `a x = b` (row-major `a`, dimension `n`) by
/// Gaussian elimination with partial pivoting.
///
/// Returns `None` when a pivot falls below `rel_pivot_tol` times the largest
/// absolute entry of `a`.
pub fn solve_dense(n: usize, a: &[f64], b: &[f64], rel_pivot_tol: f64) -> Option<Vec<f64>> {
    debug_assert_eq!(a.len(), n * n);
    debug_assert_eq!(b.len(), n);
    if n == 0 {
        return Some(Vec::new());
    }
    let mut m = a.to_vec();
    let mut rhs = b.to_vec();
    let scale = norm_inf(a);
    if scale == 0.0 {
        return None;
    }
    let threshold = rel_pivot_tol * scale;
    for col in 0..n {
        let (piv, pval) = (col..n)
            .map(|r| (r, m[r * n + col].abs()))
            .fold((col, -1.0), |best, cur| if cur.1 > best.1 { cur } else { best });
        if pval <= threshold {
            return None;
        }
        if piv != col {
            for j in 0..n {
                m.swap(col * n + j, piv * n + j);
            }
            rhs.swap(col, piv);
        }
        let d = m[col * n + col];
        for r in col + 1..n {
            let factor = m[r * n + col] / d;
            if factor == 0.0 {
                continue;
            }
            for j in col..n {
                m[r * n + j] -= factor * m[col * n + j];
            }
            rhs[r] -= factor * rhs[col];
        }
    }
    let mut x = vec![0.0; n];
    for r in (0..n).rev() {
        let mut s = rhs[r];
        for j in r + 1..n {
            s -= m[r * n + j] * x[j];
        }
        x[r] = s / m[r * n + r];
    }
    Some(x)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn matvec_and_transpose_agree_with_naive_loops() {
        let a = DenseMatrix::from_row_major(2, 3, vec![1.0, 2.0, 3.0, 4.0, 5.0, 6.0]);
        assert_eq!(a.matvec(&[1.0, 0.0, -1.0], Exec::Sequential), vec![-2.0, -2.0]);
        assert_eq!(a.matvec_t(&[1.0, 1.0], Exec::Sequential), vec![5.0, 7.0, 9.0]);
    }

    #[test]
    fn parallel_matvec_is_bit_identical() {
        let n = 300;
        let data: Vec<f64> = (0..n * n).map(|i| ((i * 7919) % 1013) as f64 / 1013.0 - 0.3).collect();
        let a = DenseMatrix::from_row_major(n, n, data);
        let x: Vec<f64> = (0..n).map(|i| (i as f64).sin()).collect();
        assert_eq!(a.matvec(&x, Exec::Sequential), a.matvec(&x, Exec::Parallel));
        assert_eq!(a.matvec_t(&x, Exec::Sequential), a.matvec_t(&x, Exec::Parallel));
    }

    #[test]
    fn solve_dense_detects_singular() {
        assert!(solve_dense(2, &[1.0, 2.0, 2.0, 4.0], &[1.0, 2.0], 1e-12).is_none());
        let x = solve_dense(2, &[0.0, 1.0, 2.0, 0.0], &[3.0, 4.0], 1e-12).unwrap();
        assert_eq!(x, vec![2.0, 3.0]);
    }

    #[test]
    fn spectral_norm_of_diagonal() {
        let a = DenseMatrix::from_row_major(2, 2, vec![3.0, 0.0, 0.0, -5.0]);
        let s = a.spectral_norm(500, 1e-14, Exec::Sequential);
        assert!((s - 5.0).abs() < 1e-6);
    }
}
