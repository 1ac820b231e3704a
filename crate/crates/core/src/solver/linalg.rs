//! Symmetric positive-definite kernels: a profile (skyline) Cholesky for the
//! vertex-ordered P1 systems and Jacobi-preconditioned conjugate gradient for
//! the large ones.

use crate::error::{Error, Result};

/// Lower triangle stored row by row from the first nonzero column to the
/// diagonal.
#[derive(Clone, Debug)]
pub(crate) struct Skyline {
    first: Vec<usize>,
    start: Vec<usize>,
    values: Vec<f64>,
}

impl Skyline {
    /// `first[i]` is the smallest column with a structural nonzero in row `i`.
    pub fn with_profile(first: Vec<usize>) -> Self {
        let mut start = Vec::with_capacity(first.len() + 1);
        let mut acc = 0;
        for (i, &f) in first.iter().enumerate() {
            debug_assert!(f <= i);
            start.push(acc);
            acc += i - f + 1;
        }
        start.push(acc);
        Self { first, start, values: vec![0.0; acc] }
    }

    pub fn n(&self) -> usize {
        self.first.len()
    }

    /// Adds `v` to entry `(i, j)`, `j <= i`.
    pub fn add(&mut self, i: usize, j: usize, v: f64) {
        debug_assert!(j <= i && j >= self.first[i]);
        self.values[self.start[i] + j - self.first[i]] += v;
    }

    /// In-place Cholesky factorization `A = L Lᵀ`.
    pub fn factor(&mut self) -> Result<()> {
        for i in 0..self.n() {
            let fi = self.first[i];
            let (before, rest) = self.values.split_at_mut(self.start[i]);
            let row_i = &mut rest[..i - fi + 1];
            for j in fi..i {
                let fj = self.first[j];
                let k0 = fi.max(fj);
                let row_j = &before[self.start[j]..self.start[j] + (j - fj + 1)];
                let dot: f64 = row_i[k0 - fi..j - fi].iter().zip(&row_j[k0 - fj..j - fj]).map(|(a, b)| a * b).sum();
                row_i[j - fi] = (row_i[j - fi] - dot) / row_j[j - fj];
            }
            let sq: f64 = row_i[..i - fi].iter().map(|a| a * a).sum();
            let d = row_i[i - fi] - sq;
            if d.is_nan() || d <= 0.0 {
                return Err(Error::NotPositiveDefinite(i));
            }
            row_i[i - fi] = d.sqrt();
        }
        Ok(())
    }

    /// Solves `L Lᵀ x = b` in place after [`Skyline::factor`].
    pub fn solve(&self, b: &mut [f64]) {
        let n = self.n();
        for i in 0..n {
            let fi = self.first[i];
            let row = &self.values[self.start[i]..self.start[i + 1]];
            let dot: f64 = row[..i - fi].iter().zip(&b[fi..i]).map(|(a, x)| a * x).sum();
            b[i] = (b[i] - dot) / row[i - fi];
        }
        for i in (0..n).rev() {
            let fi = self.first[i];
            let row = &self.values[self.start[i]..self.start[i + 1]];
            b[i] /= row[i - fi];
            let xi = b[i];
            for (bk, a) in b[fi..i].iter_mut().zip(&row[..i - fi]) {
                *bk -= a * xi;
            }
        }
    }
}

/// Compressed sparse row matrix holding both triangles of a symmetric matrix.
#[derive(Clone, Debug)]
pub(crate) struct Csr {
    row_ptr: Vec<usize>,
    cols: Vec<usize>,
    vals: Vec<f64>,
}

impl Csr {
    /// Builds from unsorted `(row, col, value)` triplets, summing duplicates.
    pub fn from_triplets(n: usize, mut triplets: Vec<(usize, usize, f64)>) -> Self {
        triplets.sort_unstable_by_key(|&(r, c, _)| (r, c));
        let mut row_ptr = vec![0; n + 1];
        let mut cols = Vec::with_capacity(triplets.len());
        let mut vals: Vec<f64> = Vec::with_capacity(triplets.len());
        let mut last = None;
        for (r, c, v) in triplets {
            if last == Some((r, c)) {
                *vals.last_mut().expect("previous entry") += v;
            } else {
                cols.push(c);
                vals.push(v);
                row_ptr[r + 1] += 1;
                last = Some((r, c));
            }
        }
        for i in 0..n {
            row_ptr[i + 1] += row_ptr[i];
        }
        Self { row_ptr, cols, vals }
    }

    pub fn n(&self) -> usize {
        self.row_ptr.len() - 1
    }

    pub fn mul(&self, x: &[f64], y: &mut [f64]) {
        for (i, yi) in y.iter_mut().enumerate() {
            let range = self.row_ptr[i]..self.row_ptr[i + 1];
            *yi = self.cols[range.clone()].iter().zip(&self.vals[range]).map(|(&c, v)| v * x[c]).sum();
        }
    }

    fn diagonal(&self) -> Vec<f64> {
        (0..self.n())
            .map(|i| {
                let range = self.row_ptr[i]..self.row_ptr[i + 1];
                self.cols[range.clone()].iter().zip(&self.vals[range]).find(|(&c, _)| c == i).map_or(0.0, |(_, &v)| v)
            })
            .collect()
    }
}

/// Jacobi-preconditioned conjugate gradient, stopping when
/// `‖b − A x‖ ≤ tol · ‖b‖`.
pub(crate) fn conjugate_gradient(a: &Csr, b: &[f64], tol: f64, max_iter: usize) -> Result<Vec<f64>> {
    let n = a.n();
    let inv_diag: Vec<f64> = a.diagonal().iter().map(|&d| if d > 0.0 { 1.0 / d } else { 1.0 }).collect();
    let b_norm = norm(b);
    let mut x = vec![0.0; n];
    if b_norm == 0.0 {
        return Ok(x);
    }
    let mut r = b.to_vec();
    let mut z: Vec<f64> = r.iter().zip(&inv_diag).map(|(r, d)| r * d).collect();
    let mut p = z.clone();
    let mut ap = vec![0.0; n];
    let mut rz = dot(&r, &z);
    for iter in 0..max_iter {
        a.mul(&p, &mut ap);
        let alpha = rz / dot(&p, &ap);
        for i in 0..n {
            x[i] += alpha * p[i];
            r[i] -= alpha * ap[i];
        }
        let rel = norm(&r) / b_norm;
        if rel <= tol {
            // guard against drift of the recursive residual
            a.mul(&x, &mut ap);
            let true_rel = norm(&b.iter().zip(&ap).map(|(b, ax)| b - ax).collect::<Vec<_>>()) / b_norm;
            if true_rel <= tol {
                return Ok(x);
            }
            r = b.iter().zip(&ap).map(|(b, ax)| b - ax).collect();
        }
        for i in 0..n {
            z[i] = r[i] * inv_diag[i];
        }
        let rz_new = dot(&r, &z);
        let beta = rz_new / rz;
        rz = rz_new;
        for i in 0..n {
            p[i] = z[i] + beta * p[i];
        }
        if iter + 1 == max_iter {
            return Err(Error::NotConverged { residual: rel, iterations: max_iter });
        }
    }
    Err(Error::NotConverged { residual: f64::NAN, iterations: 0 })
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub(crate) fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;

    // 1D Laplacian plus a shift: tridiagonal SPD
    fn tridiag(n: usize) -> (Skyline, Csr) {
        let first = (0..n).map(|i| i.saturating_sub(1)).collect();
        let mut sky = Skyline::with_profile(first);
        let mut trip = Vec::new();
        for i in 0..n {
            sky.add(i, i, 2.5);
            trip.push((i, i, 2.5));
            if i > 0 {
                sky.add(i, i - 1, -1.0);
                trip.push((i, i - 1, -1.0));
                trip.push((i - 1, i, -1.0));
            }
        }
        (sky, Csr::from_triplets(n, trip))
    }

    #[test]
    fn skyline_and_cg_agree() {
        let n = 50;
        let (mut sky, csr) = tridiag(n);
        let b: Vec<f64> = (0..n).map(|i| (i as f64 * 0.37).sin()).collect();
        let mut x = b.clone();
        sky.factor().unwrap();
        sky.solve(&mut x);
        let mut ax = vec![0.0; n];
        csr.mul(&x, &mut ax);
        let res: f64 = ax.iter().zip(&b).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt();
        assert!(res < 1e-12);
        let y = conjugate_gradient(&csr, &b, 1e-12, 500).unwrap();
        let diff: f64 = x.iter().zip(&y).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        assert!(diff < 1e-10);
    }

    #[test]
    fn indefinite_is_rejected() {
        let mut sky = Skyline::with_profile(vec![0, 0]);
        sky.add(0, 0, 1.0);
        sky.add(1, 0, 2.0);
        sky.add(1, 1, 1.0);
        assert!(matches!(sky.factor(), Err(Error::NotPositiveDefinite(1))));
    }
}
