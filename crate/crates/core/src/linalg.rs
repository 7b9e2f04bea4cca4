//! Dense linear algebra for desk-scale conic problems.
//!
//! Packed symmetric storage, Cholesky and partially pivoted LU factorizations,
//! cyclic Jacobi eigenvalues, local norms and Loewner-order comparisons.

use crate::error::{Error, Result};

const EPS: f64 = f64::EPSILON;

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn norm2(v: &[f64]) -> f64 {
    dot(v, v).sqrt()
}

/// `y += alpha * x`
pub fn axpy(alpha: f64, x: &[f64], y: &mut [f64]) {
    debug_assert_eq!(x.len(), y.len());
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += alpha * xi;
    }
}

pub fn sub(a: &[f64], b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

pub fn scaled(alpha: f64, v: &[f64]) -> Vec<f64> {
    v.iter().map(|x| alpha * x).collect()
}

/// Row-major dense matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseMatrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl DenseMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.set(i, i, 1.0);
        }
        m
    }

    pub fn from_row_major(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::DimensionMismatch(format!(
                "{} entries for a {rows}x{cols} matrix",
                data.len()
            )));
        }
        Ok(Self { rows, cols, data })
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let cols = rows.first().map_or(0, Vec::len);
        let mut data = Vec::with_capacity(rows.len() * cols);
        for (i, r) in rows.iter().enumerate() {
            if r.len() != cols {
                return Err(Error::DimensionMismatch(format!(
                    "row {i} has {} entries, expected {cols}",
                    r.len()
                )));
            }
            data.extend_from_slice(r);
        }
        Ok(Self {
            rows: rows.len(),
            cols,
            data,
        })
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

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.cols + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.data[i * self.cols + j] = v;
    }

    #[inline]
    pub fn add_to(&mut self, i: usize, j: usize, v: f64) {
        self.data[i * self.cols + j] += v;
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn mul_vec(&self, v: &[f64]) -> Vec<f64> {
        assert_eq!(v.len(), self.cols);
        (0..self.rows).map(|i| dot(self.row(i), v)).collect()
    }

    /// `Aᵀ v`
    pub fn tr_mul_vec(&self, v: &[f64]) -> Vec<f64> {
        assert_eq!(v.len(), self.rows);
        let mut out = vec![0.0; self.cols];
        for (i, vi) in v.iter().enumerate() {
            axpy(*vi, self.row(i), &mut out);
        }
        out
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, x| m.max(x.abs()))
    }

    /// Numerical rank by Gaussian elimination with full pivoting.
    pub fn rank(&self, rel_tol: f64) -> usize {
        let mut a = self.data.clone();
        let (m, n) = (self.rows, self.cols);
        let tol = rel_tol * self.max_abs().max(f64::MIN_POSITIVE);
        let mut rank = 0;
        let mut row_used = vec![false; m];
        let mut col_used = vec![false; n];
        for _ in 0..m.min(n) {
            let mut best = (0.0, 0, 0);
            for i in (0..m).filter(|&i| !row_used[i]) {
                for j in (0..n).filter(|&j| !col_used[j]) {
                    let v = a[i * n + j].abs();
                    if v > best.0 {
                        best = (v, i, j);
                    }
                }
            }
            let (piv, pi, pj) = best;
            if piv <= tol {
                break;
            }
            row_used[pi] = true;
            col_used[pj] = true;
            rank += 1;
            for i in (0..m).filter(|&i| !row_used[i]) {
                let f = a[i * n + pj] / a[pi * n + pj];
                for j in 0..n {
                    a[i * n + j] -= f * a[pi * n + j];
                }
            }
        }
        rank
    }
}

/// Symmetric matrix stored as its packed lower triangle.
#[derive(Debug, Clone, PartialEq)]
pub struct SymMatrix {
    dim: usize,
    data: Vec<f64>,
}

#[inline]
fn packed_index(i: usize, j: usize) -> usize {
    let (r, c) = if i >= j { (i, j) } else { (j, i) };
    r * (r + 1) / 2 + c
}

impl SymMatrix {
    pub fn zeros(dim: usize) -> Self {
        assert!(dim >= 1, "symmetric matrix needs dim >= 1");
        Self {
            dim,
            data: vec![0.0; dim * (dim + 1) / 2],
        }
    }

    pub fn identity(dim: usize) -> Self {
        Self::from_diag(&vec![1.0; dim])
    }

    pub fn from_diag(d: &[f64]) -> Self {
        let mut s = Self::zeros(d.len());
        for (i, v) in d.iter().enumerate() {
            s.set(i, i, *v);
        }
        s
    }

    /// Builds from `f(i, j)` evaluated on the lower triangle only.
    pub fn from_fn(dim: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut s = Self::zeros(dim);
        for i in 0..dim {
            for j in 0..=i {
                s.set(i, j, f(i, j));
            }
        }
        s
    }

    /// Takes the lower triangle of a square dense matrix.
    pub fn from_dense_lower(m: &DenseMatrix) -> Self {
        assert_eq!(m.rows(), m.cols());
        Self::from_fn(m.rows(), |i, j| m.get(i, j))
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn packed(&self) -> &[f64] {
        &self.data
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[packed_index(i, j)]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.data[packed_index(i, j)] = v;
    }

    #[inline]
    pub fn add_to(&mut self, i: usize, j: usize, v: f64) {
        self.data[packed_index(i, j)] += v;
    }

    /// `self += alpha * other`
    pub fn axpy(&mut self, alpha: f64, other: &SymMatrix) {
        assert_eq!(self.dim, other.dim);
        axpy(alpha, &other.data, &mut self.data);
    }

    pub fn scale(&mut self, alpha: f64) {
        self.data.iter_mut().for_each(|x| *x *= alpha);
    }

    pub fn scaled(&self, alpha: f64) -> Self {
        let mut s = self.clone();
        s.scale(alpha);
        s
    }

    /// `self += alpha * v vᵀ`
    pub fn add_outer(&mut self, alpha: f64, v: &[f64]) {
        assert_eq!(v.len(), self.dim);
        for i in 0..self.dim {
            let avi = alpha * v[i];
            let row = &mut self.data[i * (i + 1) / 2..i * (i + 1) / 2 + i + 1];
            for (j, r) in row.iter_mut().enumerate() {
                *r += avi * v[j];
            }
        }
    }

    /// Writes `block` onto the diagonal block starting at `offset`.
    pub fn set_block(&mut self, offset: usize, block: &SymMatrix) {
        for i in 0..block.dim {
            for j in 0..=i {
                self.set(offset + i, offset + j, block.get(i, j));
            }
        }
    }

    pub fn block(&self, offset: usize, dim: usize) -> SymMatrix {
        SymMatrix::from_fn(dim, |i, j| self.get(offset + i, offset + j))
    }

    pub fn mul_vec(&self, v: &[f64]) -> Vec<f64> {
        assert_eq!(v.len(), self.dim);
        let mut out = vec![0.0; self.dim];
        for i in 0..self.dim {
            let base = i * (i + 1) / 2;
            for j in 0..i {
                let a = self.data[base + j];
                out[i] += a * v[j];
                out[j] += a * v[i];
            }
            out[i] += self.data[base + i] * v[i];
        }
        out
    }

    pub fn quad_form(&self, v: &[f64]) -> f64 {
        dot(v, &self.mul_vec(v))
    }

    pub fn diag(&self) -> Vec<f64> {
        (0..self.dim).map(|i| self.get(i, i)).collect()
    }

    pub fn max_diag(&self) -> f64 {
        self.diag().into_iter().fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn frobenius_norm(&self) -> f64 {
        let mut s = 0.0;
        for i in 0..self.dim {
            for j in 0..=i {
                let v = self.get(i, j);
                s += if i == j { v * v } else { 2.0 * v * v };
            }
        }
        s.sqrt()
    }

    /// Full row-major copy.
    pub fn to_full(&self) -> Vec<f64> {
        let n = self.dim;
        let mut out = vec![0.0; n * n];
        for i in 0..n {
            for j in 0..n {
                out[i * n + j] = self.get(i, j);
            }
        }
        out
    }

    pub fn to_dense(&self) -> DenseMatrix {
        DenseMatrix {
            rows: self.dim,
            cols: self.dim,
            data: self.to_full(),
        }
    }
}

impl std::ops::Sub for &SymMatrix {
    type Output = SymMatrix;

    fn sub(self, rhs: &SymMatrix) -> SymMatrix {
        let mut out = self.clone();
        out.axpy(-1.0, rhs);
        out
    }
}

/// Lower-triangular factor `L` with `L Lᵀ = S`.
#[derive(Debug, Clone)]
pub struct CholeskyFactor {
    dim: usize,
    l: Vec<f64>,
}

impl CholeskyFactor {
    pub fn dim(&self) -> usize {
        self.dim
    }

    #[inline]
    pub fn l(&self, i: usize, j: usize) -> f64 {
        self.l[i * self.dim + j]
    }

    /// Solves `L y = b`.
    pub fn forward(&self, b: &[f64]) -> Vec<f64> {
        let n = self.dim;
        let mut y = b.to_vec();
        for i in 0..n {
            let row = &self.l[i * n..i * n + i];
            y[i] = (y[i] - dot(row, &y[..i])) / self.l[i * n + i];
        }
        y
    }

    /// Solves `Lᵀ x = y`.
    pub fn backward(&self, y: &[f64]) -> Vec<f64> {
        let n = self.dim;
        let mut x = y.to_vec();
        for i in (0..n).rev() {
            let mut acc = x[i];
            for k in i + 1..n {
                acc -= self.l[k * n + i] * x[k];
            }
            x[i] = acc / self.l[i * n + i];
        }
        x
    }

    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        self.backward(&self.forward(b))
    }

    pub fn reconstruct(&self) -> SymMatrix {
        let n = self.dim;
        SymMatrix::from_fn(n, |i, j| (0..=j).map(|k| self.l(i, k) * self.l(j, k)).sum())
    }

    /// `L⁻¹ Q L⁻ᵀ`, symmetrized.
    pub fn congruence(&self, q: &SymMatrix) -> SymMatrix {
        let n = self.dim;
        assert_eq!(q.dim(), n);
        let full = q.to_full();
        // columns of X = L⁻¹ Q, stored as rows since Q is symmetric
        let x: Vec<Vec<f64>> = (0..n)
            .map(|j| self.forward(&full[j * n..(j + 1) * n]))
            .collect();
        // M = L⁻¹ Xᵀ; column j of Xᵀ is row j of X read across columns
        let mut m = vec![0.0; n * n];
        for i in 0..n {
            let col: Vec<f64> = (0..n).map(|k| x[k][i]).collect();
            let c = self.forward(&col);
            for r in 0..n {
                m[r * n + i] = c[r];
            }
        }
        SymMatrix::from_fn(n, |i, j| 0.5 * (m[i * n + j] + m[j * n + i]))
    }
}

pub fn cholesky(s: &SymMatrix) -> Result<CholeskyFactor> {
    let n = s.dim();
    if !(s.max_diag() > 0.0) {
        return Err(Error::NotPositiveDefinite {
            index: 0,
            pivot: s.max_diag(),
        });
    }
    let mut l = vec![0.0; n * n];
    for j in 0..n {
        let pivot = s.get(j, j) - dot(&l[j * n..j * n + j], &l[j * n..j * n + j]);
        // relative to the diagonal entry, so diagonal scaling does not matter
        if !(pivot > n as f64 * EPS * s.get(j, j)) {
            return Err(Error::NotPositiveDefinite { index: j, pivot });
        }
        let d = pivot.sqrt();
        l[j * n + j] = d;
        for i in j + 1..n {
            let acc = s.get(i, j) - dot(&l[i * n..i * n + j], &l[j * n..j * n + j]);
            l[i * n + j] = acc / d;
        }
    }
    Ok(CholeskyFactor { dim: n, l })
}

pub fn solve_spd(s: &SymMatrix, rhs: &[f64]) -> Result<Vec<f64>> {
    if rhs.len() != s.dim() {
        return Err(Error::DimensionMismatch(format!(
            "rhs of length {} for a {}x{} system",
            rhs.len(),
            s.dim(),
            s.dim()
        )));
    }
    Ok(cholesky(s)?.solve(rhs))
}

/// LU factorization with partial pivoting, `P M = L U`.
#[derive(Debug, Clone)]
pub struct LuFactor {
    n: usize,
    lu: Vec<f64>,
    perm: Vec<usize>,
}

impl LuFactor {
    pub fn new(m: &DenseMatrix) -> Result<Self> {
        if m.rows() != m.cols() {
            return Err(Error::DimensionMismatch(format!(
                "LU of a non-square {}x{} matrix",
                m.rows(),
                m.cols()
            )));
        }
        let n = m.rows();
        // pivots are judged against the scale of their original row
        let row_scale: Vec<f64> = (0..n)
            .map(|i| (0..n).fold(0.0, |a: f64, j| a.max(m.get(i, j).abs())))
            .collect();
        let mut lu = m.data().to_vec();
        let mut perm: Vec<usize> = (0..n).collect();
        for k in 0..n {
            let (p, piv) = (k..n)
                .map(|i| (i, lu[i * n + k].abs()))
                .fold((k, -1.0), |best, c| if c.1 > best.1 { c } else { best });
            if !(piv >= n as f64 * EPS * row_scale[perm[p]]) || piv == 0.0 {
                return Err(Error::SingularSystem {
                    column: k,
                    pivot: piv,
                });
            }
            if p != k {
                for j in 0..n {
                    lu.swap(k * n + j, p * n + j);
                }
                perm.swap(k, p);
            }
            let d = lu[k * n + k];
            for i in k + 1..n {
                let f = lu[i * n + k] / d;
                lu[i * n + k] = f;
                if f != 0.0 {
                    for j in k + 1..n {
                        lu[i * n + j] -= f * lu[k * n + j];
                    }
                }
            }
        }
        Ok(Self { n, lu, perm })
    }

    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        let n = self.n;
        let mut x: Vec<f64> = self.perm.iter().map(|&p| b[p]).collect();
        for i in 0..n {
            let s = dot(&self.lu[i * n..i * n + i], &x[..i]);
            x[i] -= s;
        }
        for i in (0..n).rev() {
            let s = dot(&self.lu[i * n + i + 1..(i + 1) * n], &x[i + 1..]);
            x[i] = (x[i] - s) / self.lu[i * n + i];
        }
        x
    }

    /// Solve followed by iterative refinement against the original matrix.
    pub fn solve_refined(&self, m: &DenseMatrix, b: &[f64], steps: usize) -> Vec<f64> {
        let mut x = self.solve(b);
        for _ in 0..steps {
            let r = sub(b, &m.mul_vec(&x));
            let dx = self.solve(&r);
            axpy(1.0, &dx, &mut x);
        }
        x
    }
}

pub fn solve_general(m: &DenseMatrix, rhs: &[f64]) -> Result<Vec<f64>> {
    if rhs.len() != m.rows() {
        return Err(Error::DimensionMismatch(format!(
            "rhs of length {} for {} equations",
            rhs.len(),
            m.rows()
        )));
    }
    Ok(LuFactor::new(m)?.solve_refined(m, rhs, 1))
}

/// Eigenvalues of a symmetric matrix in ascending order (cyclic Jacobi).
pub fn sym_eigenvalues(s: &SymMatrix) -> Vec<f64> {
    let n = s.dim();
    let mut a = s.to_full();
    let threshold = 1e-13 * s.frobenius_norm();
    for _sweep in 0..100 {
        let off: f64 = (0..n)
            .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
            .map(|(i, j)| a[i * n + j] * a[i * n + j])
            .sum::<f64>()
            .sqrt();
        if off <= threshold {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                let apq = a[p * n + q];
                if apq == 0.0 {
                    continue;
                }
                let theta = (a[q * n + q] - a[p * n + p]) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let c = 1.0 / (t * t + 1.0).sqrt();
                let sn = t * c;
                for k in 0..n {
                    let (akp, akq) = (a[k * n + p], a[k * n + q]);
                    a[k * n + p] = c * akp - sn * akq;
                    a[k * n + q] = sn * akp + c * akq;
                }
                for k in 0..n {
                    let (apk, aqk) = (a[p * n + k], a[q * n + k]);
                    a[p * n + k] = c * apk - sn * aqk;
                    a[q * n + k] = sn * apk + c * aqk;
                }
                a[p * n + q] = 0.0;
                a[q * n + p] = 0.0;
            }
        }
    }
    let mut ev: Vec<f64> = (0..n).map(|i| a[i * n + i]).collect();
    ev.sort_by(f64::total_cmp);
    ev
}

fn check_quadratic(q: f64) -> Result<f64> {
    if q < -1e-12 || q.is_nan() {
        return Err(Error::NegativeQuadratic { value: q });
    }
    Ok(q.max(0.0).sqrt())
}

/// `‖v‖_S = √(vᵀ S v)`
pub fn norm_induced(v: &[f64], s: &SymMatrix) -> Result<f64> {
    check_quadratic(s.quad_form(v))
}

/// `‖v‖*_S = √(vᵀ S⁻¹ v)`
pub fn norm_dual(v: &[f64], s: &SymMatrix) -> Result<f64> {
    let u = solve_spd(s, v)?;
    check_quadratic(dot(v, &u))
}

/// Eigenvalues of `L⁻¹ Q L⁻ᵀ` where `P = L Lᵀ`, ascending.
pub fn congruence_eigenvalues(q: &SymMatrix, p: &SymMatrix) -> Result<Vec<f64>> {
    let l = cholesky(p)?;
    Ok(sym_eigenvalues(&l.congruence(q)))
}

/// `‖Q‖_P`, the largest absolute eigenvalue of `P^{-1/2} Q P^{-1/2}`.
pub fn operator_norm(q: &SymMatrix, p: &SymMatrix) -> Result<f64> {
    let ev = congruence_eigenvalues(q, p)?;
    Ok(ev.iter().fold(0.0, |m, x| m.max(x.abs())))
}

/// Rounding allowance on the congruence eigenvalues, which are relative to 1.
const SANDWICH_SLACK: f64 = 1e-12;

/// Whether `(1-eps) P ⪯ Q ⪯ (1+eps) P`.
pub fn loewner_sandwich(p: &SymMatrix, q: &SymMatrix, eps: f64) -> Result<bool> {
    let ev = congruence_eigenvalues(q, p)?;
    Ok(ev[0] >= 1.0 - eps - SANDWICH_SLACK && ev[ev.len() - 1] <= 1.0 + eps + SANDWICH_SLACK)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol * (1.0 + b.abs())
    }

    #[test]
    fn cholesky_of_identity() {
        let l = cholesky(&SymMatrix::identity(3)).unwrap();
        for i in 0..3 {
            for j in 0..3 {
                assert_eq!(l.l(i, j), if i == j { 1.0 } else { 0.0 });
            }
        }
    }

    #[test]
    fn cholesky_reproduces_small_matrix() {
        let s = SymMatrix::from_fn(2, |i, j| [[4.0, 2.0], [2.0, 3.0]][i][j]);
        let l = cholesky(&s).unwrap();
        // explicit multiplication of L Lᵀ
        let l00 = l.l(0, 0);
        let l10 = l.l(1, 0);
        let l11 = l.l(1, 1);
        assert!(close(l00 * l00, 4.0, 1e-15));
        assert!(close(l10 * l00, 2.0, 1e-15));
        assert!(close(l10 * l10 + l11 * l11, 3.0, 1e-15));
        assert_eq!(l.l(0, 1), 0.0);
        assert!(l00 > 0.0 && l11 > 0.0);
    }

    #[test]
    fn cholesky_rejects_indefinite() {
        let s = SymMatrix::from_fn(2, |i, j| [[1.0, 2.0], [2.0, 1.0]][i][j]);
        assert!(matches!(
            cholesky(&s),
            Err(Error::NotPositiveDefinite { index: 1, .. })
        ));
    }

    #[test]
    fn spd_solves() {
        let v = vec![1.5, -2.0, 0.25];
        assert_eq!(solve_spd(&SymMatrix::identity(3), &v).unwrap(), v);
        let u = solve_spd(&SymMatrix::from_diag(&[2.0, 4.0]), &[2.0, 4.0]).unwrap();
        assert!(close(u[0], 1.0, 1e-15) && close(u[1], 1.0, 1e-15));
    }

    #[test]
    fn general_solves() {
        let v = vec![3.0, -1.0];
        assert_eq!(solve_general(&DenseMatrix::identity(2), &v).unwrap(), v);
        let perm = DenseMatrix::from_rows(&[vec![0.0, 1.0], vec![1.0, 0.0]]).unwrap();
        assert_eq!(solve_general(&perm, &[7.0, 9.0]).unwrap(), vec![9.0, 7.0]);
        let sing = DenseMatrix::from_rows(&[vec![1.0, 1.0], vec![1.0, 1.0]]).unwrap();
        assert!(matches!(
            solve_general(&sing, &[1.0, 2.0]),
            Err(Error::SingularSystem { .. })
        ));
    }

    #[test]
    fn induced_and_dual_norms() {
        let d = SymMatrix::from_diag(&[4.0, 9.0]);
        assert!(close(
            norm_induced(&[1.0, 1.0], &d).unwrap(),
            13f64.sqrt(),
            1e-15
        ));
        assert!(close(norm_dual(&[1.0, 0.0], &d).unwrap(), 0.5, 1e-15));
        let v = [3.0, 4.0];
        assert!(close(
            norm_induced(&v, &SymMatrix::identity(2)).unwrap(),
            5.0,
            1e-15
        ));
        let neg = SymMatrix::from_diag(&[-1.0, 1.0]);
        assert!(matches!(
            norm_induced(&[1.0, 0.0], &neg),
            Err(Error::NegativeQuadratic { .. })
        ));
    }

    #[test]
    fn operator_norm_basics() {
        let p = SymMatrix::from_fn(3, |i, j| if i == j { 3.0 } else { 0.5 });
        assert!(close(operator_norm(&p, &p).unwrap(), 1.0, 1e-13));
        assert_eq!(operator_norm(&SymMatrix::zeros(3), &p).unwrap(), 0.0);
        // spectral radius of [[2,1],[1,2]] is 3; of [[0,2],[2,-3]] is 4
        let q = SymMatrix::from_fn(2, |i, j| [[2.0, 1.0], [1.0, 2.0]][i][j]);
        assert!(close(
            operator_norm(&q, &SymMatrix::identity(2)).unwrap(),
            3.0,
            1e-13
        ));
        let q = SymMatrix::from_fn(2, |i, j| [[0.0, 2.0], [2.0, -3.0]][i][j]);
        assert!(close(
            operator_norm(&q, &SymMatrix::identity(2)).unwrap(),
            4.0,
            1e-13
        ));
    }

    #[test]
    fn sandwich_examples() {
        let p = SymMatrix::from_fn(3, |i, j| if i == j { 2.0 } else { -0.3 });
        assert!(loewner_sandwich(&p, &p, 0.0).unwrap());
        let i2 = SymMatrix::identity(2);
        let q = SymMatrix::from_diag(&[0.5, 1.5]);
        assert!(loewner_sandwich(&i2, &q, 0.5).unwrap());
        assert!(!loewner_sandwich(&i2, &q, 0.4).unwrap());
    }

    #[test]
    fn jacobi_matches_closed_form_two_by_two() {
        // eigenvalues of [[a,b],[b,c]] are (a+c)/2 ± sqrt(((a-c)/2)^2 + b^2)
        let (a, b, c) = (1.3, -0.7, 4.1);
        let s = SymMatrix::from_fn(2, |i, j| [[a, b], [b, c]][i][j]);
        let ev = sym_eigenvalues(&s);
        let m = 0.5 * (a + c);
        let r = (0.25 * (a - c) * (a - c) + b * b).sqrt();
        assert!(close(ev[0], m - r, 1e-14));
        assert!(close(ev[1], m + r, 1e-14));
    }

    #[test]
    fn packed_storage_roundtrip() {
        let mut s = SymMatrix::zeros(3);
        s.set(0, 2, 5.0);
        assert_eq!(s.get(2, 0), 5.0);
        s.add_outer(2.0, &[1.0, 0.0, 1.0]);
        assert_eq!(s.get(0, 2), 7.0);
        assert_eq!(s.get(1, 1), 0.0);
        let v = [1.0, 2.0, 3.0];
        let full = s.to_dense();
        assert_eq!(s.mul_vec(&v), full.mul_vec(&v));
    }

    #[test]
    fn rank_detects_redundant_rows() {
        let a = DenseMatrix::from_rows(&[vec![1.0, 1.0, 0.0], vec![2.0, 2.0, 0.0]]).unwrap();
        assert_eq!(a.rank(1e-12), 1);
        let a = DenseMatrix::from_rows(&[vec![1.0, 1.0, 0.0], vec![0.0, 1.0, 0.0]]).unwrap();
        assert_eq!(a.rank(1e-12), 2);
    }
}
