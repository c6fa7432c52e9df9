//! Small dense/sparse helpers shared by the model, state and bound code.
//!
//! Basis convention: a product state of `n` sites with local dimension `q`
//! has linear index `Σ_s x_s q^(n-1-s)`, i.e. site 0 is the most significant
//! digit. This matches `A_0 ⊗ A_1 ⊗ … ⊗ A_{n-1}`.

use nalgebra::{DMatrix, DVector, SymmetricEigen};

use crate::error::{Error, Result};

pub type Mat = DMatrix<f64>;
pub type Vector = DVector<f64>;

pub fn kron(a: &Mat, b: &Mat) -> Mat {
    a.kronecker(b)
}

pub fn kron_all<'a>(ops: impl IntoIterator<Item = &'a Mat>) -> Mat {
    ops.into_iter()
        .fold(Mat::identity(1, 1), |acc, op| acc.kronecker(op))
}

pub fn max_abs(m: &Mat) -> f64 {
    m.iter().fold(0.0_f64, |acc, x| acc.max(x.abs()))
}

/// Largest |m_ij − m_ji| relative to the largest entry.
pub fn relative_asymmetry(m: &Mat) -> f64 {
    let scale = max_abs(m).max(f64::MIN_POSITIVE);
    let mut worst = 0.0_f64;
    for i in 0..m.nrows() {
        for j in (i + 1)..m.ncols() {
            worst = worst.max((m[(i, j)] - m[(j, i)]).abs());
        }
    }
    worst / scale
}

pub fn check_hermitian(m: &Mat, rel_tol: f64) -> Result<()> {
    if m.nrows() != m.ncols() {
        return Err(Error::Shape(format!(
            "operator is {}x{}, expected square",
            m.nrows(),
            m.ncols()
        )));
    }
    let asym = relative_asymmetry(m);
    if asym > rel_tol {
        return Err(Error::NotHermitian(asym));
    }
    Ok(())
}

/// Largest singular value.
pub fn operator_norm(m: &Mat) -> f64 {
    if m.is_empty() {
        return 0.0;
    }
    m.singular_values().max()
}

/// Eigendecomposition of a symmetric matrix with eigenvalues ascending.
pub fn sorted_eigh(m: &Mat) -> (Vec<f64>, Mat) {
    let eig = SymmetricEigen::new(m.clone());
    let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let values = order.iter().map(|&k| eig.eigenvalues[k]).collect();
    let vectors = Mat::from_fn(m.nrows(), order.len(), |r, c| eig.eigenvectors[(r, order[c])]);
    (values, vectors)
}

pub fn trace_product(a: &Mat, b: &Mat) -> f64 {
    // tr(A B) = Σ_ij A_ij B_ji
    a.iter()
        .zip(b.transpose().iter())
        .map(|(x, y)| x * y)
        .sum()
}

pub fn checked_dim(local_dim: usize, sites: usize, cap: usize) -> Result<usize> {
    let mut dim: usize = 1;
    for _ in 0..sites {
        dim = dim
            .checked_mul(local_dim)
            .filter(|d| *d <= cap)
            .ok_or(Error::DimensionCap {
                dim: local_dim.saturating_pow(sites as u32),
                cap,
            })?;
    }
    Ok(dim)
}

/// Mixed-radix digit bookkeeping for a register of `sites` sites.
#[derive(Clone, Debug)]
pub struct Register {
    pub sites: usize,
    pub local_dim: usize,
    strides: Vec<usize>,
}

impl Register {
    pub fn new(sites: usize, local_dim: usize) -> Self {
        let mut strides = vec![1; sites];
        for s in (0..sites.saturating_sub(1)).rev() {
            strides[s] = strides[s + 1] * local_dim;
        }
        Register {
            sites,
            local_dim,
            strides,
        }
    }

    pub fn dim(&self) -> usize {
        self.local_dim.pow(self.sites as u32)
    }

    #[inline]
    pub fn digit(&self, index: usize, site: usize) -> usize {
        (index / self.strides[site]) % self.local_dim
    }

    #[inline]
    pub fn stride(&self, site: usize) -> usize {
        self.strides[site]
    }

    /// Index of the sub-configuration on `positions` (first position most
    /// significant).
    pub fn sub_index(&self, index: usize, positions: &[usize]) -> usize {
        positions
            .iter()
            .fold(0, |acc, &p| acc * self.local_dim + self.digit(index, p))
    }

    /// Replace the digits at `positions` by those encoded in `sub`.
    pub fn with_sub_index(&self, index: usize, positions: &[usize], mut sub: usize) -> usize {
        let mut out = index;
        for &p in positions.iter().rev() {
            let new = sub % self.local_dim;
            sub /= self.local_dim;
            let old = self.digit(index, p);
            out = out + new * self.strides[p] - old * self.strides[p];
        }
        out
    }
}

/// Embed `op`, acting on `positions` (in that order) of a register of
/// `sites` sites, into a dense operator on the whole register.
pub fn embed_dense(op: &Mat, positions: &[usize], sites: usize, local_dim: usize) -> Mat {
    let reg = Register::new(sites, local_dim);
    let dim = reg.dim();
    let mut out = Mat::zeros(dim, dim);
    for col in 0..dim {
        let b = reg.sub_index(col, positions);
        for a in 0..op.nrows() {
            let v = op[(a, b)];
            if v != 0.0 {
                out[(reg.with_sub_index(col, positions, a), col)] += v;
            }
        }
    }
    out
}

/// Reorder the tensor factors of an operator: `order[k]` is the position in
/// the old ordering of the factor that becomes factor `k`.
pub fn permute_factors(op: &Mat, order: &[usize], local_dim: usize) -> Mat {
    let reg = Register::new(order.len(), local_dim);
    let dim = reg.dim();
    assert_eq!(op.nrows(), dim, "operator dimension does not match factor count");
    let map: Vec<usize> = (0..dim).map(|new| {
        // digit k of `new` belongs to old position order[k]
        let mut old = 0;
        for (k, &p) in order.iter().enumerate() {
            old += reg.digit(new, k) * reg.stride(p);
        }
        old
    }).collect();
    Mat::from_fn(dim, dim, |r, c| op[(map[r], map[c])])
}

/// Compressed-row real sparse matrix.
#[derive(Clone, Debug)]
pub struct SparseOp {
    pub dim: usize,
    indptr: Vec<usize>,
    indices: Vec<usize>,
    values: Vec<f64>,
}

impl SparseOp {
    /// Build from (row, col, value) triplets; duplicates are summed and exact
    /// zeros dropped.
    pub fn from_triplets(dim: usize, mut triplets: Vec<(usize, usize, f64)>) -> Self {
        triplets.sort_by_key(|a| (a.0, a.1));
        let mut indptr = vec![0; dim + 1];
        let mut indices = Vec::with_capacity(triplets.len());
        let mut values: Vec<f64> = Vec::with_capacity(triplets.len());
        let mut last: Option<(usize, usize)> = None;
        for (r, c, v) in triplets {
            if last == Some((r, c)) {
                *values.last_mut().unwrap() += v;
            } else {
                indices.push(c);
                values.push(v);
                indptr[r + 1] += 1;
                last = Some((r, c));
            }
        }
        for r in 0..dim {
            indptr[r + 1] += indptr[r];
        }
        let mut op = SparseOp {
            dim,
            indptr,
            indices,
            values,
        };
        op.prune();
        op
    }

    fn prune(&mut self) {
        let mut indptr = vec![0; self.dim + 1];
        let mut indices = Vec::with_capacity(self.indices.len());
        let mut values = Vec::with_capacity(self.values.len());
        for r in 0..self.dim {
            for k in self.indptr[r]..self.indptr[r + 1] {
                if self.values[k] != 0.0 {
                    indices.push(self.indices[k]);
                    values.push(self.values[k]);
                }
            }
            indptr[r + 1] = indices.len();
        }
        self.indptr = indptr;
        self.indices = indices;
        self.values = values;
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    pub fn row(&self, r: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        (self.indptr[r]..self.indptr[r + 1]).map(move |k| (self.indices[k], self.values[k]))
    }

    pub fn to_dense(&self) -> Mat {
        let mut out = Mat::zeros(self.dim, self.dim);
        for r in 0..self.dim {
            for (c, v) in self.row(r) {
                out[(r, c)] = v;
            }
        }
        out
    }

    pub fn mul_vec(&self, x: &Vector) -> Vector {
        Vector::from_fn(self.dim, |r, _| self.row(r).map(|(c, v)| v * x[c]).sum())
    }

    /// ⟨ψ|A|ψ⟩ for a real vector.
    pub fn expectation_pure(&self, psi: &Vector) -> f64 {
        (0..self.dim)
            .map(|r| psi[r] * self.row(r).map(|(c, v)| v * psi[c]).sum::<f64>())
            .sum()
    }

    /// tr(A ρ) = Σ A_rc ρ_cr.
    pub fn trace_with(&self, rho: &Mat) -> f64 {
        (0..self.dim)
            .map(|r| self.row(r).map(|(c, v)| v * rho[(c, r)]).sum::<f64>())
            .sum()
    }
}

/// Shortest round-trip text for `x`, in exponent form when very large or
/// small; `-0` is printed as `0.0`.
pub fn format_float(x: f64) -> String {
    format!("{:?}", x + 0.0)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pauli_x() -> Mat {
        Mat::from_row_slice(2, 2, &[0.0, 1.0, 1.0, 0.0])
    }
    fn pauli_z() -> Mat {
        Mat::from_row_slice(2, 2, &[1.0, 0.0, 0.0, -1.0])
    }

    #[test]
    fn embed_matches_kronecker_padding() {
        let id = Mat::identity(2, 2);
        let x = pauli_x();
        let z = pauli_z();
        let expected = kron_all([&z, &id, &x]);
        let zx = kron(&z, &x);
        assert_eq!(embed_dense(&zx, &[0, 2], 3, 2), expected);
        // reversed factor order on the support
        let xz = kron(&x, &z);
        assert_eq!(embed_dense(&xz, &[2, 0], 3, 2), expected);
    }

    #[test]
    fn permute_factors_swaps_kronecker_order() {
        let a = Mat::from_row_slice(2, 2, &[1.0, 2.0, 3.0, 4.0]);
        let b = Mat::from_row_slice(2, 2, &[0.5, -1.0, 2.0, 3.0]);
        let ab = kron(&a, &b);
        assert_eq!(permute_factors(&ab, &[1, 0], 2), kron(&b, &a));
    }

    #[test]
    fn register_sub_index_round_trip() {
        let reg = Register::new(4, 3);
        for idx in 0..reg.dim() {
            let pos = [3, 1];
            let sub = reg.sub_index(idx, &pos);
            assert_eq!(reg.with_sub_index(idx, &pos, sub), idx);
        }
        assert_eq!(reg.digit(5, 3), 2);
        assert_eq!(reg.digit(5, 2), 1);
    }

    #[test]
    fn sparse_sums_duplicates_and_densifies() {
        let op = SparseOp::from_triplets(2, vec![(0, 1, 1.0), (0, 1, 2.0), (1, 0, 3.0), (1, 1, 0.0)]);
        assert_eq!(op.nnz(), 2);
        assert_eq!(op.to_dense(), Mat::from_row_slice(2, 2, &[0.0, 3.0, 3.0, 0.0]));
    }

    #[test]
    fn dimension_cap_is_enforced() {
        assert_eq!(checked_dim(2, 12, 4096).unwrap(), 4096);
        assert!(matches!(
            checked_dim(2, 13, 4096),
            Err(Error::DimensionCap { dim: 8192, cap: 4096 })
        ));
    }
}
