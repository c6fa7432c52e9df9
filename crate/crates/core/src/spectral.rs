//! Full dense eigensystems with the ground energy shifted to zero.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::{self, Mat, Vector};

#[derive(Clone, Debug)]
pub struct SpectralData {
    /// Ascending, `eigenvalues[0] == 0`.
    pub eigenvalues: Vec<f64>,
    /// Orthonormal eigenvectors as columns, in eigenvalue order.
    pub eigenvectors: Mat,
    pub degeneracy: usize,
    /// Raw ground energy subtracted from the spectrum.
    pub shift: f64,
    pub degeneracy_tol: f64,
}

pub fn default_degeneracy_tol(width: f64) -> f64 {
    1e-9 * width.max(1.0)
}

pub fn diagonalize(h: &Mat, cap: usize) -> Result<SpectralData> {
    diagonalize_with_tol(h, cap, None)
}

/// Dense eigensolve. `degeneracy_tol = None` selects
/// `1e−9 · max(1, spectral width)`.
pub fn diagonalize_with_tol(h: &Mat, cap: usize, degeneracy_tol: Option<f64>) -> Result<SpectralData> {
    if h.nrows() > cap {
        return Err(Error::DimensionCap { dim: h.nrows(), cap });
    }
    linalg::check_hermitian(h, 1e-12)?;
    let (raw, vectors) = linalg::sorted_eigh(h);
    let shift = raw[0];
    let mut eigenvalues: Vec<f64> = raw.iter().map(|e| e - shift).collect();
    eigenvalues[0] = 0.0;
    let width = *eigenvalues.last().unwrap();
    let tol = degeneracy_tol.unwrap_or_else(|| default_degeneracy_tol(width));
    let degeneracy = eigenvalues.iter().take_while(|&&e| e <= tol).count();
    Ok(SpectralData {
        eigenvalues,
        eigenvectors: vectors,
        degeneracy,
        shift,
        degeneracy_tol: tol,
    })
}

impl SpectralData {
    pub fn dim(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn eigenvector(&self, k: usize) -> Vector {
        self.eigenvectors.column(k).into_owned()
    }

    /// Energy of the first level above the groundspace.
    pub fn gap(&self) -> Option<f64> {
        self.eigenvalues.get(self.degeneracy).copied()
    }

    /// Rank-`D` projector onto the groundspace.
    pub fn groundspace_projector(&self) -> Mat {
        let v = self.eigenvectors.columns(0, self.degeneracy);
        v * v.transpose()
    }

    /// `ρ_0 = P / D`.
    pub fn ground_state(&self) -> Mat {
        self.groundspace_projector() / self.degeneracy as f64
    }

    /// `H − E_0 · 1` rebuilt from the eigensystem.
    pub fn shifted_hamiltonian(&self) -> Mat {
        let v = &self.eigenvectors;
        let scaled = Mat::from_fn(v.nrows(), v.ncols(), |r, c| v[(r, c)] * self.eigenvalues[c]);
        scaled * v.transpose()
    }

    pub fn orthonormality_error(&self) -> f64 {
        let g = self.eigenvectors.transpose() * &self.eigenvectors;
        linalg::max_abs(&(g - Mat::identity(self.dim(), self.dim())))
    }

    /// `‖V Λ Vᵀ − (H − E_0)‖_max`.
    pub fn reconstruction_error(&self, h: &Mat) -> f64 {
        let shifted = h - Mat::identity(self.dim(), self.dim()) * self.shift;
        linalg::max_abs(&(self.shifted_hamiltonian() - shifted))
    }

    /// Ground entropy density `log D / n_sites`.
    pub fn ground_entropy_density(&self, n_sites: usize) -> f64 {
        (self.degeneracy as f64).ln() / n_sites as f64
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Histogram {
    /// `bins + 1` edges spanning `[0, E_max]`.
    pub edges: Vec<f64>,
    pub counts: Vec<usize>,
}

/// Eigenvalue counts in `bins` equal-width bins over the shifted spectrum;
/// the last bin is closed on the right.
pub fn density_of_states(sd: &SpectralData, bins: usize) -> Result<Histogram> {
    if bins == 0 {
        return Err(Error::InvalidParameter("density of states needs at least one bin".into()));
    }
    let top = *sd.eigenvalues.last().unwrap();
    let width = if top > 0.0 { top / bins as f64 } else { 1.0 };
    let edges = (0..=bins).map(|k| k as f64 * width).collect();
    let mut counts = vec![0; bins];
    for &e in &sd.eigenvalues {
        let k = ((e / width) as usize).min(bins - 1);
        counts[k] += 1;
    }
    Ok(Histogram { edges, counts })
}
