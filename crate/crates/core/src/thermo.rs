//! Gibbs states and thermodynamic densities from a shifted spectrum.
//!
//! Natural logarithms throughout; entropies are in nats and `k_B = 1`.
//! Because `E_0 = 0`, every Boltzmann factor lies in `(0, 1]` and
//! `Z ≥ 1`, so `log Z` never overflows.

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exec::Exec;
use crate::linalg::{self, Mat, Vector};
use crate::spectral::SpectralData;

/// Eigenvalues below this are treated as numerical noise and clipped.
pub const EIGEN_CLIP_TOL: f64 = 1e-10;

/// A validated density matrix.
#[derive(Clone, Debug)]
pub struct DensityMatrix {
    matrix: Mat,
}

impl DensityMatrix {
    /// Checks symmetry, unit trace (1e−10) and eigenvalues ≥ −1e−10.
    pub fn new(matrix: Mat) -> Result<Self> {
        linalg::check_hermitian(&matrix, 1e-10)?;
        let tr = matrix.trace();
        if (tr - 1.0).abs() > 1e-10 {
            return Err(Error::TraceDeviation(tr));
        }
        let lowest = matrix.symmetric_eigenvalues().min();
        if lowest < -EIGEN_CLIP_TOL {
            return Err(Error::NegativeEigenvalue(lowest));
        }
        Ok(DensityMatrix { matrix })
    }

    /// Skip validation for states that are PSD and normalized by construction.
    pub(crate) fn trusted(matrix: Mat) -> Self {
        DensityMatrix { matrix }
    }

    pub fn from_pure(psi: &Vector) -> Self {
        let psi = psi / psi.norm();
        DensityMatrix {
            matrix: &psi * psi.transpose(),
        }
    }

    pub fn matrix(&self) -> &Mat {
        &self.matrix
    }

    pub fn into_matrix(self) -> Mat {
        self.matrix
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    /// Eigenvalues with negative rounding noise set to zero.
    pub fn clipped_eigenvalues(&self) -> Vec<f64> {
        self.matrix
            .symmetric_eigenvalues()
            .iter()
            .map(|&x| x.max(0.0))
            .collect()
    }

    /// Number of eigenvalues above the clip tolerance.
    pub fn support_dim(&self) -> usize {
        self.clipped_eigenvalues().iter().filter(|&&x| x > EIGEN_CLIP_TOL).count()
    }

    pub fn entropy(&self) -> f64 {
        von_neumann(&self.clipped_eigenvalues())
    }
}

/// `−Σ λ log λ` over the positive entries.
pub fn von_neumann(eigenvalues: &[f64]) -> f64 {
    eigenvalues
        .iter()
        .filter(|&&x| x > 0.0)
        .map(|&x| -x * x.ln())
        .sum()
}

fn check_temperature(t: f64) -> Result<()> {
    if t > 0.0 && t.is_finite() {
        Ok(())
    } else {
        Err(Error::NonPositiveTemperature(t))
    }
}

/// Normalized Boltzmann weights of the shifted spectrum at temperature `t`.
#[derive(Clone, Debug)]
pub struct Boltzmann {
    pub t: f64,
    pub weights: Vec<f64>,
    pub log_z: f64,
}

impl Boltzmann {
    pub fn new(sd: &SpectralData, t: f64) -> Result<Self> {
        check_temperature(t)?;
        let factors: Vec<f64> = sd.eigenvalues.iter().map(|e| (-e / t).exp()).collect();
        let z: f64 = factors.iter().sum();
        Ok(Boltzmann {
            t,
            weights: factors.iter().map(|f| f / z).collect(),
            log_z: z.ln(),
        })
    }

    /// `⟨E⟩`, a sum of nonnegative terms.
    pub fn mean_energy(&self, sd: &SpectralData) -> f64 {
        self.weights.iter().zip(&sd.eigenvalues).map(|(w, e)| w * e).sum()
    }

    pub fn energy_variance(&self, sd: &SpectralData) -> f64 {
        let mean = self.mean_energy(sd);
        self.weights
            .iter()
            .zip(&sd.eigenvalues)
            .map(|(w, e)| w * (e - mean).powi(2))
            .sum()
    }

    /// `log Z + ⟨E⟩ / T`.
    pub fn entropy(&self, sd: &SpectralData) -> f64 {
        self.log_z + self.mean_energy(sd) / self.t
    }
}

pub fn gibbs_state(sd: &SpectralData, t: f64) -> Result<DensityMatrix> {
    let b = Boltzmann::new(sd, t)?;
    let v = &sd.eigenvectors;
    let scaled = Mat::from_fn(v.nrows(), v.ncols(), |r, c| v[(r, c)] * b.weights[c]);
    Ok(DensityMatrix::trusted(scaled * v.transpose()))
}

/// One row of a thermal curve. Densities are per site.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ThermalSample {
    pub t: f64,
    pub u: f64,
    pub s: f64,
    pub c: f64,
    pub log_z: f64,
    /// `−T log Z` for the whole system.
    pub f: f64,
}

pub fn thermal_sample(sd: &SpectralData, t: f64, n_sites: usize) -> Result<ThermalSample> {
    let b = Boltzmann::new(sd, t)?;
    let n = n_sites as f64;
    Ok(ThermalSample {
        t,
        u: b.mean_energy(sd) / n,
        s: b.entropy(sd) / n,
        c: b.energy_variance(sd) / (n * t * t),
        log_z: b.log_z,
        f: -t * b.log_z,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ThermalCurve {
    pub n_sites: usize,
    pub samples: Vec<ThermalSample>,
}

pub fn thermal_curve(sd: &SpectralData, grid: &[f64], n_sites: usize, exec: Exec) -> Result<ThermalCurve> {
    if grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::InvalidParameter("temperature grid must be strictly ascending".into()));
    }
    let samples = exec.try_map(grid, |&t| thermal_sample(sd, t, n_sites))?;
    Ok(ThermalCurve { n_sites, samples })
}

impl ThermalCurve {
    /// CSV with header `T,u,s,c,logZ,F` and shortest round-trip floats.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        let io = |e: csv::Error| Error::Data(e.to_string());
        w.write_record(["T", "u", "s", "c", "logZ", "F"]).map_err(io)?;
        for p in &self.samples {
            w.write_record([p.t, p.u, p.s, p.c, p.log_z, p.f].map(linalg::format_float))
                .map_err(io)?;
        }
        w.flush().map_err(|e| Error::Data(e.to_string()))
    }

    pub fn temperatures(&self) -> Vec<f64> {
        self.samples.iter().map(|p| p.t).collect()
    }
}

/// `Σ_k w_k (E_k − ⟨E⟩)² / (n T²)`, the spectral-variance route.
pub fn specific_heat_spectral(sd: &SpectralData, t: f64, n_sites: usize) -> Result<f64> {
    Ok(thermal_sample(sd, t, n_sites)?.c)
}

/// Covariance route `(⟨H²⟩ − ⟨H⟩²)/(n T²)` evaluated with the Hamiltonian
/// matrix itself. `H v_k` is precomputed once so each temperature costs
/// `O(dim²)`: with `y_k = H v_k − E_0 v_k`,
/// `Cov = Σ_k w_k ‖y_k − ⟨H⟩ v_k‖²`.
pub struct CovarianceRoute<'a> {
    sd: &'a SpectralData,
    hv: Mat,
}

impl<'a> CovarianceRoute<'a> {
    pub fn new(sd: &'a SpectralData, h: &Mat) -> Self {
        let hv = h * &sd.eigenvectors - &sd.eigenvectors * sd.shift;
        CovarianceRoute { sd, hv }
    }

    pub fn specific_heat(&self, t: f64, n_sites: usize) -> Result<f64> {
        let b = Boltzmann::new(self.sd, t)?;
        let v = &self.sd.eigenvectors;
        let mean: f64 = (0..v.ncols())
            .filter(|&k| b.weights[k] > 0.0)
            .map(|k| b.weights[k] * v.column(k).dot(&self.hv.column(k)))
            .sum();
        let cov: f64 = (0..v.ncols())
            .filter(|&k| b.weights[k] > 0.0)
            .map(|k| b.weights[k] * (self.hv.column(k) - v.column(k) * mean).norm_squared())
            .sum();
        Ok(cov / (n_sites as f64 * t * t))
    }
}

/// `(tr ρH² − (tr ρH)²)/(n T²)` for an arbitrary state.
pub fn specific_heat_state(rho: &DensityMatrix, h: &Mat, t: f64, n_sites: usize) -> Result<f64> {
    check_temperature(t)?;
    let rh = rho.matrix() * h;
    let mean = rh.trace();
    let second = linalg::trace_product(&rh, h);
    Ok((second - mean * mean) / (n_sites as f64 * t * t))
}

/// Centered difference of `u` with step `rel_step · T`.
pub fn specific_heat_fd(sd: &SpectralData, t: f64, n_sites: usize, rel_step: f64) -> Result<f64> {
    let h = rel_step * t;
    let up = thermal_sample(sd, t + h, n_sites)?.u;
    let down = thermal_sample(sd, t - h, n_sites)?.u;
    Ok((up - down) / (2.0 * h))
}

/// `F_T(ρ) = tr(Hρ) − T S(ρ)`. Pass the shifted Hamiltonian to match the
/// zero-ground-energy convention.
pub fn free_energy(rho: &DensityMatrix, h: &Mat, t: f64) -> f64 {
    linalg::trace_product(h, rho.matrix()) - t * rho.entropy()
}

/// `S(ρ‖σ) = tr ρ log ρ − tr ρ log σ`, `+∞` when the support of `ρ` is not
/// contained in that of `σ`.
pub fn relative_entropy(rho: &DensityMatrix, sigma: &DensityMatrix) -> f64 {
    let eig = sigma.matrix().clone().symmetric_eigen();
    let rotated = eig.eigenvectors.transpose() * rho.matrix() * &eig.eigenvectors;
    let mut cross = 0.0;
    for (k, &lam) in eig.eigenvalues.iter().enumerate() {
        let p = rotated[(k, k)];
        if lam <= EIGEN_CLIP_TOL {
            if p > EIGEN_CLIP_TOL {
                return f64::INFINITY;
            }
            continue;
        }
        cross -= p * lam.ln();
    }
    (cross - rho.entropy()).max(0.0)
}

/// `S(ρ‖ρ_T)` using `log ρ_T = −H/T − log Z` in the eigenbasis.
pub fn relative_entropy_to_gibbs(rho: &DensityMatrix, sd: &SpectralData, t: f64) -> Result<f64> {
    let b = Boltzmann::new(sd, t)?;
    let v = &sd.eigenvectors;
    let cross: f64 = (0..v.ncols())
        .map(|k| {
            let col = v.column(k);
            let p = col.dot(&(rho.matrix() * col));
            p * (sd.eigenvalues[k] / t + b.log_z)
        })
        .sum();
    Ok(cross - rho.entropy())
}

/// `n_points` temperatures spaced evenly in `log T` over `[lo, hi]`.
pub fn log_grid(lo: f64, hi: f64, n_points: usize) -> Vec<f64> {
    if n_points == 1 {
        return vec![lo];
    }
    let (a, b) = (lo.ln(), hi.ln());
    (0..n_points)
        .map(|k| (a + (b - a) * k as f64 / (n_points - 1) as f64).exp())
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::LatticeSpec;
    use crate::models::{build_tfim, build_xxz, DEFAULT_DIM_CAP};
    use crate::spectral::diagonalize;
    use approx::assert_relative_eq;

    fn two_level(delta: f64) -> SpectralData {
        diagonalize(&Mat::from_diagonal(&Vector::from_vec(vec![0.0, delta])), 16).unwrap()
    }

    fn tfim_sd(n: usize, j: f64, g: f64) -> (Mat, SpectralData) {
        let h = build_tfim(&LatticeSpec::periodic(1, n).unwrap(), j, g)
            .assemble_full(DEFAULT_DIM_CAP)
            .unwrap();
        let sd = diagonalize(&h, DEFAULT_DIM_CAP).unwrap();
        (h, sd)
    }

    #[test]
    fn two_level_closed_forms() {
        let delta = 1.3;
        let sd = two_level(delta);
        for t in [0.05, 0.3, 1.0, 4.0] {
            let x = (-delta / t).exp();
            let rho = gibbs_state(&sd, t).unwrap();
            assert_relative_eq!(rho.matrix()[(0, 0)], 1.0 / (1.0 + x), max_relative = 1e-14);
            assert_relative_eq!(rho.matrix()[(1, 1)], x / (1.0 + x), max_relative = 1e-12);
            let p = thermal_sample(&sd, t, 1).unwrap();
            assert_relative_eq!(p.u, delta * x / (1.0 + x), max_relative = 1e-12);
            let y = (delta / t).exp();
            let schottky = (delta / t).powi(2) * y / (1.0 + y).powi(2);
            assert_relative_eq!(p.c, schottky, max_relative = 1e-12);
        }
    }

    #[test]
    fn infinite_temperature_is_maximally_mixed() {
        let (_, sd) = tfim_sd(3, 1.0, 0.8);
        let rho = gibbs_state(&sd, 1e9).unwrap();
        let mixed = Mat::identity(8, 8) / 8.0;
        assert!(linalg::max_abs(&(rho.matrix() - mixed)) < 1e-6);
        let p = thermal_sample(&sd, 1e9, 3).unwrap();
        assert_relative_eq!(p.s * 3.0, 8f64.ln(), max_relative = 1e-8);
    }

    #[test]
    fn energy_matches_independent_weight_sum() {
        let (h, sd) = tfim_sd(4, 1.0, 1.0);
        // oracle: weights from the raw spectrum, no shift
        let raw = h.clone().symmetric_eigen().eigenvalues;
        let z: f64 = raw.iter().map(|e| (-e).exp()).sum();
        let e_mean: f64 = raw.iter().map(|e| e * (-e).exp()).sum::<f64>() / z;
        let e0 = raw.min();
        let rho = gibbs_state(&sd, 1.0).unwrap();
        let u_state = linalg::trace_product(rho.matrix(), &h) / 4.0;
        assert_relative_eq!(u_state, e_mean / 4.0, max_relative = 1e-12);
        let u = thermal_sample(&sd, 1.0, 4).unwrap().u;
        assert_relative_eq!(u, (e_mean - e0) / 4.0, max_relative = 1e-12);
    }

    #[test]
    fn low_temperature_entropy_is_ground_entropy() {
        let (_, sd) = tfim_sd(4, 1.0, 0.0);
        let p = thermal_sample(&sd, 1e-6, 4).unwrap();
        assert_relative_eq!(p.s, 2f64.ln() / 4.0, max_relative = 1e-12);
        assert_relative_eq!(p.s, sd.ground_entropy_density(4), max_relative = 1e-12);
    }

    #[test]
    fn free_spins_factorize() {
        let n = 4;
        let (_, sd) = tfim_sd(n, 0.0, 1.0);
        for t in [0.2_f64, 1.0, 3.0] {
            // one spin with levels {0, 2}
            let x: f64 = (-2.0 / t).exp();
            let u1 = 2.0 * x / (1.0 + x);
            let s1 = (1.0 + x).ln() + u1 / t;
            let p = thermal_sample(&sd, t, n).unwrap();
            assert_relative_eq!(p.u, u1, max_relative = 1e-12);
            assert_relative_eq!(p.s, s1, max_relative = 1e-12);
            assert_relative_eq!(p.log_z, n as f64 * (1.0 + x).ln(), max_relative = 1e-12);
        }
    }

    #[test]
    fn three_routes_to_specific_heat_agree() {
        let h = build_xxz(&LatticeSpec::periodic(1, 6).unwrap(), 1.0, 0.5)
            .assemble_full(DEFAULT_DIM_CAP)
            .unwrap();
        let sd = diagonalize(&h, DEFAULT_DIM_CAP).unwrap();
        let route = CovarianceRoute::new(&sd, &h);
        for t in [0.5, 1.0, 2.5] {
            let spec = specific_heat_spectral(&sd, t, 6).unwrap();
            let cov = route.specific_heat(t, 6).unwrap();
            let fd = specific_heat_fd(&sd, t, 6, 1e-4).unwrap();
            let rho = gibbs_state(&sd, t).unwrap();
            let dense = specific_heat_state(&rho, &h, t, 6).unwrap();
            assert_relative_eq!(cov, spec, max_relative = 1e-12);
            assert_relative_eq!(dense, spec, max_relative = 1e-10);
            assert_relative_eq!(fd, spec, max_relative = 1e-6);
        }
    }

    #[test]
    fn free_energy_of_gibbs_and_ground_states() {
        let (_, sd) = tfim_sd(4, 1.0, 1.0);
        let hs = sd.shifted_hamiltonian();
        for t in [0.3, 1.0, 2.0] {
            let rho = gibbs_state(&sd, t).unwrap();
            let log_z = thermal_sample(&sd, t, 4).unwrap().log_z;
            assert_relative_eq!(free_energy(&rho, &hs, t), -t * log_z, max_relative = 1e-10);
        }
        let ground = DensityMatrix::from_pure(&sd.eigenvector(0));
        assert!(free_energy(&ground, &hs, 0.7).abs() < 1e-10);
    }

    #[test]
    fn relative_entropy_examples() {
        let pure = DensityMatrix::new(Mat::from_diagonal(&Vector::from_vec(vec![1.0, 0.0]))).unwrap();
        let mixed = DensityMatrix::new(Mat::identity(2, 2) / 2.0).unwrap();
        assert_relative_eq!(relative_entropy(&pure, &mixed), 2f64.ln(), max_relative = 1e-12);
        assert!(relative_entropy(&mixed, &mixed).abs() < 1e-12);
        assert_eq!(relative_entropy(&mixed, &pure), f64::INFINITY);
    }

    #[test]
    fn density_matrix_validation() {
        assert!(matches!(
            DensityMatrix::new(Mat::identity(2, 2)),
            Err(Error::TraceDeviation(_))
        ));
        let bad = Mat::from_diagonal(&Vector::from_vec(vec![1.1, -0.1]));
        assert!(matches!(DensityMatrix::new(bad), Err(Error::NegativeEigenvalue(_))));
        assert!(gibbs_state(&two_level(1.0), 0.0).is_err());
        assert!(gibbs_state(&two_level(1.0), -1.0).is_err());
    }

    #[test]
    fn curve_csv_header_and_rows() {
        let sd = two_level(1.0);
        let curve = thermal_curve(&sd, &[0.5, 1.0], 1, Exec::Sequential).unwrap();
        let mut buf = Vec::new();
        curve.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "T,u,s,c,logZ,F");
        assert_eq!(lines.len(), 3);
        let first: f64 = lines[1].split(',').nth(1).unwrap().parse().unwrap();
        assert_eq!(first, curve.samples[0].u);
        assert!(thermal_curve(&sd, &[1.0, 0.5], 1, Exec::Sequential).is_err());
    }

    #[test]
    fn log_grid_endpoints() {
        let g = log_grid(0.1, 10.0, 5);
        assert_relative_eq!(g[0], 0.1, max_relative = 1e-15);
        assert_relative_eq!(g[2], 1.0, max_relative = 1e-14);
        assert_relative_eq!(g[4], 10.0, max_relative = 1e-14);
    }
}
