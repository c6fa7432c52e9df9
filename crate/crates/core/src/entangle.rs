//! Reduced states of lattice regions and their von Neumann entropies.
//!
//! Region sites may be given in any order; the reduced matrix acts on their
//! Kronecker product in that order. Pure states never form the global
//! density matrix: the amplitudes are regrouped into a `d_A × d_B` matrix
//! `M` and `ρ_A = M Mᵀ`.

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exec::Exec;
use crate::lattice::{partition_lattice, LatticeSpec};
use crate::linalg::{Mat, Register, Vector};
use crate::thermo::{von_neumann, EIGEN_CLIP_TOL};

/// A global state on the full register.
#[derive(Clone, Debug)]
pub enum State {
    Pure(Vector),
    Mixed(Mat),
}

impl State {
    pub fn dim(&self) -> usize {
        match self {
            State::Pure(v) => v.len(),
            State::Mixed(m) => m.nrows(),
        }
    }

    pub fn to_density(&self) -> Mat {
        match self {
            State::Pure(v) => v * v.transpose(),
            State::Mixed(m) => m.clone(),
        }
    }

    /// `tr(Aρ)` for a dense operator on the full register.
    pub fn expectation(&self, a: &Mat) -> f64 {
        match self {
            State::Pure(v) => v.dot(&(a * v)),
            State::Mixed(m) => crate::linalg::trace_product(a, m),
        }
    }

    pub fn expectation_sparse(&self, a: &crate::linalg::SparseOp) -> f64 {
        match self {
            State::Pure(v) => a.expectation_pure(v),
            State::Mixed(m) => a.trace_with(m),
        }
    }
}

/// Reduced density matrix on `sites` (in the given order).
#[derive(Clone, Debug)]
pub struct ReducedState {
    pub sites: Vec<usize>,
    pub matrix: Mat,
}

impl ReducedState {
    pub fn entropy(&self) -> Result<f64> {
        von_neumann_entropy(&self.matrix)
    }
}

fn validate_sites(sites: &[usize], n_sites: usize) -> Result<Vec<usize>> {
    if sites.is_empty() {
        return Err(Error::EmptyRegion);
    }
    let mut sorted = sites.to_vec();
    sorted.sort_unstable();
    sorted.dedup();
    if sorted.len() != sites.len() {
        return Err(Error::InvalidParameter(format!("region {sites:?} repeats a site")));
    }
    if let Some(&s) = sorted.iter().find(|&&s| s >= n_sites) {
        return Err(Error::SiteOutOfRange { site: s, sites: n_sites });
    }
    Ok((0..n_sites).filter(|s| sorted.binary_search(s).is_err()).collect())
}

/// Amplitude matrix `M[a, b] = ψ[(a on sites, b on complement)]`.
fn grouped_amplitudes(psi: &Vector, sites: &[usize], rest: &[usize], reg: &Register) -> Mat {
    let da = reg.local_dim.pow(sites.len() as u32);
    let db = reg.local_dim.pow(rest.len() as u32);
    let mut m = Mat::zeros(da, db);
    for x in 0..reg.dim() {
        m[(reg.sub_index(x, sites), reg.sub_index(x, rest))] = psi[x];
    }
    m
}

/// `tr_{Λ∖A} ρ` for a state on `n_sites` sites of dimension `local_dim`.
pub fn partial_trace(state: &State, sites: &[usize], n_sites: usize, local_dim: usize) -> Result<ReducedState> {
    let reg = Register::new(n_sites, local_dim);
    if state.dim() != reg.dim() {
        return Err(Error::Shape(format!(
            "state dimension {} does not match {n_sites} sites of dimension {local_dim}",
            state.dim()
        )));
    }
    let rest = validate_sites(sites, n_sites)?;
    if rest.is_empty() {
        log::warn!("partial trace over an empty complement returns the full state");
        return Ok(ReducedState {
            sites: sites.to_vec(),
            matrix: crate::linalg::permute_factors(&state.to_density(), sites, local_dim),
        });
    }
    let matrix = match state {
        State::Pure(psi) => {
            let m = grouped_amplitudes(psi, sites, &rest, &reg);
            &m * m.transpose()
        }
        State::Mixed(rho) => {
            let da = local_dim.pow(sites.len() as u32);
            let db = local_dim.pow(rest.len() as u32);
            // index[a * db + b] = full index of (a on sites, b on rest)
            let mut index = vec![0usize; da * db];
            for x in 0..reg.dim() {
                index[reg.sub_index(x, sites) * db + reg.sub_index(x, &rest)] = x;
            }
            Mat::from_fn(da, da, |a, a2| {
                (0..db).map(|b| rho[(index[a * db + b], index[a2 * db + b])]).sum()
            })
        }
    };
    Ok(ReducedState {
        sites: sites.to_vec(),
        matrix,
    })
}

/// `S = −Σ λ log λ` in nats. Negative eigenvalues down to −1e−10 are
/// clipped; lower ones, or a trace off by more than 1e−8, are errors.
pub fn von_neumann_entropy(rho: &Mat) -> Result<f64> {
    let tr = rho.trace();
    if (tr - 1.0).abs() > 1e-8 {
        return Err(Error::TraceDeviation(tr));
    }
    let eig = rho.symmetric_eigenvalues();
    let lowest = eig.min();
    if lowest < -EIGEN_CLIP_TOL {
        return Err(Error::NegativeEigenvalue(lowest));
    }
    let clipped: Vec<f64> = eig.iter().map(|&x| x.clamp(0.0, 1.0)).collect();
    Ok(von_neumann(&clipped))
}

/// Entropy of a region, using the smaller Gram matrix for pure states.
pub fn region_entropy(state: &State, sites: &[usize], n_sites: usize, local_dim: usize) -> Result<f64> {
    if let State::Pure(psi) = state {
        let rest = validate_sites(sites, n_sites)?;
        if rest.is_empty() {
            return Ok(0.0);
        }
        if rest.len() < sites.len() {
            let reg = Register::new(n_sites, local_dim);
            let m = grouped_amplitudes(psi, &rest, sites, &reg);
            return von_neumann_entropy(&(&m * m.transpose()));
        }
    }
    partial_trace(state, sites, n_sites, local_dim)?.entropy()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScanRow {
    pub l: usize,
    /// Entropy of the cube at the origin.
    pub s_single: f64,
    /// Uniform average over all cubes of the partition.
    pub s_avg: f64,
    /// `max − min` over the cubes; zero for translation-invariant states.
    pub s_spread: f64,
    /// `l^d log(local_dim)`.
    pub dim_bound: f64,
}

/// Single-cube and partition-averaged entropies for every edge in `edges`.
pub fn entropy_scan(state: &State, lat: &LatticeSpec, local_dim: usize, edges: &[usize], exec: Exec) -> Result<Vec<ScanRow>> {
    let n_sites = lat.num_sites();
    let mut rows = Vec::with_capacity(edges.len());
    for &l in edges {
        let partition = partition_lattice(lat, l, 1)?;
        let cubes = partition.cube_sites(lat)?;
        let entropies = exec.try_map(&cubes, |sites| region_entropy(state, sites, n_sites, local_dim))?;
        let s_avg = entropies.iter().sum::<f64>() / entropies.len() as f64;
        let (lo, hi) = entropies
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &s| (a.min(s), b.max(s)));
        rows.push(ScanRow {
            l,
            s_single: entropies[0],
            s_avg,
            s_spread: hi - lo,
            dim_bound: (l.pow(lat.dim as u32) as f64) * (local_dim as f64).ln(),
        });
    }
    Ok(rows)
}

/// CSV with header `l,S_single,S_avg,dim_bound`.
pub fn write_scan_csv<W: Write>(rows: &[ScanRow], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let io = |e: csv::Error| Error::Data(e.to_string());
    w.write_record(["l", "S_single", "S_avg", "dim_bound"]).map_err(io)?;
    for r in rows {
        w.write_record([r.l.to_string(), crate::linalg::format_float(r.s_single), crate::linalg::format_float(r.s_avg), crate::linalg::format_float(r.dim_bound)])
            .map_err(io)?;
    }
    w.flush().map_err(|e| Error::Data(e.to_string()))
}
