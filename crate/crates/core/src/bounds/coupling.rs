//! The coupling strength `h(ρ)`: the smaller of the largest coupling-block
//! operator norm and the largest summed boundary covariance
//! `|Σ_k Cov_ρ(h_A^(k)†, h_B^(k))|` over the boundary sites of every cube.

use serde::Serialize;

use crate::entangle::{partial_trace, State};
use crate::error::Result;
use crate::exec::Exec;
use crate::lattice::{Region, RegionPartition};
use crate::linalg::{self, kron, Mat};
use crate::models::{factorize_boundary_term, BoundaryFactorization, HamiltonianSpec};

/// Moments of one factor pair in a state.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct PairStats {
    /// `⟨h_A h_B⟩ − ⟨h_A⟩⟨h_B⟩`.
    pub cov: f64,
    /// `⟨h_A h_Aᵀ⟩ − ⟨h_A⟩²`.
    pub var_a: f64,
    /// `⟨h_Bᵀ h_B⟩ − ⟨h_B⟩²`.
    pub var_b: f64,
}

impl PairStats {
    /// `cov² − var_a·var_b`; nonpositive up to rounding.
    pub fn cauchy_schwarz_excess(&self) -> f64 {
        self.cov * self.cov - self.var_a * self.var_b
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SiteCoupling {
    pub site: usize,
    pub cube: usize,
    pub crosses: bool,
    /// Signed `Σ_k Cov_ρ(h_A^(k)†, h_B^(k))`.
    pub covariance: f64,
    pub pairs: Vec<PairStats>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum CouplingMode {
    OperatorNorm,
    Covariance,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CouplingStrength {
    /// `min(operator_norm, covariance)`.
    pub value: f64,
    pub mode: CouplingMode,
    /// `max_i |Σ_k Cov|` over boundary sites of all cubes.
    pub covariance: f64,
    /// `max_i ‖H_B(i)‖` over all sites.
    pub operator_norm: f64,
    pub sites: Vec<SiteCoupling>,
}

impl CouplingStrength {
    pub fn worst_cauchy_schwarz_excess(&self) -> f64 {
        self.sites
            .iter()
            .flat_map(|s| s.pairs.iter())
            .map(|p| p.cauchy_schwarz_excess())
            .fold(f64::NEG_INFINITY, f64::max)
    }
}

/// Evaluate the factor-pair moments of `f` in `state`.
pub fn pair_stats(f: &BoundaryFactorization, state: &State, n_sites: usize) -> Result<Vec<PairStats>> {
    if f.pairs.is_empty() {
        return Ok(Vec::new());
    }
    let q = f.local_dim;
    let rho = partial_trace(state, &f.support(), n_sites, q)?.matrix;
    let da = q.pow(f.a_sites.len() as u32);
    let db = q.pow(f.b_sites.len() as u32);
    let (ia, ib) = (Mat::identity(da, da), Mat::identity(db, db));
    let ev = |op: &Mat| linalg::trace_product(&rho, op);
    Ok(f.pairs
        .iter()
        .map(|p| {
            let a = ev(&kron(&p.a, &ib));
            let b = ev(&kron(&ia, &p.b));
            let ab = ev(&kron(&p.a, &p.b));
            let aa = ev(&kron(&(&p.a * p.a.transpose()), &ib));
            let bb = ev(&kron(&ia, &(p.b.transpose() * &p.b)));
            PairStats {
                cov: ab - a * b,
                var_a: aa - a * a,
                var_b: bb - b * b,
            }
        })
        .collect())
}

/// Boundary-site covariances of one cube.
pub fn region_couplings(spec: &HamiltonianSpec, state: &State, region: &Region, cube: usize) -> Result<Vec<SiteCoupling>> {
    let (_, boundary) = region.split(&spec.lattice)?;
    boundary
        .into_iter()
        .map(|site| {
            let f = factorize_boundary_term(spec, site, region)?;
            let pairs = pair_stats(&f, state, spec.num_sites())?;
            Ok(SiteCoupling {
                site,
                cube,
                crosses: f.crosses(),
                covariance: pairs.iter().map(|p| p.cov).sum(),
                pairs,
            })
        })
        .collect()
}

/// `max_i ‖H_B(i)‖` over every site of the lattice.
pub fn operator_norm_strength(spec: &HamiltonianSpec) -> f64 {
    (0..spec.num_sites())
        .filter_map(|i| spec.coupling_block(i))
        .map(|(_, m)| linalg::operator_norm(&m))
        .fold(0.0, f64::max)
}

/// `h(ρ)` for a partition; per-site data covers the boundary of every cube.
pub fn coupling_strength(spec: &HamiltonianSpec, state: &State, partition: &RegionPartition, exec: Exec) -> Result<CouplingStrength> {
    let cubes: Vec<(usize, &Region)> = partition.cubes.iter().enumerate().collect();
    let per_cube = exec.try_map(&cubes, |&(m, region)| region_couplings(spec, state, region, m))?;
    let sites: Vec<SiteCoupling> = per_cube.into_iter().flatten().collect();
    let covariance = sites.iter().map(|s| s.covariance.abs()).fold(0.0, f64::max);
    let operator_norm = operator_norm_strength(spec);
    let (value, mode) = if covariance <= operator_norm {
        (covariance, CouplingMode::Covariance)
    } else {
        (operator_norm, CouplingMode::OperatorNorm)
    };
    Ok(CouplingStrength {
        value,
        mode,
        covariance,
        operator_norm,
        sites,
    })
}
