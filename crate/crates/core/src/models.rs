//! Lattice Hamiltonians written as `H = Σ_i H_i + Σ_i H_B(i)`.
//!
//! Every term has an *owner* site `i`. On-site terms form `H_i`; coupling
//! terms owned by `i` form `H_B(i)`. The grouping is part of the model
//! definition because the operator-norm coupling strength depends on it:
//!
//! * TFIM / XXZ: each bond `(i, i+e_a)` is owned by `i`, one bond per axis
//!   and site. On a periodic ring of two sites both bonds join the same pair,
//!   so that bond is counted twice.
//! * Bose–Hubbard: `H_B(i) = −J b_i† Σ_{j: d(i,j)=1} b_j`, one directed hop
//!   per neighbour, so each term alone is not Hermitian but the sum is.

use std::collections::BTreeMap;

use nalgebra::SVD;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lattice::{LatticeSpec, Region};
use crate::linalg::{self, embed_dense, kron, kron_all, Mat, Register, SparseOp};

/// Default cap on the Hilbert-space dimension of dense operators.
pub const DEFAULT_DIM_CAP: usize = 4096;
/// Cap with `--allow-large`.
pub const LARGE_DIM_CAP: usize = 8192;

/// Single-site operators. Qubit basis `(|0⟩, |1⟩)` with `Z|0⟩ = |0⟩`; boson
/// basis `|0⟩ … |n_max⟩`.
pub mod ops {
    use crate::linalg::Mat;

    pub fn pauli_x() -> Mat {
        Mat::from_row_slice(2, 2, &[0.0, 1.0, 1.0, 0.0])
    }

    pub fn pauli_z() -> Mat {
        Mat::from_row_slice(2, 2, &[1.0, 0.0, 0.0, -1.0])
    }

    /// `σ⁺ = |0⟩⟨1|`.
    pub fn sigma_plus() -> Mat {
        Mat::from_row_slice(2, 2, &[0.0, 1.0, 0.0, 0.0])
    }

    pub fn sigma_minus() -> Mat {
        sigma_plus().transpose()
    }

    /// Truncated bosonic annihilation operator, `b|n⟩ = √n |n−1⟩`.
    pub fn annihilation(n_max: usize) -> Mat {
        let mut b = Mat::zeros(n_max + 1, n_max + 1);
        for n in 1..=n_max {
            b[(n - 1, n)] = (n as f64).sqrt();
        }
        b
    }

    pub fn creation(n_max: usize) -> Mat {
        annihilation(n_max).transpose()
    }

    pub fn number(n_max: usize) -> Mat {
        Mat::from_diagonal(&nalgebra::DVector::from_fn(n_max + 1, |n, _| n as f64))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum SiteKind {
    Qubit,
    Boson { n_max: usize },
    Qudit,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SiteSpace {
    pub kind: SiteKind,
    pub local_dim: usize,
}

impl SiteSpace {
    pub fn qubit() -> Self {
        SiteSpace {
            kind: SiteKind::Qubit,
            local_dim: 2,
        }
    }

    pub fn boson(n_max: usize) -> Result<Self> {
        if n_max == 0 {
            return Err(Error::InvalidParameter("boson cutoff n_max must be ≥ 1".into()));
        }
        Ok(SiteSpace {
            kind: SiteKind::Boson { n_max },
            local_dim: n_max + 1,
        })
    }

    pub fn qudit(local_dim: usize) -> Result<Self> {
        if local_dim < 2 {
            return Err(Error::InvalidParameter("local dimension must be ≥ 2".into()));
        }
        Ok(SiteSpace {
            kind: SiteKind::Qudit,
            local_dim,
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TermRole {
    OnSite,
    Coupling,
}

/// One term of the Hamiltonian. `matrix` acts on the Kronecker product of
/// the support's local spaces in support order. When the term is a single
/// product of one-site operators, `factors` holds them (coefficient folded
/// into the first).
#[derive(Clone, Debug)]
pub struct LocalTerm {
    pub owner: usize,
    pub role: TermRole,
    pub support: Vec<usize>,
    pub matrix: Mat,
    pub factors: Option<Vec<Mat>>,
}

impl LocalTerm {
    pub fn product(owner: usize, role: TermRole, support: Vec<usize>, factors: Vec<Mat>) -> Self {
        assert_eq!(support.len(), factors.len(), "one factor per support site");
        let matrix = kron_all(&factors);
        LocalTerm {
            owner,
            role,
            support,
            matrix,
            factors: Some(factors),
        }
    }

    pub fn dense(owner: usize, role: TermRole, support: Vec<usize>, matrix: Mat, local_dim: usize) -> Result<Self> {
        let dim = local_dim.pow(support.len() as u32);
        if matrix.nrows() != dim || matrix.ncols() != dim {
            return Err(Error::Shape(format!(
                "term on {} sites needs a {dim}x{dim} matrix, got {}x{}",
                support.len(),
                matrix.nrows(),
                matrix.ncols()
            )));
        }
        Ok(LocalTerm {
            owner,
            role,
            support,
            matrix,
            factors: None,
        })
    }
}

#[derive(Clone, Debug)]
pub struct HamiltonianSpec {
    pub name: String,
    pub lattice: LatticeSpec,
    pub site_space: SiteSpace,
    pub terms: Vec<LocalTerm>,
    pub radius: usize,
    pub translation_invariant: bool,
    pub params: BTreeMap<String, f64>,
}

impl HamiltonianSpec {
    pub fn empty(name: &str, lattice: LatticeSpec, site_space: SiteSpace, radius: usize) -> Self {
        HamiltonianSpec {
            name: name.to_string(),
            lattice,
            site_space,
            terms: Vec::new(),
            radius,
            translation_invariant: false,
            params: BTreeMap::new(),
        }
    }

    pub fn num_sites(&self) -> usize {
        self.lattice.num_sites()
    }

    pub fn local_dim(&self) -> usize {
        self.site_space.local_dim
    }

    pub fn hilbert_dim(&self, cap: usize) -> Result<usize> {
        linalg::checked_dim(self.local_dim(), self.num_sites(), cap)
    }

    /// Add a term after checking that its support is distinct, inside the
    /// lattice and within `B_r(owner)`.
    pub fn add_term(&mut self, term: LocalTerm) -> Result<()> {
        self.lattice.check_site(term.owner)?;
        let mut seen = term.support.clone();
        seen.sort_unstable();
        seen.dedup();
        if seen.len() != term.support.len() || seen.is_empty() {
            return Err(Error::InvalidParameter(format!(
                "term support {:?} must be a non-empty list of distinct sites",
                term.support
            )));
        }
        for &s in &term.support {
            self.lattice.check_site(s)?;
            if self.lattice.distance(term.owner, s) > self.radius {
                return Err(Error::InvalidParameter(format!(
                    "site {s} of term owned by {} lies outside B_{}({})",
                    term.owner, self.radius, term.owner
                )));
            }
        }
        let dim = self.local_dim().pow(term.support.len() as u32);
        if term.matrix.nrows() != dim || term.matrix.ncols() != dim {
            return Err(Error::Shape(format!(
                "term matrix is {}x{}, support needs {dim}x{dim}",
                term.matrix.nrows(),
                term.matrix.ncols()
            )));
        }
        self.terms.push(term);
        Ok(())
    }

    fn block(&self, owner: usize, keep: impl Fn(&LocalTerm) -> bool) -> Option<(Vec<usize>, Mat)> {
        let owned: Vec<&LocalTerm> = self.terms.iter().filter(|t| t.owner == owner && keep(t)).collect();
        if owned.is_empty() {
            return None;
        }
        let mut sites: Vec<usize> = owned.iter().flat_map(|t| t.support.iter().copied()).collect();
        sites.sort_unstable();
        sites.dedup();
        let q = self.local_dim();
        let dim = q.pow(sites.len() as u32);
        let mut acc = Mat::zeros(dim, dim);
        for t in owned {
            let pos: Vec<usize> = t.support.iter().map(|s| sites.binary_search(s).unwrap()).collect();
            acc += embed_dense(&t.matrix, &pos, sites.len(), q);
        }
        Some((sites, acc))
    }

    /// `H_B(i)` on its (sorted) support.
    pub fn coupling_block(&self, owner: usize) -> Option<(Vec<usize>, Mat)> {
        self.block(owner, |t| t.role == TermRole::Coupling)
    }

    /// `H_i` on its (sorted) support.
    pub fn onsite_block(&self, owner: usize) -> Option<(Vec<usize>, Mat)> {
        self.block(owner, |t| t.role == TermRole::OnSite)
    }

    /// Every term owned by `i` (the r-local `H_{B_r(i)}` grouping).
    pub fn local_block(&self, owner: usize) -> Option<(Vec<usize>, Mat)> {
        self.block(owner, |_| true)
    }

    pub fn assemble_sparse(&self, cap: usize) -> Result<SparseOp> {
        let dim = self.hilbert_dim(cap)?;
        let reg = Register::new(self.num_sites(), self.local_dim());
        let mut triplets = Vec::new();
        for term in &self.terms {
            for col in 0..dim {
                let b = reg.sub_index(col, &term.support);
                for a in 0..term.matrix.nrows() {
                    let v = term.matrix[(a, b)];
                    if v != 0.0 {
                        triplets.push((reg.with_sub_index(col, &term.support, a), col, v));
                    }
                }
            }
        }
        Ok(SparseOp::from_triplets(dim, triplets))
    }

    /// Dense `H` on the full space; Hermitian within 1e−12 relative.
    pub fn assemble_full(&self, cap: usize) -> Result<Mat> {
        let h = self.assemble_sparse(cap)?.to_dense();
        linalg::check_hermitian(&h, 1e-12)?;
        Ok(h)
    }
}

fn periodic_flag(lat: &LatticeSpec) -> bool {
    lat.is_periodic()
}

fn forward_bonds(lat: &LatticeSpec, i: usize) -> Vec<usize> {
    (0..lat.dim)
        .filter_map(|axis| lat.step(i, axis, true))
        .filter(|&j| j != i)
        .collect()
}

/// `H = −J Σ_⟨ij⟩ Z_i Z_j − g Σ_i X_i`.
pub fn build_tfim(lat: &LatticeSpec, j: f64, g: f64) -> HamiltonianSpec {
    let mut spec = HamiltonianSpec::empty("tfim", lat.clone(), SiteSpace::qubit(), 1);
    spec.params.insert("J".into(), j);
    spec.params.insert("g".into(), g);
    let (x, z) = (ops::pauli_x(), ops::pauli_z());
    for i in 0..lat.num_sites() {
        spec.terms.push(LocalTerm::product(i, TermRole::OnSite, vec![i], vec![&x * -g]));
        for nb in forward_bonds(lat, i) {
            spec.terms.push(LocalTerm::product(
                i,
                TermRole::Coupling,
                vec![i, nb],
                vec![&z * -j, z.clone()],
            ));
        }
    }
    spec.translation_invariant = periodic_flag(lat);
    spec
}

/// `H = J Σ_⟨ij⟩ (X_i X_j + Y_i Y_j + Δ Z_i Z_j)`, with `XX + YY` written as
/// `2(σ⁺σ⁻ + σ⁻σ⁺)`.
pub fn build_xxz(lat: &LatticeSpec, j: f64, anisotropy: f64) -> HamiltonianSpec {
    let mut spec = HamiltonianSpec::empty("xxz", lat.clone(), SiteSpace::qubit(), 1);
    spec.params.insert("J".into(), j);
    spec.params.insert("Delta".into(), anisotropy);
    let (sp, sm, z) = (ops::sigma_plus(), ops::sigma_minus(), ops::pauli_z());
    for i in 0..lat.num_sites() {
        for nb in forward_bonds(lat, i) {
            let pairs = [
                (&sp * (2.0 * j), sm.clone()),
                (&sm * (2.0 * j), sp.clone()),
                (&z * (j * anisotropy), z.clone()),
            ];
            for (a, b) in pairs {
                spec.terms.push(LocalTerm::product(i, TermRole::Coupling, vec![i, nb], vec![a, b]));
            }
        }
    }
    spec.translation_invariant = periodic_flag(lat);
    spec
}

/// `H = −J Σ_{d(i,j)=1} b_i† b_j + U Σ_i n_i(n_i − 1) − μ Σ_i n_i` on the
/// Fock space truncated at `n_max` bosons per site.
pub fn build_bose_hubbard(lat: &LatticeSpec, j: f64, u: f64, mu: f64, n_max: usize) -> Result<HamiltonianSpec> {
    let space = SiteSpace::boson(n_max)?;
    let mut spec = HamiltonianSpec::empty("bose_hubbard", lat.clone(), space, 1);
    spec.params.insert("J".into(), j);
    spec.params.insert("U".into(), u);
    spec.params.insert("mu".into(), mu);
    spec.params.insert("n_max".into(), n_max as f64);
    let (b, bd, n) = (ops::annihilation(n_max), ops::creation(n_max), ops::number(n_max));
    let id = Mat::identity(n_max + 1, n_max + 1);
    let onsite = &n * (&n - &id) * u - &n * mu;
    for i in 0..lat.num_sites() {
        spec.terms.push(LocalTerm::product(i, TermRole::OnSite, vec![i], vec![onsite.clone()]));
        for nb in lat.nearest_neighbours(i) {
            spec.terms.push(LocalTerm::product(
                i,
                TermRole::Coupling,
                vec![i, nb],
                vec![&bd * -j, b.clone()],
            ));
        }
    }
    spec.translation_invariant = periodic_flag(lat);
    Ok(spec)
}

/// One user-supplied dense term.
#[derive(Clone, Debug)]
pub struct CustomTerm {
    pub owner: usize,
    pub role: TermRole,
    pub support: Vec<usize>,
    pub matrix: Mat,
}

pub fn build_custom(
    name: &str,
    lat: &LatticeSpec,
    local_dim: usize,
    radius: usize,
    terms: Vec<CustomTerm>,
) -> Result<HamiltonianSpec> {
    let space = if local_dim == 2 {
        SiteSpace::qubit()
    } else {
        SiteSpace::qudit(local_dim)?
    };
    let mut spec = HamiltonianSpec::empty(name, lat.clone(), space, radius);
    for t in terms {
        let term = LocalTerm::dense(t.owner, t.role, t.support, t.matrix, local_dim)?;
        spec.add_term(term)?;
    }
    spec.translation_invariant = false;
    Ok(spec)
}

#[derive(Clone, Debug)]
pub struct FactorPair {
    /// Operator on all of `a_sites`.
    pub a: Mat,
    /// Operator on all of `b_sites`.
    pub b: Mat,
}

/// `H_B(i) = Σ_k h_A^(k) ⊗ h_B^(k)` across the cut of a region.
#[derive(Clone, Debug)]
pub struct BoundaryFactorization {
    pub site: usize,
    pub a_sites: Vec<usize>,
    pub b_sites: Vec<usize>,
    pub pairs: Vec<FactorPair>,
    pub local_dim: usize,
}

impl BoundaryFactorization {
    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    /// Whether the term reaches outside the region.
    pub fn crosses(&self) -> bool {
        !self.b_sites.is_empty()
    }

    /// `a_sites` followed by `b_sites`: the factor order of `reconstruct`.
    pub fn support(&self) -> Vec<usize> {
        self.a_sites.iter().chain(&self.b_sites).copied().collect()
    }

    pub fn reconstruct(&self) -> Mat {
        let q = self.local_dim;
        let dim = q.pow((self.a_sites.len() + self.b_sites.len()) as u32);
        self.pairs
            .iter()
            .fold(Mat::zeros(dim, dim), |acc, p| acc + kron(&p.a, &p.b))
    }

    /// `‖Σ_k h_A⊗h_B − H_B(i)‖_max` after aligning factor orders.
    pub fn reconstruction_error(&self, spec: &HamiltonianSpec) -> f64 {
        let target = spec.coupling_block(self.site);
        let support = self.support();
        let mut sorted = support.clone();
        sorted.sort_unstable();
        let order: Vec<usize> = sorted
            .iter()
            .map(|s| support.iter().position(|x| x == s).unwrap())
            .collect();
        let rebuilt = linalg::permute_factors(&self.reconstruct(), &order, self.local_dim);
        match target {
            Some((sites, m)) if sites == sorted => linalg::max_abs(&(rebuilt - m)),
            Some((sites, m)) => {
                // the factorization support always covers the block support
                let pos: Vec<usize> = sites.iter().map(|s| sorted.binary_search(s).unwrap()).collect();
                let embedded = embed_dense(&m, &pos, sorted.len(), self.local_dim);
                linalg::max_abs(&(rebuilt - embedded))
            }
            None => linalg::max_abs(&rebuilt),
        }
    }
}

/// Operator-Schmidt split of `m` (acting on `na + nb` sites, the first `na`
/// in A) into `Σ_k a_k ⊗ b_k`.
fn operator_schmidt(m: &Mat, na: usize, nb: usize, q: usize) -> Vec<(Mat, Mat)> {
    let da = q.pow(na as u32);
    let db = q.pow(nb as u32);
    let realigned = Mat::from_fn(da * da, db * db, |r, c| {
        let (a, a2) = (r / da, r % da);
        let (b, b2) = (c / db, c % db);
        m[(a * db + b, a2 * db + b2)]
    });
    let svd = SVD::new(realigned, true, true);
    let (u, vt) = (svd.u.unwrap(), svd.v_t.unwrap());
    let smax = svd.singular_values.max();
    let mut out = Vec::new();
    for (k, &s) in svd.singular_values.iter().enumerate() {
        if s <= 1e-14 * smax.max(f64::MIN_POSITIVE) {
            continue;
        }
        let a = Mat::from_fn(da, da, |r, c| s * u[(r * da + c, k)]);
        let b = Mat::from_fn(db, db, |r, c| vt[(k, r * db + c)]);
        out.push((a, b));
    }
    out
}

/// Factorize `H_B(i)` across the cut of `region`: one pair per coupling term
/// that leaves the region (operator-Schmidt pairs for dense terms), plus one
/// pair `(remaining A terms, 1_B)`. Sites in the interior, or whose terms
/// stay inside, get the single pair `(H_B(i), 1)`.
pub fn factorize_boundary_term(spec: &HamiltonianSpec, site: usize, region: &Region) -> Result<BoundaryFactorization> {
    let lat = &spec.lattice;
    lat.check_site(site)?;
    if !region.contains(lat, site) {
        return Err(Error::NotInRegion(site));
    }
    let q = spec.local_dim();
    let owned: Vec<&LocalTerm> = spec
        .terms
        .iter()
        .filter(|t| t.owner == site && t.role == TermRole::Coupling)
        .collect();
    let (mut a_sites, mut b_sites): (Vec<usize>, Vec<usize>) = owned
        .iter()
        .flat_map(|t| t.support.iter().copied())
        .partition(|&s| region.contains(lat, s));
    if !a_sites.contains(&site) {
        a_sites.push(site);
    }
    a_sites.sort_unstable();
    a_sites.dedup();
    b_sites.sort_unstable();
    b_sites.dedup();

    let da = q.pow(a_sites.len() as u32);
    let db = q.pow(b_sites.len() as u32);
    let mut pairs = Vec::new();
    let mut remainder = Mat::zeros(da, da);
    let mut has_remainder = false;

    for term in owned {
        let (a_idx, b_idx): (Vec<usize>, Vec<usize>) =
            (0..term.support.len()).partition(|&k| region.contains(lat, term.support[k]));
        let a_pos: Vec<usize> = a_idx
            .iter()
            .map(|&k| a_sites.binary_search(&term.support[k]).unwrap())
            .collect();
        if b_idx.is_empty() {
            remainder += embed_dense(&term.matrix, &a_pos, a_sites.len(), q);
            has_remainder = true;
            continue;
        }
        let b_pos: Vec<usize> = b_idx
            .iter()
            .map(|&k| b_sites.binary_search(&term.support[k]).unwrap())
            .collect();
        let local_pairs: Vec<(Mat, Mat)> = match &term.factors {
            Some(f) => {
                let fa = kron_all(a_idx.iter().map(|&k| &f[k]));
                let fb = kron_all(b_idx.iter().map(|&k| &f[k]));
                vec![(fa, fb)]
            }
            None => {
                let order: Vec<usize> = a_idx.iter().chain(&b_idx).copied().collect();
                let reordered = linalg::permute_factors(&term.matrix, &order, q);
                operator_schmidt(&reordered, a_idx.len(), b_idx.len(), q)
            }
        };
        for (ha, hb) in local_pairs {
            pairs.push(FactorPair {
                a: embed_dense(&ha, &a_pos, a_sites.len(), q),
                b: embed_dense(&hb, &b_pos, b_sites.len(), q),
            });
        }
    }
    if has_remainder {
        pairs.push(FactorPair {
            a: remainder,
            b: Mat::identity(db, db),
        });
    }
    Ok(BoundaryFactorization {
        site,
        a_sites,
        b_sites,
        pairs,
        local_dim: q,
    })
}

/// Basis permutation implementing a unit lattice translation along `axis`.
pub fn translation_permutation(lat: &LatticeSpec, local_dim: usize, axis: usize) -> Vec<usize> {
    let n = lat.num_sites();
    let reg = Register::new(n, local_dim);
    let target: Vec<usize> = (0..n).map(|s| lat.step(s, axis, true).unwrap_or(s)).collect();
    (0..reg.dim())
        .map(|x| (0..n).map(|s| reg.digit(x, s) * reg.stride(target[s])).sum())
        .collect()
}

/// True iff `S_a H S_a† = H` within 1e−12 (relative to the largest entry)
/// for the unit shift along every axis. Open lattices are never invariant.
pub fn check_translation_invariance(spec: &HamiltonianSpec, cap: usize) -> Result<bool> {
    if !spec.lattice.is_periodic() {
        return Ok(false);
    }
    let h = spec.assemble_full(cap)?;
    let tol = 1e-12 * linalg::max_abs(&h).max(1.0);
    for axis in 0..spec.lattice.dim {
        let p = translation_permutation(&spec.lattice, spec.local_dim(), axis);
        for x in 0..h.nrows() {
            for y in 0..h.ncols() {
                if (h[(p[x], p[y])] - h[(x, y)]).abs() > tol {
                    return Ok(false);
                }
            }
        }
    }
    Ok(true)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::LatticeSpec;
    use crate::linalg::sorted_eigh;
    use approx::assert_abs_diff_eq;

    fn spectrum(spec: &HamiltonianSpec) -> Vec<f64> {
        sorted_eigh(&spec.assemble_full(DEFAULT_DIM_CAP).unwrap()).0
    }

    #[test]
    fn tfim_two_site_ring_counts_bond_twice() {
        let lat = LatticeSpec::periodic(1, 2).unwrap();
        let e = spectrum(&build_tfim(&lat, 1.0, 0.0));
        for (got, want) in e.iter().zip([-2.0, -2.0, 2.0, 2.0]) {
            assert_abs_diff_eq!(*got, want, epsilon = 1e-12);
        }
    }

    #[test]
    fn tfim_free_spins() {
        let lat = LatticeSpec::periodic(1, 3).unwrap();
        let e = spectrum(&build_tfim(&lat, 0.0, 1.0));
        let want = [-3.0, -1.0, -1.0, -1.0, 1.0, 1.0, 1.0, 3.0];
        for (got, w) in e.iter().zip(want) {
            assert_abs_diff_eq!(*got, w, epsilon = 1e-12);
        }
    }

    #[test]
    fn tfim_ground_energies_match_dense_oracle() {
        // independent numpy diagonalization of −Σ Z_i Z_{i+1} − Σ X_i
        let ring = LatticeSpec::periodic(1, 4).unwrap();
        assert_abs_diff_eq!(spectrum(&build_tfim(&ring, 1.0, 1.0))[0], -5.226251859505506, epsilon = 1e-9);
        let chain = LatticeSpec::open(1, 4).unwrap();
        assert_abs_diff_eq!(spectrum(&build_tfim(&chain, 1.0, 1.0))[0], -4.758770483143634, epsilon = 1e-9);
    }

    #[test]
    fn single_zz_bond_is_diagonal() {
        let lat = LatticeSpec::open(1, 2).unwrap();
        let h = build_tfim(&lat, 0.7, 0.0).assemble_full(DEFAULT_DIM_CAP).unwrap();
        let want = Mat::from_diagonal(&nalgebra::DVector::from_vec(vec![-0.7, 0.7, 0.7, -0.7]));
        assert_abs_diff_eq!(linalg::max_abs(&(h - want)), 0.0, epsilon = 1e-15);
    }

    #[test]
    fn commuting_onsite_terms_give_minkowski_sum() {
        let lat = LatticeSpec::open(1, 2).unwrap();
        let mut spec = HamiltonianSpec::empty("sum", lat, SiteSpace::qubit(), 1);
        let a = Mat::from_diagonal(&nalgebra::DVector::from_vec(vec![0.0, 1.5]));
        let b = Mat::from_diagonal(&nalgebra::DVector::from_vec(vec![-1.0, 2.0]));
        spec.add_term(LocalTerm::product(0, TermRole::OnSite, vec![0], vec![a])).unwrap();
        spec.add_term(LocalTerm::product(1, TermRole::OnSite, vec![1], vec![b])).unwrap();
        let e = spectrum(&spec);
        for (got, want) in e.iter().zip([-1.0, 0.5, 2.0, 3.5]) {
            assert_abs_diff_eq!(*got, want, epsilon = 1e-12);
        }
    }

    #[test]
    fn assembly_ignores_term_order() {
        let lat = LatticeSpec::periodic(1, 4).unwrap();
        let spec = build_xxz(&lat, 0.8, 0.3);
        let mut shuffled = spec.clone();
        shuffled.terms.reverse();
        shuffled.terms.rotate_left(5);
        let diff = spec.assemble_full(DEFAULT_DIM_CAP).unwrap() - shuffled.assemble_full(DEFAULT_DIM_CAP).unwrap();
        assert!(linalg::max_abs(&diff) < 1e-14);
    }

    #[test]
    fn bose_hubbard_onsite_diagonal() {
        let lat = LatticeSpec::open(1, 1).unwrap();
        let spec = build_bose_hubbard(&lat, 1.0, 1.0, 0.0, 3).unwrap();
        let h = spec.assemble_full(DEFAULT_DIM_CAP).unwrap();
        assert_eq!(h, Mat::from_diagonal(&nalgebra::DVector::from_vec(vec![0.0, 0.0, 2.0, 6.0])));
    }

    #[test]
    fn bose_hubbard_without_hopping_is_diagonal() {
        let lat = LatticeSpec::periodic(1, 3).unwrap();
        let h = build_bose_hubbard(&lat, 0.0, 0.6, 0.2, 2).unwrap().assemble_full(DEFAULT_DIM_CAP).unwrap();
        let off: f64 = (0..h.nrows())
            .flat_map(|r| (0..h.ncols()).map(move |c| (r, c)))
            .filter(|(r, c)| r != c)
            .map(|(r, c)| h[(r, c)].abs())
            .sum();
        assert_eq!(off, 0.0);
    }

    #[test]
    fn hardcore_bosons_match_xx_chain() {
        // n_max = 1: b ↔ σ⁻ maps −J(b†b + h.c.) to −(J/2)(XX + YY).
        for n in [2, 3] {
            let lat = LatticeSpec::open(1, n).unwrap();
            let bh = build_bose_hubbard(&lat, 1.0, 5.0, 0.0, 1).unwrap();
            let xx = build_xxz(&lat, -0.5, 0.0);
            let (e1, e2) = (spectrum(&bh), spectrum(&xx));
            for (a, b) in e1.iter().zip(&e2) {
                assert_abs_diff_eq!(a, b, epsilon = 1e-12);
            }
        }
        // explicit two-site hopping block
        let lat = LatticeSpec::open(1, 2).unwrap();
        let h = build_bose_hubbard(&lat, 1.0, 3.0, 0.0, 1).unwrap().assemble_full(DEFAULT_DIM_CAP).unwrap();
        let want = Mat::from_row_slice(4, 4, &[
            0.0, 0.0, 0.0, 0.0,
            0.0, 0.0, -1.0, 0.0,
            0.0, -1.0, 0.0, 0.0,
            0.0, 0.0, 0.0, 0.0,
        ]);
        assert_eq!(h, want);
    }

    #[test]
    fn bose_hubbard_factorization_has_two_pairs() {
        let lat = LatticeSpec::periodic(1, 6).unwrap();
        let spec = build_bose_hubbard(&lat, 0.9, 1.0, 0.3, 2).unwrap();
        let region = Region::at_origin(&lat, 3, 1).unwrap();
        let f = factorize_boundary_term(&spec, 2, &region).unwrap();
        assert_eq!(f.len(), 2);
        assert_eq!(f.a_sites, vec![1, 2]);
        assert_eq!(f.b_sites, vec![3]);
        let id = Mat::identity(3, 3);
        let want_a = kron(&id, &(ops::creation(2) * -0.9));
        assert_abs_diff_eq!(linalg::max_abs(&(&f.pairs[0].a - want_a)), 0.0, epsilon = 1e-15);
        assert_abs_diff_eq!(linalg::max_abs(&(&f.pairs[0].b - ops::annihilation(2))), 0.0, epsilon = 1e-15);
        assert_eq!(f.pairs[1].b, Mat::identity(3, 3));
        assert!(f.reconstruction_error(&spec) < 1e-12);
    }

    #[test]
    fn interior_site_gets_trivial_pair() {
        let lat = LatticeSpec::periodic(1, 6).unwrap();
        let spec = build_tfim(&lat, 1.0, 0.5);
        let region = Region::at_origin(&lat, 3, 1).unwrap();
        let f = factorize_boundary_term(&spec, 1, &region).unwrap();
        assert!(!f.crosses());
        assert_eq!(f.len(), 1);
        assert!(f.reconstruction_error(&spec) < 1e-12);
        assert!(matches!(factorize_boundary_term(&spec, 4, &region), Err(Error::NotInRegion(4))));
    }

    #[test]
    fn tfim_boundary_factorization_reconstructs() {
        let lat = LatticeSpec::periodic(2, 4).unwrap();
        let spec = build_tfim(&lat, 1.3, 0.4);
        let region = Region::at_origin(&lat, 2, 1).unwrap();
        for site in region.sites(&lat).unwrap() {
            let f = factorize_boundary_term(&spec, site, &region).unwrap();
            assert!(f.reconstruction_error(&spec) < 1e-12, "site {site}");
        }
    }

    #[test]
    fn dense_terms_are_schmidt_factorized() {
        let lat = LatticeSpec::periodic(1, 4).unwrap();
        let reference = build_xxz(&lat, 0.7, 1.4);
        // the same model entered as dense two-site blocks
        let terms = (0..4)
            .map(|i| CustomTerm {
                owner: i,
                role: TermRole::Coupling,
                support: vec![i, (i + 1) % 4],
                matrix: reference.coupling_block(i).map(|(sites, m)| {
                    if sites == vec![i, (i + 1) % 4] { m } else { linalg::permute_factors(&m, &[1, 0], 2) }
                }).unwrap(),
            })
            .collect();
        let custom = build_custom("xxz-dense", &lat, 2, 1, terms).unwrap();
        let region = Region::at_origin(&lat, 2, 1).unwrap();
        let f = factorize_boundary_term(&custom, 1, &region).unwrap();
        assert_eq!(f.b_sites, vec![2]);
        assert_eq!(f.len(), 3);
        assert!(f.reconstruction_error(&custom) < 1e-12);
        let diff = custom.assemble_full(DEFAULT_DIM_CAP).unwrap() - reference.assemble_full(DEFAULT_DIM_CAP).unwrap();
        assert!(linalg::max_abs(&diff) < 1e-12);
    }

    #[test]
    fn translation_invariance_checks() {
        let lat = LatticeSpec::periodic(1, 5).unwrap();
        let tfim = build_tfim(&lat, 1.0, 0.7);
        assert!(check_translation_invariance(&tfim, DEFAULT_DIM_CAP).unwrap());

        let mut impurity = tfim.clone();
        impurity
            .add_term(LocalTerm::product(2, TermRole::OnSite, vec![2], vec![ops::pauli_z() * 0.3]))
            .unwrap();
        assert!(!check_translation_invariance(&impurity, DEFAULT_DIM_CAP).unwrap());

        let sq = LatticeSpec::periodic(2, 2).unwrap();
        let bh = build_bose_hubbard(&sq, 0.8, 1.0, 0.4, 2).unwrap();
        assert!(check_translation_invariance(&bh, DEFAULT_DIM_CAP).unwrap());
        let ring = LatticeSpec::periodic(1, 4).unwrap();
        let bh = build_bose_hubbard(&ring, 0.8, 1.0, 0.4, 3).unwrap();
        assert!(check_translation_invariance(&bh, DEFAULT_DIM_CAP).unwrap());
    }

    #[test]
    fn add_term_rejects_out_of_ball_support() {
        let lat = LatticeSpec::periodic(1, 6).unwrap();
        let mut spec = HamiltonianSpec::empty("x", lat, SiteSpace::qubit(), 1);
        let zz = kron(&ops::pauli_z(), &ops::pauli_z());
        let t = LocalTerm::dense(0, TermRole::Coupling, vec![0, 3], zz, 2).unwrap();
        assert!(spec.add_term(t).is_err());
    }

    #[test]
    fn dimension_cap_refuses_large_models() {
        let lat = LatticeSpec::periodic(1, 13).unwrap();
        let spec = build_tfim(&lat, 1.0, 1.0);
        assert!(matches!(spec.assemble_full(DEFAULT_DIM_CAP), Err(Error::DimensionCap { .. })));
    }

    #[test]
    fn assembled_hamiltonians_are_hermitian() {
        let lat = LatticeSpec::periodic(2, 2).unwrap();
        for spec in [
            build_tfim(&lat, 0.3, 1.7),
            build_xxz(&lat, 1.1, -0.4),
            build_bose_hubbard(&lat, 0.5, 0.9, 0.1, 2).unwrap(),
        ] {
            let h = spec.assemble_full(DEFAULT_DIM_CAP).unwrap();
            assert!(linalg::relative_asymmetry(&h) <= 1e-12);
        }
    }
}
