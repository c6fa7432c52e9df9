//! Seeded random states for property checks.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::linalg::{Mat, Vector};

pub type Rng = ChaCha8Rng;

pub fn seeded(seed: u64) -> Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn gaussian_matrix(rows: usize, cols: usize, rng: &mut Rng) -> Mat {
    Mat::from_fn(rows, cols, |_, _| StandardNormal.sample(rng))
}

/// Haar-distributed real unit vector.
pub fn random_pure(dim: usize, rng: &mut Rng) -> Vector {
    let v = Vector::from_fn(dim, |_, _| StandardNormal.sample(rng));
    let norm = v.norm();
    v / norm
}

/// Full-rank mixed state `G Gᵀ / tr(G Gᵀ)` from a real Ginibre matrix.
pub fn random_density(dim: usize, rng: &mut Rng) -> Mat {
    random_density_rank(dim, dim, rng)
}

/// Mixed state of rank at most `rank`.
pub fn random_density_rank(dim: usize, rank: usize, rng: &mut Rng) -> Mat {
    let g = gaussian_matrix(dim, rank, rng);
    let rho = &g * g.transpose();
    let tr = rho.trace();
    rho / tr
}

/// `⊗_s |φ_s⟩` with independent random single-site vectors.
pub fn random_product_pure(sites: usize, local_dim: usize, rng: &mut Rng) -> Vector {
    (0..sites).fold(Vector::from_element(1, 1.0), |acc, _| {
        acc.kronecker(&random_pure(local_dim, rng))
    })
}
