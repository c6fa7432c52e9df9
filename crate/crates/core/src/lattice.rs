//! Cubic lattice `{0,…,n−1}^d`, cubic regions with their interior/boundary
//! split, and partitions of the lattice into equal cubes.
//!
//! Sites are linearized row-major: coordinate 0 is the most significant, so
//! site `Σ_k x_k n^(d−1−k)`. The same order is used for the tensor factors of
//! every many-body operator and state.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum Boundary {
    #[default]
    Periodic,
    Open,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LatticeSpec {
    pub dim: usize,
    pub size: usize,
    pub boundary: Boundary,
}

impl LatticeSpec {
    pub fn new(dim: usize, size: usize, boundary: Boundary) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidLattice("dimension must be positive".into()));
        }
        if size == 0 {
            return Err(Error::InvalidLattice("edge length must be positive".into()));
        }
        size.checked_pow(dim as u32)
            .ok_or_else(|| Error::InvalidLattice("site count overflows".into()))?;
        Ok(LatticeSpec {
            dim,
            size,
            boundary,
        })
    }

    pub fn periodic(dim: usize, size: usize) -> Result<Self> {
        Self::new(dim, size, Boundary::Periodic)
    }

    pub fn open(dim: usize, size: usize) -> Result<Self> {
        Self::new(dim, size, Boundary::Open)
    }

    pub fn num_sites(&self) -> usize {
        self.size.pow(self.dim as u32)
    }

    pub fn is_periodic(&self) -> bool {
        self.boundary == Boundary::Periodic
    }

    pub fn check_site(&self, site: usize) -> Result<()> {
        if site >= self.num_sites() {
            return Err(Error::SiteOutOfRange {
                site,
                sites: self.num_sites(),
            });
        }
        Ok(())
    }

    pub fn coords(&self, site: usize) -> Vec<usize> {
        let mut out = vec![0; self.dim];
        let mut rest = site;
        for k in (0..self.dim).rev() {
            out[k] = rest % self.size;
            rest /= self.size;
        }
        out
    }

    pub fn site(&self, coords: &[usize]) -> Result<usize> {
        if coords.len() != self.dim || coords.iter().any(|&x| x >= self.size) {
            return Err(Error::InvalidLattice(format!(
                "coordinates {coords:?} outside {}^{}",
                self.size, self.dim
            )));
        }
        Ok(coords.iter().fold(0, |acc, &x| acc * self.size + x))
    }

    fn axis_distance(&self, a: usize, b: usize) -> usize {
        let diff = a.abs_diff(b);
        match self.boundary {
            Boundary::Periodic => diff.min(self.size - diff),
            Boundary::Open => diff,
        }
    }

    /// Manhattan distance, wrapped under periodic boundaries.
    pub fn distance(&self, i: usize, j: usize) -> usize {
        self.coords(i)
            .iter()
            .zip(self.coords(j))
            .map(|(&a, b)| self.axis_distance(a, b))
            .sum()
    }

    /// Translate a site by `shift`; `None` if it leaves an open lattice.
    pub fn translate(&self, site: usize, shift: &[isize]) -> Option<usize> {
        let n = self.size as isize;
        let mut coords = self.coords(site);
        for (x, &t) in coords.iter_mut().zip(shift) {
            let moved = *x as isize + t;
            *x = match self.boundary {
                Boundary::Periodic => moved.rem_euclid(n) as usize,
                Boundary::Open if (0..n).contains(&moved) => moved as usize,
                Boundary::Open => return None,
            };
        }
        Some(coords.iter().fold(0, |acc, &x| acc * self.size + x))
    }

    /// Unit shift along `axis`.
    pub fn step(&self, site: usize, axis: usize, forward: bool) -> Option<usize> {
        let mut shift = vec![0isize; self.dim];
        shift[axis] = if forward { 1 } else { -1 };
        self.translate(site, &shift)
    }

    /// The set `{j : d(i, j) = 1}`, ascending.
    pub fn nearest_neighbours(&self, site: usize) -> Vec<usize> {
        let mut out: Vec<usize> = (0..self.dim)
            .flat_map(|axis| [self.step(site, axis, true), self.step(site, axis, false)])
            .flatten()
            .filter(|&j| j != site)
            .collect();
        out.sort_unstable();
        out.dedup();
        out
    }

    /// `B_r(i) = {j : d(i, j) ≤ r}`, ascending.
    pub fn manhattan_ball(&self, site: usize, radius: usize) -> Result<Vec<usize>> {
        self.check_site(site)?;
        Ok((0..self.num_sites())
            .filter(|&j| self.distance(site, j) <= radius)
            .collect())
    }
}

/// Cube `origin + {0,…,edge−1}^d` together with the interaction radius that
/// decides its interior.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Region {
    pub origin: Vec<usize>,
    pub edge: usize,
    pub radius: usize,
}

impl Region {
    pub fn new(origin: Vec<usize>, edge: usize, radius: usize) -> Result<Self> {
        if edge == 0 {
            return Err(Error::InvalidParameter("region edge must be positive".into()));
        }
        Ok(Region {
            origin,
            edge,
            radius,
        })
    }

    /// Cube anchored at the lattice origin.
    pub fn at_origin(lat: &LatticeSpec, edge: usize, radius: usize) -> Result<Self> {
        Self::new(vec![0; lat.dim], edge, radius)
    }

    fn validate(&self, lat: &LatticeSpec) -> Result<()> {
        if self.origin.len() != lat.dim {
            return Err(Error::RegionOutOfBounds(format!(
                "origin {:?} has wrong dimension for d={}",
                self.origin, lat.dim
            )));
        }
        if self.edge > lat.size {
            return Err(Error::RegionOutOfBounds(format!(
                "edge {} exceeds lattice size {}",
                self.edge, lat.size
            )));
        }
        for &x in &self.origin {
            let fits = match lat.boundary {
                Boundary::Periodic => x < lat.size,
                Boundary::Open => x + self.edge <= lat.size,
            };
            if !fits {
                return Err(Error::RegionOutOfBounds(format!(
                    "cube at {:?} with edge {} leaves the open lattice",
                    self.origin, self.edge
                )));
            }
        }
        Ok(())
    }

    fn site_at_offset(&self, lat: &LatticeSpec, offset: &[usize]) -> usize {
        self.origin
            .iter()
            .zip(offset)
            .fold(0, |acc, (&o, &dx)| acc * lat.size + (o + dx) % lat.size)
    }

    fn offsets(&self) -> impl Iterator<Item = Vec<usize>> + '_ {
        let d = self.origin.len();
        let total = self.edge.pow(d as u32);
        (0..total).map(move |mut k| {
            let mut off = vec![0; d];
            for slot in off.iter_mut().rev() {
                *slot = k % self.edge;
                k /= self.edge;
            }
            off
        })
    }

    /// Sites of the cube, ascending.
    pub fn sites(&self, lat: &LatticeSpec) -> Result<Vec<usize>> {
        self.validate(lat)?;
        let mut out: Vec<usize> = self.offsets().map(|o| self.site_at_offset(lat, &o)).collect();
        out.sort_unstable();
        Ok(out)
    }

    pub fn contains(&self, lat: &LatticeSpec, site: usize) -> bool {
        lat.coords(site).iter().zip(&self.origin).all(|(&x, &o)| {
            let rel = (x + lat.size - o) % lat.size;
            rel < self.edge
        })
    }

    /// `(interior, boundary)`: interior offsets lie in `{r,…,edge−r−1}^d`.
    pub fn split(&self, lat: &LatticeSpec) -> Result<(Vec<usize>, Vec<usize>)> {
        self.validate(lat)?;
        let r = self.radius;
        let (mut interior, mut boundary) = (Vec::new(), Vec::new());
        for off in self.offsets() {
            let site = self.site_at_offset(lat, &off);
            let inner = off.iter().all(|&x| x >= r && x + r < self.edge);
            if inner {
                interior.push(site);
            } else {
                boundary.push(site);
            }
        }
        interior.sort_unstable();
        boundary.sort_unstable();
        Ok((interior, boundary))
    }
}

/// Exact boundary size `l^d − max(l − 2r, 0)^d`.
pub fn boundary_count(d: usize, l: usize, r: usize) -> usize {
    l.pow(d as u32) - l.saturating_sub(2 * r).pow(d as u32)
}

/// Counting bound `2 d r l^(d−1)` on the boundary size.
pub fn boundary_count_bound(d: usize, l: usize, r: usize) -> usize {
    2 * d * r * l.pow(d as u32 - 1)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RegionPartition {
    pub edge: usize,
    pub cubes: Vec<Region>,
}

impl RegionPartition {
    pub fn len(&self) -> usize {
        self.cubes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cubes.is_empty()
    }

    pub fn cube_sites(&self, lat: &LatticeSpec) -> Result<Vec<Vec<usize>>> {
        self.cubes.iter().map(|c| c.sites(lat)).collect()
    }

    /// Index of the cube containing `site`.
    pub fn cube_of(&self, lat: &LatticeSpec, site: usize) -> Option<usize> {
        self.cubes.iter().position(|c| c.contains(lat, site))
    }
}

/// Tile the lattice with `M = n^d / l^d` cubes of edge `l`, in row-major
/// order of their origins.
pub fn partition_lattice(lat: &LatticeSpec, edge: usize, radius: usize) -> Result<RegionPartition> {
    if edge == 0 || !lat.size.is_multiple_of(edge) {
        return Err(Error::Divisibility {
            edge,
            size: lat.size,
        });
    }
    let per_axis = lat.size / edge;
    let count = per_axis.pow(lat.dim as u32);
    let cubes = (0..count)
        .map(|mut k| {
            let mut origin = vec![0; lat.dim];
            for slot in origin.iter_mut().rev() {
                *slot = (k % per_axis) * edge;
                k /= per_axis;
            }
            Region {
                origin,
                edge,
                radius,
            }
        })
        .collect();
    Ok(RegionPartition { edge, cubes })
}
