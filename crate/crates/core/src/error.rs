use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid lattice: {0}")]
    InvalidLattice(String),

    #[error("site {site} outside lattice of {sites} sites")]
    SiteOutOfRange { site: usize, sites: usize },

    #[error("region edge {edge} does not divide lattice size {size}")]
    Divisibility { edge: usize, size: usize },

    #[error("region does not fit the lattice: {0}")]
    RegionOutOfBounds(String),

    #[error("Hilbert dimension {dim} exceeds the configured cap {cap}")]
    DimensionCap { dim: usize, cap: usize },

    #[error("operator is not Hermitian (relative asymmetry {0:e})")]
    NotHermitian(f64),

    #[error("shape mismatch: {0}")]
    Shape(String),

    #[error("temperature must be positive, got {0}")]
    NonPositiveTemperature(f64),

    #[error("density matrix trace {0} deviates from 1")]
    TraceDeviation(f64),

    #[error("density matrix eigenvalue {0:e} is below the clipping tolerance")]
    NegativeEigenvalue(f64),

    #[error("region is empty")]
    EmptyRegion,

    #[error("site {0} is not inside the region")]
    NotInRegion(usize),

    #[error("missing boundary factorization for site {0}")]
    MissingFactorization(usize),

    #[error("target energy density {target} is not attainable (supremum {sup})")]
    Unsatisfiable { target: f64, sup: f64 },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("fit failed: {0}")]
    Fit(String),

    #[error("heat-capacity data: {0}")]
    Data(String),
}

pub type Result<T> = std::result::Result<T, Error>;
