use thiserror::Error;

/// Errors produced by the lattice, the steppers and the analysis routines.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid lattice spec: {0}")]
    InvalidSpec(String),

    #[error("invalid initial condition: {0}")]
    InvalidInitial(String),

    #[error("momentum {momentum} is not a lattice mode 2*pi*n/(N*lambda)")]
    NonLatticeMomentum { momentum: f64 },

    #[error("species {species} is not present in a {kind} process")]
    SpeciesNotPresent { species: String, kind: String },

    #[error("site {site} out of range for a ring of {n_sites} sites")]
    SiteOutOfRange { site: usize, n_sites: usize },

    #[error("process kind mismatch: expected {expected}, found {found}")]
    KindMismatch { expected: String, found: String },

    #[error("integer overflow at step {step}, site {site}")]
    Overflow { step: u64, site: usize },

    #[error("insufficient data: {0}")]
    InsufficientData(String),

    #[error("ill-defined observable: {0}")]
    IllDefined(String),
}

pub type Result<T> = std::result::Result<T, Error>;
