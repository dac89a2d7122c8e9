use thiserror::Error;

/// Errors raised across the toolkit.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("point `{label}` has non-positive or non-finite weight {weight}")]
    NegativeWeight { label: String, weight: f64 },

    #[error("duplicate point label `{0}`")]
    DuplicateLabel(String),

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("total masses differ: {left} vs {right}")]
    UnequalMass { left: f64, right: f64 },

    #[error("unknown label `{0}`")]
    UnknownLabel(String),

    #[error("plan marginals do not match: {0}")]
    MarginalMismatch(String),

    #[error("numerical failure: {0}")]
    NumericalFailure(String),

    #[error("brute-force oracle only handles uniform square instances up to 8x8: {0}")]
    OracleScopeExceeded(String),

    #[error("target site {site} receives {atoms} distinct value atoms")]
    SplitAtom { site: usize, atoms: usize },

    #[error("heavy value {0:?} matches no atom of the value law")]
    UnknownHeavyAtom(Vec<f64>),

    #[error("restriction to the value box is empty")]
    EmptyRestriction,

    #[error("map is not measure preserving: column {column} off by {discrepancy}")]
    NotMeasurePreserving { column: usize, discrepancy: f64 },

    #[error("polar inclusion not certified: max Fenchel gap {max_gap} exceeds {tol}")]
    InclusionNotCertified { max_gap: f64, tol: f64 },

    #[error("unknown gallery instance `{0}`")]
    UnknownGalleryName(String),

    #[error("duality certificate missing or failed: relative gap {0}")]
    CertificateMissing(f64),

    #[error("invalid input: {0}")]
    InvalidInput(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
