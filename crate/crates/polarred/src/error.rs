//! Error type shared by all modules.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("matrix is not anti-hermitian (residual {residual:.3e})")]
    NotAntiHermitian { residual: f64 },

    #[error("matrix is not unitary (residual {residual:.3e})")]
    NotUnitary { residual: f64 },

    #[error("configuration within {eps:.1e} of a singular orbit stratum: {detail}")]
    NearSingular { eps: f64, detail: String },

    #[error("point outside the open alcove: {0}")]
    OutsideAlcove(String),

    #[error("spin vector has a component along the isotropy algebra (norm {0:.3e})")]
    SpinNotTransverse(f64),

    #[error("coadjoint orbit base point violates the moment condition: {0}")]
    MomentCondition(String),

    #[error("section validation failed: {0}")]
    SectionInvalid(String),

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error("not supported: {0}")]
    NotSupported(String),

    #[error("config error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}
