use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// Binning onto the output grid dropped more than the tolerated mass.
    #[error("output grid misses {missed:.3e} of the spectral mass")]
    Coverage { missed: f64 },

    #[error("envelope is not contained in the {window_ps} ps delay window")]
    WindowTooShort { window_ps: f64 },

    #[error(
        "delay step {step_ps} ps aliases the band: Nyquist limit {nyquist_thz} THz, band reaches {band_max_thz} THz"
    )]
    Aliasing {
        step_ps: f64,
        nyquist_thz: f64,
        band_max_thz: f64,
    },

    #[error("trace carries no oscillating signal")]
    NoSignal,

    #[error("non-uniform delay grid at sample {index}")]
    NonUniformGrid { index: usize },

    #[error("Hermitian symmetry broken by {deviation:.3e}")]
    Asymmetry { deviation: f64 },

    #[error("malformed input: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }
}
