use thiserror::Error;

/// Errors surfaced by the fallible operations of the engine.
///
/// Mathematical failures (certification checks that come back false) are not
/// errors; they are carried in the reports. These variants cover structural
/// problems and solver breakdowns.
#[derive(Debug, Error)]
pub enum CoreError {
    #[error("backend mismatch: {0}")]
    BackendMismatch(String),

    #[error("malformed geometry data: {0}")]
    Malformed(String),

    #[error("grid band limit exceeded on axis {axis}: band {band} > Nyquist {nyquist}")]
    BandLimit { axis: usize, band: usize, nyquist: usize },

    #[error("two-projection iteration did not converge within {max_iter} steps (residual {residual:.3e})")]
    NonConvergence { max_iter: usize, residual: f64 },

    #[error("no operator norm available: {0}")]
    NoNorm(String),

    #[error("frame degrees are not all homogeneous; σ_θ is undefined")]
    NonHomogeneousFrame,

    #[error("geometry is not concordant: {0}")]
    NotConcordant(String),

    #[error("dagger-concordance fails: residual {residual:.3e}")]
    DagConcordance { residual: f64 },

    #[error("closed-form hypothesis fails: ‖W† − (2P−1)(2Q−1)W‖ = {residual:.3e}")]
    CyclicityHypothesis { residual: f64 },

    #[error("frames do not present the same module: {0}")]
    IncompatibleFrames(String),

    #[error("lift corrections T_j are required for a non-closed frame")]
    MissingLifts,

    #[error("linear system is singular or inconsistent: {0}")]
    NoSolution(String),
}
