use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("grid too coarse: n_r={n_r}, n_theta={n_theta} (need n_r >= 8, n_theta >= 16 and even)")]
    GridTooCoarse { n_r: usize, n_theta: usize },

    #[error("invalid domain: {0}")]
    InvalidDomain(String),

    #[error("fields live on different grids")]
    GridMismatch,

    #[error("non-finite value in {0}")]
    NonFinite(&'static str),

    #[error("form has the wrong bidegree: {0}")]
    WrongBidegree(&'static str),

    #[error("loop is not closed (first and last samples differ by {gap:.3e})")]
    LoopNotClosed { gap: f64 },

    #[error("loop sample {index} at ({re}, {im}) leaves the domain")]
    LoopOutsideDomain { index: usize, re: f64, im: f64 },

    #[error("phase is not Morse on the domain: |Hessian|={hessian:.3e} at ({re}, {im})")]
    NotMorse { hessian: f64, re: f64, im: f64 },

    #[error("point ({re}, {im}) lies inside the exclusion set (distance {distance:.3e} < {radius:.3e})")]
    InsideExclusion { re: f64, im: f64, distance: f64, radius: f64 },

    #[error("amplitude support touches a critical point at distance {0:.3e}")]
    SupportHitsCritical(f64),

    #[error("potential is not real: max |X_{{1,0}} - conj(X_{{0,1}})| = {0:.3e}")]
    NotReal(f64),

    #[error("eigenvalue collision: condition estimate {0:.3e}")]
    EigenvalueCollision(f64),

    #[error("iterative solver stalled: relative residual {residual:.3e} after {iterations} iterations")]
    NotConverged { residual: f64, iterations: usize },

    #[error("Neumann series diverges: estimated operator norm {0:.4}")]
    NeumannDivergent(f64),

    #[error("|F| leaves the admissible range: min {min:.3e}, max {max:.3e}")]
    GaugeOutOfRange { min: f64, max: f64 },

    #[error("boundary data mismatch: {0}")]
    DataMismatch(String),

    #[error("winding integral {value:.6} is {distance:.3e} away from the nearest multiple of 2π")]
    WindingNotInteger { value: f64, distance: f64 },

    #[error("Θ vanishes on the loop (min |Θ| = {0:.3e})")]
    VanishingTheta(f64),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("check `{anchor}` failed: {detail}")]
    CheckFailed { anchor: String, detail: String },

    #[error("malformed input: {0}")]
    Parse(String),

    #[error("config: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
