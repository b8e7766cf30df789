use thiserror::Error;

/// Library-wide error type. Variants are coarse categories so callers can
/// match on failure class without parsing message strings.
#[derive(Debug, Error)]
pub enum Error {
    #[error("missing band: {0}")]
    MissingBand(String),

    #[error("alignment mismatch: {0}")]
    Alignment(String),

    #[error("invalid parameter: {0}")]
    Parameter(String),

    #[error("degenerate input: {0}")]
    DegenerateInput(String),

    #[error("degenerate geometry: {0}")]
    DegenerateGeometry(String),

    #[error("data error: {0}")]
    Data(String),

    #[error("out of bounds: {0}")]
    Bounds(String),

    #[error("validation failed: {0}")]
    Validation(String),

    #[error("empty input: {0}")]
    EmptyInput(String),

    #[error("{zero_pixels} pixels have zero coverage")]
    IncompleteCoverage { zero_pixels: usize },

    #[error(
        "no subset met the {limit_pp} pp deviation limit after {attempts} attempts \
         (best found: {best_deviation_pp:.3} pp)"
    )]
    ConstraintInfeasible {
        limit_pp: f64,
        best_deviation_pp: f64,
        attempts: u64,
    },

    #[error("stage '{stage}' failed: {source}")]
    Stage {
        stage: String,
        #[source]
        source: Box<Error>,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error("TIFF error: {0}")]
    Tiff(#[from] tiff::TiffError),

    #[error("JSON error: {0}")]
    Json(#[from] serde_json::Error),

    #[error("CSV error: {0}")]
    Csv(#[from] csv::Error),
}

impl Error {
    /// Wrap an error with the pipeline stage it occurred in.
    pub fn in_stage(self, stage: &str) -> Self {
        Error::Stage {
            stage: stage.to_string(),
            source: Box::new(self),
        }
    }

    /// Stable machine-readable kind string (used by the CLI's error JSON).
    pub fn kind(&self) -> &'static str {
        match self {
            Error::MissingBand(_) => "missing_band",
            Error::Alignment(_) => "alignment",
            Error::Parameter(_) => "parameter",
            Error::DegenerateInput(_) => "degenerate_input",
            Error::DegenerateGeometry(_) => "degenerate_geometry",
            Error::Data(_) => "data",
            Error::Bounds(_) => "bounds",
            Error::Validation(_) => "validation",
            Error::EmptyInput(_) => "empty_input",
            Error::IncompleteCoverage { .. } => "incomplete_coverage",
            Error::ConstraintInfeasible { .. } => "constraint_infeasible",
            Error::Stage { source, .. } => source.kind(),
            Error::Io(_) => "io",
            Error::Tiff(_) => "tiff",
            Error::Json(_) => "json",
            Error::Csv(_) => "csv",
        }
    }

    /// Innermost stage name, if this error was wrapped by pipeline stages.
    pub fn stage(&self) -> Option<&str> {
        match self {
            Error::Stage { stage, .. } => Some(stage),
            _ => None,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
