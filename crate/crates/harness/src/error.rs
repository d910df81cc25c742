use thiserror::Error;

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("config parse error: {0}")]
    Parse(String),

    #[error("invalid config: {0}")]
    Validation(String),

    #[error("{stage} failed: {source}")]
    Run {
        stage: &'static str,
        #[source]
        source: phasefield_core::Error,
    },

    #[error("i/o error: {0}")]
    Io(String),

    #[error("check failed: {0}")]
    Check(String),
}

impl HarnessError {
    /// Process exit code: 1 for bad input or a failed check, 2 for aborts.
    pub fn exit_code(&self) -> i32 {
        match self {
            HarnessError::Parse(_) | HarnessError::Validation(_) | HarnessError::Check(_) => 1,
            HarnessError::Run { .. } | HarnessError::Io(_) => 2,
        }
    }

    pub(crate) fn run(stage: &'static str) -> impl FnOnce(phasefield_core::Error) -> HarnessError {
        move |source| HarnessError::Run { stage, source }
    }
}

impl From<std::io::Error> for HarnessError {
    fn from(e: std::io::Error) -> Self {
        HarnessError::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, HarnessError>;
