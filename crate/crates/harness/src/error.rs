use std::path::PathBuf;

#[derive(Debug, thiserror::Error)]
pub enum HarnessError {
    #[error("{0}")]
    Config(String),
    #[error("cannot parse config file {path}: {source}")]
    Parse {
        path: PathBuf,
        #[source]
        source: toml::de::Error,
    },
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("run failed at f={f}, m={m}, seed={seed}: {source}")]
    Run {
        f: u64,
        m: usize,
        seed: u64,
        #[source]
        source: cpsoc_core::Error,
    },
    #[error("malformed results file: {0}")]
    Results(String),
}

impl HarnessError {
    /// Process exit code: 1 for configuration problems, 2 for everything that fails later.
    pub fn exit_code(&self) -> i32 {
        match self {
            HarnessError::Config(_) | HarnessError::Parse { .. } => 1,
            _ => 2,
        }
    }

    pub(crate) fn config(field: &str, reason: &str) -> Self {
        HarnessError::Config(format!("invalid configuration: `{field}` {reason}"))
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        HarnessError::Io {
            path: path.into(),
            source,
        }
    }
}

impl From<cpsoc_core::Error> for HarnessError {
    fn from(e: cpsoc_core::Error) -> Self {
        HarnessError::Config(e.to_string())
    }
}
