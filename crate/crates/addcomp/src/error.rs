//! Unified error type.
//!
//! Every fallible operation in the crate returns [`Result`]. The variants
//! are grouped by *failure class* rather than by module so the command-line
//! driver can map them onto stable exit codes (see [`Error::exit_code`]).

use std::path::PathBuf;

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;

/// All failure classes produced by the library and the CLI driver.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// Invalid configuration or parameter values (bad λ list, discount out
    /// of range, window 0, d out of range, ...).
    #[error("config: {0}")]
    Config(String),

    /// A referenced input file does not exist or cannot be opened.
    #[error("missing input {path}: {source}")]
    MissingInput {
        path: PathBuf,
        source: std::io::Error,
    },

    /// Malformed data inside an otherwise readable input (bad table line,
    /// non-UTF-8 corpus, unparsable dataset row, unknown target key).
    #[error("data: {0}")]
    Data(String),

    /// A computation could not produce a meaningful value (constant series
    /// for a correlation, empty phrase set, no valid power-law candidate,
    /// divergent training).
    #[error("computation: {0}")]
    Computation(String),

    /// Writing an output artifact failed.
    #[error("output {path}: {source}")]
    Output {
        path: PathBuf,
        source: std::io::Error,
    },
}

impl Error {
    /// Stable process exit code for the CLI: `2` usage (handled by clap),
    /// `3` config, `4` missing input, `5` malformed data, `6` computation,
    /// `7` output.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Config(_) => 3,
            Error::MissingInput { .. } => 4,
            Error::Data(_) => 5,
            Error::Computation(_) => 6,
            Error::Output { .. } => 7,
        }
    }

    /// Short machine-readable class name used in the CLI error line.
    pub fn class(&self) -> &'static str {
        match self {
            Error::Config(_) => "config",
            Error::MissingInput { .. } => "missing-input",
            Error::Data(_) => "data",
            Error::Computation(_) => "computation",
            Error::Output { .. } => "output",
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exit_codes_are_distinct_and_stable() {
        let errs = [
            Error::Config("x".into()),
            Error::MissingInput {
                path: "p".into(),
                source: std::io::Error::new(std::io::ErrorKind::NotFound, "nf"),
            },
            Error::Data("x".into()),
            Error::Computation("x".into()),
            Error::Output {
                path: "p".into(),
                source: std::io::Error::new(std::io::ErrorKind::Other, "w"),
            },
        ];
        let codes: Vec<i32> = errs.iter().map(Error::exit_code).collect();
        assert_eq!(codes, vec![3, 4, 5, 6, 7]);
        let mut dedup = codes.clone();
        dedup.dedup();
        assert_eq!(dedup.len(), codes.len());
    }

    #[test]
    fn display_includes_class_detail() {
        let e = Error::Computation("no phrases".into());
        assert_eq!(e.to_string(), "computation: no phrases");
        assert_eq!(e.class(), "computation");
    }
}
