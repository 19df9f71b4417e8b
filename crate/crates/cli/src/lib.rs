//! Configuration, orchestration and persistence for the `prefractal`
//! binary: every stage reads and writes plain files in one output
//! directory and records them in `manifest.json`.

pub mod config;
pub mod manifest;
pub mod pipeline;

use std::path::PathBuf;

pub use config::RunConfig;
pub use manifest::{Artifact, RunManifest};
pub use pipeline::{Pipeline, Stage};

use prefractal::Error;

pub const EXIT_VALIDATION: i32 = 2;
pub const EXIT_SOLVER: i32 = 3;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("config key `{key}`: {constraint}")]
    Config { key: String, constraint: String },

    #[error("missing upstream artifact {}: run the `{stage}` stage first", path.display())]
    MissingArtifact { path: PathBuf, stage: &'static str },

    #[error("{stage}: {source}")]
    Stage {
        stage: &'static str,
        #[source]
        source: Error,
    },

    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl CliError {
    pub fn is_validation(&self) -> bool {
        match self {
            CliError::Config { .. } | CliError::MissingArtifact { .. } => true,
            CliError::Stage { source, .. } => matches!(
                source.root(),
                Error::InvalidParameter(_)
                    | Error::InvalidIfs(_)
                    | Error::InvalidSimilitude(_)
                    | Error::UnknownTag(_)
                    | Error::LevelOverflow { .. }
                    | Error::NonConvexPolygon(_)
                    | Error::SelfIntersection { .. }
                    | Error::Parse { .. }
            ),
            CliError::Io { .. } => false,
        }
    }

    /// 2 for bad input, 3 for failures while computing or writing.
    pub fn exit_code(&self) -> i32 {
        if self.is_validation() {
            EXIT_VALIDATION
        } else {
            EXIT_SOLVER
        }
    }
}

#[cfg(doctest)]
#[doc = include_str!("../../../book/src/cli.md")]
mod book {}
