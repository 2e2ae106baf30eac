use std::fmt;

use sighedge_core::Error;

/// Process exit status for each failure class.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExitKind {
    Config = 2,
    Data = 3,
    Numeric = 4,
}

#[derive(Debug)]
pub struct Failure {
    pub kind: ExitKind,
    pub source: anyhow::Error,
}

impl Failure {
    pub fn new(kind: ExitKind, source: impl Into<anyhow::Error>) -> Self {
        Self {
            kind,
            source: source.into(),
        }
    }

    pub fn config(msg: impl fmt::Display) -> Self {
        Self::new(ExitKind::Config, anyhow::anyhow!("{msg}"))
    }

    pub fn data(msg: impl fmt::Display) -> Self {
        Self::new(ExitKind::Data, anyhow::anyhow!("{msg}"))
    }

    pub fn exit_code(&self) -> i32 {
        self.kind as i32
    }

    pub fn context(self, msg: impl fmt::Display + Send + Sync + 'static) -> Self {
        Self {
            kind: self.kind,
            source: self.source.context(msg),
        }
    }
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:#}", self.source)
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let kind = match e {
            Error::InvalidSpec(_)
            | Error::InvalidLambda(_)
            | Error::InvalidRefinement(_)
            | Error::BadCoordinate { .. }
            | Error::UnsupportedPayoff(_)
            | Error::DepthTooLarge { .. } => ExitKind::Config,
            Error::NonFiniteKernel
            | Error::NonFinitePayoff { .. }
            | Error::SolveFailed(_)
            | Error::NonPositiveSpot(_) => ExitKind::Numeric,
            _ => ExitKind::Data,
        };
        Self::new(kind, e)
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Self::new(ExitKind::Data, e)
    }
}
