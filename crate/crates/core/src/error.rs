//! Crate-wide error, for callers that drive several stages.

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error(transparent)]
    Geom(#[from] crate::geom::GeomError),
    #[error(transparent)]
    Triangulation(#[from] crate::triangulation::TriangulationError),
    #[error(transparent)]
    Gap(#[from] crate::gap::GapError),
    #[error(transparent)]
    Domain(#[from] crate::domain::DomainError),
    #[error(transparent)]
    Density(#[from] crate::density::DensityError),
    #[error(transparent)]
    Sample(#[from] crate::sampler::SampleError),
    #[error(transparent)]
    Optimize(#[from] crate::optimize::OptimizeError),
    #[error(transparent)]
    Analysis(#[from] crate::analysis::AnalysisError),
    #[error(transparent)]
    Io(#[from] crate::io::IoError),
}

impl Error {
    /// Whether the error comes from bad input or configuration rather than
    /// a broken internal invariant.
    pub fn is_config(&self) -> bool {
        use crate::sampler::SampleError as S;
        match self {
            Error::Domain(_) | Error::Density(_) | Error::Io(_) => true,
            Error::Sample(S::NonPositiveDensity(..) | S::EmptyDomain | S::NonDecreasingSchedule | S::InvalidConfig(_)) => true,
            Error::Optimize(crate::optimize::OptimizeError::InvalidConfig(_)) => true,
            Error::Analysis(a) => !matches!(a, crate::analysis::AnalysisError::Gap(_)),
            _ => false,
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
