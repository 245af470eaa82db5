//! Sparse random 0/1 matrices: exact corank, Karp-Sipser peeling, minimal
//! dependency classification and gradient-code evaluation.

pub mod asym;
pub mod depclass;
pub mod ensembles;
pub mod error;
pub mod exactlin;
pub mod gradcode;
pub mod matrix;
pub mod peel;
pub mod probes;

pub use error::{Error, Result};
pub use exactlin::{KernelVector, PrimeSet, RankReport};
pub use matrix::SparseBinMatrix;
pub use ensembles::{ConfigModelSample, Seed};
pub use peel::{CoreResult, KsResult};
pub use depclass::{DepClass, DependencyCensus, DependencyRecord};
pub use gradcode::{AdversarialResult, DecodingReport, MeanEstimate, SpectralBound};
pub use probes::ProbeReport;
