pub mod cli;
pub mod interpolation;
pub mod io;
pub mod matrices;
pub mod membership;
pub mod multiplier;
pub mod random;
pub mod report;
pub mod scalar;
pub mod sequences;
pub mod suite;
pub mod weights;
