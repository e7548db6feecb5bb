//! Phase sensitivity, signal-to-noise ratio and atom-light correlations of a lossy
//! SU(1,1) interferometer built from two Raman processes, plus a truncated Fock-space
//! simulator that checks the closed forms.

pub mod correlations;
pub mod error;
pub mod fock;
pub mod metrology;
pub mod model;
pub mod moments;
pub mod sweep;

pub use error::{Error, Result};
pub use model::{CoherentInput, InterferometerParams, LossParams, RamanGain};
pub use moments::{Observable, ObservableStats};
