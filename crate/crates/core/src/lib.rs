//! Structural time-series econometrics: stationarity and cointegration tests,
//! reduced-form VAR diagnostics, AB-model structural VARs, impulse responses and
//! variance decompositions, and a config-driven pipeline tying them together.

pub mod coint;
pub mod dist;
pub mod dynamics;
pub mod error;
pub mod hac;
pub mod linalg;
pub mod pipeline;
pub mod reference;
pub mod sim;
pub mod svar;
pub mod tscore;
pub mod unitroot;
pub mod varkit;

pub use error::{Error, Result};
