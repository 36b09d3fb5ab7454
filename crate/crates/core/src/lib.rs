//! H₂ robustness of discrete-time consensus networks whose agents mix their
//! current neighbourhood average with a single snapshot taken `θ` steps ago.
//!
//! The protocol is
//!
//! ```text
//! x(t+1) = α φ(t) + (1−α) φ(t−θ) + ω(t),    φ(t) = (I − βL) x(t)
//! ```
//!
//! with white noise `ω`. The crate decides consensus ([`stability`]),
//! evaluates the steady-state mean-square deviation by several independent
//! routes ([`h2`]), estimates it by simulation ([`simulate`]) and searches
//! over depths and parameters ([`search`]).
//!
//! ```
//! use memcons_core::{graph, h2, stability::ProtocolParams};
//!
//! let spec = graph::complete(3)?.spectrum()?;
//! let params = ProtocolParams::new(0.5, 1.0 / 6.0, 1)?;
//! let report = h2::h2_table_ii(&spec, &params)?;
//! assert!((report.value - 2.4).abs() < 1e-12);
//! # Ok::<(), memcons_core::Error>(())
//! ```

pub mod error;
pub mod graph;
pub mod h2;
pub mod search;
pub mod simulate;
pub mod stability;

pub use error::{Error, Result};
pub use graph::{Family, Spectrum, WeightedGraph};
pub use h2::{H2Report, Method};
pub use simulate::{SimConfig, SimResult};
pub use stability::ProtocolParams;
