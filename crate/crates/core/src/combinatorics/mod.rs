//! Exact bookkeeping of fixed-point data: the signature formula as an
//! identity in `g`, the weight lemmas, `Φ±`, enumeration of admissible
//! configurations and the replay of the equality cases. Integers and
//! rationals only; no floating point.

pub mod cases;
pub mod config;
pub mod enumerate;
pub mod jang;
pub mod phi;
pub mod poly;
pub mod signature;

pub use cases::{case_analysis, CaseReport, PhiStatus, Topology};
pub use config::{BoltData, FixedPointConfig, NutData};
pub use enumerate::{enumerate_configs, BoltBounds, Enumeration, EnumerationBounds};
pub use jang::{jang_lemma_checks, JangReport, Lemma};
pub use phi::{phi_values, z_value};
pub use poly::{IntPolynomial, IntRationalFunction};
pub use signature::{check_signature_identity, g_signature_rhs, SignatureCertificate};
