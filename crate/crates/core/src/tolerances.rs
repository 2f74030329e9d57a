//! Numerical thresholds shared by the verifiers.

/// Relative residual below which an identity passes.
pub const REL_TOL: f64 = 1e-8;

/// Absolute residual below which a point counts as an exact match.
pub const ABS_FLOOR: f64 = 1e-10;

/// Smallest |det g| accepted by the curvature pipeline.
pub const DET_TOL: f64 = 1e-14;

/// Ricci and Killing residual allowed by the catalogue gate.
pub const GATE_TOL: f64 = 1e-9;

/// Coordinate margin kept away from axes and horizons when sampling.
pub const CHART_MARGIN: f64 = 1e-2;

/// Factor of b²/r⁴ below which (F±)² is treated as vanishing.
pub const MARS_SIMON_FLOOR: f64 = 1e-10;

/// Allowed negativity of V±(β) relative to its scale.
pub const POSITIVITY_SLACK: f64 = 1e-10;

/// Default jet order for identity checks.
pub const DEFAULT_ORDER: usize = 4;

/// Petrov thresholds: ‖S‖/‖W‖, relative spread of s², eigenvalue degeneracy.
pub const PETROV_S_OVER_W: f64 = 1e-7;
pub const PETROV_S2_SPREAD: f64 = 1e-6;
pub const PETROV_DEGENERACY: f64 = 1e-8;
