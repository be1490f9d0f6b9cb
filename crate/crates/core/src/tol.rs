//! Numerical tolerances shared across the crate.
//!
//! Every report that leaves the crate echoes these values through
//! [`Tolerances::current`].

use serde::Serialize;

/// `|<x|x>| <= TAU_ISO` on unit representatives counts as isotropic.
pub const TAU_ISO: f64 = 1e-9;
/// `|<x|y>| > TAU_TRANS` on unit representatives counts as transverse.
pub const TAU_TRANS: f64 = 1e-9;
/// Relative cutoff for Gram eigenvalue signs.
pub const TAU_SIG_REL: f64 = 1e-9;
/// Coordinates below this are treated as zero by sign canonicalization.
pub const CANON_ZERO: f64 = 1e-12;
/// Maximum `||M^T J M - J||_inf` accepted for a generator.
pub const TAU_ISOM: f64 = 1e-9;
/// Slack for the log-moduli symmetry relations and modulus-one detection.
pub const TAU_SPEC: f64 = 1e-7;
/// Default proximality gap.
pub const EPS_GAP: f64 = 1e-6;
/// Default relative threshold of the O(n,1) conjugacy test.
pub const TAU_CONJ: f64 = 1e-8;
/// Relator residual bound in matrix infinity-norm.
pub const TAU_REL: f64 = 1e-7;
/// Relative singular-value cutoff for rank decisions.
pub const TAU_RANK: f64 = 1e-8;
/// Invariance residual bound for a reported invariant subspace.
pub const TAU_INV: f64 = 1e-7;
/// Default dedup radius for harvested boundary points.
pub const DEDUP_RADIUS: f64 = 1e-6;
/// Pairs closer than this are skipped by the distance-decreasing check.
pub const DELTA_SEP: f64 = 1e-4;
/// Slack added to the right-hand side of the distance-decreasing check.
pub const TAU_LIP: f64 = 1e-9;
/// Local slopes below `1 - TAU_SLOPE` count as spacelike.
pub const TAU_SLOPE: f64 = 1e-3;
/// Rounding quantum for matrix dedup keys.
pub const DEDUP_QUANTUM: f64 = 1e-8;
/// Agreement required between eigenvector and power-iteration fixed points.
pub const TAU_FIXED: f64 = 1e-8;
/// Angular distance by which a harvested point may move under its source word.
pub const TAU_SOURCE_FIXED: f64 = 1e-7;
/// Upper verdict threshold on the cone ratio for "Fuchsian".
pub const VERDICT_FUCHSIAN_MAX: f64 = 1e-6;
/// Lower verdict threshold on the cone ratio for "Zariski dense".
pub const VERDICT_DENSE_MIN: f64 = 1e-2;

#[derive(Debug, Clone, Serialize, PartialEq)]
pub struct Tolerances {
    pub tau_iso: f64,
    pub tau_trans: f64,
    pub tau_sig_rel: f64,
    pub tau_isom: f64,
    pub tau_spec: f64,
    pub eps_gap: f64,
    pub tau_conj: f64,
    pub tau_rel: f64,
    pub tau_rank: f64,
    pub tau_inv: f64,
    pub dedup_radius: f64,
    pub delta_sep: f64,
    pub tau_lip: f64,
    pub tau_slope: f64,
    pub dedup_quantum: f64,
    pub tau_fixed: f64,
    pub tau_source_fixed: f64,
    pub verdict_fuchsian_max: f64,
    pub verdict_dense_min: f64,
}

impl Tolerances {
    pub fn current() -> Self {
        Self {
            tau_iso: TAU_ISO,
            tau_trans: TAU_TRANS,
            tau_sig_rel: TAU_SIG_REL,
            tau_isom: TAU_ISOM,
            tau_spec: TAU_SPEC,
            eps_gap: EPS_GAP,
            tau_conj: TAU_CONJ,
            tau_rel: TAU_REL,
            tau_rank: TAU_RANK,
            tau_inv: TAU_INV,
            dedup_radius: DEDUP_RADIUS,
            delta_sep: DELTA_SEP,
            tau_lip: TAU_LIP,
            tau_slope: TAU_SLOPE,
            dedup_quantum: DEDUP_QUANTUM,
            tau_fixed: TAU_FIXED,
            tau_source_fixed: TAU_SOURCE_FIXED,
            verdict_fuchsian_max: VERDICT_FUCHSIAN_MAX,
            verdict_dense_min: VERDICT_DENSE_MIN,
        }
    }
}
