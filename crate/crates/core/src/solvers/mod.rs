//! Interior-point solvers for the small convex programs behind the
//! beamformers: a complex Hermitian SDP, a successive geometric program for
//! power allocation, the block problem of zero-forcing under per-antenna
//! limits, and Gaussian randomization for rank-one extraction.

pub mod barrier;
pub mod beam;
pub mod gp;
pub mod sdp;
pub mod zfpa;

pub use beam::{randomize_rank_one, solve_leakage_constrained, solve_leakage_constrained_pa, BeamExtraction, LeakageBeam};
pub use gp::{solve_gp_power, GpProblem, GpSolution};
pub use sdp::{purify_rank, solve_sdp, SdpProblem, SdpSolution};
pub use zfpa::{solve_zf_pa, ZfPaSolution};

/// Tolerances shared by all solvers.
#[derive(Clone, Debug, PartialEq)]
pub struct SolverSettings {
    /// Relative constraint violation accepted in results.
    pub feasibility_tol: f64,
    /// Relative duality gap accepted in results.
    pub gap_tol: f64,
    /// `lambda_2 / lambda_1` at or below which a solution counts as rank one.
    pub rank_tol: f64,
    /// `lambda_2 / lambda_1` above which a two-constraint solve is rejected.
    pub rank_error_tol: f64,
    /// Barrier stopping target: `theta / t` relative to the objective.
    pub barrier_gap: f64,
    /// Absolute floor for the barrier stopping target.
    pub barrier_floor: f64,
    /// Barrier parameter growth per outer step.
    pub barrier_mu: f64,
    /// Cap on Newton steps across all outer steps.
    pub max_newton: usize,
    /// Cap on successive GP approximations.
    pub max_gp_iterations: usize,
}

impl Default for SolverSettings {
    fn default() -> Self {
        SolverSettings {
            feasibility_tol: 1e-7,
            gap_tol: 1e-6,
            rank_tol: 1e-5,
            rank_error_tol: 1e-3,
            barrier_gap: 1e-11,
            barrier_floor: 1e-13,
            barrier_mu: 16.0,
            max_newton: 600,
            max_gp_iterations: 100,
        }
    }
}
