//! Self-dual vortex profiles and lattice field synthesis: isolated planar
//! vortices and recovery pairs concentrating on straight loops in `T³`.

mod profile;
mod synth;

pub use profile::{ProfileEnergy, ProfileSample, VortexProfile, DEFAULT_R_MAX, DEFAULT_STEP, DEFAULT_TOL};
pub use synth::{
    build_recovery_pair, straight_loops, synthesize, synthesize_planar, Cutoff, PlacedVortex, StraightLoop,
};

use crate::Result;

/// Profile of degree `k` on `[0, r_max]`.
pub fn solve_profile(k: i64, r_max: f64, tol: f64) -> Result<VortexProfile> {
    VortexProfile::solve(k, r_max, tol)
}

/// Energy of a profile and its relative defect from `2π|k|`.
pub fn profile_energy(profile: &VortexProfile) -> ProfileEnergy {
    profile.energy()
}
