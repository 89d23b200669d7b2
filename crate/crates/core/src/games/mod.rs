//! Normal-form games as expected variational inequalities.

mod equilibria;
mod normal_form;
mod polymatrix;
mod region;

pub use equilibria::{
    average_cce_decomposition, game_gradient_field, phi_gap, pure_ce_violation, reduced_to_full, CceDecomposition,
    GapMode, PhiGap,
};
pub use normal_form::{NormalFormGame, MAX_ACTIONS, MAX_PLAYERS};
pub use polymatrix::{
    matching_pennies_spec, polymatrix_cycle_spec, polymatrix_zero_sum, PolymatrixEdge, PolymatrixSpec,
};
pub use region::{
    ce_marginal_feasible, hyperbola_distance, hyperbola_value, region_scan, HyperbolaDiagnostic, MarginalRegionScan,
    RegionCell, RegionConfig, RegionProgram, Verdict,
};
