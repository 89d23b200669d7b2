//! Solution engines for linear-deviation problems.

mod certificate;
mod eah;
mod ellipsoid;
mod pgd;
mod report;

pub use certificate::{extract_certificate, robust_value_lp, Certificate};
pub use eah::{deviation_radius, iteration_cap, solve_eah, CutKind, CutRecord, EahConfig, EahState};
pub use ellipsoid::{central_cut_log_det_drop, CutOutcome, Ellipsoid};
pub use pgd::{checkpoint_rounds, run_linear_swap_pgd, PgdConfig};
pub use report::{Method, RegretTrace, SolveReport, TraceRow};
