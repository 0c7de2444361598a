//! Factor-revealing LPs: primal construction, a simplex solver, closed-form
//! dual certificates and the resulting approximation factors.

mod factor;
mod simplex;

pub use factor::{
    approximation_factor, build_primal, dual_certificate, solve_lp, u_closed_form, u_limit, verify_dual_feasible,
    CertificateForm, DualCertificate, DualCheck, FactorLp, LpRow, LpVariant, MAX_LP_HORIZON,
};
pub use simplex::{maximize, LpSolution, PIVOT_TOLERANCE};
