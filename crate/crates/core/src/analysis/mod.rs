//! Combinatorial sharing quantities and instance-dependent functionals.

pub mod functionals;
pub mod quadrature;
pub mod setcover;
pub mod sharing;

pub use functionals::{
    condition_check, contention_star, eps_star, m_eps, m_eps_with, m_lp, r_t_max_lower_estimate, t_r_functionals,
    ConditionReport, Functionals, GAP_TOL, Z_FLOOR,
};
pub use quadrature::{integrate_pair, QuadTolerance};
pub use setcover::{h1, h2_minus, h2_plus, min_cover, min_trapping_cover, Cover, TrappingCover};
pub use sharing::{
    bar_ht, bar_ht_with, ht_bounds, min_h1, phi, phi_with, sharing_profile, sufficient_improvement, BarHt,
    SharingProfile, Sign, SubsetTable, ENUMERATION_CAP, ENUMERATION_HARD_CAP,
};
