//! Complexity calculations behind the estimators: exact suprema over
//! norm-constrained sets, Monte-Carlo mean widths and Rademacher
//! complexities, fixed-point radii with numerical certificates,
//! closed-form radii for the elastic net and for power-law kernel
//! spectra, and margin (Bernstein-type) constants for analytic noise
//! laws.

mod bernstein;
mod closed_forms;
mod fixed_point;
mod width;

pub use bernstein::{
    bernstein_gamma_huber, bernstein_gamma_quantile, moment_growth_diagnostic,
    quantile_gamma_remark, quantile_localization_radius, BernsteinCheck, MomentRatio,
};
pub use closed_forms::{c_s_r, elastic_net_r_star, kernel_r_bar, ElasticNetRadii, KernelRadii};
pub use fixed_point::{
    fixed_point_solve, phi_ball_radius, Certificate, FixedPointProblem, FixedPointResult,
    ThresholdShape,
};
pub use width::{
    ellipsoid_ball_sup, gaussian_mean_width_mc, kernel_complexity_bound,
    rademacher_complexity_mc, sup_inner_product_l1l2, RademacherClass, WidthSet,
};
