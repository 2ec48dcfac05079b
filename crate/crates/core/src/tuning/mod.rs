//! Parameter bounds, auxiliary points, disjointness tests and the
//! minimum-norm problems that certify the controller's hypotheses.

mod auto;
pub(crate) mod bounds;
mod disjoint;
mod points;
mod radii;

pub use auto::{
    auto_tune, dilated_pair_values, escape_pair_values, max_epsilon_for_vehicle_radius, min_pairwise_distance,
    mirror_point, pairwise_weak_disjoint, sufficiently_disjoint, tuned_ri_disjoint, validate_params, validate_with,
    ObstacleReport, PairValue, ParamOverrides, TuneOptions, Tuned, TuningReport, Violation, DISJOINT_MARGIN,
};
pub use bounds::{cos_vartheta, delta_lower, mu_bar, theta_bar, vartheta, vartheta_bar};
pub use disjoint::{min_metric_over, strong_disjoint, weak_disjoint};
pub use points::avoidance_points;
pub use radii::{in_r, min_norm_helmet, min_norm_helmet_star, EscapeRegion};
