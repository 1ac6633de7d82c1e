//! Multiclass proper losses as supergradients of concave, 1-homogeneous
//! Bayes risks, with antipolar losses, normalization, maximum shifting,
//! Bregman regret and M-sum composition.

pub mod calculus;
pub mod divergence;
pub mod error;
pub mod families;
pub mod grid;
pub mod loss;
pub mod numeric;
pub mod optim;
pub mod par;
pub mod polar;
pub mod properness;
pub mod spec;
pub mod vector;
pub mod verify;

pub use error::{GeomError, Result};
pub use grid::{simplex_grid, SimplexGrid};
pub use loss::{BayesRisk, FnRisk, LossModel, ProperLoss};
pub use numeric::numeric_supergradient;
pub use par::Execution;
pub use properness::{check_properness, check_properness_with, PropernessReport, Violation};
pub use vector::{inner, normalize_direction, LossVector, PosVector};
pub use calculus::{
    compose, dual_msum, dual_msum_solve, msum, normalize_canonical, scale_translate, shift_maximum, DualSolution,
    MSumMode, MSumSpec, Normalization,
};
pub use divergence::{anti_sip, bregman, regret_report, weight_function, RegretReport};
pub use polar::{
    antigauge, antigauge_bisection, antipolar_bayes_risk, antipolar_bayes_risk_with, antipolar_loss,
    canonical_link_composite, check_pseudo_inverse, check_pseudo_inverse_points, numeric_antipolar, substitute,
    AntipolarMethod, AntipolarResult, CanonicalLink, Method, PseudoInverseReport,
};
pub use spec::{parse_msum_spec, parse_spec, ParseError};
pub use verify::{verify_all, verify_all_with, CheckResult, SuiteReport, Tolerances};
