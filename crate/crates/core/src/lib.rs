//! Desk-scale synthesis and numerical certification of inverse-optimal,
//! input-to-state stabilizing feedback for homogeneous nonlinear plants
//! with scalar control and an output that penalizes both state and input.
//!
//! The toolkit is organized around the unit homogeneous sphere: degrees are
//! checked by dilation scaling, positivity is certified by refined sphere
//! minima, the feedback gain is selected from sphere constants, and the
//! finite-horizon cost identities are verified along simulated closed
//! loops.
//!
//! Modules:
//! - [`expr`]: the expression language plants are written in (parser,
//!   evaluator, symbolic differentiation with signed/absolute powers).
//! - [`homogeneity`]: dilations, the homogeneous norm, degree checks, and
//!   sphere optimization.
//! - [`lft`]: Legendre-Fenchel transforms on power-law class-K∞ functions
//!   and the Young-type inequality.
//! - [`sysdef`]: the plant class, validation, and Lie derivatives.
//! - [`fixtures`]: the four built-in example plants.
//! - [`synthesis`]: the constructive pipeline producing the feedback and
//!   its cost pieces.
//! - [`verify`]: sphere positivity, dissipation inequalities, HJI residual
//!   diagnostics, gain margins.
//! - [`sim`]: closed-loop integration, worst-case disturbances, cost and
//!   L₂-gain measurement.

// negated float comparisons like !(x > 0.0) deliberately reject NaN
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod expr;
pub mod fixtures;
pub mod homogeneity;
pub mod lft;
pub mod sim;
pub mod synthesis;
pub mod sysdef;
pub mod verify;

pub use expr::{parse, Expr};
pub use homogeneity::{Dilation, HomogeneousNorm, SphereBudget, SpherePoint};
pub use lft::PowerKInfinity;
pub use synthesis::{synthesize, synthesize_with_kappa, SynthesisConfig, SynthesizedController};
pub use sysdef::{HomogeneousSystem, LieDerivatives, LyapunovCandidate};
