//! Laplace transforms and the ratio `L_Y / L_X` used by the convolution
//! order check.

pub mod jet;
pub mod laplace;
pub mod phi;
pub mod poly;
pub mod rational;

pub use jet::Jet;
pub use laplace::{
    exact_laplace, laplace, laplace_nonnegative, laplace_of_sum, ExpRational, LaplaceRep, QuadratureLaplace, QUADRATURE_JET_ORDER,
};
pub use phi::{complete_monotonicity_check, phi_ratio, Estimate, PhiDerivative, PhiRatio};
pub use poly::Poly;
pub use rational::Rational;
