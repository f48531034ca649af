//! Numerical toolkit for the heat equation with a nonlocal point feedback
//! `u_t + A_L u = -f(beta u(x0)) delta_0` on `(-L, L)` or on the line.

pub mod acceptance;
pub mod discretization;
pub mod error;
pub mod kernels;
pub mod modes;
pub mod params;
pub mod pde_sim;
pub mod popov;
pub mod roots;
pub mod spectrum;
pub mod volterra;

pub use error::{Error, Result};
pub use modes::ModeVector;
pub use params::{ComplexValue, Length, ProblemParams, SeriesControl};
