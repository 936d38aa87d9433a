//! Small-ball probabilities of Green Gaussian processes in weighted `L2` norms.
//!
//! * [`model`]: operators, boundary conditions, weights and the expression language.
//! * [`theta`]: θ-determinants and limits of probability ratios between weights.
//! * [`spectrum`]: shooting and Nyström eigenvalue solvers, infinite eigenvalue products.
//! * [`kernels`]: grid covariance kernels and their transforms.
//! * [`smallball`]: sharp asymptotic formulas and exact/Monte Carlo probability oracles.
//! * [`catalog`]: ready-made boundary value problems of classical processes.

pub mod catalog;
pub mod kernels;
pub mod linalg;
pub mod model;
pub mod quadrature;
pub mod smallball;
pub mod spectrum;
pub mod theta;
