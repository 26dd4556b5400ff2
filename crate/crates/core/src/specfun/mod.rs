//! Special functions, probability tails and the random-number contract.

mod bessel;
mod gamma;
mod gof;
mod rng;

pub use bessel::{bessel_i, scaled_bessel_i, scaled_bessel_i0};
pub use gamma::{
    chi_squared_cdf, chi_squared_sf, ln_gamma, regularized_gamma_p, regularized_gamma_q,
};
pub use gof::{ks_distance, multinomial_gof, GofOutcome};
pub use rng::{poisson_sample, PoissonSampler, RngState, MAX_POISSON_RATE};
