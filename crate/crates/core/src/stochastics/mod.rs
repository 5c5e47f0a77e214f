//! Random-number streams and the probability distributions used by the
//! models and filters.

mod discrete;
mod gaussian;
mod rng;
mod wrapped_cauchy;

pub use discrete::{
    multinomial_ancestors, multinomial_counts, systematic_ancestors, uniform_choice, uniform_index,
};
pub use gaussian::{
    cholesky_with_jitter, gaussian_logpdf, gaussian_sample, normal_logpdf, GaussianSampler,
    LN_SQRT_2PI,
};
pub use rng::RngStream;
pub use wrapped_cauchy::{wrapped_cauchy_logpdf, wrapped_cauchy_sample, WrappedCauchyParams};
