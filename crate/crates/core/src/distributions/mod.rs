//! Densities, distribution functions, and exact samplers.

mod gamma;
mod lomax;
mod model;
mod params;
mod sample;

pub use gamma::{
    gamma_cdf, gamma_ln_pdf, gamma_pdf, gamma_quantile, sample_exponential, sample_gamma,
};
pub use lomax::{
    lomax_cdf, lomax_ln_pdf, lomax_mean, lomax_pdf, lomax_quantile, lomax_variance, sample_lomax,
};
pub use model::{joint_logpdf, joint_pdf, sample_bivariate};
pub use params::{GammaParams, LomaxParams, ModelVariant, PseudoExpParams};
pub use sample::{BivariateSample, SufficientStats};
