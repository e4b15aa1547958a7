//! Volterra symbol calculus with polynomial coefficients: composition, heat
//! parametrices, Gaussian kernels, equivariant fiber integrals and Getzler models.

pub mod getzler;
pub mod kernel;
pub mod multi;
pub mod symbol;

pub use getzler::{getzler_order_and_model, model_product_check, GetzlerOperator, ModelOperator, OpKey};
pub use kernel::{fiber_integral, fiber_integral_iq, GaussianKernel, HeatSeries, KernelKey};
pub use multi::MultiIndex;
pub use symbol::{
    asymptotic_coefficients, heat_parametrix, parametrix_defect, symbol_compose, symbol_to_kernel,
    AsymptoticCoefficients, Parametrix, SymbolKey, VolterraSymbol,
};
