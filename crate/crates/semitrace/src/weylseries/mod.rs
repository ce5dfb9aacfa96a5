//! Graded Weyl algebra in `(u, x′, ξ′, x″, ξ″; h)`, Koszul complexes, Hodge
//! decomposition and the order-by-order normal form of the model Dirac symbol.
//!
//! Weights: `h` counts 2, every other variable 1. The variable `u` stands for
//! `ξ₀ + φ̄` with `φ̄ = T + φ̄₂(x″, ξ″)`; coefficients are constant in `x₀`.

mod algebra;
mod koszul;
mod linalg;
mod normal;
mod scalar;
mod series;

pub use algebra::{Generator, WeylAlgebra};
pub use koszul::{
    bar_quadratic, c0_basis, c0_series, forms_from_spin, frame_to_gamma, twisted_laplacian0,
    twisted_laplacian0_composed, FormRecord, KoszulElement, KoszulOp, WeylModel,
};
pub use normal::{
    birkhoff_normal_form, harmonic_basis, hodge_decompose, model_symbol, normal_form_harmonics, normal_form_residual, ConjugationStep,
    HodgeParts, NormalForm,
};
pub use scalar::{QSqrt2, Scalar};
pub use series::{
    monomials_of_weight, monomials_up_to, weight, EvalPoint, Mat, Monomial, Series, Slot, SpinSeries, TermRecord,
};
