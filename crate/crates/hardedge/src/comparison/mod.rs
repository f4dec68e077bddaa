//! Test-function apparatus, the sandwich bound on the distribution of σ₁,
//! Helffer–Sjöstrand trace evaluation, and the Lindeberg swap experiment
//! with its evaluable comparison budget.

mod hs;
mod swap;
mod testfn;

pub use hs::{hs_trace, ChiCutoff, HsGrid};
pub use swap::{
    comparison_budget, comparison_budget_with_c, lindeberg_swap_experiment, SwapOutcome, BUDGET_C,
};
pub use testfn::{
    eval_test_function, sandwich_check, smoothstep, smoothstep_deriv, smoothstep_deriv2, trace_f,
    OuterFunctionF, SandwichTriple, TestFnVariant, TestFunctionSpec,
};
