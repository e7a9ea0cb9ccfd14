#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod backward;
pub mod cli;
pub mod dictionary;
pub mod error;
pub mod forward;
pub mod oracle;
pub mod space;

pub use backward::{
    downdate_coeffs, downdate_duals, impact, naive_truncation, psi_flip, reduce, select_removal,
    ReductionTrace, RemovalStep, StopReason, StoppingRule,
};
pub use dictionary::{
    demo_dictionary, demo_grid, demo_signal, mexican_hat_dictionary, Atom, AtomId, Dictionary,
    DEMO_CENTERS, DEMO_COEFFICIENTS,
};
pub use error::{Error, Result};
pub use forward::{build_duals, init_duals, Approximation, DualState, ForwardOptions};
pub use space::{axpy, inner, norm, norm_sq, Grid, Signal};
