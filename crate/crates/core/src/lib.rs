//! Generalized Hubbell rectangular source integral.
//!
//! `H[a,b,p,λ; α,β,γ]` is evaluated as an Appell F2 function, expanded into a
//! rapidly converging finite sum of Gauss ₂F₁ terms whose length is chosen
//! adaptively. Independent quadrature and double-series routes are provided
//! for cross-checking, together with reproduction of published reference
//! tables.

#![allow(clippy::excessive_precision, clippy::too_many_arguments)]

pub mod appell;
pub mod cli;
pub mod error;
pub mod hubbell;
pub mod numfmt;
pub mod oracle;
pub mod special;
pub mod tables;

pub use appell::{f2_double_series, f2_finite_sum, f2_recurrence_step, f2_reduce_to_2f1, F2Args};
pub use error::{Error, Result};
pub use hubbell::{
    eval_I, eval_detector_response, eval_h_closed_half, eval_h_general, eval_h_lambda0,
    HubbellParams,
};
pub use oracle::{quad_I, quad_h2d, quad_h_general, QuadratureControl};
pub use special::{hyp2f1, pochhammer, EvalResult, Method, SeriesControl};
pub use tables::{emit_report, run_table, ReportFormat, TableId, TableRow};
