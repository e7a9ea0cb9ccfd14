//! Greedy backward elimination under a residual budget: at each step the
//! atom whose removal costs the least energy is dropped, the duals and
//! coefficients are downdated, and the loop stops before the budget would
//! be exceeded. Prints the trace as JSON.
//!
//! ```bash
//! cargo run -p biortho --example greedy_reduction -- 1e-3
//! ```

use biortho::{build_duals, demo_dictionary, demo_grid, demo_signal, reduce, ForwardOptions, StoppingRule};

fn main() -> biortho::Result<()> {
    let delta: f64 = std::env::args()
        .nth(1)
        .map(|s| s.parse().expect("delta must be a number"))
        .unwrap_or(1e-3);

    let dict = demo_dictionary(demo_grid())?;
    let state = build_duals(&dict, &ForwardOptions::default())?;
    let approx = state.fit(&demo_signal(&dict)?)?;

    let (reduced, final_approx, trace) = reduce(&state, &approx, &StoppingRule::ResidualBudget(delta))?;

    eprintln!(
        "kept {} of {} atoms; ‖f_N − f_k‖² = {:.4e} ≤ δ = {delta:e} ({:?})",
        reduced.len(),
        state.len(),
        trace.cumulative_impact(),
        trace.stopped_reason
    );
    eprintln!(
        "‖f − f_k‖² = {:.4e}",
        final_approx.residual_sq(&reduced)?
    );
    print!("{}", trace.to_json()?);
    Ok(())
}
