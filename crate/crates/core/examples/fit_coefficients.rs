//! Fits the demonstration signal and compares the recovered coefficients
//! with the ones it was built from, once by direct inner products with the
//! duals and once by the recursive update that adds one atom at a time.
//!
//! ```bash
//! cargo run -p biortho --example fit_coefficients
//! ```

use biortho::forward::DEFAULT_DEP_TOL;
use biortho::{build_duals, demo_dictionary, demo_grid, demo_signal, init_duals, ForwardOptions, DEMO_COEFFICIENTS};

fn main() -> biortho::Result<()> {
    let dict = demo_dictionary(demo_grid())?;
    let f = demo_signal(&dict)?;

    let state = build_duals(&dict, &ForwardOptions::default())?;
    let direct = state.fit(&f)?;

    let mut grown = init_duals(&dict)?;
    let mut recursive = grown.fit(&f)?;
    for atom in &dict.atoms()[1..] {
        let (s, a) = grown.add_atom_with_coeffs(&recursive, atom.clone(), DEFAULT_DEP_TOL)?;
        grown = s;
        recursive = a;
    }

    println!("{:<20} {:>10} {:>14} {:>14}", "atom", "expected", "direct", "recursive");
    for (((atom, want), c), r) in dict
        .atoms()
        .iter()
        .zip(DEMO_COEFFICIENTS)
        .zip(direct.coeffs())
        .zip(recursive.coeffs())
    {
        println!("{:<20} {:>10.4} {:>14.10} {:>14.10}", atom.label(), want, c, r);
    }
    println!("‖f_N‖² = {:.10}", direct.approx_norm_sq());
    println!("‖f − f_N‖² = {:.3e}", direct.residual_sq(&state)?);
    Ok(())
}
