//! Builds the reciprocal family of the 13-atom Mexican-hat dictionary by
//! forward growth and checks it against the Gram-inverse construction.
//!
//! ```bash
//! cargo run -p biortho --example dual_family
//! ```

use biortho::oracle::{oracle_duals, projector_defects, GramSystem};
use biortho::{build_duals, demo_dictionary, demo_grid, norm, ForwardOptions};

fn main() -> biortho::Result<()> {
    let dict = demo_dictionary(demo_grid())?;
    let gram = GramSystem::new(&dict);
    println!("{} atoms, Gram condition estimate {:.3e}", dict.len(), gram.condition_estimate);

    let plain = build_duals(&dict, &ForwardOptions::default())?;
    let pivoted = build_duals(
        &dict,
        &ForwardOptions {
            pivoting: true,
            ..Default::default()
        },
    )?;
    let reference = oracle_duals(&dict)?;

    println!("{:<20} {:>14} {:>14}", "atom", "‖dual‖²", "vs Gram inverse");
    for ((atom, dual), (n2, orc)) in dict
        .atoms()
        .iter()
        .zip(plain.duals())
        .zip(plain.dual_norm_sq().iter().zip(reference.duals()))
    {
        let gap = norm(&dual.sub(orc)?) / norm(orc);
        println!("{:<20} {:>14.6e} {:>14.2e}", atom.label(), n2, gap);
    }

    let pivot_gap = plain
        .duals()
        .iter()
        .zip(pivoted.duals())
        .map(|(a, b)| Ok(norm(&a.sub(b)?) / norm(a)))
        .collect::<biortho::Result<Vec<f64>>>()?
        .into_iter()
        .fold(0.0, f64::max);

    let defects = projector_defects(&plain);
    println!("max |<dual_n|atom_m> - delta_nm| = {:.2e}", plain.biorthogonality_defect());
    println!("pivoted vs plain, worst relative gap = {pivot_gap:.2e}");
    println!(
        "projector: |P^2 - P| = {:.2e}, |WP - P^T W| = {:.2e}",
        defects.idempotence, defects.self_adjointness
    );
    Ok(())
}
