//! Drops the two smallest terms of the demonstration expansion, then the
//! four smallest, and compares plain truncation with adapted coefficients.
//! Curves are written as `t,f,truncated,adapted` CSV into the directory
//! given as the first argument (default: the system temp dir).
//!
//! ```bash
//! cargo run -p biortho --example truncation_vs_adaptation -- out/
//! ```

use std::path::PathBuf;

use biortho::{
    build_duals, demo_dictionary, demo_grid, demo_signal, naive_truncation, norm_sq, reduce, AtomId,
    ForwardOptions, StoppingRule,
};

fn main() -> biortho::Result<()> {
    let out_dir = std::env::args()
        .nth(1)
        .map(PathBuf::from)
        .unwrap_or_else(std::env::temp_dir);
    std::fs::create_dir_all(&out_dir).map_err(|e| biortho::Error::Io {
        path: out_dir.clone(),
        source: e,
    })?;

    let dict = demo_dictionary(demo_grid())?;
    let state = build_duals(&dict, &ForwardOptions::default())?;
    let f = demo_signal(&dict)?;
    let approx = state.fit(&f)?;

    let cases = [
        ("drop2", vec![AtomId(11), AtomId(12)]),
        ("drop4", vec![AtomId(11), AtomId(12), AtomId(9), AtomId(10)]),
    ];
    for (name, ids) in cases {
        let truncated = naive_truncation(&state, &approx, &ids)?;
        let (s, a, trace) = reduce(&state, &approx, &StoppingRule::ExplicitOrder(ids))?;
        let adapted = a.approximant(&s)?;

        let path = out_dir.join(format!("{name}.csv"));
        let mut text = String::from("t,f,truncated,adapted\n");
        for (k, t) in dict.grid().abscissae().enumerate() {
            text.push_str(&format!(
                "{t},{},{},{}\n",
                f.values()[k],
                truncated.values()[k],
                adapted.values()[k]
            ));
        }
        std::fs::write(&path, text).map_err(|e| biortho::Error::Io {
            path: path.clone(),
            source: e,
        })?;

        println!(
            "{name}: ‖f − truncated‖² = {:.4e}, ‖f − adapted‖² = {:.4e}, Σ impacts = {:.4e} -> {}",
            norm_sq(&f.sub(&truncated)?),
            norm_sq(&f.sub(&adapted)?),
            trace.cumulative_impact(),
            path.display()
        );
    }
    Ok(())
}
