//! Builds a custom Mexican-hat dictionary, writes it as wide CSV, reads it
//! back, removes an atom, and shows that ids survive the removal.
//!
//! ```bash
//! cargo run -p biortho --example dictionary_io
//! ```

use biortho::oracle::GramSystem;
use biortho::{mexican_hat_dictionary, AtomId, Dictionary, Grid};

fn main() -> biortho::Result<()> {
    let grid = Grid::new(-5.0, 5.0, 501)?;
    let dict = mexican_hat_dictionary(grid, &[-1.5, -0.5, 0.5, 1.5])?;

    let path = std::env::temp_dir().join("biortho_dictionary_io.csv");
    dict.save_csv(&path)?;
    let loaded = Dictionary::load_csv(&path)?;
    assert_eq!(loaded, dict);
    println!("round-tripped {} atoms through {}", loaded.len(), path.display());

    let gram = GramSystem::new(&loaded);
    println!("Gram matrix:\n{:.4}", gram.gram);

    let smaller = loaded.remove_atom(AtomId(1))?;
    for atom in smaller.atoms() {
        println!("id {} -> {}", atom.id(), atom.label());
    }
    match smaller.remove_atom(AtomId(1)) {
        Err(e) => println!("second removal: {e}"),
        Ok(_) => unreachable!("id 1 is gone"),
    }
    Ok(())
}
