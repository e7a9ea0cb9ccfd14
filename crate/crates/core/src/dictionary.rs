//! Atom sets: construction, normalization, CSV ingestion and removal.

use std::fmt;
use std::path::Path;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::space::{norm, num17, read_table, write_file, Grid, Signal};

/// Stable identifier of an atom. Survives removals of other atoms.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(transparent)]
pub struct AtomId(pub usize);

impl fmt::Display for AtomId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Atom {
    id: AtomId,
    label: String,
    signal: Signal,
}

impl Atom {
    pub fn new(id: AtomId, label: impl Into<String>, signal: Signal) -> Self {
        Atom {
            id,
            label: label.into(),
            signal,
        }
    }

    pub fn id(&self) -> AtomId {
        self.id
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn signal(&self) -> &Signal {
        &self.signal
    }
}

/// Ordered, non-empty active set of atoms sharing one grid.
///
/// The position of an atom in [`Dictionary::atoms`] is its index in the
/// expansion; the [`AtomId`] is its identity.
#[derive(Debug, Clone, PartialEq)]
pub struct Dictionary {
    grid: Grid,
    atoms: Vec<Atom>,
}

impl Dictionary {
    pub fn new(grid: Grid, atoms: Vec<Atom>) -> Result<Self> {
        if atoms.is_empty() {
            return Err(Error::InvalidArgument("a dictionary needs at least one atom".into()));
        }
        let mut dict = Dictionary {
            grid,
            atoms: Vec::with_capacity(atoms.len()),
        };
        for atom in atoms {
            dict.check_insertable(&atom)?;
            dict.atoms.push(atom);
        }
        Ok(dict)
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn atoms(&self) -> &[Atom] {
        &self.atoms
    }

    pub fn len(&self) -> usize {
        self.atoms.len()
    }

    /// Always false; kept for API symmetry with `len`.
    pub fn is_empty(&self) -> bool {
        self.atoms.is_empty()
    }

    pub fn ids(&self) -> Vec<AtomId> {
        self.atoms.iter().map(Atom::id).collect()
    }

    pub fn position(&self, id: AtomId) -> Option<usize> {
        self.atoms.iter().position(|a| a.id == id)
    }

    pub fn atom(&self, id: AtomId) -> Result<&Atom> {
        self.position(id)
            .map(|p| &self.atoms[p])
            .ok_or(Error::UnknownAtom(id))
    }

    /// Smallest id strictly above every id in use.
    pub fn next_id(&self) -> AtomId {
        AtomId(self.atoms.iter().map(|a| a.id.0 + 1).max().unwrap_or(0))
    }

    /// Returns a copy with `id` removed; survivors keep their ids and order.
    pub fn remove_atom(&self, id: AtomId) -> Result<Dictionary> {
        let p = self.position(id).ok_or(Error::UnknownAtom(id))?;
        if self.atoms.len() == 1 {
            return Err(Error::LastAtom(id));
        }
        let mut atoms = self.atoms.clone();
        atoms.remove(p);
        Ok(Dictionary {
            grid: self.grid,
            atoms,
        })
    }

    /// Returns a copy with `atom` appended at the end of the active order.
    pub fn with_atom(&self, atom: Atom) -> Result<Dictionary> {
        self.check_insertable(&atom)?;
        let mut out = self.clone();
        out.atoms.push(atom);
        Ok(out)
    }

    /// Linear combination `Σ coeffs[n] · atom[n]` in active order.
    pub fn synthesize(&self, coeffs: &[f64]) -> Result<Signal> {
        if coeffs.len() != self.atoms.len() {
            return Err(Error::LengthMismatch {
                expected: self.atoms.len(),
                got: coeffs.len(),
            });
        }
        let mut out = Signal::zeros(self.grid);
        for (atom, &c) in self.atoms.iter().zip(coeffs) {
            out.add_scaled(c, &atom.signal)?;
        }
        Ok(out)
    }

    fn check_insertable(&self, atom: &Atom) -> Result<()> {
        if atom.signal.grid() != &self.grid {
            return Err(Error::GridMismatch(format!(
                "atom {} lives on {}, dictionary on {}",
                atom.id,
                atom.signal.grid(),
                self.grid
            )));
        }
        if self.position(atom.id).is_some() {
            return Err(Error::DuplicateAtom(atom.id));
        }
        Ok(())
    }

    /// Wide CSV: `t` then one column per atom, labels in the header row.
    pub fn save_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let mut out = String::from("t");
        for atom in &self.atoms {
            if atom.label.contains(',') || atom.label.contains('\n') {
                return Err(Error::InvalidArgument(format!(
                    "label {:?} of atom {} contains a separator",
                    atom.label, atom.id
                )));
            }
            out.push(',');
            out.push_str(&atom.label);
        }
        out.push('\n');
        for (k, t) in self.grid.abscissae().enumerate() {
            out.push_str(&num17::format(t));
            for atom in &self.atoms {
                out.push(',');
                out.push_str(&num17::format(atom.signal.values()[k]));
            }
            out.push('\n');
        }
        write_file(path, out.as_bytes())
    }

    /// Loads a wide CSV. Atom ids are assigned by column order, starting at 0.
    pub fn load_csv(path: impl AsRef<Path>) -> Result<Dictionary> {
        let table = read_table(path.as_ref())?;
        let atoms = table
            .header
            .into_iter()
            .skip(1)
            .zip(table.columns)
            .enumerate()
            .map(|(i, (label, values))| {
                Ok(Atom::new(AtomId(i), label, Signal::new(table.grid, values)?))
            })
            .collect::<Result<Vec<_>>>()?;
        Dictionary::new(table.grid, atoms)
    }
}

/// Unnormalized Mexican hat `e^{-s²}(1 - s²)` with `s = t - center`.
pub fn mexican_hat(t: f64, center: f64) -> f64 {
    let s2 = (t - center) * (t - center);
    (-s2).exp() * (1.0 - s2)
}

/// One unit-norm Mexican-hat atom per center, in the given order.
///
/// Normalization is done on the grid itself, so `‖α‖ = 1` holds in the
/// discrete inner product rather than on the real line.
pub fn mexican_hat_dictionary(grid: Grid, centers: &[f64]) -> Result<Dictionary> {
    if centers.is_empty() {
        return Err(Error::InvalidArgument("no centers given".into()));
    }
    let atoms = centers
        .iter()
        .enumerate()
        .map(|(i, &c)| {
            let raw = Signal::from_fn(grid, |t| mexican_hat(t, c))?;
            let nrm = norm(&raw);
            if !(nrm >= 1e-12) {
                return Err(Error::DegenerateAtom { center: c, norm: nrm });
            }
            Ok(Atom::new(AtomId(i), format!("mexhat(center={c})"), raw.scaled(1.0 / nrm)))
        })
        .collect::<Result<Vec<_>>>()?;
    Dictionary::new(grid, atoms)
}

/// Centers of the 13-atom demonstration dictionary, in expansion order.
pub const DEMO_CENTERS: [f64; 13] = [
    0.0, 1.0, -1.0, 2.0, -2.0, 3.0, -3.0, 4.0, -4.0, 5.0, -5.0, 6.0, -6.0,
];

/// Expansion coefficients of the demonstration signal, aligned with [`DEMO_CENTERS`].
pub const DEMO_COEFFICIENTS: [f64; 13] = [
    2.8273, 2.4954, 2.4954, 1.9988, 1.9988, 1.4989, 1.4989, 0.8630, 0.8630, 0.2957, 0.2957,
    0.0648, 0.0648,
];

/// Default grid of the demonstration: `[-4, 4]` with 801 samples.
pub fn demo_grid() -> Grid {
    Grid::new(-4.0, 4.0, 801).expect("static grid is valid")
}

/// The 13 shifted Mexican hats centered at `0, ±1, …, ±6`, normalized on `grid`.
pub fn demo_dictionary(grid: Grid) -> Result<Dictionary> {
    if grid.t_min() > -4.0 || grid.t_max() < 4.0 {
        return Err(Error::InvalidGrid(format!(
            "demonstration grid must cover [-4, 4], got {grid}"
        )));
    }
    mexican_hat_dictionary(grid, &DEMO_CENTERS)
}

/// The demonstration signal: `Σ DEMO_COEFFICIENTS[n] · α_n`.
pub fn demo_signal(dict: &Dictionary) -> Result<Signal> {
    dict.synthesize(&DEMO_COEFFICIENTS)
}
