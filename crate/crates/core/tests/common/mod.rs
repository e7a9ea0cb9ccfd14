#![allow(dead_code)]

use biortho::oracle::GramSystem;
use biortho::{norm_sq, Atom, AtomId, Dictionary, DualState, Grid, Signal};
use rand::Rng;

/// Random unit-norm atoms on `[0, 1]`, sharing a common component so the
/// Gram matrix is far from the identity. Redrawn until its condition
/// number is at most `max_cond`.
pub fn random_dictionary<R: Rng>(rng: &mut R, n: usize, dim: usize, max_cond: f64) -> Dictionary {
    let grid = Grid::new(0.0, 1.0, dim).unwrap();
    loop {
        let common: Vec<f64> = (0..dim).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let rho: f64 = 10f64.powf(rng.gen_range(-1.0..2.5));
        let atoms: Vec<Atom> = (0..n)
            .map(|i| {
                let v: Vec<f64> = common
                    .iter()
                    .map(|c| rng.gen_range(-1.0..1.0) + rho * c)
                    .collect();
                let s = Signal::new(grid, v).unwrap();
                let s = s.scaled(1.0 / norm_sq(&s).sqrt());
                Atom::new(AtomId(i), format!("r{i}"), s)
            })
            .collect();
        let dict = Dictionary::new(grid, atoms).unwrap();
        if GramSystem::new(&dict).condition_estimate <= max_cond {
            return dict;
        }
    }
}

pub fn random_signal<R: Rng>(rng: &mut R, grid: Grid) -> Signal {
    let v = (0..grid.n_points()).map(|_| rng.gen_range(-1.0..1.0)).collect();
    Signal::new(grid, v).unwrap()
}

/// `sqrt(Σ‖aₙ − bₙ‖²) / sqrt(Σ‖bₙ‖²)` over aligned families.
pub fn rel_frobenius(a: &[Signal], b: &[Signal]) -> f64 {
    assert_eq!(a.len(), b.len());
    let mut num = 0.0;
    let mut den = 0.0;
    for (x, y) in a.iter().zip(b) {
        num += norm_sq(&x.sub(y).unwrap());
        den += norm_sq(y);
    }
    (num / den).sqrt()
}

/// Relative distance between the dual families of two states over the same ids.
pub fn dual_distance(a: &DualState, b: &DualState) -> f64 {
    assert_eq!(a.ids(), b.ids());
    rel_frobenius(a.duals(), b.duals())
}

/// `max |aₙ − bₙ| / max(1, max |bₙ|)`.
pub fn coeff_distance(a: &[f64], b: &[f64]) -> f64 {
    assert_eq!(a.len(), b.len());
    let scale = b.iter().fold(1.0f64, |m, v| m.max(v.abs()));
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max)
        / scale
}
