//! Brute-force reference computations: duals from the inverse Gram matrix,
//! projections from the normal equations, and exhaustive removal search.
//!
//! Nothing here shares a code path with the recursive updates in
//! [`crate::forward`] and [`crate::backward`]; tests compare the two.

use nalgebra::{DMatrix, DVector, SymmetricEigen};

use crate::backward::minimizer_set;
use crate::dictionary::{AtomId, Dictionary};
use crate::error::{Error, Result};
use crate::forward::{Approximation, DualState};
use crate::space::{inner, norm_sq, Signal};

/// Relative floor on Cholesky pivots, against the largest Gram diagonal.
pub const PIVOT_FLOOR: f64 = 1e-12;

#[derive(Debug, Clone)]
pub struct GramSystem {
    /// `G[n][m] = ⟨αₙ|αₘ⟩`.
    pub gram: DMatrix<f64>,
    /// Ratio of extreme eigenvalues of `G`.
    pub condition_estimate: f64,
}

impl GramSystem {
    pub fn new(dict: &Dictionary) -> GramSystem {
        let gram = gram_matrix(dict);
        let eig = SymmetricEigen::new(gram.clone()).eigenvalues;
        let hi = eig.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let lo = eig.iter().cloned().fold(f64::INFINITY, f64::min);
        let condition_estimate = if lo > 0.0 { hi / lo } else { f64::INFINITY };
        GramSystem {
            gram,
            condition_estimate,
        }
    }

    pub fn smallest_eigenvalue(&self) -> f64 {
        SymmetricEigen::new(self.gram.clone())
            .eigenvalues
            .iter()
            .cloned()
            .fold(f64::INFINITY, f64::min)
    }
}

pub fn gram_matrix(dict: &Dictionary) -> DMatrix<f64> {
    let atoms = dict.atoms();
    let n = atoms.len();
    DMatrix::from_fn(n, n, |i, j| {
        inner(atoms[i].signal(), atoms[j].signal()).expect("dictionary shares one grid")
    })
}

/// Lower Cholesky factor, failing when a pivot drops under the floor.
fn cholesky(g: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let n = g.nrows();
    let floor = PIVOT_FLOOR * g.diagonal().iter().cloned().fold(0.0, f64::max);
    let mut l = DMatrix::<f64>::zeros(n, n);
    for j in 0..n {
        let mut d = g[(j, j)];
        for k in 0..j {
            d -= l[(j, k)] * l[(j, k)];
        }
        if !(d > floor) {
            return Err(Error::SingularGram { pivot: j });
        }
        let d = d.sqrt();
        l[(j, j)] = d;
        for i in j + 1..n {
            let mut s = g[(i, j)];
            for k in 0..j {
                s -= l[(i, k)] * l[(j, k)];
            }
            l[(i, j)] = s / d;
        }
    }
    Ok(l)
}

fn cholesky_solve(l: &DMatrix<f64>, b: &DVector<f64>) -> DVector<f64> {
    let n = l.nrows();
    let mut y = b.clone();
    for i in 0..n {
        for k in 0..i {
            y[i] -= l[(i, k)] * y[k];
        }
        y[i] /= l[(i, i)];
    }
    for i in (0..n).rev() {
        for k in i + 1..n {
            y[i] -= l[(k, i)] * y[k];
        }
        y[i] /= l[(i, i)];
    }
    y
}

/// Duals `α̃ₙ = Σₘ (G⁻¹)ₘₙ αₘ`.
pub fn oracle_duals(dict: &Dictionary) -> Result<DualState> {
    let g = gram_matrix(dict);
    let l = cholesky(&g)?;
    let n = dict.len();
    let duals = (0..n)
        .map(|col| {
            let e = DVector::from_fn(n, |i, _| if i == col { 1.0 } else { 0.0 });
            let b = cholesky_solve(&l, &e);
            dict.synthesize(b.as_slice())
        })
        .collect::<Result<Vec<_>>>()?;
    DualState::from_duals(dict.clone(), duals)
}

/// Least-squares projection of `f` onto the span, via the normal equations.
pub fn oracle_project(dict: &Dictionary, f: &Signal) -> Result<Approximation> {
    let g = gram_matrix(dict);
    let l = cholesky(&g)?;
    let rhs = dict
        .atoms()
        .iter()
        .map(|a| inner(a.signal(), f))
        .collect::<Result<Vec<_>>>()?;
    let c = cholesky_solve(&l, &DVector::from_vec(rhs));
    let coeffs = c.as_slice().to_vec();
    let fitted = dict.synthesize(&coeffs)?;
    Ok(Approximation::from_parts(
        dict.ids(),
        coeffs,
        norm_sq(&fitted),
        f.clone(),
    ))
}

/// `‖f_N − f_{N/j}‖²` for every active `j`, each by a fresh projection.
pub fn oracle_removal_losses(dict: &Dictionary, f: &Signal) -> Result<Vec<(AtomId, f64)>> {
    if dict.len() < 2 {
        return Err(Error::LastAtom(dict.ids()[0]));
    }
    let full = oracle_project(dict, f)?;
    let f_n = dict.synthesize(full.coeffs())?;
    dict.ids()
        .into_iter()
        .map(|j| {
            let sub = dict.remove_atom(j)?;
            let reduced = oracle_project(&sub, f)?;
            let f_nj = sub.synthesize(reduced.coeffs())?;
            Ok((j, norm_sq(&f_n.sub(&f_nj)?)))
        })
        .collect()
}

/// Exhaustive best single removal; ties go to the lowest id.
pub fn oracle_best_removal(dict: &Dictionary, f: &Signal) -> Result<(AtomId, f64)> {
    let losses = oracle_removal_losses(dict, f)?;
    let best = minimizer_set(&losses)[0];
    let loss = losses
        .iter()
        .find(|(id, _)| *id == best)
        .map(|&(_, v)| v)
        .expect("minimizer comes from the list");
    Ok((best, loss))
}

/// Matrix of `x ↦ Σₙ αₙ ⟨α̃ₙ|x⟩` acting on sample vectors.
pub fn projector_matrix(state: &DualState) -> DMatrix<f64> {
    let (atoms, weighted_duals) = projector_factors(state);
    &atoms * &weighted_duals
}

/// `P = A·M` with `A` the atoms as columns and `M = Ãᵀ W`.
fn projector_factors(state: &DualState) -> (DMatrix<f64>, DMatrix<f64>) {
    let grid = state.grid();
    let dim = grid.n_points();
    let n = state.len();
    let atoms = state.dictionary().atoms();
    let a = DMatrix::from_fn(dim, n, |i, k| atoms[k].signal().values()[i]);
    let m = DMatrix::from_fn(n, dim, |k, i| state.duals()[k].values()[i] * grid.weight(i));
    (a, m)
}

/// Frobenius norms of `P² − P` and `W P − Pᵀ W`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProjectorDefects {
    pub idempotence: f64,
    pub self_adjointness: f64,
}

pub fn projector_defects(state: &DualState) -> ProjectorDefects {
    let (a, m) = projector_factors(state);
    let p = &a * &m;
    let p2 = &a * (&(&m * &a) * &m);
    let w = DVector::from_vec(state.grid().weights());
    let wp = DMatrix::from_fn(p.nrows(), p.ncols(), |i, k| w[i] * p[(i, k)]);
    ProjectorDefects {
        idempotence: (p2 - &p).norm(),
        self_adjointness: (&wp - wp.transpose()).norm(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dictionary::{demo_dictionary, demo_grid, demo_signal, Atom};
    use crate::space::{axpy, norm, Grid};

    #[test]
    fn orthonormal_duals_are_atoms() {
        let g = Grid::new(0.0, 1.0, 101).unwrap();
        let a = Signal::from_fn(g, |_| 1.0).unwrap();
        let b0 = Signal::from_fn(g, |t| t).unwrap();
        let b = axpy(-inner(&a, &b0).unwrap(), &a, &b0).unwrap();
        let b = b.scaled(1.0 / norm(&b));
        let d = Dictionary::new(
            g,
            vec![Atom::new(AtomId(0), "a", a), Atom::new(AtomId(1), "b", b)],
        )
        .unwrap();
        let s = oracle_duals(&d).unwrap();
        for (dual, atom) in s.duals().iter().zip(d.atoms()) {
            assert!(norm(&dual.sub(atom.signal()).unwrap()) < 1e-12);
        }
    }

    #[test]
    fn sixty_degree_pair() {
        // u, v orthonormal; a = u, b = u/2 + (√3/2) v  ⇒  G = [[1, ½], [½, 1]]
        let g = Grid::new(0.0, 1.0, 101).unwrap();
        let u = Signal::from_fn(g, |_| 1.0).unwrap();
        let v0 = Signal::from_fn(g, |t| t).unwrap();
        let v = axpy(-inner(&u, &v0).unwrap(), &u, &v0).unwrap();
        let v = v.scaled(1.0 / norm(&v));
        let b = axpy(0.5, &u, &v.scaled(3f64.sqrt() / 2.0)).unwrap();
        let d = Dictionary::new(
            g,
            vec![Atom::new(AtomId(0), "a", u), Atom::new(AtomId(1), "b", b)],
        )
        .unwrap();
        let gram = gram_matrix(&d);
        assert!((gram[(0, 1)] - 0.5).abs() < 1e-12);
        // G⁻¹ = (4/3)[[1, -½], [-½, 1]], so ‖α̃₁‖² = (G⁻¹)₁₁ = 4/3
        let s = oracle_duals(&d).unwrap();
        assert!((s.dual_norm_sq()[0] - 4.0 / 3.0).abs() < 1e-10);
    }

    #[test]
    fn singular_gram_is_rejected() {
        let d = crate::dictionary::mexican_hat_dictionary(demo_grid(), &[1.0, 1.0]).unwrap();
        assert!(matches!(oracle_duals(&d), Err(Error::SingularGram { pivot: 1 })));
    }

    #[test]
    fn demo_gram_is_positive_definite() {
        let d = demo_dictionary(demo_grid()).unwrap();
        let sys = GramSystem::new(&d);
        assert!(sys.smallest_eigenvalue() > 0.0);
        assert!(sys.condition_estimate.is_finite());
        for i in 0..13 {
            assert!((sys.gram[(i, i)] - 1.0).abs() < 1e-10);
            for j in 0..13 {
                assert!((sys.gram[(i, j)] - sys.gram[(j, i)]).abs() <= 1e-12);
            }
        }
    }

    #[test]
    fn projection_residual_is_orthogonal() {
        let d = demo_dictionary(demo_grid()).unwrap();
        let f = Signal::from_fn(*d.grid(), |t| (t / 2.0).sin() + 0.1 * t * t).unwrap();
        let a = oracle_project(&d, &f).unwrap();
        let r = f.sub(&d.synthesize(a.coeffs()).unwrap()).unwrap();
        for atom in d.atoms() {
            assert!(inner(&r, atom.signal()).unwrap().abs() < 1e-8);
        }
        let energy = a.approx_norm_sq() + norm_sq(&r);
        assert!((energy - norm_sq(&f)).abs() <= 1e-8 * norm_sq(&f));

        let inside = demo_signal(&d).unwrap();
        let a = oracle_project(&d, &inside).unwrap();
        let r = inside.sub(&d.synthesize(a.coeffs()).unwrap()).unwrap();
        assert!(norm(&r) < 1e-8);
    }

    #[test]
    fn pair_best_removal_checks_both_subsets() {
        let d = crate::dictionary::mexican_hat_dictionary(demo_grid(), &[-0.5, 0.7]).unwrap();
        let f = Signal::from_fn(*d.grid(), |t| (-(t - 0.6) * (t - 0.6)).exp()).unwrap();
        let (best, loss) = oracle_best_removal(&d, &f).unwrap();
        // explicit: keep one atom, project, compare to the two-atom projection
        let full = oracle_project(&d, &f).unwrap();
        let f_n = d.synthesize(full.coeffs()).unwrap();
        let explicit: Vec<f64> = d
            .atoms()
            .iter()
            .map(|keep| {
                let a = keep.signal();
                let one = a.scaled(inner(a, &f).unwrap() / norm_sq(a));
                norm_sq(&f_n.sub(&one).unwrap())
            })
            .collect();
        // removing atom 0 keeps atom 1 and vice versa
        let want = if explicit[1] <= explicit[0] { AtomId(0) } else { AtomId(1) };
        assert_eq!(best, want);
        let want_loss = explicit[1 - want.0];
        assert!((loss - want_loss).abs() <= 1e-10 * want_loss.max(1e-300));
    }

    #[test]
    fn demo_projector_is_orthogonal() {
        let d = demo_dictionary(demo_grid()).unwrap();
        let s = oracle_duals(&d).unwrap();
        let defects = projector_defects(&s);
        assert!(defects.idempotence <= 1e-7, "{defects:?}");
        assert!(defects.self_adjointness <= 1e-7, "{defects:?}");
    }
}
