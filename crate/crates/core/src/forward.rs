//! Forward adaptive biorthogonalization.
//!
//! A [`DualState`] holds the reciprocal family `α̃ₙ` of the active atoms:
//! vectors in their span with `⟨α̃ₙ|αₘ⟩ = δₙₘ`, so that `Σ αₙ⟨α̃ₙ|·⟩` is the
//! orthogonal projector onto the span. Atoms are appended one at a time; the
//! new direction `ψ = α − P α` is obtained by modified Gram-Schmidt against an
//! orthonormal basis of the current span.

use serde::Serialize;

use crate::dictionary::{Atom, AtomId, Dictionary};
use crate::error::{Error, Result};
use crate::space::{inner, norm, norm_sq, num17, Grid, Signal};

/// Relative threshold on `‖ψ‖ / ‖α‖` below which an atom counts as dependent.
pub const DEFAULT_DEP_TOL: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ForwardOptions {
    pub dep_tol: f64,
    /// Process atoms in order of largest residual norm instead of dictionary order.
    pub pivoting: bool,
}

impl Default for ForwardOptions {
    fn default() -> Self {
        ForwardOptions {
            dep_tol: DEFAULT_DEP_TOL,
            pivoting: false,
        }
    }
}

/// Dual (reciprocal) family of a dictionary.
#[derive(Debug, Clone)]
pub struct DualState {
    dict: Dictionary,
    duals: Vec<Signal>,
    dual_norm_sq: Vec<f64>,
    /// Orthonormal basis of the span, in processing order. Dropped by
    /// downdates and rebuilt on the next growth step.
    basis: Option<Vec<Signal>>,
    last_psi_norm_sq: Option<f64>,
}

struct Growth {
    state: DualState,
    psi: Signal,
    psi_norm_sq: f64,
    /// `⟨α_{k+1}|α̃ₙᵏ⟩` for the atoms that were already active.
    overlaps: Vec<f64>,
}

impl DualState {
    /// Seeds the recursion with a single atom: `α̃₁ = α₁ / ‖α₁‖²`.
    pub fn init(atom: Atom) -> Result<DualState> {
        let n2 = norm_sq(atom.signal());
        if !(n2 > 0.0) {
            return Err(Error::LinearlyDependent {
                id: atom.id(),
                residual: 0.0,
            });
        }
        let dual = atom.signal().scaled(1.0 / n2);
        let unit = atom.signal().scaled(1.0 / n2.sqrt());
        let grid = *atom.signal().grid();
        Ok(DualState {
            dict: Dictionary::new(grid, vec![atom])?,
            dual_norm_sq: vec![norm_sq(&dual)],
            duals: vec![dual],
            basis: Some(vec![unit]),
            last_psi_norm_sq: Some(n2),
        })
    }

    /// Wraps an externally computed dual family. Only shapes and grids are
    /// checked; biorthogonality is the caller's responsibility.
    pub fn from_duals(dict: Dictionary, duals: Vec<Signal>) -> Result<DualState> {
        if duals.len() != dict.len() {
            return Err(Error::LengthMismatch {
                expected: dict.len(),
                got: duals.len(),
            });
        }
        if let Some(d) = duals.iter().find(|d| d.grid() != dict.grid()) {
            return Err(Error::GridMismatch(format!(
                "dual on {}, dictionary on {}",
                d.grid(),
                dict.grid()
            )));
        }
        Ok(DualState {
            dual_norm_sq: duals.iter().map(norm_sq).collect(),
            dict,
            duals,
            basis: None,
            last_psi_norm_sq: None,
        })
    }

    pub fn dictionary(&self) -> &Dictionary {
        &self.dict
    }

    pub fn grid(&self) -> &Grid {
        self.dict.grid()
    }

    pub fn len(&self) -> usize {
        self.duals.len()
    }

    pub fn is_empty(&self) -> bool {
        self.duals.is_empty()
    }

    pub fn ids(&self) -> Vec<AtomId> {
        self.dict.ids()
    }

    /// Duals aligned with `dictionary().atoms()`.
    pub fn duals(&self) -> &[Signal] {
        &self.duals
    }

    pub fn dual_norm_sq(&self) -> &[f64] {
        &self.dual_norm_sq
    }

    pub fn dual(&self, id: AtomId) -> Result<&Signal> {
        Ok(&self.duals[self.position(id)?])
    }

    pub fn position(&self, id: AtomId) -> Result<usize> {
        self.dict.position(id).ok_or(Error::UnknownAtom(id))
    }

    /// `‖ψ‖²` of the most recent growth step, if the state was grown.
    pub fn last_psi_norm_sq(&self) -> Option<f64> {
        self.last_psi_norm_sq
    }

    /// Largest `|⟨α̃ₙ|αₘ⟩ − δₙₘ|` over all active pairs.
    pub fn biorthogonality_defect(&self) -> f64 {
        let mut worst = 0.0f64;
        for (n, dual) in self.duals.iter().enumerate() {
            for (m, atom) in self.dict.atoms().iter().enumerate() {
                let target = if n == m { 1.0 } else { 0.0 };
                let g = inner(dual, atom.signal()).expect("state shares one grid");
                worst = worst.max((g - target).abs());
            }
        }
        worst
    }

    pub(crate) fn from_parts_unchecked(dict: Dictionary, duals: Vec<Signal>) -> DualState {
        DualState {
            dual_norm_sq: duals.iter().map(norm_sq).collect(),
            dict,
            duals,
            basis: None,
            last_psi_norm_sq: None,
        }
    }

    /// Appends `atom` to the active set and updates every dual.
    pub fn add_atom(&self, atom: Atom, dep_tol: f64) -> Result<DualState> {
        Ok(self.grow(atom, dep_tol)?.state)
    }

    /// Appends `atom` and updates `approx` recursively, without refitting.
    pub fn add_atom_with_coeffs(
        &self,
        approx: &Approximation,
        atom: Atom,
        dep_tol: f64,
    ) -> Result<(DualState, Approximation)> {
        self.check_aligned(approx)?;
        let id = atom.id();
        let growth = self.grow(atom, dep_tol)?;
        let gain = inner(&growth.psi, &approx.signal)? / growth.psi_norm_sq;
        let mut coeffs: Vec<f64> = approx
            .coeffs
            .iter()
            .zip(&growth.overlaps)
            .map(|(c, ov)| c - ov * gain)
            .collect();
        coeffs.push(gain);
        let mut ids = approx.ids.clone();
        ids.push(id);
        let approx_norm_sq = approx.approx_norm_sq + gain * gain * growth.psi_norm_sq;
        Ok((
            growth.state,
            Approximation {
                ids,
                coeffs,
                approx_norm_sq,
                signal: approx.signal.clone(),
            },
        ))
    }

    fn grow(&self, atom: Atom, dep_tol: f64) -> Result<Growth> {
        let dict = self.dict.with_atom(atom.clone())?;
        let mut basis = match &self.basis {
            Some(b) => b.clone(),
            None => mgs_basis(self.dict.atoms())?,
        };

        let alpha = atom.signal();
        let psi = mgs_residual(&basis, alpha)?;
        let psi_norm_sq = norm_sq(&psi);
        let psi_norm = psi_norm_sq.sqrt();
        if psi_norm <= dep_tol * norm(alpha) || psi_norm == 0.0 {
            return Err(Error::LinearlyDependent {
                id: atom.id(),
                residual: psi_norm,
            });
        }

        let new_dual = psi.scaled(1.0 / psi_norm_sq);
        let mut overlaps = Vec::with_capacity(self.duals.len());
        let mut duals = Vec::with_capacity(self.duals.len() + 1);
        for dual in &self.duals {
            let ov = inner(alpha, dual)?;
            let mut d = dual.clone();
            d.add_scaled(-ov, &new_dual)?;
            overlaps.push(ov);
            duals.push(d);
        }
        duals.push(new_dual);
        basis.push(psi.scaled(1.0 / psi_norm));

        Ok(Growth {
            state: DualState {
                dual_norm_sq: duals.iter().map(norm_sq).collect(),
                dict,
                duals,
                basis: Some(basis),
                last_psi_norm_sq: Some(psi_norm_sq),
            },
            psi,
            psi_norm_sq,
            overlaps,
        })
    }

    /// Orthogonal projection coefficients `cₙ = ⟨α̃ₙ|f⟩`.
    pub fn fit(&self, f: &Signal) -> Result<Approximation> {
        let coeffs = self
            .duals
            .iter()
            .map(|d| inner(d, f))
            .collect::<Result<Vec<_>>>()?;
        let approx_norm_sq = norm_sq(&self.dict.synthesize(&coeffs)?);
        Ok(Approximation {
            ids: self.ids(),
            coeffs,
            approx_norm_sq,
            signal: f.clone(),
        })
    }

    pub(crate) fn check_aligned(&self, approx: &Approximation) -> Result<()> {
        if approx.ids.len() != self.len()
            || approx
                .ids
                .iter()
                .zip(self.dict.atoms())
                .any(|(id, a)| *id != a.id())
        {
            return Err(Error::Inconsistent(format!(
                "approximation over {:?}, state over {:?}",
                approx.ids,
                self.ids()
            )));
        }
        if approx.signal.grid() != self.grid() {
            return Err(Error::GridMismatch(format!(
                "signal on {}, dictionary on {}",
                approx.signal.grid(),
                self.grid()
            )));
        }
        Ok(())
    }

    /// JSON document `{grid, atom_ids, duals, dual_norm_sq}` with 17-digit reals.
    pub fn to_json(&self) -> Result<String> {
        #[derive(Serialize)]
        struct Row<'a>(#[serde(serialize_with = "num17::reals")] &'a [f64]);
        #[derive(Serialize)]
        struct Export<'a> {
            grid: &'a Grid,
            atom_ids: Vec<AtomId>,
            duals: Vec<Row<'a>>,
            #[serde(serialize_with = "num17::reals")]
            dual_norm_sq: &'a [f64],
        }
        let export = Export {
            grid: self.grid(),
            atom_ids: self.ids(),
            duals: self.duals.iter().map(|d| Row(d.values())).collect(),
            dual_norm_sq: &self.dual_norm_sq,
        };
        Ok(serde_json::to_string_pretty(&export)? + "\n")
    }
}

/// `α − Σ q⟨q|·⟩` applied one basis vector at a time (modified Gram-Schmidt).
fn mgs_residual(basis: &[Signal], alpha: &Signal) -> Result<Signal> {
    let mut w = alpha.clone();
    for q in basis {
        let proj = inner(q, &w)?;
        w.add_scaled(-proj, q)?;
    }
    Ok(w)
}

fn mgs_basis(atoms: &[Atom]) -> Result<Vec<Signal>> {
    let mut basis: Vec<Signal> = Vec::with_capacity(atoms.len() + 1);
    for atom in atoms {
        let w = mgs_residual(&basis, atom.signal())?;
        let nrm = norm(&w);
        if nrm == 0.0 {
            return Err(Error::LinearlyDependent {
                id: atom.id(),
                residual: 0.0,
            });
        }
        basis.push(w.scaled(1.0 / nrm));
    }
    Ok(basis)
}

/// Dual state of the first atom of `dict`.
pub fn init_duals(dict: &Dictionary) -> Result<DualState> {
    DualState::init(dict.atoms()[0].clone())
}

/// Builds the duals of every atom in `dict` by forward growth.
///
/// With pivoting, atoms are absorbed in order of largest residual norm; the
/// returned state is still aligned with the dictionary order.
pub fn build_duals(dict: &Dictionary, opts: &ForwardOptions) -> Result<DualState> {
    if !opts.pivoting {
        let mut state = init_duals(dict)?;
        for atom in &dict.atoms()[1..] {
            state = state.add_atom(atom.clone(), opts.dep_tol)?;
        }
        return Ok(state);
    }

    let atoms = dict.atoms();
    let mut remaining: Vec<usize> = (0..atoms.len()).collect();
    let mut residuals: Vec<Signal> = atoms.iter().map(|a| a.signal().clone()).collect();
    let mut state: Option<DualState> = None;
    while !remaining.is_empty() {
        let (slot, _) = remaining
            .iter()
            .enumerate()
            .map(|(slot, &i)| (slot, norm_sq(&residuals[i])))
            .fold((0, f64::NEG_INFINITY), |best, cur| if cur.1 > best.1 { cur } else { best });
        let pick = remaining.remove(slot);
        let atom = atoms[pick].clone();
        let next = match &state {
            None => DualState::init(atom)?,
            Some(s) => s.add_atom(atom, opts.dep_tol)?,
        };
        let q = next
            .basis
            .as_ref()
            .and_then(|b| b.last())
            .expect("growth leaves a basis")
            .clone();
        for &i in &remaining {
            let proj = inner(&q, &residuals[i])?;
            residuals[i].add_scaled(-proj, &q)?;
        }
        state = Some(next);
    }
    let state = state.expect("dictionary is non-empty");

    let duals = atoms
        .iter()
        .map(|a| state.dual(a.id()).cloned())
        .collect::<Result<Vec<_>>>()?;
    Ok(DualState {
        dual_norm_sq: duals.iter().map(norm_sq).collect(),
        dict: dict.clone(),
        duals,
        basis: state.basis,
        last_psi_norm_sq: state.last_psi_norm_sq,
    })
}

/// Coefficients of an approximation `f_N = Σ cₙ αₙ` of a signal `f`.
#[derive(Debug, Clone, PartialEq)]
pub struct Approximation {
    ids: Vec<AtomId>,
    coeffs: Vec<f64>,
    approx_norm_sq: f64,
    signal: Signal,
}

impl Approximation {
    pub(crate) fn from_parts(
        ids: Vec<AtomId>,
        coeffs: Vec<f64>,
        approx_norm_sq: f64,
        signal: Signal,
    ) -> Approximation {
        Approximation {
            ids,
            coeffs,
            approx_norm_sq,
            signal,
        }
    }

    pub fn ids(&self) -> &[AtomId] {
        &self.ids
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn coeff(&self, id: AtomId) -> Result<f64> {
        self.ids
            .iter()
            .position(|&i| i == id)
            .map(|p| self.coeffs[p])
            .ok_or(Error::UnknownAtom(id))
    }

    /// `‖f_N‖²`.
    pub fn approx_norm_sq(&self) -> f64 {
        self.approx_norm_sq
    }

    /// The signal `f` being approximated.
    pub fn signal(&self) -> &Signal {
        &self.signal
    }

    /// `f_N = Σ cₙ αₙ` over the atoms of `state`.
    pub fn approximant(&self, state: &DualState) -> Result<Signal> {
        state.check_aligned(self)?;
        state.dictionary().synthesize(&self.coeffs)
    }

    /// `‖f − f_N‖²`.
    pub fn residual_sq(&self, state: &DualState) -> Result<f64> {
        Ok(norm_sq(&self.signal.sub(&self.approximant(state)?)?))
    }
}
