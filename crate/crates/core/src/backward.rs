//! Backward adaptive biorthogonalization.
//!
//! Removing atom `j` from the active set changes every surviving dual by a
//! rank-one correction along `α̃ⱼ`:
//!
//! ```text
//! α̃ₙ ← α̃ₙ − α̃ⱼ ⟨α̃ⱼ|α̃ₙ⟩ / ‖α̃ⱼ‖²
//! cₙ ← cₙ − ⟨α̃ₙ|α̃ⱼ⟩ cⱼ / ‖α̃ⱼ‖²
//! ```
//!
//! and the squared norm of the projection drops by exactly `cⱼ² / ‖α̃ⱼ‖²`.
//! Greedy elimination repeatedly removes the atom with the smallest such loss.

use serde::Serialize;

use crate::dictionary::AtomId;
use crate::error::{Error, Result};
use crate::forward::{Approximation, DualState};
use crate::space::{inner, num17, Signal};

/// Floor on `‖α̃ⱼ‖²`; a valid dual family can never get this small.
pub const DUAL_NORM_FLOOR: f64 = 1e-14;

/// Relative tolerance under which two impacts count as tied.
pub const TIE_RTOL: f64 = 1e-10;

/// Position of `j` and `(α̃ⱼ, ‖α̃ⱼ‖²)`, after the preconditions of a removal.
fn removal_parts(state: &DualState, j: AtomId) -> Result<(usize, &Signal, f64)> {
    let p = state.position(j)?;
    if state.len() < 2 {
        return Err(Error::LastAtom(j));
    }
    let dual = &state.duals()[p];
    let n2 = crate::space::norm_sq(dual);
    if !(n2 > DUAL_NORM_FLOOR) {
        return Err(Error::IllConditioned { id: j, norm_sq: n2 });
    }
    Ok((p, dual, n2))
}

/// Duals of the active set without `j`.
pub fn downdate_duals(state: &DualState, j: AtomId) -> Result<DualState> {
    let (p, dual_j, n2) = removal_parts(state, j)?;
    let mut duals = Vec::with_capacity(state.len() - 1);
    for (n, dual) in state.duals().iter().enumerate() {
        if n == p {
            continue;
        }
        let mut d = dual.clone();
        d.add_scaled(-inner(dual_j, dual)? / n2, dual_j)?;
        duals.push(d);
    }
    let dict = state.dictionary().remove_atom(j)?;
    Ok(DualState::from_parts_unchecked(dict, duals))
}

/// Unit vector spanning the part of the span lost when `j` is removed:
/// `α̃ⱼ / ‖α̃ⱼ‖`.
pub fn psi_flip(state: &DualState, j: AtomId) -> Result<Signal> {
    let (_, dual_j, n2) = removal_parts(state, j)?;
    Ok(dual_j.scaled(1.0 / n2.sqrt()))
}

/// Squared-norm loss `cⱼ² / ‖α̃ⱼ‖²` of removing `j` with adaptation.
pub fn impact(state: &DualState, approx: &Approximation, j: AtomId) -> Result<f64> {
    state.check_aligned(approx)?;
    let p = state.position(j)?;
    let c = approx.coeffs()[p];
    Ok(c * c / state.dual_norm_sq()[p])
}

/// Impact of every active atom, in active order.
pub fn impacts(state: &DualState, approx: &Approximation) -> Result<Vec<(AtomId, f64)>> {
    state.check_aligned(approx)?;
    Ok(state
        .ids()
        .into_iter()
        .zip(approx.coeffs().iter().zip(state.dual_norm_sq()))
        .map(|(id, (c, n2))| (id, c * c / n2))
        .collect())
}

/// Ids whose value is within [`TIE_RTOL`] of the minimum, sorted ascending.
pub fn minimizer_set(values: &[(AtomId, f64)]) -> Vec<AtomId> {
    let Some(min) = values.iter().map(|&(_, v)| v).reduce(f64::min) else {
        return Vec::new();
    };
    let cutoff = min + TIE_RTOL * min.abs();
    let mut ids: Vec<AtomId> = values
        .iter()
        .filter(|&&(_, v)| v <= cutoff)
        .map(|&(id, _)| id)
        .collect();
    ids.sort();
    ids
}

/// Atom whose removal loses the least energy; ties go to the lowest id.
pub fn select_removal(state: &DualState, approx: &Approximation) -> Result<AtomId> {
    if state.len() < 2 {
        return Err(Error::LastAtom(state.ids()[0]));
    }
    Ok(minimizer_set(&impacts(state, approx)?)[0])
}

/// Coefficients of the projection onto the span without `j`.
pub fn downdate_coeffs(
    state: &DualState,
    approx: &Approximation,
    j: AtomId,
) -> Result<Approximation> {
    state.check_aligned(approx)?;
    let (p, dual_j, n2) = removal_parts(state, j)?;
    let cj = approx.coeffs()[p];
    let mut ids = Vec::with_capacity(state.len() - 1);
    let mut coeffs = Vec::with_capacity(state.len() - 1);
    for (n, (dual, &c)) in state.duals().iter().zip(approx.coeffs()).enumerate() {
        if n == p {
            continue;
        }
        ids.push(approx.ids()[n]);
        coeffs.push(c - inner(dual, dual_j)? * cj / n2);
    }
    let approx_norm_sq = approx.approx_norm_sq() - cj * cj / n2;
    Ok(Approximation::from_parts(
        ids,
        coeffs,
        approx_norm_sq,
        approx.signal().clone(),
    ))
}

/// One executed removal.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RemovalStep {
    pub removed_id: AtomId,
    pub label: String,
    #[serde(serialize_with = "num17::real")]
    pub impact: f64,
    #[serde(serialize_with = "num17::real")]
    pub approx_norm_sq_after: f64,
    #[serde(serialize_with = "num17::reals")]
    pub coeffs_after: Vec<f64>,
}

/// Removes `j` from both the duals and the coefficients.
pub fn remove(
    state: &DualState,
    approx: &Approximation,
    j: AtomId,
) -> Result<(DualState, Approximation, RemovalStep)> {
    let label = state.dictionary().atom(j)?.label().to_string();
    let loss = impact(state, approx, j)?;
    let next_approx = downdate_coeffs(state, approx, j)?;
    let next_state = downdate_duals(state, j)?;
    let step = RemovalStep {
        removed_id: j,
        label,
        impact: loss,
        approx_norm_sq_after: next_approx.approx_norm_sq(),
        coeffs_after: next_approx.coeffs().to_vec(),
    };
    Ok((next_state, next_approx, step))
}

#[derive(Debug, Clone, PartialEq)]
pub enum StoppingRule {
    /// Remove greedily while `‖f_N − f⁽ᵏ⁾‖² ≤ δ` stays true.
    ResidualBudget(f64),
    /// Remove greedily until this many atoms remain.
    TargetCount(usize),
    /// Remove exactly these atoms, in this order.
    ExplicitOrder(Vec<AtomId>),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum StopReason {
    BudgetExceeded,
    TargetCount,
    Exhausted,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ReductionTrace {
    /// Budget of a [`StoppingRule::ResidualBudget`] run; `None` otherwise.
    #[serde(serialize_with = "num17::opt_real")]
    pub delta: Option<f64>,
    #[serde(serialize_with = "num17::real")]
    pub initial_norm_sq: f64,
    pub steps: Vec<RemovalStep>,
    pub stopped_reason: StopReason,
}

impl ReductionTrace {
    /// `‖f_N − f⁽ᵏ⁾‖²`, the sum of the executed impacts.
    pub fn cumulative_impact(&self) -> f64 {
        self.steps.iter().map(|s| s.impact).sum()
    }

    pub fn removed_ids(&self) -> Vec<AtomId> {
        self.steps.iter().map(|s| s.removed_id).collect()
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)? + "\n")
    }
}

/// Iterated removal under `rule`.
pub fn reduce(
    state: &DualState,
    approx: &Approximation,
    rule: &StoppingRule,
) -> Result<(DualState, Approximation, ReductionTrace)> {
    state.check_aligned(approx)?;
    let mut state = state.clone();
    let mut approx = approx.clone();
    let mut trace = ReductionTrace {
        delta: None,
        initial_norm_sq: approx.approx_norm_sq(),
        steps: Vec::new(),
        stopped_reason: StopReason::Exhausted,
    };

    match rule {
        StoppingRule::ResidualBudget(delta) => {
            if !(*delta >= 0.0) {
                return Err(Error::InvalidArgument(format!("delta must be >= 0, got {delta}")));
            }
            trace.delta = Some(*delta);
            let mut spent = 0.0;
            loop {
                if state.len() == 1 {
                    trace.stopped_reason = StopReason::Exhausted;
                    break;
                }
                let j = select_removal(&state, &approx)?;
                if spent + impact(&state, &approx, j)? > *delta {
                    trace.stopped_reason = StopReason::BudgetExceeded;
                    break;
                }
                let (s, a, step) = remove(&state, &approx, j)?;
                spent += step.impact;
                trace.steps.push(step);
                state = s;
                approx = a;
            }
        }
        StoppingRule::TargetCount(m) => {
            if *m == 0 {
                return Err(Error::InvalidArgument("target count must be >= 1".into()));
            }
            while state.len() > *m {
                let j = select_removal(&state, &approx)?;
                let (s, a, step) = remove(&state, &approx, j)?;
                trace.steps.push(step);
                state = s;
                approx = a;
            }
            trace.stopped_reason = StopReason::TargetCount;
        }
        StoppingRule::ExplicitOrder(ids) => {
            for &j in ids {
                let (s, a, step) = remove(&state, &approx, j)?;
                trace.steps.push(step);
                state = s;
                approx = a;
            }
            trace.stopped_reason = StopReason::Exhausted;
        }
    }
    Ok((state, approx, trace))
}

/// `Σ cₙ αₙ` over the atoms not in `dropped`, with the coefficients left as they are.
pub fn naive_truncation(
    state: &DualState,
    approx: &Approximation,
    dropped: &[AtomId],
) -> Result<Signal> {
    state.check_aligned(approx)?;
    for &id in dropped {
        state.position(id)?;
    }
    let coeffs: Vec<f64> = approx
        .ids()
        .iter()
        .zip(approx.coeffs())
        .map(|(id, &c)| if dropped.contains(id) { 0.0 } else { c })
        .collect();
    state.dictionary().synthesize(&coeffs)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dictionary::{Atom, Dictionary};
    use crate::forward::{build_duals, ForwardOptions};
    use crate::space::{axpy, norm, norm_sq, Grid};

    /// Three grid-orthonormal atoms.
    fn orthonormal3() -> DualState {
        let g = Grid::new(0.0, 1.0, 201).unwrap();
        let raw = [
            Signal::from_fn(g, |t| 1.0 + 0.0 * t).unwrap(),
            Signal::from_fn(g, |t| t).unwrap(),
            Signal::from_fn(g, |t| t * t).unwrap(),
        ];
        let mut basis: Vec<Signal> = Vec::new();
        for r in raw {
            let mut w = r;
            for q in &basis {
                w = axpy(-inner(q, &w).unwrap(), q, &w).unwrap();
            }
            let n = norm(&w);
            basis.push(w.scaled(1.0 / n));
        }
        let atoms = basis
            .into_iter()
            .enumerate()
            .map(|(i, s)| Atom::new(AtomId(i), format!("e{i}"), s))
            .collect();
        let d = Dictionary::new(g, atoms).unwrap();
        build_duals(&d, &ForwardOptions::default()).unwrap()
    }

    fn with_coeffs(state: &DualState, c: &[f64]) -> Approximation {
        let f = state.dictionary().synthesize(c).unwrap();
        state.fit(&f).unwrap()
    }

    #[test]
    fn orthonormal_removal_keeps_other_duals() {
        let s = orthonormal3();
        for j in s.ids() {
            let r = downdate_duals(&s, j).unwrap();
            for id in r.ids() {
                let before = s.dual(id).unwrap();
                let after = r.dual(id).unwrap();
                assert!(norm(&after.sub(before).unwrap()) < 1e-12);
            }
            let u = psi_flip(&s, j).unwrap();
            let aj = s.dictionary().atom(j).unwrap().signal();
            assert!(norm(&u.sub(aj).unwrap()) < 1e-10);
            assert!((norm_sq(&u) - 1.0).abs() < 1e-10);
        }
    }

    #[test]
    fn orthonormal_coefficients_and_impacts() {
        let s = orthonormal3();
        let a = with_coeffs(&s, &[3.0, 1.0, 2.0]);
        assert!((impact(&s, &a, AtomId(0)).unwrap() - 9.0).abs() < 1e-9);
        assert_eq!(select_removal(&s, &a).unwrap(), AtomId(1));
        let r = downdate_coeffs(&s, &a, AtomId(2)).unwrap();
        assert!((r.coeffs()[0] - 3.0).abs() < 1e-10);
        assert!((r.coeffs()[1] - 1.0).abs() < 1e-10);
        assert!((a.approx_norm_sq() - r.approx_norm_sq() - 4.0).abs() < 1e-9);
    }

    #[test]
    fn zero_coefficient_removal_is_free() {
        let d = crate::dictionary::demo_dictionary(crate::dictionary::demo_grid()).unwrap();
        let s = build_duals(&d, &ForwardOptions::default()).unwrap();
        let mut c = crate::dictionary::DEMO_COEFFICIENTS.to_vec();
        c[4] = 0.0;
        let f = d.synthesize(&c).unwrap();
        let mut a = s.fit(&f).unwrap();
        // pin the coefficient to an exact zero so the update is a no-op
        let mut coeffs = a.coeffs().to_vec();
        coeffs[4] = 0.0;
        a = Approximation::from_parts(a.ids().to_vec(), coeffs, a.approx_norm_sq(), f);
        assert_eq!(impact(&s, &a, AtomId(4)).unwrap(), 0.0);
        let r = downdate_coeffs(&s, &a, AtomId(4)).unwrap();
        assert_eq!(r.approx_norm_sq(), a.approx_norm_sq());
        for id in r.ids() {
            assert!((r.coeff(*id).unwrap() - a.coeff(*id).unwrap()).abs() < 1e-12);
        }
    }

    #[test]
    fn ties_go_to_lowest_id() {
        let s = orthonormal3();
        let a = with_coeffs(&s, &[2.0, 2.0, 2.0]);
        let imps = impacts(&s, &a).unwrap();
        // values may differ in the last bits; the tie tolerance absorbs that
        assert_eq!(minimizer_set(&imps).len(), 3);
        assert_eq!(select_removal(&s, &a).unwrap(), AtomId(0));
    }

    #[test]
    fn removal_errors() {
        let s = orthonormal3();
        assert!(matches!(downdate_duals(&s, AtomId(9)), Err(Error::UnknownAtom(_))));
        let r = downdate_duals(&downdate_duals(&s, AtomId(0)).unwrap(), AtomId(1)).unwrap();
        assert!(matches!(downdate_duals(&r, AtomId(2)), Err(Error::LastAtom(_))));
        assert!(matches!(psi_flip(&r, AtomId(2)), Err(Error::LastAtom(_))));
        assert!(matches!(downdate_duals(&r, AtomId(0)), Err(Error::UnknownAtom(_))));
    }

    #[test]
    fn corrupted_state_is_detected() {
        let s = orthonormal3();
        let mut duals = s.duals().to_vec();
        duals[1] = Signal::zeros(*s.grid());
        let bad = DualState::from_duals(s.dictionary().clone(), duals).unwrap();
        assert!(matches!(
            downdate_duals(&bad, AtomId(1)),
            Err(Error::IllConditioned { .. })
        ));
    }

    #[test]
    fn reduce_rules_on_orthonormal_set() {
        let s = orthonormal3();
        let a = with_coeffs(&s, &[3.0, 1.0, 2.0]);

        let (_, _, t) = reduce(&s, &a, &StoppingRule::ResidualBudget(0.0)).unwrap();
        assert!(t.steps.is_empty());
        assert_eq!(t.stopped_reason, StopReason::BudgetExceeded);

        let (_, _, t) = reduce(&s, &a, &StoppingRule::ResidualBudget(1.5)).unwrap();
        assert_eq!(t.removed_ids(), vec![AtomId(1)]);
        assert_eq!(t.stopped_reason, StopReason::BudgetExceeded);

        let (_, _, t) = reduce(&s, &a, &StoppingRule::ResidualBudget(100.0)).unwrap();
        assert_eq!(t.removed_ids(), vec![AtomId(1), AtomId(2)]);
        assert_eq!(t.stopped_reason, StopReason::Exhausted);

        let (fs, fa, t) = reduce(&s, &a, &StoppingRule::TargetCount(1)).unwrap();
        assert_eq!(t.removed_ids(), vec![AtomId(1), AtomId(2)]);
        assert_eq!(fs.ids(), vec![AtomId(0)]);
        assert!((fa.coeffs()[0] - 3.0).abs() < 1e-10);
        assert!((t.initial_norm_sq - t.cumulative_impact() - fa.approx_norm_sq()).abs() < 1e-9);

        let order = StoppingRule::ExplicitOrder(vec![AtomId(0)]);
        let (_, _, t) = reduce(&s, &a, &order).unwrap();
        assert_eq!(t.steps.len(), 1);
        assert!((t.steps[0].impact - 9.0).abs() < 1e-9);

        let bad = StoppingRule::ExplicitOrder(vec![AtomId(0), AtomId(0)]);
        assert!(matches!(reduce(&s, &a, &bad), Err(Error::UnknownAtom(_))));
        assert!(reduce(&s, &a, &StoppingRule::TargetCount(0)).is_err());
        assert!(reduce(&s, &a, &StoppingRule::ResidualBudget(-1.0)).is_err());
    }

    #[test]
    fn trace_json_field_order() {
        let s = orthonormal3();
        let a = with_coeffs(&s, &[3.0, 1.0, 2.0]);
        let (_, _, t) = reduce(&s, &a, &StoppingRule::TargetCount(2)).unwrap();
        let text = t.to_json().unwrap();
        let pos = |k: &str| text.find(&format!("\"{k}\"")).unwrap();
        assert!(pos("delta") < pos("initial_norm_sq"));
        assert!(pos("initial_norm_sq") < pos("steps"));
        assert!(pos("steps") < pos("stopped_reason"));
        assert!(pos("removed_id") < pos("label"));
        assert!(pos("label") < pos("impact"));
        let v: serde_json::Value = serde_json::from_str(&text).unwrap();
        assert_eq!(v["stopped_reason"], "TargetCount");
        assert!(v["delta"].is_null());
        assert_eq!(v["steps"][0]["removed_id"], 1);
        assert_eq!(v["steps"][0]["label"], "e1");
    }

    #[test]
    fn truncation_zeroes_dropped_terms() {
        let s = orthonormal3();
        let a = with_coeffs(&s, &[3.0, 1.0, 2.0]);
        let t = naive_truncation(&s, &a, &[AtomId(1)]).unwrap();
        let want = s.dictionary().synthesize(&[3.0, 0.0, 2.0]).unwrap();
        assert!(norm(&t.sub(&want).unwrap()) < 1e-10);
        assert!(naive_truncation(&s, &a, &[AtomId(7)]).is_err());
    }
}
