//! Finite truncations of Kolmogorov tensor powers: slot permutations,
//! projections, exchangeability tests, and degree-indexed state families.
//!
//! Infinite powers are represented only through projection-consistent
//! families up to a chosen maximum degree; the universal property is
//! exercised by [`family_check`] rather than by an actual colimit object.
//! Slots are ordered left to right and an optional side factor always
//! comes last.

use crate::algebra::{AlgebraElement, BlockAlgebra};
use crate::definetti::StateOnAlgebra;
use crate::error::{Error, Result};
use crate::linalg::{cr, CMat};
use crate::morphism::UMap;

/// Shape descriptor for `A^{⊗n} ⊗ B`.
#[derive(Clone, Debug, PartialEq)]
pub struct TensorPower {
    base: BlockAlgebra,
    degree: usize,
    side: BlockAlgebra,
}

impl TensorPower {
    pub fn new(base: BlockAlgebra, degree: usize) -> Self {
        Self { base, degree, side: BlockAlgebra::scalar() }
    }

    pub fn with_side(base: BlockAlgebra, degree: usize, side: BlockAlgebra) -> Self {
        Self { base, degree, side }
    }

    pub fn base(&self) -> &BlockAlgebra {
        &self.base
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn side(&self) -> &BlockAlgebra {
        &self.side
    }

    /// The algebra `base^{⊗degree} ⊗ side`; degree 0 with trivial side is `C`.
    pub fn algebra(&self) -> BlockAlgebra {
        self.base.tensor_power(self.degree).tensor(&self.side)
    }
}

/// Canonical basis index in `a^{⊗n}` of a tuple of per-factor indices.
fn multi_index(a: &BlockAlgebra, parts: &[usize]) -> usize {
    let mut power = BlockAlgebra::scalar();
    let mut idx = 0;
    for &p in parts {
        idx = power.tensor_basis_index(a, idx, p);
        power = power.tensor(a);
    }
    idx
}

fn check_permutation(n: usize, sigma: &[usize]) -> Result<()> {
    let mut seen = vec![false; n];
    if sigma.len() != n || sigma.iter().any(|&s| s >= n || std::mem::replace(&mut seen[s], true)) {
        return Err(Error::InvalidPermutation { n, got: sigma.to_vec() });
    }
    Ok(())
}

fn each_tuple(dim: usize, len: usize, mut f: impl FnMut(&[usize])) {
    let mut tuple = vec![0usize; len];
    let total = dim.pow(len as u32);
    for flat in 0..total {
        let mut rem = flat;
        for t in (0..len).rev() {
            tuple[t] = rem % dim;
            rem /= dim;
        }
        f(&tuple);
    }
}

/// The deterministic morphism `A^{⊗n} → A^{⊗n}` permuting tensor slots
/// (0-based); satisfies `A_σ ∘ A_τ = A_{σ∘τ}` with `(σ∘τ)(k) = σ(τ(k))`.
pub fn permutation_morphism(a: &BlockAlgebra, n: usize, sigma: &[usize]) -> Result<UMap> {
    check_permutation(n, sigma)?;
    let power = a.tensor_power(n);
    let dim = power.dim();
    let mut op = CMat::zeros(dim, dim);
    let mut image = vec![0usize; n];
    each_tuple(a.dim(), n, |tuple| {
        // the op-map sends ⊗_t y_t to ⊗_t y_{σ(t)}
        for t in 0..n {
            image[t] = tuple[sigma[t]];
        }
        op[(multi_index(a, &image), multi_index(a, tuple))] = cr(1.0);
    });
    UMap::from_op_matrix(power.clone(), power, op)
}

/// The projection `A^{⊗n} → A^{⊗|keep|}` keeping the listed slots
/// (0-based, strictly increasing); its op-map inserts units in the
/// deleted slots.
pub fn projection(a: &BlockAlgebra, n: usize, keep: &[usize]) -> Result<UMap> {
    if keep.windows(2).any(|w| w[0] >= w[1]) || keep.iter().any(|&s| s >= n) {
        return Err(Error::InvalidSlots { n, got: keep.to_vec() });
    }
    let dom = a.tensor_power(n);
    let cod = a.tensor_power(keep.len());
    let unit = a.unit();
    let mut op = CMat::zeros(dom.dim(), cod.dim());
    each_tuple(a.dim(), keep.len(), |tuple| {
        let mut el = BlockAlgebra::scalar().unit();
        let mut k = 0usize;
        for slot in 0..n {
            if k < keep.len() && keep[k] == slot {
                el = el.tensor(&a.basis_element(tuple[k]));
                k += 1;
            } else {
                el = el.tensor(&unit);
            }
        }
        op.set_column(multi_index(a, tuple), &el.coords());
    });
    UMap::from_op_matrix(dom, cod, op)
}

/// Whether a morphism into `A^{⊗n} ⊗ B` is invariant under permutations
/// of the first `n` factors; adjacent transpositions generate them all.
pub fn is_exchangeable(phi: &UMap, tp: &TensorPower, tol: f64) -> Result<bool> {
    let alg = tp.algebra();
    if phi.cod() != &alg {
        return Err(Error::ShapeMismatch {
            expected: alg.to_string(),
            found: phi.cod().to_string(),
        });
    }
    for t in 0..tp.degree().saturating_sub(1) {
        let perm = adjacent_transposition_map(tp, t)?;
        let moved = UMap::compose(&perm, phi)?;
        if moved.op_distance(phi) > tol * (1.0 + phi.op_norm()) {
            return Ok(false);
        }
    }
    Ok(true)
}

fn adjacent_transposition_map(tp: &TensorPower, t: usize) -> Result<UMap> {
    let n = tp.degree();
    let mut sigma: Vec<usize> = (0..n).collect();
    sigma.swap(t, t + 1);
    let perm = permutation_morphism(tp.base(), n, &sigma)?;
    Ok(UMap::tensor(&perm, &UMap::identity(tp.side())))
}

/// Exchangeability of a state, tested on its evaluation functional.
pub fn state_exchangeable(state: &StateOnAlgebra, tp: &TensorPower, tol: f64) -> Result<bool> {
    Ok(state_exchange_residual(state, tp)? <= tol)
}

fn state_exchange_residual(state: &StateOnAlgebra, tp: &TensorPower) -> Result<f64> {
    let alg = tp.algebra();
    if state.parent() != &alg {
        return Err(Error::ShapeMismatch {
            expected: alg.to_string(),
            found: state.parent().to_string(),
        });
    }
    let row = state.functional_row().transpose();
    let mut worst = 0.0_f64;
    for t in 0..tp.degree().saturating_sub(1) {
        let perm = adjacent_transposition_map(tp, t)?;
        let moved = &row * perm.op_matrix();
        let resid = (&moved - &row).iter().map(|z| z.norm()).fold(0.0, f64::max);
        worst = worst.max(resid);
    }
    Ok(worst)
}

/// A degree-indexed, projection-consistent family of states on
/// `base^{⊗n} ⊗ side`, `n = 0..=max_degree`; the desk-scale surrogate for
/// a state on an infinite power.
#[derive(Clone, Debug)]
pub struct ExchangeableFamily {
    base: BlockAlgebra,
    side: BlockAlgebra,
    states: Vec<StateOnAlgebra>,
}

impl ExchangeableFamily {
    pub fn new(base: BlockAlgebra, side: BlockAlgebra, states: Vec<StateOnAlgebra>) -> Result<Self> {
        if states.is_empty() {
            return Err(Error::Invalid("a family needs at least degree 0".into()));
        }
        for (n, st) in states.iter().enumerate() {
            let expected = TensorPower::with_side(base.clone(), n, side.clone()).algebra();
            if st.parent() != &expected {
                return Err(Error::ShapeMismatch {
                    expected: format!("degree-{n} state on {expected}"),
                    found: st.parent().to_string(),
                });
            }
        }
        Ok(Self { base, side, states })
    }

    /// Build a family from its top-degree state by marginalizing along the
    /// unital inclusions (last base slot first).
    pub fn from_top(base: BlockAlgebra, side: BlockAlgebra, top: StateOnAlgebra, degree: usize) -> Result<Self> {
        let expected = TensorPower::with_side(base.clone(), degree, side.clone()).algebra();
        if top.parent() != &expected {
            return Err(Error::ShapeMismatch {
                expected: expected.to_string(),
                found: top.parent().to_string(),
            });
        }
        let mut states = vec![top];
        for n in (0..degree).rev() {
            let upper = states.last().expect("nonempty");
            let keep: Vec<usize> = (0..n).collect();
            let proj = projection(&base, n + 1, &keep)?;
            let incl = UMap::tensor(&proj, &UMap::identity(&side));
            let row = upper.functional_row().transpose();
            let lower_row = &row * incl.op_matrix();
            let alg = TensorPower::with_side(base.clone(), n, side.clone()).algebra();
            states.push(StateOnAlgebra::from_functional(
                &alg,
                lower_row.transpose().as_slice(),
                1e-9,
            )?);
        }
        states.reverse();
        Self::new(base, side, states)
    }

    pub fn base(&self) -> &BlockAlgebra {
        &self.base
    }

    pub fn side(&self) -> &BlockAlgebra {
        &self.side
    }

    pub fn max_degree(&self) -> usize {
        self.states.len() - 1
    }

    pub fn state(&self, degree: usize) -> Result<&StateOnAlgebra> {
        self.states.get(degree).ok_or(Error::InsufficientDegree {
            needed: degree,
            available: self.max_degree(),
        })
    }

    pub fn states(&self) -> &[StateOnAlgebra] {
        &self.states
    }

    pub fn degree_algebra(&self, degree: usize) -> BlockAlgebra {
        TensorPower::with_side(self.base.clone(), degree, self.side.clone()).algebra()
    }

    pub fn evaluate(&self, degree: usize, x: &AlgebraElement) -> Result<crate::linalg::C64> {
        self.state(degree)?.evaluate(x)
    }

    /// Degree-wise convex combination; preserves exchangeability and
    /// consistency.
    pub fn mix(lambda: f64, a: &ExchangeableFamily, b: &ExchangeableFamily) -> Result<ExchangeableFamily> {
        if a.base != b.base || a.side != b.side || a.max_degree() != b.max_degree() {
            return Err(Error::Invalid("cannot mix families of different shapes".into()));
        }
        let states = a
            .states
            .iter()
            .zip(&b.states)
            .map(|(x, y)| StateOnAlgebra::mix(&[(lambda, x.clone()), (1.0 - lambda, y.clone())]))
            .collect::<Result<Vec<_>>>()?;
        ExchangeableFamily::new(a.base.clone(), a.side.clone(), states)
    }
}

/// Validation report for [`family_check`].
#[derive(Clone, Debug)]
pub struct FamilyReport {
    pub exchangeable: bool,
    pub consistent: bool,
    pub max_permutation_residual: f64,
    pub max_consistency_residual: f64,
}

impl FamilyReport {
    pub fn is_ok(&self) -> bool {
        self.exchangeable && self.consistent
    }
}

/// Validate permutation invariance at every degree and projection
/// consistency along the unital inclusion in every slot.
pub fn family_check(fam: &ExchangeableFamily, tol: f64) -> Result<FamilyReport> {
    let mut perm_resid = 0.0_f64;
    for n in 0..=fam.max_degree() {
        let tp = TensorPower::with_side(fam.base().clone(), n, fam.side().clone());
        perm_resid = perm_resid.max(state_exchange_residual(fam.state(n)?, &tp)?);
    }
    let mut cons_resid = 0.0_f64;
    for n in 0..fam.max_degree() {
        let upper_row = fam.state(n + 1)?.functional_row().transpose();
        let lower_row = fam.state(n)?.functional_row().transpose();
        for deleted in 0..=n {
            let keep: Vec<usize> = (0..=n).filter(|&s| s != deleted).collect();
            let proj = projection(fam.base(), n + 1, &keep)?;
            let incl = UMap::tensor(&proj, &UMap::identity(fam.side()));
            let restricted = &upper_row * incl.op_matrix();
            let resid = (&restricted - &lower_row)
                .iter()
                .map(|z| z.norm())
                .fold(0.0, f64::max);
            cons_resid = cons_resid.max(resid);
        }
    }
    Ok(FamilyReport {
        exchangeable: perm_resid <= tol,
        consistent: cons_resid <= tol,
        max_permutation_residual: perm_resid,
        max_consistency_residual: cons_resid,
    })
}

/// The family with degree-`n` member `Σ_j λ_j ψ_j^{(n)} ⊗ ω_j`; passes
/// [`family_check`] by construction.
pub fn mixture_family(
    weights: &[f64],
    states: &[StateOnAlgebra],
    sides: &[StateOnAlgebra],
    max_degree: usize,
) -> Result<ExchangeableFamily> {
    if weights.is_empty() || weights.len() != states.len() || weights.len() != sides.len() {
        return Err(Error::Invalid("weights, states and sides must have equal nonzero length".into()));
    }
    let sum: f64 = weights.iter().sum();
    if weights.iter().any(|&w| w <= 0.0) || (sum - 1.0).abs() > 1e-9 {
        return Err(Error::WeightNormalization { sum });
    }
    let base = states[0].parent().clone();
    let side = sides[0].parent().clone();
    let mut members = Vec::with_capacity(max_degree + 1);
    for n in 0..=max_degree {
        let parts: Vec<(f64, StateOnAlgebra)> = weights
            .iter()
            .zip(states.iter().zip(sides))
            .map(|(&w, (psi, omega))| (w, psi.power(n).product(omega)))
            .collect();
        members.push(StateOnAlgebra::mix(&parts)?);
    }
    ExchangeableFamily::new(base, side, members)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sampling;

    fn compose_perm(s: &[usize], t: &[usize]) -> Vec<usize> {
        t.iter().map(|&k| s[k]).collect()
    }

    #[test]
    fn identity_permutation() {
        let a = BlockAlgebra::classical(2);
        let p = permutation_morphism(&a, 3, &[0, 1, 2]).unwrap();
        assert_eq!(p.op_distance(&UMap::identity(&a.tensor_power(3))), 0.0);
    }

    #[test]
    fn transposition_is_swap() {
        let a = BlockAlgebra::matrix(2).unwrap();
        let p = permutation_morphism(&a, 2, &[1, 0]).unwrap();
        assert_eq!(p.op_distance(&UMap::swap(&a, &a)), 0.0);
    }

    #[test]
    fn permutations_form_a_group_action() {
        let a = BlockAlgebra::new(vec![1, 2]).unwrap();
        let sigmas: [&[usize]; 3] = [&[1, 0, 2], &[2, 0, 1], &[0, 2, 1]];
        for s in sigmas {
            for t in sigmas {
                let ps = permutation_morphism(&a, 3, s).unwrap();
                let pt = permutation_morphism(&a, 3, t).unwrap();
                let comp = UMap::compose(&ps, &pt).unwrap();
                let direct = permutation_morphism(&a, 3, &compose_perm(s, t)).unwrap();
                assert_eq!(comp.op_distance(&direct), 0.0, "σ={s:?} τ={t:?}");
            }
        }
        // slot permutations are *-homomorphisms
        let p = permutation_morphism(&a, 3, &[2, 0, 1]).unwrap();
        assert!(p.is_deterministic(1e-12));
    }

    #[test]
    fn invalid_permutations_rejected() {
        let a = BlockAlgebra::classical(2);
        assert!(permutation_morphism(&a, 2, &[0, 0]).is_err());
        assert!(permutation_morphism(&a, 2, &[0, 2]).is_err());
        assert!(permutation_morphism(&a, 2, &[0]).is_err());
    }

    #[test]
    fn projection_boundary_cases() {
        let a = BlockAlgebra::classical(2);
        let all = projection(&a, 3, &[0, 1, 2]).unwrap();
        assert_eq!(all.op_distance(&UMap::identity(&a.tensor_power(3))), 0.0);
        let none = projection(&a, 3, &[]).unwrap();
        assert_eq!(none.op_distance(&UMap::delete(&a.tensor_power(3))), 0.0);
        assert!(projection(&a, 3, &[1, 1]).is_err());
        assert!(projection(&a, 3, &[3]).is_err());
    }

    #[test]
    fn projections_compose_as_slot_restrictions() {
        let a = BlockAlgebra::matrix(2).unwrap();
        // keep {0,2} out of 3, then keep {1} of the result = slot 2 overall
        let p1 = projection(&a, 3, &[0, 2]).unwrap();
        let p2 = projection(&a, 2, &[1]).unwrap();
        let comp = UMap::compose(&p2, &p1).unwrap();
        let direct = projection(&a, 3, &[2]).unwrap();
        assert_eq!(comp.op_distance(&direct), 0.0);
    }

    #[test]
    fn product_powers_are_exchangeable() {
        let mut rng = sampling::rng(2);
        let a = BlockAlgebra::matrix(2).unwrap();
        let psi = sampling::random_state(&mut rng, &a);
        let tp = TensorPower::new(a.clone(), 3);
        let st = psi.power(3);
        assert!(state_exchangeable(&st, &tp, 1e-12).unwrap());
        // a generic non-symmetric product is not
        let psi2 = sampling::random_state(&mut rng, &a);
        let prod = psi.product(&psi2);
        let tp2 = TensorPower::new(a.clone(), 2);
        assert!(!state_exchangeable(&prod, &tp2, 1e-9).unwrap());
    }

    #[test]
    fn morphism_exchangeability() {
        let mut rng = sampling::rng(4);
        let a = BlockAlgebra::classical(2);
        let b = BlockAlgebra::classical(2);
        let omega = sampling::random_state_map(&mut rng, &b);
        let psi = sampling::random_state_map(&mut rng, &a);
        // ψ^{(3)} ⊗ ω as a morphism C → A^{⊗3} ⊗ B
        let phi = UMap::tensor(&psi.power(3), &omega);
        let tp = TensorPower::with_side(a, 3, b);
        assert!(is_exchangeable(&phi, &tp, 1e-10).unwrap());
    }

    #[test]
    fn mixture_family_checks_out() {
        let mut rng = sampling::rng(6);
        let a = BlockAlgebra::classical(2);
        let atoms: Vec<StateOnAlgebra> =
            (0..2).map(|_| sampling::random_state(&mut rng, &a)).collect();
        let trivial = StateOnAlgebra::unit_state();
        let fam = mixture_family(&[0.4, 0.6], &atoms, &[trivial.clone(), trivial], 3).unwrap();
        let rep = family_check(&fam, 1e-12).unwrap();
        assert!(rep.is_ok(), "{rep:?}");
        assert!(rep.max_consistency_residual <= 1e-13);
    }

    #[test]
    fn weight_normalization_enforced() {
        let mut rng = sampling::rng(8);
        let a = BlockAlgebra::classical(2);
        let atoms: Vec<StateOnAlgebra> =
            (0..2).map(|_| sampling::random_state(&mut rng, &a)).collect();
        let trivial = StateOnAlgebra::unit_state();
        assert!(matches!(
            mixture_family(&[0.4, 0.7], &atoms, &[trivial.clone(), trivial], 2),
            Err(Error::WeightNormalization { .. })
        ));
    }

    #[test]
    fn family_from_top_marginals() {
        let mut rng = sampling::rng(10);
        let a = BlockAlgebra::matrix(2).unwrap();
        let psi = sampling::random_state(&mut rng, &a);
        let top = psi.power(2);
        let fam = ExchangeableFamily::from_top(a.clone(), BlockAlgebra::scalar(), top, 2).unwrap();
        let rep = family_check(&fam, 1e-10).unwrap();
        assert!(rep.is_ok());
        // degree-1 member is ψ itself
        let d1 = fam.state(1).unwrap();
        assert!((d1.functional_row() - psi.functional_row()).norm() < 1e-12);
    }

    #[test]
    fn mixing_families_preserves_validity() {
        let mut rng = sampling::rng(12);
        let a = BlockAlgebra::classical(2);
        let trivial = StateOnAlgebra::unit_state();
        let f1 = mixture_family(
            &[1.0],
            &[sampling::random_state(&mut rng, &a)],
            &[trivial.clone()],
            3,
        )
        .unwrap();
        let f2 = mixture_family(
            &[1.0],
            &[sampling::random_state(&mut rng, &a)],
            &[trivial],
            3,
        )
        .unwrap();
        let mixed = ExchangeableFamily::mix(0.3, &f1, &f2).unwrap();
        assert!(family_check(&mixed, 1e-11).unwrap().is_ok());
    }
}
