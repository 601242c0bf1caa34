//! Left/right/symmetric nullspaces of completely positive unital maps and
//! the almost-sure-equality decision procedures built on them.
//!
//! For a CPU map `ω^op: B ⇝ A`, the right nullspace `{x | ω^op(x*x) = 0}`
//! is computed as the kernel of the PSD Gram form `G_ij = τ(b_i* b_j)`
//! with `τ = normalized-trace ∘ ω^op`: since `ω^op(x*x)` is a positive
//! element, it vanishes exactly when its trace does, which turns the
//! nullspace into a single Hermitian kernel problem. The left nullspace is
//! the star of the right one, and the symmetric nullspace is the largest
//! two-sided ideal inside, obtained from the joint system
//! `x·b_j ∈ N for all basis b_j`.

use crate::algebra::{AlgebraElement, BlockAlgebra};
use crate::error::{Error, Result};
use crate::linalg::{self, cr, CMat, CVec};
use crate::morphism::UMap;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum NullspaceKind {
    Left,
    Right,
    Symmetric,
}

/// Almost-sure-equality flavor.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum AsMode {
    Left,
    Right,
    Both,
    Symmetric,
}

impl AsMode {
    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "left" => Ok(AsMode::Left),
            "right" => Ok(AsMode::Right),
            "both" => Ok(AsMode::Both),
            "symmetric" => Ok(AsMode::Symmetric),
            _ => Err(Error::Invalid(format!("unknown mode `{s}`"))),
        }
    }
}

/// Hilbert–Schmidt-orthonormal basis of a nullspace inside `parent`.
#[derive(Clone, Debug)]
pub struct NullspaceBasis {
    kind: NullspaceKind,
    parent: BlockAlgebra,
    basis: Vec<AlgebraElement>,
}

impl NullspaceBasis {
    pub fn kind(&self) -> NullspaceKind {
        self.kind
    }

    pub fn parent(&self) -> &BlockAlgebra {
        &self.parent
    }

    pub fn basis(&self) -> &[AlgebraElement] {
        &self.basis
    }

    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    /// Residual of the orthogonal projection of `x` onto the span.
    pub fn projection_residual(&self, x: &AlgebraElement) -> Result<f64> {
        let mut rem = x.clone();
        for b in &self.basis {
            let coeff = b.hs_inner(&rem)?;
            rem = rem.try_sub(&b.scale(coeff))?;
        }
        Ok(rem.hs_norm())
    }

    /// Membership up to `tol` relative to the Hilbert–Schmidt norm.
    pub fn contains(&self, x: &AlgebraElement, tol: f64) -> Result<bool> {
        Ok(self.projection_residual(x)? <= tol * (1.0 + x.hs_norm()))
    }
}

fn require_cpu(omega: &UMap) -> Result<()> {
    if !omega.is_cpu() {
        return Err(Error::NotCompletelyPositive {
            min_eig: omega.choi().min_eigenvalue(),
        });
    }
    Ok(())
}

/// Gram matrix `G_ij = τ(b_i* b_j)` of the functional
/// `τ = normalized-trace ∘ ω^op` on the matrix-unit basis of `cod(ω)`.
///
/// `b_i* b_j` of two matrix units is either zero or a matrix unit, so the
/// Gram matrix is assembled exactly from the values of `τ` on the basis.
fn gram_matrix(omega: &UMap) -> Result<CMat> {
    let b = omega.cod().clone();
    let dim = b.dim();
    let tau: Vec<_> = (0..dim)
        .map(|k| {
            omega
                .apply_op(&b.basis_element(k))
                .map(|img| img.normalized_trace())
        })
        .collect::<Result<Vec<_>>>()?;
    let mut g = CMat::zeros(dim, dim);
    for i in 0..dim {
        let (bi, r1, c1) = b.basis_coords(i);
        for j in 0..dim {
            let (bj, r2, c2) = b.basis_coords(j);
            // E_{r1 c1}* E_{r2 c2} = δ_{b} δ_{r1 r2} E_{c1 c2}
            if bi == bj && r1 == r2 {
                g[(i, j)] = tau[b.basis_index(bi, c1, c2)];
            }
        }
    }
    Ok(linalg::hermitize(&g))
}

fn elements_from_kernel(parent: &BlockAlgebra, kernel: Vec<CVec>) -> Vec<AlgebraElement> {
    kernel
        .into_iter()
        .map(|v| parent.element_from_coords(&v).expect("kernel shape"))
        .collect()
}

/// `N_ω = {x | ω^op(x*x) = 0}`, the largest left ideal in the kernel.
pub fn right_nullspace(omega: &UMap, tol: f64) -> Result<NullspaceBasis> {
    require_cpu(omega)?;
    let g = gram_matrix(omega)?;
    let basis = elements_from_kernel(omega.cod(), linalg::psd_kernel(&g, tol));
    Ok(NullspaceBasis { kind: NullspaceKind::Right, parent: omega.cod().clone(), basis })
}

/// `{x | ω^op(xx*) = 0}`, the star of the right nullspace; a right ideal.
pub fn left_nullspace(omega: &UMap, tol: f64) -> Result<NullspaceBasis> {
    let right = right_nullspace(omega, tol)?;
    Ok(NullspaceBasis {
        kind: NullspaceKind::Left,
        parent: right.parent,
        basis: right.basis.iter().map(AlgebraElement::star).collect(),
    })
}

/// The largest two-sided *-closed ideal contained in the kernel, computed
/// as `{x | x·b_j ∈ N_ω for every basis b_j}` via the accumulated PSD form
/// `Σ_j R_j† G R_j`. The result is verified to be a two-sided *-ideal.
pub fn symmetric_nullspace(omega: &UMap, tol: f64) -> Result<NullspaceBasis> {
    require_cpu(omega)?;
    let b = omega.cod().clone();
    let dim = b.dim();
    let g = gram_matrix(omega)?;
    let mut m = CMat::zeros(dim, dim);
    for j in 0..dim {
        let rj = right_mult_matrix(&b, j);
        m += rj.adjoint() * &g * rj;
    }
    let basis = elements_from_kernel(&b, linalg::psd_kernel(&linalg::hermitize(&m), tol));
    let ns = NullspaceBasis { kind: NullspaceKind::Symmetric, parent: b.clone(), basis };

    // closure check: two-sided and *-closed
    let check_tol = (tol * 1e3).max(1e-7);
    for x in ns.basis() {
        let star_res = ns.projection_residual(&x.star())?;
        if star_res > check_tol {
            return Err(Error::ConsistencyCheck { what: "symmetric nullspace *-closure".into(), residual: star_res });
        }
        for u in b.basis() {
            let r1 = ns.projection_residual(&x.try_mul(&u)?)?;
            let r2 = ns.projection_residual(&u.try_mul(x)?)?;
            if r1.max(r2) > check_tol {
                return Err(Error::ConsistencyCheck {
                    what: "symmetric nullspace ideal closure".into(),
                    residual: r1.max(r2),
                });
            }
        }
    }
    Ok(ns)
}

pub fn nullspace(omega: &UMap, kind: NullspaceKind, tol: f64) -> Result<NullspaceBasis> {
    match kind {
        NullspaceKind::Left => left_nullspace(omega, tol),
        NullspaceKind::Right => right_nullspace(omega, tol),
        NullspaceKind::Symmetric => symmetric_nullspace(omega, tol),
    }
}

/// Matrix of `x ↦ x · b_j` on canonical coordinates.
fn right_mult_matrix(b: &BlockAlgebra, j: usize) -> CMat {
    let dim = b.dim();
    let (bj, r2, c2) = b.basis_coords(j);
    let mut m = CMat::zeros(dim, dim);
    // E_{r c} E_{r2 c2} = δ_{c r2} E_{r c2}
    let n = b.blocks()[bj];
    for r in 0..n {
        m[(b.basis_index(bj, r, c2), b.basis_index(bj, r, r2))] = cr(1.0);
    }
    m
}

/// Decide `φ ≃_ω ψ` in the requested mode by testing membership of
/// `φ^op(y) − ψ^op(y)` in the corresponding nullspace for all basis `y`.
///
/// `ω` must be CPU; `φ` and `ψ` may be arbitrary generalized morphisms
/// with `dom(φ) = dom(ψ) = cod(ω)` and equal codomains.
pub fn as_equal(phi: &UMap, psi: &UMap, omega: &UMap, mode: AsMode, tol: f64) -> Result<bool> {
    if phi.dom() != psi.dom() || phi.cod() != psi.cod() {
        return Err(Error::DomainMismatch {
            expected: format!("{} → {}", phi.dom(), phi.cod()),
            found: format!("{} → {}", psi.dom(), psi.cod()),
        });
    }
    if omega.cod() != phi.dom() {
        return Err(Error::DomainMismatch {
            expected: phi.dom().to_string(),
            found: omega.cod().to_string(),
        });
    }
    let spaces: Vec<NullspaceBasis> = match mode {
        AsMode::Left => vec![left_nullspace(omega, tol)?],
        AsMode::Right => vec![right_nullspace(omega, tol)?],
        AsMode::Both => vec![left_nullspace(omega, tol)?, right_nullspace(omega, tol)?],
        AsMode::Symmetric => vec![symmetric_nullspace(omega, tol)?],
    };
    for y in phi.cod().basis() {
        let d = phi.apply_op(&y)?.try_sub(&psi.apply_op(&y)?)?;
        for ns in &spaces {
            if !ns.contains(&d, tol * 1e2)? {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{cr, CMat};
    use crate::sampling;

    /// The state `x ↦ ½ tr(diag(1,1,0,0)·x)` on M₄ as a morphism C → M₄.
    fn half_trace_top_left() -> UMap {
        let m4 = BlockAlgebra::matrix(4).unwrap();
        let mut d = CMat::zeros(4, 4);
        d[(0, 0)] = cr(0.5);
        d[(1, 1)] = cr(0.5);
        sampling::state_map_from_density(&m4, &[d])
    }

    /// op-map M₂ ⇝ M₄, x ↦ diag(x, τ(x), τ(x)) with τ the tracial state;
    /// the normalization makes the map unital.
    fn phi_m4() -> UMap {
        let m4 = BlockAlgebra::matrix(4).unwrap();
        let m2 = BlockAlgebra::matrix(2).unwrap();
        UMap::from_op_action(m4.clone(), m2, |x| {
            let mut out = CMat::zeros(4, 4);
            out.view_mut((0, 0), (2, 2)).copy_from(x.block(0));
            let t = x.block(0).trace() * cr(0.5);
            out[(2, 2)] = t;
            out[(3, 3)] = t;
            m4.element(vec![out]).unwrap()
        })
    }

    /// op-map M₂ ⇝ M₄, x ↦ diag(x, x).
    fn psi_m4() -> UMap {
        let m4 = BlockAlgebra::matrix(4).unwrap();
        let m2 = BlockAlgebra::matrix(2).unwrap();
        UMap::from_op_action(m4.clone(), m2, |x| {
            let mut out = CMat::zeros(4, 4);
            out.view_mut((0, 0), (2, 2)).copy_from(x.block(0));
            out.view_mut((2, 2), (2, 2)).copy_from(x.block(0));
            m4.element(vec![out]).unwrap()
        })
    }

    #[test]
    fn m4_right_nullspace_is_the_killed_columns() {
        let omega = half_trace_top_left();
        assert!(omega.is_cpu());
        let ns = right_nullspace(&omega, 1e-10).unwrap();
        assert_eq!(ns.dim(), 8);
        let m4 = BlockAlgebra::matrix(4).unwrap();
        // brute force over matrix units: ω(E_kl* E_kl) = ω(E_ll)
        for k in 0..4 {
            for l in 0..4 {
                let u = m4.basis_element(m4.basis_index(0, k, l));
                let expected = l >= 2;
                assert_eq!(ns.contains(&u, 1e-8).unwrap(), expected, "unit ({k},{l})");
            }
        }
        // left nullspace kills the rows instead
        let left = left_nullspace(&omega, 1e-10).unwrap();
        let u_row = m4.basis_element(m4.basis_index(0, 2, 0));
        assert!(left.contains(&u_row, 1e-8).unwrap());
        assert!(!ns.contains(&u_row, 1e-8).unwrap());
    }

    #[test]
    fn faithful_state_has_trivial_nullspace() {
        let m2 = BlockAlgebra::matrix(2).unwrap();
        let tr = sampling::state_map_from_density(&m2, &[CMat::identity(2, 2).scale(0.5)]);
        let ns = right_nullspace(&tr, 1e-10).unwrap();
        assert_eq!(ns.dim(), 0);
    }

    #[test]
    fn pure_state_on_c2_kills_the_other_coordinate() {
        let c2 = BlockAlgebra::classical(2);
        let omega = sampling::state_map_from_density(
            &c2,
            &[CMat::identity(1, 1), CMat::zeros(1, 1)],
        );
        let ns = right_nullspace(&omega, 1e-10).unwrap();
        assert_eq!(ns.dim(), 1);
        assert!(ns.contains(&c2.basis_element(1), 1e-9).unwrap());
        let sym = symmetric_nullspace(&omega, 1e-10).unwrap();
        assert_eq!(sym.dim(), 1);
    }

    #[test]
    fn symmetric_nullspace_trivial_on_simple_algebras() {
        let mut rng = sampling::rng(5);
        let m3 = BlockAlgebra::matrix(3).unwrap();
        let omega = sampling::random_cpu(&mut rng, &BlockAlgebra::classical(2), &m3, 2);
        let sym = symmetric_nullspace(&omega, 1e-10).unwrap();
        assert_eq!(sym.dim(), 0);
    }

    #[test]
    fn block_supported_state_keeps_the_complementary_block() {
        // ω on M₂⊕M₃ supported on the M₂ block: symmetric nullspace is all of M₃
        let a = BlockAlgebra::new(vec![2, 3]).unwrap();
        let mut d2 = CMat::zeros(2, 2);
        d2[(0, 0)] = cr(0.7);
        d2[(1, 1)] = cr(0.3);
        let omega = sampling::state_map_from_density(&a, &[d2, CMat::zeros(3, 3)]);
        let sym = symmetric_nullspace(&omega, 1e-10).unwrap();
        assert_eq!(sym.dim(), 9);
        for k in 0..9 {
            let u = a.basis_element(4 + k);
            assert!(sym.contains(&u, 1e-8).unwrap());
        }
    }

    #[test]
    fn as_equal_counterexample_on_m4() {
        let omega = half_trace_top_left();
        let phi = phi_m4();
        let psi = psi_m4();
        assert!(phi.is_cpu());
        assert!(psi.is_cpu());
        assert!(as_equal(&phi, &psi, &omega, AsMode::Left, 1e-9).unwrap());
        assert!(as_equal(&phi, &psi, &omega, AsMode::Right, 1e-9).unwrap());
        assert!(as_equal(&phi, &psi, &omega, AsMode::Both, 1e-9).unwrap());
        assert!(!as_equal(&phi, &psi, &omega, AsMode::Symmetric, 1e-9).unwrap());
    }

    #[test]
    fn equal_maps_are_as_equal_everywhere() {
        let omega = half_trace_top_left();
        let phi = phi_m4();
        for mode in [AsMode::Left, AsMode::Right, AsMode::Both, AsMode::Symmetric] {
            assert!(as_equal(&phi, &phi, &omega, mode, 1e-9).unwrap());
        }
    }

    #[test]
    fn faithful_omega_separates() {
        let mut rng = sampling::rng(9);
        let m2 = BlockAlgebra::matrix(2).unwrap();
        let c2 = BlockAlgebra::classical(2);
        let omega = sampling::random_cpu(&mut rng, &BlockAlgebra::scalar(), &m2, 3);
        let phi = sampling::random_cpu(&mut rng, &m2, &c2, 2);
        let psi = sampling::random_cpu(&mut rng, &m2, &c2, 2);
        assert!(phi.op_distance(&psi) > 1e-3);
        for mode in [AsMode::Left, AsMode::Right, AsMode::Both, AsMode::Symmetric] {
            assert!(!as_equal(&phi, &psi, &omega, mode, 1e-9).unwrap());
        }
    }

    #[test]
    fn multiplication_nullspace_lemma() {
        let omega = half_trace_top_left();
        let ns = right_nullspace(&omega, 1e-10).unwrap();
        let b = omega.cod().clone();
        for x in ns.basis() {
            for y in b.basis() {
                let v1 = omega.apply_op(&x.star().try_mul(&y).unwrap()).unwrap();
                let v2 = omega.apply_op(&y.star().try_mul(x).unwrap()).unwrap();
                assert!(v1.norm() < 1e-9 && v2.norm() < 1e-9);
            }
        }
    }

    #[test]
    fn selfadjoint_maps_left_iff_right() {
        let mut rng = sampling::rng(21);
        for seed in 0..6 {
            let _ = seed;
            let b = BlockAlgebra::new(vec![2, 2]).unwrap();
            let c = BlockAlgebra::classical(2);
            let omega = sampling::random_cpu_supported(&mut rng, &BlockAlgebra::scalar(), &b, &[0]);
            let phi = sampling::random_cpu(&mut rng, &b, &c, 2);
            let psi = sampling::random_cpu(&mut rng, &b, &c, 2);
            // all three are CPU, hence self-adjoint
            let l = as_equal(&phi, &psi, &omega, AsMode::Left, 1e-9).unwrap();
            let r = as_equal(&phi, &psi, &omega, AsMode::Right, 1e-9).unwrap();
            assert_eq!(l, r);
        }
    }

    #[test]
    fn implication_chain() {
        let mut rng = sampling::rng(33);
        for _ in 0..8 {
            let b = BlockAlgebra::new(vec![2, 1]).unwrap();
            let c = BlockAlgebra::classical(2);
            let omega = sampling::random_cpu_supported(&mut rng, &BlockAlgebra::scalar(), &b, &[0]);
            let phi = sampling::random_cpu(&mut rng, &b, &c, 2);
            let psi = sampling::random_cpu(&mut rng, &b, &c, 2);
            let l = as_equal(&phi, &psi, &omega, AsMode::Left, 1e-9).unwrap();
            let r = as_equal(&phi, &psi, &omega, AsMode::Right, 1e-9).unwrap();
            let both = as_equal(&phi, &psi, &omega, AsMode::Both, 1e-9).unwrap();
            let sym = as_equal(&phi, &psi, &omega, AsMode::Symmetric, 1e-9).unwrap();
            assert!(!sym || both);
            assert!(!both || (l && r));
        }
    }

    #[test]
    fn star_closed_nullspace_makes_all_modes_agree() {
        // block-supported ω has a *-closed right nullspace
        let mut rng = sampling::rng(55);
        let b = BlockAlgebra::new(vec![2, 2]).unwrap();
        let c = BlockAlgebra::classical(2);
        let omega = sampling::random_cpu_supported(&mut rng, &BlockAlgebra::scalar(), &b, &[1]);
        let right = right_nullspace(&omega, 1e-10).unwrap();
        for x in right.basis() {
            assert!(right.contains(&x.star(), 1e-8).unwrap());
        }
        for _ in 0..5 {
            let phi = sampling::random_cpu(&mut rng, &b, &c, 2);
            let psi = sampling::random_cpu(&mut rng, &b, &c, 2);
            let verdicts: Vec<bool> = [AsMode::Left, AsMode::Right, AsMode::Both, AsMode::Symmetric]
                .into_iter()
                .map(|m| as_equal(&phi, &psi, &omega, m, 1e-9).unwrap())
                .collect();
            assert!(verdicts.iter().all(|&v| v == verdicts[0]));
        }
    }

    #[test]
    fn non_cpu_omega_rejected() {
        let mut rng = sampling::rng(3);
        let m2 = BlockAlgebra::matrix(2).unwrap();
        let f = sampling::random_unital(&mut rng, &BlockAlgebra::scalar(), &m2);
        assert!(right_nullspace(&f, 1e-10).is_err());
    }
}
