//! States on block algebras and the analytic de Finetti machinery:
//! conditional states, extremality identities, moment matrices, the
//! exchangeable-power seminorm, and finite-mixture reconstruction.
//!
//! A mixing "measure" is always finitely supported here; the acceptance
//! story is forward-construct-then-recover round trips rather than any
//! Choquet-style integral representation.

use rand::Rng;

use crate::algebra::{AlgebraElement, BlockAlgebra};
use crate::error::{Error, Result};
use crate::linalg::{self, cr, CMat, CVec, C64};
use crate::morphism::UMap;
use crate::power::{self, ExchangeableFamily, TensorPower};

/// A state `ψ(x) = Σ_i w_i tr(ρ_i x_i)`: nonnegative block weights summing
/// to 1 and one unit-trace PSD matrix per block.
#[derive(Clone, Debug)]
pub struct StateOnAlgebra {
    parent: BlockAlgebra,
    weights: Vec<f64>,
    densities: Vec<CMat>,
}

impl StateOnAlgebra {
    pub fn new(
        parent: BlockAlgebra,
        weights: Vec<f64>,
        densities: Vec<CMat>,
        tol: f64,
    ) -> Result<Self> {
        if parent.dim() == 0 {
            return Err(Error::InvalidState("the zero algebra has no states".into()));
        }
        if weights.len() != parent.num_blocks() || densities.len() != parent.num_blocks() {
            return Err(Error::InvalidState(format!(
                "expected {} blocks, got {} weights / {} densities",
                parent.num_blocks(),
                weights.len(),
                densities.len()
            )));
        }
        let wsum: f64 = weights.iter().sum();
        if weights.iter().any(|&w| w < -tol) || (wsum - 1.0).abs() > tol.max(1e-12) * 10.0 {
            return Err(Error::WeightNormalization { sum: wsum });
        }
        let mut canon_w = Vec::with_capacity(weights.len());
        let mut canon_d = Vec::with_capacity(densities.len());
        for ((&w, d), &n) in weights.iter().zip(&densities).zip(parent.blocks()) {
            if d.nrows() != n || d.ncols() != n {
                return Err(Error::InvalidState(format!(
                    "density block is {}×{}, expected {n}×{n}",
                    d.nrows(),
                    d.ncols()
                )));
            }
            if linalg::hermiticity_residual(d) > tol * (1.0 + linalg::max_abs(d)) {
                return Err(Error::InvalidState("density is not Hermitian".into()));
            }
            let h = linalg::hermitize(d);
            if linalg::herm_min_eig(&h) < -tol {
                return Err(Error::InvalidState("density is not PSD".into()));
            }
            let tr = h.trace().re;
            if w > tol && (tr - 1.0).abs() > tol * 100.0 {
                return Err(Error::InvalidState(format!("density trace {tr} is not 1")));
            }
            canon_w.push(w.max(0.0) / wsum);
            canon_d.push(if w > tol && tr > 0.0 {
                h / cr(tr)
            } else {
                CMat::identity(n, n) / cr(n as f64)
            });
        }
        Ok(Self { parent, weights: canon_w, densities: canon_d })
    }

    /// Build from unnormalized PSD per-block matrices `D_i = w_i ρ_i`
    /// whose traces sum to 1.
    pub fn from_density_blocks(parent: BlockAlgebra, blocks: Vec<CMat>, tol: f64) -> Result<Self> {
        let weights: Vec<f64> = blocks.iter().map(|d| d.trace().re).collect();
        let densities = blocks
            .iter()
            .zip(&weights)
            .zip(parent.blocks())
            .map(|((d, &w), &n)| {
                if w > tol {
                    d / cr(w)
                } else {
                    CMat::identity(n, n) / cr(n as f64)
                }
            })
            .collect();
        Self::new(parent, weights, densities, tol)
    }

    fn from_parts_unchecked(parent: BlockAlgebra, weights: Vec<f64>, densities: Vec<CMat>) -> Self {
        Self { parent, weights, densities }
    }

    /// The unique state on the monoidal unit `C`.
    pub fn unit_state() -> Self {
        Self::from_parts_unchecked(BlockAlgebra::scalar(), vec![1.0], vec![CMat::identity(1, 1)])
    }

    /// The tracial state `x ↦ tr(x)/Σn_i` (maximally mixed).
    pub fn tracial(parent: &BlockAlgebra) -> Result<Self> {
        if parent.dim() == 0 {
            return Err(Error::InvalidState("the zero algebra has no states".into()));
        }
        let rep = parent.rep_dim() as f64;
        let weights = parent.blocks().iter().map(|&n| n as f64 / rep).collect();
        let densities = parent
            .blocks()
            .iter()
            .map(|&n| CMat::identity(n, n) / cr(n as f64))
            .collect();
        Ok(Self::from_parts_unchecked(parent.clone(), weights, densities))
    }

    /// The pure state supported on one block with vector `v` (normalized).
    pub fn pure(parent: &BlockAlgebra, block: usize, v: &CVec) -> Result<Self> {
        let n = *parent
            .blocks()
            .get(block)
            .ok_or_else(|| Error::InvalidState(format!("no block {block}")))?;
        if v.len() != n || v.norm() < 1e-12 {
            return Err(Error::InvalidState("bad state vector".into()));
        }
        let u = v.unscale(v.norm());
        let mut weights = vec![0.0; parent.num_blocks()];
        weights[block] = 1.0;
        let densities = parent
            .blocks()
            .iter()
            .enumerate()
            .map(|(i, &m)| {
                if i == block {
                    &u * u.adjoint()
                } else {
                    CMat::identity(m, m) / cr(m as f64)
                }
            })
            .collect();
        Ok(Self::from_parts_unchecked(parent.clone(), weights, densities))
    }

    /// The point mass at coordinate `k` of a commutative algebra, or more
    /// generally the pure state `e_k` of the `k`-th size-1 block.
    pub fn point_mass(parent: &BlockAlgebra, k: usize) -> Result<Self> {
        Self::pure(parent, k, &CVec::from_element(1, cr(1.0)))
    }

    /// The classical state on `C^m` with the given probability vector.
    pub fn classical(parent: &BlockAlgebra, probs: &[f64]) -> Result<Self> {
        if !parent.is_commutative() || probs.len() != parent.num_blocks() {
            return Err(Error::InvalidState("classical states need C^m".into()));
        }
        Self::new(
            parent.clone(),
            probs.to_vec(),
            probs.iter().map(|_| CMat::identity(1, 1)).collect(),
            1e-9,
        )
    }

    pub fn parent(&self) -> &BlockAlgebra {
        &self.parent
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn densities(&self) -> &[CMat] {
        &self.densities
    }

    /// Unnormalized blocks `D_i = w_i ρ_i`.
    pub fn density_blocks(&self) -> Vec<CMat> {
        self.densities
            .iter()
            .zip(&self.weights)
            .map(|(d, &w)| d * cr(w))
            .collect()
    }

    pub fn evaluate(&self, x: &AlgebraElement) -> Result<C64> {
        if x.parent() != &self.parent {
            return Err(Error::ParentMismatch(
                self.parent.to_string(),
                x.parent().to_string(),
            ));
        }
        let mut acc = cr(0.0);
        for ((d, &w), xb) in self.densities.iter().zip(&self.weights).zip(x.mats()) {
            if w != 0.0 {
                acc += (d * xb).trace() * cr(w);
            }
        }
        Ok(acc)
    }

    /// Values on the canonical basis: `ψ(E^{(b)}_{rc}) = D_b[c,r]`.
    pub fn functional_row(&self) -> CVec {
        let dim = self.parent.dim();
        let blocks = self.density_blocks();
        CVec::from_fn(dim, |k, _| {
            let (b, r, c) = self.parent.basis_coords(k);
            blocks[b][(c, r)]
        })
    }

    /// Rebuild a state from its values on the canonical basis.
    pub fn from_functional(parent: &BlockAlgebra, values: &[C64], tol: f64) -> Result<Self> {
        if values.len() != parent.dim() {
            return Err(Error::InvalidState(format!(
                "expected {} values, got {}",
                parent.dim(),
                values.len()
            )));
        }
        let mut blocks = Vec::with_capacity(parent.num_blocks());
        for (b, &n) in parent.blocks().iter().enumerate() {
            blocks.push(CMat::from_fn(n, n, |c, r| values[parent.basis_index(b, r, c)]));
        }
        Self::from_density_blocks(parent.clone(), blocks, tol)
    }

    /// View as a morphism `C → parent` (op-map `parent ⇝ C`).
    pub fn to_map(&self) -> UMap {
        let row = self.functional_row();
        let op = CMat::from_fn(1, self.parent.dim(), |_, k| row[k]);
        UMap::from_op_matrix(BlockAlgebra::scalar(), self.parent.clone(), op).expect("shape")
    }

    /// Read a state off a morphism `C → A`.
    pub fn from_map(m: &UMap, tol: f64) -> Result<Self> {
        if m.dom() != &BlockAlgebra::scalar() {
            return Err(Error::ShapeMismatch {
                expected: "state morphism C → A".into(),
                found: format!("{} → {}", m.dom(), m.cod()),
            });
        }
        let values: Vec<C64> = (0..m.cod().dim()).map(|k| m.op_matrix()[(0, k)]).collect();
        Self::from_functional(m.cod(), &values, tol)
    }

    /// Product state on the tensor algebra.
    pub fn product(&self, other: &StateOnAlgebra) -> StateOnAlgebra {
        let parent = self.parent.tensor(&other.parent);
        let mut weights = Vec::with_capacity(self.weights.len() * other.weights.len());
        let mut densities = Vec::with_capacity(weights.capacity());
        for (wi, di) in self.weights.iter().zip(&self.densities) {
            for (wj, dj) in other.weights.iter().zip(&other.densities) {
                weights.push(wi * wj);
                densities.push(di.kronecker(dj));
            }
        }
        StateOnAlgebra::from_parts_unchecked(parent, weights, densities)
    }

    /// `n`-fold product power `ψ^{(n)}`; degree 0 is the unit state.
    pub fn power(&self, n: usize) -> StateOnAlgebra {
        let mut acc = StateOnAlgebra::unit_state();
        for _ in 0..n {
            acc = acc.product(self);
        }
        acc
    }

    /// Convex combination of states on a common algebra.
    pub fn mix(parts: &[(f64, StateOnAlgebra)]) -> Result<Self> {
        let (first, rest) = parts
            .split_first()
            .ok_or_else(|| Error::Invalid("empty mixture".into()))?;
        let sum: f64 = parts.iter().map(|(l, _)| *l).sum();
        if parts.iter().any(|(l, _)| *l < 0.0) || (sum - 1.0).abs() > 1e-9 {
            return Err(Error::WeightNormalization { sum });
        }
        let parent = first.1.parent.clone();
        let mut blocks = first
            .1
            .density_blocks()
            .into_iter()
            .map(|d| d * cr(first.0))
            .collect::<Vec<_>>();
        for (l, st) in rest {
            if st.parent != parent {
                return Err(Error::ParentMismatch(parent.to_string(), st.parent.to_string()));
            }
            for (acc, d) in blocks.iter_mut().zip(st.density_blocks()) {
                *acc += d * cr(*l);
            }
        }
        Self::from_density_blocks(parent, blocks, 1e-9)
    }

    /// `tr(D²)` for the total density `D = ⊕ w_i ρ_i`.
    pub fn purity(&self) -> f64 {
        self.density_blocks()
            .iter()
            .map(|d| (d * d).trace().re)
            .sum()
    }

    pub fn is_pure(&self, tol: f64) -> bool {
        (self.purity() - 1.0).abs() <= tol
    }

    pub fn approx_eq(&self, other: &StateOnAlgebra, tol: f64) -> bool {
        self.parent == other.parent
            && (self.functional_row() - other.functional_row())
                .iter()
                .all(|z| z.norm() <= tol)
    }
}

// ---------------------------------------------------------------------
// Bloch ball

fn pauli() -> [CMat; 3] {
    let i = C64::new(0.0, 1.0);
    [
        CMat::from_row_slice(2, 2, &[cr(0.0), cr(1.0), cr(1.0), cr(0.0)]),
        CMat::from_row_slice(2, 2, &[cr(0.0), -i, i, cr(0.0)]),
        CMat::from_row_slice(2, 2, &[cr(1.0), cr(0.0), cr(0.0), cr(-1.0)]),
    ]
}

/// The state on `M₂` with density `(1 + r·σ)/2`; requires `‖r‖ ≤ 1`.
pub fn bloch(r: [f64; 3]) -> Result<StateOnAlgebra> {
    let norm = (r[0] * r[0] + r[1] * r[1] + r[2] * r[2]).sqrt();
    if norm > 1.0 + 1e-12 {
        return Err(Error::InvalidState(format!("Bloch vector has norm {norm} > 1")));
    }
    let [sx, sy, sz] = pauli();
    let rho = (CMat::identity(2, 2) + sx * cr(r[0]) + sy * cr(r[1]) + sz * cr(r[2])).scale(0.5);
    StateOnAlgebra::new(BlockAlgebra::matrix(2)?, vec![1.0], vec![rho], 1e-9)
}

/// Pauli expectations `r_k = ψ(σ_k)` of a state on `M₂`.
pub fn bloch_inverse(state: &StateOnAlgebra) -> Result<[f64; 3]> {
    let m2 = BlockAlgebra::matrix(2)?;
    if state.parent() != &m2 {
        return Err(Error::ShapeMismatch {
            expected: "state on M₂".into(),
            found: state.parent().to_string(),
        });
    }
    let mut r = [0.0; 3];
    for (k, s) in pauli().into_iter().enumerate() {
        let el = m2.element(vec![s])?;
        r[k] = state.evaluate(&el)?.re;
    }
    Ok(r)
}

// ---------------------------------------------------------------------
// Conditional states

/// For an exchangeable state `φ` on `base^{⊗n} ⊗ side` and a positive
/// `a ∈ base`, split `y ↦ φ(a ⊗ y)` as `λ·ψ` with `λ = φ(a ⊗ 1)` and `ψ`
/// an exchangeable state on `base^{⊗(n−1)} ⊗ side` (or `None` when
/// `λ = 0`, in which case `|φ(a ⊗ y)| ≤ tol` is asserted on basis `y`).
pub fn conditional_state(
    phi: &StateOnAlgebra,
    base: &BlockAlgebra,
    side: &BlockAlgebra,
    degree: usize,
    a: &AlgebraElement,
    tol: f64,
) -> Result<(f64, Option<StateOnAlgebra>)> {
    if degree == 0 {
        return Err(Error::InsufficientDegree { needed: 1, available: 0 });
    }
    if a.parent() != base {
        return Err(Error::ParentMismatch(base.to_string(), a.parent().to_string()));
    }
    if !a.is_positive(tol) {
        let min = a.mats().iter().map(linalg::herm_min_eig).fold(0.0, f64::min);
        return Err(Error::NotPositiveElement { min_eig: min });
    }
    let tp = TensorPower::with_side(base.clone(), degree, side.clone());
    if phi.parent() != &tp.algebra() {
        return Err(Error::ShapeMismatch {
            expected: tp.algebra().to_string(),
            found: phi.parent().to_string(),
        });
    }
    if !power::state_exchangeable(phi, &tp, tol.max(1e-8) * 1e2)? {
        return Err(Error::ConsistencyCheck {
            what: "input state exchangeability".into(),
            residual: f64::NAN,
        });
    }
    let rest = TensorPower::with_side(base.clone(), degree - 1, side.clone()).algebra();
    let lambda = phi.evaluate(&a.tensor(&rest.unit()))?.re;
    let values: Vec<C64> = rest
        .basis()
        .map(|y| phi.evaluate(&a.tensor(&y)))
        .collect::<Result<Vec<_>>>()?;
    if lambda <= tol {
        for v in &values {
            if v.norm() > tol {
                return Err(Error::ConsistencyCheck {
                    what: "vanishing conditional".into(),
                    residual: v.norm(),
                });
            }
        }
        return Ok((lambda.max(0.0), None));
    }
    let scaled: Vec<C64> = values.iter().map(|v| v / cr(lambda)).collect();
    let cond = StateOnAlgebra::from_functional(&rest, &scaled, tol.max(1e-10) * 1e2)?;
    let rest_tp = TensorPower::with_side(base.clone(), degree - 1, side.clone());
    if !power::state_exchangeable(&cond, &rest_tp, tol.max(1e-8) * 1e2)? {
        return Err(Error::ConsistencyCheck {
            what: "conditional state exchangeability".into(),
            residual: f64::NAN,
        });
    }
    Ok((lambda, Some(cond)))
}

/// Max over a positive spanning set `a` of `base` and basis `y` of
/// `base^{⊗k} ⊗ side` of `|φ(a⊗y) − φ(a⊗1)·φ(y)|`; vanishes exactly for
/// single product powers.
pub fn extremality_identity_residual(fam: &ExchangeableFamily, k: usize) -> Result<f64> {
    if k + 1 > fam.max_degree() {
        return Err(Error::InsufficientDegree { needed: k + 1, available: fam.max_degree() });
    }
    let side_unit = fam.side().unit();
    let rest = fam.degree_algebra(k);
    let mut worst = 0.0_f64;
    for a in fam.base().positive_spanning_set() {
        let lambda = fam
            .state(1)?
            .evaluate(&a.tensor(&side_unit))?;
        for y in rest.basis() {
            let joint = fam.state(k + 1)?.evaluate(&a.tensor(&y))?;
            let split = lambda * fam.state(k)?.evaluate(&y)?;
            worst = worst.max((joint - split).norm());
        }
    }
    Ok(worst)
}

// ---------------------------------------------------------------------
// Moment matrices

/// Gram-style matrix of word moments `M_{u,v} = φ_{|u|+|v|}(u* ⊗ v)` over
/// a fixed self-adjoint basis; PSD is necessary for the family to be a
/// mixture of product states.
#[derive(Clone, Debug)]
pub struct MomentMatrix {
    degree: usize,
    words: Vec<Vec<usize>>,
    matrix: CMat,
}

impl MomentMatrix {
    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn words(&self) -> &[Vec<usize>] {
        &self.words
    }

    pub fn matrix(&self) -> &CMat {
        &self.matrix
    }

    pub fn min_eigenvalue(&self) -> f64 {
        linalg::herm_min_eig(&self.matrix)
    }

    pub fn is_psd(&self, tol: f64) -> bool {
        self.min_eigenvalue() >= -tol
    }
}

fn words_up_to(letters: usize, d: usize) -> Vec<Vec<usize>> {
    let mut out = vec![Vec::new()];
    let mut level: Vec<Vec<usize>> = vec![Vec::new()];
    for _ in 0..d {
        let mut next = Vec::with_capacity(level.len() * letters);
        for w in &level {
            for l in 0..letters {
                let mut nw = w.clone();
                nw.push(l);
                next.push(nw);
            }
        }
        out.extend(next.iter().cloned());
        level = next;
    }
    out
}

/// Moment matrix of degree `d`; requires family degree `2d`.
pub fn moment_matrix(fam: &ExchangeableFamily, d: usize) -> Result<MomentMatrix> {
    if 2 * d > fam.max_degree() {
        return Err(Error::InsufficientDegree { needed: 2 * d, available: fam.max_degree() });
    }
    let letters = fam.base().selfadjoint_basis();
    let words = words_up_to(letters.len(), d);
    let side_unit = fam.side().unit();
    let n = words.len();
    let mut m = CMat::zeros(n, n);
    for (i, u) in words.iter().enumerate() {
        for (j, v) in words.iter().enumerate() {
            // u* ⊗ v: the reversed (self-adjoint) letters of u, then v
            let mut el = BlockAlgebra::scalar().unit();
            for &l in u.iter().rev() {
                el = el.tensor(&letters[l]);
            }
            for &l in v {
                el = el.tensor(&letters[l]);
            }
            el = el.tensor(&side_unit);
            m[(i, j)] = fam.evaluate(u.len() + v.len(), &el)?;
        }
    }
    Ok(MomentMatrix { degree: d, words, matrix: linalg::hermitize(&m) })
}

pub fn moment_psd_check(m: &MomentMatrix, tol: f64) -> bool {
    m.is_psd(tol)
}

// ---------------------------------------------------------------------
// The exchangeable-power seminorm

/// Configuration for the seminorm optimizer.
#[derive(Clone, Debug)]
pub struct QaConfig {
    pub restarts: usize,
    pub steps: usize,
    pub step_size: f64,
    pub seed: u64,
}

impl Default for QaConfig {
    fn default() -> Self {
        Self { restarts: 32, steps: 500, step_size: 0.05, seed: 0 }
    }
}

/// `sup_ψ |ψ^{(k)}(x)|` over states `ψ` on `base`, computed by multi-start
/// projected gradient ascent over densities `ρ = M†M / tr(M†M)`.
///
/// The returned value is a certified lower bound of the true supremum.
pub fn qa_seminorm(
    x: &AlgebraElement,
    base: &BlockAlgebra,
    k: usize,
    cfg: &QaConfig,
) -> Result<f64> {
    if k == 0 {
        return Err(Error::Invalid("degree must be at least 1".into()));
    }
    let expected = base.tensor_power(k);
    if x.parent() != &expected {
        return Err(Error::ShapeMismatch {
            expected: expected.to_string(),
            found: x.parent().to_string(),
        });
    }
    let shapes: Vec<usize> = base.blocks().to_vec();
    let nparams: usize = 2 * shapes.iter().map(|n| n * n).sum::<usize>();
    let objective = |p: &[f64]| -> f64 {
        let state = params_to_state(base, &shapes, p);
        state.power(k).evaluate(x).map(|v| v.norm()).unwrap_or(0.0)
    };
    let mut rng = crate::sampling::rng(cfg.seed);
    let mut best = 0.0_f64;
    for _ in 0..cfg.restarts.max(1) {
        let mut p: Vec<f64> = (0..nparams).map(|_| rng.random::<f64>() * 2.0 - 1.0).collect();
        let mut f = objective(&p);
        let mut step = cfg.step_size;
        for _ in 0..cfg.steps {
            let g = numeric_gradient(&objective, &p);
            let gn = g.iter().map(|v| v * v).sum::<f64>().sqrt();
            if gn < 1e-13 {
                break;
            }
            let mut improved = false;
            let mut s = step;
            for _ in 0..30 {
                let cand: Vec<f64> = p.iter().zip(&g).map(|(pi, gi)| pi + s * gi / gn).collect();
                let fc = objective(&cand);
                if fc > f {
                    p = cand;
                    f = fc;
                    step = (s * 1.5).min(cfg.step_size * 10.0);
                    improved = true;
                    break;
                }
                s *= 0.5;
            }
            if !improved {
                break;
            }
        }
        best = best.max(f);
    }
    Ok(best)
}

fn params_to_state(base: &BlockAlgebra, shapes: &[usize], p: &[f64]) -> StateOnAlgebra {
    let mut blocks = Vec::with_capacity(shapes.len());
    let mut off = 0;
    for &n in shapes {
        let m = CMat::from_fn(n, n, |r, c| {
            let k = off + 2 * (r * n + c);
            C64::new(p[k], p[k + 1])
        });
        off += 2 * n * n;
        blocks.push(m.adjoint() * m);
    }
    let total: f64 = blocks.iter().map(|b| b.trace().re).sum();
    let total = if total < 1e-300 { 1.0 } else { total };
    let weights: Vec<f64> = blocks.iter().map(|b| b.trace().re / total).collect();
    let densities: Vec<CMat> = blocks
        .iter()
        .zip(shapes)
        .map(|(b, &n)| {
            let tr = b.trace().re;
            if tr > 1e-300 {
                b / cr(tr)
            } else {
                CMat::identity(n, n) / cr(n as f64)
            }
        })
        .collect();
    StateOnAlgebra::from_parts_unchecked(base.clone(), weights, densities)
}

fn numeric_gradient(f: &impl Fn(&[f64]) -> f64, p: &[f64]) -> Vec<f64> {
    let mut g = vec![0.0; p.len()];
    let mut work = p.to_vec();
    for i in 0..p.len() {
        let h = 1e-6 * (1.0 + p[i].abs());
        work[i] = p[i] + h;
        let fp = f(&work);
        work[i] = p[i] - h;
        let fm = f(&work);
        work[i] = p[i];
        g[i] = (fp - fm) / (2.0 * h);
    }
    g
}

// ---------------------------------------------------------------------
// Finite mixing measures and reconstruction

#[derive(Clone, Debug)]
pub struct MeasureAtom {
    pub weight: f64,
    pub state: StateOnAlgebra,
    pub side: StateOnAlgebra,
}

/// A finitely supported mixing measure: atoms `(λ_j, ψ_j, ω_j)`.
#[derive(Clone, Debug)]
pub struct MixingMeasure {
    pub atoms: Vec<MeasureAtom>,
}

impl MixingMeasure {
    pub fn family(&self, max_degree: usize) -> Result<ExchangeableFamily> {
        let weights: Vec<f64> = self.atoms.iter().map(|a| a.weight).collect();
        let states: Vec<StateOnAlgebra> = self.atoms.iter().map(|a| a.state.clone()).collect();
        let sides: Vec<StateOnAlgebra> = self.atoms.iter().map(|a| a.side.clone()).collect();
        power::mixture_family(&weights, &states, &sides, max_degree)
    }
}

/// Max residual between the family generated by `measure` and `fam`, over
/// all degrees and basis elements.
pub fn verify_measure(fam: &ExchangeableFamily, measure: &MixingMeasure, _tol: f64) -> Result<f64> {
    let rebuilt = measure.family(fam.max_degree())?;
    let mut worst = 0.0_f64;
    for n in 0..=fam.max_degree() {
        let diff = fam.state(n)?.functional_row() - rebuilt.state(n)?.functional_row();
        worst = worst.max(diff.iter().map(|z| z.norm()).fold(0.0, f64::max));
    }
    Ok(worst)
}

/// A fixed generic diagonal functional on `C^m` used to scalarize the
/// moment problem; entries are distinct irrationals in `(0, 1]`.
fn generic_functional(base: &BlockAlgebra) -> AlgebraElement {
    let m = base.num_blocks();
    let raw: Vec<f64> = (0..m).map(|k| (2.0 + 3.0 * k as f64).sqrt()).collect();
    let max = raw.last().copied().unwrap_or(1.0);
    let entries: Vec<C64> = raw.iter().map(|&v| cr(v / max)).collect();
    base.diagonal(&entries).expect("diagonal shape")
}

/// Recover a finitely supported mixing measure (at most `d` atoms) from a
/// classical exchangeable family via a Hankel/generalized-eigenvalue
/// (Prony-type) solve on the scalar moment sequence of a fixed generic
/// functional.
///
/// Atoms whose generic-functional values collide cannot be separated; the
/// verification step reports such failures as inconsistent moments.
pub fn reconstruct(fam: &ExchangeableFamily, d: usize, tol: f64) -> Result<MixingMeasure> {
    let base = fam.base().clone();
    if !base.is_commutative() {
        return Err(Error::NotCommutative);
    }
    if d == 0 {
        return Err(Error::Invalid("need at least one atom".into()));
    }
    if fam.max_degree() + 1 < 2 * d {
        return Err(Error::InsufficientDegree { needed: 2 * d - 1, available: fam.max_degree() });
    }
    let ell = generic_functional(&base);
    let side_unit = fam.side().unit();

    // scalar moments m_r = φ_r(ℓ^{⊗r} ⊗ 1)
    let mut moments = Vec::with_capacity(2 * d);
    let mut ell_pow = BlockAlgebra::scalar().unit();
    for r in 0..2 * d {
        let el = ell_pow.tensor(&side_unit);
        let v = fam.evaluate(r, &el)?;
        if v.im.abs() > 1e-9 {
            return Err(Error::ConsistencyCheck { what: "complex scalar moment".into(), residual: v.im.abs() });
        }
        moments.push(v.re);
        ell_pow = ell_pow.tensor(&ell);
    }

    // Hankel PSD gate and rank detection
    let h0 = CMat::from_fn(d, d, |i, j| cr(moments[i + j]));
    let (h0_vals, _) = linalg::herm_eigen(&h0);
    let h0_max = h0_vals.last().copied().unwrap_or(0.0).max(0.0);
    let min_eig = h0_vals.first().copied().unwrap_or(0.0);
    if min_eig < -tol.max(1e-9) * (1.0 + h0_max) {
        return Err(Error::NotMomentSequence { min_eig });
    }
    let rank = h0_vals
        .iter()
        .filter(|&&v| v > 1e-10 * (1.0 + h0_max))
        .count()
        .max(1);

    // generalized eigenvalue solve on the truncated Hankel pencil
    let h0r = CMat::from_fn(rank, rank, |i, j| cr(moments[i + j]));
    let h1r = CMat::from_fn(rank, rank, |i, j| cr(moments[i + j + 1]));
    let t = h0r
        .clone()
        .lu()
        .solve(&h1r)
        .ok_or_else(|| Error::Invalid("singular Hankel matrix".into()))?;
    let mut nodes = Vec::with_capacity(rank);
    for lam in linalg::general_eigenvalues(&t)? {
        if lam.im.abs() > 1e-6 * (1.0 + lam.re.abs()) {
            return Err(Error::ConsistencyCheck { what: "complex Prony node".into(), residual: lam.im.abs() });
        }
        nodes.push(lam.re);
    }
    nodes.sort_by(f64::total_cmp);

    // weights from the Vandermonde system V λ = m
    let vand = CMat::from_fn(rank, rank, |r, j| cr(nodes[j].powi(r as i32)));
    let rhs = CVec::from_fn(rank, |r, _| cr(moments[r]));
    let lambda = linalg::solve(&vand, &rhs)?;
    let weights: Vec<f64> = lambda.iter().map(|l| l.re).collect();
    if weights.iter().any(|&w| w < 1e-10) {
        return Err(Error::ConsistencyCheck {
            what: "nonpositive reconstructed weight".into(),
            residual: weights.iter().copied().fold(f64::INFINITY, f64::min),
        });
    }

    // atom coordinates: φ_{r+1}(e_c ⊗ ℓ^{⊗r} ⊗ 1) = Σ_j (λ_j p_j[c]) t_j^r
    let mut atom_coords = vec![vec![0.0_f64; base.num_blocks()]; rank];
    for c in 0..base.num_blocks() {
        let e_c = base.basis_element(base.basis_index(c, 0, 0));
        let mut ell_pow = BlockAlgebra::scalar().unit();
        let mut rhs_c = CVec::zeros(rank);
        for r in 0..rank {
            let el = e_c.tensor(&ell_pow).tensor(&side_unit);
            rhs_c[r] = fam.evaluate(r + 1, &el)?;
            ell_pow = ell_pow.tensor(&ell);
        }
        let u = linalg::solve(&vand, &rhs_c)?;
        for j in 0..rank {
            atom_coords[j][c] = (u[j] / cr(weights[j])).re;
        }
    }

    // side states: φ_r(ℓ^{⊗r} ⊗ b) = Σ_j λ_j t_j^r ω_j(b)
    let side = fam.side().clone();
    let mut side_values = vec![vec![cr(0.0); side.dim()]; rank];
    for b_idx in 0..side.dim() {
        let basis_el = side.basis_element(b_idx);
        let mut ell_pow = BlockAlgebra::scalar().unit();
        let mut rhs_b = CVec::zeros(rank);
        for r in 0..rank {
            let el = ell_pow.tensor(&basis_el);
            rhs_b[r] = fam.evaluate(r, &el)?;
            ell_pow = ell_pow.tensor(&ell);
        }
        let u = linalg::solve(&vand, &rhs_b)?;
        for j in 0..rank {
            side_values[j][b_idx] = u[j] / cr(weights[j]);
        }
    }

    let mut atoms = Vec::with_capacity(rank);
    for j in 0..rank {
        let probs: Vec<f64> = atom_coords[j].iter().map(|&p| p.max(0.0)).collect();
        let state = StateOnAlgebra::classical(&base, &probs)
            .map_err(|_| Error::InconsistentMoments { residual: f64::NAN })?;
        let side_state = StateOnAlgebra::from_functional(&side, &side_values[j], 1e-6)?;
        atoms.push(MeasureAtom { weight: weights[j], state, side: side_state });
    }
    let measure = MixingMeasure { atoms };

    // the recovered measure must reproduce every supplied moment
    let residual = verify_measure(fam, &measure, tol)?;
    if residual > tol.max(1e-9) * 1e2 {
        return Err(Error::InconsistentMoments { residual });
    }
    Ok(measure)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::power::mixture_family;
    use crate::sampling;

    #[test]
    fn bloch_basics() {
        let origin = bloch([0.0, 0.0, 0.0]).unwrap();
        assert!(!origin.is_pure(1e-9));
        assert!((origin.purity() - 0.5).abs() < 1e-12);

        let north = bloch([0.0, 0.0, 1.0]).unwrap();
        assert!(north.is_pure(1e-9));
        // projector onto the first basis vector
        let d = &north.densities()[0];
        assert!((d[(0, 0)].re - 1.0).abs() < 1e-12 && d[(1, 1)].norm() < 1e-12);

        assert!(bloch([0.8, 0.0, 0.7]).is_err());

        let r = [0.3, -0.4, 0.5];
        let back = bloch_inverse(&bloch(r).unwrap()).unwrap();
        for k in 0..3 {
            assert!((back[k] - r[k]).abs() < 1e-12);
        }
    }

    #[test]
    fn conditional_of_product_power_factorizes() {
        let mut rng = sampling::rng(3);
        let c2 = BlockAlgebra::classical(2);
        let psi = sampling::random_state(&mut rng, &c2);
        let phi = psi.power(3);
        let a = c2.diagonal(&[cr(0.7), cr(0.2)]).unwrap();
        let (lambda, cond) =
            conditional_state(&phi, &c2, &BlockAlgebra::scalar(), 3, &a, 1e-9).unwrap();
        assert!((lambda - psi.evaluate(&a).unwrap().re).abs() < 1e-12);
        let cond = cond.unwrap();
        assert!(cond.approx_eq(&psi.power(2), 1e-10));
    }

    #[test]
    fn conditional_with_unit_is_marginal() {
        let mut rng = sampling::rng(5);
        let m2 = BlockAlgebra::matrix(2).unwrap();
        let psi = sampling::random_state(&mut rng, &m2);
        let phi = psi.power(2);
        let (lambda, cond) =
            conditional_state(&phi, &m2, &BlockAlgebra::scalar(), 2, &m2.unit(), 1e-9).unwrap();
        assert!((lambda - 1.0).abs() < 1e-12);
        assert!(cond.unwrap().approx_eq(&psi, 1e-10));
    }

    #[test]
    fn conditional_vanishing_branch() {
        // pure state on C² concentrated at the first coordinate, tested
        // against the complementary projector
        let c2 = BlockAlgebra::classical(2);
        let psi = StateOnAlgebra::point_mass(&c2, 0).unwrap();
        let phi = psi.power(2);
        let a = c2.basis_element(1);
        let (lambda, cond) =
            conditional_state(&phi, &c2, &BlockAlgebra::scalar(), 2, &a, 1e-9).unwrap();
        assert_eq!(lambda, 0.0);
        assert!(cond.is_none());
        // non-positive inputs are rejected
        let bad = c2.diagonal(&[cr(-1.0), cr(0.5)]).unwrap();
        assert!(conditional_state(&phi, &c2, &BlockAlgebra::scalar(), 2, &bad, 1e-9).is_err());
    }

    #[test]
    fn extremality_residual_detects_mixtures() {
        let c2 = BlockAlgebra::classical(2);
        let unit = StateOnAlgebra::unit_state();
        let single = mixture_family(
            &[1.0],
            &[StateOnAlgebra::classical(&c2, &[0.3, 0.7]).unwrap()],
            &[unit.clone()],
            3,
        )
        .unwrap();
        assert!(extremality_identity_residual(&single, 2).unwrap() <= 1e-9);

        let two = mixture_family(
            &[0.5, 0.5],
            &[
                StateOnAlgebra::point_mass(&c2, 0).unwrap(),
                StateOnAlgebra::point_mass(&c2, 1).unwrap(),
            ],
            &[unit.clone(), unit],
            3,
        )
        .unwrap();
        assert!(extremality_identity_residual(&two, 2).unwrap() >= 0.1);
        // insufficient degree is an error
        assert!(extremality_identity_residual(&two, 3).is_err());
    }

    #[test]
    fn proper_mixture_atoms_are_separated_by_some_observable() {
        let c2 = BlockAlgebra::classical(2);
        let p1 = StateOnAlgebra::point_mass(&c2, 0).unwrap();
        let p2 = StateOnAlgebra::point_mass(&c2, 1).unwrap();
        let found = c2.selfadjoint_basis().iter().any(|a| {
            let d = (p1.evaluate(a).unwrap() - p2.evaluate(a).unwrap()).re;
            d * d > 0.0
        });
        assert!(found);
    }

    #[test]
    fn moment_matrix_of_mixture_is_psd() {
        let mut rng = sampling::rng(7);
        let c2 = BlockAlgebra::classical(2);
        let unit = StateOnAlgebra::unit_state();
        let fam = mixture_family(
            &[0.4, 0.6],
            &[
                sampling::random_state(&mut rng, &c2),
                sampling::random_state(&mut rng, &c2),
            ],
            &[unit.clone(), unit],
            4,
        )
        .unwrap();
        let m = moment_matrix(&fam, 2).unwrap();
        assert!(moment_psd_check(&m, 1e-10), "min eig {}", m.min_eigenvalue());
        // needs 2d degrees
        assert!(moment_matrix(&fam, 3).is_err());
    }

    #[test]
    fn qa_seminorm_on_symmetrized_tensor() {
        let c2 = BlockAlgebra::classical(2);
        let e1 = c2.basis_element(0);
        let e2 = c2.basis_element(1);
        let sym = e1.tensor(&e2).try_add(&e2.tensor(&e1)).unwrap().scale(cr(0.5));
        let cfg = QaConfig { restarts: 8, steps: 200, ..Default::default() };
        let val = qa_seminorm(&sym, &c2, 2, &cfg).unwrap();
        assert!((val - 0.25).abs() < 0.25 * 1e-3, "got {val}");
    }

    #[test]
    fn qa_seminorm_kills_permutation_differences() {
        let mut rng = sampling::rng(11);
        let c2 = BlockAlgebra::classical(2);
        let x = sampling::random_element(&mut rng, &c2.tensor_power(2));
        let swapped = crate::power::permutation_morphism(&c2, 2, &[1, 0])
            .unwrap()
            .apply_op(&x)
            .unwrap();
        let diff = x.try_sub(&swapped).unwrap();
        let cfg = QaConfig { restarts: 4, steps: 100, ..Default::default() };
        assert!(qa_seminorm(&diff, &c2, 2, &cfg).unwrap() <= 1e-9);
    }

    #[test]
    fn qa_seminorm_properties() {
        let mut rng = sampling::rng(13);
        let c2 = BlockAlgebra::classical(2);
        let cfg = QaConfig { restarts: 6, steps: 150, ..Default::default() };
        let x = sampling::random_element(&mut rng, &c2.tensor_power(2));
        let y = sampling::random_element(&mut rng, &c2.tensor_power(2));
        let qx = qa_seminorm(&x, &c2, 2, &cfg).unwrap();
        let qy = qa_seminorm(&y, &c2, 2, &cfg).unwrap();
        // unit evaluates to 1
        let one = qa_seminorm(&c2.tensor_power(2).unit(), &c2, 2, &cfg).unwrap();
        assert!((one - 1.0).abs() < 1e-9);
        // absolute homogeneity
        let qcx = qa_seminorm(&x.scale(cr(-2.5)), &c2, 2, &cfg).unwrap();
        assert!((qcx - 2.5 * qx).abs() < 1e-9 * (1.0 + qcx));
        // triangle inequality within optimizer tolerance
        let qsum = qa_seminorm(&x.try_add(&y).unwrap(), &c2, 2, &cfg).unwrap();
        assert!(qsum <= qx + qy + 1e-6);
        // squares are nonnegative: |ψ(x*x-form)| attained at real value
        let sq = x.star().try_mul(&x).unwrap();
        assert!(qa_seminorm(&sq, &c2, 2, &cfg).unwrap() >= 0.0);
    }

    #[test]
    fn reconstruct_two_atom_classical_family() {
        let c2 = BlockAlgebra::classical(2);
        let unit = StateOnAlgebra::unit_state();
        let fam = mixture_family(
            &[0.3, 0.7],
            &[
                StateOnAlgebra::classical(&c2, &[0.2, 0.8]).unwrap(),
                StateOnAlgebra::classical(&c2, &[0.9, 0.1]).unwrap(),
            ],
            &[unit.clone(), unit],
            5,
        )
        .unwrap();
        let measure = reconstruct(&fam, 2, 1e-9).unwrap();
        assert_eq!(measure.atoms.len(), 2);
        let mut recovered: Vec<(f64, f64)> = measure
            .atoms
            .iter()
            .map(|a| (a.state.weights()[0], a.weight))
            .collect();
        recovered.sort_by(|a, b| a.0.total_cmp(&b.0));
        assert!((recovered[0].0 - 0.2).abs() < 1e-6);
        assert!((recovered[0].1 - 0.3).abs() < 1e-6);
        assert!((recovered[1].0 - 0.9).abs() < 1e-6);
        assert!((recovered[1].1 - 0.7).abs() < 1e-6);
        assert!(verify_measure(&fam, &measure, 1e-9).unwrap() < 1e-9);
    }

    #[test]
    fn reconstruct_single_atom_at_degree_one() {
        let c3 = BlockAlgebra::classical(3);
        let unit = StateOnAlgebra::unit_state();
        let fam = mixture_family(
            &[1.0],
            &[StateOnAlgebra::classical(&c3, &[0.5, 0.2, 0.3]).unwrap()],
            &[unit],
            1,
        )
        .unwrap();
        let measure = reconstruct(&fam, 1, 1e-9).unwrap();
        assert_eq!(measure.atoms.len(), 1);
        let w = measure.atoms[0].state.weights();
        assert!((w[0] - 0.5).abs() < 1e-9 && (w[1] - 0.2).abs() < 1e-9);
    }

    #[test]
    fn reconstruct_rejects_noncommutative_and_bad_moments() {
        let m2 = BlockAlgebra::matrix(2).unwrap();
        let mut rng = sampling::rng(17);
        let psi = sampling::random_state(&mut rng, &m2);
        let fam_nc = mixture_family(
            &[1.0],
            &[psi],
            &[StateOnAlgebra::unit_state()],
            3,
        )
        .unwrap();
        assert!(matches!(reconstruct(&fam_nc, 2, 1e-9), Err(Error::NotCommutative)));

        // perturb a valid family's top state until the Hankel gate trips
        let c2 = BlockAlgebra::classical(2);
        let unit = StateOnAlgebra::unit_state();
        let good = mixture_family(
            &[0.5, 0.5],
            &[
                StateOnAlgebra::classical(&c2, &[0.2, 0.8]).unwrap(),
                StateOnAlgebra::classical(&c2, &[0.8, 0.2]).unwrap(),
            ],
            &[unit.clone(), unit],
            3,
        )
        .unwrap();
        let mut states = good.states().to_vec();
        // overwrite the degree-2 member with an incompatible product state,
        // breaking the moment structure while keeping each member a state
        let spiked = StateOnAlgebra::classical(&c2, &[0.99, 0.01]).unwrap();
        states[2] = spiked.power(2);
        states[3] = spiked.power(3);
        let bad = ExchangeableFamily::new(c2.clone(), BlockAlgebra::scalar(), states).unwrap();
        match reconstruct(&bad, 2, 1e-9) {
            Err(Error::NotMomentSequence { .. }) | Err(Error::InconsistentMoments { .. }) => {}
            other => panic!("expected moment failure, got {other:?}"),
        }
    }

    #[test]
    fn state_validation() {
        let m2 = BlockAlgebra::matrix(2).unwrap();
        // non-PSD density rejected
        let bad = CMat::from_row_slice(2, 2, &[cr(1.5), cr(0.0), cr(0.0), cr(-0.5)]);
        assert!(StateOnAlgebra::new(m2.clone(), vec![1.0], vec![bad], 1e-9).is_err());
        // weights must sum to one
        assert!(StateOnAlgebra::new(
            m2.clone(),
            vec![0.5],
            vec![CMat::identity(2, 2).scale(0.5)],
            1e-9
        )
        .is_err());
        // functional roundtrip
        let mut rng = sampling::rng(19);
        let st = sampling::random_state(&mut rng, &BlockAlgebra::new(vec![2, 1]).unwrap());
        let row: Vec<C64> = st.functional_row().iter().copied().collect();
        let back = StateOnAlgebra::from_functional(st.parent(), &row, 1e-9).unwrap();
        assert!(back.approx_eq(&st, 1e-12));
        // ψ(1) = 1 and ψ(x*) = conj ψ(x)
        let x = sampling::random_element(&mut rng, st.parent());
        let v = st.evaluate(&x).unwrap();
        let vs = st.evaluate(&x.star()).unwrap();
        assert!((vs - v.conj()).norm() < 1e-12);
        assert!((st.evaluate(&st.parent().unit()).unwrap() - cr(1.0)).norm() < 1e-12);
    }
}
