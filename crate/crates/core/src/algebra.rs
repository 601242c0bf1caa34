//! Finite-dimensional C*-algebras as direct sums of complex matrix blocks.
//!
//! Every finite-dimensional C*-algebra is *-isomorphic to a direct sum
//! `M_{n_1} ⊕ … ⊕ M_{n_k}`, so a [`BlockAlgebra`] is just the ordered list
//! of block sizes. Elements carry one dense complex matrix per block.
//!
//! The canonical linear basis is the matrix units enumerated block by
//! block, row-major within each block. All coordinate conventions in the
//! crate (morphism matrices, tensor products, JSON formats) refer to this
//! enumeration.

use std::fmt;

use crate::error::{Error, Result};
use crate::linalg::{self, c, cr, CMat, CVec, C64};

/// A finite-dimensional C*-algebra `⊕_i M_{n_i}`.
///
/// The empty block list is the zero algebra. Equality ignores the label.
#[derive(Clone, Debug)]
pub struct BlockAlgebra {
    blocks: Vec<usize>,
    label: Option<String>,
}

impl PartialEq for BlockAlgebra {
    fn eq(&self, other: &Self) -> bool {
        self.blocks == other.blocks
    }
}

impl Eq for BlockAlgebra {}

impl fmt::Display for BlockAlgebra {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if let Some(l) = &self.label {
            write!(f, "{l}")
        } else {
            write!(f, "⊕{:?}", self.blocks)
        }
    }
}

impl BlockAlgebra {
    pub fn new(blocks: Vec<usize>) -> Result<Self> {
        if blocks.iter().any(|&n| n == 0) {
            return Err(Error::InvalidBlockSize);
        }
        Ok(Self { blocks, label: None })
    }

    /// The zero algebra (empty block list).
    pub fn zero() -> Self {
        Self { blocks: Vec::new(), label: None }
    }

    /// The monoidal unit `C`.
    pub fn scalar() -> Self {
        Self { blocks: vec![1], label: None }
    }

    /// The full matrix algebra `M_n`.
    pub fn matrix(n: usize) -> Result<Self> {
        Self::new(vec![n])
    }

    /// The commutative algebra `C^m`.
    pub fn classical(m: usize) -> Self {
        Self { blocks: vec![1; m], label: None }
    }

    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.label = Some(label.into());
        self
    }

    pub fn label(&self) -> Option<&str> {
        self.label.as_deref()
    }

    pub fn blocks(&self) -> &[usize] {
        &self.blocks
    }

    pub fn num_blocks(&self) -> usize {
        self.blocks.len()
    }

    /// Vector-space dimension `Σ n_i²`.
    pub fn dim(&self) -> usize {
        self.blocks.iter().map(|n| n * n).sum()
    }

    /// Total matrix size `Σ n_i` (dimension of the defining representation).
    pub fn rep_dim(&self) -> usize {
        self.blocks.iter().sum()
    }

    /// Offset of block `i` in the canonical basis enumeration.
    pub fn block_offset(&self, i: usize) -> usize {
        self.blocks[..i].iter().map(|n| n * n).sum()
    }

    /// Canonical index of the matrix unit `E^{(i)}_{r,c}`.
    pub fn basis_index(&self, block: usize, row: usize, col: usize) -> usize {
        self.block_offset(block) + row * self.blocks[block] + col
    }

    /// Inverse of [`basis_index`](Self::basis_index).
    pub fn basis_coords(&self, idx: usize) -> (usize, usize, usize) {
        let mut rem = idx;
        for (i, &n) in self.blocks.iter().enumerate() {
            if rem < n * n {
                return (i, rem / n, rem % n);
            }
            rem -= n * n;
        }
        panic!("basis index {idx} out of range for {self}");
    }

    /// The matrix unit with canonical index `idx`.
    pub fn basis_element(&self, idx: usize) -> AlgebraElement {
        let (b, r, col) = self.basis_coords(idx);
        let mut el = self.zero_element();
        el.mats[b][(r, col)] = cr(1.0);
        el
    }

    pub fn basis(&self) -> impl Iterator<Item = AlgebraElement> + '_ {
        (0..self.dim()).map(|k| self.basis_element(k))
    }

    pub fn zero_element(&self) -> AlgebraElement {
        AlgebraElement {
            parent: self.clone(),
            mats: self.blocks.iter().map(|&n| CMat::zeros(n, n)).collect(),
        }
    }

    pub fn unit(&self) -> AlgebraElement {
        AlgebraElement {
            parent: self.clone(),
            mats: self.blocks.iter().map(|&n| CMat::identity(n, n)).collect(),
        }
    }

    pub fn element(&self, mats: Vec<CMat>) -> Result<AlgebraElement> {
        if mats.len() != self.blocks.len()
            || mats
                .iter()
                .zip(&self.blocks)
                .any(|(m, &n)| m.nrows() != n || m.ncols() != n)
        {
            return Err(Error::ShapeMismatch {
                expected: format!("{:?} square blocks", self.blocks),
                found: format!("{:?}", mats.iter().map(|m| (m.nrows(), m.ncols())).collect::<Vec<_>>()),
            });
        }
        Ok(AlgebraElement { parent: self.clone(), mats })
    }

    /// Element from canonical coordinates.
    pub fn element_from_coords(&self, v: &CVec) -> Result<AlgebraElement> {
        if v.len() != self.dim() {
            return Err(Error::ShapeMismatch {
                expected: format!("{} coordinates", self.dim()),
                found: format!("{}", v.len()),
            });
        }
        let mut mats = Vec::with_capacity(self.blocks.len());
        let mut off = 0;
        for &n in &self.blocks {
            mats.push(CMat::from_fn(n, n, |r, col| v[off + r * n + col]));
            off += n * n;
        }
        Ok(AlgebraElement { parent: self.clone(), mats })
    }

    /// A diagonal element given as one value per diagonal entry, block by block.
    pub fn diagonal(&self, entries: &[C64]) -> Result<AlgebraElement> {
        if entries.len() != self.rep_dim() {
            return Err(Error::ShapeMismatch {
                expected: format!("{} diagonal entries", self.rep_dim()),
                found: format!("{}", entries.len()),
            });
        }
        let mut el = self.zero_element();
        let mut k = 0;
        for (b, &n) in self.blocks.iter().enumerate() {
            for d in 0..n {
                el.mats[b][(d, d)] = entries[k];
                k += 1;
            }
        }
        Ok(el)
    }

    pub fn is_commutative(&self) -> bool {
        self.blocks.iter().all(|&n| n == 1)
    }

    /// The center is spanned by the block-identity projections.
    pub fn center_basis(&self) -> Vec<AlgebraElement> {
        (0..self.blocks.len())
            .map(|i| {
                let mut el = self.zero_element();
                el.mats[i] = CMat::identity(self.blocks[i], self.blocks[i]);
                el
            })
            .collect()
    }

    /// Tensor product algebra; blocks are all products `n_i · m_j` in
    /// lexicographic order.
    pub fn tensor(&self, other: &BlockAlgebra) -> BlockAlgebra {
        let blocks = self
            .blocks
            .iter()
            .flat_map(|&n| other.blocks.iter().map(move |&m| n * m))
            .collect();
        BlockAlgebra { blocks, label: None }
    }

    pub fn tensor_power(&self, n: usize) -> BlockAlgebra {
        let mut acc = BlockAlgebra::scalar();
        for _ in 0..n {
            acc = acc.tensor(self);
        }
        acc
    }

    /// Canonical index in `self ⊗ other` of the product of two basis units.
    ///
    /// The Kronecker product of two matrix units is again a matrix unit, so
    /// this is a bijection between index pairs and tensor basis indices.
    pub fn tensor_basis_index(&self, other: &BlockAlgebra, ia: usize, ib: usize) -> usize {
        let (bi, r1, c1) = self.basis_coords(ia);
        let (bj, r2, c2) = other.basis_coords(ib);
        let m = other.blocks[bj];
        let prod = self.tensor(other);
        let block = bi * other.blocks.len() + bj;
        prod.basis_index(block, r1 * m + r2, c1 * m + c2)
    }

    /// A self-adjoint linear basis: diagonal matrix units `E_kk`, and for
    /// each off-diagonal pair the Hermitian combinations `E_kl + E_lk` and
    /// `i(E_kl − E_lk)`.
    pub fn selfadjoint_basis(&self) -> Vec<AlgebraElement> {
        let mut out = Vec::with_capacity(self.dim());
        for (b, &n) in self.blocks.iter().enumerate() {
            for k in 0..n {
                let mut el = self.zero_element();
                el.mats[b][(k, k)] = cr(1.0);
                out.push(el);
            }
            for k in 0..n {
                for l in (k + 1)..n {
                    let mut re = self.zero_element();
                    re.mats[b][(k, l)] = cr(1.0);
                    re.mats[b][(l, k)] = cr(1.0);
                    out.push(re);
                    let mut im = self.zero_element();
                    im.mats[b][(k, l)] = c(0.0, 1.0);
                    im.mats[b][(l, k)] = c(0.0, -1.0);
                    out.push(im);
                }
            }
        }
        out
    }

    /// Rank-one positive elements that span the algebra: `E_kk` together
    /// with the projectors onto `(e_k + e_l)/√2` and `(e_k + i e_l)/√2`.
    pub fn positive_spanning_set(&self) -> Vec<AlgebraElement> {
        let mut out = Vec::new();
        for (b, &n) in self.blocks.iter().enumerate() {
            for k in 0..n {
                let mut el = self.zero_element();
                el.mats[b][(k, k)] = cr(1.0);
                out.push(el);
            }
            for k in 0..n {
                for l in (k + 1)..n {
                    let mut p = self.zero_element();
                    p.mats[b][(k, k)] = cr(0.5);
                    p.mats[b][(k, l)] = cr(0.5);
                    p.mats[b][(l, k)] = cr(0.5);
                    p.mats[b][(l, l)] = cr(0.5);
                    out.push(p);
                    let mut q = self.zero_element();
                    q.mats[b][(k, k)] = cr(0.5);
                    q.mats[b][(k, l)] = c(0.0, -0.5);
                    q.mats[b][(l, k)] = c(0.0, 0.5);
                    q.mats[b][(l, l)] = cr(0.5);
                    out.push(q);
                }
            }
        }
        out
    }
}

/// An element of a [`BlockAlgebra`]: one complex matrix per block.
#[derive(Clone, Debug, PartialEq)]
pub struct AlgebraElement {
    parent: BlockAlgebra,
    mats: Vec<CMat>,
}

impl AlgebraElement {
    pub fn parent(&self) -> &BlockAlgebra {
        &self.parent
    }

    pub fn mats(&self) -> &[CMat] {
        &self.mats
    }

    pub fn block(&self, i: usize) -> &CMat {
        &self.mats[i]
    }

    pub fn block_mut(&mut self, i: usize) -> &mut CMat {
        &mut self.mats[i]
    }

    /// Canonical coordinates (row-major within each block).
    pub fn coords(&self) -> CVec {
        let mut v = CVec::zeros(self.parent.dim());
        let mut off = 0;
        for m in &self.mats {
            let n = m.nrows();
            for r in 0..n {
                for col in 0..n {
                    v[off + r * n + col] = m[(r, col)];
                }
            }
            off += n * n;
        }
        v
    }

    fn check_parent(&self, other: &AlgebraElement) -> Result<()> {
        if self.parent != other.parent {
            return Err(Error::ParentMismatch(
                self.parent.to_string(),
                other.parent.to_string(),
            ));
        }
        Ok(())
    }

    pub fn try_add(&self, other: &AlgebraElement) -> Result<AlgebraElement> {
        self.check_parent(other)?;
        let mats = self.mats.iter().zip(&other.mats).map(|(a, b)| a + b).collect();
        Ok(AlgebraElement { parent: self.parent.clone(), mats })
    }

    pub fn try_sub(&self, other: &AlgebraElement) -> Result<AlgebraElement> {
        self.check_parent(other)?;
        let mats = self.mats.iter().zip(&other.mats).map(|(a, b)| a - b).collect();
        Ok(AlgebraElement { parent: self.parent.clone(), mats })
    }

    /// Blockwise matrix product.
    pub fn try_mul(&self, other: &AlgebraElement) -> Result<AlgebraElement> {
        self.check_parent(other)?;
        let mats = self.mats.iter().zip(&other.mats).map(|(a, b)| a * b).collect();
        Ok(AlgebraElement { parent: self.parent.clone(), mats })
    }

    pub fn scale(&self, s: C64) -> AlgebraElement {
        AlgebraElement {
            parent: self.parent.clone(),
            mats: self.mats.iter().map(|m| m.map(|z| z * s)).collect(),
        }
    }

    /// Blockwise conjugate transpose.
    pub fn star(&self) -> AlgebraElement {
        AlgebraElement {
            parent: self.parent.clone(),
            mats: self.mats.iter().map(|m| m.adjoint()).collect(),
        }
    }

    /// C*-norm: the largest singular value over all blocks.
    pub fn norm(&self) -> f64 {
        self.mats.iter().map(linalg::op_norm).fold(0.0, f64::max)
    }

    /// Hilbert–Schmidt inner product `Σ_i tr(x_i† y_i)`.
    pub fn hs_inner(&self, other: &AlgebraElement) -> Result<C64> {
        self.check_parent(other)?;
        let mut acc = cr(0.0);
        for (a, b) in self.mats.iter().zip(&other.mats) {
            acc += (a.adjoint() * b).trace();
        }
        Ok(acc)
    }

    pub fn hs_norm(&self) -> f64 {
        self.mats
            .iter()
            .map(|m| m.iter().map(|z| z.norm_sqr()).sum::<f64>())
            .sum::<f64>()
            .sqrt()
    }

    pub fn trace(&self) -> C64 {
        self.mats.iter().map(|m| m.trace()).sum()
    }

    /// Trace divided by `Σ n_i`; the tracial state on a nonzero algebra.
    pub fn normalized_trace(&self) -> C64 {
        let d = self.parent.rep_dim();
        if d == 0 {
            cr(0.0)
        } else {
            self.trace() / cr(d as f64)
        }
    }

    pub fn max_abs_diff(&self, other: &AlgebraElement) -> f64 {
        self.mats
            .iter()
            .zip(&other.mats)
            .map(|(a, b)| linalg::max_abs(&(a - b)))
            .fold(0.0, f64::max)
    }

    /// Union of the block spectra.
    pub fn spectrum(&self) -> Result<Spectrum> {
        let mut eigenvalues = Vec::with_capacity(self.parent.rep_dim());
        if self.is_selfadjoint(1e-12) {
            for m in &self.mats {
                eigenvalues.extend(linalg::herm_eigenvalues(m).into_iter().map(cr));
            }
        } else {
            for m in &self.mats {
                eigenvalues.extend(linalg::general_eigenvalues(m)?);
            }
        }
        Ok(Spectrum { eigenvalues })
    }

    pub fn is_selfadjoint(&self, tol: f64) -> bool {
        self.mats.iter().all(|m| linalg::hermiticity_residual(m) <= tol)
    }

    /// Self-adjoint with minimum eigenvalue `>= -tol`.
    pub fn is_positive(&self, tol: f64) -> bool {
        self.is_selfadjoint(tol) && self.mats.iter().all(|m| linalg::herm_min_eig(m) >= -tol)
    }

    /// `0 <= x <= 1` up to `tol`, decided on eigenvalues.
    pub fn in_unit_interval(&self, tol: f64) -> bool {
        self.is_selfadjoint(tol)
            && self.mats.iter().all(|m| {
                let vals = linalg::herm_eigenvalues(m);
                vals.iter().all(|&v| v >= -tol && v <= 1.0 + tol)
            })
    }

    /// Kronecker product into `self.parent() ⊗ other.parent()`.
    pub fn tensor(&self, other: &AlgebraElement) -> AlgebraElement {
        let parent = self.parent.tensor(&other.parent);
        let mats = self
            .mats
            .iter()
            .flat_map(|a| other.mats.iter().map(move |b| a.kronecker(b)))
            .collect();
        AlgebraElement { parent, mats }
    }
}

/// The spectrum of an element: the multiset union of block eigenvalues.
#[derive(Clone, Debug)]
pub struct Spectrum {
    pub eigenvalues: Vec<C64>,
}

impl Spectrum {
    pub fn is_empty(&self) -> bool {
        self.eigenvalues.is_empty()
    }

    pub fn max_abs(&self) -> f64 {
        self.eigenvalues.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    pub fn all_real(&self, tol: f64) -> bool {
        self.eigenvalues.iter().all(|z| z.im.abs() <= tol)
    }

    pub fn real_range(&self) -> Option<(f64, f64)> {
        let mut it = self.eigenvalues.iter().map(|z| z.re);
        let first = it.next()?;
        let (mut lo, mut hi) = (first, first);
        for v in it {
            lo = lo.min(v);
            hi = hi.max(v);
        }
        Some((lo, hi))
    }
}

/// `make_algebra` from the module contract; alias for [`BlockAlgebra::new`].
pub fn make_algebra(blocks: Vec<usize>) -> Result<BlockAlgebra> {
    BlockAlgebra::new(blocks)
}

impl std::ops::Add for &AlgebraElement {
    type Output = AlgebraElement;
    fn add(self, rhs: &AlgebraElement) -> AlgebraElement {
        self.try_add(rhs).expect("algebra mismatch in +")
    }
}

impl std::ops::Sub for &AlgebraElement {
    type Output = AlgebraElement;
    fn sub(self, rhs: &AlgebraElement) -> AlgebraElement {
        self.try_sub(rhs).expect("algebra mismatch in -")
    }
}

impl std::ops::Mul for &AlgebraElement {
    type Output = AlgebraElement;
    fn mul(self, rhs: &AlgebraElement) -> AlgebraElement {
        self.try_mul(rhs).expect("algebra mismatch in *")
    }
}

impl std::ops::Neg for &AlgebraElement {
    type Output = AlgebraElement;
    fn neg(self) -> AlgebraElement {
        self.scale(cr(-1.0))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn m2() -> BlockAlgebra {
        BlockAlgebra::matrix(2).unwrap()
    }

    #[test]
    fn rejects_zero_block() {
        assert!(BlockAlgebra::new(vec![2, 0]).is_err());
    }

    #[test]
    fn dims() {
        let a = BlockAlgebra::new(vec![1, 2, 3]).unwrap();
        assert_eq!(a.dim(), 1 + 4 + 9);
        assert_eq!(a.rep_dim(), 6);
        assert_eq!(BlockAlgebra::zero().dim(), 0);
    }

    #[test]
    fn basis_roundtrip() {
        let a = BlockAlgebra::new(vec![2, 3]).unwrap();
        for k in 0..a.dim() {
            let (b, r, c) = a.basis_coords(k);
            assert_eq!(a.basis_index(b, r, c), k);
        }
    }

    #[test]
    fn componentwise_product_in_c2() {
        let a = BlockAlgebra::classical(2);
        let x = a.diagonal(&[cr(2.0), cr(3.0)]).unwrap();
        let y = a.diagonal(&[cr(5.0), cr(7.0)]).unwrap();
        let xy = &x * &y;
        assert_eq!(xy.mats()[0][(0, 0)], cr(10.0));
        assert_eq!(xy.mats()[1][(0, 0)], cr(21.0));
    }

    #[test]
    fn matrix_units_do_not_commute() {
        let a = m2();
        let e12 = a.basis_element(a.basis_index(0, 0, 1));
        let e21 = a.basis_element(a.basis_index(0, 1, 0));
        let e11 = a.basis_element(a.basis_index(0, 0, 0));
        let e22 = a.basis_element(a.basis_index(0, 1, 1));
        assert_eq!((&e12 * &e21).max_abs_diff(&e11), 0.0);
        assert_eq!((&e21 * &e12).max_abs_diff(&e22), 0.0);
    }

    #[test]
    fn unit_law() {
        let a = BlockAlgebra::new(vec![2, 1]).unwrap();
        let x = a.basis_element(3);
        assert_eq!((&x * &a.unit()).max_abs_diff(&x), 0.0);
        assert_eq!((&a.unit() * &x).max_abs_diff(&x), 0.0);
    }

    #[test]
    fn diag_spectrum_and_positivity() {
        let a = m2();
        let x = a.diagonal(&[cr(1.0), cr(-1.0)]).unwrap();
        assert!(!x.is_positive(1e-9));
        assert!((x.norm() - 1.0).abs() < 1e-12);
        let mut eigs: Vec<f64> = x.spectrum().unwrap().eigenvalues.iter().map(|z| z.re).collect();
        eigs.sort_by(f64::total_cmp);
        assert!((eigs[0] + 1.0).abs() < 1e-12 && (eigs[1] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn star_square_is_positive() {
        let a = BlockAlgebra::new(vec![2, 2]).unwrap();
        let mut y = a.zero_element();
        y.block_mut(0)[(0, 1)] = c(1.3, -0.4);
        y.block_mut(1)[(1, 0)] = c(-0.2, 2.0);
        y.block_mut(1)[(1, 1)] = cr(0.5);
        let p = &y.star() * &y;
        assert!(p.is_positive(1e-12));
    }

    #[test]
    fn unit_interval_example() {
        let a = m2();
        let x = a.diagonal(&[cr(0.3), cr(0.9)]).unwrap();
        assert!(x.in_unit_interval(1e-9));
        let y = a.diagonal(&[cr(0.3), cr(1.5)]).unwrap();
        assert!(!y.in_unit_interval(1e-9));
    }

    #[test]
    fn centers() {
        assert_eq!(m2().center_basis().len(), 1);
        let c2 = BlockAlgebra::classical(2);
        assert_eq!(c2.center_basis().len(), 2);
        assert!(c2.is_commutative());
        assert!(!m2().is_commutative());
    }

    #[test]
    fn tensor_shapes() {
        let c2 = BlockAlgebra::classical(2);
        assert_eq!(c2.tensor(&c2).blocks(), &[1, 1, 1, 1]);
        assert_eq!(m2().tensor(&m2()).blocks(), &[4]);
        // tensoring with the unit is strict
        assert_eq!(m2().tensor(&BlockAlgebra::scalar()), m2());
        assert_eq!(BlockAlgebra::scalar().tensor(&m2()), m2());
    }

    #[test]
    fn tensor_basis_index_matches_kronecker() {
        let a = BlockAlgebra::new(vec![2, 1]).unwrap();
        let b = BlockAlgebra::new(vec![1, 2]).unwrap();
        let prod = a.tensor(&b);
        for ia in 0..a.dim() {
            for ib in 0..b.dim() {
                let idx = a.tensor_basis_index(&b, ia, ib);
                let direct = a.basis_element(ia).tensor(&b.basis_element(ib));
                assert_eq!(direct.max_abs_diff(&prod.basis_element(idx)), 0.0);
            }
        }
    }

    #[test]
    fn tensor_is_strictly_associative() {
        let a = BlockAlgebra::new(vec![2]).unwrap();
        let b = BlockAlgebra::new(vec![1, 2]).unwrap();
        let c = BlockAlgebra::new(vec![3]).unwrap();
        assert_eq!(a.tensor(&b).tensor(&c), a.tensor(&b.tensor(&c)));
        // and the basis indexing nests the same way
        for ia in [0, 3] {
            for ib in [0, 2] {
                for ic in [1, 7] {
                    let left = a.tensor(&b).tensor_basis_index(&c, a.tensor_basis_index(&b, ia, ib), ic);
                    let right = a.tensor_basis_index(&b.tensor(&c), ia, b.tensor_basis_index(&c, ib, ic));
                    assert_eq!(left, right);
                }
            }
        }
    }

    #[test]
    fn selfadjoint_basis_spans() {
        let a = BlockAlgebra::new(vec![2, 1]).unwrap();
        let basis = a.selfadjoint_basis();
        assert_eq!(basis.len(), a.dim());
        for el in &basis {
            assert!(el.is_selfadjoint(0.0));
        }
        // coordinates form an invertible matrix
        let m = CMat::from_fn(a.dim(), a.dim(), |r, c| basis[c].coords()[r]);
        assert!(m.lu().is_invertible());
    }

    #[test]
    fn positive_spanning_set_spans() {
        let a = BlockAlgebra::new(vec![2]).unwrap();
        let set = a.positive_spanning_set();
        assert_eq!(set.len(), a.dim());
        for el in &set {
            assert!(el.is_positive(1e-12));
        }
        let m = CMat::from_fn(a.dim(), a.dim(), |r, c| set[c].coords()[r]);
        assert!(m.lu().is_invertible());
    }

    #[test]
    fn zero_algebra_degenerates() {
        let z = BlockAlgebra::zero();
        let u = z.unit();
        assert_eq!(u.norm(), 0.0);
        assert!(u.spectrum().unwrap().is_empty());
        assert!(u.is_positive(0.0));
        assert!(u.is_selfadjoint(0.0));
    }
}
