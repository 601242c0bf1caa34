//! Seeded random generators for algebras, elements and morphisms.
//!
//! Everything is driven by an explicit ChaCha RNG so that property suites
//! and acceptance runs are reproducible from a single seed.

use nalgebra::DVector;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;

use crate::algebra::{AlgebraElement, BlockAlgebra};
use crate::linalg::{cr, CMat, CVec, C64};
use crate::morphism::UMap;

pub type SeedRng = ChaCha12Rng;

pub fn rng(seed: u64) -> SeedRng {
    ChaCha12Rng::seed_from_u64(seed)
}

fn gauss(rng: &mut SeedRng) -> f64 {
    // Box-Muller
    let u: f64 = rng.random::<f64>().max(1e-12);
    let v: f64 = rng.random();
    (-2.0 * u.ln()).sqrt() * (std::f64::consts::TAU * v).cos()
}

pub fn random_complex(rng: &mut SeedRng) -> C64 {
    C64::new(gauss(rng), gauss(rng))
}

pub fn random_matrix(rng: &mut SeedRng, rows: usize, cols: usize) -> CMat {
    CMat::from_fn(rows, cols, |_, _| random_complex(rng))
}

pub fn random_unit_vector(rng: &mut SeedRng, n: usize) -> CVec {
    loop {
        let v = DVector::from_fn(n, |_, _| random_complex(rng));
        let nrm = v.norm();
        if nrm > 1e-9 {
            return v.unscale(nrm);
        }
    }
}

/// Haar-ish random unitary via QR of a Gaussian matrix.
pub fn random_unitary(rng: &mut SeedRng, n: usize) -> CMat {
    let qr = random_matrix(rng, n, n).qr();
    let r = qr.r();
    let q = qr.q();
    let phases = CVec::from_fn(n, |k, _| {
        let d = r[(k, k)];
        if d.norm() < 1e-12 {
            cr(1.0)
        } else {
            d / cr(d.norm())
        }
    });
    q * CMat::from_diagonal(&phases)
}

pub fn random_element(rng: &mut SeedRng, a: &BlockAlgebra) -> AlgebraElement {
    a.element(a.blocks().iter().map(|&n| random_matrix(rng, n, n)).collect())
        .expect("shapes by construction")
}

pub fn random_selfadjoint(rng: &mut SeedRng, a: &BlockAlgebra) -> AlgebraElement {
    let x = random_element(rng, a);
    x.try_add(&x.star()).expect("same parent").scale(cr(0.5))
}

/// A random density: PSD blocks with total trace 1, one per block,
/// returned as the unnormalized per-block matrices `D_i = w_i ρ_i`.
pub fn random_density(rng: &mut SeedRng, a: &BlockAlgebra) -> Vec<CMat> {
    let mut blocks: Vec<CMat> = a
        .blocks()
        .iter()
        .map(|&n| {
            let g = random_matrix(rng, n, n);
            g.adjoint() * g
        })
        .collect();
    let total: f64 = blocks.iter().map(|m| m.trace().re).sum();
    for m in &mut blocks {
        *m /= cr(total);
    }
    blocks
}

/// A random state on `a` as a morphism `C → a` (op-map `a ⇝ C`).
pub fn random_state_map(rng: &mut SeedRng, a: &BlockAlgebra) -> UMap {
    let d = random_density(rng, a);
    state_map_from_density(a, &d)
}

/// The morphism `C → a` given by `x ↦ Σ_i tr(D_i x_i)`.
pub fn state_map_from_density(a: &BlockAlgebra, density: &[CMat]) -> UMap {
    let mut op = CMat::zeros(1, a.dim());
    for k in 0..a.dim() {
        let (b, r, c) = a.basis_coords(k);
        // tr(D E_rc) = D[c, r]
        op[(0, k)] = density[b][(c, r)];
    }
    UMap::from_op_matrix(BlockAlgebra::scalar(), a.clone(), op).expect("shape")
}

/// A random unital linear map `dom → cod` (op-map `cod ⇝ dom`), with no
/// positivity structure.
pub fn random_unital(rng: &mut SeedRng, dom: &BlockAlgebra, cod: &BlockAlgebra) -> UMap {
    let mut op = random_matrix(rng, dom.dim(), cod.dim()).scale(0.3);
    let u_cod = cod.unit().coords();
    let u_dom = dom.unit().coords();
    if cod.dim() > 0 {
        let img = &op * &u_cod;
        let corr = (u_dom - img) * u_cod.adjoint() / cr(u_cod.norm_squared());
        op += corr;
    }
    UMap::from_op_matrix(dom.clone(), cod.clone(), op).expect("shape")
}

pub fn random_selfadjoint_unital(rng: &mut SeedRng, dom: &BlockAlgebra, cod: &BlockAlgebra) -> UMap {
    let f = random_unital(rng, dom, cod);
    let inv = f.involution();
    let op = (f.op_matrix() + inv.op_matrix()).scale(0.5);
    UMap::from_op_matrix(dom.clone(), cod.clone(), op).expect("shape")
}

/// A random completely positive unital map `dom → cod` (op-map
/// `cod ⇝ dom`): random Kraus compressions between all block pairs plus a
/// small depolarizing part, conjugated by `S^{-1/2}` to restore unitality.
pub fn random_cpu(rng: &mut SeedRng, dom: &BlockAlgebra, cod: &BlockAlgebra, kraus: usize) -> UMap {
    let mut vs: Vec<Vec<Vec<CMat>>> = Vec::with_capacity(dom.num_blocks());
    for &n in dom.blocks() {
        let mut per_j = Vec::with_capacity(cod.num_blocks());
        for &m in cod.blocks() {
            per_j.push((0..kraus.max(1)).map(|_| random_matrix(rng, n, m)).collect());
        }
        vs.push(per_j);
    }
    let raw = |x: &AlgebraElement| -> Vec<CMat> {
        dom.blocks()
            .iter()
            .enumerate()
            .map(|(i, &n)| {
                let mut acc = CMat::zeros(n, n);
                for (j, ks) in vs[i].iter().enumerate() {
                    for v in ks {
                        acc += v * x.block(j) * v.adjoint();
                    }
                    acc += CMat::identity(n, n).scale(0.1 * x.block(j).trace().re);
                }
                acc
            })
            .collect()
    };
    // depolarizing part uses tr of each block, which is complex in general;
    // fold it in exactly by acting on real and imaginary parts
    let raw_lin = |x: &AlgebraElement| -> Vec<CMat> {
        let re = x.try_add(&x.star()).expect("parent").scale(cr(0.5));
        let im = x.try_sub(&x.star()).expect("parent").scale(C64::new(0.0, -0.5));
        let a = raw(&re);
        let b = raw(&im);
        a.into_iter()
            .zip(b)
            .map(|(p, q)| p + q * C64::new(0.0, 1.0))
            .collect()
    };
    let s = dom
        .element(raw_lin(&cod.unit()))
        .expect("shape");
    let s_inv_sqrt: Vec<CMat> = s.mats().iter().map(|m| crate::linalg::psd_inv_sqrt(m, 1e-13)).collect();
    UMap::from_op_action(dom.clone(), cod.clone(), |x| {
        let mats = raw_lin(x)
            .into_iter()
            .enumerate()
            .map(|(i, m)| &s_inv_sqrt[i] * m * &s_inv_sqrt[i])
            .collect();
        dom.element(mats).expect("shape")
    })
}

/// A random deterministic morphism `dom → cod`, i.e. a random unital
/// *-homomorphism `cod ⇝ dom`. Returns `None` when no block-multiplicity
/// assignment exists.
pub fn random_deterministic(rng: &mut SeedRng, dom: &BlockAlgebra, cod: &BlockAlgebra) -> Option<UMap> {
    let mut assignments = Vec::with_capacity(dom.num_blocks());
    for &n in dom.blocks() {
        assignments.push(compose_target(rng, n, cod.blocks())?);
    }
    let unitaries: Vec<CMat> = dom.blocks().iter().map(|&n| random_unitary(rng, n)).collect();
    Some(UMap::from_op_action(dom.clone(), cod.clone(), |x| {
        let mats = dom
            .blocks()
            .iter()
            .enumerate()
            .map(|(i, &n)| {
                let mut d = CMat::zeros(n, n);
                let mut off = 0;
                for &j in &assignments[i] {
                    let m = cod.blocks()[j];
                    d.view_mut((off, off), (m, m)).copy_from(x.block(j));
                    off += m;
                }
                &unitaries[i] * d * unitaries[i].adjoint()
            })
            .collect();
        dom.element(mats).expect("shape")
    }))
}

/// Random composition of `target` into parts drawn from `sizes` (with
/// repetition), as a list of indices into `sizes`.
fn compose_target(rng: &mut SeedRng, target: usize, sizes: &[usize]) -> Option<Vec<usize>> {
    if target == 0 {
        return Some(Vec::new());
    }
    let mut order: Vec<usize> = (0..sizes.len()).collect();
    for k in (1..order.len()).rev() {
        order.swap(k, rng.random_range(0..=k));
    }
    for &j in &order {
        if sizes[j] <= target {
            if let Some(mut rest) = compose_target(rng, target - sizes[j], sizes) {
                rest.insert(0, j);
                return Some(rest);
            }
        }
    }
    None
}

/// A random CPU map `dom → cod` whose op-map only sees the listed blocks
/// of `cod`: it factors through the compression onto those blocks, so the
/// complementary blocks all lie in its nullspaces.
pub fn random_cpu_supported(
    rng: &mut SeedRng,
    dom: &BlockAlgebra,
    cod: &BlockAlgebra,
    support: &[usize],
) -> UMap {
    let sub = BlockAlgebra::new(support.iter().map(|&j| cod.blocks()[j]).collect())
        .expect("valid block sizes");
    let inner = random_cpu(rng, dom, &sub, 2);
    UMap::from_op_action(dom.clone(), cod.clone(), |x| {
        let compressed = sub
            .element(support.iter().map(|&j| x.block(j).clone()).collect())
            .expect("shape");
        inner.apply_op(&compressed).expect("shape")
    })
}

/// A compatible pair of CPU morphisms `dom → cod1`, `dom → cod2` built from
/// a shared family of commuting rank-one projectors.
pub fn random_compatible_cpu_pair(
    rng: &mut SeedRng,
    dom: &BlockAlgebra,
    cod1: &BlockAlgebra,
    cod2: &BlockAlgebra,
) -> (UMap, UMap) {
    let unitaries: Vec<CMat> = dom.blocks().iter().map(|&n| random_unitary(rng, n)).collect();
    let mut projectors = Vec::new();
    for (i, &n) in dom.blocks().iter().enumerate() {
        for k in 0..n {
            let col = unitaries[i].column(k).into_owned();
            let mut p = dom.zero_element();
            *p.block_mut(i) = &col * col.adjoint();
            projectors.push(p);
        }
    }
    let mut build = |cod: &BlockAlgebra| {
        let states: Vec<UMap> = (0..projectors.len())
            .map(|_| random_state_map(rng, cod))
            .collect();
        UMap::from_op_action(dom.clone(), cod.clone(), |x| {
            let mut acc = dom.zero_element();
            for (p, st) in projectors.iter().zip(&states) {
                let val = st.apply_op(x).expect("state");
                let v = val.mats()[0][(0, 0)];
                acc = acc.try_add(&p.scale(v)).expect("parent");
            }
            acc
        })
    };
    let f = build(cod1);
    let g = build(cod2);
    (f, g)
}

/// A random non-invasive CPU morphism `dom → cod`: the op-map lands in the
/// center of `dom`.
pub fn random_noninvasive(rng: &mut SeedRng, dom: &BlockAlgebra, cod: &BlockAlgebra) -> UMap {
    let center = dom.center_basis();
    let states: Vec<UMap> = (0..center.len()).map(|_| random_state_map(rng, cod)).collect();
    UMap::from_op_action(dom.clone(), cod.clone(), |x| {
        let mut acc = dom.zero_element();
        for (z, st) in center.iter().zip(&states) {
            let val = st.apply_op(x).expect("state");
            acc = acc.try_add(&z.scale(val.mats()[0][(0, 0)])).expect("parent");
        }
        acc
    })
}

/// A random state with strictly positive block weights.
pub fn random_state(rng: &mut SeedRng, a: &BlockAlgebra) -> crate::definetti::StateOnAlgebra {
    crate::definetti::StateOnAlgebra::from_density_blocks(a.clone(), random_density(rng, a), 1e-9)
        .expect("random density is a state")
}
