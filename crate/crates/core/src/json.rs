//! JSON wire formats shared by all modules and the CLI.
//!
//! Complex numbers are `[re, im]` pairs; matrices are flat row-major pair
//! lists. An element carries one flat matrix per block; a morphism carries
//! its op-matrix (rows indexed by the categorical domain's basis) or,
//! alternatively, Kraus operators that are converted on input.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::algebra::{AlgebraElement, BlockAlgebra};
use crate::definetti::{MeasureAtom, MixingMeasure, StateOnAlgebra};
use crate::diagram::{Generator, Signature};
use crate::error::{Error, Result};
use crate::linalg::{CMat, C64};
use crate::morphism::UMap;
use crate::power::ExchangeableFamily;

pub type CxPair = [f64; 2];

fn mat_to_pairs(m: &CMat) -> Vec<CxPair> {
    let mut out = Vec::with_capacity(m.nrows() * m.ncols());
    for r in 0..m.nrows() {
        for c in 0..m.ncols() {
            out.push([m[(r, c)].re, m[(r, c)].im]);
        }
    }
    out
}

fn pairs_to_mat(rows: usize, cols: usize, pairs: &[CxPair]) -> Result<CMat> {
    if pairs.len() != rows * cols {
        return Err(Error::ShapeMismatch {
            expected: format!("{rows}×{cols} = {} entries", rows * cols),
            found: format!("{}", pairs.len()),
        });
    }
    Ok(CMat::from_fn(rows, cols, |r, c| {
        let p = pairs[r * cols + c];
        C64::new(p[0], p[1])
    }))
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct AlgebraJson {
    pub blocks: Vec<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub label: Option<String>,
}

impl AlgebraJson {
    pub fn from_algebra(a: &BlockAlgebra) -> Self {
        Self { blocks: a.blocks().to_vec(), label: a.label().map(str::to_string) }
    }

    pub fn to_algebra(&self) -> Result<BlockAlgebra> {
        let a = BlockAlgebra::new(self.blocks.clone())?;
        Ok(match &self.label {
            Some(l) => a.with_label(l.clone()),
            None => a,
        })
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ElementJson {
    pub algebra: AlgebraJson,
    /// One flat row-major matrix per block.
    pub mats: Vec<Vec<CxPair>>,
}

impl ElementJson {
    pub fn from_element(x: &AlgebraElement) -> Self {
        Self {
            algebra: AlgebraJson::from_algebra(x.parent()),
            mats: x.mats().iter().map(mat_to_pairs).collect(),
        }
    }

    pub fn to_element(&self) -> Result<AlgebraElement> {
        let a = self.algebra.to_algebra()?;
        if self.mats.len() != a.num_blocks() {
            return Err(Error::ShapeMismatch {
                expected: format!("{} blocks", a.num_blocks()),
                found: format!("{}", self.mats.len()),
            });
        }
        let mats = self
            .mats
            .iter()
            .zip(a.blocks())
            .map(|(pairs, &n)| pairs_to_mat(n, n, pairs))
            .collect::<Result<Vec<_>>>()?;
        a.element(mats)
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct MorphismJson {
    pub dom: AlgebraJson,
    pub cod: AlgebraJson,
    /// Flat row-major `dim(dom) × dim(cod)` op-matrix.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub op_matrix: Option<Vec<CxPair>>,
    /// Alternative Kraus input (single-block algebras only); each operator
    /// is a flat row-major `cod_block × dom_block` matrix.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub kraus: Option<Vec<Vec<CxPair>>>,
}

impl MorphismJson {
    pub fn from_map(m: &UMap) -> Self {
        Self {
            dom: AlgebraJson::from_algebra(m.dom()),
            cod: AlgebraJson::from_algebra(m.cod()),
            op_matrix: Some(mat_to_pairs(m.op_matrix())),
            kraus: None,
        }
    }

    pub fn to_map(&self) -> Result<UMap> {
        let dom = self.dom.to_algebra()?;
        let cod = self.cod.to_algebra()?;
        match (&self.op_matrix, &self.kraus) {
            (Some(pairs), None) => {
                let op = pairs_to_mat(dom.dim(), cod.dim(), pairs)?;
                UMap::from_op_matrix(dom, cod, op)
            }
            (None, Some(kraus)) => {
                if dom.num_blocks() != 1 || cod.num_blocks() != 1 {
                    return Err(Error::Invalid(
                        "Kraus input requires single-block algebras".into(),
                    ));
                }
                let (n, m) = (dom.blocks()[0], cod.blocks()[0]);
                let ops = kraus
                    .iter()
                    .map(|pairs| pairs_to_mat(m, n, pairs))
                    .collect::<Result<Vec<_>>>()?;
                UMap::from_kraus(dom, cod, &ops)
            }
            _ => Err(Error::Invalid(
                "provide exactly one of `op_matrix` and `kraus`".into(),
            )),
        }
    }
}

/// State payload without its algebra (the context fixes it).
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct StateDataJson {
    pub weights: Vec<f64>,
    /// One flat row-major density matrix per block.
    pub densities: Vec<Vec<CxPair>>,
}

impl StateDataJson {
    pub fn from_state(s: &StateOnAlgebra) -> Self {
        Self {
            weights: s.weights().to_vec(),
            densities: s.densities().iter().map(mat_to_pairs).collect(),
        }
    }

    pub fn to_state(&self, parent: &BlockAlgebra, tol: f64) -> Result<StateOnAlgebra> {
        if self.densities.len() != parent.num_blocks() {
            return Err(Error::ShapeMismatch {
                expected: format!("{} density blocks", parent.num_blocks()),
                found: format!("{}", self.densities.len()),
            });
        }
        let densities = self
            .densities
            .iter()
            .zip(parent.blocks())
            .map(|(pairs, &n)| pairs_to_mat(n, n, pairs))
            .collect::<Result<Vec<_>>>()?;
        StateOnAlgebra::new(parent.clone(), self.weights.clone(), densities, tol)
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct StateJson {
    pub algebra: AlgebraJson,
    #[serde(flatten)]
    pub data: StateDataJson,
}

impl StateJson {
    pub fn from_state(s: &StateOnAlgebra) -> Self {
        Self {
            algebra: AlgebraJson::from_algebra(s.parent()),
            data: StateDataJson::from_state(s),
        }
    }

    pub fn to_state(&self, tol: f64) -> Result<StateOnAlgebra> {
        self.data.to_state(&self.algebra.to_algebra()?, tol)
    }
}

/// `{"base":…, "side":…, "maxDegree":n, "states":[…]}` with one state
/// payload per degree `0..=maxDegree`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct FamilyJson {
    pub base: AlgebraJson,
    pub side: AlgebraJson,
    #[serde(rename = "maxDegree")]
    pub max_degree: usize,
    pub states: Vec<StateDataJson>,
}

impl FamilyJson {
    pub fn from_family(f: &ExchangeableFamily) -> Self {
        Self {
            base: AlgebraJson::from_algebra(f.base()),
            side: AlgebraJson::from_algebra(f.side()),
            max_degree: f.max_degree(),
            states: f.states().iter().map(StateDataJson::from_state).collect(),
        }
    }

    pub fn to_family(&self, tol: f64) -> Result<ExchangeableFamily> {
        let base = self.base.to_algebra()?;
        let side = self.side.to_algebra()?;
        if self.states.len() != self.max_degree + 1 {
            return Err(Error::ShapeMismatch {
                expected: format!("{} states", self.max_degree + 1),
                found: format!("{}", self.states.len()),
            });
        }
        let states = self
            .states
            .iter()
            .enumerate()
            .map(|(n, data)| {
                let alg = base.tensor_power(n).tensor(&side);
                data.to_state(&alg, tol)
            })
            .collect::<Result<Vec<_>>>()?;
        ExchangeableFamily::new(base, side, states)
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct MeasureAtomJson {
    pub weight: f64,
    pub state: StateDataJson,
    pub side: StateDataJson,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct MeasureJson {
    pub atoms: Vec<MeasureAtomJson>,
}

impl MeasureJson {
    pub fn from_measure(m: &MixingMeasure) -> Self {
        Self {
            atoms: m
                .atoms
                .iter()
                .map(|a| MeasureAtomJson {
                    weight: a.weight,
                    state: StateDataJson::from_state(&a.state),
                    side: StateDataJson::from_state(&a.side),
                })
                .collect(),
        }
    }

    pub fn to_measure(
        &self,
        base: &BlockAlgebra,
        side: &BlockAlgebra,
        tol: f64,
    ) -> Result<MixingMeasure> {
        let atoms = self
            .atoms
            .iter()
            .map(|a| {
                Ok(MeasureAtom {
                    weight: a.weight,
                    state: a.state.to_state(base, tol)?,
                    side: a.side.to_state(side, tol)?,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(MixingMeasure { atoms })
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct GeneratorJson {
    pub dom: Vec<String>,
    pub cod: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub op_matrix: Option<Vec<CxPair>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub kraus: Option<Vec<Vec<CxPair>>>,
}

/// `{"objects": {name: algebra}, "generators": {name: {dom, cod, op_matrix}}}`;
/// generator algebras are derived from their wire lists.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SignatureJson {
    pub objects: BTreeMap<String, AlgebraJson>,
    #[serde(default)]
    pub generators: BTreeMap<String, GeneratorJson>,
}

impl SignatureJson {
    pub fn to_signature(&self) -> Result<Signature> {
        let mut objects = BTreeMap::new();
        for (name, a) in &self.objects {
            objects.insert(name.clone(), a.to_algebra()?);
        }
        let skeleton = Signature::new(objects.clone(), BTreeMap::new())?;
        let mut generators = BTreeMap::new();
        for (name, g) in &self.generators {
            let dom_alg = skeleton.wires_algebra(&g.dom)?;
            let cod_alg = skeleton.wires_algebra(&g.cod)?;
            let mj = MorphismJson {
                dom: AlgebraJson::from_algebra(&dom_alg),
                cod: AlgebraJson::from_algebra(&cod_alg),
                op_matrix: g.op_matrix.clone(),
                kraus: g.kraus.clone(),
            };
            generators.insert(
                name.clone(),
                Generator { dom: g.dom.clone(), cod: g.cod.clone(), map: mj.to_map()? },
            );
        }
        Signature::new(objects, generators)
    }
}
