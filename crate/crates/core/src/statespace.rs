//! Symbolic distribution objects (free *-algebra words) and state-space
//! objects (commutative polynomials in evaluations `ev_x`), with the
//! abelianization bridge between them.
//!
//! The free layer carries no computable norm; all quantitative work
//! happens on the commutative side, evaluated at explicit states.
//! Polynomials are kept in normal form: monomials sorted by total degree
//! then lexicographically, coefficients below `1e-14` dropped.

use std::collections::BTreeMap;
use std::fmt;

use crate::algebra::{AlgebraElement, BlockAlgebra};
use crate::definetti::StateOnAlgebra;
use crate::error::{Error, Result};
use crate::linalg::{cr, C64};
use crate::morphism::UMap;

const COEFF_EPS: f64 = 1e-14;

/// A formal generator, possibly starred.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Letter {
    pub name: String,
    pub starred: bool,
}

impl Letter {
    pub fn new(name: impl Into<String>) -> Self {
        Self { name: name.into(), starred: false }
    }

    pub fn star(&self) -> Self {
        Self { name: self.name.clone(), starred: !self.starred }
    }
}

impl fmt::Display for Letter {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}{}", self.name, if self.starred { "*" } else { "" })
    }
}

pub type Word = Vec<Letter>;

/// Ordering key: total degree first, then lexicographic.
fn word_key(w: &Word) -> (usize, Word) {
    (w.len(), w.clone())
}

/// An element of the free unital *-algebra over named generators: a
/// formal linear combination of words. The star reverses words, stars
/// letters, and conjugates coefficients.
#[derive(Clone, Debug, PartialEq, Default)]
pub struct FreeStarPoly {
    terms: BTreeMap<(usize, Word), C64>,
}

impl FreeStarPoly {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn one() -> Self {
        Self::word(Vec::new())
    }

    pub fn letter(name: impl Into<String>) -> Self {
        Self::word(vec![Letter::new(name)])
    }

    pub fn word(w: Word) -> Self {
        let mut terms = BTreeMap::new();
        terms.insert(word_key(&w), cr(1.0));
        Self { terms }
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Word, &C64)> {
        self.terms.iter().map(|((_, w), c)| (w, c))
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    fn insert(&mut self, w: Word, c: C64) {
        let key = word_key(&w);
        let entry = self.terms.entry(key).or_insert(cr(0.0));
        *entry += c;
        if entry.norm() < COEFF_EPS {
            self.terms.remove(&word_key(&w));
        }
    }

    pub fn add(&self, other: &FreeStarPoly) -> FreeStarPoly {
        let mut out = self.clone();
        for (w, c) in other.terms() {
            out.insert(w.clone(), *c);
        }
        out
    }

    pub fn sub(&self, other: &FreeStarPoly) -> FreeStarPoly {
        self.add(&other.scale(cr(-1.0)))
    }

    pub fn scale(&self, s: C64) -> FreeStarPoly {
        let mut out = FreeStarPoly::zero();
        for (w, c) in self.terms() {
            out.insert(w.clone(), c * s);
        }
        out
    }

    /// Word concatenation, extended bilinearly.
    pub fn mul(&self, other: &FreeStarPoly) -> FreeStarPoly {
        let mut out = FreeStarPoly::zero();
        for (u, cu) in self.terms() {
            for (v, cv) in other.terms() {
                let mut w = u.clone();
                w.extend(v.iter().cloned());
                out.insert(w, cu * cv);
            }
        }
        out
    }

    /// Antilinear involution: reverses each word and stars its letters.
    pub fn star(&self) -> FreeStarPoly {
        let mut out = FreeStarPoly::zero();
        for (w, c) in self.terms() {
            let starred: Word = w.iter().rev().map(Letter::star).collect();
            out.insert(starred, c.conj());
        }
        out
    }
}

/// A commutative *-polynomial in evaluation generators `ev_x`.
///
/// Monomials are exponent maps over [`Letter`]s; the star conjugates
/// coefficients and stars the letters (pointwise conjugation of the
/// corresponding functions on the state space).
#[derive(Clone, Debug, PartialEq, Default)]
pub struct CommPoly {
    terms: BTreeMap<(usize, BTreeMap<Letter, u32>), C64>,
}

fn mono_key(m: &BTreeMap<Letter, u32>) -> (usize, BTreeMap<Letter, u32>) {
    (m.values().map(|&e| e as usize).sum(), m.clone())
}

impl CommPoly {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn one() -> Self {
        Self::monomial(BTreeMap::new(), cr(1.0))
    }

    pub fn ev(name: impl Into<String>) -> Self {
        let mut m = BTreeMap::new();
        m.insert(Letter::new(name), 1);
        Self::monomial(m, cr(1.0))
    }

    pub fn monomial(m: BTreeMap<Letter, u32>, coeff: C64) -> Self {
        let mut out = Self::default();
        out.insert(m, coeff);
        out
    }

    pub fn terms(&self) -> impl Iterator<Item = (&BTreeMap<Letter, u32>, &C64)> {
        self.terms.iter().map(|((_, m), c)| (m, c))
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    fn insert(&mut self, m: BTreeMap<Letter, u32>, c: C64) {
        let key = mono_key(&m);
        let entry = self.terms.entry(key).or_insert(cr(0.0));
        *entry += c;
        if entry.norm() < COEFF_EPS {
            self.terms.remove(&mono_key(&m));
        }
    }

    pub fn add(&self, other: &CommPoly) -> CommPoly {
        let mut out = self.clone();
        for (m, c) in other.terms() {
            out.insert(m.clone(), *c);
        }
        out
    }

    pub fn sub(&self, other: &CommPoly) -> CommPoly {
        self.add(&other.scale(cr(-1.0)))
    }

    pub fn scale(&self, s: C64) -> CommPoly {
        let mut out = CommPoly::zero();
        for (m, c) in self.terms() {
            out.insert(m.clone(), c * s);
        }
        out
    }

    pub fn mul(&self, other: &CommPoly) -> CommPoly {
        let mut out = CommPoly::zero();
        for (ma, ca) in self.terms() {
            for (mb, cb) in other.terms() {
                let mut m = ma.clone();
                for (l, e) in mb {
                    *m.entry(l.clone()).or_insert(0) += e;
                }
                out.insert(m, ca * cb);
            }
        }
        out
    }

    pub fn pow(&self, e: u32) -> CommPoly {
        let mut out = CommPoly::one();
        for _ in 0..e {
            out = out.mul(self);
        }
        out
    }

    pub fn star(&self) -> CommPoly {
        let mut out = CommPoly::zero();
        for (m, c) in self.terms() {
            let flipped: BTreeMap<Letter, u32> =
                m.iter().map(|(l, &e)| (l.star(), e)).collect();
            out.insert(flipped, c.conj());
        }
        out
    }
}

impl fmt::Display for CommPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let mut first = true;
        for (m, c) in self.terms() {
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            write!(f, "({}{:+}i)", c.re, c.im)?;
            for (l, e) in m {
                if *e == 1 {
                    write!(f, "*ev[{l}]")?;
                } else {
                    write!(f, "*ev[{l}]^{e}")?;
                }
            }
        }
        Ok(())
    }
}

/// Quotient onto the commutative polynomial algebra: words become
/// monomials, extended linearly. A *-homomorphism of the symbolic layers.
pub fn abelianize(p: &FreeStarPoly) -> CommPoly {
    let mut out = CommPoly::zero();
    for (w, c) in p.terms() {
        let mut m: BTreeMap<Letter, u32> = BTreeMap::new();
        for l in w {
            *m.entry(l.clone()).or_insert(0) += 1;
        }
        out.insert(m, *c);
    }
    out
}

/// Table binding generator names to elements of one algebra.
pub type GeneratorTable = BTreeMap<String, AlgebraElement>;

fn resolve(table: &GeneratorTable, a: &BlockAlgebra, l: &Letter) -> Result<AlgebraElement> {
    let x = table
        .get(&l.name)
        .ok_or_else(|| Error::UnresolvedGenerator(l.name.clone()))?;
    if x.parent() != a {
        return Err(Error::ParentMismatch(a.to_string(), x.parent().to_string()));
    }
    Ok(if l.starred { x.star() } else { x.clone() })
}

/// The multiplication map on the symbolic layer: each word evaluates to
/// the product of its resolved letters in `a`, extended linearly. Words of
/// length one come back unchanged (the sampling section identity).
pub fn delta_collapse(p: &FreeStarPoly, table: &GeneratorTable, a: &BlockAlgebra) -> Result<AlgebraElement> {
    let mut acc = a.zero_element();
    for (w, c) in p.terms() {
        let mut prod = a.unit();
        for l in w {
            prod = prod.try_mul(&resolve(table, a, l)?)?;
        }
        acc = acc.try_add(&prod.scale(*c))?;
    }
    Ok(acc)
}

/// The unique *-homomorphic extension of `ev_x ↦ φ^op(x)` for a morphism
/// whose op-map lands in a commutative algebra `C^m`; its components are
/// the row states of the op-matrix.
#[derive(Clone, Debug)]
pub struct PhiNatural {
    map: UMap,
    table: GeneratorTable,
}

/// Build the extension; rejects noncommutative op-ranges.
pub fn phi_natural(map: &UMap, table: &GeneratorTable) -> Result<PhiNatural> {
    if !map.dom().is_commutative() {
        return Err(Error::NotCommutative);
    }
    for x in table.values() {
        if x.parent() != map.cod() {
            return Err(Error::ParentMismatch(
                map.cod().to_string(),
                x.parent().to_string(),
            ));
        }
    }
    Ok(PhiNatural { map: map.clone(), table: table.clone() })
}

impl PhiNatural {
    /// Substitute `ev_x ↦ φ^op(x)` and multiply in the commutative range.
    pub fn apply(&self, p: &CommPoly) -> Result<AlgebraElement> {
        let b = self.map.dom();
        let mut acc = b.zero_element();
        for (m, c) in p.terms() {
            let mut prod = b.unit();
            for (l, &e) in m {
                let x = resolve(&self.table, self.map.cod(), l)?;
                let img = self.map.apply_op(&x)?;
                for _ in 0..e {
                    prod = prod.try_mul(&img)?;
                }
            }
            acc = acc.try_add(&prod.scale(*c))?;
        }
        Ok(acc)
    }

    /// The component state of the `k`-th coordinate of the range.
    pub fn component_state(&self, k: usize) -> Result<StateOnAlgebra> {
        let b = self.map.dom();
        if k >= b.num_blocks() {
            return Err(Error::Invalid(format!("no component {k}")));
        }
        let values: Vec<C64> = (0..self.map.cod().dim())
            .map(|j| self.map.op_matrix()[(k, j)])
            .collect();
        StateOnAlgebra::from_functional(self.map.cod(), &values, 1e-8)
    }
}

/// Substitute `ev_x ↦ ψ(x)` and evaluate the polynomial at the state.
pub fn evaluate_comm(p: &CommPoly, psi: &StateOnAlgebra, table: &GeneratorTable) -> Result<C64> {
    let mut acc = cr(0.0);
    for (m, c) in p.terms() {
        let mut prod = cr(1.0);
        for (l, &e) in m {
            let x = resolve(table, psi.parent(), l)?;
            let v = psi.evaluate(&x)?;
            for _ in 0..e {
                prod *= v;
            }
        }
        acc += prod * c;
    }
    Ok(acc)
}

// ---------------------------------------------------------------------
// Textual polynomial syntax: `2.0*ev[x1]*ev[x2] + i*ev[x3]^2`

struct PolyParser {
    chars: Vec<char>,
    pos: usize,
}

impl PolyParser {
    fn skip_ws(&mut self) {
        while self.pos < self.chars.len() && self.chars[self.pos].is_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<char> {
        self.skip_ws();
        self.chars.get(self.pos).copied()
    }

    fn err(&self, msg: impl Into<String>) -> Error {
        Error::Parse { line: 1, col: self.pos + 1, msg: msg.into() }
    }

    fn poly(&mut self) -> Result<CommPoly> {
        let mut acc = CommPoly::zero();
        let mut sign = cr(1.0);
        if self.peek() == Some('-') {
            self.pos += 1;
            sign = cr(-1.0);
        } else if self.peek() == Some('+') {
            self.pos += 1;
        }
        loop {
            let t = self.term()?;
            acc = acc.add(&t.scale(sign));
            match self.peek() {
                Some('+') => {
                    self.pos += 1;
                    sign = cr(1.0);
                }
                Some('-') => {
                    self.pos += 1;
                    sign = cr(-1.0);
                }
                None => return Ok(acc),
                Some(c) => return Err(self.err(format!("unexpected `{c}`"))),
            }
        }
    }

    fn term(&mut self) -> Result<CommPoly> {
        let mut acc = self.factor()?;
        while self.peek() == Some('*') {
            self.pos += 1;
            acc = acc.mul(&self.factor()?);
        }
        Ok(acc)
    }

    fn factor(&mut self) -> Result<CommPoly> {
        match self.peek() {
            Some('i') => {
                self.pos += 1;
                Ok(CommPoly::one().scale(C64::new(0.0, 1.0)))
            }
            Some(c) if c.is_ascii_digit() || c == '.' => {
                let start = self.pos;
                while self
                    .chars
                    .get(self.pos)
                    .is_some_and(|&c| c.is_ascii_digit() || c == '.' || c == 'e' || c == 'E'
                        || ((c == '+' || c == '-')
                            && matches!(self.chars.get(self.pos - 1), Some('e') | Some('E'))))
                {
                    self.pos += 1;
                }
                let text: String = self.chars[start..self.pos].iter().collect();
                let value: f64 = text.parse().map_err(|_| self.err(format!("bad number `{text}`")))?;
                // a trailing `i` makes the literal imaginary
                if self.chars.get(self.pos) == Some(&'i') {
                    self.pos += 1;
                    Ok(CommPoly::one().scale(C64::new(0.0, value)))
                } else {
                    Ok(CommPoly::one().scale(cr(value)))
                }
            }
            Some('e') if self.starts_with("ev[") => {
                self.pos += 2;
                self.expect('[')?;
                let name = self.ident()?;
                let starred = if self.peek() == Some('*') {
                    self.pos += 1;
                    true
                } else {
                    false
                };
                self.expect(']')?;
                let mut letter = Letter::new(name);
                letter.starred = starred;
                let mut m = BTreeMap::new();
                m.insert(letter, 1u32);
                let base = CommPoly::monomial(m, cr(1.0));
                if self.peek() == Some('^') {
                    self.pos += 1;
                    let e = self.uint()?;
                    Ok(base.pow(e))
                } else {
                    Ok(base)
                }
            }
            Some('(') => {
                self.pos += 1;
                let inner = self.poly_until(')')?;
                self.expect(')')?;
                Ok(inner)
            }
            _ => Err(self.err("expected a factor")),
        }
    }

    fn poly_until(&mut self, close: char) -> Result<CommPoly> {
        let mut acc = CommPoly::zero();
        let mut sign = cr(1.0);
        if self.peek() == Some('-') {
            self.pos += 1;
            sign = cr(-1.0);
        }
        loop {
            let t = self.term()?;
            acc = acc.add(&t.scale(sign));
            match self.peek() {
                Some('+') => {
                    self.pos += 1;
                    sign = cr(1.0);
                }
                Some('-') => {
                    self.pos += 1;
                    sign = cr(-1.0);
                }
                Some(c) if c == close => return Ok(acc),
                _ => return Err(self.err(format!("expected `{close}`"))),
            }
        }
    }

    fn starts_with(&mut self, s: &str) -> bool {
        self.skip_ws();
        self.chars[self.pos..].iter().collect::<String>().starts_with(s)
    }

    fn expect(&mut self, c: char) -> Result<()> {
        if self.peek() == Some(c) {
            self.pos += 1;
            Ok(())
        } else {
            Err(self.err(format!("expected `{c}`")))
        }
    }

    fn ident(&mut self) -> Result<String> {
        self.skip_ws();
        let start = self.pos;
        while self
            .chars
            .get(self.pos)
            .is_some_and(|&c| c.is_ascii_alphanumeric() || c == '_')
        {
            self.pos += 1;
        }
        if self.pos == start {
            return Err(self.err("expected identifier"));
        }
        Ok(self.chars[start..self.pos].iter().collect())
    }

    fn uint(&mut self) -> Result<u32> {
        self.skip_ws();
        let start = self.pos;
        while self.chars.get(self.pos).is_some_and(|c| c.is_ascii_digit()) {
            self.pos += 1;
        }
        let text: String = self.chars[start..self.pos].iter().collect();
        text.parse().map_err(|_| self.err("expected exponent"))
    }
}

/// Parse the textual polynomial syntax, e.g.
/// `2.0*ev[x1]*ev[x2] + i*ev[x3]^2`.
pub fn parse_comm_poly(src: &str) -> Result<CommPoly> {
    let mut p = PolyParser { chars: src.chars().collect(), pos: 0 };
    p.poly()
}
