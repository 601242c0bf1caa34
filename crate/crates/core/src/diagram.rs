//! String-diagram term language with a strict evaluator into the matrix
//! backend.
//!
//! Grammar (`;` is diagrammatic order, first-applied-first; `(x)` is the
//! ASCII alias for `⊗`):
//!
//! ```text
//! term ::= term ";" term | term "⊗" term
//!        | "id[" obj "]" | "copy[" obj "]" | "del[" obj "]"
//!        | "swap[" obj "," obj "]" | "inv(" term ")"
//!        | ident | "(" term ")"
//! ```
//!
//! `;` binds weaker than `⊗`; both associate to the left. The three-byte
//! sequence `(x)` always lexes as the tensor operator, so a generator
//! named `x` can only be parenthesized as `( x )`. The names `id`, `copy`,
//! `del`, `swap` and `inv` are reserved.
//!
//! Evaluation is strict monoidal: associators and unitors are identities
//! in the matrix model (tensoring block algebras is literally associative
//! and unital), so wire lists are plain vectors and the monoidal unit is
//! eliminated eagerly.

use std::collections::BTreeMap;
use std::fmt;

use crate::algebra::BlockAlgebra;
use crate::error::{Error, Result};
use crate::morphism::UMap;

/// AST of a diagram expression. `Comp(a, b)` is `a ∘ b` in categorical
/// order, i.e. `b` is applied first.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum DiagramTerm {
    Id(String),
    Gen(String),
    Copy(String),
    Del(String),
    Swap(String, String),
    Comp(Box<DiagramTerm>, Box<DiagramTerm>),
    Tensor(Box<DiagramTerm>, Box<DiagramTerm>),
    Invo(Box<DiagramTerm>),
}

impl fmt::Display for DiagramTerm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DiagramTerm::Id(o) => write!(f, "id[{o}]"),
            DiagramTerm::Gen(n) => write!(f, "{n}"),
            DiagramTerm::Copy(o) => write!(f, "copy[{o}]"),
            DiagramTerm::Del(o) => write!(f, "del[{o}]"),
            DiagramTerm::Swap(a, b) => write!(f, "swap[{a},{b}]"),
            DiagramTerm::Comp(after, before) => write!(f, "({before} ; {after})"),
            DiagramTerm::Tensor(a, b) => write!(f, "({a} (x) {b})"),
            DiagramTerm::Invo(t) => write!(f, "inv({t})"),
        }
    }
}

/// A named generator: wire lists plus the interpreting morphism.
#[derive(Clone, Debug)]
pub struct Generator {
    pub dom: Vec<String>,
    pub cod: Vec<String>,
    pub map: UMap,
}

/// Objects and generators a diagram is read against.
#[derive(Clone, Debug, Default)]
pub struct Signature {
    objects: BTreeMap<String, BlockAlgebra>,
    generators: BTreeMap<String, Generator>,
}

const RESERVED: [&str; 5] = ["id", "copy", "del", "swap", "inv"];

fn valid_ident(s: &str) -> bool {
    let mut chars = s.chars();
    matches!(chars.next(), Some(c) if c.is_ascii_alphabetic() || c == '_')
        && chars.all(|c| c.is_ascii_alphanumeric() || c == '_')
        && !RESERVED.contains(&s)
}

impl Signature {
    pub fn new(
        objects: BTreeMap<String, BlockAlgebra>,
        generators: BTreeMap<String, Generator>,
    ) -> Result<Self> {
        for name in objects.keys() {
            if !valid_ident(name) {
                return Err(Error::Signature(format!("invalid object name `{name}`")));
            }
        }
        let sig = Signature { objects, generators: BTreeMap::new() };
        let mut out = sig.clone();
        for (name, g) in generators {
            if !valid_ident(&name) {
                return Err(Error::Signature(format!("invalid generator name `{name}`")));
            }
            let dom_alg = sig.wires_algebra(&g.dom)?;
            let cod_alg = sig.wires_algebra(&g.cod)?;
            if g.map.dom() != &dom_alg || g.map.cod() != &cod_alg {
                return Err(Error::Signature(format!(
                    "generator `{name}`: morphism shape does not match declared wires"
                )));
            }
            out.generators.insert(name, g);
        }
        Ok(out)
    }

    pub fn objects(&self) -> &BTreeMap<String, BlockAlgebra> {
        &self.objects
    }

    pub fn generators(&self) -> &BTreeMap<String, Generator> {
        &self.generators
    }

    pub fn object(&self, name: &str) -> Result<&BlockAlgebra> {
        self.objects
            .get(name)
            .ok_or_else(|| Error::Signature(format!("unknown object `{name}`")))
    }

    /// The algebra of a wire list; the empty list is the monoidal unit `C`.
    pub fn wires_algebra(&self, wires: &[String]) -> Result<BlockAlgebra> {
        let mut acc = BlockAlgebra::scalar();
        for w in wires {
            acc = acc.tensor(self.object(w)?);
        }
        Ok(acc)
    }
}

/// Domain and codomain wire lists of a term; fails on unknown names or
/// wire mismatches under composition.
pub fn wires(term: &DiagramTerm, sig: &Signature) -> Result<(Vec<String>, Vec<String>)> {
    match term {
        DiagramTerm::Id(o) => {
            sig.object(o)?;
            Ok((vec![o.clone()], vec![o.clone()]))
        }
        DiagramTerm::Gen(n) => {
            let g = sig
                .generators
                .get(n)
                .ok_or_else(|| Error::Signature(format!("unknown generator `{n}`")))?;
            Ok((g.dom.clone(), g.cod.clone()))
        }
        DiagramTerm::Copy(o) => {
            sig.object(o)?;
            Ok((vec![o.clone()], vec![o.clone(), o.clone()]))
        }
        DiagramTerm::Del(o) => {
            sig.object(o)?;
            Ok((vec![o.clone()], vec![]))
        }
        DiagramTerm::Swap(a, b) => {
            sig.object(a)?;
            sig.object(b)?;
            Ok((vec![a.clone(), b.clone()], vec![b.clone(), a.clone()]))
        }
        DiagramTerm::Comp(after, before) => {
            let (bd, bc) = wires(before, sig)?;
            let (ad, ac) = wires(after, sig)?;
            if bc != ad {
                return Err(Error::WireMismatch(format!(
                    "cannot compose: [{}] vs [{}]",
                    bc.join(","),
                    ad.join(",")
                )));
            }
            Ok((bd, ac))
        }
        DiagramTerm::Tensor(a, b) => {
            let (ad, ac) = wires(a, sig)?;
            let (bd, bc) = wires(b, sig)?;
            Ok(([ad, bd].concat(), [ac, bc].concat()))
        }
        DiagramTerm::Invo(t) => wires(t, sig),
    }
}

/// Strict compositional evaluation into the matrix backend.
pub fn evaluate(term: &DiagramTerm, sig: &Signature) -> Result<UMap> {
    wires(term, sig)?;
    eval_unchecked(term, sig)
}

fn eval_unchecked(term: &DiagramTerm, sig: &Signature) -> Result<UMap> {
    match term {
        DiagramTerm::Id(o) => Ok(UMap::identity(sig.object(o)?)),
        DiagramTerm::Gen(n) => Ok(sig.generators[n].map.clone()),
        DiagramTerm::Copy(o) => Ok(UMap::copy(sig.object(o)?)),
        DiagramTerm::Del(o) => Ok(UMap::delete(sig.object(o)?)),
        DiagramTerm::Swap(a, b) => Ok(UMap::swap(sig.object(a)?, sig.object(b)?)),
        DiagramTerm::Comp(after, before) => {
            UMap::compose(&eval_unchecked(after, sig)?, &eval_unchecked(before, sig)?)
        }
        DiagramTerm::Tensor(a, b) => Ok(UMap::tensor(
            &eval_unchecked(a, sig)?,
            &eval_unchecked(b, sig)?,
        )),
        DiagramTerm::Invo(t) => Ok(eval_unchecked(t, sig)?.involution()),
    }
}

// ---------------------------------------------------------------------
// Lexer and parser

#[derive(Clone, Debug, PartialEq)]
enum Tok {
    Ident(String),
    Semi,
    Tensor,
    LBracket,
    RBracket,
    Comma,
    LParen,
    RParen,
}

#[derive(Clone)]
struct Lexed {
    tok: Tok,
    line: usize,
    col: usize,
}

fn lex(src: &str) -> Result<Vec<Lexed>> {
    let chars: Vec<char> = src.chars().collect();
    let mut out = Vec::new();
    let (mut line, mut col) = (1usize, 1usize);
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        let (l0, c0) = (line, col);
        let mut push = |tok: Tok| out.push(Lexed { tok, line: l0, col: c0 });
        match c {
            '\n' => {
                line += 1;
                col = 1;
                i += 1;
                continue;
            }
            ' ' | '\t' | '\r' => {}
            ';' => push(Tok::Semi),
            '⊗' => push(Tok::Tensor),
            '[' => push(Tok::LBracket),
            ']' => push(Tok::RBracket),
            ',' => push(Tok::Comma),
            ')' => push(Tok::RParen),
            '(' => {
                if i + 2 < chars.len() && chars[i + 1] == 'x' && chars[i + 2] == ')' {
                    push(Tok::Tensor);
                    i += 3;
                    col += 3;
                    continue;
                }
                push(Tok::LParen);
            }
            _ if c.is_ascii_alphabetic() || c == '_' => {
                let start = i;
                while i < chars.len() && (chars[i].is_ascii_alphanumeric() || chars[i] == '_') {
                    i += 1;
                }
                let word: String = chars[start..i].iter().collect();
                col += i - start;
                out.push(Lexed { tok: Tok::Ident(word), line: l0, col: c0 });
                continue;
            }
            _ => {
                return Err(Error::Parse {
                    line,
                    col,
                    msg: format!("unexpected character `{c}`"),
                })
            }
        }
        i += 1;
        col += 1;
    }
    Ok(out)
}

struct Parser<'a> {
    toks: Vec<Lexed>,
    pos: usize,
    sig: &'a Signature,
}

impl<'a> Parser<'a> {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|l| &l.tok)
    }

    fn here(&self) -> (usize, usize) {
        self.toks
            .get(self.pos.min(self.toks.len().saturating_sub(1)))
            .map(|l| (l.line, l.col))
            .unwrap_or((1, 1))
    }

    fn err(&self, msg: impl Into<String>) -> Error {
        let (line, col) = self.here();
        Error::Parse { line, col, msg: msg.into() }
    }

    fn bump(&mut self) -> Option<Lexed> {
        let l = self.toks.get(self.pos).cloned();
        if l.is_some() {
            self.pos += 1;
        }
        l
    }

    fn expect(&mut self, t: Tok, what: &str) -> Result<()> {
        match self.peek() {
            Some(x) if *x == t => {
                self.pos += 1;
                Ok(())
            }
            _ => Err(self.err(format!("expected {what}"))),
        }
    }

    fn object_name(&mut self) -> Result<String> {
        let (line, col) = self.here();
        match self.bump().map(|l| l.tok) {
            Some(Tok::Ident(name)) => {
                if self.sig.objects().contains_key(&name) {
                    Ok(name)
                } else {
                    Err(Error::UnknownIdentifier { name, line, col })
                }
            }
            _ => Err(Error::Parse { line, col, msg: "expected object name".into() }),
        }
    }

    /// seq := tens (";" tens)*
    fn seq(&mut self) -> Result<(DiagramTerm, Vec<String>, Vec<String>)> {
        let (mut term, dom, mut cod) = self.tens()?;
        while self.peek() == Some(&Tok::Semi) {
            let (line, col) = self.here();
            self.pos += 1;
            let (next, nd, nc) = self.tens()?;
            if cod != nd {
                return Err(Error::Parse {
                    line,
                    col,
                    msg: format!("wire mismatch at `;`: [{}] vs [{}]", cod.join(","), nd.join(",")),
                });
            }
            term = DiagramTerm::Comp(Box::new(next), Box::new(term));
            cod = nc;
        }
        Ok((term, dom, cod))
    }

    /// tens := atom (TENSOR atom)*
    fn tens(&mut self) -> Result<(DiagramTerm, Vec<String>, Vec<String>)> {
        let (mut term, mut dom, mut cod) = self.atom()?;
        while self.peek() == Some(&Tok::Tensor) {
            self.pos += 1;
            let (next, nd, nc) = self.atom()?;
            term = DiagramTerm::Tensor(Box::new(term), Box::new(next));
            dom.extend(nd);
            cod.extend(nc);
        }
        Ok((term, dom, cod))
    }

    fn atom(&mut self) -> Result<(DiagramTerm, Vec<String>, Vec<String>)> {
        let (line, col) = self.here();
        match self.bump().map(|l| l.tok) {
            Some(Tok::LParen) => {
                let inner = self.seq()?;
                self.expect(Tok::RParen, "`)`")?;
                Ok(inner)
            }
            Some(Tok::Ident(word)) => match word.as_str() {
                "id" => {
                    self.expect(Tok::LBracket, "`[`")?;
                    let o = self.object_name()?;
                    self.expect(Tok::RBracket, "`]`")?;
                    Ok((DiagramTerm::Id(o.clone()), vec![o.clone()], vec![o]))
                }
                "copy" => {
                    self.expect(Tok::LBracket, "`[`")?;
                    let o = self.object_name()?;
                    self.expect(Tok::RBracket, "`]`")?;
                    Ok((DiagramTerm::Copy(o.clone()), vec![o.clone()], vec![o.clone(), o]))
                }
                "del" => {
                    self.expect(Tok::LBracket, "`[`")?;
                    let o = self.object_name()?;
                    self.expect(Tok::RBracket, "`]`")?;
                    Ok((DiagramTerm::Del(o.clone()), vec![o], vec![]))
                }
                "swap" => {
                    self.expect(Tok::LBracket, "`[`")?;
                    let a = self.object_name()?;
                    self.expect(Tok::Comma, "`,`")?;
                    let b = self.object_name()?;
                    self.expect(Tok::RBracket, "`]`")?;
                    Ok((
                        DiagramTerm::Swap(a.clone(), b.clone()),
                        vec![a.clone(), b.clone()],
                        vec![b, a],
                    ))
                }
                "inv" => {
                    self.expect(Tok::LParen, "`(`")?;
                    let (t, d, c) = self.seq()?;
                    self.expect(Tok::RParen, "`)`")?;
                    Ok((DiagramTerm::Invo(Box::new(t)), d, c))
                }
                name => {
                    if let Some(g) = self.sig.generators().get(name) {
                        Ok((DiagramTerm::Gen(name.to_string()), g.dom.clone(), g.cod.clone()))
                    } else {
                        Err(Error::UnknownIdentifier { name: name.to_string(), line, col })
                    }
                }
            },
            _ => Err(Error::Parse { line, col, msg: "expected a term".into() }),
        }
    }
}

/// Parse and type-check a diagram expression against a signature.
pub fn parse(src: &str, sig: &Signature) -> Result<DiagramTerm> {
    let toks = lex(src)?;
    if toks.is_empty() {
        return Err(Error::Parse { line: 1, col: 1, msg: "empty input".into() });
    }
    let mut p = Parser { toks, pos: 0, sig };
    let (term, _, _) = p.seq()?;
    if p.pos != p.toks.len() {
        return Err(p.err("trailing input"));
    }
    Ok(term)
}

/// Pretty-print a term in the ASCII dialect; `parse ∘ print` is the
/// identity on ASTs.
pub fn print(term: &DiagramTerm) -> String {
    term.to_string()
}

// ---------------------------------------------------------------------
// Axiom suites

/// Max-abs residuals of the structural laws on one algebra.
#[derive(Clone, Debug)]
pub struct AxiomReport {
    pub coassociativity: f64,
    pub counitality: f64,
    pub involution_copy: f64,
    pub involution_delete: f64,
    pub monoidal_copy: f64,
    pub monoidal_delete: f64,
    /// `‖swap∘copy − copy‖`; zero exactly for commutative algebras.
    pub classicality_residual: f64,
    pub classical: bool,
}

impl AxiomReport {
    /// Largest residual among the laws that must always hold.
    pub fn max_residual(&self) -> f64 {
        [
            self.coassociativity,
            self.counitality,
            self.involution_copy,
            self.involution_delete,
            self.monoidal_copy,
            self.monoidal_delete,
        ]
        .into_iter()
        .fold(0.0, f64::max)
    }

    pub fn is_ok(&self, tol: f64) -> bool {
        self.max_residual() <= tol
    }
}

/// Verify comonoid, involution and monoidal compatibility of copy/delete
/// on `a` as matrix identities, and report the classicality verdict.
pub fn check_axioms(a: &BlockAlgebra, tol: f64) -> AxiomReport {
    let copy = UMap::copy(a);
    let del = UMap::delete(a);
    let id = UMap::identity(a);
    let swap = UMap::swap(a, a);

    let left = UMap::compose(&UMap::tensor(&copy, &id), &copy).expect("shapes");
    let right = UMap::compose(&UMap::tensor(&id, &copy), &copy).expect("shapes");
    let coassociativity = left.op_distance(&right);

    let cl = UMap::compose(&UMap::tensor(&del, &id), &copy).expect("shapes");
    let cr_ = UMap::compose(&UMap::tensor(&id, &del), &copy).expect("shapes");
    let counitality = cl.op_distance(&id).max(cr_.op_distance(&id));

    let involution_copy = copy.involution().op_distance(&UMap::compose(&swap, &copy).expect("shapes"));
    let involution_delete = del.involution().op_distance(&del);

    let ab = a.tensor(a);
    let copy_ab = UMap::copy(&ab);
    let interchange = UMap::tensor(&id, &UMap::tensor(&swap, &id));
    let monoidal_copy =
        copy_ab.op_distance(&UMap::compose(&interchange, &UMap::tensor(&copy, &copy)).expect("shapes"));
    let monoidal_delete = UMap::delete(&ab).op_distance(&UMap::tensor(&del, &del));

    let classicality_residual = UMap::compose(&swap, &copy).expect("shapes").op_distance(&copy);

    AxiomReport {
        coassociativity,
        counitality,
        involution_copy,
        involution_delete,
        monoidal_copy,
        monoidal_delete,
        classicality_residual,
        classical: classicality_residual <= tol,
    }
}

// ---------------------------------------------------------------------
// Even/odd wrapper (the quantum CD presentation)

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Parity {
    Even,
    Odd,
}

/// A morphism of the graded presentation: an underlying map plus a parity
/// grading. Odd morphisms compose through the involution.
#[derive(Clone, Debug)]
pub struct EvenOddMorphism {
    base: UMap,
    parity: Parity,
}

impl EvenOddMorphism {
    pub fn even(base: UMap) -> Self {
        Self { base, parity: Parity::Even }
    }

    pub fn odd(base: UMap) -> Self {
        Self { base, parity: Parity::Odd }
    }

    /// The star morphism `id*` on an object.
    pub fn star(a: &BlockAlgebra) -> Self {
        Self::odd(UMap::identity(a))
    }

    pub fn base(&self) -> &UMap {
        &self.base
    }

    pub fn parity(&self) -> Parity {
        self.parity
    }
}

/// Graded composition: parity adds mod 2, and an odd left factor acts on
/// the right factor through the involution:
/// `ψ∘φ* = (ψ∘φ)*`, `ψ*∘φ = (ψ∘inv(φ))*`, `ψ*∘φ* = ψ∘inv(φ)`.
pub fn qcd_compose(after: &EvenOddMorphism, before: &EvenOddMorphism) -> Result<EvenOddMorphism> {
    let inner = match after.parity {
        Parity::Even => before.base.clone(),
        Parity::Odd => before.base.involution(),
    };
    let base = UMap::compose(&after.base, &inner)?;
    let parity = match (after.parity, before.parity) {
        (Parity::Even, Parity::Even) | (Parity::Odd, Parity::Odd) => Parity::Even,
        _ => Parity::Odd,
    };
    Ok(EvenOddMorphism { base, parity })
}

/// Graded tensor; defined only for equal parities
/// (`φ* ⊗ ψ* = (φ ⊗ ψ)*`).
pub fn qcd_tensor(a: &EvenOddMorphism, b: &EvenOddMorphism) -> Result<EvenOddMorphism> {
    if a.parity != b.parity {
        return Err(Error::MixedParityTensor);
    }
    Ok(EvenOddMorphism {
        base: UMap::tensor(&a.base, &b.base),
        parity: a.parity,
    })
}
