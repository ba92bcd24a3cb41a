//! Normal forms for nilpotent products of cyclic p-groups.
//!
//! A [`Collector`] owns the free nilpotent group of the right rank and class,
//! the echelon table of the normal subgroup generated by the powers
//! `x_i^{p^{a_i}}`, and the resulting power-conjugate presentation. Words are
//! collected letter by letter in the free group and then reduced modulo the
//! echelon table; group arithmetic runs on the presentation.

pub mod free;
pub mod pc;
pub mod pcsub;

use std::collections::HashMap;
use std::fmt;
use std::sync::{Arc, OnceLock};

pub use free::{FreeNilpotent, Strategy};
pub use pc::{Echelon, PcElem, PcGroup};
pub use pcsub::PcSubgroup;

use crate::error::{Error, Result};
use crate::hallbasis::{BasisEntry, HallBasis, Variant};

/// Largest `G_2` for which the modified-basis conversion table is built.
const CONVERSION_LIMIT: u64 = 1 << 22;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Atom {
    /// Generator `x_{i+1}`.
    Generator(usize),
    /// Normal-form coordinate `i` of the basis.
    Entry(usize),
}

/// A word in generators and basis elements with arbitrary integer exponents.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Word {
    pub letters: Vec<(Atom, i64)>,
}

impl Word {
    pub fn new(letters: Vec<(Atom, i64)>) -> Self {
        Word { letters }
    }
}

/// Exponent vector over a [`HallBasis`], each coordinate in `[0, modulus)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NormalForm {
    pub basis: Arc<HallBasis>,
    pub exps: Vec<u32>,
}

impl std::hash::Hash for NormalForm {
    fn hash<H: std::hash::Hasher>(&self, state: &mut H) {
        self.exps.hash(state);
    }
}

impl NormalForm {
    pub fn is_identity(&self) -> bool {
        self.exps.iter().all(|&e| e == 0)
    }
}

impl fmt::Display for NormalForm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&crate::wordlang::format_normal_form(self))
    }
}

#[derive(Debug)]
struct Conversion {
    /// Modified-basis tail index to presentation tail id.
    to_pc: Vec<u64>,
    from_pc: HashMap<u64, u64>,
    /// Entries of weight at least 2 with modulus above 1.
    tail_entries: Vec<usize>,
}

#[derive(Debug)]
pub struct Collector {
    basis: Arc<HallBasis>,
    free: FreeNilpotent,
    echelon: Echelon,
    pc: PcGroup,
    /// Presentation position of each basic commutator, if it survives.
    pos_of: Vec<Option<usize>>,
    conversion: OnceLock<Result<Conversion>>,
}

impl Collector {
    pub fn new(basis: HallBasis) -> Result<Self> {
        let free = FreeNilpotent::new(basis.rank(), basis.class())?;
        let p = basis.prime() as i64;
        let powers: Vec<Vec<i64>> = basis
            .orders()
            .iter()
            .enumerate()
            .map(|(i, &a)| {
                let mut v = free.identity();
                v[i] = p.checked_pow(a).ok_or_else(|| Error::OutOfRange {
                    what: "generator order exponent",
                    value: a as i64,
                    range: "p^a must fit in 63 bits".into(),
                })?;
                Ok(v)
            })
            .collect::<Result<_>>()?;
        let echelon = Echelon::normal_closure(&free, &powers);
        let (pc, pos_of) = PcGroup::from_echelon(&free, &echelon, basis.prime())?;
        if pc.order_exp() != basis.order_exp() {
            return Err(Error::Inconsistent(format!(
                "collection gives order p^{} but the moduli multiply to p^{}",
                pc.order_exp(),
                basis.order_exp()
            )));
        }
        for i in 0..basis.rank() {
            if pos_of[i] != Some(i) || pc.relative_orders()[i] as u64 != basis.moduli()[i] {
                return Err(Error::Inconsistent(format!("generator x{} has the wrong order", i + 1)));
            }
        }
        if basis.variant() == Variant::Standard {
            for (d, &m) in basis.moduli().iter().enumerate() {
                let got = pos_of[d].map_or(1, |t| pc.relative_orders()[t] as u64);
                if got != m {
                    return Err(Error::Inconsistent(format!(
                        "{} has relative order {got}, expected modulus {m}",
                        basis.render_entry(d)
                    )));
                }
            }
        }
        Ok(Collector {
            basis: Arc::new(basis),
            free,
            echelon,
            pc,
            pos_of,
            conversion: OnceLock::new(),
        })
    }

    pub fn basis(&self) -> &Arc<HallBasis> {
        &self.basis
    }

    pub fn free(&self) -> &FreeNilpotent {
        &self.free
    }

    pub fn pc(&self) -> &PcGroup {
        &self.pc
    }

    pub fn rank(&self) -> usize {
        self.basis.rank()
    }

    /// Presentation element of a free-group vector.
    pub fn project(&self, v: &[i64]) -> PcElem {
        let r = self.echelon.reduce(&self.free, v);
        let mut out = self.pc.identity();
        for (d, &e) in r.iter().enumerate() {
            if let Some(t) = self.pos_of[d] {
                out[t] = e as u32;
            }
        }
        out
    }

    /// Presentation element of basic commutator `d`.
    pub fn commutator_element(&self, d: usize) -> PcElem {
        self.project(&self.free.basis_element(d))
    }

    /// Presentation element of basis entry `i`.
    pub fn entry_element(&self, i: usize) -> PcElem {
        let g = |j: usize, e: i64| self.pc.pow(&self.pc.generator(j), e);
        match self.basis.entries()[i] {
            BasisEntry::Commutator(d) => self.commutator_element(d),
            BasisEntry::SquareLeft { j, i } => self.pc.comm(&g(j, 2), &g(i, 1)),
            BasisEntry::SquareRight { j, i } => self.pc.comm(&g(j, 1), &g(i, 2)),
        }
    }

    fn conversion(&self) -> Result<&Conversion> {
        self.conversion
            .get_or_init(|| self.build_conversion())
            .as_ref()
            .map_err(Clone::clone)
    }

    fn build_conversion(&self) -> Result<Conversion> {
        let r = self.rank();
        let tail_entries: Vec<usize> = (r..self.basis.len()).filter(|&i| self.basis.moduli()[i] > 1).collect();
        let size: u64 = tail_entries.iter().map(|&i| self.basis.moduli()[i]).product();
        if size > CONVERSION_LIMIT {
            return Err(Error::BudgetExceeded {
                required: size as u128,
                budget: CONVERSION_LIMIT,
            });
        }
        let head: u64 = self.pc.relative_orders()[..r].iter().map(|&m| m as u64).product();
        let values: Vec<PcElem> = tail_entries.iter().map(|&i| self.entry_element(i)).collect();
        let mut to_pc = Vec::with_capacity(size as usize);
        let mut from_pc = HashMap::with_capacity(size as usize);
        for idx in 0..size {
            let mut rest = idx;
            let mut h = self.pc.identity();
            for (v, &i) in values.iter().zip(&tail_entries) {
                let m = self.basis.moduli()[i];
                let b = rest % m;
                rest /= m;
                if b > 0 {
                    let f = self.pc.pow(v, b as i64);
                    self.pc.mul_into(&mut h, &f);
                }
            }
            if h[..r].iter().any(|&e| e != 0) {
                return Err(Error::Inconsistent("commutator entry outside the derived subgroup".into()));
            }
            let id = self.pc.encode(&h) / head;
            if from_pc.insert(id, idx).is_some() {
                return Err(Error::Inconsistent("modified normal form is not unique".into()));
            }
            to_pc.push(id);
        }
        Ok(Conversion {
            to_pc,
            from_pc,
            tail_entries,
        })
    }

    pub fn to_pc(&self, nf: &NormalForm) -> Result<PcElem> {
        if !Arc::ptr_eq(&nf.basis, &self.basis) && *nf.basis != *self.basis {
            return Err(Error::BasisMismatch);
        }
        match self.basis.variant() {
            Variant::Standard => {
                let mut out = self.pc.identity();
                for (d, &e) in nf.exps.iter().enumerate() {
                    if let Some(t) = self.pos_of[d] {
                        out[t] = e;
                    }
                }
                Ok(out)
            }
            Variant::K3p2 => {
                let conv = self.conversion()?;
                let r = self.rank();
                let mut idx = 0u64;
                for &i in conv.tail_entries.iter().rev() {
                    idx = idx * self.basis.moduli()[i] + nf.exps[i] as u64;
                }
                let head: u64 = self.pc.relative_orders()[..r].iter().map(|&m| m as u64).product();
                let mut out = self.pc.decode(conv.to_pc[idx as usize] * head);
                out[..r].copy_from_slice(&nf.exps[..r]);
                Ok(out)
            }
        }
    }

    pub fn from_pc(&self, x: &[u32]) -> Result<NormalForm> {
        let mut exps = vec![0u32; self.basis.len()];
        match self.basis.variant() {
            Variant::Standard => {
                for (d, slot) in exps.iter_mut().enumerate() {
                    if let Some(t) = self.pos_of[d] {
                        *slot = x[t];
                    }
                }
            }
            Variant::K3p2 => {
                let conv = self.conversion()?;
                let r = self.rank();
                let mut tail = x.to_vec();
                tail[..r].iter_mut().for_each(|e| *e = 0);
                let head: u64 = self.pc.relative_orders()[..r].iter().map(|&m| m as u64).product();
                let mut idx = *conv
                    .from_pc
                    .get(&(self.pc.encode(&tail) / head))
                    .ok_or_else(|| Error::Inconsistent("element missing from conversion table".into()))?;
                for &i in &conv.tail_entries {
                    let m = self.basis.moduli()[i];
                    exps[i] = (idx % m) as u32;
                    idx /= m;
                }
                exps[..r].copy_from_slice(&x[..r]);
            }
        }
        Ok(NormalForm {
            basis: self.basis.clone(),
            exps,
        })
    }

    pub fn identity(&self) -> NormalForm {
        NormalForm {
            basis: self.basis.clone(),
            exps: vec![0; self.basis.len()],
        }
    }

    /// The normal form with a single coordinate equal to 1.
    pub fn unit(&self, i: usize) -> NormalForm {
        let mut nf = self.identity();
        nf.exps[i] = 1;
        nf
    }

    pub fn generator(&self, i: usize) -> NormalForm {
        self.unit(i)
    }

    fn atom_letters(&self, atom: Atom, e: i64) -> Result<Vec<(usize, i64)>> {
        let r = self.rank();
        let check = |i: usize, bound: usize, what: &str| {
            if i >= bound {
                Err(Error::UnknownAtom(format!("{what} {}", i + 1)))
            } else {
                Ok(())
            }
        };
        let (piece, e): (Vec<(usize, i64)>, i64) = match atom {
            Atom::Generator(g) => {
                check(g, r, "generator x")?;
                (vec![(g, 1)], e)
            }
            Atom::Entry(i) => {
                check(i, self.basis.len(), "basis entry")?;
                match self.basis.entries()[i] {
                    BasisEntry::Commutator(d) => (vec![(d, 1)], e),
                    BasisEntry::SquareLeft { j, i } => (vec![(j, -2), (i, -1), (j, 2), (i, 1)], e),
                    BasisEntry::SquareRight { j, i } => (vec![(j, -1), (i, -2), (j, 1), (i, 2)], e),
                }
            }
        };
        let mut out = Vec::with_capacity(piece.len() * e.unsigned_abs() as usize);
        for _ in 0..e.unsigned_abs() {
            if e > 0 {
                out.extend_from_slice(&piece);
            } else {
                out.extend(piece.iter().rev().map(|&(a, s)| (a, -s)));
            }
        }
        Ok(out)
    }

    fn atom_element(&self, atom: Atom) -> Result<PcElem> {
        match atom {
            Atom::Generator(g) if g < self.rank() => Ok(self.pc.generator(g)),
            Atom::Entry(i) if i < self.basis.len() => Ok(self.entry_element(i)),
            Atom::Generator(g) => Err(Error::UnknownAtom(format!("generator x{}", g + 1))),
            Atom::Entry(i) => Err(Error::UnknownAtom(format!("basis entry {}", i + 1))),
        }
    }

    /// Normal form of a word, by Hall's collection process in the free
    /// nilpotent group followed by reduction modulo the power relations.
    pub fn collect(&self, w: &Word) -> Result<NormalForm> {
        self.collect_with(w, Strategy::LeftmostFirst)
    }

    pub fn collect_with(&self, w: &Word, strategy: Strategy) -> Result<NormalForm> {
        let mut letters = Vec::new();
        for &(atom, e) in &w.letters {
            // An atom's exponent only matters modulo its order.
            let ord = (self.basis.prime() as i64).pow(self.pc.element_order_exp(&self.atom_element(atom)?));
            letters.extend(self.atom_letters(atom, e.rem_euclid(ord))?);
        }
        let v = self.free.collect_letters(&letters, strategy)?;
        self.from_pc(&self.project(&v))
    }

    /// The normal form written as a word over the basis entries.
    pub fn to_word(&self, nf: &NormalForm) -> Word {
        Word::new(
            nf.exps
                .iter()
                .enumerate()
                .filter(|(_, &e)| e != 0)
                .map(|(i, &e)| (Atom::Entry(i), e as i64))
                .collect(),
        )
    }

    fn binary(&self, a: &NormalForm, b: &NormalForm, op: impl Fn(&PcElem, &PcElem) -> PcElem) -> Result<NormalForm> {
        let x = self.to_pc(a)?;
        let y = self.to_pc(b)?;
        self.from_pc(&op(&x, &y))
    }

    pub fn mul(&self, a: &NormalForm, b: &NormalForm) -> Result<NormalForm> {
        self.binary(a, b, |x, y| self.pc.mul(x, y))
    }

    pub fn inv_pow(&self, a: &NormalForm, n: i64) -> Result<NormalForm> {
        let x = self.to_pc(a)?;
        self.from_pc(&self.pc.pow(&x, n))
    }

    pub fn comm(&self, a: &NormalForm, b: &NormalForm) -> Result<NormalForm> {
        self.binary(a, b, |x, y| self.pc.comm(x, y))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn collector(p: u64, k: usize, orders: &[u32], v: Variant) -> Collector {
        Collector::new(HallBasis::build(p, k, orders, v).unwrap()).unwrap()
    }

    fn word(c: &Collector, letters: &[(usize, i64)]) -> Word {
        let _ = c;
        Word::new(letters.iter().map(|&(g, e)| (Atom::Generator(g), e)).collect())
    }

    #[test]
    fn collection_examples() {
        let c = collector(3, 2, &[1, 1], Variant::Standard);
        assert_eq!(c.collect(&word(&c, &[(1, 1), (0, 1)])).unwrap().exps, [1, 1, 1]);
        assert!(c.collect(&word(&c, &[(0, 3)])).unwrap().is_identity());
        let w = word(&c, &[(0, 1), (1, 1), (0, 1), (1, 1), (0, 1), (1, 1)]);
        assert!(c.collect(&w).unwrap().is_identity());
        assert!(c.collect(&Word::new(vec![(Atom::Generator(2), 1)])).is_err());
    }

    #[test]
    fn arithmetic_examples() {
        let c = collector(3, 2, &[1, 1], Variant::Standard);
        let x1 = c.generator(0);
        let x2 = c.generator(1);
        assert_eq!(c.mul(&x2, &x1).unwrap().exps, [1, 1, 1]);
        let a = c.collect(&word(&c, &[(0, 2), (1, 2)])).unwrap();
        assert_eq!(c.mul(&a, &x1).unwrap().exps, [0, 2, 2]);
        let x1x2 = c.mul(&x1, &x2).unwrap();
        assert_eq!(c.inv_pow(&x1x2, 2).unwrap().exps, [2, 2, 1]);
        assert_eq!(c.inv_pow(&c.unit(2), -1).unwrap().exps, [0, 0, 2]);
        assert_eq!(c.comm(&x2, &x1).unwrap().exps, [0, 0, 1]);
        assert!(c.comm(&a, &a).unwrap().is_identity());

        let c = collector(3, 3, &[2, 2], Variant::Standard);
        let lhs = c.comm(&c.inv_pow(&c.generator(1), 3).unwrap(), &c.generator(0)).unwrap();
        // [x2,x1]^3 [x2,x1,x2]^3
        assert_eq!(lhs.exps, [0, 0, 3, 0, 3]);
    }

    #[test]
    fn modified_basis_round_trip() {
        for orders in [[1u32, 1], [1, 2], [2, 2], [2, 3]] {
            let c = collector(2, 3, &orders, Variant::K3p2);
            let total = c.pc().order().unwrap();
            for id in 0..total {
                let x = c.pc().decode(id);
                let nf = c.from_pc(&x).unwrap();
                for (e, m) in nf.exps.iter().zip(c.basis().moduli()) {
                    assert!((*e as u64) < *m);
                }
                assert_eq!(c.to_pc(&nf).unwrap(), x);
                // collecting the rendered word returns the same normal form
                assert_eq!(c.collect(&c.to_word(&nf)).unwrap(), nf);
            }
        }
    }

    #[test]
    fn modified_basis_identity_for_squares() {
        // [x2,x1,x2] = [x2,x1]^-2 [x2^2,x1]
        let c = collector(2, 3, &[2, 3], Variant::K3p2);
        let x1 = c.generator(0);
        let x2 = c.generator(1);
        let lhs = c.comm(&c.comm(&x2, &x1).unwrap(), &x2).unwrap();
        let sq = c.comm(&c.inv_pow(&x2, 2).unwrap(), &x1).unwrap();
        let rhs = c.mul(&c.inv_pow(&c.comm(&x2, &x1).unwrap(), -2).unwrap(), &sq).unwrap();
        assert_eq!(lhs, rhs);
        assert_eq!(sq, c.unit(4));
    }
}
