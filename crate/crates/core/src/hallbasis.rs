//! Basic commutators in Hall's ordering, and the exponent moduli that turn
//! them into normal-form coordinates for a nilpotent product of cyclic
//! p-groups.

use std::collections::HashMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::arith::{check_prime, prime_power};
use crate::error::{Error, Result};

pub const MAX_RANK: usize = 6;
pub const MAX_CLASS: usize = 6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Shape {
    /// Generator `x_{i+1}` (zero-based index).
    Leaf(usize),
    /// `[u, v]` with `u > v`, both given as indices into the list.
    Bracket(usize, usize),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BasicCommutator {
    pub shape: Shape,
    pub weight: usize,
    /// Bitmask of generator indices occurring in the commutator.
    pub support: u32,
}

impl BasicCommutator {
    pub fn support_indices(&self) -> Vec<usize> {
        (0..32).filter(|i| self.support >> i & 1 == 1).collect()
    }
}

/// All basic commutators of weight at most `class` on `rank` generators, in
/// ascending order. The list index is the position in the order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BasicCommutators {
    rank: usize,
    class: usize,
    items: Vec<BasicCommutator>,
    pairs: HashMap<(usize, usize), usize>,
    weight_start: Vec<usize>,
}

impl BasicCommutators {
    pub fn new(rank: usize, class: usize) -> Result<Self> {
        if rank == 0 || rank > MAX_RANK {
            return Err(Error::OutOfRange {
                what: "rank",
                value: rank as i64,
                range: format!("1..={MAX_RANK}"),
            });
        }
        if class == 0 || class > MAX_CLASS {
            return Err(Error::OutOfRange {
                what: "class",
                value: class as i64,
                range: format!("1..={MAX_CLASS}"),
            });
        }
        let mut items: Vec<BasicCommutator> = (0..rank)
            .map(|i| BasicCommutator {
                shape: Shape::Leaf(i),
                weight: 1,
                support: 1 << i,
            })
            .collect();
        let mut weight_start = vec![0, 0, rank];
        for w in 2..=class {
            let mut layer: Vec<(usize, usize)> = Vec::new();
            for u in 0..items.len() {
                let wu = items[u].weight;
                if wu >= w {
                    break;
                }
                let wv = w - wu;
                let (lo, hi) = (weight_start[wv], weight_start[wv + 1]);
                for v in lo..hi.min(u) {
                    let ok = match items[u].shape {
                        Shape::Leaf(_) => true,
                        Shape::Bracket(_, u2) => u2 <= v,
                    };
                    if ok {
                        layer.push((u, v));
                    }
                }
            }
            // Within a weight: compare right components first, then left.
            layer.sort_by_key(|&(u, v)| (v, u));
            for (u, v) in layer {
                let item = BasicCommutator {
                    shape: Shape::Bracket(u, v),
                    weight: w,
                    support: items[u].support | items[v].support,
                };
                items.push(item);
            }
            weight_start.push(items.len());
        }
        let pairs = items
            .iter()
            .enumerate()
            .filter_map(|(i, c)| match c.shape {
                Shape::Bracket(u, v) => Some(((u, v), i)),
                Shape::Leaf(_) => None,
            })
            .collect();
        Ok(BasicCommutators {
            rank,
            class,
            items,
            pairs,
            weight_start,
        })
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn class(&self) -> usize {
        self.class
    }

    pub fn len(&self) -> usize {
        self.items.len()
    }

    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }

    pub fn get(&self, i: usize) -> &BasicCommutator {
        &self.items[i]
    }

    pub fn items(&self) -> &[BasicCommutator] {
        &self.items
    }

    pub fn weight(&self, i: usize) -> usize {
        self.items[i].weight
    }

    /// Index of `[u, v]` if that bracket is itself basic.
    pub fn pair(&self, u: usize, v: usize) -> Option<usize> {
        self.pairs.get(&(u, v)).copied()
    }

    /// Index range of the commutators of weight `w`.
    pub fn weight_range(&self, w: usize) -> std::ops::Range<usize> {
        if w == 0 || w > self.class {
            return 0..0;
        }
        self.weight_start[w]..self.weight_start[w + 1]
    }

    /// Left-normed flattening: `[[a,b],c]` becomes `(a, [b, c])`.
    pub fn left_chain(&self, i: usize) -> Vec<usize> {
        match self.items[i].shape {
            Shape::Leaf(_) => vec![i],
            Shape::Bracket(u, v) => {
                let mut chain = self.left_chain(u);
                chain.push(v);
                chain
            }
        }
    }

    pub fn render(&self, i: usize) -> String {
        match self.items[i].shape {
            Shape::Leaf(g) => format!("x{}", g + 1),
            Shape::Bracket(..) => {
                let parts: Vec<String> = self.left_chain(i).iter().map(|&c| self.render(c)).collect();
                format!("[{}]", parts.join(","))
            }
        }
    }

    /// Shape of a weight-3 or heavier basic commutator on two generators:
    /// `[z,y,y,c4,...]` or `[z,y,z,c4,...]`, together with the tail.
    pub fn two_gen_shape(&self, i: usize) -> Result<(TwoGenShape, Vec<usize>)> {
        let c = &self.items[i];
        if c.weight < 3 || c.support.count_ones() != 2 {
            return Err(Error::InvalidParameter(format!(
                "{} is not a two-generator commutator of weight at least 3",
                self.render(i)
            )));
        }
        let chain = self.left_chain(i);
        let (z, y, third) = (chain[0], chain[1], chain[2]);
        let shape = if third == y {
            TwoGenShape::ZyyPrefix
        } else if third == z {
            TwoGenShape::ZyzPrefix
        } else {
            return Err(Error::Inconsistent(format!(
                "unexpected prefix in {}",
                self.render(i)
            )));
        };
        Ok((shape, chain[3..].to_vec()))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TwoGenShape {
    ZyyPrefix,
    ZyzPrefix,
}

/// Number of basic commutators of weight `w` on `r` generators.
pub fn witt(r: u64, w: u64) -> u64 {
    let mut total: i64 = 0;
    for d in 1..=w {
        if w % d == 0 {
            total += mobius(d) * (r as i64).pow((w / d) as u32);
        }
    }
    (total / w as i64) as u64
}

fn mobius(n: u64) -> i64 {
    let mut n = n;
    let mut sign = 1;
    let mut d = 2;
    while d * d <= n {
        if n % d == 0 {
            n /= d;
            if n % d == 0 {
                return 0;
            }
            sign = -sign;
        }
        d += 1;
    }
    if n > 1 {
        sign = -sign;
    }
    sign
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum Variant {
    #[default]
    Standard,
    K3p2,
}

/// One normal-form coordinate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BasisEntry {
    /// A basic commutator, by index into [`BasicCommutators`].
    Commutator(usize),
    /// `[x_j^2, x_i]`, occupying the slot of `[x_j,x_i,x_j]` (zero-based `j > i`).
    SquareLeft { j: usize, i: usize },
    /// `[x_j, x_i^2]`, occupying the slot of `[x_j,x_i,x_i]`.
    SquareRight { j: usize, i: usize },
}

/// Ordered normal-form coordinates with their exponent moduli.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HallBasis {
    comms: BasicCommutators,
    prime: u64,
    orders: Vec<u32>,
    variant: Variant,
    entries: Vec<BasisEntry>,
    /// Each modulus is `prime^modulus_exps[i]`.
    modulus_exps: Vec<u32>,
    moduli: Vec<u64>,
}

impl HallBasis {
    /// Attach moduli to the basic commutators of `comms`. `orders[i]` is the
    /// exponent of the order of generator `i`.
    pub fn new(comms: BasicCommutators, prime: u64, orders: &[u32], variant: Variant) -> Result<Self> {
        check_prime(prime)?;
        let r = comms.rank();
        let k = comms.class();
        if orders.len() != r {
            return Err(Error::InvalidParameter(format!(
                "expected {r} generator orders, got {}",
                orders.len()
            )));
        }
        if let Some(&a) = orders.iter().find(|&&a| a == 0) {
            return Err(Error::OutOfRange {
                what: "generator order exponent",
                value: a as i64,
                range: ">= 1".into(),
            });
        }
        let mut entries = Vec::with_capacity(comms.len());
        let mut modulus_exps = Vec::with_capacity(comms.len());
        match variant {
            Variant::Standard => {
                if prime < k as u64 {
                    return Err(Error::InvalidParameter(format!(
                        "the standard basis needs p >= k (p = {prime}, k = {k})"
                    )));
                }
                for (idx, c) in comms.items().iter().enumerate() {
                    let m = c.support_indices().iter().map(|&g| orders[g]).min().unwrap();
                    entries.push(BasisEntry::Commutator(idx));
                    modulus_exps.push(m);
                }
            }
            Variant::K3p2 => {
                if prime != 2 || k != 3 {
                    return Err(Error::InvalidParameter(format!(
                        "the modified basis exists only for p = 2, k = 3 (p = {prime}, k = {k})"
                    )));
                }
                if orders.windows(2).any(|w| w[0] > w[1]) {
                    return Err(Error::InvalidParameter(
                        "the modified basis needs ascending generator orders".into(),
                    ));
                }
                for (idx, c) in comms.items().iter().enumerate() {
                    let support = c.support_indices();
                    let i = support[0];
                    let (entry, m) = match c.weight {
                        1 => (BasisEntry::Commutator(idx), orders[i]),
                        2 => (BasisEntry::Commutator(idx), orders[i] + 1),
                        _ if support.len() == 3 => (BasisEntry::Commutator(idx), orders[i]),
                        _ => {
                            let j = support[1];
                            match comms.two_gen_shape(idx)?.0 {
                                TwoGenShape::ZyyPrefix => (BasisEntry::SquareRight { j, i }, orders[i] - 1),
                                TwoGenShape::ZyzPrefix => {
                                    let m = if orders[i] == orders[j] { orders[i] - 1 } else { orders[i] };
                                    (BasisEntry::SquareLeft { j, i }, m)
                                }
                            }
                        }
                    };
                    entries.push(entry);
                    modulus_exps.push(m);
                }
            }
        }
        let moduli = modulus_exps
            .iter()
            .map(|&e| prime_power(prime, e))
            .collect::<Result<Vec<_>>>()?;
        Ok(HallBasis {
            comms,
            prime,
            orders: orders.to_vec(),
            variant,
            entries,
            modulus_exps,
            moduli,
        })
    }

    pub fn build(prime: u64, class: usize, orders: &[u32], variant: Variant) -> Result<Self> {
        let comms = BasicCommutators::new(orders.len(), class)?;
        Self::new(comms, prime, orders, variant)
    }

    pub fn commutators(&self) -> &BasicCommutators {
        &self.comms
    }

    pub fn prime(&self) -> u64 {
        self.prime
    }

    pub fn rank(&self) -> usize {
        self.comms.rank()
    }

    pub fn class(&self) -> usize {
        self.comms.class()
    }

    pub fn orders(&self) -> &[u32] {
        &self.orders
    }

    pub fn variant(&self) -> Variant {
        self.variant
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn entries(&self) -> &[BasisEntry] {
        &self.entries
    }

    pub fn moduli(&self) -> &[u64] {
        &self.moduli
    }

    pub fn modulus_exps(&self) -> &[u32] {
        &self.modulus_exps
    }

    pub fn weight(&self, i: usize) -> usize {
        self.comms.weight(i)
    }

    /// `log_p` of the product of the moduli.
    pub fn order_exp(&self) -> u32 {
        self.modulus_exps.iter().sum()
    }

    /// Product of the moduli, if it fits.
    pub fn order(&self) -> Option<u128> {
        (self.prime as u128).checked_pow(self.order_exp())
    }

    pub fn render_entry(&self, i: usize) -> String {
        match self.entries[i] {
            BasisEntry::Commutator(c) => self.comms.render(c),
            BasisEntry::SquareLeft { j, i } => format!("[x{}^2,x{}]", j + 1, i + 1),
            BasisEntry::SquareRight { j, i } => format!("[x{},x{}^2]", j + 1, i + 1),
        }
    }
}

impl fmt::Display for HallBasis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for i in 0..self.len() {
            writeln!(f, "{:<16} mod {}", self.render_entry(i), self.moduli[i])?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn names(b: &BasicCommutators) -> Vec<String> {
        (0..b.len()).map(|i| b.render(i)).collect()
    }

    #[test]
    fn small_lists() {
        let b = BasicCommutators::new(2, 2).unwrap();
        assert_eq!(names(&b), ["x1", "x2", "[x2,x1]"]);
        let b = BasicCommutators::new(2, 3).unwrap();
        assert_eq!(names(&b), ["x1", "x2", "[x2,x1]", "[x2,x1,x1]", "[x2,x1,x2]"]);
        assert_eq!(BasicCommutators::new(4, 3).unwrap().len(), 30);
    }

    #[test]
    fn rejects_degenerate_sizes() {
        assert!(BasicCommutators::new(0, 2).is_err());
        assert!(BasicCommutators::new(2, 0).is_err());
        assert!(BasicCommutators::new(7, 2).is_err());
    }

    #[test]
    fn counts_match_witt_numbers() {
        for r in 1..=4 {
            for k in 1..=5 {
                let b = BasicCommutators::new(r, k).unwrap();
                for w in 1..=k {
                    assert_eq!(b.weight_range(w).len() as u64, witt(r as u64, w as u64), "r={r} k={k} w={w}");
                }
            }
        }
    }

    // Basic-ness checked directly from the definition on every listed item,
    // and the listed order is strictly increasing.
    #[test]
    fn every_item_satisfies_the_definition() {
        let b = BasicCommutators::new(3, 5).unwrap();
        for (i, c) in b.items().iter().enumerate() {
            if let Shape::Bracket(u, v) = c.shape {
                assert!(u > v && u < i && v < i);
                if let Shape::Bracket(_, u2) = b.get(u).shape {
                    assert!(u2 <= v);
                }
            }
        }
        for w in 2..=5 {
            let keys: Vec<(usize, usize)> = b
                .weight_range(w)
                .map(|i| match b.get(i).shape {
                    Shape::Bracket(u, v) => (v, u),
                    Shape::Leaf(_) => unreachable!(),
                })
                .collect();
            assert!(keys.windows(2).all(|p| p[0] < p[1]));
        }
    }

    #[test]
    fn two_generator_shapes() {
        let b = BasicCommutators::new(2, 5).unwrap();
        let find = |s: &str| (0..b.len()).find(|&i| b.render(i) == s).unwrap();
        assert_eq!(b.two_gen_shape(find("[x2,x1,x1]")).unwrap(), (TwoGenShape::ZyyPrefix, vec![]));
        assert_eq!(b.two_gen_shape(find("[x2,x1,x2]")).unwrap(), (TwoGenShape::ZyzPrefix, vec![]));
        let c = find("[x2,x1,x1,[x2,x1]]");
        assert_eq!(b.two_gen_shape(c).unwrap(), (TwoGenShape::ZyyPrefix, vec![2]));
        assert!(b.two_gen_shape(2).is_err());
        for i in b.weight_range(3).start..b.len() {
            assert!(b.two_gen_shape(i).is_ok(), "{}", b.render(i));
        }
    }

    #[test]
    fn standard_moduli() {
        let h = HallBasis::build(3, 2, &[1, 2], Variant::Standard).unwrap();
        assert_eq!(h.moduli(), [3, 9, 3]);
        assert!(HallBasis::build(2, 3, &[1, 1], Variant::Standard).is_err());
    }

    #[test]
    fn modified_moduli() {
        let h = HallBasis::build(2, 3, &[1, 1], Variant::K3p2).unwrap();
        assert_eq!(h.moduli(), [2, 2, 4, 1, 1]);
        assert_eq!(h.order(), Some(16));
        assert_eq!(h.render_entry(3), "[x2,x1^2]");
        assert_eq!(h.render_entry(4), "[x2^2,x1]");
        let h = HallBasis::build(2, 3, &[1, 2], Variant::K3p2).unwrap();
        assert_eq!(h.entries()[4], BasisEntry::SquareLeft { j: 1, i: 0 });
        assert_eq!(h.moduli()[4], 2);
        let h = HallBasis::build(2, 3, &[1, 1, 2], Variant::K3p2).unwrap();
        assert_eq!(h.len(), 3 + 3 + 8);
        assert!(HallBasis::build(2, 3, &[2, 1], Variant::K3p2).is_err());
        assert!(HallBasis::build(3, 3, &[1, 1], Variant::K3p2).is_err());
    }
}
