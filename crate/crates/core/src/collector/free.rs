//! The free nilpotent group of class `k` on `r` generators, with elements
//! stored as integer exponent vectors over the basic commutators.
//!
//! Two independent multiplication routes live here. [`FreeNilpotent::collect_letters`]
//! runs Hall's collection process letter by letter on words in the
//! generators. [`FreeNilpotent::mul`] is collection from the left driven by
//! precomputed conjugation relations `c_j^{c_t}`, which themselves come from
//! the letter process.

use crate::error::{Error, Result};
use crate::hallbasis::{BasicCommutators, Shape};

/// Which occurrence of the least uncollected letter is moved first.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Strategy {
    #[default]
    LeftmostFirst,
    RightmostFirst,
}

/// Sparse exponent vector: `(index, exponent)` pairs in ascending index.
pub type Sparse = Vec<(usize, i64)>;

/// Letter: basic commutator index and a sign.
type Letter = (usize, i8);

const LETTER_LIMIT: usize = 4_000_000;

#[derive(Debug, Clone)]
pub struct FreeNilpotent {
    comms: BasicCommutators,
    /// Each basic commutator spelled out in the generators.
    spelled: Vec<Vec<Letter>>,
    /// `conj[t * n + j]` for `t < j`: images of `c_j` under conjugation by
    /// `c_t` and by `c_t^-1`; `None` when they commute.
    conj: Vec<Option<(Sparse, Sparse)>>,
}

fn invert(word: &[Letter]) -> Vec<Letter> {
    word.iter().rev().map(|&(a, s)| (a, -s)).collect()
}

fn free_reduce(word: Vec<Letter>) -> Vec<Letter> {
    let mut out: Vec<Letter> = Vec::with_capacity(word.len());
    for l in word {
        match out.last() {
            Some(&(a, s)) if a == l.0 && s == -l.1 => {
                out.pop();
            }
            _ => out.push(l),
        }
    }
    out
}

pub(crate) fn sparse(v: &[i64]) -> Sparse {
    v.iter().enumerate().filter(|(_, &e)| e != 0).map(|(i, &e)| (i, e)).collect()
}

impl FreeNilpotent {
    pub fn new(rank: usize, class: usize) -> Result<Self> {
        let comms = BasicCommutators::new(rank, class)?;
        let n = comms.len();
        let mut spelled: Vec<Vec<Letter>> = Vec::with_capacity(n);
        for i in 0..n {
            let w = match comms.get(i).shape {
                Shape::Leaf(g) => vec![(g, 1)],
                Shape::Bracket(u, v) => {
                    let (a, b) = (&spelled[u], &spelled[v]);
                    let mut w = invert(a);
                    w.extend(invert(b));
                    w.extend_from_slice(a);
                    w.extend_from_slice(b);
                    w
                }
            };
            spelled.push(w);
        }
        let mut f = FreeNilpotent {
            comms,
            spelled,
            conj: vec![None; n * n],
        };
        for t in 0..n {
            for j in t + 1..n {
                if f.comms.weight(t) + f.comms.weight(j) > class {
                    continue;
                }
                let plus = if let Some(c) = f.comms.pair(j, t) {
                    let mut v = vec![(j, 1)];
                    v.push((c, 1));
                    v
                } else {
                    let mut w = invert(&f.spelled[t]);
                    w.extend_from_slice(&f.spelled[j]);
                    w.extend_from_slice(&f.spelled[t]);
                    sparse(&f.run_hall(w, Strategy::LeftmostFirst)?)
                };
                let mut w = f.spelled[t].clone();
                w.extend_from_slice(&f.spelled[j]);
                w.extend(invert(&f.spelled[t]));
                let minus = sparse(&f.run_hall(w, Strategy::LeftmostFirst)?);
                if plus != [(j, 1)] {
                    f.conj[t * n + j] = Some((plus, minus));
                }
            }
        }
        Ok(f)
    }

    pub fn commutators(&self) -> &BasicCommutators {
        &self.comms
    }

    pub fn len(&self) -> usize {
        self.comms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.comms.is_empty()
    }

    pub fn rank(&self) -> usize {
        self.comms.rank()
    }

    pub fn class(&self) -> usize {
        self.comms.class()
    }

    pub fn identity(&self) -> Vec<i64> {
        vec![0; self.len()]
    }

    pub fn basis_element(&self, i: usize) -> Vec<i64> {
        let mut v = self.identity();
        v[i] = 1;
        v
    }

    /// The conjugate `c_j^{c_t^eps}` when it differs from `c_j`.
    pub fn conjugate_relation(&self, t: usize, j: usize, eps: i64) -> Option<&Sparse> {
        assert!(t < j);
        self.conj[t * self.len() + j]
            .as_ref()
            .map(|(p, m)| if eps > 0 { p } else { m })
    }

    // ---- Hall's collection process on letters ----

    /// Collect a word whose letters are basic commutators with integer
    /// exponents. Every letter is first spelled out in the generators.
    pub fn collect_letters(&self, word: &[(usize, i64)], strategy: Strategy) -> Result<Vec<i64>> {
        let mut letters: Vec<Letter> = Vec::new();
        for &(a, e) in word {
            if a >= self.len() {
                return Err(Error::UnknownAtom(format!("basis index {a}")));
            }
            let piece = if e >= 0 { self.spelled[a].clone() } else { invert(&self.spelled[a]) };
            for _ in 0..e.unsigned_abs() {
                letters.extend_from_slice(&piece);
                if letters.len() > LETTER_LIMIT {
                    return Err(Error::BudgetExceeded {
                        required: letters.len() as u128,
                        budget: LETTER_LIMIT as u64,
                    });
                }
            }
        }
        self.run_hall(free_reduce(letters), strategy)
    }

    /// Image of `x` under conjugation by `c^-1`, as a word:
    /// `x^{c^-1} = x * (x'^{c^-1})^-1` with `x' = [x, c]`.
    fn conj_by_inverse(&self, x: usize, c: usize) -> Result<Vec<Letter>> {
        let mut w = vec![(x, 1)];
        if self.comms.weight(x) + self.comms.weight(c) <= self.class() {
            let y = self.bracket(x, c)?;
            w.extend(invert(&self.conj_by_inverse(y, c)?));
        }
        Ok(w)
    }

    fn bracket(&self, u: usize, v: usize) -> Result<usize> {
        self.comms.pair(u, v).ok_or_else(|| {
            Error::Inconsistent(format!(
                "collection produced the non-basic bracket [{}, {}]",
                self.comms.render(u),
                self.comms.render(v)
            ))
        })
    }

    fn run_hall(&self, mut word: Vec<Letter>, strategy: Strategy) -> Result<Vec<i64>> {
        let k = self.class();
        let mut collected = self.identity();
        loop {
            let Some(c) = word.iter().map(|l| l.0).min() else {
                break;
            };
            let pos = match strategy {
                Strategy::LeftmostFirst => word.iter().position(|l| l.0 == c),
                Strategy::RightmostFirst => word.iter().rposition(|l| l.0 == c),
            }
            .expect("minimum is present");
            let eps = word[pos].1;
            let mut next: Vec<Letter> = Vec::with_capacity(word.len() + pos);
            for &(u, s) in &word[..pos] {
                if u == c || self.comms.weight(u) + self.comms.weight(c) > k {
                    next.push((u, s));
                    continue;
                }
                if eps > 0 {
                    let uc = self.bracket(u, c)?;
                    if s > 0 {
                        next.push((u, 1));
                        next.push((uc, 1));
                    } else {
                        next.push((uc, -1));
                        next.push((u, -1));
                    }
                } else {
                    let img = self.conj_by_inverse(u, c)?;
                    if s > 0 {
                        next.extend(img);
                    } else {
                        next.extend(invert(&img));
                    }
                }
            }
            next.extend_from_slice(&word[pos + 1..]);
            collected[c] += eps as i64;
            word = free_reduce(next);
            if word.len() > LETTER_LIMIT {
                return Err(Error::BudgetExceeded {
                    required: word.len() as u128,
                    budget: LETTER_LIMIT as u64,
                });
            }
        }
        Ok(collected)
    }

    // ---- collection from the left with precomputed relations ----

    /// Whether some nonzero coordinate of `x` beyond `t` fails to commute
    /// with `c_t`.
    fn tail_moves(&self, x: &[i64], t: usize) -> bool {
        let n = self.len();
        (t + 1..n).any(|j| x[j] != 0 && self.conj[t * n + j].is_some())
    }

    /// `x := x * c_t^s`.
    pub fn mul_gen_pow(&self, x: &mut [i64], t: usize, s: i64) {
        if s == 0 {
            return;
        }
        if !self.tail_moves(x, t) {
            x[t] += s;
            return;
        }
        if s.abs() <= 4 {
            for _ in 0..s.abs() {
                self.mul_gen(x, t, s.signum());
            }
            return;
        }
        let images = self.conjugation_power(t, s);
        let tail: Sparse = (t + 1..self.len()).filter(|&j| x[j] != 0).map(|j| (j, x[j])).collect();
        for &(j, _) in &tail {
            x[j] = 0;
        }
        x[t] += s;
        for (j, e) in tail {
            let p = self.pow(&images[j - t - 1], e);
            self.mul_into(x, &p);
        }
    }

    /// `x := x * c_t^eps` for `eps = +-1`.
    fn mul_gen(&self, x: &mut [i64], t: usize, eps: i64) {
        let n = self.len();
        let tail: Sparse = (t + 1..n).filter(|&j| x[j] != 0).map(|j| (j, x[j])).collect();
        for &(j, _) in &tail {
            x[j] = 0;
        }
        x[t] += eps;
        for (j, e) in tail {
            match self.conjugate_relation(t, j, eps) {
                None => self.mul_gen_pow(x, j, e),
                Some(img) => {
                    let mut v = self.identity();
                    for &(i, a) in img {
                        v[i] = a;
                    }
                    let p = self.pow(&v, e);
                    self.mul_into(x, &p);
                }
            }
        }
    }

    /// Images of `c_j` (`j > t`) under conjugation by `c_t^s`, by repeated
    /// squaring of the conjugation automorphism.
    fn conjugation_power(&self, t: usize, s: i64) -> Vec<Vec<i64>> {
        let n = self.len();
        let eps = s.signum();
        let mut base: Vec<Vec<i64>> = (t + 1..n)
            .map(|j| {
                let mut v = self.identity();
                match self.conjugate_relation(t, j, eps) {
                    None => v[j] = 1,
                    Some(img) => {
                        for &(i, a) in img {
                            v[i] = a;
                        }
                    }
                }
                v
            })
            .collect();
        let mut acc: Option<Vec<Vec<i64>>> = None;
        let mut m = s.unsigned_abs();
        while m > 0 {
            if m & 1 == 1 {
                acc = Some(match acc {
                    None => base.clone(),
                    Some(a) => self.compose(t, &a, &base),
                });
            }
            m >>= 1;
            if m > 0 {
                base = self.compose(t, &base, &base);
            }
        }
        acc.expect("s is nonzero")
    }

    /// Apply the map `b` to each image in `a` (both defined on `c_j`, `j > t`).
    fn compose(&self, t: usize, a: &[Vec<i64>], b: &[Vec<i64>]) -> Vec<Vec<i64>> {
        a.iter()
            .map(|img| {
                let mut out = self.identity();
                for (j, &e) in img.iter().enumerate() {
                    if e != 0 {
                        debug_assert!(j > t);
                        let p = self.pow(&b[j - t - 1], e);
                        self.mul_into(&mut out, &p);
                    }
                }
                out
            })
            .collect()
    }

    pub fn mul_into(&self, x: &mut [i64], y: &[i64]) {
        for (u, &e) in y.iter().enumerate() {
            if e != 0 {
                self.mul_gen_pow(x, u, e);
            }
        }
    }

    pub fn mul(&self, x: &[i64], y: &[i64]) -> Vec<i64> {
        let mut out = x.to_vec();
        self.mul_into(&mut out, y);
        out
    }

    pub fn inv(&self, x: &[i64]) -> Vec<i64> {
        let mut out = self.identity();
        for d in (0..self.len()).rev() {
            if x[d] != 0 {
                self.mul_gen_pow(&mut out, d, -x[d]);
            }
        }
        out
    }

    pub fn pow(&self, x: &[i64], e: i64) -> Vec<i64> {
        let mut base = if e < 0 { self.inv(x) } else { x.to_vec() };
        let mut m = e.unsigned_abs();
        let mut acc = self.identity();
        while m > 0 {
            if m & 1 == 1 {
                self.mul_into(&mut acc, &base);
            }
            m >>= 1;
            if m > 0 {
                base = self.mul(&base, &base);
            }
        }
        acc
    }

    pub fn comm(&self, x: &[i64], y: &[i64]) -> Vec<i64> {
        let mut out = self.inv(x);
        self.mul_into(&mut out, &self.inv(y));
        self.mul_into(&mut out, x);
        self.mul_into(&mut out, y);
        out
    }

    /// The element as a word in basic commutators.
    pub fn to_letters(&self, x: &[i64]) -> Vec<(usize, i64)> {
        sparse(x)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_word(rng: &mut ChaCha8Rng, rank: usize, len: usize) -> Vec<(usize, i64)> {
        (0..len)
            .map(|_| (rng.gen_range(0..rank), [-2i64, -1, 1, 2, 3][rng.gen_range(0..5)]))
            .collect()
    }

    #[test]
    fn commutator_of_generators_is_basic() {
        let f = FreeNilpotent::new(2, 3).unwrap();
        // x2 x1 = x1 x2 [x2,x1]
        let v = f.collect_letters(&[(1, 1), (0, 1)], Strategy::LeftmostFirst).unwrap();
        assert_eq!(v, [1, 1, 1, 0, 0]);
        // [x2, x1] spelled out collects to itself
        let v = f.collect_letters(&[(2, 1)], Strategy::LeftmostFirst).unwrap();
        assert_eq!(v, [0, 0, 1, 0, 0]);
        let v = f.collect_letters(&[(4, -2)], Strategy::RightmostFirst).unwrap();
        assert_eq!(v, [0, 0, 0, 0, -2]);
    }

    #[test]
    fn strategies_agree() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for &(r, k) in &[(2, 3), (3, 3), (2, 4), (2, 5)] {
            let f = FreeNilpotent::new(r, k).unwrap();
            for _ in 0..30 {
                let w = random_word(&mut rng, r, 6);
                let a = f.collect_letters(&w, Strategy::LeftmostFirst).unwrap();
                let b = f.collect_letters(&w, Strategy::RightmostFirst).unwrap();
                assert_eq!(a, b, "{w:?}");
            }
        }
    }

    #[test]
    fn table_multiplication_matches_letter_collection() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for &(r, k) in &[(2, 2), (3, 3), (2, 4), (3, 4)] {
            let f = FreeNilpotent::new(r, k).unwrap();
            for _ in 0..30 {
                let w1 = random_word(&mut rng, r, 4);
                let w2 = random_word(&mut rng, r, 4);
                let a = f.collect_letters(&w1, Strategy::LeftmostFirst).unwrap();
                let b = f.collect_letters(&w2, Strategy::LeftmostFirst).unwrap();
                let mut both = w1.clone();
                both.extend(&w2);
                let ab = f.collect_letters(&both, Strategy::LeftmostFirst).unwrap();
                assert_eq!(f.mul(&a, &b), ab);
            }
        }
    }

    #[test]
    fn large_powers_use_the_same_group_law() {
        let f = FreeNilpotent::new(2, 4).unwrap();
        let x = f.collect_letters(&[(0, 1), (1, 2), (0, -1)], Strategy::LeftmostFirst).unwrap();
        let mut slow = f.identity();
        for _ in 0..37 {
            slow = f.mul(&slow, &x);
        }
        assert_eq!(f.pow(&x, 37), slow);
        assert_eq!(f.mul(&f.pow(&x, 37), &f.pow(&x, -37)), f.identity());
        let mut y = f.basis_element(1);
        f.mul_gen_pow(&mut y, 0, 29);
        let mut z = f.basis_element(1);
        for _ in 0..29 {
            f.mul_gen_pow(&mut z, 0, 1);
        }
        assert_eq!(y, z);
    }
}
