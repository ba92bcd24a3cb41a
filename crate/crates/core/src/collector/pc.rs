//! Finite quotients `F/N` of a free nilpotent group, realized as power-
//! conjugate presentations over the surviving basic commutators.
//!
//! The normal subgroup `N` is held as an echelon table in `F`: for each depth
//! `d` an element of `N` whose first nonzero coordinate sits at `d` and is the
//! least positive value possible. The leading values are the relative orders
//! of the quotient, and reducing a vector coordinate by coordinate against
//! the table gives the canonical coset representative.

use std::collections::VecDeque;

use super::free::FreeNilpotent;
use crate::arith::vp;
use crate::error::{Error, Result};

fn ext_gcd(a: i64, b: i64) -> (i64, i64, i64) {
    if b == 0 {
        (a.signum() * a, a.signum(), 0)
    } else {
        let (g, x, y) = ext_gcd(b, a.rem_euclid(b));
        (g, y, x - a.div_euclid(b) * y)
    }
}

/// A normal subgroup of the free nilpotent group in echelon form.
#[derive(Debug, Clone)]
pub struct Echelon {
    table: Vec<Option<Vec<i64>>>,
}

impl Echelon {
    /// Normal closure of `gens` in `f`.
    pub fn normal_closure(f: &FreeNilpotent, gens: &[Vec<i64>]) -> Self {
        let n = f.len();
        let mut ech = Echelon { table: vec![None; n] };
        let mut queue: VecDeque<Vec<i64>> = gens.iter().cloned().collect();
        let conjugators: Vec<Vec<i64>> = (0..f.rank()).map(|i| f.basis_element(i)).collect();
        while let Some(g) = queue.pop_front() {
            if let Some(d) = ech.absorb(f, g, &mut queue) {
                let t = ech.table[d].clone().expect("just set");
                for x in &conjugators {
                    queue.push_back(f.comm(&t, x));
                }
                for e in ech.table.iter().flatten() {
                    queue.push_back(f.comm(&t, e));
                }
            }
        }
        ech
    }

    /// Sift `g`; returns the depth whose entry changed, if any.
    fn absorb(&mut self, f: &FreeNilpotent, mut g: Vec<i64>, queue: &mut VecDeque<Vec<i64>>) -> Option<usize> {
        loop {
            let d = g.iter().position(|&e| e != 0)?;
            match &self.table[d] {
                None => {
                    if g[d] < 0 {
                        g = f.inv(&g);
                    }
                    self.table[d] = Some(g);
                    return Some(d);
                }
                Some(t) => {
                    let (a, b) = (t[d], g[d]);
                    if b % a == 0 {
                        let c = f.pow(t, -(b / a));
                        f.mul_into(&mut g, &c);
                    } else {
                        let (_, u, v) = ext_gcd(a, b);
                        let mut merged = f.pow(t, u);
                        f.mul_into(&mut merged, &f.pow(&g, v));
                        debug_assert!(merged[d] > 0 && merged[..d].iter().all(|&e| e == 0));
                        let old = self.table[d].replace(merged).expect("occupied");
                        queue.push_back(old);
                        queue.push_back(g);
                        return Some(d);
                    }
                }
            }
        }
    }

    /// Leading value at each depth, `None` where the subgroup has no element.
    pub fn leads(&self) -> Vec<Option<i64>> {
        self.table
            .iter()
            .enumerate()
            .map(|(d, t)| t.as_ref().map(|v| v[d]))
            .collect()
    }

    /// Canonical representative of `v N`: every coordinate reduced into
    /// `[0, lead)`. Requires finite index.
    pub fn reduce(&self, f: &FreeNilpotent, v: &[i64]) -> Vec<i64> {
        let mut v = v.to_vec();
        for d in 0..v.len() {
            if let Some(t) = &self.table[d] {
                let q = v[d].div_euclid(t[d]);
                if q != 0 {
                    let c = f.pow(t, -q);
                    f.mul_into(&mut v, &c);
                }
            }
        }
        v
    }
}

/// Element of a [`PcGroup`]: one exponent per position, each below its
/// relative order.
pub type PcElem = Vec<u32>;

#[derive(Debug, Clone)]
pub struct PcGroup {
    prime: u64,
    rel: Vec<u32>,
    rel_exp: Vec<u32>,
    /// `g_t^{rel[t]}`.
    power: Vec<PcElem>,
    /// For `t < j` with `g_j^{g_t} != g_j`: `(g_j^{g_t})^a` for `a < rel[j]`,
    /// flattened.
    conj: Vec<Option<Vec<u32>>>,
    /// `moves[t]`: positions `j > t` not commuting with `g_t`.
    moves: Vec<Vec<usize>>,
    weights: Vec<usize>,
    strides: Vec<u64>,
}

impl PcGroup {
    /// Presentation of `F/N` from an echelon table of finite index.
    /// Returns the group and, for each depth of `F`, its position (if the
    /// relative order there exceeds 1).
    pub fn from_echelon(f: &FreeNilpotent, ech: &Echelon, prime: u64) -> Result<(Self, Vec<Option<usize>>)> {
        let leads = ech.leads();
        let mut positions = Vec::new();
        let mut pos_of = vec![None; f.len()];
        let mut rel = Vec::new();
        let mut rel_exp = Vec::new();
        for (d, lead) in leads.iter().enumerate() {
            let m = lead.ok_or_else(|| {
                Error::Inconsistent(format!("quotient is infinite at {}", f.commutators().render(d)))
            })?;
            if m > 1 {
                let e = vp(m as u64, prime)?.finite().expect("positive");
                if (prime as i64).pow(e) != m {
                    return Err(Error::Inconsistent(format!("relative order {m} is not a power of {prime}")));
                }
                if m > u32::MAX as i64 {
                    return Err(Error::Inconsistent(format!("relative order {m} too large")));
                }
                pos_of[d] = Some(positions.len());
                positions.push(d);
                rel.push(m as u32);
                rel_exp.push(e);
            }
        }
        let n = positions.len();
        let project = |v: &[i64]| -> PcElem {
            let r = ech.reduce(f, v);
            positions.iter().map(|&d| r[d] as u32).collect()
        };
        let power: Vec<PcElem> = positions
            .iter()
            .enumerate()
            .map(|(t, &d)| {
                let mut v = f.identity();
                v[d] = rel[t] as i64;
                project(&v)
            })
            .collect();
        let mut relations: Vec<Option<PcElem>> = vec![None; n * n];
        for (t, &dt) in positions.iter().enumerate() {
            for (j, &dj) in positions.iter().enumerate().skip(t + 1) {
                if let Some(img) = f.conjugate_relation(dt, dj, 1) {
                    let mut v = f.identity();
                    for &(i, a) in img {
                        v[i] = a;
                    }
                    let e = project(&v);
                    let mut unit = vec![0; n];
                    unit[j] = 1;
                    if e != unit {
                        relations[t * n + j] = Some(e);
                    }
                }
            }
        }
        let weights = positions.iter().map(|&d| f.commutators().weight(d)).collect();
        let group = Self::from_relations(prime, rel, rel_exp, power, relations, weights)?;
        Ok((group, pos_of))
    }

    /// Build from relative orders, power relations and conjugation
    /// relations `g_j^{g_t}` (`None` when trivial).
    pub fn from_relations(
        prime: u64,
        rel: Vec<u32>,
        rel_exp: Vec<u32>,
        power: Vec<PcElem>,
        relations: Vec<Option<PcElem>>,
        weights: Vec<usize>,
    ) -> Result<Self> {
        let n = rel.len();
        let mut strides = Vec::with_capacity(n);
        let mut acc: u64 = 1;
        for &m in &rel {
            strides.push(acc);
            acc = acc.saturating_mul(m as u64);
        }
        let moves = (0..n)
            .map(|t| (t + 1..n).filter(|&j| relations[t * n + j].is_some()).collect())
            .collect();
        let mut g = PcGroup {
            prime,
            rel,
            rel_exp,
            power,
            conj: vec![None; n * n],
            moves,
            weights,
            strides,
        };
        // Deepest first: the powers for `t` only multiply at positions > t.
        for t in (0..n).rev() {
            for j in t + 1..n {
                if let Some(base) = &relations[t * n + j] {
                    if base[..j].iter().any(|&e| e != 0) || base[j] != 1 {
                        return Err(Error::Inconsistent(format!(
                            "conjugation relation for positions {t}, {j} is not triangular"
                        )));
                    }
                    let m = g.rel[j] as usize;
                    let mut flat = vec![0u32; m * n];
                    let mut cur = vec![0u32; n];
                    for a in 1..m {
                        g.mul_into(&mut cur, base);
                        flat[a * n..(a + 1) * n].copy_from_slice(&cur);
                    }
                    g.conj[t * n + j] = Some(flat);
                }
            }
        }
        Ok(g)
    }

    pub fn prime(&self) -> u64 {
        self.prime
    }

    pub fn len(&self) -> usize {
        self.rel.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rel.is_empty()
    }

    pub fn relative_orders(&self) -> &[u32] {
        &self.rel
    }

    pub fn relative_exps(&self) -> &[u32] {
        &self.rel_exp
    }

    pub fn weights(&self) -> &[usize] {
        &self.weights
    }

    pub fn power_relation(&self, t: usize) -> &PcElem {
        &self.power[t]
    }

    /// `g_j^{g_t}`, or `None` when the two commute.
    pub fn conjugate(&self, t: usize, j: usize) -> Option<&[u32]> {
        let n = self.len();
        self.conj[t * n + j].as_ref().map(|flat| &flat[n..2 * n])
    }

    /// `log_p` of the group order.
    pub fn order_exp(&self) -> u32 {
        self.rel_exp.iter().sum()
    }

    pub fn order(&self) -> Option<u64> {
        self.prime.checked_pow(self.order_exp())
    }

    pub fn identity(&self) -> PcElem {
        vec![0; self.len()]
    }

    pub fn generator(&self, t: usize) -> PcElem {
        let mut v = self.identity();
        v[t] = 1;
        v
    }

    pub fn is_identity(&self, x: &[u32]) -> bool {
        x.iter().all(|&e| e == 0)
    }

    /// Mixed-radix id with the first position least significant.
    pub fn encode(&self, x: &[u32]) -> u64 {
        x.iter().zip(&self.strides).map(|(&e, &s)| e as u64 * s).sum()
    }

    pub fn decode(&self, mut id: u64) -> PcElem {
        self.rel
            .iter()
            .map(|&m| {
                let e = (id % m as u64) as u32;
                id /= m as u64;
                e
            })
            .collect()
    }

    fn tail_moves(&self, x: &[u32], t: usize) -> bool {
        self.moves[t].iter().any(|&j| x[j] != 0)
    }

    /// `x := x * g_t^e` for `0 <= e`.
    pub fn mul_gen_pow(&self, x: &mut [u32], t: usize, e: u32) {
        if e == 0 {
            return;
        }
        if self.tail_moves(x, t) {
            for _ in 0..e {
                self.mul_gen(x, t);
            }
            return;
        }
        let m = self.rel[t];
        let e = e % m;
        let sum = x[t] + e;
        if sum < m {
            x[t] = sum;
            return;
        }
        x[t] = sum - m;
        self.carry(x, t);
    }

    /// After `x[t]` wrapped around: multiply the part beyond `t` by the
    /// power relation, placing it in front of the old tail.
    fn carry(&self, x: &mut [u32], t: usize) {
        let pw = &self.power[t];
        if self.is_identity(pw) {
            return;
        }
        let n = self.len();
        let tail: Vec<(usize, u32)> = (t + 1..n).filter(|&j| x[j] != 0).map(|j| (j, x[j])).collect();
        if tail.is_empty() {
            self.mul_into(x, pw);
            return;
        }
        for &(j, _) in &tail {
            x[j] = 0;
        }
        self.mul_into(x, pw);
        for (j, a) in tail {
            self.mul_gen_pow(x, j, a);
        }
    }

    /// `x := x * g_t`.
    pub fn mul_gen(&self, x: &mut [u32], t: usize) {
        let n = self.len();
        let tail: Vec<(usize, u32)> = (t + 1..n).filter(|&j| x[j] != 0).map(|j| (j, x[j])).collect();
        for &(j, _) in &tail {
            x[j] = 0;
        }
        x[t] += 1;
        if x[t] == self.rel[t] {
            x[t] = 0;
            self.mul_into(x, &self.power[t]);
        }
        for (j, a) in tail {
            match &self.conj[t * n + j] {
                None => self.mul_gen_pow(x, j, a),
                Some(flat) => {
                    let img = &flat[a as usize * n..(a as usize + 1) * n];
                    self.mul_into(x, img);
                }
            }
        }
    }

    pub fn mul_into(&self, x: &mut [u32], y: &[u32]) {
        for (u, &e) in y.iter().enumerate() {
            if e != 0 {
                self.mul_gen_pow(x, u, e);
            }
        }
    }

    pub fn mul(&self, x: &[u32], y: &[u32]) -> PcElem {
        let mut out = x.to_vec();
        self.mul_into(&mut out, y);
        out
    }

    pub fn inv(&self, x: &[u32]) -> PcElem {
        let mut cur = x.to_vec();
        let mut y = self.identity();
        for d in 0..self.len() {
            if cur[d] != 0 {
                let e = self.rel[d] - cur[d];
                self.mul_gen_pow(&mut cur, d, e);
                y[d] = e;
            }
        }
        debug_assert!(self.is_identity(&cur));
        y
    }

    pub fn pow(&self, x: &[u32], e: i64) -> PcElem {
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

    pub fn comm(&self, x: &[u32], y: &[u32]) -> PcElem {
        let mut out = self.inv(x);
        self.mul_into(&mut out, &self.inv(y));
        self.mul_into(&mut out, x);
        self.mul_into(&mut out, y);
        out
    }

    pub fn conj_by(&self, x: &[u32], y: &[u32]) -> PcElem {
        let mut out = self.inv(y);
        self.mul_into(&mut out, x);
        self.mul_into(&mut out, y);
        out
    }

    /// Order of `x` as `log_p`.
    pub fn element_order_exp(&self, x: &[u32]) -> u32 {
        let mut y = x.to_vec();
        let mut e = 0;
        while !self.is_identity(&y) {
            y = self.pow(&y, self.prime as i64);
            e += 1;
        }
        e
    }
}


#[cfg(test)]
mod timing {
    use super::*;
    #[test]
    #[ignore]
    fn big_builds() {
        for &(p, k, ref orders) in &[(5u64, 4usize, vec![2u32, 3, 3]), (3, 3, vec![2, 2, 2, 2]), (3, 4, vec![2, 2, 2])] {
            let t0 = std::time::Instant::now();
            let f = FreeNilpotent::new(orders.len(), k).unwrap();
            let t1 = t0.elapsed();
            let gens: Vec<Vec<i64>> = orders.iter().enumerate().map(|(i, &a)| { let mut v = f.identity(); v[i] = (p as i64).pow(a); v }).collect();
            let ech = Echelon::normal_closure(&f, &gens);
            let t2 = t0.elapsed();
            let (g, _) = PcGroup::from_echelon(&f, &ech, p).unwrap();
            eprintln!("p={p} k={k} {orders:?}: n={} order p^{} free {:?} ech {:?} total {:?}", g.len(), g.order_exp(), t1, t2, t0.elapsed());
        }
    }
}
