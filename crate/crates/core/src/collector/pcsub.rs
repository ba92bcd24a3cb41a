//! Subgroups of a [`PcGroup`] without enumerating elements.
//!
//! Each position of relative order `p^a` is split into `a` layers of order
//! `p`, one per base-`p` digit of its exponent. Because the positions are
//! sorted by commutator weight, the layers form a central series. A subgroup
//! is stored as an induced sequence: at most one element per layer, whose
//! first nonzero digit sits in that layer and equals 1.

use super::pc::{PcElem, PcGroup};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PcSubgroup {
    table: Vec<Option<PcElem>>,
}

impl PcSubgroup {
    /// `log_p` of the order.
    pub fn order_exp(&self) -> u32 {
        self.table.iter().flatten().count() as u32
    }

    pub fn elements_of_sequence(&self) -> impl Iterator<Item = &PcElem> {
        self.table.iter().flatten()
    }

    pub fn has_layer(&self, l: usize) -> bool {
        self.table[l].is_some()
    }
}

impl PcGroup {
    fn layer_offsets(&self) -> Vec<usize> {
        let mut out = Vec::with_capacity(self.len() + 1);
        let mut acc = 0;
        out.push(0);
        for &a in self.relative_exps() {
            acc += a as usize;
            out.push(acc);
        }
        out
    }

    pub fn layer_count(&self) -> usize {
        self.order_exp() as usize
    }

    /// `(position, digit index)` of each layer.
    fn layer_coords(&self) -> Vec<(usize, u32)> {
        self.relative_exps()
            .iter()
            .enumerate()
            .flat_map(|(d, &a)| (0..a).map(move |i| (d, i)))
            .collect()
    }

    fn digit(&self, x: &[u32], d: usize, i: u32) -> u32 {
        let p = self.prime() as u32;
        (x[d] / p.pow(i)) % p
    }

    /// First nonzero layer of `x` and the digit found there.
    fn lead(&self, x: &[u32], offsets: &[usize]) -> Option<(usize, u32)> {
        let p = self.prime() as u32;
        let d = x.iter().position(|&e| e != 0)?;
        let mut e = x[d];
        let mut i = 0;
        while e % p == 0 {
            e /= p;
            i += 1;
        }
        Some((offsets[d] + i, e % p))
    }

    pub fn trivial_subgroup(&self) -> PcSubgroup {
        PcSubgroup {
            table: vec![None; self.layer_count()],
        }
    }

    pub fn whole_group(&self) -> PcSubgroup {
        let p = self.prime() as u32;
        let table = self
            .layer_coords()
            .into_iter()
            .map(|(d, i)| {
                let mut v = self.identity();
                v[d] = p.pow(i);
                Some(v)
            })
            .collect();
        PcSubgroup { table }
    }

    /// Strip leading layers of `x` against `h` until it is trivial or leads
    /// in a layer where `h` has no element.
    fn sift(&self, h: &PcSubgroup, mut x: PcElem, offsets: &[usize]) -> PcElem {
        let p = self.prime() as i64;
        while let Some((l, c)) = self.lead(&x, offsets) {
            match &h.table[l] {
                Some(e) => {
                    let f = self.pow(e, p - c as i64);
                    self.mul_into(&mut x, &f);
                }
                None => break,
            }
        }
        x
    }

    pub fn contains(&self, h: &PcSubgroup, x: &[u32]) -> bool {
        let offsets = self.layer_offsets();
        self.is_identity(&self.sift(h, x.to_vec(), &offsets))
    }

    /// Smallest subgroup containing `start` and `gens` and normalized by
    /// every element of `conjugators`.
    pub fn closure(&self, start: &PcSubgroup, gens: &[PcElem], conjugators: &[PcElem]) -> PcSubgroup {
        let offsets = self.layer_offsets();
        let p = self.prime() as i64;
        let mut h = start.clone();
        let mut queue: Vec<PcElem> = gens.to_vec();
        while let Some(x) = queue.pop() {
            let x = self.sift(&h, x, &offsets);
            let Some((l, c)) = self.lead(&x, &offsets) else {
                continue;
            };
            let inv = (1..p).find(|&t| (t * c as i64) % p == 1).expect("p prime");
            let x = self.pow(&x, inv);
            queue.push(self.pow(&x, p));
            for y in conjugators {
                queue.push(self.comm(&x, y));
            }
            for y in h.table.iter().flatten() {
                queue.push(self.comm(&x, y));
            }
            h.table[l] = Some(x);
        }
        h
    }

    pub fn normal_closure_pc(&self, gens: &[PcElem], conjugators: &[PcElem]) -> PcSubgroup {
        self.closure(&self.trivial_subgroup(), gens, conjugators)
    }

    /// Coset representative of `x` modulo the normal subgroup `n`: every
    /// digit in a layer where `n` has an element is cleared.
    pub fn reduce_mod(&self, n: &PcSubgroup, x: &[u32]) -> PcElem {
        let p = self.prime() as i64;
        let mut x = x.to_vec();
        for (l, (d, i)) in self.layer_coords().into_iter().enumerate() {
            if let Some(e) = &n.table[l] {
                let c = self.digit(&x, d, i);
                if c != 0 {
                    let f = self.pow(e, p - c as i64);
                    self.mul_into(&mut x, &f);
                }
            }
        }
        x
    }

    /// Preimage of the center of `G/n`, where `n` is normal and `gens`
    /// generate `G`.
    pub fn center_mod(&self, n: &PcSubgroup, gens: &[PcElem]) -> Result<PcSubgroup> {
        let p = self.prime();
        let coords = self.layer_coords();
        let offsets = self.layer_offsets();
        let mut c = self.whole_group();
        for (l, &(d, i)) in coords.iter().enumerate() {
            if n.table[l].is_some() {
                continue;
            }
            let members: Vec<&PcElem> = c.table.iter().flatten().collect();
            let mut columns: Vec<Vec<u64>> = Vec::with_capacity(members.len());
            let mut any = false;
            for h in &members {
                let mut col = Vec::with_capacity(gens.len());
                for g in gens {
                    let r = self.reduce_mod(n, &self.comm(h, g));
                    if let Some((lead, _)) = self.lead(&r, &offsets) {
                        if lead < l {
                            return Err(Error::Inconsistent(format!(
                                "commutator escapes the central series at layer {l}"
                            )));
                        }
                    }
                    let v = self.digit(&r, d, i) as u64;
                    any |= v != 0;
                    col.push(v);
                }
                columns.push(col);
            }
            if !any {
                continue;
            }
            let kernel = nullspace_mod_p(&columns, gens.len(), p);
            let mut new_gens: Vec<PcElem> = Vec::new();
            for lambda in kernel {
                let mut y = self.identity();
                for (h, &a) in members.iter().zip(&lambda) {
                    if a != 0 {
                        let f = self.pow(h, a as i64);
                        self.mul_into(&mut y, &f);
                    }
                }
                new_gens.push(y);
            }
            for (a, h) in members.iter().enumerate() {
                new_gens.push(self.pow(h, p as i64));
                for k in members.iter().skip(a + 1) {
                    new_gens.push(self.comm(h, k));
                }
            }
            new_gens.extend(n.table.iter().flatten().cloned());
            let conjugators: Vec<PcElem> = members.iter().map(|h| (*h).clone()).collect();
            c = self.closure(&self.trivial_subgroup(), &new_gens, &conjugators);
        }
        Ok(c)
    }
}

/// Basis of `{ lambda : sum_j lambda_j columns[j] = 0 }` over `F_p`.
pub fn nullspace_mod_p(columns: &[Vec<u64>], rows: usize, p: u64) -> Vec<Vec<u64>> {
    let s = columns.len();
    let mut a: Vec<Vec<u64>> = (0..rows).map(|r| columns.iter().map(|c| c[r] % p).collect()).collect();
    let inv = |x: u64| -> u64 { (1..p).find(|&t| t * x % p == 1).expect("nonzero mod prime") };
    let mut pivots: Vec<usize> = Vec::new();
    let mut row = 0;
    for col in 0..s {
        let Some(r) = (row..rows).find(|&r| a[r][col] != 0) else {
            continue;
        };
        a.swap(row, r);
        let f = inv(a[row][col]);
        for x in a[row].iter_mut() {
            *x = *x * f % p;
        }
        for r in 0..rows {
            if r != row && a[r][col] != 0 {
                let m = a[r][col];
                for c in 0..s {
                    a[r][c] = (a[r][c] + (p - m) * a[row][c]) % p;
                }
            }
        }
        pivots.push(col);
        row += 1;
        if row == rows {
            break;
        }
    }
    let mut basis = Vec::new();
    for free in (0..s).filter(|c| !pivots.contains(c)) {
        let mut v = vec![0u64; s];
        v[free] = 1;
        for (r, &pc) in pivots.iter().enumerate() {
            v[pc] = (p - a[r][free]) % p;
        }
        basis.push(v);
    }
    basis
}

#[cfg(test)]
mod tests {
    use super::super::free::FreeNilpotent;
    use super::super::pc::Echelon;
    use super::*;

    fn nilprod(p: u64, k: usize, orders: &[u32]) -> PcGroup {
        let f = FreeNilpotent::new(orders.len(), k).unwrap();
        let gens: Vec<Vec<i64>> = orders
            .iter()
            .enumerate()
            .map(|(i, &a)| {
                let mut v = f.identity();
                v[i] = (p as i64).pow(a);
                v
            })
            .collect();
        let ech = Echelon::normal_closure(&f, &gens);
        PcGroup::from_echelon(&f, &ech, p).unwrap().0
    }

    #[test]
    fn nullspace_is_exact() {
        let cols = vec![vec![1, 2], vec![2, 4], vec![0, 1]];
        let ker = nullspace_mod_p(&cols, 2, 5);
        assert_eq!(ker.len(), 1);
        let v = &ker[0];
        for r in 0..2 {
            assert_eq!((0..3).map(|j| v[j] * cols[j][r]).sum::<u64>() % 5, 0);
        }
    }

    #[test]
    fn subgroup_orders() {
        let g = nilprod(3, 2, &[1, 1]);
        let gens: Vec<PcElem> = (0..2).map(|i| g.generator(i)).collect();
        let x1 = g.normal_closure_pc(&[g.generator(0)], &gens);
        assert_eq!(x1.order_exp(), 2);
        let all = g.normal_closure_pc(&gens, &gens);
        assert_eq!(all.order_exp(), 3);
        let z = g.center_mod(&g.trivial_subgroup(), &gens).unwrap();
        assert_eq!(z.order_exp(), 1);
        assert!(g.contains(&z, &g.generator(2)));
    }

    #[test]
    fn center_of_class_two_product() {
        // centre of C3 * C9 in class 2 is <x2^3, [x2,x1]>
        let g = nilprod(3, 2, &[1, 2]);
        let gens: Vec<PcElem> = (0..2).map(|i| g.generator(i)).collect();
        let z = g.center_mod(&g.trivial_subgroup(), &gens).unwrap();
        assert_eq!(z.order_exp(), 2);
        assert!(g.contains(&z, &g.pow(&g.generator(1), 3)));
        assert!(!g.contains(&z, &g.generator(1)));
    }
}

#[cfg(test)]
mod timing {
    use super::super::free::FreeNilpotent;
    use super::super::pc::Echelon;
    use super::*;
    #[test]
    #[ignore]
    fn witness_p5() {
        for &(p, k, ref korders, ref gorders) in &[(5u64, 4usize, vec![2u32, 3, 3], vec![1u32, 2, 2]), (3, 3, vec![2, 2], vec![1, 1]), (3, 3, vec![2,2,2,2], vec![1,1,1,1])] {
            let t0 = std::time::Instant::now();
            let f = FreeNilpotent::new(korders.len(), k).unwrap();
            let gens: Vec<Vec<i64>> = korders.iter().enumerate().map(|(i, &a)| { let mut v = f.identity(); v[i] = (p as i64).pow(a); v }).collect();
            let ech = Echelon::normal_closure(&f, &gens);
            let (g, _) = PcGroup::from_echelon(&f, &ech, p).unwrap();
            let xs: Vec<PcElem> = (0..korders.len()).map(|i| g.generator(i)).collect();
            let rels: Vec<PcElem> = gorders.iter().enumerate().map(|(i, &a)| g.pow(&xs[i], (p as i64).pow(a))).collect();
            let mut cs = Vec::new();
            for s in &rels { for x in &xs { cs.push(g.comm(s, x)); } }
            let m = g.normal_closure_pc(&cs, &xs);
            let t1 = t0.elapsed();
            let z = g.center_mod(&m, &xs).unwrap();
            eprintln!("p={p} K={korders:?}: |K|=p^{} |M|=p^{} |Q|=p^{} |Z|=p^{} |Q/Z|=p^{}  {:?} {:?}", g.order_exp(), m.order_exp(), g.order_exp()-m.order_exp(), z.order_exp()-m.order_exp(), g.order_exp()-z.order_exp(), t1, t0.elapsed());
        }
    }
}
