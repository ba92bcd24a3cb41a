//! Enumerated finite groups: element ids, subgroups, normal closures,
//! lower central series, centers and quotients, all by brute force.
//!
//! Ids of a nilpotent product are the mixed-radix encoding of the
//! polycyclic exponent vector, so id 0 is the identity. A quotient names each
//! coset by its least parent id and numbers cosets in increasing order of
//! that representative.

use std::collections::{HashMap, VecDeque};
use std::sync::Arc;

use crate::arith::Valuation;
use crate::collector::{Collector, NormalForm, PcElem};
use crate::error::{Error, Result};
use crate::hallbasis::HallBasis;
use crate::wordlang::{evaluate_with_aliases, GroupSpec, WordAst, WordGroup};

pub const DEFAULT_BUDGET: u64 = 2_000_000;

pub type Id = u64;

#[derive(Debug)]
enum Kind {
    Nilprod(Arc<Collector>),
    Quotient {
        parent: Arc<GroupView>,
        /// Least parent id of each coset.
        reps: Vec<Id>,
        /// Coset index of every parent id.
        coset: Vec<u32>,
    },
}

/// A finite group whose elements are the ids `0..order`, id 0 being the identity.
#[derive(Debug)]
pub struct GroupView {
    kind: Kind,
    prime: u64,
    order: u64,
    /// Images of `x1..xr`, in the order the spec lists them.
    gens: Vec<Id>,
}

/// A subgroup, stored as its sorted member ids and a generating set.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Subgroup {
    members: Vec<Id>,
    gens: Vec<Id>,
}

impl Subgroup {
    pub fn members(&self) -> &[Id] {
        &self.members
    }

    pub fn gens(&self) -> &[Id] {
        &self.gens
    }

    pub fn order(&self) -> u64 {
        self.members.len() as u64
    }

    pub fn contains(&self, x: Id) -> bool {
        self.members.binary_search(&x).is_ok()
    }

    pub fn is_subset_of(&self, other: &Subgroup) -> bool {
        self.members.iter().all(|&x| other.contains(x))
    }
}

impl GroupView {
    /// The full nilpotent product described by `collector`, generators in basis order.
    pub fn nilprod(collector: Arc<Collector>, budget: u64) -> Result<Self> {
        let order = collector.basis().order().unwrap_or(u128::MAX);
        if order > budget as u128 || order > u32::MAX as u128 {
            return Err(Error::BudgetExceeded { required: order, budget });
        }
        let gens = (0..collector.rank())
            .map(|i| collector.pc().encode(&collector.pc().generator(i)))
            .collect();
        Ok(GroupView {
            prime: collector.basis().prime(),
            order: order as u64,
            gens,
            kind: Kind::Nilprod(collector),
        })
    }

    pub fn order(&self) -> u64 {
        self.order
    }

    pub fn prime(&self) -> u64 {
        self.prime
    }

    /// `log_p |G|`.
    pub fn order_exp(&self) -> u32 {
        crate::arith::floor_log(self.order, self.prime)
    }

    pub fn generators(&self) -> &[Id] {
        &self.gens
    }

    pub fn identity(&self) -> Id {
        0
    }

    pub fn parent(&self) -> Option<&Arc<GroupView>> {
        match &self.kind {
            Kind::Quotient { parent, .. } => Some(parent),
            Kind::Nilprod(_) => None,
        }
    }

    /// The collector at the root of the quotient chain.
    pub fn collector(&self) -> &Arc<Collector> {
        match &self.kind {
            Kind::Nilprod(c) => c,
            Kind::Quotient { parent, .. } => parent.collector(),
        }
    }

    pub fn basis(&self) -> &HallBasis {
        self.collector().basis()
    }

    /// An id of the root nilpotent product lying over `x`.
    pub fn root_rep(&self, x: Id) -> Id {
        match &self.kind {
            Kind::Nilprod(_) => x,
            Kind::Quotient { parent, reps, .. } => parent.root_rep(reps[x as usize]),
        }
    }

    /// Image of a root id in this view.
    pub fn from_root(&self, x: Id) -> Id {
        match &self.kind {
            Kind::Nilprod(_) => x,
            Kind::Quotient { parent, coset, .. } => coset[parent.from_root(x) as usize] as Id,
        }
    }

    /// Normal form of the root representative of `x`.
    pub fn normal_form(&self, x: Id) -> Result<NormalForm> {
        let c = self.collector();
        c.from_pc(&c.pc().decode(self.root_rep(x)))
    }

    pub fn id_of(&self, nf: &NormalForm) -> Result<Id> {
        let c = self.collector();
        Ok(self.from_root(c.pc().encode(&c.to_pc(nf)?)))
    }

    fn root(&self) -> &GroupView {
        match &self.kind {
            Kind::Nilprod(_) => self,
            Kind::Quotient { parent, .. } => parent.root(),
        }
    }

    /// `x` in word syntax, naming generators as the spec does. The normal
    /// form is written over the ascending-order basis, so its generator
    /// names are translated back.
    pub fn render(&self, x: Id) -> Result<String> {
        let c = self.collector();
        let root = self.root();
        let names: Vec<usize> = (0..c.rank())
            .map(|t| {
                let id = c.pc().encode(&c.pc().generator(t));
                root.gens.iter().position(|&g| g == id).unwrap_or(t)
            })
            .collect();
        let text = crate::wordlang::format_normal_form(&self.normal_form(x)?);
        Ok(rename_generators(&text, &names))
    }

    pub fn pc_element(&self, x: Id) -> PcElem {
        self.collector().pc().decode(self.root_rep(x))
    }

    pub fn id_of_pc(&self, x: &[u32]) -> Id {
        self.from_root(self.collector().pc().encode(x))
    }

    pub fn mul(&self, a: Id, b: Id) -> Id {
        match &self.kind {
            Kind::Nilprod(c) => {
                let pc = c.pc();
                pc.encode(&pc.mul(&pc.decode(a), &pc.decode(b)))
            }
            Kind::Quotient { parent, reps, coset } => {
                coset[parent.mul(reps[a as usize], reps[b as usize]) as usize] as Id
            }
        }
    }

    pub fn inv(&self, a: Id) -> Id {
        match &self.kind {
            Kind::Nilprod(c) => {
                let pc = c.pc();
                pc.encode(&pc.inv(&pc.decode(a)))
            }
            Kind::Quotient { parent, reps, coset } => coset[parent.inv(reps[a as usize]) as usize] as Id,
        }
    }

    pub fn pow(&self, a: Id, n: i64) -> Id {
        let mut base = if n < 0 { self.inv(a) } else { a };
        let mut e = n.unsigned_abs();
        let mut acc = 0;
        while e > 0 {
            if e & 1 == 1 {
                acc = self.mul(acc, base);
            }
            base = self.mul(base, base);
            e >>= 1;
        }
        acc
    }

    /// `[a,b] = a^-1 b^-1 a b`.
    pub fn comm(&self, a: Id, b: Id) -> Id {
        self.mul(self.inv(self.mul(b, a)), self.mul(a, b))
    }

    /// `a^b = b^-1 a b`.
    pub fn conj(&self, a: Id, b: Id) -> Id {
        self.mul(self.inv(b), self.mul(a, b))
    }

    pub fn element_order(&self, a: Id) -> u64 {
        let mut x = a;
        let mut n = 1;
        while x != 0 {
            x = self.pow(x, self.prime as i64);
            n *= self.prime;
        }
        n
    }

    /// Right multiplication by `g` as a permutation table of the ids.
    pub fn right_table(&self, g: Id) -> Vec<u32> {
        (0..self.order).map(|x| self.mul(x, g) as u32).collect()
    }

    pub fn left_table(&self, g: Id) -> Vec<u32> {
        (0..self.order).map(|x| self.mul(g, x) as u32).collect()
    }
}

impl WordGroup for GroupView {
    type Elem = Id;

    fn identity(&self) -> Id {
        0
    }

    fn mul(&self, a: &Id, b: &Id) -> Id {
        GroupView::mul(self, *a, *b)
    }

    fn pow(&self, a: &Id, n: i64) -> Id {
        GroupView::pow(self, *a, n)
    }

    fn comm(&self, a: &Id, b: &Id) -> Id {
        GroupView::comm(self, *a, *b)
    }
}

/// Incrementally grown subgroup.
struct Closure {
    seen: Vec<bool>,
    members: Vec<Id>,
    gens: Vec<Id>,
}

impl Closure {
    fn trivial(g: &GroupView) -> Self {
        let mut seen = vec![false; g.order as usize];
        seen[0] = true;
        Closure { seen, members: vec![0], gens: Vec::new() }
    }

    /// Adds `h`; returns false when it was already a member.
    fn add(&mut self, g: &GroupView, h: Id) -> bool {
        if self.seen[h as usize] {
            return false;
        }
        self.gens.push(h);
        let old = self.members.len();
        for i in 0..old {
            let y = g.mul(self.members[i], h);
            if !self.seen[y as usize] {
                self.seen[y as usize] = true;
                self.members.push(y);
            }
        }
        let mut k = old;
        while k < self.members.len() {
            let x = self.members[k];
            for &s in &self.gens {
                let y = g.mul(x, s);
                if !self.seen[y as usize] {
                    self.seen[y as usize] = true;
                    self.members.push(y);
                }
            }
            k += 1;
        }
        true
    }

    fn finish(mut self) -> Subgroup {
        self.members.sort_unstable();
        Subgroup { members: self.members, gens: self.gens }
    }
}

impl GroupView {
    pub fn trivial_subgroup(&self) -> Subgroup {
        Subgroup { members: vec![0], gens: Vec::new() }
    }

    pub fn whole(&self) -> Subgroup {
        Subgroup { members: (0..self.order).collect(), gens: self.gens.clone() }
    }

    pub fn subgroup_closure(&self, gens: &[Id]) -> Subgroup {
        let mut c = Closure::trivial(self);
        for &h in gens {
            c.add(self, h);
        }
        c.finish()
    }

    /// Smallest normal subgroup containing `gens`.
    pub fn normal_closure(&self, gens: &[Id]) -> Subgroup {
        self.normal_closure_by(gens, &self.gens)
    }

    /// Smallest subgroup containing `gens` and normalised by `conjugators`.
    pub fn normal_closure_by(&self, gens: &[Id], conjugators: &[Id]) -> Subgroup {
        let mut c = Closure::trivial(self);
        let mut pending: VecDeque<Id> = gens.iter().copied().collect();
        while let Some(h) = pending.pop_front() {
            if c.add(self, h) {
                for &g in conjugators {
                    pending.push_back(self.conj(h, g));
                }
            }
        }
        c.finish()
    }

    /// Lower central series of the subgroup generated by `gens`.
    pub fn subgroup_series(&self, gens: &[Id]) -> Vec<Subgroup> {
        let mut series = vec![self.subgroup_closure(gens)];
        loop {
            let last = series.last().unwrap();
            if last.order() == 1 {
                break;
            }
            let comms: Vec<Id> = last
                .gens
                .iter()
                .flat_map(|&a| gens.iter().map(move |&g| (a, g)))
                .map(|(a, g)| self.comm(a, g))
                .collect();
            let next = self.normal_closure_by(&comms, gens);
            if next.order() == last.order() {
                break;
            }
            series.push(next);
        }
        series
    }

    /// Subgroup on an id set already known to be closed; generators are chosen greedily.
    fn subgroup_from_members(&self, members: Vec<Id>) -> Result<Subgroup> {
        let mut c = Closure::trivial(self);
        for &x in &members {
            c.add(self, x);
        }
        let s = c.finish();
        if s.members != members {
            return Err(Error::Inconsistent("member set is not a subgroup".into()));
        }
        Ok(s)
    }

    pub fn is_normal(&self, n: &Subgroup) -> bool {
        n.gens.iter().all(|&s| self.gens.iter().all(|&g| n.contains(self.conj(s, g))))
    }

    /// Ids satisfying `keep`, scanned in parallel chunks.
    fn scan(&self, keep: impl Fn(Id) -> bool + Sync) -> Vec<Id> {
        let threads = std::thread::available_parallelism().map_or(1, |n| n.get()).min(16);
        let chunk = self.order.div_ceil(threads as u64).max(1);
        std::thread::scope(|s| {
            let handles: Vec<_> = (0..self.order)
                .step_by(chunk as usize)
                .map(|lo| {
                    let keep = &keep;
                    s.spawn(move || (lo..(lo + chunk).min(self.order)).filter(|&x| keep(x)).collect::<Vec<_>>())
                })
                .collect();
            handles.into_iter().flat_map(|h| h.join().expect("scan worker")).collect()
        })
    }

    /// Elements commuting with every generator.
    pub fn center(&self) -> Result<Subgroup> {
        let members = self.scan(|x| self.gens.iter().all(|&g| self.mul(x, g) == self.mul(g, x)));
        self.subgroup_from_members(members)
    }

    /// Preimage in `self` of the center of `self / n`.
    pub fn center_mod(&self, n: &Subgroup) -> Result<Subgroup> {
        let members = self.scan(|x| self.gens.iter().all(|&g| n.contains(self.comm(x, g))));
        self.subgroup_from_members(members)
    }

    pub fn lower_central_series(&self) -> Vec<Subgroup> {
        let mut series = self.subgroup_series(&self.gens);
        series[0] = self.whole();
        series
    }

    /// Largest k with `x` in the k-th term of `series`; infinite for the identity.
    pub fn weight_w(&self, series: &[Subgroup], x: Id) -> Valuation {
        if x == 0 {
            return Valuation::Infinity;
        }
        let k = series.iter().take_while(|s| s.contains(x)).count();
        Valuation::Finite(k as u32)
    }

    /// The quotient by a normal subgroup.
    pub fn quotient(self: &Arc<Self>, n: &Subgroup) -> Result<GroupView> {
        if !self.is_normal(n) {
            return Err(Error::NotNormal);
        }
        let mut coset = vec![u32::MAX; self.order as usize];
        let mut reps = Vec::with_capacity((self.order / n.order()) as usize);
        for x in 0..self.order {
            if coset[x as usize] != u32::MAX {
                continue;
            }
            let idx = reps.len() as u32;
            reps.push(x);
            for &m in &n.members {
                coset[self.mul(x, m) as usize] = idx;
            }
        }
        if reps.len() as u64 * n.order() != self.order {
            return Err(Error::Inconsistent("cosets do not partition the group".into()));
        }
        let gens = self.gens.iter().map(|&g| coset[g as usize] as Id).collect();
        Ok(GroupView {
            prime: self.prime,
            order: reps.len() as u64,
            gens,
            kind: Kind::Quotient { parent: self.clone(), reps, coset },
        })
    }

    /// Image of `x` under the projection onto a quotient of `self`.
    pub fn project_to(&self, q: &GroupView, x: Id) -> Result<Id> {
        match &q.kind {
            Kind::Quotient { parent, coset, .. } if std::ptr::eq(parent.as_ref(), self) => Ok(coset[x as usize] as Id),
            _ => Err(Error::InvalidParameter("not a quotient of this group".into())),
        }
    }

    pub fn evaluate(&self, w: &WordAst, assignment: &HashMap<String, Id>) -> Result<Id> {
        evaluate_with_aliases(self, w, &self.gens, assignment)
    }

    pub fn is_central(&self, x: Id) -> bool {
        self.gens.iter().all(|&g| self.mul(x, g) == self.mul(g, x))
    }

    /// True iff every word evaluates to a central element.
    pub fn check_words_central(&self, words: &[WordAst], assignment: &HashMap<String, Id>) -> Result<bool> {
        for w in words {
            if !self.is_central(self.evaluate(w, assignment)?) {
                return Ok(false);
            }
        }
        Ok(true)
    }
}

/// Rewrites every `x<n>` in `text` as `x<names[n-1]+1>`.
pub fn rename_generators(text: &str, names: &[usize]) -> String {
    let mut out = String::with_capacity(text.len());
    let mut chars = text.chars().peekable();
    while let Some(ch) = chars.next() {
        out.push(ch);
        if ch != 'x' {
            continue;
        }
        let mut digits = String::new();
        while let Some(d) = chars.peek().filter(|d| d.is_ascii_digit()) {
            digits.push(*d);
            chars.next();
        }
        match digits.parse::<usize>() {
            Ok(n) if (1..=names.len()).contains(&n) => out.push_str(&(names[n - 1] + 1).to_string()),
            _ => out.push_str(&digits),
        }
    }
    out
}

/// Builds the group of a spec: the nilpotent product, divided by the normal
/// closure of the relators when there are any. `x1..xr` keep the spec's order
/// even though the basis is built on ascending orders.
pub fn build_group(spec: &GroupSpec, budget: u64) -> Result<Arc<GroupView>> {
    spec.validate()?;
    let mut perm: Vec<usize> = (0..spec.rank()).collect();
    perm.sort_by_key(|&i| (spec.orders[i], i));
    let sorted: Vec<u32> = perm.iter().map(|&i| spec.orders[i]).collect();
    let basis = HallBasis::build(spec.prime, spec.class, &sorted, spec.variant)?;
    let order = basis.order().unwrap_or(u128::MAX);
    if order > budget as u128 {
        return Err(Error::BudgetExceeded { required: order, budget });
    }
    let mut view = GroupView::nilprod(Arc::new(Collector::new(basis)?), budget)?;
    let basis_gens = view.gens.clone();
    for (pos, &i) in perm.iter().enumerate() {
        view.gens[i] = basis_gens[pos];
    }
    let view = Arc::new(view);
    let relators = spec.all_relators()?;
    let values = relators
        .iter()
        .map(|w| view.evaluate(w, &HashMap::new()))
        .collect::<Result<Vec<_>>>()?;
    if values.iter().all(|&v| v == 0) {
        return Ok(view);
    }
    let n = view.normal_closure(&values);
    Ok(Arc::new(view.quotient(&n)?))
}

/// Full multiplication table, row-major, for groups of order below 2^16.
pub fn cayley_table(g: &GroupView) -> Result<Vec<u16>> {
    if g.order > u16::MAX as u64 + 1 {
        return Err(Error::BudgetExceeded { required: g.order as u128 * g.order as u128, budget: 1 << 32 });
    }
    let n = g.order as usize;
    let mut table = vec![0u16; n * n];
    let threads = std::thread::available_parallelism().map_or(1, |t| t.get()).min(16);
    let rows_per = n.div_ceil(threads).max(1);
    std::thread::scope(|s| {
        for (c, chunk) in table.chunks_mut(rows_per * n).enumerate() {
            s.spawn(move || {
                for (r, row) in chunk.chunks_mut(n).enumerate() {
                    let x = (c * rows_per + r) as Id;
                    for (y, slot) in row.iter_mut().enumerate() {
                        *slot = g.mul(x, y as Id) as u16;
                    }
                }
            });
        }
    });
    Ok(table)
}

/// Light's associativity test on a multiplication table: the operation is
/// associative iff `(x g) y = x (g y)` for all `x`, `y` and every `g` in a
/// generating set. Returns the first failing triple.
pub fn light_associativity(order: usize, table: &[u16], gens: &[Id]) -> Result<Option<(Id, Id, Id)>> {
    // The generators must generate the table's magma.
    let mut seen = vec![false; order];
    seen[0] = true;
    let mut queue = vec![0usize];
    while let Some(x) = queue.pop() {
        for &g in gens {
            let y = table[x * order + g as usize] as usize;
            if !seen[y] {
                seen[y] = true;
                queue.push(y);
            }
        }
    }
    if seen.iter().any(|&s| !s) {
        return Err(Error::InvalidParameter("generators do not generate the table".into()));
    }
    for &g in gens {
        let g = g as usize;
        for x in 0..order {
            let xg = table[x * order + g] as usize;
            for y in 0..order {
                let gy = table[g * order + y] as usize;
                if table[xg * order + y] != table[x * order + gy] {
                    return Ok(Some((x as Id, g as Id, y as Id)));
                }
            }
        }
    }
    Ok(None)
}

/// `samples` random triples; returns the first non-associative one.
pub fn random_associativity(g: &GroupView, samples: usize, seed: u64) -> Option<(Id, Id, Id)> {
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    (0..samples).find_map(|_| {
        let (a, b, c) = (rng.gen_range(0..g.order), rng.gen_range(0..g.order), rng.gen_range(0..g.order));
        (g.mul(g.mul(a, b), c) != g.mul(a, g.mul(b, c))).then_some((a, b, c))
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hallbasis::Variant;
    use crate::wordlang::parse_word;

    fn group(p: u64, k: usize, orders: &[u32], v: Variant) -> Arc<GroupView> {
        build_group(&GroupSpec::nilprod(p, k, orders).with_variant(v), DEFAULT_BUDGET).unwrap()
    }

    fn word_id(g: &GroupView, w: &str) -> Id {
        g.evaluate(&parse_word(w).unwrap(), &HashMap::new()).unwrap()
    }

    #[test]
    fn render_uses_spec_names() {
        let g = build_group(&GroupSpec::nilprod(3, 2, &[2, 1]), DEFAULT_BUDGET).unwrap();
        let (x1, x2) = (g.generators()[0], g.generators()[1]);
        assert_eq!(g.render(x1).unwrap(), "x1");
        assert_eq!(g.render(g.mul(x2, x1)).unwrap(), "x2 x1");
        let c = g.comm(x2, x1);
        let back = word_id(&g, &g.render(c).unwrap());
        assert_eq!(back, c);
        assert_eq!(g.render(0).unwrap(), "e");
    }

    #[test]
    fn build_examples() {
        assert_eq!(group(3, 2, &[1, 1], Variant::Standard).order(), 27);
        assert_eq!(group(2, 3, &[1, 1], Variant::K3p2).order(), 16);
        assert_eq!(group(3, 3, &[2, 2], Variant::Standard).order(), 59049);
        let e = build_group(&GroupSpec::nilprod(5, 3, &[2, 2, 2]), DEFAULT_BUDGET);
        assert!(matches!(e, Err(Error::BudgetExceeded { .. })));
    }

    #[test]
    fn closures() {
        let g = group(3, 2, &[1, 1], Variant::Standard);
        assert_eq!(g.subgroup_closure(&[]).order(), 1);
        assert_eq!(g.subgroup_closure(&[word_id(&g, "x1")]).order(), 3);
        let c = word_id(&g, "[x2,x1]");
        assert_eq!(g.subgroup_closure(&[c]).order(), 3);
        assert_eq!(g.normal_closure(&[c]), g.subgroup_closure(&[c]));
        let n = g.normal_closure(&[word_id(&g, "x1")]);
        assert_eq!(n.order(), 9);
        assert!(n.contains(c));
        assert_eq!(g.normal_closure(&[]).order(), 1);
    }

    #[test]
    fn series_and_weights() {
        let orders = |g: &GroupView| g.lower_central_series().iter().map(|s| s.order()).collect::<Vec<_>>();
        assert_eq!(orders(&group(3, 2, &[1, 1], Variant::Standard)), [27, 3, 1]);
        assert_eq!(orders(&group(2, 3, &[1, 1], Variant::K3p2)), [16, 4, 2, 1]);
        assert_eq!(orders(&group(3, 1, &[1, 2], Variant::Standard)), [27, 1]);
        let g = group(5, 3, &[1, 1], Variant::Standard);
        let s = g.lower_central_series();
        assert_eq!(g.weight_w(&s, 0), Valuation::Infinity);
        assert_eq!(g.weight_w(&s, word_id(&g, "x1")), Valuation::Finite(1));
        assert_eq!(g.weight_w(&s, word_id(&g, "[x2,x1]")), Valuation::Finite(2));
        assert_eq!(g.weight_w(&s, word_id(&g, "[x2,x1,x1]")), Valuation::Finite(3));
    }

    #[test]
    fn centers() {
        let g = group(3, 2, &[1, 2], Variant::Standard);
        let z = g.center().unwrap();
        assert_eq!(z.order(), 9);
        assert_eq!(z, g.subgroup_closure(&[word_id(&g, "x2^3"), word_id(&g, "[x2,x1]")]));
        let g = group(2, 3, &[1, 1], Variant::K3p2);
        let z = g.center().unwrap();
        assert_eq!(z.members(), [0, word_id(&g, "[x2,x1]^2")]);
        let g = group(3, 1, &[1, 2], Variant::Standard);
        assert_eq!(g.center().unwrap().order(), 27);
    }

    #[test]
    fn quotients() {
        let g = group(3, 2, &[1, 1], Variant::Standard);
        assert_eq!(g.quotient(&g.trivial_subgroup()).unwrap().order(), 27);
        assert_eq!(g.quotient(&g.whole()).unwrap().order(), 1);
        let q = Arc::new(g.quotient(&g.center().unwrap()).unwrap());
        assert_eq!(q.order(), 9);
        assert_eq!(q.center().unwrap().order(), 9);
        assert_eq!(g.quotient(&g.subgroup_closure(&[word_id(&g, "x1")])).err(), Some(Error::NotNormal));
        for a in 0..g.order() {
            for b in 0..g.order() {
                let (pa, pb) = (g.project_to(&q, a).unwrap(), g.project_to(&q, b).unwrap());
                assert_eq!(g.project_to(&q, g.mul(a, b)).unwrap(), q.mul(pa, pb));
            }
        }
    }

    #[test]
    fn relators_and_word_centrality() {
        let spec = GroupSpec::nilprod(3, 2, &[2, 1]).with_relators(vec![parse_word("[x2,x1]").unwrap()]);
        let g = build_group(&spec, DEFAULT_BUDGET).unwrap();
        assert_eq!(g.order(), 27);
        assert_eq!(g.element_order(g.generators()[0]), 9);
        assert_eq!(g.center().unwrap().order(), 27);

        let k = group(3, 3, &[1, 1], Variant::Standard);
        let mut names = HashMap::new();
        names.insert("a".to_string(), k.generators()[0]);
        names.insert("b".to_string(), k.generators()[1]);
        let words = |ws: &[&str]| ws.iter().map(|w| parse_word(w).unwrap()).collect::<Vec<_>>();
        assert!(k.check_words_central(&words(&["a^3", "b^3"]), &names).unwrap());
        assert!(!k.check_words_central(&words(&["[b,a]"]), &names).unwrap());
        assert!(k.check_words_central(&[], &names).unwrap());
    }

    #[test]
    fn associativity_checks() {
        let g = group(3, 2, &[1, 1], Variant::Standard);
        let t = cayley_table(&g).unwrap();
        assert_eq!(light_associativity(27, &t, g.generators()).unwrap(), None);
        assert_eq!(random_associativity(&g, 1000, 0), None);
        // A non-associative table: x*y = x - y mod 3.
        let bad: Vec<u16> = (0..9).map(|i| ((i / 3 + 3 - i % 3) % 3) as u16).collect();
        assert!(light_associativity(3, &bad, &[1]).unwrap().is_some());
    }
}
