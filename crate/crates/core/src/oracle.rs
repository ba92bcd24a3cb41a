//! Independent checkers. Nothing here trusts the collector beyond its group
//! multiplication: centers and series are recomputed by definition and the
//! commutator identities are evaluated elementwise.

use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::capability::PcModel;
use crate::collector::{FreeNilpotent, PcElem, Strategy};
use crate::engine::{build_group, GroupView, Id, Subgroup};
use crate::error::{Error, Result};
use crate::hallbasis::{HallBasis, Shape, Variant};
use crate::wordlang::GroupSpec;

const FAILURE_CAP: usize = 8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum CheckStatus {
    Pass,
    Fail,
    NotApplicable,
}

impl fmt::Display for CheckStatus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            CheckStatus::Pass => "PASS",
            CheckStatus::Fail => "FAIL",
            CheckStatus::NotApplicable => "NOT_APPLICABLE",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CheckReport {
    pub check: String,
    pub spec: String,
    pub seed: u64,
    pub samples: usize,
    /// Counterexamples written in normal-form syntax.
    pub failures: Vec<String>,
    pub status: CheckStatus,
    pub note: Option<String>,
}

impl CheckReport {
    fn new(check: &str, spec: String, seed: u64) -> Self {
        CheckReport {
            check: check.to_string(),
            spec,
            seed,
            samples: 0,
            failures: Vec::new(),
            status: CheckStatus::Pass,
            note: None,
        }
    }

    fn fail(&mut self, msg: String) {
        if self.failures.len() < FAILURE_CAP {
            self.failures.push(msg);
        }
        self.status = CheckStatus::Fail;
    }

    fn not_applicable(mut self, why: String) -> Self {
        self.status = CheckStatus::NotApplicable;
        self.note = Some(why);
        self
    }

    pub fn passed(&self) -> bool {
        self.status == CheckStatus::Pass
    }
}

impl fmt::Display for CheckReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} {} on {} (seed {}, {} samples)", self.status, self.check, self.spec, self.seed, self.samples)?;
        if let Some(n) = &self.note {
            write!(f, ": {n}")?;
        }
        for x in &self.failures {
            write!(f, "\n  counterexample: {x}")?;
        }
        Ok(())
    }
}

fn show(g: &GroupView, x: Id) -> String {
    g.render(x).unwrap_or_else(|_| format!("#{x}"))
}

fn describe(g: &GroupView) -> String {
    let b = g.basis();
    let orders: Vec<String> = b.orders().iter().map(|a| a.to_string()).collect();
    let mut s = format!("p={} class={} orders=[{}]", b.prime(), b.class(), orders.join(","));
    if b.variant() == Variant::K3p2 {
        s.push_str(" K3P2");
    }
    if g.parent().is_some() {
        s.push_str(&format!(" quotient of order {}^{}", g.prime(), g.order_exp()));
    }
    s
}

fn term(series: &[Subgroup], w: usize) -> Option<&Subgroup> {
    series.get(w.max(1) - 1)
}

fn in_term(g: &GroupView, series: &[Subgroup], w: usize, x: Id) -> bool {
    match term(series, w) {
        Some(s) => s.contains(x),
        None => x == g.identity(),
    }
}

fn class_of(series: &[Subgroup]) -> usize {
    series.len() - 1
}

fn pick(rng: &mut ChaCha8Rng, members: &[Id]) -> Id {
    members[rng.gen_range(0..members.len())]
}

fn describe_spec(spec: &GroupSpec) -> String {
    let orders: Vec<String> = spec.orders.iter().map(|a| a.to_string()).collect();
    let mut s = format!("p={} class={} orders=[{}]", spec.prime, spec.class, orders.join(","));
    if spec.variant == Variant::K3p2 {
        s.push_str(" K3P2");
    }
    if !spec.relators.is_empty() || spec.presentation11.is_some() {
        s.push_str(" with relators");
    }
    s
}

/// Enumerated order of a nilpotent product against the product of the
/// normal-form moduli.
pub fn verify_struik_order(spec: &GroupSpec, budget: u64) -> Result<CheckReport> {
    spec.validate()?;
    let mut report = CheckReport::new("normal-form-order", describe_spec(spec), 0);
    let mut sorted = spec.orders.clone();
    sorted.sort_unstable();
    let basis = HallBasis::build(spec.prime, spec.class, &sorted, spec.variant)?;
    let moduli: u128 = basis.moduli().iter().map(|&m| m as u128).product();
    if moduli > budget as u128 {
        return Err(Error::BudgetExceeded { required: moduli, budget });
    }
    let g = build_group(&GroupSpec::nilprod(spec.prime, spec.class, &spec.orders).with_variant(spec.variant), budget)?;
    let enumerated = g.subgroup_closure(g.generators()).order();
    report.samples = enumerated as usize;
    if enumerated as u128 != moduli {
        report.fail(format!("closure of the generators has {enumerated} elements, moduli give {moduli}"));
    }
    // Round trip through normal forms for every element.
    for x in 0..g.order() {
        let back = g.normal_form(x).and_then(|nf| g.id_of(&nf))?;
        if back != x {
            report.fail(format!("{} does not round-trip", show(&g, x)));
        }
    }
    Ok(report)
}

/// Sorted positions: the generator with the largest order and the exponent
/// of the second largest (0 for a cyclic group).
fn top_two(orders: &[u32]) -> (usize, u32) {
    let mut idx: Vec<usize> = (0..orders.len()).collect();
    idx.sort_by_key(|&i| (orders[i], i));
    let top = *idx.last().unwrap();
    let next = if idx.len() > 1 { orders[idx[idx.len() - 2]] } else { 0 };
    (top, next)
}

fn center_regime(spec: &GroupSpec) -> Result<()> {
    let ok = match spec.variant {
        Variant::K3p2 => spec.prime == 2 && spec.class == 3 && spec.orders.len() >= 2,
        Variant::Standard => spec.class == 2 || spec.prime >= spec.class as u64,
    };
    if !ok || !spec.relators.is_empty() || spec.presentation11.is_some() {
        return Err(Error::InvalidParameter(format!(
            "no center formula for {}",
            describe_spec(spec)
        )));
    }
    Ok(())
}

/// Words generating the predicted center, with `G_k` supplied separately.
fn center_formula_powers(spec: &GroupSpec) -> Vec<(usize, Option<usize>, u32)> {
    // (i, Some(j)) means [x_j, x_i]; (i, None) means x_i; last field is the p-exponent.
    let (top, next) = top_two(&spec.orders);
    let mut out = Vec::new();
    if spec.variant == Variant::K3p2 {
        out.push((top, None, next + 1));
        for i in 0..spec.orders.len() {
            for j in 0..spec.orders.len() {
                if i != j && (spec.orders[i], i) < (spec.orders[j], j) {
                    out.push((i, Some(j), spec.orders[i]));
                }
            }
        }
    } else {
        out.push((top, None, next));
    }
    out
}

/// Center computed by definition against the structural description.
/// Groups within `budget` are enumerated; larger ones are compared on the
/// polycyclic presentation.
pub fn verify_center_theorem(spec: &GroupSpec, budget: u64) -> Result<CheckReport> {
    spec.validate()?;
    center_regime(spec)?;
    let mut report = CheckReport::new("center-formula", describe_spec(spec), 0);
    let k = spec.class;
    let powers = center_formula_powers(spec);
    match build_group(spec, budget) {
        Ok(g) => {
            let gens = g.generators().to_vec();
            let series = g.lower_central_series();
            let mut formula: Vec<Id> = term(&series, k).map(|s| s.gens().to_vec()).unwrap_or_default();
            for &(i, j, e) in &powers {
                let base = match j {
                    None => gens[i],
                    Some(j) => g.comm(gens[j], gens[i]),
                };
                formula.push(g.pow(base, spec.prime.pow(e) as i64));
            }
            let predicted = g.subgroup_closure(&formula);
            let center = g.center()?;
            report.samples = g.order() as usize;
            if predicted.members() != center.members() {
                let extra = predicted.members().iter().find(|x| !center.contains(**x));
                let missing = center.members().iter().find(|x| !predicted.contains(**x));
                if let Some(&x) = extra {
                    report.fail(format!("{} predicted central but is not", show(&g, x)));
                }
                if let Some(&x) = missing {
                    report.fail(format!("{} is central but not predicted", show(&g, x)));
                }
            }
            report.note = Some(format!("|Z| = {}", center.order()));
        }
        Err(Error::BudgetExceeded { .. }) => {
            let m = PcModel::from_spec(spec)?;
            let pc = m.pc();
            let mut gk = pc.whole_group();
            for _ in 1..k {
                gk = m.commutator_with_whole(&gk);
            }
            let mut formula: Vec<PcElem> = Vec::new();
            for &(i, j, e) in &powers {
                let base = match j {
                    None => m.gens()[i].clone(),
                    Some(j) => pc.comm(&m.gens()[j], &m.gens()[i]),
                };
                formula.push(pc.pow(&base, spec.prime.pow(e) as i64));
            }
            let predicted = pc.closure(&gk, &formula, &[]);
            let center = pc.center_mod(&pc.trivial_subgroup(), m.gens())?;
            report.samples = 0;
            for x in predicted.elements_of_sequence() {
                if !pc.contains(&center, x) {
                    report.fail(format!("pc element {x:?} predicted central but is not"));
                }
            }
            if predicted.order_exp() != center.order_exp() {
                report.fail(format!(
                    "|Z| = p^{} but the formula gives p^{}",
                    center.order_exp(),
                    predicted.order_exp()
                ));
            }
            report.note = Some(format!("polycyclic comparison, |Z| = p^{}", center.order_exp()));
        }
        Err(e) => return Err(e),
    }
    Ok(report)
}

/// Commutator identities checked elementwise.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum IdentityCheck {
    /// `[xy,z] = [x,z][x,z,y][y,z]`.
    ProductLeft,
    /// `[x,yz] = [x,z][z,[y,x]][x,y]`.
    ProductRight,
    /// `[a^r,b^s] = [a,b]^{rs}[a,b,a]^{s C(r,2)}[a,b,b]^{r C(s,2)}` modulo `G_4`.
    PowerCommutator,
    /// `[b^r,a^s] = [a,b]^{-rs}[a,b,a]^{-r C(s,2)}[a,b,b]^{-s C(r,2)}` modulo `G_4`.
    PowerCommutatorSwapped,
    /// Bilinearity of commutators of weights `w1`, `w2` modulo `G_{w1+w2+1}`.
    Bilinear,
    /// `[a,b,c][b,c,a][c,a,b]` lies in `G_{W(a)+W(b)+W(c)+1}`.
    Jacobi,
    /// `[x^n,y] = [x,y]^n` times binomial powers of basic commutators in `x`, `[x,y]`.
    CommutatorOfPower,
    /// An exponent on one entry of a left-normed commutator pulled outside.
    PullExponent,
    /// The same identity read backwards, pushing the exponent in.
    PushExponent,
    /// `(x_1...x_s)^n = x_1^n...x_s^n` times binomial powers of basic commutators.
    PowerOfProduct,
}

impl IdentityCheck {
    pub const ALL: [IdentityCheck; 10] = [
        IdentityCheck::ProductLeft,
        IdentityCheck::ProductRight,
        IdentityCheck::PowerCommutator,
        IdentityCheck::PowerCommutatorSwapped,
        IdentityCheck::Bilinear,
        IdentityCheck::Jacobi,
        IdentityCheck::CommutatorOfPower,
        IdentityCheck::PullExponent,
        IdentityCheck::PushExponent,
        IdentityCheck::PowerOfProduct,
    ];

    pub fn name(self) -> &'static str {
        match self {
            IdentityCheck::ProductLeft => "product-left",
            IdentityCheck::ProductRight => "product-right",
            IdentityCheck::PowerCommutator => "power-commutator",
            IdentityCheck::PowerCommutatorSwapped => "power-commutator-swapped",
            IdentityCheck::Bilinear => "bilinear",
            IdentityCheck::Jacobi => "jacobi",
            IdentityCheck::CommutatorOfPower => "commutator-of-power",
            IdentityCheck::PullExponent => "pull-exponent",
            IdentityCheck::PushExponent => "push-exponent",
            IdentityCheck::PowerOfProduct => "power-of-product",
        }
    }
}

impl fmt::Display for IdentityCheck {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for IdentityCheck {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        IdentityCheck::ALL
            .into_iter()
            .find(|c| c.name() == s)
            .ok_or_else(|| Error::InvalidParameter(format!("unknown identity check `{s}`")))
    }
}

/// Up to this many triples the product formulas are checked exhaustively.
const EXHAUSTIVE_TRIPLES: u64 = 50_000;

/// Check one identity on `g` with `samples` random instances drawn from a
/// ChaCha8 stream seeded by `seed`.
pub fn verify_identity(check: IdentityCheck, g: &GroupView, samples: usize, seed: u64) -> Result<CheckReport> {
    IdentityRunner::new(g).run(check, samples, seed)
}

/// Runs identity checks on one group, computing its lower central series once.
pub struct IdentityRunner<'a> {
    g: &'a GroupView,
    series: Vec<Subgroup>,
}

impl<'a> IdentityRunner<'a> {
    pub fn new(g: &'a GroupView) -> Self {
        IdentityRunner { g, series: g.lower_central_series() }
    }

    pub fn run(&self, check: IdentityCheck, samples: usize, seed: u64) -> Result<CheckReport> {
        let (g, series) = (self.g, &self.series[..]);
        let mut report = CheckReport::new(check.name(), describe(g), seed);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        match check {
            IdentityCheck::ProductLeft | IdentityCheck::ProductRight => {
                product_formula(check, g, samples, &mut rng, &mut report)
            }
            IdentityCheck::PowerCommutator | IdentityCheck::PowerCommutatorSwapped => {
                power_commutator(check, g, series, samples, &mut rng, &mut report)
            }
            IdentityCheck::Bilinear => bilinear(g, series, samples, &mut rng, &mut report),
            IdentityCheck::Jacobi => jacobi(g, series, samples, &mut rng, &mut report),
            IdentityCheck::CommutatorOfPower
            | IdentityCheck::PullExponent
            | IdentityCheck::PushExponent
            | IdentityCheck::PowerOfProduct => {
                return binomial_fit(check, g, series, samples, &mut rng, report);
            }
        }
        Ok(report)
    }
}

fn product_formula(check: IdentityCheck, g: &GroupView, samples: usize, rng: &mut ChaCha8Rng, report: &mut CheckReport) {
    let n = g.order();
    let one = |x: Id, y: Id, z: Id, report: &mut CheckReport| {
        let (lhs, rhs) = if check == IdentityCheck::ProductLeft {
            let xz = g.comm(x, z);
            (g.comm(g.mul(x, y), z), g.mul(g.mul(xz, g.comm(xz, y)), g.comm(y, z)))
        } else {
            let t = g.comm(z, g.comm(y, x));
            (g.comm(x, g.mul(y, z)), g.mul(g.mul(g.comm(x, z), t), g.comm(x, y)))
        };
        if lhs != rhs {
            report.fail(format!("x = {}, y = {}, z = {}", show(g, x), show(g, y), show(g, z)));
        }
    };
    if n.saturating_pow(3) <= EXHAUSTIVE_TRIPLES.max(samples as u64) {
        for x in 0..n {
            for y in 0..n {
                for z in 0..n {
                    one(x, y, z, report);
                }
            }
        }
        report.samples = (n * n * n) as usize;
    } else {
        for _ in 0..samples {
            let (x, y, z) = (rng.gen_range(0..n), rng.gen_range(0..n), rng.gen_range(0..n));
            one(x, y, z, report);
        }
        report.samples = samples;
    }
}

fn power_commutator(
    check: IdentityCheck,
    g: &GroupView,
    series: &[Subgroup],
    samples: usize,
    rng: &mut ChaCha8Rng,
    report: &mut CheckReport,
) {
    let n = g.order();
    for _ in 0..samples {
        let (a, b) = (rng.gen_range(0..n), rng.gen_range(0..n));
        let (r, s) = (rng.gen_range(-6i64..=6), rng.gen_range(-6i64..=6));
        let ab = g.comm(a, b);
        let (aba, abb) = (g.comm(ab, a), g.comm(ab, b));
        let c2 = crate::arith::choose2;
        let (lhs, rhs) = if check == IdentityCheck::PowerCommutator {
            let rhs = g.mul(g.mul(g.pow(ab, r * s), g.pow(aba, s * c2(r))), g.pow(abb, r * c2(s)));
            (g.comm(g.pow(a, r), g.pow(b, s)), rhs)
        } else {
            let rhs = g.mul(g.mul(g.pow(ab, -r * s), g.pow(aba, -r * c2(s))), g.pow(abb, -s * c2(r)));
            (g.comm(g.pow(b, r), g.pow(a, s)), rhs)
        };
        let quotient = g.mul(g.inv(rhs), lhs);
        if !in_term(g, series, 4, quotient) {
            report.fail(format!("a = {}, b = {}, r = {r}, s = {s}", show(g, a), show(g, b)));
        }
    }
    report.samples = samples;
}

fn bilinear(g: &GroupView, series: &[Subgroup], samples: usize, rng: &mut ChaCha8Rng, report: &mut CheckReport) {
    let k = class_of(series);
    if k < 2 {
        report.note = Some("abelian group, commutators are trivial".into());
    }
    for _ in 0..samples {
        let w1 = rng.gen_range(1..=k.max(1));
        let w2 = rng.gen_range(1..=k.max(1));
        let (left, right) = (term(series, w1).unwrap(), term(series, w2).unwrap());
        let la = rng.gen_range(1..=3);
        let lb = rng.gen_range(1..=3);
        let a: Vec<(Id, i64)> = (0..la).map(|_| (pick(rng, left.members()), rng.gen_range(-4..=4))).collect();
        let b: Vec<(Id, i64)> = (0..lb).map(|_| (pick(rng, right.members()), rng.gen_range(-4..=4))).collect();
        let prod = |v: &[(Id, i64)]| v.iter().fold(g.identity(), |acc, &(x, e)| g.mul(acc, g.pow(x, e)));
        let lhs = g.comm(prod(&a), prod(&b));
        let mut rhs = g.identity();
        for &(x, e) in &a {
            for &(y, f) in &b {
                rhs = g.mul(rhs, g.pow(g.comm(x, y), e * f));
            }
        }
        if !in_term(g, series, w1 + w2 + 1, g.mul(g.inv(rhs), lhs)) {
            let sa: Vec<String> = a.iter().map(|&(x, e)| format!("({})^{e}", show(g, x))).collect();
            let sb: Vec<String> = b.iter().map(|&(y, f)| format!("({})^{f}", show(g, y))).collect();
            report.fail(format!("weights {w1},{w2}: a = {}, b = {}", sa.join(" "), sb.join(" ")));
        }
    }
    report.samples = samples;
}

fn jacobi(g: &GroupView, series: &[Subgroup], samples: usize, rng: &mut ChaCha8Rng, report: &mut CheckReport) {
    let k = class_of(series).max(1);
    let weight = |x: Id| g.weight_w(series, x).finite();
    for _ in 0..samples {
        let mut v = [0; 3];
        for slot in &mut v {
            let level = rng.gen_range(1..=k);
            *slot = pick(rng, term(series, level).unwrap().members());
        }
        let [a, b, c] = v;
        let (Some(wa), Some(wb), Some(wc)) = (weight(a), weight(b), weight(c)) else {
            continue;
        };
        let t1 = g.comm(g.comm(a, b), c);
        let t2 = g.comm(g.comm(b, c), a);
        let t3 = g.comm(g.comm(c, a), b);
        let w = (wa + wb + wc) as usize + 1;
        if !in_term(g, series, w, g.mul(g.mul(t1, t2), t3)) {
            report.fail(format!("a = {}, b = {}, c = {}", show(g, a), show(g, b), show(g, c)));
        }
    }
    report.samples = samples;
}

const FIT_ALPHAS: std::ops::RangeInclusive<i64> = -3..=9;

/// Coefficients `a_1..a_d` of `f(n) = sum_j a_j C(n, j)` through the values
/// `f(1), ..., f(d)` and `f(0) = 0`, by forward differences.
fn newton_coeffs(values: &[i64]) -> Vec<i128> {
    let mut row: Vec<i128> = std::iter::once(0).chain(values.iter().map(|&v| v as i128)).collect();
    let mut coeffs = Vec::with_capacity(values.len());
    for _ in 0..values.len() {
        row = row.windows(2).map(|w| w[1] - w[0]).collect();
        coeffs.push(row[0]);
    }
    coeffs
}

fn binomial_value(coeffs: &[i128], n: i64) -> i128 {
    coeffs
        .iter()
        .enumerate()
        .map(|(j, a)| a * crate::arith::binomial_signed(n, j as u32 + 1))
        .sum()
}

/// Per-coordinate binomial polynomials describing a one-parameter family of
/// elements of a free nilpotent group.
struct Fitted {
    coeffs: Vec<Vec<i128>>,
}

impl Fitted {
    fn at(&self, n: i64) -> Vec<i128> {
        self.coeffs.iter().map(|c| binomial_value(c, n)).collect()
    }
}

/// Fit each coordinate of `family(n)` with the degree given by `degree` from
/// `n = 1..=d`, then confirm the fit over [`FIT_ALPHAS`].
fn fit_family(
    f: &FreeNilpotent,
    degree: impl Fn(usize) -> usize,
    family: impl Fn(i64) -> Vec<i64>,
) -> std::result::Result<Fitted, String> {
    let degrees: Vec<usize> = (0..f.len()).map(&degree).collect();
    let dmax = degrees.iter().copied().max().unwrap_or(0);
    let values: Vec<Vec<i64>> = (1..=dmax as i64).map(&family).collect();
    let coeffs: Vec<Vec<i128>> = degrees
        .iter()
        .enumerate()
        .map(|(i, &d)| newton_coeffs(&values[..d].iter().map(|v| v[i]).collect::<Vec<_>>()))
        .collect();
    let fitted = Fitted { coeffs };
    for n in FIT_ALPHAS {
        let want = fitted.at(n);
        let got = family(n);
        if let Some(i) = (0..f.len()).find(|&i| got[i] as i128 != want[i]) {
            return Err(format!(
                "free group: coordinate {} at n = {n} is {} but a degree-{} fit predicts {}",
                f.commutators().render(i),
                got[i],
                degrees[i],
                want[i]
            ));
        }
    }
    Ok(fitted)
}

/// Images in `g` of the basic commutators of `f` when generator `t` maps to `leaves[t]`.
fn realize_basis(g: &GroupView, f: &FreeNilpotent, leaves: &[Id]) -> Vec<Id> {
    let mut img: Vec<Id> = Vec::with_capacity(f.len());
    for c in f.commutators().items() {
        let x = match c.shape {
            Shape::Leaf(t) => leaves[t],
            Shape::Bracket(u, v) => g.comm(img[u], img[v]),
        };
        img.push(x);
    }
    img
}

fn realize(g: &GroupView, images: &[Id], coords: &[i128]) -> Id {
    images
        .iter()
        .zip(coords)
        .fold(g.identity(), |acc, (&x, &e)| if e == 0 { acc } else { g.mul(acc, g.pow(x, e as i64)) })
}

fn left_normed(g: &GroupView, xs: &[Id]) -> Id {
    xs[1..].iter().fold(xs[0], |acc, &x| g.comm(acc, x))
}

fn free_left_normed(f: &FreeNilpotent, xs: &[Vec<i64>]) -> Vec<i64> {
    xs[1..].iter().fold(xs[0].clone(), |acc, x| f.comm(&acc, x))
}

/// One fitted family: which identity, its parameters, and the fit.
struct FitCase {
    free: FreeNilpotent,
    /// Number of group elements the family is evaluated on.
    arity: usize,
    /// Position carrying the exponent, for the pull/push identities.
    position: usize,
    fitted: Fitted,
}

fn fit_cases(check: IdentityCheck, class: usize) -> std::result::Result<Vec<FitCase>, String> {
    let err = |e: Error| e.to_string();
    let mut cases = Vec::new();
    match check {
        IdentityCheck::CommutatorOfPower => {
            // Generators u, v stand for x and [x,y].
            let f = FreeNilpotent::new(2, class.max(2)).map_err(err)?;
            let (u, v) = (f.basis_element(0), f.basis_element(1));
            let uv = f.mul(&u, &v);
            let fitted = fit_family(&f, |i| f.commutators().weight(i), |n| f.mul(&f.pow(&u, -n), &f.pow(&uv, n)))?;
            if !fitted.coeffs[0].iter().all(|&a| a == 0) || fitted.coeffs[1] != [1] {
                return Err("free group: leading part is not [x,y]^n".into());
            }
            cases.push(FitCase { free: f, arity: 2, position: 0, fitted });
        }
        IdentityCheck::PowerOfProduct => {
            for s in 2..=3 {
                let f = FreeNilpotent::new(s, class.max(1)).map_err(err)?;
                let prod = (0..s).fold(f.identity(), |acc, t| f.mul(&acc, &f.basis_element(t)));
                let fitted = fit_family(&f, |i| f.commutators().weight(i), |n| f.pow(&prod, n))?;
                if (0..s).any(|t| fitted.coeffs[t] != [1]) {
                    return Err(format!("free group: generator exponents of (x_1...x_{s})^n are not n"));
                }
                cases.push(FitCase { free: f, arity: s, position: 0, fitted });
            }
        }
        IdentityCheck::PullExponent | IdentityCheck::PushExponent => {
            for r in 2..class.min(4) {
                let f = FreeNilpotent::new(r, class).map_err(err)?;
                let full = (1u32 << r) - 1;
                let bs: Vec<Vec<i64>> = (0..r).map(|t| f.basis_element(t)).collect();
                let c = free_left_normed(&f, &bs);
                let degree = |i: usize| {
                    let item = f.commutators().get(i);
                    if item.support == full && item.weight > r {
                        item.weight - (r - 1)
                    } else {
                        0
                    }
                };
                for pos in 0..r {
                    let family = |n: i64| {
                        let mut xs = bs.clone();
                        xs[pos] = f.pow(&bs[pos], n);
                        f.mul(&f.pow(&c, -n), &free_left_normed(&f, &xs))
                    };
                    let fitted = fit_family(&f, degree, family)?;
                    cases.push(FitCase { free: f.clone(), arity: r, position: pos, fitted });
                }
            }
        }
        _ => unreachable!("not a fitted identity"),
    }
    Ok(cases)
}

fn binomial_fit(
    check: IdentityCheck,
    g: &GroupView,
    series: &[Subgroup],
    samples: usize,
    rng: &mut ChaCha8Rng,
    mut report: CheckReport,
) -> Result<CheckReport> {
    let class = class_of(series).max(1);
    let cases = match fit_cases(check, class) {
        Ok(c) => c,
        Err(msg) => {
            report.fail(msg);
            return Ok(report);
        }
    };
    if cases.is_empty() {
        return Ok(report.not_applicable(format!("needs a left-normed length below the class {class}")));
    }
    let n = g.order();
    for _ in 0..samples {
        let case = &cases[rng.gen_range(0..cases.len())];
        let xs: Vec<Id> = (0..case.arity).map(|_| rng.gen_range(0..n)).collect();
        let leaves: Vec<Id> = if check == IdentityCheck::CommutatorOfPower {
            vec![xs[0], g.comm(xs[0], xs[1])]
        } else {
            xs.clone()
        };
        let images = realize_basis(g, &case.free, &leaves);
        for a in FIT_ALPHAS {
            let coords = case.fitted.at(a);
            let ok = match check {
                IdentityCheck::CommutatorOfPower => g.comm(g.pow(xs[0], a), xs[1]) == realize(g, &images, &coords),
                IdentityCheck::PowerOfProduct => {
                    let prod = xs.iter().fold(g.identity(), |acc, &x| g.mul(acc, x));
                    g.pow(prod, a) == realize(g, &images, &coords)
                }
                _ => {
                    let mut ys = xs.clone();
                    ys[case.position] = g.pow(xs[case.position], a);
                    let pulled = left_normed(g, &ys);
                    let c_pow = g.pow(left_normed(g, &xs), a);
                    let tail = realize(g, &images, &coords);
                    if check == IdentityCheck::PullExponent {
                        pulled == g.mul(c_pow, tail)
                    } else {
                        c_pow == g.mul(pulled, g.inv(tail))
                    }
                }
            };
            if !ok {
                let shown: Vec<String> = xs.iter().map(|&x| show(g, x)).collect();
                report.fail(format!("n = {a}, position {}, elements [{}]", case.position + 1, shown.join("; ")));
                break;
            }
        }
    }
    report.samples = samples;
    Ok(report)
}

/// Exponent bounds for the lower central series of `<y,z>` under the
/// hypothesis `[z,y^{p^i},y] = [z,y^{p^i},z] = e` for `i = a..a+3`, and the
/// equality `[z^{p^N},y] = [z,y]^{p^N} = [z,y^{p^N}]` at
/// `N = a + floor((K-2)/(p-1))` for `G` of class `K`.
pub fn verify_exponent_bounds(g: &GroupView, y: Id, z: Id, a: u32) -> Result<CheckReport> {
    let mut report = CheckReport::new("exponent-bounds", describe(g), 0);
    report.note = Some(format!("y = {}, z = {}, a = {a}", show(g, y), show(g, z)));
    let p = g.prime();
    let pp = |e: u32| -> Result<i64> {
        i64::try_from(crate::arith::prime_power(p, e)?).map_err(|_| Error::InvalidParameter(format!("{p}^{e} overflows")))
    };
    for i in a..=a + 3 {
        let t = g.comm(z, g.pow(y, pp(i)?));
        if g.comm(t, y) != g.identity() || g.comm(t, z) != g.identity() {
            return Ok(report.not_applicable(format!("hypothesis fails at i = {i}")));
        }
    }
    let class = class_of(&g.lower_central_series());
    if class < 2 {
        return Ok(report.not_applicable("abelian group".into()));
    }
    let sub = g.subgroup_series(&[y, z]);
    let mut checked = 0;
    if class >= 3 {
        for m in 0..=class - 3 {
            let bound = a + (m as u32) / (p as u32 - 1);
            let q = pp(bound)?;
            if let Some(s) = term(&sub, class - m) {
                for &x in s.members() {
                    checked += 1;
                    if g.pow(x, q) != g.identity() {
                        report.fail(format!(
                            "{} in term {} of <y,z> has order above {p}^{bound}",
                            show(g, x),
                            class - m
                        ));
                        break;
                    }
                }
            }
        }
    }
    let k = class as u32 - 1;
    let n = a + (k - 1) / (p as u32 - 1);
    let q = pp(n)?;
    let left = g.comm(g.pow(z, q), y);
    let middle = g.pow(g.comm(z, y), q);
    let right = g.comm(z, g.pow(y, q));
    checked += 1;
    if left != middle || middle != right {
        report.fail(format!(
            "N = {n}: [z^p^N,y] = {}, [z,y]^p^N = {}, [z,y^p^N] = {}",
            show(g, left),
            show(g, middle),
            show(g, right)
        ));
    }
    report.samples = checked;
    report.note = Some(format!("y = {}, z = {}, a = {a}, N = {n}", show(g, y), show(g, z)));
    Ok(report)
}

/// Truncated noncommutative power series over `Z` in variables `X_1..X_r`,
/// keeping monomials of degree at most `deg`.
#[derive(Debug, Clone, PartialEq, Eq)]
struct Series {
    deg: usize,
    terms: std::collections::BTreeMap<Vec<u8>, i128>,
}

impl Series {
    fn one(deg: usize) -> Self {
        let mut terms = std::collections::BTreeMap::new();
        terms.insert(Vec::new(), 1);
        Series { deg, terms }
    }

    fn mul(&self, other: &Series) -> Series {
        let mut terms = std::collections::BTreeMap::new();
        for (u, a) in &self.terms {
            for (v, b) in &other.terms {
                if u.len() + v.len() > self.deg {
                    continue;
                }
                let mut w = u.clone();
                w.extend_from_slice(v);
                *terms.entry(w).or_insert(0) += a * b;
            }
        }
        terms.retain(|_, c| *c != 0);
        Series { deg: self.deg, terms }
    }

    /// `(1 + N)^e = sum_n C(e, n) N^n` for `self = 1 + N`, any integer `e`.
    fn pow(&self, e: i64) -> Series {
        let mut nil = self.clone();
        *nil.terms.entry(Vec::new()).or_insert(0) -= 1;
        nil.terms.retain(|_, c| *c != 0);
        let mut acc = Series::one(self.deg);
        let mut power = Series::one(self.deg);
        for n in 1..=self.deg {
            power = power.mul(&nil);
            let c = crate::arith::binomial_signed(e, n as u32);
            for (w, a) in &power.terms {
                *acc.terms.entry(w.clone()).or_insert(0) += c * a;
            }
        }
        acc.terms.retain(|_, c| *c != 0);
        acc
    }

    fn generator(t: usize, deg: usize) -> Series {
        let mut s = Series::one(deg);
        if deg > 0 {
            s.terms.insert(vec![t as u8], 1);
        }
        s
    }
}

/// Free nilpotent collection checked against the Magnus embedding: a word
/// and both of its collected forms must have the same image modulo degree
/// `class + 1`.
pub fn verify_free_collection(rank: usize, class: usize, samples: usize, seed: u64) -> Result<CheckReport> {
    let f = FreeNilpotent::new(rank, class)?;
    let mut report = CheckReport::new("free-collection-magnus", format!("free rank={rank} class={class}"), seed);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut images: Vec<Series> = Vec::with_capacity(f.len());
    for c in f.commutators().items() {
        let s = match c.shape {
            Shape::Leaf(t) => Series::generator(t, class),
            Shape::Bracket(u, v) => {
                let (mu, mv) = (&images[u], &images[v]);
                mu.pow(-1).mul(&mv.pow(-1)).mul(mu).mul(mv)
            }
        };
        images.push(s);
    }
    let image_of = |coords: &[i64]| {
        coords
            .iter()
            .zip(&images)
            .filter(|(e, _)| **e != 0)
            .fold(Series::one(class), |acc, (&e, m)| acc.mul(&m.pow(e)))
    };
    for _ in 0..samples {
        let len = rng.gen_range(1..=10);
        let word: Vec<(usize, i64)> = (0..len)
            .map(|_| (rng.gen_range(0..rank), [-3i64, -2, -1, 1, 2, 3][rng.gen_range(0..6)]))
            .collect();
        let direct = word
            .iter()
            .fold(Series::one(class), |acc, &(t, e)| acc.mul(&Series::generator(t, class).pow(e)));
        let by_letters = f.collect_letters(&word, Strategy::LeftmostFirst)?;
        let mut by_table = f.identity();
        for &(t, e) in &word {
            f.mul_gen_pow(&mut by_table, t, e);
        }
        let shown: Vec<String> = word.iter().map(|&(t, e)| format!("x{}^{e}", t + 1)).collect();
        if image_of(&by_letters) != direct {
            report.fail(format!("letter collection of {}", shown.join(" ")));
        }
        if image_of(&by_table) != direct {
            report.fail(format!("table collection of {}", shown.join(" ")));
        }
    }
    report.samples = samples;
    Ok(report)
}
