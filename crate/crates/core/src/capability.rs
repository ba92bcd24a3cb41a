//! Capability verdicts for nilpotent products of cyclic p-groups and related
//! families, plus constructive witnesses `K/M` whose central quotient is `G`.
//!
//! Witness computations run on polycyclic presentations and never enumerate
//! elements; when the ambient group fits in the enumeration budget the same
//! orders are recomputed by brute force in [`crate::engine`].

use std::collections::HashMap;
use std::sync::Arc;

use serde::Serialize;

use crate::arith::{capability_slack, check_prime, prime_power};
use crate::collector::{Collector, PcElem, PcGroup, PcSubgroup};
use crate::engine::{build_group, GroupView};
use crate::error::{Error, Result};
use crate::hallbasis::{HallBasis, Variant, MAX_CLASS};
use crate::wordlang::{evaluate_with_aliases, parse_word, GroupSpec, Presentation11, WordAst};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Status {
    Capable,
    NotCapable,
    Unknown,
}

/// Why a verdict was reached.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case", tag = "rule")]
pub enum Justification {
    /// A single cyclic factor: cyclic groups are never capable.
    Cyclic,
    /// Class below the prime: capable iff the two largest orders agree.
    ClassBelowPrime { top: u32, next: u32 },
    /// `p = k = 2`: capable iff the largest order exceeds the next by at most one.
    PrimeTwoClassTwo { top: u32, next: u32 },
    /// The largest order exceeds the next by more than the slack `(k-1)/(p-1)`.
    NecessityViolated { top: u32, next: u32, slack: u64 },
    /// `k >= p > 2` with the necessary bound satisfied: no theorem decides it.
    OpenClassAtLeastPrime { top: u32, next: u32, slack: u64 },
    /// A verified witness `K/M` exhibits the group as a central quotient.
    VerifiedWitness,
    /// A group given by arbitrary relators whose witness search did not verify.
    WitnessInconclusive,
    /// Two-generator class-two presentation with `sigma = gamma`: capable iff `alpha = beta`.
    CoproductQuotient { alpha: u32, beta: u32 },
    /// Two-generator class-two presentation with `sigma < gamma`: capable iff `alpha = beta`.
    SigmaBelowGamma { alpha: u32, beta: u32 },
    /// Parameters outside the normalised range; only a witness can decide.
    NonCanonicalParameters { detail: String },
    /// Extra-special groups: capable iff dihedral of order 8 or of order `p^3` and exponent `p` with `p > 2`.
    ExtraspecialClassification,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Verdict {
    pub status: Status,
    pub justification: Justification,
    pub witness: Option<WitnessReport>,
}

impl Verdict {
    fn new(status: Status, justification: Justification) -> Self {
        Verdict { status, justification, witness: None }
    }
}

/// Orders are recorded as exponents of the prime.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WitnessReport {
    pub k_spec: GroupSpec,
    pub m_description: String,
    pub k_order_exp: u32,
    pub m_order_exp: u32,
    pub q_order_exp: u32,
    pub center_order_exp: u32,
    pub central_quotient_order_exp: u32,
    pub g_order_exp: u32,
    pub relators_central: bool,
    /// Whether the center of `K/M` matches the generators the construction predicts.
    pub center_formula_matches: Option<bool>,
    /// Whether an enumeration of `K` reproduced the orders; `None` when over budget.
    pub brute_force_agrees: Option<bool>,
    pub verified: bool,
}

fn sorted_orders(orders: &[u32]) -> Vec<u32> {
    let mut v = orders.to_vec();
    v.sort_unstable();
    v
}

/// The necessary condition for capability: `r > 1` and
/// `alpha_r <= alpha_{r-1} + (k-1)/(p-1)` on the sorted orders.
pub fn necessity_check(p: u64, k: usize, orders: &[u32]) -> bool {
    let v = sorted_orders(orders);
    let r = v.len();
    r > 1 && v[r - 1] as u64 <= v[r - 2] as u64 + capability_slack(p, k as u64)
}

fn check_nilprod_params(p: u64, k: usize, orders: &[u32]) -> Result<()> {
    check_prime(p)?;
    if k == 0 {
        return Err(Error::OutOfRange { what: "class", value: 0, range: ">= 1".into() });
    }
    if orders.is_empty() {
        return Err(Error::InvalidParameter("at least one cyclic factor is needed".into()));
    }
    if orders.contains(&0) {
        return Err(Error::InvalidParameter("order exponents must be at least 1".into()));
    }
    Ok(())
}

/// Verdict for the `k`-nilpotent product of cyclic groups of orders `p^orders[i]`.
pub fn capable_nilprod(p: u64, k: usize, orders: &[u32]) -> Result<Verdict> {
    check_nilprod_params(p, k, orders)?;
    let v = sorted_orders(orders);
    if v.len() == 1 {
        return Ok(Verdict::new(Status::NotCapable, Justification::Cyclic));
    }
    let (top, next) = (v[v.len() - 1], v[v.len() - 2]);
    let slack = capability_slack(p, k as u64);
    if (k as u64) < p {
        let status = if top == next { Status::Capable } else { Status::NotCapable };
        return Ok(Verdict::new(status, Justification::ClassBelowPrime { top, next }));
    }
    if p == 2 && k == 2 {
        let status = if top <= next + 1 { Status::Capable } else { Status::NotCapable };
        return Ok(Verdict::new(status, Justification::PrimeTwoClassTwo { top, next }));
    }
    if top as u64 > next as u64 + slack {
        return Ok(Verdict::new(Status::NotCapable, Justification::NecessityViolated { top, next, slack }));
    }
    Ok(Verdict::new(Status::Unknown, Justification::OpenClassAtLeastPrime { top, next, slack }))
}

/// [`capable_nilprod`] followed by a witness search whenever the verdict is not negative.
/// An open case becomes capable when the witness verifies.
pub fn capable_nilprod_witnessed(p: u64, k: usize, orders: &[u32]) -> Result<Verdict> {
    let mut verdict = capable_nilprod(p, k, orders)?;
    if verdict.status == Status::NotCapable {
        return Ok(verdict);
    }
    match witness_search(&GroupSpec::nilprod(p, k, orders), None) {
        Ok(w) => {
            if w.verified && verdict.status == Status::Unknown {
                verdict.status = Status::Capable;
                verdict.justification = Justification::VerifiedWitness;
            }
            verdict.witness = Some(w);
        }
        Err(Error::BasisUnavailable { .. }) => {}
        Err(e) => return Err(e),
    }
    Ok(verdict)
}

/// Verdict for the two-generator class-two presentation.
/// Non-canonical parameters are decided only by a verified witness search.
pub fn capable_presentation11(p: u64, params: Presentation11) -> Result<Verdict> {
    params.validate(p)?;
    let Presentation11 { alpha, beta, gamma, sigma } = params;
    if let Some(detail) = params.canonical_violation() {
        let w = witness_search(&GroupSpec::presentation11(p, params), None)?;
        let status = if w.verified { Status::Capable } else { Status::Unknown };
        let justification = if w.verified {
            Justification::VerifiedWitness
        } else {
            Justification::NonCanonicalParameters { detail }
        };
        return Ok(Verdict { status, justification, witness: Some(w) });
    }
    let status = if alpha == beta { Status::Capable } else { Status::NotCapable };
    let justification = if sigma == gamma {
        Justification::CoproductQuotient { alpha, beta }
    } else {
        Justification::SigmaBelowGamma { alpha, beta }
    };
    Ok(Verdict::new(status, justification))
}

/// Shape of an extra-special group of order `p^order_exp`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ExtraspecialType {
    /// Odd `p`, exponent `p`.
    ExponentP,
    /// Odd `p`, exponent `p^2`.
    ExponentP2,
    /// `p = 2`, central product of dihedral groups of order 8 (dihedral itself at order 8).
    Plus,
    /// `p = 2`, the other type (quaternion at order 8).
    Minus,
}

pub fn capable_extraspecial(p: u64, order_exp: u32, kind: ExtraspecialType) -> Result<Verdict> {
    check_prime(p)?;
    if order_exp < 3 || order_exp % 2 == 0 {
        return Err(Error::InvalidParameter(format!(
            "extra-special groups have order p^(2m+1) with m >= 1, not p^{order_exp}"
        )));
    }
    let odd_kind = matches!(kind, ExtraspecialType::ExponentP | ExtraspecialType::ExponentP2);
    if odd_kind == (p == 2) {
        return Err(Error::InvalidParameter(format!("type {kind:?} does not exist for p = {p}")));
    }
    let capable = order_exp == 3
        && matches!((p, kind), (2, ExtraspecialType::Plus) | (3.., ExtraspecialType::ExponentP));
    let status = if capable { Status::Capable } else { Status::NotCapable };
    Ok(Verdict::new(status, Justification::ExtraspecialClassification))
}

/// The extra-special group of order `p^5` on `x1..x4` with
/// `[x3,x1] = [x3,x2] = [x4,x1]`, `[x4,x2] = [x4,x3] = [x2,x1] = e`, `x_i^p = e`, class 2.
pub fn extraspecial_p5_spec(p: u64) -> Result<GroupSpec> {
    check_prime(p)?;
    if p == 2 {
        return Err(Error::InvalidParameter("the p^5 example needs an odd prime".into()));
    }
    let relators = ["[x3,x1] [x3,x2]^-1", "[x3,x1] [x4,x1]^-1", "[x4,x2]", "[x4,x3]", "[x2,x1]"]
        .iter()
        .map(|w| parse_word(w))
        .collect::<Result<Vec<_>>>()?;
    Ok(GroupSpec::nilprod(p, 2, &[1, 1, 1, 1]).with_relators(relators))
}

pub fn build_extraspecial_p5(p: u64, budget: u64) -> Result<Arc<GroupView>> {
    build_group(&extraspecial_p5_spec(p)?, budget)
}

pub fn build_presentation11(p: u64, params: Presentation11, budget: u64) -> Result<Arc<GroupView>> {
    params.validate(p)?;
    build_group(&GroupSpec::presentation11(p, params), budget)
}

/// The basis variant available for class `class` at prime `p`.
pub fn variant_for(p: u64, class: usize) -> Result<Variant> {
    if class > MAX_CLASS {
        return Err(Error::BasisUnavailable { prime: p, class });
    }
    if p >= class as u64 {
        Ok(Variant::Standard)
    } else if p == 2 && class == 3 {
        Ok(Variant::K3p2)
    } else {
        Err(Error::BasisUnavailable { prime: p, class })
    }
}

/// A nilpotent product held as a polycyclic presentation, generators in the
/// order the caller listed them.
pub struct PcModel {
    collector: Collector,
    gens: Vec<PcElem>,
}

impl PcModel {
    pub fn new(p: u64, class: usize, orders: &[u32], variant: Variant) -> Result<Self> {
        let mut perm: Vec<usize> = (0..orders.len()).collect();
        perm.sort_by_key(|&i| (orders[i], i));
        let sorted: Vec<u32> = perm.iter().map(|&i| orders[i]).collect();
        let collector = Collector::new(HallBasis::build(p, class, &sorted, variant)?)?;
        let mut gens = vec![Vec::new(); orders.len()];
        for (pos, &i) in perm.iter().enumerate() {
            gens[i] = collector.pc().generator(pos);
        }
        Ok(PcModel { collector, gens })
    }

    pub fn from_spec(spec: &GroupSpec) -> Result<Self> {
        spec.validate()?;
        Self::new(spec.prime, spec.class, &spec.orders, spec.variant)
    }

    pub fn pc(&self) -> &PcGroup {
        self.collector.pc()
    }

    pub fn collector(&self) -> &Collector {
        &self.collector
    }

    pub fn gens(&self) -> &[PcElem] {
        &self.gens
    }

    pub fn eval(&self, w: &WordAst, names: &HashMap<String, PcElem>) -> Result<PcElem> {
        evaluate_with_aliases(self.pc(), w, &self.gens, names)
    }

    pub fn normal_closure(&self, gens: &[PcElem]) -> PcSubgroup {
        self.pc().normal_closure_pc(gens, &self.gens)
    }

    /// True iff `[x, g]` lies in `n` for every generator `g`.
    pub fn central_mod(&self, n: &PcSubgroup, x: &[u32]) -> bool {
        self.gens.iter().all(|g| self.pc().contains(n, &self.pc().comm(x, g)))
    }

    /// `[N, K]` for a normal subgroup `N`: the normal closure of the
    /// commutators of its sequence with the generators.
    pub fn commutator_with_whole(&self, n: &PcSubgroup) -> PcSubgroup {
        let comms: Vec<PcElem> = n
            .elements_of_sequence()
            .flat_map(|s| self.gens.iter().map(move |g| (s, g)))
            .map(|(s, g)| self.pc().comm(s, g))
            .collect();
        self.normal_closure(&comms)
    }
}

/// `log_p |G|` for a spec, computed without enumeration.
pub fn spec_order_exp(spec: &GroupSpec) -> Result<u32> {
    let m = PcModel::from_spec(spec)?;
    let values = spec
        .all_relators()?
        .iter()
        .map(|w| m.eval(w, &HashMap::new()))
        .collect::<Result<Vec<_>>>()?;
    Ok(m.pc().order_exp() - m.normal_closure(&values).order_exp())
}

fn pow_i64(p: u64, e: u32) -> Result<i64> {
    i64::try_from(prime_power(p, e)?).map_err(|_| Error::InvalidParameter(format!("{p}^{e} overflows")))
}

/// Everything needed to finish a report once `M` is known.
struct WitnessParts<'a> {
    model: &'a PcModel,
    k_spec: GroupSpec,
    m: PcSubgroup,
    m_gens: Vec<PcElem>,
    m_description: String,
    relators: Vec<PcElem>,
    predicted_center: Option<Vec<PcElem>>,
    g_order_exp: u32,
}

fn finish_report(parts: WitnessParts<'_>, budget: u64) -> Result<WitnessReport> {
    let WitnessParts { model, k_spec, m, m_gens, m_description, relators, predicted_center, g_order_exp } = parts;
    let pc = model.pc();
    let c = pc.center_mod(&m, model.gens())?;
    let k_exp = pc.order_exp();
    let m_exp = m.order_exp();
    let c_exp = c.order_exp();
    let relators_central = relators.iter().all(|r| model.central_mod(&m, r));
    let center_formula_matches = predicted_center.map(|gens| {
        let z = pc.closure(&m, &gens, model.gens());
        z.order_exp() == c_exp && gens.iter().all(|g| pc.contains(&c, g))
    });
    let brute_force_agrees = brute_force_orders(&k_spec, model, &m_gens, &relators, budget)?
        .map(|(bm, bq, bz, central)| bm == m_exp && bq == k_exp - m_exp && bz == c_exp - m_exp && central == relators_central);
    let verified = relators_central
        && k_exp - c_exp == g_order_exp
        && center_formula_matches != Some(false)
        && brute_force_agrees != Some(false);
    Ok(WitnessReport {
        k_spec,
        m_description,
        k_order_exp: k_exp,
        m_order_exp: m_exp,
        q_order_exp: k_exp - m_exp,
        center_order_exp: c_exp - m_exp,
        central_quotient_order_exp: k_exp - c_exp,
        g_order_exp,
        relators_central,
        center_formula_matches,
        brute_force_agrees,
        verified,
    })
}

/// Recomputes `|M|`, `|K/M|`, `|Z(K/M)|` and relator centrality by enumeration.
fn brute_force_orders(
    k_spec: &GroupSpec,
    model: &PcModel,
    m_gens: &[PcElem],
    relators: &[PcElem],
    budget: u64,
) -> Result<Option<(u32, u32, u32, bool)>> {
    let k = match build_group(k_spec, budget) {
        Ok(k) => k,
        Err(Error::BudgetExceeded { .. }) => return Ok(None),
        Err(e) => return Err(e),
    };
    if k.order_exp() != model.pc().order_exp() {
        return Ok(Some((u32::MAX, 0, 0, false)));
    }
    let ids: Vec<_> = m_gens.iter().map(|x| k.id_of_pc(x)).collect();
    let m = k.normal_closure(&ids);
    let q = k.quotient(&m)?;
    let z = q.center()?;
    let central = relators.iter().all(|r| q.is_central(k.project_to(&q, k.id_of_pc(r)).unwrap()));
    let log = |n: u64| crate::arith::floor_log(n, k.prime());
    Ok(Some((log(m.order()), log(q.order()), log(z.order()), central)))
}

/// Searches for a witness to the capability of `G`: `K` is the
/// `(k+1)`-nilpotent product of cyclic groups of orders `p^betas[i]`, `N` the
/// normal closure of the relators of `G` evaluated in `K`, and `M = [N, K]`.
/// A verified report shows `(K/M)/Z(K/M)` has the order of `G`; an
/// unverified one proves nothing.
pub fn witness_search(g: &GroupSpec, k_orders: Option<&[u32]>) -> Result<WitnessReport> {
    witness_search_budget(g, k_orders, 0)
}

/// [`witness_search`] with an enumeration cross-check when `|K|` is within `budget`.
pub fn witness_search_budget(g: &GroupSpec, k_orders: Option<&[u32]>, budget: u64) -> Result<WitnessReport> {
    g.validate()?;
    let p = g.prime;
    let class = g.class + 1;
    let variant = variant_for(p, class)?;
    let betas: Vec<u32> = match k_orders {
        Some(b) if b.len() != g.rank() => {
            return Err(Error::InvalidParameter(format!("{} K orders for {} generators", b.len(), g.rank())))
        }
        Some(b) => b.to_vec(),
        None => {
            let extra = capability_slack(p, class as u64) as u32 + 1;
            g.orders.iter().map(|&a| a + extra).collect()
        }
    };
    let k_spec = GroupSpec::nilprod(p, class, &betas).with_variant(variant);
    let model = PcModel::from_spec(&k_spec)?;
    let mut words: Vec<WordAst> = (0..g.rank())
        .map(|i| Ok(WordAst::gen(&format!("x{}", i + 1)).pow(pow_i64(p, g.orders[i])?)))
        .collect::<Result<_>>()?;
    words.extend(g.all_relators()?);
    let relators = words.iter().map(|w| model.eval(w, &HashMap::new())).collect::<Result<Vec<_>>>()?;
    let n = model.normal_closure(&relators);
    let m = model.commutator_with_whole(&n);
    if !n.elements_of_sequence().all(|x| model.central_mod(&m, x)) {
        return Err(Error::Inconsistent("N/M is not central in K/M".into()));
    }
    let m_gens: Vec<PcElem> = m.elements_of_sequence().cloned().collect();
    let m_description = format!(
        "[N,K] with N the normal closure of {} relator(s); |N| = {p}^{}",
        relators.len(),
        n.order_exp()
    );
    finish_report(
        WitnessParts {
            model: &model,
            k_spec,
            m,
            m_gens,
            m_description,
            relators,
            predicted_center: None,
            g_order_exp: spec_order_exp(g)?,
        },
        budget,
    )
}

/// Witness for the quotient of the 2-nilpotent product of cyclic groups of
/// orders `p^orders[i]` by `[x_j,x_i]^{p^{beta_ji}}`: `H` is the 3-nilpotent
/// product, `M` is generated by `[x_j,x_i,x_k]^{p^{beta_ji}}` for `i < j` and
/// every `k`. `betas` maps one-based pairs `(j, i)` with `j > i`; missing pairs
/// take `beta_ji = alpha_i`.
pub fn witness_quotient_family(
    p: u64,
    orders: &[u32],
    betas: &[((usize, usize), u32)],
    budget: u64,
) -> Result<WitnessReport> {
    check_prime(p)?;
    if p < 3 {
        return Err(Error::InvalidParameter("the quotient family needs an odd prime".into()));
    }
    let r = orders.len();
    if r < 2 || orders.contains(&0) || orders.windows(2).any(|w| w[0] > w[1]) {
        return Err(Error::InvalidParameter("need at least two ascending orders, each >= 1".into()));
    }
    if orders[r - 2] != orders[r - 1] {
        return Err(Error::InvalidParameter("the two largest orders must agree".into()));
    }
    let mut beta: HashMap<(usize, usize), u32> = HashMap::new();
    for &((j, i), b) in betas {
        if !(1 <= i && i < j && j <= r) {
            return Err(Error::InvalidParameter(format!("pair ({j},{i}) needs 1 <= i < j <= {r}")));
        }
        if b < 1 || b > orders[i - 1] {
            return Err(Error::InvalidParameter(format!("beta_{j}{i} = {b} must lie in 1..={}", orders[i - 1])));
        }
        beta.insert((j, i), b);
    }
    let beta_of = |j: usize, i: usize| beta.get(&(j, i)).copied().unwrap_or(orders[i - 1]);

    let model = PcModel::new(p, 3, orders, Variant::Standard)?;
    let none = HashMap::new();
    let word = |s: String| -> Result<PcElem> { model.eval(&parse_word(&s)?, &none) };
    let mut m_gens = Vec::new();
    let mut g_relators = Vec::new();
    let mut predicted = Vec::new();
    for j in 1..=r {
        for i in 1..j {
            let e = pow_i64(p, beta_of(j, i))?;
            for k in 1..=r {
                m_gens.push(word(format!("[x{j},x{i},x{k}]^{e}"))?);
                predicted.push(word(format!("[x{j},x{i},x{k}]"))?);
            }
            g_relators.push(parse_word(&format!("[x{j},x{i}]^{e}"))?);
        }
    }
    predicted.push(word(format!("x{r}^{}", pow_i64(p, orders[r - 2])?))?);
    let relators = g_relators.iter().map(|w| model.eval(w, &none)).collect::<Result<Vec<_>>>()?;
    predicted.extend(relators.iter().cloned());
    let m = model.normal_closure(&m_gens);
    let g_spec = GroupSpec::nilprod(p, 2, orders).with_relators(g_relators);
    let m_description = format!(
        "normal closure of [x_j,x_i,x_k]^(p^beta_ji); betas {:?}",
        (1..=r).flat_map(|j| (1..j).map(move |i| (j, i))).map(|(j, i)| ((j, i), beta_of(j, i))).collect::<Vec<_>>()
    );
    finish_report(
        WitnessParts {
            model: &model,
            k_spec: GroupSpec::nilprod(p, 3, orders),
            m,
            m_gens,
            m_description,
            relators,
            predicted_center: Some(predicted),
            g_order_exp: spec_order_exp(&g_spec)?,
        },
        budget,
    )
}

/// Witness for the two-generator class-two presentation with `alpha = beta`
/// and `sigma < gamma`. `H` is the 3-nilpotent product of two cyclic groups
/// of order `p^alpha` on `x`, `y`, divided successively by
/// `[y,x,x]^{p^gamma}, [y,x,y]^{p^gamma}`, then `[y,x,x]^{p^sigma}`, then
/// `[y,x]^{p^{alpha+sigma-gamma}} [y,x,y]^{-p^sigma}`.
pub fn witness_presentation11(p: u64, alpha: u32, gamma: u32, sigma: u32, budget: u64) -> Result<WitnessReport> {
    let params = Presentation11::new(alpha, alpha, gamma, sigma);
    params.validate(p)?;
    if sigma >= gamma {
        return Err(Error::InvalidParameter(
            "sigma = gamma is the coproduct-type case; use witness_quotient_family".into(),
        ));
    }
    let model = PcModel::new(p, 3, &[alpha, alpha], Variant::Standard)?;
    let mut names = HashMap::new();
    names.insert("x".to_string(), model.gens()[0].clone());
    names.insert("y".to_string(), model.gens()[1].clone());
    names.insert("a".to_string(), model.gens()[0].clone());
    names.insert("b".to_string(), model.gens()[1].clone());
    let word = |s: String| -> Result<PcElem> { model.eval(&parse_word(&s)?, &names) };
    let (pg, ps, pd) = (pow_i64(p, gamma)?, pow_i64(p, sigma)?, pow_i64(p, alpha + sigma - gamma)?);
    let steps = [
        vec![word(format!("[y,x,x]^{pg}"))?, word(format!("[y,x,y]^{pg}"))?],
        vec![word(format!("[y,x,x]^{ps}"))?],
        vec![word(format!("[y,x]^{pd} [y,x,y]^-{ps}"))?],
    ];
    let mut m_gens = Vec::new();
    let mut chain = Vec::new();
    for s in &steps {
        m_gens.extend(s.iter().cloned());
        chain.push(model.normal_closure(&m_gens).order_exp());
    }
    let m = model.normal_closure(&m_gens);
    let relators = vec![word(format!("[b,a]^{pg}"))?, word(format!("a^{pd} [b,a]^{ps}"))?];
    let predicted = vec![
        word(format!("x^{pd} [y,x]^{ps}"))?,
        word(format!("[y,x]^{pg}"))?,
        word("[y,x,x]".into())?,
        word("[y,x,y]".into())?,
    ];
    let mut m_description = format!("three-step chain, |N_i| = {p}^{chain:?}");
    if let Some(note) = params.canonical_violation() {
        m_description.push_str("; ");
        m_description.push_str(&note);
    }
    finish_report(
        WitnessParts {
            model: &model,
            k_spec: GroupSpec::nilprod(p, 3, &[alpha, alpha]),
            m,
            m_gens,
            m_description,
            relators,
            predicted_center: Some(predicted),
            g_order_exp: spec_order_exp(&GroupSpec::presentation11(p, params))?,
        },
        budget,
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::engine::DEFAULT_BUDGET;

    #[test]
    fn necessity_examples() {
        assert!(!necessity_check(3, 2, &[1, 2]));
        assert!(necessity_check(2, 2, &[1, 2]));
        assert!(!necessity_check(2, 2, &[1, 3]));
        for k in 2..=6 {
            assert!(necessity_check(2, k, &[1, k as u32]));
            assert!(!necessity_check(2, k, &[1, k as u32 + 1]));
        }
        assert!(!necessity_check(5, 3, &[2]));
    }

    #[test]
    fn nilprod_verdicts() {
        let s = |p, k, o: &[u32]| capable_nilprod(p, k, o).unwrap().status;
        assert_eq!(s(5, 3, &[1, 2, 2]), Status::Capable);
        assert_eq!(s(2, 2, &[1, 3]), Status::NotCapable);
        assert_eq!(s(2, 2, &[1, 2]), Status::Capable);
        assert_eq!(s(3, 2, &[1, 2]), Status::NotCapable);
        assert_eq!(s(3, 3, &[1, 1]), Status::Unknown);
        assert_eq!(s(3, 3, &[1, 3]), Status::NotCapable);
        assert_eq!(s(7, 1, &[2, 1, 2]), Status::Capable);
        assert_eq!(s(7, 1, &[4]), Status::NotCapable);
        assert!(capable_nilprod(4, 2, &[1, 1]).is_err());
    }

    #[test]
    fn presentation11_verdicts() {
        let s = |p, a, b, g, sg| capable_presentation11(p, Presentation11::new(a, b, g, sg)).unwrap().status;
        assert_eq!(s(3, 1, 1, 1, 1), Status::Capable);
        assert_eq!(s(5, 2, 1, 1, 0), Status::NotCapable);
        assert_eq!(s(3, 2, 2, 1, 0), Status::Capable);
        assert!(capable_presentation11(3, Presentation11::new(2, 2, 1, 2)).is_err());
    }

    #[test]
    fn extraspecial_verdicts() {
        use ExtraspecialType::*;
        let s = |p, n, t| capable_extraspecial(p, n, t).unwrap().status;
        assert_eq!(s(3, 3, ExponentP), Status::Capable);
        assert_eq!(s(3, 3, ExponentP2), Status::NotCapable);
        assert_eq!(s(3, 5, ExponentP), Status::NotCapable);
        assert_eq!(s(2, 3, Plus), Status::Capable);
        assert_eq!(s(2, 3, Minus), Status::NotCapable);
        assert_eq!(s(2, 5, Plus), Status::NotCapable);
        assert!(capable_extraspecial(3, 4, ExponentP).is_err());
        assert!(capable_extraspecial(2, 3, ExponentP).is_err());
    }

    #[test]
    fn presentation11_orders() {
        let g = build_presentation11(3, Presentation11::new(1, 1, 1, 1), DEFAULT_BUDGET).unwrap();
        assert_eq!(g.order(), 27);
        assert!((0..27).all(|x| g.pow(x, 3) == 0));
        assert_eq!(g.lower_central_series().len(), 3);
        let g = build_presentation11(3, Presentation11::new(2, 2, 1, 0), DEFAULT_BUDGET).unwrap();
        assert_eq!(g.order(), 81);
        assert_eq!(spec_order_exp(&GroupSpec::presentation11(3, Presentation11::new(2, 2, 1, 0))).unwrap(), 4);
    }

    #[test]
    fn extraspecial_p5_group() {
        let g = build_extraspecial_p5(3, DEFAULT_BUDGET).unwrap();
        assert_eq!(g.order(), 243);
        assert_eq!(g.center().unwrap().order(), 3);
        assert!(g.generators().iter().all(|&x| g.element_order(x) == 3));
        assert!(necessity_check(3, 2, &[1, 1, 1, 1]));
        assert_eq!(spec_order_exp(&extraspecial_p5_spec(5).unwrap()).unwrap(), 5);
    }

    #[test]
    fn witness_search_examples() {
        let w = witness_search_budget(&GroupSpec::nilprod(3, 2, &[1, 1]), Some(&[1, 1]), DEFAULT_BUDGET).unwrap();
        assert_eq!((w.m_order_exp, w.center_order_exp, w.central_quotient_order_exp), (0, 2, 3));
        assert!(w.verified);
        assert_eq!(w.brute_force_agrees, Some(true));
        let w = witness_search(&GroupSpec::nilprod(3, 2, &[1, 1]), None).unwrap();
        assert!(w.verified, "{w:?}");
        let w = witness_search(&GroupSpec::nilprod(2, 2, &[1, 2]), None).unwrap();
        assert!(w.verified, "{w:?}");
        let w = witness_search(&GroupSpec::nilprod(3, 2, &[1, 2]), None).unwrap();
        assert!(!w.verified, "{w:?}");
        assert!(matches!(
            witness_search(&GroupSpec::nilprod(3, 3, &[1, 1]), None),
            Err(Error::BasisUnavailable { prime: 3, class: 4 })
        ));
    }

    #[test]
    fn quotient_family_examples() {
        let w = witness_quotient_family(3, &[1, 1], &[((2, 1), 1)], DEFAULT_BUDGET).unwrap();
        assert_eq!(w.m_order_exp, 0);
        assert!(w.verified, "{w:?}");
        let w = witness_quotient_family(5, &[1, 1], &[((2, 1), 1)], DEFAULT_BUDGET).unwrap();
        assert_eq!(w.central_quotient_order_exp, 3);
        assert!(w.verified, "{w:?}");
        assert!(witness_quotient_family(3, &[1, 2], &[], DEFAULT_BUDGET).is_err());
        assert!(witness_quotient_family(3, &[2, 2], &[((2, 1), 3)], DEFAULT_BUDGET).is_err());
    }

    #[test]
    fn presentation11_witnesses() {
        let w = witness_presentation11(3, 2, 1, 0, DEFAULT_BUDGET).unwrap();
        assert_eq!(w.g_order_exp, 4);
        assert!(w.verified, "{w:?}");
        let w = witness_presentation11(5, 3, 2, 1, 0).unwrap();
        assert_eq!(w.g_order_exp, 7);
        assert!(w.verified, "{w:?}");
        // Non-canonical: a [b,a] = e collapses G to <b>, and the chain does not realise it.
        let w = witness_presentation11(5, 2, 2, 0, 0).unwrap();
        assert_eq!(w.g_order_exp, 2);
        assert!(!w.verified);
        assert!(witness_presentation11(3, 2, 1, 1, 0).is_err());
    }
}
