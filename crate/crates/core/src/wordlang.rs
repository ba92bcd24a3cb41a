//! Word language: `x2*x1`, `[b,a,a]^3`, `a^-1 b a`, plus GroupSpec JSON files.
//!
//! Grammar:
//! ```text
//! word := term { ("*" | WS) term }
//! term := atom [ "^" int ]
//! atom := NAME | "[" word { "," word } "]" | "(" word ")"
//! NAME := letter { letter | digit }
//! ```
//! The name `e` is reserved for the identity.

use std::collections::HashMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::collector::NormalForm;
use crate::error::{Error, Result};
use crate::hallbasis::{Variant, MAX_CLASS, MAX_RANK};

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum WordAst {
    Gen(String),
    Power(Box<WordAst>, i64),
    Product(Vec<WordAst>),
    /// Left-normed: `[a,b,c] = [[a,b],c]`.
    Bracket(Vec<WordAst>),
    Identity,
}

impl WordAst {
    pub fn gen(name: &str) -> Self {
        WordAst::Gen(name.to_string())
    }

    pub fn pow(self, n: i64) -> Self {
        WordAst::Power(Box::new(self), n)
    }

    /// Every generator name occurring in the word.
    pub fn names(&self) -> Vec<&str> {
        let mut out = Vec::new();
        self.collect_names(&mut out);
        out
    }

    fn collect_names<'a>(&'a self, out: &mut Vec<&'a str>) {
        match self {
            WordAst::Gen(n) => {
                if !out.contains(&n.as_str()) {
                    out.push(n)
                }
            }
            WordAst::Power(a, _) => a.collect_names(out),
            WordAst::Product(v) | WordAst::Bracket(v) => v.iter().for_each(|a| a.collect_names(out)),
            WordAst::Identity => {}
        }
    }
}

struct Parser<'a> {
    src: &'a [u8],
    pos: usize,
}

fn syntax(pos: usize, msg: impl Into<String>) -> Error {
    Error::Syntax { pos, msg: msg.into() }
}

impl<'a> Parser<'a> {
    fn skip_ws(&mut self) {
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&self) -> Option<u8> {
        self.src.get(self.pos).copied()
    }

    fn starts_atom(c: u8) -> bool {
        c.is_ascii_alphabetic() || c == b'[' || c == b'('
    }

    fn word(&mut self) -> Result<WordAst> {
        let mut terms = vec![self.term()?];
        loop {
            let before = self.pos;
            self.skip_ws();
            match self.peek() {
                Some(b'*') => {
                    self.pos += 1;
                    self.skip_ws();
                    terms.push(self.term()?);
                }
                Some(c) if Self::starts_atom(c) && self.pos > before => terms.push(self.term()?),
                Some(c) if Self::starts_atom(c) => {
                    return Err(syntax(self.pos, "expected `*` or whitespace between factors"))
                }
                _ => break,
            }
        }
        Ok(if terms.len() == 1 { terms.pop().unwrap() } else { WordAst::Product(terms) })
    }

    fn term(&mut self) -> Result<WordAst> {
        let atom = self.atom()?;
        if self.peek() == Some(b'^') {
            self.pos += 1;
            let n = self.int()?;
            if self.peek() == Some(b'^') {
                return Err(syntax(self.pos, "repeated exponent needs parentheses"));
            }
            Ok(atom.pow(n))
        } else {
            Ok(atom)
        }
    }

    fn int(&mut self) -> Result<i64> {
        let start = self.pos;
        if self.peek() == Some(b'-') {
            self.pos += 1;
        }
        let digits = self.pos;
        while self.peek().is_some_and(|c| c.is_ascii_digit()) {
            self.pos += 1;
        }
        if self.pos == digits {
            return Err(syntax(self.pos, "expected an integer exponent"));
        }
        let text = std::str::from_utf8(&self.src[start..self.pos]).unwrap();
        text.parse().map_err(|_| syntax(start, "exponent does not fit in 64 bits"))
    }

    fn atom(&mut self) -> Result<WordAst> {
        match self.peek() {
            Some(c) if c.is_ascii_alphabetic() => {
                let start = self.pos;
                while self.peek().is_some_and(|c| c.is_ascii_alphanumeric()) {
                    self.pos += 1;
                }
                let name = std::str::from_utf8(&self.src[start..self.pos]).unwrap();
                Ok(if name == "e" { WordAst::Identity } else { WordAst::gen(name) })
            }
            Some(b'[') => {
                let open = self.pos;
                self.pos += 1;
                self.skip_ws();
                if self.peek() == Some(b']') {
                    return Err(syntax(open, "empty bracket"));
                }
                let mut parts = vec![self.word()?];
                loop {
                    self.skip_ws();
                    match self.peek() {
                        Some(b',') => {
                            self.pos += 1;
                            self.skip_ws();
                            parts.push(self.word()?);
                        }
                        Some(b']') => {
                            self.pos += 1;
                            break;
                        }
                        None => return Err(syntax(open, "unbalanced `[`")),
                        _ => return Err(syntax(self.pos, "expected `,` or `]`")),
                    }
                }
                if parts.len() < 2 {
                    return Err(syntax(open, "a bracket needs at least two entries"));
                }
                Ok(WordAst::Bracket(parts))
            }
            Some(b'(') => {
                let open = self.pos;
                self.pos += 1;
                self.skip_ws();
                let w = self.word()?;
                self.skip_ws();
                match self.peek() {
                    Some(b')') => {
                        self.pos += 1;
                        Ok(w)
                    }
                    None => Err(syntax(open, "unbalanced `(`")),
                    _ => Err(syntax(self.pos, "expected `)`")),
                }
            }
            Some(c) => Err(syntax(self.pos, format!("unexpected `{}`", c as char))),
            None => Err(syntax(self.pos, "unexpected end of input")),
        }
    }
}

pub fn parse_word(text: &str) -> Result<WordAst> {
    let mut p = Parser { src: text.as_bytes(), pos: 0 };
    p.skip_ws();
    let w = p.word()?;
    p.skip_ws();
    if p.pos != p.src.len() {
        return Err(syntax(p.pos, "trailing input"));
    }
    Ok(w)
}

impl WordAst {
    fn fmt_atom(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            WordAst::Product(_) | WordAst::Power(..) => write!(f, "({self})"),
            _ => write!(f, "{self}"),
        }
    }

    fn fmt_term(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            WordAst::Product(_) => write!(f, "({self})"),
            _ => write!(f, "{self}"),
        }
    }
}

impl fmt::Display for WordAst {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            WordAst::Gen(n) => f.write_str(n),
            WordAst::Identity => f.write_str("e"),
            WordAst::Power(a, n) => {
                a.fmt_atom(f)?;
                write!(f, "^{n}")
            }
            WordAst::Product(v) => {
                for (i, t) in v.iter().enumerate() {
                    if i > 0 {
                        f.write_str(" ")?;
                    }
                    t.fmt_term(f)?;
                }
                Ok(())
            }
            WordAst::Bracket(v) => {
                f.write_str("[")?;
                for (i, t) in v.iter().enumerate() {
                    if i > 0 {
                        f.write_str(",")?;
                    }
                    write!(f, "{t}")?;
                }
                f.write_str("]")
            }
        }
    }
}

pub fn format_word(w: &WordAst) -> String {
    w.to_string()
}

pub fn format_normal_form(nf: &NormalForm) -> String {
    let parts: Vec<String> = nf
        .exps
        .iter()
        .enumerate()
        .filter(|(_, &e)| e != 0)
        .map(|(i, &e)| {
            let name = nf.basis.render_entry(i);
            if e == 1 {
                name
            } else {
                format!("{name}^{e}")
            }
        })
        .collect();
    if parts.is_empty() {
        "e".to_string()
    } else {
        parts.join(" ")
    }
}

/// A group in which words can be evaluated.
pub trait WordGroup {
    type Elem: Clone;
    fn identity(&self) -> Self::Elem;
    fn mul(&self, a: &Self::Elem, b: &Self::Elem) -> Self::Elem;
    fn pow(&self, a: &Self::Elem, n: i64) -> Self::Elem;

    fn comm(&self, a: &Self::Elem, b: &Self::Elem) -> Self::Elem {
        let ab = self.mul(a, b);
        let ba = self.mul(b, a);
        self.mul(&self.pow(&ba, -1), &ab)
    }
}

/// Parse `xN` as a zero-based generator index below `rank`.
pub fn generator_alias(name: &str, rank: usize) -> Option<usize> {
    let digits = name.strip_prefix('x')?;
    if digits.is_empty() || digits.starts_with('0') || !digits.bytes().all(|c| c.is_ascii_digit()) {
        return None;
    }
    let i: usize = digits.parse().ok()?;
    (1..=rank).contains(&i).then(|| i - 1)
}

pub fn evaluate<G: WordGroup>(
    g: &G,
    w: &WordAst,
    lookup: &dyn Fn(&str) -> Option<G::Elem>,
) -> Result<G::Elem> {
    Ok(match w {
        WordAst::Gen(n) => lookup(n).ok_or_else(|| Error::UnboundName(n.clone()))?,
        WordAst::Identity => g.identity(),
        WordAst::Power(a, n) => g.pow(&evaluate(g, a, lookup)?, *n),
        WordAst::Product(v) => {
            let mut acc = g.identity();
            for t in v {
                acc = g.mul(&acc, &evaluate(g, t, lookup)?);
            }
            acc
        }
        WordAst::Bracket(v) => {
            if v.len() < 2 {
                return Err(Error::InvalidParameter("bracket with fewer than two entries".into()));
            }
            let mut acc = evaluate(g, &v[0], lookup)?;
            for t in &v[1..] {
                acc = g.comm(&acc, &evaluate(g, t, lookup)?);
            }
            acc
        }
    })
}

/// Evaluate with `x1..xr` bound to `gens`, and any extra names from `assignment`.
pub fn evaluate_with_aliases<G: WordGroup>(
    g: &G,
    w: &WordAst,
    gens: &[G::Elem],
    assignment: &HashMap<String, G::Elem>,
) -> Result<G::Elem> {
    let lookup = |n: &str| {
        assignment
            .get(n)
            .cloned()
            .or_else(|| generator_alias(n, gens.len()).map(|i| gens[i].clone()))
    };
    evaluate(g, w, &lookup)
}

/// Parameters of the two-generator class-two presentation
/// `a^{p^α} = b^{p^β} = [b,a]^{p^γ} = e`, `a^{p^{α+σ−γ}} [b,a]^{p^σ} = e`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Presentation11 {
    pub alpha: u32,
    pub beta: u32,
    pub gamma: u32,
    pub sigma: u32,
}

impl Presentation11 {
    pub fn new(alpha: u32, beta: u32, gamma: u32, sigma: u32) -> Self {
        Presentation11 { alpha, beta, gamma, sigma }
    }

    /// Checks the constraints the presentation needs to make sense.
    /// The normalising inequality `alpha + sigma >= 2 gamma` is separate, see [`Self::canonical_violation`].
    pub fn validate(&self, prime: u64) -> Result<()> {
        crate::arith::check_prime(prime)?;
        let Presentation11 { alpha, beta, gamma, sigma } = *self;
        let fail = |m: String| Err(Error::Spec(m));
        if prime == 2 {
            return fail("presentation11 needs an odd prime".into());
        }
        if gamma < 1 {
            return fail(format!("presentation11 needs gamma >= 1 (gamma = {gamma})"));
        }
        if beta < gamma {
            return fail(format!("presentation11 needs beta >= gamma ({beta} < {gamma})"));
        }
        if sigma > gamma {
            return fail(format!("presentation11 needs gamma >= sigma ({gamma} < {sigma})"));
        }
        if alpha + sigma < gamma {
            return fail(format!("presentation11 needs alpha + sigma >= gamma ({alpha} + {sigma} < {gamma})"));
        }
        if sigma == gamma && alpha < beta {
            return fail(format!("presentation11 with sigma = gamma needs alpha >= beta ({alpha} < {beta})"));
        }
        Ok(())
    }

    /// Parameters outside the range where the presentation is in normal form.
    pub fn canonical_violation(&self) -> Option<String> {
        let Presentation11 { alpha, gamma, sigma, .. } = *self;
        (alpha + sigma < 2 * gamma).then(|| {
            format!("alpha + sigma >= 2 gamma fails ({alpha} + {sigma} < {}); the parameters are not canonical", 2 * gamma)
        })
    }

    pub fn validate_canonical(&self, prime: u64) -> Result<()> {
        self.validate(prime)?;
        match self.canonical_violation() {
            Some(m) => Err(Error::Spec(m)),
            None => Ok(()),
        }
    }

    /// The two defining relators, with `a = x1` and `b = x2`.
    pub fn relators(&self, prime: u64) -> Result<Vec<WordAst>> {
        let pw = |e: u32| -> Result<i64> {
            i64::try_from(crate::arith::prime_power(prime, e)?)
                .map_err(|_| Error::Spec("relator exponent overflows".into()))
        };
        let ba = WordAst::Bracket(vec![WordAst::gen("x2"), WordAst::gen("x1")]);
        let r1 = ba.clone().pow(pw(self.gamma)?);
        let r2 = WordAst::Product(vec![
            WordAst::gen("x1").pow(pw(self.alpha + self.sigma - self.gamma)?),
            ba.pow(pw(self.sigma)?),
        ]);
        Ok(vec![r1, r2])
    }
}

/// Declarative description of a finite group: the `class`-nilpotent product of cyclic
/// groups of orders `prime^orders[i]`, optionally divided by extra relators.
#[derive(Debug, Clone, PartialEq)]
pub struct GroupSpec {
    pub prime: u64,
    pub class: usize,
    pub orders: Vec<u32>,
    pub variant: Variant,
    pub relators: Vec<WordAst>,
    pub presentation11: Option<Presentation11>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSpec {
    prime: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    class: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    orders: Option<Vec<u32>>,
    #[serde(default)]
    variant: Variant,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    relators: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    presentation11: Option<Presentation11>,
}

impl GroupSpec {
    pub fn nilprod(prime: u64, class: usize, orders: &[u32]) -> Self {
        GroupSpec {
            prime,
            class,
            orders: orders.to_vec(),
            variant: Variant::Standard,
            relators: Vec::new(),
            presentation11: None,
        }
    }

    pub fn with_variant(mut self, variant: Variant) -> Self {
        self.variant = variant;
        self
    }

    pub fn with_relators(mut self, relators: Vec<WordAst>) -> Self {
        self.relators = relators;
        self
    }

    pub fn presentation11(prime: u64, params: Presentation11) -> Self {
        GroupSpec {
            presentation11: Some(params),
            ..GroupSpec::nilprod(prime, 2, &[params.alpha, params.beta])
        }
    }

    pub fn rank(&self) -> usize {
        self.orders.len()
    }

    /// Extra relators plus those implied by `presentation11`.
    pub fn all_relators(&self) -> Result<Vec<WordAst>> {
        let mut out = self.relators.clone();
        if let Some(p11) = &self.presentation11 {
            out.extend(p11.relators(self.prime)?);
        }
        Ok(out)
    }

    pub fn validate(&self) -> Result<()> {
        let fail = |m: String| Err(Error::Spec(m));
        crate::arith::check_prime(self.prime)?;
        if !(1..=MAX_CLASS).contains(&self.class) {
            return fail(format!("class must lie in 1..={MAX_CLASS}, got {}", self.class));
        }
        if self.orders.is_empty() || self.orders.len() > MAX_RANK {
            return fail(format!("need between 1 and {MAX_RANK} orders, got {}", self.orders.len()));
        }
        for (i, &a) in self.orders.iter().enumerate() {
            if a == 0 {
                return fail(format!("orders[{i}] must be at least 1"));
            }
            crate::arith::prime_power(self.prime, a)
                .map_err(|_| Error::Spec(format!("{}^{a} does not fit in 64 bits", self.prime)))?;
        }
        match self.variant {
            Variant::K3p2 => {
                if self.prime != 2 || self.class != 3 {
                    return fail("variant k3p2 needs prime 2 and class 3".into());
                }
            }
            Variant::Standard => {
                if self.prime < self.class as u64 {
                    return fail(format!(
                        "the standard basis needs prime >= class ({} < {})",
                        self.prime, self.class
                    ));
                }
            }
        }
        for (i, r) in self.relators.iter().enumerate() {
            if let Some(n) = r.names().into_iter().find(|n| generator_alias(n, self.rank()).is_none()) {
                return fail(format!("relator {i} uses `{n}`; only x1..x{} are bound", self.rank()));
            }
        }
        if let Some(p11) = &self.presentation11 {
            p11.validate(self.prime)?;
            if self.class != 2 {
                return fail(format!("presentation11 has class 2, not {}", self.class));
            }
            if self.orders != [p11.alpha, p11.beta] {
                return fail(format!(
                    "presentation11 fixes orders to [{}, {}], got {:?}",
                    p11.alpha, p11.beta, self.orders
                ));
            }
            if self.variant != Variant::Standard {
                return fail("presentation11 uses the standard variant".into());
            }
        }
        Ok(())
    }

    pub fn to_json(&self) -> String {
        let raw = RawSpec {
            prime: self.prime,
            class: Some(self.class),
            orders: Some(self.orders.clone()),
            variant: self.variant,
            relators: self.relators.iter().map(format_word).collect(),
            presentation11: self.presentation11,
        };
        serde_json::to_string(&raw).expect("spec serialises")
    }
}

impl Serialize for GroupSpec {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let v: serde_json::Value = serde_json::from_str(&self.to_json()).map_err(serde::ser::Error::custom)?;
        v.serialize(s)
    }
}

pub fn parse_group_spec(text: &str) -> Result<GroupSpec> {
    let raw: RawSpec = serde_json::from_str(text).map_err(|e| Error::Spec(e.to_string()))?;
    let (class, orders) = match (&raw.presentation11, raw.class, raw.orders) {
        (_, Some(c), Some(o)) => (c, o),
        (Some(p11), c, o) => (c.unwrap_or(2), o.unwrap_or_else(|| vec![p11.alpha, p11.beta])),
        (None, None, _) => return Err(Error::Spec("missing field `class`".into())),
        (None, _, None) => return Err(Error::Spec("missing field `orders`".into())),
    };
    let mut relators = Vec::with_capacity(raw.relators.len());
    for (i, r) in raw.relators.iter().enumerate() {
        relators.push(parse_word(r).map_err(|e| Error::Spec(format!("relator {i}: {e}")))?);
    }
    let spec = GroupSpec {
        prime: raw.prime,
        class,
        orders,
        variant: raw.variant,
        relators,
        presentation11: raw.presentation11,
    };
    spec.validate()?;
    Ok(spec)
}

impl WordGroup for crate::collector::PcGroup {
    type Elem = crate::collector::PcElem;

    fn identity(&self) -> Self::Elem {
        crate::collector::PcGroup::identity(self)
    }

    fn mul(&self, a: &Self::Elem, b: &Self::Elem) -> Self::Elem {
        crate::collector::PcGroup::mul(self, a, b)
    }

    fn pow(&self, a: &Self::Elem, n: i64) -> Self::Elem {
        crate::collector::PcGroup::pow(self, a, n)
    }

    fn comm(&self, a: &Self::Elem, b: &Self::Elem) -> Self::Elem {
        crate::collector::PcGroup::comm(self, a, b)
    }
}

impl crate::collector::Collector {
    /// Evaluate a word; `x1..xr` name the generators and `assignment` may bind more names.
    pub fn evaluate_word(&self, w: &WordAst, assignment: &HashMap<String, NormalForm>) -> Result<NormalForm> {
        let gens: Vec<_> = (0..self.rank()).map(|i| self.pc().generator(i)).collect();
        let mut bound = HashMap::with_capacity(assignment.len());
        for (k, v) in assignment {
            bound.insert(k.clone(), self.to_pc(v)?);
        }
        let x = evaluate_with_aliases(self.pc(), w, &gens, &bound)?;
        self.from_pc(&x)
    }
}
