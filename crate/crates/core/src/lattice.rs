//! Finite complete lattices and the two extremal fixpoint operators.
//!
//! A [`FiniteLattice`] is an explicitly enumerated carrier together with its
//! order relation. Every lattice handed out by this module has been verified:
//! the relation is a partial order and every subset has a greatest lower bound.
//! Unverified carriers live in [`Poset`], whose [`Poset::verify`] reports every
//! violation it finds.
//!
//! Fixpoints come in two flavours. [`FiniteLattice::fix_def`] takes the glb of
//! all pre-fixpoints (lub of post-fixpoints for `nu`) and is defined for every
//! function, monotone or not. [`FiniteLattice::fix_iter`] is Kleene iteration
//! from the bottom (top) and is only valid for monotone functions.

use std::collections::HashMap;
use std::fmt;

use thiserror::Error;

/// Default bound on the number of carrier elements a constructed lattice may have.
pub const DEFAULT_MAX_ELEMENTS: usize = 4096;

/// Precomputed meet/join tables are kept only up to this carrier size.
const TABLE_LIMIT: usize = 512;

/// An element of a [`FiniteLattice`], identified by its index in the carrier.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Element(u32);

impl Element {
    pub fn from_index(index: usize) -> Self {
        Element(index as u32)
    }

    pub fn index(self) -> usize {
        self.0 as usize
    }
}

/// Fixpoint sign: least (`Mu`) or greatest (`Nu`).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Sign {
    Mu,
    Nu,
}

impl Sign {
    pub fn flipped(self) -> Sign {
        match self {
            Sign::Mu => Sign::Nu,
            Sign::Nu => Sign::Mu,
        }
    }

    pub fn keyword(self) -> &'static str {
        match self {
            Sign::Mu => "mu",
            Sign::Nu => "nu",
        }
    }
}

impl fmt::Display for Sign {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.keyword())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum LatticeError {
    #[error("not a complete lattice: {}", format_violations(.0))]
    NotALattice(Vec<Violation>),
    #[error("lattice would have {size} elements, exceeding the size guard of {limit}")]
    SizeGuardExceeded { size: u128, limit: usize },
    #[error("function table has {found} entries, expected {expected}")]
    TableSize { expected: usize, found: usize },
    #[error("non-monotone function detected during fixpoint iteration: {0}")]
    NonMonotoneDetected(String),
}

fn format_violations(v: &[Violation]) -> String {
    v.iter()
        .map(|x| x.to_string())
        .collect::<Vec<_>>()
        .join("; ")
}

/// A reason why a carrier with a relation fails to be a complete lattice.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Violation {
    EmptyCarrier,
    DuplicateElement(String),
    NotReflexive(String),
    NotAntisymmetric(String, String),
    NotTransitive(String, String, String),
    /// The listed subset has no greatest lower bound (empty list: no top).
    NoGlb(Vec<String>),
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::EmptyCarrier => write!(f, "empty carrier"),
            Violation::DuplicateElement(a) => write!(f, "duplicate element {a}"),
            Violation::NotReflexive(a) => write!(f, "not reflexive at {a}"),
            Violation::NotAntisymmetric(a, b) => {
                write!(f, "not anti-symmetric: {a} <= {b} and {b} <= {a}")
            }
            Violation::NotTransitive(a, b, c) => {
                write!(f, "not transitive: {a} <= {b} <= {c} but not {a} <= {c}")
            }
            Violation::NoGlb(s) => write!(f, "no glb for {{{}}}", s.join(",")),
        }
    }
}

/// How a lattice was built. Used to print lattice declarations back out.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum LatticeDecl {
    Bool,
    Chain(usize),
    Powerset(usize),
    Diamond,
    Product(Box<LatticeDecl>, Box<LatticeDecl>),
    /// Anything else; printed by listing elements and covering pairs.
    Finite,
}

/// An unverified carrier with an order relation.
#[derive(Debug, Clone)]
pub struct Poset {
    pub labels: Vec<String>,
    leq: Vec<bool>,
}

impl Poset {
    pub fn new(labels: Vec<String>, leq: impl Fn(usize, usize) -> bool) -> Self {
        let n = labels.len();
        let mut rel = vec![false; n * n];
        for a in 0..n {
            for b in 0..n {
                rel[a * n + b] = leq(a, b);
            }
        }
        Poset { labels, leq: rel }
    }

    /// Builds the reflexive-transitive closure of the given covering pairs.
    pub fn from_covers(labels: Vec<String>, covers: &[(usize, usize)]) -> Self {
        let n = labels.len();
        let mut rel = vec![false; n * n];
        for i in 0..n {
            rel[i * n + i] = true;
        }
        for &(a, b) in covers {
            rel[a * n + b] = true;
        }
        // Warshall
        for k in 0..n {
            for i in 0..n {
                if rel[i * n + k] {
                    for j in 0..n {
                        if rel[k * n + j] {
                            rel[i * n + j] = true;
                        }
                    }
                }
            }
        }
        Poset { labels, leq: rel }
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn leq(&self, a: usize, b: usize) -> bool {
        self.leq[a * self.len() + b]
    }

    /// All ways in which this poset fails to be a complete lattice.
    ///
    /// Existence of glbs is checked for the empty set and for every pair;
    /// on a finite carrier that covers every subset.
    pub fn verify(&self) -> Vec<Violation> {
        let n = self.len();
        let mut out = Vec::new();
        if n == 0 {
            out.push(Violation::EmptyCarrier);
            return out;
        }
        let mut seen = HashMap::new();
        for l in &self.labels {
            if seen.insert(l.as_str(), ()).is_some() {
                out.push(Violation::DuplicateElement(l.clone()));
            }
        }
        for a in 0..n {
            if !self.leq(a, a) {
                out.push(Violation::NotReflexive(self.labels[a].clone()));
            }
        }
        for a in 0..n {
            for b in a + 1..n {
                if self.leq(a, b) && self.leq(b, a) {
                    out.push(Violation::NotAntisymmetric(
                        self.labels[a].clone(),
                        self.labels[b].clone(),
                    ));
                }
            }
        }
        for a in 0..n {
            for b in 0..n {
                if !self.leq(a, b) {
                    continue;
                }
                for c in 0..n {
                    if self.leq(b, c) && !self.leq(a, c) {
                        out.push(Violation::NotTransitive(
                            self.labels[a].clone(),
                            self.labels[b].clone(),
                            self.labels[c].clone(),
                        ));
                    }
                }
            }
        }
        if !out.is_empty() {
            return out;
        }
        if self.greatest_lower_bound(&[]).is_none() {
            out.push(Violation::NoGlb(Vec::new()));
        }
        for a in 0..n {
            for b in a + 1..n {
                if self.greatest_lower_bound(&[a, b]).is_none() {
                    out.push(Violation::NoGlb(vec![
                        self.labels[a].clone(),
                        self.labels[b].clone(),
                    ]));
                }
            }
        }
        out
    }

    fn greatest_lower_bound(&self, set: &[usize]) -> Option<usize> {
        let n = self.len();
        let lower: Vec<usize> = (0..n)
            .filter(|&y| set.iter().all(|&x| self.leq(y, x)))
            .collect();
        lower
            .iter()
            .copied()
            .find(|&g| lower.iter().all(|&z| self.leq(z, g)))
    }
}

/// A verified finite complete lattice.
#[derive(Clone)]
pub struct FiniteLattice {
    name: String,
    decl: LatticeDecl,
    labels: Vec<String>,
    by_label: HashMap<String, Element>,
    leq: Vec<u64>,
    meet: Option<Vec<u32>>,
    join: Option<Vec<u32>>,
    bottom: Element,
    top: Element,
}

impl fmt::Debug for FiniteLattice {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("FiniteLattice")
            .field("name", &self.name)
            .field("elements", &self.labels)
            .finish()
    }
}

impl PartialEq for FiniteLattice {
    fn eq(&self, other: &Self) -> bool {
        self.labels == other.labels && self.leq == other.leq
    }
}

impl Eq for FiniteLattice {}

impl FiniteLattice {
    /// Verifies `poset` and turns it into a lattice.
    pub fn from_poset(
        name: impl Into<String>,
        decl: LatticeDecl,
        poset: Poset,
    ) -> Result<Self, LatticeError> {
        let violations = poset.verify();
        if !violations.is_empty() {
            return Err(LatticeError::NotALattice(violations));
        }
        Ok(Self::build_unchecked(name.into(), decl, poset))
    }

    fn build_unchecked(name: String, decl: LatticeDecl, poset: Poset) -> Self {
        let n = poset.len();
        let words = (n * n).div_ceil(64);
        let mut leq = vec![0u64; words];
        for a in 0..n {
            for b in 0..n {
                if poset.leq(a, b) {
                    let bit = a * n + b;
                    leq[bit / 64] |= 1 << (bit % 64);
                }
            }
        }
        let by_label = poset
            .labels
            .iter()
            .enumerate()
            .map(|(i, l)| (l.clone(), Element::from_index(i)))
            .collect();
        let mut lattice = FiniteLattice {
            name,
            decl,
            labels: poset.labels,
            by_label,
            leq,
            meet: None,
            join: None,
            bottom: Element(0),
            top: Element(0),
        };
        lattice.bottom = lattice.scan_bound(|l, y, c| l.leq(y, c), None);
        lattice.top = lattice.scan_bound(|l, y, c| l.leq(c, y), None);
        if n <= TABLE_LIMIT {
            let mut meet = vec![0u32; n * n];
            let mut join = vec![0u32; n * n];
            for a in 0..n {
                for b in 0..n {
                    let (ea, eb) = (Element::from_index(a), Element::from_index(b));
                    meet[a * n + b] = lattice.scan_meet(ea, eb).0;
                    join[a * n + b] = lattice.scan_join(ea, eb).0;
                }
            }
            lattice.meet = Some(meet);
            lattice.join = Some(join);
        }
        lattice
    }

    /// Returns the element `g` such that `better(g, y)` holds for every
    /// candidate `y`; candidates are restricted by `filter` when given.
    fn scan_bound(
        &self,
        better: impl Fn(&Self, Element, Element) -> bool,
        filter: Option<&dyn Fn(Element) -> bool>,
    ) -> Element {
        let mut cur: Option<Element> = None;
        for y in self.elements() {
            if let Some(f) = filter {
                if !f(y) {
                    continue;
                }
            }
            cur = match cur {
                None => Some(y),
                Some(c) if better(self, y, c) => Some(y),
                keep => keep,
            };
        }
        cur.expect("verified lattice has the requested bound")
    }

    fn scan_meet(&self, a: Element, b: Element) -> Element {
        // the glb is above every lower bound, so a single pass ending on it suffices
        let lower = |y: Element| self.leq(y, a) && self.leq(y, b);
        self.scan_bound(|l, y, c| l.leq(c, y), Some(&lower))
    }

    fn scan_join(&self, a: Element, b: Element) -> Element {
        let upper = |y: Element| self.leq(a, y) && self.leq(b, y);
        self.scan_bound(|l, y, c| l.leq(y, c), Some(&upper))
    }

    pub fn bool() -> Self {
        let poset = Poset::new(vec!["false".into(), "true".into()], |a, b| a <= b);
        Self::build_unchecked("bool".into(), LatticeDecl::Bool, poset)
    }

    /// The chain `0 < 1 < ... < n-1`. `n` must be at least one.
    pub fn chain(n: usize) -> Result<Self, LatticeError> {
        let labels = (0..n).map(|i| i.to_string()).collect();
        Self::from_poset(
            format!("chain {n}"),
            LatticeDecl::Chain(n),
            Poset::new(labels, |a, b| a <= b),
        )
    }

    /// The four-element lattice `bot < a, b < top` with `a`, `b` incomparable.
    pub fn diamond() -> Self {
        let labels = vec!["bot".into(), "a".into(), "b".into(), "top".into()];
        let poset = Poset::from_covers(labels, &[(0, 1), (0, 2), (1, 3), (2, 3)]);
        Self::build_unchecked("diamond".into(), LatticeDecl::Diamond, poset)
    }

    /// Subsets of `{d1, ..., dk}` ordered by inclusion.
    pub fn powerset(k: usize, max_elements: usize) -> Result<Self, LatticeError> {
        let domain: Vec<String> = (1..=k).map(|i| format!("d{i}")).collect();
        let mut l = Self::function_lattice(&domain, &Self::bool(), max_elements)?;
        l.name = format!("powerset {k}");
        l.decl = LatticeDecl::Powerset(k);
        Ok(l)
    }

    /// The order reversed; glb and lub swap roles.
    pub fn dual(&self) -> Self {
        let poset = Poset::new(self.labels.clone(), |a, b| {
            self.leq(Element::from_index(b), Element::from_index(a))
        });
        Self::build_unchecked(format!("dual({})", self.name), LatticeDecl::Finite, poset)
    }

    /// Cartesian product ordered componentwise. Element `(x, y)` has index
    /// `x * |l2| + y`.
    pub fn product(l1: &Self, l2: &Self, max_elements: usize) -> Result<Self, LatticeError> {
        let (n1, n2) = (l1.len(), l2.len());
        let size = n1 as u128 * n2 as u128;
        if size > max_elements as u128 {
            return Err(LatticeError::SizeGuardExceeded {
                size,
                limit: max_elements,
            });
        }
        let mut labels = Vec::with_capacity(n1 * n2);
        for a in 0..n1 {
            for b in 0..n2 {
                labels.push(format!("({},{})", l1.labels[a], l2.labels[b]));
            }
        }
        let poset = Poset::new(labels, |p, q| {
            l1.leq(Element::from_index(p / n2), Element::from_index(q / n2))
                && l2.leq(Element::from_index(p % n2), Element::from_index(q % n2))
        });
        Ok(Self::build_unchecked(
            format!("{} x {}", l1.name, l2.name),
            LatticeDecl::Product(Box::new(l1.decl.clone()), Box::new(l2.decl.clone())),
            poset,
        ))
    }

    /// All total maps `domain -> codomain`, ordered pointwise.
    ///
    /// A map `f` has index `sum_i f(d_i) * m^i` where `m = |codomain|`. Over the
    /// Boolean codomain elements are labelled as sets, e.g. `{d1,d3}`.
    pub fn function_lattice(
        domain: &[String],
        codomain: &Self,
        max_elements: usize,
    ) -> Result<Self, LatticeError> {
        let m = codomain.len();
        let k = domain.len();
        let size = (m as u128).checked_pow(k as u32).unwrap_or(u128::MAX);
        if size > max_elements as u128 {
            return Err(LatticeError::SizeGuardExceeded {
                size,
                limit: max_elements,
            });
        }
        let size = size as usize;
        let digits = |mut idx: usize| -> Vec<usize> {
            let mut out = Vec::with_capacity(k);
            for _ in 0..k {
                out.push(idx % m);
                idx /= m;
            }
            out
        };
        let is_bool = codomain.decl == LatticeDecl::Bool;
        let labels = (0..size)
            .map(|idx| {
                let ds = digits(idx);
                if is_bool {
                    let members: Vec<&str> = domain
                        .iter()
                        .zip(&ds)
                        .filter(|(_, &v)| v == 1)
                        .map(|(d, _)| d.as_str())
                        .collect();
                    format!("{{{}}}", members.join(","))
                } else {
                    let parts: Vec<String> = domain
                        .iter()
                        .zip(&ds)
                        .map(|(d, &v)| format!("{d}={}", codomain.labels[v]))
                        .collect();
                    format!("[{}]", parts.join(","))
                }
            })
            .collect();
        let poset = Poset::new(labels, |p, q| {
            digits(p)
                .iter()
                .zip(digits(q))
                .all(|(&a, b)| codomain.leq(Element::from_index(a), Element::from_index(b)))
        });
        Ok(Self::build_unchecked(
            format!("{{{}}} -> {}", domain.join(","), codomain.name),
            LatticeDecl::Finite,
            poset,
        ))
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn decl(&self) -> &LatticeDecl {
        &self.decl
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn is_bool(&self) -> bool {
        self.decl == LatticeDecl::Bool
    }

    pub fn elements(&self) -> impl Iterator<Item = Element> + Clone {
        (0..self.len()).map(Element::from_index)
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn label(&self, e: Element) -> &str {
        &self.labels[e.index()]
    }

    pub fn element(&self, label: &str) -> Option<Element> {
        self.by_label.get(label).copied()
    }

    pub fn bottom(&self) -> Element {
        self.bottom
    }

    pub fn top(&self) -> Element {
        self.top
    }

    pub fn leq(&self, a: Element, b: Element) -> bool {
        let bit = a.index() * self.len() + b.index();
        self.leq[bit / 64] >> (bit % 64) & 1 == 1
    }

    pub fn meet(&self, a: Element, b: Element) -> Element {
        match &self.meet {
            Some(t) => Element(t[a.index() * self.len() + b.index()]),
            None => self.scan_meet(a, b),
        }
    }

    pub fn join(&self, a: Element, b: Element) -> Element {
        match &self.join {
            Some(t) => Element(t[a.index() * self.len() + b.index()]),
            None => self.scan_join(a, b),
        }
    }

    /// Greatest lower bound; the glb of the empty set is the top.
    pub fn glb(&self, set: impl IntoIterator<Item = Element>) -> Element {
        set.into_iter().fold(self.top, |acc, x| self.meet(acc, x))
    }

    /// Least upper bound; the lub of the empty set is the bottom.
    pub fn lub(&self, set: impl IntoIterator<Item = Element>) -> Element {
        set.into_iter()
            .fold(self.bottom, |acc, x| self.join(acc, x))
    }

    /// Covering pairs `(a, b)`: `a < b` with nothing strictly between.
    pub fn covers(&self) -> Vec<(Element, Element)> {
        let mut out = Vec::new();
        for a in self.elements() {
            for b in self.elements() {
                if a == b || !self.leq(a, b) {
                    continue;
                }
                let between = self
                    .elements()
                    .any(|c| c != a && c != b && self.leq(a, c) && self.leq(c, b));
                if !between {
                    out.push((a, b));
                }
            }
        }
        out
    }

    /// Length of the longest chain, counted in covering steps.
    pub fn height(&self) -> usize {
        // elements are not necessarily topologically indexed, so relax repeatedly
        let mut depth = vec![1usize; self.len()];
        let covers = self.covers();
        for _ in 0..self.len() {
            let mut changed = false;
            for &(a, b) in &covers {
                if depth[b.index()] < depth[a.index()] + 1 {
                    depth[b.index()] = depth[a.index()] + 1;
                    changed = true;
                }
            }
            if !changed {
                break;
            }
        }
        depth.into_iter().max().unwrap_or(1) - 1
    }

    /// Elements sorted so that `a < b` implies `a` comes first.
    pub fn linear_extension(&self) -> Vec<Element> {
        let mut order: Vec<Element> = self.elements().collect();
        // the number of strict lower bounds is strictly monotone along <
        order.sort_by_key(|&e| self.elements().filter(|&d| self.leq(d, e)).count());
        order
    }

    /// `Some((x, y))` with `x <= y` but not `f(x) <= f(y)`, or `None` if `f` is monotone.
    pub fn non_monotone_witness(&self, f: &UnaryFn) -> Option<(Element, Element)> {
        for x in self.elements() {
            for y in self.elements() {
                if self.leq(x, y) && !self.leq(f.apply(x), f.apply(y)) {
                    return Some((x, y));
                }
            }
        }
        None
    }

    pub fn is_monotone(&self, f: &UnaryFn) -> bool {
        self.non_monotone_witness(f).is_none()
    }

    /// Fixpoint by definition: glb of pre-fixpoints for `mu`, lub of
    /// post-fixpoints for `nu`. Valid for every function.
    pub fn fix_def(&self, sign: Sign, f: &UnaryFn) -> Element {
        match sign {
            Sign::Mu => self.glb(self.elements().filter(|&x| self.leq(f.apply(x), x))),
            Sign::Nu => self.lub(self.elements().filter(|&x| self.leq(x, f.apply(x)))),
        }
    }

    pub fn mu_def(&self, f: &UnaryFn) -> Element {
        self.fix_def(Sign::Mu, f)
    }

    pub fn nu_def(&self, f: &UnaryFn) -> Element {
        self.fix_def(Sign::Nu, f)
    }

    /// Kleene iteration from the bottom (`mu`) or top (`nu`).
    ///
    /// Fails if the iterates stop moving in one direction or do not stabilise
    /// within `|carrier|` steps; either means `f` is not monotone.
    pub fn fix_iter(&self, sign: Sign, f: &UnaryFn) -> Result<Element, LatticeError> {
        let mut x = match sign {
            Sign::Mu => self.bottom,
            Sign::Nu => self.top,
        };
        for _ in 0..=self.len() {
            let next = f.apply(x);
            if next == x {
                return Ok(x);
            }
            let ordered = match sign {
                Sign::Mu => self.leq(x, next),
                Sign::Nu => self.leq(next, x),
            };
            if !ordered {
                return Err(LatticeError::NonMonotoneDetected(format!(
                    "iterate {} is followed by incomparable or backward step {}",
                    self.label(x),
                    self.label(next)
                )));
            }
            x = next;
        }
        Err(LatticeError::NonMonotoneDetected(format!(
            "no fixpoint within {} steps",
            self.len()
        )))
    }

    pub fn mu_iter(&self, f: &UnaryFn) -> Result<Element, LatticeError> {
        self.fix_iter(Sign::Mu, f)
    }

    pub fn nu_iter(&self, f: &UnaryFn) -> Result<Element, LatticeError> {
        self.fix_iter(Sign::Nu, f)
    }

    /// Takes the fixpoint through iteration when `f` is monotone and by
    /// definition otherwise.
    pub fn fix(&self, sign: Sign, f: &UnaryFn) -> Element {
        if self.is_monotone(f) {
            self.fix_iter(sign, f)
                .expect("iteration converges on monotone functions")
        } else {
            self.fix_def(sign, f)
        }
    }

    /// Covering pairs printable as `order a < b` clauses.
    pub fn cover_labels(&self) -> Vec<(String, String)> {
        self.covers()
            .into_iter()
            .map(|(a, b)| (self.label(a).to_string(), self.label(b).to_string()))
            .collect()
    }
}

/// A total unary function on a lattice's carrier, stored as a table.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct UnaryFn {
    table: Vec<Element>,
}

impl UnaryFn {
    pub fn new(table: Vec<Element>) -> Self {
        UnaryFn { table }
    }

    pub fn from_fn(lattice: &FiniteLattice, f: impl Fn(Element) -> Element) -> Self {
        UnaryFn {
            table: lattice.elements().map(f).collect(),
        }
    }

    pub fn identity(lattice: &FiniteLattice) -> Self {
        Self::from_fn(lattice, |x| x)
    }

    pub fn constant(lattice: &FiniteLattice, c: Element) -> Self {
        Self::from_fn(lattice, |_| c)
    }

    pub fn apply(&self, x: Element) -> Element {
        self.table[x.index()]
    }

    pub fn table(&self) -> &[Element] {
        &self.table
    }

    pub fn compose(&self, inner: &UnaryFn) -> UnaryFn {
        UnaryFn {
            table: inner.table.iter().map(|&x| self.apply(x)).collect(),
        }
    }
}

/// A total binary function on a lattice's carrier.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct BinaryFn {
    size: usize,
    table: Vec<Element>,
}

impl BinaryFn {
    pub fn new(size: usize, table: Vec<Element>) -> Result<Self, LatticeError> {
        if table.len() != size * size {
            return Err(LatticeError::TableSize {
                expected: size * size,
                found: table.len(),
            });
        }
        Ok(BinaryFn { size, table })
    }

    pub fn from_fn(lattice: &FiniteLattice, f: impl Fn(Element, Element) -> Element) -> Self {
        let n = lattice.len();
        let mut table = Vec::with_capacity(n * n);
        for x in lattice.elements() {
            for y in lattice.elements() {
                table.push(f(x, y));
            }
        }
        BinaryFn { size: n, table }
    }

    pub fn apply(&self, x: Element, y: Element) -> Element {
        self.table[x.index() * self.size + y.index()]
    }

    /// `y -> H(x, y)` for fixed `x`.
    pub fn fix_left(&self, x: Element) -> UnaryFn {
        UnaryFn {
            table: (0..self.size)
                .map(|y| self.apply(x, Element::from_index(y)))
                .collect(),
        }
    }

    /// `x -> H(x, y)` for fixed `y`.
    pub fn fix_right(&self, y: Element) -> UnaryFn {
        UnaryFn {
            table: (0..self.size)
                .map(|x| self.apply(Element::from_index(x), y))
                .collect(),
        }
    }

    /// `x -> H(x, x)`.
    pub fn diagonal(&self) -> UnaryFn {
        UnaryFn {
            table: (0..self.size)
                .map(|x| {
                    let e = Element::from_index(x);
                    self.apply(e, e)
                })
                .collect(),
        }
    }

    pub fn is_monotone(&self, lattice: &FiniteLattice) -> bool {
        for x1 in lattice.elements() {
            for x2 in lattice.elements().filter(|&x2| lattice.leq(x1, x2)) {
                for y1 in lattice.elements() {
                    for y2 in lattice.elements().filter(|&y2| lattice.leq(y1, y2)) {
                        if !lattice.leq(self.apply(x1, y1), self.apply(x2, y2)) {
                            return false;
                        }
                    }
                }
            }
        }
        true
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn e(i: usize) -> Element {
        Element::from_index(i)
    }

    /// Brute-force glb over lower bounds, independent of the meet tables.
    fn glb_oracle(l: &FiniteLattice, set: &[Element]) -> Option<Element> {
        let lower: Vec<Element> = l
            .elements()
            .filter(|&y| set.iter().all(|&x| l.leq(y, x)))
            .collect();
        lower
            .iter()
            .copied()
            .find(|&g| lower.iter().all(|&z| l.leq(z, g)))
    }

    #[test]
    fn bool_is_a_lattice() {
        let p = Poset::new(vec!["bot".into(), "top".into()], |a, b| a <= b);
        assert!(p.verify().is_empty());
    }

    #[test]
    fn antichain_without_bounds_is_rejected() {
        let p = Poset::new(vec!["a".into(), "b".into()], |a, b| a == b);
        let v = p.verify();
        assert!(v.contains(&Violation::NoGlb(vec!["a".into(), "b".into()])));
        assert!(v.contains(&Violation::NoGlb(vec![])));
    }

    #[test]
    fn diamond_every_subset_has_a_glb() {
        let d = FiniteLattice::diamond();
        let elems: Vec<Element> = d.elements().collect();
        for mask in 0u32..16 {
            let set: Vec<Element> = (0..4)
                .filter(|i| mask >> i & 1 == 1)
                .map(|i| elems[i])
                .collect();
            let g = glb_oracle(&d, &set).expect("diamond subset has glb");
            assert_eq!(d.glb(set.iter().copied()), g);
        }
    }

    #[test]
    fn order_violations_are_reported() {
        let p = Poset::new(vec!["a".into(), "b".into()], |_, _| true);
        assert!(p
            .verify()
            .contains(&Violation::NotAntisymmetric("a".into(), "b".into())));
        let p = Poset::new(vec!["a".into()], |_, _| false);
        assert_eq!(p.verify(), vec![Violation::NotReflexive("a".into())]);
        let p = Poset::new(vec!["a".into(), "a".into()], |x, y| x <= y);
        assert!(p
            .verify()
            .contains(&Violation::DuplicateElement("a".into())));
        let p = Poset::new(vec!["a".into(), "b".into(), "c".into()], |x, y| {
            x == y || (x == 0 && y == 1) || (x == 1 && y == 2)
        });
        assert!(matches!(p.verify()[0], Violation::NotTransitive(..)));
    }

    #[test]
    fn glb_and_lub_examples() {
        let b = FiniteLattice::bool();
        assert_eq!(b.glb([b.bottom(), b.top()]), b.bottom());
        assert_eq!(b.glb([]), b.top());
        assert_eq!(b.lub([]), b.bottom());
        let d = FiniteLattice::diamond();
        let (a, bb) = (d.element("a").unwrap(), d.element("b").unwrap());
        assert_eq!(d.glb([a, bb]), d.bottom());
        assert_eq!(d.lub([a, bb]), d.top());
        let c = FiniteLattice::chain(3).unwrap();
        assert_eq!(c.lub([e(0), e(1)]), e(1));
    }

    #[test]
    fn dual_examples() {
        let b = FiniteLattice::bool();
        let db = b.dual();
        assert_eq!(db.label(db.bottom()), "true");
        let d = FiniteLattice::diamond();
        assert_eq!(d.dual().dual(), d);
        let c = FiniteLattice::chain(4).unwrap();
        let dc = c.dual();
        assert_eq!(dc.glb([e(1), e(2)]), e(2));
        assert_eq!(dc.glb([e(1), e(2)]), c.lub([e(1), e(2)]));
    }

    #[test]
    fn product_examples() {
        let b = FiniteLattice::bool();
        let bb = FiniteLattice::product(&b, &b, DEFAULT_MAX_ELEMENTS).unwrap();
        assert_eq!(bb.len(), 4);
        assert_eq!(bb.covers().len(), 4);
        let tb = bb.element("(true,false)").unwrap();
        let bt = bb.element("(false,true)").unwrap();
        assert_eq!(bb.label(bb.glb([tb, bt])), "(false,false)");
        let c3 = FiniteLattice::chain(3).unwrap();
        let c2 = FiniteLattice::chain(2).unwrap();
        let p = FiniteLattice::product(&c3, &c2, DEFAULT_MAX_ELEMENTS).unwrap();
        assert_eq!(p.len(), 6);
        // longest chain (0,0) < (1,0) < (2,0) < (2,1)
        assert_eq!(p.height(), 3);
        let big = FiniteLattice::chain(100).unwrap();
        assert!(matches!(
            FiniteLattice::product(&big, &big, DEFAULT_MAX_ELEMENTS),
            Err(LatticeError::SizeGuardExceeded { .. })
        ));
    }

    #[test]
    fn function_lattice_examples() {
        let b = FiniteLattice::bool();
        let dom2 = vec!["d1".to_string(), "d2".to_string()];
        let f = FiniteLattice::function_lattice(&dom2, &b, DEFAULT_MAX_ELEMENTS).unwrap();
        assert_eq!(f.len(), 4);
        assert_eq!(f.label(f.bottom()), "{}");
        assert_eq!(f.label(f.top()), "{d1,d2}");

        // pointwise glb against set intersection on P({d1,d2,d3})
        let p3 = FiniteLattice::powerset(3, DEFAULT_MAX_ELEMENTS).unwrap();
        assert_eq!(p3.len(), 8);
        for x in p3.elements() {
            for y in p3.elements() {
                let inter = x.index() & y.index();
                assert_eq!(p3.meet(x, y).index(), inter);
                assert_eq!(p3.join(x, y).index(), x.index() | y.index());
            }
        }
        assert!(matches!(
            FiniteLattice::powerset(13, DEFAULT_MAX_ELEMENTS),
            Err(LatticeError::SizeGuardExceeded { .. })
        ));
    }

    #[test]
    fn fixpoint_examples() {
        let b = FiniteLattice::bool();
        let id = UnaryFn::identity(&b);
        assert_eq!(b.mu_def(&id), b.bottom());
        assert_eq!(b.nu_def(&id), b.top());
        assert_eq!(b.mu_def(&UnaryFn::constant(&b, b.top())), b.top());

        let c = FiniteLattice::chain(3).unwrap();
        let f = UnaryFn::new(vec![e(1), e(1), e(2)]);
        assert_eq!(c.mu_def(&f), e(1));
        assert_eq!(c.nu_def(&f), e(2));
        assert_eq!(c.mu_iter(&f).unwrap(), e(1));
        assert_eq!(c.nu_iter(&f).unwrap(), e(2));

        let d = FiniteLattice::diamond();
        let a = d.element("a").unwrap();
        assert_eq!(d.mu_iter(&UnaryFn::constant(&d, a)).unwrap(), a);
        assert_eq!(b.mu_iter(&id).unwrap(), b.bottom());
    }

    #[test]
    fn negation_is_not_monotone() {
        let b = FiniteLattice::bool();
        let neg = UnaryFn::new(vec![b.top(), b.bottom()]);
        assert_eq!(b.non_monotone_witness(&neg), Some((b.bottom(), b.top())));
        assert!(b.is_monotone(&UnaryFn::identity(&b)));
        assert!(b.mu_iter(&neg).is_err());
        // the definition still gives an answer
        assert_eq!(b.mu_def(&neg), b.top());
        assert_eq!(b.nu_def(&neg), b.bottom());
    }

    #[test]
    fn linear_extension_respects_order() {
        let p = FiniteLattice::powerset(3, DEFAULT_MAX_ELEMENTS).unwrap();
        let ext = p.linear_extension();
        for (i, &a) in ext.iter().enumerate() {
            for &b in &ext[..i] {
                assert!(!(p.leq(a, b) && a != b));
            }
        }
    }
}
