//! Right-hand-side syntax and equation systems.
//!
//! Right-hand sides are kept as syntax trees so that substitution and
//! syntactic dependence are available. Semantically an [`EquationSystem`] is
//! still the function `Val -> Val` given by [`EquationSystem::apply`].

use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet};
use std::fmt;
use std::sync::Arc;

use thiserror::Error;

use crate::lattice::{Element, FiniteLattice};

/// Default bound on the number of valuations an exhaustive check may enumerate.
pub const DEFAULT_MAX_VALUATIONS: u128 = 1_000_000;

/// Name of the Boolean negation operator registered on the Boolean lattice.
pub const NOT: &str = "not";

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EqsError {
    #[error("unknown operator `{0}`")]
    UnknownOp(String),
    #[error("operator `{op}` takes {expected} argument(s), got {found}")]
    ArityMismatch {
        op: String,
        expected: usize,
        found: usize,
    },
    #[error("unknown variable `{0}`")]
    UnknownVariable(String),
    #[error("variable `{0}` is defined more than once")]
    DuplicateVariable(String),
    #[error("element index {0} is outside the lattice")]
    ElementOutOfRange(usize),
    #[error("operator `{op}` needs a table of {expected} entries, got {found}")]
    TableSize {
        op: String,
        expected: usize,
        found: usize,
    },
    #[error("operator `{op}` is declared monotone but is not")]
    FalseMonotoneClaim { op: String },
    #[error("operator `{0}` is already registered")]
    DuplicateOp(String),
    #[error("exhaustive check needs {required} valuations, exceeding the guard of {limit}")]
    SizeGuardExceeded { required: u128, limit: u128 },
}

/// A variable name. Cheap to clone.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct VarName(Arc<str>);

impl VarName {
    pub fn new(name: &str) -> Self {
        VarName(Arc::from(name))
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Debug for VarName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl fmt::Display for VarName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl From<&str> for VarName {
    fn from(s: &str) -> Self {
        VarName::new(s)
    }
}

/// A right-hand side. `Meet([])` denotes the top and `Join([])` the bottom.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Expr {
    Const(Element),
    Var(VarName),
    Meet(Vec<Expr>),
    Join(Vec<Expr>),
    Apply(String, Vec<Expr>),
}

impl Expr {
    pub fn var(name: &str) -> Expr {
        Expr::Var(VarName::new(name))
    }

    pub fn and(a: Expr, b: Expr) -> Expr {
        Expr::Meet(vec![a, b])
    }

    pub fn or(a: Expr, b: Expr) -> Expr {
        Expr::Join(vec![a, b])
    }

    #[allow(clippy::should_implement_trait)]
    pub fn not(a: Expr) -> Expr {
        Expr::Apply(NOT.to_string(), vec![a])
    }

    pub fn children(&self) -> &[Expr] {
        match self {
            Expr::Const(_) | Expr::Var(_) => &[],
            Expr::Meet(xs) | Expr::Join(xs) | Expr::Apply(_, xs) => xs,
        }
    }

    /// Number of nodes in the tree.
    pub fn size(&self) -> usize {
        1 + self.children().iter().map(Expr::size).sum::<usize>()
    }

    pub fn free_vars(&self) -> BTreeSet<VarName> {
        let mut out = BTreeSet::new();
        self.collect_vars(&mut out);
        out
    }

    fn collect_vars(&self, out: &mut BTreeSet<VarName>) {
        match self {
            Expr::Var(v) => {
                out.insert(v.clone());
            }
            _ => self.children().iter().for_each(|c| c.collect_vars(out)),
        }
    }

    pub fn mentions(&self, v: &VarName) -> bool {
        match self {
            Expr::Var(w) => w == v,
            _ => self.children().iter().any(|c| c.mentions(v)),
        }
    }

    /// Replaces every occurrence of `y` by `d`.
    pub fn subst(&self, y: &VarName, d: &Expr) -> Expr {
        match self {
            Expr::Var(v) if v == y => d.clone(),
            Expr::Const(_) | Expr::Var(_) => self.clone(),
            Expr::Meet(xs) => Expr::Meet(xs.iter().map(|x| x.subst(y, d)).collect()),
            Expr::Join(xs) => Expr::Join(xs.iter().map(|x| x.subst(y, d)).collect()),
            Expr::Apply(op, xs) => {
                Expr::Apply(op.clone(), xs.iter().map(|x| x.subst(y, d)).collect())
            }
        }
    }

    /// True when only constants, variables, meets, joins and operators from
    /// `monotone_ops` occur.
    pub fn is_structurally_monotone(&self, ops: &OpRegistry) -> bool {
        match self {
            Expr::Apply(op, xs) => {
                ops.get(op).is_some_and(|o| o.monotone)
                    && xs.iter().all(|x| x.is_structurally_monotone(ops))
            }
            _ => self
                .children()
                .iter()
                .all(|x| x.is_structurally_monotone(ops)),
        }
    }
}

/// A registered operator, given by its table over `carrier^arity`.
///
/// Arguments are combined into a table index with the first argument most
/// significant.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Operator {
    pub name: String,
    pub arity: usize,
    pub table: Vec<Element>,
    pub monotone: bool,
}

impl Operator {
    pub fn apply(&self, n: usize, args: &[Element]) -> Element {
        let idx = args.iter().fold(0usize, |acc, a| acc * n + a.index());
        self.table[idx]
    }
}

/// The operators available to a system's right-hand sides.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct OpRegistry {
    ops: BTreeMap<String, Operator>,
}

impl OpRegistry {
    /// The operators every system over `lattice` gets: Boolean negation on
    /// the Boolean lattice, nothing otherwise.
    pub fn standard(lattice: &FiniteLattice) -> Self {
        let mut reg = OpRegistry::default();
        if lattice.is_bool() {
            reg.ops.insert(
                NOT.to_string(),
                Operator {
                    name: NOT.to_string(),
                    arity: 1,
                    table: vec![lattice.top(), lattice.bottom()],
                    monotone: false,
                },
            );
        }
        reg
    }

    /// Registers a table operator. A claim of monotonicity is verified.
    pub fn register(
        &mut self,
        lattice: &FiniteLattice,
        name: &str,
        arity: usize,
        table: Vec<Element>,
        claims_monotone: bool,
    ) -> Result<(), EqsError> {
        if self.ops.contains_key(name) {
            return Err(EqsError::DuplicateOp(name.to_string()));
        }
        let n = lattice.len();
        let expected = n.pow(arity as u32);
        if table.len() != expected {
            return Err(EqsError::TableSize {
                op: name.to_string(),
                expected,
                found: table.len(),
            });
        }
        if let Some(bad) = table.iter().find(|e| e.index() >= n) {
            return Err(EqsError::ElementOutOfRange(bad.index()));
        }
        let op = Operator {
            name: name.to_string(),
            arity,
            table,
            monotone: claims_monotone,
        };
        if claims_monotone && !operator_is_monotone(lattice, &op) {
            return Err(EqsError::FalseMonotoneClaim {
                op: name.to_string(),
            });
        }
        self.ops.insert(name.to_string(), op);
        Ok(())
    }

    pub fn get(&self, name: &str) -> Option<&Operator> {
        self.ops.get(name)
    }

    pub fn iter(&self) -> impl Iterator<Item = &Operator> {
        self.ops.values()
    }

    /// Operators other than the standard ones, in name order.
    pub fn custom(&self) -> impl Iterator<Item = &Operator> {
        self.ops.values().filter(|o| o.name != NOT)
    }

    fn position(&self, name: &str) -> Option<usize> {
        self.ops.keys().position(|k| k == name)
    }
}

/// Checks monotonicity one argument and one covering step at a time.
fn operator_is_monotone(lattice: &FiniteLattice, op: &Operator) -> bool {
    let n = lattice.len();
    let covers = lattice.covers();
    let total = n.pow(op.arity as u32);
    let mut args = vec![Element::from_index(0); op.arity];
    for idx in 0..total {
        let mut rest = idx;
        for slot in args.iter_mut().rev() {
            *slot = Element::from_index(rest % n);
            rest /= n;
        }
        let here = op.apply(n, &args);
        for pos in 0..op.arity {
            for &(lo, hi) in &covers {
                if args[pos] != lo {
                    continue;
                }
                let mut up = args.clone();
                up[pos] = hi;
                if !lattice.leq(here, op.apply(n, &up)) {
                    return false;
                }
            }
        }
    }
    true
}

/// A total assignment of lattice elements to a system's variables, indexed
/// in the system's variable order.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Valuation(Vec<Element>);

impl Valuation {
    pub fn new(values: Vec<Element>) -> Self {
        Valuation(values)
    }

    pub fn constant(len: usize, e: Element) -> Self {
        Valuation(vec![e; len])
    }

    pub fn get(&self, i: usize) -> Element {
        self.0[i]
    }

    pub fn set(&mut self, i: usize, e: Element) {
        self.0[i] = e;
    }

    /// `self[i := e]`
    pub fn with(&self, i: usize, e: Element) -> Self {
        let mut v = self.clone();
        v.0[i] = e;
        v
    }

    pub fn values(&self) -> &[Element] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Pointwise order.
    pub fn leq(&self, lattice: &FiniteLattice, other: &Valuation) -> bool {
        self.0
            .iter()
            .zip(&other.0)
            .all(|(&a, &b)| lattice.leq(a, b))
    }

    /// Agreement on the given variable indices.
    pub fn agrees_on(&self, other: &Valuation, vars: impl IntoIterator<Item = usize>) -> bool {
        vars.into_iter().all(|i| self.0[i] == other.0[i])
    }
}

/// Enumerates `n^len` valuations in mixed-radix order, the last variable
/// varying fastest.
pub fn enumerate_valuations(n: usize, len: usize) -> impl Iterator<Item = Valuation> {
    let total = (n as u128).pow(len as u32);
    (0..total).map(move |mut idx| {
        let mut vals = vec![Element::from_index(0); len];
        for slot in vals.iter_mut().rev() {
            *slot = Element::from_index((idx % n as u128) as usize);
            idx /= n as u128;
        }
        Valuation(vals)
    })
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum Compiled {
    Const(Element),
    Var(usize),
    Meet(Vec<Compiled>),
    Join(Vec<Compiled>),
    Apply(usize, Vec<Compiled>),
}

/// An equation system: one right-hand side per variable over a shared lattice.
#[derive(Clone)]
pub struct EquationSystem {
    lattice: Arc<FiniteLattice>,
    ops: Arc<OpRegistry>,
    op_list: Arc<Vec<Operator>>,
    vars: Vec<VarName>,
    index: HashMap<VarName, usize>,
    rhs: Vec<Expr>,
    compiled: Vec<Compiled>,
}

impl fmt::Debug for EquationSystem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut m = f.debug_map();
        for (v, e) in self.vars.iter().zip(&self.rhs) {
            m.entry(v, &self.display(e).to_string());
        }
        m.finish()
    }
}

impl PartialEq for EquationSystem {
    fn eq(&self, other: &Self) -> bool {
        *self.lattice == *other.lattice
            && *self.ops == *other.ops
            && self.vars == other.vars
            && self.rhs == other.rhs
    }
}

impl Eq for EquationSystem {}

impl EquationSystem {
    pub fn new(
        lattice: Arc<FiniteLattice>,
        ops: Arc<OpRegistry>,
        equations: Vec<(VarName, Expr)>,
    ) -> Result<Self, EqsError> {
        let mut index = HashMap::new();
        for (i, (v, _)) in equations.iter().enumerate() {
            if index.insert(v.clone(), i).is_some() {
                return Err(EqsError::DuplicateVariable(v.to_string()));
            }
        }
        let op_list: Vec<Operator> = ops.iter().cloned().collect();
        let (vars, rhs): (Vec<_>, Vec<_>) = equations.into_iter().unzip();
        let mut es = EquationSystem {
            lattice,
            ops,
            op_list: Arc::new(op_list),
            vars,
            index,
            rhs,
            compiled: Vec::new(),
        };
        es.compiled = es
            .rhs
            .iter()
            .map(|e| es.compile(e))
            .collect::<Result<_, _>>()?;
        Ok(es)
    }

    /// Convenience constructor using the standard operators of `lattice`.
    pub fn with_standard_ops(
        lattice: Arc<FiniteLattice>,
        equations: Vec<(VarName, Expr)>,
    ) -> Result<Self, EqsError> {
        let ops = Arc::new(OpRegistry::standard(&lattice));
        Self::new(lattice, ops, equations)
    }

    fn compile(&self, e: &Expr) -> Result<Compiled, EqsError> {
        Ok(match e {
            Expr::Const(c) => {
                if c.index() >= self.lattice.len() {
                    return Err(EqsError::ElementOutOfRange(c.index()));
                }
                Compiled::Const(*c)
            }
            Expr::Var(v) => Compiled::Var(
                self.var_index(v)
                    .ok_or_else(|| EqsError::UnknownVariable(v.to_string()))?,
            ),
            Expr::Meet(xs) => Compiled::Meet(
                xs.iter()
                    .map(|x| self.compile(x))
                    .collect::<Result<_, _>>()?,
            ),
            Expr::Join(xs) => Compiled::Join(
                xs.iter()
                    .map(|x| self.compile(x))
                    .collect::<Result<_, _>>()?,
            ),
            Expr::Apply(name, xs) => {
                let pos = self
                    .ops
                    .position(name)
                    .ok_or_else(|| EqsError::UnknownOp(name.clone()))?;
                let arity = self.op_list[pos].arity;
                if arity != xs.len() {
                    return Err(EqsError::ArityMismatch {
                        op: name.clone(),
                        expected: arity,
                        found: xs.len(),
                    });
                }
                Compiled::Apply(
                    pos,
                    xs.iter()
                        .map(|x| self.compile(x))
                        .collect::<Result<_, _>>()?,
                )
            }
        })
    }

    fn run(&self, c: &Compiled, v: &[Element]) -> Element {
        let l = &*self.lattice;
        match c {
            Compiled::Const(e) => *e,
            Compiled::Var(i) => v[*i],
            Compiled::Meet(xs) => xs
                .iter()
                .fold(l.top(), |acc, x| l.meet(acc, self.run(x, v))),
            Compiled::Join(xs) => xs
                .iter()
                .fold(l.bottom(), |acc, x| l.join(acc, self.run(x, v))),
            Compiled::Apply(op, xs) => {
                let args: Vec<Element> = xs.iter().map(|x| self.run(x, v)).collect();
                self.op_list[*op].apply(l.len(), &args)
            }
        }
    }

    pub fn lattice(&self) -> &FiniteLattice {
        &self.lattice
    }

    pub fn lattice_arc(&self) -> &Arc<FiniteLattice> {
        &self.lattice
    }

    pub fn ops(&self) -> &OpRegistry {
        &self.ops
    }

    pub fn ops_arc(&self) -> &Arc<OpRegistry> {
        &self.ops
    }

    pub fn vars(&self) -> &[VarName] {
        &self.vars
    }

    pub fn len(&self) -> usize {
        self.vars.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vars.is_empty()
    }

    pub fn var_index(&self, v: &VarName) -> Option<usize> {
        self.index.get(v).copied()
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.index.get(&VarName::new(name)).copied()
    }

    pub fn rhs(&self, i: usize) -> &Expr {
        &self.rhs[i]
    }

    pub fn rhs_of(&self, v: &VarName) -> Option<&Expr> {
        self.var_index(v).map(|i| &self.rhs[i])
    }

    pub fn equations(&self) -> impl Iterator<Item = (&VarName, &Expr)> {
        self.vars.iter().zip(&self.rhs)
    }

    /// A copy with the right-hand side of variable `i` replaced.
    pub fn with_rhs(&self, i: usize, e: Expr) -> Result<Self, EqsError> {
        let compiled = self.compile(&e)?;
        let mut out = self.clone();
        out.rhs[i] = e;
        out.compiled[i] = compiled;
        Ok(out)
    }

    /// Evaluates an arbitrary expression under `v`.
    pub fn eval(&self, e: &Expr, v: &Valuation) -> Result<Element, EqsError> {
        Ok(self.run(&self.compile(e)?, v.values()))
    }

    /// `E_X(v)` for the variable at index `i`.
    pub fn eval_var(&self, i: usize, v: &Valuation) -> Element {
        self.run(&self.compiled[i], v.values())
    }

    /// The system as a function on valuations.
    pub fn apply(&self, v: &Valuation) -> Valuation {
        Valuation(
            self.compiled
                .iter()
                .map(|c| self.run(c, v.values()))
                .collect(),
        )
    }

    pub fn bottom_valuation(&self) -> Valuation {
        Valuation::constant(self.len(), self.lattice.bottom())
    }

    pub fn top_valuation(&self) -> Valuation {
        Valuation::constant(self.len(), self.lattice.top())
    }

    /// Number of valuations, `|U|^|vars|`.
    pub fn valuation_count(&self) -> u128 {
        (self.lattice.len() as u128)
            .checked_pow(self.len() as u32)
            .unwrap_or(u128::MAX)
    }

    pub fn all_valuations(&self, limit: u128) -> Result<impl Iterator<Item = Valuation>, EqsError> {
        let required = self.valuation_count();
        if required > limit {
            return Err(EqsError::SizeGuardExceeded { required, limit });
        }
        Ok(enumerate_valuations(self.lattice.len(), self.len()))
    }

    /// Monotonicity certificate by syntax: no non-monotone operator occurs.
    pub fn is_structurally_monotone(&self) -> bool {
        self.rhs
            .iter()
            .all(|e| e.is_structurally_monotone(&self.ops))
    }

    /// `None` if the system is monotone, otherwise a pair `lo <= hi` with
    /// `E(lo) </= E(hi)`. Uses the structural certificate when available.
    pub fn non_monotone_witness(
        &self,
        limit: u128,
    ) -> Result<Option<(Valuation, Valuation)>, EqsError> {
        if self.is_structurally_monotone() {
            return Ok(None);
        }
        self.exhaustive_monotone_witness(limit)
    }

    pub fn is_monotone(&self, limit: u128) -> Result<bool, EqsError> {
        Ok(self.non_monotone_witness(limit)?.is_none())
    }

    /// Enumerative monotonicity check. The extreme pair (all-bottom, all-top)
    /// is tried first; after that every single-variable covering step, which
    /// decides monotonicity by transitivity.
    pub fn exhaustive_monotone_witness(
        &self,
        limit: u128,
    ) -> Result<Option<(Valuation, Valuation)>, EqsError> {
        let l = &*self.lattice;
        let (lo, hi) = (self.bottom_valuation(), self.top_valuation());
        if !self.apply(&lo).leq(l, &self.apply(&hi)) {
            return Ok(Some((lo, hi)));
        }
        let covers = l.covers();
        for v in self.all_valuations(limit)? {
            let here = self.apply(&v);
            for i in 0..self.len() {
                for &(a, b) in covers.iter().filter(|(a, _)| *a == v.get(i)) {
                    debug_assert_eq!(a, v.get(i));
                    let up = v.with(i, b);
                    if !here.leq(l, &self.apply(&up)) {
                        return Ok(Some((v, up)));
                    }
                }
            }
        }
        Ok(None)
    }

    /// Semantics-preserving cleanup of an expression.
    ///
    /// Flattens nested meets and joins, folds constants, drops neutral
    /// elements, removes duplicates and applies absorption. On the Boolean
    /// lattice it also uses `x & !x = bot`, `x | !x = top`, `!!x = x` and the
    /// case split `(c & R) | (!c & R) = R`.
    pub fn simplify(&self, e: &Expr) -> Expr {
        let mut cur = e.clone();
        // each pass only shrinks the tree, so this terminates well before the cap
        for _ in 0..64 {
            let next = self.simplify_once(&cur);
            if next == cur {
                break;
            }
            cur = next;
        }
        cur
    }

    fn simplify_once(&self, e: &Expr) -> Expr {
        let l = &*self.lattice;
        match e {
            Expr::Const(_) | Expr::Var(_) => e.clone(),
            Expr::Apply(op, xs) => {
                let args: Vec<Expr> = xs.iter().map(|x| self.simplify_once(x)).collect();
                if let Some(o) = self.ops.get(op) {
                    let consts: Option<Vec<Element>> = args
                        .iter()
                        .map(|a| match a {
                            Expr::Const(c) => Some(*c),
                            _ => None,
                        })
                        .collect();
                    if let Some(cs) = consts {
                        if cs.len() == o.arity {
                            return Expr::Const(o.apply(l.len(), &cs));
                        }
                    }
                }
                if op == NOT && l.is_bool() && args.len() == 1 {
                    if let Expr::Apply(inner, ys) = &args[0] {
                        if inner == NOT && ys.len() == 1 {
                            return ys[0].clone();
                        }
                    }
                }
                Expr::Apply(op.clone(), args)
            }
            Expr::Meet(xs) => self.simplify_lattice_op(xs, true),
            Expr::Join(xs) => self.simplify_lattice_op(xs, false),
        }
    }

    /// Shared meet/join simplification; `meet` selects the operation.
    fn simplify_lattice_op(&self, xs: &[Expr], meet: bool) -> Expr {
        let l = &*self.lattice;
        let (neutral, absorbing) = if meet {
            (l.top(), l.bottom())
        } else {
            (l.bottom(), l.top())
        };
        let combine = |a, b| if meet { l.meet(a, b) } else { l.join(a, b) };

        let mut flat = Vec::new();
        let mut acc = neutral;
        for x in xs.iter().map(|x| self.simplify_once(x)) {
            match x {
                Expr::Meet(ys) if meet => flat.extend(ys),
                Expr::Join(ys) if !meet => flat.extend(ys),
                other => flat.push(other),
            }
        }
        let mut kept: Vec<Expr> = Vec::new();
        let mut seen = HashSet::new();
        for x in flat {
            match x {
                Expr::Const(c) => acc = combine(acc, c),
                other => {
                    if seen.insert(other.clone()) {
                        kept.push(other);
                    }
                }
            }
        }
        if acc == absorbing {
            return Expr::Const(absorbing);
        }

        // absorption: a & (a | b) = a, a | (a & b) = a
        let snapshot = kept.clone();
        kept.retain(|x| {
            let inner = match (meet, x) {
                (true, Expr::Join(ys)) | (false, Expr::Meet(ys)) => ys,
                _ => return true,
            };
            !snapshot.iter().any(|y| y != x && inner.contains(y))
        });

        if l.is_bool() {
            let complementary = kept.iter().any(|x| kept.contains(&Expr::not(x.clone())));
            if complementary {
                return Expr::Const(absorbing);
            }
            if !meet {
                kept = case_split(kept);
            }
        }

        if acc != neutral {
            kept.push(Expr::Const(acc));
        }
        match kept.len() {
            0 => Expr::Const(neutral),
            1 => kept.pop().expect("one element"),
            _ if meet => Expr::Meet(kept),
            _ => Expr::Join(kept),
        }
    }

    /// Printable form of `e` using this system's lattice labels.
    pub fn display<'a>(&'a self, e: &'a Expr) -> ExprDisplay<'a> {
        ExprDisplay {
            lattice: &self.lattice,
            expr: e,
        }
    }
}

/// Replaces a pair of join operands `c & R` and `!c & R` by `R`.
fn case_split(mut kept: Vec<Expr>) -> Vec<Expr> {
    let conjuncts = |e: &Expr| -> Vec<Expr> {
        match e {
            Expr::Meet(ys) => ys.clone(),
            other => vec![other.clone()],
        }
    };
    for i in 0..kept.len() {
        for j in 0..kept.len() {
            if i == j {
                continue;
            }
            let (a, b) = (conjuncts(&kept[i]), conjuncts(&kept[j]));
            if a.len() != b.len() {
                continue;
            }
            for (k, c) in a.iter().enumerate() {
                let neg = Expr::not(c.clone());
                let Some(m) = b.iter().position(|y| *y == neg) else {
                    continue;
                };
                let mut rest_a: Vec<Expr> = a.clone();
                rest_a.remove(k);
                let mut rest_b: Vec<Expr> = b.clone();
                rest_b.remove(m);
                let same = rest_a.len() == rest_b.len()
                    && rest_a.iter().all(|x| rest_b.contains(x))
                    && rest_b.iter().all(|x| rest_a.contains(x));
                if same {
                    let merged = match rest_a.len() {
                        0 => Expr::Meet(Vec::new()),
                        1 => rest_a.pop().expect("one element"),
                        _ => Expr::Meet(rest_a),
                    };
                    let (lo, hi) = if i < j { (i, j) } else { (j, i) };
                    kept.remove(hi);
                    kept[lo] = merged;
                    return kept;
                }
            }
        }
    }
    kept
}

/// Formats an element as an expression literal.
pub fn element_literal(lattice: &FiniteLattice, e: Element) -> String {
    if e == lattice.top() {
        return "top".to_string();
    }
    if e == lattice.bottom() {
        return "bot".to_string();
    }
    let label = lattice.label(e);
    let plain_int = !label.is_empty() && label.bytes().all(|b| b.is_ascii_digit());
    if plain_int || label.starts_with('{') {
        label.to_string()
    } else {
        format!("'{label}'")
    }
}

/// Concrete syntax for an [`Expr`]; `!` binds tighter than `&`, which binds
/// tighter than `|`. Trees print so that parsing reproduces them exactly.
pub struct ExprDisplay<'a> {
    pub lattice: &'a FiniteLattice,
    pub expr: &'a Expr,
}

impl ExprDisplay<'_> {
    fn write(&self, f: &mut fmt::Formatter<'_>, e: &Expr) -> fmt::Result {
        match e {
            Expr::Const(c) => f.write_str(&element_literal(self.lattice, *c)),
            Expr::Var(v) => write!(f, "{v}"),
            Expr::Meet(xs) | Expr::Join(xs) if xs.len() < 2 => {
                let kw = if matches!(e, Expr::Meet(_)) {
                    "meet"
                } else {
                    "join"
                };
                write!(f, "{kw}(")?;
                for (i, x) in xs.iter().enumerate() {
                    if i > 0 {
                        f.write_str(", ")?;
                    }
                    self.write(f, x)?;
                }
                f.write_str(")")
            }
            Expr::Meet(xs) => {
                for (i, x) in xs.iter().enumerate() {
                    if i > 0 {
                        f.write_str(" & ")?;
                    }
                    let wrap = matches!(x, Expr::Meet(ys) | Expr::Join(ys) if ys.len() >= 2);
                    self.write_wrapped(f, x, wrap)?;
                }
                Ok(())
            }
            Expr::Join(xs) => {
                for (i, x) in xs.iter().enumerate() {
                    if i > 0 {
                        f.write_str(" | ")?;
                    }
                    let wrap = matches!(x, Expr::Join(ys) if ys.len() >= 2);
                    self.write_wrapped(f, x, wrap)?;
                }
                Ok(())
            }
            Expr::Apply(op, xs) if op == NOT && xs.len() == 1 => {
                f.write_str("!")?;
                let wrap = matches!(&xs[0], Expr::Meet(ys) | Expr::Join(ys) if ys.len() >= 2);
                self.write_wrapped(f, &xs[0], wrap)
            }
            Expr::Apply(op, xs) => {
                write!(f, "op({op}")?;
                for x in xs {
                    f.write_str(", ")?;
                    self.write(f, x)?;
                }
                f.write_str(")")
            }
        }
    }

    fn write_wrapped(&self, f: &mut fmt::Formatter<'_>, e: &Expr, wrap: bool) -> fmt::Result {
        if wrap {
            f.write_str("(")?;
            self.write(f, e)?;
            f.write_str(")")
        } else {
            self.write(f, e)
        }
    }
}

impl fmt::Display for ExprDisplay<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.write(f, self.expr)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::DEFAULT_MAX_ELEMENTS;

    fn v(s: &str) -> Expr {
        Expr::var(s)
    }

    fn bool_es(eqs: Vec<(&str, Expr)>) -> EquationSystem {
        let l = Arc::new(FiniteLattice::bool());
        EquationSystem::with_standard_ops(
            l,
            eqs.into_iter().map(|(n, e)| (VarName::new(n), e)).collect(),
        )
        .unwrap()
    }

    /// The non-monotone system X = Y & Z, Y = X | Z, Z = !X.
    fn exeqs() -> EquationSystem {
        bool_es(vec![
            ("X", Expr::and(v("Y"), v("Z"))),
            ("Y", Expr::or(v("X"), v("Z"))),
            ("Z", Expr::not(v("X"))),
        ])
    }

    fn b(es: &EquationSystem, bits: &[bool]) -> Valuation {
        let l = es.lattice();
        Valuation::new(
            bits.iter()
                .map(|&t| if t { l.top() } else { l.bottom() })
                .collect(),
        )
    }

    #[test]
    fn eval_examples() {
        let es = exeqs();
        let top = es.top_valuation();
        assert_eq!(es.eval(&v("X"), &top).unwrap(), es.lattice().top());
        let bot = es.bottom_valuation();
        assert_eq!(es.eval(es.rhs(0), &bot).unwrap(), es.lattice().bottom());
        assert_eq!(es.eval(es.rhs(2), &bot).unwrap(), es.lattice().top());
        assert_eq!(
            es.eval(&Expr::Apply("nope".into(), vec![]), &bot),
            Err(EqsError::UnknownOp("nope".into()))
        );
        assert!(matches!(
            es.eval(&Expr::Apply(NOT.into(), vec![v("X"), v("Y")]), &bot),
            Err(EqsError::ArityMismatch { .. })
        ));
    }

    #[test]
    fn apply_examples() {
        let es = exeqs();
        assert_eq!(
            es.apply(&b(&es, &[false; 3])),
            b(&es, &[false, false, true])
        );
        assert_eq!(es.apply(&b(&es, &[true; 3])), b(&es, &[true, true, false]));
        let l = Arc::new(FiniteLattice::chain(3).unwrap());
        let c1 = Element::from_index(1);
        let es = EquationSystem::with_standard_ops(
            l,
            vec![("A".into(), Expr::Const(c1)), ("B".into(), Expr::Const(c1))],
        )
        .unwrap();
        for val in es.all_valuations(100).unwrap() {
            assert_eq!(es.apply(&val), Valuation::constant(2, c1));
        }
    }

    #[test]
    fn exeqs_is_not_monotone_with_extreme_witness() {
        let es = exeqs();
        let (lo, hi) = es
            .non_monotone_witness(DEFAULT_MAX_VALUATIONS)
            .unwrap()
            .unwrap();
        assert_eq!(lo, b(&es, &[false; 3]));
        assert_eq!(hi, b(&es, &[true; 3]));
        assert_eq!(es.apply(&lo), b(&es, &[false, false, true]));
        assert_eq!(es.apply(&hi), b(&es, &[true, true, false]));
    }

    #[test]
    fn negation_free_systems_are_certified() {
        let es = bool_es(vec![("X", Expr::or(v("X"), v("Y"))), ("Y", v("X"))]);
        assert!(es.is_structurally_monotone());
        assert!(es.is_monotone(DEFAULT_MAX_VALUATIONS).unwrap());
        assert_eq!(es.exhaustive_monotone_witness(100).unwrap(), None);
    }

    #[test]
    fn non_certified_but_monotone_system() {
        // !!X is monotone even though it mentions negation
        let es = bool_es(vec![("X", Expr::not(Expr::not(v("X"))))]);
        assert!(!es.is_structurally_monotone());
        assert!(es.is_monotone(DEFAULT_MAX_VALUATIONS).unwrap());
    }

    #[test]
    fn size_guard_on_exhaustive_check() {
        let l = Arc::new(FiniteLattice::bool());
        let eqs = (0..30)
            .map(|i| {
                (
                    VarName::new(&format!("V{i}")),
                    Expr::not(Expr::not(v("V0"))),
                )
            })
            .collect();
        let es = EquationSystem::with_standard_ops(l, eqs).unwrap();
        assert!(matches!(
            es.is_monotone(DEFAULT_MAX_VALUATIONS),
            Err(EqsError::SizeGuardExceeded { .. })
        ));
    }

    #[test]
    fn free_vars_examples() {
        let names =
            |e: &Expr| -> Vec<String> { e.free_vars().iter().map(|x| x.to_string()).collect() };
        assert_eq!(names(&Expr::and(v("Y"), v("Z"))), vec!["Y", "Z"]);
        assert!(Expr::Const(Element::from_index(1)).free_vars().is_empty());
        assert_eq!(
            names(&Expr::or(v("X"), Expr::and(v("Y"), v("X")))),
            vec!["X", "Y"]
        );
    }

    #[test]
    fn subst_examples() {
        let e = Expr::or(v("X"), v("Z"));
        let d = Expr::and(v("Y"), v("X"));
        assert_eq!(
            e.subst(&"Z".into(), &d),
            Expr::or(v("X"), Expr::and(v("Y"), v("X")))
        );
        assert_eq!(e.subst(&"Z".into(), &v("Z")), e);
        let c = Expr::Const(Element::from_index(0));
        assert_eq!(c.subst(&"Z".into(), &d), c);
    }

    #[test]
    fn simplify_examples() {
        let es = bool_es(vec![
            ("X", v("X")),
            ("Y", v("Y")),
            ("b", v("b")),
            ("Xb", v("Xb")),
        ]);
        let absorb = Expr::or(v("Y"), Expr::and(v("Y"), v("X")));
        assert_eq!(es.simplify(&absorb), v("Y"));
        let top = Expr::Const(es.lattice().top());
        assert_eq!(es.simplify(&Expr::and(v("X"), top.clone())), v("X"));
        // (b & Y) | ((!b & Y) | Xb)  ==  Y | Xb
        let pbes = Expr::or(
            Expr::and(v("b"), v("Y")),
            Expr::or(Expr::and(Expr::not(v("b")), v("Y")), v("Xb")),
        );
        assert_eq!(es.simplify(&pbes), Expr::or(v("Y"), v("Xb")));
        assert_eq!(es.simplify(&Expr::not(Expr::not(v("X")))), v("X"));
        let bot = Expr::Const(es.lattice().bottom());
        assert_eq!(es.simplify(&Expr::and(v("X"), Expr::not(v("X")))), bot);
        assert_eq!(es.simplify(&Expr::and(v("Y"), bot.clone())), bot);
        assert_eq!(es.simplify(&Expr::Meet(vec![])), top);
        assert_eq!(es.simplify(&Expr::Join(vec![v("X"), v("X")])), v("X"));
    }

    #[test]
    fn simplify_general_lattice_keeps_semantics() {
        let l = Arc::new(FiniteLattice::diamond());
        let a = Expr::Const(l.element("a").unwrap());
        let bb = Expr::Const(l.element("b").unwrap());
        let es = EquationSystem::with_standard_ops(
            l.clone(),
            vec![("X".into(), v("X")), ("Y".into(), v("Y"))],
        )
        .unwrap();
        let e = Expr::Join(vec![
            Expr::and(a.clone(), v("X")),
            Expr::Meet(vec![a.clone(), bb.clone()]),
            Expr::or(v("Y"), Expr::and(v("Y"), v("X"))),
        ]);
        let s = es.simplify(&e);
        assert!(s.size() < e.size());
        for val in es.all_valuations(100).unwrap() {
            assert_eq!(es.eval(&e, &val), es.eval(&s, &val));
        }
        // a & b folds to bot, which a join drops
        assert_eq!(es.simplify(&Expr::or(Expr::and(a, bb), v("X"))), v("X"));
    }

    #[test]
    fn operator_registration_checks_claims() {
        let l = FiniteLattice::powerset(2, DEFAULT_MAX_ELEMENTS).unwrap();
        let e = Element::from_index;
        // swapping d1 and d2 is monotone
        let swap = vec![e(0), e(2), e(1), e(3)];
        let mut reg = OpRegistry::standard(&l);
        reg.register(&l, "swap", 1, swap, true).unwrap();
        // complement is not
        let compl = vec![e(3), e(2), e(1), e(0)];
        assert_eq!(
            reg.register(&l, "compl", 1, compl.clone(), true),
            Err(EqsError::FalseMonotoneClaim { op: "compl".into() })
        );
        reg.register(&l, "compl", 1, compl, false).unwrap();
        assert!(matches!(
            reg.register(&l, "short", 2, vec![e(0)], false),
            Err(EqsError::TableSize { .. })
        ));
        assert!(matches!(
            reg.register(&l, "swap", 1, vec![e(0); 4], false),
            Err(EqsError::DuplicateOp(_))
        ));
    }

    #[test]
    fn system_validation() {
        let l = Arc::new(FiniteLattice::bool());
        assert!(matches!(
            EquationSystem::with_standard_ops(l.clone(), vec![("X".into(), v("Q"))]),
            Err(EqsError::UnknownVariable(_))
        ));
        assert!(matches!(
            EquationSystem::with_standard_ops(
                l.clone(),
                vec![("X".into(), v("X")), ("X".into(), v("X"))]
            ),
            Err(EqsError::DuplicateVariable(_))
        ));
        assert!(matches!(
            EquationSystem::with_standard_ops(
                l,
                vec![("X".into(), Expr::Const(Element::from_index(5)))]
            ),
            Err(EqsError::ElementOutOfRange(5))
        ));
    }
}
