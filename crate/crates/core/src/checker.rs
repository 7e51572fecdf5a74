//! Randomized falsification of the fixpoint laws and the transformation
//! theorems, using the reference semantics as oracle.
//!
//! Every property draws its own cases from a generator that aims at the
//! property's hypotheses; draws that miss them are rejected and redrawn.
//! Failures are shrunk before they are reported.

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use thiserror::Error;

use crate::depgraph::{build_graph_on, indep_spec, split_by_dep, GraphMode};
use crate::eqs::{EquationSystem, Expr, Valuation, VarName};
use crate::lattice::{BinaryFn, Element, FiniteLattice, LatticeDecl, Poset, Sign, UnaryFn};
use crate::semantics::{sem, Fes, Spec};
use crate::syntax::{print, Document};
use crate::transforms::{
    apply_migrate, apply_partial, apply_sign_flip, apply_swap, apply_unfold, relation_holds,
    unfold_es, Relation, TransformOptions,
};

/// Rejected draws allowed per case before the case counts as starved.
pub const RETRY_CAP: usize = 10_000;
pub const MAX_VARS: usize = 7;
/// Instances are kept small enough that all valuations can be enumerated.
const MAX_VALUATIONS: u128 = 4096;

const NAMES: [&str; MAX_VARS] = ["X", "Y", "Z", "W", "V", "U", "T"];

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CheckError {
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("unknown property `{0}`")]
    UnknownProperty(String),
    #[error("unknown lattice family `{0}`")]
    UnknownFamily(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Family {
    Bool,
    Chain(usize),
    Powerset(usize),
    Diamond,
    /// `bool` times `chain 3`.
    Product,
}

impl Family {
    pub fn lattice(self) -> FiniteLattice {
        match self {
            Family::Bool => FiniteLattice::bool(),
            Family::Chain(k) => FiniteLattice::chain(k).expect("small chain"),
            Family::Powerset(k) => FiniteLattice::powerset(k, 64).expect("small powerset"),
            Family::Diamond => FiniteLattice::diamond(),
            Family::Product => FiniteLattice::product(
                &FiniteLattice::bool(),
                &FiniteLattice::chain(3).expect("chain"),
                64,
            )
            .expect("small product"),
        }
    }

    pub fn all() -> Vec<Family> {
        vec![
            Family::Bool,
            Family::Chain(3),
            Family::Diamond,
            Family::Powerset(2),
            Family::Product,
        ]
    }

    /// Parses a comma separated list such as `bool,chain3,diamond`.
    pub fn parse_list(s: &str) -> Result<Vec<Family>, CheckError> {
        let s = s.trim();
        if s == "all" {
            return Ok(Family::all());
        }
        s.split(',').map(str::parse).collect()
    }
}

impl FromStr for Family {
    type Err = CheckError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let t: String = s
            .chars()
            .filter(|c| !c.is_whitespace() && *c != ':')
            .collect();
        let bad = || CheckError::UnknownFamily(s.trim().to_string());
        let num = |rest: &str, default: usize| -> Result<usize, CheckError> {
            if rest.is_empty() {
                Ok(default)
            } else {
                rest.parse().map_err(|_| bad())
            }
        };
        if t == "bool" {
            Ok(Family::Bool)
        } else if t == "diamond" {
            Ok(Family::Diamond)
        } else if t == "product" {
            Ok(Family::Product)
        } else if let Some(rest) = t.strip_prefix("chain") {
            match num(rest, 3)? {
                k @ 2..=4 => Ok(Family::Chain(k)),
                _ => Err(bad()),
            }
        } else if let Some(rest) = t.strip_prefix("powerset") {
            match num(rest, 2)? {
                k @ 1..=3 => Ok(Family::Powerset(k)),
                _ => Err(bad()),
            }
        } else {
            Err(bad())
        }
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Family::Bool => write!(f, "bool"),
            Family::Chain(k) => write!(f, "chain{k}"),
            Family::Powerset(k) => write!(f, "powerset{k}"),
            Family::Diamond => write!(f, "diamond"),
            Family::Product => write!(f, "product"),
        }
    }
}

/// Deliberate breakage used to confirm the checker can find violations.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Mutation {
    /// MIGRATION without its independence hypothesis.
    MigrationNoIndep,
    /// UNFOLD without the requirement that `X` is absent below `Y`.
    ForcedUnfold,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GenConfig {
    pub seed: u64,
    pub cases: usize,
    pub max_vars: usize,
    pub families: Vec<Family>,
    pub graph_mode: GraphMode,
    pub mutation: Option<Mutation>,
}

impl Default for GenConfig {
    fn default() -> Self {
        GenConfig {
            seed: 0,
            cases: 100,
            max_vars: 5,
            families: Family::all(),
            graph_mode: GraphMode::Syntactic,
            mutation: None,
        }
    }
}

impl GenConfig {
    pub fn validate(&self) -> Result<(), CheckError> {
        if self.max_vars == 0 || self.max_vars > MAX_VARS {
            return Err(CheckError::InvalidConfig(format!(
                "max_vars must be between 1 and {MAX_VARS}"
            )));
        }
        if self.families.is_empty() {
            return Err(CheckError::InvalidConfig("no lattice families".into()));
        }
        Ok(())
    }
}

/// All property ids in catalogue order.
pub const PROPERTIES: &[&str] = &[
    "LAW-COMPUTE",
    "LAW-CONST",
    "LAW-ROLL",
    "LAW-SQUARE",
    "LAW-MONO",
    "LAW-DIAG",
    "LAW-UNFOLD",
    "LAW-SOLVE",
    "LAW-BEKIC",
    "LAW-MU-LE-NU",
    "LAW-EXTREMES",
    "LAW-MU-NU-SWAP",
    "LAW-BEKIC-INEQ",
    "FIX-ITER",
    "SANITY1",
    "SANITY2",
    "SANITY3",
    "SOLUTION",
    "CONGR-L",
    "CONGR-L-INEQ",
    "CONGR-R",
    "INDEPSOLVE",
    "INDEPSOLVE2",
    "UNFOLD",
    "UNFOLD-LOOP",
    "PARTIAL",
    "SWAP-SAME",
    "SWAP-LOOP",
    "MIGRATION",
    "MIGRATION2",
    "SPLITSOLVE",
    "SIGN-LOOP",
    "SIGN-INEQ",
    "MIG-INEQ",
    "DUP-COLLAPSE",
    "NEG-EXUNFOLD",
    "NEG-BSERIES",
    "NEG-MIGRATION2",
    "NEG-CONGR-R",
];

/// Parses `all` or a comma separated list of property ids.
pub fn parse_props(s: &str) -> Result<Vec<String>, CheckError> {
    let s = s.trim();
    if s == "all" {
        return Ok(PROPERTIES.iter().map(|p| p.to_string()).collect());
    }
    let mut out = Vec::new();
    for p in s.split(',').map(str::trim).filter(|p| !p.is_empty()) {
        let p = p.to_ascii_uppercase();
        if !PROPERTIES.contains(&p.as_str()) {
            return Err(CheckError::UnknownProperty(p));
        }
        out.push(p);
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Counterexample {
    pub case: usize,
    pub detail: String,
    /// Replayable text: the system in the input format plus `#!` lines.
    pub text: String,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PropertyResult {
    pub id: String,
    pub cases: usize,
    /// Draws rejected because they missed the hypotheses.
    pub rejected: u64,
    /// Cases that hit the retry cap.
    pub starved: usize,
    pub counterexample: Option<Counterexample>,
}

impl PropertyResult {
    pub fn passed(&self) -> bool {
        self.counterexample.is_none()
    }

    pub fn summary(&self) -> String {
        let mut s = format!(
            "{:<14} {:>5} cases {:>8} rejected  {}",
            self.id,
            self.cases,
            self.rejected,
            if self.passed() {
                "ok"
            } else {
                "COUNTEREXAMPLE"
            }
        );
        if self.starved > 0 {
            s.push_str(&format!("  (HypothesisStarvation: {} cases)", self.starved));
        }
        s
    }
}

/// Runs the listed properties in order.
pub fn run_suite(cfg: &GenConfig, props: &[String]) -> Result<Vec<PropertyResult>, CheckError> {
    cfg.validate()?;
    props.iter().map(|p| run_property(cfg, p)).collect()
}

pub fn run_property(cfg: &GenConfig, id: &str) -> Result<PropertyResult, CheckError> {
    cfg.validate()?;
    let kind = property_kind(id).ok_or_else(|| CheckError::UnknownProperty(id.to_string()))?;
    let result = match kind {
        Kind::Law(law) => run_cases(cfg, id, |rng, _| {
            let inst = gen_law(rng);
            match check_law(law, &inst) {
                None => CaseOutcome::Pass(0),
                Some(d) => CaseOutcome::Fail(0, Failure::Law(inst, d)),
            }
        }),
        Kind::Fixture(f) => {
            let mut r = PropertyResult {
                id: id.to_string(),
                cases: 1,
                rejected: 0,
                starved: 0,
                counterexample: None,
            };
            if let Err(detail) = f() {
                r.counterexample = Some(Counterexample {
                    case: 0,
                    text: format!("#! property = {id}\n#! detail = {detail}\n"),
                    detail,
                });
            }
            r
        }
        Kind::Fes(gen, check) => {
            let mut r = run_cases(cfg, id, |rng, cfg| {
                for attempt in 0..RETRY_CAP {
                    let inst = gen(rng, cfg);
                    match check(&inst, cfg) {
                        Verdict::Vacuous => continue,
                        Verdict::Holds => return CaseOutcome::Pass(attempt as u64),
                        Verdict::Violated(d) => {
                            return CaseOutcome::Fail(attempt as u64, Failure::Fes(inst, d))
                        }
                    }
                }
                CaseOutcome::Starved
            });
            if let Some(cx) = &mut r.counterexample {
                cx.text = format!("#! property = {id}\n#! case = {}\n{}", cx.case, cx.text);
            }
            r
        }
    };
    Ok(result)
}

enum Failure {
    Law(LawInstance, String),
    Fes(Instance, String),
}

#[allow(clippy::large_enum_variant)]
enum CaseOutcome {
    Pass(u64),
    Fail(u64, Failure),
    Starved,
}

fn case_rng(seed: u64, id: &str, case: usize) -> ChaCha8Rng {
    let mut h: u64 = seed ^ 0xcbf2_9ce4_8422_2325;
    for b in id.bytes() {
        h = (h ^ u64::from(b)).wrapping_mul(0x0100_0000_01b3);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(h);
    rng.set_stream(case as u64);
    rng
}

fn run_cases(
    cfg: &GenConfig,
    id: &str,
    one: impl Fn(&mut ChaCha8Rng, &GenConfig) -> CaseOutcome + Sync,
) -> PropertyResult {
    let outcomes: Vec<CaseOutcome> = (0..cfg.cases)
        .into_par_iter()
        .map(|c| one(&mut case_rng(cfg.seed, id, c), cfg))
        .collect();
    let mut r = PropertyResult {
        id: id.to_string(),
        cases: cfg.cases,
        rejected: 0,
        starved: 0,
        counterexample: None,
    };
    for (case, o) in outcomes.into_iter().enumerate() {
        match o {
            CaseOutcome::Pass(n) => r.rejected += n,
            CaseOutcome::Starved => {
                r.starved += 1;
                r.rejected += RETRY_CAP as u64;
            }
            CaseOutcome::Fail(n, f) => {
                r.rejected += n;
                if r.counterexample.is_none() {
                    r.counterexample = Some(report(case, f, cfg, id));
                }
            }
        }
    }
    r
}

fn report(case: usize, f: Failure, cfg: &GenConfig, id: &str) -> Counterexample {
    match f {
        Failure::Law(inst, detail) => Counterexample {
            case,
            text: inst.render(&detail),
            detail,
        },
        Failure::Fes(inst, detail) => {
            let (_, check) = match property_kind(id) {
                Some(Kind::Fes(g, c)) => (g, c),
                _ => unreachable!("fes property"),
            };
            let (inst, detail) = shrink(inst, detail, |i| check(i, cfg));
            Counterexample {
                case,
                text: inst.render(&detail),
                detail,
            }
        }
    }
}

// ---------------------------------------------------------------------------
// lattice laws

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Law {
    Computation,
    Constant,
    Rolling,
    Square,
    Monotonicity,
    Diagonal,
    Unfolding,
    Solve,
    Bekic,
    MuLeqNu,
    Extremes,
    MuNuSwap,
    BekicIneq,
    FixIter,
}

#[derive(Debug, Clone)]
struct LawInstance {
    lattice: FiniteLattice,
    sign: Sign,
    a: Element,
    f: UnaryFn,
    g: UnaryFn,
    h: BinaryFn,
    k: BinaryFn,
}

impl LawInstance {
    fn render(&self, detail: &str) -> String {
        let l = &self.lattice;
        let covers: Vec<String> = l
            .cover_labels()
            .iter()
            .map(|(a, b)| format!("{a}<{b}"))
            .collect();
        let tab = |t: &[Element]| t.iter().map(|&e| l.label(e)).collect::<Vec<_>>().join(",");
        let mut s = String::new();
        s.push_str(&format!("#! lattice elements = {}\n", l.labels().join(",")));
        s.push_str(&format!("#! lattice covers = {}\n", covers.join(", ")));
        s.push_str(&format!(
            "#! sign = {}\n#! A = {}\n",
            self.sign,
            l.label(self.a)
        ));
        s.push_str(&format!(
            "#! F = [{}]\n#! G = [{}]\n",
            tab(self.f.table()),
            tab(self.g.table())
        ));
        let bin = |b: &BinaryFn| {
            let t: Vec<Element> = l
                .elements()
                .flat_map(|x| l.elements().map(move |y| (x, y)))
                .map(|(x, y)| b.apply(x, y))
                .collect();
            tab(&t)
        };
        s.push_str(&format!(
            "#! H = [{}]\n#! K = [{}]\n",
            bin(&self.h),
            bin(&self.k)
        ));
        s.push_str(&format!("#! detail = {detail}\n"));
        s
    }
}

/// A random lattice with at most five elements.
pub fn random_lattice(rng: &mut impl Rng) -> FiniteLattice {
    loop {
        let n = rng.gen_range(2..=5);
        let labels: Vec<String> = (0..n).map(|i| format!("e{i}")).collect();
        let mut covers = Vec::new();
        for i in 1..n - 1 {
            covers.push((0, i));
            covers.push((i, n - 1));
            for j in i + 1..n - 1 {
                if rng.gen_bool(0.4) {
                    covers.push((i, j));
                }
            }
        }
        if n == 2 {
            covers.push((0, 1));
        }
        let poset = Poset::from_covers(labels, &covers);
        if let Ok(l) = FiniteLattice::from_poset("random", LatticeDecl::Finite, poset) {
            return l;
        }
    }
}

/// A random monotone unary function, built along a linear extension.
pub fn random_monotone_unary(rng: &mut impl Rng, l: &FiniteLattice) -> UnaryFn {
    let mut table = vec![l.bottom(); l.len()];
    for x in l.linear_extension() {
        let lower = l.lub(
            l.elements()
                .filter(|&p| p != x && l.leq(p, x))
                .map(|p| table[p.index()]),
        );
        let above: Vec<Element> = l.elements().filter(|&y| l.leq(lower, y)).collect();
        table[x.index()] = *above.choose(rng).expect("lower bound has an upper bound");
    }
    UnaryFn::new(table)
}

/// A random monotone binary function, built along the lexicographic
/// extension of the product order.
pub fn random_monotone_binary(rng: &mut impl Rng, l: &FiniteLattice) -> BinaryFn {
    let n = l.len();
    let order = l.linear_extension();
    let mut table = vec![l.bottom(); n * n];
    for &x in &order {
        for &y in &order {
            let lower = l.lub(
                l.elements()
                    .flat_map(|p| l.elements().map(move |q| (p, q)))
                    .filter(|&(p, q)| (p, q) != (x, y) && l.leq(p, x) && l.leq(q, y))
                    .map(|(p, q)| table[p.index() * n + q.index()]),
            );
            let above: Vec<Element> = l.elements().filter(|&z| l.leq(lower, z)).collect();
            table[x.index() * n + y.index()] = *above.choose(rng).expect("upper bound");
        }
    }
    BinaryFn::new(n, table).expect("square table")
}

fn gen_law(rng: &mut ChaCha8Rng) -> LawInstance {
    let lattice = random_lattice(rng);
    let sign = if rng.gen_bool(0.5) {
        Sign::Mu
    } else {
        Sign::Nu
    };
    let a = Element::from_index(rng.gen_range(0..lattice.len()));
    let f = random_monotone_unary(rng, &lattice);
    let g = random_monotone_unary(rng, &lattice);
    let h = random_monotone_binary(rng, &lattice);
    let k = random_monotone_binary(rng, &lattice);
    LawInstance {
        lattice,
        sign,
        a,
        f,
        g,
        h,
        k,
    }
}

fn check_law(law: Law, i: &LawInstance) -> Option<String> {
    let l = &i.lattice;
    let s = i.sign;
    let fix = |sign: Sign, f: &UnaryFn| l.fix_def(sign, f);
    let un = |f: &dyn Fn(Element) -> Element| UnaryFn::from_fn(l, f);
    let show = |e: Element| l.label(e).to_string();
    let eq = |what: &str, a: Element, b: Element| {
        (a != b).then(|| format!("{what}: {} != {}", show(a), show(b)))
    };
    let le = |what: &str, a: Element, b: Element| {
        (!l.leq(a, b)).then(|| format!("{what}: {} is not below {}", show(a), show(b)))
    };
    let (f, g, h, k) = (&i.f, &i.g, &i.h, &i.k);
    match law {
        Law::Computation => {
            let x = fix(s, f);
            eq("F(fix F) = fix F", f.apply(x), x)
        }
        Law::Constant => eq("fix(const A) = A", fix(s, &UnaryFn::constant(l, i.a)), i.a),
        Law::Rolling => eq(
            "fix(F.G) = F(fix(G.F))",
            fix(s, &f.compose(g)),
            f.apply(fix(s, &g.compose(f))),
        ),
        Law::Square => eq("fix(F.F) = fix F", fix(s, &f.compose(f)), fix(s, f)),
        Law::Monotonicity => {
            let upper = un(&|x| l.join(f.apply(x), g.apply(x)));
            le("fix F <= fix (F join G)", fix(s, f), fix(s, &upper))
        }
        Law::Diagonal => {
            let inner = un(&|x| fix(s, &h.fix_left(x)));
            eq(
                "fix x.H(x,x) = fix x.fix y.H(x,y)",
                fix(s, &h.diagonal()),
                fix(s, &inner),
            )
        }
        Law::Unfolding => {
            let u = un(&|x| h.apply(x, h.apply(x, x)));
            eq(
                "fix x.H(x,x) = fix x.H(x,H(x,x))",
                fix(s, &h.diagonal()),
                fix(s, &u),
            )
        }
        Law::Solve => {
            let c = fix(s, &h.diagonal());
            eq("fix x.H(x,x) = fix x.H(x,c)", c, fix(s, &h.fix_right(c)))
        }
        Law::Bekic => {
            // fix x. H(x, fix y. K(y, x))
            let lhs = un(&|x| h.apply(x, fix(s, &k.fix_right(x))));
            // fix x. H(x, fix y. K(y, fix z. H(z, y)))
            let rhs = un(&|x| h.apply(x, fix(s, &un(&|y| k.apply(y, fix(s, &h.fix_right(y)))))));
            eq("Bekic rule", fix(s, &lhs), fix(s, &rhs))
        }
        Law::MuLeqNu => le("mu F <= nu F", fix(Sign::Mu, f), fix(Sign::Nu, f)),
        Law::Extremes => {
            let id = UnaryFn::identity(l);
            le("mu x.x <= A", fix(Sign::Mu, &id), i.a)
                .or_else(|| le("A <= nu x.x", i.a, fix(Sign::Nu, &id)))
        }
        Law::MuNuSwap => {
            let lhs = un(&|x| fix(Sign::Nu, &h.fix_left(x)));
            let rhs = un(&|y| fix(Sign::Mu, &h.fix_right(y)));
            le(
                "mu x.nu y.H <= nu y.mu x.H",
                fix(Sign::Mu, &lhs),
                fix(Sign::Nu, &rhs),
            )
        }
        Law::BekicIneq => {
            let side = |outer: Sign| {
                let inner = outer.flipped();
                let a = un(&|x| h.apply(x, fix(inner, &k.fix_right(x))));
                let b = un(&|x| {
                    h.apply(
                        x,
                        fix(inner, &un(&|y| k.apply(y, fix(outer, &h.fix_right(y))))),
                    )
                });
                (fix(outer, &a), fix(outer, &b))
            };
            let (a, b) = side(Sign::Mu);
            let (c, d) = side(Sign::Nu);
            le("Bekic inequality (mu)", a, b).or_else(|| le("Bekic inequality (nu)", d, c))
        }
        Law::FixIter => {
            let iter = l.fix_iter(s, f).map_err(|e| e.to_string());
            match iter {
                Ok(v) => eq("iterated = defined fixpoint", v, fix(s, f)),
                Err(e) => Some(e),
            }
        }
    }
}

// ---------------------------------------------------------------------------
// fes properties

/// A generated test case. The meaning of `blocks` depends on the property;
/// the full spec is usually their concatenation.
#[derive(Debug, Clone)]
pub struct Instance {
    pub es: EquationSystem,
    pub es2: Option<EquationSystem>,
    pub blocks: Vec<Spec>,
    pub eta: Valuation,
    pub eta2: Option<Valuation>,
    pub x: Option<VarName>,
    pub y: Option<VarName>,
}

impl Instance {
    fn new(es: EquationSystem, blocks: Vec<Spec>, eta: Valuation) -> Self {
        Instance {
            es,
            es2: None,
            blocks,
            eta,
            eta2: None,
            x: None,
            y: None,
        }
    }

    fn spec(&self) -> Spec {
        self.blocks
            .iter()
            .fold(Spec::empty(), |acc, b| acc.concat(b))
    }

    fn b(&self, i: usize) -> &Spec {
        &self.blocks[i]
    }

    fn etas(&self) -> Vec<Valuation> {
        let mut v = vec![
            self.eta.clone(),
            self.es.bottom_valuation(),
            self.es.top_valuation(),
        ];
        v.dedup();
        v
    }

    fn render(&self, detail: &str) -> String {
        let fes = Fes {
            es: self.es.clone(),
            spec: self.spec(),
        };
        let mut s = print(&Document {
            fes,
            eta: self.eta.clone(),
        });
        let l = self.es.lattice();
        let vals = |v: &Valuation| {
            v.values()
                .iter()
                .map(|&e| l.label(e))
                .collect::<Vec<_>>()
                .join(",")
        };
        for (i, b) in self.blocks.iter().enumerate() {
            s.push_str(&format!("#! block {i} = {b}\n"));
        }
        if let Some(x) = &self.x {
            s.push_str(&format!("#! x = {x}\n"));
        }
        if let Some(y) = &self.y {
            s.push_str(&format!("#! y = {y}\n"));
        }
        if let Some(e2) = &self.eta2 {
            s.push_str(&format!("#! eta2 = ({})\n", vals(e2)));
        }
        if let Some(es2) = &self.es2 {
            for (i, v) in es2.vars().iter().enumerate() {
                if es2.rhs(i) != self.es.rhs(i) {
                    s.push_str(&format!(
                        "#! second system: {v} = {}\n",
                        es2.display(es2.rhs(i))
                    ));
                }
            }
        }
        s.push_str(&format!("#! detail = {detail}\n"));
        s
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum Verdict {
    Vacuous,
    Holds,
    Violated(String),
}

type GenFn = fn(&mut ChaCha8Rng, &GenConfig) -> Instance;
type CheckFn = fn(&Instance, &GenConfig) -> Verdict;

enum Kind {
    Law(Law),
    Fes(GenFn, CheckFn),
    Fixture(fn() -> Result<(), String>),
}

fn property_kind(id: &str) -> Option<Kind> {
    Some(match id {
        "LAW-COMPUTE" => Kind::Law(Law::Computation),
        "LAW-CONST" => Kind::Law(Law::Constant),
        "LAW-ROLL" => Kind::Law(Law::Rolling),
        "LAW-SQUARE" => Kind::Law(Law::Square),
        "LAW-MONO" => Kind::Law(Law::Monotonicity),
        "LAW-DIAG" => Kind::Law(Law::Diagonal),
        "LAW-UNFOLD" => Kind::Law(Law::Unfolding),
        "LAW-SOLVE" => Kind::Law(Law::Solve),
        "LAW-BEKIC" => Kind::Law(Law::Bekic),
        "LAW-MU-LE-NU" => Kind::Law(Law::MuLeqNu),
        "LAW-EXTREMES" => Kind::Law(Law::Extremes),
        "LAW-MU-NU-SWAP" => Kind::Law(Law::MuNuSwap),
        "LAW-BEKIC-INEQ" => Kind::Law(Law::BekicIneq),
        "FIX-ITER" => Kind::Law(Law::FixIter),
        "SANITY1" => Kind::Fes(gen_sanity, check_sanity1),
        "SANITY2" => Kind::Fes(gen_sanity2, check_sanity2),
        "SANITY3" => Kind::Fes(gen_sanity3, check_sanity3),
        "SOLUTION" => Kind::Fes(gen_plain, check_solution),
        "CONGR-L" => Kind::Fes(gen_congr_l, check_congr_l),
        "CONGR-L-INEQ" => Kind::Fes(gen_congr_l_ineq, check_congr_l_ineq),
        "CONGR-R" => Kind::Fes(gen_congr_r, check_congr_r),
        "INDEPSOLVE" => Kind::Fes(gen_indepsolve, check_indepsolve),
        "INDEPSOLVE2" => Kind::Fes(gen_indepsolve2, check_indepsolve2),
        "UNFOLD" => Kind::Fes(gen_unfold, check_unfold),
        "UNFOLD-LOOP" => Kind::Fes(gen_unfold_loop, check_unfold_loop),
        "PARTIAL" => Kind::Fes(gen_partial, check_partial),
        "SWAP-SAME" => Kind::Fes(gen_swap_same, check_swap_same),
        "SWAP-LOOP" => Kind::Fes(gen_swap_loop, check_swap_loop),
        "MIGRATION" => Kind::Fes(gen_migration, check_migration),
        "MIGRATION2" => Kind::Fes(gen_migration2, check_migration2),
        "SPLITSOLVE" => Kind::Fes(gen_partial, check_splitsolve),
        "SIGN-LOOP" => Kind::Fes(gen_sign_loop, check_sign_loop),
        "SIGN-INEQ" => Kind::Fes(gen_sign_ineq, check_sign_ineq),
        "MIG-INEQ" => Kind::Fes(gen_mig_ineq, check_mig_ineq),
        "DUP-COLLAPSE" => Kind::Fes(gen_dup, check_dup),
        "NEG-EXUNFOLD" => Kind::Fixture(fixture_exunfold),
        "NEG-BSERIES" => Kind::Fixture(fixture_bseries),
        "NEG-MIGRATION2" => Kind::Fixture(fixture_migration2),
        "NEG-CONGR-R" => Kind::Fixture(fixture_congr_r),
        _ => return None,
    })
}

// generation helpers

fn pick_lattice(rng: &mut ChaCha8Rng, cfg: &GenConfig) -> Arc<FiniteLattice> {
    Arc::new(
        cfg.families
            .choose(rng)
            .expect("families validated")
            .lattice(),
    )
}

/// Number of variables: at least `min`, at most `max_vars`, and small enough
/// for exhaustive enumeration.
fn var_count(rng: &mut ChaCha8Rng, cfg: &GenConfig, l: &FiniteLattice, min: usize) -> usize {
    let mut upper = cfg.max_vars;
    while upper > 1 && (l.len() as u128).pow(upper as u32) > MAX_VALUATIONS {
        upper -= 1;
    }
    let min = min.min(upper).max(1);
    rng.gen_range(min..=upper)
}

fn names(n: usize) -> Vec<VarName> {
    NAMES[..n].iter().map(|s| VarName::new(s)).collect()
}

fn rand_elem(rng: &mut ChaCha8Rng, l: &FiniteLattice) -> Element {
    if rng.gen_bool(0.4) {
        if rng.gen_bool(0.5) {
            l.bottom()
        } else {
            l.top()
        }
    } else {
        Element::from_index(rng.gen_range(0..l.len()))
    }
}

fn gen_expr(
    rng: &mut ChaCha8Rng,
    l: &FiniteLattice,
    pool: &[VarName],
    depth: usize,
    neg: bool,
) -> Expr {
    if depth == 0 || rng.gen_bool(0.4) {
        return if !pool.is_empty() && rng.gen_bool(0.8) {
            Expr::Var(pool.choose(rng).expect("nonempty").clone())
        } else {
            Expr::Const(rand_elem(rng, l))
        };
    }
    if neg && rng.gen_bool(0.25) {
        return Expr::not(gen_expr(rng, l, pool, depth - 1, neg));
    }
    let n = if rng.gen_bool(0.8) { 2 } else { 3 };
    let kids = (0..n)
        .map(|_| gen_expr(rng, l, pool, depth - 1, neg))
        .collect();
    if rng.gen_bool(0.5) {
        Expr::Meet(kids)
    } else {
        Expr::Join(kids)
    }
}

/// A system over `vars` in which equation `i` only mentions `pool(i)`.
fn gen_system(
    rng: &mut ChaCha8Rng,
    l: &Arc<FiniteLattice>,
    vars: &[VarName],
    pool: impl Fn(usize) -> Vec<VarName>,
    neg: bool,
) -> EquationSystem {
    let neg = neg && l.is_bool();
    let eqs = vars
        .iter()
        .enumerate()
        .map(|(i, v)| (v.clone(), gen_expr(rng, l, &pool(i), 2, neg)))
        .collect();
    EquationSystem::with_standard_ops(l.clone(), eqs).expect("generated system is well formed")
}

fn gen_valuation(rng: &mut ChaCha8Rng, l: &FiniteLattice, n: usize) -> Valuation {
    Valuation::new(
        (0..n)
            .map(|_| Element::from_index(rng.gen_range(0..l.len())))
            .collect(),
    )
}

fn rand_sign(rng: &mut ChaCha8Rng) -> Sign {
    if rng.gen_bool(0.5) {
        Sign::Mu
    } else {
        Sign::Nu
    }
}

fn spec_of(rng: &mut ChaCha8Rng, vars: &[VarName]) -> Spec {
    Spec::new(vars.iter().map(|v| (rand_sign(rng), v.clone())).collect())
}

/// A random duplicate-free spec over a shuffled subset of `vars`.
fn random_spec(rng: &mut ChaCha8Rng, vars: &[VarName], min: usize) -> Spec {
    let mut vs = vars.to_vec();
    vs.shuffle(rng);
    let k = rng.gen_range(min.min(vs.len())..=vs.len());
    vs.truncate(k);
    spec_of(rng, &vs)
}

/// Splits shuffled `vars` into consecutive groups with the given minimum
/// sizes; leftover variables go to random groups.
fn partition(rng: &mut ChaCha8Rng, vars: &[VarName], mins: &[usize]) -> Vec<Vec<VarName>> {
    let mut vs = vars.to_vec();
    vs.shuffle(rng);
    let mut groups: Vec<Vec<VarName>> = vec![Vec::new(); mins.len()];
    let mut it = vs.into_iter();
    for (g, &m) in groups.iter_mut().zip(mins) {
        g.extend(it.by_ref().take(m));
    }
    for v in it {
        let g = rng.gen_range(0..mins.len());
        groups[g].push(v);
    }
    groups
}

struct Base {
    l: Arc<FiniteLattice>,
    vars: Vec<VarName>,
}

fn base(rng: &mut ChaCha8Rng, cfg: &GenConfig, min_vars: usize) -> Base {
    let l = pick_lattice(rng, cfg);
    let n = var_count(rng, cfg, &l, min_vars);
    Base { l, vars: names(n) }
}

fn plain_system(rng: &mut ChaCha8Rng, b: &Base, neg: bool) -> EquationSystem {
    let all = b.vars.clone();
    gen_system(rng, &b.l, &b.vars, |_| all.clone(), neg)
}

/// Like [`plain_system`] but each equation sees only a random sample of
/// variables, which keeps dependency graphs sparse.
fn sparse_system(rng: &mut ChaCha8Rng, b: &Base) -> EquationSystem {
    let pools: Vec<Vec<VarName>> = (0..b.vars.len())
        .map(|_| {
            b.vars
                .iter()
                .filter(|_| rng.gen_bool(0.4))
                .cloned()
                .collect()
        })
        .collect();
    gen_system(rng, &b.l, &b.vars, |i| pools[i].clone(), false)
}

fn replace_rhs(
    rng: &mut ChaCha8Rng,
    es: &EquationSystem,
    i: usize,
    pool: &[VarName],
    neg: bool,
) -> EquationSystem {
    let neg = neg && es.lattice().is_bool();
    let e = gen_expr(rng, es.lattice(), pool, 2, neg);
    es.with_rhs(i, e).expect("same variables")
}

fn fes_of(es: &EquationSystem, spec: Spec) -> Fes {
    Fes {
        es: es.clone(),
        spec,
    }
}

// check helpers

macro_rules! try_v {
    ($e:expr) => {
        match $e {
            Ok(v) => v,
            Err(_) => return Verdict::Vacuous,
        }
    };
}

fn need(cond: bool) -> Result<(), ()> {
    if cond {
        Ok(())
    } else {
        Err(())
    }
}

fn vals(es: &EquationSystem, v: &Valuation) -> String {
    let l = es.lattice();
    format!(
        "({})",
        v.values()
            .iter()
            .map(|&e| l.label(e))
            .collect::<Vec<_>>()
            .join(",")
    )
}

/// Compares `sem(es1, s1)` and `sem(es2, s2)` at each input.
fn compare(
    es1: &EquationSystem,
    s1: &Spec,
    es2: &EquationSystem,
    s2: &Spec,
    etas: &[Valuation],
    leq_only: bool,
) -> Verdict {
    for eta in etas {
        let a = try_v!(sem(es1, s1, eta));
        let b = try_v!(sem(es2, s2, eta));
        let ok = if leq_only {
            a.leq(es1.lattice(), &b)
        } else {
            a == b
        };
        if !ok {
            let rel = if leq_only { "not below" } else { "!=" };
            return Verdict::Violated(format!(
                "at eta = {}: {s1} gives {} {rel} {s2} gives {}",
                vals(es1, eta),
                vals(es1, &a),
                vals(es1, &b)
            ));
        }
    }
    Verdict::Holds
}

/// `sem(es1, s1) R sem(es2, s2)` on every valuation.
fn holds_everywhere(
    es1: &EquationSystem,
    s1: &Spec,
    es2: &EquationSystem,
    s2: &Spec,
    leq_only: bool,
) -> Option<bool> {
    let all: Vec<Valuation> = es1.all_valuations(MAX_VALUATIONS).ok()?.collect();
    match compare(es1, s1, es2, s2, &all, leq_only) {
        Verdict::Holds => Some(true),
        Verdict::Violated(_) => Some(false),
        Verdict::Vacuous => None,
    }
}

fn agree_on(es1: &EquationSystem, es2: &EquationSystem, spec: &Spec) -> bool {
    spec.entries()
        .iter()
        .all(|(_, v)| es1.rhs_of(v) == es2.rhs_of(v))
}

fn monotone(es: &EquationSystem) -> bool {
    es.is_monotone(MAX_VALUATIONS).unwrap_or(false)
}

fn single(s: &Spec) -> Option<(Sign, VarName)> {
    (s.len() == 1).then(|| s.entries()[0].clone())
}

fn transform_verdict(
    input: &Fes,
    r: Result<crate::transforms::TransformReport, crate::transforms::TransformError>,
    etas: &[Valuation],
    what: &str,
) -> Verdict {
    match r {
        Err(e) => Verdict::Violated(format!(
            "{what} rejected an instance meeting its hypotheses: {e}"
        )),
        Ok(rep) => match relation_holds(input, &rep, etas) {
            Ok(true) => Verdict::Holds,
            Ok(false) => Verdict::Violated(format!(
                "{what} reported {} via {} but the semantics disagree",
                rep.relation,
                rep.justification().map(|t| t.id()).unwrap_or("-")
            )),
            Err(_) => Verdict::Vacuous,
        },
    }
}

fn opts(cfg: &GenConfig) -> TransformOptions {
    TransformOptions {
        mode: cfg.graph_mode,
        ..Default::default()
    }
}

// SANITY1-3, SOLUTION

fn gen_sanity(rng: &mut ChaCha8Rng, cfg: &GenConfig) -> Instance {
    let b = base(rng, cfg, 1);
    let es = plain_system(rng, &b, true);
    let s = random_spec(rng, &b.vars, 0);
    let eta = gen_valuation(rng, &b.l, b.vars.len());
    Instance::new(es, vec![s], eta)
}

fn check_sanity1(i: &Instance, _: &GenConfig) -> Verdict {
    let s = i.b(0);
    let r = try_v!(sem(&i.es, s, &i.eta));
    for (k, v) in i.es.vars().iter().enumerate() {
        if !s.contains(v) && r.get(k) != i.eta.get(k) {
            return Verdict::Violated(format!("{v} is outside the spec but changed"));
        }
    }
    Verdict::Holds
}

fn gen_sanity2(rng: &mut ChaCha8Rng, cfg: &GenConfig) -> Instance {
    let mut inst = gen_sanity(rng, cfg);
    let mut es2 = inst.es.clone();
    let vars = inst.es.vars().to_vec();
    for (k, v) in vars.iter().enumerate() {
        if !inst.b(0).contains(v) {
            es2 = replace_rhs(rng, &es2, k, &vars, true);
        }
    }
    inst.es2 = Some(es2);
    inst
}

fn check_sanity2(i: &Instance, _: &GenConfig) -> Verdict {
    let es2 = i.es2.as_ref().expect("second system");
    if !agree_on(&i.es, es2, i.b(0)) {
        return Verdict::Vacuous;
    }
    compare(&i.es, i.b(0), es2, i.b(0), &i.etas(), false)
}

fn gen_sanity3(rng: &mut ChaCha8Rng, cfg: &GenConfig) -> Instance {
    let mut inst = gen_sanity(rng, cfg);
    let mut eta2 = inst.eta.clone();
    for (k, v) in inst.es.vars().iter().enumerate() {
        if inst.b(0).contains(v) {
            eta2.set(
                k,
                Element::from_index(rng.gen_range(0..inst.es.lattice().len())),
            );
        }
    }
    inst.eta2 = Some(eta2);
    inst
}

fn check_sanity3(i: &Instance, _: &GenConfig) -> Verdict {
    let eta2 = i.eta2.as_ref().expect("second valuation");
    let s = i.b(0);
    let outside_equal =
        i.es.vars()
            .iter()
            .enumerate()
            .all(|(k, v)| s.contains(v) || i.eta.get(k) == eta2.get(k));
    if !outside_equal {
        return Verdict::Vacuous;
    }
    let a = try_v!(sem(&i.es, s, &i.eta));
    let b = try_v!(sem(&i.es, s, eta2));
    if a != b {
        return Verdict::Violated(format!(
            "inputs agreeing outside {s} give {} and {}",
            vals(&i.es, &a),
            vals(&i.es, &b)
        ));
    }
    Verdict::Holds
}

fn gen_plain(rng: &mut ChaCha8Rng, cfg: &GenConfig) -> Instance {
    let b = base(rng, cfg, 1);
    let es = plain_system(rng, &b, false);
    let s = random_spec(rng, &b.vars, 1);
    let eta = gen_valuation(rng, &b.l, b.vars.len());
    let mut inst = Instance::new(es, vec![s], eta);
    inst.x = b.vars.choose(rng).cloned();
    inst
}

fn check_solution(i: &Instance, _: &GenConfig) -> Verdict {
    if !monotone(&i.es) {
        return Verdict::Vacuous;
    }
    let s = i.b(0);
    for eta in i.etas() {
        let r = try_v!(sem(&i.es, s, &eta));
        for (_, v) in s.entries() {
            let k = i.es.var_index(v).expect("spec var");
            let e = i.es.eval_var(k, &r);
            if e != r.get(k) {
                return Verdict::Violated(format!(
                    "{v} is not a fixpoint of its equation in {}",
                    vals(&i.es, &r)
                ));
            }
        }
    }
    Verdict::Holds
}

// congruences

/// A variant of `s` that is often, but not always, semantically equal.
fn mutate_spec(rng: &mut ChaCha8Rng, s: &Spec) -> Spec {
    let mut e = s.entries().to_vec();
    match rng.gen_range(0..4) {
        0 if e.len() >= 2 => {
            let i = rng.gen_range(0..e.len() - 1);
            e.swap(i, i + 1);
        }
        1 if !e.is_empty() => {
            let i = rng.gen_range(0..e.len());
            e[i].0 = e[i].0.flipped();
        }
        _ => {}
    }
    Spec::new(e)
}

fn gen_congr_l(rng: &mut ChaCha8Rng, cfg: &GenConfig) -> Instance {
    let b = base(rng, cfg, 2);
    let es = plain_system(rng, &b, true);
    let g = partition(rng, &b.vars, &[1, 1]);
    let s = spec_of(rng, &g[0]);
    let s1 = spec_of(rng, &g[1]);
    let s2 = mutate_spec(rng, &s1);
    let mut es2 = es.clone();
    if rng.gen_bool(0.7) {
        let outside: Vec<usize> = (0..b.vars.len())
            .filter(|&k| !s.contains(&b.vars[k]))
            .collect();
        if let Some(&k) = outside.choose(rng) {
            es2 = replace_rhs(rng, &es2, k, &b.vars, true);
        }
    }
    let eta = gen_valuation(rng, &b.l, b.vars.len());
    let mut inst = Instance::new(es, vec![s, s1, s2], eta);
    inst.es2 = Some(es2);
    inst
}

fn check_congr_common(i: &Instance, leq_only: bool) -> Verdict {
    let es2 = i.es2.as_ref().expect("second system");
    let (s, s1, s2) = (i.b(0), i.b(1), i.b(2));
    if !agree_on(&i.es, es2, s) {
        return Verdict::Vacuous;
    }
    if leq_only && !monotone(&i.es) {
        return Verdict::Vacuous;
    }
    if holds_everywhere(&i.es, s1, es2, s2, leq_only) != Some(true) {
        return Verdict::Vacuous;
    }
    compare(
        &i.es,
        &s.concat(s1),
        es2,
        &s.concat(s2),
        &i.etas(),
        leq_only,
    )
}

fn check_congr_l(i: &Instance, _: &GenConfig) -> Verdict {
    check_congr_common(i, false)
}

fn gen_congr_l_ineq(rng: &mut ChaCha8Rng, cfg: &GenConfig) -> Instance {
    let b = base(rng, cfg, 2);
    let es = plain_system(rng, &b, false);
    let g = partition(rng, &b.vars, &[1, 1]);
    let s = spec_of(rng, &g[0]);
    let s1 = spec_of(rng, &g[1]);
    // flipping mu to nu can only go up
    let s2 = Spec::new(
        s1.entries()
            .iter()
            .map(|(sg, v)| (if rng.gen_bool(0.5) { Sign::Nu } else { *sg }, v.clone()))
            .collect(),
    );
    let mut es2 = es.clone();
    if rng.gen_bool(0.5) {
        let outside: Vec<usize> = (0..b.vars.len())
            .filter(|&k| !s.contains(&b.vars[k]))
            .collect();
        if let Some(&k) = outside.choose(rng) {
            let extra = gen_expr(rng, &b.l, &b.vars, 1, false);
            es2 = es2
                .with_rhs(k, Expr::Join(vec![es.rhs(k).clone(), extra]))
                .expect("same vars");
        }
    }
    let eta = gen_valuation(rng, &b.l, b.vars.len());
    let mut inst = Instance::new(es, vec![s, s1, s2], eta);
    inst.es2 = Some(es2);
    inst
}

fn check_congr_l_ineq(i: &Instance, _: &GenConfig) -> Verdict {
    check_congr_common(i, true)
}

fn gen_congr_r(rng: &mut ChaCha8Rng, cfg: &GenConfig) -> Instance {
    let b = base(rng, cfg, 2);
    let g = partition(rng, &b.vars, &[1, 1]);
    let (outer, inner) = (g[0].clone(), g[1].clone());
    // outer equations avoid the inner block
    let all = b.vars.clone();
    let es = gen_system(
        rng,
        &b.l,
        &b.vars,
        |k| {
            if outer.contains(&all[k]) {
                outer.clone()
            } else {
                all.clone()
            }
        },
        true,
    );
    let s1 = spec_of(rng, &outer);
    let s2 = mutate_spec(rng, &s1);
    let s = spec_of(rng, &inner);
    let mut es2 = es.clone();
    if rng.gen_bool(0.5) {
        let k = es
            .var_index(outer.choose(rng).expect("nonempty"))
            .expect("var");
        if !s1.contains(&all[k]) || rng.gen_bool(0.3) {
            es2 = replace_rhs(rng, &es2, k, &outer, true);
        }
    }
    let eta = gen_valuation(rng, &b.l, b.vars.len());
    let mut inst = Instance::new(es, vec![s1, s2, s], eta);
    inst.es2 = Some(es2);
    inst
}

fn check_congr_r(i: &Instance, cfg: &GenConfig) -> Verdict {
    let es2 = i.es2.as_ref().expect("second system");
    let (s1, s2, s) = (i.b(0), i.b(1), i.b(2));
    let m = cfg.graph_mode;
    let hyp = (|| -> Result<(), ()> {
        need(s.disjoint(&s1.concat(s2)))?;
        need(agree_on(&i.es, es2, s))?;
        need(indep_spec(&i.es, s1, s, m).map_err(|_| ())?)?;
        need(indep_spec(es2, s2, s, m).map_err(|_| ())?)?;
        need(holds_everywhere(&i.es, s1, es2, s2, false) == Some(true))
    })();
    if hyp.is_err() {
        return Verdict::Vacuous;
    }
    compare(&i.es, &s1.concat(s), es2, &s2.concat(s), &i.etas(), false)
}

// independence

/// A system with blocks `a` and `b` where equations of `a` avoid `b`.
fn blocked(
    rng: &mut ChaCha8Rng,
    cfg: &GenConfig,
    neg: bool,
) -> (Base, EquationSystem, Vec<VarName>, Vec<VarName>) {
    let bs = base(rng, cfg, 2);
    let g = partition(rng, &bs.vars, &[1, 1]);
    let (a, bb) = (g[0].clone(), g[1].clone());
    let all = bs.vars.clone();
    let not_b: Vec<VarName> = all.iter().filter(|v| !bb.contains(v)).cloned().collect();
    let es = gen_system(
        rng,
        &bs.l,
        &bs.vars,
        |k| {
            if a.contains(&all[k]) {
                not_b.clone()
            } else {
                all.clone()
            }
        },
        neg,
    );
    (bs, es, a, bb)
}

fn gen_indepsolve(rng: &mut ChaCha8Rng, cfg: &GenConfig) -> Instance {
    let (b, es, a, bb) = blocked(rng, cfg, false);
    let s1 = spec_of(rng, &a);
    let mut s2v = bb.clone();
    if rng.gen_bool(0.2) {
        s2v.push(a.choose(rng).expect("nonempty").clone());
    }
    s2v.shuffle(rng);
    let s2 = spec_of(rng, &s2v);
    let eta = gen_valuation(rng, &b.l, b.vars.len());
    Instance::new(es, vec![s1, s2], eta)
}

fn check_indepsolve(i: &Instance, cfg: &GenConfig) -> Verdict {
    let (s1, s2) = (i.b(0), i.b(1));
    if !try_v!(indep_spec(&i.es, s1, s2, cfg.graph_mode)) {
        return Verdict::Vacuous;
    }
    for eta in i.etas() {
        let lhs = try_v!(sem(&i.es, &s1.concat(s2), &eta));
        let mid = try_v!(sem(&i.es, s1, &eta));
        let rhs = try_v!(sem(&i.es, s2, &mid));
        if lhs != rhs {
            return Verdict::Violated(format!(
                "at eta = {}: joint {} but staged {}",
                vals(&i.es, &eta),
                vals(&i.es, &lhs),
                vals(&i.es, &rhs)
            ));
        }
    }
    Verdict::Holds
}

fn gen_indepsolve2(rng: &mut ChaCha8Rng, cfg: &GenConfig) -> Instance {
    let (b, es, a, bb) = blocked(rng, cfg, false);
    // a is independent of b, so a plays S2
    let s1 = spec_of(rng, &bb);
    let s2 = spec_of(rng, &a);
    let eta = gen_valuation(rng, &b.l, b.vars.len());
    Instance::new(es, vec![s1, s2], eta)
}

fn check_indepsolve2(i: &Instance, cfg: &GenConfig) -> Verdict {
    let (s1, s2) = (i.b(0), i.b(1));
    if !s1.disjoint(s2) || !try_v!(indep_spec(&i.es, s2, s1, cfg.graph_mode)) {
        return Verdict::Vacuous;
    }
    for eta in i.etas() {
        let lhs = try_v!(sem(&i.es, &s1.concat(s2), &eta));
        let mid = try_v!(sem(&i.es, s2, &eta));
        let rhs = try_v!(sem(&i.es, s1, &mid));
        if lhs != rhs {
            return Verdict::Violated(format!(
                "at eta = {}: joint {} but staged {}",
                vals(&i.es, &eta),
                vals(&i.es, &lhs),
                vals(&i.es, &rhs)
            ));
        }
    }
    Verdict::Holds
}

// unfolding

fn gen_unfold(rng: &mut ChaCha8Rng, cfg: &GenConfig) -> Instance {
    let b = base(rng, cfg, 1);
    let es = plain_system(rng, &b, false);
    let spec = random_spec(rng, &b.vars, 1);
    let p = rng.gen_range(0..spec.len());
    let blocks = vec![
        spec.slice(0..p),
        spec.slice(p..p + 1),
        spec.slice(p + 1..spec.len()),
    ];
    let y = spec.entries()[p].1.clone();
    let x = if cfg.mutation == Some(Mutation::ForcedUnfold) && !blocks[2].is_empty() {
        blocks[2].entries().choose(rng).expect("nonempty").1.clone()
    } else {
        let allowed: Vec<&VarName> = b.vars.iter().filter(|v| !blocks[2].contains(v)).collect();
        (*allowed.choose(rng).expect("y is allowed")).clone()
    };
    let mut es = es;
    let mut blocks = blocks;
    if cfg.mutation == Some(Mutation::ForcedUnfold) && x != y {
        // a loop through X and Y, as in the classic failing unfold
        let (xi, yi) = (
            es.var_index(&x).expect("var"),
            es.var_index(&y).expect("var"),
        );
        let ey = Expr::or(Expr::Var(x.clone()), gen_expr(rng, &b.l, &b.vars, 1, false));
        let ex = Expr::and(Expr::Var(y.clone()), gen_expr(rng, &b.l, &b.vars, 1, false));
        es = es
            .with_rhs(yi, ey)
            .and_then(|e| e.with_rhs(xi, ex))
            .expect("same vars");
        let below = blocks[2]
            .entries()
            .iter()
            .find(|(_, v)| *v == x)
            .map(|e| e.0);
        if let (Some(sx), true) = (below, rng.gen_bool(0.7)) {
            blocks[1] = Spec::new(vec![(sx.flipped(), y.clone())]);
        }
    }
    let eta = gen_valuation(rng, &b.l, b.vars.len());
    let mut inst = Instance::new(es, blocks, eta);
    inst.x = Some(x);
    inst.y = Some(y);
    inst
}

fn check_unfold(i: &Instance, cfg: &GenConfig) -> Verdict {
    let (x, y) = (i.x.as_ref().expect("x"), i.y.as_ref().expect("y"));
    let forced = cfg.mutation == Some(Mutation::ForcedUnfold);
    match single(i.b(1)) {
        Some((_, v)) if &v == y => {}
        _ => return Verdict::Vacuous,
    }
    if i.es.var_index(x).is_none() || (!forced && i.b(2).contains(x)) || !monotone(&i.es) {
        return Verdict::Vacuous;
    }
    let spec = i.spec();
    let es2 = try_v!(unfold_es(&i.es, x, y));
    let v = compare(&es2, &spec, &i.es, &spec, &i.etas(), false);
    if v != Verdict::Holds || forced {
        return v;
    }
    let fes = fes_of(&i.es, spec);
    let o = TransformOptions {
        force: forced,
        ..opts(cfg)
    };
    transform_verdict(&fes, apply_unfold(&fes, x, y, o), &i.etas(), "unfold")
}

fn gen_unfold_loop(rng: &mut ChaCha8Rng, cfg: &GenConfig) -> Instance {
    let b = base(rng, cfg, 2);
    let es = sparse_system(rng, &b);
    let spec = random_spec(rng, &b.vars, 1);
    let p = rng.gen_range(0..spec.len());
    let y = spec.entries()[p].1.clone();
    let later = spec.slice(p + 1..spec.len());
    let x = if !later.is_empty() && rng.gen_bool(0.7) {
        later.entries().choose(rng).expect("nonempty").1.clone()
    } else {
        b.vars.choose(rng).expect("vars").clone()
    };
    let eta = gen_valuation(rng, &b.l, b.vars.len());
    let mut inst = Instance::new(es, vec![spec], eta);
    inst.x = Some(x);
    inst.y = Some(y);
    inst
}

fn check_unfold_loop(i: &Instance, cfg: &GenConfig) -> Verdict {
    let (x, y) = (i.x.as_ref().expect("x"), i.y.as_ref().expect("y"));
    let spec = i.b(0);
    if i.es.var_index(x).is_none() || !spec.contains(y) || !monotone(&i.es) {
        return Verdict::Vacuous;
    }
    let g = try_v!(build_graph_on(&i.es, spec, cfg.graph_mode));
    if g.reaches(y, x) {
        return Verdict::Vacuous;
    }
    let es2 = try_v!(unfold_es(&i.es, x, y));
    let v = compare(&es2, spec, &i.es, spec, &i.etas(), false);
    if v != Verdict::Holds {
        return v;
    }
    let fes = fes_of(&i.es, spec.clone());
    transform_verdict(
        &fes,
        apply_unfold(&fes, x, y, opts(cfg)),
        &i.etas(),
        "unfold",
    )
}

fn gen_partial(rng: &mut ChaCha8Rng, cfg: &GenConfig) -> Instance {
    gen_plain(rng, cfg)
}

fn check_partial(i: &Instance, cfg: &GenConfig) -> Verdict {
    let x = i.x.as_ref().expect("x");
    let Some(k) = i.es.var_index(x) else {
        return Verdict::Vacuous;
    };
    if !monotone(&i.es) {
        return Verdict::Vacuous;
    }
    let spec = i.b(0);
    let before = try_v!(sem(&i.es, spec, &i.eta));
    let es2 = try_v!(i.es.with_rhs(k, Expr::Const(before.get(k))));
    let v = compare(&es2, spec, &i.es, spec, std::slice::from_ref(&i.eta), false);
    if v != Verdict::Holds {
        return v;
    }
    let fes = fes_of(&i.es, spec.clone());
    transform_verdict(
        &fes,
        apply_partial(&fes, x, &i.eta, opts(cfg)),
        std::slice::from_ref(&i.eta),
        "partial",
    )
}

// swapping and migration

/// `[S1, [s X], [r Y], S2]` cut from a random spec at a random position.
fn pair_blocks(rng: &mut ChaCha8Rng, spec: &Spec) -> Vec<Spec> {
    let n = spec.len();
    let p = rng.gen_range(0..n - 1);
    vec![
        spec.slice(0..p),
        spec.slice(p..p + 1),
        spec.slice(p + 1..p + 2),
        spec.slice(p + 2..n),
    ]
}

fn gen_swap_same(rng: &mut ChaCha8Rng, cfg: &GenConfig) -> Instance {
    let b = base(rng, cfg, 2);
    let es = plain_system(rng, &b, false);
    let spec = random_spec(rng, &b.vars, 2);
    let mut blocks = pair_blocks(rng, &spec);
    let s = blocks[1].entries()[0].0;
    blocks[2] = Spec::new(vec![(s, blocks[2].entries()[0].1.clone())]);
    let eta = gen_valuation(rng, &b.l, b.vars.len());
    Instance::new(es, blocks, eta)
}

fn swapped_spec(i: &Instance) -> Spec {
    i.b(0).concat(i.b(2)).concat(i.b(1)).concat(i.b(3))
}

fn swap_input(i: &Instance) -> Option<(Spec, usize)> {
    single(i.b(1))?;
    single(i.b(2))?;
    Some((i.spec(), i.b(0).len()))
}

fn check_swap_same(i: &Instance, cfg: &GenConfig) -> Verdict {
    let Some((spec, at)) = swap_input(i) else {
        return Verdict::Vacuous;
    };
    if i.b(1).entries()[0].0 != i.b(2).entries()[0].0 || !monotone(&i.es) {
        return Verdict::Vacuous;
    }
    let v = compare(&i.es, &spec, &i.es, &swapped_spec(i), &i.etas(), false);
    if v != Verdict::Holds {
        return v;
    }
    let fes = fes_of(&i.es, spec);
    transform_verdict(&fes, apply_swap(&fes, at, opts(cfg)), &i.etas(), "swap")
}

fn gen_swap_loop(rng: &mut ChaCha8Rng, cfg: &GenConfig) -> Instance {
    let b = base(rng, cfg, 2);
    let es = sparse_system(rng, &b);
    let spec = random_spec(rng, &b.vars, 2);
    let mut blocks = pair_blocks(rng, &spec);
    if rng.gen_bool(0.7) {
        let (s, v) = blocks[1].entries()[0].clone();
        blocks[2] = Spec::new(vec![(s.flipped(), blocks[2].entries()[0].1.clone())]);
        blocks[1] = Spec::new(vec![(s, v)]);
    }
    let eta = gen_valuation(rng, &b.l, b.vars.len());
    Instance::new(es, blocks, eta)
}

fn check_swap_loop(i: &Instance, cfg: &GenConfig) -> Verdict {
    let Some((spec, at)) = swap_input(i) else {
        return Verdict::Vacuous;
    };
    if !monotone(&i.es) {
        return Verdict::Vacuous;
    }
    let x = &i.b(1).entries()[0].1;
    let y = &i.b(2).entries()[0].1;
    let tail = i.b(1).concat(i.b(2)).concat(i.b(3));
    let g = try_v!(build_graph_on(&i.es, &tail, cfg.graph_mode));
    if g.reaches(x, y) {
        return Verdict::Vacuous;
    }
    let v = compare(&i.es, &spec, &i.es, &swapped_spec(i), &i.etas(), false);
    if v != Verdict::Holds {
        return v;
    }
    let fes = fes_of(&i.es, spec);
    transform_verdict(&fes, apply_swap(&fes, at, opts(cfg)), &i.etas(), "swap")
}

fn gen_migration(rng: &mut ChaCha8Rng, cfg: &GenConfig) -> Instance {
    if cfg.mutation == Some(Mutation::MigrationNoIndep) {
        let b = base(rng, cfg, 2);
        let es = plain_system(rng, &b, false);
        let g = partition(rng, &b.vars, &[1, 1]);
        let (s1, s2) = (spec_of(rng, &g[0]), spec_of(rng, &g[1]));
        let eta = gen_valuation(rng, &b.l, b.vars.len());
        return Instance::new(es, vec![s1, s2], eta);
    }
    let (b, es, a, bb) = blocked(rng, cfg, false);
    let (s1, s2) = (spec_of(rng, &a), spec_of(rng, &bb));
    let eta = gen_valuation(rng, &b.l, b.vars.len());
    Instance::new(es, vec![s1, s2], eta)
}

fn check_migration(i: &Instance, cfg: &GenConfig) -> Verdict {
    let (s1, s2) = (i.b(0), i.b(1));
    if !s1.disjoint(s2) {
        return Verdict::Vacuous;
    }
    if cfg.mutation != Some(Mutation::MigrationNoIndep)
        && !try_v!(indep_spec(&i.es, s1, s2, cfg.graph_mode))
    {
        return Verdict::Vacuous;
    }
    compare(
        &i.es,
        &s1.concat(s2),
        &i.es,
        &s2.concat(s1),
        &i.etas(),
        false,
    )
}

fn gen_migration2(rng: &mut ChaCha8Rng, cfg: &GenConfig) -> Instance {
    let b = base(rng, cfg, 2);
    let g = partition(rng, &b.vars, &[1, 1]);
    let (a, rest) = (g[0].clone(), g[1].clone());
    let all = b.vars.clone();
    let a_first = rng.gen_bool(0.5);
    let avoid = |own: &Vec<VarName>, other: &Vec<VarName>| -> Vec<VarName> {
        all.iter()
            .filter(|v| own.contains(v) || !other.contains(v))
            .cloned()
            .collect()
    };
    let (pa, pr) = (avoid(&a, &rest), avoid(&rest, &a));
    let es = gen_system(
        rng,
        &b.l,
        &b.vars,
        |k| match (a.contains(&all[k]), a_first) {
            (true, true) => pa.clone(),
            (false, false) => pr.clone(),
            _ => all.clone(),
        },
        false,
    );
    let s1 = spec_of(rng, &a);
    let mut r = rest.clone();
    r.shuffle(rng);
    let cut = rng.gen_range(1..=r.len());
    let s2 = spec_of(rng, &r[..cut]);
    let s3 = spec_of(rng, &r[cut..]);
    let s0 = random_spec(rng, &b.vars, 0);
    let s0 = s0.slice(0..s0.len().min(2));
    let eta = gen_valuation(rng, &b.l, b.vars.len());
    Instance::new(es, vec![s0, s1, s2, s3], eta)
}

fn check_migration2(i: &Instance, cfg: &GenConfig) -> Verdict {
    let (s0, s1, s2, s3) = (i.b(0), i.b(1), i.b(2), i.b(3));
    let rest = s2.concat(s3);
    let m = cfg.graph_mode;
    if !s1.disjoint(&rest) {
        return Verdict::Vacuous;
    }
    if !try_v!(indep_spec(&i.es, s1, &rest, m)) && !try_v!(indep_spec(&i.es, &rest, s1, m)) {
        return Verdict::Vacuous;
    }
    let before = i.spec();
    let after = s0.concat(s2).concat(s1).concat(s3);
    let v = compare(&i.es, &before, &i.es, &after, &i.etas(), false);
    if v != Verdict::Holds {
        return v;
    }
    let fes = fes_of(&i.es, before);
    let (a, b, c) = (
        s0.len(),
        s0.len() + s1.len(),
        s0.len() + s1.len() + s2.len(),
    );
    transform_verdict(
        &fes,
        apply_migrate(&fes, a..b, b..c, opts(cfg)),
        &i.etas(),
        "migrate",
    )
}

fn check_splitsolve(i: &Instance, cfg: &GenConfig) -> Verdict {
    let x = i.x.as_ref().expect("x");
    let fes = fes_of(&i.es, i.b(0).clone());
    if fes.spec.has_duplicates() {
        return Verdict::Vacuous;
    }
    let (s1, s2) = try_v!(split_by_dep(x, &fes, cfg.graph_mode));
    let etas = i.etas();
    match compare(&i.es, &fes.spec, &i.es, &s1.concat(&s2), &etas, false) {
        Verdict::Holds => compare(&i.es, &fes.spec, &i.es, &s2.concat(&s1), &etas, false),
        v => v,
    }
}

// signs

fn sign_blocks(rng: &mut ChaCha8Rng, spec: &Spec) -> Vec<Spec> {
    let n = spec.len();
    let p = rng.gen_range(0..n);
    let x = spec.entries()[p].1.clone();
    vec![
        spec.slice(0..p),
        Spec::new(vec![(Sign::Mu, x)]),
        spec.slice(p + 1..n),
    ]
}

fn gen_sign_loop(rng: &mut ChaCha8Rng, cfg: &GenConfig) -> Instance {
    let b = base(rng, cfg, 1);
    let es = sparse_system(rng, &b);
    let spec = random_spec(rng, &b.vars, 1);
    let blocks = sign_blocks(rng, &spec);
    let eta = gen_valuation(rng, &b.l, b.vars.len());
    Instance::new(es, blocks, eta)
}

fn flipped_mid(i: &Instance) -> Spec {
    let (_, x) = i.b(1).entries()[0].clone();
    i.b(0)
        .concat(&Spec::new(vec![(Sign::Nu, x)]))
        .concat(i.b(2))
}

fn check_sign_loop(i: &Instance, cfg: &GenConfig) -> Verdict {
    let Some((Sign::Mu, x)) = single(i.b(1)) else {
        return Verdict::Vacuous;
    };
    if i.b(2).contains(&x) || !monotone(&i.es) {
        return Verdict::Vacuous;
    }
    let g = try_v!(build_graph_on(
        &i.es,
        &i.b(1).concat(i.b(2)),
        cfg.graph_mode
    ));
    if g.reaches_nonempty(&x, &x) {
        return Verdict::Vacuous;
    }
    let spec = i.spec();
    let v = compare(&i.es, &spec, &i.es, &flipped_mid(i), &i.etas(), false);
    if v != Verdict::Holds {
        return v;
    }
    let fes = fes_of(&i.es, spec);
    transform_verdict(
        &fes,
        apply_sign_flip(&fes, i.b(0).len(), opts(cfg)),
        &i.etas(),
        "sign flip",
    )
}

fn gen_sign_ineq(rng: &mut ChaCha8Rng, cfg: &GenConfig) -> Instance {
    let b = base(rng, cfg, 1);
    let es = plain_system(rng, &b, false);
    let spec = random_spec(rng, &b.vars, 1);
    let blocks = sign_blocks(rng, &spec);
    let eta = gen_valuation(rng, &b.l, b.vars.len());
    Instance::new(es, blocks, eta)
}

fn check_sign_ineq(i: &Instance, cfg: &GenConfig) -> Verdict {
    let Some((Sign::Mu, _)) = single(i.b(1)) else {
        return Verdict::Vacuous;
    };
    if !monotone(&i.es) {
        return Verdict::Vacuous;
    }
    let spec = i.spec();
    let v = compare(&i.es, &spec, &i.es, &flipped_mid(i), &i.etas(), true);
    if v != Verdict::Holds {
        return v;
    }
    let fes = fes_of(&i.es, spec);
    let o = TransformOptions {
        allow_ineq: true,
        ..opts(cfg)
    };
    match apply_sign_flip(&fes, i.b(0).len(), o) {
        Ok(r) if !matches!(r.relation, Relation::Equal | Relation::Geq) => {
            Verdict::Violated(format!("mu to nu reported as {}", r.relation))
        }
        r => transform_verdict(&fes, r, &i.etas(), "sign flip"),
    }
}

fn gen_mig_ineq(rng: &mut ChaCha8Rng, cfg: &GenConfig) -> Instance {
    let b = base(rng, cfg, 2);
    let es = plain_system(rng, &b, false);
    let spec = random_spec(rng, &b.vars, 2);
    let mut blocks = pair_blocks(rng, &spec);
    blocks[1] = Spec::new(vec![(Sign::Mu, blocks[1].entries()[0].1.clone())]);
    blocks[2] = Spec::new(vec![(Sign::Nu, blocks[2].entries()[0].1.clone())]);
    let eta = gen_valuation(rng, &b.l, b.vars.len());
    Instance::new(es, blocks, eta)
}

fn check_mig_ineq(i: &Instance, cfg: &GenConfig) -> Verdict {
    let (Some((Sign::Mu, x)), Some((Sign::Nu, y))) = (single(i.b(1)), single(i.b(2))) else {
        return Verdict::Vacuous;
    };
    if x == y || !monotone(&i.es) {
        return Verdict::Vacuous;
    }
    let spec = i.spec();
    let v = compare(&i.es, &spec, &i.es, &swapped_spec(i), &i.etas(), true);
    if v != Verdict::Holds {
        return v;
    }
    let fes = fes_of(&i.es, spec);
    let o = TransformOptions {
        allow_ineq: true,
        ..opts(cfg)
    };
    match apply_swap(&fes, i.b(0).len(), o) {
        Ok(r) if !matches!(r.relation, Relation::Equal | Relation::Geq) => {
            Verdict::Violated(format!("mu/nu swap reported as {}", r.relation))
        }
        r => transform_verdict(&fes, r, &i.etas(), "swap"),
    }
}

fn gen_dup(rng: &mut ChaCha8Rng, cfg: &GenConfig) -> Instance {
    let b = base(rng, cfg, 1);
    let es = plain_system(rng, &b, false);
    let spec = random_spec(rng, &b.vars, 1);
    let x = spec.entries().choose(rng).expect("nonempty").1.clone();
    let head = Spec::new(vec![(rand_sign(rng), x)]);
    let eta = gen_valuation(rng, &b.l, b.vars.len());
    Instance::new(es, vec![head, spec], eta)
}

fn check_dup(i: &Instance, _: &GenConfig) -> Verdict {
    let Some((_, x)) = single(i.b(0)) else {
        return Verdict::Vacuous;
    };
    if !i.b(1).contains(&x) {
        return Verdict::Vacuous;
    }
    compare(&i.es, &i.spec(), &i.es, i.b(1), &i.etas(), false)
}

// negative fixtures: each must observe the expected failure

fn parse(src: &str) -> Fes {
    crate::syntax::parse_fes(src).expect("fixture parses")
}

fn fixture_exunfold() -> Result<(), String> {
    let b1 = parse("nu Y = X;\nmu X = Y;\n");
    let (x, y) = (VarName::new("X"), VarName::new("Y"));
    if apply_unfold(&b1, &x, &y, TransformOptions::default()).is_ok() {
        return Err("unfold of Y into X was accepted".into());
    }
    let forced = apply_unfold(
        &b1,
        &x,
        &y,
        TransformOptions {
            force: true,
            ..Default::default()
        },
    )
    .map_err(|e| e.to_string())?;
    let eta = b1.es.bottom_valuation();
    let (a, b) = (
        b1.solve(&eta).map_err(|e| e.to_string())?,
        forced.result.solve(&eta).map_err(|e| e.to_string())?,
    );
    if a == b {
        return Err("forced unfold kept the solution".into());
    }
    Ok(())
}

fn fixture_bseries() -> Result<(), String> {
    let b3 = parse("mu X = Y;\nmu Y = X;\nnu Z = W;\nmu W = Z;\n");
    let b6 = parse("mu X = Y;\nmu Y = X;\nmu W = Z;\nnu Z = W;\n");
    let eta = b3.es.bottom_valuation();
    let r3 = b3.solve(&eta).map_err(|e| e.to_string())?;
    let r6 = b6.solve(&eta).map_err(|e| e.to_string())?;
    let l = b3.es.lattice();
    let strictly_below = |name: &str| {
        let k = b3.es.index_of(name).expect("var");
        l.leq(r6.get(k), r3.get(k)) && r6.get(k) != r3.get(k)
    };
    if !(r6.leq(l, &r3) && strictly_below("Z") && strictly_below("W")) {
        return Err(format!(
            "B6 = {} is not strictly below B3 = {} on Z, W",
            vals(&b3.es, &r6),
            vals(&b3.es, &r3)
        ));
    }
    Ok(())
}

fn fixture_migration2() -> Result<(), String> {
    let b4 = parse("mu X = Y;\nnu Z = W;\nmu Y = X;\nmu W = Z;\n");
    match apply_migrate(&b4, 0..1, 1..2, TransformOptions::default()) {
        Err(_) => Ok(()),
        Ok(_) => Err("moving mu X past nu Z alone was accepted".into()),
    }
}

fn fixture_congr_r() -> Result<(), String> {
    // equal on their own, different below a common suffix they depend on
    let es = parse("eq Y = X;\neq X = Y;\nspec mu Y;").es;
    let s1 = Spec::new(vec![(Sign::Mu, "Y".into())]);
    let s2 = Spec::new(vec![(Sign::Nu, "Y".into())]);
    let s = Spec::new(vec![(Sign::Mu, "X".into())]);
    if holds_everywhere(&es, &s1, &es, &s2, false) != Some(true) {
        return Err("the two heads differ on their own".into());
    }
    if indep_spec(&es, &s1, &s, GraphMode::Syntactic).unwrap_or(true) {
        return Err("fixture unexpectedly satisfies independence".into());
    }
    match holds_everywhere(&es, &s1.concat(&s), &es, &s2.concat(&s), false) {
        Some(false) => Ok(()),
        _ => Err("appending the suffix kept the semantics equal".into()),
    }
}

// shrinking

fn shrink_expr_candidates(l: &FiniteLattice, e: &Expr) -> Vec<Expr> {
    // every candidate is strictly smaller, with constants ordered bottom first
    let mut out: Vec<Expr> = e.children().to_vec();
    match e {
        Expr::Const(c) if *c != l.bottom() => out.push(Expr::Const(l.bottom())),
        Expr::Const(_) => {}
        _ => {
            out.push(Expr::Const(l.bottom()));
            out.push(Expr::Const(l.top()));
        }
    }
    if let Expr::Meet(xs) | Expr::Join(xs) = e {
        for j in 0..xs.len() {
            if xs.len() > 2 {
                let mut ys = xs.clone();
                ys.remove(j);
                out.push(if matches!(e, Expr::Meet(_)) {
                    Expr::Meet(ys)
                } else {
                    Expr::Join(ys)
                });
            }
        }
    }
    out
}

fn candidates(i: &Instance) -> Vec<Instance> {
    let mut out = Vec::new();
    for b in 0..i.blocks.len() {
        for k in 0..i.blocks[b].len() {
            let mut e = i.blocks[b].entries().to_vec();
            e.remove(k);
            let mut c = i.clone();
            c.blocks[b] = Spec::new(e);
            out.push(c);
        }
    }
    let l = i.es.lattice();
    for k in 0..i.es.len() {
        let cur = i.es.rhs(k);
        for e in shrink_expr_candidates(l, cur) {
            let mut c = i.clone();
            c.es = i.es.with_rhs(k, e.clone()).expect("same vars");
            if let Some(es2) = &i.es2 {
                if es2.rhs(k) == cur {
                    c.es2 = Some(es2.with_rhs(k, e).expect("same vars"));
                }
            }
            out.push(c);
        }
        if let Some(es2) = &i.es2 {
            if es2.rhs(k) != cur {
                for e in shrink_expr_candidates(l, es2.rhs(k)) {
                    let mut c = i.clone();
                    c.es2 = Some(es2.with_rhs(k, e).expect("same vars"));
                    out.push(c);
                }
            }
        }
    }
    let bot = i.es.bottom_valuation();
    for k in 0..i.eta.len() {
        if i.eta.get(k) != l.bottom() {
            let mut c = i.clone();
            c.eta = i.eta.with(k, l.bottom());
            out.push(c);
        }
    }
    if let Some(e2) = &i.eta2 {
        if *e2 != bot {
            let mut c = i.clone();
            c.eta2 = Some(bot);
            out.push(c);
        }
    }
    out
}

fn shrink(
    mut inst: Instance,
    mut detail: String,
    check: impl Fn(&Instance) -> Verdict,
) -> (Instance, String) {
    for _ in 0..500 {
        let next = candidates(&inst).into_iter().find_map(|c| match check(&c) {
            Verdict::Violated(d) => Some((c, d)),
            _ => None,
        });
        match next {
            Some((c, d)) => {
                inst = c;
                detail = d;
            }
            None => break,
        }
    }
    (inst, detail)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg(cases: usize) -> GenConfig {
        GenConfig {
            seed: 7,
            cases,
            max_vars: 4,
            families: vec![Family::Bool, Family::Chain(3), Family::Diamond],
            ..Default::default()
        }
    }

    #[test]
    fn family_parsing() {
        assert_eq!("chain 3".parse::<Family>().unwrap(), Family::Chain(3));
        assert_eq!("powerset2".parse::<Family>().unwrap(), Family::Powerset(2));
        assert!("chain 9".parse::<Family>().is_err());
        assert_eq!(
            Family::parse_list("bool, diamond").unwrap(),
            vec![Family::Bool, Family::Diamond]
        );
        for f in Family::all() {
            assert_eq!(f.to_string().parse::<Family>().unwrap(), f);
        }
    }

    #[test]
    fn prop_parsing() {
        assert_eq!(parse_props("all").unwrap().len(), PROPERTIES.len());
        assert_eq!(
            parse_props("migration, unfold").unwrap(),
            vec!["MIGRATION", "UNFOLD"]
        );
        assert!(parse_props("NOPE").is_err());
        assert!(parse_props("").unwrap().is_empty());
        assert!(run_suite(&cfg(1), &[]).unwrap().is_empty());
    }

    #[test]
    fn generation_is_deterministic_and_bounded() {
        let c = GenConfig {
            max_vars: 6,
            families: Family::all(),
            ..cfg(1)
        };
        for case in 0..200 {
            let a = gen_plain(&mut case_rng(1, "X", case), &c);
            let b = gen_plain(&mut case_rng(1, "X", case), &c);
            assert_eq!(a.render(""), b.render(""));
            assert!(a.es.len() <= 6);
            assert!((a.es.lattice().len() as u128).pow(a.es.len() as u32) <= MAX_VALUATIONS);
            assert!(a.es.is_structurally_monotone());
            assert!(!a.b(0).has_duplicates());
        }
    }

    #[test]
    fn random_tables_are_monotone() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..200 {
            let l = random_lattice(&mut rng);
            assert!(l.len() <= 5);
            assert!(l.is_monotone(&random_monotone_unary(&mut rng, &l)));
            assert!(random_monotone_binary(&mut rng, &l).is_monotone(&l));
        }
    }

    #[test]
    fn laws_hold() {
        for id in PROPERTIES
            .iter()
            .filter(|p| p.starts_with('L') || **p == "FIX-ITER")
        {
            let r = run_property(&cfg(60), id).unwrap();
            assert!(r.passed(), "{:?}", r.counterexample);
        }
    }

    #[test]
    fn fixtures_observe_failures() {
        for id in PROPERTIES.iter().filter(|p| p.starts_with("NEG-")) {
            let r = run_property(&cfg(1), id).unwrap();
            assert!(r.passed(), "{id}: {:?}", r.counterexample);
        }
    }

    #[test]
    fn theorems_hold_on_small_runs() {
        for id in PROPERTIES
            .iter()
            .filter(|p| !p.starts_with('L') && !p.starts_with("NEG-"))
        {
            let r = run_property(&cfg(20), id).unwrap();
            assert!(r.passed(), "{id}: {:?}", r.counterexample);
            assert_eq!(r.starved, 0, "{id} starved");
        }
    }

    #[test]
    fn mutations_are_caught() {
        for (m, id) in [
            (Mutation::MigrationNoIndep, "MIGRATION"),
            (Mutation::ForcedUnfold, "UNFOLD"),
        ] {
            let c = GenConfig {
                mutation: Some(m),
                ..cfg(200)
            };
            let r = run_property(&c, id).unwrap();
            let cx = r.counterexample.expect("mutation must be caught");
            assert!(cx.text.contains("#! detail"));
            // the shrunk case still parses
            crate::syntax::parse(&cx.text).unwrap();
        }
    }

    #[test]
    fn shrinking_reaches_a_small_case() {
        let c = GenConfig {
            mutation: Some(Mutation::MigrationNoIndep),
            ..cfg(200)
        };
        let r = run_property(&c, "MIGRATION").unwrap();
        let cx = r.counterexample.unwrap();
        assert!(!cx.text.contains("param"), "{}", cx.text);
        let doc = crate::syntax::parse(&cx.text).unwrap();
        assert!(doc.fes.spec.len() <= 3, "{}", cx.text);
    }

    #[test]
    fn results_are_reproducible() {
        let c = cfg(10);
        let a = run_suite(&c, &parse_props("SOLUTION,MIGRATION2").unwrap()).unwrap();
        let b = run_suite(&c, &parse_props("SOLUTION,MIGRATION2").unwrap()).unwrap();
        assert_eq!(a, b);
    }
}
