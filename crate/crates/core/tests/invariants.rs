//! Property tests over randomly generated systems.

use std::collections::BTreeSet;
use std::sync::Arc;

use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use fes_core::checker::{random_lattice, random_monotone_unary};
use fes_core::depgraph::{build_graph, GraphMode};
use fes_core::eqs::{EquationSystem, Expr, Valuation, VarName};
use fes_core::gauss::{gauss_solve, local_solve, scc_solve};
use fes_core::lattice::{FiniteLattice, Sign};
use fes_core::semantics::{Fes, Spec};
use fes_core::syntax::{parse, print, Document};
use fes_core::transforms::{
    apply_migrate, apply_partial, apply_sign_flip, apply_split, apply_swap, apply_unfold,
    reduce_alternations, relation_holds, unfold_es, TransformOptions,
};

const NAMES: [&str; 4] = ["X", "Y", "Z", "W"];

#[derive(Debug, Clone)]
enum Tree {
    Var(usize),
    Const(usize),
    Not(Box<Tree>),
    Meet(Vec<Tree>),
    Join(Vec<Tree>),
}

fn tree() -> impl Strategy<Value = Tree> {
    let leaf = prop_oneof![
        (0..4usize).prop_map(Tree::Var),
        (0..8usize).prop_map(Tree::Const)
    ];
    leaf.prop_recursive(3, 10, 3, |inner| {
        prop_oneof![
            1 => inner.clone().prop_map(|t| Tree::Not(Box::new(t))),
            3 => prop::collection::vec(inner.clone(), 2..=3).prop_map(Tree::Meet),
            3 => prop::collection::vec(inner, 2..=3).prop_map(Tree::Join),
        ]
    })
}

fn lattice(i: usize) -> FiniteLattice {
    match i {
        0 => FiniteLattice::bool(),
        1 => FiniteLattice::chain(3).unwrap(),
        2 => FiniteLattice::diamond(),
        _ => FiniteLattice::powerset(2, 64).unwrap(),
    }
}

/// Negation is only kept over the Boolean lattice, and only when `neg`.
fn to_expr(t: &Tree, n: usize, l: &FiniteLattice, neg: bool) -> Expr {
    match t {
        Tree::Var(i) => Expr::var(NAMES[i % n]),
        Tree::Const(c) => Expr::Const(l.elements().nth(c % l.len()).unwrap()),
        Tree::Not(a) if neg && l.is_bool() => Expr::not(to_expr(a, n, l, neg)),
        Tree::Not(a) => to_expr(a, n, l, neg),
        Tree::Meet(v) => Expr::Meet(v.iter().map(|a| to_expr(a, n, l, neg)).collect()),
        Tree::Join(v) => Expr::Join(v.iter().map(|a| to_expr(a, n, l, neg)).collect()),
    }
}

#[derive(Debug, Clone)]
struct Raw {
    lattice: usize,
    n: usize,
    rhs: Vec<Tree>,
    spec: Vec<(bool, usize)>,
    eta: Vec<usize>,
}

fn raw() -> impl Strategy<Value = Raw> {
    (
        0..4usize,
        1..=4usize,
        prop::collection::vec(tree(), 4),
        prop::collection::vec((any::<bool>(), 0..4usize), 0..=5),
        prop::collection::vec(0..8usize, 4),
    )
        .prop_map(|(lattice, n, rhs, spec, eta)| Raw {
            lattice,
            n,
            rhs,
            spec,
            eta,
        })
}

struct Built {
    fes: Fes,
    eta: Valuation,
}

/// `closed` binds every variable once, in generated order then the rest.
fn build(r: &Raw, neg: bool, closed: bool, bool_only: bool) -> Built {
    let l = Arc::new(lattice(if bool_only { 0 } else { r.lattice }));
    let eqs = (0..r.n)
        .map(|i| (VarName::new(NAMES[i]), to_expr(&r.rhs[i], r.n, &l, neg)))
        .collect();
    let es = EquationSystem::with_standard_ops(l.clone(), eqs).unwrap();
    let mut entries = Vec::new();
    let mut seen = BTreeSet::new();
    for &(mu, v) in &r.spec {
        let v = v % r.n;
        if closed && !seen.insert(v) {
            continue;
        }
        entries.push((if mu { Sign::Mu } else { Sign::Nu }, VarName::new(NAMES[v])));
    }
    if closed {
        for (v, name) in NAMES.iter().enumerate().take(r.n) {
            if seen.insert(v) {
                entries.push((Sign::Nu, VarName::new(name)));
            }
        }
    }
    let eta = Valuation::new(
        (0..r.n)
            .map(|i| l.elements().nth(r.eta[i] % l.len()).unwrap())
            .collect(),
    );
    Built {
        fes: Fes::new(es, Spec::new(entries)).unwrap(),
        eta,
    }
}

fn all(es: &EquationSystem) -> Vec<Valuation> {
    es.all_valuations(1 << 12).unwrap().collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn print_then_parse_roundtrips(r in raw(), neg in any::<bool>()) {
        let b = build(&r, neg, false, false);
        let doc = Document { fes: b.fes, eta: b.eta };
        let text = print(&doc);
        let back = parse(&text).unwrap();
        prop_assert_eq!(&back, &doc);
        prop_assert_eq!(print(&back), text);
    }

    #[test]
    fn simplify_preserves_value(r in raw(), neg in any::<bool>()) {
        let b = build(&r, neg, false, false);
        let es = &b.fes.es;
        for i in 0..es.len() {
            let s = es.simplify(es.rhs(i));
            for v in all(es) {
                prop_assert_eq!(es.eval(es.rhs(i), &v).unwrap(), es.eval(&s, &v).unwrap());
            }
        }
    }

    #[test]
    fn structural_monotonicity_is_sound(r in raw(), neg in any::<bool>()) {
        let b = build(&r, neg, false, false);
        if b.fes.es.is_structurally_monotone() {
            prop_assert!(b.fes.es.is_monotone(1 << 12).unwrap());
        }
    }

    #[test]
    fn unfold_touches_one_equation(r in raw(), x in 0..4usize, y in 0..4usize) {
        let b = build(&r, false, false, false);
        let es = &b.fes.es;
        let (x, y) = (VarName::new(NAMES[x % r.n]), VarName::new(NAMES[y % r.n]));
        let out = unfold_es(es, &x, &y).unwrap();
        for i in 0..es.len() {
            if es.vars()[i] != x {
                prop_assert_eq!(out.rhs(i), es.rhs(i));
            }
        }
        // over a spec without x, the unfolded system means the same
        let spec = Spec::new(b.fes.spec.entries().iter().filter(|(_, v)| *v != x).cloned().collect());
        let (f1, f2) = (Fes::new(es.clone(), spec.clone()).unwrap(), Fes::new(out, spec).unwrap());
        prop_assert_eq!(f1.solve(&b.eta).unwrap(), f2.solve(&b.eta).unwrap());
    }

    #[test]
    fn transforms_respect_their_relation(r in raw(), op in 0..7usize, a in 0..5usize, c in 0..5usize, d in 0..5usize) {
        let b = build(&r, false, false, false);
        let fes = &b.fes;
        let len = fes.spec.len();
        let o = TransformOptions { allow_ineq: true, ..Default::default() };
        let v = |i: usize| VarName::new(NAMES[i % r.n]);
        let rep = match op {
            0 => apply_unfold(fes, &v(a), &v(c), o),
            1 => apply_partial(fes, &v(a), &b.eta, o),
            2 => apply_swap(fes, a, o),
            3 => apply_sign_flip(fes, a, o),
            4 => {
                let mut p = [a.min(len), c.min(len), d.min(len)];
                p.sort();
                apply_migrate(fes, p[0]..p[1], p[1]..p[2], o)
            }
            5 => apply_split(fes, &v(a), c % 2 == 0, o),
            _ => reduce_alternations(fes, o),
        };
        if let Ok(rep) = rep {
            let etas = if op == 1 { vec![b.eta.clone()] } else { all(&fes.es) };
            prop_assert!(relation_holds(fes, &rep, &etas).unwrap(), "{:?}", rep.steps);
        }
    }

    #[test]
    fn reduce_never_adds_alternations(r in raw()) {
        let b = build(&r, false, false, false);
        let rep = reduce_alternations(&b.fes, TransformOptions::default()).unwrap();
        prop_assert!(rep.result.spec.alternations() <= b.fes.spec.alternations());
    }

    #[test]
    fn gauss_agrees_with_semantics(r in raw()) {
        let b = build(&r, false, true, true);
        let g = gauss_solve(&b.fes).unwrap();
        prop_assert_eq!(g.valuation, b.fes.solve(&b.eta).unwrap());
    }

    #[test]
    fn scc_agrees_with_semantics(r in raw(), closed in any::<bool>()) {
        let b = build(&r, false, closed, false);
        prop_assert_eq!(scc_solve(&b.fes, &b.eta).unwrap(), b.fes.solve(&b.eta).unwrap());
    }

    #[test]
    fn local_solve_eliminates(r in raw(), x in 0..4usize, mu in any::<bool>()) {
        let b = build(&r, false, false, true);
        let es = &b.fes.es;
        let x = VarName::new(NAMES[x % r.n]);
        let sign = if mu { Sign::Mu } else { Sign::Nu };
        let e = es.rhs_of(&x).unwrap();
        let out = local_solve(es, sign, &x, e).unwrap();
        prop_assert!(!out.mentions(&x));
        // one-equation system: the solved right-hand side is its fixpoint
        let f = Fes::new(es.clone(), Spec::new(vec![(sign, x.clone())])).unwrap();
        for v in all(es) {
            let s = f.solve(&v).unwrap();
            prop_assert_eq!(s.get(es.var_index(&x).unwrap()), es.eval(&out, &v).unwrap());
        }
    }

    #[test]
    fn dependency_graphs_are_consistent(r in raw(), neg in any::<bool>()) {
        let b = build(&r, neg, false, false);
        let syn = build_graph(&b.fes, GraphMode::Syntactic).unwrap();
        let sem = build_graph(&b.fes, GraphMode::Semantic).unwrap();
        for (x, y) in sem.edges() {
            prop_assert!(syn.has_edge(&x, &y));
        }
        let nodes: BTreeSet<VarName> = syn.nodes().cloned().collect();
        let mut seen = BTreeSet::new();
        for c in syn.sccs() {
            for v in c {
                prop_assert!(seen.insert(v));
            }
        }
        prop_assert_eq!(seen, nodes);
    }

    #[test]
    fn iteration_matches_definition(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let l = random_lattice(&mut rng);
        let f = random_monotone_unary(&mut rng, &l);
        prop_assert_eq!(l.mu_iter(&f).unwrap(), l.mu_def(&f));
        prop_assert_eq!(l.nu_iter(&f).unwrap(), l.nu_def(&f));
        prop_assert!(l.leq(l.mu_def(&f), l.nu_def(&f)));
        let d = l.dual().dual();
        for a in l.elements() {
            for b in l.elements() {
                prop_assert_eq!(d.leq(a, b), l.leq(a, b));
            }
        }
    }
}
