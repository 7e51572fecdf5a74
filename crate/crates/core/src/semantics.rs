//! The reference semantics of fixpoint equation systems.
//!
//! `sem(E, eps)(eta) = eta` and
//! `sem(E, sX;S)(eta) = sem(E, S)(eta[X := s(F)])` with
//! `F(P) = E_X(sem(E, S)(eta[X := P]))`. Every solver and transformation in
//! this crate is tested against [`sem`].

use std::collections::BTreeSet;
use std::fmt;

use thiserror::Error;

use crate::eqs::{EqsError, EquationSystem, Valuation, VarName, DEFAULT_MAX_VALUATIONS};
use crate::lattice::{Element, Sign, UnaryFn};

/// Default bound on the number of recursive evaluations one `sem` call may make.
pub const DEFAULT_MAX_EVALS: u128 = 10_000_000;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SemError {
    #[error("spec mentions `{0}`, which has no equation")]
    UnknownVariable(String),
    #[error("semantics needs {required} evaluations, exceeding the guard of {limit}")]
    SizeGuardExceeded { required: u128, limit: u128 },
    #[error("the equation system is not monotone: E({lo}) is not below E({hi})")]
    MonotonicityRequired { lo: String, hi: String },
    #[error(transparent)]
    Eqs(#[from] EqsError),
}

/// An ordered list of signed variables. Duplicates are allowed; the leftmost
/// entry has the highest priority.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default)]
pub struct Spec(Vec<(Sign, VarName)>);

impl Spec {
    pub fn new(entries: Vec<(Sign, VarName)>) -> Self {
        Spec(entries)
    }

    pub fn empty() -> Self {
        Spec(Vec::new())
    }

    pub fn entries(&self) -> &[(Sign, VarName)] {
        &self.0
    }

    pub fn into_entries(self) -> Vec<(Sign, VarName)> {
        self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn get(&self, i: usize) -> Option<&(Sign, VarName)> {
        self.0.get(i)
    }

    pub fn dom(&self) -> BTreeSet<VarName> {
        self.0.iter().map(|(_, v)| v.clone()).collect()
    }

    pub fn contains(&self, v: &VarName) -> bool {
        self.0.iter().any(|(_, w)| w == v)
    }

    pub fn disjoint(&self, other: &Spec) -> bool {
        let d = self.dom();
        other.0.iter().all(|(_, v)| !d.contains(v))
    }

    pub fn has_duplicates(&self) -> bool {
        self.dom().len() != self.0.len()
    }

    /// `self ++ other`
    pub fn concat(&self, other: &Spec) -> Spec {
        let mut v = self.0.clone();
        v.extend(other.0.iter().cloned());
        Spec(v)
    }

    pub fn slice(&self, range: std::ops::Range<usize>) -> Spec {
        Spec(self.0[range].to_vec())
    }

    pub fn push(&mut self, sign: Sign, v: VarName) {
        self.0.push((sign, v));
    }

    /// Number of sign changes scanning left to right.
    pub fn alternations(&self) -> usize {
        self.0.windows(2).filter(|w| w[0].0 != w[1].0).count()
    }
}

impl fmt::Display for Spec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("[")?;
        for (i, (s, v)) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            write!(f, "{s} {v}")?;
        }
        f.write_str("]")
    }
}

/// An equation system together with a spec over its variables.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Fes {
    pub es: EquationSystem,
    pub spec: Spec,
}

impl Fes {
    pub fn new(es: EquationSystem, spec: Spec) -> Result<Self, SemError> {
        if let Some((_, v)) = spec
            .entries()
            .iter()
            .find(|(_, v)| es.var_index(v).is_none())
        {
            return Err(SemError::UnknownVariable(v.to_string()));
        }
        Ok(Fes { es, spec })
    }

    /// Convenience for `sem` with the default guard.
    pub fn solve(&self, eta: &Valuation) -> Result<Valuation, SemError> {
        sem(&self.es, &self.spec, eta)
    }

    /// Solution from the all-bottom valuation.
    pub fn solve_default(&self) -> Result<Valuation, SemError> {
        self.solve(&self.es.bottom_valuation())
    }

    /// True when every variable of the system occurs in the spec.
    pub fn is_closed(&self) -> bool {
        self.spec.dom().len() == self.es.len()
    }

    pub fn with_spec(&self, spec: Spec) -> Fes {
        Fes {
            es: self.es.clone(),
            spec,
        }
    }

    fn indexed_spec(&self) -> Vec<(Sign, usize)> {
        index_spec(&self.es, &self.spec).expect("spec validated at construction")
    }
}

fn index_spec(es: &EquationSystem, spec: &Spec) -> Result<Vec<(Sign, usize)>, SemError> {
    spec.entries()
        .iter()
        .map(|(s, v)| {
            es.var_index(v)
                .map(|i| (*s, i))
                .ok_or_else(|| SemError::UnknownVariable(v.to_string()))
        })
        .collect()
}

/// Number of recursive evaluations `sem` performs: `sum_{i<=k} |U|^i`.
pub fn sem_cost(lattice_size: usize, spec_len: usize) -> u128 {
    let n = lattice_size as u128;
    let mut total: u128 = 0;
    let mut term: u128 = 1;
    for _ in 0..=spec_len {
        total = total.saturating_add(term);
        term = term.saturating_mul(n);
    }
    total
}

/// `sem(E, S)(eta)` with the default guard.
pub fn sem(es: &EquationSystem, spec: &Spec, eta: &Valuation) -> Result<Valuation, SemError> {
    sem_with_limit(es, spec, eta, DEFAULT_MAX_EVALS)
}

pub fn sem_with_limit(
    es: &EquationSystem,
    spec: &Spec,
    eta: &Valuation,
    limit: u128,
) -> Result<Valuation, SemError> {
    let required = sem_cost(es.lattice().len(), spec.len());
    if required > limit {
        return Err(SemError::SizeGuardExceeded { required, limit });
    }
    let indexed = index_spec(es, spec)?;
    Ok(sem_rec(es, &indexed, eta.clone()))
}

fn sem_rec(es: &EquationSystem, spec: &[(Sign, usize)], eta: Valuation) -> Valuation {
    let Some(&(sign, x)) = spec.first() else {
        return eta;
    };
    let rest = &spec[1..];
    let lattice = es.lattice();
    // inner[P] = sem(E, rest)(eta[X := P]); the answer is inner[s(F)]
    let mut inner: Vec<Valuation> = lattice
        .elements()
        .map(|p| sem_rec(es, rest, eta.with(x, p)))
        .collect();
    let f = UnaryFn::new(inner.iter().map(|r| es.eval_var(x, r)).collect());
    let a = lattice.fix(sign, &f);
    inner.swap_remove(a.index())
}

/// Whether two valuations agree on the named variables.
pub fn agrees_on(
    es: &EquationSystem,
    v1: &Valuation,
    v2: &Valuation,
    vars: &BTreeSet<VarName>,
) -> bool {
    vars.iter()
        .filter_map(|v| es.var_index(v))
        .all(|i| v1.get(i) == v2.get(i))
}

/// One failed sanity property, numbered 1 to 3.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SanityViolation {
    pub property: u8,
    pub detail: String,
}

/// Checks the three sanity properties on the given sample valuations:
///
/// 1. variables outside `dom(S)` keep their input value;
/// 2. changing equations outside `dom(S)` does not change the result;
/// 3. inputs that agree outside `dom(S)` give the same result.
///
/// For (2) each equation outside `dom(S)` is replaced by the constants
/// bottom and top in turn.
pub fn check_sanity(fes: &Fes, samples: &[Valuation]) -> Result<Vec<SanityViolation>, SemError> {
    let es = &fes.es;
    let dom: BTreeSet<usize> = fes.indexed_spec().iter().map(|&(_, i)| i).collect();
    let outside: Vec<usize> = (0..es.len()).filter(|i| !dom.contains(i)).collect();
    let mut out = Vec::new();
    let results: Vec<Valuation> = samples
        .iter()
        .map(|eta| fes.solve(eta))
        .collect::<Result<_, _>>()?;

    for (eta, r) in samples.iter().zip(&results) {
        if let Some(&i) = outside.iter().find(|&&i| r.get(i) != eta.get(i)) {
            out.push(SanityViolation {
                property: 1,
                detail: format!("{} changed from input", es.vars()[i]),
            });
        }
    }

    let lattice = es.lattice();
    for c in [lattice.bottom(), lattice.top()] {
        let mut other = es.clone();
        for &i in &outside {
            other = other.with_rhs(i, crate::eqs::Expr::Const(c))?;
        }
        for (eta, r) in samples.iter().zip(&results) {
            if sem(&other, &fes.spec, eta)? != *r {
                out.push(SanityViolation {
                    property: 2,
                    detail: format!(
                        "replacing equations outside the spec by {} changes the result",
                        lattice.label(c)
                    ),
                });
            }
        }
    }

    for (a, (eta1, r1)) in samples.iter().zip(&results).enumerate() {
        for eta2 in samples.iter().skip(a + 1) {
            // eta1 outside dom, eta2 on dom
            let mut mixed = eta1.clone();
            for &i in &dom {
                mixed.set(i, eta2.get(i));
            }
            if fes.solve(&mixed)? != *r1 {
                out.push(SanityViolation {
                    property: 3,
                    detail: "inputs agreeing outside the spec give different results".into(),
                });
            }
        }
    }
    Ok(out)
}

/// Fails with [`SemError::MonotonicityRequired`] when `es` is not monotone.
pub fn require_monotone(es: &EquationSystem) -> Result<(), SemError> {
    match es.non_monotone_witness(DEFAULT_MAX_VALUATIONS)? {
        None => Ok(()),
        Some((lo, hi)) => Err(SemError::MonotonicityRequired {
            lo: format_values(es, &lo),
            hi: format_values(es, &hi),
        }),
    }
}

fn format_values(es: &EquationSystem, v: &Valuation) -> String {
    let parts: Vec<&str> = v.values().iter().map(|&e| es.lattice().label(e)).collect();
    format!("({})", parts.join(","))
}

/// True iff `sem(E, S)(eta)` is a fixpoint of every equation in `dom(S)`.
pub fn check_solution(fes: &Fes, eta: &Valuation) -> Result<bool, SemError> {
    require_monotone(&fes.es)?;
    let r = fes.solve(eta)?;
    Ok(fes
        .indexed_spec()
        .iter()
        .all(|&(_, i)| fes.es.eval_var(i, &r) == r.get(i)))
}

/// Pointwise comparison of two solutions.
pub fn valuation_leq(es: &EquationSystem, a: &Valuation, b: &Valuation) -> bool {
    a.leq(es.lattice(), b)
}

/// Looks up a named variable's value.
pub fn value_of(es: &EquationSystem, v: &Valuation, name: &str) -> Option<Element> {
    es.index_of(name).map(|i| v.get(i))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::eqs::Expr;
    use crate::lattice::FiniteLattice;
    use std::sync::Arc;
    use Sign::{Mu, Nu};

    fn v(s: &str) -> Expr {
        Expr::var(s)
    }

    /// Builds a Boolean FES; the equation order is the spec.
    fn bes(eqs: Vec<(Sign, &str, Expr)>) -> Fes {
        let l = Arc::new(FiniteLattice::bool());
        let spec = Spec::new(eqs.iter().map(|(s, n, _)| (*s, VarName::new(n))).collect());
        let es = EquationSystem::with_standard_ops(
            l,
            eqs.into_iter()
                .map(|(_, n, e)| (VarName::new(n), e))
                .collect(),
        )
        .unwrap();
        Fes::new(es, spec).unwrap()
    }

    fn bits(fes: &Fes, r: &Valuation) -> Vec<bool> {
        r.values()
            .iter()
            .map(|&e| e == fes.es.lattice().top())
            .collect()
    }

    fn gauss_example() -> Fes {
        bes(vec![
            (Mu, "X", Expr::or(v("Y"), v("Z"))),
            (Nu, "Y", v("Z")),
            (Mu, "Z", Expr::and(v("Y"), v("X"))),
        ])
    }

    #[test]
    fn spec_basics() {
        let s = Spec::new(vec![(Mu, "X".into()), (Nu, "Y".into())]);
        assert_eq!(s.dom().len(), 2);
        assert!(Spec::empty().dom().is_empty());
        assert!(!Spec::new(vec![(Mu, "X".into())]).disjoint(&Spec::new(vec![(Nu, "X".into())])));
        assert_eq!(s.alternations(), 1);
    }

    #[test]
    fn agrees_on_examples() {
        let fes = bes(vec![(Mu, "X", v("X")), (Mu, "Y", v("Y"))]);
        let es = &fes.es;
        let (f, t) = (es.lattice().bottom(), es.lattice().top());
        let a = Valuation::new(vec![f, t]);
        let b = Valuation::new(vec![t, t]);
        let set = |xs: &[&str]| xs.iter().map(|x| VarName::new(x)).collect::<BTreeSet<_>>();
        assert!(agrees_on(es, &a, &a, &set(&["X", "Y"])));
        assert!(agrees_on(es, &a, &b, &set(&["Y"])));
        assert!(!agrees_on(es, &a, &b, &set(&["X", "Y"])));
    }

    #[test]
    fn empty_spec_is_identity() {
        let fes = gauss_example().with_spec(Spec::empty());
        for eta in fes.es.all_valuations(100).unwrap() {
            assert_eq!(fes.solve(&eta).unwrap(), eta);
        }
    }

    #[test]
    fn gauss_example_solution() {
        let fes = gauss_example();
        for eta in fes.es.all_valuations(100).unwrap() {
            assert_eq!(bits(&fes, &fes.solve(&eta).unwrap()), vec![false; 3]);
        }
        assert!(check_solution(&fes, &fes.es.bottom_valuation()).unwrap());
    }

    #[test]
    fn b1_and_b2() {
        let b1 = bes(vec![(Nu, "Y", v("X")), (Mu, "X", v("Y"))]);
        let b2 = bes(vec![(Nu, "Y", v("X")), (Mu, "X", v("X"))]);
        assert_eq!(bits(&b1, &b1.solve_default().unwrap()), vec![true, true]);
        assert_eq!(bits(&b2, &b2.solve_default().unwrap()), vec![false, false]);
    }

    #[test]
    fn b3_solution_satisfies_equations() {
        let b3 = bes(vec![
            (Mu, "X", v("Y")),
            (Mu, "Y", v("X")),
            (Nu, "Z", v("W")),
            (Mu, "W", v("Z")),
        ]);
        let r = b3.solve_default().unwrap();
        assert_eq!(bits(&b3, &r), vec![false, false, true, true]);
        assert!(check_solution(&b3, &r).unwrap());
    }

    #[test]
    fn non_monotone_semantics_uses_definition() {
        // mu X = !X: pre-fixpoints of negation are {true}, so mu = true
        let fes = bes(vec![(Mu, "X", Expr::not(v("X")))]);
        assert_eq!(bits(&fes, &fes.solve_default().unwrap()), vec![true]);
        let fes = bes(vec![(Nu, "X", Expr::not(v("X")))]);
        assert_eq!(bits(&fes, &fes.solve_default().unwrap()), vec![false]);
        assert!(matches!(
            check_solution(&fes, &fes.es.bottom_valuation()),
            Err(SemError::MonotonicityRequired { .. })
        ));
    }

    #[test]
    fn sanity_on_open_system() {
        let fes = bes(vec![
            (Mu, "X", Expr::or(v("Y"), v("P"))),
            (Nu, "Y", Expr::and(v("X"), v("Q"))),
            (Mu, "P", Expr::not(v("Q"))),
            (Mu, "Q", v("P")),
        ])
        .with_spec(Spec::new(vec![(Mu, "X".into()), (Nu, "Y".into())]));
        let samples: Vec<Valuation> = fes.es.all_valuations(100).unwrap().collect();
        assert!(check_sanity(&fes, &samples).unwrap().is_empty());
        let closed = gauss_example();
        let samples: Vec<Valuation> = closed.es.all_valuations(100).unwrap().collect();
        assert!(check_sanity(&closed, &samples).unwrap().is_empty());
    }

    #[test]
    fn duplicate_entries_collapse() {
        let fes = gauss_example();
        let mut dup = Spec::new(vec![(Nu, "Z".into())]);
        dup = dup.concat(&fes.spec);
        let eta = fes.es.bottom_valuation();
        assert_eq!(sem(&fes.es, &dup, &eta), fes.solve(&eta));
    }

    #[test]
    fn guard_is_enforced() {
        let fes = gauss_example();
        assert!(matches!(
            sem_with_limit(&fes.es, &fes.spec, &fes.es.bottom_valuation(), 10),
            Err(SemError::SizeGuardExceeded {
                required: 15,
                limit: 10
            })
        ));
        assert_eq!(sem_cost(2, 3), 15);
    }
}
