//! Solution-preserving and solution-bounding transformations.
//!
//! Each operation checks the hypotheses of the result that justifies it and
//! reports which one was used together with the guaranteed relation between
//! the semantics of the result and of the input.

use std::fmt;
use std::ops::Range;

use thiserror::Error;

use crate::depgraph::{build_graph_on, indep_spec, split_by_dep, DepError, GraphMode};
use crate::eqs::{EqsError, EquationSystem, Expr, Valuation, VarName};
use crate::lattice::Sign;
use crate::semantics::{require_monotone, sem, Fes, SemError, Spec};

/// Identifies the result a transformation step relies on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Theorem {
    UnfoldThm,
    UnfoldLoop,
    Partial,
    SwapSame,
    SwapLoop,
    Migrate,
    MigrateCtx,
    SignLoop,
    SignIneq,
    MigIneq,
    SplitSolve,
    /// Local resolution on the Boolean lattice: `mu X. f(X) = f(bot)`,
    /// `nu X. f(X) = f(top)`.
    Local,
    /// Applied without checking anything.
    Forced,
}

impl Theorem {
    pub fn id(self) -> &'static str {
        match self {
            Theorem::UnfoldThm => "UNFOLD_THM",
            Theorem::UnfoldLoop => "UNFOLD_LOOP",
            Theorem::Partial => "PARTIAL",
            Theorem::SwapSame => "SWAP_SAME",
            Theorem::SwapLoop => "SWAP_LOOP",
            Theorem::Migrate => "MIGRATE",
            Theorem::MigrateCtx => "MIGRATE_CTX",
            Theorem::SignLoop => "SIGN_LOOP",
            Theorem::SignIneq => "SIGN_INEQ",
            Theorem::MigIneq => "MIG_INEQ",
            Theorem::SplitSolve => "SPLIT_SOLVE",
            Theorem::Local => "LOCAL",
            Theorem::Forced => "FORCED",
        }
    }
}

impl fmt::Display for Theorem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.id())
    }
}

/// Guaranteed relation of `sem(result)` to `sem(input)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Relation {
    Equal,
    /// `sem(result) <= sem(input)`
    Leq,
    /// `sem(result) >= sem(input)`
    Geq,
    Unknown,
}

impl Relation {
    pub fn id(self) -> &'static str {
        match self {
            Relation::Equal => "EQUAL",
            Relation::Leq => "LEQ",
            Relation::Geq => "GEQ",
            Relation::Unknown => "UNKNOWN",
        }
    }

    /// Relation of a two-step chain.
    pub fn then(self, next: Relation) -> Relation {
        use Relation::*;
        match (self, next) {
            (Equal, r) | (r, Equal) => r,
            (Leq, Leq) => Leq,
            (Geq, Geq) => Geq,
            _ => Unknown,
        }
    }
}

impl fmt::Display for Relation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.id())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Step {
    pub theorem: Theorem,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TransformReport {
    pub result: Fes,
    pub steps: Vec<Step>,
    pub relation: Relation,
}

impl TransformReport {
    /// The theorem of the first step, if any step was taken.
    pub fn justification(&self) -> Option<Theorem> {
        self.steps.first().map(|s| s.theorem)
    }

    fn single(result: Fes, theorem: Theorem, detail: String, relation: Relation) -> Self {
        TransformReport {
            result,
            steps: vec![Step { theorem, detail }],
            relation,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TransformError {
    #[error("unknown variable `{0}`")]
    UnknownVariable(String),
    #[error("position {0} is out of range")]
    InvalidPosition(usize),
    #[error("invalid block ranges: {0}")]
    InvalidRange(String),
    #[error("precondition failed: {reason}{}", path_suffix(.path))]
    PreconditionFailed {
        reason: String,
        path: Option<Vec<VarName>>,
    },
    #[error(transparent)]
    Sem(#[from] SemError),
    #[error(transparent)]
    Dep(#[from] DepError),
    #[error(transparent)]
    Eqs(#[from] EqsError),
}

fn path_suffix(path: &Option<Vec<VarName>>) -> String {
    match path {
        Some(p) => {
            let names: Vec<String> = p.iter().map(|v| v.to_string()).collect();
            format!(" (witness path {})", names.join(" -> "))
        }
        None => String::new(),
    }
}

fn failed(reason: impl Into<String>, path: Option<Vec<VarName>>) -> TransformError {
    TransformError::PreconditionFailed {
        reason: reason.into(),
        path,
    }
}

/// Options shared by all transformations.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct TransformOptions {
    pub mode: GraphMode,
    /// Skip every check; the relation becomes [`Relation::Unknown`].
    pub force: bool,
    /// Permit results that are only ordered, not equal, to the input.
    pub allow_ineq: bool,
}

fn var_index(es: &EquationSystem, v: &VarName) -> Result<usize, TransformError> {
    es.var_index(v)
        .ok_or_else(|| TransformError::UnknownVariable(v.to_string()))
}

/// `unfold(E, X, Y)`: replaces `Y` by its right-hand side in the equation
/// for `X`. No other equation changes.
pub fn unfold_es(
    es: &EquationSystem,
    x: &VarName,
    y: &VarName,
) -> Result<EquationSystem, TransformError> {
    let xi = var_index(es, x)?;
    let yi = var_index(es, y)?;
    let rhs = es.rhs(xi).subst(y, es.rhs(yi));
    Ok(es.with_rhs(xi, rhs)?)
}

pub fn apply_unfold(
    fes: &Fes,
    x: &VarName,
    y: &VarName,
    opts: TransformOptions,
) -> Result<TransformReport, TransformError> {
    let es = unfold_es(&fes.es, x, y)?;
    let result = Fes {
        es,
        spec: fes.spec.clone(),
    };
    let detail = format!("unfold {y} into {x}");
    if opts.force {
        return Ok(TransformReport::single(
            result,
            Theorem::Forced,
            detail,
            Relation::Unknown,
        ));
    }
    require_monotone(&fes.es)?;
    let entries = fes.spec.entries();
    let direct = entries
        .iter()
        .enumerate()
        .any(|(k, (_, v))| v == y && !fes.spec.slice(k + 1..entries.len()).contains(x));
    if direct {
        return Ok(TransformReport::single(
            result,
            Theorem::UnfoldThm,
            detail,
            Relation::Equal,
        ));
    }
    if !fes.spec.contains(y) {
        return Err(failed(format!("{y} does not occur in the spec"), None));
    }
    let g = build_graph_on(&fes.es, &fes.spec, opts.mode)?;
    match g.path(y, x) {
        None => Ok(TransformReport::single(
            result,
            Theorem::UnfoldLoop,
            detail,
            Relation::Equal,
        )),
        Some(path) => Err(failed(
            format!("{x} occurs after every {y} in the spec, and {y} depends on {x}"),
            Some(path),
        )),
    }
}

/// Replaces the equation for `x` by the constant `sem(fes)(eta)(x)`. The
/// result agrees with the input at `eta`, and everywhere when the system is
/// closed.
pub fn apply_partial(
    fes: &Fes,
    x: &VarName,
    eta: &Valuation,
    opts: TransformOptions,
) -> Result<TransformReport, TransformError> {
    let xi = var_index(&fes.es, x)?;
    if !opts.force {
        require_monotone(&fes.es)?;
    }
    let a = sem(&fes.es, &fes.spec, eta)?.get(xi);
    let result = Fes {
        es: fes.es.with_rhs(xi, Expr::Const(a))?,
        spec: fes.spec.clone(),
    };
    let detail = format!("{x} := {}", fes.es.lattice().label(a));
    let (theorem, relation) = if opts.force {
        (Theorem::Forced, Relation::Unknown)
    } else {
        (Theorem::Partial, Relation::Equal)
    };
    Ok(TransformReport::single(result, theorem, detail, relation))
}

fn swapped(spec: &Spec, i: usize) -> Spec {
    let mut e = spec.entries().to_vec();
    e.swap(i, i + 1);
    Spec::new(e)
}

/// Swaps spec entries `i` and `i + 1`.
pub fn apply_swap(
    fes: &Fes,
    i: usize,
    opts: TransformOptions,
) -> Result<TransformReport, TransformError> {
    if i + 1 >= fes.spec.len() {
        return Err(TransformError::InvalidPosition(i));
    }
    let (s1, x) = fes.spec.entries()[i].clone();
    let (s2, y) = fes.spec.entries()[i + 1].clone();
    let result = fes.with_spec(swapped(&fes.spec, i));
    let detail = format!("swap {s1} {x} and {s2} {y} at {i}");
    if opts.force {
        return Ok(TransformReport::single(
            result,
            Theorem::Forced,
            detail,
            Relation::Unknown,
        ));
    }
    let monotone = require_monotone(&fes.es);
    if s1 == s2 && monotone.is_ok() {
        return Ok(TransformReport::single(
            result,
            Theorem::SwapSame,
            detail,
            Relation::Equal,
        ));
    }
    let suffix = fes.spec.slice(i..fes.spec.len());
    let g = build_graph_on(&fes.es, &suffix, opts.mode)?;
    let path = g.path(&x, &y);
    if path.is_none() {
        return Ok(TransformReport::single(
            result,
            Theorem::SwapLoop,
            detail,
            Relation::Equal,
        ));
    }
    if s1 != s2 && x != y && opts.allow_ineq && monotone.is_ok() {
        // mu X; nu Y  <=  nu Y; mu X
        let relation = if s1 == Sign::Mu {
            Relation::Geq
        } else {
            Relation::Leq
        };
        return Ok(TransformReport::single(
            result,
            Theorem::MigIneq,
            detail,
            relation,
        ));
    }
    let mut reasons = Vec::new();
    if s1 == s2 {
        reasons.push("the system is not monotone".to_string());
    }
    reasons.push(format!("{x} depends on {y} below position {i}"));
    if s1 != s2 {
        if x == y {
            reasons.push("both entries name the same variable".into());
        } else if monotone.is_err() {
            reasons.push("the inequality needs a monotone system".into());
        } else {
            reasons.push("only an inequality holds (allow it explicitly)".into());
        }
    }
    Err(failed(reasons.join("; "), path))
}

/// Exchanges the adjacent blocks `r1` and `r2` of the spec.
pub fn apply_migrate(
    fes: &Fes,
    r1: Range<usize>,
    r2: Range<usize>,
    opts: TransformOptions,
) -> Result<TransformReport, TransformError> {
    let n = fes.spec.len();
    if r1.start > r1.end || r1.end != r2.start || r2.start > r2.end || r2.end > n {
        return Err(TransformError::InvalidRange(format!(
            "{}..{} and {}..{} must be adjacent blocks within 0..{n}",
            r1.start, r1.end, r2.start, r2.end
        )));
    }
    let spec = &fes.spec;
    let (s0, b1, b2, s3) = (
        spec.slice(0..r1.start),
        spec.slice(r1.clone()),
        spec.slice(r2.clone()),
        spec.slice(r2.end..n),
    );
    let result = fes.with_spec(s0.concat(&b2).concat(&b1).concat(&s3));
    let detail = format!("move block {b2} before {b1}");
    if opts.force {
        return Ok(TransformReport::single(
            result,
            Theorem::Forced,
            detail,
            Relation::Unknown,
        ));
    }
    let rest = b2.concat(&s3);
    if !b1.disjoint(&rest) {
        return Err(failed(format!("{b1} and {rest} share variables"), None));
    }
    let forward = indep_spec(&fes.es, &b1, &rest, opts.mode)?;
    let backward = forward || indep_spec(&fes.es, &rest, &b1, opts.mode)?;
    if !backward {
        return Err(failed(
            format!("neither {b1} is independent of {rest}, nor {rest} of {b1}"),
            None,
        ));
    }
    let theorem = if s3.is_empty() {
        Theorem::Migrate
    } else {
        Theorem::MigrateCtx
    };
    Ok(TransformReport::single(
        result,
        theorem,
        detail,
        Relation::Equal,
    ))
}

/// Flips the sign at position `i`.
pub fn apply_sign_flip(
    fes: &Fes,
    i: usize,
    opts: TransformOptions,
) -> Result<TransformReport, TransformError> {
    let n = fes.spec.len();
    if i >= n {
        return Err(TransformError::InvalidPosition(i));
    }
    let (s, x) = fes.spec.entries()[i].clone();
    let mut e = fes.spec.entries().to_vec();
    e[i].0 = s.flipped();
    let result = fes.with_spec(Spec::new(e));
    let detail = format!("{s} {x} becomes {} {x}", s.flipped());
    if opts.force {
        return Ok(TransformReport::single(
            result,
            Theorem::Forced,
            detail,
            Relation::Unknown,
        ));
    }
    let tail = fes.spec.slice(i + 1..n);
    let mut reasons = Vec::new();
    let mut path = None;
    if tail.contains(&x) {
        reasons.push(format!("{x} occurs again later in the spec"));
    } else {
        let g = build_graph_on(&fes.es, &fes.spec.slice(i..n), opts.mode)?;
        match g.path_nonempty(&x, &x) {
            None => {
                return Ok(TransformReport::single(
                    result,
                    Theorem::SignLoop,
                    detail,
                    Relation::Equal,
                ))
            }
            Some(p) => {
                reasons.push(format!("{x} lies on a dependency loop below position {i}"));
                path = Some(p);
            }
        }
    }
    let monotone = require_monotone(&fes.es);
    if opts.allow_ineq && monotone.is_ok() {
        let relation = if s == Sign::Mu {
            Relation::Geq
        } else {
            Relation::Leq
        };
        return Ok(TransformReport::single(
            result,
            Theorem::SignIneq,
            detail,
            relation,
        ));
    }
    if monotone.is_err() {
        reasons.push("the inequality needs a monotone system".into());
    } else {
        reasons.push("only an inequality holds (allow it explicitly)".into());
    }
    Err(failed(reasons.join("; "), path))
}

/// Reorders the spec as `S1 ++ S2` (or `S2 ++ S1` with `deps_first`), where
/// `S2` holds the entries `x` depends on.
pub fn apply_split(
    fes: &Fes,
    x: &VarName,
    deps_first: bool,
    opts: TransformOptions,
) -> Result<TransformReport, TransformError> {
    var_index(&fes.es, x)?;
    let (s1, s2) = split_by_dep(x, fes, opts.mode)?;
    let spec = if deps_first {
        s2.concat(&s1)
    } else {
        s1.concat(&s2)
    };
    let detail = format!("split on {x}: {s1} and {s2}");
    Ok(TransformReport::single(
        fes.with_spec(spec),
        Theorem::SplitSolve,
        detail,
        Relation::Equal,
    ))
}

/// Greedily applies equality-preserving block moves and swaps that strictly
/// lower the number of sign alternations, taking the largest reduction first.
pub fn reduce_alternations(
    fes: &Fes,
    opts: TransformOptions,
) -> Result<TransformReport, TransformError> {
    let strict = TransformOptions {
        force: false,
        allow_ineq: false,
        ..opts
    };
    let mut cur = fes.clone();
    let mut steps = Vec::new();
    loop {
        let base = cur.spec.alternations();
        let n = cur.spec.len();
        let mut best: Option<TransformReport> = None;
        let mut best_alt = base;
        for a in 0..n {
            for b in a + 1..n {
                for c in b + 1..=n {
                    let mut candidates = Vec::new();
                    if let Ok(r) = apply_migrate(&cur, a..b, b..c, strict) {
                        candidates.push(r);
                    }
                    if b - a == 1 && c - b == 1 {
                        if let Ok(r) = apply_swap(&cur, a, strict) {
                            candidates.push(r);
                        }
                    }
                    for r in candidates {
                        let alt = r.result.spec.alternations();
                        if alt < best_alt {
                            best_alt = alt;
                            best = Some(r);
                        }
                    }
                }
            }
        }
        match best {
            Some(r) => {
                steps.extend(r.steps);
                cur = r.result;
            }
            None => break,
        }
    }
    Ok(TransformReport {
        result: cur,
        steps,
        relation: Relation::Equal,
    })
}

/// Checks a report's relation against the semantics at the given inputs.
pub fn relation_holds(
    input: &Fes,
    report: &TransformReport,
    etas: &[Valuation],
) -> Result<bool, SemError> {
    let l = input.es.lattice();
    for eta in etas {
        let before = input.solve(eta)?;
        let after = report.result.solve(eta)?;
        let ok = match report.relation {
            Relation::Equal => before == after,
            Relation::Leq => after.leq(l, &before),
            Relation::Geq => before.leq(l, &after),
            Relation::Unknown => true,
        };
        if !ok {
            return Ok(false);
        }
    }
    Ok(true)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::syntax::parse_fes;

    fn opts() -> TransformOptions {
        TransformOptions::default()
    }

    fn ineq() -> TransformOptions {
        TransformOptions {
            allow_ineq: true,
            ..Default::default()
        }
    }

    fn bits(fes: &Fes) -> String {
        let r = fes.solve_default().unwrap();
        let top = fes.es.lattice().top();
        r.values()
            .iter()
            .map(|&e| if e == top { 'T' } else { 'F' })
            .collect()
    }

    fn all_etas(fes: &Fes) -> Vec<Valuation> {
        fes.es.all_valuations(4096).unwrap().collect()
    }

    const B1: &str = "nu Y = X;\nmu X = Y;\n";
    const B3: &str = "mu X = Y;\nmu Y = X;\nnu Z = W;\nmu W = Z;\n";
    const B4: &str = "mu X = Y;\nnu Z = W;\nmu Y = X;\nmu W = Z;\n";
    const B7: &str = "mu X = Y;\nnu Y = X | Z;\nmu Z = Z & W;\nnu W = X & bot;\n";

    #[test]
    fn unfold_b1_fails_with_witness() {
        let b1 = parse_fes(B1).unwrap();
        let err = apply_unfold(&b1, &"X".into(), &"Y".into(), opts()).unwrap_err();
        match &err {
            TransformError::PreconditionFailed { path: Some(p), .. } => {
                assert_eq!(p, &vec![VarName::new("Y"), "X".into()]);
            }
            other => panic!("{other:?}"),
        }
        assert!(err.to_string().contains("Y -> X"));
        let forced = apply_unfold(
            &b1,
            &"X".into(),
            &"Y".into(),
            TransformOptions {
                force: true,
                ..opts()
            },
        )
        .unwrap();
        assert_eq!(forced.relation, Relation::Unknown);
        assert_eq!(forced.result, parse_fes("nu Y = X;\nmu X = X;\n").unwrap());
        assert_eq!(bits(&b1), "TT");
        assert_eq!(bits(&forced.result), "FF");
    }

    #[test]
    fn gauss_backward_unfold_is_justified() {
        let fes = parse_fes("mu X = Y | Z;\nnu Y = Z;\nmu Z = Y & X;\n").unwrap();
        let r = apply_unfold(&fes, &"X".into(), &"Z".into(), opts()).unwrap();
        assert_eq!(r.justification(), Some(Theorem::UnfoldThm));
        let x = r.result.es.index_of("X").unwrap();
        assert_eq!(
            r.result
                .es
                .display(&r.result.es.simplify(r.result.es.rhs(x)))
                .to_string(),
            "Y"
        );
        assert!(relation_holds(&fes, &r, &all_etas(&fes)).unwrap());
    }

    #[test]
    fn unfold_loop_when_no_back_dependency() {
        // Y precedes X but does not depend on it
        let fes = parse_fes("nu Y = Y & Z;\nmu X = Y | X;\nmu Z = Z;\n").unwrap();
        let r = apply_unfold(&fes, &"X".into(), &"Y".into(), opts()).unwrap();
        assert_eq!(r.justification(), Some(Theorem::UnfoldLoop));
        assert!(relation_holds(&fes, &r, &all_etas(&fes)).unwrap());
    }

    #[test]
    fn unfold_needs_monotone() {
        let fes = parse_fes("mu X = Y & Z;\nmu Y = X | Z;\nmu Z = !X;\n").unwrap();
        assert!(matches!(
            apply_unfold(&fes, &"X".into(), &"Z".into(), opts()),
            Err(TransformError::Sem(SemError::MonotonicityRequired { .. }))
        ));
    }

    #[test]
    fn partial_is_idempotent() {
        let fes = parse_fes("mu X = Y | Z;\nnu Y = Z;\nmu Z = Y & X;\n").unwrap();
        let eta = fes.es.bottom_valuation();
        let once = apply_partial(&fes, &"X".into(), &eta, opts()).unwrap();
        let twice = apply_partial(&once.result, &"X".into(), &eta, opts()).unwrap();
        assert_eq!(once.result, twice.result);
        assert!(relation_holds(&fes, &once, &all_etas(&fes)).unwrap());
    }

    #[test]
    fn b4_to_b5_by_swaploop() {
        let b4 = parse_fes(B4).unwrap();
        let r = apply_swap(&b4, 0, opts()).unwrap();
        assert_eq!(r.justification(), Some(Theorem::SwapLoop));
        assert_eq!(r.result.spec.to_string(), "[nu Z, mu X, mu Y, mu W]");
        assert_eq!(bits(&b4), "FTFT");
        assert!(relation_holds(&b4, &r, &all_etas(&b4)).unwrap());
    }

    #[test]
    fn same_sign_swap() {
        let b3 = parse_fes(B3).unwrap();
        let r = apply_swap(&b3, 0, opts()).unwrap();
        assert_eq!(r.justification(), Some(Theorem::SwapSame));
        assert!(relation_holds(&b3, &r, &all_etas(&b3)).unwrap());
    }

    #[test]
    fn mig_ineq_direction() {
        // B6 = [mu X, mu Y, mu W, nu Z] is below B3 = [.., nu Z, mu W]
        let b6 = parse_fes("mu X = Y;\nmu Y = X;\nmu W = Z;\nnu Z = W;\n").unwrap();
        assert!(matches!(
            apply_swap(&b6, 2, opts()),
            Err(TransformError::PreconditionFailed { .. })
        ));
        let r = apply_swap(&b6, 2, ineq()).unwrap();
        assert_eq!(r.justification(), Some(Theorem::MigIneq));
        assert_eq!(r.relation, Relation::Geq);
        assert!(relation_holds(&b6, &r, &all_etas(&b6)).unwrap());
    }

    #[test]
    fn migrate_b3_to_b5_and_b4_fails() {
        let b3 = parse_fes(B3).unwrap();
        let r = apply_migrate(&b3, 0..2, 2..3, opts()).unwrap();
        assert_eq!(r.justification(), Some(Theorem::MigrateCtx));
        assert_eq!(r.result.spec.to_string(), "[nu Z, mu X, mu Y, mu W]");
        assert!(relation_holds(&b3, &r, &all_etas(&b3)).unwrap());
        let b4 = parse_fes(B4).unwrap();
        let err = apply_migrate(&b4, 0..1, 1..2, opts()).unwrap_err();
        assert!(err.to_string().contains("neither"), "{err}");
        let same = apply_migrate(&b3, 1..1, 1..3, opts()).unwrap();
        assert_eq!(same.result, b3);
    }

    #[test]
    fn sign_flips_on_b7() {
        let b7 = parse_fes(B7).unwrap();
        let y = apply_sign_flip(&b7, 1, opts()).unwrap();
        assert_eq!(y.justification(), Some(Theorem::SignLoop));
        let w = apply_sign_flip(&y.result, 3, opts()).unwrap();
        assert_eq!(w.justification(), Some(Theorem::SignLoop));
        assert_eq!(w.result.spec.to_string(), "[mu X, mu Y, mu Z, mu W]");
        assert_eq!(bits(&b7), bits(&w.result));
        assert!(apply_sign_flip(&b7, 2, opts()).is_err());
        let z = apply_sign_flip(&b7, 2, ineq()).unwrap();
        assert_eq!(z.justification(), Some(Theorem::SignIneq));
        assert_eq!(z.relation, Relation::Geq);
        // X is the outermost variable on the X-Y loop, so both end up bot
        assert_eq!(bits(&z.result), "FFFF");
        assert!(relation_holds(&b7, &z, &all_etas(&b7)).unwrap());
        let c = parse_fes("mu X = top;\nnu Y = Y & X;").unwrap();
        assert_eq!(
            apply_sign_flip(&c, 0, opts()).unwrap().justification(),
            Some(Theorem::SignLoop)
        );
    }

    #[test]
    fn split_b3() {
        let b3 = parse_fes(B3).unwrap();
        for deps_first in [false, true] {
            let r = apply_split(&b3, &"X".into(), deps_first, opts()).unwrap();
            let want = if deps_first {
                "[mu X, mu Y, nu Z, mu W]"
            } else {
                "[nu Z, mu W, mu X, mu Y]"
            };
            assert_eq!(r.result.spec.to_string(), want);
            assert!(relation_holds(&b3, &r, &all_etas(&b3)).unwrap());
        }
        let open = b3.with_spec(b3.spec.slice(2..4));
        let r = apply_split(&open, &"X".into(), false, opts()).unwrap();
        assert_eq!(r.result, open);
    }

    #[test]
    fn reduce_b3() {
        let b3 = parse_fes(B3).unwrap();
        assert_eq!(b3.spec.alternations(), 2);
        let r = reduce_alternations(&b3, opts()).unwrap();
        assert_eq!(r.result.spec.alternations(), 1);
        assert_eq!(r.relation, Relation::Equal);
        assert_eq!(r.result.spec.to_string(), "[nu Z, mu X, mu Y, mu W]");
        let flat = parse_fes("mu X = Y;\nmu Y = X;").unwrap();
        assert_eq!(reduce_alternations(&flat, opts()).unwrap().result, flat);
    }

    #[test]
    fn relation_chain() {
        assert_eq!(Relation::Equal.then(Relation::Leq), Relation::Leq);
        assert_eq!(Relation::Leq.then(Relation::Geq), Relation::Unknown);
    }
}
