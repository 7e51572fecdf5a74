//! Boolean equation systems: local resolution, Gauss elimination and
//! component-wise solving.

use thiserror::Error;

use crate::depgraph::{build_graph, DepError, GraphMode};
use crate::eqs::{EqsError, EquationSystem, Expr, Valuation, VarName};
use crate::lattice::Sign;
use crate::semantics::{require_monotone, sem, Fes, SemError, Spec};
use crate::transforms::{Step, Theorem};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GaussError {
    #[error("lattice `{0}` is not the Boolean lattice")]
    NotBooleanLattice(String),
    #[error("open system: {0} not bound by the spec")]
    OpenSystem(String),
    #[error("variable `{0}` occurs more than once in the spec")]
    DuplicateVariable(String),
    #[error(transparent)]
    Sem(#[from] SemError),
    #[error(transparent)]
    Eqs(#[from] EqsError),
    #[error(transparent)]
    Dep(#[from] DepError),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BesSolution {
    pub valuation: Valuation,
    pub steps: Vec<Step>,
}

/// `mu X. e` becomes `e[X := bot]`, `nu X. e` becomes `e[X := top]`.
pub fn local_solve(
    es: &EquationSystem,
    sign: Sign,
    x: &VarName,
    e: &Expr,
) -> Result<Expr, GaussError> {
    let l = es.lattice();
    if !l.is_bool() {
        return Err(GaussError::NotBooleanLattice(l.name().to_string()));
    }
    let c = match sign {
        Sign::Mu => l.bottom(),
        Sign::Nu => l.top(),
    };
    Ok(es.simplify(&e.subst(x, &Expr::Const(c))))
}

fn check_bool(es: &EquationSystem) -> Result<(), GaussError> {
    if es.lattice().is_bool() {
        Ok(())
    } else {
        Err(GaussError::NotBooleanLattice(
            es.lattice().name().to_string(),
        ))
    }
}

fn check_distinct(spec: &Spec) -> Result<(), GaussError> {
    let mut seen = std::collections::BTreeSet::new();
    for (_, v) in spec.entries() {
        if !seen.insert(v) {
            return Err(GaussError::DuplicateVariable(v.to_string()));
        }
    }
    Ok(())
}

/// Solves a closed, duplicate-free, monotone Boolean system: a backward pass
/// of local resolution and substitution, then a forward pass of evaluation.
pub fn gauss_solve(fes: &Fes) -> Result<BesSolution, GaussError> {
    let es = &fes.es;
    check_bool(es)?;
    check_distinct(&fes.spec)?;
    let missing: Vec<&str> = es
        .vars()
        .iter()
        .filter(|v| !fes.spec.contains(v))
        .map(|v| v.as_str())
        .collect();
    if !missing.is_empty() {
        return Err(GaussError::OpenSystem(missing.join(", ")));
    }
    require_monotone(es)?;
    eliminate(es, &fes.spec, &es.bottom_valuation())
}

/// Gauss elimination over the entries of `spec`. Variables outside the spec
/// are read from `eta`.
fn eliminate(es: &EquationSystem, spec: &Spec, eta: &Valuation) -> Result<BesSolution, GaussError> {
    let mut steps = Vec::new();
    let entries = spec.entries();
    let mut rhs: Vec<Expr> = Vec::with_capacity(entries.len());
    for (_, v) in entries {
        let mut e = es
            .rhs_of(v)
            .ok_or_else(|| EqsError::UnknownVariable(v.to_string()))?
            .clone();
        for w in e.free_vars() {
            if !spec.contains(&w) {
                let i = es
                    .var_index(&w)
                    .ok_or_else(|| EqsError::UnknownVariable(w.to_string()))?;
                e = e.subst(&w, &Expr::Const(eta.get(i)));
            }
        }
        rhs.push(es.simplify(&e));
    }

    for i in (0..entries.len()).rev() {
        let (sign, x) = &entries[i];
        if rhs[i].mentions(x) {
            rhs[i] = local_solve(es, *sign, x, &rhs[i])?;
            steps.push(Step {
                theorem: Theorem::Local,
                detail: format!("{sign} {x} = {}", es.display(&rhs[i])),
            });
        }
        for j in 0..i {
            if rhs[j].mentions(x) {
                rhs[j] = es.simplify(&rhs[j].subst(x, &rhs[i]));
                steps.push(Step {
                    theorem: Theorem::UnfoldThm,
                    detail: format!("unfold {x} into {}", entries[j].1),
                });
            }
        }
    }

    let mut out = eta.clone();
    for i in 0..entries.len() {
        let x = &entries[i].1;
        let c = es.eval(&rhs[i], &out)?;
        out.set(es.var_index(x).expect("spec variable"), c);
        for j in i + 1..entries.len() {
            if rhs[j].mentions(x) {
                rhs[j] = es.simplify(&rhs[j].subst(x, &Expr::Const(c)));
                steps.push(Step {
                    theorem: Theorem::UnfoldLoop,
                    detail: format!("{x} = {} into {}", es.lattice().label(c), entries[j].1),
                });
            }
        }
    }
    Ok(BesSolution {
        valuation: out,
        steps,
    })
}

/// Solves the strongly connected components of the dependency graph one at
/// a time, terminal components first.
pub fn scc_solve(fes: &Fes, eta: &Valuation) -> Result<Valuation, GaussError> {
    let es = &fes.es;
    if fes.spec.has_duplicates() {
        return Ok(sem(es, &fes.spec, eta)?);
    }
    require_monotone(es)?;
    let g = build_graph(fes, GraphMode::Syntactic)?;
    let comps = g.sccs();
    let mut cur = eta.clone();
    for comp in comps {
        let members: std::collections::BTreeSet<&VarName> = comp.iter().collect();
        let sub = Spec::new(
            fes.spec
                .entries()
                .iter()
                .filter(|(_, v)| members.contains(v))
                .cloned()
                .collect(),
        );
        cur = if es.lattice().is_bool() {
            eliminate(es, &sub, &cur)?.valuation
        } else {
            sem(es, &sub, &cur)?
        };
    }
    Ok(cur)
}
