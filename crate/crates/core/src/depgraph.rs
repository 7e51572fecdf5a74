//! Independence, the dependency graph over a spec, and spec splitting.
//!
//! Edges depend on the equation system alone; the spec only picks the node
//! set. `X -> Y` means the right-hand side of `X` depends on `Y`.

use std::collections::{BTreeSet, HashMap, VecDeque};
use std::fmt::Write as _;

use thiserror::Error;

use crate::eqs::{enumerate_valuations, EqsError, EquationSystem, VarName, DEFAULT_MAX_VALUATIONS};
use crate::lattice::Sign;
use crate::semantics::{Fes, Spec};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum DepError {
    #[error("unknown variable `{0}`")]
    UnknownVariable(String),
    #[error("semantic independence needs {required} valuations, exceeding the guard of {limit}")]
    SizeGuardExceeded { required: u128, limit: u128 },
    #[error(transparent)]
    Eqs(#[from] EqsError),
}

/// How dependence is decided.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Hash)]
pub enum GraphMode {
    /// Through free variables of the right-hand sides. Over-approximates.
    #[default]
    Syntactic,
    /// By enumerating valuations. Exact, but exponential.
    Semantic,
}

impl std::str::FromStr for GraphMode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "syntactic" => Ok(GraphMode::Syntactic),
            "semantic" => Ok(GraphMode::Semantic),
            other => Err(format!("unknown graph mode `{other}`")),
        }
    }
}

fn indices(es: &EquationSystem, vars: &BTreeSet<VarName>) -> Result<Vec<usize>, DepError> {
    vars.iter()
        .map(|v| {
            es.var_index(v)
                .ok_or_else(|| DepError::UnknownVariable(v.to_string()))
        })
        .collect()
}

/// The variables the right-hand side of `i` depends on, as a membership
/// vector over all variables.
fn support(
    es: &EquationSystem,
    i: usize,
    mode: GraphMode,
    limit: u128,
) -> Result<Vec<bool>, DepError> {
    let mut out = vec![false; es.len()];
    let fv: Vec<usize> = es
        .rhs(i)
        .free_vars()
        .iter()
        .map(|v| es.var_index(v).expect("validated system"))
        .collect();
    match mode {
        GraphMode::Syntactic => {
            for j in fv {
                out[j] = true;
            }
        }
        GraphMode::Semantic => {
            // E_i only reads its free variables, so enumerating those is exhaustive
            let n = es.lattice().len();
            let required = (n as u128).saturating_pow(fv.len() as u32 + 1);
            if required > limit {
                return Err(DepError::SizeGuardExceeded { required, limit });
            }
            let mut eta = es.bottom_valuation();
            for assignment in enumerate_valuations(n, fv.len()) {
                for (k, &j) in fv.iter().enumerate() {
                    eta.set(j, assignment.get(k));
                }
                let here = es.eval_var(i, &eta);
                for &j in &fv {
                    if !out[j] {
                        out[j] = es
                            .lattice()
                            .elements()
                            .any(|p| es.eval_var(i, &eta.with(j, p)) != here);
                    }
                }
            }
        }
    }
    Ok(out)
}

/// `indep(E, V1, V2)`: for all inputs agreeing outside `V2`, the outputs
/// agree on `V1`.
pub fn indep(
    es: &EquationSystem,
    v1: &BTreeSet<VarName>,
    v2: &BTreeSet<VarName>,
    mode: GraphMode,
) -> Result<bool, DepError> {
    indep_idx(
        es,
        &indices(es, v1)?,
        &indices(es, v2)?,
        mode,
        DEFAULT_MAX_VALUATIONS,
    )
}

/// [`indep`] on the domains of two specs.
pub fn indep_spec(
    es: &EquationSystem,
    s1: &Spec,
    s2: &Spec,
    mode: GraphMode,
) -> Result<bool, DepError> {
    indep(es, &s1.dom(), &s2.dom(), mode)
}

/// Index-based [`indep`] with an explicit guard.
pub fn indep_idx(
    es: &EquationSystem,
    v1: &[usize],
    v2: &[usize],
    mode: GraphMode,
    limit: u128,
) -> Result<bool, DepError> {
    if v1.is_empty() || v2.is_empty() {
        return Ok(true);
    }
    match mode {
        GraphMode::Syntactic => {
            for &i in v1 {
                let s = support(es, i, mode, limit)?;
                if v2.iter().any(|&j| s[j]) {
                    return Ok(false);
                }
            }
            Ok(true)
        }
        GraphMode::Semantic => indep_enumerate(es, v1, v2, limit),
    }
}

/// Exact check: for every assignment of the relevant variables outside `v2`,
/// the `v1` outputs are constant over all assignments of `v2`.
fn indep_enumerate(
    es: &EquationSystem,
    v1: &[usize],
    v2: &[usize],
    limit: u128,
) -> Result<bool, DepError> {
    let mut relevant: BTreeSet<usize> = BTreeSet::new();
    for &i in v1 {
        for v in es.rhs(i).free_vars() {
            relevant.insert(es.var_index(&v).expect("validated system"));
        }
    }
    let inside: Vec<usize> = relevant
        .iter()
        .copied()
        .filter(|j| v2.contains(j))
        .collect();
    if inside.is_empty() {
        return Ok(true);
    }
    let outside: Vec<usize> = relevant
        .iter()
        .copied()
        .filter(|j| !v2.contains(j))
        .collect();
    let n = es.lattice().len();
    let required = (n as u128).saturating_pow(relevant.len() as u32);
    if required > limit {
        return Err(DepError::SizeGuardExceeded { required, limit });
    }
    let mut eta = es.bottom_valuation();
    for outer in enumerate_valuations(n, outside.len()) {
        for (k, &j) in outside.iter().enumerate() {
            eta.set(j, outer.get(k));
        }
        let mut first: Option<Vec<_>> = None;
        for inner in enumerate_valuations(n, inside.len()) {
            for (k, &j) in inside.iter().enumerate() {
                eta.set(j, inner.get(k));
            }
            let out: Vec<_> = v1.iter().map(|&i| es.eval_var(i, &eta)).collect();
            match &first {
                None => first = Some(out),
                Some(f) if *f != out => return Ok(false),
                Some(_) => {}
            }
        }
    }
    Ok(true)
}

/// The dependency graph on `dom(S)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DepGraph {
    nodes: Vec<(Sign, VarName)>,
    index: HashMap<VarName, usize>,
    adj: Vec<Vec<bool>>,
    mode: GraphMode,
}

/// Builds the graph for `fes` with the default guard.
pub fn build_graph(fes: &Fes, mode: GraphMode) -> Result<DepGraph, DepError> {
    build_graph_on(&fes.es, &fes.spec, mode)
}

/// Builds the graph with nodes `dom(spec)` and edges from `es`.
pub fn build_graph_on(
    es: &EquationSystem,
    spec: &Spec,
    mode: GraphMode,
) -> Result<DepGraph, DepError> {
    let mut nodes = Vec::new();
    let mut index = HashMap::new();
    for (s, v) in spec.entries() {
        if es.var_index(v).is_none() {
            return Err(DepError::UnknownVariable(v.to_string()));
        }
        if !index.contains_key(v) {
            index.insert(v.clone(), nodes.len());
            nodes.push((*s, v.clone()));
        }
    }
    let mut adj = vec![vec![false; nodes.len()]; nodes.len()];
    for (a, (_, x)) in nodes.iter().enumerate() {
        let s = support(
            es,
            es.var_index(x).expect("checked"),
            mode,
            DEFAULT_MAX_VALUATIONS,
        )?;
        for (b, (_, y)) in nodes.iter().enumerate() {
            adj[a][b] = s[es.var_index(y).expect("checked")];
        }
    }
    Ok(DepGraph {
        nodes,
        index,
        adj,
        mode,
    })
}

impl DepGraph {
    pub fn nodes(&self) -> impl Iterator<Item = &VarName> {
        self.nodes.iter().map(|(_, v)| v)
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn mode(&self) -> GraphMode {
        self.mode
    }

    pub fn contains(&self, v: &VarName) -> bool {
        self.index.contains_key(v)
    }

    pub fn has_edge(&self, x: &VarName, y: &VarName) -> bool {
        match (self.index.get(x), self.index.get(y)) {
            (Some(&a), Some(&b)) => self.adj[a][b],
            _ => false,
        }
    }

    /// All edges, ordered by source then target node position.
    pub fn edges(&self) -> Vec<(VarName, VarName)> {
        let mut out = Vec::new();
        for (a, row) in self.adj.iter().enumerate() {
            for (b, &e) in row.iter().enumerate() {
                if e {
                    out.push((self.nodes[a].1.clone(), self.nodes[b].1.clone()));
                }
            }
        }
        out
    }

    /// Shortest path of at least one edge from `a`, as node positions.
    fn bfs(&self, a: usize, b: usize) -> Option<Vec<usize>> {
        let mut prev: Vec<Option<usize>> = vec![None; self.len()];
        let mut seen = vec![false; self.len()];
        let mut queue = VecDeque::new();
        for (c, &e) in self.adj[a].iter().enumerate() {
            if e && !seen[c] {
                seen[c] = true;
                prev[c] = Some(a);
                queue.push_back(c);
            }
        }
        while let Some(c) = queue.pop_front() {
            if c == b {
                let mut path = vec![b];
                let mut cur = b;
                loop {
                    let p = prev[cur].expect("reached nodes have a predecessor");
                    path.push(p);
                    if p == a {
                        break;
                    }
                    cur = p;
                }
                path.reverse();
                return Some(path);
            }
            for (d, &e) in self.adj[c].iter().enumerate() {
                if e && !seen[d] {
                    seen[d] = true;
                    prev[d] = Some(c);
                    queue.push_back(d);
                }
            }
        }
        None
    }

    /// `x ->> y`: a path of zero or more edges.
    pub fn reaches(&self, x: &VarName, y: &VarName) -> bool {
        self.path(x, y).is_some()
    }

    /// `x ->>+ y`: a path of at least one edge.
    pub fn reaches_nonempty(&self, x: &VarName, y: &VarName) -> bool {
        self.path_nonempty(x, y).is_some()
    }

    /// A shortest witness for `x ->> y`, starting at `x` and ending at `y`.
    pub fn path(&self, x: &VarName, y: &VarName) -> Option<Vec<VarName>> {
        let (&a, &b) = (self.index.get(x)?, self.index.get(y)?);
        if a == b {
            return Some(vec![x.clone()]);
        }
        self.bfs(a, b).map(|p| self.names(&p))
    }

    /// A shortest witness for `x ->>+ y`.
    pub fn path_nonempty(&self, x: &VarName, y: &VarName) -> Option<Vec<VarName>> {
        let (&a, &b) = (self.index.get(x)?, self.index.get(y)?);
        self.bfs(a, b).map(|p| self.names(&p))
    }

    fn names(&self, p: &[usize]) -> Vec<VarName> {
        p.iter().map(|&i| self.nodes[i].1.clone()).collect()
    }

    /// Strongly connected components, terminal components first: every edge
    /// goes within a component or to an earlier one. Members are in node
    /// order.
    pub fn sccs(&self) -> Vec<Vec<VarName>> {
        let n = self.len();
        let mut index = vec![usize::MAX; n];
        let mut low = vec![0; n];
        let mut on_stack = vec![false; n];
        let mut stack = Vec::new();
        let mut counter = 0;
        let mut out = Vec::new();
        for root in 0..n {
            if index[root] != usize::MAX {
                continue;
            }
            // explicit call stack of (node, next successor to try)
            let mut calls = vec![(root, 0usize)];
            index[root] = counter;
            low[root] = counter;
            counter += 1;
            stack.push(root);
            on_stack[root] = true;
            while let Some(&mut (v, ref mut next)) = calls.last_mut() {
                if *next < n {
                    let w = *next;
                    *next += 1;
                    if !self.adj[v][w] {
                        continue;
                    }
                    if index[w] == usize::MAX {
                        index[w] = counter;
                        low[w] = counter;
                        counter += 1;
                        stack.push(w);
                        on_stack[w] = true;
                        calls.push((w, 0));
                    } else if on_stack[w] {
                        low[v] = low[v].min(index[w]);
                    }
                    continue;
                }
                calls.pop();
                if let Some(&(parent, _)) = calls.last() {
                    low[parent] = low[parent].min(low[v]);
                }
                if low[v] == index[v] {
                    let mut comp = Vec::new();
                    loop {
                        let w = stack.pop().expect("tarjan stack");
                        on_stack[w] = false;
                        comp.push(w);
                        if w == v {
                            break;
                        }
                    }
                    comp.sort_unstable();
                    out.push(self.names(&comp));
                }
            }
        }
        out
    }

    /// Deterministic DOT rendering.
    pub fn to_dot(&self) -> String {
        let mut out = String::from("digraph deps {\n");
        for (s, v) in &self.nodes {
            let _ = writeln!(out, "  {v} [label=\"{}:{v}\"];", s.keyword());
        }
        for (x, y) in self.edges() {
            let _ = writeln!(out, "  {x} -> {y};");
        }
        out.push_str("}\n");
        out
    }
}

/// `(S1, S2)`: entries whose variable fails `p`, then those satisfying it,
/// each in spec order.
pub fn split_pred(spec: &Spec, p: impl Fn(&VarName) -> bool) -> (Spec, Spec) {
    let (yes, no): (Vec<_>, Vec<_>) = spec.entries().iter().cloned().partition(|(_, v)| p(v));
    (Spec::new(no), Spec::new(yes))
}

/// Splits on reachability from `x`: `S2` holds the variables `x` depends on.
/// When `x` is not in the spec the result is `(S, eps)`.
pub fn split_by_dep(x: &VarName, fes: &Fes, mode: GraphMode) -> Result<(Spec, Spec), DepError> {
    if !fes.spec.contains(x) {
        return Ok((fes.spec.clone(), Spec::empty()));
    }
    let g = build_graph(fes, mode)?;
    Ok(split_pred(&fes.spec, |y| g.reaches(x, y)))
}
