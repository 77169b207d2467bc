//! LP-based branch and bound with lazy constraints, and enumeration of all
//! optimal 0/1 solutions via no-good cuts.
//!
//! The search is a depth-first traversal. At each node the LP relaxation is
//! solved from scratch with the node's tightened bounds. Internally every
//! objective is treated as a maximization (`score = sign · objective`).

use std::time::{Duration, Instant};

use log::{debug, info, warn};
use thiserror::Error;

use crate::ilp::{Constraint, LinExpr, Model, ModelError, Sense, VarId, VarKind};
use crate::simplex::{self, LpStatus, SimplexConfig, SimplexError};

/// Distance from the nearest integer below which a value counts as integral.
pub const INTEGRALITY_TOL: f64 = 1e-6;
/// A node is pruned when its bound does not beat the incumbent by more than this.
pub const PRUNE_TOL: f64 = 1e-6;
/// Minimum violation a lazy cut must have at the candidate it was generated for.
pub const CUT_VIOLATION_TOL: f64 = 1e-6;

#[derive(Debug, Error)]
pub enum SolveError {
    #[error("integer variable `{0}` needs finite bounds")]
    UnboundedIntegerVariable(String),
    #[error("lazy cut {index} is not violated by the candidate (violation {violation})")]
    InvalidLazyCut { index: usize, violation: f64 },
    #[error("variable `{0}` is used by the model but is not binary")]
    NotBinaryModel(String),
    #[error(transparent)]
    Simplex(#[from] SimplexError),
    #[error(transparent)]
    Model(#[from] ModelError),
}

#[derive(Debug, Clone, Default)]
pub struct SolveConfig {
    pub time_limit: Option<Duration>,
    pub node_limit: Option<usize>,
    pub simplex: SimplexConfig,
    /// Stop as soon as the first integer solution is accepted.
    pub stop_at_first_incumbent: bool,
}

impl SolveConfig {
    pub fn with_time_limit(mut self, limit: Duration) -> Self {
        self.time_limit = Some(limit);
        self
    }

    pub fn with_node_limit(mut self, limit: usize) -> Self {
        self.node_limit = Some(limit);
        self
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SolveStatus {
    Optimal,
    Infeasible,
    Unbounded,
    LimitReached,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct SolveStats {
    pub nodes_explored: usize,
    pub lp_iterations_total: usize,
    pub cuts_added: usize,
    pub wall_time: Duration,
}

#[derive(Debug, Clone)]
pub struct Solution {
    pub status: SolveStatus,
    /// Best integer solution found; empty when there is none.
    pub values: Vec<f64>,
    pub objective: Option<f64>,
    pub stats: SolveStats,
    /// Lazy cuts added during the search, in order.
    pub cuts: Vec<Constraint>,
}

impl Solution {
    pub fn has_values(&self) -> bool {
        !self.values.is_empty()
    }

    pub fn value(&self, var: VarId) -> f64 {
        self.values[var.0]
    }

    /// True when `var` is set to one (within the integrality tolerance).
    pub fn is_one(&self, var: VarId) -> bool {
        (self.values[var.0] - 1.0).abs() <= INTEGRALITY_TOL
    }
}

/// A linear cut returned by a [`LazyCutHandler`]; the solver names it.
#[derive(Debug, Clone, PartialEq)]
pub struct Cut {
    pub expr: LinExpr,
    pub sense: Sense,
    pub rhs: f64,
}

/// Separates constraints that integer candidates must satisfy but that are
/// not part of the model up front.
///
/// Returned cuts must be violated by `candidate` and valid for every
/// solution the caller wants to keep.
pub trait LazyCutHandler {
    fn separate(&mut self, model: &Model, candidate: &[f64]) -> Vec<Cut>;
}

impl<F> LazyCutHandler for F
where
    F: FnMut(&Model, &[f64]) -> Vec<Cut>,
{
    fn separate(&mut self, model: &Model, candidate: &[f64]) -> Vec<Cut> {
        self(model, candidate)
    }
}

/// Handler that never returns cuts.
#[derive(Debug, Clone, Copy, Default)]
pub struct NoCuts;

impl LazyCutHandler for NoCuts {
    fn separate(&mut self, _: &Model, _: &[f64]) -> Vec<Cut> {
        Vec::new()
    }
}

#[derive(Debug, Clone)]
struct Node {
    /// `(var, lower, upper)` restrictions relative to the root bounds.
    restrictions: Vec<(VarId, f64, f64)>,
    parent_bound: f64,
    depth: usize,
}

/// True when a node with LP bound `bound` cannot improve on `incumbent`
/// (both as maximization scores).
pub fn is_pruned(bound: f64, incumbent: Option<f64>) -> bool {
    incumbent.is_some_and(|inc| bound <= inc + PRUNE_TOL)
}

/// Most fractional integral variable (fractional part closest to 0.5),
/// ties broken by the lowest id. `None` if all are integral.
pub fn select_branch_var(model: &Model, values: &[f64]) -> Option<VarId> {
    let mut best: Option<(VarId, f64)> = None;
    for (id, var) in model.var_ids().zip(model.variables()) {
        if !var.kind.is_integral() {
            continue;
        }
        let x = values[id.0];
        if (x - x.round()).abs() <= INTEGRALITY_TOL {
            continue;
        }
        let score = (x - x.floor() - 0.5).abs();
        if best.map_or(true, |(_, s)| score < s) {
            best = Some((id, score));
        }
    }
    best.map(|(id, _)| id)
}

/// Solves `model` to integer optimality.
///
/// When `lazy` is given, every integer candidate is passed to it; returned
/// cuts are added to the model for the rest of the search and the node is
/// re-solved. A candidate becomes the incumbent only once the handler
/// returns no cuts for it.
pub fn solve<'a>(
    model: &Model,
    config: &SolveConfig,
    lazy: Option<&'a mut dyn LazyCutHandler>,
) -> Result<Solution, SolveError> {
    Search::new(model, config, lazy)?.run()
}

struct Search<'a> {
    work: Model,
    config: SolveConfig,
    lazy: Option<&'a mut dyn LazyCutHandler>,
    sign: f64,
    root_lower: Vec<f64>,
    root_upper: Vec<f64>,
    incumbent: Option<(Vec<f64>, f64)>,
    stats: SolveStats,
    cuts: Vec<Constraint>,
    start: Instant,
}

impl<'a> Search<'a> {
    fn new(model: &Model, config: &SolveConfig, lazy: Option<&'a mut dyn LazyCutHandler>) -> Result<Self, SolveError> {
        for var in model.variables() {
            if var.kind.is_integral() && !(var.lower.is_finite() && var.upper.is_finite()) {
                return Err(SolveError::UnboundedIntegerVariable(var.name.clone()));
            }
        }
        let (root_lower, root_upper) = model.variables().iter().map(|v| (v.lower, v.upper)).unzip();
        Ok(Search {
            work: model.clone(),
            config: config.clone(),
            lazy,
            sign: model.objective().sense.sign(),
            root_lower,
            root_upper,
            incumbent: None,
            stats: SolveStats::default(),
            cuts: Vec::new(),
            start: Instant::now(),
        })
    }

    fn limit_hit(&self) -> bool {
        self.config.time_limit.is_some_and(|t| self.start.elapsed() >= t)
            || self.config.node_limit.is_some_and(|n| self.stats.nodes_explored >= n)
    }

    fn incumbent_score(&self) -> Option<f64> {
        self.incumbent.as_ref().map(|(_, s)| *s)
    }

    fn run(mut self) -> Result<Solution, SolveError> {
        let mut stack = vec![Node { restrictions: Vec::new(), parent_bound: f64::INFINITY, depth: 0 }];
        let mut limited = false;
        while let Some(node) = stack.pop() {
            if is_pruned(node.parent_bound, self.incumbent_score()) {
                continue;
            }
            if self.limit_hit() {
                limited = true;
                break;
            }
            self.stats.nodes_explored += 1;
            if self.stats.nodes_explored % 1000 == 0 {
                info!(
                    "nodes {} depth {} open {} incumbent {:?}",
                    self.stats.nodes_explored,
                    node.depth,
                    stack.len(),
                    self.incumbent_score().map(|s| self.sign * s)
                );
            }
            match self.process(&node, &mut stack)? {
                NodeOutcome::Continue => {}
                NodeOutcome::Unbounded => return Ok(self.finish(SolveStatus::Unbounded)),
                NodeOutcome::Stop => break,
            }
        }
        let status = if limited {
            SolveStatus::LimitReached
        } else if self.incumbent.is_some() {
            SolveStatus::Optimal
        } else {
            SolveStatus::Infeasible
        };
        Ok(self.finish(status))
    }

    fn process(&mut self, node: &Node, stack: &mut Vec<Node>) -> Result<NodeOutcome, SolveError> {
        let mut lower = self.root_lower.clone();
        let mut upper = self.root_upper.clone();
        for &(v, l, u) in &node.restrictions {
            lower[v.0] = l;
            upper[v.0] = u;
        }
        loop {
            let lp = simplex::solve_with_bounds(&self.work, &lower, &upper, &self.config.simplex)?;
            self.stats.lp_iterations_total += lp.iterations;
            match lp.status {
                LpStatus::Infeasible => return Ok(NodeOutcome::Continue),
                LpStatus::Unbounded => return Ok(NodeOutcome::Unbounded),
                LpStatus::Optimal => {}
            }
            let bound = self.sign * lp.objective.unwrap_or(f64::NAN);
            if is_pruned(bound, self.incumbent_score()) {
                return Ok(NodeOutcome::Continue);
            }
            if let Some(var) = select_branch_var(&self.work, &lp.values) {
                let x = lp.values[var.0];
                let (lo, hi) = (lower[var.0], upper[var.0]);
                let child = |l: f64, u: f64| {
                    let mut restrictions = node.restrictions.clone();
                    restrictions.push((var, l, u));
                    Node { restrictions, parent_bound: bound, depth: node.depth + 1 }
                };
                // A child must tighten the parent's bounds; an LP value outside
                // them (round-off) could otherwise recreate the parent forever.
                let (down, up) = (x.floor().min(hi), x.ceil().max(lo));
                let (push_down, push_up) = (down >= lo && down < hi, up > lo && up <= hi);
                if push_down {
                    stack.push(child(lo, down));
                }
                // Pushed last, popped first: the ceil child.
                if push_up {
                    stack.push(child(up, hi));
                }
                if !push_down && !push_up {
                    warn!(
                        "dropping node at depth {}: value {x} of `{}` outside [{lo}, {hi}]",
                        node.depth,
                        self.work.variable(var).name
                    );
                }
                return Ok(NodeOutcome::Continue);
            }

            let candidate: Vec<f64> = self
                .work
                .variables()
                .iter()
                .zip(&lp.values)
                .map(|(v, &x)| if v.kind.is_integral() { x.round() } else { x })
                .collect();
            if let Some(handler) = self.lazy.as_deref_mut() {
                let cuts = handler.separate(&self.work, &candidate);
                if !cuts.is_empty() {
                    debug!("node depth {}: {} lazy cuts", node.depth, cuts.len());
                    for (index, cut) in cuts.into_iter().enumerate() {
                        let lhs = cut.expr.evaluate(&candidate)?;
                        let violation = cut.sense.violation(lhs, cut.rhs);
                        if violation <= CUT_VIOLATION_TOL {
                            return Err(SolveError::InvalidLazyCut { index, violation });
                        }
                        let name = self.fresh_cut_name();
                        self.work.add_constraint(name, cut.expr, cut.sense, cut.rhs)?;
                        self.cuts.push(self.work.constraints().last().cloned().expect("just added"));
                        self.stats.cuts_added += 1;
                    }
                    continue;
                }
            }
            let score = self.sign * self.work.objective().expr.evaluate(&candidate)?;
            if self.incumbent_score().map_or(true, |inc| score > inc) {
                debug!("incumbent {} at depth {}", self.sign * score, node.depth);
                self.incumbent = Some((candidate, score));
            }
            return Ok(if self.config.stop_at_first_incumbent { NodeOutcome::Stop } else { NodeOutcome::Continue });
        }
    }

    fn fresh_cut_name(&self) -> String {
        let mut k = self.stats.cuts_added + 1;
        loop {
            let name = format!("lazy_{k}");
            if !self.work.has_constraint(&name) {
                return name;
            }
            k += 1;
        }
    }

    fn finish(mut self, status: SolveStatus) -> Solution {
        self.stats.wall_time = self.start.elapsed();
        let (values, objective) = match (status, self.incumbent) {
            (SolveStatus::Unbounded, _) | (_, None) => (Vec::new(), None),
            (_, Some((values, score))) => (values, Some(self.sign * score)),
        };
        Solution { status, values, objective, stats: self.stats, cuts: self.cuts }
    }
}

enum NodeOutcome {
    Continue,
    Unbounded,
    Stop,
}

/// All optimal 0/1 points of a pure binary model.
#[derive(Debug, Clone)]
pub struct Enumeration {
    pub solutions: Vec<Solution>,
    /// Status of the initial optimization.
    pub status: SolveStatus,
    /// False when a limit or `max_solutions` stopped the enumeration early.
    pub complete: bool,
}

/// Enumerates every optimal solution of a binary model.
///
/// After the optimum `z*` is known, the objective is pinned to `z*` (two
/// inequalities, ±1e-6) and each solution found is excluded by the no-good
/// cut `Σ_{x_j=1} x_j − Σ_{x_j=0} x_j ≤ |ones| − 1` before searching again.
pub fn enumerate_optimal(model: &Model, config: &SolveConfig, max_solutions: usize) -> Result<Enumeration, SolveError> {
    let mut used = vec![false; model.num_vars()];
    for (v, _) in model.objective().expr.terms() {
        used[v.0] = true;
    }
    for c in model.constraints() {
        for (v, _) in c.expr.terms() {
            used[v.0] = true;
        }
    }
    for (var, &u) in model.variables().iter().zip(&used) {
        if u && var.kind != VarKind::Binary {
            return Err(SolveError::NotBinaryModel(var.name.clone()));
        }
    }
    let binaries: Vec<VarId> = model.var_ids().filter(|&v| model.variable(v).kind == VarKind::Binary).collect();

    let start = Instant::now();
    let first = solve(model, config, None)?;
    if first.status != SolveStatus::Optimal {
        let complete = first.status != SolveStatus::LimitReached;
        return Ok(Enumeration { solutions: Vec::new(), status: first.status, complete });
    }
    let z = first.objective.expect("optimal solution has an objective");
    let mut work = model.clone();
    let obj = model.objective().expr.clone();
    work.add_constraint(unique_name(&work, "enum_obj_lo"), obj.clone(), Sense::Ge, z - PRUNE_TOL)?;
    work.add_constraint(unique_name(&work, "enum_obj_hi"), obj, Sense::Le, z + PRUNE_TOL)?;

    let mut solutions = vec![first];
    let mut complete = true;
    loop {
        if solutions.len() >= max_solutions {
            complete = false;
            break;
        }
        let last = solutions.last().expect("non-empty");
        let mut cut = LinExpr::new();
        let mut ones = 0usize;
        for &v in &binaries {
            if last.is_one(v) {
                cut.add_term(v, 1.0);
                ones += 1;
            } else {
                cut.add_term(v, -1.0);
            }
        }
        let name = unique_name(&work, &format!("nogood_{}", solutions.len()));
        work.add_constraint(name, cut, Sense::Le, ones as f64 - 1.0)?;

        let mut sub = config.clone();
        sub.stop_at_first_incumbent = true;
        if let Some(limit) = config.time_limit {
            match limit.checked_sub(start.elapsed()) {
                Some(rest) => sub.time_limit = Some(rest),
                None => {
                    complete = false;
                    break;
                }
            }
        }
        let next = solve(&work, &sub, None)?;
        match next.status {
            SolveStatus::Optimal => {
                debug!("solution {} found in {} nodes", solutions.len() + 1, next.stats.nodes_explored);
                solutions.push(next);
            }
            SolveStatus::LimitReached => {
                if next.has_values() {
                    solutions.push(next);
                }
                complete = false;
                break;
            }
            SolveStatus::Infeasible | SolveStatus::Unbounded => break,
        }
    }
    Ok(Enumeration { solutions, status: SolveStatus::Optimal, complete })
}

fn unique_name(model: &Model, base: &str) -> String {
    if !model.has_constraint(base) {
        return base.to_string();
    }
    (1..).map(|k| format!("{base}_{k}")).find(|n| !model.has_constraint(n)).expect("unbounded range")
}
