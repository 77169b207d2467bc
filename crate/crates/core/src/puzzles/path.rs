//! Shortest path as a unit flow from source to target.

use crate::bnb::Solution;
use crate::ilp::{LinExpr, Model, ObjectiveSense, Sense, VarId};
use crate::puzzles::{content_lines, invalid, parse_num, PuzzleError};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Arc {
    pub from: usize,
    pub to: usize,
    pub cost: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PathInstance {
    pub nodes: usize,
    pub arcs: Vec<Arc>,
    pub source: usize,
    pub target: usize,
}

impl PathInstance {
    pub fn new(nodes: usize, arcs: Vec<Arc>, source: usize, target: usize) -> Result<Self, PuzzleError> {
        if source == target {
            return Err(invalid("source and target coincide"));
        }
        if source >= nodes || target >= nodes {
            return Err(invalid(format!("source {source} or target {target} outside 0..{nodes}")));
        }
        for a in &arcs {
            if a.from >= nodes || a.to >= nodes {
                return Err(invalid(format!("arc {} -> {} references a missing node", a.from, a.to)));
            }
            if !a.cost.is_finite() || a.cost < 0.0 {
                return Err(invalid(format!("arc {} -> {} has cost {}", a.from, a.to, a.cost)));
            }
        }
        Ok(PathInstance { nodes, arcs, source, target })
    }

    /// Reads `u v cost` lines. Nodes are numbered from 0; the node count is
    /// one more than the largest index mentioned.
    pub fn parse(text: &str, source: usize, target: usize) -> Result<Self, PuzzleError> {
        let mut arcs = Vec::new();
        for (line, l) in content_lines(text) {
            let t: Vec<&str> = l.split_whitespace().collect();
            if t.len() != 3 {
                return Err(invalid(format!("line {line}: expected `u v cost`")));
            }
            arcs.push(Arc { from: parse_num(t[0], line)?, to: parse_num(t[1], line)?, cost: parse_num(t[2], line)? });
        }
        let nodes = arcs.iter().map(|a| a.from.max(a.to) + 1).chain([source + 1, target + 1]).max().unwrap_or(0);
        Self::new(nodes, arcs, source, target)
    }
}

#[derive(Debug, Clone)]
pub struct PathModel {
    pub model: Model,
    pub instance: PathInstance,
    /// `use_arc[k]` is the variable of arc `k`, named `a_{k}`.
    pub use_arc: Vec<VarId>,
}

pub fn build_shortest_path(instance: &PathInstance) -> Result<PathModel, PuzzleError> {
    let mut model = Model::new("shortest_path");
    let use_arc =
        (0..instance.arcs.len()).map(|k| model.add_binary(format!("a_{k}"))).collect::<Result<Vec<_>, _>>()?;
    let mut balance = vec![LinExpr::new(); instance.nodes];
    for (a, &v) in instance.arcs.iter().zip(&use_arc) {
        balance[a.from].add_term(v, 1.0);
        balance[a.to].add_term(v, -1.0);
    }
    for (i, expr) in balance.into_iter().enumerate() {
        let rhs = if i == instance.source {
            1.0
        } else if i == instance.target {
            -1.0
        } else {
            0.0
        };
        model.add_constraint(format!("flow_{i}"), expr, Sense::Eq, rhs)?;
    }
    let cost: LinExpr = instance.arcs.iter().zip(&use_arc).map(|(a, &v)| (v, a.cost)).collect();
    model.set_objective(ObjectiveSense::Minimize, cost)?;
    Ok(PathModel { model, instance: instance.clone(), use_arc })
}

impl PathModel {
    /// Arc indices of the source-to-target path, in travel order. Selected
    /// arcs on zero-cost cycles away from the path are ignored.
    pub fn decode(&self, solution: &Solution) -> Vec<usize> {
        let selected: Vec<usize> = (0..self.use_arc.len()).filter(|&k| solution.is_one(self.use_arc[k])).collect();
        let mut used = vec![false; selected.len()];
        let mut path = Vec::new();
        let mut at = self.instance.source;
        while at != self.instance.target {
            let Some(pos) = (0..selected.len()).find(|&p| !used[p] && self.instance.arcs[selected[p]].from == at)
            else {
                break;
            };
            used[pos] = true;
            path.push(selected[pos]);
            at = self.instance.arcs[selected[pos]].to;
        }
        path
    }
}

/// The arcs form a walk from source to target.
pub fn is_path(instance: &PathInstance, arcs: &[usize]) -> bool {
    let mut at = instance.source;
    for &k in arcs {
        match instance.arcs.get(k) {
            Some(a) if a.from == at => at = a.to,
            _ => return false,
        }
    }
    at == instance.target
}
