//! Symmetric TSP with degree equalities and lazy subtour elimination.

use crate::bnb::{Cut, LazyCutHandler, Solution};
use crate::ilp::{LinExpr, Model, ObjectiveSense, Sense, VarId};
use crate::puzzles::{content_lines, invalid, parse_num, PuzzleError};

#[derive(Debug, Clone, PartialEq)]
pub struct WeightedGraph {
    pub n: usize,
    pub dist: Vec<Vec<f64>>,
    pub coords: Option<Vec<(f64, f64)>>,
}

impl WeightedGraph {
    pub fn from_matrix(dist: Vec<Vec<f64>>) -> Result<Self, PuzzleError> {
        let n = dist.len();
        for (i, row) in dist.iter().enumerate() {
            if row.len() != n {
                return Err(invalid(format!("row {i} has {} entries, expected {n}", row.len())));
            }
            for (j, &d) in row.iter().enumerate() {
                if !d.is_finite() || d < 0.0 {
                    return Err(invalid(format!("distance d[{i}][{j}] = {d}")));
                }
                if d != dist[j][i] {
                    return Err(invalid(format!("distance matrix is not symmetric at ({i}, {j})")));
                }
            }
            if row[i] != 0.0 {
                return Err(invalid(format!("d[{i}][{i}] must be 0")));
            }
        }
        Ok(WeightedGraph { n, dist, coords: None })
    }

    /// Euclidean distances between the points.
    pub fn from_points(points: &[(f64, f64)]) -> Result<Self, PuzzleError> {
        if points.iter().any(|p| !p.0.is_finite() || !p.1.is_finite()) {
            return Err(invalid("coordinates must be finite"));
        }
        let dist = points.iter().map(|a| points.iter().map(|b| (a.0 - b.0).hypot(a.1 - b.1)).collect()).collect();
        Ok(WeightedGraph { n: points.len(), dist, coords: Some(points.to_vec()) })
    }

    /// Reads `n` on the first line followed by either `n` lines `x y` or
    /// `n` rows of an explicit distance matrix.
    pub fn parse(text: &str) -> Result<Self, PuzzleError> {
        let mut lines = content_lines(text);
        let (line, head) = lines.next().ok_or_else(|| invalid("empty TSP instance"))?;
        let n: usize = parse_num(head, line)?;
        let rows = lines
            .map(|(line, l)| l.split_whitespace().map(|t| parse_num::<f64>(t, line)).collect::<Result<Vec<_>, _>>())
            .collect::<Result<Vec<_>, _>>()?;
        if rows.len() != n {
            return Err(invalid(format!("expected {n} data lines, found {}", rows.len())));
        }
        if n != 2 && rows.iter().all(|r| r.len() == 2) {
            let points: Vec<_> = rows.iter().map(|r| (r[0], r[1])).collect();
            Self::from_points(&points)
        } else {
            Self::from_matrix(rows)
        }
    }

    pub fn tour_length(&self, tour: &[usize]) -> f64 {
        (0..tour.len()).map(|k| self.dist[tour[k]][tour[(k + 1) % tour.len()]]).sum()
    }
}

/// Degree-2 cycle model over an edge list, shared by the TSP and the
/// knight's tour. Edge variables are `y_{i}_{j}` with `i < j`.
#[derive(Debug, Clone)]
pub struct CycleModel {
    pub model: Model,
    pub n: usize,
    pub edges: Vec<(usize, usize, VarId)>,
}

pub(crate) fn build_cycle(name: &str, n: usize, edges: &[(usize, usize, f64)]) -> Result<CycleModel, PuzzleError> {
    let mut model = Model::new(name);
    let mut vars = Vec::with_capacity(edges.len());
    let mut degree = vec![LinExpr::new(); n];
    let mut cost = LinExpr::new();
    for &(a, b, d) in edges {
        let (i, j) = (a.min(b), a.max(b));
        let v = model.add_binary(format!("y_{i}_{j}"))?;
        degree[i].add_term(v, 1.0);
        degree[j].add_term(v, 1.0);
        cost.add_term(v, d);
        vars.push((i, j, v));
    }
    for (i, expr) in degree.into_iter().enumerate() {
        model.add_constraint(format!("deg_{i}"), expr, Sense::Eq, 2.0)?;
    }
    model.set_objective(ObjectiveSense::Minimize, cost)?;
    Ok(CycleModel { model, n, edges: vars })
}

pub fn build_tsp(graph: &WeightedGraph) -> Result<CycleModel, PuzzleError> {
    if graph.n < 3 {
        return Err(PuzzleError::InvalidSize(graph.n));
    }
    let edges: Vec<_> = (0..graph.n)
        .flat_map(|i| (i + 1..graph.n).map(move |j| (i, j)))
        .map(|(i, j)| (i, j, graph.dist[i][j]))
        .collect();
    build_cycle("tsp", graph.n, &edges)
}

impl CycleModel {
    pub fn subtour_handler(&self) -> SubtourHandler {
        SubtourHandler { n: self.n, edges: self.edges.clone() }
    }

    /// Connected components of the edges set to one.
    pub fn components(&self, values: &[f64]) -> Vec<Vec<usize>> {
        components(self.n, &self.edges, values)
    }

    /// Node order following the selected edges from node 0. For a valid
    /// solution this is the full cycle.
    pub fn decode_tour(&self, solution: &Solution) -> Vec<usize> {
        self.decode_values(&solution.values)
    }

    pub fn decode_values(&self, values: &[f64]) -> Vec<usize> {
        let mut adj = vec![Vec::with_capacity(2); self.n];
        for &(i, j, v) in &self.edges {
            if values[v.0] > 0.5 {
                adj[i].push(j);
                adj[j].push(i);
            }
        }
        let mut tour = vec![0];
        let mut prev = usize::MAX;
        let mut at = 0;
        loop {
            let Some(&next) = adj[at].iter().find(|&&k| k != prev) else { break };
            if next == 0 {
                break;
            }
            if tour.contains(&next) {
                break;
            }
            tour.push(next);
            prev = at;
            at = next;
        }
        tour
    }
}

fn components(n: usize, edges: &[(usize, usize, VarId)], values: &[f64]) -> Vec<Vec<usize>> {
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(parent: &mut [usize], mut x: usize) -> usize {
        while parent[x] != x {
            parent[x] = parent[parent[x]];
            x = parent[x];
        }
        x
    }
    for &(i, j, v) in edges {
        if values[v.0] > 0.5 {
            let (a, b) = (find(&mut parent, i), find(&mut parent, j));
            parent[a.max(b)] = a.min(b);
        }
    }
    let mut groups: Vec<Vec<usize>> = vec![Vec::new(); n];
    for i in 0..n {
        let r = find(&mut parent, i);
        groups[r].push(i);
    }
    groups.into_iter().filter(|g| !g.is_empty()).collect()
}

/// Emits `Σ_{i<j ∈ S} y_ij ≤ |S| − 1` for every component `S` of an integer
/// candidate with `1 < |S| < n`.
#[derive(Debug, Clone)]
pub struct SubtourHandler {
    n: usize,
    edges: Vec<(usize, usize, VarId)>,
}

impl LazyCutHandler for SubtourHandler {
    fn separate(&mut self, _model: &Model, candidate: &[f64]) -> Vec<Cut> {
        let groups = components(self.n, &self.edges, candidate);
        if groups.len() == 1 {
            return Vec::new();
        }
        let mut member = vec![usize::MAX; self.n];
        for (g, nodes) in groups.iter().enumerate() {
            for &i in nodes {
                member[i] = g;
            }
        }
        groups
            .iter()
            .enumerate()
            .filter(|(_, s)| s.len() > 1 && s.len() < self.n)
            .map(|(g, s)| Cut {
                expr: LinExpr::sum(
                    self.edges.iter().filter(|&&(i, j, _)| member[i] == g && member[j] == g).map(|&(_, _, v)| v),
                ),
                sense: Sense::Le,
                rhs: (s.len() - 1) as f64,
            })
            .collect()
    }
}

/// `tour` visits each of the `n` nodes exactly once.
pub fn is_hamiltonian_cycle(n: usize, tour: &[usize]) -> bool {
    let mut seen = vec![false; n];
    tour.len() == n && tour.iter().all(|&i| i < n && !std::mem::replace(&mut seen[i], true))
}
