//! Knight's tours as Hamiltonian cycles on the knight-move graph.
//!
//! Cell `(r, c)` (1-based) is node `(r − 1)·n + (c − 1)`. Open tours add a
//! dummy node `n²` joined to every cell at zero cost; the cycle through it
//! becomes a path once the dummy is removed.

use crate::bnb::Solution;
use crate::puzzles::tsp::{build_cycle, CycleModel, SubtourHandler};
use crate::puzzles::PuzzleError;

#[derive(Debug, Clone)]
pub struct KnightModel {
    pub cycle: CycleModel,
    pub n: usize,
    pub closed: bool,
}

pub fn is_knight_move(a: (usize, usize), b: (usize, usize)) -> bool {
    let dr = a.0.abs_diff(b.0);
    let dc = a.1.abs_diff(b.1);
    (dr == 1 && dc == 2) || (dr == 2 && dc == 1)
}

pub fn build_knight_tour(n: usize, closed: bool) -> Result<KnightModel, PuzzleError> {
    if n < 3 {
        return Err(PuzzleError::InvalidSize(n));
    }
    let cells = n * n;
    let cell = |k: usize| (k / n + 1, k % n + 1);
    let mut edges = Vec::new();
    for a in 0..cells {
        for b in a + 1..cells {
            if is_knight_move(cell(a), cell(b)) {
                edges.push((a, b, 1.0));
            }
        }
    }
    let nodes = if closed {
        cells
    } else {
        edges.extend((0..cells).map(|a| (a, cells, 0.0)));
        cells + 1
    };
    let cycle = build_cycle(if closed { "knight_closed" } else { "knight_open" }, nodes, &edges)?;
    Ok(KnightModel { cycle, n, closed })
}

impl KnightModel {
    pub fn subtour_handler(&self) -> SubtourHandler {
        self.cycle.subtour_handler()
    }

    /// 1-based cells in visiting order.
    pub fn decode(&self, solution: &Solution) -> Vec<(usize, usize)> {
        let mut order = self.cycle.decode_tour(solution);
        if !self.closed {
            let dummy = self.n * self.n;
            if let Some(pos) = order.iter().position(|&k| k == dummy) {
                order.rotate_left(pos);
                order.remove(0);
            }
        }
        order.into_iter().map(|k| (k / self.n + 1, k % self.n + 1)).collect()
    }
}

/// Visits every cell once with knight moves; closed tours must also return
/// to the start with one more move.
pub fn is_knight_tour(n: usize, cells: &[(usize, usize)], closed: bool) -> bool {
    let mut seen = vec![false; n * n];
    let in_board = cells.iter().all(|&(r, c)| (1..=n).contains(&r) && (1..=n).contains(&c));
    if !in_board
        || cells.len() != n * n
        || cells.iter().any(|&(r, c)| std::mem::replace(&mut seen[(r - 1) * n + c - 1], true))
    {
        return false;
    }
    cells.windows(2).all(|w| is_knight_move(w[0], w[1])) && (!closed || is_knight_move(cells[n * n - 1], cells[0]))
}

/// Board with move numbers (1-based) in each cell.
pub fn render(n: usize, cells: &[(usize, usize)]) -> String {
    let mut grid = vec![vec![0; n]; n];
    for (k, &(r, c)) in cells.iter().enumerate() {
        grid[r - 1][c - 1] = k + 1;
    }
    let width = (n * n).to_string().len();
    grid.iter().map(|row| row.iter().map(|k| format!("{k:>width$}")).collect::<Vec<_>>().join(" ") + "\n").collect()
}
