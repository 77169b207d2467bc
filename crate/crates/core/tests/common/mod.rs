//! Model-independent oracles shared by the integration tests.
#![allow(dead_code)]

use std::cmp::Reverse;
use std::collections::{BinaryHeap, HashSet};

use optlab::ilp::{LinExpr, Model, ObjectiveSense, Sense, VarKind};
use optlab::puzzles::path::PathInstance;
use optlab::puzzles::sudoku::SudokuGrid;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// All non-attacking placements of `n` queens, one per row; 1-based
/// `(row, col)` cells.
pub fn queens_solutions(n: usize) -> Vec<Vec<(usize, usize)>> {
    fn place(n: usize, row: usize, cols: &mut Vec<usize>, out: &mut Vec<Vec<(usize, usize)>>) {
        if row == n {
            out.push(cols.iter().enumerate().map(|(r, &c)| (r + 1, c + 1)).collect());
            return;
        }
        for c in 0..n {
            let safe = cols.iter().enumerate().all(|(r, &q)| q != c && row - r != c.abs_diff(q));
            if safe {
                cols.push(c);
                place(n, row + 1, cols, out);
                cols.pop();
            }
        }
    }
    let mut out = Vec::new();
    place(n, 0, &mut Vec::new(), &mut out);
    out
}

fn attacks(a: (usize, usize), b: (usize, usize)) -> bool {
    a != b && (a.0 == b.0 || a.1 == b.1 || a.0 + a.1 == b.0 + b.1 || a.0 + b.1 == b.0 + a.1)
}

/// Fewest non-attacking queens leaving no safe empty cell, by increasing
/// subset size over all cells.
pub fn min_blocking_queens(n: usize) -> usize {
    let cells: Vec<(usize, usize)> = (1..=n).flat_map(|i| (1..=n).map(move |j| (i, j))).collect();
    fn search(cells: &[(usize, usize)], start: usize, k: usize, chosen: &mut Vec<(usize, usize)>) -> bool {
        if chosen.len() == k {
            return cells.iter().all(|&c| chosen.contains(&c) || chosen.iter().any(|&q| attacks(q, c)));
        }
        for i in start..cells.len() {
            if chosen.iter().all(|&q| !attacks(q, cells[i])) {
                chosen.push(cells[i]);
                if search(cells, i + 1, k, chosen) {
                    return true;
                }
                chosen.pop();
            }
        }
        false
    }
    (1..=n).find(|&k| search(&cells, 0, k, &mut Vec::new())).expect("n queens always block")
}

/// Number of Sudoku completions, counting stops at `limit`.
pub fn sudoku_count(grid: &SudokuGrid, limit: usize) -> usize {
    let mut cells = grid.cells;
    let mut rows = [0u16; 9];
    let mut cols = [0u16; 9];
    let mut boxes = [0u16; 9];
    for r in 0..9 {
        for c in 0..9 {
            let v = cells[r][c];
            if v != 0 {
                let bit = 1 << v;
                if rows[r] & bit != 0 || cols[c] & bit != 0 || boxes[r / 3 * 3 + c / 3] & bit != 0 {
                    return 0;
                }
                rows[r] |= bit;
                cols[c] |= bit;
                boxes[r / 3 * 3 + c / 3] |= bit;
            }
        }
    }
    fn go(
        cells: &mut [[u8; 9]; 9],
        rows: &mut [u16; 9],
        cols: &mut [u16; 9],
        boxes: &mut [u16; 9],
        limit: usize,
        count: &mut usize,
    ) {
        // Most constrained blank cell first.
        let mut best: Option<(usize, usize, u16)> = None;
        for r in 0..9 {
            for c in 0..9 {
                if cells[r][c] == 0 {
                    let free = !(rows[r] | cols[c] | boxes[r / 3 * 3 + c / 3]) & 0b11_1111_1110;
                    if best.map_or(true, |(_, _, f)| free.count_ones() < f.count_ones()) {
                        best = Some((r, c, free));
                    }
                }
            }
        }
        let Some((r, c, free)) = best else {
            *count += 1;
            return;
        };
        for v in 1..=9u8 {
            let bit = 1 << v;
            if free & bit == 0 {
                continue;
            }
            cells[r][c] = v;
            rows[r] |= bit;
            cols[c] |= bit;
            boxes[r / 3 * 3 + c / 3] |= bit;
            go(cells, rows, cols, boxes, limit, count);
            cells[r][c] = 0;
            rows[r] &= !bit;
            cols[c] &= !bit;
            boxes[r / 3 * 3 + c / 3] &= !bit;
            if *count >= limit {
                return;
            }
        }
    }
    let mut count = 0;
    go(&mut cells, &mut rows, &mut cols, &mut boxes, limit, &mut count);
    count
}

/// A random full grid: a valid base pattern with digits, bands, stacks,
/// rows within bands and columns within stacks shuffled.
pub fn random_full_grid(rng: &mut ChaCha8Rng) -> SudokuGrid {
    let mut digits: Vec<u8> = (1..=9).collect();
    digits.shuffle(rng);
    let order = |rng: &mut ChaCha8Rng| {
        let mut bands: Vec<usize> = (0..3).collect();
        bands.shuffle(rng);
        let mut out = Vec::with_capacity(9);
        for b in bands {
            let mut inner: Vec<usize> = (0..3).collect();
            inner.shuffle(rng);
            out.extend(inner.into_iter().map(|k| 3 * b + k));
        }
        out
    };
    let rows = order(rng);
    let cols = order(rng);
    let mut g = SudokuGrid::empty();
    for r in 0..9 {
        for c in 0..9 {
            let (pr, pc) = (rows[r], cols[c]);
            g.cells[r][c] = digits[(3 * (pr % 3) + pr / 3 + pc) % 9];
        }
    }
    g
}

/// Blanks cells in random order, keeping a blank only while the puzzle
/// stays uniquely solvable, until `target` cells are blank.
pub fn unique_puzzle(rng: &mut ChaCha8Rng, target: usize) -> SudokuGrid {
    let full = random_full_grid(rng);
    let mut g = full;
    let mut cells: Vec<usize> = (0..81).collect();
    cells.shuffle(rng);
    let mut blank = 0;
    for i in cells {
        if blank == target {
            break;
        }
        let keep = g.cells[i / 9][i % 9];
        g.cells[i / 9][i % 9] = 0;
        if sudoku_count(&g, 2) == 1 {
            blank += 1;
        } else {
            g.cells[i / 9][i % 9] = keep;
        }
    }
    g
}

/// Blanks `blanks` random cells of a random full grid until the result has
/// at least two completions.
pub fn ambiguous_puzzle(rng: &mut ChaCha8Rng, blanks: usize) -> SudokuGrid {
    loop {
        let mut g = random_full_grid(rng);
        let mut cells: Vec<usize> = (0..81).collect();
        cells.shuffle(rng);
        for &i in &cells[..blanks] {
            g.cells[i / 9][i % 9] = 0;
        }
        if sudoku_count(&g, 2) >= 2 {
            return g;
        }
    }
}

/// Shortest closed tour over all permutations fixing node 0 first.
pub fn tsp_brute_force(dist: &[Vec<f64>]) -> f64 {
    let n = dist.len();
    let mut rest: Vec<usize> = (1..n).collect();
    let mut best = f64::INFINITY;
    fn permute(k: usize, rest: &mut Vec<usize>, dist: &[Vec<f64>], best: &mut f64) {
        if k == rest.len() {
            let mut len = dist[0][rest[0]] + dist[*rest.last().unwrap()][0];
            for w in rest.windows(2) {
                len += dist[w[0]][w[1]];
            }
            *best = best.min(len);
            return;
        }
        for i in k..rest.len() {
            rest.swap(k, i);
            permute(k + 1, rest, dist, best);
            rest.swap(k, i);
        }
    }
    permute(0, &mut rest, dist, &mut best);
    best
}

pub fn random_integer_distances(rng: &mut ChaCha8Rng, n: usize, max: u32) -> Vec<Vec<f64>> {
    let mut d = vec![vec![0.0; n]; n];
    for i in 0..n {
        for j in i + 1..n {
            let w = rng.gen_range(1..=max) as f64;
            d[i][j] = w;
            d[j][i] = w;
        }
    }
    d
}

pub fn random_points(rng: &mut ChaCha8Rng, n: usize) -> Vec<(f64, f64)> {
    (0..n).map(|_| (rng.gen_range(0.0..100.0), rng.gen_range(0.0..100.0))).collect()
}

/// Closed knight tour on an n×n board by Warnsdorff's rule with
/// backtracking; 1-based cells.
pub fn knight_tour_exists(n: usize, closed: bool) -> bool {
    let moves = [(1, 2), (2, 1), (2, -1), (1, -2), (-1, -2), (-2, -1), (-2, 1), (-1, 2)];
    let neighbours = |k: usize| -> Vec<usize> {
        let (r, c) = ((k / n) as i64, (k % n) as i64);
        moves
            .iter()
            .map(|&(dr, dc)| (r + dr, c + dc))
            .filter(|&(r, c)| r >= 0 && c >= 0 && r < n as i64 && c < n as i64)
            .map(|(r, c)| r as usize * n + c as usize)
            .collect()
    };
    fn go(
        at: usize,
        depth: usize,
        n: usize,
        closed: bool,
        seen: &mut Vec<bool>,
        nb: &dyn Fn(usize) -> Vec<usize>,
        budget: &mut u64,
    ) -> bool {
        if depth == n * n {
            return !closed || nb(at).contains(&0);
        }
        if *budget == 0 {
            return false;
        }
        *budget -= 1;
        let mut next: Vec<usize> = nb(at).into_iter().filter(|&k| !seen[k]).collect();
        next.sort_by_key(|&k| nb(k).iter().filter(|&&m| !seen[m]).count());
        for k in next {
            seen[k] = true;
            if go(k, depth + 1, n, closed, seen, nb, budget) {
                return true;
            }
            seen[k] = false;
        }
        false
    }
    let starts: Vec<usize> = if closed { vec![0] } else { (0..n * n).collect() };
    starts.into_iter().any(|s| {
        let mut seen = vec![false; n * n];
        seen[s] = true;
        let mut budget = 5_000_000;
        go(s, 1, n, closed, &mut seen, &neighbours, &mut budget)
    })
}

/// Best utility over all item subsets within capacity.
pub fn knapsack_brute_force(weights: &[f64], utilities: &[f64], capacity: f64) -> f64 {
    let n = weights.len();
    (0u32..1 << n)
        .filter_map(|mask| {
            let w: f64 = (0..n).filter(|&k| mask >> k & 1 == 1).map(|k| weights[k]).sum();
            (w <= capacity).then(|| (0..n).filter(|&k| mask >> k & 1 == 1).map(|k| utilities[k]).sum())
        })
        .fold(f64::NEG_INFINITY, f64::max)
}

/// Dijkstra distance from source to target, `None` if unreachable.
pub fn dijkstra(inst: &PathInstance) -> Option<f64> {
    let mut adj = vec![Vec::new(); inst.nodes];
    for a in &inst.arcs {
        adj[a.from].push((a.to, a.cost));
    }
    // Costs in tests are integers, so they order exactly as u64.
    let mut dist = vec![u64::MAX; inst.nodes];
    let mut heap = BinaryHeap::new();
    dist[inst.source] = 0;
    heap.push(Reverse((0u64, inst.source)));
    while let Some(Reverse((d, u))) = heap.pop() {
        if d > dist[u] {
            continue;
        }
        for &(v, c) in &adj[u] {
            let nd = d + c as u64;
            if nd < dist[v] {
                dist[v] = nd;
                heap.push(Reverse((nd, v)));
            }
        }
    }
    (dist[inst.target] != u64::MAX).then(|| dist[inst.target] as f64)
}

/// Fewest squares (sizes from `sizes`) covering an `rows × cols` room
/// exactly, by DFS on the first empty cell in row-major order.
pub fn min_square_cover(rows: usize, cols: usize, sizes: &[usize]) -> Option<usize> {
    fn go(grid: &mut Vec<bool>, rows: usize, cols: usize, sizes: &[usize], used: usize, best: &mut usize) {
        if used + 1 > *best {
            return;
        }
        let Some(first) = grid.iter().position(|&f| !f) else {
            *best = used;
            return;
        };
        let (r, c) = (first / cols, first % cols);
        for &a in sizes.iter().rev() {
            if r + a > rows || c + a > cols {
                continue;
            }
            let fits = (r..r + a).all(|i| (c..c + a).all(|j| !grid[i * cols + j]));
            if !fits {
                continue;
            }
            for i in r..r + a {
                for j in c..c + a {
                    grid[i * cols + j] = true;
                }
            }
            go(grid, rows, cols, sizes, used + 1, best);
            for i in r..r + a {
                for j in c..c + a {
                    grid[i * cols + j] = false;
                }
            }
        }
    }
    let mut best = usize::MAX;
    go(&mut vec![false; rows * cols], rows, cols, sizes, 0, &mut best);
    (best != usize::MAX).then_some(best)
}

/// Random pure-binary ILP with integer data.
pub fn random_binary_ilp(rng: &mut ChaCha8Rng, max_vars: usize, max_rows: usize) -> Model {
    let n = rng.gen_range(1..=max_vars);
    let m = rng.gen_range(0..=max_rows);
    let mut model = Model::new("random");
    let vars: Vec<_> = (0..n).map(|k| model.add_binary(format!("b{k}")).unwrap()).collect();
    for k in 0..m {
        let mut e = LinExpr::new();
        for &v in &vars {
            if rng.gen_bool(0.6) {
                e.add_term(v, rng.gen_range(-5..=9) as f64);
            }
        }
        // Mostly `<=`, so that a fair share of instances stays feasible.
        let sense = match rng.gen_range(0..10) {
            0..=5 => Sense::Le,
            6..=8 => Sense::Ge,
            _ => Sense::Eq,
        };
        let rhs = rng.gen_range(-3..=15) as f64;
        model.add_constraint(format!("r{k}"), e, sense, rhs).unwrap();
    }
    let obj: LinExpr = vars.iter().map(|&v| (v, rng.gen_range(-6..=10) as f64)).collect();
    let sense = if rng.gen_bool(0.5) { ObjectiveSense::Maximize } else { ObjectiveSense::Minimize };
    model.set_objective(sense, obj).unwrap();
    model
}

/// Best objective over all 0/1 points of a pure-binary model, `None` when
/// no point is feasible.
pub fn binary_brute_force(model: &Model) -> Option<f64> {
    let n = model.num_vars();
    assert!(model.variables().iter().all(|v| v.kind == VarKind::Binary));
    let sign = model.objective().sense.sign();
    let mut best: Option<f64> = None;
    let mut x = vec![0.0; n];
    for mask in 0u32..1 << n {
        for (k, xk) in x.iter_mut().enumerate() {
            *xk = (mask >> k & 1) as f64;
        }
        if model.check_feasible(&x, 1e-9).unwrap().feasible {
            let z = model.objective().expr.evaluate(&x).unwrap();
            if best.map_or(true, |b| sign * z > sign * b) {
                best = Some(z);
            }
        }
    }
    best
}

/// No item occurs twice.
pub fn distinct<T: std::hash::Hash + Eq>(items: &[T]) -> bool {
    let set: HashSet<&T> = items.iter().collect();
    set.len() == items.len()
}

fn random_coef(rng: &mut ChaCha8Rng) -> f64 {
    match rng.gen_range(0..6) {
        0 => rng.gen_range(-9..=9) as f64,
        1 => 1.0,
        2 => -1.0,
        3 => rng.gen_range(-1e6..1e6),
        4 => rng.gen_range(-1.0..1.0) * 10f64.powi(rng.gen_range(-12..12)),
        _ => rng.gen_range(-100.0..100.0),
    }
}

/// Random model exercising every variable kind and bound shape, with names
/// that look like exponents (`e1`, `E_2`) or numbers with suffixes.
pub fn random_model(rng: &mut ChaCha8Rng) -> Model {
    let mut model = Model::new("m");
    let n = rng.gen_range(1..=12);
    let prefixes = ["x", "e", "E", "y_", "_v", "inf_", "Free", "b"];
    let mut vars = Vec::new();
    for k in 0..n {
        let name = format!("{}{}", prefixes[rng.gen_range(0..prefixes.len())], k);
        let v = match rng.gen_range(0..8) {
            0 => model.add_binary(name),
            1 => model.add_variable(name, 0.0, rng.gen_range(1..20) as f64, VarKind::Integer),
            2 => model.add_variable(name, 0.0, f64::INFINITY, VarKind::Integer),
            3 => model.add_variable(name, f64::NEG_INFINITY, f64::INFINITY, VarKind::Continuous),
            4 => model.add_variable(name, f64::NEG_INFINITY, random_coef(rng).abs(), VarKind::Continuous),
            5 => {
                let l = random_coef(rng);
                model.add_variable(name, l, l + rng.gen_range(0.0..50.0), VarKind::Continuous)
            }
            6 => model.add_variable(name, random_coef(rng), f64::INFINITY, VarKind::Continuous),
            _ => model.add_variable(name, 0.0, f64::INFINITY, VarKind::Continuous),
        };
        vars.push(v.unwrap());
    }
    let expr = |rng: &mut ChaCha8Rng| {
        let mut e = LinExpr::new();
        for &v in &vars {
            if rng.gen_bool(0.4) {
                e.add_term(v, random_coef(rng));
            }
        }
        e
    };
    for k in 0..rng.gen_range(0..=8) {
        let e = expr(rng);
        let sense = [Sense::Le, Sense::Ge, Sense::Eq][rng.gen_range(0..3)];
        model.add_constraint(format!("c{k}"), e, sense, random_coef(rng)).unwrap();
    }
    let mut obj = expr(rng);
    if rng.gen_bool(0.3) {
        obj.add_constant(random_coef(rng));
    }
    let sense = if rng.gen_bool(0.5) { ObjectiveSense::Maximize } else { ObjectiveSense::Minimize };
    model.set_objective(sense, obj).unwrap();
    model
}
