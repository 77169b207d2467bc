//! Line drawings from a single closed tour: stipple a grayscale image into
//! points, connect them with a short tour and render the tour as SVG.

use std::collections::HashSet;
use std::fmt::Write as _;
use std::time::{Duration, Instant};

use thiserror::Error;

use crate::bnb::{solve, SolveConfig, SolveStatus};
use crate::puzzles::tsp::{build_tsp, WeightedGraph};
use crate::puzzles::PuzzleError;

/// Largest instance [`exact_tour`] accepts by default.
pub const DEFAULT_EXACT_CAP: usize = 12;

#[derive(Debug, Error)]
pub enum ArtError {
    #[error("image has no pixels")]
    EmptyImage,
    #[error("no dark pixel accepted within {attempts} attempts")]
    AllWhiteImage { attempts: u64 },
    #[error("only {accepted} of {requested} points accepted within the attempt budget")]
    BudgetExhausted { accepted: usize, requested: usize },
    #[error("point count must be at least 1")]
    InvalidCount,
    #[error("a tour needs at least 3 points, got {0}")]
    TooFewPoints(usize),
    #[error("{n} points exceed the exact-solve cap of {cap}")]
    TooLarge { n: usize, cap: usize },
    #[error("bad image: {0}")]
    Pgm(String),
    #[error("bad point list, line {line}: {message}")]
    PointList { line: usize, message: String },
    #[error("exact solve ended with status {0:?}")]
    NoTour(SolveStatus),
    #[error(transparent)]
    Puzzle(#[from] PuzzleError),
}

/// SplitMix64: `state += 0x9E3779B97F4A7C15`, then the output is mixed with
/// `z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9`,
/// `z = (z ^ (z >> 27)) * 0x94D049BB133111EB`, `z ^ (z >> 31)`
/// (wrapping arithmetic). Fixed constants make sampled art reproducible
/// across platforms and implementations.
#[derive(Debug, Clone)]
pub struct SplitMix64 {
    state: u64,
}

impl SplitMix64 {
    pub fn new(seed: u64) -> Self {
        SplitMix64 { state: seed }
    }

    pub fn next_u64(&mut self) -> u64 {
        self.state = self.state.wrapping_add(0x9E37_79B9_7F4A_7C15);
        let mut z = self.state;
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
        z ^ (z >> 31)
    }

    /// Uniform in `[0, 1)` from the top 53 bits.
    pub fn next_f64(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Integer in `0..n` by multiply-shift (`(x · n) >> 64`).
    pub fn below(&mut self, n: u64) -> u64 {
        ((self.next_u64() as u128 * n as u128) >> 64) as u64
    }
}

/// 8-bit grayscale raster, row-major, 0 black and 255 white.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GrayImage {
    pub width: usize,
    pub height: usize,
    pub pixels: Vec<u8>,
}

impl GrayImage {
    pub fn filled(width: usize, height: usize, gray: u8) -> Self {
        GrayImage { width, height, pixels: vec![gray; width * height] }
    }

    pub fn get(&self, x: usize, y: usize) -> u8 {
        self.pixels[y * self.width + x]
    }

    pub fn set(&mut self, x: usize, y: usize, gray: u8) {
        self.pixels[y * self.width + x] = gray;
    }

    /// Reads binary (`P5`) or plain (`P2`) PGM with maxval up to 255;
    /// smaller maxvals are rescaled to 0..=255.
    pub fn from_pgm(bytes: &[u8]) -> Result<Self, ArtError> {
        let err = |m: &str| ArtError::Pgm(m.to_string());
        let mut pos = 0;
        let mut header = Vec::with_capacity(4);
        while header.len() < 4 {
            while pos < bytes.len() && (bytes[pos].is_ascii_whitespace() || bytes[pos] == b'#') {
                if bytes[pos] == b'#' {
                    while pos < bytes.len() && bytes[pos] != b'\n' {
                        pos += 1;
                    }
                } else {
                    pos += 1;
                }
            }
            let start = pos;
            while pos < bytes.len() && !bytes[pos].is_ascii_whitespace() && bytes[pos] != b'#' {
                pos += 1;
            }
            if start == pos {
                return Err(err("truncated header"));
            }
            header.push(std::str::from_utf8(&bytes[start..pos]).map_err(|_| err("header is not ASCII"))?);
        }
        let binary = match header[0] {
            "P5" => true,
            "P2" => false,
            other => return Err(ArtError::Pgm(format!("unsupported magic `{other}`"))),
        };
        let num = |s: &str| s.parse::<usize>().map_err(|_| ArtError::Pgm(format!("bad header number `{s}`")));
        let (width, height, maxval) = (num(header[1])?, num(header[2])?, num(header[3])?);
        if maxval == 0 || maxval > 255 {
            return Err(ArtError::Pgm(format!("maxval {maxval} not in 1..=255")));
        }
        let count = width.checked_mul(height).ok_or_else(|| err("image too large"))?;
        let raw: Vec<usize> = if binary {
            // Exactly one whitespace byte separates the header from the data.
            let data = bytes.get(pos + 1..pos + 1 + count).ok_or_else(|| err("truncated pixel data"))?;
            data.iter().map(|&b| b as usize).collect()
        } else {
            let text = std::str::from_utf8(&bytes[pos..]).map_err(|_| err("pixel data is not ASCII"))?;
            let values = text
                .lines()
                .flat_map(|l| l.split('#').next().unwrap_or("").split_whitespace())
                .map(num)
                .collect::<Result<Vec<_>, _>>()?;
            if values.len() < count {
                return Err(err("truncated pixel data"));
            }
            values[..count].to_vec()
        };
        if raw.iter().any(|&v| v > maxval) {
            return Err(err("pixel value exceeds maxval"));
        }
        let pixels = raw.into_iter().map(|v| ((v * 255 + maxval / 2) / maxval) as u8).collect();
        Ok(GrayImage { width, height, pixels })
    }

    /// Binary PGM encoding.
    pub fn to_pgm(&self) -> Vec<u8> {
        let mut out = format!("P5\n{} {}\n255\n", self.width, self.height).into_bytes();
        out.extend_from_slice(&self.pixels);
        out
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PointSet {
    pub points: Vec<(f64, f64)>,
    pub seed: u64,
}

/// Rejection sampling: a uniformly drawn pixel `(u, v)` is kept with
/// probability `1 − gray/255`; repeated pixels are rejected. Gives up after
/// `10_000 · count` draws.
pub fn sample_points(image: &GrayImage, count: usize, seed: u64) -> Result<PointSet, ArtError> {
    if image.width == 0 || image.height == 0 {
        return Err(ArtError::EmptyImage);
    }
    if count == 0 {
        return Err(ArtError::InvalidCount);
    }
    let mut rng = SplitMix64::new(seed);
    let budget = 10_000u64.saturating_mul(count as u64);
    let mut seen = HashSet::with_capacity(count);
    let mut points = Vec::with_capacity(count);
    let mut attempts = 0;
    while points.len() < count {
        if attempts == budget {
            return Err(if points.is_empty() {
                ArtError::AllWhiteImage { attempts }
            } else {
                ArtError::BudgetExhausted { accepted: points.len(), requested: count }
            });
        }
        attempts += 1;
        let u = rng.below(image.width as u64) as usize;
        let v = rng.below(image.height as u64) as usize;
        let darkness = 1.0 - image.get(u, v) as f64 / 255.0;
        if rng.next_f64() < darkness && seen.insert((u, v)) {
            points.push((u as f64, v as f64));
        }
    }
    Ok(PointSet { points, seed })
}

/// Reads `x y` lines (blank lines and `#` comments skipped).
pub fn parse_points(text: &str) -> Result<Vec<(f64, f64)>, ArtError> {
    let mut out = Vec::new();
    for (k, line) in text.lines().enumerate() {
        let line = line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let bad = |message: String| ArtError::PointList { line: k + 1, message };
        let t: Vec<&str> = line.split_whitespace().collect();
        if t.len() != 2 {
            return Err(bad(format!("expected `x y`, found `{line}`")));
        }
        let x: f64 = t[0].parse().map_err(|_| bad(format!("bad number `{}`", t[0])))?;
        let y: f64 = t[1].parse().map_err(|_| bad(format!("bad number `{}`", t[1])))?;
        if !x.is_finite() || !y.is_finite() {
            return Err(bad("coordinates must be finite".into()));
        }
        out.push((x, y));
    }
    Ok(out)
}

pub fn write_points(points: &[(f64, f64)]) -> String {
    points.iter().map(|(x, y)| format!("{x} {y}\n")).collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct Tour {
    pub order: Vec<usize>,
    pub length: f64,
}

fn dist(a: (f64, f64), b: (f64, f64)) -> f64 {
    (a.0 - b.0).hypot(a.1 - b.1)
}

/// Closed Euclidean length of `order`.
pub fn tour_length(points: &[(f64, f64)], order: &[usize]) -> f64 {
    (0..order.len()).map(|k| dist(points[order[k]], points[order[(k + 1) % order.len()]])).sum()
}

impl Tour {
    pub fn new(points: &[(f64, f64)], order: Vec<usize>) -> Self {
        let length = tour_length(points, &order);
        Tour { order, length }
    }

    /// `order` is a permutation of the point indices.
    pub fn is_permutation_of(&self, n: usize) -> bool {
        let mut seen = vec![false; n];
        self.order.len() == n && self.order.iter().all(|&i| i < n && !std::mem::replace(&mut seen[i], true))
    }
}

/// Nearest-neighbour tour starting at point 0; ties go to the lower index.
pub fn nearest_neighbor_tour(points: &[(f64, f64)]) -> Result<Tour, ArtError> {
    let n = points.len();
    if n < 3 {
        return Err(ArtError::TooFewPoints(n));
    }
    let mut visited = vec![false; n];
    let mut order = Vec::with_capacity(n);
    let mut at = 0;
    visited[0] = true;
    order.push(0);
    for _ in 1..n {
        let next = (0..n)
            .filter(|&j| !visited[j])
            .min_by(|&a, &b| dist(points[at], points[a]).total_cmp(&dist(points[at], points[b])))
            .expect("unvisited point remains");
        visited[next] = true;
        order.push(next);
        at = next;
    }
    Ok(Tour::new(points, order))
}

/// Limits for the 2-opt phase; `None` means unlimited.
#[derive(Debug, Clone, Copy, Default)]
pub struct TwoOptBudget {
    pub max_moves: Option<usize>,
    pub time: Option<Duration>,
}

/// Smallest length decrease accepted as an improving move.
pub const TWO_OPT_MIN_GAIN: f64 = 1e-12;

/// Nearest neighbour followed by first-improvement 2-opt until no move
/// shortens the tour or the budget runs out.
pub fn heuristic_tour(points: &[(f64, f64)], budget: TwoOptBudget) -> Result<Tour, ArtError> {
    let mut tour = nearest_neighbor_tour(points)?;
    two_opt(points, &mut tour.order, budget);
    Ok(Tour::new(points, tour.order))
}

/// Returns the number of moves applied.
pub fn two_opt(points: &[(f64, f64)], order: &mut [usize], budget: TwoOptBudget) -> usize {
    let n = order.len();
    let start = Instant::now();
    let mut moves = 0;
    let out_of_budget = |moves: usize| {
        budget.max_moves.is_some_and(|m| moves >= m) || budget.time.is_some_and(|t| start.elapsed() >= t)
    };
    let mut improved = true;
    while improved && !out_of_budget(moves) {
        improved = false;
        for i in 0..n - 1 {
            for j in i + 2..n {
                // Edges (a, b) and (c, d); skip the pair sharing a node across the wrap.
                if i == 0 && j == n - 1 {
                    continue;
                }
                let (a, b) = (points[order[i]], points[order[i + 1]]);
                let (c, d) = (points[order[j]], points[order[(j + 1) % n]]);
                let delta = dist(a, c) + dist(b, d) - dist(a, b) - dist(c, d);
                if delta < -TWO_OPT_MIN_GAIN {
                    order[i + 1..=j].reverse();
                    moves += 1;
                    improved = true;
                    if out_of_budget(moves) {
                        return moves;
                    }
                }
            }
        }
    }
    moves
}

/// Provably optimal tour through the TSP model, for `3 ≤ n ≤ cap`.
pub fn exact_tour(points: &[(f64, f64)], cap: usize) -> Result<Tour, ArtError> {
    let n = points.len();
    if n < 3 {
        return Err(ArtError::TooFewPoints(n));
    }
    if n > cap {
        return Err(ArtError::TooLarge { n, cap });
    }
    let graph = WeightedGraph::from_points(points)?;
    let model = build_tsp(&graph)?;
    let mut handler = model.subtour_handler();
    let solution = solve(&model.model, &SolveConfig::default(), Some(&mut handler)).map_err(PuzzleError::from)?;
    if solution.status != SolveStatus::Optimal {
        return Err(ArtError::NoTour(solution.status));
    }
    Ok(Tour::new(points, model.decode_tour(&solution)))
}

#[derive(Debug, Clone, PartialEq)]
pub struct SvgStyle {
    pub stroke_width: f64,
    pub stroke: String,
}

impl Default for SvgStyle {
    fn default() -> Self {
        SvgStyle { stroke_width: 1.0, stroke: "black".into() }
    }
}

/// One closed `<path>` through the points in tour order. The viewBox is the
/// bounding box widened by 5% of its size on every side (at least one unit
/// for degenerate boxes).
pub fn render_svg(points: &[(f64, f64)], tour: &Tour, style: &SvgStyle) -> String {
    let (mut x0, mut y0, mut x1, mut y1) = (f64::INFINITY, f64::INFINITY, f64::NEG_INFINITY, f64::NEG_INFINITY);
    for &(x, y) in points {
        x0 = x0.min(x);
        y0 = y0.min(y);
        x1 = x1.max(x);
        y1 = y1.max(y);
    }
    if points.is_empty() {
        (x0, y0, x1, y1) = (0.0, 0.0, 0.0, 0.0);
    }
    let mx = if x1 > x0 { 0.05 * (x1 - x0) } else { 1.0 };
    let my = if y1 > y0 { 0.05 * (y1 - y0) } else { 1.0 };
    let (vx, vy, vw, vh) = (x0 - mx, y0 - my, x1 - x0 + 2.0 * mx, y1 - y0 + 2.0 * my);

    let mut d = String::new();
    for (k, &i) in tour.order.iter().enumerate() {
        let (x, y) = points[i];
        let _ = write!(d, "{}{} {}", if k == 0 { "M" } else { " L" }, x, y);
    }
    d.push_str(" Z");
    let stroke = escape_attr(&style.stroke);
    format!(
        "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n\
         <svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" viewBox=\"{vx} {vy} {vw} {vh}\">\n\
         <path d=\"{d}\" fill=\"none\" stroke=\"{stroke}\" stroke-width=\"{}\" stroke-linejoin=\"round\"/>\n\
         </svg>\n",
        style.stroke_width
    )
}

fn escape_attr(s: &str) -> String {
    s.replace('&', "&amp;").replace('"', "&quot;").replace('<', "&lt;").replace('>', "&gt;")
}
