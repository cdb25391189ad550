//! One-dimensional maximization over a closed interval.
//!
//! Every continuous argmax in the crate (optimal prices, exploration prices,
//! myopic Bayesian prices) goes through [`maximize`]: a dense grid scan picks
//! the best cell, then golden-section search polishes inside the cell's
//! neighbours. The grid makes the search robust on objectives that are not
//! unimodal (logistic revenue curves, for instance); the refinement recovers
//! the precision the grid lacks.

use serde::{Deserialize, Serialize};

pub const DEFAULT_GRID_POINTS: usize = 4001;
pub const DEFAULT_TOLERANCE: f64 = 1e-10;

/// Relative margin a candidate must beat the incumbent by to replace it.
///
/// Values closer than this are treated as ties and the lower argument wins.
/// Objectives that are mathematically tied at two prices (mirror-symmetric
/// demand pairs) would otherwise be decided by last-bit rounding.
pub const TIE_TOLERANCE: f64 = 1e-12;

const INV_PHI: f64 = 0.618_033_988_749_894_8;
const MAX_GOLDEN_ITERS: usize = 200;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridConfig {
    /// Number of evenly spaced nodes, endpoints included.
    pub points: usize,
    /// Width at which golden-section refinement stops.
    pub tolerance: f64,
}

impl Default for GridConfig {
    fn default() -> Self {
        GridConfig {
            points: DEFAULT_GRID_POINTS,
            tolerance: DEFAULT_TOLERANCE,
        }
    }
}

impl GridConfig {
    pub fn with_points(points: usize) -> Self {
        GridConfig {
            points,
            ..Default::default()
        }
    }

    /// The `i`-th node of the grid over `[lo, hi]`. The last node is `hi` exactly.
    pub fn node(&self, lo: f64, hi: f64, i: usize) -> f64 {
        let last = self.points - 1;
        if i >= last {
            hi
        } else {
            lo + (hi - lo) * (i as f64) / (last as f64)
        }
    }

    pub fn nodes(&self, lo: f64, hi: f64) -> impl Iterator<Item = f64> + '_ {
        (0..self.points).map(move |i| self.node(lo, hi, i))
    }
}

/// True when `candidate` beats `incumbent` by more than the tie margin.
pub fn improves(candidate: f64, incumbent: f64) -> bool {
    candidate > incumbent + TIE_TOLERANCE * incumbent.abs().max(1.0)
}

/// Index and value of the largest element, first index on ties.
///
/// `None` entries are skipped; returns `None` if nothing is admissible.
pub fn argmax_first<I>(values: I) -> Option<(usize, f64)>
where
    I: IntoIterator<Item = Option<f64>>,
{
    let mut best: Option<(usize, f64)> = None;
    for (i, v) in values.into_iter().enumerate() {
        let Some(v) = v else { continue };
        match best {
            Some((_, b)) if !improves(v, b) => {}
            _ => best = Some((i, v)),
        }
    }
    best
}

/// Golden-section search for a maximum of `f` on `[lo, hi]`.
///
/// Assumes `f` is unimodal on the bracket; returns `(x, f(x))` at the centre of
/// the final bracket, which is narrower than `tol`.
pub fn golden_section_max<F>(f: F, lo: f64, hi: f64, tol: f64) -> (f64, f64)
where
    F: Fn(f64) -> f64,
{
    let (mut a, mut b) = (lo, hi);
    let mut c = b - INV_PHI * (b - a);
    let mut d = a + INV_PHI * (b - a);
    let mut fc = f(c);
    let mut fd = f(d);
    let mut iters = 0;
    while (b - a) > tol && iters < MAX_GOLDEN_ITERS {
        if fc >= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - INV_PHI * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + INV_PHI * (b - a);
            fd = f(d);
        }
        iters += 1;
    }
    let x = 0.5 * (a + b);
    (x, f(x))
}

/// Maximize `f` over `[lo, hi]` by grid scan plus golden-section refinement.
///
/// The refined point replaces the best grid node only if it is strictly
/// better (beyond [`TIE_TOLERANCE`]), so flat objectives return `lo`.
pub fn maximize<F>(f: F, lo: f64, hi: f64, grid: &GridConfig) -> (f64, f64)
where
    F: Fn(f64) -> f64,
{
    debug_assert!(grid.points >= 3);
    let (best_i, best_v) = argmax_first(grid.nodes(lo, hi).map(|x| Some(f(x))))
        .expect("grid has at least one node");
    let bracket_lo = grid.node(lo, hi, best_i.saturating_sub(1));
    let bracket_hi = grid.node(lo, hi, (best_i + 1).min(grid.points - 1));
    refine(&f, grid.node(lo, hi, best_i), best_v, bracket_lo, bracket_hi, grid.tolerance)
}

/// Polish a grid winner `(x0, v0)` inside `[bracket_lo, bracket_hi]`.
pub(crate) fn refine<F>(
    f: F,
    x0: f64,
    v0: f64,
    bracket_lo: f64,
    bracket_hi: f64,
    tol: f64,
) -> (f64, f64)
where
    F: Fn(f64) -> f64,
{
    if bracket_hi <= bracket_lo {
        return (x0, v0);
    }
    let (x, v) = golden_section_max(&f, bracket_lo, bracket_hi, tol);
    if improves(v, v0) {
        (x, v)
    } else {
        (x0, v0)
    }
}
