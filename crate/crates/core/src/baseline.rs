//! Arbitrary-division coverage baseline.
//!
//! The grid is tiled into rectangular blocks in row-major order and each
//! flight sweeps one block with a serpentine, cycling through the blocks.

use crate::error::{Error, Result};
use crate::graph::{is_feasible, GridShape, MonitorGraph, Path};

#[derive(Debug, Clone)]
pub struct PartitionSchedule {
    /// Area vertices of each block, row-major within the block.
    pub partitions: Vec<Vec<usize>>,
    /// Serpentine flight over each block, depot to depot.
    pub paths: Vec<Path>,
    /// Nominal block size `(rows, cols)`; edge blocks may be smaller.
    pub block: (usize, usize),
    pub cycle_index: usize,
}

impl PartitionSchedule {
    pub fn len(&self) -> usize {
        self.partitions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.partitions.is_empty()
    }

    /// Flight over the current block; advances to the next block.
    pub fn next_flight(&mut self) -> Path {
        let p = self.paths[self.cycle_index].clone();
        self.cycle_index = (self.cycle_index + 1) % self.paths.len();
        p
    }
}

#[derive(Debug, Clone, Copy)]
struct Rect {
    r0: usize,
    c0: usize,
    rows: usize,
    cols: usize,
}

fn tiles(shape: GridShape, br: usize, bc: usize) -> Vec<Rect> {
    let mut out = Vec::new();
    for r0 in (0..shape.rows).step_by(br) {
        for c0 in (0..shape.cols).step_by(bc) {
            out.push(Rect {
                r0,
                c0,
                rows: br.min(shape.rows - r0),
                cols: bc.min(shape.cols - c0),
            });
        }
    }
    out
}

/// Boustrophedon over a block: `by_rows` picks the sweep axis, the flags
/// pick the starting corner.
fn serpentine(shape: GridShape, t: Rect, by_rows: bool, flip_outer: bool, flip_inner: bool) -> Vec<usize> {
    let (outer, inner) = if by_rows { (t.rows, t.cols) } else { (t.cols, t.rows) };
    let mut seq = Vec::with_capacity(outer * inner);
    for a in 0..outer {
        let a = if flip_outer { outer - 1 - a } else { a };
        for b in 0..inner {
            let reverse = (seq.len() / inner % 2 == 1) != flip_inner;
            let b = if reverse { inner - 1 - b } else { b };
            let (r, c) = if by_rows { (a, b) } else { (b, a) };
            seq.push(shape.vertex(t.r0 + r, t.c0 + c));
        }
    }
    seq
}

/// Cheapest of the eight serpentines over a block, with depot legs.
fn sweep(g: &MonitorGraph, shape: GridShape, t: Rect) -> Path {
    let mut best: Option<Path> = None;
    for variant in 0..8 {
        let mut seq = vec![g.start()];
        seq.extend(serpentine(shape, t, variant & 4 == 0, variant & 2 != 0, variant & 1 != 0));
        seq.push(g.end());
        let p = Path::from_sequence(seq, g);
        if best.as_ref().is_none_or(|b| p.cost < b.cost) {
            best = Some(p);
        }
    }
    best.expect("eight variants")
}

fn grid_shape(g: &MonitorGraph) -> Result<GridShape> {
    g.grid()
        .ok_or_else(|| Error::InvalidArgument("the coverage baseline needs a grid graph".into()))
}

/// Largest sweep cost over the tiles of a `br x bc` tiling, i.e. the
/// budget that tiling needs.
pub fn block_budget(g: &MonitorGraph, br: usize, bc: usize) -> Result<f64> {
    let shape = grid_shape(g)?;
    if br == 0 || bc == 0 || br > shape.rows || bc > shape.cols {
        return Err(Error::InvalidArgument(format!(
            "block {br}x{bc} does not fit a {}x{} grid",
            shape.rows, shape.cols
        )));
    }
    Ok(tiles(shape, br, bc)
        .into_iter()
        .map(|t| sweep(g, shape, t).cost)
        .fold(0.0, f64::max))
}

/// Picks the tiling whose every sweep fits `budget`, preferring fewer
/// tiles, then aspect ratio at most 2, then squarer blocks, then blocks
/// that divide the grid exactly.
pub fn build_partitions(g: &MonitorGraph, budget: f64) -> Result<PartitionSchedule> {
    let shape = grid_shape(g)?;
    let mut best: Option<((usize, bool, usize, bool, usize), Vec<Rect>, (usize, usize))> = None;
    for br in 1..=shape.rows {
        for bc in 1..=shape.cols {
            let ts = tiles(shape, br, bc);
            if !ts.iter().all(|&t| is_feasible(&sweep(g, shape, t), g, budget)) {
                continue;
            }
            let (lo, hi) = (br.min(bc), br.max(bc));
            let key = (
                ts.len(),
                hi > 2 * lo,
                hi - lo,
                shape.rows % br != 0 || shape.cols % bc != 0,
                br,
            );
            if best.as_ref().is_none_or(|b| key < b.0) {
                best = Some((key, ts, (br, bc)));
            }
        }
    }
    let (_, ts, block) = best.ok_or(Error::NoFeasiblePath { budget })?;
    let paths: Vec<Path> = ts.iter().map(|&t| sweep(g, shape, t)).collect();
    let partitions = ts
        .iter()
        .map(|t| {
            let mut cells: Vec<usize> = (0..t.rows)
                .flat_map(|r| (0..t.cols).map(move |c| shape.vertex(t.r0 + r, t.c0 + c)))
                .collect();
            cells.sort_unstable();
            cells
        })
        .collect();
    Ok(PartitionSchedule {
        partitions,
        paths,
        block,
        cycle_index: 0,
    })
}
