//! Static reachability check: can the runner collect every gold nugget by
//! walking, climbing, hanging on ropes and falling? Digging and enemies are
//! not modelled, so levels that need a dug hole may be reported unplayable.

use crate::level::{Cell, Level, TileKind};
use crate::par;
use serde::{Deserialize, Serialize};
use std::collections::VecDeque;

pub const APPROXIMATION: &str = "no-dig";

/// Directed movement graph over the cells the runner can occupy.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MoveGraph {
    width: usize,
    height: usize,
    /// Adjacency by cell index; empty for blocking cells.
    edges: Vec<Vec<usize>>,
    open: Vec<bool>,
}

fn open_at(level: &Level, col: i64, row: i64) -> bool {
    level.get_signed(col, row).is_some_and(|t| !t.is_blocking())
}

/// Standing on `(col, row)` does not fall: the cell holds a ladder or rope,
/// or the cell below is solid ground, a ladder, or the bottom edge.
pub fn is_supported(level: &Level, cell: Cell) -> bool {
    let here = level.get(cell);
    if matches!(here, TileKind::Ladder | TileKind::Rope) {
        return true;
    }
    match level.get_signed(cell.col as i64, cell.row as i64 + 1) {
        None => true,
        Some(below) => matches!(below, TileKind::Solid | TileKind::Breakable | TileKind::Ladder),
    }
}

impl MoveGraph {
    pub fn build(level: &Level) -> Self {
        let (w, h) = (level.width(), level.height());
        let mut edges = vec![Vec::new(); w * h];
        let mut open = vec![false; w * h];
        for cell in level.cells() {
            let idx = cell.row * w + cell.col;
            let tile = level.get(cell);
            if tile.is_blocking() {
                continue;
            }
            open[idx] = true;
            let (c, r) = (cell.col as i64, cell.row as i64);
            let out = &mut edges[idx];
            let below_open = open_at(level, c, r + 1);
            if !is_supported(level, cell) {
                if below_open {
                    out.push(idx + w);
                }
                continue;
            }
            for dc in [-1i64, 1] {
                if open_at(level, c + dc, r) {
                    out.push((c + dc) as usize + cell.row * w);
                }
            }
            if tile == TileKind::Ladder && open_at(level, c, r - 1) {
                out.push(idx - w);
            }
            let below_ladder = level.get_signed(c, r + 1) == Some(TileKind::Ladder);
            if below_open && (tile == TileKind::Ladder || tile == TileKind::Rope || below_ladder) {
                out.push(idx + w);
            }
        }
        Self {
            width: w,
            height: h,
            edges,
            open,
        }
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn is_node(&self, cell: Cell) -> bool {
        self.open[cell.row * self.width + cell.col]
    }

    pub fn neighbors(&self, cell: Cell) -> impl Iterator<Item = Cell> + '_ {
        let w = self.width;
        self.edges[cell.row * w + cell.col]
            .iter()
            .map(move |&i| Cell::new(i % w, i / w))
    }

    /// All directed edges in row-major source order.
    pub fn edges(&self) -> Vec<(Cell, Cell)> {
        let w = self.width;
        let mut out = Vec::new();
        for (i, targets) in self.edges.iter().enumerate() {
            for &j in targets {
                out.push((Cell::new(i % w, i / w), Cell::new(j % w, j / w)));
            }
        }
        out
    }

    /// Reachability mask (row-major) from `start` by breadth-first search.
    pub fn reachable_from(&self, start: Cell) -> Vec<bool> {
        let w = self.width;
        let mut seen = vec![false; self.open.len()];
        let s = start.row * w + start.col;
        if !self.open[s] {
            return seen;
        }
        seen[s] = true;
        let mut queue = VecDeque::from([s]);
        while let Some(i) = queue.pop_front() {
            for &j in &self.edges[i] {
                if !seen[j] {
                    seen[j] = true;
                    queue.push_back(j);
                }
            }
        }
        seen
    }
}

/// Reachability mask from the level's spawn; all false without one.
pub fn reachable_cells(level: &Level) -> Vec<bool> {
    match level.spawn() {
        Some(spawn) => MoveGraph::build(level).reachable_from(spawn),
        None => vec![false; level.area()],
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PlayabilityReport {
    pub playable: bool,
    pub reachable_gold: usize,
    pub total_gold: usize,
    /// Gold cells that cannot be reached from the spawn.
    pub unreachable_cells: Vec<Cell>,
    pub has_spawn: bool,
    pub approximation: String,
    pub warnings: Vec<String>,
}

pub fn check_playability(level: &Level) -> PlayabilityReport {
    let reach = reachable_cells(level);
    let w = level.width();
    let mut total_gold = 0;
    let mut unreachable_cells = Vec::new();
    for cell in level.cells() {
        if level.get(cell) == TileKind::Gold {
            total_gold += 1;
            if !reach[cell.row * w + cell.col] {
                unreachable_cells.push(cell);
            }
        }
    }
    let has_spawn = level.spawn().is_some();
    let reachable_gold = total_gold - unreachable_cells.len();
    let playable = has_spawn && total_gold > 0 && reachable_gold == total_gold;
    let mut warnings = Vec::new();
    if !has_spawn {
        warnings.push("no spawn point placed".to_string());
    }
    if total_gold == 0 {
        warnings.push("level contains no gold".to_string());
    }
    if has_spawn && !unreachable_cells.is_empty() {
        warnings.push(format!(
            "{} gold unreachable without digging; levels that need a dug hole are reported unplayable",
            unreachable_cells.len()
        ));
    }
    PlayabilityReport {
        playable,
        reachable_gold,
        total_gold,
        unreachable_cells,
        has_spawn,
        approximation: APPROXIMATION.to_string(),
        warnings,
    }
}

/// Checks many levels, in parallel when enabled.
pub fn check_batch(levels: &[Level]) -> Vec<PlayabilityReport> {
    par::map(levels, check_playability)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn level(rows: &[&str]) -> Level {
        Level::from_rows(rows).unwrap()
    }

    #[test]
    fn gold_next_to_spawn_on_floor() {
        let l = level(&["....", "MG..", "BBBB"]);
        let r = check_playability(&l);
        assert!(r.playable);
        assert_eq!((r.reachable_gold, r.total_gold), (1, 1));
        assert_eq!(r.approximation, "no-dig");
    }

    #[test]
    fn sealed_gold_is_unreachable() {
        let l = level(&["..BBB", "M.BGB", "G.BBB", "BBBBB"]);
        let r = check_playability(&l);
        assert!(!r.playable);
        assert_eq!((r.reachable_gold, r.total_gold), (1, 2));
        assert_eq!(r.unreachable_cells, vec![Cell::new(3, 1)]);
    }

    #[test]
    fn no_gold_or_spawn_is_unplayable() {
        let r = check_playability(&level(&["M...", "BBBB"]));
        assert!(!r.playable && r.has_spawn && r.total_gold == 0);
        let r = check_playability(&level(&["G...", "BBBB"]));
        assert!(!r.playable && !r.has_spawn);
        assert_eq!(r.reachable_gold, 0);
    }

    #[test]
    fn open_column_only_falls() {
        let l = level(&[".", ".", ".", "B"]);
        let g = MoveGraph::build(&l);
        let e = g.edges();
        assert_eq!(
            e,
            vec![(Cell::new(0, 0), Cell::new(0, 1)), (Cell::new(0, 1), Cell::new(0, 2))]
        );
    }

    #[test]
    fn floor_cells_are_laterally_connected() {
        let l = level(&["....", "BBBB"]);
        let g = MoveGraph::build(&l);
        for c in 0..4 {
            let n: Vec<_> = g.neighbors(Cell::new(c, 0)).collect();
            assert_eq!(n.len(), if c == 0 || c == 3 { 1 } else { 2 });
        }
    }

    #[test]
    fn ladder_climbs_and_rope_drops() {
        // Climb the ladder to the top platform, walk onto the rope, drop to gold.
        let l = level(&["..#---.", "..#..G.", "M.#BBBB", "BBBBBBB"]);
        // gold at (5,1) sits on breakable row 2: reachable by walking off the rope.
        let r = check_playability(&l);
        assert!(r.playable, "{r:?}");
        // Without the ladder the upper level is unreachable.
        let l = level(&["...---.", ".....G.", "M..BBBB", "BBBBBBB"]);
        assert!(!check_playability(&l).playable);
    }

    #[test]
    fn gold_collected_while_falling() {
        let l = level(&["M.", "B.", "BG", "B.", "BB"]);
        assert!(check_playability(&l).playable);
    }
}
