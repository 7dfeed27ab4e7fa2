use super::EditError;
use crate::level::{Cell, Level, TileKind};
use serde::{Deserialize, Serialize};
use std::fmt;

/// Square brush/eraser footprint side.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "u8", into = "u8")]
pub struct BrushSize(u8);

impl BrushSize {
    pub const ALL: [BrushSize; 4] = [BrushSize(1), BrushSize(2), BrushSize(3), BrushSize(5)];

    pub fn new(size: u8) -> Result<Self, EditError> {
        match size {
            1 | 2 | 3 | 5 => Ok(Self(size)),
            other => Err(EditError::BrushSize(other)),
        }
    }

    pub fn get(self) -> u8 {
        self.0
    }
}

impl TryFrom<u8> for BrushSize {
    type Error = EditError;

    fn try_from(v: u8) -> Result<Self, EditError> {
        Self::new(v)
    }
}

impl From<BrushSize> for u8 {
    fn from(s: BrushSize) -> u8 {
        s.0
    }
}

/// Top-left corner of a footprint; may lie outside the level.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Anchor {
    pub col: i32,
    pub row: i32,
}

impl Anchor {
    pub fn new(col: i32, row: i32) -> Self {
        Self { col, row }
    }
}

impl fmt::Display for Anchor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {})", self.col, self.row)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct BrushStroke {
    pub suggestion_id: u8,
    pub size: BrushSize,
    pub anchor: Anchor,
}

/// In-bounds cells of the `size × size` square at `anchor`, row-major.
pub fn footprint(size: BrushSize, anchor: Anchor, width: usize, height: usize) -> Vec<Cell> {
    let s = size.get() as i64;
    let (c0, r0) = (anchor.col as i64, anchor.row as i64);
    let cols = c0.max(0)..(c0 + s).min(width as i64);
    let rows = r0.max(0)..(r0 + s).min(height as i64);
    rows.flat_map(|r| cols.clone().map(move |c| Cell::new(c as usize, r as usize)))
        .collect()
}

/// Most frequent tile among the 8 neighbours of `cell`; neighbours outside the
/// level count as Solid and ties go to the lower tile index.
pub fn majority_tile(level: &Level, cell: Cell) -> TileKind {
    let mut counts = [0u8; TileKind::COUNT];
    let (c, r) = (cell.col as i64, cell.row as i64);
    for dr in -1..=1 {
        for dc in -1..=1 {
            if dr == 0 && dc == 0 {
                continue;
            }
            let t = level.get_signed(c + dc, r + dr).unwrap_or(TileKind::Solid);
            counts[t.index()] += 1;
        }
    }
    let best = counts
        .iter()
        .enumerate()
        .fold(0, |best, (i, &n)| if n > counts[best] { i } else { best });
    TileKind::ALL[best]
}
