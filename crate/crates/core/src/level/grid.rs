use super::{LevelError, TileKind};
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use std::fmt;

pub const WIDTH: usize = 32;
pub const HEIGHT: usize = 22;

/// A grid coordinate, column first.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Cell {
    pub col: usize,
    pub row: usize,
}

impl Cell {
    pub const fn new(col: usize, row: usize) -> Self {
        Self { col, row }
    }
}

impl fmt::Display for Cell {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {})", self.col, self.row)
    }
}

/// A tile grid plus an optional player spawn. Editor levels are always
/// 32 wide and 22 tall; other sizes exist for tests and toy models.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Level {
    width: usize,
    height: usize,
    tiles: Vec<TileKind>,
    spawn: Option<Cell>,
}

impl Level {
    /// An all-Empty 32×22 level.
    pub fn empty() -> Self {
        Self::filled(WIDTH, HEIGHT, TileKind::Empty)
    }

    pub fn filled(width: usize, height: usize, tile: TileKind) -> Self {
        Self {
            width,
            height,
            tiles: vec![tile; width * height],
            spawn: None,
        }
    }

    pub fn from_tiles(width: usize, height: usize, tiles: Vec<TileKind>) -> Result<Self, LevelError> {
        if tiles.len() != width * height {
            return Err(LevelError::GridShape {
                height: tiles.len() / width.max(1),
                width,
                expected_height: height,
                expected_width: width,
            });
        }
        Ok(Self {
            width,
            height,
            tiles,
            spawn: None,
        })
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn area(&self) -> usize {
        self.tiles.len()
    }

    pub fn is_standard(&self) -> bool {
        self.width == WIDTH && self.height == HEIGHT
    }

    pub fn tiles(&self) -> &[TileKind] {
        &self.tiles
    }

    pub fn in_bounds(&self, col: i64, row: i64) -> bool {
        col >= 0 && row >= 0 && (col as usize) < self.width && (row as usize) < self.height
    }

    pub fn get(&self, cell: Cell) -> TileKind {
        self.tiles[cell.row * self.width + cell.col]
    }

    /// Tile at signed coordinates, `None` when out of bounds.
    pub fn get_signed(&self, col: i64, row: i64) -> Option<TileKind> {
        self.in_bounds(col, row)
            .then(|| self.tiles[row as usize * self.width + col as usize])
    }

    /// Sets a tile. A spawn on a cell that becomes blocking is removed.
    pub fn set(&mut self, cell: Cell, tile: TileKind) {
        self.tiles[cell.row * self.width + cell.col] = tile;
        if tile.is_blocking() && self.spawn == Some(cell) {
            self.spawn = None;
        }
    }

    pub fn spawn(&self) -> Option<Cell> {
        self.spawn
    }

    pub fn set_spawn(&mut self, spawn: Option<Cell>) -> Result<(), LevelError> {
        if let Some(c) = spawn {
            if c.col >= self.width || c.row >= self.height || self.get(c).is_blocking() {
                return Err(LevelError::Spawn(c));
            }
        }
        self.spawn = spawn;
        Ok(())
    }

    pub fn cells(&self) -> impl Iterator<Item = Cell> + '_ {
        (0..self.height).flat_map(move |r| (0..self.width).map(move |c| Cell::new(c, r)))
    }

    pub fn count(&self, tile: TileKind) -> usize {
        self.tiles.iter().filter(|t| **t == tile).count()
    }

    /// Left–right mirror image.
    pub fn mirrored(&self) -> Self {
        let mut tiles = Vec::with_capacity(self.tiles.len());
        for row in self.tiles.chunks(self.width) {
            tiles.extend(row.iter().rev());
        }
        Self {
            width: self.width,
            height: self.height,
            tiles,
            spawn: self.spawn.map(|c| Cell::new(self.width - 1 - c.col, c.row)),
        }
    }

    /// Same tiles, no spawn.
    pub fn without_spawn(&self) -> Self {
        Self {
            spawn: None,
            ..self.clone()
        }
    }

    /// Number of cells whose tiles differ. Spawns are ignored.
    pub fn hamming(&self, other: &Level) -> usize {
        assert_eq!(
            (self.width, self.height),
            (other.width, other.height),
            "hamming distance needs equal shapes"
        );
        self.tiles.iter().zip(&other.tiles).filter(|(a, b)| a != b).count()
    }

    /// Rows rendered with canonical glyphs; the spawn shows as `M`.
    pub fn rows(&self) -> Vec<String> {
        self.tiles
            .chunks(self.width)
            .enumerate()
            .map(|(r, row)| {
                row.iter()
                    .enumerate()
                    .map(|(c, t)| {
                        if self.spawn == Some(Cell::new(c, r)) {
                            'M'
                        } else {
                            t.glyph()
                        }
                    })
                    .collect()
            })
            .collect()
    }

    /// Inverse of [`Level::rows`] over canonical glyphs.
    pub fn from_rows<S: AsRef<str>>(rows: &[S]) -> Result<Self, LevelError> {
        let height = rows.len();
        if height == 0 {
            return Err(LevelError::Empty);
        }
        let width = rows[0].as_ref().chars().count();
        let mut tiles = Vec::with_capacity(width * height);
        let mut spawn = None;
        for (r, line) in rows.iter().enumerate() {
            let line = line.as_ref();
            let n = line.chars().count();
            if n != width {
                return Err(LevelError::LineWidth {
                    line: r + 1,
                    expected: width,
                    found: n,
                });
            }
            for (c, ch) in line.chars().enumerate() {
                if ch == 'M' {
                    spawn = Some(Cell::new(c, r));
                    tiles.push(TileKind::Empty);
                } else {
                    tiles.push(TileKind::from_glyph(ch).ok_or_else(|| LevelError::Parse {
                        path: "<rows>".into(),
                        message: format!("line {}, column {}: unknown glyph {ch:?}", r + 1, c + 1),
                    })?);
                }
            }
        }
        let mut level = Level::from_tiles(width, height, tiles)?;
        level.set_spawn(spawn)?;
        Ok(level)
    }
}

impl Default for Level {
    fn default() -> Self {
        Self::empty()
    }
}

impl fmt::Debug for Level {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "Level {}x{} spawn={:?}", self.width, self.height, self.spawn)?;
        for row in self.rows() {
            writeln!(f, "{row}")?;
        }
        Ok(())
    }
}

impl fmt::Display for Level {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for row in self.rows() {
            writeln!(f, "{row}")?;
        }
        Ok(())
    }
}

impl Serialize for Level {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        self.rows().serialize(s)
    }
}

impl<'de> Deserialize<'de> for Level {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let rows = Vec::<String>::deserialize(d)?;
        Level::from_rows(&rows).map_err(serde::de::Error::custom)
    }
}
