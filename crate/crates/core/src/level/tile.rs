use serde::{Deserialize, Serialize};
use std::fmt;

/// The seven tile kinds. The discriminant is the one-hot channel index and
/// also the tie-break priority (lower wins).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
#[repr(u8)]
pub enum TileKind {
    Solid = 0,
    Breakable = 1,
    Ladder = 2,
    Rope = 3,
    Gold = 4,
    Enemy = 5,
    Empty = 6,
}

impl TileKind {
    pub const COUNT: usize = 7;
    pub const ALL: [TileKind; 7] = [
        TileKind::Solid,
        TileKind::Breakable,
        TileKind::Ladder,
        TileKind::Rope,
        TileKind::Gold,
        TileKind::Enemy,
        TileKind::Empty,
    ];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn from_index(i: usize) -> Option<Self> {
        Self::ALL.get(i).copied()
    }

    /// Canonical VGLC Lode Runner character.
    pub fn glyph(self) -> char {
        match self {
            TileKind::Solid => 'B',
            TileKind::Breakable => 'b',
            TileKind::Ladder => '#',
            TileKind::Rope => '-',
            TileKind::Gold => 'G',
            TileKind::Enemy => 'E',
            TileKind::Empty => '.',
        }
    }

    pub fn from_glyph(c: char) -> Option<Self> {
        Self::ALL.into_iter().find(|t| t.glyph() == c)
    }

    /// Blocks the player: solid ground and diggable brick.
    pub fn is_blocking(self) -> bool {
        matches!(self, TileKind::Solid | TileKind::Breakable)
    }

    pub fn name(self) -> &'static str {
        match self {
            TileKind::Solid => "solid",
            TileKind::Breakable => "breakable",
            TileKind::Ladder => "ladder",
            TileKind::Rope => "rope",
            TileKind::Gold => "gold",
            TileKind::Enemy => "enemy",
            TileKind::Empty => "empty",
        }
    }
}

impl fmt::Display for TileKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn index_is_bijective() {
        for (i, t) in TileKind::ALL.iter().enumerate() {
            assert_eq!(t.index(), i);
            assert_eq!(TileKind::from_index(i), Some(*t));
            assert_eq!(TileKind::from_glyph(t.glyph()), Some(*t));
        }
        assert_eq!(TileKind::from_index(7), None);
    }
}
