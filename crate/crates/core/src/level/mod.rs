//! Level representation, text codec, one-hot encoding and the training
//! dataset pipeline.

mod augment;
mod charmap;
mod corpus;
mod grid;
mod onehot;
mod split;
mod tile;

pub use augment::{augment, AUGMENTS_PER_LEVEL, MAX_PAD};
pub use charmap::{CharMap, Glyph};
pub use corpus::{load_corpus, CorpusLevel};
pub use grid::{Cell, Level, HEIGHT, WIDTH};
pub use onehot::{decode_onehot, decode_onehot_at, encode_onehot, OneHotGrid, CENTER_PAD, PADDED_WIDTH};
pub use split::{default_split, load_split, DatasetSplit, Theme, LEVELS_PER_THEME};
pub use tile::TileKind;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum LevelError {
    #[error("level text is empty")]
    Empty,
    #[error("expected {expected} lines, found {found}")]
    LineCount { expected: usize, found: usize },
    #[error("line {line}: expected {expected} columns, found {found}")]
    LineWidth { line: usize, expected: usize, found: usize },
    #[error("left padding {0} outside 0..={MAX_PAD}")]
    Pad(usize),
    #[error("grid has shape {height}x{width}, expected {expected_height}x{expected_width}")]
    GridShape {
        height: usize,
        width: usize,
        expected_height: usize,
        expected_width: usize,
    },
    #[error("spawn {0} is outside the level or on a solid tile")]
    Spawn(Cell),
    #[error("invalid character map: {0}")]
    CharMap(String),
    #[error("invalid split: {0}")]
    Split(String),
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}: {message}")]
    Parse { path: String, message: String },
}
