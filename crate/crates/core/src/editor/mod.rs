//! Mixed-initiative editing: tiles only enter a level by copying them from a
//! suggestion (brush), by the capped majority wand, or by erasing to empty.

mod event;
mod originality;
mod session;
mod share;
mod tools;

pub use event::{now_millis, EditAction, EditEvent};
pub use originality::{hamming_percentage, originality_score, Reconstructor, RED_THRESHOLD};
pub use session::{derive_seed, Budgets, Session, MAX_REFRESHES, MAX_WAND_TILES, UNDO_LIMIT};
pub use share::{decode_bytes, decode_share_token, encode_bytes, encode_share_token, ShareError, TOKEN_VERSION};
pub use tools::{footprint, majority_tile, Anchor, BrushSize, BrushStroke};

use crate::level::{Cell, LevelError};
use crate::suggest::SuggestError;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum EditError {
    #[error("suggestion id {0} does not exist (expected 0..=5)")]
    UnknownSuggestion(u8),
    #[error("brush size {0} is not one of 1, 2, 3, 5")]
    BrushSize(u8),
    #[error("footprint of size {size} at {anchor} lies entirely outside the level")]
    EmptyFootprint { size: u8, anchor: Anchor },
    #[error("cell {0} is outside the level")]
    OutOfBounds(Cell),
    #[error("wand budget exhausted ({0} tiles used)")]
    WandBudget(u32),
    #[error("refresh budget exhausted ({0} refreshes used)")]
    RefreshBudget(u32),
    #[error("spawn cannot be placed on {tile} at {cell}")]
    SpawnPlacement { cell: Cell, tile: crate::level::TileKind },
    #[error("event `{0}` cannot be recorded by a client")]
    NotClientEvent(&'static str),
    #[error("nothing to {0}")]
    EmptyHistory(&'static str),
    #[error("replay failed at event {index}: {message}")]
    Replay { index: usize, message: String },
    #[error(transparent)]
    Suggest(#[from] SuggestError),
    #[error(transparent)]
    Level(#[from] LevelError),
}

impl EditError {
    /// Budget errors are conflicts with the session's state rather than
    /// malformed requests.
    pub fn is_budget(&self) -> bool {
        matches!(self, EditError::WandBudget(_) | EditError::RefreshBudget(_))
    }
}
