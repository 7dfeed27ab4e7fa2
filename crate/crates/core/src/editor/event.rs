use super::session::Budgets;
use super::tools::{Anchor, BrushSize};
use crate::level::{Cell, Level, TileKind};
use serde::{Deserialize, Serialize};
use std::time::{SystemTime, UNIX_EPOCH};

pub fn now_millis() -> u64 {
    SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map(|d| d.as_millis() as u64)
        .unwrap_or(0)
}

/// One logged interaction. Serialized flat: `{"at": .., "kind": "wand", ..}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EditEvent {
    pub at: u64,
    #[serde(flatten)]
    pub action: EditAction,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum EditAction {
    /// Session created with its initial suggestion grid.
    Start {
        seed: u64,
        generation: u32,
        suggestions: Vec<Level>,
        #[serde(default)]
        budgets: Budgets,
    },
    BrushApply {
        suggestion_id: u8,
        size: BrushSize,
        anchor: Anchor,
        changed: u32,
    },
    Erase {
        size: BrushSize,
        anchor: Anchor,
        changed: u32,
    },
    Wand {
        cell: Cell,
        tile: TileKind,
        changed: u32,
    },
    PlaceSpawn {
        cell: Cell,
    },
    Refresh {
        seed: u64,
        generation: u32,
        suggestions: Vec<Level>,
    },
    Undo,
    Redo,
    ClearAll {
        seed: u64,
        generation: u32,
        suggestions: Vec<Level>,
    },
    Play,
    Win {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        token: Option<String>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        originality: Option<f64>,
    },
    Share {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        token: Option<String>,
    },
    SelectSuggestion {
        suggestion_id: u8,
    },
}

impl EditAction {
    pub fn name(&self) -> &'static str {
        match self {
            EditAction::Start { .. } => "start",
            EditAction::BrushApply { .. } => "brush_apply",
            EditAction::Erase { .. } => "erase",
            EditAction::Wand { .. } => "wand",
            EditAction::PlaceSpawn { .. } => "place_spawn",
            EditAction::Refresh { .. } => "refresh",
            EditAction::Undo => "undo",
            EditAction::Redo => "redo",
            EditAction::ClearAll { .. } => "clear_all",
            EditAction::Play => "play",
            EditAction::Win { .. } => "win",
            EditAction::Share { .. } => "share",
            EditAction::SelectSuggestion { .. } => "select_suggestion",
        }
    }

    /// Events a client reports directly; they never change the level.
    pub fn is_client_event(&self) -> bool {
        matches!(
            self,
            EditAction::Play | EditAction::Win { .. } | EditAction::Share { .. } | EditAction::SelectSuggestion { .. }
        )
    }
}
