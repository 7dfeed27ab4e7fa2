//! Aggregates computed from journal records alone.

use crate::journal::JournalRecord;
use lode_core::editor::{decode_share_token, EditAction};
use lode_core::level::{Theme, TileKind, HEIGHT, WIDTH};
use lode_core::suggest::{suggestion_slot, Variance, SUGGESTION_COUNT};
use serde::{Deserialize, Serialize};
use std::collections::{BTreeMap, BTreeSet};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SuggestionCount {
    pub id: u8,
    pub theme: Theme,
    pub variance: Variance,
    /// Brush strokes copied from this suggestion.
    pub brush_applies: u64,
    /// Times the suggestion was selected in the grid.
    pub selections: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SuggestionStats {
    pub sessions: usize,
    pub suggestions: Vec<SuggestionCount>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RefreshHistogram {
    pub sessions: usize,
    /// Refreshes used → number of sessions.
    pub histogram: BTreeMap<u32, usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OriginalityEntry {
    pub session: String,
    pub at: u64,
    pub originality: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OriginalityList {
    pub scores: Vec<OriginalityEntry>,
}

/// Count grids (rows of columns) over levels that were won in play mode.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Heatmaps {
    pub levels: usize,
    pub width: usize,
    pub height: usize,
    pub tiles: BTreeMap<String, Vec<Vec<u32>>>,
    pub spawn: Vec<Vec<u32>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnalyticsSnapshot {
    pub suggestions: SuggestionStats,
    pub refreshes: RefreshHistogram,
    pub originality: OriginalityList,
    pub heatmaps: Heatmaps,
}

pub fn compute(records: &[JournalRecord]) -> AnalyticsSnapshot {
    let mut sessions = BTreeSet::new();
    let mut refreshes: BTreeMap<&str, u32> = BTreeMap::new();
    let mut applies = [0u64; SUGGESTION_COUNT];
    let mut selections = [0u64; SUGGESTION_COUNT];
    let mut scores = Vec::new();
    let zero = vec![vec![0u32; WIDTH]; HEIGHT];
    let mut tiles = vec![zero.clone(); TileKind::COUNT];
    let mut spawn = zero;
    let mut levels = 0;

    for rec in records {
        let session = rec.session.as_str();
        match &rec.event.action {
            EditAction::Start { .. } => {
                sessions.insert(session);
                refreshes.entry(session).or_default();
            }
            EditAction::Refresh { .. } => *refreshes.entry(session).or_default() += 1,
            EditAction::BrushApply { suggestion_id, .. } => {
                if let Some(n) = applies.get_mut(*suggestion_id as usize) {
                    *n += 1;
                }
            }
            EditAction::SelectSuggestion { suggestion_id } => {
                if let Some(n) = selections.get_mut(*suggestion_id as usize) {
                    *n += 1;
                }
            }
            EditAction::Win { token, originality } => {
                if let Some(o) = originality {
                    scores.push(OriginalityEntry {
                        session: rec.session.clone(),
                        at: rec.event.at,
                        originality: *o,
                    });
                }
                let Some(level) = token.as_deref().and_then(|t| decode_share_token(t).ok()) else {
                    continue;
                };
                levels += 1;
                for cell in level.cells() {
                    tiles[level.get(cell).index()][cell.row][cell.col] += 1;
                }
                if let Some(s) = level.spawn() {
                    spawn[s.row][s.col] += 1;
                }
            }
            _ => {}
        }
    }

    let mut histogram = BTreeMap::new();
    for s in &sessions {
        *histogram.entry(refreshes[s]).or_default() += 1;
    }
    let suggestions = (0..SUGGESTION_COUNT)
        .map(|i| {
            let (theme, variance) = suggestion_slot(i as u8).expect("id in range");
            SuggestionCount {
                id: i as u8,
                theme,
                variance,
                brush_applies: applies[i],
                selections: selections[i],
            }
        })
        .collect();
    AnalyticsSnapshot {
        suggestions: SuggestionStats {
            sessions: sessions.len(),
            suggestions,
        },
        refreshes: RefreshHistogram {
            sessions: sessions.len(),
            histogram,
        },
        originality: OriginalityList { scores },
        heatmaps: Heatmaps {
            levels,
            width: WIDTH,
            height: HEIGHT,
            tiles: TileKind::ALL
                .iter()
                .map(|t| (t.name().to_string(), std::mem::take(&mut tiles[t.index()])))
                .collect(),
            spawn,
        },
    }
}
