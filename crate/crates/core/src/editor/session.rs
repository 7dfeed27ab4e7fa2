use super::event::{now_millis, EditAction, EditEvent};
use super::tools::{footprint, majority_tile, Anchor, BrushSize, BrushStroke};
use super::EditError;
use crate::level::{Cell, Level, TileKind};
use crate::suggest::{SuggestionSet, SuggestionSource, SUGGESTION_COUNT};
use serde::{Deserialize, Serialize};

pub const MAX_REFRESHES: u32 = 7;
pub const MAX_WAND_TILES: u32 = 7;
/// Oldest undo snapshots are dropped past this depth.
pub const UNDO_LIMIT: usize = 500;

/// Per-session caps on refreshes and wand tiles.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Budgets {
    pub refreshes: u32,
    pub wand_tiles: u32,
}

impl Default for Budgets {
    fn default() -> Self {
        Self {
            refreshes: MAX_REFRESHES,
            wand_tiles: MAX_WAND_TILES,
        }
    }
}

/// Suggestion seed for the `generation`-th grid of a session.
pub fn derive_seed(seed: u64, generation: u32) -> u64 {
    // splitmix64 finalizer
    let mut z = seed ^ (generation as u64).wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// One editing session. Every state change goes through [`Session::execute`],
/// which is also how a session is rebuilt from its event log.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Session {
    id: String,
    seed: u64,
    created_at: u64,
    updated_at: u64,
    budgets: Budgets,
    level: Level,
    suggestions: SuggestionSet,
    generation: u32,
    refreshes_used: u32,
    wand_tiles_used: u32,
    undo: Vec<Level>,
    redo: Vec<Level>,
    events: Vec<EditEvent>,
}

impl Session {
    /// Starts a session on the empty level with suggestions generated from it.
    pub fn new(id: impl Into<String>, seed: u64, source: &dyn SuggestionSource) -> Result<Self, EditError> {
        Self::with_budgets(id, seed, Budgets::default(), source)
    }

    pub fn with_budgets(
        id: impl Into<String>,
        seed: u64,
        budgets: Budgets,
        source: &dyn SuggestionSource,
    ) -> Result<Self, EditError> {
        let set_seed = derive_seed(seed, 0);
        let set = source.generate(&Level::empty(), set_seed, 0)?;
        Ok(Self::started(id.into(), seed, now_millis(), budgets, set))
    }

    fn started(id: String, seed: u64, at: u64, budgets: Budgets, set: SuggestionSet) -> Self {
        let start = EditEvent {
            at,
            action: EditAction::Start {
                seed: set.seed,
                generation: set.generation,
                suggestions: set.levels().cloned().collect(),
                budgets,
            },
        };
        Self {
            id,
            seed,
            created_at: at,
            updated_at: at,
            budgets,
            level: Level::empty(),
            generation: set.generation,
            suggestions: set,
            refreshes_used: 0,
            wand_tiles_used: 0,
            undo: Vec::new(),
            redo: Vec::new(),
            events: vec![start],
        }
    }

    /// Rebuilds a session from its event log; the first event must be `start`.
    pub fn replay(id: impl Into<String>, seed: u64, events: &[EditEvent]) -> Result<Self, EditError> {
        let replay_err = |index: usize, message: String| EditError::Replay { index, message };
        let first = events.first().ok_or_else(|| replay_err(0, "empty event log".into()))?;
        let EditAction::Start {
            seed: set_seed,
            generation,
            suggestions,
            budgets,
        } = &first.action
        else {
            return Err(replay_err(0, format!("first event is `{}`", first.action.name())));
        };
        let set = SuggestionSet::from_levels(*set_seed, *generation, suggestions.clone())
            .map_err(|e| replay_err(0, e.to_string()))?;
        let mut session = Self::started(id.into(), seed, first.at, *budgets, set);
        for (i, event) in events.iter().enumerate().skip(1) {
            session.apply_event(event).map_err(|e| replay_err(i, e.to_string()))?;
        }
        Ok(session)
    }

    /// Re-applies one logged event. Derived fields (`changed`, the wand
    /// tile) are recomputed rather than trusted.
    pub fn apply_event(&mut self, event: &EditEvent) -> Result<(), EditError> {
        match &event.action {
            EditAction::Undo if !self.undo_inner(event.at) => Err(EditError::EmptyHistory("undo")),
            EditAction::Redo if !self.redo_inner(event.at) => Err(EditError::EmptyHistory("redo")),
            EditAction::Undo | EditAction::Redo => Ok(()),
            action => self.execute(action.clone(), event.at).map(drop),
        }
    }

    pub fn id(&self) -> &str {
        &self.id
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn created_at(&self) -> u64 {
        self.created_at
    }

    /// Time of the most recent event.
    pub fn updated_at(&self) -> u64 {
        self.updated_at
    }

    pub fn level(&self) -> &Level {
        &self.level
    }

    pub fn suggestions(&self) -> &SuggestionSet {
        &self.suggestions
    }

    pub fn generation(&self) -> u32 {
        self.generation
    }

    pub fn budgets(&self) -> Budgets {
        self.budgets
    }

    pub fn refreshes_left(&self) -> u32 {
        self.budgets.refreshes.saturating_sub(self.refreshes_used)
    }

    pub fn wand_tiles_left(&self) -> u32 {
        self.budgets.wand_tiles.saturating_sub(self.wand_tiles_used)
    }

    pub fn refreshes_used(&self) -> u32 {
        self.refreshes_used
    }

    pub fn wand_tiles_used(&self) -> u32 {
        self.wand_tiles_used
    }

    pub fn undo_depth(&self) -> usize {
        self.undo.len()
    }

    pub fn redo_depth(&self) -> usize {
        self.redo.len()
    }

    pub fn events(&self) -> &[EditEvent] {
        &self.events
    }

    /// Copies the footprint from a suggestion; returns the number of cells
    /// that changed.
    pub fn apply_brush(&mut self, stroke: BrushStroke) -> Result<u32, EditError> {
        let logged = self.execute(
            EditAction::BrushApply {
                suggestion_id: stroke.suggestion_id,
                size: stroke.size,
                anchor: stroke.anchor,
                changed: 0,
            },
            now_millis(),
        )?;
        Ok(changed_count(&logged))
    }

    pub fn apply_eraser(&mut self, size: BrushSize, anchor: Anchor) -> Result<u32, EditError> {
        let logged = self.execute(
            EditAction::Erase {
                size,
                anchor,
                changed: 0,
            },
            now_millis(),
        )?;
        Ok(changed_count(&logged))
    }

    /// Sets `cell` to the majority of its neighbours and spends one wand tile.
    pub fn apply_wand(&mut self, cell: Cell) -> Result<TileKind, EditError> {
        let logged = self.execute(
            EditAction::Wand {
                cell,
                tile: TileKind::Empty,
                changed: 0,
            },
            now_millis(),
        )?;
        match logged {
            EditAction::Wand { tile, .. } => Ok(tile),
            _ => unreachable!("wand logs a wand event"),
        }
    }

    pub fn place_spawn(&mut self, cell: Cell) -> Result<(), EditError> {
        self.execute(EditAction::PlaceSpawn { cell }, now_millis()).map(drop)
    }

    /// Replaces the suggestions with a grid generated from the current level.
    pub fn refresh(&mut self, source: &dyn SuggestionSource) -> Result<(), EditError> {
        if self.refreshes_used >= self.budgets.refreshes {
            return Err(EditError::RefreshBudget(self.refreshes_used));
        }
        let generation = self.generation + 1;
        let seed = derive_seed(self.seed, generation);
        let set = source.generate(&self.level, seed, generation)?;
        self.execute(
            EditAction::Refresh {
                seed,
                generation,
                suggestions: set.levels().cloned().collect(),
            },
            now_millis(),
        )
        .map(drop)
    }

    /// Empty level, fresh budgets and history, new suggestions; same id.
    pub fn clear_all(&mut self, source: &dyn SuggestionSource) -> Result<(), EditError> {
        let generation = self.generation + 1;
        let seed = derive_seed(self.seed, generation);
        let set = source.generate(&Level::empty(), seed, generation)?;
        self.execute(
            EditAction::ClearAll {
                seed,
                generation,
                suggestions: set.levels().cloned().collect(),
            },
            now_millis(),
        )
        .map(drop)
    }

    /// Returns false (and logs nothing) when there is nothing to undo.
    pub fn undo(&mut self) -> bool {
        self.undo_inner(now_millis())
    }

    pub fn redo(&mut self) -> bool {
        self.redo_inner(now_millis())
    }

    /// Logs a client-reported event (play, win, share, selection).
    pub fn record(&mut self, action: EditAction) -> Result<(), EditError> {
        if !action.is_client_event() {
            return Err(EditError::NotClientEvent(action.name()));
        }
        self.execute(action, now_millis()).map(drop)
    }

    fn undo_inner(&mut self, at: u64) -> bool {
        let Some(prev) = self.undo.pop() else {
            return false;
        };
        self.redo.push(std::mem::replace(&mut self.level, prev));
        self.log(EditAction::Undo, at);
        true
    }

    fn redo_inner(&mut self, at: u64) -> bool {
        let Some(next) = self.redo.pop() else {
            return false;
        };
        self.undo.push(std::mem::replace(&mut self.level, next));
        self.log(EditAction::Redo, at);
        true
    }

    fn log(&mut self, action: EditAction, at: u64) {
        self.updated_at = self.updated_at.max(at);
        self.events.push(EditEvent { at, action });
    }

    /// Applies a level edit: the redo history is dropped and the previous
    /// level is kept for undo when anything changed.
    fn commit(&mut self, next: Level) -> u32 {
        self.redo.clear();
        let changed = self.level.hamming(&next) as u32 + u32::from(self.level.spawn() != next.spawn());
        if next != self.level {
            self.undo.push(std::mem::replace(&mut self.level, next));
            if self.undo.len() > UNDO_LIMIT {
                self.undo.remove(0);
            }
        }
        changed
    }

    fn install(&mut self, seed: u64, generation: u32, suggestions: Vec<Level>) -> Result<(), EditError> {
        if suggestions.len() != SUGGESTION_COUNT {
            return Err(crate::suggest::SuggestError::Count {
                expected: SUGGESTION_COUNT,
                actual: suggestions.len(),
            }
            .into());
        }
        if let Some(bad) = suggestions.iter().find(|l| !l.is_standard()) {
            return Err(crate::level::LevelError::GridShape {
                height: bad.height(),
                width: bad.width(),
                expected_height: crate::level::HEIGHT,
                expected_width: crate::level::WIDTH,
            }
            .into());
        }
        self.suggestions = SuggestionSet::from_levels(seed, generation, suggestions)?;
        self.generation = generation;
        Ok(())
    }

    /// Validates and applies one action, logs it, and returns the logged form
    /// (with derived fields such as `changed` filled in).
    fn execute(&mut self, action: EditAction, at: u64) -> Result<EditAction, EditError> {
        let (w, h) = (self.level.width(), self.level.height());
        let logged = match action {
            EditAction::BrushApply {
                suggestion_id,
                size,
                anchor,
                ..
            } => {
                let source = self
                    .suggestions
                    .get(suggestion_id)
                    .ok_or(EditError::UnknownSuggestion(suggestion_id))?
                    .level
                    .clone();
                let cells = footprint(size, anchor, w, h);
                if cells.is_empty() {
                    return Err(EditError::EmptyFootprint {
                        size: size.get(),
                        anchor,
                    });
                }
                let mut next = self.level.clone();
                for cell in cells {
                    next.set(cell, source.get(cell));
                }
                let changed = self.commit(next);
                EditAction::BrushApply {
                    suggestion_id,
                    size,
                    anchor,
                    changed,
                }
            }
            EditAction::Erase { size, anchor, .. } => {
                let cells = footprint(size, anchor, w, h);
                if cells.is_empty() {
                    return Err(EditError::EmptyFootprint {
                        size: size.get(),
                        anchor,
                    });
                }
                let mut next = self.level.clone();
                for &cell in &cells {
                    next.set(cell, TileKind::Empty);
                }
                if next.spawn().is_some_and(|s| cells.contains(&s)) {
                    next.set_spawn(None)?;
                }
                let changed = self.commit(next);
                EditAction::Erase { size, anchor, changed }
            }
            EditAction::Wand { cell, .. } => {
                if !self.level.in_bounds(cell.col as i64, cell.row as i64) {
                    return Err(EditError::OutOfBounds(cell));
                }
                if self.wand_tiles_used >= self.budgets.wand_tiles {
                    return Err(EditError::WandBudget(self.wand_tiles_used));
                }
                let tile = majority_tile(&self.level, cell);
                let mut next = self.level.clone();
                next.set(cell, tile);
                self.wand_tiles_used += 1;
                let changed = self.commit(next);
                EditAction::Wand { cell, tile, changed }
            }
            EditAction::PlaceSpawn { cell } => {
                if !self.level.in_bounds(cell.col as i64, cell.row as i64) {
                    return Err(EditError::OutOfBounds(cell));
                }
                let tile = self.level.get(cell);
                if tile.is_blocking() {
                    return Err(EditError::SpawnPlacement { cell, tile });
                }
                let mut next = self.level.clone();
                next.set_spawn(Some(cell))?;
                self.commit(next);
                EditAction::PlaceSpawn { cell }
            }
            EditAction::Refresh {
                seed,
                generation,
                suggestions,
            } => {
                if self.refreshes_used >= self.budgets.refreshes {
                    return Err(EditError::RefreshBudget(self.refreshes_used));
                }
                self.install(seed, generation, suggestions.clone())?;
                self.refreshes_used += 1;
                EditAction::Refresh {
                    seed,
                    generation,
                    suggestions,
                }
            }
            EditAction::ClearAll {
                seed,
                generation,
                suggestions,
            } => {
                self.install(seed, generation, suggestions.clone())?;
                self.level = Level::empty();
                self.refreshes_used = 0;
                self.wand_tiles_used = 0;
                self.undo.clear();
                self.redo.clear();
                EditAction::ClearAll {
                    seed,
                    generation,
                    suggestions,
                }
            }
            EditAction::SelectSuggestion { suggestion_id } => {
                if self.suggestions.get(suggestion_id).is_none() {
                    return Err(EditError::UnknownSuggestion(suggestion_id));
                }
                EditAction::SelectSuggestion { suggestion_id }
            }
            action @ (EditAction::Play | EditAction::Win { .. } | EditAction::Share { .. }) => action,
            action @ (EditAction::Start { .. } | EditAction::Undo | EditAction::Redo) => {
                return Err(EditError::NotClientEvent(action.name()));
            }
        };
        self.log(logged.clone(), at);
        Ok(logged)
    }
}

fn changed_count(action: &EditAction) -> u32 {
    match action {
        EditAction::BrushApply { changed, .. }
        | EditAction::Erase { changed, .. }
        | EditAction::Wand { changed, .. } => *changed,
        _ => 0,
    }
}
