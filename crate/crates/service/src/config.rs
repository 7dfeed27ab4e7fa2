use lode_core::editor::Budgets;
use std::path::PathBuf;
use std::time::Duration;

#[derive(Debug, Clone)]
pub struct ServiceConfig {
    /// Holds `journal.jsonl` and `snapshot.json`.
    pub data_dir: PathBuf,
    pub idle_timeout: Duration,
    pub snapshot_interval: Duration,
    pub budgets: Budgets,
}

impl ServiceConfig {
    pub fn new(data_dir: impl Into<PathBuf>) -> Self {
        Self {
            data_dir: data_dir.into(),
            idle_timeout: Duration::from_secs(24 * 60 * 60),
            snapshot_interval: Duration::from_secs(60),
            budgets: Budgets::default(),
        }
    }
}
