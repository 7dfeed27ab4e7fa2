use crate::ServiceError;
use lode_core::editor::Reconstructor;
use lode_core::level::Theme;
use lode_core::suggest::{SuggestionSource, ThemeModels};
use lode_core::vae::{load_model, model_file_name, VaeModel};
use std::path::Path;
use std::sync::Arc;

/// Immutable after load: the suggestion source (three themed models) and the
/// whole-corpus model used for originality scores.
#[derive(Clone)]
pub struct Models {
    pub source: Arc<dyn SuggestionSource>,
    pub scorer: Arc<dyn Reconstructor>,
}

impl Models {
    pub fn new(source: Arc<dyn SuggestionSource>, scorer: Arc<dyn Reconstructor>) -> Self {
        Self { source, scorer }
    }

    pub fn from_vaes(platform: VaeModel, ladder: VaeModel, gold: VaeModel, all: VaeModel) -> Self {
        let themes = ThemeModels::new(Arc::new(platform), Arc::new(ladder), Arc::new(gold));
        Self::new(Arc::new(themes), Arc::new(all))
    }

    /// Loads `vae-{platform,ladder,gold,all}.levae` from `dir`.
    pub fn load_dir(dir: &Path) -> Result<Self, ServiceError> {
        let load = |theme: Theme| -> Result<VaeModel, ServiceError> {
            let path = dir.join(model_file_name(theme));
            let bytes = std::fs::read(&path).map_err(|e| ServiceError::Model {
                path: path.clone(),
                message: e.to_string(),
            })?;
            load_model(&bytes).map_err(|e| ServiceError::Model {
                path,
                message: e.to_string(),
            })
        };
        Ok(Self::from_vaes(
            load(Theme::Platform)?,
            load(Theme::Ladder)?,
            load(Theme::Gold)?,
            load(Theme::All)?,
        ))
    }
}
