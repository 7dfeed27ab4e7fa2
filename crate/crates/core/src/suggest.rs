//! The 3×2 suggestion grid: one row per themed model (Platform, Ladder,
//! Gold), a low-variance and a high-variance column.

use crate::level::{encode_onehot, Level, LevelError, Theme, CENTER_PAD};
use crate::par;
use crate::vae::{LatentVector, VaeError, VaeModel};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use std::sync::Arc;
use thiserror::Error;

pub const SUGGESTION_COUNT: usize = 6;

#[derive(Debug, Error)]
pub enum SuggestError {
    #[error("no model loaded for theme {0}")]
    MissingModel(Theme),
    #[error("suggestion id {0} is outside 0..6")]
    BadId(u8),
    #[error("expected {expected} suggestions, got {actual}")]
    Count { expected: usize, actual: usize },
    #[error(transparent)]
    Model(#[from] VaeError),
    #[error(transparent)]
    Level(#[from] LevelError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Variance {
    Low,
    High,
}

impl Variance {
    pub const COLUMNS: [Variance; 2] = [Variance::Low, Variance::High];

    pub fn column(self) -> usize {
        self as usize
    }

    pub fn name(self) -> &'static str {
        match self {
            Variance::Low => "low",
            Variance::High => "high",
        }
    }
}

/// Grid position of a suggestion: `id = 2 · row + column`.
pub fn suggestion_id(theme: Theme, variance: Variance) -> Option<u8> {
    theme.row().map(|r| (2 * r + variance.column()) as u8)
}

/// Inverse of [`suggestion_id`].
pub fn suggestion_slot(id: u8) -> Option<(Theme, Variance)> {
    let id = id as usize;
    (id < SUGGESTION_COUNT).then(|| (Theme::ROWS[id / 2], Variance::COLUMNS[id % 2]))
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Suggestion {
    pub id: u8,
    pub theme: Theme,
    pub variance: Variance,
    pub level: Level,
}

/// Exactly six suggestions ordered by id.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SuggestionSet {
    pub seed: u64,
    pub generation: u32,
    suggestions: Vec<Suggestion>,
}

impl SuggestionSet {
    pub fn new(seed: u64, generation: u32, mut suggestions: Vec<Suggestion>) -> Result<Self, SuggestError> {
        if suggestions.len() != SUGGESTION_COUNT {
            return Err(SuggestError::Count {
                expected: SUGGESTION_COUNT,
                actual: suggestions.len(),
            });
        }
        suggestions.sort_by_key(|s| s.id);
        for (i, s) in suggestions.iter().enumerate() {
            if s.id as usize != i || suggestion_slot(s.id) != Some((s.theme, s.variance)) {
                return Err(SuggestError::BadId(s.id));
            }
        }
        Ok(Self {
            seed,
            generation,
            suggestions,
        })
    }

    /// Builds a set from six levels given in id order.
    pub fn from_levels(seed: u64, generation: u32, levels: Vec<Level>) -> Result<Self, SuggestError> {
        let suggestions = levels
            .into_iter()
            .enumerate()
            .map(|(i, level)| {
                let (theme, variance) = suggestion_slot(i as u8).ok_or(SuggestError::BadId(i as u8))?;
                Ok(Suggestion {
                    id: i as u8,
                    theme,
                    variance,
                    level,
                })
            })
            .collect::<Result<Vec<_>, SuggestError>>()?;
        Self::new(seed, generation, suggestions)
    }

    pub fn get(&self, id: u8) -> Option<&Suggestion> {
        self.suggestions.get(id as usize)
    }

    pub fn iter(&self) -> impl Iterator<Item = &Suggestion> {
        self.suggestions.iter()
    }

    pub fn levels(&self) -> impl Iterator<Item = &Level> {
        self.suggestions.iter().map(|s| &s.level)
    }
}

/// How the high-variance suggestion iterates.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum HighVarianceMode {
    /// Each step adds noise, decodes, then re-encodes the decoded level.
    Reencode,
    /// Noise accumulates on the latent vector; one decode at the end.
    Accumulate,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NoiseConfig {
    /// Low-variance noise is drawn from `[-low, low)`.
    pub low: f32,
    /// High-variance noise is drawn from `(-high, high)`.
    pub high: f32,
    /// Noise steps for the high-variance suggestion; 0 behaves like 1.
    pub high_iterations: usize,
    pub high_mode: HighVarianceMode,
}

impl Default for NoiseConfig {
    fn default() -> Self {
        Self {
            low: 0.005,
            high: 0.5,
            high_iterations: 10,
            high_mode: HighVarianceMode::Reencode,
        }
    }
}

/// `z + u`, `u ~ U[-bound, bound)` per dimension.
fn add_uniform<R: Rng>(z: &mut [f32], bound: f32, open_low: bool, rng: &mut R) {
    if bound <= 0.0 {
        return;
    }
    for v in z.iter_mut() {
        let mut u = rng.random_range(-bound..bound);
        while open_low && u == -bound {
            u = rng.random_range(-bound..bound);
        }
        *v += u;
    }
}

fn encode_mean(model: &VaeModel, level: &Level) -> Result<Vec<f32>, SuggestError> {
    Ok(model.encode(&encode_onehot(level, CENTER_PAD)?)?.mu)
}

/// Low-variance suggestion: `mu(current) + U[-low, low)`, decoded.
pub fn suggest_low<R: Rng>(
    model: &VaeModel,
    current: &Level,
    noise: &NoiseConfig,
    rng: &mut R,
) -> Result<Level, SuggestError> {
    let mut z = encode_mean(model, current)?;
    add_uniform(&mut z, noise.low, false, rng);
    Ok(model.decode_level(&LatentVector { z })?)
}

/// High-variance suggestion. In `Reencode` mode each of the
/// `high_iterations` steps adds `U(-high, high)` noise to the latent, decodes
/// to a level and re-encodes that level's mean for the next step.
pub fn suggest_high<R: Rng>(
    model: &VaeModel,
    current: &Level,
    noise: &NoiseConfig,
    rng: &mut R,
) -> Result<Level, SuggestError> {
    let steps = noise.high_iterations.max(1);
    let mut z = encode_mean(model, current)?;
    match noise.high_mode {
        HighVarianceMode::Reencode => {
            let mut level = current.clone();
            for step in 0..steps {
                add_uniform(&mut z, noise.high, true, rng);
                level = model.decode_level(&LatentVector { z: z.clone() })?;
                if step + 1 < steps {
                    z = encode_mean(model, &level)?;
                }
            }
            Ok(level)
        }
        HighVarianceMode::Accumulate => {
            for _ in 0..steps {
                add_uniform(&mut z, noise.high, true, rng);
            }
            Ok(model.decode_level(&LatentVector { z })?)
        }
    }
}

/// Anything that can produce the suggestion grid for a level.
pub trait SuggestionSource: Send + Sync {
    fn generate(&self, current: &Level, seed: u64, generation: u32) -> Result<SuggestionSet, SuggestError>;
}

/// The three themed models behind the suggestion rows.
#[derive(Debug, Clone)]
pub struct ThemeModels {
    pub platform: Option<Arc<VaeModel>>,
    pub ladder: Option<Arc<VaeModel>>,
    pub gold: Option<Arc<VaeModel>>,
    pub noise: NoiseConfig,
}

impl ThemeModels {
    pub fn new(platform: Arc<VaeModel>, ladder: Arc<VaeModel>, gold: Arc<VaeModel>) -> Self {
        Self {
            platform: Some(platform),
            ladder: Some(ladder),
            gold: Some(gold),
            noise: NoiseConfig::default(),
        }
    }

    pub fn model(&self, theme: Theme) -> Result<&VaeModel, SuggestError> {
        let m = match theme {
            Theme::Platform => &self.platform,
            Theme::Ladder => &self.ladder,
            Theme::Gold => &self.gold,
            Theme::All => &None,
        };
        m.as_deref().ok_or(SuggestError::MissingModel(theme))
    }
}

/// Per-suggestion generator: stream `id` of the set seed.
pub fn suggestion_rng(seed: u64, id: u8) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(id as u64);
    rng
}

/// Generates all six suggestions for `current`.
pub fn generate_set(
    models: &ThemeModels,
    current: &Level,
    seed: u64,
    generation: u32,
) -> Result<SuggestionSet, SuggestError> {
    for theme in Theme::ROWS {
        models.model(theme)?;
    }
    let levels = par::map_range(SUGGESTION_COUNT, |i| {
        let (theme, variance) = suggestion_slot(i as u8).expect("id in range");
        let model = models.model(theme)?;
        let mut rng = suggestion_rng(seed, i as u8);
        match variance {
            Variance::Low => suggest_low(model, current, &models.noise, &mut rng),
            Variance::High => suggest_high(model, current, &models.noise, &mut rng),
        }
    });
    let levels = levels.into_iter().collect::<Result<Vec<_>, _>>()?;
    SuggestionSet::from_levels(seed, generation, levels)
}

impl SuggestionSource for ThemeModels {
    fn generate(&self, current: &Level, seed: u64, generation: u32) -> Result<SuggestionSet, SuggestError> {
        generate_set(self, current, seed, generation)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::level::{TileKind, HEIGHT, WIDTH};
    use crate::vae::{Vae, VaeConfig};

    fn tiny(seed: u64) -> Arc<VaeModel> {
        Arc::new(
            Vae::new(VaeConfig {
                hidden_dims: vec![12],
                latent_dim: 6,
                seed,
                ..VaeConfig::desk()
            })
            .unwrap(),
        )
    }

    fn models() -> ThemeModels {
        ThemeModels::new(tiny(1), tiny(2), tiny(3))
    }

    #[test]
    fn id_mapping_is_bijective() {
        let mut seen = std::collections::BTreeSet::new();
        for t in Theme::ROWS {
            for v in Variance::COLUMNS {
                let id = suggestion_id(t, v).unwrap();
                assert_eq!(suggestion_slot(id), Some((t, v)));
                seen.insert(id);
            }
        }
        assert_eq!(seen.into_iter().collect::<Vec<_>>(), vec![0, 1, 2, 3, 4, 5]);
        assert_eq!(suggestion_slot(6), None);
        assert_eq!(suggestion_id(Theme::All, Variance::Low), None);
        assert_eq!(suggestion_slot(0), Some((Theme::Platform, Variance::Low)));
        assert_eq!(suggestion_slot(5), Some((Theme::Gold, Variance::High)));
    }

    #[test]
    fn set_has_six_spawnless_standard_levels() {
        let set = generate_set(&models(), &Level::empty(), 42, 0).unwrap();
        assert_eq!(set.iter().count(), 6);
        for (i, s) in set.iter().enumerate() {
            assert_eq!(s.id as usize, i);
            assert_eq!((s.level.width(), s.level.height()), (WIDTH, HEIGHT));
            assert_eq!(s.level.spawn(), None);
        }
        assert_eq!(set, generate_set(&models(), &Level::empty(), 42, 0).unwrap());
    }

    #[test]
    fn missing_model_is_named() {
        let mut m = models();
        m.ladder = None;
        let err = generate_set(&m, &Level::empty(), 1, 0).unwrap_err();
        assert!(matches!(err, SuggestError::MissingModel(Theme::Ladder)));
    }

    #[test]
    fn zero_iterations_equals_single_high_step() {
        let m = tiny(4);
        let mut level = Level::empty();
        level.set(crate::level::Cell::new(3, 3), TileKind::Gold);
        let zero = NoiseConfig {
            high_iterations: 0,
            ..NoiseConfig::default()
        };
        let as_low = NoiseConfig {
            low: 0.5,
            ..NoiseConfig::default()
        };
        let a = suggest_high(&m, &level, &zero, &mut suggestion_rng(7, 1)).unwrap();
        let b = suggest_low(&m, &level, &as_low, &mut suggestion_rng(7, 1)).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn collapsed_low_noise_is_plain_reconstruction() {
        let m = tiny(5);
        let level = crate::synth::generate(1, 0);
        let none = NoiseConfig {
            low: 0.0,
            ..NoiseConfig::default()
        };
        let s = suggest_low(&m, &level, &none, &mut suggestion_rng(1, 0)).unwrap();
        assert_eq!(s, m.reconstruct(&level).unwrap());
    }

    #[test]
    fn noise_respects_bounds() {
        let mut rng = suggestion_rng(3, 0);
        let mut z = vec![0.0f32; 1000];
        for _ in 0..1000 {
            z.iter_mut().for_each(|v| *v = 0.0);
            add_uniform(&mut z, 0.005, false, &mut rng);
            assert!(z.iter().all(|v| *v >= -0.005 && *v < 0.005));
        }
        for _ in 0..100 {
            z.iter_mut().for_each(|v| *v = 0.0);
            add_uniform(&mut z, 0.5, true, &mut rng);
            assert!(z.iter().all(|v| *v > -0.5 && *v < 0.5));
        }
    }

    #[test]
    fn accumulate_mode_is_deterministic() {
        let mut m = models();
        m.noise.high_mode = HighVarianceMode::Accumulate;
        let a = generate_set(&m, &Level::empty(), 9, 2).unwrap();
        assert_eq!(a, generate_set(&m, &Level::empty(), 9, 2).unwrap());
        assert_eq!(a.generation, 2);
    }
}
