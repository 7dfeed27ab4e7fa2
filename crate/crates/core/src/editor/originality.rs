use crate::level::Level;
use crate::vae::{VaeError, VaeModel};

/// Scores below this percentage are flagged as too close to the training data.
pub const RED_THRESHOLD: f64 = 25.0;

/// Anything that maps a level to its model reconstruction.
pub trait Reconstructor: Send + Sync {
    fn reconstruct_level(&self, level: &Level) -> Result<Level, VaeError>;
}

impl Reconstructor for VaeModel {
    fn reconstruct_level(&self, level: &Level) -> Result<Level, VaeError> {
        self.reconstruct(level)
    }
}

/// Percentage of cells whose tiles differ; spawn is ignored.
pub fn hamming_percentage(a: &Level, b: &Level) -> f64 {
    100.0 * a.hamming(b) as f64 / a.area() as f64
}

/// Distance between `level` and its reconstruction as a percentage of area.
pub fn originality_score(level: &Level, model: &dyn Reconstructor) -> Result<f64, VaeError> {
    let recon = model.reconstruct_level(&level.without_spawn())?;
    Ok(hamming_percentage(level, &recon))
}
