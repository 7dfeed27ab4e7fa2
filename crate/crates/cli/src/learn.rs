use crate::{invalid, Classify, CmdResult, Format, Global, Preset};
use clap::Args;
use lode_core::level::{augment, Level, Theme, HEIGHT, PADDED_WIDTH};
use lode_core::par;
use lode_core::vae::{load_model, model_file_name, save_model, train_with, LrDecay, TrainError, VaeConfig, VaeModel};
use serde::Serialize;
use std::collections::HashMap;
use std::fmt::Write as _;
use std::ops::ControlFlow;
use std::path::{Path, PathBuf};

#[derive(Args)]
pub struct TrainArgs {
    /// Models to train.
    #[arg(long, value_delimiter = ',', default_value = "gold,platform,ladder,all")]
    themes: Vec<Theme>,
    #[arg(long)]
    epochs: Option<usize>,
    /// Hidden layer widths, outermost first (e.g. 256,128).
    #[arg(long, value_delimiter = ',')]
    hidden: Option<Vec<usize>>,
    #[arg(long)]
    latent: Option<usize>,
    #[arg(long)]
    batch_size: Option<usize>,
    #[arg(long)]
    kl_weight: Option<f64>,
    #[arg(long)]
    lr: Option<f64>,
    #[arg(long)]
    lr_decay_every: Option<usize>,
    #[arg(long)]
    lr_decay_factor: Option<f64>,
    #[arg(long, value_parser = ["multiplicative", "subtractive"])]
    lr_decay: Option<String>,
}

impl TrainArgs {
    fn config(&self, preset: Preset, seed: u64) -> VaeConfig {
        let mut c = match preset {
            Preset::Full => VaeConfig::full(),
            Preset::Desk => VaeConfig::desk(),
        };
        c.seed = seed;
        if let Some(v) = self.epochs {
            c.epochs = v;
        }
        if let Some(v) = &self.hidden {
            c.hidden_dims = v.clone();
        }
        if let Some(v) = self.latent {
            c.latent_dim = v;
        }
        if let Some(v) = self.batch_size {
            c.batch_size = v;
        }
        if let Some(v) = self.kl_weight {
            c.kl_weight = v;
        }
        if let Some(v) = self.lr {
            c.learning_rate = v;
        }
        if let Some(v) = self.lr_decay_every {
            c.lr_decay_every = v;
        }
        if let Some(v) = self.lr_decay_factor {
            c.lr_decay_factor = v;
        }
        match self.lr_decay.as_deref() {
            Some("subtractive") => c.lr_decay = LrDecay::Subtractive,
            Some(_) => c.lr_decay = LrDecay::Multiplicative,
            None => {}
        }
        c
    }
}

fn theme_levels(by_name: &HashMap<&str, &Level>, ids: &[String]) -> Vec<Level> {
    ids.iter().map(|id| by_name[id.as_str()].clone()).collect()
}

pub fn train(g: &Global, a: &TrainArgs) -> CmdResult {
    let corpus = g.corpus()?;
    let split = g.split(&corpus)?;
    let by_name: HashMap<&str, &Level> = corpus.iter().map(|c| (c.name.as_str(), &c.level)).collect();
    let base = a.config(g.preset, g.seed);
    base.validate().invalid("training configuration")?;
    std::fs::create_dir_all(&g.models).runtime(format!("creating {}", g.models.display()))?;

    let jobs: Vec<(Theme, VaeConfig, Vec<Level>)> = a
        .themes
        .iter()
        .map(|&t| {
            let index = Theme::EVERY.iter().position(|x| *x == t).expect("known theme");
            let config = VaeConfig {
                seed: base.seed.wrapping_add(index as u64),
                ..base.clone()
            };
            (t, config, theme_levels(&by_name, split.ids(t)))
        })
        .collect();

    let results = par::map(&jobs, |(theme, config, levels)| {
        let grids = augment(levels);
        log::info!(
            "{}: training on {} grids for {} epochs",
            theme.name(),
            grids.len(),
            config.epochs
        );
        let every = (config.epochs / 10).max(1);
        train_with(config, &grids, theme.name(), |s| {
            if s.epoch % every == 0 || s.epoch == config.epochs {
                log::info!(
                    "{} epoch {}/{} loss {:.5} (cce {:.5}, kl {:.5})",
                    theme.name(),
                    s.epoch,
                    config.epochs,
                    s.loss,
                    s.reconstruction,
                    s.kl
                );
            }
            ControlFlow::Continue(())
        })
    });

    let mut summary = Vec::new();
    for ((theme, _, _), result) in jobs.iter().zip(results) {
        let (model, history) = result.map_err(|e| match e {
            TrainError::Model(_)
            | TrainError::EmptyData
            | TrainError::TooFewGrids(_)
            | TrainError::GridShape { .. } => invalid(format!("{}: {e}", theme.name())),
            TrainError::NonFinite { .. } => crate::Failure::Runtime(anyhow::anyhow!("{}: {e}", theme.name())),
        })?;
        let path = g.models.join(model_file_name(*theme));
        std::fs::write(&path, save_model(&model)).runtime(format!("writing {}", path.display()))?;
        let mut csv = String::from("epoch,loss,reconstruction,kl,learning_rate\n");
        for s in &history {
            writeln!(
                csv,
                "{},{},{},{},{}",
                s.epoch, s.loss, s.reconstruction, s.kl, s.learning_rate
            )
            .expect("string write");
        }
        let csv_path = g.models.join(format!("loss-{}.csv", theme.name()));
        std::fs::write(&csv_path, csv).runtime(format!("writing {}", csv_path.display()))?;
        summary.push(serde_json::json!({
            "theme": theme.name(),
            "model": path,
            "loss_log": csv_path,
            "final_loss": model.meta.final_loss,
        }));
    }
    match g.format {
        Format::Text => {
            for s in &summary {
                println!(
                    "{:<9} final loss {:.5} -> {}",
                    s["theme"].as_str().unwrap_or(""),
                    s["final_loss"].as_f64().unwrap_or(f64::NAN),
                    s["model"].as_str().unwrap_or("")
                );
            }
        }
        Format::Json => g.print_json(&summary),
    }
    Ok(())
}

pub fn load_vae(path: &Path) -> CmdResult<VaeModel> {
    let bytes = std::fs::read(path).invalid(format!("reading model {}", path.display()))?;
    load_model(&bytes).invalid(format!("loading model {}", path.display()))
}

pub fn load_theme(g: &Global, theme: Theme) -> CmdResult<VaeModel> {
    let model = load_vae(&g.models.join(model_file_name(theme)))?;
    check_grid(&model)?;
    Ok(model)
}

fn check_grid(model: &VaeModel) -> CmdResult {
    let c = model.config();
    if (c.grid_height, c.grid_width) != (HEIGHT, PADDED_WIDTH) {
        return Err(invalid(format!(
            "model expects {}x{} grids, levels pad to {}x{}",
            c.grid_height, c.grid_width, HEIGHT, PADDED_WIDTH
        )));
    }
    Ok(())
}

#[derive(Args)]
pub struct EvalArgs {
    /// Evaluate this theme's model on this theme's levels.
    #[arg(long, default_value = "all")]
    theme: Theme,
    /// Use a specific model file instead of the theme's.
    #[arg(long)]
    model: Option<PathBuf>,
    /// Only the first N levels.
    #[arg(long)]
    limit: Option<usize>,
    /// Re-encode/decode steps in the convergence curve.
    #[arg(long, default_value_t = 10)]
    iterations: usize,
}

#[derive(Serialize)]
struct LevelEval {
    name: String,
    accuracy: f64,
    /// Hamming distance to the level after k reconstructions, k = 0..=iterations.
    curve: Vec<usize>,
}

/// Hamming distances from `level` of its iterated reconstructions.
pub fn convergence_curve(
    model: &VaeModel,
    level: &Level,
    iterations: usize,
) -> Result<Vec<usize>, lode_core::vae::VaeError> {
    let original = level.without_spawn();
    let mut cur = original.clone();
    let mut curve = vec![0];
    for _ in 0..iterations {
        cur = model.reconstruct(&cur)?;
        curve.push(cur.hamming(&original));
    }
    Ok(curve)
}

pub fn eval(g: &Global, a: &EvalArgs) -> CmdResult {
    let model = match &a.model {
        Some(p) => {
            let m = load_vae(p)?;
            check_grid(&m)?;
            m
        }
        None => load_theme(g, a.theme)?,
    };
    let corpus = g.corpus()?;
    let split = g.split(&corpus)?;
    let by_name: HashMap<&str, &Level> = corpus.iter().map(|c| (c.name.as_str(), &c.level)).collect();
    let mut ids = split.ids(a.theme).to_vec();
    if let Some(n) = a.limit {
        ids.truncate(n);
    }
    let iterations = a.iterations.max(1);
    let evals = par::map(&ids, |id| {
        let level = by_name[id.as_str()];
        convergence_curve(&model, level, iterations).map(|curve| LevelEval {
            name: id.clone(),
            accuracy: 1.0 - curve[1] as f64 / level.area() as f64,
            curve,
        })
    });
    let evals: Vec<LevelEval> = evals
        .into_iter()
        .collect::<Result<_, _>>()
        .runtime("reconstructing levels")?;
    let n = evals.len().max(1) as f64;
    let mean_accuracy = evals.iter().map(|e| e.accuracy).sum::<f64>() / n;
    let mean_curve: Vec<f64> = (0..=iterations)
        .map(|k| evals.iter().map(|e| e.curve[k] as f64).sum::<f64>() / n)
        .collect();
    match g.format {
        Format::Text => {
            for e in &evals {
                let curve: Vec<String> = e.curve.iter().map(|d| d.to_string()).collect();
                println!(
                    "{:<16} accuracy {:6.2}%  curve {}",
                    e.name,
                    100.0 * e.accuracy,
                    curve.join(" ")
                );
            }
            let curve: Vec<String> = mean_curve.iter().map(|d| format!("{d:.1}")).collect();
            println!(
                "mean accuracy {:.2}% over {} levels",
                100.0 * mean_accuracy,
                evals.len()
            );
            println!("mean curve {}", curve.join(" "));
        }
        Format::Json => g.print_json(&serde_json::json!({
            "theme": a.theme.name(),
            "mean_accuracy": mean_accuracy,
            "mean_curve": mean_curve,
            "levels": evals,
        })),
    }
    Ok(())
}
