use crate::{invalid, Classify, CmdResult, Format, Global};
use clap::Args;
use lode_core::level::{augment as augment_levels, default_split, Theme, AUGMENTS_PER_LEVEL};
use lode_core::synth;
use std::path::PathBuf;

#[derive(Args)]
pub struct SynthArgs {
    #[arg(long, default_value_t = 150)]
    count: usize,
    /// Output directory (defaults to --corpus).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Overwrite existing level files.
    #[arg(long)]
    force: bool,
}

pub fn synth_corpus(g: &Global, a: &SynthArgs) -> CmdResult {
    let out = a.out.as_ref().unwrap_or(&g.corpus);
    std::fs::create_dir_all(out).runtime(format!("creating {}", out.display()))?;
    let map = g.charmap()?;
    let levels = synth::corpus(g.seed, a.count);
    for (i, level) in levels.iter().enumerate() {
        let path = out.join(format!("level-{:03}.txt", i + 1));
        if path.exists() && !a.force {
            return Err(invalid(format!("{} exists (use --force to overwrite)", path.display())));
        }
        std::fs::write(&path, map.serialize_level(level)).runtime(format!("writing {}", path.display()))?;
    }
    match g.format {
        Format::Text => println!("wrote {} levels to {}", levels.len(), out.display()),
        Format::Json => g.print_json(&serde_json::json!({"levels": levels.len(), "dir": out})),
    }
    Ok(())
}

#[derive(Args)]
pub struct SplitArgs {
    /// Validate the existing split file instead of writing one.
    #[arg(long)]
    check: bool,
    #[arg(long)]
    force: bool,
}

pub fn split(g: &Global, a: &SplitArgs) -> CmdResult {
    let corpus = g.corpus()?;
    let split = if a.check {
        g.split(&corpus)?
    } else {
        if g.split.exists() && !a.force {
            return Err(invalid(format!(
                "{} exists (use --force to overwrite)",
                g.split.display()
            )));
        }
        let split = default_split(&corpus).invalid("deriving split")?;
        std::fs::write(&g.split, split.to_toml()).runtime(format!("writing {}", g.split.display()))?;
        split
    };
    let counts: Vec<(&str, usize)> = Theme::EVERY.iter().map(|t| (t.name(), split.ids(*t).len())).collect();
    match g.format {
        Format::Text => {
            for (name, n) in &counts {
                println!("{name:<9} {n}");
            }
        }
        Format::Json => g.print_json(&counts.into_iter().collect::<std::collections::BTreeMap<_, _>>()),
    }
    Ok(())
}

pub fn augment(g: &Global) -> CmdResult {
    let corpus = g.corpus()?;
    if corpus.is_empty() {
        log::warn!("corpus {} has no levels", g.corpus.display());
    }
    let levels: Vec<_> = corpus.into_iter().map(|c| c.level).collect();
    let grids = augment_levels(&levels);
    match g.format {
        Format::Text => println!(
            "{} levels x {} variants = {} grids",
            levels.len(),
            AUGMENTS_PER_LEVEL,
            grids.len()
        ),
        Format::Json => g.print_json(&serde_json::json!({
            "levels": levels.len(),
            "per_level": AUGMENTS_PER_LEVEL,
            "grids": grids.len(),
        })),
    }
    Ok(())
}
