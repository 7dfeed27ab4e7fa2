use crate::learn::load_theme;
use crate::{Classify, CmdResult, Format, Global};
use clap::Args;
use lode_core::editor::{originality_score, RED_THRESHOLD};
use lode_core::level::{Cell, CharMap, Level, Theme, TileKind};
use lode_core::playability::check_playability;
use lode_core::suggest::{generate_set, ThemeModels};
use std::path::{Path, PathBuf};
use std::sync::Arc;

#[derive(Args)]
pub struct LevelArg {
    /// Level file in corpus format.
    level: PathBuf,
}

#[derive(Args)]
pub struct SuggestArgs {
    /// Level to condition on; the empty level when omitted.
    level: Option<PathBuf>,
    #[arg(long, default_value_t = 0)]
    generation: u32,
}

pub fn suggest(g: &Global, a: &SuggestArgs) -> CmdResult {
    let level = match &a.level {
        Some(p) => g.level(p)?,
        None => Level::empty(),
    };
    let models = ThemeModels::new(
        Arc::new(load_theme(g, Theme::Platform)?),
        Arc::new(load_theme(g, Theme::Ladder)?),
        Arc::new(load_theme(g, Theme::Gold)?),
    );
    let set = generate_set(&models, &level, g.seed, a.generation).runtime("generating suggestions")?;
    match g.format {
        Format::Text => {
            let map = g.charmap()?;
            for s in set.iter() {
                println!("== {} {}/{} ==", s.id, s.theme.name(), s.variance.name());
                print!("{}", map.serialize_level(&s.level));
            }
        }
        Format::Json => g.print_json(&set),
    }
    Ok(())
}

pub fn score(g: &Global, a: &LevelArg) -> CmdResult {
    let level = g.level(&a.level)?;
    let model = load_theme(g, Theme::All)?;
    let score = originality_score(&level, &model).runtime("scoring level")?;
    let low = score < RED_THRESHOLD;
    match g.format {
        Format::Text => println!("originality {score:.2}%{}", if low { " (below 25%)" } else { "" }),
        Format::Json => g.print_json(&serde_json::json!({"originality": score, "low": low})),
    }
    Ok(())
}

pub fn check(g: &Global, a: &LevelArg) -> CmdResult {
    let level = g.level(&a.level)?;
    let report = check_playability(&level);
    match g.format {
        Format::Text => {
            println!("playable        {}", report.playable);
            println!("spawn           {}", if report.has_spawn { "yes" } else { "no" });
            println!(
                "gold            {}/{} reachable",
                report.reachable_gold, report.total_gold
            );
            if !report.unreachable_cells.is_empty() {
                let cells: Vec<String> = report.unreachable_cells.iter().map(Cell::to_string).collect();
                println!("unreachable     {}", cells.join(" "));
            }
            println!("approximation   {}", report.approximation);
            for w in &report.warnings {
                println!("warning: {w}");
            }
        }
        Format::Json => g.print_json(&report),
    }
    Ok(())
}

#[derive(Args)]
pub struct RenderArgs {
    #[arg(required = true)]
    levels: Vec<PathBuf>,
    /// Write <name>.ppm images here.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Pixels per tile.
    #[arg(long, default_value_t = 8)]
    scale: usize,
}

pub fn tile_color(tile: TileKind) -> [u8; 3] {
    match tile {
        TileKind::Solid => [80, 80, 80],
        TileKind::Breakable => [170, 74, 44],
        TileKind::Ladder => [222, 184, 135],
        TileKind::Rope => [120, 200, 255],
        TileKind::Gold => [255, 215, 0],
        TileKind::Enemy => [220, 40, 40],
        TileKind::Empty => [0, 0, 0],
    }
}

const SPAWN_COLOR: [u8; 3] = [60, 220, 60];

/// Binary PPM (P6) with `scale × scale` pixels per tile.
pub fn ppm(level: &Level, scale: usize) -> Vec<u8> {
    let scale = scale.max(1);
    let (w, h) = (level.width() * scale, level.height() * scale);
    let mut out = format!("P6\n{w} {h}\n255\n").into_bytes();
    out.reserve(w * h * 3);
    for y in 0..h {
        for x in 0..w {
            let cell = Cell::new(x / scale, y / scale);
            let rgb = if level.spawn() == Some(cell) {
                SPAWN_COLOR
            } else {
                tile_color(level.get(cell))
            };
            out.extend_from_slice(&rgb);
        }
    }
    out
}

fn render_one(map: &CharMap, g: &Global, path: &Path, a: &RenderArgs) -> CmdResult<serde_json::Value> {
    let level = g.level(path)?;
    let mut image = None;
    if let Some(dir) = &a.out {
        std::fs::create_dir_all(dir).runtime(format!("creating {}", dir.display()))?;
        let stem = path
            .file_stem()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_default();
        let file = dir.join(format!("{stem}.ppm"));
        std::fs::write(&file, ppm(&level, a.scale)).runtime(format!("writing {}", file.display()))?;
        image = Some(file);
    }
    if g.format == Format::Text {
        println!("== {} ==", path.display());
        print!("{}", map.serialize_level(&level));
    }
    Ok(serde_json::json!({"level": path, "rows": level, "image": image}))
}

pub fn render(g: &Global, a: &RenderArgs) -> CmdResult {
    let map = g.charmap()?;
    let rendered = a
        .levels
        .iter()
        .map(|p| render_one(&map, g, p, a))
        .collect::<CmdResult<Vec<_>>>()?;
    if g.format == Format::Json {
        g.print_json(&rendered);
    }
    Ok(())
}
