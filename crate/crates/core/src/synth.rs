//! Deterministic generator for Lode Runner style levels.
//!
//! Produces a stand-in corpus with the same file format, size and tile
//! vocabulary as the classic levels: a solid floor, stacked brick
//! platforms, ladders between floors, ropes, gold, enemies and a spawn.
//! Each level leans towards one theme (lots of gold, long ladders, or dense
//! platforms) so the heuristic split has something to find.

use crate::level::{Cell, Level, Theme, TileKind, HEIGHT, WIDTH};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Generates level `index` of a corpus. Themes cycle Gold, Ladder, Platform.
pub fn generate(seed: u64, index: usize) -> Level {
    let theme = match index % 3 {
        0 => Theme::Gold,
        1 => Theme::Ladder,
        _ => Theme::Platform,
    };
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index as u64);
    generate_themed(theme, &mut rng)
}

/// `n` levels with `generate(seed, 0..n)`.
pub fn corpus(seed: u64, n: usize) -> Vec<Level> {
    (0..n).map(|i| generate(seed, i)).collect()
}

fn generate_themed(theme: Theme, rng: &mut ChaCha8Rng) -> Level {
    let mut level = Level::empty();
    let floor = HEIGHT - 1;
    for c in 0..WIDTH {
        level.set(Cell::new(c, floor), TileKind::Solid);
    }

    // Platform rows from the floor upwards.
    let (gap_lo, gap_hi) = match theme {
        Theme::Platform => (3, 4),
        Theme::Ladder => (4, 6),
        _ => (3, 5),
    };
    let mut rows = vec![floor];
    let mut r = floor;
    while r > gap_hi + 1 {
        r -= rng.random_range(gap_lo..=gap_hi);
        if r < 2 {
            break;
        }
        rows.push(r);
    }

    for &pr in &rows[1..] {
        let mut c = rng.random_range(0..4);
        while c < WIDTH {
            let len = match theme {
                Theme::Platform => rng.random_range(6..=14),
                _ => rng.random_range(3..=10),
            };
            let solid = rng.random_bool(0.15);
            for x in c..(c + len).min(WIDTH) {
                level.set(
                    Cell::new(x, pr),
                    if solid { TileKind::Solid } else { TileKind::Breakable },
                );
            }
            c += len
                + match theme {
                    Theme::Platform => rng.random_range(1..=3),
                    _ => rng.random_range(2..=7),
                };
        }
    }

    // Ladders connect each platform row with the one below it. Ladder-heavy
    // levels get more of them, sometimes spanning two floors.
    let per_gap = match theme {
        Theme::Ladder => 3..=5,
        Theme::Platform => 1..=2,
        _ => 1..=3,
    };
    for w in 1..rows.len() {
        let top = rows[w];
        let n = rng.random_range(per_gap.clone());
        for _ in 0..n {
            let col = rng.random_range(0..WIDTH);
            let span_two = theme == Theme::Ladder && w + 1 < rows.len() && rng.random_bool(0.4);
            let upper = if span_two { rows[w + 1] } else { top };
            let bottom = rows[w - 1] - 1;
            for y in upper..=bottom {
                level.set(Cell::new(col, y), TileKind::Ladder);
            }
            // A ladder continues one tile above its platform so it can be left.
            if upper > 0 {
                let above = Cell::new(col, upper - 1);
                if level.get(above) == TileKind::Empty && rng.random_bool(0.5) {
                    level.set(above, TileKind::Ladder);
                }
            }
        }
    }

    let ropes = match theme {
        Theme::Platform => rng.random_range(0..=2),
        _ => rng.random_range(1..=3),
    };
    for _ in 0..ropes {
        let w = rng.random_range(1..rows.len().max(2));
        let y = rows[w.min(rows.len() - 1)].saturating_sub(2).max(1);
        let start = rng.random_range(0..WIDTH - 4);
        let len = rng.random_range(4..=12);
        for x in start..(start + len).min(WIDTH) {
            let cell = Cell::new(x, y);
            if level.get(cell) == TileKind::Empty {
                level.set(cell, TileKind::Rope);
            }
        }
    }

    // Standing cells: empty with something supportive below.
    let standing: Vec<Cell> = (0..HEIGHT - 1)
        .flat_map(|r| (0..WIDTH).map(move |c| Cell::new(c, r)))
        .filter(|&cell| {
            level.get(cell) == TileKind::Empty
                && matches!(
                    level.get(Cell::new(cell.col, cell.row + 1)),
                    TileKind::Solid | TileKind::Breakable | TileKind::Ladder
                )
        })
        .collect();

    let gold = match theme {
        Theme::Gold => rng.random_range(12..=22),
        _ => rng.random_range(3..=7),
    };
    let enemies = rng.random_range(1..=4);
    let mut free = standing;
    let mut pick = |rng: &mut ChaCha8Rng| -> Option<Cell> {
        (!free.is_empty()).then(|| free.swap_remove(rng.random_range(0..free.len())))
    };
    for _ in 0..gold {
        if let Some(c) = pick(rng) {
            level.set(c, TileKind::Gold);
        }
    }
    for _ in 0..enemies {
        if let Some(c) = pick(rng) {
            level.set(c, TileKind::Enemy);
        }
    }
    if let Some(c) = pick(rng) {
        level.set_spawn(Some(c)).expect("standing cells are empty");
    }
    level
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn deterministic_and_well_formed() {
        let a = corpus(7, 9);
        assert_eq!(a, corpus(7, 9));
        for l in &a {
            assert!(l.is_standard());
            assert!(l.spawn().is_some());
            assert!(l.count(TileKind::Gold) >= 1);
            assert!((0..WIDTH).all(|c| l.get(Cell::new(c, HEIGHT - 1)) == TileKind::Solid));
        }
        assert_ne!(a[0], a[3]);
    }

    #[test]
    fn themes_lean_the_right_way() {
        let levels = corpus(1, 60);
        let avg =
            |k: usize, t: TileKind| levels.iter().skip(k).step_by(3).map(|l| l.count(t)).sum::<usize>() as f64 / 20.0;
        assert!(avg(0, TileKind::Gold) > 2.0 * avg(2, TileKind::Gold));
        assert!(avg(1, TileKind::Ladder) > avg(2, TileKind::Ladder));
    }
}
