use lode_core::editor::{
    decode_bytes, decode_share_token, encode_bytes, encode_share_token, Anchor, BrushSize, BrushStroke, EditError,
    Session, MAX_REFRESHES, MAX_WAND_TILES,
};
use lode_core::level::{Cell, Level, TileKind, HEIGHT, WIDTH};
use lode_core::suggest::{SuggestError, SuggestionSet, SuggestionSource};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Random tile soup per (seed, slot); ignores the current level.
struct Noise;

impl SuggestionSource for Noise {
    fn generate(&self, _: &Level, seed: u64, generation: u32) -> Result<SuggestionSet, SuggestError> {
        let levels = (0..6)
            .map(|i| {
                let mut rng = ChaCha8Rng::seed_from_u64(seed ^ (i as u64) << 40);
                let tiles = (0..WIDTH * HEIGHT)
                    .map(|_| TileKind::ALL[rng.random_range(0..7)])
                    .collect();
                Level::from_tiles(WIDTH, HEIGHT, tiles).unwrap()
            })
            .collect();
        SuggestionSet::from_levels(seed, generation, levels)
    }
}

#[derive(Debug, Clone)]
enum Op {
    Brush(u8, u8, i32, i32),
    Erase(u8, i32, i32),
    Wand(usize, usize),
    Spawn(usize, usize),
    Refresh,
    Undo,
    Redo,
}

fn size_of(i: u8) -> BrushSize {
    BrushSize::ALL[i as usize % 4]
}

fn op() -> impl Strategy<Value = Op> {
    prop_oneof![
        4 => (0u8..6, 0u8..4, -4i32..34, -4i32..24).prop_map(|(a, b, c, d)| Op::Brush(a, b, c, d)),
        1 => (0u8..4, -4i32..34, -4i32..24).prop_map(|(a, b, c)| Op::Erase(a, b, c)),
        2 => (0usize..WIDTH, 0usize..HEIGHT).prop_map(|(c, r)| Op::Wand(c, r)),
        1 => (0usize..WIDTH, 0usize..HEIGHT).prop_map(|(c, r)| Op::Spawn(c, r)),
        2 => Just(Op::Refresh),
        2 => Just(Op::Undo),
        1 => Just(Op::Redo),
    ]
}

fn run(s: &mut Session, op: &Op) -> Result<(), EditError> {
    match *op {
        Op::Brush(id, size, c, r) => s
            .apply_brush(BrushStroke {
                suggestion_id: id,
                size: size_of(size),
                anchor: Anchor::new(c, r),
            })
            .map(drop),
        Op::Erase(size, c, r) => s.apply_eraser(size_of(size), Anchor::new(c, r)).map(drop),
        Op::Wand(c, r) => s.apply_wand(Cell::new(c, r)).map(drop),
        Op::Spawn(c, r) => s.place_spawn(Cell::new(c, r)),
        Op::Refresh => s.refresh(&Noise),
        Op::Undo => {
            s.undo();
            Ok(())
        }
        Op::Redo => {
            s.redo();
            Ok(())
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn brush_copies_exactly_the_footprint(
        ops in proptest::collection::vec(op(), 0..20),
        id in 0u8..6, size in 0u8..4, c in -4i32..34, r in -4i32..24,
    ) {
        let mut s = Session::new("p", 1, &Noise).unwrap();
        for o in &ops {
            let _ = run(&mut s, o);
        }
        let before = s.level().clone();
        let source = s.suggestions().get(id).unwrap().level.clone();
        let stroke = BrushStroke { suggestion_id: id, size: size_of(size), anchor: Anchor::new(c, r) };
        let result = s.apply_brush(stroke);
        let s_len = size_of(size).get() as i32;
        let inside = |cell: Cell| {
            let (x, y) = (cell.col as i32, cell.row as i32);
            x >= c && x < c + s_len && y >= r && y < r + s_len
        };
        if before.cells().any(inside) {
            prop_assert!(result.is_ok());
            for cell in before.cells() {
                let want = if inside(cell) { source.get(cell) } else { before.get(cell) };
                prop_assert_eq!(s.level().get(cell), want);
            }
        } else {
            let empty_footprint = matches!(result, Err(EditError::EmptyFootprint { .. }));
            prop_assert!(empty_footprint);
            prop_assert_eq!(s.level(), &before);
        }
    }

    #[test]
    fn budgets_hold_under_any_sequence(ops in proptest::collection::vec(op(), 0..120)) {
        let mut s = Session::new("p", 2, &Noise).unwrap();
        for o in &ops {
            let (r0, w0) = (s.refreshes_used(), s.wand_tiles_used());
            let result = run(&mut s, o);
            match o {
                Op::Refresh if r0 == MAX_REFRESHES => {
                    prop_assert!(matches!(result, Err(EditError::RefreshBudget(_))));
                }
                Op::Wand(..) if w0 == MAX_WAND_TILES => {
                    prop_assert!(matches!(result, Err(EditError::WandBudget(_))));
                }
                _ => prop_assert!(result.is_ok() || !matches!(o, Op::Refresh | Op::Wand(..) | Op::Undo | Op::Redo)),
            }
            prop_assert!(s.refreshes_used() <= MAX_REFRESHES);
            prop_assert!(s.wand_tiles_used() <= MAX_WAND_TILES);
            prop_assert!(s.refreshes_used() >= r0 && s.wand_tiles_used() >= w0);
        }
        prop_assert_eq!(Session::replay("p", 2, s.events()).unwrap(), s);
    }

    #[test]
    fn undo_all_then_redo_all(ops in proptest::collection::vec(op(), 50)) {
        let mut s = Session::new("p", 3, &Noise).unwrap();
        let edits: Vec<_> = ops.into_iter().filter(|o| !matches!(o, Op::Undo | Op::Redo)).collect();
        for o in &edits {
            let _ = run(&mut s, o);
        }
        let last = s.level().clone();
        for _ in 0..edits.len() {
            s.undo();
        }
        prop_assert_eq!(s.level(), &Level::empty());
        for _ in 0..edits.len() {
            s.redo();
        }
        prop_assert_eq!(s.level(), &last);
    }

    #[test]
    fn share_tokens_round_trip(tiles in proptest::collection::vec(0usize..7, WIDTH * HEIGHT), spawn in any::<proptest::sample::Index>()) {
        let tiles = tiles.into_iter().map(|i| TileKind::ALL[i]).collect();
        let mut l = Level::from_tiles(WIDTH, HEIGHT, tiles).unwrap();
        let open: Vec<Cell> = l.cells().filter(|c| !l.get(*c).is_blocking()).collect();
        if !open.is_empty() {
            l.set_spawn(Some(*spawn.get(&open))).unwrap();
        }
        let token = encode_share_token(&l).unwrap();
        prop_assert_eq!(decode_share_token(&token).unwrap(), l.clone());
        let bytes = encode_bytes(&l).unwrap();
        let last = bytes.len() - 1;
        for delta in 1..=255u8 {
            let mut b = bytes.clone();
            b[last] ^= delta;
            prop_assert!(decode_bytes(&b).is_err());
        }
    }
}

#[test]
fn eighth_refresh_and_wand_rejected() {
    let mut s = Session::new("b", 4, &Noise).unwrap();
    for _ in 0..7 {
        s.refresh(&Noise).unwrap();
        s.apply_wand(Cell::new(3, 3)).unwrap();
    }
    assert!(matches!(s.refresh(&Noise), Err(EditError::RefreshBudget(7))));
    assert!(matches!(s.apply_wand(Cell::new(3, 3)), Err(EditError::WandBudget(7))));
    s.apply_brush(BrushStroke {
        suggestion_id: 0,
        size: BrushSize::ALL[3],
        anchor: Anchor::new(0, 0),
    })
    .unwrap();
    assert!(s.undo());
    assert!(s.apply_wand(Cell::new(3, 3)).unwrap_err().is_budget());
}
