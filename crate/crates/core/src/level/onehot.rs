use super::{Level, LevelError, TileKind, MAX_PAD, WIDTH};
use serde::{Deserialize, Serialize};

/// Width of an encoded editor level: 32 columns plus 10 columns of padding.
pub const PADDED_WIDTH: usize = WIDTH + MAX_PAD;

/// Left padding used when encoding editor levels at inference time.
pub const CENTER_PAD: usize = 5;

/// `height × width × 7` tile distributions, flattened row-major with the
/// channel index fastest, so each tile is seven consecutive values.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OneHotGrid {
    height: usize,
    width: usize,
    data: Vec<f32>,
}

impl OneHotGrid {
    pub const CHANNELS: usize = TileKind::COUNT;

    pub fn from_vec(height: usize, width: usize, data: Vec<f32>) -> Result<Self, LevelError> {
        if data.len() != height * width * Self::CHANNELS {
            return Err(LevelError::GridShape {
                height: data.len() / (width * Self::CHANNELS).max(1),
                width,
                expected_height: height,
                expected_width: width,
            });
        }
        Ok(Self { height, width, data })
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn data(&self) -> &[f32] {
        &self.data
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn channels(&self, row: usize, col: usize) -> &[f32] {
        let i = (row * self.width + col) * Self::CHANNELS;
        &self.data[i..i + Self::CHANNELS]
    }

    /// Highest-probability tile; ties go to the lowest channel index.
    pub fn argmax(&self, row: usize, col: usize) -> TileKind {
        let ch = self.channels(row, col);
        let mut best = 0;
        for k in 1..Self::CHANNELS {
            if ch[k] > ch[best] {
                best = k;
            }
        }
        TileKind::from_index(best).expect("channel index in range")
    }

    /// Left–right mirror image.
    pub fn mirrored(&self) -> Self {
        let c = Self::CHANNELS;
        let mut data = Vec::with_capacity(self.data.len());
        for row in self.data.chunks(self.width * c) {
            for col in row.chunks(c).rev() {
                data.extend_from_slice(col);
            }
        }
        Self {
            height: self.height,
            width: self.width,
            data,
        }
    }
}

/// One-hot encodes a level with `left_pad` Solid columns on the left and
/// `10 - left_pad` on the right. The spawn is not encoded.
pub fn encode_onehot(level: &Level, left_pad: usize) -> Result<OneHotGrid, LevelError> {
    if left_pad > MAX_PAD {
        return Err(LevelError::Pad(left_pad));
    }
    let width = level.width() + MAX_PAD;
    let c = OneHotGrid::CHANNELS;
    let mut data = vec![0.0f32; level.height() * width * c];
    for row in 0..level.height() {
        for col in 0..width {
            let tile = if col < left_pad || col >= left_pad + level.width() {
                TileKind::Solid
            } else {
                level.tiles()[row * level.width() + col - left_pad]
            };
            data[(row * width + col) * c + tile.index()] = 1.0;
        }
    }
    Ok(OneHotGrid {
        height: level.height(),
        width,
        data,
    })
}

/// Argmax-decodes the central columns (the inverse of `encode_onehot(_, 5)`).
pub fn decode_onehot(grid: &OneHotGrid) -> Level {
    decode_onehot_at(grid, CENTER_PAD).expect("center crop fits any padded grid")
}

/// Argmax-decodes the columns that `encode_onehot(_, left_pad)` filled.
pub fn decode_onehot_at(grid: &OneHotGrid, left_pad: usize) -> Result<Level, LevelError> {
    if left_pad > MAX_PAD || grid.width < MAX_PAD {
        return Err(LevelError::Pad(left_pad));
    }
    let inner = grid.width - MAX_PAD;
    let mut tiles = Vec::with_capacity(inner * grid.height);
    for row in 0..grid.height {
        for col in left_pad..left_pad + inner {
            tiles.push(grid.argmax(row, col));
        }
    }
    Level::from_tiles(inner, grid.height, tiles)
}

#[cfg(test)]
mod tests {
    use super::super::{Cell, HEIGHT};
    use super::*;
    use proptest::prelude::*;

    fn arb_level() -> impl Strategy<Value = Level> {
        (
            proptest::collection::vec(0usize..7, WIDTH * HEIGHT),
            proptest::option::of((0usize..WIDTH, 0usize..HEIGHT)),
        )
            .prop_map(|(idx, spawn)| {
                let tiles = idx.into_iter().map(|i| TileKind::from_index(i).unwrap()).collect();
                let mut l = Level::from_tiles(WIDTH, HEIGHT, tiles).unwrap();
                if let Some((c, r)) = spawn {
                    let cell = Cell::new(c, r);
                    if !l.get(cell).is_blocking() {
                        l.set_spawn(Some(cell)).unwrap();
                    }
                }
                l
            })
    }

    #[test]
    fn right_padding_is_solid() {
        let g = encode_onehot(&Level::empty(), 0).unwrap();
        assert_eq!(g.len(), 22 * 42 * 7);
        for r in 0..HEIGHT {
            for c in 0..PADDED_WIDTH {
                let want = if c >= 32 { TileKind::Solid } else { TileKind::Empty };
                assert_eq!(g.argmax(r, c), want);
            }
        }
    }

    #[test]
    fn pad_out_of_range() {
        assert!(matches!(encode_onehot(&Level::empty(), 11), Err(LevelError::Pad(11))));
    }

    #[test]
    fn uniform_distribution_decodes_to_channel_zero() {
        let g = OneHotGrid::from_vec(HEIGHT, PADDED_WIDTH, vec![1.0 / 7.0; HEIGHT * PADDED_WIDTH * 7]).unwrap();
        assert!(decode_onehot(&g).tiles().iter().all(|t| *t == TileKind::Solid));
    }

    proptest! {
        #[test]
        fn encode_decode_is_identity(level in arb_level(), pad in 0usize..=10) {
            let g = encode_onehot(&level, pad).unwrap();
            for cell in g.data().chunks(7) {
                prop_assert_eq!(cell.iter().sum::<f32>(), 1.0);
            }
            prop_assert_eq!(decode_onehot_at(&g, pad).unwrap(), level.without_spawn());
        }

        #[test]
        fn small_noise_does_not_change_argmax(level in arb_level(), seed in any::<u64>()) {
            use rand::{Rng, SeedableRng};
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
            let g = encode_onehot(&level, CENTER_PAD).unwrap();
            let noisy: Vec<f32> = g
                .data()
                .iter()
                .map(|v| if *v == 1.0 { 1.0 - rng.random_range(0.0..0.4f32) } else { rng.random_range(0.0..0.4f32) })
                .collect();
            let noisy = OneHotGrid::from_vec(g.height(), g.width(), noisy).unwrap();
            // Peak stays ≥ 0.6 while off-peak entries stay < 0.4.
            prop_assert_eq!(decode_onehot(&noisy), level.without_spawn());
        }

        #[test]
        fn grid_mirror_matches_level_mirror(level in arb_level(), pad in 0usize..=10) {
            let a = encode_onehot(&level, pad).unwrap().mirrored();
            let b = encode_onehot(&level.mirrored(), 10 - pad).unwrap();
            prop_assert_eq!(a, b);
        }
    }
}
