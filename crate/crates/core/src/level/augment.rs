use super::{encode_onehot, Level, OneHotGrid};
use crate::par;

/// Total columns of Solid padding added around each level.
pub const MAX_PAD: usize = 10;

/// 11 paddings × (identity, mirror).
pub const AUGMENTS_PER_LEVEL: usize = 2 * (MAX_PAD + 1);

/// Expands each level into 22 training grids: left padding 0..=10, each
/// followed by its left–right mirror. Output order is level, then padding,
/// then identity before mirror.
pub fn augment(levels: &[Level]) -> Vec<OneHotGrid> {
    par::map(levels, |level| {
        let mut out = Vec::with_capacity(AUGMENTS_PER_LEVEL);
        for pad in 0..=MAX_PAD {
            let g = encode_onehot(level, pad).expect("pad within range");
            let m = g.mirrored();
            out.push(g);
            out.push(m);
        }
        out
    })
    .into_iter()
    .flatten()
    .collect()
}
