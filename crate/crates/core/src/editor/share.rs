//! Share tokens: `version | spawn col | spawn row | (run, tile)* | xor`,
//! base64url without padding. A missing spawn is stored as `0xFF 0xFF`.

use crate::level::{Cell, Level, TileKind, HEIGHT, WIDTH};
use base64::engine::general_purpose::URL_SAFE_NO_PAD;
use base64::Engine;
use thiserror::Error;

pub const TOKEN_VERSION: u8 = 1;
const NO_SPAWN: u8 = 0xFF;
const HEADER: usize = 3;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ShareError {
    #[error("token is not valid base64url: {0}")]
    Encoding(String),
    #[error("token is malformed: {0}")]
    Malformed(String),
    #[error("unsupported token version {found} (expected {expected})")]
    Version { found: u8, expected: u8 },
    #[error("checksum mismatch")]
    Checksum,
    #[error("runs cover more than {limit} cells")]
    Overflow { limit: usize },
    #[error("runs cover {found} cells, expected {expected}")]
    Length { found: usize, expected: usize },
    #[error("only {WIDTH}×{HEIGHT} levels can be shared, got {width}×{height}")]
    Shape { width: usize, height: usize },
}

fn checksum(bytes: &[u8]) -> u8 {
    bytes.iter().fold(0, |acc, b| acc ^ b)
}

/// Raw token bytes before base64; exposed for tests that corrupt them.
pub fn encode_bytes(level: &Level) -> Result<Vec<u8>, ShareError> {
    if !level.is_standard() {
        return Err(ShareError::Shape {
            width: level.width(),
            height: level.height(),
        });
    }
    let mut out = vec![TOKEN_VERSION];
    match level.spawn() {
        Some(c) => out.extend([c.col as u8, c.row as u8]),
        None => out.extend([NO_SPAWN, NO_SPAWN]),
    }
    let mut tiles = level.tiles().iter().peekable();
    while let Some(&t) = tiles.next() {
        let mut run = 1u8;
        while run < u8::MAX && tiles.peek() == Some(&&t) {
            tiles.next();
            run += 1;
        }
        out.extend([run, t.index() as u8]);
    }
    out.push(checksum(&out));
    Ok(out)
}

pub fn decode_bytes(bytes: &[u8]) -> Result<Level, ShareError> {
    if bytes.len() < HEADER + 1 {
        return Err(ShareError::Malformed(format!("{} bytes is too short", bytes.len())));
    }
    let (body, sum) = bytes.split_at(bytes.len() - 1);
    if checksum(body) != sum[0] {
        return Err(ShareError::Checksum);
    }
    if body[0] != TOKEN_VERSION {
        return Err(ShareError::Version {
            found: body[0],
            expected: TOKEN_VERSION,
        });
    }
    let runs = &body[HEADER..];
    if runs.len() % 2 != 0 {
        return Err(ShareError::Malformed("odd run-length payload".into()));
    }
    let area = WIDTH * HEIGHT;
    let mut tiles = Vec::with_capacity(area);
    for pair in runs.chunks_exact(2) {
        let (run, idx) = (pair[0] as usize, pair[1] as usize);
        if run == 0 {
            return Err(ShareError::Malformed("zero-length run".into()));
        }
        let tile =
            TileKind::from_index(idx).ok_or_else(|| ShareError::Malformed(format!("unknown tile index {idx}")))?;
        if tiles.len() + run > area {
            return Err(ShareError::Overflow { limit: area });
        }
        tiles.extend(std::iter::repeat_n(tile, run));
    }
    if tiles.len() != area {
        return Err(ShareError::Length {
            found: tiles.len(),
            expected: area,
        });
    }
    let mut level = Level::from_tiles(WIDTH, HEIGHT, tiles).map_err(|e| ShareError::Malformed(e.to_string()))?;
    let spawn = match (body[1], body[2]) {
        (NO_SPAWN, NO_SPAWN) => None,
        (c, r) => Some(Cell::new(c as usize, r as usize)),
    };
    level
        .set_spawn(spawn)
        .map_err(|e| ShareError::Malformed(e.to_string()))?;
    Ok(level)
}

pub fn encode_share_token(level: &Level) -> Result<String, ShareError> {
    Ok(URL_SAFE_NO_PAD.encode(encode_bytes(level)?))
}

pub fn decode_share_token(token: &str) -> Result<Level, ShareError> {
    let bytes = URL_SAFE_NO_PAD
        .decode(token.trim())
        .map_err(|e| ShareError::Encoding(e.to_string()))?;
    decode_bytes(&bytes)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_level_is_three_runs() {
        let bytes = encode_bytes(&Level::empty()).unwrap();
        assert_eq!(bytes, vec![1, 0xFF, 0xFF, 255, 6, 255, 6, 194, 6, 1 ^ 194 ^ 6]);
        let token = encode_share_token(&Level::empty()).unwrap();
        assert!(token.chars().all(|c| c.is_ascii_alphanumeric() || c == '-' || c == '_'));
        assert_eq!(decode_share_token(&token).unwrap(), Level::empty());
    }

    #[test]
    fn round_trip_with_spawn() {
        let mut l = crate::synth::generate(3, 4);
        l.set_spawn(Some(Cell::new(31, 0))).unwrap_or(());
        let t = encode_share_token(&l).unwrap();
        assert_eq!(decode_share_token(&t).unwrap(), l);
    }

    #[test]
    fn structured_errors() {
        assert!(matches!(decode_share_token("!!"), Err(ShareError::Encoding(_))));
        assert!(matches!(decode_bytes(&[1, 2]), Err(ShareError::Malformed(_))));

        let mut b = encode_bytes(&Level::empty()).unwrap();
        b[0] = 2;
        let n = b.len();
        b[n - 1] = checksum(&b[..n - 1]);
        assert_eq!(decode_bytes(&b), Err(ShareError::Version { found: 2, expected: 1 }));

        let seal = |mut v: Vec<u8>| {
            let s = checksum(&v);
            v.push(s);
            v
        };
        let over = seal(vec![1, 255, 255, 255, 6, 255, 6, 255, 6]);
        assert_eq!(decode_bytes(&over), Err(ShareError::Overflow { limit: 704 }));
        let short = seal(vec![1, 255, 255, 10, 6]);
        assert_eq!(
            decode_bytes(&short),
            Err(ShareError::Length {
                found: 10,
                expected: 704
            })
        );
        let bad_tile = seal(vec![1, 255, 255, 10, 9]);
        assert!(matches!(decode_bytes(&bad_tile), Err(ShareError::Malformed(_))));
        let solid_spawn = seal(vec![1, 0, 0, 255, 0, 255, 0, 194, 0]);
        assert!(matches!(decode_bytes(&solid_spawn), Err(ShareError::Malformed(_))));

        let small = Level::filled(3, 3, TileKind::Empty);
        assert!(matches!(encode_share_token(&small), Err(ShareError::Shape { .. })));
    }

    #[test]
    fn every_single_byte_change_is_rejected() {
        let good = encode_bytes(&crate::synth::generate(1, 2)).unwrap();
        for i in 0..good.len() {
            for delta in 1..=255u8 {
                let mut b = good.clone();
                b[i] ^= delta;
                assert!(decode_bytes(&b).is_err(), "byte {i} ^ {delta}");
            }
        }
    }
}
