use super::{Cell, Level, LevelError, TileKind, HEIGHT, WIDTH};
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::path::Path;

/// What a character in a level file stands for.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Glyph {
    Tile(TileKind),
    Spawn,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct CharMapFile {
    spawn: char,
    tiles: BTreeMap<char, TileKind>,
    #[serde(default)]
    aliases: BTreeMap<char, TileKind>,
}

/// Character ↔ tile mapping for level text files. `tiles` must name every
/// tile kind exactly once (that character is used when writing); `aliases`
/// are accepted on read only.
#[derive(Debug, Clone, PartialEq)]
pub struct CharMap {
    spawn: char,
    read: BTreeMap<char, TileKind>,
    write: [char; TileKind::COUNT],
}

impl Default for CharMap {
    /// VGLC Lode Runner conventions.
    fn default() -> Self {
        let tiles = TileKind::ALL.iter().map(|t| (t.glyph(), *t)).collect();
        Self::from_file(CharMapFile {
            spawn: 'M',
            tiles,
            aliases: BTreeMap::new(),
        })
        .expect("default map is valid")
    }
}

impl CharMap {
    fn from_file(file: CharMapFile) -> Result<Self, LevelError> {
        let mut write = [None; TileKind::COUNT];
        for (c, t) in &file.tiles {
            if let Some(prev) = write[t.index()].replace(*c) {
                return Err(LevelError::CharMap(format!(
                    "tile {t} mapped from both {prev:?} and {c:?}; move one to [aliases]"
                )));
            }
        }
        let mut out = ['?'; TileKind::COUNT];
        for t in TileKind::ALL {
            out[t.index()] =
                write[t.index()].ok_or_else(|| LevelError::CharMap(format!("no character for tile {t}")))?;
        }
        let mut read = file.tiles;
        for (c, t) in file.aliases {
            if read.insert(c, t).is_some() {
                return Err(LevelError::CharMap(format!("{c:?} listed twice")));
            }
        }
        if read.contains_key(&file.spawn) {
            return Err(LevelError::CharMap(format!(
                "spawn character {:?} also maps to a tile",
                file.spawn
            )));
        }
        Ok(Self {
            spawn: file.spawn,
            read,
            write: out,
        })
    }

    pub fn from_toml(text: &str) -> Result<Self, LevelError> {
        let file: CharMapFile = toml::from_str(text).map_err(|e| LevelError::CharMap(e.to_string()))?;
        Self::from_file(file)
    }

    pub fn load(path: &Path) -> Result<Self, LevelError> {
        let text = std::fs::read_to_string(path).map_err(|source| LevelError::Io {
            path: path.display().to_string(),
            source,
        })?;
        Self::from_toml(&text)
    }

    pub fn to_toml(&self) -> String {
        let file = CharMapFile {
            spawn: self.spawn,
            tiles: TileKind::ALL.iter().map(|t| (self.write[t.index()], *t)).collect(),
            aliases: self
                .read
                .iter()
                .filter(|(c, t)| self.write[t.index()] != **c)
                .map(|(c, t)| (*c, *t))
                .collect(),
        };
        toml::to_string(&file).expect("char map serializes")
    }

    pub fn glyph(&self, c: char) -> Option<Glyph> {
        if c == self.spawn {
            Some(Glyph::Spawn)
        } else {
            self.read.get(&c).map(|t| Glyph::Tile(*t))
        }
    }

    pub fn char_for(&self, tile: TileKind) -> char {
        self.write[tile.index()]
    }

    pub fn spawn_char(&self) -> char {
        self.spawn
    }

    /// Parses a 22-line × 32-column level. The spawn character becomes an
    /// Empty tile plus the level's spawn; unknown characters become Empty
    /// with a warning.
    pub fn parse_level(&self, text: &str) -> Result<Level, LevelError> {
        self.parse_level_sized(text, WIDTH, HEIGHT)
    }

    pub fn parse_level_sized(&self, text: &str, width: usize, height: usize) -> Result<Level, LevelError> {
        if text.trim().is_empty() {
            return Err(LevelError::Empty);
        }
        let lines: Vec<&str> = text.lines().map(|l| l.strip_suffix('\r').unwrap_or(l)).collect();
        // Tolerate trailing blank lines.
        let lines: Vec<&str> = {
            let mut end = lines.len();
            while end > 0 && lines[end - 1].is_empty() {
                end -= 1;
            }
            lines[..end].to_vec()
        };
        if lines.len() != height {
            return Err(LevelError::LineCount {
                expected: height,
                found: lines.len(),
            });
        }
        let mut tiles = Vec::with_capacity(width * height);
        let mut spawn = None;
        for (r, line) in lines.iter().enumerate() {
            let found = line.chars().count();
            if found != width {
                return Err(LevelError::LineWidth {
                    line: r + 1,
                    expected: width,
                    found,
                });
            }
            for (c, ch) in line.chars().enumerate() {
                let tile = match self.glyph(ch) {
                    Some(Glyph::Tile(t)) => t,
                    Some(Glyph::Spawn) => {
                        if spawn.is_none() {
                            spawn = Some(Cell::new(c, r));
                        } else {
                            log::warn!("extra spawn at line {}, column {} ignored", r + 1, c + 1);
                        }
                        TileKind::Empty
                    }
                    None => {
                        log::warn!(
                            "unknown character {ch:?} at line {}, column {}; using empty",
                            r + 1,
                            c + 1
                        );
                        TileKind::Empty
                    }
                };
                tiles.push(tile);
            }
        }
        let mut level = Level::from_tiles(width, height, tiles)?;
        level.set_spawn(spawn)?;
        Ok(level)
    }

    /// Writes a level as newline-terminated lines.
    pub fn serialize_level(&self, level: &Level) -> String {
        let mut out = String::with_capacity((level.width() + 1) * level.height());
        for r in 0..level.height() {
            for c in 0..level.width() {
                let cell = Cell::new(c, r);
                if level.spawn() == Some(cell) {
                    out.push(self.spawn);
                } else {
                    out.push(self.char_for(level.get(cell)));
                }
            }
            out.push('\n');
        }
        out
    }
}
