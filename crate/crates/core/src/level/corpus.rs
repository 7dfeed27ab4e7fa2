use super::{CharMap, Level, LevelError};
use std::path::Path;

/// A parsed level and the file name it came from.
#[derive(Debug, Clone, PartialEq)]
pub struct CorpusLevel {
    pub name: String,
    pub level: Level,
}

/// Loads every `*.txt` file in `dir`, sorted by file name.
pub fn load_corpus(dir: &Path, map: &CharMap) -> Result<Vec<CorpusLevel>, LevelError> {
    let io = |source| LevelError::Io {
        path: dir.display().to_string(),
        source,
    };
    let mut paths: Vec<_> = std::fs::read_dir(dir)
        .map_err(io)?
        .collect::<Result<Vec<_>, _>>()
        .map_err(io)?
        .into_iter()
        .map(|e| e.path())
        .filter(|p| p.extension().is_some_and(|e| e == "txt"))
        .collect();
    paths.sort();
    paths
        .into_iter()
        .map(|path| {
            let text = std::fs::read_to_string(&path).map_err(|source| LevelError::Io {
                path: path.display().to_string(),
                source,
            })?;
            let level = map.parse_level(&text).map_err(|e| LevelError::Parse {
                path: path.display().to_string(),
                message: e.to_string(),
            })?;
            let name = path
                .file_name()
                .map(|n| n.to_string_lossy().into_owned())
                .unwrap_or_default();
            Ok(CorpusLevel { name, level })
        })
        .collect()
}
