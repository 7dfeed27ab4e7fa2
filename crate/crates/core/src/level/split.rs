use super::{CorpusLevel, LevelError, TileKind};
use serde::{Deserialize, Serialize};
use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;

pub const LEVELS_PER_THEME: usize = 50;

/// Training subsets. The first three each back one row of suggestions;
/// `All` backs the originality score.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Theme {
    Platform,
    Ladder,
    Gold,
    All,
}

impl Theme {
    /// Suggestion grid row order.
    pub const ROWS: [Theme; 3] = [Theme::Platform, Theme::Ladder, Theme::Gold];
    pub const EVERY: [Theme; 4] = [Theme::Gold, Theme::Platform, Theme::Ladder, Theme::All];

    pub fn name(self) -> &'static str {
        match self {
            Theme::Platform => "platform",
            Theme::Ladder => "ladder",
            Theme::Gold => "gold",
            Theme::All => "all",
        }
    }

    /// Row in the suggestion grid, `None` for `All`.
    pub fn row(self) -> Option<usize> {
        Self::ROWS.iter().position(|t| *t == self)
    }
}

impl fmt::Display for Theme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Theme {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Self::EVERY
            .into_iter()
            .find(|t| t.name().eq_ignore_ascii_case(s))
            .ok_or_else(|| format!("unknown theme {s:?}"))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct SplitFile {
    gold: Vec<String>,
    platform: Vec<String>,
    ladder: Vec<String>,
}

/// Level ids per theme. Gold, Platform and Ladder partition the corpus.
#[derive(Debug, Clone, PartialEq)]
pub struct DatasetSplit {
    gold: Vec<String>,
    platform: Vec<String>,
    ladder: Vec<String>,
    all: Vec<String>,
}

impl DatasetSplit {
    /// Validates a partition of `corpus_ids` into three sets of `per_theme` ids.
    pub fn new(
        gold: Vec<String>,
        platform: Vec<String>,
        ladder: Vec<String>,
        corpus_ids: &[String],
        per_theme: usize,
    ) -> Result<Self, LevelError> {
        let mut problems = Vec::new();
        let known: BTreeSet<&str> = corpus_ids.iter().map(String::as_str).collect();
        let mut owner: BTreeMap<&str, &str> = BTreeMap::new();
        for (name, ids) in [("gold", &gold), ("platform", &platform), ("ladder", &ladder)] {
            if ids.len() != per_theme {
                problems.push(format!("{name}: expected {per_theme} levels, found {}", ids.len()));
            }
            for id in ids {
                if !known.contains(id.as_str()) {
                    problems.push(format!("{name}: unknown level {id:?}"));
                }
                if let Some(prev) = owner.insert(id, name) {
                    problems.push(format!("level {id:?} appears in both {prev} and {name}"));
                }
            }
        }
        let missing: Vec<&str> = known.iter().filter(|id| !owner.contains_key(*id)).copied().collect();
        if !missing.is_empty() {
            problems.push(format!("levels in no set: {}", missing.join(", ")));
        }
        if !problems.is_empty() {
            return Err(LevelError::Split(problems.join("; ")));
        }
        Ok(Self {
            gold,
            platform,
            ladder,
            all: corpus_ids.to_vec(),
        })
    }

    pub fn ids(&self, theme: Theme) -> &[String] {
        match theme {
            Theme::Gold => &self.gold,
            Theme::Platform => &self.platform,
            Theme::Ladder => &self.ladder,
            Theme::All => &self.all,
        }
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(&SplitFile {
            gold: self.gold.clone(),
            platform: self.platform.clone(),
            ladder: self.ladder.clone(),
        })
        .expect("split serializes")
    }
}

/// Parses and validates a split file (TOML with `gold`, `platform` and
/// `ladder` arrays of level file names) against the corpus.
pub fn load_split(text: &str, corpus_ids: &[String]) -> Result<DatasetSplit, LevelError> {
    let file: SplitFile = toml::from_str(text).map_err(|e| LevelError::Split(e.to_string()))?;
    DatasetSplit::new(file.gold, file.platform, file.ladder, corpus_ids, LEVELS_PER_THEME)
}

/// Heuristic partition into three equal sets: most gold first, then the
/// most ladder tiles among the rest, remainder as platform levels. Ties are
/// broken by fewer solid/breakable tiles (denser platforms stay in the
/// platform set), then by name.
pub fn default_split(corpus: &[CorpusLevel]) -> Result<DatasetSplit, LevelError> {
    if corpus.is_empty() || !corpus.len().is_multiple_of(3) {
        return Err(LevelError::Split(format!(
            "corpus of {} levels cannot be split into three equal sets",
            corpus.len()
        )));
    }
    let per = corpus.len() / 3;
    let ground = |c: &CorpusLevel| c.level.count(TileKind::Solid) + c.level.count(TileKind::Breakable);
    let mut rest: Vec<&CorpusLevel> = corpus.iter().collect();
    let take = |rest: &mut Vec<&CorpusLevel>, key: TileKind| -> Vec<String> {
        rest.sort_by(|a, b| {
            b.level
                .count(key)
                .cmp(&a.level.count(key))
                .then(ground(a).cmp(&ground(b)))
                .then(a.name.cmp(&b.name))
        });
        let mut picked: Vec<String> = rest.drain(..per).map(|c| c.name.clone()).collect();
        picked.sort();
        picked
    };
    let gold = take(&mut rest, TileKind::Gold);
    let ladder = take(&mut rest, TileKind::Ladder);
    let mut platform: Vec<String> = rest.iter().map(|c| c.name.clone()).collect();
    platform.sort();
    let ids: Vec<String> = corpus.iter().map(|c| c.name.clone()).collect();
    DatasetSplit::new(gold, platform, ladder, &ids, per)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ids(prefix: &str, n: usize) -> Vec<String> {
        (0..n).map(|i| format!("{prefix}{i:03}")).collect()
    }

    fn corpus_ids() -> Vec<String> {
        [ids("g", 50), ids("p", 50), ids("l", 50)].concat()
    }

    fn toml_for(g: &[String], p: &[String], l: &[String]) -> String {
        toml::to_string(&SplitFile {
            gold: g.to_vec(),
            platform: p.to_vec(),
            ladder: l.to_vec(),
        })
        .unwrap()
    }

    #[test]
    fn valid_partition() {
        let text = toml_for(&ids("g", 50), &ids("p", 50), &ids("l", 50));
        let split = load_split(&text, &corpus_ids()).unwrap();
        assert_eq!(split.ids(Theme::Gold).len(), 50);
        assert_eq!(split.ids(Theme::All).len(), 150);
    }

    #[test]
    fn duplicate_id_is_named() {
        let mut p = ids("p", 50);
        p[0] = "g000".into();
        let err = load_split(&toml_for(&ids("g", 50), &p, &ids("l", 50)), &corpus_ids())
            .unwrap_err()
            .to_string();
        assert!(err.contains("\"g000\" appears in both gold and platform"), "{err}");
        assert!(err.contains("p000"), "missing id should be listed: {err}");
    }

    #[test]
    fn short_set_expects_fifty() {
        let mut l = ids("l", 50);
        l.pop();
        let err = load_split(&toml_for(&ids("g", 50), &ids("p", 50), &l), &corpus_ids())
            .unwrap_err()
            .to_string();
        assert!(err.contains("expected 50"), "{err}");
    }
}
