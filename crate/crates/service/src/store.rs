use crate::journal::{read_records, Journal, JournalRecord};
use crate::{ApiError, ServiceError};
use lode_core::editor::Session;
use parking_lot::{Mutex, RwLock};
use serde::{Deserialize, Serialize};
use std::collections::{HashMap, HashSet};
use std::path::{Path, PathBuf};
use std::sync::Arc;

const JOURNAL_FILE: &str = "journal.jsonl";
const SNAPSHOT_FILE: &str = "snapshot.json";

#[derive(Default, Serialize, Deserialize)]
struct Snapshot {
    sessions: Vec<Session>,
    expired: Vec<String>,
}

/// Live sessions plus the journal that can rebuild them.
pub struct SessionStore {
    dir: PathBuf,
    journal: Journal,
    sessions: RwLock<HashMap<String, Arc<Mutex<Session>>>>,
    expired: Mutex<HashSet<String>>,
}

impl SessionStore {
    pub fn open(dir: &Path) -> Result<Self, ServiceError> {
        std::fs::create_dir_all(dir).map_err(|source| ServiceError::Io {
            path: dir.to_path_buf(),
            source,
        })?;
        let journal = Journal::open(dir.join(JOURNAL_FILE))?;
        let snapshot = load_snapshot(&dir.join(SNAPSHOT_FILE))?;
        let records = read_records(journal.path())?;
        let (sessions, expired) = recover(snapshot, &records, journal.path())?;
        log::info!(
            "restored {} sessions from {} journal records",
            sessions.len(),
            records.len()
        );
        Ok(Self {
            dir: dir.to_path_buf(),
            journal,
            sessions: RwLock::new(
                sessions
                    .into_iter()
                    .map(|(id, s)| (id, Arc::new(Mutex::new(s))))
                    .collect(),
            ),
            expired: Mutex::new(expired),
        })
    }

    pub fn journal(&self) -> &Journal {
        &self.journal
    }

    pub fn len(&self) -> usize {
        self.sessions.read().len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn ids(&self) -> Vec<String> {
        let mut ids: Vec<_> = self.sessions.read().keys().cloned().collect();
        ids.sort();
        ids
    }

    /// Journals a new session's log, then makes it visible.
    pub fn insert(&self, session: Session) -> Result<(), ServiceError> {
        self.journal.append(&records(&session, 0))?;
        self.sessions
            .write()
            .insert(session.id().to_string(), Arc::new(Mutex::new(session)));
        Ok(())
    }

    /// Read-only access to a session.
    pub fn read<T>(&self, id: &str, f: impl FnOnce(&Session) -> T) -> Result<T, ApiError> {
        let handle = self.handle(id)?;
        let guard = handle.lock();
        Ok(f(&guard))
    }

    /// Runs `f` on a copy of the session; new events are journaled before the
    /// copy replaces the live session, so a failed append changes nothing.
    pub fn update<T>(&self, id: &str, f: impl FnOnce(&mut Session) -> Result<T, ApiError>) -> Result<T, ApiError> {
        let handle = self.handle(id)?;
        let mut guard = handle.lock();
        let mut work = guard.clone();
        let before = work.events().len();
        let out = f(&mut work)?;
        self.journal.append(&records(&work, before))?;
        *guard = work;
        Ok(out)
    }

    fn handle(&self, id: &str) -> Result<Arc<Mutex<Session>>, ApiError> {
        self.sessions
            .read()
            .get(id)
            .cloned()
            .ok_or_else(|| ApiError::not_found(id))
    }

    /// Removes sessions idle for longer than `idle_ms`; returns how many.
    pub fn expire_idle(&self, now_ms: u64, idle_ms: u64) -> usize {
        let mut sessions = self.sessions.write();
        let stale: Vec<String> = sessions
            .iter()
            .filter(|(_, s)| now_ms.saturating_sub(s.lock().updated_at()) > idle_ms)
            .map(|(id, _)| id.clone())
            .collect();
        let mut expired = self.expired.lock();
        for id in &stale {
            sessions.remove(id);
            expired.insert(id.clone());
        }
        stale.len()
    }

    /// Writes all live sessions atomically (temp file + rename).
    pub fn write_snapshot(&self) -> Result<(), ServiceError> {
        let handles: Vec<_> = self.sessions.read().values().cloned().collect();
        let mut snap = Snapshot {
            sessions: handles.iter().map(|h| h.lock().clone()).collect(),
            expired: self.expired.lock().iter().cloned().collect(),
        };
        snap.sessions.sort_by(|a, b| a.id().cmp(b.id()));
        snap.expired.sort();
        let path = self.dir.join(SNAPSHOT_FILE);
        let tmp = self.dir.join(format!("{SNAPSHOT_FILE}.tmp"));
        let io = |source| ServiceError::Io {
            path: tmp.clone(),
            source,
        };
        let bytes = serde_json::to_vec(&snap).expect("snapshot serializes");
        std::fs::write(&tmp, bytes).map_err(io)?;
        std::fs::rename(&tmp, &path).map_err(|source| ServiceError::Io {
            path: path.clone(),
            source,
        })
    }
}

fn records(session: &Session, from: usize) -> Vec<JournalRecord> {
    session.events()[from..]
        .iter()
        .map(|event| JournalRecord {
            session: session.id().to_string(),
            seed: session.seed(),
            event: event.clone(),
        })
        .collect()
}

fn load_snapshot(path: &Path) -> Result<Snapshot, ServiceError> {
    match std::fs::read(path) {
        Ok(bytes) => serde_json::from_slice(&bytes).map_err(|e| ServiceError::Corrupt {
            path: path.to_path_buf(),
            line: e.line(),
            message: e.to_string(),
        }),
        Err(e) if e.kind() == std::io::ErrorKind::NotFound => Ok(Snapshot::default()),
        Err(source) => Err(ServiceError::Io {
            path: path.to_path_buf(),
            source,
        }),
    }
}

/// Starts from the snapshot and applies every journal record the snapshot
/// does not already contain (records are counted per session).
fn recover(
    snapshot: Snapshot,
    journal: &[JournalRecord],
    path: &Path,
) -> Result<(HashMap<String, Session>, HashSet<String>), ServiceError> {
    let expired: HashSet<String> = snapshot.expired.into_iter().collect();
    let mut sessions: HashMap<String, Session> =
        snapshot.sessions.into_iter().map(|s| (s.id().to_string(), s)).collect();
    let mut seen: HashMap<&str, usize> = HashMap::new();
    for (line, rec) in journal.iter().enumerate() {
        if expired.contains(&rec.session) {
            continue;
        }
        let corrupt = |message: String| ServiceError::Corrupt {
            path: path.to_path_buf(),
            line: line + 1,
            message,
        };
        let n = seen.entry(rec.session.as_str()).or_default();
        let index = *n;
        *n += 1;
        match sessions.get_mut(&rec.session) {
            Some(s) if index < s.events().len() => {}
            Some(s) => s
                .apply_event(&rec.event)
                .map_err(|e| corrupt(format!("session {}: {e}", rec.session)))?,
            None if index == 0 => {
                let s = Session::replay(rec.session.clone(), rec.seed, std::slice::from_ref(&rec.event))
                    .map_err(|e| corrupt(format!("session {}: {e}", rec.session)))?;
                sessions.insert(rec.session.clone(), s);
            }
            None => {
                return Err(corrupt(format!("session {} has no start record", rec.session)));
            }
        }
    }
    Ok((sessions, expired))
}
