//! Sessions kept in memory and persisted as one JSON document each.

use std::collections::HashMap;
use std::path::{Path, PathBuf};
use std::sync::{Arc, Mutex as StdMutex};

use calliope_core::facts::GraphFact;
use calliope_core::graph::{parse_graph_with_warnings, Graph};
use calliope_core::pipeline::{CancelToken, Story};
use serde::{Deserialize, Serialize};
use thiserror::Error;
use tokio::sync::Mutex;

#[derive(Debug, Error)]
pub enum StoreError {
    #[error("unknown session '{0}'")]
    UnknownSession(String),
    #[error("session storage: {0}")]
    Io(#[from] std::io::Error),
    #[error("corrupt session document: {0}")]
    Corrupt(#[from] serde_json::Error),
    #[error(transparent)]
    Graph(#[from] calliope_core::Error),
}

/// The persisted part of a session.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SessionDoc {
    pub id: String,
    pub revision: u64,
    /// Uploaded graph document, reparsed on load.
    pub graph: String,
    pub story: Option<Story>,
}

pub struct Session {
    pub doc: SessionDoc,
    pub graph: Graph,
    /// Discovered facts by discovery seed; rebuilt on demand.
    pub pool: Option<(u64, Vec<GraphFact>)>,
}

impl Session {
    fn open(doc: SessionDoc) -> Result<Self, StoreError> {
        let (graph, _) = parse_graph_with_warnings(&doc.graph)?;
        Ok(Self { doc, graph, pool: None })
    }
}

struct Entry {
    session: Arc<Mutex<Session>>,
    cancel: Arc<StdMutex<CancelToken>>,
}

pub struct Store {
    dir: PathBuf,
    open: StdMutex<HashMap<String, Entry>>,
}

fn valid_id(id: &str) -> bool {
    !id.is_empty() && id.len() <= 64 && id.chars().all(|c| c.is_ascii_alphanumeric() || c == '-')
}

impl Store {
    pub fn new(dir: impl Into<PathBuf>) -> std::io::Result<Self> {
        let dir = dir.into();
        std::fs::create_dir_all(&dir)?;
        Ok(Self { dir, open: StdMutex::new(HashMap::new()) })
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    fn path(&self, id: &str) -> PathBuf {
        self.dir.join(format!("{id}.json"))
    }

    /// Registers a new session for an uploaded graph document.
    pub fn create(&self, document: String) -> Result<(String, Graph, Vec<String>), StoreError> {
        let (graph, warnings) = parse_graph_with_warnings(&document)?;
        let id = uuid::Uuid::new_v4().to_string();
        let doc = SessionDoc { id: id.clone(), revision: 0, graph: document, story: None };
        self.persist(&doc)?;
        let session = Session { doc, graph: graph.clone(), pool: None };
        self.open.lock().expect("store lock").insert(
            id.clone(),
            Entry { session: Arc::new(Mutex::new(session)), cancel: Arc::new(StdMutex::new(CancelToken::default())) },
        );
        Ok((id, graph, warnings))
    }

    /// The session, loading it from disk when it is not open yet.
    pub fn get(&self, id: &str) -> Result<Arc<Mutex<Session>>, StoreError> {
        if !valid_id(id) {
            return Err(StoreError::UnknownSession(id.to_string()));
        }
        let mut open = self.open.lock().expect("store lock");
        if let Some(e) = open.get(id) {
            return Ok(e.session.clone());
        }
        let text = match std::fs::read_to_string(self.path(id)) {
            Ok(t) => t,
            Err(e) if e.kind() == std::io::ErrorKind::NotFound => return Err(StoreError::UnknownSession(id.to_string())),
            Err(e) => return Err(e.into()),
        };
        let session = Arc::new(Mutex::new(Session::open(serde_json::from_str(&text)?)?));
        open.insert(id.to_string(), Entry { session: session.clone(), cancel: Arc::new(StdMutex::new(CancelToken::default())) });
        Ok(session)
    }

    /// A fresh token for a generation, replacing the previous one.
    pub fn begin(&self, id: &str) -> CancelToken {
        let open = self.open.lock().expect("store lock");
        let token = CancelToken::default();
        if let Some(e) = open.get(id) {
            *e.cancel.lock().expect("cancel lock") = token.clone();
        }
        token
    }

    /// Cancels the running generation of a session, if any.
    pub fn cancel(&self, id: &str) -> Result<(), StoreError> {
        let open = self.open.lock().expect("store lock");
        let e = open.get(id).ok_or_else(|| StoreError::UnknownSession(id.to_string()))?;
        e.cancel.lock().expect("cancel lock").cancel();
        Ok(())
    }

    /// Writes the document through a temporary file and a rename.
    pub fn persist(&self, doc: &SessionDoc) -> Result<(), StoreError> {
        let tmp = self.dir.join(format!("{}.json.tmp", doc.id));
        std::fs::write(&tmp, serde_json::to_vec(doc)?)?;
        std::fs::rename(&tmp, self.path(&doc.id))?;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const TRIANGLE: &str = r#"{"name": "t", "nodes": [{"id": "a"}, {"id": "b"}, {"id": "c"}], "edges": [{"source": "a", "target": "b"}, {"source": "b", "target": "c"}]}"#;

    #[test]
    fn sessions_survive_a_restart() {
        let dir = tempfile::tempdir().unwrap();
        let id = {
            let store = Store::new(dir.path()).unwrap();
            store.create(TRIANGLE.to_string()).unwrap().0
        };
        let store = Store::new(dir.path()).unwrap();
        let s = store.get(&id).unwrap();
        let s = s.try_lock().unwrap();
        assert_eq!(s.graph.node_count(), 3);
        assert_eq!(s.doc.revision, 0);
        assert!(matches!(store.get("../etc"), Err(StoreError::UnknownSession(_))));
        assert!(matches!(store.get("missing"), Err(StoreError::UnknownSession(_))));
    }
}
