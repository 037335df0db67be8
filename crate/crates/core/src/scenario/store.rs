use std::collections::{BTreeMap, HashMap};
use std::path::{Path, PathBuf};
use std::sync::{Arc, Mutex, RwLock};

use super::ValuationScenario;
use crate::error::{Error, Result};

/// Persistence for scenario documents, keyed by scenario id.
pub trait ScenarioStore: Send + Sync {
    fn get(&self, id: &str) -> Result<ValuationScenario>;
    /// Insert or replace.
    fn put(&self, scenario: &ValuationScenario) -> Result<()>;
    fn list(&self) -> Result<Vec<String>>;
}

#[derive(Debug, Default)]
pub struct MemoryStore {
    inner: RwLock<BTreeMap<String, ValuationScenario>>,
}

impl MemoryStore {
    pub fn new() -> Self {
        Self::default()
    }
}

impl ScenarioStore for MemoryStore {
    fn get(&self, id: &str) -> Result<ValuationScenario> {
        self.inner
            .read()
            .expect("store lock poisoned")
            .get(id)
            .cloned()
            .ok_or_else(|| Error::not_found("scenario", id))
    }

    fn put(&self, scenario: &ValuationScenario) -> Result<()> {
        scenario.validate()?;
        self.inner
            .write()
            .expect("store lock poisoned")
            .insert(scenario.id.clone(), scenario.clone());
        Ok(())
    }

    fn list(&self) -> Result<Vec<String>> {
        Ok(self
            .inner
            .read()
            .expect("store lock poisoned")
            .keys()
            .cloned()
            .collect())
    }
}

/// One JSON file per scenario in a directory. Writes to the same id are
/// serialized; reads are not locked.
#[derive(Debug)]
pub struct FileStore {
    dir: PathBuf,
    locks: Mutex<HashMap<String, Arc<Mutex<()>>>>,
}

fn valid_id(id: &str) -> bool {
    !id.is_empty()
        && id
            .chars()
            .all(|c| c.is_ascii_alphanumeric() || matches!(c, '-' | '_' | '.' | '+'))
        && !id.starts_with('.')
}

impl FileStore {
    pub fn open(dir: impl AsRef<Path>) -> Result<Self> {
        std::fs::create_dir_all(&dir)?;
        Ok(FileStore {
            dir: dir.as_ref().to_path_buf(),
            locks: Mutex::new(HashMap::new()),
        })
    }

    fn path(&self, id: &str) -> Result<PathBuf> {
        if !valid_id(id) {
            return Err(Error::invalid("/id", format!("{id:?} is not a storable scenario id")));
        }
        Ok(self.dir.join(format!("{id}.json")))
    }

    fn lock(&self, id: &str) -> Arc<Mutex<()>> {
        self.locks
            .lock()
            .expect("store lock poisoned")
            .entry(id.to_string())
            .or_default()
            .clone()
    }
}

impl ScenarioStore for FileStore {
    fn get(&self, id: &str) -> Result<ValuationScenario> {
        let path = self.path(id)?;
        match std::fs::read_to_string(&path) {
            Ok(s) => ValuationScenario::from_json(&s),
            Err(e) if e.kind() == std::io::ErrorKind::NotFound => {
                Err(Error::not_found("scenario", id))
            }
            Err(e) => Err(e.into()),
        }
    }

    fn put(&self, scenario: &ValuationScenario) -> Result<()> {
        scenario.validate()?;
        let path = self.path(&scenario.id)?;
        let lock = self.lock(&scenario.id);
        let _guard = lock.lock().expect("store lock poisoned");
        // write then rename so readers never see a torn file
        let tmp = path.with_extension("json.tmp");
        std::fs::write(&tmp, scenario.to_json() + "\n")?;
        std::fs::rename(&tmp, &path)?;
        Ok(())
    }

    fn list(&self) -> Result<Vec<String>> {
        let mut ids = Vec::new();
        for entry in std::fs::read_dir(&self.dir)? {
            let name = entry?.file_name();
            if let Some(id) = name.to_str().and_then(|n| n.strip_suffix(".json")) {
                ids.push(id.to_string());
            }
        }
        ids.sort();
        Ok(ids)
    }
}
