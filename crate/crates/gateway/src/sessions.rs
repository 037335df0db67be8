use std::collections::HashMap;
use std::sync::{Arc, Mutex};
use std::time::{Duration, Instant, SystemTime, UNIX_EPOCH};

use datavalor::screening::ScreeningSession;
use datavalor::{Error, Result};
use serde::Serialize;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SessionKind {
    Screening,
    Valuation,
}

#[derive(Debug)]
pub struct SessionEntry {
    pub session_id: String,
    pub kind: SessionKind,
    /// Seconds since the Unix epoch.
    pub created_at: u64,
    pub screening: ScreeningSession,
}

struct Slot {
    entry: Arc<tokio::sync::Mutex<SessionEntry>>,
    last_seen: Instant,
}

/// Live screening sessions. Each entry sits behind its own async mutex so
/// answers to one session are applied strictly one at a time.
pub struct SessionRegistry {
    idle: Duration,
    slots: Mutex<HashMap<String, Slot>>,
}

impl SessionRegistry {
    pub fn new(idle: Duration) -> Self {
        SessionRegistry {
            idle,
            slots: Mutex::new(HashMap::new()),
        }
    }

    fn sweep(&self, slots: &mut HashMap<String, Slot>) {
        let now = Instant::now();
        slots.retain(|_, s| now.duration_since(s.last_seen) < self.idle);
    }

    pub fn create(&self, screening: ScreeningSession) -> Arc<tokio::sync::Mutex<SessionEntry>> {
        let session_id = uuid::Uuid::new_v4().simple().to_string();
        let created_at = SystemTime::now()
            .duration_since(UNIX_EPOCH)
            .map_or(0, |d| d.as_secs());
        let entry = Arc::new(tokio::sync::Mutex::new(SessionEntry {
            session_id: session_id.clone(),
            kind: SessionKind::Screening,
            created_at,
            screening,
        }));
        let mut slots = self.slots.lock().expect("session table poisoned");
        self.sweep(&mut slots);
        slots.insert(
            session_id,
            Slot {
                entry: entry.clone(),
                last_seen: Instant::now(),
            },
        );
        entry
    }

    /// Look up a session and mark it as used.
    pub fn get(&self, id: &str) -> Result<Arc<tokio::sync::Mutex<SessionEntry>>> {
        let mut slots = self.slots.lock().expect("session table poisoned");
        self.sweep(&mut slots);
        let slot = slots
            .get_mut(id)
            .ok_or_else(|| Error::not_found("session", id))?;
        slot.last_seen = Instant::now();
        Ok(slot.entry.clone())
    }

    pub fn len(&self) -> usize {
        let mut slots = self.slots.lock().expect("session table poisoned");
        self.sweep(&mut slots);
        slots.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use datavalor::screening::{start_session, DecisionTree};

    fn session() -> ScreeningSession {
        start_session(&DecisionTree::step_one()).unwrap()
    }

    #[test]
    fn ids_are_unique() {
        let r = SessionRegistry::new(Duration::from_secs(60));
        let a = r.create(session());
        let b = r.create(session());
        assert_ne!(a.try_lock().unwrap().session_id, b.try_lock().unwrap().session_id);
        assert_eq!(r.len(), 2);
    }

    #[test]
    fn idle_sessions_expire() {
        let r = SessionRegistry::new(Duration::from_millis(20));
        let id = r.create(session()).try_lock().unwrap().session_id.clone();
        assert!(r.get(&id).is_ok());
        std::thread::sleep(Duration::from_millis(40));
        assert!(r.get(&id).is_err());
        assert!(r.is_empty());
    }

    #[test]
    fn unknown_session() {
        let r = SessionRegistry::new(Duration::from_secs(60));
        assert_eq!(r.get("nope").unwrap_err().code(), "not_found");
    }
}
