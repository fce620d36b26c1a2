//! In-memory truth-mask sessions with an idle TTL.

use std::sync::{Arc, Mutex};
use std::time::{Duration, Instant, SystemTime, UNIX_EPOCH};

use dashmap::DashMap;
use sha2::{Digest, Sha256};
use uuid::Uuid;

use segsynth::mask_io::{extract_contour, BinaryMask, Contour, MaskError};

/// An uploaded truth mask. Never mutated after creation.
#[derive(Debug)]
pub struct Session {
    pub id: Uuid,
    pub truth: BinaryMask,
    pub contour: Contour,
    pub digest: String,
    pub created_unix: u64,
    last_seen: Mutex<Instant>,
}

impl Session {
    fn touch(&self, now: Instant) {
        *self.last_seen.lock().expect("lock poisoned") = now;
    }

    fn idle(&self, now: Instant) -> Duration {
        now.saturating_duration_since(*self.last_seen.lock().expect("lock poisoned"))
    }
}

/// Hex SHA-256 over the frame size and the row-major labels.
pub fn mask_digest(mask: &BinaryMask) -> String {
    let mut h = Sha256::new();
    h.update((mask.width() as u64).to_le_bytes());
    h.update((mask.height() as u64).to_le_bytes());
    h.update(mask.data().iter().map(|&v| v as u8).collect::<Vec<u8>>());
    h.finalize().iter().map(|b| format!("{b:02x}")).collect()
}

#[derive(Debug)]
pub struct SessionStore {
    sessions: DashMap<Uuid, Arc<Session>>,
    ttl: Duration,
}

impl SessionStore {
    pub fn new(ttl: Duration) -> Self {
        Self {
            sessions: DashMap::new(),
            ttl,
        }
    }

    pub fn ttl(&self) -> Duration {
        self.ttl
    }

    /// Extracts the truth contour once and stores a new session.
    pub fn create(&self, truth: BinaryMask) -> Result<Arc<Session>, MaskError> {
        let contour = extract_contour(&truth)?;
        let session = Arc::new(Session {
            id: Uuid::new_v4(),
            digest: mask_digest(&truth),
            truth,
            contour,
            created_unix: SystemTime::now()
                .duration_since(UNIX_EPOCH)
                .map_or(0, |d| d.as_secs()),
            last_seen: Mutex::new(Instant::now()),
        });
        self.sessions.insert(session.id, Arc::clone(&session));
        Ok(session)
    }

    /// Looks a session up and refreshes its idle timer. Expired sessions are
    /// dropped on the way.
    pub fn get(&self, id: Uuid) -> Option<Arc<Session>> {
        let now = Instant::now();
        let session = self.sessions.get(&id).map(|s| Arc::clone(&s))?;
        if session.idle(now) > self.ttl {
            self.sessions.remove(&id);
            return None;
        }
        session.touch(now);
        Some(session)
    }

    /// Removes every session idle for longer than the TTL.
    pub fn purge_expired(&self) -> usize {
        let now = Instant::now();
        let before = self.sessions.len();
        self.sessions.retain(|_, s| s.idle(now) <= self.ttl);
        before - self.sessions.len()
    }

    pub fn len(&self) -> usize {
        self.sessions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sessions.is_empty()
    }
}
