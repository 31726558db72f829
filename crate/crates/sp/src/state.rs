//! Shared tables: pending requests, the replay cache and live sessions.

use std::collections::HashMap;
use std::sync::Mutex;

use hbe_core::Timestamp;

/// Consumed assertion ids, each remembered until its expiry.
#[derive(Debug, Default)]
pub struct ReplayCache {
    entries: Mutex<HashMap<String, Timestamp>>,
}

impl ReplayCache {
    pub fn new() -> Self {
        Self::default()
    }

    /// Admits `id` if it is not already present. Check and insert happen
    /// under one lock, so concurrent callers with the same id see exactly
    /// one `true`.
    pub fn check_and_insert(&self, id: &str, expires_at: Timestamp, now: Timestamp) -> bool {
        let mut entries = self.entries.lock().expect("replay cache poisoned");
        entries.retain(|_, exp| *exp > now);
        if entries.contains_key(id) {
            return false;
        }
        entries.insert(id.to_owned(), expires_at);
        true
    }

    pub fn len(&self) -> usize {
        self.entries.lock().expect("replay cache poisoned").len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PendingRequest {
    pub issued_at: Timestamp,
    pub answered: bool,
}

/// Outstanding AuthnRequests. Answered entries are kept until the window
/// closes so that a replayed response is classified by the replay cache
/// rather than looking unsolicited.
#[derive(Debug)]
pub struct PendingRequests {
    window: i64,
    entries: Mutex<HashMap<String, PendingRequest>>,
}

impl PendingRequests {
    pub fn new(window_secs: i64) -> Self {
        Self {
            window: window_secs,
            entries: Mutex::new(HashMap::new()),
        }
    }

    fn evict(&self, entries: &mut HashMap<String, PendingRequest>, now: Timestamp) {
        entries.retain(|_, p| p.issued_at.plus(self.window) > now);
    }

    pub fn record(&self, id: &str, now: Timestamp) {
        let mut entries = self.entries.lock().expect("pending table poisoned");
        self.evict(&mut entries, now);
        entries.insert(
            id.to_owned(),
            PendingRequest {
                issued_at: now,
                answered: false,
            },
        );
    }

    pub fn get(&self, id: &str, now: Timestamp) -> Option<PendingRequest> {
        let mut entries = self.entries.lock().expect("pending table poisoned");
        self.evict(&mut entries, now);
        entries.get(id).copied()
    }

    /// Marks the request answered; false if it was already answered or is
    /// gone.
    pub fn answer(&self, id: &str, now: Timestamp) -> bool {
        let mut entries = self.entries.lock().expect("pending table poisoned");
        self.evict(&mut entries, now);
        match entries.get_mut(id) {
            Some(p) if !p.answered => {
                p.answered = true;
                true
            }
            _ => false,
        }
    }

    pub fn len(&self) -> usize {
        self.entries.lock().expect("pending table poisoned").len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ResourceSession {
    pub token: String,
    pub subject: String,
    pub expires_at: Timestamp,
}

#[derive(Debug, Default)]
pub struct Sessions {
    entries: Mutex<HashMap<String, ResourceSession>>,
}

impl Sessions {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(&self, session: ResourceSession, now: Timestamp) {
        let mut entries = self.entries.lock().expect("session table poisoned");
        entries.retain(|_, s| s.expires_at > now);
        entries.insert(session.token.clone(), session);
    }

    pub fn lookup(&self, token: &str, now: Timestamp) -> Option<ResourceSession> {
        let entries = self.entries.lock().expect("session table poisoned");
        entries.get(token).filter(|s| s.expires_at > now).cloned()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn replay_cache_admits_once_until_expiry() {
        let c = ReplayCache::new();
        assert!(c.check_and_insert("a", Timestamp(100), Timestamp(0)));
        assert!(!c.check_and_insert("a", Timestamp(100), Timestamp(99)));
        assert!(c.check_and_insert("b", Timestamp(50), Timestamp(0)));
        // Both expire; the table empties and "a" may be stored again.
        assert!(c.check_and_insert("a", Timestamp(300), Timestamp(100)));
        assert_eq!(c.len(), 1);
    }

    #[test]
    fn pending_window_evicts() {
        let p = PendingRequests::new(300);
        p.record("r1", Timestamp(0));
        assert!(p.get("r1", Timestamp(299)).is_some());
        assert!(p.answer("r1", Timestamp(10)));
        assert!(!p.answer("r1", Timestamp(11)));
        assert!(p.get("r1", Timestamp(20)).unwrap().answered);
        assert!(p.get("r1", Timestamp(300)).is_none());
        for i in 0..50 {
            p.record(&format!("x{i}"), Timestamp(i));
        }
        p.record("late", Timestamp(1000));
        assert_eq!(p.len(), 1);
    }

    #[test]
    fn sessions_expire() {
        let s = Sessions::new();
        s.insert(
            ResourceSession {
                token: "t".into(),
                subject: "alice".into(),
                expires_at: Timestamp(10),
            },
            Timestamp(0),
        );
        assert_eq!(s.lookup("t", Timestamp(9)).unwrap().subject, "alice");
        assert!(s.lookup("t", Timestamp(10)).is_none());
        assert!(s.lookup("u", Timestamp(0)).is_none());
    }
}
