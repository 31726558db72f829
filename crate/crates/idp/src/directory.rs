//! The persistent user directory.
//!
//! One record per line, tab-separated: user-id, base64 salt, sealed
//! long-term key (wire encoding), created-at (RFC 3339). Long-term keys are
//! only ever stored sealed under the IdP master key.

use std::collections::BTreeMap;
use std::io::Write;
use std::path::Path;

use base64::engine::general_purpose::STANDARD;
use base64::Engine;

use hbe_core::kex::{SealedPayload, SALT_LEN};
use hbe_core::Timestamp;

pub const MAX_USER_ID_LEN: usize = 128;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct UserRecord {
    pub user_id: String,
    pub salt: [u8; SALT_LEN],
    pub wrapped_ltk: SealedPayload,
    pub created_at: Timestamp,
}

#[derive(Debug, thiserror::Error)]
pub enum DirectoryError {
    #[error("directory I/O: {0}")]
    Io(#[from] std::io::Error),
    #[error("corrupt record on line {line}: {reason}")]
    CorruptRecord { line: usize, reason: String },
}

/// User ids must be non-empty, at most 128 octets and free of control
/// characters (tabs and newlines would break the line format).
pub fn valid_user_id(id: &str) -> bool {
    !id.is_empty() && id.len() <= MAX_USER_ID_LEN && !id.chars().any(char::is_control)
}

impl UserRecord {
    fn to_line(&self) -> String {
        format!(
            "{}\t{}\t{}\t{}",
            self.user_id,
            STANDARD.encode(self.salt),
            self.wrapped_ltk.to_wire(),
            self.created_at
        )
    }

    fn from_line(line: &str) -> Result<Self, String> {
        let fields: Vec<&str> = line.split('\t').collect();
        let [user_id, salt, ltk, created] = fields.as_slice() else {
            return Err(format!("expected 4 fields, found {}", fields.len()));
        };
        if !valid_user_id(user_id) {
            return Err("invalid user id".into());
        }
        let salt = STANDARD
            .decode(salt)
            .ok()
            .and_then(|s| <[u8; SALT_LEN]>::try_from(s).ok())
            .ok_or("salt is not 16 base64-encoded octets")?;
        let wrapped_ltk = SealedPayload::from_wire(ltk).map_err(|e| format!("sealed key: {e}"))?;
        let created_at = Timestamp::parse_rfc3339(created).map_err(|e| e.to_string())?;
        Ok(Self {
            user_id: (*user_id).to_owned(),
            salt,
            wrapped_ltk,
            created_at,
        })
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Directory {
    users: BTreeMap<String, UserRecord>,
}

impl Directory {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn get(&self, user_id: &str) -> Option<&UserRecord> {
        self.users.get(user_id)
    }

    pub fn contains(&self, user_id: &str) -> bool {
        self.users.contains_key(user_id)
    }

    pub fn salt_in_use(&self, salt: &[u8; SALT_LEN]) -> bool {
        self.users.values().any(|r| &r.salt == salt)
    }

    /// Returns false (and leaves the directory unchanged) on a duplicate id.
    pub fn insert(&mut self, record: UserRecord) -> bool {
        if self.users.contains_key(&record.user_id) {
            return false;
        }
        self.users.insert(record.user_id.clone(), record);
        true
    }

    pub fn remove(&mut self, user_id: &str) -> Option<UserRecord> {
        self.users.remove(user_id)
    }

    pub fn len(&self) -> usize {
        self.users.len()
    }

    pub fn is_empty(&self) -> bool {
        self.users.is_empty()
    }

    pub fn records(&self) -> impl Iterator<Item = &UserRecord> {
        self.users.values()
    }

    pub fn to_file_string(&self) -> String {
        self.users.values().map(|r| r.to_line() + "\n").collect()
    }

    pub fn parse(text: &str) -> Result<Self, DirectoryError> {
        let mut dir = Directory::new();
        for (idx, line) in text.lines().enumerate() {
            let record =
                UserRecord::from_line(line).map_err(|reason| DirectoryError::CorruptRecord {
                    line: idx + 1,
                    reason,
                })?;
            let user = record.user_id.clone();
            if !dir.insert(record) {
                return Err(DirectoryError::CorruptRecord {
                    line: idx + 1,
                    reason: format!("duplicate user {user:?}"),
                });
            }
        }
        Ok(dir)
    }

    /// Writes to a temporary file in the same directory and renames it over
    /// `path`.
    pub fn persist(&self, path: &Path) -> Result<(), DirectoryError> {
        let parent = match path.parent() {
            Some(p) if !p.as_os_str().is_empty() => p,
            _ => Path::new("."),
        };
        let mut tmp = tempfile::NamedTempFile::new_in(parent)?;
        tmp.write_all(self.to_file_string().as_bytes())?;
        tmp.as_file().sync_all()?;
        tmp.persist(path).map_err(|e| DirectoryError::Io(e.error))?;
        Ok(())
    }

    /// A missing file loads as an empty directory.
    pub fn load(path: &Path) -> Result<Self, DirectoryError> {
        match std::fs::read_to_string(path) {
            Ok(text) => Self::parse(&text),
            Err(e) if e.kind() == std::io::ErrorKind::NotFound => Ok(Self::new()),
            Err(e) => Err(e.into()),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use hbe_core::kex::{seal, SealingKey};

    fn record(n: usize) -> UserRecord {
        let key = SealingKey::new("idp-master", &[7; 16]).unwrap();
        let user_id = format!("user-{n}");
        UserRecord {
            salt: [n as u8; 16],
            wrapped_ltk: seal(&key, [n as u8; 12], &[0xee; 16], user_id.as_bytes()),
            user_id,
            created_at: Timestamp(1_700_000_000 + n as i64),
        }
    }

    #[test]
    fn round_trip_hundred_users() {
        let tmp = tempfile::tempdir().unwrap();
        let path = tmp.path().join("users.tsv");
        let mut dir = Directory::new();
        for n in 0..100 {
            assert!(dir.insert(record(n)));
        }
        dir.persist(&path).unwrap();
        assert_eq!(Directory::load(&path).unwrap(), dir);
    }

    #[test]
    fn empty_directory() {
        let tmp = tempfile::tempdir().unwrap();
        let path = tmp.path().join("users.tsv");
        Directory::new().persist(&path).unwrap();
        assert_eq!(std::fs::read(&path).unwrap(), b"");
        assert!(Directory::load(&path).unwrap().is_empty());
        assert!(Directory::load(&tmp.path().join("absent"))
            .unwrap()
            .is_empty());
    }

    #[test]
    fn corrupt_line_named() {
        let mut dir = Directory::new();
        for n in 0..5 {
            dir.insert(record(n));
        }
        let mut lines: Vec<String> = dir.to_file_string().lines().map(str::to_owned).collect();
        lines[2] = lines[2].replacen('\t', " ", 1);
        let err = Directory::parse(&(lines.join("\n") + "\n")).unwrap_err();
        assert!(
            matches!(err, DirectoryError::CorruptRecord { line: 3, .. }),
            "{err}"
        );
    }

    #[test]
    fn duplicate_insert_leaves_directory_unchanged() {
        let mut dir = Directory::new();
        assert!(dir.insert(record(1)));
        let before = dir.clone();
        let mut dup = record(2);
        dup.user_id = "user-1".into();
        assert!(!dir.insert(dup));
        assert_eq!(dir, before);
    }

    #[test]
    fn user_id_rules() {
        assert!(valid_user_id("alice@example.com"));
        assert!(!valid_user_id(""));
        assert!(!valid_user_id("a\tb"));
        assert!(!valid_user_id(&"x".repeat(129)));
    }
}
