//! Versioned record storage with soft deletion and an append-only audit
//! trail.
//!
//! Writes are serialized through a single writer lock; the global version
//! (audit head) is the order witness. Readers take a [`Snapshot`], an
//! immutable copy-on-write image of the tables, so long-running reads never
//! hold up writers and never observe a half-applied write.

mod entity;
mod journal;
mod query;
mod tables;

use std::ops::Deref;
use std::path::Path;
use std::sync::Arc;

use parking_lot::{Mutex, RwLock};
use serde::{Deserialize, Serialize};

pub use entity::{Entity, EntityKind, Record};
pub use query::{Page, QueryFilter, QueryPage, MAX_PAGE_LIMIT};
pub use tables::{AuditAction, AuditEntry, Tables};

use crate::clock::Clock;
use crate::domain::{CmiId, UserId};
use crate::error::{Error, Result};
use journal::Journal;

/// Environment variable naming the journal file used by the service.
pub const DB_PATH_ENV: &str = "CONSORTIUM_DB_PATH";

/// Result of a successful write.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Stamp {
    pub entity_id: String,
    pub global_version: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ChangeSet {
    pub entries: Vec<AuditEntry>,
    pub head: u64,
}

/// Read-only image of the store at one global version.
#[derive(Debug, Clone)]
pub struct Snapshot(Arc<Tables>);

impl Deref for Snapshot {
    type Target = Tables;

    fn deref(&self) -> &Tables {
        &self.0
    }
}

impl Snapshot {
    pub fn changes_since(&self, version: u64) -> ChangeSet {
        let start = usize::try_from(version)
            .unwrap_or(usize::MAX)
            .min(self.audit().len());
        ChangeSet {
            entries: self.audit()[start..].to_vec(),
            head: self.head(),
        }
    }

    /// Change feed restricted to records owned by `cmi` at write time.
    pub fn changes_since_for_cmi(&self, version: u64, cmi: &CmiId) -> ChangeSet {
        let entries = self
            .audit_with_owners()
            .filter(|(e, owner)| e.global_version > version && *owner == Some(cmi))
            .map(|(e, _)| e.clone())
            .collect();
        ChangeSet {
            entries,
            head: self.head(),
        }
    }
}

pub struct Store {
    published: RwLock<Arc<Tables>>,
    writer: Mutex<Option<Journal>>,
    clock: Arc<dyn Clock>,
}

impl std::fmt::Debug for Store {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Store")
            .field("head", &self.head())
            .field("durable", &self.writer.lock().is_some())
            .finish()
    }
}

impl Store {
    /// A store that lives only as long as the process.
    pub fn in_memory(clock: Arc<dyn Clock>) -> Self {
        Store {
            published: RwLock::new(Arc::new(Tables::default())),
            writer: Mutex::new(None),
            clock,
        }
    }

    /// Opens the journal at `path`, replaying it if it already exists.
    pub fn open(path: &Path, clock: Arc<dyn Clock>) -> Result<Self> {
        let (journal, lines) = Journal::open(path)?;
        let mut tables = Tables::default();
        for line in lines {
            tables.apply(line.entry, line.entity);
        }
        log::debug!("{}: replayed {} writes", path.display(), tables.head());
        Ok(Store {
            published: RwLock::new(Arc::new(tables)),
            writer: Mutex::new(Some(journal)),
            clock,
        })
    }

    pub fn clock(&self) -> &Arc<dyn Clock> {
        &self.clock
    }

    pub fn snapshot(&self) -> Snapshot {
        Snapshot(Arc::clone(&self.published.read()))
    }

    pub fn head(&self) -> u64 {
        self.published.read().head()
    }

    /// Creates (`expected_version` = `None`) or updates a record.
    ///
    /// Creates get a fresh store-assigned id, whatever id the record carried.
    /// Updates must name the stored version; the stored deletion flag and
    /// submission attribution are kept.
    pub fn put(
        &self,
        actor: &UserId,
        entity: Entity,
        expected_version: Option<u64>,
    ) -> Result<Stamp> {
        self.commit(actor, |tables, now| {
            let mut entity = entity;
            let kind = entity.kind();
            let action = match expected_version {
                None => {
                    entity.set_id(tables.next_id(kind));
                    entity.set_entity_version(1);
                    entity.set_deleted(false);
                    if let Entity::ReportRecord(r) = &mut entity {
                        r.submitted_at = now;
                    }
                    tables.check(&entity, None)?;
                    AuditAction::Create
                }
                Some(expected) => {
                    let previous = tables.get(kind, entity.id())?;
                    if previous.entity_version() != expected {
                        return Err(Error::VersionConflict {
                            kind,
                            id: entity.id().to_owned(),
                            expected,
                            actual: previous.entity_version(),
                        });
                    }
                    if previous.is_deleted() {
                        return Err(Error::AlreadyDeleted {
                            kind,
                            id: entity.id().to_owned(),
                        });
                    }
                    entity.set_entity_version(expected + 1);
                    entity.set_deleted(false);
                    if let (Entity::ReportRecord(r), Entity::ReportRecord(p)) =
                        (&mut entity, &previous)
                    {
                        r.submitted_at = p.submitted_at;
                        r.submitted_by = p.submitted_by.clone();
                    }
                    tables.check(&entity, Some(&previous))?;
                    AuditAction::Update
                }
            };
            Ok((entity, action))
        })
        .map(|(entry, _)| Stamp {
            entity_id: entry.entity_id,
            global_version: entry.global_version,
        })
    }

    /// Typed create; returns the record as stored.
    pub fn insert<R: Record>(&self, actor: &UserId, record: R) -> Result<R> {
        let stamp = self.put(actor, record.into(), None)?;
        self.snapshot().get_record(&stamp.entity_id)
    }

    /// Typed update; returns the record as stored.
    pub fn update<R: Record>(&self, actor: &UserId, record: R, expected_version: u64) -> Result<R> {
        let stamp = self.put(actor, record.into(), Some(expected_version))?;
        self.snapshot().get_record(&stamp.entity_id)
    }

    pub fn get(&self, kind: EntityKind, id: &str) -> Result<Entity> {
        self.snapshot().get(kind, id)
    }

    pub fn query(&self, filter: &QueryFilter) -> Result<QueryPage<Entity>> {
        self.snapshot().query(filter)
    }

    pub fn soft_delete(&self, actor: &UserId, kind: EntityKind, id: &str) -> Result<u64> {
        self.commit(actor, |tables, _| {
            let mut entity = tables.get(kind, id)?;
            if entity.is_deleted() {
                return Err(Error::AlreadyDeleted {
                    kind,
                    id: id.to_owned(),
                });
            }
            entity.set_deleted(true);
            entity.set_entity_version(entity.entity_version() + 1);
            Ok((entity, AuditAction::SoftDelete))
        })
        .map(|(entry, _)| entry.global_version)
    }

    pub fn changes_since(&self, version: u64) -> ChangeSet {
        self.snapshot().changes_since(version)
    }

    fn commit<F>(&self, actor: &UserId, prepare: F) -> Result<(AuditEntry, Entity)>
    where
        F: FnOnce(&Tables, chrono::DateTime<chrono::Utc>) -> Result<(Entity, AuditAction)>,
    {
        let mut journal = self.writer.lock();
        let current = Arc::clone(&self.published.read());
        let now = self.clock.now();
        let (entity, action) = prepare(&current, now)?;
        let entry = AuditEntry {
            global_version: current.head() + 1,
            actor: actor.clone(),
            entity_kind: entity.kind(),
            entity_id: entity.id().to_owned(),
            action,
            at: now,
        };
        drop(current);
        if let Some(journal) = journal.as_mut() {
            journal.append(&entry, &entity)?;
        }
        let mut published = self.published.write();
        Arc::make_mut(&mut published).apply(entry.clone(), entity.clone());
        Ok((entry, entity))
    }
}
