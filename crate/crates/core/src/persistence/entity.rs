use std::fmt;

use serde::{Deserialize, Serialize};

use crate::domain::{Cmi, CmiId, Engagement, ReportRecord, Researcher, UserAccount};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum EntityKind {
    Cmi,
    Engagement,
    ReportRecord,
    Researcher,
    UserAccount,
}

impl EntityKind {
    pub const ALL: [EntityKind; 5] = [
        EntityKind::Cmi,
        EntityKind::Engagement,
        EntityKind::ReportRecord,
        EntityKind::Researcher,
        EntityKind::UserAccount,
    ];

    pub(crate) fn id_prefix(self) -> &'static str {
        match self {
            EntityKind::Cmi => "cmi",
            EntityKind::Engagement => "eng",
            EntityKind::ReportRecord => "rep",
            EntityKind::Researcher => "res",
            EntityKind::UserAccount => "usr",
        }
    }
}

impl fmt::Display for EntityKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(self, f)
    }
}

/// Any storable record.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "entity_kind", content = "record")]
pub enum Entity {
    Cmi(Cmi),
    Engagement(Engagement),
    ReportRecord(ReportRecord),
    Researcher(Researcher),
    UserAccount(UserAccount),
}

/// Bookkeeping shared by every storable record type.
pub trait Record: Clone + Into<Entity> + Sized {
    const KIND: EntityKind;

    fn id_str(&self) -> &str;
    fn set_id(&mut self, raw: String);
    fn entity_version(&self) -> u64;
    fn set_entity_version(&mut self, version: u64);
    fn is_deleted(&self) -> bool;
    fn set_deleted(&mut self, deleted: bool);
    /// The CMI this record belongs to for scoping purposes.
    fn owner_cmi(&self) -> Option<&CmiId>;
    fn from_entity(entity: Entity) -> Option<Self>;
}

macro_rules! impl_record {
    ($ty:ident, $variant:ident, |$s:ident| $owner:expr) => {
        impl Record for $ty {
            const KIND: EntityKind = EntityKind::$variant;

            fn id_str(&self) -> &str {
                self.id.as_str()
            }
            fn set_id(&mut self, raw: String) {
                self.id = raw.into();
            }
            fn entity_version(&self) -> u64 {
                self.entity_version
            }
            fn set_entity_version(&mut self, version: u64) {
                self.entity_version = version;
            }
            fn is_deleted(&self) -> bool {
                self.deleted
            }
            fn set_deleted(&mut self, deleted: bool) {
                self.deleted = deleted;
            }
            fn owner_cmi(&self) -> Option<&CmiId> {
                let $s = self;
                $owner
            }
            fn from_entity(entity: Entity) -> Option<Self> {
                match entity {
                    Entity::$variant(r) => Some(r),
                    _ => None,
                }
            }
        }

        impl From<$ty> for Entity {
            fn from(r: $ty) -> Entity {
                Entity::$variant(r)
            }
        }
    };
}

impl_record!(Cmi, Cmi, |c| Some(&c.id));
impl_record!(Engagement, Engagement, |e| Some(&e.lead_cmi_id));
impl_record!(ReportRecord, ReportRecord, |r| Some(&r.cmi_id));
impl_record!(Researcher, Researcher, |r| Some(&r.cmi_id));
impl_record!(UserAccount, UserAccount, |u| u.cmi_id.as_ref());

macro_rules! dispatch {
    ($entity:expr, |$r:ident| $body:expr) => {
        match $entity {
            Entity::Cmi($r) => $body,
            Entity::Engagement($r) => $body,
            Entity::ReportRecord($r) => $body,
            Entity::Researcher($r) => $body,
            Entity::UserAccount($r) => $body,
        }
    };
}

impl Entity {
    pub fn kind(&self) -> EntityKind {
        dispatch!(self, |r| record_kind(r))
    }

    pub fn id(&self) -> &str {
        dispatch!(self, |r| r.id_str())
    }

    pub fn entity_version(&self) -> u64 {
        dispatch!(self, |r| r.entity_version())
    }

    pub fn is_deleted(&self) -> bool {
        dispatch!(self, |r| r.is_deleted())
    }

    pub fn owner_cmi(&self) -> Option<&CmiId> {
        dispatch!(self, |r| r.owner_cmi())
    }

    pub(crate) fn set_id(&mut self, raw: String) {
        dispatch!(self, |r| r.set_id(raw))
    }

    pub(crate) fn set_entity_version(&mut self, version: u64) {
        dispatch!(self, |r| r.set_entity_version(version))
    }

    pub(crate) fn set_deleted(&mut self, deleted: bool) {
        dispatch!(self, |r| r.set_deleted(deleted))
    }
}

fn record_kind<R: Record>(_: &R) -> EntityKind {
    R::KIND
}
