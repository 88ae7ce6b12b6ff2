use std::fmt;

use serde::{Deserialize, Serialize};

macro_rules! opaque_id {
    ($(#[$meta:meta])* $name:ident) => {
        $(#[$meta])*
        #[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
        #[serde(transparent)]
        pub struct $name(String);

        impl $name {
            pub fn new(raw: impl Into<String>) -> Self {
                Self(raw.into())
            }

            pub fn as_str(&self) -> &str {
                &self.0
            }
        }

        impl fmt::Display for $name {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str(&self.0)
            }
        }

        impl From<&str> for $name {
            fn from(raw: &str) -> Self {
                Self(raw.to_owned())
            }
        }

        impl From<String> for $name {
            fn from(raw: String) -> Self {
                Self(raw)
            }
        }
    };
}

opaque_id!(
    /// Identifier of a consortium member institution.
    CmiId
);
opaque_id!(EngagementId);
opaque_id!(ReportId);
opaque_id!(ResearcherId);
opaque_id!(
    /// Identifier of a user account. Also used as the audit actor.
    UserId
);

impl UserId {
    /// Actor recorded for writes that do not originate from a session
    /// (bootstrap admin creation, fixtures loaded from the command line).
    pub fn system() -> Self {
        Self("system".to_owned())
    }
}
