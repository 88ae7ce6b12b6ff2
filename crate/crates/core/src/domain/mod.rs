//! Entity types and the pure rules over them: the engagement hierarchy,
//! status transitions and the report taxonomy.

mod engagement;
mod entities;
mod ids;
mod money;
mod taxonomy;

pub use engagement::{
    rollup, validate_engagement_link, validate_status_transition, Engagement, EngagementKind,
    EngagementStatus, HierarchyViolation, Rollup,
};
pub use entities::{Cmi, InstitutionKind, ReportRecord, Researcher, Role, UserAccount, UserView};
pub use ids::{CmiId, EngagementId, ReportId, ResearcherId, UserId};
pub use money::{ParsePesosError, Pesos};
pub use taxonomy::{classify_report_type, ReportCategory, ReportType, UnknownName};
