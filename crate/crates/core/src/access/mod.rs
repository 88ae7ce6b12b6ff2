//! Accounts, sessions, authorization and password recovery.
//!
//! Two roles map onto the two monitoring levels: `Admin` (consortium main
//! office, everything) and `CmiFocal` (one member institution's own data).

mod password;

use std::collections::HashMap;
use std::sync::Arc;

use chrono::{DateTime, TimeDelta, Utc};
use parking_lot::Mutex;
use serde::{Deserialize, Serialize};

pub use password::{hash_password, random_token, verify_password};

use crate::analytics::Scope;
use crate::domain::{CmiId, Role, UserAccount, UserId, UserView};
use crate::error::{Error, Result};
use crate::persistence::{EntityKind, QueryFilter, Record};
use crate::service::Consortium;

pub const SESSION_TTL_ENV: &str = "CONSORTIUM_SESSION_TTL_HOURS";
pub const RECOVERY_TTL_ENV: &str = "CONSORTIUM_RECOVERY_TTL_MINUTES";
pub const DEV_MODE_ENV: &str = "CONSORTIUM_DEV_MODE";

pub const MIN_PASSWORD_LEN: usize = 10;
pub const DEFAULT_HASH_ROUNDS: u32 = 100_000;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AuthConfig {
    pub session_ttl: TimeDelta,
    pub recovery_ttl: TimeDelta,
    /// PBKDF2 rounds for newly written digests.
    pub hash_rounds: u32,
    /// Keeps issued recovery tokens retrievable by admins instead of
    /// handing them to an external channel.
    pub dev_mode: bool,
}

impl Default for AuthConfig {
    fn default() -> Self {
        AuthConfig {
            session_ttl: TimeDelta::hours(12),
            recovery_ttl: TimeDelta::minutes(30),
            hash_rounds: DEFAULT_HASH_ROUNDS,
            dev_mode: false,
        }
    }
}

impl AuthConfig {
    /// Defaults overridden by the `CONSORTIUM_*` environment variables.
    pub fn from_env() -> std::result::Result<Self, String> {
        let mut config = AuthConfig::default();
        if let Ok(raw) = std::env::var(SESSION_TTL_ENV) {
            let hours: i64 = raw
                .trim()
                .parse()
                .map_err(|_| format!("{SESSION_TTL_ENV}: not an integer: {raw:?}"))?;
            if hours <= 0 {
                return Err(format!("{SESSION_TTL_ENV} must be positive"));
            }
            config.session_ttl = TimeDelta::hours(hours);
        }
        if let Ok(raw) = std::env::var(RECOVERY_TTL_ENV) {
            let minutes: i64 = raw
                .trim()
                .parse()
                .map_err(|_| format!("{RECOVERY_TTL_ENV}: not an integer: {raw:?}"))?;
            if minutes <= 0 {
                return Err(format!("{RECOVERY_TTL_ENV} must be positive"));
            }
            config.recovery_ttl = TimeDelta::minutes(minutes);
        }
        config.dev_mode = std::env::var(DEV_MODE_ENV).is_ok_and(|v| v.trim() == "1");
        Ok(config)
    }
}

/// A bearer credential. Valid while `now < expires_at` and not revoked.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Session {
    pub token: String,
    pub user_id: UserId,
    pub issued_at: DateTime<Utc>,
    pub expires_at: DateTime<Utc>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RecoveryToken {
    pub token: String,
    pub user_id: UserId,
    pub expires_at: DateTime<Utc>,
    pub used: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Action {
    Read,
    Write,
    AdminOnly,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Access {
    Allow,
    Deny,
}

/// Who is acting, resolved from a live session.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Principal {
    pub user_id: UserId,
    pub role: Role,
    pub cmi_id: Option<CmiId>,
}

impl Principal {
    pub fn is_admin(&self) -> bool {
        self.role == Role::Admin
    }

    pub(crate) fn system() -> Self {
        Principal {
            user_id: UserId::system(),
            role: Role::Admin,
            cmi_id: None,
        }
    }
}

/// The authorization rule table.
pub fn decide(principal: &Principal, action: Action, scope: &Scope) -> Access {
    let allowed = match (principal.role, action) {
        (Role::Admin, _) => true,
        (Role::CmiFocal, Action::AdminOnly) => false,
        (Role::CmiFocal, Action::Read | Action::Write) => {
            matches!((scope, &principal.cmi_id), (Scope::SingleCmi(target), Some(own)) if target == own)
        }
    };
    if allowed {
        Access::Allow
    } else {
        Access::Deny
    }
}

/// Receives freshly issued recovery tokens.
pub trait RecoveryDelivery: Send + Sync {
    fn deliver(&self, user: &UserView, token: &RecoveryToken);
}

/// Used when no delivery integration is configured: tokens go nowhere.
#[derive(Debug, Default)]
pub struct DiscardDelivery;

impl RecoveryDelivery for DiscardDelivery {
    fn deliver(&self, user: &UserView, _token: &RecoveryToken) {
        log::info!(
            "recovery requested for {}; no delivery channel configured",
            user.id
        );
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DeliveredToken {
    pub username: String,
    pub token: String,
    pub expires_at: DateTime<Utc>,
}

/// Keeps delivered tokens in memory so an admin can hand them over.
#[derive(Debug, Default)]
pub struct DevOutbox(Mutex<Vec<DeliveredToken>>);

impl DevOutbox {
    pub fn tokens(&self) -> Vec<DeliveredToken> {
        self.0.lock().clone()
    }
}

impl RecoveryDelivery for DevOutbox {
    fn deliver(&self, user: &UserView, token: &RecoveryToken) {
        self.0.lock().push(DeliveredToken {
            username: user.username.clone(),
            token: token.token.clone(),
            expires_at: token.expires_at,
        });
    }
}

#[derive(Debug, Default)]
pub(crate) struct AuthState {
    sessions: Mutex<HashMap<String, Session>>,
    recovery: Mutex<HashMap<String, RecoveryToken>>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct NewUser {
    pub username: String,
    pub role: Role,
    #[serde(default)]
    pub cmi_id: Option<CmiId>,
    pub password: String,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct UserPatch {
    #[serde(default)]
    pub username: Option<String>,
    #[serde(default)]
    pub active: Option<bool>,
    #[serde(default)]
    pub role: Option<Role>,
    #[serde(default, deserialize_with = "crate::serde_util::double_option")]
    pub cmi_id: Option<Option<CmiId>>,
}

fn check_password_strength(password: &str) -> Result<()> {
    if password.chars().count() < MIN_PASSWORD_LEN {
        Err(Error::WeakPassword {
            min: MIN_PASSWORD_LEN,
        })
    } else {
        Ok(())
    }
}

impl Consortium {
    /// Resolves a live session to its principal.
    pub fn principal(&self, session: &Session) -> Result<Principal> {
        let live = self.session_for_token(&session.token)?;
        let snapshot = self.store().snapshot();
        match snapshot.user(&live.user_id) {
            Some(u) if u.active && !u.deleted => Ok(Principal {
                user_id: u.id.clone(),
                role: u.role,
                cmi_id: u.cmi_id.clone(),
            }),
            _ => Err(Error::AuthRequired),
        }
    }

    /// Looks up a bearer token. Expired sessions are dropped on sight.
    pub fn session_for_token(&self, token: &str) -> Result<Session> {
        let now = self.clock().now();
        let mut sessions = self.auth().sessions.lock();
        let session = sessions.get(token).cloned().ok_or(Error::AuthRequired)?;
        if now >= session.expires_at {
            sessions.remove(token);
            return Err(Error::SessionExpired);
        }
        Ok(session)
    }

    pub fn authenticate(&self, username: &str, password: &str) -> Result<Session> {
        let snapshot = self.store().snapshot();
        let Some(user) = snapshot.user_by_username(username) else {
            // same work as a real check so timing does not reveal the miss
            let _ = verify_password(password, self.dummy_digest());
            return Err(Error::AuthFailure);
        };
        if !verify_password(password, &user.password_digest) || !user.active || user.deleted {
            return Err(Error::AuthFailure);
        }
        Ok(self.issue_session(user.id.clone()))
    }

    pub(crate) fn issue_session(&self, user_id: UserId) -> Session {
        let issued_at = self.clock().now();
        let session = Session {
            token: random_token(),
            user_id,
            issued_at,
            expires_at: issued_at + self.auth_config().session_ttl,
        };
        self.auth()
            .sessions
            .lock()
            .insert(session.token.clone(), session.clone());
        session
    }

    pub fn logout(&self, session: &Session) -> Result<()> {
        self.auth()
            .sessions
            .lock()
            .remove(&session.token)
            .map(|_| ())
            .ok_or(Error::AuthRequired)
    }

    pub fn authorize(&self, session: &Session, action: Action, scope: &Scope) -> Result<Access> {
        let principal = self.principal(session)?;
        Ok(decide(&principal, action, scope))
    }

    /// Fails with `Forbidden` (admin-only actions) or `ScopeViolation`
    /// (CMI-scoped actions) when the rule table denies.
    pub(crate) fn require(
        &self,
        principal: &Principal,
        action: Action,
        scope: &Scope,
    ) -> Result<()> {
        match (decide(principal, action, scope), action) {
            (Access::Allow, _) => Ok(()),
            (Access::Deny, Action::AdminOnly) => {
                Err(Error::Forbidden("administrator role required".into()))
            }
            (Access::Deny, _) => Err(Error::ScopeViolation(match scope {
                Scope::Consortium => {
                    "consortium-wide access requires the administrator role".into()
                }
                Scope::SingleCmi(cmi) => format!("CMI {cmi} is outside this account's institution"),
            })),
        }
    }

    /// Creates the first administrator without a session. Meant for
    /// command-line bootstrap on a trusted host.
    pub fn bootstrap_admin(&self, username: &str, password: &str) -> Result<UserView> {
        self.insert_user(
            &Principal::system(),
            NewUser {
                username: username.to_owned(),
                role: Role::Admin,
                cmi_id: None,
                password: password.to_owned(),
            },
        )
    }

    pub fn create_user(&self, session: &Session, new_user: NewUser) -> Result<UserView> {
        let principal = self.principal(session)?;
        self.require(&principal, Action::AdminOnly, &Scope::Consortium)?;
        self.insert_user(&principal, new_user)
    }

    pub(crate) fn insert_user(&self, actor: &Principal, new_user: NewUser) -> Result<UserView> {
        if !UserAccount::pairing_is_valid(new_user.role, new_user.cmi_id.as_ref()) {
            return Err(Error::InvalidPairing);
        }
        check_password_strength(&new_user.password)?;
        let account = UserAccount {
            id: UserId::new(""),
            username: new_user.username.trim().to_owned(),
            role: new_user.role,
            cmi_id: new_user.cmi_id,
            password_digest: hash_password(&new_user.password, self.auth_config().hash_rounds),
            active: true,
            entity_version: 0,
            deleted: false,
        };
        let stored = self.store().insert(&actor.user_id, account)?;
        Ok(UserView::from(&stored))
    }

    pub fn list_users(&self, session: &Session) -> Result<Vec<UserView>> {
        let principal = self.principal(session)?;
        self.require(&principal, Action::AdminOnly, &Scope::Consortium)?;
        let mut filter = QueryFilter::new(EntityKind::UserAccount);
        filter.page.limit = crate::persistence::MAX_PAGE_LIMIT;
        let snapshot = self.store().snapshot();
        let mut out = Vec::new();
        loop {
            let page = snapshot.query(&filter)?;
            let done = filter.page.offset + page.items.len() >= page.total;
            out.extend(
                page.items
                    .into_iter()
                    .filter_map(UserAccount::from_entity)
                    .map(|u| UserView::from(&u)),
            );
            if done {
                break;
            }
            filter.page.offset += filter.page.limit;
        }
        Ok(out)
    }

    pub fn update_user(
        &self,
        session: &Session,
        id: &UserId,
        patch: UserPatch,
        expected_version: u64,
    ) -> Result<UserView> {
        let principal = self.principal(session)?;
        self.require(&principal, Action::AdminOnly, &Scope::Consortium)?;
        let mut account: UserAccount = self.store().snapshot().get_record(id.as_str())?;
        if let Some(username) = patch.username {
            account.username = username.trim().to_owned();
        }
        if let Some(active) = patch.active {
            account.active = active;
        }
        if let Some(role) = patch.role {
            account.role = role;
        }
        if let Some(cmi) = patch.cmi_id {
            account.cmi_id = cmi;
        }
        let stored = self
            .store()
            .update(&principal.user_id, account, expected_version)?;
        if !stored.active {
            self.revoke_sessions(&stored.id);
        }
        Ok(UserView::from(&stored))
    }

    pub fn delete_user(&self, session: &Session, id: &UserId) -> Result<u64> {
        let principal = self.principal(session)?;
        self.require(&principal, Action::AdminOnly, &Scope::Consortium)?;
        let version =
            self.store()
                .soft_delete(&principal.user_id, EntityKind::UserAccount, id.as_str())?;
        self.revoke_sessions(id);
        Ok(version)
    }

    /// Issues a recovery token when the account exists. The outcome is the
    /// same either way.
    pub fn initiate_password_recovery(&self, username: &str) -> Result<()> {
        let snapshot = self.store().snapshot();
        let Some(user) = snapshot
            .user_by_username(username)
            .filter(|u| u.active && !u.deleted)
        else {
            return Ok(());
        };
        let token = RecoveryToken {
            token: random_token(),
            user_id: user.id.clone(),
            expires_at: self.clock().now() + self.auth_config().recovery_ttl,
            used: false,
        };
        self.auth()
            .recovery
            .lock()
            .insert(token.token.clone(), token.clone());
        self.delivery().deliver(&UserView::from(user), &token);
        Ok(())
    }

    /// Spends a recovery token on a new password. A token is marked used
    /// under the same lock that checks it, so concurrent completions of one
    /// token produce exactly one password change.
    pub fn complete_password_recovery(&self, token: &str, new_password: &str) -> Result<()> {
        check_password_strength(new_password)?;
        let now = self.clock().now();
        let user_id = {
            let mut tokens = self.auth().recovery.lock();
            let user_id = match tokens.get(token) {
                Some(t) if !t.used && now < t.expires_at => t.user_id.clone(),
                _ => return Err(Error::InvalidToken),
            };
            for t in tokens.values_mut().filter(|t| t.user_id == user_id) {
                t.used = true;
            }
            user_id
        };

        let digest = hash_password(new_password, self.auth_config().hash_rounds);
        let mut attempts = 0;
        loop {
            let mut account: UserAccount = self.store().snapshot().get_record(user_id.as_str())?;
            let expected = account.entity_version;
            account.password_digest = digest.clone();
            match self.store().update(&user_id, account, expected) {
                Ok(_) => break,
                Err(Error::VersionConflict { .. }) if attempts < 5 => attempts += 1,
                Err(e) => return Err(e),
            }
        }
        self.revoke_sessions(&user_id);
        Ok(())
    }

    /// Tokens handed to the development outbox. Requires dev mode and an
    /// admin session.
    pub fn dev_recovery_tokens(&self, session: &Session) -> Result<Vec<DeliveredToken>> {
        let principal = self.principal(session)?;
        self.require(&principal, Action::AdminOnly, &Scope::Consortium)?;
        match self.dev_outbox() {
            Some(outbox) => Ok(outbox.tokens()),
            None => Err(Error::Forbidden("development mode is off".into())),
        }
    }

    fn revoke_sessions(&self, user_id: &UserId) {
        self.auth()
            .sessions
            .lock()
            .retain(|_, s| &s.user_id != user_id);
    }

    fn dummy_digest(&self) -> &str {
        self.dummy_digest_cell()
            .get_or_init(|| hash_password("not-a-real-password", self.auth_config().hash_rounds))
    }

    #[doc(hidden)]
    pub fn live_session_count(&self) -> usize {
        self.auth().sessions.lock().len()
    }
}

pub(crate) fn default_delivery(
    dev_mode: bool,
) -> (Arc<dyn RecoveryDelivery>, Option<Arc<DevOutbox>>) {
    if dev_mode {
        let outbox = Arc::new(DevOutbox::default());
        (outbox.clone(), Some(outbox))
    } else {
        (Arc::new(DiscardDelivery), None)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn principal(role: Role, cmi: Option<&str>) -> Principal {
        Principal {
            user_id: "u".into(),
            role,
            cmi_id: cmi.map(CmiId::from),
        }
    }

    #[test]
    fn rule_table_is_exhaustive() {
        let own = Scope::SingleCmi("c2".into());
        let other = Scope::SingleCmi("c9".into());
        let scopes = [
            ("own", &own),
            ("other", &other),
            ("consortium", &Scope::Consortium),
        ];
        for role in [Role::Admin, Role::CmiFocal] {
            let p = match role {
                Role::Admin => principal(Role::Admin, None),
                Role::CmiFocal => principal(Role::CmiFocal, Some("c2")),
            };
            for (label, scope) in scopes {
                for action in [Action::Read, Action::Write, Action::AdminOnly] {
                    let expected = match (role, label, action) {
                        (Role::Admin, _, _) => Access::Allow,
                        (Role::CmiFocal, _, Action::AdminOnly) => Access::Deny,
                        (Role::CmiFocal, "own", _) => Access::Allow,
                        (Role::CmiFocal, _, _) => Access::Deny,
                    };
                    assert_eq!(
                        decide(&p, action, scope),
                        expected,
                        "{role:?} {label} {action:?}"
                    );
                }
            }
        }
    }
}
