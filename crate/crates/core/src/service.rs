use std::path::Path;
use std::sync::{Arc, OnceLock};

use crate::access::{default_delivery, AuthConfig, AuthState, DevOutbox, RecoveryDelivery};
use crate::clock::{Clock, SystemClock};
use crate::error::Result;
use crate::persistence::Store;

/// The consortium service: storage plus the account and session state,
/// with every user-facing operation as a method.
///
/// Operations are spread over the modules that own them (`acquisition`,
/// `analytics`, `access`). All methods take `&self` and may be called from
/// many threads at once.
pub struct Consortium {
    store: Store,
    config: AuthConfig,
    auth: AuthState,
    delivery: Arc<dyn RecoveryDelivery>,
    dev_outbox: Option<Arc<DevOutbox>>,
    dummy_digest: OnceLock<String>,
}

impl std::fmt::Debug for Consortium {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Consortium")
            .field("store", &self.store)
            .field("dev_mode", &self.config.dev_mode)
            .finish_non_exhaustive()
    }
}

impl Consortium {
    pub fn new(store: Store, config: AuthConfig) -> Self {
        let (delivery, dev_outbox) = default_delivery(config.dev_mode);
        Consortium {
            store,
            config,
            auth: AuthState::default(),
            delivery,
            dev_outbox,
            dummy_digest: OnceLock::new(),
        }
    }

    pub fn in_memory(config: AuthConfig) -> Self {
        Self::in_memory_with_clock(config, Arc::new(SystemClock))
    }

    pub fn in_memory_with_clock(config: AuthConfig, clock: Arc<dyn Clock>) -> Self {
        Self::new(Store::in_memory(clock), config)
    }

    /// Opens (or creates) the durable store at `path`.
    pub fn open(path: &Path, config: AuthConfig) -> Result<Self> {
        Self::open_with_clock(path, config, Arc::new(SystemClock))
    }

    pub fn open_with_clock(path: &Path, config: AuthConfig, clock: Arc<dyn Clock>) -> Result<Self> {
        Ok(Self::new(Store::open(path, clock)?, config))
    }

    /// Routes recovery tokens to `delivery` instead of the default channel.
    pub fn with_delivery(mut self, delivery: Arc<dyn RecoveryDelivery>) -> Self {
        self.delivery = delivery;
        self
    }

    pub fn store(&self) -> &Store {
        &self.store
    }

    pub fn clock(&self) -> &Arc<dyn Clock> {
        self.store.clock()
    }

    pub fn auth_config(&self) -> &AuthConfig {
        &self.config
    }

    pub(crate) fn auth(&self) -> &AuthState {
        &self.auth
    }

    pub(crate) fn delivery(&self) -> &dyn RecoveryDelivery {
        self.delivery.as_ref()
    }

    pub(crate) fn dev_outbox(&self) -> Option<&DevOutbox> {
        self.dev_outbox.as_deref()
    }

    pub(crate) fn dummy_digest_cell(&self) -> &OnceLock<String> {
        &self.dummy_digest
    }
}
