use std::collections::HashMap;
use std::sync::{Arc, Mutex};

use tokio::sync::{Mutex as AsyncMutex, OwnedMutexGuard};
use tutor_core::{Gateway, SessionId, Store};

pub const DEFAULT_TOKEN_TTL: chrono::Duration = chrono::Duration::hours(12);

/// Shared handler state. The store is the only mutable state that outlives a
/// request; the lock table just serializes turns.
#[derive(Clone)]
pub struct AppState {
    pub store: Arc<Store>,
    pub gateway: Gateway,
    pub token_ttl: chrono::Duration,
    pub(crate) locks: Arc<SessionLocks>,
}

impl AppState {
    pub fn new(store: Arc<Store>, gateway: Gateway) -> Self {
        Self {
            store,
            gateway,
            token_ttl: DEFAULT_TOKEN_TTL,
            locks: Arc::default(),
        }
    }

    pub fn with_token_ttl(mut self, ttl: chrono::Duration) -> Self {
        self.token_ttl = ttl;
        self
    }
}

/// One async mutex per session. Tokio mutexes are fair, so waiting turns
/// run in arrival order.
#[derive(Default)]
pub(crate) struct SessionLocks {
    table: Mutex<HashMap<SessionId, Arc<AsyncMutex<()>>>>,
}

impl SessionLocks {
    pub(crate) async fn acquire(&self, id: &SessionId) -> OwnedMutexGuard<()> {
        let lock = {
            let mut table = self.table.lock().unwrap_or_else(|p| p.into_inner());
            // Drop entries nobody holds or waits on.
            table.retain(|_, lock| Arc::strong_count(lock) > 1);
            table.entry(id.clone()).or_default().clone()
        };
        lock.lock_owned().await
    }
}
