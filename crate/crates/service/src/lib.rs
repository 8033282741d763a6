//! HTTP game server. Games are simulated here, never on the client; every
//! state change is an event appended to `events.jsonl` in the data
//! directory, and the in-memory model is a fold over that log.

mod api;
pub mod clock;
pub mod log;
pub mod metrics;
pub mod model;
pub mod views;

use std::net::SocketAddr;
use std::path::PathBuf;
use std::sync::{Arc, Mutex, RwLock, RwLockReadGuard};

use critters_core::engine::TimeBonusConfig;
use critters_core::levels::{builtin_catalog, Level};

pub use api::{router, ApiError};
pub use clock::{Clock, ManualClock, SystemClock};
use log::{Event, EventLog, LogError, Record};
use model::Model;

pub struct Config {
    pub data_dir: PathBuf,
    /// Required for the metrics export; without one the export is closed.
    pub admin_token: Option<String>,
    pub levels: Vec<Level>,
    pub clock: Arc<dyn Clock>,
    pub time_bonus: TimeBonusConfig,
}

impl Config {
    /// Built-in levels and the system clock.
    pub fn new(data_dir: impl Into<PathBuf>) -> Self {
        Config {
            data_dir: data_dir.into(),
            admin_token: None,
            levels: builtin_catalog().to_vec(),
            clock: Arc::new(SystemClock),
            time_bonus: TimeBonusConfig::default(),
        }
    }

    /// Reads `DATA_DIR` (default `./data`) and `ADMIN_TOKEN`.
    pub fn from_env() -> Self {
        let mut config = Config::new(std::env::var("DATA_DIR").unwrap_or_else(|_| "data".into()));
        config.admin_token = std::env::var("ADMIN_TOKEN").ok().filter(|t| !t.is_empty());
        config
    }
}

struct Inner {
    levels: Vec<Level>,
    model: RwLock<Model>,
    log: Mutex<EventLog>,
    clock: Arc<dyn Clock>,
    admin_token: Option<String>,
    time_bonus: TimeBonusConfig,
}

#[derive(Clone)]
pub struct AppState(Arc<Inner>);

impl AppState {
    /// Opens the data directory and replays its log.
    pub fn open(config: Config) -> Result<AppState, LogError> {
        let (log, records) = EventLog::open(&config.data_dir)?;
        Ok(AppState(Arc::new(Inner {
            levels: config.levels,
            model: RwLock::new(Model::replay(records)),
            log: Mutex::new(log),
            clock: config.clock,
            admin_token: config.admin_token,
            time_bonus: config.time_bonus,
        })))
    }

    pub fn levels(&self) -> &[Level] {
        &self.0.levels
    }

    pub fn level(&self, id: &str) -> Option<&Level> {
        self.0.levels.iter().find(|l| l.id == id)
    }

    pub fn time_bonus(&self) -> &TimeBonusConfig {
        &self.0.time_bonus
    }

    pub fn now_ms(&self) -> u64 {
        self.0.clock.now_ms()
    }

    pub fn model(&self) -> RwLockReadGuard<'_, Model> {
        self.0.model.read().unwrap_or_else(|e| e.into_inner())
    }

    fn admin_token(&self) -> Option<&str> {
        self.0.admin_token.as_deref()
    }

    /// Decides on an event against the current model and records it. Holding
    /// the log lock for the whole step serializes state transitions.
    fn commit<T>(
        &self,
        player: &str,
        level: Option<&str>,
        decide: impl FnOnce(&Model) -> Result<(Vec<Event>, T), ApiError>,
    ) -> Result<T, ApiError> {
        let mut log = self.0.log.lock().unwrap_or_else(|e| e.into_inner());
        let (events, out) = decide(&self.model())?;
        for event in events {
            let mut model = self.0.model.write().unwrap_or_else(|e| e.into_inner());
            let record = Record {
                seq: model.next_seq(),
                timestamp: model.timestamp_for(player, self.0.clock.now_ms()),
                player: player.to_string(),
                level: level.map(str::to_string),
                event,
            };
            log.append(&record).map_err(ApiError::storage)?;
            model.apply(record);
        }
        Ok(out)
    }
}

/// Serves the API on `addr` until interrupted.
pub async fn serve(state: AppState, addr: SocketAddr) -> std::io::Result<()> {
    let listener = tokio::net::TcpListener::bind(addr).await?;
    axum::serve(listener, router(state))
        .with_graceful_shutdown(async {
            let _ = tokio::signal::ctrl_c().await;
        })
        .await
}
