//! Network surface of the Love in Action platform: the HTTP API, the live
//! status stream, persistence of the event log and the recognizer backends.
//!
//! All mutations go through one lock around the [`Game`], which plays the
//! role of the serialized command queue. Recognition runs outside the lock.

pub mod api;
pub mod backend;
pub mod clock;
pub mod error;
pub mod live;
pub mod store;

use std::net::SocketAddr;
use std::path::PathBuf;
use std::sync::{Arc, Mutex};

use lia_core::engine::GameConfig;
use lia_core::perception::DEFAULT_RADIUS_M;
use lia_core::{Game, GameError, Timestamp, Vocabulary};
use tokio::net::TcpListener;
use tokio::task::JoinHandle;

pub use api::{router, PLAYER_HEADER};
pub use backend::{serve_recognizer, Backend, EvaluationJob, ExternalRecognizer};
pub use clock::{Clock, ManualClock, SystemClock};
pub use error::{ApiError, ErrorBody};
pub use live::{LiveHub, LiveStatus};
pub use store::{Persistence, StoreError, LOG_FILE};

pub const DEFAULT_SNAPSHOT_EVERY: u64 = 500;

#[derive(Debug, Clone)]
pub struct ServerConfig {
    pub game: GameConfig,
    pub backend: Backend,
    pub radius_m: f64,
    /// Where the event log and snapshots live; `None` keeps everything in memory.
    pub data_dir: Option<PathBuf>,
    pub snapshot_every: u64,
}

impl Default for ServerConfig {
    fn default() -> Self {
        Self {
            game: GameConfig::default(),
            backend: Backend::Synthetic(Default::default()),
            radius_m: DEFAULT_RADIUS_M,
            data_dir: None,
            snapshot_every: DEFAULT_SNAPSHOT_EVERY,
        }
    }
}

struct Core {
    game: Game,
    persistence: Option<Persistence>,
}

pub struct Shared {
    core: Mutex<Core>,
    pub(crate) backend: Backend,
    pub(crate) vocabulary: Vocabulary,
    pub(crate) clock: Arc<dyn Clock>,
    pub(crate) live: LiveHub,
    pub(crate) radius_m: f64,
}

impl Shared {
    pub fn read<T>(&self, f: impl FnOnce(&Game) -> T) -> T {
        f(&self.core.lock().expect("game lock poisoned").game)
    }

    /// Run one command under the lock and persist whatever it emitted.
    pub(crate) fn mutate<T>(&self, f: impl FnOnce(&mut Game, Timestamp) -> Result<T, GameError>) -> Result<T, ApiError> {
        let mut core = self.core.lock().expect("game lock poisoned");
        let now = self.clock.now();
        let result = f(&mut core.game, now);
        let Core { game, persistence } = &mut *core;
        if let Some(p) = persistence {
            p.sync(game)?;
        }
        result.map_err(ApiError::from)
    }
}

#[derive(Clone)]
pub struct App {
    shared: Arc<Shared>,
}

impl App {
    pub fn new(config: ServerConfig, clock: Arc<dyn Clock>) -> Result<Self, StoreError> {
        let vocabulary = config.game.vocabulary.clone();
        let (game, persistence) = match &config.data_dir {
            Some(dir) => {
                let (g, p) = Persistence::open(dir, config.game.clone(), config.snapshot_every)?;
                (g, Some(p))
            }
            None => (Game::new(config.game.clone()), None),
        };
        Ok(Self {
            shared: Arc::new(Shared {
                core: Mutex::new(Core { game, persistence }),
                backend: config.backend,
                vocabulary,
                clock,
                live: LiveHub::default(),
                radius_m: config.radius_m,
            }),
        })
    }

    pub fn router(&self) -> axum::Router {
        router(Arc::clone(&self.shared))
    }

    pub fn read<T>(&self, f: impl FnOnce(&Game) -> T) -> T {
        self.shared.read(f)
    }

    /// Serve on an ephemeral local port in the current runtime.
    pub async fn spawn_local(&self) -> std::io::Result<(SocketAddr, JoinHandle<()>)> {
        let listener = TcpListener::bind("127.0.0.1:0").await?;
        let addr = listener.local_addr()?;
        let router = self.router();
        let handle = tokio::spawn(async move {
            if let Err(e) = axum::serve(listener, router).await {
                tracing::error!("server stopped: {e}");
            }
        });
        Ok((addr, handle))
    }
}
