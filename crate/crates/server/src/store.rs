//! Append-only event log on disk plus periodic state snapshots.
//!
//! Layout of a data directory:
//! - `events.log`: one event record per line, in sequence order.
//! - `snapshots/<sequence>.json`: canonical state after that many events.
//!
//! The log is the source of truth. On startup the log is replayed and the
//! newest snapshot is checked against the replayed state at its sequence.

use std::fs::{self, File, OpenOptions};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use lia_core::engine::{parse_log, GameConfig};
use lia_core::Game;
use thiserror::Error;

pub const LOG_FILE: &str = "events.log";
pub const SNAPSHOT_DIR: &str = "snapshots";

#[derive(Debug, Error)]
pub enum StoreError {
    #[error("i/o error on {path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("event log: {0}")]
    Log(#[from] lia_core::engine::LogParseError),
    #[error("event log does not replay: {0}")]
    Replay(#[from] lia_core::GameError),
    #[error("snapshot at sequence {0} disagrees with the replayed log")]
    SnapshotMismatch(u64),
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> StoreError + '_ {
    move |source| StoreError::Io {
        path: path.to_path_buf(),
        source,
    }
}

pub struct Persistence {
    dir: PathBuf,
    log: BufWriter<File>,
    written: usize,
    snapshot_every: u64,
}

impl Persistence {
    /// Open (or create) a data directory and rebuild the game it holds.
    pub fn open(dir: &Path, config: GameConfig, snapshot_every: u64) -> Result<(Game, Self), StoreError> {
        fs::create_dir_all(dir.join(SNAPSHOT_DIR)).map_err(io_err(dir))?;
        let log_path = dir.join(LOG_FILE);
        let text = match fs::read_to_string(&log_path) {
            Ok(t) => t,
            Err(e) if e.kind() == std::io::ErrorKind::NotFound => String::new(),
            Err(e) => return Err(io_err(&log_path)(e)),
        };
        let records = parse_log(&text)?;
        let game = Game::replay(config, &records)?;
        if let Some((seq, path)) = latest_snapshot(&dir.join(SNAPSHOT_DIR))? {
            if seq <= records.len() as u64 {
                let stored = fs::read_to_string(&path).map_err(io_err(&path))?;
                if stored != game.canonical_state_at(seq)? {
                    return Err(StoreError::SnapshotMismatch(seq));
                }
            }
        }
        let file = OpenOptions::new()
            .create(true)
            .append(true)
            .open(&log_path)
            .map_err(io_err(&log_path))?;
        let written = records.len();
        Ok((
            game,
            Self {
                dir: dir.to_path_buf(),
                log: BufWriter::new(file),
                written,
                snapshot_every: snapshot_every.max(1),
            },
        ))
    }

    /// Append every event not yet on disk and take a snapshot when a
    /// multiple of `snapshot_every` was crossed.
    pub fn sync(&mut self, game: &Game) -> Result<(), StoreError> {
        let events = game.events();
        if events.len() == self.written {
            return Ok(());
        }
        let log_path = self.dir.join(LOG_FILE);
        for r in &events[self.written..] {
            writeln!(self.log, "{}", r.to_line()).map_err(io_err(&log_path))?;
        }
        self.log.flush().map_err(io_err(&log_path))?;
        let before = self.written as u64 / self.snapshot_every;
        self.written = events.len();
        if self.written as u64 / self.snapshot_every > before {
            let path = self.dir.join(SNAPSHOT_DIR).join(format!("{}.json", self.written));
            fs::write(&path, game.canonical_state()).map_err(io_err(&path))?;
        }
        Ok(())
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }
}

fn latest_snapshot(dir: &Path) -> Result<Option<(u64, PathBuf)>, StoreError> {
    let mut best = None;
    for entry in fs::read_dir(dir).map_err(io_err(dir))? {
        let path = entry.map_err(io_err(dir))?.path();
        let seq = path
            .file_stem()
            .and_then(|s| s.to_str())
            .and_then(|s| s.parse::<u64>().ok());
        if let Some(seq) = seq {
            if best.as_ref().is_none_or(|(b, _)| seq > *b) {
                best = Some((seq, path));
            }
        }
    }
    Ok(best)
}
