//! Subcommands of the `lia` binary. Each returns the text it would print so
//! the commands can be exercised without a process boundary.

use std::net::SocketAddr;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand};
use lia_core::analysis::{analyze, gameplay_stats, parse_sri, write_report};
use lia_core::domain::from_canonical;
use lia_core::engine::GameConfig;
use lia_core::perception::RecognizerSettings;
use lia_core::scoring::compute_score;
use lia_core::{RecognitionOutput, RequestConfig, ScoringParams, Vocabulary};
use lia_server::backend::{Backend, ExternalRecognizer};
use lia_server::{serve_recognizer, App, ServerConfig, SystemClock, DEFAULT_SNAPSHOT_EVERY};
use lia_sim::{calibrate, run_scenario, write_outputs, CalibrationTargets, Scenario};
use serde::{Deserialize, Serialize};

#[derive(Debug, Parser)]
#[command(name = "lia", version, about = "Love in Action: body-language social requests over public cameras")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run the HTTP game server.
    Serve {
        #[arg(long, default_value = "127.0.0.1:8080")]
        listen: SocketAddr,
        /// Directory for the event log and snapshots; in-memory when absent.
        #[arg(long)]
        data_dir: Option<PathBuf>,
        /// Address of an external recognizer; the synthetic one is used when absent.
        #[arg(long)]
        recognizer: Option<String>,
        /// Seed of the synthetic recognizer.
        #[arg(long, default_value_t = 0)]
        recognizer_seed: u64,
        #[arg(long, default_value_t = DEFAULT_SNAPSHOT_EVERY)]
        snapshot_every: u64,
    },
    /// Run a standalone synthetic recognizer speaking the text protocol.
    Recognizer {
        #[arg(long, default_value = "127.0.0.1:7070")]
        listen: SocketAddr,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Play a simulated study and write its event log and questionnaires.
    Simulate {
        /// Scenario file; defaults apply to missing fields or a missing file.
        #[arg(long)]
        scenario: Option<PathBuf>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Paired t-tests on questionnaire data plus gameplay statistics from a log.
    Analyze {
        #[arg(long)]
        log: Option<PathBuf>,
        #[arg(long)]
        sri_pre: PathBuf,
        #[arg(long)]
        sri_post: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Score one recognizer output against a request configuration.
    Score {
        /// JSON file with `config`, `recognition` and optional `params`.
        input: PathBuf,
    },
    /// Fit the synthetic recognizer to target rates.
    Calibrate {
        #[arg(long, default_value_t = 0.769)]
        pass_rate: f64,
        #[arg(long, default_value_t = 0.903)]
        action_match: f64,
        #[arg(long, default_value_t = 0.659)]
        attribute_match: f64,
        #[arg(long, default_value_t = 10_000)]
        trials: usize,
        #[arg(long, default_value_t = 2023)]
        seed: u64,
    },
}

#[derive(Debug, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub struct ScoreInput {
    pub config: RequestConfig,
    pub recognition: RecognitionOutput,
    #[serde(default)]
    pub params: Option<ScoringParams>,
}

#[derive(Debug, Serialize)]
#[serde(rename_all = "kebab-case")]
struct CalibrationReport {
    settings: RecognizerSettings,
    rates: lia_sim::Rates,
}

fn read(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))
}

pub fn load_scenario(path: Option<&Path>, seed: Option<u64>) -> Result<Scenario> {
    let mut scenario = match path {
        Some(p) => from_canonical::<Scenario>(&read(p)?).with_context(|| format!("parsing {}", p.display()))?,
        None => Scenario::default(),
    };
    if let Some(s) = seed {
        scenario.seed = s;
    }
    scenario.validate()?;
    Ok(scenario)
}

pub async fn simulate(scenario: Option<&Path>, seed: Option<u64>, out: &Path) -> Result<String> {
    let scenario = load_scenario(scenario, seed)?;
    let result = run_scenario(&scenario).await?;
    write_outputs(&result, out)?;
    let t = &result.tally;
    Ok(format!(
        "wrote {}: {} requests, {} performances ({} passed), {} reviews\n",
        out.display(),
        t.requests_published,
        t.performances,
        t.passes,
        t.reviews
    ))
}

pub fn analyze_files(log: Option<&Path>, pre: &Path, post: &Path, out: &Path) -> Result<String> {
    let pre = parse_sri(&read(pre)?).with_context(|| format!("parsing {}", pre.display()))?;
    let post = parse_sri(&read(post)?).with_context(|| format!("parsing {}", post.display()))?;
    let report = write_report(&analyze(&pre, &post)?);
    std::fs::write(out, &report).with_context(|| format!("writing {}", out.display()))?;
    let mut text = report;
    if let Some(log) = log {
        let stats = gameplay_stats(&read(log)?).with_context(|| format!("parsing {}", log.display()))?;
        text.push_str(&serde_json::to_string_pretty(&stats)?);
        text.push('\n');
    }
    Ok(text)
}

pub fn score(input: &Path) -> Result<String> {
    let input: ScoreInput = serde_json::from_str(&read(input)?).context("parsing score input")?;
    let params = input.params.unwrap_or_default();
    let result = compute_score(&input.recognition, &input.config, &params)?;
    Ok(serde_json::to_string_pretty(&result)? + "\n")
}

pub fn run_calibration(targets: CalibrationTargets, trials: usize, seed: u64) -> Result<String> {
    let (settings, rates) = calibrate(
        &targets,
        &RecognizerSettings::default(),
        &Vocabulary::default(),
        &ScoringParams::default(),
        trials,
        seed,
    )?;
    Ok(serde_json::to_string_pretty(&CalibrationReport { settings, rates })? + "\n")
}

pub async fn serve(
    listen: SocketAddr,
    data_dir: Option<PathBuf>,
    recognizer: Option<String>,
    recognizer_seed: u64,
    snapshot_every: u64,
) -> Result<()> {
    let game = GameConfig::default();
    let backend = match recognizer {
        Some(addr) => {
            let external = ExternalRecognizer::new(addr);
            external
                .check(&game.vocabulary)
                .await
                .context("recognizer handshake failed")?;
            Backend::External(external)
        }
        None => Backend::Synthetic(RecognizerSettings {
            seed: recognizer_seed,
            ..RecognizerSettings::default()
        }),
    };
    if snapshot_every == 0 {
        bail!("--snapshot-every must be positive");
    }
    let config = ServerConfig {
        game,
        backend,
        data_dir,
        snapshot_every,
        ..ServerConfig::default()
    };
    let app = App::new(config, Arc::new(SystemClock))?;
    let listener = tokio::net::TcpListener::bind(listen).await?;
    eprintln!("listening on {}", listener.local_addr()?);
    axum::serve(listener, app.router()).await?;
    Ok(())
}

pub async fn recognizer(listen: SocketAddr, seed: u64) -> Result<()> {
    let listener = tokio::net::TcpListener::bind(listen).await?;
    eprintln!("recognizer listening on {}", listener.local_addr()?);
    serve_recognizer(
        listener,
        Vocabulary::default(),
        RecognizerSettings {
            seed,
            ..RecognizerSettings::default()
        },
    )
    .await?;
    Ok(())
}

pub async fn run(cli: Cli) -> Result<()> {
    let text = match cli.command {
        Command::Serve {
            listen,
            data_dir,
            recognizer,
            recognizer_seed,
            snapshot_every,
        } => return serve(listen, data_dir, recognizer, recognizer_seed, snapshot_every).await,
        Command::Recognizer { listen, seed } => return recognizer(listen, seed).await,
        Command::Simulate { scenario, seed, out } => simulate(scenario.as_deref(), seed, &out).await?,
        Command::Analyze {
            log,
            sri_pre,
            sri_post,
            out,
        } => analyze_files(log.as_deref(), &sri_pre, &sri_post, &out)?,
        Command::Score { input } => score(&input)?,
        Command::Calibrate {
            pass_rate,
            action_match,
            attribute_match,
            trials,
            seed,
        } => run_calibration(
            CalibrationTargets {
                pass_rate,
                action_match,
                attribute_match,
            },
            trials,
            seed,
        )?,
    };
    print!("{text}");
    Ok(())
}
