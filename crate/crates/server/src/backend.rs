//! Recognizer backends: the built-in synthetic one and an external process
//! reached over the line protocol in [`lia_core::perception::wire`].

use std::time::Duration;

use lia_core::perception::wire::{validate_backend_output, WireErrorCode};
use lia_core::perception::{
    BackendKind, GatewayError, RecognizerBackendDescriptor, RecognizerSettings, SimulatedScene, VocabHashes,
    WireMessage,
};
use lia_core::{CameraId, PerformanceId, RecognitionOutput, Vocabulary};
use tokio::io::{AsyncBufReadExt, AsyncWriteExt, BufReader};
use tokio::net::{TcpListener, TcpStream};

pub const DEFAULT_TIMEOUT: Duration = Duration::from_secs(5);

#[derive(Debug, Clone)]
pub struct EvaluationJob {
    pub performance_id: PerformanceId,
    pub camera_id: CameraId,
    pub frame_refs: Vec<String>,
    pub scene: SimulatedScene,
}

#[derive(Debug, Clone)]
pub struct ExternalRecognizer {
    pub addr: String,
    pub timeout: Duration,
}

#[derive(Debug, Clone)]
pub enum Backend {
    Synthetic(RecognizerSettings),
    External(ExternalRecognizer),
}

impl Backend {
    pub fn descriptor(&self, vocab: &Vocabulary) -> RecognizerBackendDescriptor {
        match self {
            Backend::Synthetic(_) => RecognizerBackendDescriptor {
                kind: BackendKind::Synthetic,
                endpoint: None,
                vocab_hashes: VocabHashes::of(vocab),
            },
            Backend::External(ext) => RecognizerBackendDescriptor {
                kind: BackendKind::External,
                endpoint: Some(ext.addr.clone()),
                vocab_hashes: VocabHashes::of(vocab),
            },
        }
    }

    /// Every output returned here has been validated against `vocab`.
    pub async fn evaluate(&self, job: &EvaluationJob, vocab: &Vocabulary) -> Result<RecognitionOutput, GatewayError> {
        let output = match self {
            Backend::Synthetic(settings) => settings
                .recognize(&job.scene, job.performance_id, job.camera_id, vocab.action_count())
                .map_err(GatewayError::MalformedBackendOutput)?,
            Backend::External(ext) => ext.evaluate(job, vocab).await?,
        };
        validate_backend_output(output, vocab)
    }
}

struct Connection {
    reader: BufReader<tokio::net::tcp::OwnedReadHalf>,
    writer: tokio::net::tcp::OwnedWriteHalf,
}

impl Connection {
    async fn send(&mut self, msg: &WireMessage) -> Result<(), GatewayError> {
        self.writer
            .write_all(msg.encode().as_bytes())
            .await
            .map_err(|e| GatewayError::EvaluationUnavailable(e.to_string()))
    }

    async fn receive(&mut self) -> Result<WireMessage, GatewayError> {
        let mut line = String::new();
        let n = self
            .reader
            .read_line(&mut line)
            .await
            .map_err(|e| GatewayError::EvaluationUnavailable(e.to_string()))?;
        if n == 0 {
            return Err(GatewayError::EvaluationUnavailable("recognizer closed the connection".into()));
        }
        WireMessage::parse(line.trim_end()).map_err(|e| GatewayError::MalformedBackendOutput(e.to_string()))
    }
}

impl ExternalRecognizer {
    pub fn new(addr: impl Into<String>) -> Self {
        Self {
            addr: addr.into(),
            timeout: DEFAULT_TIMEOUT,
        }
    }

    async fn handshake(&self, vocab: &Vocabulary) -> Result<Connection, GatewayError> {
        let stream = TcpStream::connect(&self.addr)
            .await
            .map_err(|e| GatewayError::EvaluationUnavailable(format!("{}: {e}", self.addr)))?;
        let (r, w) = stream.into_split();
        let mut conn = Connection {
            reader: BufReader::new(r),
            writer: w,
        };
        conn.send(&WireMessage::Hello(VocabHashes::of(vocab))).await?;
        match conn.receive().await? {
            WireMessage::Ok => Ok(conn),
            WireMessage::Error(WireErrorCode::VocabMismatch) => Err(GatewayError::VocabularyMismatch),
            other => Err(GatewayError::Protocol(format!("expected OK, got {}", other))),
        }
    }

    /// Connect once and complete the handshake; used at startup so a
    /// vocabulary mismatch is reported before any evaluation.
    pub async fn check(&self, vocab: &Vocabulary) -> Result<(), GatewayError> {
        tokio::time::timeout(self.timeout, self.handshake(vocab))
            .await
            .map_err(|_| GatewayError::EvaluationUnavailable(format!("no handshake within {:?}", self.timeout)))?
            .map(|_| ())
    }

    pub async fn evaluate(&self, job: &EvaluationJob, vocab: &Vocabulary) -> Result<RecognitionOutput, GatewayError> {
        let exchange = async {
            let mut conn = self.handshake(vocab).await?;
            conn.send(&WireMessage::Evaluate {
                performance_id: job.performance_id,
                camera_id: job.camera_id,
                frame_refs: job.frame_refs.clone(),
                scene: Some(job.scene.clone()),
            })
            .await?;
            match conn.receive().await? {
                WireMessage::Result(output) => Ok(output),
                WireMessage::Error(code) => Err(GatewayError::EvaluationUnavailable(format!(
                    "recognizer answered {}",
                    WireMessage::Error(code)
                ))),
                other => Err(GatewayError::Protocol(format!("expected RESULT, got {}", other))),
            }
        };
        tokio::time::timeout(self.timeout, exchange)
            .await
            .map_err(|_| GatewayError::EvaluationUnavailable(format!("no result within {:?}", self.timeout)))?
    }
}

/// Reference recognizer process: answers the line protocol with the
/// synthetic model. Runs until the listener fails.
pub async fn serve_recognizer(listener: TcpListener, vocab: Vocabulary, settings: RecognizerSettings) -> std::io::Result<()> {
    let hashes = VocabHashes::of(&vocab);
    loop {
        let (stream, _) = listener.accept().await?;
        let (hashes, vocab, settings) = (hashes.clone(), vocab.clone(), settings.clone());
        tokio::spawn(async move {
            if let Err(e) = recognizer_session(stream, &hashes, &vocab, &settings).await {
                tracing::debug!("recognizer session ended: {e}");
            }
        });
    }
}

async fn recognizer_session(
    stream: TcpStream,
    hashes: &VocabHashes,
    vocab: &Vocabulary,
    settings: &RecognizerSettings,
) -> std::io::Result<()> {
    let (r, mut w) = stream.into_split();
    let mut lines = BufReader::new(r).lines();
    let mut greeted = false;
    while let Some(line) = lines.next_line().await? {
        let reply = match WireMessage::parse(&line) {
            Ok(WireMessage::Hello(h)) if h == *hashes => {
                greeted = true;
                WireMessage::Ok
            }
            Ok(WireMessage::Hello(_)) => WireMessage::Error(WireErrorCode::VocabMismatch),
            Ok(WireMessage::Evaluate { .. }) if !greeted => WireMessage::Error(WireErrorCode::BadMessage),
            Ok(WireMessage::Evaluate {
                scene: None, ..
            }) => WireMessage::Error(WireErrorCode::NoSubject),
            Ok(WireMessage::Evaluate {
                performance_id,
                camera_id,
                scene: Some(scene),
                ..
            }) => match settings.recognize(&scene, performance_id, camera_id, vocab.action_count()) {
                Ok(out) => WireMessage::Result(out),
                Err(_) => WireMessage::Error(WireErrorCode::BadMessage),
            },
            Ok(_) | Err(_) => WireMessage::Error(WireErrorCode::BadMessage),
        };
        w.write_all(reply.encode().as_bytes()).await?;
    }
    Ok(())
}
