//! Record and replay backends.
//!
//! [`RecordingBackend`] wraps any backend and captures every exchange;
//! [`TranscriptBackend`] plays a capture back in order, verifying that
//! the simulation issues the same requests (by kind and prompt digest)
//! that produced the recording. Replayed runs are fully offline and
//! deterministic even when the original backend was a live model.

use super::{BackendError, GenerationBackend, GenerationRequest, PromptKind, RawResponse};
use serde::{Deserialize, Serialize};
use std::io::{self, Read, Write};
use std::path::Path;
use std::sync::Mutex;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TranscriptEntry {
    pub kind: PromptKind,
    pub prompt_sha: String,
    pub response: String,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct Transcript {
    pub entries: Vec<TranscriptEntry>,
}

impl Transcript {
    pub fn save<W: Write>(&self, w: W) -> io::Result<()> {
        serde_json::to_writer_pretty(w, self).map_err(io::Error::other)
    }

    pub fn load<R: Read>(r: R) -> io::Result<Self> {
        serde_json::from_reader(r).map_err(io::Error::other)
    }

    pub fn save_file(&self, path: &Path) -> io::Result<()> {
        let mut f = std::fs::File::create(path)?;
        self.save(&mut f)?;
        f.write_all(b"\n")
    }

    pub fn load_file(path: &Path) -> io::Result<Self> {
        Self::load(std::fs::File::open(path)?)
    }
}

/// Replays a transcript in order.
pub struct TranscriptBackend {
    transcript: Transcript,
    cursor: Mutex<usize>,
    /// When set, each request's prompt digest must match the recording.
    verify_prompts: bool,
}

impl TranscriptBackend {
    pub fn new(transcript: Transcript) -> Self {
        TranscriptBackend { transcript, cursor: Mutex::new(0), verify_prompts: true }
    }

    /// Replay without digest checks, for transcripts recorded against a
    /// different persona rendering.
    pub fn lenient(transcript: Transcript) -> Self {
        TranscriptBackend { verify_prompts: false, ..Self::new(transcript) }
    }

    /// How many entries have been consumed.
    pub fn consumed(&self) -> usize {
        *self.cursor.lock().unwrap()
    }
}

impl GenerationBackend for TranscriptBackend {
    fn name(&self) -> &str {
        "transcript"
    }

    fn complete_raw(&self, request: &GenerationRequest) -> Result<RawResponse, BackendError> {
        let mut cursor = self.cursor.lock().unwrap();
        let index = *cursor;
        let entry = self
            .transcript
            .entries
            .get(index)
            .ok_or(BackendError::TranscriptExhausted { index })?;
        if entry.kind != request.kind {
            return Err(BackendError::TranscriptMismatch {
                index,
                reason: format!("recorded {:?}, requested {:?}", entry.kind, request.kind),
            });
        }
        if self.verify_prompts && entry.prompt_sha != request.prompt_sha() {
            return Err(BackendError::TranscriptMismatch {
                index,
                reason: format!(
                    "prompt digest {} does not match recorded {}",
                    request.prompt_sha(),
                    entry.prompt_sha
                ),
            });
        }
        *cursor += 1;
        Ok(RawResponse { text: entry.response.clone(), latency_ms: 0 })
    }
}

/// Wraps a backend and records every exchange.
pub struct RecordingBackend<B> {
    inner: B,
    recorded: Mutex<Vec<TranscriptEntry>>,
}

impl<B: GenerationBackend> RecordingBackend<B> {
    pub fn new(inner: B) -> Self {
        RecordingBackend { inner, recorded: Mutex::new(Vec::new()) }
    }

    pub fn transcript(&self) -> Transcript {
        Transcript { entries: self.recorded.lock().unwrap().clone() }
    }
}

impl<B: GenerationBackend> GenerationBackend for RecordingBackend<B> {
    fn name(&self) -> &str {
        self.inner.name()
    }

    fn complete_raw(&self, request: &GenerationRequest) -> Result<RawResponse, BackendError> {
        let resp = self.inner.complete_raw(request)?;
        self.recorded.lock().unwrap().push(TranscriptEntry {
            kind: request.kind,
            prompt_sha: request.prompt_sha(),
            response: resp.text.clone(),
        });
        Ok(resp)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generation::{MockBackend, PersonaBrief, RequestContext, StoryOffer};
    use crate::persona::Party;

    fn request(seed: u64) -> GenerationRequest {
        GenerationRequest {
            kind: PromptKind::FirstPost,
            persona: PersonaBrief {
                agent: 0,
                persona_text: "You are 52 years old.".into(),
                partisanship: -0.7,
                party: Party::Republican,
                news_sources: vec!["fox".into()],
            },
            rendered_prompt: format!("prompt {seed}"),
            target_words: None,
            seed,
            context: RequestContext::Stories(vec![StoryOffer {
                story_id: "s01".into(),
                source: "fox".into(),
            }]),
        }
    }

    #[test]
    fn record_then_replay_reproduces_responses() {
        let recorder = RecordingBackend::new(MockBackend::default());
        let r1 = recorder.complete_raw(&request(1)).unwrap();
        let r2 = recorder.complete_raw(&request(2)).unwrap();
        let transcript = recorder.transcript();
        assert_eq!(transcript.entries.len(), 2);

        let replay = TranscriptBackend::new(transcript);
        assert_eq!(replay.complete_raw(&request(1)).unwrap().text, r1.text);
        assert_eq!(replay.complete_raw(&request(2)).unwrap().text, r2.text);
        assert_eq!(replay.consumed(), 2);
    }

    #[test]
    fn exhausted_transcript_errors() {
        let replay = TranscriptBackend::new(Transcript::default());
        assert!(matches!(
            replay.complete_raw(&request(1)),
            Err(BackendError::TranscriptExhausted { index: 0 })
        ));
    }

    #[test]
    fn kind_mismatch_is_detected() {
        let recorder = RecordingBackend::new(MockBackend::default());
        recorder.complete_raw(&request(1)).unwrap();
        let replay = TranscriptBackend::new(recorder.transcript());
        let mut wrong = request(1);
        wrong.kind = PromptKind::Enrich;
        wrong.context = RequestContext::Enrich;
        assert!(matches!(
            replay.complete_raw(&wrong),
            Err(BackendError::TranscriptMismatch { index: 0, .. })
        ));
    }

    #[test]
    fn prompt_drift_is_detected_unless_lenient() {
        let recorder = RecordingBackend::new(MockBackend::default());
        recorder.complete_raw(&request(1)).unwrap();
        let transcript = recorder.transcript();

        let mut drifted = request(1);
        drifted.rendered_prompt = "different prompt".into();

        let strict = TranscriptBackend::new(transcript.clone());
        assert!(matches!(
            strict.complete_raw(&drifted),
            Err(BackendError::TranscriptMismatch { .. })
        ));

        let lenient = TranscriptBackend::lenient(transcript);
        assert!(lenient.complete_raw(&drifted).is_ok());
    }

    #[test]
    fn transcript_roundtrips_through_json() {
        let recorder = RecordingBackend::new(MockBackend::default());
        recorder.complete_raw(&request(1)).unwrap();
        let transcript = recorder.transcript();
        let mut buf = Vec::new();
        transcript.save(&mut buf).unwrap();
        assert_eq!(Transcript::load(&buf[..]).unwrap(), transcript);
    }
}
