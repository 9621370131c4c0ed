//! Text generation backends and the prompt/response protocol.
//!
//! The engine talks to one [`GenerationBackend`]: the deterministic
//! [`MockBackend`] for offline runs and tests, an OpenAI-compatible
//! chat endpoint ([`OpenAiBackend`]) for real language models, or a
//! [`TranscriptBackend`] replaying recorded responses. Backends return
//! raw text; [`complete`] parses it against the fixed response grammar
//! and retries once with a format reminder when parsing fails.

mod length;
mod mock;
pub mod parse;
pub mod prompts;
mod remote;
mod stories;
mod transcript;

pub use length::MessageLengthSampler;
pub use mock::{MockBackend, MockParams};
pub use parse::ParseError;
pub use remote::{OpenAiBackend, RemoteOptions};
pub use stories::{
    load_stories, load_stories_file, select_stories, write_stories, write_stories_file,
    NewsStory, StoryError, MIN_STORIES_SHOWN,
};
pub use transcript::{RecordingBackend, Transcript, TranscriptBackend, TranscriptEntry};

use crate::persona::{Party, Persona};
use crate::AgentId;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

/// What the prompt asks the model to do.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PromptKind {
    FirstPost,
    Comment,
    LikeBatch,
    Enrich,
}

/// The slice of a persona a backend may condition on.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PersonaBrief {
    pub agent: AgentId,
    pub persona_text: String,
    pub partisanship: f64,
    pub party: Party,
    pub news_sources: Vec<String>,
}

impl PersonaBrief {
    pub fn of(agent: AgentId, p: &Persona) -> Self {
        PersonaBrief {
            agent,
            persona_text: p.persona_text.clone(),
            partisanship: p.partisanship,
            party: p.party,
            news_sources: p.news_sources.clone(),
        }
    }
}

/// One story as offered in a first-post prompt, in display order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StoryOffer {
    pub story_id: String,
    pub source: String,
}

/// One reply under a timeline post.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TimelineReply {
    pub author: AgentId,
    pub text: String,
}

/// One post as shown in a timeline prompt, in display order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TimelineEntry {
    pub post_id: crate::feed::PostId,
    pub author: AgentId,
    pub author_party: Party,
    pub author_partisanship: f64,
    pub text: String,
    pub likes: u32,
    pub replies: Vec<TimelineReply>,
}

/// Structured view of what the prompt showed, so deterministic backends
/// can decide without re-parsing prose.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum RequestContext {
    Stories(Vec<StoryOffer>),
    Timeline(Vec<TimelineEntry>),
    Enrich,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GenerationRequest {
    pub kind: PromptKind,
    pub persona: PersonaBrief,
    /// The exact user-message text sent to a chat backend.
    pub rendered_prompt: String,
    /// Requested length for comments; None leaves length to the prompt.
    pub target_words: Option<u32>,
    /// Seed for deterministic backends; also forwarded to remote APIs
    /// that accept one.
    pub seed: u64,
    pub context: RequestContext,
}

impl GenerationRequest {
    /// Digest of the full model input (persona text + rendered prompt),
    /// recorded in action logs and transcripts.
    pub fn prompt_sha(&self) -> String {
        let mut h = Sha256::new();
        h.update(self.persona.persona_text.as_bytes());
        h.update(b"\n\n");
        h.update(self.rendered_prompt.as_bytes());
        hex::encode(h.finalize())
    }

    /// How many items a like-batch response must cover.
    pub fn shown_count(&self) -> usize {
        match &self.context {
            RequestContext::Stories(s) => s.len(),
            RequestContext::Timeline(t) => t.len(),
            RequestContext::Enrich => 0,
        }
    }
}

/// Raw backend output before parsing.
#[derive(Debug, Clone, PartialEq)]
pub struct RawResponse {
    pub text: String,
    pub latency_ms: u64,
}

/// Parsed decision, variant matching the request's [`PromptKind`].
#[derive(Debug, Clone, PartialEq)]
pub enum ParsedDecision {
    /// Zero-based index into the offered stories, plus the message.
    Post { choice: usize, text: String },
    /// Zero-based index into the shown timeline, plus the message.
    Comment { choice: usize, text: String },
    /// One decision per shown post, in display order.
    LikeBatch(Vec<bool>),
    /// Raw enrichment text.
    Enriched(String),
}

#[derive(Debug, Clone, PartialEq)]
pub struct BackendResponse {
    pub raw_text: String,
    pub parsed: ParsedDecision,
    pub latency_ms: u64,
    /// Raw backend calls spent on this response (1, or 2 after a
    /// format-reminder retry).
    pub attempts: u32,
}

#[derive(Debug, Error)]
pub enum BackendError {
    #[error("transport: {0}")]
    Transport(String),
    #[error("backend returned HTTP {status}: {snippet}")]
    Status { status: u16, snippet: String },
    #[error("malformed backend reply: {0}")]
    Protocol(String),
    #[error("backend gave up after {attempts} attempts: {last}")]
    RetriesExhausted { attempts: u32, last: String },
    #[error("transcript exhausted at request {index}")]
    TranscriptExhausted { index: usize },
    #[error("transcript mismatch at request {index}: {reason}")]
    TranscriptMismatch { index: usize, reason: String },
}

#[derive(Debug, Error)]
pub enum GenerationError {
    #[error(transparent)]
    Backend(#[from] BackendError),
    #[error("unparseable {kind:?} reply after format retry: {reason}")]
    Unparseable { kind: PromptKind, reason: String },
}

/// A text generation backend. Implementations handle their own
/// transport-level retries; response *format* retries live in
/// [`complete`].
pub trait GenerationBackend {
    fn name(&self) -> &str;
    fn complete_raw(&self, request: &GenerationRequest) -> Result<RawResponse, BackendError>;
}

/// Ask `backend` for a completion and parse it.
///
/// On a parse failure the request is retried once with the parse error
/// and a format reminder appended to the prompt. If the retry still
/// fails to parse, like batches degrade to "no action" for missing
/// entries while post and comment requests give up.
pub fn complete(
    backend: &dyn GenerationBackend,
    request: &GenerationRequest,
) -> Result<BackendResponse, GenerationError> {
    let first = backend.complete_raw(request)?;
    match parse::parse_response(request, &first.text) {
        Ok(parsed) => Ok(BackendResponse {
            raw_text: first.text,
            parsed,
            latency_ms: first.latency_ms,
            attempts: 1,
        }),
        Err(parse_err) => {
            let retry_request = GenerationRequest {
                rendered_prompt: format!(
                    "{}\n\nYour previous reply could not be used ({parse_err}). \
                     Answer again, following the required format exactly.",
                    request.rendered_prompt
                ),
                ..request.clone()
            };
            let second = backend.complete_raw(&retry_request)?;
            match parse::parse_response(request, &second.text) {
                Ok(parsed) => Ok(BackendResponse {
                    raw_text: second.text,
                    parsed,
                    latency_ms: first.latency_ms + second.latency_ms,
                    attempts: 2,
                }),
                Err(err) if request.kind == PromptKind::LikeBatch => {
                    let parsed = ParsedDecision::LikeBatch(parse::parse_likes_lenient(
                        &second.text,
                        request.shown_count(),
                    ));
                    log::warn!(
                        "like batch still unparseable after retry ({err}); \
                         missing entries treated as no action"
                    );
                    Ok(BackendResponse {
                        raw_text: second.text,
                        parsed,
                        latency_ms: first.latency_ms + second.latency_ms,
                        attempts: 2,
                    })
                }
                Err(err) => Err(GenerationError::Unparseable {
                    kind: request.kind,
                    reason: err.to_string(),
                }),
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    pub(crate) fn request(kind: PromptKind, context: RequestContext) -> GenerationRequest {
        GenerationRequest {
            kind,
            persona: PersonaBrief {
                agent: 0,
                persona_text: "You are 30 years old.".into(),
                partisanship: 0.5,
                party: Party::Democrat,
                news_sources: vec!["cnn".into()],
            },
            rendered_prompt: "Pick something.".into(),
            target_words: None,
            seed: 7,
            context,
        }
    }

    struct Scripted {
        replies: std::sync::Mutex<Vec<&'static str>>,
        calls: std::sync::atomic::AtomicU32,
    }

    impl Scripted {
        fn new(replies: Vec<&'static str>) -> Self {
            Scripted {
                replies: std::sync::Mutex::new(replies),
                calls: std::sync::atomic::AtomicU32::new(0),
            }
        }
    }

    impl GenerationBackend for Scripted {
        fn name(&self) -> &str {
            "scripted"
        }

        fn complete_raw(&self, _req: &GenerationRequest) -> Result<RawResponse, BackendError> {
            self.calls.fetch_add(1, std::sync::atomic::Ordering::SeqCst);
            let mut replies = self.replies.lock().unwrap();
            if replies.is_empty() {
                return Err(BackendError::TranscriptExhausted { index: 0 });
            }
            Ok(RawResponse { text: replies.remove(0).to_string(), latency_ms: 0 })
        }
    }

    fn timeline(n: usize) -> RequestContext {
        RequestContext::Timeline(
            (0..n)
                .map(|i| TimelineEntry {
                    post_id: i as u32,
                    author: i + 1,
                    author_party: Party::Republican,
                    author_partisanship: -0.5,
                    text: format!("post {i}"),
                    likes: 0,
                    replies: vec![],
                })
                .collect(),
        )
    }

    #[test]
    fn clean_response_parses_on_first_attempt() {
        let backend = Scripted::new(vec!["CHOICE: 2\nTEXT: I agree with this."]);
        let req = request(PromptKind::Comment, timeline(3));
        let resp = complete(&backend, &req).unwrap();
        assert_eq!(resp.attempts, 1);
        assert_eq!(resp.parsed, ParsedDecision::Comment { choice: 1, text: "I agree with this.".into() });
    }

    #[test]
    fn garbled_response_triggers_one_format_retry() {
        let backend =
            Scripted::new(vec!["sure, happy to help!", "CHOICE: 1\nTEXT: Fine."]);
        let req = request(PromptKind::Comment, timeline(2));
        let resp = complete(&backend, &req).unwrap();
        assert_eq!(resp.attempts, 2);
        assert_eq!(backend.calls.load(std::sync::atomic::Ordering::SeqCst), 2);
        assert_eq!(resp.parsed, ParsedDecision::Comment { choice: 0, text: "Fine.".into() });
    }

    #[test]
    fn like_batch_degrades_to_no_action_after_retry() {
        let backend = Scripted::new(vec!["nope", "LIKE 2: yes\nsomething else"]);
        let req = request(PromptKind::LikeBatch, timeline(3));
        let resp = complete(&backend, &req).unwrap();
        assert_eq!(resp.parsed, ParsedDecision::LikeBatch(vec![false, true, false]));
    }

    #[test]
    fn comment_gives_up_after_two_garbled_replies() {
        let backend = Scripted::new(vec!["???", "still ???"]);
        let req = request(PromptKind::Comment, timeline(2));
        let err = complete(&backend, &req).unwrap_err();
        assert!(matches!(err, GenerationError::Unparseable { kind: PromptKind::Comment, .. }));
    }

    #[test]
    fn backend_errors_pass_through() {
        let backend = Scripted::new(vec![]);
        let req = request(PromptKind::Comment, timeline(2));
        assert!(matches!(complete(&backend, &req), Err(GenerationError::Backend(_))));
    }

    #[test]
    fn prompt_sha_covers_persona_and_prompt() {
        let a = request(PromptKind::Comment, timeline(1));
        let mut b = a.clone();
        b.persona.persona_text = "You are 31 years old.".into();
        let mut c = a.clone();
        c.rendered_prompt = "Pick something else.".into();
        assert_ne!(a.prompt_sha(), b.prompt_sha());
        assert_ne!(a.prompt_sha(), c.prompt_sha());
        assert_eq!(a.prompt_sha(), a.clone().prompt_sha());
    }
}
