//! Toxicity scoring over run content.
//!
//! Two scorers share one interface: the offline [`LexiconScorer`]
//! (always available, deterministic) and the remote
//! [`PerspectiveScorer`] speaking the Comment Analyzer protocol.
//! [`summarize_toxicity`] walks all posts and comments, deduplicates by
//! text hash, and reports unweighted means plus coverage, so partial
//! remote failures degrade the estimate instead of killing the run.

use super::lexicon;
use crate::feed::ContentState;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use std::collections::BTreeMap;
use std::time::Duration;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ToxicityError {
    #[error("transport: {0}")]
    Transport(String),
    #[error("scorer returned HTTP {status}: {snippet}")]
    Status { status: u16, snippet: String },
    #[error("malformed scorer reply: {0}")]
    Protocol(String),
    #[error("scorer gave up after {attempts} attempts: {last}")]
    RetriesExhausted { attempts: u32, last: String },
    #[error("no API key: environment variable {0} is unset or empty")]
    MissingKey(String),
}

pub trait ToxicityScorer {
    fn name(&self) -> &str;
    /// Score one text in [0, 1].
    fn score(&self, text: &str) -> Result<f64, ToxicityError>;
}

/// The bundled offline scorer; see [`lexicon`].
#[derive(Debug, Clone, Copy, Default)]
pub struct LexiconScorer;

impl ToxicityScorer for LexiconScorer {
    fn name(&self) -> &str {
        "lexicon"
    }

    fn score(&self, text: &str) -> Result<f64, ToxicityError> {
        Ok(lexicon::score(text))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PerspectiveOptions {
    /// Full analyze endpoint URL.
    pub url: String,
    /// Environment variable holding the API key.
    pub api_key_env: String,
    pub timeout_secs: u64,
    pub max_attempts: u32,
    pub backoff_base_ms: u64,
}

impl Default for PerspectiveOptions {
    fn default() -> Self {
        PerspectiveOptions {
            url: "https://commentanalyzer.googleapis.com/v1alpha1/comments:analyze".into(),
            api_key_env: "PERSPECTIVE_API_KEY".into(),
            timeout_secs: 30,
            max_attempts: 5,
            backoff_base_ms: 250,
        }
    }
}

/// Remote scorer speaking the Comment Analyzer `comments:analyze`
/// protocol, requesting the TOXICITY attribute.
pub struct PerspectiveScorer {
    opts: PerspectiveOptions,
    api_key: String,
    agent: ureq::Agent,
}

impl PerspectiveScorer {
    pub fn new(opts: PerspectiveOptions) -> Result<Self, ToxicityError> {
        let api_key = std::env::var(&opts.api_key_env)
            .ok()
            .filter(|k| !k.is_empty())
            .ok_or_else(|| ToxicityError::MissingKey(opts.api_key_env.clone()))?;
        let config = ureq::Agent::config_builder()
            .timeout_global(Some(Duration::from_secs(opts.timeout_secs)))
            .http_status_as_error(false)
            .build();
        Ok(PerspectiveScorer { opts, api_key, agent: config.into() })
    }

    fn try_once(&self, text: &str) -> Result<f64, (bool, ToxicityError)> {
        let body = serde_json::json!({
            "comment": {"text": text},
            "requestedAttributes": {"TOXICITY": {}},
            "languages": ["en"],
            "doNotStore": true,
        });
        let url = format!("{}?key={}", self.opts.url, self.api_key);
        let mut resp = self
            .agent
            .post(&url)
            .send_json(&body)
            .map_err(|e| (true, ToxicityError::Transport(e.to_string())))?;
        let status = resp.status().as_u16();
        if status == 429 || status >= 500 {
            let snippet = resp.body_mut().read_to_string().unwrap_or_default();
            return Err((true, ToxicityError::Status { status, snippet: snip(&snippet) }));
        }
        if status >= 400 {
            let snippet = resp.body_mut().read_to_string().unwrap_or_default();
            return Err((false, ToxicityError::Status { status, snippet: snip(&snippet) }));
        }
        let parsed: serde_json::Value = resp
            .body_mut()
            .read_json()
            .map_err(|e| (false, ToxicityError::Protocol(format!("bad JSON: {e}"))))?;
        parsed
            .pointer("/attributeScores/TOXICITY/summaryScore/value")
            .and_then(|v| v.as_f64())
            .ok_or_else(|| {
                (false, ToxicityError::Protocol("missing TOXICITY summary score".into()))
            })
    }
}

fn snip(s: &str) -> String {
    const LIMIT: usize = 200;
    if s.len() <= LIMIT {
        s.to_string()
    } else {
        let mut end = LIMIT;
        while !s.is_char_boundary(end) {
            end -= 1;
        }
        format!("{}...", &s[..end])
    }
}

impl ToxicityScorer for PerspectiveScorer {
    fn name(&self) -> &str {
        "perspective"
    }

    fn score(&self, text: &str) -> Result<f64, ToxicityError> {
        let mut last: Option<ToxicityError> = None;
        for attempt in 0..self.opts.max_attempts {
            if attempt > 0 {
                let backoff = self.opts.backoff_base_ms.saturating_mul(1 << (attempt - 1));
                std::thread::sleep(Duration::from_millis(backoff));
            }
            match self.try_once(text) {
                Ok(v) => return Ok(v.clamp(0.0, 1.0)),
                Err((retryable, err)) => {
                    if !retryable {
                        return Err(err);
                    }
                    log::warn!(
                        "toxicity attempt {}/{} failed: {err}",
                        attempt + 1,
                        self.opts.max_attempts
                    );
                    last = Some(err);
                }
            }
        }
        Err(ToxicityError::RetriesExhausted {
            attempts: self.opts.max_attempts,
            last: last.map(|e| e.to_string()).unwrap_or_default(),
        })
    }
}

/// Mean toxicity over all posts and comments of a run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ToxicitySummary {
    pub scorer: String,
    /// Unweighted mean over every scored text; None if nothing scored.
    pub mean: Option<f64>,
    pub mean_posts: Option<f64>,
    pub mean_comments: Option<f64>,
    /// Texts that received a score.
    pub scored: usize,
    /// Texts submitted.
    pub total: usize,
}

impl ToxicitySummary {
    pub fn coverage(&self) -> f64 {
        if self.total == 0 {
            1.0
        } else {
            self.scored as f64 / self.total as f64
        }
    }
}

fn text_key(text: &str) -> [u8; 32] {
    Sha256::digest(text.as_bytes()).into()
}

fn mean(values: &[f64]) -> Option<f64> {
    if values.is_empty() {
        None
    } else {
        Some(values.iter().sum::<f64>() / values.len() as f64)
    }
}

/// Score every post and comment. Identical texts are scored once
/// (cached by content hash); per-text scorer failures are logged and
/// reduce coverage rather than failing the summary.
pub fn summarize_toxicity(content: &ContentState, scorer: &dyn ToxicityScorer) -> ToxicitySummary {
    let mut cache: BTreeMap<[u8; 32], Option<f64>> = BTreeMap::new();
    let mut score_of = |text: &str| -> Option<f64> {
        *cache.entry(text_key(text)).or_insert_with(|| match scorer.score(text) {
            Ok(v) => Some(v),
            Err(err) => {
                log::warn!("toxicity scoring failed for one text: {err}");
                None
            }
        })
    };

    let post_scores: Vec<Option<f64>> =
        content.posts().iter().map(|p| score_of(&p.text)).collect();
    let comment_scores: Vec<Option<f64>> =
        content.comments().iter().map(|c| score_of(&c.text)).collect();

    let posts: Vec<f64> = post_scores.iter().copied().flatten().collect();
    let comments: Vec<f64> = comment_scores.iter().copied().flatten().collect();
    let all: Vec<f64> = posts.iter().chain(comments.iter()).copied().collect();

    ToxicitySummary {
        scorer: scorer.name().to_string(),
        mean: mean(&all),
        mean_posts: mean(&posts),
        mean_comments: mean(&comments),
        scored: all.len(),
        total: post_scores.len() + comment_scores.len(),
    }
}
