//! Append-only action log with a tamper-evident hash chain.
//!
//! A log is JSONL: one header line, one line per recorded action, one
//! footer line. Every action line carries a chain digest,
//! `sha256(previous_digest_hex || canonical_record_json)`, seeded from
//! the digest of the header. The footer repeats the final digest, the
//! record count and the content-state hash, so any edit to any line is
//! detectable and a log can be replayed into the exact final state.

use crate::config::SimulationConfig;
use crate::feed::{CommentId, ContentState, PostId};
use crate::AgentId;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use std::collections::BTreeMap;
use std::io::Write;
use std::path::Path;
use thiserror::Error;

pub const LOG_FORMAT_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LogHeader {
    pub format_version: u32,
    pub tool_version: String,
    pub backend: String,
    pub config: SimulationConfig,
    /// sha256 of each input file, keyed by role (personas, graph, stories).
    pub input_sha256: BTreeMap<String, String>,
}

impl LogHeader {
    pub fn new(
        config: &SimulationConfig,
        backend: &str,
        input_sha256: BTreeMap<String, String>,
    ) -> LogHeader {
        LogHeader {
            format_version: LOG_FORMAT_VERSION,
            tool_version: env!("CARGO_PKG_VERSION").to_string(),
            backend: backend.to_string(),
            config: config.clone(),
            input_sha256,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ActionRecord {
    /// Global action counter, strictly increasing over the log. A turn
    /// can emit several records (a batch of likes plus a comment), each
    /// with its own step.
    pub step: u64,
    pub agent: AgentId,
    pub action: Action,
    /// sha256 of the rendered prompt that produced this action, if any.
    pub prompt_sha: Option<String>,
    pub latency_ms: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase")]
pub enum Action {
    Post { post_id: PostId, story_id: String, text: String },
    Comment { comment_id: CommentId, post_id: PostId, text: String },
    Like { post_id: PostId },
    Skip { reason: String },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LogFooter {
    pub chain: String,
    pub records: u64,
    pub turns: u64,
    pub state_sha256: String,
    pub backend_calls: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum LogLine {
    Header(LogHeader),
    Action { record: ActionRecord, chain: String },
    Footer(LogFooter),
}

#[derive(Debug, Error)]
pub enum LogError {
    #[error("log i/o: {0}")]
    Io(#[from] std::io::Error),
    #[error("log line {line}: not valid JSON: {source}")]
    Json { line: usize, source: serde_json::Error },
    #[error("log structure: {0}")]
    Structure(String),
    #[error("chain mismatch at record {index} (step {step}): log has been altered or truncated")]
    ChainMismatch { index: usize, step: u64 },
    #[error("footer mismatch: {0}")]
    Footer(String),
    #[error("replay failed at step {step}: {reason}")]
    Replay { step: u64, reason: String },
}

fn sha256_hex(bytes: &[u8]) -> String {
    let mut hasher = Sha256::new();
    hasher.update(bytes);
    hex::encode(hasher.finalize())
}

/// Digest seeding the chain: sha256 of the canonical header JSON.
pub fn chain_start(header: &LogHeader) -> String {
    sha256_hex(serde_json::to_string(header).expect("header serializes").as_bytes())
}

/// Next chain digest after appending `record`.
pub fn chain_next(prev_hex: &str, record: &ActionRecord) -> String {
    let body = serde_json::to_string(record).expect("record serializes");
    let mut hasher = Sha256::new();
    hasher.update(prev_hex.as_bytes());
    hasher.update(body.as_bytes());
    hex::encode(hasher.finalize())
}

/// Streams log lines to a writer, maintaining the chain.
pub struct LogWriter<W: Write> {
    out: W,
    chain: String,
    records: u64,
}

impl<W: Write> LogWriter<W> {
    pub fn new(mut out: W, header: &LogHeader) -> std::io::Result<LogWriter<W>> {
        let line = serde_json::to_string(&LogLine::Header(header.clone()))?;
        writeln!(out, "{line}")?;
        Ok(LogWriter { out, chain: chain_start(header), records: 0 })
    }

    pub fn record(&mut self, record: &ActionRecord) -> std::io::Result<()> {
        self.chain = chain_next(&self.chain, record);
        let line = serde_json::to_string(&LogLine::Action {
            record: record.clone(),
            chain: self.chain.clone(),
        })?;
        writeln!(self.out, "{line}")?;
        self.records += 1;
        Ok(())
    }

    /// Writes the footer and returns it. Consumes the writer.
    pub fn finish(
        mut self,
        turns: u64,
        state_sha256: &str,
        backend_calls: u64,
    ) -> std::io::Result<LogFooter> {
        let footer = LogFooter {
            chain: self.chain.clone(),
            records: self.records,
            turns,
            state_sha256: state_sha256.to_string(),
            backend_calls,
        };
        let line = serde_json::to_string(&LogLine::Footer(footer.clone()))?;
        writeln!(self.out, "{line}")?;
        self.out.flush()?;
        Ok(footer)
    }
}

/// A fully parsed, chain-verified log.
#[derive(Debug, Clone, PartialEq)]
pub struct ActionLog {
    pub header: LogHeader,
    pub records: Vec<ActionRecord>,
    pub footer: LogFooter,
}

/// Serialize a complete log in one call.
pub fn write_log<W: Write>(
    out: W,
    header: &LogHeader,
    records: &[ActionRecord],
    turns: u64,
    state_sha256: &str,
    backend_calls: u64,
) -> std::io::Result<LogFooter> {
    let mut writer = LogWriter::new(out, header)?;
    for record in records {
        writer.record(record)?;
    }
    writer.finish(turns, state_sha256, backend_calls)
}

/// Parse a log and verify its hash chain and footer.
pub fn read_log(text: &str) -> Result<ActionLog, LogError> {
    let mut header: Option<LogHeader> = None;
    let mut footer: Option<LogFooter> = None;
    let mut records: Vec<ActionRecord> = Vec::new();
    let mut chain = String::new();
    for (idx, raw) in text.lines().enumerate() {
        if raw.trim().is_empty() {
            continue;
        }
        let line: LogLine =
            serde_json::from_str(raw).map_err(|source| LogError::Json { line: idx + 1, source })?;
        if footer.is_some() {
            return Err(LogError::Structure(format!("line {} appears after the footer", idx + 1)));
        }
        match line {
            LogLine::Header(h) => {
                if header.is_some() {
                    return Err(LogError::Structure(format!("duplicate header at line {}", idx + 1)));
                }
                if h.format_version != LOG_FORMAT_VERSION {
                    return Err(LogError::Structure(format!(
                        "unsupported log format version {} (expected {})",
                        h.format_version, LOG_FORMAT_VERSION
                    )));
                }
                chain = chain_start(&h);
                header = Some(h);
            }
            LogLine::Action { record, chain: recorded } => {
                if header.is_none() {
                    return Err(LogError::Structure(format!(
                        "action at line {} before the header",
                        idx + 1
                    )));
                }
                let expected = chain_next(&chain, &record);
                if expected != recorded {
                    return Err(LogError::ChainMismatch { index: records.len(), step: record.step });
                }
                if let Some(prev) = records.last() {
                    if record.step <= prev.step {
                        return Err(LogError::Structure(format!(
                            "step {} at record {} does not increase (previous step {})",
                            record.step,
                            records.len(),
                            prev.step
                        )));
                    }
                }
                chain = expected;
                records.push(record);
            }
            LogLine::Footer(f) => {
                if header.is_none() {
                    return Err(LogError::Structure("footer before header".into()));
                }
                footer = Some(f);
            }
        }
    }
    let header = header.ok_or_else(|| LogError::Structure("missing header".into()))?;
    let footer = footer.ok_or_else(|| LogError::Structure("missing footer (truncated log)".into()))?;
    if footer.chain != chain {
        return Err(LogError::Footer("final chain digest does not match the records".into()));
    }
    if footer.records != records.len() as u64 {
        return Err(LogError::Footer(format!(
            "footer counts {} records but the log has {}",
            footer.records,
            records.len()
        )));
    }
    Ok(ActionLog { header, records, footer })
}

pub fn read_log_file(path: &Path) -> Result<ActionLog, LogError> {
    read_log(&std::fs::read_to_string(path)?)
}

/// Rebuild the content state by applying every record in order, and
/// check the result against the footer's state hash.
pub fn replay(log: &ActionLog) -> Result<ContentState, LogError> {
    let mut content = ContentState::new();
    for record in &log.records {
        let step = record.step;
        match &record.action {
            Action::Post { post_id, story_id, text } => {
                let assigned = content.add_post(record.agent, story_id, text, step);
                if assigned != *post_id {
                    return Err(LogError::Replay {
                        step,
                        reason: format!("post id {assigned} assigned where the log says {post_id}"),
                    });
                }
            }
            Action::Comment { comment_id, post_id, text } => {
                let assigned = content
                    .add_comment(*post_id, record.agent, text, step)
                    .map_err(|_| LogError::Replay {
                        step,
                        reason: format!("comment references unknown post {post_id}"),
                    })?;
                if assigned != *comment_id {
                    return Err(LogError::Replay {
                        step,
                        reason: format!(
                            "comment id {assigned} assigned where the log says {comment_id}"
                        ),
                    });
                }
            }
            Action::Like { post_id } => {
                let fresh = content.add_like(*post_id, record.agent, step).map_err(|_| {
                    LogError::Replay {
                        step,
                        reason: format!("like references unknown post {post_id}"),
                    }
                })?;
                if !fresh {
                    return Err(LogError::Replay {
                        step,
                        reason: format!("duplicate like on post {post_id} by agent {}", record.agent),
                    });
                }
            }
            Action::Skip { .. } => {}
        }
    }
    let state_hash = content.state_hash();
    if state_hash != log.footer.state_sha256 {
        return Err(LogError::Footer(format!(
            "replayed state hash {state_hash} does not match footer {}",
            log.footer.state_sha256
        )));
    }
    Ok(content)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::SimulationConfig;

    fn header() -> LogHeader {
        let mut inputs = BTreeMap::new();
        inputs.insert("personas".to_string(), "ab".repeat(32));
        LogHeader::new(&SimulationConfig::new(5, 1.0), "mock", inputs)
    }

    fn sample_records() -> Vec<ActionRecord> {
        vec![
            ActionRecord {
                step: 0,
                agent: 3,
                action: Action::Post {
                    post_id: 0,
                    story_id: "s01".into(),
                    text: "first post".into(),
                },
                prompt_sha: Some("aa".repeat(32)),
                latency_ms: 0,
            },
            ActionRecord {
                step: 1,
                agent: 7,
                action: Action::Like { post_id: 0 },
                prompt_sha: Some("bb".repeat(32)),
                latency_ms: 0,
            },
            ActionRecord {
                step: 2,
                agent: 7,
                action: Action::Comment { comment_id: 0, post_id: 0, text: "a reply".into() },
                prompt_sha: Some("cc".repeat(32)),
                latency_ms: 0,
            },
            ActionRecord {
                step: 3,
                agent: 4,
                action: Action::Skip { reason: "empty timeline".into() },
                prompt_sha: None,
                latency_ms: 0,
            },
        ]
    }

    fn state_for(records: &[ActionRecord]) -> ContentState {
        let mut content = ContentState::new();
        for r in records {
            match &r.action {
                Action::Post { story_id, text, .. } => {
                    content.add_post(r.agent, story_id, text, r.step);
                }
                Action::Comment { post_id, text, .. } => {
                    content.add_comment(*post_id, r.agent, text, r.step).unwrap();
                }
                Action::Like { post_id } => {
                    content.add_like(*post_id, r.agent, r.step).unwrap();
                }
                Action::Skip { .. } => {}
            }
        }
        content
    }

    fn write_sample() -> (String, Vec<ActionRecord>) {
        let records = sample_records();
        let state = state_for(&records);
        let mut buf = Vec::new();
        write_log(&mut buf, &header(), &records, 3, &state.state_hash(), 3).unwrap();
        (String::from_utf8(buf).unwrap(), records)
    }

    #[test]
    fn roundtrip_verifies_and_replays() {
        let (text, records) = write_sample();
        let log = read_log(&text).unwrap();
        assert_eq!(log.records, records);
        assert_eq!(log.footer.records, 4);
        assert_eq!(log.footer.turns, 3);
        let replayed = replay(&log).unwrap();
        assert_eq!(replayed.state_hash(), log.footer.state_sha256);
        assert_eq!(replayed.posts().len(), 1);
        assert_eq!(replayed.comments().len(), 1);
        assert_eq!(replayed.likes().len(), 1);
    }

    #[test]
    fn tampering_with_a_record_is_detected() {
        let (text, _) = write_sample();
        let tampered = text.replace("a reply", "x reply");
        match read_log(&tampered) {
            Err(LogError::ChainMismatch { index: 2, step: 2 }) => {}
            other => panic!("expected chain mismatch at record 2, got {other:?}"),
        }
    }

    #[test]
    fn truncation_is_detected() {
        let (text, _) = write_sample();
        let lines: Vec<&str> = text.lines().collect();
        // Drop the footer entirely.
        let no_footer = lines[..lines.len() - 1].join("\n");
        assert!(matches!(read_log(&no_footer), Err(LogError::Structure(_))));
        // Drop a record but keep the footer.
        let mut gutted: Vec<&str> = lines.clone();
        gutted.remove(2);
        let err = read_log(&gutted.join("\n")).unwrap_err();
        assert!(
            matches!(err, LogError::ChainMismatch { .. } | LogError::Footer(_)),
            "got {err:?}"
        );
    }

    #[test]
    fn structural_errors_are_reported() {
        assert!(matches!(read_log(""), Err(LogError::Structure(_))));
        let (text, _) = write_sample();
        let first = text.lines().next().unwrap();
        let doubled = format!("{first}\n{text}");
        assert!(matches!(read_log(&doubled), Err(LogError::Structure(_))));
        let swapped = {
            let mut lines: Vec<&str> = text.lines().collect();
            lines.swap(0, 1);
            lines.join("\n")
        };
        assert!(matches!(read_log(&swapped), Err(LogError::Structure(_))));
        assert!(matches!(read_log("not json"), Err(LogError::Json { line: 1, .. })));
    }

    #[test]
    fn steps_must_strictly_increase() {
        let mut records = sample_records();
        records[1].step = 0;
        let state = state_for(&records);
        let mut buf = Vec::new();
        write_log(&mut buf, &header(), &records, 3, &state.state_hash(), 3).unwrap();
        let err = read_log(std::str::from_utf8(&buf).unwrap()).unwrap_err();
        assert!(matches!(err, LogError::Structure(_)), "got {err:?}");
    }

    #[test]
    fn replay_rejects_inconsistent_records() {
        let header = header();
        // A like for a post that was never created.
        let records = vec![ActionRecord {
            step: 0,
            agent: 1,
            action: Action::Like { post_id: 9 },
            prompt_sha: None,
            latency_ms: 0,
        }];
        let mut buf = Vec::new();
        write_log(&mut buf, &header, &records, 1, &ContentState::new().state_hash(), 0).unwrap();
        let log = read_log(std::str::from_utf8(&buf).unwrap()).unwrap();
        match replay(&log) {
            Err(LogError::Replay { step: 0, .. }) => {}
            other => panic!("expected replay error, got {other:?}"),
        }
    }

    #[test]
    fn replay_checks_the_final_state_hash() {
        let records = sample_records();
        let mut buf = Vec::new();
        // Deliberately wrong state hash in the footer.
        write_log(&mut buf, &header(), &records, 3, &"0".repeat(64), 3).unwrap();
        let log = read_log(std::str::from_utf8(&buf).unwrap()).unwrap();
        assert!(matches!(replay(&log), Err(LogError::Footer(_))));
    }

    #[test]
    fn chain_depends_on_every_field() {
        let start = chain_start(&header());
        let base = sample_records().remove(0);
        let a = chain_next(&start, &base);
        let mut other = base.clone();
        other.latency_ms = 1;
        assert_ne!(a, chain_next(&start, &other));
        assert_ne!(a, chain_next(&"0".repeat(64), &base));
        assert_eq!(a, chain_next(&start, &base.clone()));
    }
}
