//! Run reports: the per-platform outcome summary.

use super::{comment_party_pairs, ei_index, like_party_pairs, ToxicityScorer, ToxicitySummary};
use crate::feed::{ContentState, Platform};
use crate::persona::Party;
use serde::{Deserialize, Serialize};
use std::fmt::Write as _;
use std::io::{self, Read, Write};
use std::path::Path;
use thiserror::Error;

pub const REPORT_SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InteractionCounts {
    pub posts: usize,
    pub comments: usize,
    pub likes: usize,
    /// Comment pairs between opposing major parties.
    pub cross_party_comments: usize,
    pub within_party_comments: usize,
    pub cross_party_likes: usize,
    pub within_party_likes: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ToxicityBlock {
    pub scorer: String,
    pub mean: Option<f64>,
    pub mean_posts: Option<f64>,
    pub mean_comments: Option<f64>,
    pub scored: usize,
    pub total: usize,
    pub coverage: f64,
}

impl From<ToxicitySummary> for ToxicityBlock {
    fn from(s: ToxicitySummary) -> Self {
        let coverage = s.coverage();
        ToxicityBlock {
            scorer: s.scorer,
            mean: s.mean,
            mean_posts: s.mean_posts,
            mean_comments: s.mean_comments,
            scored: s.scored,
            total: s.total,
            coverage,
        }
    }
}

/// The per-run outcome document written by analysis.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub schema_version: u32,
    pub tool_version: String,
    pub platform: Platform,
    pub seed: u64,
    pub agents: usize,
    pub counts: InteractionCounts,
    /// E-I index over comments; None when no major-party pairs exist.
    pub ei_comments: Option<f64>,
    /// E-I index over likes; None when no major-party pairs exist.
    pub ei_likes: Option<f64>,
    pub toxicity: ToxicityBlock,
}

#[derive(Debug, Error)]
pub enum ReportError {
    #[error("io: {0}")]
    Io(#[from] io::Error),
    #[error("report is not valid JSON: {0}")]
    Json(#[from] serde_json::Error),
    #[error("unsupported report schema version {got} (this tool reads {supported})")]
    SchemaVersion { got: u32, supported: u32 },
}

fn split_pairs(pairs: impl Iterator<Item = (Party, Party)>) -> (usize, usize) {
    let mut cross = 0;
    let mut within = 0;
    for (a, t) in pairs {
        if !a.is_major() || !t.is_major() {
            continue;
        }
        if a == t {
            within += 1;
        } else {
            cross += 1;
        }
    }
    (cross, within)
}

/// Compute the outcome report for one finished run.
pub fn build_report(
    content: &ContentState,
    party_of: &[Party],
    platform: Platform,
    seed: u64,
    scorer: &dyn ToxicityScorer,
) -> RunReport {
    let (cross_party_comments, within_party_comments) =
        split_pairs(comment_party_pairs(content, party_of));
    let (cross_party_likes, within_party_likes) =
        split_pairs(like_party_pairs(content, party_of));
    RunReport {
        schema_version: REPORT_SCHEMA_VERSION,
        tool_version: env!("CARGO_PKG_VERSION").to_string(),
        platform,
        seed,
        agents: party_of.len(),
        counts: InteractionCounts {
            posts: content.posts().len(),
            comments: content.comments().len(),
            likes: content.likes().len(),
            cross_party_comments,
            within_party_comments,
            cross_party_likes,
            within_party_likes,
        },
        ei_comments: ei_index(comment_party_pairs(content, party_of)),
        ei_likes: ei_index(like_party_pairs(content, party_of)),
        toxicity: super::summarize_toxicity(content, scorer).into(),
    }
}

pub fn write_report<W: Write>(mut w: W, report: &RunReport) -> Result<(), ReportError> {
    serde_json::to_writer_pretty(&mut w, report)?;
    w.write_all(b"\n")?;
    Ok(())
}

pub fn read_report<R: Read>(r: R) -> Result<RunReport, ReportError> {
    let report: RunReport = serde_json::from_reader(r)?;
    if report.schema_version != REPORT_SCHEMA_VERSION {
        return Err(ReportError::SchemaVersion {
            got: report.schema_version,
            supported: REPORT_SCHEMA_VERSION,
        });
    }
    Ok(report)
}

pub fn write_report_file(path: &Path, report: &RunReport) -> Result<(), ReportError> {
    write_report(std::fs::File::create(path)?, report)
}

pub fn read_report_file(path: &Path) -> Result<RunReport, ReportError> {
    read_report(std::fs::File::open(path)?)
}

fn fmt_opt(v: Option<f64>) -> String {
    match v {
        Some(v) => format!("{v:+.3}"),
        None => "n/a".to_string(),
    }
}

/// Side-by-side outcome table, one row per report.
pub fn text_table(reports: &[RunReport]) -> String {
    let mut out = String::new();
    writeln!(
        out,
        "{:<10} {:>6} {:>10} {:>12} {:>9} {:>9} {:>7}",
        "platform", "seed", "toxicity", "ei_comments", "ei_likes", "comments", "likes"
    )
    .unwrap();
    for r in reports {
        writeln!(
            out,
            "{:<10} {:>6} {:>10} {:>12} {:>9} {:>9} {:>7}",
            r.platform.label(),
            r.seed,
            r.toxicity.mean.map(|m| format!("{m:.3}")).unwrap_or_else(|| "n/a".into()),
            fmt_opt(r.ei_comments),
            fmt_opt(r.ei_likes),
            r.counts.comments,
            r.counts.likes,
        )
        .unwrap();
    }
    out
}

/// Plain-text excerpt of the most engaged threads, newest first among
/// ties, for eyeballing what a run produced.
pub fn timeline_excerpt(content: &ContentState, party_of: &[Party], top: usize) -> String {
    let mut ranked: Vec<_> = content
        .posts()
        .iter()
        .map(|p| {
            (
                content.like_count(p.id) + content.comment_count(p.id),
                p.created_step,
                p.id,
            )
        })
        .collect();
    ranked.sort_unstable_by_key(|&(score, step, id)| std::cmp::Reverse((score, step, id)));

    let party_tag = |agent: usize| -> &'static str {
        match party_of.get(agent) {
            Some(Party::Democrat) => "D",
            Some(Party::Republican) => "R",
            _ => "I",
        }
    };

    let mut out = String::new();
    for (i, &(_, _, id)) in ranked.iter().take(top).enumerate() {
        let post = content.post(id).expect("ranked post exists");
        if i > 0 {
            out.push('\n');
        }
        writeln!(
            out,
            "Post {id} by User {} ({}) [story {}], {} likes, {} comments",
            post.author,
            party_tag(post.author),
            post.story_id,
            content.like_count(id),
            content.comment_count(id),
        )
        .unwrap();
        writeln!(out, "  {}", post.text).unwrap();
        for comment in content.comments_on(id) {
            writeln!(
                out,
                "  Reply from User {} ({}): {}",
                comment.author,
                party_tag(comment.author),
                comment.text
            )
            .unwrap();
        }
    }
    out
}
