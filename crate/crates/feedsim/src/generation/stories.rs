//! News story fixtures: the headline pool agents post about.

use crate::outlets;
use std::io::{self, BufRead, Write};
use std::path::Path;
use thiserror::Error;

/// Story sets offered in a first-post prompt are padded to at least
/// this many entries when the persona's media diet matches fewer.
pub const MIN_STORIES_SHOWN: usize = 10;

pub const STORY_COLUMNS: [&str; 5] = ["id", "source", "headline", "summary", "date"];

#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct NewsStory {
    pub id: String,
    /// Outlet id from the fixed registry.
    pub source: String,
    pub headline: String,
    pub summary: String,
    /// ISO date, e.g. 2020-07-01.
    pub date: String,
}

#[derive(Debug, Error)]
pub enum StoryError {
    #[error("io: {0}")]
    Io(#[from] io::Error),
    #[error("stories header mismatch: expected {expected:?}, got {got:?}")]
    Header { expected: String, got: String },
    #[error("stories row {row}: expected {expected} columns, got {got}")]
    ColumnCount { row: usize, expected: usize, got: usize },
    #[error("stories row {row}, field {field}: {reason}")]
    Field { row: usize, field: &'static str, reason: String },
    #[error("stories row {row}: duplicate story id {id:?}")]
    DuplicateId { row: usize, id: String },
}

fn valid_date(s: &str) -> bool {
    let b = s.as_bytes();
    b.len() == 10
        && b[4] == b'-'
        && b[7] == b'-'
        && s.char_indices().all(|(i, c)| matches!(i, 4 | 7) || c.is_ascii_digit())
}

/// Parse a stories TSV. Sources must come from the outlet registry.
pub fn load_stories<R: BufRead>(r: R) -> Result<Vec<NewsStory>, StoryError> {
    let expected = STORY_COLUMNS.join("\t");
    let mut lines = r.lines();
    let header = match lines.next() {
        Some(h) => h?,
        None => return Err(StoryError::Header { expected, got: String::new() }),
    };
    if header.trim_end_matches(['\r', '\n']) != expected {
        return Err(StoryError::Header { expected, got: header });
    }

    let mut out = Vec::new();
    let mut ids = std::collections::BTreeSet::new();
    for (i, line) in lines.enumerate() {
        let row = i + 2;
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let cells: Vec<&str> = line.split('\t').collect();
        if cells.len() != STORY_COLUMNS.len() {
            return Err(StoryError::ColumnCount {
                row,
                expected: STORY_COLUMNS.len(),
                got: cells.len(),
            });
        }
        let field = |idx: usize, name: &'static str| -> Result<String, StoryError> {
            let v = cells[idx].trim();
            if v.is_empty() {
                Err(StoryError::Field { row, field: name, reason: "must not be empty".into() })
            } else {
                Ok(v.to_string())
            }
        };
        let id = field(0, "id")?;
        if !ids.insert(id.clone()) {
            return Err(StoryError::DuplicateId { row, id });
        }
        let source = field(1, "source")?;
        if !outlets::is_known(&source) {
            return Err(StoryError::Field {
                row,
                field: "source",
                reason: format!("unknown outlet {source:?}"),
            });
        }
        let date = field(4, "date")?;
        if !valid_date(&date) {
            return Err(StoryError::Field {
                row,
                field: "date",
                reason: format!("expected YYYY-MM-DD, got {date:?}"),
            });
        }
        out.push(NewsStory {
            id,
            source,
            headline: field(2, "headline")?,
            summary: field(3, "summary")?,
            date,
        });
    }
    Ok(out)
}

pub fn load_stories_file(path: &Path) -> Result<Vec<NewsStory>, StoryError> {
    let f = std::fs::File::open(path)?;
    load_stories(io::BufReader::new(f))
}

pub fn write_stories<W: Write>(mut w: W, stories: &[NewsStory]) -> io::Result<()> {
    writeln!(w, "{}", STORY_COLUMNS.join("\t"))?;
    for s in stories {
        writeln!(w, "{}\t{}\t{}\t{}\t{}", s.id, s.source, s.headline, s.summary, s.date)?;
    }
    Ok(())
}

pub fn write_stories_file(path: &Path, stories: &[NewsStory]) -> io::Result<()> {
    let f = std::fs::File::create(path)?;
    let mut w = io::BufWriter::new(f);
    write_stories(&mut w, stories)?;
    w.flush()
}

/// Pick which stories a persona gets offered, as indices into `stories`.
///
/// Stories from the persona's own media diet come first (ascending story
/// id); if fewer than [`MIN_STORIES_SHOWN`] match, the set is padded
/// with the remaining stories, also ascending by id. Deterministic, no
/// randomness.
pub fn select_stories(news_sources: &[String], stories: &[NewsStory]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..stories.len()).collect();
    order.sort_by(|&a, &b| stories[a].id.cmp(&stories[b].id));

    let in_diet =
        |idx: &usize| news_sources.iter().any(|s| s == &stories[*idx].source);
    let mut selected: Vec<usize> = order.iter().copied().filter(in_diet).collect();
    if selected.len() < MIN_STORIES_SHOWN {
        for idx in &order {
            if selected.len() >= MIN_STORIES_SHOWN {
                break;
            }
            if !selected.contains(idx) {
                selected.push(*idx);
            }
        }
    }
    selected
}
