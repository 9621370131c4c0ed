//! Response grammar parsing.
//!
//! Post and comment replies:
//! ```text
//! CHOICE: <1-based index>
//! TEXT: <message, may continue on following lines>
//! ```
//! Like-batch replies, one line per shown message, any order:
//! ```text
//! LIKE <1-based index>: yes|no
//! ```
//! Parsing is strict about structure (every index answered exactly
//! once, choices in range) but forgiving about case and surrounding
//! whitespace, since language models get those wrong routinely.

use super::{GenerationRequest, ParsedDecision, PromptKind};
use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ParseError {
    #[error("no CHOICE line found")]
    MissingChoice,
    #[error("CHOICE is not a number: {0:?}")]
    ChoiceNotANumber(String),
    #[error("CHOICE {choice} out of range 1..={max}")]
    ChoiceOutOfRange { choice: usize, max: usize },
    #[error("no TEXT line found")]
    MissingText,
    #[error("TEXT is empty")]
    EmptyText,
    #[error("no decision for message {0}")]
    MissingLike(usize),
    #[error("conflicting decisions for message {0}")]
    ConflictingLike(usize),
    #[error("LIKE index {index} out of range 1..={max}")]
    LikeOutOfRange { index: usize, max: usize },
    #[error("LIKE value {0:?} is not yes or no")]
    BadLikeValue(String),
    #[error("enrichment reply is empty")]
    EmptyEnrichment,
    #[error("nothing shown to choose from")]
    NothingShown,
}

/// Case-insensitive prefix match; returns the rest after the prefix.
fn strip_keyword<'a>(line: &'a str, keyword: &str) -> Option<&'a str> {
    let trimmed = line.trim_start();
    if trimmed.len() >= keyword.len() && trimmed[..keyword.len()].eq_ignore_ascii_case(keyword) {
        Some(&trimmed[keyword.len()..])
    } else {
        None
    }
}

fn parse_choice_and_text(raw: &str, max: usize) -> Result<(usize, String), ParseError> {
    if max == 0 {
        return Err(ParseError::NothingShown);
    }
    let mut choice: Option<usize> = None;
    let mut text: Option<String> = None;

    let mut lines = raw.lines().peekable();
    while let Some(line) = lines.next() {
        if choice.is_none() {
            if let Some(rest) = strip_keyword(line, "CHOICE:") {
                let cleaned: String = rest
                    .trim()
                    .trim_start_matches(['#', '[', '('])
                    .trim_end_matches([']', ')', '.'])
                    .trim()
                    .to_string();
                let n: usize = cleaned
                    .parse()
                    .map_err(|_| ParseError::ChoiceNotANumber(rest.trim().to_string()))?;
                if n == 0 || n > max {
                    return Err(ParseError::ChoiceOutOfRange { choice: n, max });
                }
                choice = Some(n - 1);
                continue;
            }
        }
        if text.is_none() {
            if let Some(rest) = strip_keyword(line, "TEXT:") {
                let mut collected = rest.trim().to_string();
                // The message may spill onto continuation lines.
                for cont in lines.by_ref() {
                    let cont = cont.trim();
                    if cont.is_empty() {
                        break;
                    }
                    if !collected.is_empty() {
                        collected.push(' ');
                    }
                    collected.push_str(cont);
                }
                text = Some(collected);
                break;
            }
        }
    }

    let choice = choice.ok_or(ParseError::MissingChoice)?;
    let text = text.ok_or(ParseError::MissingText)?;
    if text.is_empty() {
        return Err(ParseError::EmptyText);
    }
    Ok((choice, text))
}

fn like_decisions(raw: &str, count: usize) -> Result<Vec<Option<bool>>, ParseError> {
    let mut decisions: Vec<Option<bool>> = vec![None; count];
    for line in raw.lines() {
        let Some(rest) = strip_keyword(line, "LIKE") else { continue };
        let Some((index_part, value_part)) = rest.split_once(':') else { continue };
        let Ok(index) = index_part.trim().parse::<usize>() else { continue };
        if index == 0 || index > count {
            return Err(ParseError::LikeOutOfRange { index, max: count });
        }
        let value = match value_part.trim().to_ascii_lowercase().as_str() {
            "yes" | "press like" | "like" => true,
            "no" | "no action" | "none" => false,
            other => return Err(ParseError::BadLikeValue(other.to_string())),
        };
        match decisions[index - 1] {
            None => decisions[index - 1] = Some(value),
            Some(prev) if prev == value => {}
            Some(_) => return Err(ParseError::ConflictingLike(index)),
        }
    }
    Ok(decisions)
}

fn parse_like_batch(raw: &str, count: usize) -> Result<Vec<bool>, ParseError> {
    let decisions = like_decisions(raw, count)?;
    decisions
        .iter()
        .enumerate()
        .map(|(i, d)| d.ok_or(ParseError::MissingLike(i + 1)))
        .collect()
}

/// Lenient like parsing for the post-retry fallback: anything still
/// missing or malformed becomes "no action".
pub fn parse_likes_lenient(raw: &str, count: usize) -> Vec<bool> {
    match like_decisions(raw, count) {
        Ok(decisions) => decisions.into_iter().map(|d| d.unwrap_or(false)).collect(),
        Err(_) => {
            // Salvage per-line: keep well-formed decisions, drop the rest.
            let mut out = vec![false; count];
            for line in raw.lines() {
                if let Ok(one) = like_decisions(line, count) {
                    for (i, d) in one.into_iter().enumerate() {
                        if let Some(v) = d {
                            out[i] = v;
                        }
                    }
                }
            }
            out
        }
    }
}

/// Parse `raw` according to the request's prompt kind.
pub fn parse_response(
    request: &GenerationRequest,
    raw: &str,
) -> Result<ParsedDecision, ParseError> {
    match request.kind {
        PromptKind::FirstPost => {
            let (choice, text) = parse_choice_and_text(raw, request.shown_count())?;
            Ok(ParsedDecision::Post { choice, text })
        }
        PromptKind::Comment => {
            let (choice, text) = parse_choice_and_text(raw, request.shown_count())?;
            Ok(ParsedDecision::Comment { choice, text })
        }
        PromptKind::LikeBatch => {
            Ok(ParsedDecision::LikeBatch(parse_like_batch(raw, request.shown_count())?))
        }
        PromptKind::Enrich => {
            let text = raw.trim();
            if text.is_empty() {
                Err(ParseError::EmptyEnrichment)
            } else {
                Ok(ParsedDecision::Enriched(text.to_string()))
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn plain_choice_and_text() {
        let (c, t) = parse_choice_and_text("CHOICE: 3\nTEXT: Well said.", 5).unwrap();
        assert_eq!((c, t.as_str()), (2, "Well said."));
    }

    #[test]
    fn tolerates_case_whitespace_and_decoration() {
        let (c, t) =
            parse_choice_and_text("  choice: [2]\n\n  Text:   Strong words here.  ", 3).unwrap();
        assert_eq!((c, t.as_str()), (1, "Strong words here."));
    }

    #[test]
    fn multiline_text_joins_continuation_lines() {
        let (_, t) =
            parse_choice_and_text("CHOICE: 1\nTEXT: First part\nsecond part.\n\nignored", 1)
                .unwrap();
        assert_eq!(t, "First part second part.");
    }

    #[test]
    fn choice_errors() {
        assert_eq!(parse_choice_and_text("TEXT: hi", 3), Err(ParseError::MissingChoice));
        assert_eq!(
            parse_choice_and_text("CHOICE: seven\nTEXT: hi", 3),
            Err(ParseError::ChoiceNotANumber("seven".into()))
        );
        assert_eq!(
            parse_choice_and_text("CHOICE: 4\nTEXT: hi", 3),
            Err(ParseError::ChoiceOutOfRange { choice: 4, max: 3 })
        );
        assert_eq!(
            parse_choice_and_text("CHOICE: 0\nTEXT: hi", 3),
            Err(ParseError::ChoiceOutOfRange { choice: 0, max: 3 })
        );
        assert_eq!(parse_choice_and_text("CHOICE: 1", 3), Err(ParseError::MissingText));
        assert_eq!(parse_choice_and_text("CHOICE: 1\nTEXT:", 3), Err(ParseError::EmptyText));
    }

    #[test]
    fn like_batch_happy_path() {
        let v = parse_like_batch("LIKE 1: yes\nLIKE 2: no\nLIKE 3: yes", 3).unwrap();
        assert_eq!(v, vec![true, false, true]);
    }

    #[test]
    fn like_batch_accepts_any_order_and_case() {
        let v = parse_like_batch("like 2: NO\nLIKE 1: Yes", 2).unwrap();
        assert_eq!(v, vec![true, false]);
    }

    #[test]
    fn like_batch_errors() {
        assert_eq!(parse_like_batch("LIKE 1: yes", 2), Err(ParseError::MissingLike(2)));
        assert_eq!(
            parse_like_batch("LIKE 1: yes\nLIKE 1: no\nLIKE 2: no", 2),
            Err(ParseError::ConflictingLike(1))
        );
        assert_eq!(
            parse_like_batch("LIKE 5: yes", 2),
            Err(ParseError::LikeOutOfRange { index: 5, max: 2 })
        );
        assert_eq!(
            parse_like_batch("LIKE 1: maybe\nLIKE 2: no", 2),
            Err(ParseError::BadLikeValue("maybe".into()))
        );
    }

    #[test]
    fn lenient_likes_fill_missing_with_no() {
        assert_eq!(parse_likes_lenient("LIKE 2: yes", 3), vec![false, true, false]);
        assert_eq!(parse_likes_lenient("complete nonsense", 2), vec![false, false]);
        // A bad line doesn't poison the good ones.
        assert_eq!(
            parse_likes_lenient("LIKE 1: maybe\nLIKE 2: yes", 2),
            vec![false, true]
        );
    }

    #[test]
    fn duplicate_agreeing_lines_are_fine() {
        let v = parse_like_batch("LIKE 1: yes\nLIKE 1: yes\nLIKE 2: no", 2).unwrap();
        assert_eq!(v, vec![true, false]);
    }
}
