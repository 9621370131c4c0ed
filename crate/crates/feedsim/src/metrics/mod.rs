//! Outcome metrics: cross-party interaction structure and toxicity.
//!
//! The E-I (external-internal) index summarizes how partisan the
//! interaction pattern is: +1 means every interaction crosses party
//! lines, -1 means none do. Only Democrat/Republican pairs count;
//! interactions involving Independents are excluded from both sides of
//! the ratio.

pub mod lexicon;
mod report;
mod toxicity;

pub use report::{
    build_report, read_report, read_report_file, text_table, timeline_excerpt, write_report,
    write_report_file, InteractionCounts, ReportError, RunReport, ToxicityBlock,
    REPORT_SCHEMA_VERSION,
};
pub use toxicity::{
    summarize_toxicity, LexiconScorer, PerspectiveOptions, PerspectiveScorer, ToxicityError,
    ToxicityScorer, ToxicitySummary,
};

use crate::feed::ContentState;
use crate::persona::Party;

/// E-I index over (actor party, target party) pairs:
/// `(external - internal) / (external + internal)`.
///
/// Pairs where either side is Independent are ignored. Returns `None`
/// when nothing remains after filtering; that is "no signal", which is
/// deliberately not the same as 0 (perfectly balanced).
pub fn ei_index(pairs: impl IntoIterator<Item = (Party, Party)>) -> Option<f64> {
    let mut external = 0u64;
    let mut internal = 0u64;
    for (actor, target) in pairs {
        if !actor.is_major() || !target.is_major() {
            continue;
        }
        if actor == target {
            internal += 1;
        } else {
            external += 1;
        }
    }
    let total = external + internal;
    if total == 0 {
        None
    } else {
        Some((external as f64 - internal as f64) / total as f64)
    }
}

/// (commenter party, post author party) for every comment.
pub fn comment_party_pairs<'a>(
    content: &'a ContentState,
    party_of: &'a [Party],
) -> impl Iterator<Item = (Party, Party)> + 'a {
    content.comments().iter().map(move |c| {
        let author = content.post(c.post_id).expect("comment targets existing post").author;
        (party_of[c.author], party_of[author])
    })
}

/// (liker party, post author party) for every like.
pub fn like_party_pairs<'a>(
    content: &'a ContentState,
    party_of: &'a [Party],
) -> impl Iterator<Item = (Party, Party)> + 'a {
    content.likes().iter().map(move |l| {
        let author = content.post(l.post_id).expect("like targets existing post").author;
        (party_of[l.author], party_of[author])
    })
}

pub fn ei_comments(content: &ContentState, party_of: &[Party]) -> Option<f64> {
    ei_index(comment_party_pairs(content, party_of))
}

pub fn ei_likes(content: &ContentState, party_of: &[Party]) -> Option<f64> {
    ei_index(like_party_pairs(content, party_of))
}

#[cfg(test)]
mod tests {
    use super::*;
    use Party::{Democrat as D, Independent as I, Republican as R};

    #[test]
    fn all_external_is_plus_one() {
        let pairs = vec![(D, R); 10];
        assert_eq!(ei_index(pairs), Some(1.0));
    }

    #[test]
    fn all_internal_is_minus_one() {
        let pairs = [vec![(D, D); 6], vec![(R, R); 4]].concat();
        assert_eq!(ei_index(pairs), Some(-1.0));
    }

    #[test]
    fn mixed_counts() {
        // 6 internal + 4 external -> (4 - 6) / 10 = -0.2
        let pairs = [vec![(D, D); 3], vec![(R, R); 3], vec![(D, R); 2], vec![(R, D); 2]].concat();
        assert_eq!(ei_index(pairs), Some(-0.2));
    }

    #[test]
    fn independents_are_invisible() {
        // Only the (D, R) pair counts; everything touching I drops out.
        let pairs = vec![(I, D), (D, I), (I, I), (D, R)];
        assert_eq!(ei_index(pairs), Some(1.0));
    }

    #[test]
    fn no_major_pairs_is_none_not_zero() {
        assert_eq!(ei_index(Vec::new()), None);
        assert_eq!(ei_index(vec![(I, D), (R, I)]), None);
    }

    #[test]
    fn party_pairs_resolve_post_authors() {
        let mut content = ContentState::new();
        let party_of = vec![D, R, I, D];
        let p0 = content.add_post(0, "s1", "by democrat", 0);
        let p1 = content.add_post(1, "s1", "by republican", 1);
        content.add_comment(p0, 1, "cross comment", 2).unwrap(); // R -> D
        content.add_comment(p1, 3, "cross comment", 3).unwrap(); // D -> R
        content.add_comment(p0, 2, "independent comment", 4).unwrap(); // I -> D, ignored
        content.add_like(p1, 0, 5).unwrap(); // D -> R
        content.add_like(p0, 3, 6).unwrap(); // D -> D

        assert_eq!(ei_comments(&content, &party_of), Some(1.0));
        assert_eq!(ei_likes(&content, &party_of), Some(0.0));
    }

    #[test]
    fn empty_content_has_no_indexes() {
        let content = ContentState::new();
        assert_eq!(ei_comments(&content, &[]), None);
        assert_eq!(ei_likes(&content, &[]), None);
    }
}
