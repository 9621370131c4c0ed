//! The fixed registry of news outlets that stories and media diets
//! refer to. Outlet ids are short lowercase slugs; display names are
//! what persona text and timelines show.

pub const OUTLETS: [(&str, &str); 15] = [
    ("abc", "ABC News"),
    ("ap", "the Associated Press"),
    ("breitbart", "Breitbart"),
    ("cbs", "CBS News"),
    ("cnn", "CNN"),
    ("fox", "Fox News"),
    ("msnbc", "MSNBC"),
    ("nbc", "NBC News"),
    ("npr", "NPR"),
    ("nyt", "the New York Times"),
    ("reuters", "Reuters"),
    ("thehill", "The Hill"),
    ("usatoday", "USA Today"),
    ("wapo", "the Washington Post"),
    ("wsj", "the Wall Street Journal"),
];

/// Display name for an outlet id, or the id itself if unknown.
pub fn display_name(id: &str) -> &str {
    OUTLETS
        .iter()
        .find(|(slug, _)| *slug == id)
        .map(|(_, name)| *name)
        .unwrap_or(id)
}

pub fn is_known(id: &str) -> bool {
    OUTLETS.iter().any(|(slug, _)| *slug == id)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lookup() {
        assert_eq!(display_name("cnn"), "CNN");
        assert_eq!(display_name("nyt"), "the New York Times");
        assert_eq!(display_name("unknown-site"), "unknown-site");
        assert!(is_known("fox"));
        assert!(!is_known("blog"));
    }

    #[test]
    fn slugs_are_unique_and_sorted() {
        for w in OUTLETS.windows(2) {
            assert!(w[0].0 < w[1].0, "{} !< {}", w[0].0, w[1].0);
        }
    }
}
