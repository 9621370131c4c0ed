//! Offline toxicity scoring from a bundled word list.
//!
//! The score is a weighted hit rate: the summed weights of toxic tokens
//! divided by the token count, clamped to [0, 1]. It is calibrated for
//! *ordering* texts and corpora, not for agreement with any remote
//! scoring service on absolute values.

/// Toxic vocabulary with weights. Insults and profanity weigh 1.0,
/// hostile-but-milder words less. Sorted by word.
pub const WORDS: &[(&str, f64)] = &[
    ("ass", 1.0),
    ("asshole", 1.0),
    ("awful", 0.25),
    ("bastard", 1.0),
    ("bastards", 1.0),
    ("bigot", 1.0),
    ("bigots", 1.0),
    ("brainwashed", 0.75),
    ("bullshit", 1.0),
    ("clown", 1.0),
    ("clowns", 1.0),
    ("corrupt", 0.5),
    ("coward", 1.0),
    ("cowards", 1.0),
    ("crap", 0.75),
    ("crazy", 0.5),
    ("crook", 1.0),
    ("crooked", 0.75),
    ("crooks", 1.0),
    ("damn", 0.5),
    ("delusional", 0.75),
    ("despicable", 0.75),
    ("disgrace", 0.75),
    ("disgraceful", 0.75),
    ("disgusting", 0.75),
    ("dumb", 1.0),
    ("dumbest", 1.0),
    ("evil", 0.5),
    ("fascist", 1.0),
    ("fascists", 1.0),
    ("filth", 1.0),
    ("fool", 1.0),
    ("foolish", 0.75),
    ("fools", 1.0),
    ("fraud", 0.75),
    ("frauds", 0.75),
    ("garbage", 0.75),
    ("gutless", 1.0),
    ("hate", 0.5),
    ("hateful", 0.75),
    ("hell", 0.5),
    ("horrible", 0.25),
    ("hypocrite", 1.0),
    ("hypocrites", 1.0),
    ("idiot", 1.0),
    ("idiotic", 1.0),
    ("idiots", 1.0),
    ("ignorant", 0.75),
    ("imbecile", 1.0),
    ("imbeciles", 1.0),
    ("insane", 0.5),
    ("jackass", 1.0),
    ("liar", 1.0),
    ("liars", 1.0),
    ("lies", 0.5),
    ("loser", 1.0),
    ("losers", 1.0),
    ("lunatic", 1.0),
    ("lunatics", 1.0),
    ("lying", 0.5),
    ("moron", 1.0),
    ("moronic", 1.0),
    ("morons", 1.0),
    ("nasty", 0.75),
    ("pathetic", 1.0),
    ("phony", 0.75),
    ("pig", 1.0),
    ("pigs", 1.0),
    ("piss", 1.0),
    ("pissed", 0.75),
    ("racist", 1.0),
    ("racists", 1.0),
    ("rotten", 0.75),
    ("scum", 1.0),
    ("scumbag", 1.0),
    ("sellout", 1.0),
    ("sellouts", 1.0),
    ("shameful", 0.5),
    ("sheep", 0.5),
    ("sick", 0.5),
    ("spineless", 1.0),
    ("stupid", 1.0),
    ("stupidity", 1.0),
    ("sucker", 1.0),
    ("suckers", 1.0),
    ("sucks", 0.75),
    ("terrible", 0.25),
    ("traitor", 1.0),
    ("traitors", 1.0),
    ("trash", 0.75),
    ("treason", 0.75),
    ("unhinged", 0.75),
    ("vile", 1.0),
    ("worthless", 1.0),
    ("wtf", 0.75),
];

fn weight_of(token: &str) -> Option<f64> {
    WORDS
        .binary_search_by(|(w, _)| (*w).cmp(token))
        .ok()
        .map(|i| WORDS[i].1)
}

/// Lowercased alphanumeric tokens of `text`.
pub fn tokenize(text: &str) -> Vec<String> {
    text.split(|c: char| !c.is_alphanumeric() && c != '\'')
        .filter(|t| !t.is_empty())
        .map(|t| t.trim_matches('\'').to_ascii_lowercase())
        .filter(|t| !t.is_empty())
        .collect()
}

/// Weighted toxic hit rate of `text`, in [0, 1]. Empty text scores 0.
pub fn score(text: &str) -> f64 {
    let tokens = tokenize(text);
    if tokens.is_empty() {
        return 0.0;
    }
    let hits: f64 = tokens.iter().filter_map(|t| weight_of(t)).sum();
    (hits / tokens.len() as f64).clamp(0.0, 1.0)
}
