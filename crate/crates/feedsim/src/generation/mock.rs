//! Deterministic mock backend.
//!
//! Stands in for a language model with simple, tunable behavioral
//! rules, so full simulations run offline and reproduce byte for byte.
//! Replies are emitted in the same wire format a real model is asked
//! for and go through the normal response parser.
//!
//! Behavioral model:
//!
//! * First posts share a story from the persona's own media diet when
//!   one is offered. Posting voice is bimodal: an author either shares
//!   calmly or vents, and stronger partisans vent more often and harder.
//! * Likes: same-party posts are liked around probability `p_agree`,
//!   tilted toward outrage (partisans reward their own side's fire more
//!   than its restraint). Cross-party posts are liked with probability
//!   `p_cross` scaled by how civil the text reads: nobody likes a post
//!   that insults them, while a reasonable post from the other side can
//!   earn a like. Both curves are centered so `p_agree` and `p_cross`
//!   stay the average rates over typical content, and the endpoints are
//!   exact: a probability of 1 always likes, 0 never does.
//! * Comments read the room. For each visible post the trigger is
//!   (partisan distance to its author) x (how toxic its text reads,
//!   scored by the offline lexicon) x (its social proof). With
//!   probability `q_conflict` scaled by the strongest trigger, the
//!   agent picks a fight: it replies to the most triggering post, and
//!   the reply's own toxicity grows with the trigger. Otherwise the
//!   agent browses: same-party posts attract pile-on replies in
//!   proportion to their outrage, cross-party posts attract
//!   conversation in proportion to their civility and social proof,
//!   and the reply mirrors a share of the chosen post's tone. Replies
//!   cross the aisle only under posts that are visibly already a thing;
//!   likes need no such proof, so likes lead and replies follow.

use super::{
    BackendError, GenerationBackend, GenerationRequest, PromptKind, RawResponse, RequestContext,
    TimelineEntry,
};
use crate::metrics::lexicon;
use crate::seed::SimRng;
use rand::{Rng, SeedableRng};
use serde::{Deserialize, Serialize};

/// Like probability for a post by a same-party author.
pub const DEFAULT_P_AGREE: f64 = 0.5;
/// Like probability for a post by a cross-party author.
pub const DEFAULT_P_CROSS: f64 = 0.1;
/// Scale on the conflict-mood gate.
pub const DEFAULT_Q_CONFLICT: f64 = 0.7;

// Text synthesis tuning. Conflict replies ramp from BASE toward
// BASE+SLOPE toxic-word rate as the trigger rises; browsing replies
// stay near clean plus a mirrored share of the chosen post's own tone.
const CONFLICT_TOX_BASE: f64 = 0.2;
const CONFLICT_TOX_SLOPE: f64 = 0.8;
const HARMONY_TOX: f64 = 0.02;
const HARMONY_MIRROR: f64 = 0.4;
// Posting voice is bimodal: an author either shares calmly or vents.
// Stronger partisans vent more often and harder; the middle ground is
// rare, matching how feeds read in the wild. The split is what lets an
// engagement ranking and a civility-sensitive audience pull a feed in
// visibly different directions.
const POST_VENT_BASE: f64 = 0.2;
const POST_VENT_GAIN: f64 = 0.5;
const POST_CALM_MIN: f64 = 0.02;
const POST_CALM_MAX: f64 = 0.15;
const POST_VENT_MIN: f64 = 0.65;
const POST_VENT_MAX: f64 = 1.0;
// Browsing target weighting blends a same-party pile-on term with a
// cross-party conversation term by partisan distance d:
//   (1 - d)^2 * (1 + PILE_ON * toxicity)
//     + d * CROSS_APPEAL * civility^4 * social_proof
// The fourth power keeps run-of-the-mill content from reading as an
// invitation: only genuinely civil posts pull replies across the aisle.
// Squaring the affinity keeps solidarity from leaking across the gap.
const HARMONY_PILE_ON: f64 = 6.0;
const HARMONY_CROSS_APPEAL: f64 = 9.0;
// Crossing the aisle takes social proof: people reply to their own side
// no matter what, but talking to (or yelling at) the other side happens
// under posts that are visibly already a thing. Proof saturates as
// traction / (traction + HALF), so a couple of likes is already half
// way there. Likes themselves need no proof, which is what lets a quiet
// post become a thing in the first place: likes lead, replies follow.
const SOCIAL_PROOF_HALF: f64 = 2.0;
// Attention decays down the feed: a post at rank i keeps
// 1 / (1 + DECAY * i) of the reply pull it would have at the top, so
// whatever a platform chooses to lead with soaks up the conversation.
const POSITION_DECAY: f64 = 0.15;
// Cross-like curve: p_cross * min(CAP_RATIO, SCALE * civility^6).
// Nobody likes a post that insults them, and run-of-the-mill partisan
// content earns next to nothing; the genuinely calm posts soak up most
// of the cross-party likes, capped so even they stay rarer than
// agreement. SCALE and CAP_RATIO together keep p_cross the average
// cross-like rate over typical strong-partisan content.
const CROSS_LIKE_CIVILITY_SCALE: f64 = 7.0;
const CROSS_LIKE_CAP_RATIO: f64 = 3.2;
// Same-party like curve: p_agree^(1 / (FLOOR + SLOPE * toxicity)).
// Outrage travels inside the camp: a fiery post gets liked well above
// the base rate, a mild one below it. The exponent form keeps the
// endpoints exact (p_agree of 1 always likes, 0 never does) and the
// constants center the average near p_agree for typical content.
const SAME_LIKE_OUTRAGE_FLOOR: f64 = 0.35;
const SAME_LIKE_OUTRAGE_SLOPE: f64 = 3.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct MockParams {
    pub p_agree: f64,
    pub p_cross: f64,
    pub q_conflict: f64,
}

impl Default for MockParams {
    fn default() -> Self {
        MockParams {
            p_agree: DEFAULT_P_AGREE,
            p_cross: DEFAULT_P_CROSS,
            q_conflict: DEFAULT_Q_CONFLICT,
        }
    }
}

impl MockParams {
    pub fn validate(&self) -> Result<(), String> {
        for (name, v) in [
            ("p_agree", self.p_agree),
            ("p_cross", self.p_cross),
            ("q_conflict", self.q_conflict),
        ] {
            if !(0.0..=1.0).contains(&v) {
                return Err(format!("mock parameter {name} must be in [0, 1], got {v}"));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Default)]
pub struct MockBackend {
    pub params: MockParams,
}

impl MockBackend {
    pub fn new(params: MockParams) -> Self {
        MockBackend { params }
    }
}

// Filler vocabulary, deliberately disjoint from the toxicity lexicon
// (a unit test enforces that). Insults come from the lexicon itself so
// the offline scorer sees exactly the rate we injected.
const NEUTRAL_WORDS: &[&str] = &[
    "people", "think", "really", "country", "still", "point", "story", "reading", "every",
    "moment", "times", "actually", "believe", "making", "change", "better", "matter", "facts",
    "local", "community", "working", "families", "future", "question", "answer", "leaders",
    "news", "today", "being", "honest", "simple", "clear", "right", "plan", "billions",
    "voters", "watching", "waiting", "telling", "showing", "hoping", "trying", "keep", "real",
    "world", "years", "never", "always", "again", "enough", "about", "something", "everyone",
];

const TOXIC_WORDS: &[&str] = &[
    "idiots", "morons", "clowns", "liars", "losers", "fools", "pathetic", "stupid",
    "hypocrites", "traitors", "scum", "worthless", "spineless", "vile",
];

const OPENERS_CALM: &[&str] = &[
    "Honestly,", "Look,", "Worth reading.", "Good point here.", "Interesting take.",
    "Fair enough.", "Well said.", "This matters.",
];

const OPENERS_HOT: &[&str] = &[
    "Unbelievable.", "Seriously?", "Wake up.", "What a joke.", "Absolutely not.",
    "This is absurd.", "Give me a break.", "Enough already.",
];

const FIRST_NAMES: &[&str] = &[
    "Alex", "Jordan", "Taylor", "Morgan", "Casey", "Riley", "Jamie", "Quinn", "Dana", "Robin",
    "Maria", "Daniel", "Grace", "Victor", "Elena", "Marcus",
];

const LAST_NAMES: &[&str] = &[
    "Walker", "Reyes", "Nguyen", "Carter", "Brooks", "Murphy", "Rivera", "Hayes", "Coleman",
    "Foster", "Jenkins", "Porter", "Watts", "Moss", "Delgado", "Klein",
];

const HOBBIES: &[&str] = &[
    "camping", "woodworking", "baking", "fishing", "running", "board games", "photography",
    "gardening", "bowling", "birdwatching", "quilting", "grilling",
];

const TEAMS: &[&str] = &[
    "Denver Broncos", "Chicago Cubs", "Green Bay Packers", "Atlanta Braves", "Dallas Cowboys",
    "Boston Celtics", "Detroit Red Wings", "Kansas City Royals",
];

const TRAITS: &[&str] = &[
    "stubborn but warm-hearted", "quick to laugh", "fiercely loyal", "quietly competitive",
    "an early riser", "a creature of habit", "generous to a fault", "slow to trust strangers",
];

fn pick<'a>(rng: &mut SimRng, pool: &[&'a str]) -> &'a str {
    pool[rng.random_range(0..pool.len())]
}

/// Build a message of exactly `words` tokens with roughly `toxic_rate`
/// of them drawn from the toxic pool.
fn post_provocation(rng: &mut SimRng, partisanship: f64) -> f64 {
    let conviction = partisanship.abs();
    let vent = rng.random::<f64>() < POST_VENT_BASE + POST_VENT_GAIN * conviction;
    if vent {
        conviction * rng.random_range(POST_VENT_MIN..POST_VENT_MAX)
    } else {
        rng.random_range(POST_CALM_MIN..POST_CALM_MAX)
    }
}

fn synth_text(rng: &mut SimRng, words: u32, toxic_rate: f64, hot: bool) -> String {
    let opener = if hot { pick(rng, OPENERS_HOT) } else { pick(rng, OPENERS_CALM) };
    let opener_len = opener.split_whitespace().count() as u32;
    // Very short messages skip the opener rather than overshoot.
    let (opener, body_len) =
        if opener_len >= words { ("", words) } else { (opener, words - opener_len) };

    let mut out = String::from(opener);
    for i in 0..body_len {
        let toxic = rng.random::<f64>() < toxic_rate;
        let word = if toxic { pick(rng, TOXIC_WORDS) } else { pick(rng, NEUTRAL_WORDS) };
        if !out.is_empty() {
            out.push(' ');
        }
        out.push_str(word);
        if i + 1 == body_len {
            out.push('.');
        } else if i % 9 == 8 {
            out.push(',');
        }
    }
    out
}

fn enrich_text(rng: &mut SimRng) -> String {
    let first = pick(rng, FIRST_NAMES);
    let last = pick(rng, LAST_NAMES);
    let hobby_a = pick(rng, HOBBIES);
    let mut hobby_b = pick(rng, HOBBIES);
    while hobby_b == hobby_a {
        hobby_b = pick(rng, HOBBIES);
    }
    let team = pick(rng, TEAMS);
    let quirk = pick(rng, TRAITS);
    format!(
        "Your name is {first} {last}. You enjoy {hobby_a} and {hobby_b}. \
         You are a fan of the {team}. You are {quirk}."
    )
}

/// Partisan distance to the author, normalized to [0, 1].
fn distance(viewer_p: f64, author_p: f64) -> f64 {
    ((viewer_p - author_p).abs() / 2.0).clamp(0.0, 1.0)
}

fn social_proof(entry: &TimelineEntry) -> f64 {
    let traction = entry.likes as f64 + entry.replies.len() as f64;
    traction / (traction + SOCIAL_PROOF_HALF)
}

fn trigger(viewer_p: f64, entry: &TimelineEntry) -> f64 {
    distance(viewer_p, entry.author_partisanship) * lexicon::score(&entry.text)
}

fn weighted_pick(rng: &mut SimRng, weights: &[f64]) -> usize {
    let total: f64 = weights.iter().sum();
    if total <= 0.0 {
        return 0;
    }
    let x = rng.random::<f64>() * total;
    let mut acc = 0.0;
    for (i, w) in weights.iter().enumerate() {
        acc += w;
        if x < acc {
            return i;
        }
    }
    weights.len() - 1
}

impl MockBackend {
    fn first_post(&self, req: &GenerationRequest, rng: &mut SimRng) -> Result<String, BackendError> {
        let RequestContext::Stories(offers) = &req.context else {
            return Err(BackendError::Protocol("first-post request without stories".into()));
        };
        if offers.is_empty() {
            return Err(BackendError::Protocol("first-post request with no stories".into()));
        }
        let choice = offers
            .iter()
            .position(|o| req.persona.news_sources.iter().any(|s| *s == o.source))
            .unwrap_or(0);
        let provocation = post_provocation(rng, req.persona.partisanship);
        let words = rng.random_range(12..=28);
        let text = synth_text(rng, words, provocation, provocation > 0.3);
        Ok(format!("CHOICE: {}\nTEXT: {text}", choice + 1))
    }

    fn like_batch(&self, req: &GenerationRequest, rng: &mut SimRng) -> Result<String, BackendError> {
        let RequestContext::Timeline(entries) = &req.context else {
            return Err(BackendError::Protocol("like request without timeline".into()));
        };
        let mut lines = Vec::with_capacity(entries.len());
        for (i, e) in entries.iter().enumerate() {
            let tox = lexicon::score(&e.text);
            let p = if e.author_party == req.persona.party {
                let exponent = 1.0 / (SAME_LIKE_OUTRAGE_FLOOR + SAME_LIKE_OUTRAGE_SLOPE * tox);
                self.params.p_agree.powf(exponent)
            } else {
                let civility = 1.0 - tox;
                let curve = (CROSS_LIKE_CIVILITY_SCALE * civility.powi(6)).min(CROSS_LIKE_CAP_RATIO);
                (self.params.p_cross * curve).clamp(0.0, 1.0)
            };
            let yes = rng.random::<f64>() < p;
            lines.push(format!("LIKE {}: {}", i + 1, if yes { "yes" } else { "no" }));
        }
        Ok(lines.join("\n"))
    }

    fn comment(&self, req: &GenerationRequest, rng: &mut SimRng) -> Result<String, BackendError> {
        let RequestContext::Timeline(entries) = &req.context else {
            return Err(BackendError::Protocol("comment request without timeline".into()));
        };
        if entries.is_empty() {
            return Err(BackendError::Protocol("comment request with empty timeline".into()));
        }
        let viewer_p = req.persona.partisanship;
        let attention = |i: usize| 1.0 / (1.0 + POSITION_DECAY * i as f64);
        let triggers: Vec<f64> = entries
            .iter()
            .enumerate()
            .map(|(i, e)| trigger(viewer_p, e) * social_proof(e) * attention(i))
            .collect();
        let max_trigger = triggers.iter().cloned().fold(0.0, f64::max);

        // Cubed so that a mildly irritating feed almost never starts a
        // fight while a genuinely inflammatory, visibly popular one
        // often does.
        let conflict = rng.random::<f64>() < self.params.q_conflict * max_trigger.powi(3);
        let words = req.target_words.unwrap_or(15);

        let (choice, text) = if conflict {
            let choice = triggers
                .iter()
                .enumerate()
                .max_by(|a, b| a.1.partial_cmp(b.1).unwrap().then(b.0.cmp(&a.0)))
                .map(|(i, _)| i)
                .unwrap();
            let tox = CONFLICT_TOX_BASE + CONFLICT_TOX_SLOPE * triggers[choice];
            (choice, synth_text(rng, words, tox, true))
        } else {
            let weights: Vec<f64> = entries
                .iter()
                .enumerate()
                .map(|(i, e)| {
                    let d = distance(viewer_p, e.author_partisanship);
                    let tox = lexicon::score(&e.text);
                    let civility = 1.0 - tox;
                    ((1.0 - d).powi(2) * (1.0 + HARMONY_PILE_ON * tox)
                        + d * HARMONY_CROSS_APPEAL * civility.powi(4) * social_proof(e))
                        * attention(i)
                })
                .collect();
            let choice = weighted_pick(rng, &weights);
            let chosen = &entries[choice];
            let d = distance(viewer_p, chosen.author_partisanship);
            let tox = HARMONY_TOX + HARMONY_MIRROR * (1.0 - d) * lexicon::score(&chosen.text);
            (choice, synth_text(rng, words, tox, false))
        };
        Ok(format!("CHOICE: {}\nTEXT: {text}", choice + 1))
    }
}

impl GenerationBackend for MockBackend {
    fn name(&self) -> &str {
        "mock"
    }

    fn complete_raw(&self, req: &GenerationRequest) -> Result<RawResponse, BackendError> {
        let mut rng = SimRng::seed_from_u64(req.seed);
        let text = match req.kind {
            PromptKind::FirstPost => self.first_post(req, &mut rng)?,
            PromptKind::LikeBatch => self.like_batch(req, &mut rng)?,
            PromptKind::Comment => self.comment(req, &mut rng)?,
            PromptKind::Enrich => enrich_text(&mut rng),
        };
        Ok(RawResponse { text, latency_ms: 0 })
    }
}
