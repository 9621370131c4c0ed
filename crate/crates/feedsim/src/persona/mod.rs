//! Survey-grounded agent personas.
//!
//! A persona starts from one survey respondent: demographics, feeling
//! thermometers, vote choice, media diet. [`render`] turns the raw row
//! into a second-person description ("You are 34 years old. You voted
//! for..."), [`enrich`] optionally asks a generation backend to add
//! flavor traits, and the scalar fields below (partisanship score,
//! party label, activity rate) drive the simulation mechanics.

mod enrich;
mod render;
mod survey;

pub use enrich::{enrich_persona, ENRICH_PROMPT};
pub use render::{render_persona, RenderOptions};
pub use survey::{
    load_survey, load_survey_file, write_survey, write_survey_file, SurveyError, SurveyRespondent,
};

use serde::{Deserialize, Serialize};
use std::fmt;
use std::io::{self, BufRead, Write};
use std::path::Path;

/// Partisan identity bucket derived from the thermometer score.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Party {
    Democrat,
    Republican,
    Independent,
}

impl Party {
    /// The opposing major party. Independents have none.
    pub fn opposite(self) -> Option<Party> {
        match self {
            Party::Democrat => Some(Party::Republican),
            Party::Republican => Some(Party::Democrat),
            Party::Independent => None,
        }
    }

    pub fn is_major(self) -> bool {
        !matches!(self, Party::Independent)
    }
}

impl fmt::Display for Party {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Party::Democrat => "Democrat",
            Party::Republican => "Republican",
            Party::Independent => "Independent",
        };
        f.write_str(s)
    }
}

/// How often the respondent reports using social media.
///
/// The five ANES-style levels, lowest to highest.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize, Default)]
pub enum SocialMediaFreq {
    #[default]
    Never,
    OnceAWeek,
    FewTimesAWeek,
    OnceADay,
    ManyTimesADay,
}

impl SocialMediaFreq {
    pub const ALL: [SocialMediaFreq; 5] = [
        SocialMediaFreq::Never,
        SocialMediaFreq::OnceAWeek,
        SocialMediaFreq::FewTimesAWeek,
        SocialMediaFreq::OnceADay,
        SocialMediaFreq::ManyTimesADay,
    ];

    pub fn parse(s: &str) -> Option<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "never" => Some(SocialMediaFreq::Never),
            "once a week" => Some(SocialMediaFreq::OnceAWeek),
            "a few times a week" => Some(SocialMediaFreq::FewTimesAWeek),
            "once a day" => Some(SocialMediaFreq::OnceADay),
            "many times a day" => Some(SocialMediaFreq::ManyTimesADay),
            _ => None,
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            SocialMediaFreq::Never => "never",
            SocialMediaFreq::OnceAWeek => "once a week",
            SocialMediaFreq::FewTimesAWeek => "a few times a week",
            SocialMediaFreq::OnceADay => "once a day",
            SocialMediaFreq::ManyTimesADay => "many times a day",
        }
    }
}

/// How often the respondent discusses politics.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub enum DiscussFreq {
    Never,
    Rarely,
    Sometimes,
    Often,
    VeryOften,
}

impl DiscussFreq {
    pub fn parse(s: &str) -> Option<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "never" => Some(DiscussFreq::Never),
            "rarely" => Some(DiscussFreq::Rarely),
            "sometimes" => Some(DiscussFreq::Sometimes),
            "often" => Some(DiscussFreq::Often),
            "very often" => Some(DiscussFreq::VeryOften),
            _ => None,
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            DiscussFreq::Never => "never",
            DiscussFreq::Rarely => "rarely",
            DiscussFreq::Sometimes => "sometimes",
            DiscussFreq::Often => "often",
            DiscussFreq::VeryOften => "very often",
        }
    }
}

/// Signed partisanship score in [-1, 1] from the two party feeling
/// thermometers (each 0..=100). Positive leans Democratic.
///
/// Callers are responsible for range-checking the thermometers; survey
/// ingestion rejects out-of-range values before this is ever reached.
pub fn partisanship_score(therm_dem: f64, therm_rep: f64) -> f64 {
    (therm_dem - therm_rep) / 100.0
}

/// Bucket a partisanship score into a party label.
///
/// `threshold` is the absolute score above which someone stops counting
/// as Independent. Must lie in (0, 1]; the config layer validates that.
pub fn party_label(partisanship: f64, threshold: f64) -> Party {
    debug_assert!(threshold > 0.0 && threshold <= 1.0);
    if partisanship > threshold {
        Party::Democrat
    } else if partisanship < -threshold {
        Party::Republican
    } else {
        Party::Independent
    }
}

/// Relative selection weight for the engine's activity urn.
///
/// Geometric ladder with ratio 2 over the five usage levels, so the
/// heaviest users act 16x as often as the lightest.
pub fn activity_rate(freq: SocialMediaFreq) -> f64 {
    match freq {
        SocialMediaFreq::Never => 1.0,
        SocialMediaFreq::OnceAWeek => 2.0,
        SocialMediaFreq::FewTimesAWeek => 4.0,
        SocialMediaFreq::OnceADay => 8.0,
        SocialMediaFreq::ManyTimesADay => 16.0,
    }
}

/// A fully rendered agent persona.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Persona {
    pub id: String,
    /// Second-person self description fed to the generation backend.
    pub persona_text: String,
    /// Signed partisanship in [-1, 1], positive = Democratic.
    pub partisanship: f64,
    pub party: Party,
    /// Urn weight; see [`activity_rate`].
    pub activity_rate: f64,
    /// Outlet ids the respondent reports following.
    pub news_sources: Vec<String>,
    /// Whether a backend added traits on top of the survey rendering.
    pub enriched: bool,
    /// True when both thermometers were missing and partisanship
    /// defaulted to 0.
    pub partisanship_imputed: bool,
}

/// Write personas as JSON Lines, one persona per line.
pub fn write_personas<W: Write>(mut w: W, personas: &[Persona]) -> io::Result<()> {
    for p in personas {
        serde_json::to_writer(&mut w, p)?;
        w.write_all(b"\n")?;
    }
    Ok(())
}

/// Read a personas JSONL file written by [`write_personas`].
pub fn read_personas<R: BufRead>(r: R) -> io::Result<Vec<Persona>> {
    let mut out = Vec::new();
    for (i, line) in r.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let p: Persona = serde_json::from_str(&line).map_err(|e| {
            io::Error::new(
                io::ErrorKind::InvalidData,
                format!("personas line {}: {e}", i + 1),
            )
        })?;
        out.push(p);
    }
    Ok(out)
}

pub fn read_personas_file(path: &Path) -> io::Result<Vec<Persona>> {
    let f = std::fs::File::open(path)?;
    read_personas(io::BufReader::new(f))
}

pub fn write_personas_file(path: &Path, personas: &[Persona]) -> io::Result<()> {
    let f = std::fs::File::create(path)?;
    let mut w = io::BufWriter::new(f);
    write_personas(&mut w, personas)?;
    w.flush()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn partisanship_examples() {
        assert_eq!(partisanship_score(100.0, 0.0), 1.0);
        assert_eq!(partisanship_score(0.0, 100.0), -1.0);
        assert_eq!(partisanship_score(50.0, 50.0), 0.0);
        assert_eq!(partisanship_score(70.0, 30.0), 0.4);
    }

    #[test]
    fn party_label_thresholds() {
        assert_eq!(party_label(0.4, 0.1), Party::Democrat);
        assert_eq!(party_label(-0.4, 0.1), Party::Republican);
        assert_eq!(party_label(0.05, 0.1), Party::Independent);
        // Exactly at the threshold stays Independent: the comparison is
        // strict in both directions.
        assert_eq!(party_label(0.1, 0.1), Party::Independent);
        assert_eq!(party_label(-0.1, 0.1), Party::Independent);
    }

    #[test]
    fn activity_ladder() {
        assert_eq!(activity_rate(SocialMediaFreq::Never), 1.0);
        assert_eq!(activity_rate(SocialMediaFreq::OnceAWeek), 2.0);
        assert_eq!(activity_rate(SocialMediaFreq::ManyTimesADay), 16.0);
        // Strictly increasing, ratio 2.
        let rates: Vec<f64> = SocialMediaFreq::ALL.iter().map(|&f| activity_rate(f)).collect();
        for w in rates.windows(2) {
            assert_eq!(w[1], w[0] * 2.0);
        }
    }

    #[test]
    fn opposite_party() {
        assert_eq!(Party::Democrat.opposite(), Some(Party::Republican));
        assert_eq!(Party::Republican.opposite(), Some(Party::Democrat));
        assert_eq!(Party::Independent.opposite(), None);
    }

    #[test]
    fn personas_roundtrip() {
        let personas = vec![Persona {
            id: "r0001".into(),
            persona_text: "You are 34 years old.".into(),
            partisanship: 0.4,
            party: Party::Democrat,
            activity_rate: 8.0,
            news_sources: vec!["cnn".into()],
            enriched: false,
            partisanship_imputed: false,
        }];
        let mut buf = Vec::new();
        write_personas(&mut buf, &personas).unwrap();
        let back = read_personas(&buf[..]).unwrap();
        assert_eq!(back, personas);
    }
}
