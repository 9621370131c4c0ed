//! Survey row to second-person persona text.
//!
//! Each answered question becomes one sentence; skipped questions leave
//! no trace in the text. Respondents who say they never discuss politics
//! get no political sentences at all (vote, party, figure feelings),
//! only demographics, media diet and hobbies.

use super::{activity_rate, partisanship_score, party_label, Persona, SurveyRespondent};
use crate::outlets;

#[derive(Debug, Clone, Copy)]
pub struct RenderOptions {
    /// Absolute partisanship above which someone is labeled partisan.
    pub party_threshold: f64,
    /// Figure thermometer at or above this reads as warm feelings.
    pub warm_cutoff: f64,
    /// Figure thermometer at or below this reads as cold feelings.
    pub cold_cutoff: f64,
}

impl Default for RenderOptions {
    fn default() -> Self {
        RenderOptions { party_threshold: 0.1, warm_cutoff: 70.0, cold_cutoff: 30.0 }
    }
}

fn gender_sentence(v: &str) -> String {
    match v.to_ascii_lowercase().as_str() {
        "male" | "man" => "You are a man.".to_string(),
        "female" | "woman" => "You are a woman.".to_string(),
        _ => format!("You are {v}."),
    }
}

fn income_sentence(v: &str) -> String {
    format!("You have a {} income.", v.to_ascii_lowercase())
}

fn religion_sentence(v: &str) -> String {
    match v.to_ascii_lowercase().as_str() {
        "atheist" => "You are an atheist.".to_string(),
        "agnostic" => "You are agnostic.".to_string(),
        "nothing in particular" => "You do not identify with any religion.".to_string(),
        _ => format!("You are {v}."),
    }
}

fn education_sentence(v: &str) -> String {
    match v.to_ascii_lowercase().as_str() {
        "less than high school" => "You did not finish high school.".to_string(),
        "high school" => "You have a high school education.".to_string(),
        "bachelor's degree" => "You have a bachelor's degree.".to_string(),
        "graduate degree" => "You have a graduate degree.".to_string(),
        _ => format!("Your education level is {v}."),
    }
}

fn race_sentence(v: &str) -> String {
    match v.to_ascii_lowercase().as_str() {
        "multiple races" => "You are of mixed race.".to_string(),
        _ => format!("You are {v}."),
    }
}

fn vote_sentence(v: &str) -> String {
    match v.to_ascii_lowercase().as_str() {
        "did not vote" => "You did not vote in 2020.".to_string(),
        "someone else" => "You voted for someone else in 2020.".to_string(),
        _ => format!("You voted for {v} in 2020."),
    }
}

fn join_names(items: &[String]) -> String {
    match items.len() {
        0 => String::new(),
        1 => items[0].clone(),
        _ => format!("{} and {}", items[..items.len() - 1].join(", "), items[items.len() - 1]),
    }
}

/// Sentence for the partisanship tier. `None` when the score sits inside
/// the Independent band.
fn party_sentence(partisanship: f64, threshold: f64) -> String {
    let side = if partisanship > 0.0 { "Democrat" } else { "Republican" };
    let strength = partisanship.abs();
    if strength >= 0.6 {
        format!("You are a strong {side}.")
    } else if strength >= 0.3 {
        format!("You are a {side}.")
    } else if strength > threshold {
        format!("You lean {side}.")
    } else {
        "You prefer neither party.".to_string()
    }
}

/// Render one survey respondent into a [`Persona`].
pub fn render_persona(r: &SurveyRespondent, opts: &RenderOptions) -> Persona {
    let mut sentences: Vec<String> = Vec::new();

    if let Some(g) = &r.gender {
        sentences.push(gender_sentence(g));
    }
    if let Some(v) = &r.income_class {
        sentences.push(income_sentence(v));
    }
    if let Some(age) = r.age {
        sentences.push(format!("You are {age} years old."));
    }
    if let Some(v) = &r.religion {
        sentences.push(religion_sentence(v));
    }
    if let Some(v) = &r.state {
        sentences.push(format!("You live in {v}."));
    }
    if let Some(v) = &r.education {
        sentences.push(education_sentence(v));
    }
    if let Some(v) = &r.race {
        sentences.push(race_sentence(v));
    }

    let partisanship_imputed = r.therm_dem.is_none() || r.therm_rep.is_none();
    let partisanship = if partisanship_imputed {
        0.0
    } else {
        partisanship_score(r.therm_dem.unwrap(), r.therm_rep.unwrap())
    };

    let never_discusses = r.discuss_politics == Some(super::DiscussFreq::Never);
    if never_discusses {
        sentences.push(
            "You never discuss politics and are not interested in political topics.".to_string(),
        );
    } else {
        match r.discuss_politics {
            Some(super::DiscussFreq::VeryOften) => {
                sentences.push("You like to argue about politics.".to_string())
            }
            Some(level) => sentences.push(format!("You {} discuss politics.", level.label())),
            None => {}
        }
        if !partisanship_imputed {
            sentences.push(party_sentence(partisanship, opts.party_threshold));
        }
        if let Some(v) = &r.vote_2020 {
            sentences.push(vote_sentence(v));
        }
        for (name, value) in &r.therm_figures {
            if *value >= opts.warm_cutoff {
                sentences.push(format!("You have warm feelings towards {name}."));
            } else if *value <= opts.cold_cutoff {
                sentences.push(format!("You have cold feelings towards {name}."));
            }
        }
    }

    match r.social_media_freq {
        super::SocialMediaFreq::Never => {
            sentences.push("You hardly ever use social media.".to_string())
        }
        level => sentences.push(format!("You use social media {}.", level.label())),
    }
    if !r.news_sources.is_empty() {
        let names: Vec<String> =
            r.news_sources.iter().map(|s| outlets::display_name(s).to_string()).collect();
        sentences.push(format!("You get your news from {}.", join_names(&names)));
    }
    if !r.nonpolitical_interests.is_empty() {
        sentences.push(format!(
            "In your free time you enjoy {}.",
            join_names(&r.nonpolitical_interests)
        ));
    }

    Persona {
        id: r.id.clone(),
        persona_text: sentences.join(" "),
        partisanship,
        party: party_label(partisanship, opts.party_threshold),
        activity_rate: activity_rate(r.social_media_freq),
        news_sources: r.news_sources.clone(),
        enriched: false,
        partisanship_imputed,
    }
}
