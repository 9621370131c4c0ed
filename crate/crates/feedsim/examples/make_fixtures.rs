//! Regenerates the bundled fixtures: a 500-respondent survey sample and
//! the fifteen news stories dated 2020-07-01.
//!
//! Deterministic by construction, so running it twice leaves the files
//! byte-identical. The demographic marginals are pinned exactly (gender
//! 271/229, race 332/74/35/29/22/8, education 258/141/84/12 with 5
//! skipped, income 113/261/118 with 8 skipped, mean age 38.14); the
//! per-row combinations are shuffled from a fixed seed.

use feedsim::generation::{write_stories_file, NewsStory};
use feedsim::outlets;
use feedsim::persona::{
    load_survey_file, write_survey_file, DiscussFreq, SocialMediaFreq, SurveyRespondent,
};
use feedsim::seed::{rng_for, SimRng};
use rand::seq::SliceRandom;
use rand::Rng;
use std::path::{Path, PathBuf};

const N: usize = 500;
const SEED: u64 = 20200701;
const AGE_TOTAL: i64 = 19070; // 500 * 38.14

fn fixtures_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../fixtures")
}

/// Expand (value, count) pairs into a shuffled column of N cells.
/// An empty string stands for a skipped question.
fn column(counts: &[(&str, usize)], rng: &mut SimRng) -> Vec<Option<String>> {
    let mut out = Vec::with_capacity(N);
    for (value, count) in counts {
        for _ in 0..*count {
            out.push(if value.is_empty() { None } else { Some(value.to_string()) });
        }
    }
    assert_eq!(out.len(), N, "column counts must sum to {N}");
    out.shuffle(rng);
    out
}

/// Right-skewed ages in 18..=90 whose sum is exactly AGE_TOTAL.
fn ages(rng: &mut SimRng) -> Vec<u32> {
    let mut ages: Vec<i64> = (0..N)
        .map(|_| {
            let r: f64 = rng.random();
            18 + (65.0 * r * r) as i64
        })
        .collect();
    loop {
        let diff = AGE_TOTAL - ages.iter().sum::<i64>();
        if diff == 0 {
            break;
        }
        let i = rng.random_range(0..N);
        if diff > 0 && ages[i] < 90 {
            ages[i] += 1;
        } else if diff < 0 && ages[i] > 18 {
            ages[i] -= 1;
        }
    }
    ages.into_iter().map(|a| a as u32).collect()
}

#[derive(Clone, Copy, PartialEq)]
enum Bucket {
    Dem,
    Rep,
    Ind,
    /// Both thermometers skipped.
    MissingBoth,
    /// Exactly one thermometer skipped.
    MissingOne,
}

fn buckets(rng: &mut SimRng) -> Vec<Bucket> {
    let mut out = Vec::with_capacity(N);
    for (bucket, count) in [
        (Bucket::Dem, 205),
        (Bucket::Rep, 160),
        (Bucket::Ind, 123),
        (Bucket::MissingBoth, 7),
        (Bucket::MissingOne, 5),
    ] {
        out.extend(std::iter::repeat(bucket).take(count));
    }
    assert_eq!(out.len(), N);
    out.shuffle(rng);
    out
}

/// Party thermometers for one respondent. Partisans keep a gap of at
/// least 11 points so they clear the 0.1 labeling threshold.
fn thermometers(bucket: Bucket, rng: &mut SimRng) -> (Option<f64>, Option<f64>) {
    match bucket {
        Bucket::Dem => {
            let own = rng.random_range(55..=95) as f64;
            let other = rng.random_range(5..=(own as i64 - 11)).max(0) as f64;
            (Some(own), Some(other))
        }
        Bucket::Rep => {
            let own = rng.random_range(55..=95) as f64;
            let other = rng.random_range(5..=(own as i64 - 11)).max(0) as f64;
            (Some(other), Some(own))
        }
        Bucket::Ind => {
            let d = rng.random_range(25..=75) as i64;
            let r = (d + rng.random_range(-10..=10)).clamp(0, 100);
            (Some(d as f64), Some(r as f64))
        }
        Bucket::MissingBoth => (None, None),
        Bucket::MissingOne => {
            let v = Some(rng.random_range(20..=80) as f64);
            if rng.random::<bool>() {
                (v, None)
            } else {
                (None, v)
            }
        }
    }
}

fn vote(bucket: Bucket, rng: &mut SimRng) -> Option<String> {
    let roll: f64 = rng.random();
    let v = match bucket {
        Bucket::Dem => match roll {
            r if r < 0.80 => "Joe Biden",
            r if r < 0.88 => "did not vote",
            r if r < 0.93 => "someone else",
            _ => "",
        },
        Bucket::Rep => match roll {
            r if r < 0.80 => "Donald Trump",
            r if r < 0.88 => "did not vote",
            r if r < 0.93 => "someone else",
            _ => "",
        },
        Bucket::Ind => match roll {
            r if r < 0.25 => "Joe Biden",
            r if r < 0.45 => "Donald Trump",
            r if r < 0.75 => "did not vote",
            r if r < 0.85 => "someone else",
            _ => "",
        },
        _ => match roll {
            r if r < 0.40 => "did not vote",
            r if r < 0.60 => "someone else",
            _ => "",
        },
    };
    if v.is_empty() {
        None
    } else {
        Some(v.to_string())
    }
}

fn figures(bucket: Bucket, rng: &mut SimRng) -> Vec<(String, f64)> {
    if rng.random::<f64>() >= 0.55 {
        return Vec::new();
    }
    let (biden, trump) = match bucket {
        Bucket::Dem => (rng.random_range(60..=95), rng.random_range(0..=35)),
        Bucket::Rep => (rng.random_range(0..=35), rng.random_range(60..=95)),
        _ => (rng.random_range(30..=65), rng.random_range(30..=65)),
    };
    let mut out = vec![
        ("Donald Trump".to_string(), trump as f64),
        ("Joe Biden".to_string(), biden as f64),
    ];
    if rng.random::<f64>() < 0.3 {
        let extra = match bucket {
            Bucket::Dem => ("Bernie Sanders", rng.random_range(50..=90)),
            Bucket::Rep => ("Mike Pence", rng.random_range(50..=90)),
            _ => ("Anthony Fauci", rng.random_range(35..=75)),
        };
        out.push((extra.0.to_string(), extra.1 as f64));
    }
    out
}

fn pick_distinct(pool: &[&str], n: usize, rng: &mut SimRng) -> Vec<String> {
    let mut pool: Vec<&str> = pool.to_vec();
    pool.shuffle(rng);
    pool.truncate(n);
    pool.sort_unstable();
    pool.into_iter().map(str::to_string).collect()
}

fn news_sources(bucket: Bucket, rng: &mut SimRng) -> Vec<String> {
    let left = ["cnn", "msnbc", "nyt", "npr", "wapo", "nbc", "abc", "cbs"];
    let right = ["fox", "breitbart", "wsj", "thehill"];
    let center = ["ap", "reuters", "usatoday", "abc", "cbs", "thehill", "wsj"];
    let roll: f64 = rng.random();
    let n = match roll {
        r if r < 0.15 => 0,
        r if r < 0.40 => 1,
        r if r < 0.70 => 2,
        r if r < 0.90 => 3,
        _ => 4,
    };
    let pool: &[&str] = match bucket {
        Bucket::Dem => &left,
        Bucket::Rep => &right,
        _ => &center,
    };
    let mut sources = pick_distinct(pool, n, rng);
    // A minority reads across the aisle.
    if n > 0 && rng.random::<f64>() < 0.10 {
        let other: &[&str] = match bucket {
            Bucket::Dem => &right,
            Bucket::Rep => &left,
            _ => &left,
        };
        let extra = other[rng.random_range(0..other.len())].to_string();
        if !sources.contains(&extra) {
            sources.push(extra);
        }
    }
    sources
}

fn interests(rng: &mut SimRng) -> Vec<String> {
    let pool = [
        "reading", "gardening", "hiking", "cooking", "fishing", "video games", "baseball",
        "football", "basketball", "knitting", "woodworking", "painting", "photography", "running",
        "cycling", "camping", "board games", "movies", "travel", "yoga", "birdwatching",
        "grilling", "playing guitar", "home improvement",
    ];
    let n = rng.random_range(0..=4);
    pick_distinct(&pool, n, rng)
}

fn make_survey() -> Vec<SurveyRespondent> {
    let mut rng = rng_for(SEED, "survey-sample");

    let genders = column(&[("male", 271), ("female", 229)], &mut rng);
    let races = column(
        &[
            ("White", 332),
            ("Hispanic", 74),
            ("Black", 35),
            ("Multiple races", 29),
            ("Asian", 22),
            ("Native American", 8),
        ],
        &mut rng,
    );
    let educations = column(
        &[
            ("high school", 258),
            ("bachelor's degree", 141),
            ("graduate degree", 84),
            ("less than high school", 12),
            ("", 5),
        ],
        &mut rng,
    );
    let incomes = column(&[("upper", 113), ("middle", 261), ("lower", 118), ("", 8)], &mut rng);
    let religions = column(
        &[
            ("Protestant", 120),
            ("Catholic", 105),
            ("nothing in particular", 95),
            ("agnostic", 45),
            ("atheist", 40),
            ("Jewish", 15),
            ("Mormon", 12),
            ("Muslim", 10),
            ("Buddhist", 10),
            ("Hindu", 8),
            ("", 40),
        ],
        &mut rng,
    );
    let states = column(
        &[
            ("California", 50),
            ("Texas", 42),
            ("Florida", 35),
            ("New York", 30),
            ("Pennsylvania", 20),
            ("Illinois", 19),
            ("Ohio", 18),
            ("Georgia", 16),
            ("North Carolina", 16),
            ("Michigan", 15),
            ("New Jersey", 13),
            ("Virginia", 13),
            ("Washington", 12),
            ("Arizona", 11),
            ("Massachusetts", 10),
            ("Tennessee", 10),
            ("Indiana", 10),
            ("Missouri", 9),
            ("Maryland", 9),
            ("Wisconsin", 9),
            ("Colorado", 8),
            ("Minnesota", 8),
            ("South Carolina", 8),
            ("Alabama", 7),
            ("Louisiana", 7),
            ("Kentucky", 7),
            ("Oregon", 6),
            ("Oklahoma", 6),
            ("Connecticut", 5),
            ("Utah", 5),
            ("Iowa", 5),
            ("Nevada", 4),
            ("Arkansas", 4),
            ("Mississippi", 4),
            ("Kansas", 4),
            ("New Mexico", 3),
            ("Nebraska", 3),
            ("West Virginia", 3),
            ("Idaho", 2),
            ("Hawaii", 2),
            ("Maine", 2),
            ("New Hampshire", 2),
            ("Montana", 1),
            ("Rhode Island", 1),
            ("Delaware", 1),
            ("South Dakota", 1),
            ("North Dakota", 1),
            ("Alaska", 1),
            ("Vermont", 1),
            ("Wyoming", 1),
            ("", 20),
        ],
        &mut rng,
    );
    let discuss = column(
        &[
            ("never", 120),
            ("rarely", 90),
            ("sometimes", 130),
            ("often", 95),
            ("very often", 45),
            ("", 20),
        ],
        &mut rng,
    );
    let social = column(
        &[
            ("never", 60),
            ("once a week", 95),
            ("a few times a week", 130),
            ("once a day", 120),
            ("many times a day", 95),
        ],
        &mut rng,
    );
    let ages = ages(&mut rng);
    let buckets = buckets(&mut rng);

    (0..N)
        .map(|i| {
            let bucket = buckets[i];
            let (therm_dem, therm_rep) = thermometers(bucket, &mut rng);
            SurveyRespondent {
                id: format!("r{:04}", i + 1),
                age: Some(ages[i]),
                gender: genders[i].clone(),
                race: races[i].clone(),
                education: educations[i].clone(),
                income_class: incomes[i].clone(),
                religion: religions[i].clone(),
                state: states[i].clone(),
                therm_dem,
                therm_rep,
                therm_figures: figures(bucket, &mut rng),
                vote_2020: vote(bucket, &mut rng),
                discuss_politics: discuss[i].as_deref().map(|s| DiscussFreq::parse(s).unwrap()),
                social_media_freq: SocialMediaFreq::parse(social[i].as_deref().unwrap()).unwrap(),
                news_sources: news_sources(bucket, &mut rng),
                nonpolitical_interests: interests(&mut rng),
            }
        })
        .collect()
}

fn check_marginals(rows: &[SurveyRespondent]) {
    assert_eq!(rows.len(), N);
    let count = |f: &dyn Fn(&SurveyRespondent) -> bool| rows.iter().filter(|r| f(r)).count();
    assert_eq!(count(&|r| r.gender.as_deref() == Some("male")), 271);
    assert_eq!(count(&|r| r.gender.as_deref() == Some("female")), 229);
    assert_eq!(count(&|r| r.race.as_deref() == Some("White")), 332);
    assert_eq!(count(&|r| r.race.as_deref() == Some("Native American")), 8);
    assert_eq!(count(&|r| r.education.is_none()), 5);
    assert_eq!(count(&|r| r.income_class.is_none()), 8);
    let total: i64 = rows.iter().map(|r| r.age.unwrap() as i64).sum();
    assert_eq!(total, AGE_TOTAL, "mean age must be exactly 38.14");
    let dems = count(&|r| match (r.therm_dem, r.therm_rep) {
        (Some(d), Some(rp)) => (d - rp) / 100.0 > 0.1,
        _ => false,
    });
    let reps = count(&|r| match (r.therm_dem, r.therm_rep) {
        (Some(d), Some(rp)) => (d - rp) / 100.0 < -0.1,
        _ => false,
    });
    assert_eq!(dems, 205);
    assert_eq!(reps, 160);
}

fn stories() -> Vec<NewsStory> {
    let rows: [(&str, &str, &str, &str); 15] = [
        (
            "s01",
            "abc",
            "Alabama students throwing 'COVID parties' to see who gets infected: Officials",
            "Officials in Tuscaloosa say college students have been organizing parties where guests known to have tested positive for the coronavirus are invited on purpose, with attendees putting money into a pot that goes to the first person to catch the virus afterward. Fire officials confirmed the reports to the city council this week. State leaders called the gatherings reckless as Alabama recorded another week of rising infections, and university administrators said they were weighing discipline ahead of fall reopening plans for campuses.",
        ),
        (
            "s02",
            "ap",
            "Mississippi retires last state flag bearing the Confederate battle emblem",
            "Mississippi's governor signed a landmark law retiring the last state flag in the nation to feature the Confederate battle emblem, capping a swift reversal after decades of failed efforts. Legislators voted over the weekend amid nationwide protests over racial injustice and mounting pressure from business, religious and sports organizations. A commission will now design a new banner that must include the phrase In God We Trust, and voters will accept or reject the design on the November ballot.",
        ),
        (
            "s03",
            "breitbart",
            "St. Louis couple who drew guns on protesters say they feared for their lives",
            "A St. Louis husband and wife who pointed firearms at demonstrators marching past their home told interviewers they believed the crowd had broken through a private gate and threatened them, saying they acted to defend their property. Protesters en route to the mayor's residence dispute that account and say the march was peaceful. The local prosecutor said her office is reviewing the confrontation, while supporters of the couple argue the state's castle doctrine squarely protects them.",
        ),
        (
            "s04",
            "cbs",
            "Hong Kong police make first arrests under China's new national security law",
            "Hong Kong police arrested about ten people under Beijing's sweeping new national security law on the anniversary of the city's handover, among hundreds detained as thousands defied a protest ban. The law, imposed this week without local legislative review, criminalizes secession, subversion, terrorism and collusion with foreign forces, with penalties up to life imprisonment. Critics say it ends the one country, two systems arrangement; officials in Beijing and Hong Kong insist it restores stability after a year of unrest.",
        ),
        (
            "s05",
            "cnn",
            "Trump calls Black Lives Matter a 'symbol of hate'",
            "President Trump denounced plans to paint Black Lives Matter in front of Trump Tower, tweeting that the mural would be a symbol of hate and denigrating the movement as New York weighs the project on Fifth Avenue. The remarks drew immediate criticism from city officials, who said the message honors a movement demanding justice, and widened the president's break with corporate and sports institutions that have embraced the slogan following weeks of nationwide demonstrations over police violence.",
        ),
        (
            "s06",
            "fox",
            "Seattle police clear 'CHOP' protest zone after weeks of occupation",
            "Seattle police moved in at dawn to clear the Capitol Hill Organized Protest zone, arresting dozens of people who remained after the mayor declared the gathering an unlawful assembly. Officers retook the East Precinct building that had been abandoned for weeks as demonstrators established a police-free area spanning several blocks. City officials pointed to a string of shootings in and around the zone, two of them fatal, while organizers said the sweep silenced a peaceful experiment in community governance.",
        ),
        (
            "s07",
            "msnbc",
            "Judge temporarily blocks publication of Mary Trump's tell-all book",
            "A New York judge temporarily blocked publication of a revealing family memoir by the president's niece, siding for now with the president's brother, who argues the book violates a confidentiality agreement from a decades-old estate settlement. The publisher says the book, which promises an insider account of the family and harsh assessments of the president's character, has already been printed and that the restraint tramples the First Amendment. An appeals hearing is expected within days as the release date nears.",
        ),
        (
            "s08",
            "nbc",
            "FBI warns scammers are exploiting demand for coronavirus antibody tests",
            "The FBI issued a warning that scammers are marketing unapproved coronavirus antibody tests to harvest personal information and bill for services never rendered. Investigators say fraudsters are cold-calling consumers, advertising on social media and setting up pop-up testing sites, then using the collected names, birth dates and insurance numbers for identity theft and fraudulent claims. Officials urged people to verify that any test is authorized by regulators and arranged through a doctor or public health department before handing over data.",
        ),
        (
            "s09",
            "npr",
            "Russian voters back constitutional changes letting Putin rule until 2036",
            "Election officials in Russia said voters overwhelmingly approved a package of constitutional amendments that resets presidential term limits, clearing the way for Vladimir Putin to seek two more terms and potentially stay in power until 2036. The weeklong vote, held without independent observation that critics consider meaningful, also enshrined conservative social provisions and new social guarantees. Opposition figures called the exercise a plebiscite staged to legitimize indefinite rule and reported irregularities including pressure on state employees to participate.",
        ),
        (
            "s10",
            "nyt",
            "Minor League Baseball Season Is Canceled for the First Time",
            "Minor League Baseball canceled its season for the first time in its history after Major League Baseball told its affiliates it would not supply players during the pandemic. The decision idles thousands of players and staff across about 160 teams and deprives small cities of summer fixtures that anchor local economies. Team owners warned that many franchises may not survive the lost year without help, and the shutdown arrives as the leagues negotiate a restructuring that could permanently shrink the minors.",
        ),
        (
            "s11",
            "reuters",
            "U.S. secures nearly all global supply of COVID-19 drug remdesivir",
            "The United States has bought nearly all of the remdesivir that manufacturer Gilead can produce through September, leaving little of the antiviral for the rest of the world for three months. The health department said the deal covers more than half a million treatment courses for American hospitals. The purchase drew criticism from researchers and foreign governments who called it a unilateral grab for one of the few drugs shown to shorten recovery from severe COVID-19 in clinical trials.",
        ),
        (
            "s12",
            "thehill",
            "Senate approves extension of small-business paycheck protection program",
            "The Senate unanimously approved a five-week extension of the Paycheck Protection Program just hours before the lending window was set to close, giving small businesses more time to apply for roughly 130 billion dollars in unused aid. The surprise move came as new coronavirus outbreaks force states to pause reopening plans, renewing fears of layoffs. The measure now heads to the House, while lawmakers begin negotiating a broader relief package expected to dominate the July legislative calendar.",
        ),
        (
            "s13",
            "usatoday",
            "American and United will again book flights to full capacity despite virus surge",
            "American Airlines and United will resume selling every seat on their flights starting this week, ending caps that had left middle seats open during the pandemic. The carriers say mask requirements, cleaning procedures and air filtration make full cabins safe, and that empty-seat pledges were never a guarantee. Public health officials sharply criticized the change as infections climb in much of the country, with one telling senators that packed planes send exactly the wrong message about distancing.",
        ),
        (
            "s14",
            "wapo",
            "Fauci warns U.S. could see 100,000 new coronavirus cases a day",
            "The government's top infectious-disease expert told senators the United States is clearly not in total control of the coronavirus outbreak and could reach 100,000 new cases a day if current trends continue, more than double the present pace. He said recent surges across the South and West stem from states reopening too quickly and from crowds gathering without masks. The testimony came as several governors paused reopening plans and as the national daily case count set records this week.",
        ),
        (
            "s15",
            "wsj",
            "U.S. factory activity snaps back as reopening lifts new orders",
            "American manufacturing expanded in June for the first time since the pandemic forced widespread shutdowns, with a closely watched purchasing managers index jumping to 52.6 as new orders and production surged. Economists cautioned that the rebound measures direction rather than distance: output remains well below winter levels, and employment in the sector is still contracting. Markets rallied on the report even as rising infection counts in several large states clouded the outlook for sustained recovery in the second half.",
        ),
    ];
    rows.iter()
        .map(|(id, source, headline, summary)| NewsStory {
            id: id.to_string(),
            source: source.to_string(),
            headline: headline.to_string(),
            summary: summary.to_string(),
            date: "2020-07-01".to_string(),
        })
        .collect()
}

fn main() {
    let dir = fixtures_dir();
    std::fs::create_dir_all(&dir).expect("create fixtures dir");

    let rows = make_survey();
    check_marginals(&rows);
    let survey_path = dir.join("survey_sample.tsv");
    write_survey_file(&survey_path, &rows).expect("write survey");
    let reloaded = load_survey_file(&survey_path).expect("reload survey");
    assert_eq!(reloaded, rows, "survey must round-trip");

    let stories = stories();
    let sources: std::collections::BTreeSet<&str> =
        stories.iter().map(|s| s.source.as_str()).collect();
    assert_eq!(sources.len(), outlets::OUTLETS.len(), "one story per outlet");
    for story in &stories {
        let words = story.summary.split_whitespace().count();
        assert!(
            (50..=120).contains(&words),
            "summary for {} has {words} words",
            story.id
        );
    }
    let stories_path = dir.join("stories_2020-07-01.tsv");
    write_stories_file(&stories_path, &stories).expect("write stories");

    println!("wrote {} respondents to {}", rows.len(), survey_path.display());
    println!("wrote {} stories to {}", stories.len(), stories_path.display());
}
