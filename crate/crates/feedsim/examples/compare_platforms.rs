//! Runs the same synthetic population through all three feed rankers
//! across several seeds and tabulates the outcome metrics, counting how
//! often the cross-party ordering holds.
//!
//!     cargo run --release --example compare_platforms -- [agents] [homophily] [seeds]
//!
//! The population is a stark bimodal split: half the agents at
//! partisanship +0.8, half at -0.8, with the usual spread of activity
//! levels. Expected picture: the follow feed keeps engagement inside
//! each bloc, the global feed surfaces whatever piles up engagement,
//! and the bridging feed surfaces posts the other side liked, pulling
//! comments across the divide without rewarding rage bait.

use feedsim::config::SimulationConfig;
use feedsim::engine::run_simulation;
use feedsim::feed::Platform;
use feedsim::generation::{MockBackend, NewsStory};
use feedsim::graph::generate_follow_graph;
use feedsim::metrics::{build_report, LexiconScorer, RunReport};
use feedsim::outlets;
use feedsim::persona::{Party, Persona};

/// Synthetic bimodal population: even ids Democratic at +0.8, odd ids
/// Republican at -0.8. Activity rates cycle the five survey levels.
pub fn bimodal_personas(n: usize) -> Vec<Persona> {
    let rates = [1.0, 2.0, 4.0, 8.0, 16.0];
    (0..n)
        .map(|i| {
            let (p, party) = if i % 2 == 0 {
                (0.8, Party::Democrat)
            } else {
                (-0.8, Party::Republican)
            };
            Persona {
                id: format!("a{i:04}"),
                persona_text: format!("You are agent {i}."),
                partisanship: p,
                party,
                activity_rate: rates[i % rates.len()],
                news_sources: vec![outlets::OUTLETS[i % outlets::OUTLETS.len()].0.to_string()],
                enriched: false,
                partisanship_imputed: false,
            }
        })
        .collect()
}

pub fn demo_stories() -> Vec<NewsStory> {
    outlets::OUTLETS
        .iter()
        .enumerate()
        .map(|(i, (id, name))| NewsStory {
            id: format!("s{:02}", i + 1),
            source: id.to_string(),
            headline: format!("Story {} from {name}", i + 1),
            summary: format!("A short summary of story {} as {name} reported it.", i + 1),
            date: "2020-07-01".to_string(),
        })
        .collect()
}

pub fn run_one(
    personas: &[Persona],
    homophily: f64,
    platform: Platform,
    seed: u64,
    timeline_k: usize,
) -> RunReport {
    let partisanship: Vec<f64> = personas.iter().map(|p| p.partisanship).collect();
    let graph = generate_follow_graph(&partisanship, 30, homophily, seed).expect("graph");
    let config = SimulationConfig {
        n_agents: personas.len(),
        platform,
        timeline_k,
        ..SimulationConfig::new(seed, homophily)
    };
    let backend = MockBackend::default();
    let out = run_simulation(&config, personas, &graph, &demo_stories(), &backend).expect("run");
    let party_of: Vec<Party> = personas.iter().map(|p| p.party).collect();
    build_report(&out.content, &party_of, platform, seed, &LexiconScorer)
}

fn main() {
    let args: Vec<String> = std::env::args().collect();
    let agents: usize = args.get(1).map(|s| s.parse().expect("agents")).unwrap_or(100);
    let homophily: f64 = args.get(2).map(|s| s.parse().expect("homophily")).unwrap_or(0.5);
    let seeds: u64 = args.get(3).map(|s| s.parse().expect("seeds")).unwrap_or(10);
    let timeline_k: usize = args.get(4).map(|s| s.parse().expect("timeline_k")).unwrap_or(10);

    let personas = bimodal_personas(agents);
    println!(
        "{agents} agents at partisanship +/-0.8, homophily {homophily}, {seeds} seeds, k {timeline_k}\n"
    );
    println!(
        "{:>4}  {:>8}  {:>8}  {:>8}   {:>8}  {:>8}  {:>8}",
        "seed", "ei_flw", "ei_glb", "ei_brg", "tox_flw", "tox_glb", "tox_brg"
    );

    let mut ei_order = 0;
    let mut tox_order = 0;
    for seed in 0..seeds {
        let mut ei = Vec::new();
        let mut tox = Vec::new();
        for platform in [Platform::Follow, Platform::Global, Platform::Bridging] {
            let report = run_one(&personas, homophily, platform, seed, timeline_k);
            ei.push(report.ei_comments.expect("bimodal runs always have party pairs"));
            tox.push(report.toxicity.mean_comments.expect("runs always have comments"));
        }
        let ei_ok = ei[0] < ei[1] && ei[1] < ei[2];
        let tox_ok = tox[2] <= tox[1];
        ei_order += ei_ok as u32;
        tox_order += tox_ok as u32;
        println!(
            "{seed:>4}  {:>+8.3}  {:>+8.3}  {:>+8.3}   {:>8.3}  {:>8.3}  {:>8.3}  {}{}",
            ei[0],
            ei[1],
            ei[2],
            tox[0],
            tox[1],
            tox[2],
            if ei_ok { "" } else { " ei!" },
            if tox_ok { "" } else { " tox!" },
        );
    }
    println!(
        "\nfollow < global < bridging on comment E-I: {ei_order}/{seeds} seeds\n\
         bridging no more toxic than global:        {tox_order}/{seeds} seeds"
    );
}
