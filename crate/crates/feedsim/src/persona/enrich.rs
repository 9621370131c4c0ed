//! Backend-assisted persona enrichment.
//!
//! Asks a generation backend to invent plausible extra traits (a name,
//! hobbies, a team) and appends them to the persona text. Enrichment is
//! best effort: backend failures and empty replies leave the persona
//! untouched.

use super::Persona;
use crate::generation::{
    complete, GenerationBackend, GenerationRequest, ParsedDecision, PersonaBrief, PromptKind,
    RequestContext,
};

pub use crate::generation::prompts::ENRICH_PROMPT;

/// Returns a copy of `p`, with backend-invented traits appended to the
/// persona text when the call succeeds.
pub fn enrich_persona(p: &Persona, backend: &dyn GenerationBackend, seed: u64) -> Persona {
    let request = GenerationRequest {
        kind: PromptKind::Enrich,
        persona: PersonaBrief::of(0, p),
        rendered_prompt: ENRICH_PROMPT.to_string(),
        target_words: None,
        seed,
        context: RequestContext::Enrich,
    };
    match complete(backend, &request) {
        Ok(resp) => {
            let ParsedDecision::Enriched(extra) = resp.parsed else {
                log::warn!("enrichment for {} returned a non-enrichment decision", p.id);
                return p.clone();
            };
            let mut out = p.clone();
            if out.persona_text.is_empty() {
                out.persona_text = extra;
            } else {
                out.persona_text = format!("{} {}", out.persona_text, extra);
            }
            out.enriched = true;
            out
        }
        Err(err) => {
            log::warn!("enrichment for {} failed, keeping survey persona: {err}", p.id);
            p.clone()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generation::{
        BackendError, MockBackend, RawResponse, Transcript, TranscriptBackend, TranscriptEntry,
    };
    use crate::persona::Party;

    fn persona() -> Persona {
        Persona {
            id: "r1".into(),
            persona_text: "You are 44 years old. You are a Republican.".into(),
            partisanship: -0.5,
            party: Party::Republican,
            activity_rate: 4.0,
            news_sources: vec!["fox".into()],
            enriched: false,
            partisanship_imputed: false,
        }
    }

    #[test]
    fn appends_traits_and_flags_enriched() {
        let p = persona();
        let out = enrich_persona(&p, &MockBackend::default(), 3);
        assert!(out.enriched);
        assert!(out.persona_text.starts_with(&p.persona_text));
        assert!(out.persona_text.len() > p.persona_text.len());
        assert!(out.persona_text.contains("Your name is "));
        // Scalars untouched.
        assert_eq!(out.partisanship, p.partisanship);
        assert_eq!(out.activity_rate, p.activity_rate);
    }

    #[test]
    fn deterministic_in_seed() {
        let p = persona();
        let a = enrich_persona(&p, &MockBackend::default(), 3);
        let b = enrich_persona(&p, &MockBackend::default(), 3);
        let c = enrich_persona(&p, &MockBackend::default(), 4);
        assert_eq!(a, b);
        assert_ne!(a.persona_text, c.persona_text);
    }

    struct Failing;

    impl GenerationBackend for Failing {
        fn name(&self) -> &str {
            "failing"
        }

        fn complete_raw(&self, _r: &GenerationRequest) -> Result<RawResponse, BackendError> {
            Err(BackendError::Transport("connection refused".into()))
        }
    }

    #[test]
    fn backend_failure_keeps_persona_unchanged() {
        let p = persona();
        let out = enrich_persona(&p, &Failing, 3);
        assert_eq!(out, p);
        assert!(!out.enriched);
    }

    #[test]
    fn whitespace_reply_keeps_persona_unchanged() {
        let transcript = Transcript {
            entries: vec![
                TranscriptEntry {
                    kind: crate::generation::PromptKind::Enrich,
                    prompt_sha: String::new(),
                    response: "   \n  ".into(),
                },
                TranscriptEntry {
                    kind: crate::generation::PromptKind::Enrich,
                    prompt_sha: String::new(),
                    response: "\t".into(),
                },
            ],
        };
        let backend = TranscriptBackend::lenient(transcript);
        let p = persona();
        // Both the first reply and the format retry are blank, so the
        // persona stays as rendered.
        let out = enrich_persona(&p, &backend, 3);
        assert_eq!(out, p);
    }
}
