//! Prompt templates and builders.
//!
//! The template wording is load-bearing: agent behavior was studied
//! under these exact instructions, so they are reproduced character for
//! character (including the "your strongly disagree" typo and trailing
//! spaces) and pinned by golden-file tests. Only the bracketed slots
//! are interpolated.

use super::{NewsStory, TimelineEntry};
use crate::outlets;
use std::fmt::Write;

pub const FIRST_POST_TEMPLATE: &str = "Here follows a list of headlines from the newspaper: \n\n{stories}\n\nChoose exactly one of these headlines to share on your social media feed based on your persona, and write a comment of 10-50 words about that one headline in the style of your personality. {format_instructions}";

pub const COMMENT_TEMPLATE: &str = "You are using a social media platform, and see the following message threads: \n\n{timeline}\n\nChoose exactly one of these posts / message threads that your persona is likely to react to emotionally, either because you strongly agree or because your strongly disagree. Engage in natural conversation by writing a response to this message in the style of your personality. You may use sarcasm or irony, swear, criticize, threat, lie, and engage in personal attacks. You can also bring up a related topic that the post made you think of. {length_instruction}{format_instructions}";

pub const LIKE_TEMPLATE: &str = "You are using a social media platform, and see the following messages: \n\n{timeline}\n\nBased on your persona, decide if you want to react to each message. Your possible actions are 'press like' and 'no action'. Only like messages that you endorse, and that you feel positive about. {format_instructions}";

/// Appended to comment prompts when the engine sampled a target length.
pub const LENGTH_TEMPLATE: &str = "Your message should be {n} words long.";

pub const ENRICH_PROMPT: &str = "You will get a description of a person. Your task is to add other plausible personality traits that fits the described person, such as hobbies, favorite sports teams, specific political opinions, or other personality attributes. Give the person a name and a surname. [Respond with the new attributes. Use concise language and respond briefly. Only list the traits, without saying e.g. 'additional personality traits' or describing the task.]";

pub const POST_FORMAT_INSTRUCTIONS: &str = "Reply in plain text with exactly two lines, in exactly this format:\nCHOICE: <number of the headline you picked>\nTEXT: <your message>";

pub const COMMENT_FORMAT_INSTRUCTIONS: &str = "Reply in plain text with exactly two lines, in exactly this format:\nCHOICE: <number of the message you are responding to>\nTEXT: <your message>";

pub const LIKE_FORMAT_INSTRUCTIONS: &str = "Reply in plain text with one line per message, each in exactly this format:\nLIKE <message number>: yes or no\nAnswer for every message exactly once.";

/// Numbered story list with outlet names and summaries.
pub fn render_story_list(stories: &[&NewsStory]) -> String {
    let mut out = String::new();
    for (i, s) in stories.iter().enumerate() {
        if i > 0 {
            out.push_str("\n\n");
        }
        write!(out, "{}. {} ({})\n{}", i + 1, s.headline, outlets::display_name(&s.source), s.summary)
            .unwrap();
    }
    out
}

fn like_count(n: u32) -> String {
    if n == 1 {
        "1 like".to_string()
    } else {
        format!("{n} likes")
    }
}

/// Numbered message threads: each post with its like count and replies.
pub fn render_timeline(entries: &[TimelineEntry]) -> String {
    let mut out = String::new();
    for (i, e) in entries.iter().enumerate() {
        if i > 0 {
            out.push_str("\n\n");
        }
        write!(out, "Message {} (User {}, {}):\n{}", i + 1, e.author, like_count(e.likes), e.text)
            .unwrap();
        for r in &e.replies {
            write!(out, "\n    Reply from User {}: {}", r.author, r.text).unwrap();
        }
    }
    out
}

pub fn build_first_post_prompt(stories: &[&NewsStory]) -> String {
    FIRST_POST_TEMPLATE
        .replace("{stories}", &render_story_list(stories))
        .replace("{format_instructions}", POST_FORMAT_INSTRUCTIONS)
}

pub fn build_comment_prompt(timeline: &[TimelineEntry], target_words: Option<u32>) -> String {
    let length_instruction = match target_words {
        Some(n) => format!("{} ", LENGTH_TEMPLATE.replace("{n}", &n.to_string())),
        None => String::new(),
    };
    COMMENT_TEMPLATE
        .replace("{timeline}", &render_timeline(timeline))
        .replace("{length_instruction}", &length_instruction)
        .replace("{format_instructions}", COMMENT_FORMAT_INSTRUCTIONS)
}

pub fn build_like_prompt(timeline: &[TimelineEntry]) -> String {
    LIKE_TEMPLATE
        .replace("{timeline}", &render_timeline(timeline))
        .replace("{format_instructions}", LIKE_FORMAT_INSTRUCTIONS)
}
