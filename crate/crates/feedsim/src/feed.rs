//! Platform content state and the three timeline ranking rules.
//!
//! | Platform | Candidates          | Score                                  |
//! |----------|---------------------|----------------------------------------|
//! | Follow   | followees' posts    | likes + comments                       |
//! | Global   | all posts           | likes + comments                       |
//! | Bridging | all posts           | likes from the author's opposite party |
//!
//! Ties break by recency (newer `created_step` first), then by higher
//! post id, so rankings are a total order and reproducible bit for bit.
//! A viewer's own posts are never candidates. Scores are computed fresh
//! from the current state on every call; the ranker itself keeps no
//! memory of what a viewer has already seen (the engine layers that on
//! top).

use crate::graph::FollowGraph;
use crate::persona::Party;
use crate::AgentId;
use serde::{Deserialize, Serialize};
use std::cmp::Reverse;
use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;
use thiserror::Error;

pub type PostId = u32;
pub type CommentId = u32;

/// Which ranking rule the platform runs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Platform {
    Follow,
    Global,
    Bridging,
}

impl Platform {
    pub const ALL: [Platform; 3] = [Platform::Follow, Platform::Global, Platform::Bridging];

    pub fn label(self) -> &'static str {
        match self {
            Platform::Follow => "follow",
            Platform::Global => "global",
            Platform::Bridging => "bridging",
        }
    }
}

impl fmt::Display for Platform {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

impl FromStr for Platform {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "follow" => Ok(Platform::Follow),
            "global" => Ok(Platform::Global),
            "bridging" => Ok(Platform::Bridging),
            _ => Err(format!("unknown platform {s:?} (expected follow, global or bridging)")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Post {
    pub id: PostId,
    pub author: AgentId,
    pub story_id: String,
    pub text: String,
    pub created_step: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Comment {
    pub id: CommentId,
    pub post_id: PostId,
    pub author: AgentId,
    pub text: String,
    pub created_step: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Like {
    pub post_id: PostId,
    pub author: AgentId,
    pub created_step: u64,
}

#[derive(Debug, Error)]
pub enum StateError {
    #[error("unknown post id {0}")]
    UnknownPost(PostId),
}

/// Everything agents have produced, with per-post indexes kept in sync.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ContentState {
    posts: Vec<Post>,
    comments: Vec<Comment>,
    likes: Vec<Like>,
    comments_by_post: Vec<Vec<CommentId>>,
    likers_by_post: Vec<Vec<AgentId>>,
    like_set: BTreeSet<(PostId, AgentId)>,
}

impl ContentState {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn posts(&self) -> &[Post] {
        &self.posts
    }

    pub fn comments(&self) -> &[Comment] {
        &self.comments
    }

    pub fn likes(&self) -> &[Like] {
        &self.likes
    }

    pub fn post(&self, id: PostId) -> Option<&Post> {
        self.posts.get(id as usize)
    }

    pub fn add_post(&mut self, author: AgentId, story_id: &str, text: &str, step: u64) -> PostId {
        let id = self.posts.len() as PostId;
        self.posts.push(Post {
            id,
            author,
            story_id: story_id.to_string(),
            text: text.to_string(),
            created_step: step,
        });
        self.comments_by_post.push(Vec::new());
        self.likers_by_post.push(Vec::new());
        id
    }

    pub fn add_comment(
        &mut self,
        post_id: PostId,
        author: AgentId,
        text: &str,
        step: u64,
    ) -> Result<CommentId, StateError> {
        if self.post(post_id).is_none() {
            return Err(StateError::UnknownPost(post_id));
        }
        let id = self.comments.len() as CommentId;
        self.comments.push(Comment {
            id,
            post_id,
            author,
            text: text.to_string(),
            created_step: step,
        });
        self.comments_by_post[post_id as usize].push(id);
        Ok(id)
    }

    /// Record a like. Returns false (and stores nothing) when this agent
    /// already liked the post, so likes are idempotent.
    pub fn add_like(
        &mut self,
        post_id: PostId,
        author: AgentId,
        step: u64,
    ) -> Result<bool, StateError> {
        if self.post(post_id).is_none() {
            return Err(StateError::UnknownPost(post_id));
        }
        if !self.like_set.insert((post_id, author)) {
            return Ok(false);
        }
        self.likes.push(Like { post_id, author, created_step: step });
        self.likers_by_post[post_id as usize].push(author);
        Ok(true)
    }

    pub fn has_liked(&self, post_id: PostId, agent: AgentId) -> bool {
        self.like_set.contains(&(post_id, agent))
    }

    pub fn like_count(&self, post_id: PostId) -> u32 {
        self.likers_by_post[post_id as usize].len() as u32
    }

    pub fn comment_count(&self, post_id: PostId) -> u32 {
        self.comments_by_post[post_id as usize].len() as u32
    }

    pub fn comments_on(&self, post_id: PostId) -> impl Iterator<Item = &Comment> + '_ {
        self.comments_by_post[post_id as usize].iter().map(|&c| &self.comments[c as usize])
    }

    pub fn likers_of(&self, post_id: PostId) -> &[AgentId] {
        &self.likers_by_post[post_id as usize]
    }

    /// Content digest: SHA-256 over the canonical JSON of posts,
    /// comments and likes in creation order.
    pub fn state_hash(&self) -> String {
        use sha2::{Digest, Sha256};
        let bytes = serde_json::to_vec(&(&self.posts, &self.comments, &self.likes))
            .expect("content state serializes");
        hex::encode(Sha256::digest(&bytes))
    }
}

/// Full simulation state: content plus the fixed social structure.
#[derive(Debug, Clone)]
pub struct PlatformState {
    pub content: ContentState,
    pub graph: FollowGraph,
    pub party_of: Vec<Party>,
}

/// Likes + comments, the engagement platforms' score.
pub fn engagement_score(content: &ContentState, post_id: PostId) -> u32 {
    content.like_count(post_id) + content.comment_count(post_id)
}

/// Likes received from members of the party opposite the author's.
/// Posts by Independents score zero; likes from Independents never count.
pub fn bridging_score(state: &PlatformState, post_id: PostId) -> u32 {
    let post = match state.content.post(post_id) {
        Some(p) => p,
        None => return 0,
    };
    let opposite = match state.party_of[post.author].opposite() {
        Some(p) => p,
        None => return 0,
    };
    state
        .content
        .likers_of(post_id)
        .iter()
        .filter(|&&liker| state.party_of[liker] == opposite)
        .count() as u32
}

/// Rank the top `k` posts for `viewer` under `platform`.
///
/// Pure: same state in, same ranking out. Returns fewer than `k` ids
/// when candidates run out, and an empty list when there are none.
pub fn rank_timeline(
    platform: Platform,
    viewer: AgentId,
    state: &PlatformState,
    k: usize,
) -> Vec<PostId> {
    let candidates: Vec<&Post> = match platform {
        Platform::Follow => {
            let followees = state.graph.followees(viewer);
            state
                .content
                .posts()
                .iter()
                .filter(|p| p.author != viewer && followees.contains(&p.author))
                .collect()
        }
        Platform::Global | Platform::Bridging => {
            state.content.posts().iter().filter(|p| p.author != viewer).collect()
        }
    };

    let mut scored: Vec<(u32, u64, PostId)> = candidates
        .iter()
        .map(|p| {
            let score = match platform {
                Platform::Follow | Platform::Global => engagement_score(&state.content, p.id),
                Platform::Bridging => bridging_score(state, p.id),
            };
            (score, p.created_step, p.id)
        })
        .collect();
    scored.sort_unstable_by_key(|&(score, step, id)| Reverse((score, step, id)));
    scored.into_iter().take(k).map(|(_, _, id)| id).collect()
}
