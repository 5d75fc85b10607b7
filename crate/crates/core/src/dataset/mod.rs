//! Blogosphere data model: bloggers, posts, comments and the validated
//! [`Dataset`] that owns them.
//!
//! A `Dataset` is immutable once built. All cross-references are resolved to
//! positional indices at construction time, so downstream code (slot views,
//! graphs, reports) works on `usize` handles into the dataset's vectors.

mod links;
mod parse;
mod slots;
mod view;

use std::collections::{HashMap, HashSet};
use std::fmt;
use std::path::PathBuf;

use chrono::{DateTime, Duration, SubsecRound, Utc};
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use links::{normalize_url, resolve_links, LinkClass, LinkCounts, LinkResolution};
pub use parse::{parse_dataset, write_dataset, DatasetMeta, DatasetPaths};
pub use slots::{analyzed_slots, slice_into_slots, slice_span, slot_of, TimeSlot};
pub use view::{slot_view, slot_view_with, CommentAttribution, SlotView};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Blogger {
    pub id: String,
    pub display_name: String,
    /// Root URL of the blogger's blog, used to match links to an author.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub blog_base_url: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Post {
    pub id: String,
    pub author_id: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub url: Option<String>,
    pub published_at: DateTime<Utc>,
    /// Hyperlinks found in the post body, in order of appearance.
    #[serde(default)]
    pub outlink_urls: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Comment {
    pub id: String,
    pub post_id: String,
    /// Commenter id. Shares the namespace of blogger ids: a commenter is a
    /// blogger iff this matches a [`Blogger::id`].
    pub author_id: String,
    pub created_at: DateTime<Utc>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub parent_comment_id: Option<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EntityKind {
    Blogger,
    Post,
    Comment,
}

impl fmt::Display for EntityKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            EntityKind::Blogger => "blogger",
            EntityKind::Post => "post",
            EntityKind::Comment => "comment",
        })
    }
}

#[derive(Debug, Error)]
pub enum DatasetError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}:{line}: malformed record: {message}")]
    Malformed {
        path: PathBuf,
        line: usize,
        message: String,
    },
    #[error("duplicate {kind} id {id:?}")]
    DuplicateId { kind: EntityKind, id: String },
    #[error("duplicate {kind} url {url:?}")]
    DuplicateUrl { kind: EntityKind, url: String },
    #[error("{kind} {id:?} references unknown {target_kind} {target:?} via `{field}`")]
    DanglingReference {
        kind: EntityKind,
        id: String,
        field: &'static str,
        target_kind: EntityKind,
        target: String,
    },
    #[error("comment {id:?} replies to comment {parent:?} on a different post")]
    ParentOnOtherPost { id: String, parent: String },
}

/// Non-fatal findings collected while validating a dataset.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub enum DatasetWarning {
    /// Comment timestamp precedes its post's publication by more than the
    /// configured tolerance.
    ClockSkew {
        comment_id: String,
        post_id: String,
        seconds_early: i64,
    },
}

impl fmt::Display for DatasetWarning {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DatasetWarning::ClockSkew {
                comment_id,
                post_id,
                seconds_early,
            } => write!(
                f,
                "comment {comment_id:?} is {seconds_early}s older than post {post_id:?}"
            ),
        }
    }
}

#[derive(Debug, Clone, Copy)]
pub struct ValidationOptions {
    /// How far a comment may precede its post before a warning is raised.
    pub clock_skew: Duration,
}

impl Default for ValidationOptions {
    fn default() -> Self {
        Self {
            clock_skew: Duration::zero(),
        }
    }
}

#[derive(Debug, Clone)]
pub struct Dataset {
    source_host: String,
    bloggers: Vec<Blogger>,
    posts: Vec<Post>,
    comments: Vec<Comment>,
    blogger_by_id: HashMap<String, usize>,
    post_by_id: HashMap<String, usize>,
    post_author: Vec<usize>,
    comment_post: Vec<usize>,
    comment_blogger: Vec<Option<usize>>,
    warnings: Vec<DatasetWarning>,
}

impl Dataset {
    pub fn new(
        source_host: impl Into<String>,
        bloggers: Vec<Blogger>,
        posts: Vec<Post>,
        comments: Vec<Comment>,
    ) -> Result<Self, DatasetError> {
        Self::with_options(
            source_host,
            bloggers,
            posts,
            comments,
            ValidationOptions::default(),
        )
    }

    pub fn with_options(
        source_host: impl Into<String>,
        bloggers: Vec<Blogger>,
        mut posts: Vec<Post>,
        mut comments: Vec<Comment>,
        options: ValidationOptions,
    ) -> Result<Self, DatasetError> {
        // Second precision throughout.
        for post in &mut posts {
            post.published_at = post.published_at.trunc_subsecs(0);
        }
        for comment in &mut comments {
            comment.created_at = comment.created_at.trunc_subsecs(0);
        }

        let mut blogger_by_id = HashMap::with_capacity(bloggers.len());
        let mut base_urls = HashSet::new();
        for (idx, blogger) in bloggers.iter().enumerate() {
            if blogger_by_id.insert(blogger.id.clone(), idx).is_some() {
                return Err(DatasetError::DuplicateId {
                    kind: EntityKind::Blogger,
                    id: blogger.id.clone(),
                });
            }
            if let Some(base) = &blogger.blog_base_url {
                let key = normalize_url(base).unwrap_or_else(|| base.clone());
                if !base_urls.insert(key) {
                    return Err(DatasetError::DuplicateUrl {
                        kind: EntityKind::Blogger,
                        url: base.clone(),
                    });
                }
            }
        }

        let mut post_by_id = HashMap::with_capacity(posts.len());
        let mut post_urls = HashSet::new();
        let mut post_author = Vec::with_capacity(posts.len());
        for (idx, post) in posts.iter().enumerate() {
            if post_by_id.insert(post.id.clone(), idx).is_some() {
                return Err(DatasetError::DuplicateId {
                    kind: EntityKind::Post,
                    id: post.id.clone(),
                });
            }
            let author = *blogger_by_id.get(&post.author_id).ok_or_else(|| {
                DatasetError::DanglingReference {
                    kind: EntityKind::Post,
                    id: post.id.clone(),
                    field: "author_id",
                    target_kind: EntityKind::Blogger,
                    target: post.author_id.clone(),
                }
            })?;
            post_author.push(author);
            if let Some(url) = &post.url {
                let key = normalize_url(url).unwrap_or_else(|| url.clone());
                if !post_urls.insert(key) {
                    return Err(DatasetError::DuplicateUrl {
                        kind: EntityKind::Post,
                        url: url.clone(),
                    });
                }
            }
        }

        let mut comment_by_id: HashMap<&str, usize> = HashMap::with_capacity(comments.len());
        let mut comment_post = Vec::with_capacity(comments.len());
        let mut comment_blogger = Vec::with_capacity(comments.len());
        let mut warnings = Vec::new();
        for (idx, comment) in comments.iter().enumerate() {
            if comment_by_id.insert(&comment.id, idx).is_some() {
                return Err(DatasetError::DuplicateId {
                    kind: EntityKind::Comment,
                    id: comment.id.clone(),
                });
            }
            let post = *post_by_id.get(&comment.post_id).ok_or_else(|| {
                DatasetError::DanglingReference {
                    kind: EntityKind::Comment,
                    id: comment.id.clone(),
                    field: "post_id",
                    target_kind: EntityKind::Post,
                    target: comment.post_id.clone(),
                }
            })?;
            comment_post.push(post);
            comment_blogger.push(blogger_by_id.get(&comment.author_id).copied());

            let published = posts[post].published_at;
            if comment.created_at + options.clock_skew < published {
                warnings.push(DatasetWarning::ClockSkew {
                    comment_id: comment.id.clone(),
                    post_id: comment.post_id.clone(),
                    seconds_early: (published - comment.created_at).num_seconds(),
                });
            }
        }
        // Parents may appear later in the file, so check after all ids are known.
        for comment in &comments {
            let Some(parent) = &comment.parent_comment_id else {
                continue;
            };
            let parent_idx = *comment_by_id.get(parent.as_str()).ok_or_else(|| {
                DatasetError::DanglingReference {
                    kind: EntityKind::Comment,
                    id: comment.id.clone(),
                    field: "parent_comment_id",
                    target_kind: EntityKind::Comment,
                    target: parent.clone(),
                }
            })?;
            if comments[parent_idx].post_id != comment.post_id {
                return Err(DatasetError::ParentOnOtherPost {
                    id: comment.id.clone(),
                    parent: parent.clone(),
                });
            }
        }

        Ok(Self {
            source_host: source_host.into().to_ascii_lowercase(),
            bloggers,
            posts,
            comments,
            blogger_by_id,
            post_by_id,
            post_author,
            comment_post,
            comment_blogger,
            warnings,
        })
    }

    pub fn source_host(&self) -> &str {
        &self.source_host
    }

    pub fn bloggers(&self) -> &[Blogger] {
        &self.bloggers
    }

    pub fn posts(&self) -> &[Post] {
        &self.posts
    }

    pub fn comments(&self) -> &[Comment] {
        &self.comments
    }

    pub fn warnings(&self) -> &[DatasetWarning] {
        &self.warnings
    }

    pub fn blogger_index(&self, id: &str) -> Option<usize> {
        self.blogger_by_id.get(id).copied()
    }

    pub fn post_index(&self, id: &str) -> Option<usize> {
        self.post_by_id.get(id).copied()
    }

    /// Blogger index of the author of post `post`.
    pub fn post_author(&self, post: usize) -> usize {
        self.post_author[post]
    }

    /// Post index the comment `comment` belongs to.
    pub fn comment_post(&self, comment: usize) -> usize {
        self.comment_post[comment]
    }

    /// Blogger index of the commenter, or `None` for commenters who never post.
    pub fn comment_blogger(&self, comment: usize) -> Option<usize> {
        self.comment_blogger[comment]
    }

    /// True if the comment was written by the author of the post it is on.
    pub fn is_self_comment(&self, comment: usize) -> bool {
        self.comments[comment].author_id == self.posts[self.comment_post[comment]].author_id
    }

    pub fn is_empty(&self) -> bool {
        self.posts.is_empty() && self.comments.is_empty()
    }

    /// Earliest and latest event timestamps over posts and comments.
    pub fn time_span(&self) -> Option<(DateTime<Utc>, DateTime<Utc>)> {
        let times = self
            .posts
            .iter()
            .map(|p| p.published_at)
            .chain(self.comments.iter().map(|c| c.created_at));
        times.fold(None, |acc, t| match acc {
            None => Some((t, t)),
            Some((lo, hi)) => Some((lo.min(t), hi.max(t))),
        })
    }
}
