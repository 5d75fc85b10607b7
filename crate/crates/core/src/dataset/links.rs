//! Hyperlink resolution: maps each post outlink to a post or author of the
//! dataset when possible.

use std::collections::HashMap;

use serde::Serialize;
use url::Url;

use super::Dataset;

/// Classification of a single outlink.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(tag = "class", rename_all = "snake_case")]
pub enum LinkClass {
    /// Points outside the portal. `unparseable` marks URLs that could not be read.
    External { unparseable: bool },
    /// Points into the portal but to nothing the dataset knows.
    InternalUnmatched,
    /// Points under a blogger's blog root (dataset blogger index).
    AuthorMatched { blogger: usize },
    /// Points at a known post (dataset indices of the post and its author).
    PostMatched { post: usize, author: usize },
}

impl LinkClass {
    pub fn is_internal(&self) -> bool {
        !matches!(self, LinkClass::External { .. })
    }

    /// Author the link resolves to, if any.
    pub fn target_author(&self) -> Option<usize> {
        match *self {
            LinkClass::AuthorMatched { blogger } => Some(blogger),
            LinkClass::PostMatched { author, .. } => Some(author),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct LinkCounts {
    pub external: usize,
    pub unparseable: usize,
    pub internal_unmatched: usize,
    pub author_matched: usize,
    pub post_matched: usize,
}

impl LinkCounts {
    pub fn total(&self) -> usize {
        self.external + self.internal_unmatched + self.author_matched + self.post_matched
    }
}

/// Per-post outlink classifications, parallel to `Dataset::posts()` and each
/// post's `outlink_urls`.
#[derive(Debug, Clone)]
pub struct LinkResolution {
    per_post: Vec<Vec<LinkClass>>,
}

impl LinkResolution {
    pub fn for_post(&self, post: usize) -> &[LinkClass] {
        &self.per_post[post]
    }

    /// `(source post, class)` for every outlink in the dataset.
    pub fn iter(&self) -> impl Iterator<Item = (usize, LinkClass)> + '_ {
        self.per_post
            .iter()
            .enumerate()
            .flat_map(|(p, links)| links.iter().map(move |&c| (p, c)))
    }

    pub fn counts(&self) -> LinkCounts {
        let mut counts = LinkCounts::default();
        for (_, class) in self.iter() {
            match class {
                LinkClass::External { unparseable } => {
                    counts.external += 1;
                    counts.unparseable += usize::from(unparseable);
                }
                LinkClass::InternalUnmatched => counts.internal_unmatched += 1,
                LinkClass::AuthorMatched { .. } => counts.author_matched += 1,
                LinkClass::PostMatched { .. } => counts.post_matched += 1,
            }
        }
        counts
    }
}

/// Canonical form used for URL matching: lowercase scheme and host, no
/// fragment, no trailing slash on the path. Query strings are kept.
pub fn normalize_url(raw: &str) -> Option<String> {
    let url = Url::parse(raw.trim()).ok()?;
    let host = url.host_str()?.to_ascii_lowercase();
    let mut out = format!("{}://{}", url.scheme(), host);
    if let Some(port) = url.port() {
        out.push_str(&format!(":{port}"));
    }
    out.push_str(url.path().trim_end_matches('/'));
    if let Some(q) = url.query() {
        out.push('?');
        out.push_str(q);
    }
    Some(out)
}

fn host_of(normalized: &str) -> &str {
    let rest = normalized.split_once("://").map_or(normalized, |(_, r)| r);
    let end = rest.find(['/', '?', ':']).unwrap_or(rest.len());
    &rest[..end]
}

fn on_portal(host: &str, source_host: &str) -> bool {
    host == source_host
        || host
            .strip_suffix(source_host)
            .is_some_and(|prefix| prefix.ends_with('.'))
}

/// Classifies every outlink of every post.
///
/// Order of checks: exact post URL, then the longest blog root that prefixes
/// the link (at a path boundary), then the portal host.
pub fn resolve_links(dataset: &Dataset) -> LinkResolution {
    let mut post_by_url = HashMap::new();
    for (idx, post) in dataset.posts().iter().enumerate() {
        if let Some(norm) = post.url.as_deref().and_then(normalize_url) {
            post_by_url.entry(norm).or_insert(idx);
        }
    }
    let mut roots_by_host: HashMap<String, Vec<(String, usize)>> = HashMap::new();
    for (idx, blogger) in dataset.bloggers().iter().enumerate() {
        if let Some(norm) = blogger.blog_base_url.as_deref().and_then(normalize_url) {
            roots_by_host
                .entry(host_of(&norm).to_string())
                .or_default()
                .push((norm, idx));
        }
    }

    let classify = |raw: &str| -> LinkClass {
        let Some(norm) = normalize_url(raw) else {
            return LinkClass::External { unparseable: true };
        };
        if let Some(&post) = post_by_url.get(&norm) {
            return LinkClass::PostMatched {
                post,
                author: dataset.post_author(post),
            };
        }
        let host = host_of(&norm);
        let author = roots_by_host.get(host).and_then(|roots| {
            roots
                .iter()
                .filter(|(root, _)| {
                    norm.strip_prefix(root.as_str())
                        .is_some_and(|rest| rest.is_empty() || rest.starts_with(['/', '?']))
                })
                .max_by_key(|(root, _)| root.len())
                .map(|&(_, idx)| idx)
        });
        match author {
            Some(blogger) => LinkClass::AuthorMatched { blogger },
            None if on_portal(host, dataset.source_host()) => LinkClass::InternalUnmatched,
            None => LinkClass::External { unparseable: false },
        }
    };

    let per_post = dataset
        .posts()
        .iter()
        .map(|p| p.outlink_urls.iter().map(|u| classify(u)).collect())
        .collect();
    LinkResolution { per_post }
}
