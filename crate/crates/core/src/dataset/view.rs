use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use super::{Comment, Dataset, Post, TimeSlot};

/// Which comments count towards a slot.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CommentAttribution {
    /// Comment and its post must both fall inside the slot.
    #[default]
    SlotLocal,
    /// Every comment on a slot's post counts, whenever it was written.
    PostSlot,
}

/// The part of a dataset that falls inside one time slot.
///
/// Posts keep dataset order; bloggers are sorted by id. Local indices
/// (`0..posts().len()`, `0..bloggers().len()`) are what graphs and influence
/// vectors are indexed by.
#[derive(Debug, Clone)]
pub struct SlotView<'a> {
    dataset: &'a Dataset,
    slot: TimeSlot,
    posts: Vec<usize>,
    comments: Vec<usize>,
    bloggers: Vec<usize>,
    post_local: HashMap<usize, usize>,
    blogger_local: HashMap<usize, usize>,
    comments_by_post: Vec<Vec<usize>>,
}

pub fn slot_view<'a>(dataset: &'a Dataset, slot: TimeSlot) -> SlotView<'a> {
    slot_view_with(dataset, slot, CommentAttribution::SlotLocal)
}

pub fn slot_view_with<'a>(
    dataset: &'a Dataset,
    slot: TimeSlot,
    attribution: CommentAttribution,
) -> SlotView<'a> {
    let posts: Vec<usize> = dataset
        .posts()
        .iter()
        .enumerate()
        .filter(|(_, p)| slot.contains(p.published_at))
        .map(|(i, _)| i)
        .collect();
    let post_local: HashMap<usize, usize> =
        posts.iter().enumerate().map(|(l, &g)| (g, l)).collect();

    let mut comments = Vec::new();
    let mut comments_by_post = vec![Vec::new(); posts.len()];
    for (idx, c) in dataset.comments().iter().enumerate() {
        let Some(&local) = post_local.get(&dataset.comment_post(idx)) else {
            continue;
        };
        let counted = match attribution {
            CommentAttribution::SlotLocal => slot.contains(c.created_at),
            CommentAttribution::PostSlot => true,
        };
        if counted {
            comments.push(idx);
            comments_by_post[local].push(idx);
        }
    }

    let mut bloggers: Vec<usize> = posts.iter().map(|&p| dataset.post_author(p)).collect();
    bloggers.sort_by(|&a, &b| dataset.bloggers()[a].id.cmp(&dataset.bloggers()[b].id));
    bloggers.dedup();
    let blogger_local = bloggers.iter().enumerate().map(|(l, &g)| (g, l)).collect();

    SlotView {
        dataset,
        slot,
        posts,
        comments,
        bloggers,
        post_local,
        blogger_local,
        comments_by_post,
    }
}

impl<'a> SlotView<'a> {
    pub fn dataset(&self) -> &'a Dataset {
        self.dataset
    }

    pub fn slot(&self) -> &TimeSlot {
        &self.slot
    }

    /// Dataset indices of the posts in the slot.
    pub fn posts(&self) -> &[usize] {
        &self.posts
    }

    /// Dataset indices of the comments counted in the slot.
    pub fn comments(&self) -> &[usize] {
        &self.comments
    }

    /// Dataset indices of the slot's bloggers, ordered by id.
    pub fn bloggers(&self) -> &[usize] {
        &self.bloggers
    }

    pub fn post(&self, local: usize) -> &'a Post {
        &self.dataset.posts()[self.posts[local]]
    }

    pub fn blogger_id(&self, local: usize) -> &'a str {
        &self.dataset.bloggers()[self.bloggers[local]].id
    }

    pub fn local_post(&self, dataset_post: usize) -> Option<usize> {
        self.post_local.get(&dataset_post).copied()
    }

    pub fn local_blogger(&self, dataset_blogger: usize) -> Option<usize> {
        self.blogger_local.get(&dataset_blogger).copied()
    }

    /// Local blogger index of the author of local post `local`.
    pub fn post_author_local(&self, local: usize) -> usize {
        self.blogger_local[&self.dataset.post_author(self.posts[local])]
    }

    /// Dataset indices of the view's comments on local post `local`.
    pub fn comments_on(&self, local: usize) -> &[usize] {
        &self.comments_by_post[local]
    }

    pub fn comment(&self, dataset_comment: usize) -> &'a Comment {
        &self.dataset.comments()[dataset_comment]
    }

    pub fn is_empty(&self) -> bool {
        self.posts.is_empty()
    }
}
