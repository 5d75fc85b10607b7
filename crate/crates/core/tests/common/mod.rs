#![allow(dead_code)]

use blogrank_core::dataset::{Blogger, Comment, Dataset, Post};
use chrono::{DateTime, TimeZone, Utc};
use rand::seq::IndexedRandom;
use rand::Rng;

pub const HOST: &str = "salon24.pl";

pub fn ts(y: i32, m: u32, d: u32) -> DateTime<Utc> {
    Utc.with_ymd_and_hms(y, m, d, 12, 0, 0).unwrap()
}

pub fn blogger(id: &str) -> Blogger {
    Blogger {
        id: id.into(),
        display_name: id.to_uppercase(),
        blog_base_url: Some(format!("http://{id}.{HOST}")),
    }
}

pub fn post_url(author: &str, id: &str) -> String {
    format!("http://{author}.{HOST}/{id}.html")
}

pub fn post(id: &str, author: &str, at: DateTime<Utc>, links: &[String]) -> Post {
    Post {
        id: id.into(),
        author_id: author.into(),
        url: Some(post_url(author, id)),
        published_at: at,
        outlink_urls: links.to_vec(),
    }
}

pub fn comment(id: &str, post: &str, author: &str, at: DateTime<Utc>) -> Comment {
    Comment {
        id: id.into(),
        post_id: post.into(),
        author_id: author.into(),
        created_at: at,
        parent_comment_id: None,
    }
}

/// A random one-month dataset: `n` bloggers, a few posts each, links of every
/// kind and comments from bloggers, the authors themselves and outsiders.
pub fn random_dataset(rng: &mut impl Rng, n: usize, with_self_comments: bool) -> Dataset {
    let ids: Vec<String> = (0..n).map(|i| format!("b{i}")).collect();
    let bloggers = ids.iter().map(|id| blogger(id)).collect();
    let mut posts: Vec<Post> = Vec::new();
    for (b, author) in ids.iter().enumerate() {
        for j in 0..rng.random_range(1..=4) {
            let id = format!("p{b}_{j}");
            let day = rng.random_range(1..=28);
            let mut links = Vec::new();
            for _ in 0..rng.random_range(0..=3) {
                links.push(match rng.random_range(0..5) {
                    0 => "http://example.com/page".to_string(),
                    1 => format!("http://{}.{HOST}/about", ids.choose(rng).unwrap()),
                    2 => format!("http://www.{HOST}/old/{}", rng.random_range(0..100)),
                    _ if !posts.is_empty() => posts.choose(rng).unwrap().url.clone().unwrap(),
                    _ => "not a url".to_string(),
                });
            }
            posts.push(post(&id, author, ts(2010, 3, day), &links));
        }
    }
    let mut comments = Vec::new();
    for p in &posts {
        for _ in 0..rng.random_range(0..=6) {
            let author = match rng.random_range(0..4) {
                0 if with_self_comments => p.author_id.clone(),
                1 => format!("anon{}", rng.random_range(0..5)),
                _ => ids.choose(rng).unwrap().clone(),
            };
            let id = format!("c{}", comments.len());
            comments.push(comment(&id, &p.id, &author, p.published_at));
        }
    }
    Dataset::new(HOST, bloggers, posts, comments).expect("random dataset is valid")
}
