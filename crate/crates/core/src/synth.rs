//! Seeded synthetic blogosphere generator.
//!
//! Bloggers get a heavy-tailed (Pareto) posting activity, posts receive a
//! Poisson number of comments scaled by the author's popularity, and a share
//! of posts link to earlier posts, blog pages, stale portal pages or external
//! sites. Planted influencers draw proportionally more comments and inbound
//! links. Output is fully determined by the configuration, seed included.

use chrono::{DateTime, Duration, Months, TimeZone, Utc};
use rand::distr::weighted::WeightedIndex;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp, LogNormal, Pareto, Poisson};
use serde::{Deserialize, Serialize};

use crate::dataset::{Blogger, Comment, Dataset, Post};
use crate::ConfigError;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PlantedInfluencer {
    pub blogger: usize,
    pub multiplier: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SynthConfig {
    pub seed: u64,
    pub start_year: i32,
    pub start_month: u32,
    pub months: u32,
    pub bloggers: usize,
    pub source_host: String,
    /// Size of the pool of commenters who never post, per blogger.
    pub commenters_per_blogger: f64,
    /// Tail index of the Pareto posting-activity distribution.
    pub activity_exponent: f64,
    /// Mean posts per blogger per month, before activity weighting.
    pub posts_per_blogger_per_month: f64,
    /// Mean comments per post for a blogger of popularity 1.
    pub comment_rate: f64,
    /// Share of comments written by the post's author.
    pub self_comment_fraction: f64,
    /// Among the other comments, the share written by bloggers.
    pub blogger_comment_fraction: f64,
    pub links_per_post: f64,
    pub internal_link_fraction: f64,
    /// Among internal links, the share pointing at the author's own blog.
    pub self_link_fraction: f64,
    pub planted_influencers: Vec<PlantedInfluencer>,
}

impl Default for SynthConfig {
    fn default() -> Self {
        Self {
            seed: 1,
            start_year: 2008,
            start_month: 1,
            months: 12,
            bloggers: 200,
            source_host: "blogs.example".into(),
            commenters_per_blogger: 2.0,
            activity_exponent: 2.0,
            posts_per_blogger_per_month: 5.0,
            comment_rate: 8.0,
            self_comment_fraction: 0.3,
            blogger_comment_fraction: 0.6,
            links_per_post: 1.5,
            internal_link_fraction: 0.2,
            self_link_fraction: 0.5,
            planted_influencers: Vec::new(),
        }
    }
}

impl SynthConfig {
    pub fn validate(&self) -> Result<(), ConfigError> {
        for (field, v) in [
            ("self_comment_fraction", self.self_comment_fraction),
            ("blogger_comment_fraction", self.blogger_comment_fraction),
            ("internal_link_fraction", self.internal_link_fraction),
            ("self_link_fraction", self.self_link_fraction),
        ] {
            if !(0.0..=1.0).contains(&v) {
                return Err(ConfigError::new(field, "must lie in [0, 1]"));
            }
        }
        for (field, v) in [
            ("commenters_per_blogger", self.commenters_per_blogger),
            (
                "posts_per_blogger_per_month",
                self.posts_per_blogger_per_month,
            ),
            ("comment_rate", self.comment_rate),
            ("links_per_post", self.links_per_post),
        ] {
            if !(v.is_finite() && v >= 0.0) {
                return Err(ConfigError::new(field, "must be a nonnegative number"));
            }
        }
        if !(self.activity_exponent.is_finite() && self.activity_exponent > 0.0) {
            return Err(ConfigError::new("activity_exponent", "must be positive"));
        }
        if self.months == 0 {
            return Err(ConfigError::new("months", "must be at least 1"));
        }
        if self.bloggers < 2 {
            return Err(ConfigError::new("bloggers", "must be at least 2"));
        }
        if !(1..=12).contains(&self.start_month) {
            return Err(ConfigError::new("start_month", "must lie in 1..=12"));
        }
        if self.source_host.is_empty() || self.source_host.contains(['/', ':', ' ']) {
            return Err(ConfigError::new("source_host", "must be a bare host name"));
        }
        for p in &self.planted_influencers {
            if p.blogger >= self.bloggers {
                return Err(ConfigError::new(
                    "planted_influencers",
                    "blogger index out of range",
                ));
            }
            if !(p.multiplier.is_finite() && p.multiplier > 0.0) {
                return Err(ConfigError::new(
                    "planted_influencers",
                    "multiplier must be positive",
                ));
            }
        }
        Ok(())
    }

    fn start(&self) -> DateTime<Utc> {
        Utc.with_ymd_and_hms(self.start_year, self.start_month, 1, 0, 0, 0)
            .single()
            .expect("validated start month")
    }
}

pub fn blogger_id(index: usize) -> String {
    format!("b{index:04}")
}

fn poisson(rng: &mut ChaCha8Rng, mean: f64) -> u64 {
    if mean <= 0.0 {
        return 0;
    }
    Poisson::new(mean).expect("positive mean").sample(rng) as u64
}

struct Generator<'c> {
    cfg: &'c SynthConfig,
    rng: ChaCha8Rng,
    activity: Vec<f64>,
    popularity: Vec<f64>,
    link_target: WeightedIndex<f64>,
    commenter: WeightedIndex<f64>,
    pool: usize,
    posts: Vec<Post>,
    posts_by_author: Vec<Vec<usize>>,
    comments: Vec<Comment>,
    external_pages: u64,
}

impl<'c> Generator<'c> {
    fn new(cfg: &'c SynthConfig) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
        let pareto = Pareto::new(1.0, cfg.activity_exponent).expect("validated exponent");
        let mut activity: Vec<f64> = (0..cfg.bloggers).map(|_| pareto.sample(&mut rng)).collect();
        let mean = activity.iter().sum::<f64>() / activity.len() as f64;
        activity.iter_mut().for_each(|a| *a /= mean);

        let spread = LogNormal::new(0.0, 0.5).expect("valid lognormal");
        let mut popularity: Vec<f64> = (0..cfg.bloggers).map(|_| spread.sample(&mut rng)).collect();
        for p in &cfg.planted_influencers {
            popularity[p.blogger] = p.multiplier;
            activity[p.blogger] = activity[p.blogger].max(1.0);
        }

        let link_weights: Vec<f64> = activity
            .iter()
            .zip(&popularity)
            .map(|(a, p)| a * p)
            .collect();
        Self {
            cfg,
            rng,
            link_target: WeightedIndex::new(&link_weights).expect("positive weights"),
            commenter: WeightedIndex::new(&activity).expect("positive weights"),
            activity,
            popularity,
            pool: ((cfg.bloggers as f64 * cfg.commenters_per_blogger).round() as usize).max(1),
            posts: Vec::new(),
            posts_by_author: vec![Vec::new(); cfg.bloggers],
            comments: Vec::new(),
            external_pages: 0,
        }
    }

    fn blog_root(&self, blogger: usize) -> String {
        format!("http://{}.{}", blogger_id(blogger), self.cfg.source_host)
    }

    fn other_blogger(&mut self, not: usize, as_link_target: bool) -> usize {
        let dist = if as_link_target {
            &self.link_target
        } else {
            &self.commenter
        };
        loop {
            let b = dist.sample(&mut self.rng);
            if b != not {
                return b;
            }
        }
    }

    fn run(mut self) -> Dataset {
        let start = self.cfg.start();
        for month in 0..self.cfg.months {
            let from = start + Months::new(month);
            let to = from + Months::new(1);
            self.generate_month(from, to);
        }
        let bloggers = (0..self.cfg.bloggers)
            .map(|i| Blogger {
                id: blogger_id(i),
                display_name: format!("Blogger {i}"),
                blog_base_url: Some(self.blog_root(i)),
            })
            .collect();
        Dataset::new(
            self.cfg.source_host.clone(),
            bloggers,
            self.posts,
            self.comments,
        )
        .expect("generator emits consistent records")
    }

    fn generate_month(&mut self, from: DateTime<Utc>, to: DateTime<Utc>) {
        let seconds = (to - from).num_seconds();
        let mut planned: Vec<(i64, usize)> = Vec::new();
        for b in 0..self.cfg.bloggers {
            let n = poisson(
                &mut self.rng,
                self.cfg.posts_per_blogger_per_month * self.activity[b],
            );
            for _ in 0..n {
                planned.push((self.rng.random_range(0..seconds), b));
            }
        }
        planned.sort_unstable();
        for (offset, author) in planned {
            let at = from + Duration::seconds(offset);
            self.add_post(author, at);
        }
    }

    fn add_post(&mut self, author: usize, at: DateTime<Utc>) {
        let idx = self.posts.len();
        let id = format!("p{idx:07}");
        let url = format!("{}/{id}.html", self.blog_root(author));
        let outlinks = (0..poisson(&mut self.rng, self.cfg.links_per_post))
            .map(|_| self.outlink(author))
            .collect();
        self.posts.push(Post {
            id: id.clone(),
            author_id: blogger_id(author),
            url: Some(url),
            published_at: at,
            outlink_urls: outlinks,
        });
        self.posts_by_author[author].push(idx);
        self.add_comments(idx, author, at);
    }

    fn outlink(&mut self, author: usize) -> String {
        if !self.rng.random_bool(self.cfg.internal_link_fraction) {
            self.external_pages += 1;
            let site = self.rng.random_range(0..500);
            return format!(
                "http://site{site}.example.org/article/{}",
                self.external_pages
            );
        }
        let target = if self.rng.random_bool(self.cfg.self_link_fraction) {
            author
        } else {
            self.other_blogger(author, true)
        };
        let kind: f64 = self.rng.random();
        if kind < 0.6 {
            // Recent posts of the target, so most links stay inside a month.
            let recent = &self.posts_by_author[target];
            if !recent.is_empty() {
                let window = recent.len().min(5);
                let pick = recent[recent.len() - 1 - self.rng.random_range(0..window)];
                return self.posts[pick]
                    .url
                    .clone()
                    .expect("generated posts have urls");
            }
        }
        if kind < 0.85 {
            return format!("{}/about", self.blog_root(target));
        }
        let page = self.rng.random_range(0..100_000);
        format!("http://www.{}/archive/{page}", self.cfg.source_host)
    }

    fn add_comments(&mut self, post: usize, author: usize, at: DateTime<Utc>) {
        let n = poisson(
            &mut self.rng,
            self.cfg.comment_rate * self.popularity[author],
        );
        let delay = Exp::new(1.0 / 86_400.0).expect("positive rate");
        let mut offsets: Vec<i64> = (0..n).map(|_| delay.sample(&mut self.rng) as i64).collect();
        offsets.sort_unstable();
        let first = self.comments.len();
        for (k, offset) in offsets.into_iter().enumerate() {
            let commenter = if self.rng.random_bool(self.cfg.self_comment_fraction) {
                blogger_id(author)
            } else if self.rng.random_bool(self.cfg.blogger_comment_fraction) {
                blogger_id(self.other_blogger(author, false))
            } else {
                format!("u{:05}", self.rng.random_range(0..self.pool))
            };
            let parent = (k > 0 && self.rng.random_bool(0.3)).then(|| {
                self.comments[first + self.rng.random_range(0..k)]
                    .id
                    .clone()
            });
            let id = format!("c{:08}", self.comments.len());
            self.comments.push(Comment {
                id,
                post_id: self.posts[post].id.clone(),
                author_id: commenter,
                created_at: at + Duration::seconds(offset),
                parent_comment_id: parent,
            });
        }
    }
}

/// Generates a dataset; identical configurations give identical datasets.
pub fn synth_generate(cfg: &SynthConfig) -> Result<Dataset, ConfigError> {
    cfg.validate()?;
    Ok(Generator::new(cfg).run())
}
