//! Line-oriented dataset files.
//!
//! A dataset directory holds three JSON Lines files (one JSON object per
//! line, UTF-8) plus an optional `meta.json`:
//!
//! | file             | fields                                                        |
//! |------------------|---------------------------------------------------------------|
//! | `bloggers.jsonl` | `id`, `display_name`, `blog_base_url`?                        |
//! | `posts.jsonl`    | `id`, `author_id`, `url`?, `published_at`, `outlink_urls`     |
//! | `comments.jsonl` | `id`, `post_id`, `author_id`, `created_at`, `parent_comment_id`? |
//!
//! Timestamps are RFC 3339 strings with an explicit offset (`Z` or `±hh:mm`).

use std::fs::{self, File};
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use super::{Blogger, Comment, Dataset, DatasetError, Post, ValidationOptions};

pub const BLOGGERS_FILE: &str = "bloggers.jsonl";
pub const POSTS_FILE: &str = "posts.jsonl";
pub const COMMENTS_FILE: &str = "comments.jsonl";
pub const META_FILE: &str = "meta.json";

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DatasetPaths {
    pub bloggers: PathBuf,
    pub posts: PathBuf,
    pub comments: PathBuf,
}

impl DatasetPaths {
    pub fn in_dir(dir: impl AsRef<Path>) -> Self {
        let dir = dir.as_ref();
        Self {
            bloggers: dir.join(BLOGGERS_FILE),
            posts: dir.join(POSTS_FILE),
            comments: dir.join(COMMENTS_FILE),
        }
    }
}

/// Dataset-wide settings stored next to the record files.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DatasetMeta {
    pub source_host: String,
}

impl DatasetMeta {
    pub fn read(dir: impl AsRef<Path>) -> Result<Option<Self>, DatasetError> {
        let path = dir.as_ref().join(META_FILE);
        if !path.exists() {
            return Ok(None);
        }
        let text = fs::read_to_string(&path).map_err(|source| DatasetError::Io {
            path: path.clone(),
            source,
        })?;
        serde_json::from_str(&text)
            .map(Some)
            .map_err(|e| DatasetError::Malformed {
                path,
                line: e.line(),
                message: e.to_string(),
            })
    }
}

pub fn parse_dataset(paths: &DatasetPaths, source_host: &str) -> Result<Dataset, DatasetError> {
    parse_dataset_with(paths, source_host, ValidationOptions::default())
}

pub fn parse_dataset_with(
    paths: &DatasetPaths,
    source_host: &str,
    options: ValidationOptions,
) -> Result<Dataset, DatasetError> {
    let bloggers: Vec<Blogger> = read_records(&paths.bloggers)?;
    let posts: Vec<Post> = read_records(&paths.posts)?;
    let comments: Vec<Comment> = read_records(&paths.comments)?;
    Dataset::with_options(source_host, bloggers, posts, comments, options)
}

fn read_records<T: DeserializeOwned>(path: &Path) -> Result<Vec<T>, DatasetError> {
    let file = File::open(path).map_err(|source| DatasetError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    let mut out = Vec::new();
    for (n, line) in BufReader::new(file).lines().enumerate() {
        let line = line.map_err(|source| DatasetError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        if line.trim().is_empty() {
            continue;
        }
        let record = serde_json::from_str(&line).map_err(|e| DatasetError::Malformed {
            path: path.to_path_buf(),
            line: n + 1,
            message: e.to_string(),
        })?;
        out.push(record);
    }
    Ok(out)
}

/// Writes `dataset` into `dir` in the format read by [`parse_dataset`].
pub fn write_dataset(dataset: &Dataset, dir: impl AsRef<Path>) -> std::io::Result<DatasetPaths> {
    let dir = dir.as_ref();
    fs::create_dir_all(dir)?;
    let paths = DatasetPaths::in_dir(dir);
    write_records(&paths.bloggers, dataset.bloggers())?;
    write_records(&paths.posts, dataset.posts())?;
    write_records(&paths.comments, dataset.comments())?;
    let meta = DatasetMeta {
        source_host: dataset.source_host().to_string(),
    };
    fs::write(
        dir.join(META_FILE),
        serde_json::to_string_pretty(&meta)? + "\n",
    )?;
    Ok(paths)
}

fn write_records<T: Serialize>(path: &Path, records: &[T]) -> std::io::Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    for r in records {
        serde_json::to_writer(&mut w, r)?;
        w.write_all(b"\n")?;
    }
    w.flush()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn write(dir: &Path, bloggers: &str, posts: &str, comments: &str) -> DatasetPaths {
        let paths = DatasetPaths::in_dir(dir);
        fs::write(&paths.bloggers, bloggers).unwrap();
        fs::write(&paths.posts, posts).unwrap();
        fs::write(&paths.comments, comments).unwrap();
        paths
    }

    const BLOGGERS: &str = concat!(
        r#"{"id":"a","display_name":"Alice","blog_base_url":"http://alice.salon24.pl"}"#,
        "\n",
        r#"{"id":"b","display_name":"Bob"}"#,
        "\n"
    );
    const POSTS: &str = concat!(
        r#"{"id":"p1","author_id":"a","url":"http://alice.salon24.pl/1.html","published_at":"2008-01-02T10:00:00Z","outlink_urls":["http://bob.salon24.pl/"]}"#,
        "\n\n",
        r#"{"id":"p2","author_id":"b","published_at":"2008-01-03T10:00:00+02:00"}"#,
        "\n"
    );

    #[test]
    fn parses_minimal_dataset() {
        let dir = tempfile::tempdir().unwrap();
        let comments = concat!(
            r#"{"id":"c1","post_id":"p1","author_id":"b","created_at":"2008-01-02T11:00:00Z"}"#,
            "\n",
            r#"{"id":"c2","post_id":"p1","author_id":"anon","created_at":"2008-01-02T12:00:00Z","parent_comment_id":"c1"}"#,
            "\n",
            r#"{"id":"c3","post_id":"p2","author_id":"a","created_at":"2008-01-04T00:00:00Z"}"#,
        );
        let paths = write(dir.path(), BLOGGERS, POSTS, comments);
        let ds = parse_dataset(&paths, "salon24.pl").unwrap();
        assert_eq!(ds.bloggers().len(), 2);
        assert_eq!(ds.posts().len(), 2);
        assert_eq!(ds.comments().len(), 3);
        assert_eq!(
            ds.posts()[1].published_at.to_rfc3339(),
            "2008-01-03T08:00:00+00:00"
        );
    }

    #[test]
    fn malformed_line_is_reported_with_line_number() {
        let dir = tempfile::tempdir().unwrap();
        let comments = concat!(
            r#"{"id":"c1","post_id":"p1","author_id":"b","created_at":"2008-01-02T11:00:00Z"}"#,
            "\n",
            r#"{"id":"c2","post_id":"p1""#,
            "\n"
        );
        let paths = write(dir.path(), BLOGGERS, POSTS, comments);
        match parse_dataset(&paths, "salon24.pl").unwrap_err() {
            DatasetError::Malformed { line, path, .. } => {
                assert_eq!(line, 2);
                assert!(path.ends_with(COMMENTS_FILE));
            }
            other => panic!("unexpected {other}"),
        }
    }

    #[test]
    fn timestamp_without_offset_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let comments =
            r#"{"id":"c1","post_id":"p1","author_id":"b","created_at":"2008-01-02T11:00:00"}"#;
        let paths = write(dir.path(), BLOGGERS, POSTS, comments);
        assert!(matches!(
            parse_dataset(&paths, "salon24.pl"),
            Err(DatasetError::Malformed { line: 1, .. })
        ));
    }

    #[test]
    fn missing_file_is_io_error() {
        let dir = tempfile::tempdir().unwrap();
        let paths = DatasetPaths::in_dir(dir.path());
        assert!(matches!(
            parse_dataset(&paths, "salon24.pl"),
            Err(DatasetError::Io { .. })
        ));
    }

    #[test]
    fn write_then_parse_preserves_records() {
        let dir = tempfile::tempdir().unwrap();
        let paths = write(dir.path(), BLOGGERS, POSTS, "");
        let ds = parse_dataset(&paths, "salon24.pl").unwrap();
        let out = tempfile::tempdir().unwrap();
        let written = write_dataset(&ds, out.path()).unwrap();
        let meta = DatasetMeta::read(out.path()).unwrap().unwrap();
        let again = parse_dataset(&written, &meta.source_host).unwrap();
        assert_eq!(ds.posts(), again.posts());
        assert_eq!(ds.bloggers(), again.bloggers());
    }
}
