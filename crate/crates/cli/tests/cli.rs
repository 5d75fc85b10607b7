use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn blogrank(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_blogrank"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn ok(args: &[&str]) -> String {
    let out = blogrank(args);
    assert!(
        out.status.success(),
        "{args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout).unwrap()
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

fn synth(dir: &Path) {
    ok(&[
        "synth",
        "--output",
        p(dir),
        "--seed",
        "5",
        "--months",
        "3",
        "--bloggers",
        "40",
    ]);
}

#[test]
fn every_subcommand_has_help() {
    for sub in ["synth", "rank", "compare", "stats", "validate"] {
        let text = ok(&[sub, "--help"]);
        assert!(text.contains("Usage"), "{sub}");
    }
}

#[test]
fn full_pipeline_writes_reports() {
    let dir = tempfile::tempdir().unwrap();
    let (data, out) = (dir.path().join("data"), dir.path().join("out"));
    synth(&data);
    assert!(ok(&["validate", "--input", p(&data)]).starts_with("ok:"));
    for method in ["ifinder", "pinf"] {
        ok(&[
            "rank",
            "--input",
            p(&data),
            "--output",
            p(&out),
            "--method",
            method,
            "--workers",
            "2",
        ]);
    }
    let rankings = fs::read_to_string(out.join("rankings_pinf.tsv")).unwrap();
    assert!(rankings.starts_with("# slots=0,1,2\nslot\trank\tblogger_id\tscore\n"));

    let manifest: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(out.join("manifest_pinf.json")).unwrap()).unwrap();
    let slots = manifest["slots"].as_array().unwrap();
    assert_eq!(slots.len(), 3);
    assert!(slots.iter().all(|s| s["converged"] == true));
    assert!(slots
        .iter()
        .all(|s| s["ifinder_dim"].as_u64() > s["pinf_dim"].as_u64()));

    let cmp = dir.path().join("cmp");
    ok(&["compare", "--input", p(&out), "--output", p(&cmp)]);
    for f in [
        "comparison_summary.tsv",
        "comparison_series.tsv",
        "frequency_a.tsv",
        "frequency_b.tsv",
    ] {
        assert!(cmp.join(f).exists(), "{f}");
    }

    let stats = dir.path().join("stats");
    ok(&[
        "stats",
        "--input",
        p(&data),
        "--output",
        p(&stats),
        "--k",
        "5",
    ]);
    let funnel = fs::read_to_string(stats.join("link_funnel.tsv")).unwrap();
    assert!(funnel.starts_with("stage\tcount"));
    assert_eq!(
        fs::read_to_string(stats.join("self_links.tsv"))
            .unwrap()
            .lines()
            .count(),
        6
    );
}

#[test]
fn identical_rankings_compare_as_identical() {
    let dir = tempfile::tempdir().unwrap();
    let (data, out) = (dir.path().join("data"), dir.path().join("out"));
    synth(&data);
    ok(&[
        "rank",
        "--input",
        p(&data),
        "--output",
        p(&out),
        "--method",
        "pinf",
        "--k",
        "10",
    ]);
    let r = out.join("rankings_pinf.tsv");
    let cmp = dir.path().join("cmp");
    ok(&[
        "compare",
        "--a",
        p(&r),
        "--b",
        p(&r),
        "--output",
        p(&cmp),
        "--k",
        "10",
    ]);
    let summary = fs::read_to_string(cmp.join("comparison_summary.tsv")).unwrap();
    let value = |key: &str| -> f64 {
        summary
            .lines()
            .find_map(|l| l.strip_prefix(&format!("{key}\t")))
            .unwrap()
            .parse()
            .unwrap()
    };
    assert_eq!(value("overlap"), 10.0);
    assert_eq!(value("average_overlap"), 1.0);
    assert!((value("rank_biased_overlap") - (1.0 - 0.85_f64.powi(10))).abs() < 1e-12);
}

#[test]
fn pinf_ranks_a_two_blogger_dataset() {
    // p1 gets one response (penalty, -0.1) and p2 the maximum of four (1.0);
    // b1 comments only on b2 and b2 on nobody, so with w = 0.5 the fixed
    // point is i = (0.28, 1.52).
    let dir = tempfile::tempdir().unwrap();
    let data = dir.path().join("data");
    fs::create_dir(&data).unwrap();
    fs::write(
        data.join("bloggers.jsonl"),
        "{\"id\":\"b1\",\"display_name\":\"B1\"}\n{\"id\":\"b2\",\"display_name\":\"B2\"}\n",
    )
    .unwrap();
    fs::write(
        data.join("posts.jsonl"),
        "{\"id\":\"p1\",\"author_id\":\"b1\",\"published_at\":\"2010-03-01T10:00:00Z\"}\n\
         {\"id\":\"p2\",\"author_id\":\"b2\",\"published_at\":\"2010-03-02T10:00:00Z\"}\n",
    )
    .unwrap();
    fs::write(
        data.join("comments.jsonl"),
        [("c1", "p1", "u1"), ("c2", "p2", "b1"), ("c3", "p2", "u1"), ("c4", "p2", "u2"), ("c5", "p2", "u3")]
            .iter()
            .map(|(id, post, author)| {
                format!(
                    "{{\"id\":\"{id}\",\"post_id\":\"{post}\",\"author_id\":\"{author}\",\"created_at\":\"2010-03-03T10:00:00Z\"}}\n"
                )
            })
            .collect::<String>(),
    )
    .unwrap();
    let out = dir.path().join("out");
    ok(&[
        "rank",
        "--input",
        p(&data),
        "--output",
        p(&out),
        "--source-host",
        "blogs.example",
        "--method",
        "pinf",
        "--w",
        "0.5",
        "--tau",
        "1e-20",
        "--slots-exclude-partial",
        "false",
    ]);
    let rows: Vec<(String, f64)> = fs::read_to_string(out.join("rankings_pinf.tsv"))
        .unwrap()
        .lines()
        .skip(2)
        .map(|l| {
            let f: Vec<&str> = l.split('\t').collect();
            (f[2].to_string(), f[3].parse().unwrap())
        })
        .collect();
    assert_eq!(rows.len(), 2);
    assert_eq!((rows[0].0.as_str(), rows[1].0.as_str()), ("b2", "b1"));
    assert!((rows[0].1 - 1.52).abs() < 1e-9);
    assert!((rows[1].1 - 0.28).abs() < 1e-9);
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let (data, out) = (dir.path().join("data"), dir.path().join("out"));

    let missing = blogrank(&["validate", "--input", p(&dir.path().join("nope"))]);
    assert_eq!(missing.status.code(), Some(1));

    synth(&data);
    let bad_w = blogrank(&[
        "rank",
        "--input",
        p(&data),
        "--output",
        p(&out),
        "--method",
        "pinf",
        "--w",
        "1.5",
    ]);
    assert_eq!(bad_w.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&bad_w.stderr).contains("`w`"));

    let bad_fraction = blogrank(&["synth", "--output", p(&out), "--self-comment-fraction", "2"]);
    assert_eq!(bad_fraction.status.code(), Some(2));

    let args = [
        "rank",
        "--input",
        p(&data),
        "--output",
        p(&out),
        "--method",
        "ifinder",
        "--max-iter",
        "1",
    ];
    assert_eq!(blogrank(&args).status.code(), Some(0));
    let strict = blogrank(&[&args[..], &["--strict"]].concat());
    assert_eq!(strict.status.code(), Some(3));
}

#[test]
fn synth_is_deterministic_and_accepts_a_config_file() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("cfg.json");
    fs::write(&cfg, "{\"seed\": 9, \"months\": 2, \"bloggers\": 15}").unwrap();
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    ok(&["synth", "--config", p(&cfg), "--output", p(&a)]);
    ok(&[
        "synth",
        "--config",
        p(&cfg),
        "--output",
        p(&b),
        "--seed",
        "9",
    ]);
    for f in [
        "bloggers.jsonl",
        "posts.jsonl",
        "comments.jsonl",
        "synth_config.json",
    ] {
        assert_eq!(
            fs::read(a.join(f)).unwrap(),
            fs::read(b.join(f)).unwrap(),
            "{f}"
        );
    }
}
