use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_compdna"))
}

fn repo() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../..")
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn write_config(dir: &Path, body: &str) -> PathBuf {
    let p = dir.join("config.json");
    fs::write(&p, body).unwrap();
    p
}

#[test]
fn codes_lists_the_manifest() {
    let o = run(&["codes"]);
    assert!(o.status.success());
    let text = stdout(&o);
    let rows: Vec<Vec<&str>> = text.lines().skip(1).map(|l| l.split_whitespace().collect()).collect();
    let dims: Vec<(&str, &str, &str, &str)> = rows.iter().map(|r| (r[0], r[1], r[2], r[3])).collect();
    assert_eq!(
        dims,
        vec![
            ("nr5g_bg1_z12", "264", "816", "0.3235"),
            ("wran_r05", "240", "480", "0.5000"),
            ("wifi_r075", "486", "648", "0.7500"),
        ]
    );
}

#[test]
fn validate_passes_on_shipped_codes() {
    let o = run(&["validate"]);
    let text = stdout(&o);
    assert!(o.status.success(), "{text}");
    let passes = text.lines().filter(|l| l.starts_with("PASS ")).count();
    assert!(passes >= 5, "{text}");
    assert!(!text.contains("FAIL"));
}

#[test]
fn validate_catches_a_flipped_edge() {
    let dir = tempfile::tempdir().unwrap();
    let src = repo().join("crates/core/data/codes");
    for entry in fs::read_dir(&src).unwrap() {
        let entry = entry.unwrap();
        fs::copy(entry.path(), dir.path().join(entry.file_name())).unwrap();
    }
    let alist = dir.path().join("wran_802_22_r12_n480.alist");
    let text = fs::read_to_string(&alist).unwrap();
    let mut lines: Vec<String> = text.lines().map(str::to_owned).collect();
    // last line is the final row list; move its first edge to another column
    let last = lines.len() - 1;
    let mut entries: Vec<usize> = lines[last].split_whitespace().map(|t| t.parse().unwrap()).collect();
    let fresh = (1..=480).find(|c| !entries.contains(c)).unwrap();
    entries[0] = fresh;
    lines[last] = entries.iter().map(ToString::to_string).collect::<Vec<_>>().join(" ");
    fs::write(&alist, lines.join("\n") + "\n").unwrap();

    let manifest = dir.path().join("manifest.json");
    let o = run(&["validate", "--codes", manifest.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    let out = stdout(&o);
    assert!(
        out.lines().any(|l| l.starts_with("FAIL codes_generator_parity")),
        "{out}"
    );
}

#[test]
fn recipe_produces_one_row_per_n() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("out.csv");
    let recipe = repo().join("experiments/sampling_l3_wran.json");
    let o = run(&[
        "simulate",
        "--config",
        recipe.to_str().unwrap(),
        "--out",
        out.to_str().unwrap(),
        "--max-trials",
        "20",
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let csv = fs::read_to_string(&out).unwrap();
    let mut lines = csv.lines();
    assert_eq!(
        lines.next().unwrap(),
        "n,trials,block_errors,bler,ci_low,ci_high,ber,erasures,mean_iters"
    );
    let ns: Vec<&str> = lines.map(|l| l.split(',').next().unwrap()).collect();
    assert_eq!(ns, (1..=10).map(|n| n.to_string()).collect::<Vec<_>>());
}

#[test]
fn seed_override_is_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        r#"{"code":"wran_r05","L":3,"channel":{"kind":"substitution","epsilon":0.1},"n_values":[3,4],"max_trials":150,"target_error_events":0,"seed":42}"#,
    );
    let sim = |seed: Option<&str>, name: &str, workers: &str| {
        let out = dir.path().join(name);
        let mut args = vec![
            "simulate",
            "--config",
            cfg.to_str().unwrap(),
            "--out",
            out.to_str().unwrap(),
            "--workers",
            workers,
        ];
        if let Some(s) = seed {
            args.extend(["--seed", s]);
        }
        let o = run(&args);
        assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
        fs::read(&out).unwrap()
    };
    let base = sim(None, "a.csv", "1");
    let seven = sim(Some("7"), "b.csv", "1");
    assert_ne!(base, seven);
    assert_eq!(seven, sim(Some("7"), "c.csv", "2"));
    assert_eq!(base, sim(Some("42"), "d.csv", "3"));
}

#[test]
fn llr_dump_has_one_row_per_bit() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        r#"{"code":"wran_r05","L":3,"channel":{"kind":"sampling"},"n_values":[2,5],"max_trials":2}"#,
    );
    let dump = dir.path().join("llr.csv");
    let o = run(&[
        "simulate",
        "--config",
        cfg.to_str().unwrap(),
        "--out",
        dir.path().join("o.csv").to_str().unwrap(),
        "--dump-llrs",
        dump.to_str().unwrap(),
    ]);
    assert!(o.status.success());
    let text = fs::read_to_string(dump).unwrap();
    assert_eq!(text.lines().count(), 1 + 2 * 480);
    assert!(text.lines().nth(1).unwrap().starts_with("2,0,0,0,"));
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let good = write_config(
        dir.path(),
        r#"{"code":"wran_r05","L":3,"channel":{"kind":"sampling"},"n_values":[3],"max_trials":2}"#,
    );

    // unwritable output
    let o = run(&[
        "simulate",
        "--config",
        good.to_str().unwrap(),
        "--out",
        "/nonexistent-dir/x.csv",
    ]);
    assert_eq!(o.status.code(), Some(2));

    // missing config file
    let o = run(&["simulate", "--config", "/nonexistent-dir/c.json", "--out", "x.csv"]);
    assert_eq!(o.status.code(), Some(2));

    // semantic config error cites both values
    let bad = dir.path().join("bad.json");
    fs::write(
        &bad,
        r#"{"code":"wran_r05","L":7,"channel":{"kind":"sampling"},"n_values":[3]}"#,
    )
    .unwrap();
    let out = dir.path().join("o.csv");
    let o = run(&[
        "simulate",
        "--config",
        bad.to_str().unwrap(),
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(1));
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.contains("480") && err.contains("L = 7"), "{err}");

    // unknown flag and missing subcommand
    assert_eq!(run(&["codes", "--bogus"]).status.code(), Some(1));
    assert_eq!(run(&[]).status.code(), Some(1));
    assert!(run(&["--help"]).status.success());
}
