//! End-to-end runs of the `hydra` binary.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use hydra::dataio::{encode_idx_images, encode_idx_labels, RawImage};

fn hydra(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_hydra")).args(args).output().expect("binary runs")
}

fn ok(args: &[&str]) -> String {
    let out = hydra(args);
    assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout).unwrap()
}

struct Fixture {
    dir: tempfile::TempDir,
}

impl Fixture {
    /// Twelve images, label = image index mod 10.
    fn new() -> Self {
        let dir = tempfile::tempdir().unwrap();
        let labels: Vec<u8> = (0..12).map(|i| i % 10).collect();
        let images: Vec<RawImage> = labels
            .iter()
            .map(|&l| {
                let mut px = [0u8; 784];
                for (i, p) in px.iter_mut().enumerate() {
                    *p = ((i * 7 + l as usize * 31) % 256) as u8;
                }
                RawImage(px)
            })
            .collect();
        std::fs::write(dir.path().join("img"), encode_idx_images(&images)).unwrap();
        std::fs::write(dir.path().join("lbl"), encode_idx_labels(&labels)).unwrap();
        Self { dir }
    }

    fn path(&self, name: &str) -> String {
        self.dir.path().join(name).to_str().unwrap().to_owned()
    }

    fn data_args(&self) -> [String; 4] {
        ["--images".into(), self.path("img"), "--labels".into(), self.path("lbl")]
    }

    fn train(&self, out: &str) {
        let d = self.data_args();
        let mut args = vec!["train", "--epochs", "1", "--out"];
        let out = self.path(out);
        args.push(&out);
        args.extend(d.iter().map(String::as_str));
        ok(&args);
    }
}

fn read(p: impl AsRef<Path>) -> String {
    std::fs::read_to_string(p).unwrap()
}

#[test]
fn simulate_writes_versioned_csv() {
    let fx = Fixture::new();
    fx.train("p.json");
    let d = fx.data_args();
    let (p, out) = (fx.path("p.json"), fx.path("sim.csv"));
    let mut args = vec!["simulate", "--params", &p, "--out", &out];
    args.extend(d.iter().map(String::as_str));
    let stdout = ok(&args);
    let csv = read(&out);
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines[0], "# hydra simulate csv v1");
    assert_eq!(lines[1], "index,label,prediction,cycles");
    assert_eq!(lines.len(), 14);
    assert!(lines[2].starts_with("0,0,") && lines[2].ends_with(",470"));
    assert!(stdout.contains("cycles per inference: 470"));
}

#[test]
fn limit_zero_gives_header_only() {
    let fx = Fixture::new();
    fx.train("p.json");
    let d = fx.data_args();
    let (p, out) = (fx.path("p.json"), fx.path("sim.csv"));
    let mut args = vec!["simulate", "--params", &p, "--out", &out, "--limit", "0"];
    args.extend(d.iter().map(String::as_str));
    ok(&args);
    assert_eq!(read(&out), "# hydra simulate csv v1\nindex,label,prediction,cycles\n");
}

#[test]
fn missing_params_file_is_named() {
    let fx = Fixture::new();
    let d = fx.data_args();
    let missing = fx.path("nope.json");
    let mut args = vec!["simulate", "--params", &missing];
    args.extend(d.iter().map(String::as_str));
    let out = hydra(&args);
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains(&missing));
}

#[test]
fn quantizing_twice_is_refused() {
    let fx = Fixture::new();
    fx.train("p.json");
    let (p, q, q2) = (fx.path("p.json"), fx.path("q.json"), fx.path("q2.json"));
    ok(&["quantize", "--params", &p, "--out", &q]);
    let out = hydra(&["quantize", "--params", &q, "--out", &q2]);
    assert!(!out.status.success());
    assert!(!PathBuf::from(&q2).exists());
}

#[test]
fn timing_reports_both_readings() {
    let stdout = ok(&["timing"]);
    let lines: Vec<&str> = stdout.lines().collect();
    assert_eq!(lines[0], "# hydra timing csv v1");
    assert_eq!(lines[1], "metric,n,value");
    for row in [
        "t_parallel_with_input,196:64:32:32:10,328",
        "t_reuse_with_input,196:64:32:32:10,341",
        "simulated_store_and_forward,196:64:32:32:10,470",
    ] {
        assert!(lines.contains(&row), "missing {row}");
    }
}

#[test]
fn sweep_has_float_row() {
    let fx = Fixture::new();
    fx.train("p.json");
    let d = fx.data_args();
    let p = fx.path("p.json");
    let mut args = vec!["sweep", "--params", &p, "--widths", "8,16"];
    args.extend(d.iter().map(String::as_str));
    let stdout = ok(&args);
    let lines: Vec<&str> = stdout.lines().collect();
    assert_eq!(lines[1], "bits,int_bits,accuracy,cycles");
    assert_eq!(lines.len(), 5);
    assert!(lines[2].starts_with("float,,"));
    assert!(lines[3].starts_with("8,3,") && lines[4].starts_with("16,3,"));
}

#[test]
fn trace_without_params_is_seeded() {
    let a = ok(&["trace", "--seed", "3"]);
    let b = ok(&["trace", "--seed", "3"]);
    assert_eq!(a, b);
    assert_eq!(a.lines().count(), 470);
    assert!(a.lines().next().unwrap().starts_with("cycle=1 phase=mac[0] layer=0 active_fma=64"));
}

#[test]
fn bad_mode_is_a_usage_error() {
    let out = hydra(&["timing", "--mode", "sideways"]);
    assert!(!out.status.success());
}
