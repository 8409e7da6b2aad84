use std::path::Path;
use std::process::{Command, Output};

fn run(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_vqe-interp"))
        .args(args)
        .arg("--out")
        .arg(dir)
        .output()
        .expect("binary runs")
}

const H2: [&str; 8] = ["--family", "h2", "--train-at", "0.5,1.0,1.5,2.0", "--restarts", "2", "--grid", "0.5:2.0:7"];

fn train_and_evaluate(dir: &Path) {
    let out = run(dir, &[&["train"][..], &H2].concat());
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let model = dir.join("model.json");
    let out = run(dir, &[&["evaluate"][..], &H2, &["--model", model.to_str().unwrap()]].concat());
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
}

fn table(path: &Path) -> Vec<Vec<String>> {
    std::fs::read_to_string(path)
        .unwrap()
        .lines()
        .filter(|l| !l.starts_with('#'))
        .map(|l| l.split(',').map(String::from).collect())
        .collect()
}

#[test]
fn curve_has_one_column_per_parameter() {
    let dir = tempfile::tempdir().unwrap();
    train_and_evaluate(dir.path());
    let rows = table(&dir.path().join("curve.csv"));
    assert_eq!(rows[0][..5], ["x", "E_interp", "E_HF", "E_FCI", "E_direct_interp"]);
    assert_eq!(rows[0].len(), 5 + 2);
    assert_eq!(rows.len(), 1 + 7);
    for row in &rows[1..] {
        let e: f64 = row[1].parse().unwrap();
        let fci: f64 = row[3].parse().unwrap();
        assert!(e >= fci - 1e-9 && e - fci < 1e-3, "{row:?}");
    }
    let text = std::fs::read_to_string(dir.path().join("curve.csv")).unwrap();
    assert!(text.starts_with("# format_version = 1\n# command = evaluate\n# config_hash = "));
}

#[test]
fn reruns_are_byte_identical() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    train_and_evaluate(a.path());
    train_and_evaluate(b.path());
    for name in ["model.json", "curve.csv"] {
        assert_eq!(std::fs::read(a.path().join(name)).unwrap(), std::fs::read(b.path().join(name)).unwrap(), "{name}");
    }
    // training.json embeds the output directory, so compare it without
    let strip = |p: &Path| {
        std::fs::read_to_string(p.join("training.json")).unwrap().replace(p.to_str().unwrap(), "")
    };
    assert_eq!(strip(a.path()), strip(b.path()));
}

#[test]
fn exact_energies_and_gradients() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(dir.path(), &["fci", "--family", "h2", "--train-at", "0.7414,1.0,1.5", "--grid", "0.7414:1.5:2"]);
    assert!(out.status.success());
    let rows = table(&dir.path().join("fci.csv"));
    assert_eq!(rows[0], ["x", "E_HF", "E_FCI", "sector_dimension"]);
    let first = &rows[1];
    assert!((first[2].parse::<f64>().unwrap() + 1.137270174660903).abs() < 1e-8);
    assert_eq!(first[3], "6");

    let out = run(dir.path(), &["gradcheck", "--family", "h3_triangle_plus", "--depth", "2", "--samples", "2"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
}

#[test]
fn trotter_order_is_a_recorded_option() {
    let dir = tempfile::tempdir().unwrap();
    let args = [&["train"][..], &H2, &["--trotter-order", "source"]].concat();
    let out = run(dir.path(), &args);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let model = std::fs::read_to_string(dir.path().join("model.json")).unwrap();
    assert!(model.contains("\"trotter_order\": \"source\""));
    let out = run(dir.path(), &[&["train"][..], &H2, &["--trotter-order", "random"]].concat());
    assert!(!out.status.success());
}

#[test]
fn invalid_requests_exit_with_code_two() {
    let dir = tempfile::tempdir().unwrap();
    let too_few = run(dir.path(), &["train", "--family", "h2", "--train-at", "0.5,1.0"]);
    assert_eq!(too_few.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&too_few.stderr).starts_with("error: "));

    let unknown = run(dir.path(), &["fci", "--family", "helium"]);
    assert_eq!(unknown.status.code(), Some(2));

    train_and_evaluate(dir.path());
    let model = dir.path().join("model.json");
    let beyond = run(
        dir.path(),
        &["evaluate", "--family", "h2", "--train-at", "0.5,1.0,1.5,2.0", "--grid", "0.5:2.5:3", "--model", model.to_str().unwrap()],
    );
    assert_eq!(beyond.status.code(), Some(2));
}
