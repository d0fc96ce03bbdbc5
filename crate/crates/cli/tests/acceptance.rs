//! CLI acceptance: bytewise-deterministic sweep output (criterion 10) and
//! the documented exit codes, exercised against the real binary.

use std::path::PathBuf;
use std::process::Command;

fn binary() -> Command {
    Command::new(env!("CARGO_BIN_EXE_belyi"))
}

fn scratch(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("belyi-acceptance-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    dir.join(name)
}

#[test]
fn criterion_10_sweep_determinism() {
    let mut outputs = Vec::new();
    for run in 0..2 {
        let csv = scratch(&format!("sweep-{run}.csv"));
        let db = scratch(&format!("db-{run}.json"));
        let _ = std::fs::remove_file(&csv);
        let _ = std::fs::remove_file(&db);
        let status = binary()
            .args(["sweep", "--genus-range", "2..6", "--seed", "11"])
            .arg("--out")
            .arg(&csv)
            .arg("--db")
            .arg(&db)
            .status()
            .unwrap();
        assert!(status.success());
        outputs.push((std::fs::read(&csv).unwrap(), std::fs::read(&db).unwrap()));
    }
    assert_eq!(outputs[0].0, outputs[1].0, "CSV bytes differ between runs");
    assert_eq!(outputs[0].1, outputs[1].1, "database bytes differ between runs");
    println!(
        "ACCEPTANCE 10 [determinism]: PASS (sweep 2..6 twice: {} CSV bytes and {} database bytes identical)",
        outputs[0].0.len(),
        outputs[0].1.len()
    );
}

#[test]
fn exit_codes() {
    // 64: missing required --seed
    let out = binary().args(["generate", "--n", "4", "--tau0", "4"]).output().unwrap();
    assert_eq!(out.status.code(), Some(64));

    // 64: seed annulus too short (tr(LRLR) = 7 < 8)
    let out = binary()
        .args(["generate", "--n", "2", "--tau0", "8", "--seed", "1"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(64));

    // 2: generation failure (fixed-genus n=3 cannot saturate at tau0 = 4:
    // after one gluing the 4-gon boundary is fully excluded)
    let out = binary()
        .args([
            "generate",
            "--n",
            "3",
            "--tau0",
            "4",
            "--variant",
            "fixed-genus",
            "--seed",
            "1",
        ])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));

    // 65: malformed database
    let bad = scratch("bad.json");
    std::fs::write(&bad, b"{\"format\":\"other\",\"surfaces\":{}}").unwrap();
    let out = binary().arg("verify").arg("--db").arg(&bad).output().unwrap();
    assert_eq!(out.status.code(), Some(65));

    // 0: saturating run end to end
    let out = binary()
        .args(["generate", "--n", "5", "--tau0", "4", "--seed", "3"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0));
    let doc: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(doc["saturated"], serde_json::Value::Bool(true));
}

#[test]
fn verify_detects_falsified_threshold() {
    // Generate a database, inflate one tau0 beyond the true systole, and
    // check that verification fails with a nonzero exit.
    let db = scratch("tamper.json");
    let _ = std::fs::remove_file(&db);
    let csv = scratch("tamper.csv");
    let status = binary()
        .args(["sweep", "--genus-range", "2..2", "--seed", "5"])
        .arg("--out")
        .arg(&csv)
        .arg("--db")
        .arg(&db)
        .status()
        .unwrap();
    assert!(status.success());
    let mut doc: serde_json::Value =
        serde_json::from_slice(&std::fs::read(&db).unwrap()).unwrap();
    let record = doc["surfaces"]["2"].as_object_mut().unwrap();
    let tau0 = record["tau0"].as_u64().unwrap();
    record.insert("tau0".into(), serde_json::json!(tau0 + 5));
    std::fs::write(&db, serde_json::to_vec(&doc).unwrap()).unwrap();
    let out = binary().arg("verify").arg("--db").arg(&db).output().unwrap();
    assert_eq!(out.status.code(), Some(1));
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("systole_threshold=FAIL"), "{text}");
}

#[test]
fn covers_cli_shapes() {
    // fixed-point CSV shape
    let out = binary()
        .args([
            "covers", "--group", "sym", "--degrees", "30,60", "--word", "ab", "--samples",
            "500", "--seed", "2",
        ])
        .output()
        .unwrap();
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    let lines: Vec<&str> = text.trim().lines().collect();
    assert_eq!(lines[0], "group,parameter,word,samples,estimate,stderr");
    assert_eq!(lines.len(), 3);

    // cover systole certificates on the built-in torus base
    let out = binary()
        .args([
            "covers", "--group", "sl2", "--p", "3", "--samples", "2", "--seed", "2", "--cap",
            "13",
        ])
        .output()
        .unwrap();
    assert!(out.status.success());
    let doc: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(doc.as_array().unwrap().len(), 2);
    assert!(doc[0]["systole"]["length"].as_f64().unwrap() > 0.0);
}
