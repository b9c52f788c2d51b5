use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use infrasense::dissemination::{encode_packet, AnomalyReport};
use infrasense::geo::{advance, haversine_m, offset_to_latlon, LatLon};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde_json::Value;

const ORIGIN: LatLon = LatLon { lat: 48.2082, lon: 16.3738 };

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_infrasense"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn ok(args: &[&str]) -> Value {
    let out = run(args);
    assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    let stdout = String::from_utf8_lossy(&out.stdout);
    serde_json::from_str(stdout.lines().last().unwrap_or("null")).unwrap_or(Value::Null)
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

fn read_json(path: &Path) -> Value {
    serde_json::from_slice(&fs::read(path).unwrap()).unwrap()
}

fn write_synth(dir: &Path, name: &str, body: &str) -> PathBuf {
    let spec = dir.join(format!("{name}.toml"));
    fs::write(&spec, body).unwrap();
    let csv = dir.join(format!("{name}.csv"));
    ok(&["synth", p(&spec), "--out", p(&csv)]);
    csv
}

const POTHOLE_SPEC: &str = r#"
duration = 40.0
speed = 10.0
noise = 0.05
seed = 3
heading = 90.0
[[pulses]]
position = 200.0
length = 0.5
depth = -0.05
"#;

#[test]
fn analyze_locates_pothole() {
    let dir = tempfile::tempdir().unwrap();
    let csv = write_synth(dir.path(), "ride", POTHOLE_SPEC);
    let out = dir.path().join("out");
    ok(&["analyze", p(&csv), "--out", p(&out)]);
    for f in ["indicators.geojson", "features.csv", "roughness.csv", "manifest.json"] {
        assert!(out.join(f).exists(), "{f} missing");
    }
    let truth = advance(ORIGIN, 90.0, 200.0);
    let gj = read_json(&out.join("indicators.geojson"));
    let near = gj["features"]
        .as_array()
        .unwrap()
        .iter()
        .filter(|f| f["properties"]["kind"] == "anomaly")
        .filter(|f| {
            let c = &f["geometry"]["coordinates"];
            let loc = LatLon { lat: c[1].as_f64().unwrap(), lon: c[0].as_f64().unwrap() };
            haversine_m(loc, truth) < 10.0
        })
        .count();
    assert!(near >= 1);
}

#[test]
fn empty_config_records_defaults() {
    let dir = tempfile::tempdir().unwrap();
    let csv = write_synth(dir.path(), "ride", POTHOLE_SPEC);
    let cfg = dir.path().join("empty.toml");
    fs::write(&cfg, "").unwrap();
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    ok(&["analyze", p(&csv), "--config", p(&cfg), "--out", p(&a)]);
    ok(&["analyze", p(&csv), "--out", p(&b)]);
    let m = read_json(&a.join("manifest.json"));
    assert_eq!(m["config"]["context"], "road");
    assert_eq!(m["config"]["aggregation"]["radius"], 15.0);
    assert_eq!(m["config"]["frame"]["window"], 1.0);
    assert_eq!(m["config_hash"], read_json(&b.join("manifest.json"))["config_hash"]);
    assert_eq!(m["config_hash"].as_str().unwrap().len(), 64);
    assert_eq!(fs::read(a.join("features.csv")).unwrap(), fs::read(b.join("features.csv")).unwrap());
}

#[test]
fn misplaced_block_exits_with_key() {
    let dir = tempfile::tempdir().unwrap();
    let csv = write_synth(dir.path(), "ride", POTHOLE_SPEC);
    let cfg = dir.path().join("bad.toml");
    fs::write(&cfg, "context = \"rail\"\n[road.anomaly]\nk = 4.0\n").unwrap();
    let out_dir = dir.path().join("out");
    let out = run(&["analyze", p(&csv), "--config", p(&cfg), "--out", p(&out_dir)]);
    assert_eq!(out.status.code(), Some(3));
    let err: Value = serde_json::from_slice(&out.stderr).unwrap();
    assert_eq!(err["error"], "config");
    assert!(err["message"].as_str().unwrap().contains("`road`"));
    assert!(!out_dir.exists());
}

#[test]
fn exit_codes() {
    assert_eq!(run(&["analyze"]).status.code(), Some(2));
    assert_eq!(run(&["frobnicate"]).status.code(), Some(2));
    let missing = run(&["analyze", "/nonexistent/trace.csv", "--out", "/tmp/x"]);
    assert_eq!(missing.status.code(), Some(3));
    let err: Value = serde_json::from_slice(&missing.stderr).unwrap();
    assert_eq!(err["error"], "io");

    let dir = tempfile::tempdir().unwrap();
    let spec = dir.path().join("fast.toml");
    fs::write(&spec, "duration = 5.0\nrate = 5.0\nspeed = 10.0\n").unwrap();
    let out = run(&["synth", p(&spec), "--out", p(&dir.path().join("x.csv"))]);
    assert_eq!(out.status.code(), Some(4), "{}", String::from_utf8_lossy(&out.stderr));
    let err: Value = serde_json::from_slice(&out.stderr).unwrap();
    assert_eq!(err["error"], "numeric");
}

#[test]
fn synth_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let a = fs::read(write_synth(dir.path(), "a", POTHOLE_SPEC)).unwrap();
    let b = fs::read(write_synth(dir.path(), "b", POTHOLE_SPEC)).unwrap();
    assert_eq!(a, b);
    let spec = dir.path().join("a.toml");
    let c = dir.path().join("c.csv");
    ok(&["synth", p(&spec), "--out", p(&c), "--seed", "99"]);
    assert_ne!(fs::read(c).unwrap(), a);
}

fn indicator_line(loc: LatLon, t: f64, value: f64) -> String {
    serde_json::json!({
        "kind": "anomaly", "sub_kind": "point", "lat": loc.lat, "lon": loc.lon, "t": t,
        "severity": 50, "confidence": 0.5, "value": value, "unit": "z",
    })
    .to_string()
}

fn write_lines(path: &Path, lines: &[String]) {
    fs::write(path, lines.join("\n") + "\n").unwrap();
}

fn snapshot_features(path: &Path) -> Vec<Value> {
    read_json(path)["features"].as_array().unwrap().clone()
}

#[test]
fn aggregate_twice_keeps_anchors() {
    let dir = tempfile::tempdir().unwrap();
    let lines: Vec<_> =
        (0..5).map(|i| indicator_line(offset_to_latlon(ORIGIN, 100.0 * i as f64, 0.0), 0.0, 2.0)).collect();
    let ind = dir.path().join("i.jsonl");
    write_lines(&ind, &lines);
    let store = dir.path().join("store.jsonl");
    let snap = dir.path().join("snap.geojson");
    let first = ok(&["aggregate", p(&ind), "--store", p(&store), "--out", p(&snap)]);
    assert_eq!(first["anchors"], 5);
    let w1: Vec<f64> = snapshot_features(&snap).iter().map(|f| f["properties"]["weight_sum"].as_f64().unwrap()).collect();
    let second = ok(&["aggregate", p(&ind), "--store", p(&store), "--out", p(&snap)]);
    assert_eq!(second["anchors"], 5);
    let w2: Vec<f64> = snapshot_features(&snap).iter().map(|f| f["properties"]["weight_sum"].as_f64().unwrap()).collect();
    assert!(w1.iter().zip(&w2).all(|(a, b)| b > a), "{w1:?} {w2:?}");
}

#[test]
fn aggregate_disjoint_areas_add() {
    let dir = tempfile::tempdir().unwrap();
    let a: Vec<_> = (0..4).map(|i| indicator_line(offset_to_latlon(ORIGIN, 50.0 * i as f64, 0.0), 0.0, 1.0)).collect();
    let far = offset_to_latlon(ORIGIN, 0.0, 5000.0);
    let b: Vec<_> = (0..3).map(|i| indicator_line(offset_to_latlon(far, 50.0 * i as f64, 0.0), 0.0, 1.0)).collect();
    let (fa, fb) = (dir.path().join("a.jsonl"), dir.path().join("b.jsonl"));
    write_lines(&fa, &a);
    write_lines(&fb, &b);
    let store = dir.path().join("s.jsonl");
    assert_eq!(ok(&["aggregate", p(&fa), "--store", p(&store)])["anchors"], 4);
    assert_eq!(ok(&["aggregate", p(&fb), "--store", p(&store)])["anchors"], 7);

    // bbox restricts the snapshot only
    let snap = dir.path().join("snap.geojson");
    let bbox = format!("{},{},{},{}", ORIGIN.lat - 0.01, ORIGIN.lon - 0.01, ORIGIN.lat + 0.01, ORIGIN.lon + 0.01);
    let r = ok(&["aggregate", "--store", p(&store), "--out", p(&snap), "--bbox", &bbox]);
    assert_eq!(r["anchors"], 7);
    assert_eq!(snapshot_features(&snap).len(), 4);
}

#[test]
fn aggregate_noisy_pothole() {
    let dir = tempfile::tempdir().unwrap();
    let truth = offset_to_latlon(ORIGIN, 120.0, -40.0);
    // 8 m horizontal σ split evenly over both axes
    let noise = Normal::new(0.0, 8.0 / 2f64.sqrt()).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let store = dir.path().join("s.jsonl");
    let snap = dir.path().join("snap.geojson");
    for day in 0..10 {
        let loc = offset_to_latlon(truth, noise.sample(&mut rng), noise.sample(&mut rng));
        let f = dir.path().join(format!("d{day}.jsonl"));
        write_lines(&f, &[indicator_line(loc, day as f64 * 86_400.0, 3.0)]);
        ok(&["aggregate", p(&f), "--store", p(&store), "--out", p(&snap)]);
    }
    let feats = snapshot_features(&snap);
    assert!((1..=2).contains(&feats.len()), "{} anchors", feats.len());
    let dominant = feats
        .iter()
        .max_by_key(|f| f["properties"]["contribution_count"].as_u64().unwrap())
        .unwrap();
    let c = &dominant["geometry"]["coordinates"];
    let loc = LatLon { lat: c[1].as_f64().unwrap(), lon: c[0].as_f64().unwrap() };
    assert!(haversine_m(loc, truth) < 10.0);
}

#[test]
fn aggregate_corrupt_store_names_line() {
    let dir = tempfile::tempdir().unwrap();
    let ind = dir.path().join("i.jsonl");
    write_lines(&ind, &[indicator_line(ORIGIN, 0.0, 1.0)]);
    let store = dir.path().join("s.jsonl");
    ok(&["aggregate", p(&ind), "--store", p(&store)]);
    let mut text = fs::read_to_string(&store).unwrap();
    text.push_str("{not json\n");
    fs::write(&store, text).unwrap();
    let out = run(&["aggregate", p(&ind), "--store", p(&store)]);
    assert_eq!(out.status.code(), Some(3));
    let err: Value = serde_json::from_slice(&out.stderr).unwrap();
    assert_eq!(err["error"], "corrupt_store");
    assert!(err["message"].as_str().unwrap().contains("line 3"), "{err}");
}

fn ring_scenario(dir: &Path, extra_far: bool) -> PathBuf {
    let ssid = encode_packet(
        ORIGIN,
        &[AnomalyReport { location: ORIGIN, kind: 0, severity: 9, confidence: 0.8 }],
    )
    .unwrap()
    .ssid;
    // Pentagon of radius 35 m: neighbours 41 m apart, diagonals 67 m.
    let mut lines: Vec<String> = (0..5)
        .map(|k| {
            let a = 2.0 * std::f64::consts::PI * k as f64 / 5.0;
            let loc = offset_to_latlon(ORIGIN, 35.0 * a.cos(), 35.0 * a.sin());
            let packets = if k == 0 { vec![ssid.clone()] } else { vec![] };
            serde_json::json!({
                "id": format!("n{k}"), "waypoints": [[0.0, loc.lat, loc.lon]],
                "phase": 2.0 * k as f64, "packets": packets,
            })
            .to_string()
        })
        .collect();
    if extra_far {
        let loc = offset_to_latlon(ORIGIN, 2000.0, 0.0);
        lines.push(serde_json::json!({"id": "far", "waypoints": [[0.0, loc.lat, loc.lon]]}).to_string());
    }
    let path = dir.join("ring.jsonl");
    write_lines(&path, &lines);
    path
}

fn log_receivers(path: &Path) -> Vec<String> {
    let mut r = csv::Reader::from_path(path).unwrap();
    r.records().map(|rec| rec.unwrap()[2].to_string()).collect()
}

#[test]
fn simulate_ring_covers_all() {
    let dir = tempfile::tempdir().unwrap();
    let scenario = ring_scenario(dir.path(), true);
    let cfg = dir.path().join("sim.toml");
    fs::write(&cfg, "[simulate]\nduration = 50.0\n").unwrap();
    let log = dir.path().join("log.csv");
    ok(&["simulate", p(&scenario), "--config", p(&cfg), "--out", p(&log)]);
    let mut got = log_receivers(&log);
    got.sort();
    got.dedup();
    assert_eq!(got, vec!["n1", "n2", "n3", "n4"]);

    let again = dir.path().join("log2.csv");
    ok(&["simulate", p(&scenario), "--config", p(&cfg), "--out", p(&again)]);
    assert_eq!(fs::read(&log).unwrap(), fs::read(&again).unwrap());
}

#[test]
fn simulate_same_seed_same_log() {
    let dir = tempfile::tempdir().unwrap();
    let scenario = ring_scenario(dir.path(), false);
    // drop the explicit phases so the seed decides them
    let text = fs::read_to_string(&scenario).unwrap();
    let stripped: Vec<String> = text
        .lines()
        .map(|l| {
            let mut v: Value = serde_json::from_str(l).unwrap();
            v.as_object_mut().unwrap().remove("phase");
            v.to_string()
        })
        .collect();
    write_lines(&scenario, &stripped);
    let logs: Vec<Vec<u8>> = ["a", "b"]
        .iter()
        .map(|n| {
            let log = dir.path().join(format!("{n}.csv"));
            ok(&["simulate", p(&scenario), "--out", p(&log), "--seed", "5"]);
            fs::read(log).unwrap()
        })
        .collect();
    assert_eq!(logs[0], logs[1]);
}

#[test]
fn simulate_empty_scenario() {
    let dir = tempfile::tempdir().unwrap();
    let scenario = dir.path().join("empty.jsonl");
    fs::write(&scenario, "").unwrap();
    let log = dir.path().join("log.csv");
    let r = ok(&["simulate", p(&scenario), "--out", p(&log)]);
    assert_eq!(r["deliveries"], 0);
    assert!(log_receivers(&log).is_empty());
}

#[test]
fn encode_decode_roundtrip() {
    let dir = tempfile::tempdir().unwrap();
    let lines: Vec<_> =
        (0..2).map(|i| indicator_line(offset_to_latlon(ORIGIN, 30.0 * i as f64, 20.0), i as f64, 1.0)).collect();
    let ind = dir.path().join("i.jsonl");
    write_lines(&ind, &lines);
    let origin = format!("{},{}", ORIGIN.lat, ORIGIN.lon);
    let enc = ok(&["encode", p(&ind), "--origin", &origin]);
    let ssid = enc["ssid"].as_str().unwrap();
    assert_eq!(ssid.len(), 32);
    let dec = ok(&["decode", ssid]);
    let entries = dec["entries"].as_array().unwrap();
    assert_eq!(entries.len(), 2);
    assert_eq!(entries[0]["d_north"], 0);
    assert_eq!(entries[0]["d_east"], 2);
    assert_eq!(entries[1]["d_north"], 3);

    let mut bad = ssid.to_string().into_bytes();
    bad[5] = if bad[5] == b'A' { b'B' } else { b'A' };
    let out = run(&["decode", std::str::from_utf8(&bad).unwrap()]);
    assert_eq!(out.status.code(), Some(3));
}
