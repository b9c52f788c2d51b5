use std::fs;
use std::io::BufReader;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use infrasense::aggregation::{snapshot_geojson, BBox, SegmentStore};
use infrasense::config::PipelineConfig;
use infrasense::dissemination::{decode_packet, encode_packet, read_scenario, write_log_csv, AnomalyReport, Simulation};
use infrasense::export::{read_indicators, to_pretty_json, write_all_atomic};
use infrasense::geo::LatLon;
use infrasense::pipeline::analyze_file;
use infrasense::road::IndicatorKind;
use infrasense::synth::{synthesize, write_trace_csv, SynthSpec};
use infrasense::Error;
use serde_json::json;

#[derive(Parser)]
#[command(name = "infrasense", version, about = "Infrastructure indicators from smartphone ride traces")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Analyze one trace (CSV or JSONL) into indicators, features and a manifest.
    Analyze {
        trace: PathBuf,
        #[arg(long)]
        config: Option<PathBuf>,
        /// Output directory.
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Generate a synthetic trace from a TOML (or .json) spec.
    Synth {
        spec: PathBuf,
        /// Output CSV path.
        #[arg(long)]
        out: PathBuf,
        /// Overrides the spec's seed.
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Match and fuse indicator files into a segment store.
    Aggregate {
        /// Indicator files (GeoJSON from `analyze` or JSONL), applied in order.
        indicators: Vec<PathBuf>,
        /// JSONL store file; created when absent.
        #[arg(long)]
        store: PathBuf,
        #[arg(long)]
        config: Option<PathBuf>,
        /// Snapshot GeoJSON path.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Restrict the snapshot to one indicator kind.
        #[arg(long)]
        kind: Option<IndicatorKind>,
        /// Snapshot bounding box `min_lat,min_lon,max_lat,max_lon`.
        #[arg(long, value_parser = floats::<4>)]
        bbox: Option<[f64; 4]>,
        /// Contributor id recorded in the anchor history.
        #[arg(long)]
        device: Option<String>,
        /// Added to every indicator time (e.g. the ride's epoch start), s.
        #[arg(long, default_value_t = 0.0)]
        time_offset: f64,
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Run the beacon dissemination simulator over a JSONL scenario.
    Simulate {
        scenario: PathBuf,
        #[arg(long)]
        config: Option<PathBuf>,
        /// Delivery log CSV path.
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Pack the most severe indicators of a file into a 32-character SSID.
    Encode {
        indicators: PathBuf,
        /// Packet origin `lat,lon`; defaults to the first indicator.
        #[arg(long, value_parser = floats::<2>)]
        origin: Option<[f64; 2]>,
        /// Only pack indicators of this kind.
        #[arg(long)]
        kind: Option<IndicatorKind>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Decode a 32-character SSID into JSON.
    Decode {
        ssid: String,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn floats<const N: usize>(s: &str) -> Result<[f64; N], String> {
    let v: Vec<f64> = s
        .split(',')
        .map(|x| x.trim().parse::<f64>().map_err(|e| format!("`{x}`: {e}")))
        .collect::<Result<_, _>>()?;
    v.try_into().map_err(|v: Vec<f64>| format!("expected {N} comma-separated numbers, got {}", v.len()))
}

fn load_config(path: Option<&Path>, seed: Option<u64>) -> infrasense::Result<PipelineConfig> {
    let mut cfg = match path {
        Some(p) => PipelineConfig::load(p)?,
        None => PipelineConfig::default(),
    };
    if let Some(s) = seed {
        cfg.seed = s;
    }
    Ok(cfg)
}

fn write_or_print(out: Option<&Path>, bytes: &[u8]) -> infrasense::Result<()> {
    match out {
        Some(p) => write_all_atomic(
            p.parent().filter(|d| !d.as_os_str().is_empty()).unwrap_or(Path::new(".")),
            &[(file_name(p), bytes.to_vec())],
        ),
        None => {
            print!("{}", String::from_utf8_lossy(bytes));
            Ok(())
        }
    }
}

fn file_name(p: &Path) -> String {
    p.file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or_else(|| "out".into())
}

fn run(cli: Cli) -> infrasense::Result<()> {
    match cli.command {
        Command::Analyze { trace, config, out, seed } => {
            let cfg = load_config(config.as_deref(), seed)?;
            let (analysis, files) = analyze_file(&trace, &cfg)?;
            write_all_atomic(&out, &files)?;
            println!(
                "{}",
                json!({"indicators": analysis.indicators.len(), "windows": analysis.features.n_rows(), "out": out})
            );
        }
        Command::Synth { spec, out, seed } => {
            let mut spec = SynthSpec::load(&spec)?;
            if let Some(s) = seed {
                spec.seed = s;
            }
            let trace = synthesize(&spec)?;
            let mut bytes = Vec::new();
            write_trace_csv(&mut bytes, &trace)?;
            write_or_print(Some(&out), &bytes)?;
        }
        Command::Aggregate { indicators, store, config, out, kind, bbox, device, time_offset, seed } => {
            let cfg = load_config(config.as_deref(), seed)?;
            let bbox = bbox.map(|b| BBox::new(b[0], b[1], b[2], b[3])).transpose()?;
            let mut s = SegmentStore::open(&store, cfg.aggregation)?;
            let mut applied = 0usize;
            for path in &indicators {
                for mut ind in read_indicators(path)? {
                    ind.t += time_offset;
                    if s.add(&ind, device.as_deref())?.is_some() {
                        applied += 1;
                    }
                }
            }
            s.flush()?;
            let snap = s.snapshot(kind, bbox)?;
            if let Some(o) = out.as_deref() {
                write_or_print(Some(o), &to_pretty_json(&snapshot_geojson(&snap)))?;
            }
            println!(
                "{}",
                json!({"applied": applied, "rejected": s.rejected(), "anchors": s.len(), "snapshot": snap.len()})
            );
        }
        Command::Simulate { scenario, config, out, seed } => {
            let cfg = load_config(config.as_deref(), seed)?;
            let file = fs::File::open(&scenario).map_err(|e| Error::Io { path: scenario.clone(), source: e })?;
            let nodes = read_scenario(BufReader::new(file))?;
            let mut sim = Simulation::new(&nodes, cfg.simulate, cfg.seed)?;
            sim.run();
            let mut bytes = Vec::new();
            write_log_csv(&mut bytes, &sim)?;
            write_or_print(Some(&out), &bytes)?;
            println!("{}", json!({"nodes": sim.nodes.len(), "deliveries": sim.log().len()}));
        }
        Command::Encode { indicators, origin, kind, out } => {
            let inds: Vec<_> =
                read_indicators(&indicators)?.into_iter().filter(|i| kind.is_none_or(|k| i.kind == k)).collect();
            let origin = match origin {
                Some(o) => LatLon::new(o[0], o[1])?,
                None => inds
                    .first()
                    .map(|i| i.location())
                    .ok_or_else(|| Error::InsufficientData("no indicators and no --origin".into()))?,
            };
            let reports: Vec<_> = inds.iter().map(AnomalyReport::from_indicator).collect();
            let enc = encode_packet(origin, &reports)?;
            let line = json!({"ssid": enc.ssid, "clamped": enc.clamped, "truncated": enc.truncated});
            write_or_print(out.as_deref(), format!("{line}\n").as_bytes())?;
        }
        Command::Decode { ssid, out } => {
            let p = decode_packet(&ssid)?;
            let entries: Vec<_> = p
                .entries
                .iter()
                .enumerate()
                .map(|(i, e)| {
                    let loc = p.entry_location(i).expect("entry exists");
                    json!({
                        "d_north": e.d_north, "d_east": e.d_east, "kind": e.kind,
                        "severity": e.severity, "confidence": e.confidence,
                        "lat": loc.lat, "lon": loc.lon,
                    })
                })
                .collect();
            let v = json!({
                "version": p.version, "flags": p.flags,
                "origin": {"lat": p.origin().lat, "lon": p.origin().lon},
                "checksum": format!("{:04x}", p.checksum),
                "entries": entries,
            });
            write_or_print(out.as_deref(), format!("{v}\n").as_bytes())?;
        }
    }
    Ok(())
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::Numeric(_) => 4,
        _ => 3,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("{}", json!({"error": e.kind(), "message": e.to_string()}));
            ExitCode::from(exit_code(&e))
        }
    }
}
