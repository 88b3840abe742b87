use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_cvchipsim"))
}

fn preset(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("presets").join(name)
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("spawn cvchipsim")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn write_temp(dir: &tempfile::TempDir, name: &str, text: &str) -> String {
    let p = dir.path().join(name);
    std::fs::write(&p, text).unwrap();
    p.to_str().unwrap().to_string()
}

#[test]
fn validate_preset_succeeds() {
    let o = run(&["validate", "--input", preset("fig1b.net").to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    assert!(o.stdout.is_empty());
    assert!(String::from_utf8_lossy(&o.stderr).contains("valid"));
}

#[test]
fn vacuum_record_values() {
    let dir = tempfile::tempdir().unwrap();
    let net = write_temp(
        &dir,
        "v.net",
        "source v vacuum\nsource lo coherent power_mw=1\nhomodyne hd signal=v lo=lo lo_phase_deg=0\n",
    );
    let o = run(&["simulate", "--input", &net]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(
        stdout(&o),
        "label,kind,lo_phase_deg,variance_shot,db\nhd,single,0.000000000,1.000000000,0.000000000\n"
    );
}

#[test]
fn no_detectors_gives_header_only() {
    let dir = tempfile::tempdir().unwrap();
    let net = write_temp(&dir, "v.net", "source v vacuum\n");
    let o = run(&["simulate", "--input", &net]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o), "label,kind,lo_phase_deg,variance_shot,db\n");
}

#[test]
fn repro_squeezing_table() {
    let o = run(&["repro-squeezing"]);
    assert_eq!(o.status.code(), Some(0));
    let mut rdr = csv::Reader::from_reader(o.stdout.as_slice());
    assert_eq!(
        rdr.headers().unwrap().iter().collect::<Vec<_>>(),
        ["pump_mw", "x", "squeezing_db", "antisqueezing_db"]
    );
    let rows: Vec<Vec<f64>> = rdr
        .records()
        .map(|r| r.unwrap().iter().map(|c| c.parse().unwrap()).collect())
        .collect();
    assert_eq!(rows.len(), 18);
    assert!(rows.windows(2).all(|w| w[1][0] > w[0][0]));
    let at100 = rows.iter().find(|r| r[0] == 100.0).unwrap();
    assert!((at100[2] - -4.147).abs() < 1e-3);
}

#[test]
fn repro_epr_is_entangled() {
    let o = run(&["repro-epr", "--format", "json"]);
    assert_eq!(o.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    let row = &v[0];
    assert!((row["delta_sq"].as_f64().unwrap() - 0.714).abs() <= 0.005);
    assert_eq!(row["verdict"], "entangled");
}

#[test]
fn output_is_deterministic() {
    let input = preset("fig1b.net");
    let args = ["sweep", "--input", input.to_str().unwrap(), "--sweep",
                "elements.theta12.phase_deg=0:90:7"];
    let a = run(&args);
    let b = run(&args);
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, b.stdout);
    let header = stdout(&a).lines().next().unwrap().to_string();
    assert_eq!(header, "value,hd1.db_min,hd1.db_max,hd2.db_min,hd2.db_max,delta_sq");
}

#[test]
fn json_file_gets_metadata_sidecar() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("curve.json");
    let out_s = out.to_str().unwrap();
    let o = run(&[
        "sweep", "--input", preset("fig1a.net").to_str().unwrap(),
        "--sweep", "sources.sl1.pump_mw=10:50:5", "--format", "json", "--output", out_s,
        "--set", "detectors.hd.clearance_db=none", "--set", "detectors.hd.clearance_db=20",
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(o.stdout.is_empty());
    let data: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&out).unwrap()).unwrap();
    assert_eq!(data.as_array().unwrap().len(), 5);
    let meta: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(format!("{out_s}.meta.json")).unwrap()).unwrap();
    assert_eq!(meta["command"], "sweep");
    assert_eq!(meta["overrides"].as_array().unwrap().len(), 2);
    assert_eq!(meta["overrides"][1]["value"], "20");
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let bad = write_temp(&dir, "bad.net", "source v vacuum\nlaser x\n");
    let o = run(&["simulate", "--input", &bad]);
    assert_eq!(o.status.code(), Some(1));
    assert!(o.stdout.is_empty());
    assert!(String::from_utf8_lossy(&o.stderr).contains("line 2"));

    let cyc = write_temp(&dir, "cyc.net", "loss l1 in=l1 eta=0.5\n");
    assert_eq!(run(&["validate", "--input", &cyc]).status.code(), Some(1));

    let fig1a = preset("fig1a.net");
    let o = run(&["simulate", "--input", fig1a.to_str().unwrap(), "--set", "sources.sl1.pump_mw=200"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(o.stdout.is_empty());

    assert_eq!(run(&["frobnicate"]).status.code(), Some(64));
    assert_eq!(run(&["sweep", "--input", fig1a.to_str().unwrap()]).status.code(), Some(64));
    assert_eq!(run(&["simulate"]).status.code(), Some(64));
    assert_eq!(run(&["repro-squeezing", "--format", "xml"]).status.code(), Some(64));
    assert_eq!(run(&["--help"]).status.code(), Some(0));

    let missing = dir.path().join("nope.net");
    assert_eq!(run(&["simulate", "--input", missing.to_str().unwrap()]).status.code(), Some(1));
    let unwritable = dir.path().join("no/such/dir/out.csv");
    assert_eq!(
        run(&["repro-squeezing", "--output", unwritable.to_str().unwrap()]).status.code(),
        Some(1)
    );
}

#[test]
fn repro_accepts_json_parameters() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_temp(
        &dir,
        "cfg.json",
        r#"{"chain": {"eta_pd": 0.998, "eta_prop": 0.99, "eta_coupling": 1.0, "eta_visibility": 0.995,
            "clearance_db": 13.5, "phase_fluct_deg": 1.5}}"#,
    );
    let o = run(&["repro-squeezing", "--input", &cfg]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    let row = text.lines().find(|l| l.starts_with("100.")).unwrap();
    let sq: f64 = row.split(',').nth(2).unwrap().parse().unwrap();
    assert!((sq - -8.365).abs() < 1e-3, "{sq}");

    let typo = write_temp(&dir, "typo.json", r#"{"chian": {}}"#);
    assert_eq!(run(&["repro-squeezing", "--input", &typo]).status.code(), Some(1));
}
