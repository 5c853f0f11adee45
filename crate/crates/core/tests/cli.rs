use std::process::Command;

use ftn_lcc::sim::{run_coded_sweep, run_uncoded_sweep, SimConfig, BER_HEADER};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_ftn-lcc"))
}

fn data_rows(csv: &str) -> Vec<&str> {
    csv.lines().filter(|l| !l.starts_with('#')).collect()
}

#[test]
fn config_round_trips_through_toml() {
    let mut cfg = SimConfig::full();
    cfg.custom_taps = Some(vec![0.2, 0.9, 0.2]);
    cfg.ebn0_db_list = vec![1.5, 3.0];
    let back = SimConfig::from_toml_str(&cfg.to_toml_string()).unwrap();
    assert_eq!(back, cfg);
    assert!(SimConfig::from_toml_str("np = 5\nbogus = 1\n").is_err());
    let partial = SimConfig::from_toml_str("np = 5\n").unwrap();
    assert_eq!(partial.np, 5);
    assert_eq!(partial.nt, SimConfig::desk().nt);
}

#[test]
fn invalid_configs_are_rejected() {
    for cfg in [
        SimConfig { tau: 0.9, ..SimConfig::desk() },
        SimConfig { nt: 4, ..SimConfig::desk() },
        SimConfig { np: 30, ..SimConfig::desk() },
        SimConfig { block_len: 0, ..SimConfig::desk() },
    ] {
        assert!(cfg.validate().is_err(), "{cfg:?}");
    }
}

#[test]
fn noiseless_coded_link_is_error_free() {
    let cfg = SimConfig {
        np: 5,
        nt: 3,
        custom_taps: Some(vec![0.3, 0.8, 0.3]),
        ebn0_db_list: vec![f64::INFINITY],
        max_blocks: 5,
        ..SimConfig::desk()
    };
    let p = &run_coded_sweep(&cfg).unwrap()[0];
    assert_eq!(p.bit_errors, 0);
    assert_eq!(p.bits_counted, 5 * (200 / 2 - 6));
}

#[test]
fn coding_helps_at_moderate_snr() {
    let cfg = SimConfig {
        np: 5,
        nt: 3,
        ebn0_db_list: vec![5.0],
        max_blocks: 100,
        min_bit_errors: u64::MAX,
        ..SimConfig::desk()
    };
    let uncoded = &run_uncoded_sweep(&cfg).unwrap()[0];
    let coded = &run_coded_sweep(&cfg).unwrap()[0];
    assert!(uncoded.bit_errors > 0);
    assert!(coded.ber < uncoded.ber, "coded {} uncoded {}", coded.ber, uncoded.ber);
}

#[test]
fn cli_sweep_writes_csv() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("ber.csv");
    let status = bin()
        .args(["sweep", "--np", "3", "--nt", "3", "--block-len", "64", "--ebn0", "0,3"])
        .args(["--max-blocks", "4", "--out"])
        .arg(&out)
        .status()
        .unwrap();
    assert!(status.success());
    let text = std::fs::read_to_string(&out).unwrap();
    let rows = data_rows(&text);
    assert_eq!(rows[0], BER_HEADER);
    assert_eq!(rows.len(), 3);
    assert!(rows[1].starts_with("0,"));
    assert!(text.contains("# np = 3"));
}

#[test]
fn cli_reads_config_file_and_flags_override() {
    let dir = tempfile::tempdir().unwrap();
    let cfg_path = dir.path().join("run.toml");
    std::fs::write(&cfg_path, "np = 3\nnt = 1\nblock_len = 32\nmax_blocks = 2\nebn0_db_list = [1.0]\n").unwrap();
    let out = bin()
        .args(["sweep", "--config"])
        .arg(&cfg_path)
        .args(["--seed", "99", "--tree-search"])
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("# master_seed = 99"));
    assert!(text.contains("# block_len = 32"));
    assert!(text.contains("# tree_search = true"));
}

#[test]
fn cli_distance_profile() {
    let out = bin()
        .args(["distance", "--taps", "0.3,0.8,0.3", "--nt", "3", "--np-list", "1,2,3"])
        .output()
        .unwrap();
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    let rows = data_rows(&text);
    assert_eq!(rows[0], "np,distance");
    let d: Vec<f64> = rows[1..].iter().map(|r| r.split(',').nth(1).unwrap().parse().unwrap()).collect();
    assert!((d[0] - 0.4).abs() < 1e-12);
    assert!((d[2] - 0.48f64.sqrt()).abs() < 1e-12);
}

#[test]
fn cli_codebook_save_and_load() {
    let dir = tempfile::tempdir().unwrap();
    let file = dir.path().join("cb.bin");
    let built = bin()
        .args(["codebook", "--np", "3", "--nt", "3", "--save"])
        .arg(&file)
        .output()
        .unwrap();
    assert!(built.status.success());
    let loaded = bin().args(["codebook", "--load"]).arg(&file).output().unwrap();
    assert!(loaded.status.success());
    assert_eq!(built.stdout, loaded.stdout);
    assert!(String::from_utf8_lossy(&loaded.stdout).contains("rows = 32"));
}

#[test]
fn cli_reports_errors_with_status_two() {
    let out = bin().args(["sweep", "--nt", "4"]).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).starts_with("error:"));
}

#[test]
fn cli_selftest_passes() {
    let out = bin().arg("selftest").output().unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stdout));
    assert!(!String::from_utf8_lossy(&out.stdout).contains("[FAIL]"));
}
