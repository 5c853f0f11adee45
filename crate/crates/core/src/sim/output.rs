//! CSV rendering. Comment lines start with `#` and echo the configuration.

use std::fmt::Write;

use super::{BerPoint, SimConfig};

pub const BER_HEADER: &str =
    "ebn0_db,bit_errors,bits_counted,block_errors,blocks,ber,fer,distance_scans,wall_time";

fn echo_config(out: &mut String, title: &str, cfg: &SimConfig) {
    writeln!(out, "# {title}").unwrap();
    writeln!(
        out,
        "# energy: Es = 1 per FTN symbol, Eb = Es / code_rate (code_rate = {}), no 1/tau factor",
        cfg.code_rate()
    )
    .unwrap();
    for line in cfg.to_toml_string().lines() {
        writeln!(out, "# {line}").unwrap();
    }
}

/// BER curve with the configuration echoed as comments.
pub fn sweep_csv(cfg: &SimConfig, points: &[BerPoint]) -> String {
    let mut out = String::new();
    let kind = if cfg.coded { "coded" } else { "uncoded" };
    echo_config(&mut out, &format!("ftn-lcc {kind} BER sweep"), cfg);
    writeln!(out, "{BER_HEADER}").unwrap();
    for p in points {
        writeln!(
            out,
            "{},{},{},{},{},{:e},{:e},{},{:.3}",
            p.ebn0_db,
            p.bit_errors,
            p.bits_counted,
            p.block_errors,
            p.blocks,
            p.ber,
            p.fer,
            p.distance_scans,
            p.wall_time
        )
        .unwrap();
    }
    out
}

/// Class-distance profile, one `np,distance` row per window length.
pub fn distance_csv(cfg: &SimConfig, profile: &[(usize, f64)]) -> String {
    let mut out = String::new();
    echo_config(&mut out, "ftn-lcc class distance profile", cfg);
    writeln!(out, "np,distance").unwrap();
    for (np, d) in profile {
        writeln!(out, "{np},{d}").unwrap();
    }
    out
}
