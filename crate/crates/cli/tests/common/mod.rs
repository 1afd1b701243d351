#![allow(dead_code)]

use std::io::Write;
use std::path::PathBuf;
use std::process::{Command, Output};

use serde_json::Value;
use tempfile::NamedTempFile;

pub fn reference_path() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("scenarios/reference.json")
}

pub fn reference_value() -> Value {
    serde_json::from_str(&std::fs::read_to_string(reference_path()).unwrap()).unwrap()
}

pub fn write_scenario(v: &Value) -> NamedTempFile {
    let mut f = NamedTempFile::new().unwrap();
    f.write_all(serde_json::to_string_pretty(v).unwrap().as_bytes())
        .unwrap();
    f
}

pub fn photonlink(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_photonlink"))
        .args(args)
        .env("PHOTONLINK_NO_COLOR", "1")
        .output()
        .unwrap()
}

/// Reference scenario resized to `n` DTRMs: splitter fanout `n`, one drop
/// length for all legs.
pub fn resized(n: u32, with_return: bool) -> Value {
    let mut v = reference_value();
    v["topology"]["n_dtrm"] = n.into();
    v["topology"]["forward"]["drops"]["lengths_m"] = serde_json::json!([50.0]);
    for c in v["components"].as_array_mut().unwrap() {
        if c["type"] == "splitter" {
            c["fanout"] = n.into();
        }
    }
    if with_return {
        v["topology"]["return"]["fiber"]["lengths_m"] = serde_json::json!([80.0]);
    } else {
        v["topology"].as_object_mut().unwrap().remove("return");
        v.as_object_mut().unwrap().remove("digital");
    }
    v
}
