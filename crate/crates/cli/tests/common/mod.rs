#![allow(dead_code)]

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use curriculum_core::io::{write_binary, write_csv};
use curriculum_core::{FeatureSet, Scalar};
use serde_json::Value;

pub fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_cluster-curriculum"))
}

pub fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

pub fn code(out: &Output) -> i32 {
    out.status.code().expect("exit code")
}

pub fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

pub fn spec_path(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("specs").join(name)
}

pub fn write_features_csv<T: Scalar>(path: &Path, fs: &FeatureSet<T>) {
    write_csv(fs, std::fs::File::create(path).unwrap()).unwrap();
}

pub fn write_features_bin<T: Scalar>(path: &Path, fs: &FeatureSet<T>) {
    write_binary(fs, std::io::BufWriter::new(std::fs::File::create(path).unwrap())).unwrap();
}

pub fn read_json(path: &Path) -> Value {
    serde_json::from_slice(&std::fs::read(path).unwrap()).unwrap()
}

fn load_schema(name: &str) -> Value {
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("schemas").join(name);
    serde_json::from_slice(&std::fs::read(path).unwrap()).unwrap()
}

fn inline_refs(node: &mut Value, curve: &Value) {
    match node {
        Value::Object(map) => {
            if map.get("$ref").and_then(Value::as_str) == Some("curve.schema.json") {
                *node = curve.clone();
            } else {
                map.values_mut().for_each(|v| inline_refs(v, curve));
            }
        }
        Value::Array(items) => items.iter_mut().for_each(|v| inline_refs(v, curve)),
        _ => {}
    }
}

/// Validates `doc` against a shipped schema, with the shared curve schema
/// substituted for its references.
pub fn validate(schema: &str, doc: &Value) -> Result<(), String> {
    let mut curve = load_schema("curve.schema.json");
    if let Value::Object(map) = &mut curve {
        map.remove("$id");
        map.remove("$schema");
    }
    let mut root = load_schema(schema);
    inline_refs(&mut root, &curve);
    let validator = jsonschema::validator_for(&root).map_err(|e| e.to_string())?;
    let errors: Vec<String> = validator.iter_errors(doc).map(|e| format!("{} at {}", e, e.instance_path())).collect();
    if errors.is_empty() {
        Ok(())
    } else {
        Err(errors.join("; "))
    }
}
