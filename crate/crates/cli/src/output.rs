use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;
use serde_json::{json, Value};

use crate::AppError;

/// Fixed-point rendering with 6 significant digits.
pub fn sig6(v: f64) -> String {
    if v == 0.0 {
        return "0".into();
    }
    if !v.is_finite() {
        return v.to_string();
    }
    // the exponent after rounding decides how many decimals are significant
    let sci = format!("{v:.5e}");
    let exp: i32 = sci
        .split_once('e')
        .and_then(|(_, e)| e.parse().ok())
        .unwrap_or(0);
    let decimals = (5 - exp).max(0) as usize;
    format!("{v:.decimals$}")
}

pub fn csv<I, R>(header: &[&str], rows: I) -> String
where
    I: IntoIterator<Item = R>,
    R: IntoIterator<Item = String>,
{
    let mut out = header.join(",");
    out.push('\n');
    for row in rows {
        out.push_str(&row.into_iter().collect::<Vec<_>>().join(","));
        out.push('\n');
    }
    out
}

pub enum Body {
    Csv(String),
    Json(Value),
}

impl Body {
    pub fn json<T: Serialize>(value: &T) -> Result<Self, AppError> {
        serde_json::to_value(value)
            .map(Body::Json)
            .map_err(|e| AppError::internal(e.to_string()))
    }

    fn render(&self) -> String {
        match self {
            Body::Csv(s) => s.clone(),
            Body::Json(v) => pretty(v),
        }
    }
}

fn pretty(v: &Value) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("json values always serialize");
    s.push('\n');
    s
}

#[derive(Serialize)]
pub struct RunManifest<'a> {
    pub subcommand: &'a str,
    pub params: Value,
    pub version: &'a str,
    pub seeds: Vec<u64>,
    pub outputs: Vec<PathBuf>,
}

pub fn manifest_path(out: &Path) -> PathBuf {
    let mut name = out.file_name().unwrap_or_default().to_os_string();
    name.push(".manifest.json");
    out.with_file_name(name)
}

/// Prints `body`, or writes it to `out` next to its run manifest.
pub fn emit(
    body: Body,
    out: Option<&Path>,
    subcommand: &str,
    params: Value,
    seeds: Vec<u64>,
) -> Result<(), AppError> {
    let Some(out) = out else {
        print!("{}", body.render());
        return Ok(());
    };
    let manifest_file = manifest_path(out);
    let reference = manifest_file
        .file_name()
        .unwrap_or_default()
        .to_string_lossy()
        .into_owned();
    let text = match body {
        Body::Csv(s) => format!("# manifest: {reference}\n{s}"),
        Body::Json(mut v) => {
            match &mut v {
                Value::Object(map) => {
                    map.insert("manifest".into(), json!(reference));
                }
                other => {
                    *other = json!({ "manifest": reference, "result": other.clone() });
                }
            }
            pretty(&v)
        }
    };
    let manifest = RunManifest {
        subcommand,
        params,
        version: env!("CARGO_PKG_VERSION"),
        seeds,
        outputs: vec![out.to_path_buf()],
    };
    let manifest_text = pretty(&serde_json::to_value(&manifest).expect("manifest serializes"));
    write(out, &text)?;
    write(&manifest_file, &manifest_text)?;
    eprintln!("wrote {} and {}", out.display(), manifest_file.display());
    Ok(())
}

fn write(path: &Path, text: &str) -> Result<(), AppError> {
    fs::write(path, text).map_err(|e| AppError::io(path, e))
}

#[cfg(test)]
mod tests {
    use super::sig6;

    #[test]
    fn six_significant_digits() {
        assert_eq!(sig6(0.890_053_7), "0.890054");
        assert_eq!(sig6(0.5), "0.500000");
        assert_eq!(sig6(20.0), "20.0000");
        assert_eq!(sig6(0.999_999_7), "1.00000");
        assert_eq!(sig6(1234567.0), "1234567");
        assert_eq!(sig6(0.001_234_567), "0.00123457");
        assert_eq!(sig6(-0.25), "-0.250000");
        assert_eq!(sig6(0.0), "0");
    }
}
