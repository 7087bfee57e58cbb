//! Deterministic report emission.
//!
//! Output files must be byte-identical across runs for identical input and
//! configuration, so floats are rendered with a fixed 17-significant-digit
//! scientific format, rows follow fixed orders, and every file embeds the
//! tool version and the configuration hash.

use std::fmt::Write as _;
use std::path::Path;

use anyhow::{Context, Result};

use quadham_core::diagonalizer::DiagonalResult;
use quadham_core::matrix::Mat;
use quadham_core::states::ZpeComparison;

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// 17 significant digits, scientific; round-trips any finite f64.
pub fn fmt_f64(x: f64) -> String {
    if x.is_nan() {
        return "nan".into();
    }
    format!("{x:.16e}")
}

/// FNV-1a 64-bit hash; fast, dependency-free and stable across platforms.
pub fn fnv1a64(bytes: &[u8]) -> u64 {
    let mut hash: u64 = 0xcbf2_9ce4_8422_2325;
    for &b in bytes {
        hash ^= b as u64;
        hash = hash.wrapping_mul(0x0000_0100_0000_01b3);
    }
    hash
}

/// Minimal JSON document builder with insertion-ordered objects and the
/// fixed float format; `serde_json` stays on the input side only so the
/// byte layout of reports is fully under our control.
pub enum JVal {
    Null,
    Bool(bool),
    UInt(usize),
    F64(f64),
    MaybeF64(Option<f64>),
    Str(String),
    Arr(Vec<JVal>),
    Obj(Vec<(&'static str, JVal)>),
}

fn escape_json(s: &str) -> String {
    let mut out = String::with_capacity(s.len() + 2);
    for c in s.chars() {
        match c {
            '"' => out.push_str("\\\""),
            '\\' => out.push_str("\\\\"),
            '\n' => out.push_str("\\n"),
            '\r' => out.push_str("\\r"),
            '\t' => out.push_str("\\t"),
            c if (c as u32) < 0x20 => {
                let _ = write!(out, "\\u{:04x}", c as u32);
            }
            c => out.push(c),
        }
    }
    out
}

impl JVal {
    fn render(&self, buf: &mut String, indent: usize) {
        match self {
            JVal::Null => buf.push_str("null"),
            JVal::Bool(b) => buf.push_str(if *b { "true" } else { "false" }),
            JVal::UInt(u) => {
                let _ = write!(buf, "{u}");
            }
            JVal::F64(x) => {
                if x.is_finite() {
                    buf.push_str(&fmt_f64(*x));
                } else {
                    buf.push_str("null");
                }
            }
            JVal::MaybeF64(opt) => match opt {
                Some(x) if x.is_finite() => buf.push_str(&fmt_f64(*x)),
                _ => buf.push_str("null"),
            },
            JVal::Str(s) => {
                let _ = write!(buf, "\"{}\"", escape_json(s));
            }
            JVal::Arr(items) => {
                if items.is_empty() {
                    buf.push_str("[]");
                    return;
                }
                buf.push('[');
                for (k, item) in items.iter().enumerate() {
                    if k > 0 {
                        buf.push(',');
                    }
                    buf.push('\n');
                    buf.push_str(&"  ".repeat(indent + 1));
                    item.render(buf, indent + 1);
                }
                buf.push('\n');
                buf.push_str(&"  ".repeat(indent));
                buf.push(']');
            }
            JVal::Obj(fields) => {
                if fields.is_empty() {
                    buf.push_str("{}");
                    return;
                }
                buf.push('{');
                for (k, (name, val)) in fields.iter().enumerate() {
                    if k > 0 {
                        buf.push(',');
                    }
                    buf.push('\n');
                    buf.push_str(&"  ".repeat(indent + 1));
                    let _ = write!(buf, "\"{name}\": ");
                    val.render(buf, indent + 1);
                }
                buf.push('\n');
                buf.push_str(&"  ".repeat(indent));
                buf.push('}');
            }
        }
    }

    pub fn to_document(&self) -> String {
        let mut buf = String::new();
        self.render(&mut buf, 0);
        buf.push('\n');
        buf
    }
}

pub fn f64_arr(xs: &[f64]) -> JVal {
    JVal::Arr(xs.iter().map(|&x| JVal::F64(x)).collect())
}

pub fn mat_arr(m: &Mat) -> JVal {
    JVal::Arr(
        (0..m.n())
            .map(|i| JVal::Arr((0..m.n()).map(|j| JVal::F64(m[(i, j)])).collect()))
            .collect(),
    )
}

fn csv_field(s: &str) -> String {
    if s.contains(',') || s.contains('"') || s.contains('\n') {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

pub fn write_file(path: &Path, contents: &str) -> Result<()> {
    if let Some(parent) = path.parent() {
        std::fs::create_dir_all(parent)
            .with_context(|| format!("cannot create directory {}", parent.display()))?;
    }
    std::fs::write(path, contents).with_context(|| format!("cannot write {}", path.display()))
}

/// Comment header shared by the CSV reports.
pub fn csv_preamble(config_hash: u64, method: Option<&str>) -> String {
    let mut s = format!("# quadham {VERSION}\n# config_hash={config_hash:016x}\n");
    if let Some(m) = method {
        let _ = writeln!(s, "# method={m}");
    }
    s
}

/// One row of a frequency table. Oracle rows have no per-particle
/// effective parameters; `index` is then the mode number.
pub struct FreqRow {
    pub index: usize,
    pub m_eff: Option<f64>,
    pub d_eff: Option<f64>,
    pub omega_sq: f64,
}

impl FreqRow {
    fn omega(&self) -> Option<f64> {
        (self.omega_sq >= 0.0).then(|| self.omega_sq.sqrt())
    }
}

pub fn frequencies_csv(config_hash: u64, method: &str, rows: &[FreqRow]) -> String {
    let mut s = csv_preamble(config_hash, Some(method));
    s.push_str("index,m_eff,d_eff,omega_sq,omega\n");
    for r in rows {
        let opt = |x: Option<f64>| x.map(fmt_f64).unwrap_or_default();
        let omega = r.omega().map(fmt_f64).unwrap_or_else(|| "nan".into());
        let _ = writeln!(
            s,
            "{},{},{},{},{}",
            r.index,
            opt(r.m_eff),
            opt(r.d_eff),
            fmt_f64(r.omega_sq),
            omega
        );
    }
    s
}

pub fn frequencies_json(config_hash: u64, method: &str, rows: &[FreqRow]) -> String {
    JVal::Obj(vec![
        ("version", JVal::Str(VERSION.into())),
        ("config_hash", JVal::Str(format!("{config_hash:016x}"))),
        ("method", JVal::Str(method.into())),
        (
            "rows",
            JVal::Arr(
                rows.iter()
                    .map(|r| {
                        JVal::Obj(vec![
                            ("index", JVal::UInt(r.index)),
                            ("m_eff", JVal::MaybeF64(r.m_eff)),
                            ("d_eff", JVal::MaybeF64(r.d_eff)),
                            ("omega_sq", JVal::F64(r.omega_sq)),
                            ("omega", JVal::MaybeF64(r.omega())),
                        ])
                    })
                    .collect(),
            ),
        ),
    ])
    .to_document()
}

/// Shear steps with 1-based particle indices, plus the composed map.
pub fn sequence_json(
    config_hash: u64,
    method: &str,
    solver: Option<&str>,
    result: &DiagonalResult,
) -> String {
    let seq = result.sequence();
    let mut fields = vec![
        ("version", JVal::Str(VERSION.into())),
        ("config_hash", JVal::Str(format!("{config_hash:016x}"))),
        ("method", JVal::Str(method.into())),
    ];
    if let Some(sv) = solver {
        fields.push(("solver", JVal::Str(sv.into())));
    }
    fields.push(("converged", JVal::Bool(result.converged())));
    fields.push(("n", JVal::UInt(seq.n())));
    fields.push((
        "steps",
        JVal::Arr(
            seq.steps()
                .iter()
                .map(|s| {
                    JVal::Obj(vec![
                        ("i", JVal::UInt(s.i() + 1)),
                        ("j", JVal::UInt(s.j() + 1)),
                        ("alpha", JVal::F64(s.alpha())),
                        ("beta", JVal::F64(s.beta())),
                    ])
                })
                .collect(),
        ),
    ));
    fields.push(("composed_map", mat_arr(seq.composed_map())));
    JVal::Obj(fields).to_document()
}

pub fn residuals_json(
    config_hash: u64,
    method: &str,
    solver: Option<&str>,
    result: &DiagonalResult,
    tol: f64,
) -> String {
    let mut fields = vec![
        ("version", JVal::Str(VERSION.into())),
        ("config_hash", JVal::Str(format!("{config_hash:016x}"))),
        ("method", JVal::Str(method.into())),
    ];
    if let Some(sv) = solver {
        fields.push(("solver", JVal::Str(sv.into())));
    }
    fields.push(("converged", JVal::Bool(result.converged())));
    fields.push(("steps", JVal::UInt(result.sequence().len())));
    fields.push(("k_offdiag", JVal::F64(result.k_offdiag())));
    fields.push(("v_offdiag", JVal::F64(result.v_offdiag())));
    fields.push(("tol", JVal::F64(tol)));
    JVal::Obj(fields).to_document()
}

/// Tidy-format comparison table: one record per row.
///
/// Columns: `record,method,method_b,quantity,mode,value`. Frequency rows
/// enumerate the sorted squared spectrum per method; `zpe` rows hold the
/// zero-point energies; `diff` rows all pairwise absolute differences;
/// `error` rows the per-method failure messages.
pub fn compare_csv(config_hash: u64, report: &ZpeComparison) -> String {
    let mut s = csv_preamble(config_hash, None);
    s.push_str("record,method,method_b,quantity,mode,value\n");
    for e in &report.entries {
        if let Some(w) = &e.omega_sq {
            for (k, &x) in w.iter().enumerate() {
                let _ = writeln!(s, "frequency,{},,omega_sq,{},{}", e.method.name(), k + 1, fmt_f64(x));
            }
        }
        if let Some(z) = e.zpe {
            let _ = writeln!(s, "zpe,{},,zpe,,{}", e.method.name(), fmt_f64(z));
        }
        if let Some(c) = e.converged {
            let _ = writeln!(s, "converged,{},,converged,,{}", e.method.name(), c);
        }
        if let Some(err) = &e.error {
            let _ = writeln!(s, "error,{},,message,,{}", e.method.name(), csv_field(err));
        }
    }
    for d in &report.diffs {
        let val = |x: Option<f64>| x.map(fmt_f64).unwrap_or_default();
        let _ = writeln!(
            s,
            "diff,{},{},zpe_abs_diff,,{}",
            d.a.name(),
            d.b.name(),
            val(d.zpe_abs_diff)
        );
        let _ = writeln!(
            s,
            "diff,{},{},omega_sq_max_abs_diff,,{}",
            d.a.name(),
            d.b.name(),
            val(d.omega_sq_max_abs_diff)
        );
    }
    s
}

pub fn compare_json(config_hash: u64, report: &ZpeComparison) -> String {
    JVal::Obj(vec![
        ("version", JVal::Str(VERSION.into())),
        ("config_hash", JVal::Str(format!("{config_hash:016x}"))),
        (
            "methods",
            JVal::Arr(
                report
                    .entries
                    .iter()
                    .map(|e| {
                        JVal::Obj(vec![
                            ("method", JVal::Str(e.method.name().into())),
                            (
                                "omega_sq",
                                e.omega_sq.as_ref().map(|w| f64_arr(w)).unwrap_or(JVal::Null),
                            ),
                            ("zpe", JVal::MaybeF64(e.zpe)),
                            (
                                "converged",
                                e.converged.map(JVal::Bool).unwrap_or(JVal::Null),
                            ),
                            (
                                "error",
                                e.error
                                    .as_ref()
                                    .map(|m| JVal::Str(m.clone()))
                                    .unwrap_or(JVal::Null),
                            ),
                        ])
                    })
                    .collect(),
            ),
        ),
        (
            "diffs",
            JVal::Arr(
                report
                    .diffs
                    .iter()
                    .map(|d| {
                        JVal::Obj(vec![
                            ("a", JVal::Str(d.a.name().into())),
                            ("b", JVal::Str(d.b.name().into())),
                            ("zpe_abs_diff", JVal::MaybeF64(d.zpe_abs_diff)),
                            ("omega_sq_max_abs_diff", JVal::MaybeF64(d.omega_sq_max_abs_diff)),
                        ])
                    })
                    .collect(),
            ),
        ),
    ])
    .to_document()
}

pub struct StateReport<'a> {
    pub method: &'a str,
    pub solver: Option<&'a str>,
    pub converged: bool,
    pub hbar: f64,
    pub m_eff: &'a [f64],
    pub omega_sq: &'a [f64],
    pub b_diagonal: Vec<f64>,
    pub b_entangled: &'a Mat,
    pub log_norm: f64,
    pub residual: f64,
    pub e0: f64,
    pub zpe_oracle: Option<f64>,
}

pub fn state_json(config_hash: u64, r: &StateReport<'_>) -> String {
    let mut fields = vec![
        ("version", JVal::Str(VERSION.into())),
        ("config_hash", JVal::Str(format!("{config_hash:016x}"))),
        ("method", JVal::Str(r.method.into())),
    ];
    if let Some(sv) = r.solver {
        fields.push(("solver", JVal::Str(sv.into())));
    }
    fields.extend([
        ("converged", JVal::Bool(r.converged)),
        ("hbar", JVal::F64(r.hbar)),
        ("m_eff", f64_arr(r.m_eff)),
        ("omega_sq", f64_arr(r.omega_sq)),
        ("b_diagonal", f64_arr(&r.b_diagonal)),
        ("b_entangled", mat_arr(r.b_entangled)),
        ("log_norm", JVal::F64(r.log_norm)),
        ("residual", JVal::F64(r.residual)),
        ("e0", JVal::F64(r.e0)),
        ("zpe_oracle", JVal::MaybeF64(r.zpe_oracle)),
    ]);
    JVal::Obj(fields).to_document()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn float_format_is_17_significant_digits() {
        assert_eq!(fmt_f64(1.0), "1.0000000000000000e0");
        assert_eq!(fmt_f64(-0.5), "-5.0000000000000000e-1");
        assert_eq!(fmt_f64(f64::NAN), "nan");
        // Round-trips.
        let x = 0.1 + 0.2;
        assert_eq!(fmt_f64(x).parse::<f64>().unwrap(), x);
    }

    #[test]
    fn fnv_vector() {
        // Known FNV-1a test vectors.
        assert_eq!(fnv1a64(b""), 0xcbf29ce484222325);
        assert_eq!(fnv1a64(b"a"), 0xaf63dc4c8601ec8c);
    }

    #[test]
    fn json_escaping_and_layout() {
        let doc = JVal::Obj(vec![
            ("name", JVal::Str("a\"b".into())),
            ("xs", f64_arr(&[1.0])),
            ("none", JVal::MaybeF64(None)),
        ])
        .to_document();
        assert!(doc.contains("\"a\\\"b\""));
        assert!(doc.contains("1.0000000000000000e0"));
        assert!(doc.contains("\"none\": null"));
        assert!(doc.ends_with('\n'));
    }

    #[test]
    fn csv_quoting() {
        assert_eq!(csv_field("plain"), "plain");
        assert_eq!(csv_field("a,b"), "\"a,b\"");
        assert_eq!(csv_field("q\"q"), "\"q\"\"q\"");
    }
}
