//! Canonical JSON report serialization.
//!
//! Reports must be byte-identical across runs with the same configuration,
//! so the writer is hand-rolled: fixed field order, floats always printed
//! with 17 significant digits (`{:.16e}`), optional fields omitted entirely
//! when absent. Reading goes through `serde_json` and restores the exact
//! field values (17 digits round-trip `f64` losslessly).

use invp_core::sample::McEcho;
use invp_core::{PValueReport, ScalarOrPair};
use std::fmt::Write as _;

/// Configuration echo appended to every report for reproducibility.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct ConfigEcho {
    /// `(key, value)` pairs in emission order.
    pub entries: Vec<(String, String)>,
}

fn fmt_f64(x: f64) -> String {
    // 17 significant digits in scientific notation: lossless and stable.
    format!("{:.16e}", x)
}

fn fmt_scalar_or_pair(v: &ScalarOrPair) -> String {
    match v {
        ScalarOrPair::Scalar(x) => fmt_f64(*x),
        ScalarOrPair::Pair(a, b) => format!("[{},{}]", fmt_f64(*a), fmt_f64(*b)),
    }
}

fn json_escape(s: &str) -> String {
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

/// Render a report (plus the run's configuration echo) as canonical JSON.
pub fn render_report(report: Option<&PValueReport>, config: &ConfigEcho) -> String {
    let mut fields: Vec<(String, String)> = Vec::new();
    if let Some(r) = report {
        fields.push((
            "statistic_name".into(),
            format!("\"{}\"", json_escape(&r.statistic_name)),
        ));
        fields.push(("t_observed".into(), fmt_scalar_or_pair(&r.t_observed)));
        fields.push(("p_invariant".into(), fmt_f64(r.p_invariant)));
        if let Some(p) = r.p_plain {
            fields.push(("p_plain".into(), fmt_f64(p)));
        }
        if let Some(p) = r.p_measured {
            fields.push(("p_measured".into(), fmt_f64(p)));
        }
        if let Some(p) = r.p_tail {
            fields.push(("p_tail".into(), fmt_f64(p)));
        }
        if let Some(p) = r.p_asymptotic {
            fields.push(("p_asymptotic".into(), fmt_f64(p)));
        }
        if let Some(mc) = &r.mc {
            fields.push((
                "mc_standard_error".into(),
                fmt_f64(mc.mc_standard_error),
            ));
            fields.push(("n_sim".into(), format!("{}", mc.n_sim)));
            fields.push(("seed".into(), format!("{}", mc.seed)));
            fields.push(("chunk_size".into(), format!("{}", mc.chunk_size)));
            if let Some(bw) = &mc.bandwidth {
                fields.push(("bandwidth".into(), fmt_scalar_or_pair(bw)));
            }
            fields.push((
                "singular_draws".into(),
                format!("{}", mc.singular_draws),
            ));
        }
    }
    let mut out = String::from("{\n");
    for (k, v) in &fields {
        let _ = writeln!(out, "  \"{}\": {},", k, v);
    }
    out.push_str("  \"config\": {\n");
    for (i, (k, v)) in config.entries.iter().enumerate() {
        let comma = if i + 1 == config.entries.len() { "" } else { "," };
        let _ = writeln!(out, "    \"{}\": \"{}\"{}", json_escape(k), json_escape(v), comma);
    }
    out.push_str("  }\n}\n");
    out
}

/// Parse a rendered report back into its typed form (`None` when the file
/// carries only a configuration echo).
pub fn parse_report(text: &str) -> Result<Option<PValueReport>, String> {
    let value: serde_json::Value =
        serde_json::from_str(text).map_err(|e| format!("invalid report JSON: {e}"))?;
    let obj = value.as_object().ok_or("report is not a JSON object")?;
    if !obj.contains_key("statistic_name") {
        return Ok(None);
    }
    let get_f64 = |key: &str| -> Option<f64> { obj.get(key).and_then(|v| v.as_f64()) };
    let scalar_or_pair = |key: &str| -> Result<Option<ScalarOrPair>, String> {
        match obj.get(key) {
            None => Ok(None),
            Some(v) => {
                if let Some(x) = v.as_f64() {
                    Ok(Some(ScalarOrPair::Scalar(x)))
                } else if let Some(arr) = v.as_array() {
                    if arr.len() != 2 {
                        return Err(format!("{key} must have two components"));
                    }
                    let a = arr[0].as_f64().ok_or("non-numeric component")?;
                    let b = arr[1].as_f64().ok_or("non-numeric component")?;
                    Ok(Some(ScalarOrPair::Pair(a, b)))
                } else {
                    Err(format!("{key} has unexpected type"))
                }
            }
        }
    };
    let statistic_name = obj
        .get("statistic_name")
        .and_then(|v| v.as_str())
        .ok_or("missing statistic_name")?
        .to_string();
    let t_observed = scalar_or_pair("t_observed")?.ok_or("missing t_observed")?;
    let p_invariant = get_f64("p_invariant").ok_or("missing p_invariant")?;
    let mc = if obj.contains_key("n_sim") {
        Some(McEcho {
            mc_standard_error: get_f64("mc_standard_error").ok_or("missing mc_standard_error")?,
            n_sim: obj
                .get("n_sim")
                .and_then(|v| v.as_u64())
                .ok_or("missing n_sim")? as usize,
            seed: obj.get("seed").and_then(|v| v.as_u64()).ok_or("missing seed")?,
            chunk_size: obj
                .get("chunk_size")
                .and_then(|v| v.as_u64())
                .ok_or("missing chunk_size")? as usize,
            bandwidth: scalar_or_pair("bandwidth")?,
            singular_draws: obj
                .get("singular_draws")
                .and_then(|v| v.as_u64())
                .ok_or("missing singular_draws")? as usize,
        })
    } else {
        None
    };
    Ok(Some(PValueReport {
        statistic_name,
        t_observed,
        p_invariant,
        p_plain: get_f64("p_plain"),
        p_measured: get_f64("p_measured"),
        p_tail: get_f64("p_tail"),
        p_asymptotic: get_f64("p_asymptotic"),
        mc,
    }))
}
