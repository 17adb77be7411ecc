use qdelay_core::fit::FitResult;
use qdelay_core::units::angular_to_mhz;
use serde_json::{json, Map, Value};

/// JSON number, or a string for non-finite values so they stay visible.
pub fn num(x: f64) -> Value {
    if x.is_finite() {
        json!(x)
    } else if x.is_nan() {
        json!("nan")
    } else if x > 0.0 {
        json!("inf")
    } else {
        json!("-inf")
    }
}

pub fn opt(x: Option<f64>) -> Value {
    x.map(num).unwrap_or(Value::Null)
}

/// Angular rates are reported in cyclic MHz with an `_mhz` suffix; other
/// parameters keep their names and units.
fn external(name: &str, value: f64, stderr: f64, rename: &dyn Fn(&str) -> Option<String>) -> (String, f64, f64) {
    if let Some(n) = rename(name) {
        return (n, angular_to_mhz(value), angular_to_mhz(stderr));
    }
    match name {
        "omega_10" | "gamma_r_10" | "gamma_10" | "gamma_n_10" | "gamma_20" => {
            (format!("{name}_mhz"), angular_to_mhz(value), angular_to_mhz(stderr))
        }
        _ => (name.to_string(), value, stderr),
    }
}

pub fn fit_report(command: &str, device: &str, fit: &FitResult, rename: &dyn Fn(&str) -> Option<String>, extra: Vec<(String, Value)>) -> Value {
    let params: Vec<Value> = fit
        .params
        .iter()
        .map(|p| {
            let (name, value, stderr) = external(&p.name, p.value, p.stderr, rename);
            json!({ "name": name, "value": num(value), "stderr": num(stderr) })
        })
        .collect();
    let mut m = Map::new();
    m.insert("command".into(), json!(command));
    m.insert("device".into(), json!(device));
    m.insert("converged".into(), json!(fit.converged));
    m.insert("n_iter".into(), json!(fit.n_iter));
    m.insert("residual_norm".into(), num(fit.residual_norm));
    m.insert("params".into(), Value::Array(params));
    for (k, v) in extra {
        m.insert(k, v);
    }
    Value::Object(m)
}
