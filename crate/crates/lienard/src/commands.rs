//! One function per subcommand. Each returns the artifact text and a status.

use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;

use lienard_core::charts;
use lienard_core::classify::{self, PredictedDirection, Prediction, TheoremCase, VerificationReport};
use lienard_core::fractal::{self, DimensionEstimate};
use lienard_core::model::{self, ValidSystem};
use lienard_core::relation::{self, Orbit, RelationError, Termination};
use num_rational::Ratio;
use serde_json::{json, Value};

use crate::config::{parse_coefficient, Command, Format, RunConfig};
use crate::error::CliError;
use crate::svg;
use crate::system::{self, SystemDesc};

#[derive(Debug, Clone, PartialEq)]
pub struct Outcome {
    /// CSV, JSON or SVG text
    pub body: String,
    /// one human-readable line
    pub summary: String,
    pub status: i32,
}

impl Outcome {
    fn ok(body: String, summary: String) -> Self {
        Outcome { body, summary, status: 0 }
    }
}

pub fn run(cfg: &RunConfig) -> Result<Outcome, CliError> {
    cfg.knobs.check()?;
    match cfg.command {
        Command::Validate => validate(cfg),
        Command::Classify => classify_cmd(cfg),
        Command::Orbit => orbit(cfg),
        Command::Dim => dim(cfg),
        Command::Portrait => portrait(cfg),
        Command::Verify => verify(cfg),
        Command::Sweep => sweep(cfg),
        Command::Balance => balance(cfg),
    }
}

/// Shortest round-trip text, in exponent form outside `[1e-4, 1e15)`.
pub fn num(x: f64) -> String {
    let a = x.abs();
    if x == 0.0 || !x.is_finite() || (1e-4..1e15).contains(&a) {
        format!("{x}")
    } else {
        format!("{x:e}")
    }
}

fn opt_num(x: Option<f64>) -> String {
    x.map(num).unwrap_or_default()
}

fn ratio_text(r: Ratio<i64>) -> String {
    if *r.denom() == 1 {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

fn ratio_value(r: Ratio<i64>) -> f64 {
    *r.numer() as f64 / *r.denom() as f64
}

fn pretty(v: &Value) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("json serializes");
    s.push('\n');
    s
}

fn with_config(cfg: &RunConfig, result: Value) -> String {
    pretty(&json!({ "config": cfg.to_json(), "result": result }))
}

fn csv_text(cfg: &RunConfig, comments: &[String], header: &[&str], rows: &[Vec<String>]) -> Result<String, CliError> {
    let mut out = format!("# config: {}\n", serde_json::to_string(&cfg.to_json()).expect("json serializes"));
    for c in comments {
        out.push_str("# ");
        out.push_str(c);
        out.push('\n');
    }
    let mut w = csv::Writer::from_writer(Vec::new());
    let io = |e: csv::Error| CliError::Input(e.to_string());
    w.write_record(header).map_err(io)?;
    for r in rows {
        w.write_record(r).map_err(io)?;
    }
    let bytes = w.into_inner().map_err(|e| CliError::Input(e.to_string()))?;
    out.push_str(&String::from_utf8(bytes).expect("csv is utf-8"));
    Ok(out)
}

fn unsupported(cfg: &RunConfig) -> CliError {
    CliError::Input(format!("format {:?} is not available for {:?}", cfg.format, cfg.command))
}

fn valid_system(desc: &SystemDesc) -> Result<ValidSystem, CliError> {
    Ok(ValidSystem::new(desc.build()?)?)
}

fn validate(cfg: &RunConfig) -> Result<Outcome, CliError> {
    let desc = cfg.system()?;
    let sys = desc.build()?;
    let report = model::validate(&sys);
    let feas = charts::canard_at_infinity_feasible(&sys);
    let result = json!({
        "system": desc.label(),
        "ok": report.ok,
        "violations": report.violations.iter().map(|v| v.describe()).collect::<Vec<_>>(),
        "case": format!("{:?}", sys.case()),
        "profile": report.ok.then(|| model::parity_profile(&sys)),
        "canard_at_infinity": { "feasible": feas.feasible, "reason": feas.reason },
    });
    if cfg.format != Format::Json {
        return Err(unsupported(cfg));
    }
    let summary = if report.ok { format!("{}: valid", desc.label()) } else { format!("{}: {}", desc.label(), report.summary()) };
    Ok(Outcome { body: with_config(cfg, result), summary, status: if report.ok { 0 } else { 2 } })
}

pub fn summary_line(label: &str, p: &Prediction) -> String {
    if p.theorem_case == TheoremCase::Symmetric {
        return p.note.clone();
    }
    match p.predicted_dim {
        Some(d) => format!("{label}: {} dim {} direction {:?}", p.theorem_case, ratio_text(d), p.direction),
        None => format!("{label}: {} ({})", p.theorem_case, p.note),
    }
}

pub fn prediction_json(vs: &ValidSystem, p: &Prediction) -> Value {
    json!({
        "theorem_case": p.theorem_case.to_string(),
        "predicted_dim": p.predicted_dim.map(ratio_text),
        "predicted_dim_value": p.predicted_dim.map(ratio_value),
        "gap_exponent": p.gap_exponent().map(ratio_text),
        "direction": p.direction,
        "coefficient_direction": p.coefficient_direction,
        "i_star": p.i_star,
        "i_behavior": p.i_behavior,
        "nondegenerate_predicted": p.nondegenerate_predicted,
        "numerically_unresolved": p.numerically_unresolved,
        "trichotomy_consistent": classify::trichotomy_consistent(vs, p, classify::ZERO_REL),
        "note": p.note,
    })
}

fn classify_cmd(cfg: &RunConfig) -> Result<Outcome, CliError> {
    let desc = cfg.system()?;
    let vs = valid_system(desc)?;
    let p = classify::classify(&vs, &cfg.knobs.limit_options())?;
    if cfg.format != Format::Json {
        return Err(unsupported(cfg));
    }
    let summary = summary_line(&desc.label(), &p);
    let mut result = prediction_json(&vs, &p);
    result["summary"] = json!(summary);
    result["system"] = json!(desc.label());
    Ok(Outcome::ok(with_config(cfg, result), summary))
}

/// Orbit in `y`, or in the chart variable with `--compactified`. A fixed point
/// is returned as a two-term orbit.
fn make_orbit(cfg: &RunConfig, vs: &ValidSystem) -> Result<Orbit, CliError> {
    let opts = cfg.knobs.orbit_options();
    let res = if cfg.compactified {
        match relation::resolve_direction(vs, cfg.knobs.direction.into(), cfg.knobs.y0, &opts)? {
            None => {
                let r0 = classify::orbit_start(vs, cfg.knobs.y0, &opts)?;
                relation::generate_orbit_compactified(vs, r0, Some(0.0), relation::OrbitDirection::ForwardS, &opts)
            }
            Some(d) => {
                let r0 = classify::orbit_start(vs, cfg.knobs.y0, &opts)?;
                relation::generate_orbit_compactified(vs, r0, None, d, &opts)
            }
        }
    } else {
        relation::generate_orbit(vs, Some(cfg.knobs.y0), cfg.knobs.direction.into(), &opts)
    };
    match res {
        Ok(o) => Ok(o),
        Err(RelationError::NotDivergent { orbit }) if orbit.termination == Termination::FixedPoint && orbit.len() <= 2 => Ok(*orbit),
        Err(e) => Err(e.into()),
    }
}

fn orbit(cfg: &RunConfig) -> Result<Outcome, CliError> {
    let desc = cfg.system()?;
    let vs = valid_system(desc)?;
    let o = make_orbit(cfg, &vs)?;
    let gaps = o.gaps();
    let summary = format!(
        "{}: {} terms, {:?}, termination {:?}",
        desc.label(),
        o.len(),
        o.direction,
        o.termination
    );
    let body = match cfg.format {
        Format::Csv => {
            let rows: Vec<Vec<String>> = (0..o.len())
                .map(|l| {
                    vec![
                        l.to_string(),
                        num(o.y[l]),
                        num(o.r[l]),
                        gaps.get(l).map(|g| num(*g)).unwrap_or_default(),
                        o.residuals.get(l).map(|g| num(*g)).unwrap_or_default(),
                    ]
                })
                .collect();
            let comments = vec![format!("direction: {:?}, variable: {:?}, termination: {:?}", o.direction, o.variable, o.termination)];
            csv_text(cfg, &comments, &["l", "y_l", "r_l", "gap", "residual"], &rows)?
        }
        Format::Json => with_config(cfg, json!({ "system": desc.label(), "orbit": o })),
        Format::Svg => {
            let pts: Vec<(f64, f64)> = gaps.iter().enumerate().map(|(l, g)| (o.r[l], *g)).collect();
            let fit = fractal::dimension_gap_law(&o.r).ok().map(|e| gap_fit(&o, &e));
            svg::loglog(
                &format!("gaps of {}", desc.label()),
                "r_l",
                "r_l - r_(l+1)",
                &[svg::Series { label: "gap", points: &pts }],
                fit.as_ref(),
                &serde_json::to_string(&cfg.to_json()).expect("json serializes"),
            )
        }
    };
    Ok(Outcome::ok(body, summary))
}

fn gap_fit(o: &Orbit, e: &DimensionEstimate) -> svg::Fit {
    let (l0, l1) = (e.fit_window.0 as usize, e.fit_window.1 as usize);
    let xs: Vec<f64> = (l0..l1.min(o.len() - 1)).map(|l| o.r[l].log10()).collect();
    let ys: Vec<f64> = (l0..l1.min(o.len() - 1)).map(|l| (o.r[l] - o.r[l + 1]).log10()).collect();
    let (mx, my) = (mean(&xs), mean(&ys));
    svg::Fit {
        label: format!("slope {:.4}", e.slope),
        slope: e.slope,
        intercept: my - e.slope * mx,
        x_range: (o.r[l1.min(o.len() - 1)], o.r[l0]),
    }
}

fn mean(v: &[f64]) -> f64 {
    v.iter().sum::<f64>() / v.len().max(1) as f64
}

fn read_points(path: &std::path::Path) -> Result<Vec<f64>, CliError> {
    let text = system::read(path)?;
    let mut r = csv::ReaderBuilder::new().has_headers(false).comment(Some(b'#')).flexible(true).from_reader(text.as_bytes());
    let mut pts = Vec::new();
    for (i, rec) in r.records().enumerate() {
        let rec = rec.map_err(|e| CliError::Input(e.to_string()))?;
        let Some(field) = rec.get(0) else { continue };
        match field.trim().parse::<f64>() {
            Ok(v) => pts.push(v),
            Err(_) if i == 0 => {}
            Err(_) => return Err(CliError::Input(format!("{}: row {} is not a number", path.display(), i + 1))),
        }
    }
    Ok(pts)
}

/// Orbit for dimension work: compactified, in the predicted direction.
fn dimension_orbit(cfg: &RunConfig, vs: &ValidSystem) -> Result<Orbit, CliError> {
    let mut c = cfg.clone();
    c.compactified = true;
    make_orbit(&c, vs)
}

fn dim(cfg: &RunConfig) -> Result<Outcome, CliError> {
    let (label, points) = match (&cfg.input, &cfg.system) {
        (Some(p), _) => (p.display().to_string(), read_points(p)?),
        (None, Some(desc)) => {
            let vs = valid_system(desc)?;
            (desc.label(), dimension_orbit(cfg, &vs)?.r)
        }
        (None, None) => return Err(CliError::Input("dim needs --input or --system".into())),
    };
    let fail = |e: fractal::FractalError| match e {
        fractal::FractalError::NotDecreasing { .. } | fractal::FractalError::TooFewPoints { .. } => CliError::Input(e.to_string()),
        other => CliError::numerical("fractal", other),
    };
    let nb = fractal::dimension_neighborhood(&points, cfg.knobs.delta_decades).map_err(fail)?;
    let gl = fractal::dimension_gap_law(&points).map_err(fail)?;
    let nd = fractal::nondegeneracy_diagnostic(&points, nb.value.clamp(0.0, 1.0), cfg.knobs.delta_decades).ok();
    let summary = format!(
        "{label}: neighborhood {} ± {}, gap law {} ± {}",
        num(nb.value),
        num(nb.stderr),
        num(gl.value),
        num(gl.stderr)
    );
    let body = match cfg.format {
        Format::Csv => {
            let comments = vec![
                format!("neighborhood: d={} stderr={} window=[{}, {}]", num(nb.value), num(nb.stderr), num(nb.fit_window.0), num(nb.fit_window.1)),
                format!("gap_law: d={} stderr={} exponent={}", num(gl.value), num(gl.stderr), num(gl.slope)),
                match &nd {
                    Some(n) => format!("nondegeneracy: ratio={} nondegenerate_empirical={}", num(n.ratio), n.nondegenerate),
                    None => "nondegeneracy: unavailable".into(),
                },
            ];
            let rows: Vec<Vec<String>> = nb.curve.iter().map(|(d, u)| vec![num(*d), num(*u)]).collect();
            csv_text(cfg, &comments, &["delta", "length"], &rows)?
        }
        Format::Json => with_config(
            cfg,
            json!({ "source": label, "points": points.len(), "neighborhood": nb, "gap_law": gl, "nondegeneracy": nd }),
        ),
        Format::Svg => {
            let xs: Vec<f64> = nb.curve.iter().map(|p| p.0.log10()).collect();
            let ys: Vec<f64> = nb.curve.iter().map(|p| p.1.log10()).collect();
            let fit = svg::Fit {
                label: format!("slope 1 - d, d = {:.4}", nb.value),
                slope: nb.slope,
                intercept: mean(&ys) - nb.slope * mean(&xs),
                x_range: nb.fit_window,
            };
            svg::loglog(
                &format!("|U_delta| for {label}"),
                "delta",
                "|U_delta|",
                &[svg::Series { label: "|U_delta|", points: &nb.curve }],
                Some(&fit),
                &serde_json::to_string(&cfg.to_json()).expect("json serializes"),
            )
        }
    };
    Ok(Outcome::ok(body, summary))
}

fn portrait(cfg: &RunConfig) -> Result<Outcome, CliError> {
    let desc = cfg.system()?;
    let sys = desc.build()?;
    let catalog = charts::singularity_catalog(&sys).map_err(|e| CliError::numerical("charts", e))?;
    let feas = charts::canard_at_infinity_feasible(&sys);
    if cfg.format != Format::Json {
        return Err(unsupported(cfg));
    }
    let entries: Vec<Value> = catalog
        .iter()
        .map(|s| {
            json!({
                "chart": s.chart.to_string(),
                "location": s.location,
                "eigenvalues": s.eigenvalues,
                "numeric_eigenvalues": s.numeric_eigenvalues,
                "kind": s.kind,
                "slow_flow": s.slow_flow,
            })
        })
        .collect();
    let summary = format!("{}: {} singularities at infinity, canard cycles {}", desc.label(), entries.len(), if feas.feasible { "possible" } else { "impossible" });
    let result = json!({
        "system": desc.label(),
        "case": format!("{:?}", sys.case()),
        "weights": charts::degree(&sys),
        "canard_at_infinity": { "feasible": feas.feasible, "reason": feas.reason },
        "singularities": entries,
    });
    Ok(Outcome::ok(with_config(cfg, result), summary))
}

pub const VERIFY_HEADER: [&str; 16] = [
    "id",
    "case",
    "predicted_dim",
    "direction",
    "dim_neighborhood",
    "stderr_neighborhood",
    "dim_gap_law",
    "stderr_gap_law",
    "gap_exponent_predicted",
    "gap_exponent_fitted",
    "nondegeneracy_ratio",
    "ratio_spread",
    "orbit_len",
    "termination",
    "max_residual",
    "status",
];

#[derive(Debug, Clone, PartialEq)]
pub struct VerifyRow {
    pub id: String,
    pub prediction: Option<Prediction>,
    pub report: Option<VerificationReport>,
    pub status: String,
    pub exit: i32,
}

impl VerifyRow {
    pub fn fields(&self) -> Vec<String> {
        let p = self.prediction.as_ref();
        let r = self.report.as_ref();
        vec![
            self.id.clone(),
            p.map(|p| p.theorem_case.to_string()).unwrap_or_default(),
            // decimal in CSV; JSON keeps the exact fraction
            opt_num(p.and_then(|p| p.predicted_dim).map(ratio_value)),
            p.map(|p| format!("{:?}", p.direction)).unwrap_or_default(),
            opt_num(r.map(|r| r.neighborhood.value)),
            opt_num(r.map(|r| r.neighborhood.stderr)),
            opt_num(r.map(|r| r.gap_law.value)),
            opt_num(r.map(|r| r.gap_law.stderr)),
            opt_num(p.and_then(|p| p.gap_exponent()).map(ratio_value)),
            opt_num(r.map(|r| r.fitted_gap_exponent)),
            opt_num(r.and_then(|r| r.nondegeneracy).map(|n| n.ratio)),
            opt_num(r.and_then(|r| r.ratio_spread)),
            r.map(|r| r.orbit_len.to_string()).unwrap_or_default(),
            r.map(|r| format!("{:?}", r.termination)).unwrap_or_default(),
            opt_num(r.map(|r| r.max_residual)),
            self.status.clone(),
        ]
    }

    fn json(&self) -> Value {
        json!({
            "id": self.id,
            "theorem_case": self.prediction.as_ref().map(|p| p.theorem_case.to_string()),
            "predicted_dim": self.prediction.as_ref().and_then(|p| p.predicted_dim).map(ratio_text),
            "direction": self.prediction.as_ref().map(|p| p.direction),
            "report": self.report,
            "status": self.status,
        })
    }
}

/// Classification and verification of one system; failures end up in `status`.
pub fn verify_one(cfg: &RunConfig, desc: &SystemDesc) -> VerifyRow {
    let mut row = VerifyRow { id: desc.label(), prediction: None, report: None, status: String::new(), exit: 0 };
    let vs = match desc.build().and_then(|s| ValidSystem::new(s).map_err(CliError::from)) {
        Ok(vs) => vs,
        Err(e) => {
            row.status = e.to_string();
            row.exit = e.exit_code();
            return row;
        }
    };
    let p = match classify::classify(&vs, &cfg.knobs.limit_options()) {
        Ok(p) => p,
        Err(e) => {
            let e = CliError::from(e);
            row.status = e.to_string();
            row.exit = e.exit_code();
            return row;
        }
    };
    let mut p = p;
    if cfg.knobs.direction != crate::config::Direction::Auto && p.direction != PredictedDirection::Fixed {
        p.direction = match cfg.knobs.direction {
            crate::config::Direction::Forward => PredictedDirection::ForwardS,
            _ => PredictedDirection::InverseS,
        };
    }
    match classify::verify(&vs, &p, cfg.knobs.max_iter, &cfg.knobs.verify_options()) {
        Ok(r) => {
            row.status = "ok".into();
            row.report = Some(r);
        }
        Err(classify::VerifyError::FixedPoint) => row.status = classify::VerifyError::FixedPoint.to_string(),
        Err(e) => {
            let e = CliError::from(e);
            row.status = e.to_string();
            row.exit = e.exit_code();
        }
    }
    row.prediction = Some(p);
    row
}

fn verify_body(cfg: &RunConfig, rows: &[VerifyRow]) -> Result<String, CliError> {
    match cfg.format {
        Format::Csv => csv_text(cfg, &[], &VERIFY_HEADER, &rows.iter().map(VerifyRow::fields).collect::<Vec<_>>()),
        Format::Json => Ok(with_config(cfg, Value::Array(rows.iter().map(VerifyRow::json).collect()))),
        Format::Svg => Err(unsupported(cfg)),
    }
}

fn verify(cfg: &RunConfig) -> Result<Outcome, CliError> {
    let desc = cfg.system()?;
    let row = verify_one(cfg, desc);
    if row.exit == 1 || row.exit == 2 {
        return Err(if row.exit == 1 { CliError::Input(row.status) } else { CliError::Assumption(row.status) });
    }
    let summary = match (&row.prediction, &row.report) {
        (Some(p), Some(r)) => format!(
            "{}: {} predicted {} neighborhood {} gap law {}",
            row.id,
            p.theorem_case,
            p.predicted_dim.map(ratio_text).unwrap_or_default(),
            num(r.neighborhood.value),
            num(r.gap_law.value)
        ),
        _ => format!("{}: {}", row.id, row.status),
    };
    let body = verify_body(cfg, std::slice::from_ref(&row))?;
    Ok(Outcome { body, summary, status: row.exit })
}

/// Verifies every system of the batch on `jobs` threads; rows keep the input order.
fn sweep(cfg: &RunConfig) -> Result<Outcome, CliError> {
    let path = cfg.batch.as_ref().ok_or_else(|| CliError::Input("sweep needs --batch".into()))?;
    let descs = system::parse_batch(&system::read(path)?)?;
    let slots: Vec<Mutex<Option<VerifyRow>>> = descs.iter().map(|_| Mutex::new(None)).collect();
    let next = AtomicUsize::new(0);
    std::thread::scope(|s| {
        for _ in 0..cfg.jobs.max(1).min(descs.len().max(1)) {
            s.spawn(|| loop {
                let i = next.fetch_add(1, Ordering::Relaxed);
                let Some(desc) = descs.get(i) else { break };
                let row = verify_one(cfg, desc);
                *slots[i].lock().expect("slot lock") = Some(row);
            });
        }
    });
    let rows: Vec<VerifyRow> = slots.into_iter().map(|m| m.into_inner().expect("slot lock").expect("every slot filled")).collect();
    let failed = rows.iter().filter(|r| r.exit != 0).count();
    let body = verify_body(cfg, &rows)?;
    let summary = format!("{} systems, {} failed", rows.len(), failed);
    Ok(Outcome { body, summary, status: if failed == 0 { 0 } else { rows.iter().map(|r| r.exit).max().unwrap_or(0) } })
}

fn balance(cfg: &RunConfig) -> Result<Outcome, CliError> {
    let desc = cfg.system()?;
    let sys = desc.build()?;
    let name = cfg.coefficient.as_deref().ok_or_else(|| CliError::Input("balance needs --coefficient".into()))?;
    let coef = parse_coefficient(name)?;
    let bracket = cfg.bracket.ok_or_else(|| CliError::Input("balance needs --bracket LO HI".into()))?;
    let r = classify::balance_search(&sys, coef, bracket, &cfg.knobs.limit_options(), cfg.knobs.orbit_options().balance_rel)?;
    if cfg.format != Format::Json {
        return Err(unsupported(cfg));
    }
    let tuned = SystemDesc::from_system(&r.system, desc.id.clone());
    let summary = format!("{}: {name} = {} gives I_* = {}", desc.label(), num(r.value), num(r.i_star));
    let result = json!({
        "coefficient": name,
        "value": r.value,
        "i_star": r.i_star,
        "scale": r.scale,
        "evaluations": r.evaluations,
        "system": tuned,
    });
    Ok(Outcome::ok(with_config(cfg, result), summary))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn numbers_round_trip() {
        for x in [0.0, 0.5, 1e-250, -3.25e20, 123.456, 1e-4, f64::MIN_POSITIVE] {
            assert_eq!(num(x).parse::<f64>().unwrap(), x);
        }
        assert_eq!(num(1e-250), "1e-250");
        assert_eq!(num(0.5), "0.5");
    }

    #[test]
    fn symmetric_summary() {
        let mut cfg = RunConfig::new(Command::Classify);
        cfg.system = Some(SystemDesc::parse(r#"{"n": 1, "m": 3, "a": {"1": 1}}"#).unwrap());
        let out = run(&cfg).unwrap();
        assert_eq!(out.summary, "Symmetric: S is the identity");
        assert!(out.body.contains("Symmetric: S is the identity"));
    }

    #[test]
    fn invalid_system_exits_with_two() {
        let mut cfg = RunConfig::new(Command::Validate);
        cfg.system = Some(SystemDesc::parse(r#"{"n": 1, "m": 2, "a": {"1": 1}}"#).unwrap());
        assert_eq!(run(&cfg).unwrap().status, 2);
        cfg.command = Command::Classify;
        assert_eq!(run(&cfg).unwrap_err().exit_code(), 2);
    }

    #[test]
    fn orbit_csv_columns() {
        let mut cfg = RunConfig::new(Command::Orbit);
        cfg.system = Some(SystemDesc::parse(r#"{"n": 3, "m": 1, "b": {"2": 1, "3": -0.5}}"#).unwrap());
        cfg.knobs.max_iter = 20;
        let out = run(&cfg).unwrap();
        let mut lines = out.body.lines();
        assert!(lines.next().unwrap().starts_with("# config: {"));
        assert!(out.body.contains("\nl,y_l,r_l,gap,residual\n"));
        assert_eq!(out.body.lines().filter(|l| !l.starts_with('#')).count(), 22);
        assert_eq!(run(&cfg).unwrap(), out);
    }
}
