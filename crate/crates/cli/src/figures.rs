//! Curve data and landmark values for the five figures, with the parameter
//! sets of their captions. Plotting is left to external tools.

use std::fs;
use std::path::{Path, PathBuf};

use darboux::ModelParams;
use serde::Serialize;
use serde_json::{json, Value};

use crate::report::{num, CliError, Output, SCHEMA};
use crate::FiguresArgs;

const FIG2_LAMBDAS: [f64; 5] = [0.0, 0.02, 0.04, 0.06, 0.1];
const FIG5_LAMBDAS: [f64; 4] = [0.0, 0.01, 0.02, 0.04];
const EFFECTIVE_LAMBDAS: [f64; 2] = [0.02, 0.0];
const C_N: f64 = 100.0;
const L_FIG4: u32 = 10;

struct Figure {
    header: Vec<String>,
    rows: Vec<Vec<f64>>,
    landmarks: Value,
}

#[derive(Serialize)]
struct Written {
    figure: u8,
    csv: PathBuf,
    sidecar: PathBuf,
    landmarks: Value,
}

fn p(dim: usize, lambda: f64) -> ModelParams {
    ModelParams::new(dim, lambda, 1.0, 1.0).expect("caption parameters are valid")
}

fn grid(a: f64, b: f64, n: usize) -> impl Iterator<Item = f64> {
    (0..n).map(move |k| a + (b - a) * k as f64 / (n - 1) as f64)
}

fn threshold(m: &ModelParams) -> Value {
    serde_json::to_value(m.continuum_threshold()).expect("threshold serializes")
}

fn figure1() -> Figure {
    let m = p(3, 0.1);
    Figure {
        header: vec!["r".into(), "R".into()],
        rows: grid(0.0, 10.0, 401).map(|r| vec![r, m.scalar_curvature(r)]).collect(),
        landmarks: json!({ "N": 3, "lambda": 0.1, "R_origin": m.scalar_curvature(0.0), "R_infinity": 0.0 }),
    }
}

fn figure2() -> Figure {
    let ms: Vec<ModelParams> = FIG2_LAMBDAS.iter().map(|&l| p(3, l)).collect();
    let mut header = vec!["r".to_string()];
    header.extend(FIG2_LAMBDAS.iter().map(|l| format!("U_lambda_{l}")));
    Figure {
        header,
        rows: grid(0.0, 30.0, 601)
            .map(|r| std::iter::once(r).chain(ms.iter().map(|m| m.oscillator_potential(r))).collect())
            .collect(),
        landmarks: json!({
            "omega": 1.0,
            "lambda": FIG2_LAMBDAS,
            "U_infinity": ms.iter().map(threshold).collect::<Vec<_>>(),
        }),
    }
}

/// Effective-potential figure: one `(Q, U)` column pair per `lambda`.
fn effective(
    label: &str,
    landmarks_base: Value,
    potential: impl Fn(&ModelParams, f64) -> Result<f64, CliError>,
    minimum: impl Fn(&ModelParams) -> Result<darboux::EffectiveMinimum, CliError>,
) -> Result<Figure, CliError> {
    let ms: Vec<ModelParams> = EFFECTIVE_LAMBDAS.iter().map(|&l| p(3, l)).collect();
    let mut header = vec!["r".to_string()];
    for l in EFFECTIVE_LAMBDAS {
        header.push(format!("Q_lambda_{l}"));
        header.push(format!("{label}_lambda_{l}"));
    }
    let mut rows = Vec::new();
    for r in grid(0.5, 30.0, 591) {
        let mut row = vec![r];
        for m in &ms {
            row.push(m.flattening_coordinate(r));
            row.push(potential(m, r)?);
        }
        rows.push(row);
    }
    let mut minima = Vec::new();
    for m in &ms {
        let e = minimum(m)?;
        minima.push(json!({ "lambda": m.lambda, "r_min": e.r_min, "u_min": e.u_min, "u_infinity": threshold(m) }));
    }
    let mut landmarks = landmarks_base;
    landmarks["minima"] = Value::Array(minima);
    Ok(Figure { header, rows, landmarks })
}

fn figure3() -> Result<Figure, CliError> {
    effective(
        "U_eff",
        json!({ "N": 3, "omega": 1.0, "c_N": C_N }),
        |m, r| m.classical_effective_potential(C_N, r).map_err(CliError::from),
        |m| m.classical_effective_minimum(C_N).map_err(CliError::from),
    )
}

fn figure4() -> Result<Figure, CliError> {
    effective(
        "U_eff_quantum",
        json!({ "N": 3, "omega": 1.0, "hbar": 1.0, "l": L_FIG4 }),
        |m, r| m.quantum_effective_potential(L_FIG4, r).map_err(CliError::from),
        |m| m.quantum_effective_minimum(L_FIG4).map_err(CliError::from),
    )
}

fn figure5() -> Figure {
    let ms: Vec<ModelParams> = FIG5_LAMBDAS.iter().map(|&l| p(3, l)).collect();
    let mut header = vec!["n".to_string()];
    header.extend(FIG5_LAMBDAS.iter().map(|l| format!("E_lambda_{l}")));
    let e_inf: Vec<Value> = ms.iter().map(threshold).collect();
    Figure {
        header,
        rows: (0..=25u32)
            .map(|n| std::iter::once(f64::from(n)).chain(ms.iter().map(|m| m.closed_form_energy(n))).collect())
            .collect(),
        landmarks: json!({
            "N": 3,
            "omega": 1.0,
            "hbar": 1.0,
            "lambda": FIG5_LAMBDAS,
            "E_0": ms.iter().map(|m| m.closed_form_energy(0)).collect::<Vec<_>>(),
            "E_infinity": e_inf,
        }),
    }
}

fn build(which: u8) -> Result<Figure, CliError> {
    match which {
        1 => Ok(figure1()),
        2 => Ok(figure2()),
        3 => figure3(),
        4 => figure4(),
        5 => Ok(figure5()),
        other => Err(CliError::Usage(format!("no figure {other}"))),
    }
}

fn write_figure(dir: &Path, which: u8, fig: &Figure) -> Result<Written, CliError> {
    let csv_path = dir.join(format!("figure{which}.csv"));
    let mut t = csv::Writer::from_path(&csv_path)?;
    t.write_record(&fig.header)?;
    for row in &fig.rows {
        t.write_record(row.iter().map(|x| num(*x)))?;
    }
    t.flush()?;
    let sidecar = dir.join(format!("figure{which}.json"));
    let body = json!({ "schema": SCHEMA, "figure": which, "landmarks": fig.landmarks });
    fs::write(&sidecar, serde_json::to_string_pretty(&body)? + "\n")?;
    Ok(Written { figure: which, csv: csv_path, sidecar, landmarks: fig.landmarks.clone() })
}

pub fn run(args: &FiguresArgs, out: &Output) -> Result<bool, CliError> {
    let dir = out.path.clone().unwrap_or_else(|| PathBuf::from("figures"));
    fs::create_dir_all(&dir).map_err(|e| CliError::Run(format!("{}: {e}", dir.display())))?;
    let mut which = if args.which.is_empty() { vec![1, 2, 3, 4, 5] } else { args.which.clone() };
    which.sort_unstable();
    which.dedup();
    let mut written = Vec::new();
    for k in which {
        written.push(write_figure(&dir, k, &build(k)?)?);
    }
    // the summary goes to stdout; --out names the directory here
    let summary = Output { path: None, format: crate::Format::Json, seed: out.seed, timestamp: out.timestamp };
    summary.emit("figures", true, &written, |_| Ok(()))?;
    Ok(true)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn caption_landmarks() {
        let f1 = figure1();
        assert!((f1.landmarks["R_origin"].as_f64().unwrap() + 1.2).abs() < 1e-12);
        let f3 = figure3().unwrap();
        let m = &f3.landmarks["minima"][0];
        assert_eq!(format!("{:.2}", m["r_min"].as_f64().unwrap()), "3.49");
        assert_eq!(format!("{:.1}", m["u_min"].as_f64().unwrap()), "8.2");
        assert_eq!(m["u_infinity"].as_f64().unwrap(), 25.0);
        assert_eq!(f3.landmarks["minima"][1]["u_infinity"], "inf");
        let f5 = figure5();
        let e0: Vec<String> =
            f5.landmarks["E_0"].as_array().unwrap().iter().map(|v| format!("{:.2}", v.as_f64().unwrap())).collect();
        assert_eq!(e0, ["1.50", "1.48", "1.46", "1.41"]);
        assert_eq!(f5.rows.len(), 26);
        assert!(f5.rows.iter().all(|r| r.len() == 5));
    }

    #[test]
    fn figure2_asymptotes() {
        let f = figure2();
        let u: Vec<Value> = f.landmarks["U_infinity"].as_array().unwrap().clone();
        assert_eq!(u[0], "inf");
        assert_eq!(format!("{:.2}", u[3].as_f64().unwrap()), "8.33");
    }
}
