//! Browser bindings for three operations: sampling the Plancherel density,
//! building a Heisenberg fiber window, and running lattice design on a config.

use nilframe::cli::{run_command, Command};
use nilframe::config::parse_config_str;
use nilframe::fixtures;
use nilframe::lattice::{fiber_lattice, QuasiLatticeParams};
use nilframe::rational::parse_rational;
use nilframe::spectral::det_b;
use nilframe::verify::{
    fiber_parseval_defect, sample_window, standard_x_profiles, window_tiling, TruncationSpec, XGrid,
};
use nilframe::window::synthesize_window;
use serde_json::json;
use wasm_bindgen::prelude::*;

fn js(r: Result<String, String>) -> Result<String, JsValue> {
    r.map_err(|e| JsValue::from_str(&e))
}

/// Bundled config text for example 1, 2 or 3.
#[wasm_bindgen]
pub fn example_config(which: u8) -> Result<String, JsValue> {
    js(fixtures::example_json(which)
        .map(str::to_owned)
        .ok_or_else(|| format!("no example {which}")))
}

/// `|det B(λ)|` on an `nx × ny` grid over the first two λ-axes of the
/// spectral box. Further axes are held at the box centre.
#[wasm_bindgen]
pub fn density_grid(config: &str, nx: usize, ny: usize) -> Result<String, JsValue> {
    js(density_grid_json(config, nx, ny))
}

/// Window, volume, tiling and truncated Parseval defect for the Heisenberg
/// fiber at `λ` with `a = b = 1` and the given `q` (a `p/q` string).
#[wasm_bindgen]
pub fn heisenberg_window(lambda: f64, q: &str, trunc: u32) -> Result<String, JsValue> {
    js(heisenberg_window_json(lambda, q, trunc))
}

/// The `design` report for a JSON config.
#[wasm_bindgen]
pub fn design_report(config: &str) -> Result<String, JsValue> {
    js(design_report_json(config))
}

pub fn density_grid_json(config: &str, nx: usize, ny: usize) -> Result<String, String> {
    if nx == 0 || ny == 0 || nx * ny > 250_000 {
        return Err("grid must have between 1 and 250000 cells".into());
    }
    let cfg = parse_config_str(config).map_err(|e| e.to_string())?;
    let spec = cfg.spec().map_err(|e| e.to_string())?;
    let det = det_b(&spec);
    let a: Vec<f64> = cfg.spectrum.a.iter().map(|r| r.to_f64()).collect();
    let ny = if a.len() == 1 { 1 } else { ny };
    let mut values = Vec::with_capacity(ny);
    let mut max = 0.0f64;
    for j in 0..ny {
        let mut row = Vec::with_capacity(nx);
        for i in 0..nx {
            let mut lambda: Vec<f64> = a.iter().map(|x| 0.5 * x).collect();
            lambda[0] = a[0] * (i as f64 + 0.5) / nx as f64;
            if a.len() > 1 {
                lambda[1] = a[1] * (j as f64 + 0.5) / ny as f64;
            }
            let v = det.eval_f64(&lambda).map_err(|e| e.to_string())?.abs();
            max = max.max(v);
            row.push(v);
        }
        values.push(row);
    }
    Ok(json!({ "polynomial": det.to_string(), "a": a, "max": max, "values": values }).to_string())
}

pub fn heisenberg_window_json(lambda: f64, q: &str, trunc: u32) -> Result<String, String> {
    if !(lambda > 0.0 && lambda <= 1.0) {
        return Err("λ must lie in (0, 1]".into());
    }
    if trunc > 64 {
        return Err("truncation radius is capped at 64".into());
    }
    let q = parse_rational(q).map_err(|e| e.to_string())?;
    let one = parse_rational("1").expect("literal");
    let params = QuasiLatticeParams::new(vec![one.clone()], vec![q], vec![one]).map_err(|e| e.to_string())?;
    let lattice = fiber_lattice(&fixtures::heisenberg_algebra(), &params, &[lambda]).map_err(|e| e.to_string())?;
    let window = synthesize_window(&lattice, 64).map_err(|e| e.to_string())?;
    let pieces: Vec<[f64; 2]> = window
        .pieces
        .iter()
        .map(|p| {
            let (o, w) = (p.offset[0], p.shape[(0, 0)]);
            [o.min(o + w), o.max(o + w)]
        })
        .collect();
    let tiling = window_tiling(&window, &lattice, 64);
    let grid = XGrid::for_lattice(&lattice.translation, 32, 4);
    let g = sample_window(&window, &grid.step, 1.0);
    let tests: Vec<_> = standard_x_profiles()
        .iter()
        .map(|p| p.sample(&grid, &lattice.translation))
        .collect();
    let defect = fiber_parseval_defect(
        &lattice,
        &g,
        &tests,
        TruncationSpec {
            m: 0,
            k: trunc,
            n: trunc,
        },
    )
    .map_err(|e| e.to_string())?;
    Ok(json!({
        "translation": lattice.translation[0],
        "modulation": lattice.modulation[(0, 0)],
        "volume": lattice.volume,
        "scale": window.scale,
        "norm_sq": window.norm_sq(),
        "pieces": pieces,
        "tiling": tiling,
        "defect": defect,
    })
    .to_string())
}

pub fn design_report_json(config: &str) -> Result<String, String> {
    let cfg = parse_config_str(config).map_err(|e| e.to_string())?;
    Ok(run_command(Command::Design, cfg).report.to_json())
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::Value;

    #[test]
    fn example2_density_peaks_at_nine() {
        let text = density_grid_json(fixtures::EXAMPLE2_JSON, 40, 60).unwrap();
        let v: Value = serde_json::from_str(&text).unwrap();
        let max = v["max"].as_f64().unwrap();
        assert!(max < 9.0 && max > 8.5, "{max}");
        assert_eq!(v["values"].as_array().unwrap().len(), 60);
    }

    #[test]
    fn heisenberg_window_is_parseval() {
        let v: Value = serde_json::from_str(&heisenberg_window_json(0.5, "1", 16).unwrap()).unwrap();
        assert!((v["norm_sq"].as_f64().unwrap() - 0.5).abs() < 1e-12);
        assert!(v["defect"]["defect"].as_f64().unwrap() < 1e-3);
        assert_eq!(v["tiling"]["min_tiling"], 1);
    }

    #[test]
    fn dense_q_is_rejected() {
        assert!(heisenberg_window_json(0.9, "1/2", 8).is_err());
        assert!(heisenberg_window_json(1.5, "1", 8).is_err());
    }

    #[test]
    fn design_report_round_trips() {
        let v: Value = serde_json::from_str(&design_report_json(fixtures::EXAMPLE2_JSON).unwrap()).unwrap();
        assert_eq!(v["design"]["label"], "Γ_{(2,3),(1,1),(3,3)}");
        assert!(design_report_json("{").is_err());
    }
}
