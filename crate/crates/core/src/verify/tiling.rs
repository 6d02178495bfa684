//! Grid re-check of the two covering properties of a painless window.

use nalgebra::DVector;
use serde::Serialize;

use crate::lattice::FiberGaborLattice;
use crate::window::{FrameGeneratorField, PiecewiseBoxWindow};

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct WindowTiling {
    pub min_tiling: usize,
    pub max_tiling: usize,
    pub max_packing: usize,
}

impl WindowTiling {
    pub fn tiling_deviation(&self) -> usize {
        (1usize.abs_diff(self.min_tiling)).max(self.max_tiling.abs_diff(1))
    }

    pub fn is_exact(&self) -> bool {
        self.min_tiling == 1 && self.max_tiling == 1 && self.max_packing <= 1
    }
}

/// Offset inside each validation cell, chosen away from dyadic fractions.
const OFFSET: f64 = 0.3717;

fn grid_points(lo: &[f64], hi: &[f64], points: usize) -> Vec<Vec<f64>> {
    let mut out = vec![Vec::new()];
    for (l, h) in lo.iter().zip(hi) {
        out = out
            .into_iter()
            .flat_map(|p| {
                (0..points).map(move |j| {
                    let mut q = p.clone();
                    q.push(l + (h - l) * (j as f64 + OFFSET) / points as f64);
                    q
                })
            })
            .collect();
    }
    out
}

fn integer_box(lo: &[f64], hi: &[f64]) -> Vec<Vec<i64>> {
    let mut out = vec![Vec::new()];
    for (l, h) in lo.iter().zip(hi) {
        let (a, b) = (l.floor() as i64, h.ceil() as i64);
        out = out
            .into_iter()
            .flat_map(|p| {
                (a..=b).map(move |v| {
                    let mut q = p.clone();
                    q.push(v);
                    q
                })
            })
            .collect();
    }
    out
}

/// Translation counts `Σ_n #{x − A(b)n ∈ E}` over one translation cell and
/// dual-modulation counts `Σ_ℓ #{x − ℓ ∈ E}` over the window's bounding box,
/// on `points` samples per axis.
pub fn window_tiling(window: &PiecewiseBoxWindow, lattice: &FiberGaborLattice, points: usize) -> WindowTiling {
    let d = lattice.d();
    let t = &lattice.translation;
    let Some((wlo, whi)) = window.bounds() else {
        return WindowTiling {
            min_tiling: 0,
            max_tiling: 0,
            max_packing: 0,
        };
    };

    let locator = window.locator();
    let mut min_t = usize::MAX;
    let mut max_t = 0;
    for x in grid_points(&vec![0.0; d], t, points) {
        let lo: Vec<f64> = (0..d).map(|i| (x[i] - whi[i]) / t[i]).collect();
        let hi: Vec<f64> = (0..d).map(|i| (x[i] - wlo[i]) / t[i]).collect();
        let c: usize = integer_box(&lo, &hi)
            .iter()
            .map(|n| {
                let y: Vec<f64> = (0..d).map(|i| x[i] - n[i] as f64 * t[i]).collect();
                locator.count(&y)
            })
            .sum();
        min_t = min_t.min(c);
        max_t = max_t.max(c);
    }

    // ℓ ∈ C^{-T} Z^d, so z = Cᵀ ℓ ranges over Cᵀ (x − E).
    let ct = lattice.modulation.transpose();
    let ct_inv = ct.clone().try_inverse().expect("fiber lattice is non-degenerate");
    let mut max_p = 0;
    for x in grid_points(&wlo, &whi, points) {
        let mut zlo = vec![0.0; d];
        let mut zhi = vec![0.0; d];
        for i in 0..d {
            for j in 0..d {
                let (u, v) = (ct[(i, j)] * (x[j] - whi[j]), ct[(i, j)] * (x[j] - wlo[j]));
                zlo[i] += u.min(v);
                zhi[i] += u.max(v);
            }
        }
        let c: usize = integer_box(&zlo, &zhi)
            .iter()
            .map(|z| {
                let zv = DVector::from_iterator(d, z.iter().map(|&v| v as f64));
                let l = &ct_inv * zv;
                let y: Vec<f64> = (0..d).map(|i| x[i] - l[i]).collect();
                locator.count(&y)
            })
            .sum();
        max_p = max_p.max(c);
    }
    WindowTiling {
        min_tiling: min_t,
        max_tiling: max_t,
        max_packing: max_p,
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TilingReport {
    pub nodes_checked: usize,
    pub points_per_axis: usize,
    pub max_tiling_deviation: usize,
    pub max_packing: usize,
    pub worst_lambda: Option<Vec<f64>>,
    pub passed: bool,
}

pub fn window_tiling_check(generator: &FrameGeneratorField, points: usize) -> TilingReport {
    let results: Vec<WindowTiling> = super::par_map(&generator.nodes, |n| window_tiling(&n.window, &n.lattice, points));
    let mut report = TilingReport {
        nodes_checked: results.len(),
        points_per_axis: points,
        max_tiling_deviation: 0,
        max_packing: 0,
        worst_lambda: None,
        passed: true,
    };
    for (node, r) in generator.nodes.iter().zip(results) {
        if !r.is_exact() && report.worst_lambda.is_none() {
            report.worst_lambda = Some(node.lambda.clone());
        }
        report.max_tiling_deviation = report.max_tiling_deviation.max(r.tiling_deviation());
        report.max_packing = report.max_packing.max(r.max_packing);
        report.passed &= r.is_exact();
    }
    report
}
