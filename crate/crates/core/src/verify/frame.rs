//! Truncated Parseval sums per fiber and over the whole Plancherel domain.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::f64::consts::TAU;

use super::fields::BandlimitedField;
use super::par_map;
use super::sampling::{apply_fiber_rep, coefficients_at_shift, sample_window, transform_axes, SampledFunction};
use crate::error::{Error, Result};
use crate::lattice::FiberGaborLattice;
use crate::window::{FrameGeneratorField, LambdaGrid};

/// Symmetric index radii: `m ∈ [−m, m]^c`, `k, n ∈ [−k, k]^d, [−n, n]^d`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TruncationSpec {
    pub m: u32,
    pub k: u32,
    pub n: u32,
}

impl TruncationSpec {
    pub fn doubled(self) -> Self {
        Self {
            m: 2 * self.m,
            k: 2 * self.k,
            n: 2 * self.n,
        }
    }
}

/// All integer vectors in `[−r, r]^d`, lexicographic.
pub fn index_box(d: usize, r: u32) -> Vec<Vec<i64>> {
    index_ranges(&vec![(-(r as i64), r as i64); d])
}

fn index_ranges(ranges: &[(i64, i64)]) -> Vec<Vec<i64>> {
    let mut out = vec![Vec::new()];
    for &(lo, hi) in ranges {
        out = out
            .into_iter()
            .flat_map(|p| {
                (lo..=hi).map(move |v| {
                    let mut q = p.clone();
                    q.push(v);
                    q
                })
            })
            .collect();
    }
    out
}

/// The `size` smallest vectors of the box by `(sup-norm, lexicographic)`,
/// grown shell by shell instead of listing the whole box.
fn smallest_elements(ranges: &[(i64, i64)], size: usize) -> Vec<Vec<i64>> {
    let widest = ranges.iter().map(|&(lo, hi)| lo.abs().max(hi.abs())).max().unwrap_or(0);
    let mut s = 0;
    loop {
        let inner: Vec<(i64, i64)> = ranges.iter().map(|&(lo, hi)| (lo.max(-s), hi.min(s))).collect();
        let total = inner
            .iter()
            .try_fold(1usize, |acc, &(lo, hi)| acc.checked_mul((hi - lo + 1).max(0) as usize));
        if total.is_some_and(|t| t >= size) || s >= widest {
            let mut elements = index_ranges(&inner);
            elements.sort_by_key(|e| (sup_norm(e), e.clone()));
            elements.truncate(size);
            return elements;
        }
        s += 1;
    }
}

fn sup_norm(v: &[i64]) -> i64 {
    v.iter().map(|x| x.abs()).max().unwrap_or(0)
}

/// Coefficients `⟨F, π(k, n) w⟩` for all `(k, n)` in range, indexed
/// `k_idx · |ns| + n_idx`; shifts with no overlap contribute zeros.
fn coefficient_table(
    lattice: &FiberGaborLattice,
    f: &SampledFunction,
    w: &SampledFunction,
    ks: &[Vec<i64>],
    ns: &[Vec<i64>],
) -> Result<Vec<Complex64>> {
    let mut table = vec![Complex64::new(0.0, 0.0); ks.len() * ns.len()];
    for (ni, n) in ns.iter().enumerate() {
        if let Some(cs) = coefficients_at_shift(lattice, f, w, n, ks)? {
            for (ki, c) in cs.into_iter().enumerate() {
                table[ki * ns.len() + ni] = c;
            }
        }
    }
    Ok(table)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FiberDefect {
    /// Captured energy over `‖F‖²`, per test function.
    pub ratios: Vec<f64>,
    pub defect: f64,
    /// Largest share of `‖F‖²` carried by the outermost `(k, n)` shell.
    pub tail: f64,
}

/// `max_F |Σ_{k,n} |⟨F, π(k, n) g⟩|² / ‖F‖² − 1|` for a window `g` that
/// already carries its Parseval normalization.
pub fn fiber_parseval_defect(
    lattice: &FiberGaborLattice,
    window: &SampledFunction,
    tests: &[SampledFunction],
    trunc: TruncationSpec,
) -> Result<FiberDefect> {
    let d = lattice.d();
    let ks = index_box(d, trunc.k);
    let ns = index_box(d, trunc.n);
    let outer = trunc.k.max(trunc.n) as i64;
    let mut ratios = Vec::with_capacity(tests.len());
    let mut tail = 0.0f64;
    for f in tests {
        let norm = f.norm_sq();
        if norm <= 0.0 {
            return Err(Error::ZeroNorm("test function has zero norm".into()));
        }
        let table = coefficient_table(lattice, f, window, &ks, &ns)?;
        let mut energy = 0.0;
        let mut shell = 0.0;
        for (ki, k) in ks.iter().enumerate() {
            for (ni, n) in ns.iter().enumerate() {
                let e = table[ki * ns.len() + ni].norm_sqr();
                energy += e;
                if sup_norm(k).max(sup_norm(n)) == outer {
                    shell += e;
                }
            }
        }
        ratios.push(energy / norm);
        tail = tail.max(shell / norm);
    }
    let defect = ratios.iter().map(|r| (r - 1.0).abs()).fold(0.0, f64::max);
    Ok(FiberDefect { ratios, defect, tail })
}

/// Central frequencies actually used on each axis: the requested range
/// intersected with one full set of alias classes of the `λ`-grid.
pub fn central_ranges(grid: &LambdaGrid, m: u32) -> Vec<(i64, i64)> {
    grid.counts
        .iter()
        .map(|&n| {
            let n = n as i64;
            ((-(m as i64)).max(-(n / 2)), (m as i64).min((n + 1) / 2 - 1))
        })
        .collect()
}

/// Per-axis phase tables `e^{2πi λ_j m / a}` at cell-centred nodes.
fn central_phases(grid: &LambdaGrid, ranges: &[(i64, i64)]) -> Vec<Vec<Vec<Complex64>>> {
    grid.counts
        .iter()
        .zip(ranges)
        .map(|(&n, &(lo, hi))| {
            (lo..=hi)
                .map(|m| {
                    (0..n)
                        .map(|j| Complex64::from_polar(1.0, TAU * (j as f64 + 0.5) * m as f64 / n as f64))
                        .collect()
                })
                .collect()
        })
        .collect()
}

/// Apply the axis transforms to a row-major array over the grid and return
/// `Σ_m |coefficient|²`.
fn central_energy(values: &[Complex64], counts: &[usize], phases: &[Vec<Vec<Complex64>>], cell: f64) -> f64 {
    transform_axes(values, counts, phases)
        .iter()
        .map(|c| (c * cell).norm_sqr())
        .sum()
}

fn flat_index(counts: &[usize], idx: &[usize]) -> usize {
    idx.iter().zip(counts).fold(0, |acc, (&i, &n)| acc * n + i)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FrameEnergy {
    pub energy: f64,
    pub psi_norm_sq: f64,
    pub ratio: f64,
    /// Share of `‖ψ‖²` carried by the outermost `(k, n)` shell.
    pub tail: f64,
    /// Central index ranges actually summed, per axis.
    pub m_ranges: Vec<(i64, i64)>,
    /// True when the requested `m` range exceeded the grid's alias classes.
    pub m_clipped: bool,
}

/// Truncated `Σ_γ |⟨ψ, L(γ)η⟩|² / ‖ψ‖²` through the Plancherel domain.
pub fn frame_energy_ratio(
    psi: &BandlimitedField,
    generator: &FrameGeneratorField,
    trunc: TruncationSpec,
) -> Result<FrameEnergy> {
    if psi.grid != generator.grid {
        return Err(Error::MisalignedGrid(
            "test field and generator use different λ-grids".into(),
        ));
    }
    let psi_norm_sq = psi.norm_sq();
    if psi_norm_sq <= 0.0 {
        return Err(Error::ZeroNorm("test field ψ is zero".into()));
    }
    let d = generator.params.d();
    let ks = index_box(d, trunc.k);
    let ns = index_box(d, trunc.n);
    let gammas = ks.len() * ns.len();

    let per_node: Vec<Result<Option<(usize, Vec<Complex64>)>>> = par_map(&psi.nodes, |sample| {
        let Some(node) = generator.node_at(&sample.index) else {
            return Ok(None);
        };
        let w = sample_window(&node.window, &sample.values.grid.step, node.normalization);
        let mut table = coefficient_table(&node.lattice, &sample.values, &w, &ks, &ns)?;
        for c in &mut table {
            *c *= node.density;
        }
        Ok(Some((flat_index(&psi.grid.counts, &sample.index), table)))
    });

    let len = psi.grid.len();
    let mut h = vec![Complex64::new(0.0, 0.0); gammas * len];
    for r in per_node {
        if let Some((j, table)) = r? {
            for (g, c) in table.into_iter().enumerate() {
                h[g * len + j] = c;
            }
        }
    }

    let m_ranges = central_ranges(&psi.grid, trunc.m);
    let m_clipped = m_ranges
        .iter()
        .any(|&(lo, hi)| -lo < trunc.m as i64 || hi < trunc.m as i64);
    let phases = central_phases(&psi.grid, &m_ranges);
    let cell = psi.grid.cell_volume();
    let outer = trunc.k.max(trunc.n) as i64;
    let idx: Vec<usize> = (0..gammas).collect();
    let energies: Vec<f64> = par_map(&idx, |&g| {
        central_energy(&h[g * len..(g + 1) * len], &psi.grid.counts, &phases, cell)
    });
    let mut energy = 0.0;
    let mut shell = 0.0;
    for (g, e) in energies.into_iter().enumerate() {
        energy += e;
        let (k, n) = (&ks[g / ns.len()], &ns[g % ns.len()]);
        if sup_norm(k).max(sup_norm(n)) == outer {
            shell += e;
        }
    }
    Ok(FrameEnergy {
        energy,
        psi_norm_sq,
        ratio: energy / psi_norm_sq,
        tail: shell / psi_norm_sq,
        m_ranges,
        m_clipped,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GramReport {
    pub size: usize,
    /// `⟨η, η⟩`, the common diagonal value.
    pub diagonal: f64,
    pub max_offdiagonal: f64,
    pub max_diagonal_deviation: f64,
    pub orthonormal: bool,
}

/// Gram matrix of `{L(γ)η}` for the `size` smallest `γ = (m, k, n)` in range.
pub fn gram_orthonormality_check(
    generator: &FrameGeneratorField,
    x_points: usize,
    trunc: TruncationSpec,
    size: usize,
    tol: f64,
) -> Result<GramReport> {
    if size == 0 {
        return Err(Error::Precondition("Gram check needs a non-empty truncation".into()));
    }
    let d = generator.params.d();
    let m_ranges = central_ranges(&generator.grid, trunc.m);
    let mut ranges = m_ranges.clone();
    ranges.extend(std::iter::repeat_n((-(trunc.k as i64), trunc.k as i64), d));
    ranges.extend(std::iter::repeat_n((-(trunc.n as i64), trunc.n as i64), d));
    let elements = smallest_elements(&ranges, size);
    let c = m_ranges.len();

    let mut kn: Vec<Vec<i64>> = elements.iter().map(|e| e[c..].to_vec()).collect();
    kn.sort();
    kn.dedup();
    let kn_pos = |v: &[i64]| kn.binary_search_by(|p| p.as_slice().cmp(v)).expect("listed");

    let cell = generator.grid.cell_volume();
    let per_node: Vec<Result<(Vec<f64>, f64, Vec<Complex64>)>> = par_map(&generator.nodes, |node| {
        let step: Vec<f64> = node.lattice.translation.iter().map(|t| t / x_points as f64).collect();
        let eta = sample_window(&node.window, &step, node.normalization);
        let moved: Vec<SampledFunction> = kn
            .iter()
            .map(|v| apply_fiber_rep(&node.lattice, &v[..d], &v[d..], &eta))
            .collect::<Result<_>>()?;
        let exact = node.fiber_norm_sq();
        let mut p = vec![Complex64::new(0.0, 0.0); kn.len() * kn.len()];
        for i in 0..kn.len() {
            p[i * kn.len() + i] = Complex64::new(exact, 0.0);
            for j in (i + 1)..kn.len() {
                let v = moved[i].inner(&moved[j])?;
                p[i * kn.len() + j] = v;
                p[j * kn.len() + i] = v.conj();
            }
        }
        Ok((node.lambda.clone(), node.density * cell, p))
    });
    let per_node: Vec<(Vec<f64>, f64, Vec<Complex64>)> = per_node.into_iter().collect::<Result<_>>()?;

    let a = &generator.grid.a;
    let mut gram = vec![Complex64::new(0.0, 0.0); elements.len() * elements.len()];
    for (lambda, weight, p) in &per_node {
        for (i, ei) in elements.iter().enumerate() {
            let pi = kn_pos(&ei[c..]);
            for (j, ej) in elements.iter().enumerate() {
                let pj = kn_pos(&ej[c..]);
                let phase: f64 = (0..c).map(|t| lambda[t] * (ei[t] - ej[t]) as f64 / a[t]).sum();
                gram[i * elements.len() + j] += Complex64::from_polar(*weight, TAU * phase) * p[pi * kn.len() + pj];
            }
        }
    }
    let n = elements.len();
    let mut max_off = 0.0f64;
    let mut max_diag = 0.0f64;
    for i in 0..n {
        for j in 0..n {
            let v = gram[i * n + j];
            if i == j {
                max_diag = max_diag.max((v - 1.0).norm());
            } else {
                max_off = max_off.max(v.norm());
            }
        }
    }
    Ok(GramReport {
        size: n,
        diagonal: gram[0].re,
        max_offdiagonal: max_off,
        max_diagonal_deviation: max_diag,
        orthonormal: max_off <= tol && max_diag <= tol,
    })
}
