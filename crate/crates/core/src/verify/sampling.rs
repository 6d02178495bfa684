//! Sampled functions on lattice-aligned uniform grids and the fiber
//! representation acting on them.

use num_complex::Complex64;
use std::f64::consts::TAU;

use crate::error::{Error, Result};
use crate::lattice::FiberGaborLattice;
use crate::window::PiecewiseBoxWindow;

/// Uniform grid `x = (start + j) · step`, `0 ≤ j < count`, per axis.
#[derive(Clone, Debug, PartialEq)]
pub struct XGrid {
    pub step: Vec<f64>,
    pub start: Vec<i64>,
    pub count: Vec<usize>,
}

impl XGrid {
    /// Grid with `points_per_cell` samples per translation step, covering
    /// `cells` steps per axis starting one step left of the origin.
    pub fn for_lattice(translation: &[f64], points_per_cell: usize, cells: usize) -> Self {
        let ppc = points_per_cell as i64;
        let back = ((cells as i64) - 1) / 2;
        Self {
            step: translation.iter().map(|t| t / points_per_cell as f64).collect(),
            start: vec![-back * ppc; translation.len()],
            count: vec![cells * points_per_cell; translation.len()],
        }
    }

    /// Smallest grid with the given step containing `[lo, hi)`.
    pub fn covering(step: &[f64], lo: &[f64], hi: &[f64]) -> Self {
        let start: Vec<i64> = lo
            .iter()
            .zip(step)
            .map(|(l, s)| (l / s - 1e-9).floor() as i64)
            .collect();
        let count = hi
            .iter()
            .zip(step)
            .zip(&start)
            .map(|((h, s), st)| ((h / s + 1e-9).ceil() as i64 - st).max(0) as usize)
            .collect();
        Self {
            step: step.to_vec(),
            start,
            count,
        }
    }

    pub fn dim(&self) -> usize {
        self.step.len()
    }

    pub fn len(&self) -> usize {
        self.count.iter().product()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn dx(&self) -> f64 {
        self.step.iter().product()
    }

    pub fn axis(&self, i: usize) -> Vec<f64> {
        (0..self.count[i])
            .map(|j| (self.start[i] + j as i64) as f64 * self.step[i])
            .collect()
    }

    pub fn point(&self, mut flat: usize) -> Vec<f64> {
        let d = self.dim();
        let mut x = vec![0.0; d];
        for i in (0..d).rev() {
            let j = flat % self.count[i];
            flat /= self.count[i];
            x[i] = (self.start[i] + j as i64) as f64 * self.step[i];
        }
        x
    }

    fn same_step(&self, other: &XGrid) -> bool {
        self.step
            .iter()
            .zip(&other.step)
            .all(|(a, b)| (a - b).abs() <= 1e-12 * a.abs())
    }

    /// Integer grid shift equivalent to translating by `v`.
    pub fn shift_for(&self, v: &[f64]) -> Result<Vec<i64>> {
        v.iter()
            .zip(&self.step)
            .map(|(x, s)| {
                let r = x / s;
                if (r - r.round()).abs() > 1e-9 {
                    Err(Error::MisalignedGrid(format!(
                        "shift {x} is not a whole number of grid steps {s}"
                    )))
                } else {
                    Ok(r.round() as i64)
                }
            })
            .collect()
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SampledFunction {
    pub grid: XGrid,
    pub values: Vec<Complex64>,
}

impl SampledFunction {
    pub fn zeros(grid: XGrid) -> Self {
        let n = grid.len();
        Self {
            grid,
            values: vec![Complex64::new(0.0, 0.0); n],
        }
    }

    pub fn from_fn(grid: XGrid, f: impl Fn(&[f64]) -> Complex64) -> Self {
        let values = (0..grid.len()).map(|k| f(&grid.point(k))).collect();
        Self { grid, values }
    }

    pub fn norm_sq(&self) -> f64 {
        self.values.iter().map(|v| v.norm_sqr()).sum::<f64>() * self.grid.dx()
    }

    pub fn scaled(&self, c: Complex64) -> Self {
        Self {
            grid: self.grid.clone(),
            values: self.values.iter().map(|v| v * c).collect(),
        }
    }

    /// `⟨self, other⟩ = Σ self · conj(other) dx` over the common points.
    pub fn inner(&self, other: &SampledFunction) -> Result<Complex64> {
        let ov = Overlap::new(&self.grid, &other.grid)?;
        let mut acc = Complex64::new(0.0, 0.0);
        ov.for_each(|a, b| acc += self.values[a] * other.values[b].conj());
        Ok(acc * self.grid.dx())
    }
}

/// Index correspondence between two grids with the same step.
pub(crate) struct Overlap {
    lo: Vec<i64>,
    hi: Vec<i64>,
    a: XGrid,
    b: XGrid,
}

impl Overlap {
    pub(crate) fn new(a: &XGrid, b: &XGrid) -> Result<Self> {
        if a.dim() != b.dim() || !a.same_step(b) {
            return Err(Error::MisalignedGrid("grids have different steps".into()));
        }
        let d = a.dim();
        let lo = (0..d).map(|i| a.start[i].max(b.start[i])).collect();
        let hi = (0..d)
            .map(|i| (a.start[i] + a.count[i] as i64).min(b.start[i] + b.count[i] as i64))
            .collect();
        Ok(Self {
            lo,
            hi,
            a: a.clone(),
            b: b.clone(),
        })
    }

    pub(crate) fn is_empty(&self) -> bool {
        self.lo.iter().zip(&self.hi).any(|(l, h)| l >= h)
    }

    /// Per-axis absolute indices of the common block.
    pub(crate) fn axes(&self) -> Vec<std::ops::Range<i64>> {
        self.lo.iter().zip(&self.hi).map(|(&l, &h)| l..h).collect()
    }

    /// Visit `(flat index in a, flat index in b)` for every common point,
    /// last axis fastest.
    pub(crate) fn for_each(&self, mut f: impl FnMut(usize, usize)) {
        if self.is_empty() {
            return;
        }
        let d = self.lo.len();
        let mut cur = self.lo.clone();
        let flat = |g: &XGrid, c: &[i64]| {
            c.iter()
                .enumerate()
                .fold(0usize, |acc, (i, &v)| acc * g.count[i] + (v - g.start[i]) as usize)
        };
        loop {
            f(flat(&self.a, &cur), flat(&self.b, &cur));
            let mut i = d;
            loop {
                if i == 0 {
                    return;
                }
                i -= 1;
                cur[i] += 1;
                if cur[i] < self.hi[i] {
                    break;
                }
                cur[i] = self.lo[i];
            }
        }
    }
}

/// Samples of `factor · window` on the smallest aligned grid containing it.
pub fn sample_window(window: &PiecewiseBoxWindow, step: &[f64], factor: f64) -> SampledFunction {
    let Some((lo, hi)) = window.bounds() else {
        return SampledFunction::zeros(XGrid {
            step: step.to_vec(),
            start: vec![0; step.len()],
            count: vec![0; step.len()],
        });
    };
    let grid = XGrid::covering(step, &lo, &hi);
    let locator = window.locator();
    SampledFunction::from_fn(grid, |x| Complex64::new(factor * locator.eval(x), 0.0))
}

/// `(π_λ(k, n) F)(x) = e^{2πi⟨x, B(λ)D(q)k⟩} F(x − A(b)n)`.
pub fn apply_fiber_rep(
    lattice: &FiberGaborLattice,
    k: &[i64],
    n: &[i64],
    f: &SampledFunction,
) -> Result<SampledFunction> {
    let d = lattice.d();
    if k.len() != d || n.len() != d || f.grid.dim() != d {
        return Err(Error::DimensionMismatch {
            what: "fiber representation arguments".into(),
            expected: d,
            got: k.len(),
        });
    }
    let shift_vec: Vec<f64> = (0..d).map(|i| n[i] as f64 * lattice.translation[i]).collect();
    let shift = f.grid.shift_for(&shift_vec)?;
    let mut grid = f.grid.clone();
    for i in 0..d {
        grid.start[i] += shift[i];
    }
    let omega = modulation_frequency(lattice, k);
    let mut out = SampledFunction {
        grid,
        values: f.values.clone(),
    };
    for (idx, v) in out.values.iter_mut().enumerate() {
        let x = out.grid.point(idx);
        let phase: f64 = x.iter().zip(&omega).map(|(a, b)| a * b).sum();
        *v *= Complex64::from_polar(1.0, TAU * phase);
    }
    Ok(out)
}

/// `B(λ)D(q)·k`.
pub fn modulation_frequency(lattice: &FiberGaborLattice, k: &[i64]) -> Vec<f64> {
    let d = lattice.d();
    (0..d)
        .map(|i| (0..d).map(|j| lattice.modulation[(i, j)] * k[j] as f64).sum())
        .collect()
}

/// `⟨F, π_λ(k, n) w⟩` for every `k` in `ks`, at a fixed `n`, without
/// materializing the modulated copies. Returns `None` when the translated
/// window misses the support of `F`.
pub(crate) fn coefficients_at_shift(
    lattice: &FiberGaborLattice,
    f: &SampledFunction,
    w: &SampledFunction,
    n: &[i64],
    ks: &[Vec<i64>],
) -> Result<Option<Vec<Complex64>>> {
    let d = lattice.d();
    let shift_vec: Vec<f64> = (0..d).map(|i| n[i] as f64 * lattice.translation[i]).collect();
    let shift = w.grid.shift_for(&shift_vec)?;
    let mut wg = w.grid.clone();
    for i in 0..d {
        wg.start[i] += shift[i];
    }
    let ov = Overlap::new(&f.grid, &wg)?;
    if ov.is_empty() {
        return Ok(None);
    }
    let mut prod = Vec::new();
    ov.for_each(|a, b| prod.push(f.values[a] * w.values[b].conj()));
    if prod.iter().all(|p| p.norm_sqr() == 0.0) {
        return Ok(None);
    }
    let axes = ov.axes();
    let dx = f.grid.dx();
    let mut out = Vec::with_capacity(ks.len());
    for k in ks {
        let omega = modulation_frequency(lattice, k);
        // separable phases e^{−2πi x_i ω_i}
        let phases: Vec<Vec<Complex64>> = (0..d)
            .map(|i| {
                axes[i]
                    .clone()
                    .map(|j| Complex64::from_polar(1.0, -TAU * j as f64 * f.grid.step[i] * omega[i]))
                    .collect()
            })
            .collect();
        out.push(contract(&prod, &phases) * dx);
    }
    Ok(Some(out))
}

/// Apply one matrix per axis to a row-major tensor of `shape`; `tables[a]`
/// has one row per output index along axis `a`.
pub(crate) fn transform_axes(values: &[Complex64], shape: &[usize], tables: &[Vec<Vec<Complex64>>]) -> Vec<Complex64> {
    let mut cur = values.to_vec();
    let mut shape = shape.to_vec();
    for (axis, table) in tables.iter().enumerate() {
        let pre: usize = shape[..axis].iter().product();
        let post: usize = shape[axis + 1..].iter().product();
        let n = shape[axis];
        let mut next = vec![Complex64::new(0.0, 0.0); pre * table.len() * post];
        for p in 0..pre {
            let block = &cur[p * n * post..(p + 1) * n * post];
            for (mi, row) in table.iter().enumerate() {
                let out = &mut next[(p * table.len() + mi) * post..(p * table.len() + mi + 1) * post];
                for (j, ph) in row.iter().enumerate() {
                    let src = &block[j * post..(j + 1) * post];
                    for (o, v) in out.iter_mut().zip(src) {
                        *o += ph * v;
                    }
                }
            }
        }
        shape[axis] = table.len();
        cur = next;
    }
    cur
}

/// `Σ_j p_j ∏_i phases_i[j_i]` for row-major `p`, contracting the last axis
/// first.
fn contract(p: &[Complex64], phases: &[Vec<Complex64>]) -> Complex64 {
    let mut cur: Vec<Complex64> = p.to_vec();
    for ph in phases.iter().rev() {
        let m = ph.len();
        cur = cur
            .chunks(m)
            .map(|row| row.iter().zip(ph).map(|(a, b)| a * b).sum())
            .collect();
    }
    cur.first().copied().unwrap_or_default()
}
