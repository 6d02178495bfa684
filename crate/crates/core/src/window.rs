//! Per-fiber Parseval Gabor windows and the generator fields assembled from
//! them.
//!
//! A window is `scale · χ_E` where `E` tiles under the translation lattice
//! `A(b)Z^d` and packs the dual modulation lattice `(B(λ)D(q))^{-T} Z^d`;
//! with `scale = |det B(λ)D(q)|^{1/2}` the Gabor system is Parseval.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::algebra::LieAlgebraSpec;
use crate::error::{Error, Result};
use crate::lattice::{fiber_lattice, FiberGaborLattice, QuasiLatticeParams, Role};
use crate::rational::to_f64;
use crate::spectral::{det_b, SpectrumBox};

const EDGE_TOL: f64 = 1e-9;

/// The parallelepiped `offset + shape · [0,1)^d`.
#[derive(Clone, Debug, PartialEq)]
pub struct Parallelepiped {
    pub offset: DVector<f64>,
    pub shape: DMatrix<f64>,
}

impl Parallelepiped {
    pub fn measure(&self) -> f64 {
        self.shape.determinant().abs()
    }

    /// Half-open membership with a small tolerance on the faces.
    pub fn contains(&self, x: &[f64]) -> bool {
        self.contains_with(self.inverse().as_ref(), x)
    }

    /// `shape^{-1}`, or `None` for diagonal shapes, which need no inverse.
    fn inverse(&self) -> Option<DMatrix<f64>> {
        let d = self.offset.len();
        let diagonal = (0..d).all(|i| (0..d).all(|j| i == j || self.shape[(i, j)] == 0.0));
        if diagonal {
            None
        } else {
            Some(self.shape.clone().try_inverse().unwrap_or_else(|| DMatrix::zeros(d, d)))
        }
    }

    fn contains_with(&self, inv: Option<&DMatrix<f64>>, x: &[f64]) -> bool {
        let d = self.offset.len();
        let inside = |t: f64| (-EDGE_TOL..1.0 - EDGE_TOL).contains(&t);
        match inv {
            None => (0..d).all(|i| inside((x[i] - self.offset[i]) / self.shape[(i, i)])),
            Some(inv) => {
                if inv.iter().all(|v| *v == 0.0) {
                    return false;
                }
                (0..d).all(|i| inside((0..d).map(|j| inv[(i, j)] * (x[j] - self.offset[j])).sum()))
            }
        }
    }

    /// Axis-aligned bounding box `(lo, hi)`.
    pub fn bounds(&self) -> (Vec<f64>, Vec<f64>) {
        let d = self.offset.len();
        let mut lo = self.offset.iter().copied().collect::<Vec<_>>();
        let mut hi = lo.clone();
        for i in 0..d {
            for j in 0..d {
                let v = self.shape[(i, j)];
                if v < 0.0 {
                    lo[i] += v;
                } else {
                    hi[i] += v;
                }
            }
        }
        (lo, hi)
    }
}

/// `scale · χ_E` with `E` a disjoint union of parallelepipeds.
#[derive(Clone, Debug, PartialEq)]
pub struct PiecewiseBoxWindow {
    pub scale: f64,
    pub pieces: Vec<Parallelepiped>,
}

impl PiecewiseBoxWindow {
    pub fn dim(&self) -> usize {
        self.pieces.first().map_or(0, |p| p.offset.len())
    }

    pub fn total_measure(&self) -> f64 {
        self.pieces.iter().map(Parallelepiped::measure).sum()
    }

    pub fn norm_sq(&self) -> f64 {
        self.scale * self.scale * self.total_measure()
    }

    /// Number of pieces containing `x`.
    pub fn count(&self, x: &[f64]) -> usize {
        self.pieces.iter().filter(|p| p.contains(x)).count()
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        self.scale * self.count(x) as f64
    }

    pub fn locator(&self) -> WindowLocator<'_> {
        WindowLocator::new(self)
    }

    pub fn bounds(&self) -> Option<(Vec<f64>, Vec<f64>)> {
        let mut it = self.pieces.iter().map(Parallelepiped::bounds);
        let (mut lo, mut hi) = it.next()?;
        for (l, h) in it {
            for i in 0..lo.len() {
                lo[i] = lo[i].min(l[i]);
                hi[i] = hi[i].max(h[i]);
            }
        }
        Some((lo, hi))
    }
}

/// Point location for a window: cached piece inverses and a bucket grid
/// over the bounding box.
pub struct WindowLocator<'a> {
    window: &'a PiecewiseBoxWindow,
    inverses: Vec<Option<DMatrix<f64>>>,
    lo: Vec<f64>,
    width: Vec<f64>,
    dims: Vec<usize>,
    buckets: Vec<Vec<usize>>,
}

impl<'a> WindowLocator<'a> {
    pub fn new(window: &'a PiecewiseBoxWindow) -> Self {
        let d = window.dim();
        let inverses = window.pieces.iter().map(Parallelepiped::inverse).collect();
        let Some((lo, hi)) = window.bounds() else {
            return Self {
                window,
                inverses,
                lo: Vec::new(),
                width: Vec::new(),
                dims: Vec::new(),
                buckets: Vec::new(),
            };
        };
        let per_axis = ((4 * window.pieces.len()) as f64)
            .powf(1.0 / d as f64)
            .ceil()
            .clamp(1.0, 64.0) as usize;
        let dims = vec![per_axis; d];
        let width: Vec<f64> = (0..d)
            .map(|i| ((hi[i] - lo[i]) / per_axis as f64).max(f64::MIN_POSITIVE))
            .collect();
        let mut buckets = vec![Vec::new(); per_axis.pow(d as u32)];
        for (k, p) in window.pieces.iter().enumerate() {
            let (plo, phi) = p.bounds();
            let ranges: Vec<(usize, usize)> = (0..d)
                .map(|i| {
                    let a = ((plo[i] - lo[i]) / width[i] - 1e-9).floor().max(0.0) as usize;
                    let b = ((phi[i] - lo[i]) / width[i] + 1e-9).floor().max(0.0) as usize;
                    (a.min(per_axis - 1), b.min(per_axis - 1))
                })
                .collect();
            let mut idx: Vec<usize> = ranges.iter().map(|r| r.0).collect();
            'cells: loop {
                let flat = idx.iter().fold(0, |acc, &v| acc * per_axis + v);
                buckets[flat].push(k);
                for i in (0..d).rev() {
                    if idx[i] < ranges[i].1 {
                        idx[i] += 1;
                        continue 'cells;
                    }
                    idx[i] = ranges[i].0;
                }
                break;
            }
        }
        Self {
            window,
            inverses,
            lo,
            width,
            dims,
            buckets,
        }
    }

    /// Number of pieces containing `x`.
    pub fn count(&self, x: &[f64]) -> usize {
        if self.buckets.is_empty() {
            return 0;
        }
        let mut flat = 0;
        for i in 0..self.dims.len() {
            let t = ((x[i] - self.lo[i]) / self.width[i]).floor();
            if t < -1.0 || t > self.dims[i] as f64 {
                return 0;
            }
            let t = (t.max(0.0) as usize).min(self.dims[i] - 1);
            flat = flat * self.dims[i] + t;
        }
        self.buckets[flat]
            .iter()
            .filter(|&&k| self.window.pieces[k].contains_with(self.inverses[k].as_ref(), x))
            .count()
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        self.window.scale * self.count(x) as f64
    }

    pub fn window(&self) -> &PiecewiseBoxWindow {
        self.window
    }
}

/// Whether the lattice `W·Z^d` has a point strictly inside the box
/// `(lo, hi)`, optionally ignoring the origin.
fn lattice_point_in_open_box(w: &DMatrix<f64>, winv: &DMatrix<f64>, lo: &[f64], hi: &[f64], skip_origin: bool) -> bool {
    let d = lo.len();
    let mut zlo = vec![f64::INFINITY; d];
    let mut zhi = vec![f64::NEG_INFINITY; d];
    for mask in 0..(1usize << d) {
        let corner = DVector::from_iterator(d, (0..d).map(|i| if mask >> i & 1 == 1 { hi[i] } else { lo[i] }));
        let z = winv * corner;
        for j in 0..d {
            zlo[j] = zlo[j].min(z[j]);
            zhi[j] = zhi[j].max(z[j]);
        }
    }
    let first: Vec<i64> = zlo.iter().map(|v| v.ceil() as i64).collect();
    let last: Vec<i64> = zhi.iter().map(|v| v.floor() as i64).collect();
    if first.iter().zip(&last).any(|(a, b)| a > b) {
        return false;
    }
    let mut z = first.clone();
    loop {
        if !(skip_origin && z.iter().all(|&v| v == 0)) {
            let p = w * DVector::from_iterator(d, z.iter().map(|&v| v as f64));
            if (0..d).all(|i| p[i] > lo[i] + 1e-12 && p[i] < hi[i] - 1e-12) {
                return true;
            }
        }
        let mut k = 0;
        loop {
            if k == d {
                return false;
            }
            if z[k] < last[k] {
                z[k] += 1;
                break;
            }
            z[k] = first[k];
            k += 1;
        }
    }
}

/// Translation offsets tried for each piece, nearest first.
fn shift_candidates(d: usize) -> Vec<Vec<i64>> {
    let radius: i64 = match d {
        1 | 2 => 6,
        3 => 2,
        _ => 1,
    };
    let mut out: Vec<Vec<i64>> = vec![Vec::new()];
    for _ in 0..d {
        out = out
            .into_iter()
            .flat_map(|v| {
                (-radius..=radius).map(move |x| {
                    let mut w = v.clone();
                    w.push(x);
                    w
                })
            })
            .collect();
    }
    out.sort_by_key(|n| {
        (
            n.iter().map(|v| v.abs()).max().unwrap_or(0),
            n.iter().map(|v| v.abs()).sum::<i64>(),
            n.clone(),
        )
    });
    out
}

#[derive(Clone)]
struct CellBox {
    lo: Vec<f64>,
    hi: Vec<f64>,
}

/// Nonzero points of `W·Z^d` in the open cube `(−1, 1)^d`; zero means the
/// unit cube already packs.
fn cube_conflicts(w: &DMatrix<f64>, winv: &DMatrix<f64>) -> usize {
    let d = w.nrows();
    let mut zlo = vec![f64::INFINITY; d];
    let mut zhi = vec![f64::NEG_INFINITY; d];
    for mask in 0..(1usize << d) {
        let corner = DVector::from_iterator(d, (0..d).map(|i| if mask >> i & 1 == 1 { 1.0 } else { -1.0 }));
        let z = winv * corner;
        for j in 0..d {
            zlo[j] = zlo[j].min(z[j]);
            zhi[j] = zhi[j].max(z[j]);
        }
    }
    let first: Vec<i64> = zlo.iter().map(|v| v.ceil() as i64).collect();
    let last: Vec<i64> = zhi.iter().map(|v| v.floor() as i64).collect();
    let mut count = 0;
    let mut z = first.clone();
    'outer: loop {
        if z.iter().any(|&v| v != 0) {
            let p = w * DVector::from_iterator(d, z.iter().map(|&v| v as f64));
            if p.iter().all(|v| v.abs() < 1.0 - 1e-12) {
                count += 1;
            }
        }
        for k in 0..d {
            if z[k] < last[k] {
                z[k] += 1;
                continue 'outer;
            }
            z[k] = first[k];
        }
        break;
    }
    count
}

/// Unimodular integer matrices `M` to try as coordinates `u = M y`, best
/// first by [`cube_conflicts`] of `M·W`. The identity leads on ties, so
/// windows stay axis-aligned whenever that is as good as anything else.
fn coordinate_frames(w: &DMatrix<f64>) -> Vec<DMatrix<f64>> {
    let d = w.nrows();
    let frames = unimodular_frames(d);
    let identity = &frames[0];
    let inv = w.clone().try_inverse();
    if inv.as_ref().is_some_and(|inv| cube_conflicts(w, inv) == 0) {
        return vec![identity.clone()];
    }
    let mut scored: Vec<(usize, f64, usize, &DMatrix<f64>)> = frames
        .iter()
        .enumerate()
        .filter_map(|(i, m)| {
            let mw = m * w;
            let inv = mw.clone().try_inverse()?;
            let weight: f64 = m.iter().map(|v| v.abs()).sum();
            Some((cube_conflicts(&mw, &inv), weight, i, m))
        })
        .collect();
    scored.sort_by(|a, b| a.0.cmp(&b.0).then(a.1.total_cmp(&b.1)).then(a.2.cmp(&b.2)));
    scored.into_iter().map(|s| s.3.clone()).collect()
}

/// Identity first, then every other unimodular matrix with small entries.
fn unimodular_frames(d: usize) -> &'static [DMatrix<f64>] {
    use std::sync::OnceLock;
    static CACHE: [OnceLock<Vec<DMatrix<f64>>>; 4] =
        [OnceLock::new(), OnceLock::new(), OnceLock::new(), OnceLock::new()];
    let build = || {
        let entries: &[f64] = match d {
            2 => &[-2.0, -1.0, 0.0, 1.0, 2.0],
            3 => &[-1.0, 0.0, 1.0],
            _ => &[],
        };
        let identity = DMatrix::<f64>::identity(d, d);
        let mut frames = vec![identity.clone()];
        let k = entries.len();
        if k > 0 {
            for code in 0..k.pow((d * d) as u32) {
                let mut c = code;
                let m = DMatrix::from_fn(d, d, |_, _| {
                    let v = entries[c % k];
                    c /= k;
                    v
                });
                if (m.determinant().abs() - 1.0).abs() < 1e-9 && m != identity {
                    frames.push(m);
                }
            }
        }
        frames
    };
    match CACHE.get(d) {
        Some(cell) => cell.get_or_init(build),
        None => Box::leak(Box::new(vec![DMatrix::<f64>::identity(d, d)])),
    }
}

/// A placed box with its footprint in torus coordinates `W^{-1} y mod 1`.
struct Footprint {
    bx: CellBox,
    centre: Vec<f64>,
    reach: Vec<f64>,
}

fn footprint(bx: CellBox, winv: &DMatrix<f64>) -> Footprint {
    let d = bx.lo.len();
    let mid = DVector::from_iterator(d, (0..d).map(|i| 0.5 * (bx.lo[i] + bx.hi[i])));
    let c = winv * mid;
    let centre = c.iter().map(|v| v - v.floor()).collect();
    let reach = (0..d)
        .map(|j| (0..d).map(|i| winv[(j, i)].abs() * 0.5 * (bx.hi[i] - bx.lo[i])).sum())
        .collect();
    Footprint { bx, centre, reach }
}

/// Necessary condition for two boxes to meet modulo the lattice.
fn may_meet(a: &Footprint, b: &Footprint) -> bool {
    a.centre
        .iter()
        .zip(&b.centre)
        .zip(a.reach.iter().zip(&b.reach))
        .all(|((x, y), (r, s))| {
            let t = (x - y).abs();
            t.min(1.0 - t) <= r + s + 1e-9
        })
}

/// Cut-and-stack of the unit cube against the lattice `W·Z^d`.
fn cut_and_stack(w: &DMatrix<f64>, shifts: &[Vec<i64>], piece_limit: usize) -> Result<Vec<CellBox>> {
    let d = w.nrows();
    let winv = w
        .clone()
        .try_inverse()
        .ok_or(Error::PieceOverflow { limit: piece_limit })?;
    let mut queue = std::collections::VecDeque::from([CellBox {
        lo: vec![0.0; d],
        hi: vec![1.0; d],
    }]);
    let mut placed: Vec<Footprint> = Vec::new();
    let mut dlo = vec![0.0; d];
    let mut dhi = vec![0.0; d];
    while let Some(bx) = queue.pop_front() {
        if placed.len() + queue.len() >= piece_limit {
            return Err(Error::PieceOverflow { limit: piece_limit });
        }
        let side: Vec<f64> = bx.lo.iter().zip(&bx.hi).map(|(l, h)| h - l).collect();
        let neg: Vec<f64> = side.iter().map(|s| -s).collect();
        let mut home = None;
        if !lattice_point_in_open_box(w, &winv, &neg, &side, true) {
            for n in shifts {
                let cand = CellBox {
                    lo: (0..d).map(|i| bx.lo[i] + n[i] as f64).collect(),
                    hi: (0..d).map(|i| bx.hi[i] + n[i] as f64).collect(),
                };
                let fp = footprint(cand, &winv);
                let clash = placed.iter().any(|p| {
                    if !may_meet(&fp, p) {
                        return false;
                    }
                    for i in 0..d {
                        dlo[i] = fp.bx.lo[i] - p.bx.hi[i];
                        dhi[i] = fp.bx.hi[i] - p.bx.lo[i];
                    }
                    lattice_point_in_open_box(w, &winv, &dlo, &dhi, false)
                });
                if !clash {
                    home = Some(fp);
                    break;
                }
            }
        }
        match home {
            Some(fp) => placed.push(fp),
            None => {
                let axis = (0..d).max_by(|&i, &j| side[i].total_cmp(&side[j])).unwrap_or(0);
                let mid = 0.5 * (bx.lo[axis] + bx.hi[axis]);
                let mut left = bx.clone();
                left.hi[axis] = mid;
                let mut right = bx;
                right.lo[axis] = mid;
                queue.push_back(left);
                queue.push_back(right);
            }
        }
    }
    Ok(placed.into_iter().map(|f| f.bx).collect())
}

/// Coordinate frames tried before giving up.
const FRAME_ATTEMPTS: usize = 3;

/// Painless Parseval window for one fiber, by cut-and-stack.
///
/// Work in coordinates `y` where the translation lattice is `Z^d`, then in
/// `u = M y` for a unimodular `M` chosen to make the dual modulation lattice
/// as compatible with the unit cube as possible (`M Z^d = Z^d`, so tiling is
/// unaffected). The unit cube is cut into boxes, and each box is shifted by
/// an integer vector so that no two pieces meet modulo the dual lattice.
/// Integer shifts of a partition of the cell keep the tiling property, so
/// the result tiles and packs; boxes that fit nowhere are halved along their
/// longest side.
pub fn synthesize_window(lattice: &FiberGaborLattice, piece_limit: usize) -> Result<PiecewiseBoxWindow> {
    if lattice.volume > 1.0 + 1e-12 {
        return Err(Error::DensityViolated { volume: lattice.volume });
    }
    let d = lattice.d();
    let c = &lattice.modulation;
    let det_c = c.determinant();
    let degenerate = || Error::DegenerateFiber {
        lambda: lattice.lambda.clone(),
        value: det_c.abs(),
        epsilon: 0.0,
    };
    if det_c == 0.0 || lattice.volume == 0.0 {
        return Err(degenerate());
    }
    let dual = c.transpose().try_inverse().ok_or_else(degenerate)?;
    let to_cell = DMatrix::from_diagonal(&DVector::from_iterator(d, lattice.translation.iter().map(|t| 1.0 / t)));
    let w = &to_cell * dual;
    let shifts = shift_candidates(d);

    let mut failure = Error::PieceOverflow { limit: piece_limit };
    for m in coordinate_frames(&w).into_iter().take(FRAME_ATTEMPTS) {
        let boxes = match cut_and_stack(&(&m * &w), &shifts, piece_limit) {
            Ok(b) => b,
            Err(e) => {
                failure = e;
                continue;
            }
        };
        let minv = m.try_inverse().ok_or_else(degenerate)?;
        let back = DMatrix::from_diagonal(&DVector::from_column_slice(&lattice.translation)) * minv;
        let pieces = boxes
            .into_iter()
            .map(|b| {
                let side = DMatrix::from_diagonal(&DVector::from_iterator(d, (0..d).map(|i| b.hi[i] - b.lo[i])));
                Parallelepiped {
                    offset: &back * DVector::from_column_slice(&b.lo),
                    shape: &back * side,
                }
            })
            .collect();
        return Ok(PiecewiseBoxWindow {
            scale: det_c.abs().sqrt(),
            pieces,
        });
    }
    Err(failure)
}

/// Outcome of `‖g‖² = vol Λ(λ)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NormCheck {
    pub passed: bool,
    pub norm_sq: f64,
    pub volume: f64,
    pub ratio: f64,
}

pub fn window_norm_check(window: &PiecewiseBoxWindow, lattice: &FiberGaborLattice, tol: f64) -> NormCheck {
    let norm_sq = window.norm_sq();
    NormCheck {
        passed: (norm_sq - lattice.volume).abs() <= tol,
        norm_sq,
        volume: lattice.volume,
        ratio: if lattice.volume > 0.0 {
            norm_sq / lattice.volume
        } else {
            f64::NAN
        },
    }
}

/// Uniform λ-grid with nodes at cell centres of `[0, a_1] × … × [0, a_c]`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LambdaGrid {
    pub counts: Vec<usize>,
    pub a: Vec<f64>,
}

impl LambdaGrid {
    pub fn new(a: Vec<f64>, counts: Vec<usize>) -> Result<Self> {
        if a.len() != counts.len() {
            return Err(Error::DimensionMismatch {
                what: "λ-grid axes".into(),
                expected: a.len(),
                got: counts.len(),
            });
        }
        if counts.contains(&0) {
            return Err(Error::Malformed("λ-grid node counts must be positive".into()));
        }
        Ok(Self { counts, a })
    }

    pub fn steps(&self) -> Vec<f64> {
        self.a.iter().zip(&self.counts).map(|(a, n)| a / *n as f64).collect()
    }

    pub fn cell_volume(&self) -> f64 {
        self.steps().iter().product()
    }

    pub fn len(&self) -> usize {
        self.counts.iter().product()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Multi-index of flat node `k` (last axis fastest).
    pub fn multi_index(&self, mut k: usize) -> Vec<usize> {
        let mut idx = vec![0; self.counts.len()];
        for i in (0..self.counts.len()).rev() {
            idx[i] = k % self.counts[i];
            k /= self.counts[i];
        }
        idx
    }

    pub fn node(&self, idx: &[usize]) -> Vec<f64> {
        idx.iter()
            .zip(self.steps())
            .map(|(&j, h)| (j as f64 + 0.5) * h)
            .collect()
    }

    pub fn nodes(&self) -> impl Iterator<Item = (Vec<usize>, Vec<f64>)> + '_ {
        (0..self.len()).map(|k| {
            let idx = self.multi_index(k);
            let lam = self.node(&idx);
            (idx, lam)
        })
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct FieldNode {
    pub index: Vec<usize>,
    pub lambda: Vec<f64>,
    /// `r(λ) = |det B(λ)|`.
    pub density: f64,
    pub lattice: FiberGaborLattice,
    pub window: PiecewiseBoxWindow,
    /// `1 / √(∏a · r(λ))`.
    pub normalization: f64,
}

impl FieldNode {
    /// `‖η̂(λ)‖²`.
    pub fn fiber_norm_sq(&self) -> f64 {
        self.normalization * self.normalization * self.window.norm_sq()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SkippedNode {
    pub lambda: Vec<f64>,
    pub kind: SkipKind,
    pub reason: String,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SkipKind {
    Degenerate,
    OutsideSublevel,
    PieceOverflow,
}

/// `η̂(λ) = g(λ) / √(∏a · r(λ))` on a λ-grid.
#[derive(Clone, Debug, PartialEq)]
pub struct FrameGeneratorField {
    pub role: Role,
    pub params: QuasiLatticeParams,
    pub grid: LambdaGrid,
    pub nodes: Vec<FieldNode>,
    pub skipped: Vec<SkippedNode>,
    /// `μ(region) / (∏a ∏b ∏q)`, from the certified measure.
    pub predicted_norm_sq: f64,
    /// Rectangle-rule `∫ ‖η̂(λ)‖² dμ` over the grid.
    pub quadrature_norm_sq: f64,
    /// Largest `|‖g(λ)‖² − vol Λ(λ)|` over synthesized fibers.
    pub max_norm_defect: f64,
}

impl FrameGeneratorField {
    pub fn node_at(&self, index: &[usize]) -> Option<&FieldNode> {
        self.nodes
            .binary_search_by(|n| n.index.as_slice().cmp(index))
            .ok()
            .map(|k| &self.nodes[k])
    }

    /// Multiply every fiber by `factor` (negative controls).
    pub fn scaled(&self, factor: f64) -> Self {
        let mut out = self.clone();
        for n in &mut out.nodes {
            n.normalization *= factor;
        }
        out.predicted_norm_sq *= factor * factor;
        out.quadrature_norm_sq *= factor * factor;
        out
    }

    /// Serializable view with decimal-string floats.
    pub fn to_document(&self) -> FieldDocument {
        let s = |x: f64| format!("{x}");
        FieldDocument {
            role: self.role,
            lattice: self.params.clone(),
            grid: self.grid.counts.clone(),
            predicted_norm_sq: s(self.predicted_norm_sq),
            quadrature_norm_sq: s(self.quadrature_norm_sq),
            nodes: self
                .nodes
                .iter()
                .map(|n| NodeDocument {
                    lambda: n.lambda.iter().map(|&x| s(x)).collect(),
                    scale: s(n.window.scale),
                    normalization: s(n.normalization),
                    pieces: n
                        .window
                        .pieces
                        .iter()
                        .map(|p| PieceDocument {
                            offset: p.offset.iter().map(|&x| s(x)).collect(),
                            shape: p.shape.transpose().iter().map(|&x| s(x)).collect(),
                        })
                        .collect(),
                })
                .collect(),
            skipped: self.skipped.clone(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FieldDocument {
    pub role: Role,
    pub lattice: QuasiLatticeParams,
    pub grid: Vec<usize>,
    pub predicted_norm_sq: String,
    pub quadrature_norm_sq: String,
    pub nodes: Vec<NodeDocument>,
    pub skipped: Vec<SkippedNode>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NodeDocument {
    pub lambda: Vec<String>,
    pub scale: String,
    pub normalization: String,
    pub pieces: Vec<PieceDocument>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PieceDocument {
    pub offset: Vec<String>,
    /// Row-major shape matrix.
    pub shape: Vec<String>,
}

/// Options for [`build_generator_field`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FieldOptions {
    pub role: Role,
    /// Degenerate-fiber threshold on `|det B(λ)|`.
    pub epsilon: f64,
    pub piece_limit: usize,
    /// Certified measure of the region the field lives on (`μ(𝐈)` or `μ(𝐒)`).
    pub region_measure: f64,
}

/// Synthesize and normalize windows at every grid node in the region.
///
/// Degenerate nodes, nodes whose window exceeds the piece limit, and for the
/// wavelet role nodes outside the sublevel set, are skipped and recorded.
pub fn build_generator_field(
    spec: &LieAlgebraSpec,
    params: &QuasiLatticeParams,
    region: &SpectrumBox,
    grid: LambdaGrid,
    opts: FieldOptions,
) -> Result<FrameGeneratorField> {
    let prod_all = to_f64(&params.prod_all());
    let prod_a = to_f64(&params.prod_a());
    let prod_bq = to_f64(&params.prod_bq());
    if opts.role == Role::Wavelet && !num_traits::One::is_one(&params.prod_all()) {
        return Err(Error::Precondition(format!(
            "wavelet role needs ∏a·∏b·∏q = 1, got {prod_all}"
        )));
    }
    let det = det_b(spec);
    let mut nodes = Vec::new();
    let mut skipped = Vec::new();
    let mut quad = 0.0;
    let mut worst = 0.0f64;
    let cell = grid.cell_volume();
    for (index, lambda) in grid.nodes() {
        if !region.contains(&lambda) {
            continue;
        }
        let r = det.eval_f64(&lambda)?.abs();
        if r < opts.epsilon.max(f64::MIN_POSITIVE) {
            skipped.push(SkippedNode {
                lambda,
                kind: SkipKind::Degenerate,
                reason: format!("degenerate fiber: |det B| = {r:e}"),
            });
            continue;
        }
        if opts.role == Role::Wavelet && r > prod_bq {
            skipped.push(SkippedNode {
                lambda,
                kind: SkipKind::OutsideSublevel,
                reason: "outside the sublevel set".into(),
            });
            continue;
        }
        let lattice = fiber_lattice(spec, params, &lambda)?;
        let window = match synthesize_window(&lattice, opts.piece_limit) {
            Ok(w) => w,
            Err(Error::PieceOverflow { limit }) => {
                skipped.push(SkippedNode {
                    lambda,
                    kind: SkipKind::PieceOverflow,
                    reason: format!("more than {limit} pieces"),
                });
                continue;
            }
            Err(e) => return Err(e),
        };
        worst = worst.max((window.norm_sq() - lattice.volume).abs());
        let normalization = 1.0 / (prod_a * r).sqrt();
        let node = FieldNode {
            index,
            lambda,
            density: r,
            lattice,
            window,
            normalization,
        };
        if opts.role == Role::Wavelet && (node.fiber_norm_sq() - 1.0).abs() > 1e-9 {
            return Err(Error::Precondition(format!(
                "wavelet fiber norm {} ≠ 1 at λ = {:?}",
                node.fiber_norm_sq(),
                node.lambda
            )));
        }
        quad += node.fiber_norm_sq() * r * cell;
        nodes.push(node);
    }
    Ok(FrameGeneratorField {
        role: opts.role,
        params: params.clone(),
        grid,
        nodes,
        skipped,
        predicted_norm_sq: opts.region_measure / prod_all,
        quadrature_norm_sq: quad,
        max_norm_defect: worst,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use num_rational::BigRational;

    fn heis_lattice(lambda: f64, a: i64, q: (i64, i64)) -> FiberGaborLattice {
        let p = QuasiLatticeParams::new(
            vec![BigRational::from_integer(a.into())],
            vec![BigRational::new(q.0.into(), q.1.into())],
            vec![BigRational::from_integer(a.into())],
        )
        .unwrap();
        fiber_lattice(&fixtures::heisenberg_algebra(), &p, &[lambda]).unwrap()
    }

    #[test]
    fn heisenberg_window_is_single_interval() {
        let l = heis_lattice(0.5, 1, (1, 1));
        let w = synthesize_window(&l, 100).unwrap();
        assert_eq!(w.pieces.len(), 1);
        assert!((w.scale - 0.5f64.sqrt()).abs() < 1e-15);
        assert_eq!(w.pieces[0].shape[(0, 0)], 1.0);
        let c = window_norm_check(&w, &l, 1e-12);
        assert!(c.passed && (c.norm_sq - 0.5).abs() < 1e-15);
    }

    #[test]
    fn doubled_scale_fails_with_ratio_four() {
        let l = heis_lattice(0.5, 1, (1, 1));
        let mut w = synthesize_window(&l, 100).unwrap();
        w.scale *= 2.0;
        let c = window_norm_check(&w, &l, 1e-9);
        assert!(!c.passed);
        assert!((c.ratio - 4.0).abs() < 1e-12);
    }

    #[test]
    fn volume_one_fiber() {
        let l = heis_lattice(1.0, 1, (1, 1));
        let w = synthesize_window(&l, 100).unwrap();
        assert!((w.norm_sq() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn density_violation_rejected() {
        let l = heis_lattice(0.75, 1, (1, 2));
        assert!(matches!(synthesize_window(&l, 100), Err(Error::DensityViolated { .. })));
    }

    #[test]
    fn example2_windows_exist_everywhere_on_grid() {
        let spec = fixtures::example2_algebra();
        let params = QuasiLatticeParams::from_ints(&[2, 3], &[1, 1], &[3, 3]).unwrap();
        let region = SpectrumBox::from_ints(&[2, 3]).unwrap();
        let grid = LambdaGrid::new(vec![2.0, 3.0], vec![16, 24]).unwrap();
        let opts = FieldOptions {
            role: Role::Frame,
            epsilon: 1e-12,
            piece_limit: 4096,
            region_measure: 46.0 / 3.0,
        };
        let f = build_generator_field(&spec, &params, &region, grid, opts).unwrap();
        assert_eq!(f.nodes.len() + f.skipped.len(), 16 * 24);
        assert!((f.predicted_norm_sq - 23.0 / 81.0).abs() < 1e-12);
        assert!(
            (f.quadrature_norm_sq - 23.0 / 81.0).abs() < 1e-2,
            "{}",
            f.quadrature_norm_sq
        );
        assert!(f.max_norm_defect < 1e-9);
    }

    #[test]
    fn shift_candidates_start_at_origin() {
        let c = shift_candidates(2);
        assert_eq!(c[0], vec![0, 0]);
        assert_eq!(c.len(), 13 * 13);
    }

    #[test]
    fn open_box_lattice_query() {
        let w = DMatrix::from_element(1, 1, 2.0);
        let winv = DMatrix::from_element(1, 1, 0.5);
        assert!(!lattice_point_in_open_box(&w, &winv, &[-1.0], &[1.0], true));
        assert!(lattice_point_in_open_box(&w, &winv, &[-1.0], &[1.0], false));
        assert!(lattice_point_in_open_box(&w, &winv, &[1.5], &[2.5], true));
        // boundary points are not inside
        assert!(!lattice_point_in_open_box(&w, &winv, &[2.0], &[3.0], true));
    }

    #[test]
    fn near_critical_fiber_needs_several_pieces() {
        let spec = fixtures::example2_algebra();
        let params = QuasiLatticeParams::from_ints(&[2, 3], &[1, 1], &[3, 3]).unwrap();
        let l = fiber_lattice(&spec, &params, &[0.5625, 2.8125]).unwrap();
        let w = synthesize_window(&l, 4096).unwrap();
        assert!(w.pieces.len() > 1);
        assert!((w.norm_sq() - l.volume).abs() < 1e-12);
        assert!((w.total_measure() - 1.0 / 9.0).abs() < 1e-12);
    }
}
