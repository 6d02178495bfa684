//! Fiber sums on sample grids adapted to the modulation lattice.
//!
//! With `y = Cᵀx` the modulation `e^{2πi⟨x, Ck⟩}` reads `e^{2πi⟨y, k⟩}`, so
//! all coefficients at one translation come out of a single separable
//! transform over a `y`-grid. Test Gaussians sit inside the widest window
//! piece (reduced modulo translations), where every translate of the window
//! is constant, so the sums converge as fast as the Gaussian spectrum decays.

use nalgebra::DVector;
use num_complex::Complex64;
use serde::Serialize;
use std::collections::BTreeSet;
use std::f64::consts::TAU;

use super::fields::LambdaBump;
use super::frame::{central_ranges, FrameEnergy, TruncationSpec};
use super::par_map;
use super::sampling::transform_axes;
use crate::error::{Error, Result};
use crate::lattice::FiberGaborLattice;
use crate::window::{FieldNode, FrameGeneratorField, PiecewiseBoxWindow, WindowLocator};

/// Test Gaussians are cut off at this many standard deviations.
const REACH_SIGMAS: f64 = 4.0;

/// Samples per unit of `y` relative to the spectral band.
const OVERSAMPLE: f64 = 3.0;

/// Upper bound on `y`-grid points for a single test.
const MAX_POINTS: usize = 4_000_000;

/// `ρ` such that `|ĝ(ω)|² < 1e−10 |ĝ(0)|²` for `|ω| > ρ/σ`, for a Gaussian of width `σ`.
fn band_cut() -> f64 {
    (10.0 * std::f64::consts::LN_10).sqrt() / TAU
}

/// Ball inside one window piece, centre reduced into the translation cell.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Anchor {
    pub centre: Vec<f64>,
    pub radius: f64,
}

/// Inscribed ball of the widest piece.
pub fn window_anchor(window: &PiecewiseBoxWindow, translation: &[f64]) -> Option<Anchor> {
    let d = translation.len();
    let mut best: Option<Anchor> = None;
    for p in &window.pieces {
        let Some(inv) = p.shape.clone().try_inverse() else {
            continue;
        };
        let radius = (0..d).map(|i| 0.5 / inv.row(i).norm()).fold(f64::INFINITY, f64::min);
        if best.as_ref().is_some_and(|b| b.radius >= radius) {
            continue;
        }
        let mid = &p.offset + &p.shape * DVector::from_element(d, 0.5);
        let centre = mid
            .iter()
            .zip(translation)
            .map(|(m, t)| m - t * (m / t).floor())
            .collect();
        best = Some(Anchor { centre, radius });
    }
    best
}

/// Gaussian placed relative to an [`Anchor`].
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct AnchoredProfile {
    /// Centre offset along the first axis, in anchor radii.
    pub shift: f64,
    /// Standard deviation in anchor radii.
    pub width: f64,
    /// Modulation index added along the first axis.
    pub cycles: i64,
}

/// Three profiles whose truncation balls stay inside the anchor ball.
pub fn standard_anchored_profiles() -> [AnchoredProfile; 3] {
    [
        AnchoredProfile {
            shift: 0.0,
            width: 0.25,
            cycles: 0,
        },
        AnchoredProfile {
            shift: 0.1,
            width: 0.22,
            cycles: 1,
        },
        AnchoredProfile {
            shift: -0.1,
            width: 0.2,
            cycles: -1,
        },
    ]
}

/// A test field whose `x`-profile is anchored at each fiber's window.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct AnchoredField {
    pub name: String,
    pub profile: AnchoredProfile,
    pub lambda: LambdaBump,
}

pub fn standard_anchored_fields() -> Vec<AnchoredField> {
    let [p0, p1, p2] = standard_anchored_profiles();
    vec![
        AnchoredField {
            name: "anchored-centred".into(),
            profile: p0,
            lambda: LambdaBump { lo: 0.3, hi: 1.0 },
        },
        AnchoredField {
            name: "anchored-chirped".into(),
            profile: p1,
            lambda: LambdaBump { lo: 0.5, hi: 0.95 },
        },
        AnchoredField {
            name: "anchored-offset".into(),
            profile: p2,
            lambda: LambdaBump { lo: 0.35, hi: 0.9 },
        },
    ]
}

/// A truncated Gaussian sampled on a `y`-grid for one fiber.
#[derive(Clone, Debug)]
pub struct AdaptedTest {
    centre: Vec<f64>,
    reach: f64,
    step: Vec<f64>,
    start: Vec<i64>,
    count: Vec<usize>,
    /// Flat `y`-grid index, `x` coordinates and value of each point in the ball.
    index: Vec<usize>,
    xs: Vec<f64>,
    values: Vec<Complex64>,
    dx: f64,
    pub norm_sq: f64,
    /// `k`-radius per axis that captures the spectrum to `1e−10`.
    pub band: Vec<f64>,
}

impl AdaptedTest {
    pub fn new(lattice: &FiberGaborLattice, anchor: &Anchor, profile: AnchoredProfile) -> Result<Self> {
        let d = lattice.d();
        let c = &lattice.modulation;
        let det = c.determinant().abs();
        let cinv = c
            .clone()
            .try_inverse()
            .filter(|_| det > 0.0)
            .ok_or_else(|| Error::DegenerateFiber {
                lambda: lattice.lambda.clone(),
                value: det,
                epsilon: 0.0,
            })?;
        let sigma = profile.width * anchor.radius;
        if !(sigma > 0.0) {
            return Err(Error::ZeroNorm("anchored test has zero width".into()));
        }
        let reach = REACH_SIGMAS * sigma;
        let mut centre = anchor.centre.clone();
        centre[0] += profile.shift * anchor.radius;
        let mut kc = vec![0.0; d];
        kc[0] = profile.cycles as f64;
        let omega = c * DVector::from_column_slice(&kc);

        let band: Vec<f64> = (0..d)
            .map(|j| band_cut() / sigma * cinv.row(j).norm() + kc[j].abs())
            .collect();
        let step: Vec<f64> = band.iter().map(|b| 1.0 / ((OVERSAMPLE * b).ceil() + 2.0)).collect();
        let yc = c.transpose() * DVector::from_column_slice(&centre);
        let mut start = Vec::with_capacity(d);
        let mut count = Vec::with_capacity(d);
        for j in 0..d {
            let half = reach * c.column(j).norm();
            let lo = ((yc[j] - half) / step[j]).floor() as i64;
            let hi = ((yc[j] + half) / step[j]).ceil() as i64;
            start.push(lo);
            count.push((hi - lo + 1) as usize);
        }
        let total: usize = count.iter().product();
        if total > MAX_POINTS {
            return Err(Error::Precondition(format!(
                "adapted test grid at λ = {:?} needs {total} points",
                lattice.lambda
            )));
        }
        let to_x = cinv.transpose();
        let dx = step.iter().product::<f64>() / det;
        let mut index = Vec::new();
        let mut xs = Vec::new();
        let mut values = Vec::new();
        let mut norm_sq = 0.0;
        let mut y = DVector::zeros(d);
        for flat in 0..total {
            let mut rest = flat;
            for j in (0..d).rev() {
                y[j] = (start[j] + (rest % count[j]) as i64) as f64 * step[j];
                rest /= count[j];
            }
            let x = &to_x * &y;
            let r2: f64 = x.iter().zip(&centre).map(|(a, b)| (a - b) * (a - b)).sum();
            if r2 > reach * reach {
                continue;
            }
            let phase: f64 = x.iter().zip(omega.iter()).map(|(a, b)| a * b).sum();
            let v = Complex64::from_polar((-0.5 * r2 / (sigma * sigma)).exp(), TAU * phase);
            norm_sq += v.norm_sqr() * dx;
            index.push(flat);
            xs.extend(x.iter());
            values.push(v);
        }
        Ok(Self {
            centre,
            reach,
            step,
            start,
            count,
            index,
            xs,
            values,
            dx,
            norm_sq,
            band,
        })
    }

    /// Translations `n ∈ [−radius, radius]^d` whose window copy can meet the
    /// test, and whether the radius cut off any that could.
    pub fn translations(
        &self,
        lattice: &FiberGaborLattice,
        window: &PiecewiseBoxWindow,
        radius: u32,
    ) -> (Vec<Vec<i64>>, bool) {
        let Some((lo, hi)) = window.bounds() else {
            return (Vec::new(), false);
        };
        let r = radius as i64;
        let mut cut = false;
        let ranges: Vec<(i64, i64)> = (0..lattice.d())
            .map(|i| {
                let t = lattice.translation[i];
                let from = ((self.centre[i] - self.reach - hi[i]) / t).floor() as i64 + 1;
                let to = ((self.centre[i] + self.reach - lo[i]) / t).ceil() as i64 - 1;
                cut |= from < -r || to > r;
                (from.max(-r), to.min(r))
            })
            .collect();
        if ranges.iter().any(|(a, b)| a > b) {
            return (Vec::new(), cut);
        }
        let mut out = vec![Vec::new()];
        for &(a, b) in &ranges {
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
        (out, cut)
    }

    /// `⟨F, π(k, n)(factor·w)⟩` for `k ∈ [−K, K]` (row-major), or `None` when
    /// the translate misses the test.
    pub fn coefficients_at(
        &self,
        lattice: &FiberGaborLattice,
        window: &WindowLocator<'_>,
        factor: f64,
        n: &[i64],
        k_radius: &[u32],
    ) -> Option<Vec<Complex64>> {
        let d = lattice.d();
        let shift: Vec<f64> = (0..d).map(|i| n[i] as f64 * lattice.translation[i]).collect();
        let (lo, hi) = window.window().bounds()?;
        let meets = (0..d)
            .all(|i| lo[i] < self.centre[i] + self.reach - shift[i] && hi[i] > self.centre[i] - self.reach - shift[i]);
        if !meets {
            return None;
        }
        let total: usize = self.count.iter().product();
        let mut h = vec![Complex64::new(0.0, 0.0); total];
        let mut any = false;
        let mut moved = vec![0.0; d];
        for (p, (&flat, v)) in self.index.iter().zip(&self.values).enumerate() {
            let x = &self.xs[p * d..(p + 1) * d];
            for i in 0..d {
                moved[i] = x[i] - shift[i];
            }
            let g = window.eval(&moved);
            if g != 0.0 {
                h[flat] = v * (factor * g);
                any = true;
            }
        }
        if !any {
            return None;
        }
        let tables: Vec<Vec<Vec<Complex64>>> = (0..d)
            .map(|j| {
                let kr = k_radius[j] as i64;
                (-kr..=kr)
                    .map(|k| {
                        (0..self.count[j])
                            .map(|i| {
                                let y = (self.start[j] + i as i64) as f64 * self.step[j];
                                Complex64::from_polar(1.0, -TAU * k as f64 * y)
                            })
                            .collect()
                    })
                    .collect()
            })
            .collect();
        let mut out = transform_axes(&h, &self.count, &tables);
        for c in &mut out {
            *c *= self.dx;
        }
        Some(out)
    }
}

/// Per-axis `k`-radius: the band, limited to `cap`; flags whether the cap bit.
pub fn capped_radius(band: &[f64], cap: u32) -> (Vec<u32>, bool) {
    let mut capped = false;
    let radius = band
        .iter()
        .map(|b| {
            let want = b.ceil();
            if want > f64::from(cap) {
                capped = true;
                cap
            } else {
                want as u32
            }
        })
        .collect();
    (radius, capped)
}

/// Whether the row-major position `pos` in a `[−K, K]` box lies on its boundary.
fn on_box_boundary(mut pos: usize, k_radius: &[u32]) -> bool {
    let mut hit = false;
    for &k in k_radius.iter().rev() {
        let side = 2 * k as usize + 1;
        let i = pos % side;
        pos /= side;
        hit |= i == 0 || i + 1 == side;
    }
    hit
}

fn on_n_boundary(n: &[i64], radius: u32, cut: bool) -> bool {
    cut && n.iter().any(|v| v.unsigned_abs() == u64::from(radius))
}

/// Fiber Parseval check with anchored tests.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct AnchoredDefect {
    pub ratios: Vec<f64>,
    pub defect: f64,
    /// Largest share of `‖F‖²` on the outer `k`/`n` shell.
    pub tail: f64,
    pub k_radius: Vec<u32>,
    pub capped: bool,
}

/// `max_F |Σ_{k,n} |⟨F, π(k, n) w⟩|² / ‖F‖² − 1|` over anchored tests, with
/// band-matched `k`-ranges capped at `k_cap` per axis.
pub fn anchored_fiber_defect(
    lattice: &FiberGaborLattice,
    window: &PiecewiseBoxWindow,
    profiles: &[AnchoredProfile],
    k_cap: u32,
    n_radius: u32,
) -> Result<AnchoredDefect> {
    let anchor =
        window_anchor(window, &lattice.translation).ok_or_else(|| Error::ZeroNorm("window has no pieces".into()))?;
    let tests: Vec<AdaptedTest> = profiles
        .iter()
        .map(|p| AdaptedTest::new(lattice, &anchor, *p))
        .collect::<Result<_>>()?;
    let band: Vec<f64> = (0..lattice.d())
        .map(|j| tests.iter().map(|t| t.band[j]).fold(0.0, f64::max))
        .collect();
    let (k_radius, capped) = capped_radius(&band, k_cap);
    let locator = window.locator();
    let mut ratios = Vec::with_capacity(tests.len());
    let mut tail = 0.0f64;
    for test in &tests {
        if test.norm_sq <= 0.0 {
            return Err(Error::ZeroNorm("anchored test has zero norm".into()));
        }
        let (ns, cut) = test.translations(lattice, window, n_radius);
        let mut energy = 0.0;
        let mut shell = 0.0;
        for n in &ns {
            let Some(table) = test.coefficients_at(lattice, &locator, 1.0, n, &k_radius) else {
                continue;
            };
            let edge_n = on_n_boundary(n, n_radius, cut);
            for (pos, c) in table.iter().enumerate() {
                let e = c.norm_sqr();
                energy += e;
                if edge_n || on_box_boundary(pos, &k_radius) {
                    shell += e;
                }
            }
        }
        ratios.push(energy / test.norm_sq);
        tail = tail.max(shell / test.norm_sq);
    }
    let defect = ratios.iter().map(|r| (r - 1.0).abs()).fold(0.0, f64::max);
    Ok(AnchoredDefect {
        ratios,
        defect,
        tail,
        k_radius,
        capped,
    })
}

/// Per-axis kernel `D(δ) = Σ_{m ∈ range} e^{2πi δ m / N}`.
fn dirichlet(counts: &[usize], ranges: &[(i64, i64)]) -> Vec<Vec<Complex64>> {
    counts
        .iter()
        .zip(ranges)
        .map(|(&n, &(lo, hi))| {
            (0..n)
                .map(|delta| {
                    (lo..=hi)
                        .map(|m| Complex64::from_polar(1.0, TAU * delta as f64 * m as f64 / n as f64))
                        .sum()
                })
                .collect()
        })
        .collect()
}

struct ActiveNode<'a> {
    index: Vec<usize>,
    weight: f64,
    factor: f64,
    test: AdaptedTest,
    k_radius: Vec<u32>,
    node: &'a FieldNode,
    locator: WindowLocator<'a>,
}

/// Sum of `a_k conj(b_k)` over the common part of two centred `k`-boxes.
fn box_inner(a: &[Complex64], ra: &[u32], b: &[Complex64], rb: &[u32]) -> Complex64 {
    let d = ra.len();
    let common: Vec<i64> = (0..d).map(|j| ra[j].min(rb[j]) as i64).collect();
    let flat = |k: &[i64], r: &[u32]| {
        k.iter().zip(r).fold(0usize, |acc, (&v, &rr)| {
            acc * (2 * rr as usize + 1) + (v + rr as i64) as usize
        })
    };
    let mut k: Vec<i64> = common.iter().map(|c| -c).collect();
    let mut acc = Complex64::new(0.0, 0.0);
    loop {
        acc += a[flat(&k, ra)] * b[flat(&k, rb)].conj();
        let mut j = d;
        loop {
            if j == 0 {
                return acc;
            }
            j -= 1;
            k[j] += 1;
            if k[j] <= common[j] {
                break;
            }
            k[j] = -common[j];
        }
    }
}

/// Truncated frame energy of an anchored field.
///
/// `h_γ(λ) = ⟨ψ̂(λ), π_λ(γ)η̂(λ)⟩ r(λ)`; its coefficients over the `m`-range
/// are accumulated as `Σ_{j,j'} h_j conj(h_j') ∏ D(j − j')`, the expanded
/// square of the per-`m` sums, which keeps memory at one translation.
pub fn anchored_frame_energy(
    generator: &FrameGeneratorField,
    field: &AnchoredField,
    trunc: TruncationSpec,
    k_cap: u32,
) -> Result<FrameEnergy> {
    let grid = &generator.grid;
    let cell = grid.cell_volume();
    let nodes: Vec<&FieldNode> = generator.nodes.iter().collect();
    let built: Vec<Result<Option<ActiveNode<'_>>>> = par_map(&nodes, |&node| {
        let beta = field.lambda.eval(&node.lambda, &grid.a);
        if beta == 0.0 {
            return Ok(None);
        }
        let anchor = window_anchor(&node.window, &node.lattice.translation)
            .ok_or_else(|| Error::ZeroNorm("window has no pieces".into()))?;
        let test = AdaptedTest::new(&node.lattice, &anchor, field.profile)?;
        let (k_radius, _) = capped_radius(&test.band, k_cap);
        Ok(Some(ActiveNode {
            index: node.index.clone(),
            weight: beta * node.density,
            factor: node.normalization,
            test,
            k_radius,
            node,
            locator: node.window.locator(),
        }))
    });
    let active: Vec<ActiveNode> = built.into_iter().filter_map(|r| r.transpose()).collect::<Result<_>>()?;
    let psi_norm_sq: f64 = active
        .iter()
        .map(|a| {
            let beta = a.weight / a.node.density;
            cell * a.node.density * beta * beta * a.test.norm_sq
        })
        .sum();
    if psi_norm_sq <= 0.0 {
        return Err(Error::ZeroNorm("test field ψ is zero".into()));
    }

    let m_ranges = central_ranges(grid, trunc.m);
    let m_clipped = m_ranges
        .iter()
        .any(|&(lo, hi)| -lo < trunc.m as i64 || hi < trunc.m as i64);
    let kernel = dirichlet(&grid.counts, &m_ranges);
    let kernel_at = |a: &[usize], b: &[usize]| -> Complex64 {
        (0..a.len())
            .map(|t| {
                let n = grid.counts[t];
                kernel[t][(a[t] + n - b[t]) % n]
            })
            .product()
    };
    let peak = active.first().map_or(0.0, |a| kernel_at(&a.index, &a.index).norm());
    let mut pairs: Vec<(usize, usize, Complex64)> = Vec::new();
    for i in 0..active.len() {
        for j in i..active.len() {
            let kv = kernel_at(&active[i].index, &active[j].index);
            if kv.norm() > 1e-9 * peak {
                pairs.push((i, j, kv));
            }
        }
    }

    let mut translations = BTreeSet::new();
    let mut cut = false;
    for a in &active {
        let (ns, c) = a.test.translations(&a.node.lattice, &a.node.window, trunc.n);
        cut |= c;
        translations.extend(ns);
    }
    let mut energy = 0.0;
    let mut shell = 0.0;
    let c2 = cell * cell;
    for n in &translations {
        let tables: Vec<Option<Vec<Complex64>>> = par_map(&active, |a| {
            a.test
                .coefficients_at(&a.node.lattice, &a.locator, a.factor, n, &a.k_radius)
                .map(|t| t.into_iter().map(|c| c * a.weight).collect())
        });
        let edge_n = on_n_boundary(n, trunc.n, cut);
        for &(i, j, kv) in &pairs {
            let (Some(ti), Some(tj)) = (&tables[i], &tables[j]) else {
                continue;
            };
            if i == j {
                for (pos, c) in ti.iter().enumerate() {
                    let e = c2 * kv.re * c.norm_sqr();
                    energy += e;
                    if edge_n || on_box_boundary(pos, &active[i].k_radius) {
                        shell += e;
                    }
                }
            } else {
                let s = box_inner(ti, &active[i].k_radius, tj, &active[j].k_radius);
                energy += 2.0 * c2 * (kv.conj() * s).re;
            }
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

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use crate::lattice::{fiber_lattice, QuasiLatticeParams};
    use crate::window::synthesize_window;

    fn heis(lambda: f64) -> FiberGaborLattice {
        let p = QuasiLatticeParams::from_ints(&[1], &[1], &[1]).unwrap();
        fiber_lattice(&fixtures::heisenberg_algebra(), &p, &[lambda]).unwrap()
    }

    #[test]
    fn anchor_sits_inside_a_piece() {
        let l = heis(0.5);
        let w = synthesize_window(&l, 64).unwrap();
        let a = window_anchor(&w, &l.translation).unwrap();
        assert!(a.radius > 0.0);
        assert_eq!(w.count(&a.centre), 1);
    }

    #[test]
    fn heisenberg_fiber_is_parseval() {
        let l = heis(0.5);
        let w = synthesize_window(&l, 64).unwrap();
        let r = anchored_fiber_defect(&l, &w, &standard_anchored_profiles(), 64, 8).unwrap();
        assert!(!r.capped);
        assert!(r.defect < 1e-6, "{r:?}");
    }

    #[test]
    fn zero_k_range_loses_energy() {
        let l = heis(0.5);
        let w = synthesize_window(&l, 64).unwrap();
        let r = anchored_fiber_defect(&l, &w, &standard_anchored_profiles(), 0, 8).unwrap();
        assert!(r.capped);
        assert!(r.ratios.iter().all(|&x| x < 0.9), "{r:?}");
    }

    #[test]
    fn example2_fiber_is_parseval() {
        let p = QuasiLatticeParams::from_ints(&[2, 3], &[1, 1], &[3, 3]).unwrap();
        let l = fiber_lattice(&fixtures::example2_algebra(), &p, &[0.5625, 2.8125]).unwrap();
        let w = synthesize_window(&l, 4096).unwrap();
        let r = anchored_fiber_defect(&l, &w, &standard_anchored_profiles(), 256, 8).unwrap();
        assert!(r.defect < 1e-6, "{r:?}");
    }

    #[test]
    fn boundary_positions() {
        // [−1, 1] × [−2, 2]: 3 × 5
        assert!(on_box_boundary(0, &[1, 2]));
        assert!(!on_box_boundary(7, &[1, 2]));
        assert!(on_box_boundary(9, &[1, 2]));
        assert!(on_box_boundary(0, &[0]));
    }
}
