//! Smooth test functions in the Plancherel domain.

use num_complex::Complex64;
use serde::Serialize;
use std::f64::consts::TAU;

use super::sampling::{SampledFunction, XGrid};
use crate::window::{FrameGeneratorField, LambdaGrid};

/// Gaussian times a plane wave, in units of the translation step per axis.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct XProfile {
    pub centre: f64,
    pub sigma: f64,
    pub cycles: f64,
}

impl XProfile {
    pub fn eval(&self, x: &[f64], translation: &[f64], drift: f64) -> Complex64 {
        let mut mag = 1.0;
        let mut phase = 0.0;
        for (xi, ti) in x.iter().zip(translation) {
            let u = xi / ti;
            let t = (u - self.centre - drift) / self.sigma;
            mag *= (-0.5 * t * t).exp();
            phase += self.cycles * u;
        }
        Complex64::from_polar(mag, TAU * phase)
    }

    pub fn sample(&self, grid: &XGrid, translation: &[f64]) -> SampledFunction {
        SampledFunction::from_fn(grid.clone(), |x| self.eval(x, translation, 0.0))
    }
}

/// The three x-profiles used for per-fiber defects.
pub fn standard_x_profiles() -> [XProfile; 3] {
    [
        XProfile {
            centre: 0.5,
            sigma: 0.06,
            cycles: 0.0,
        },
        XProfile {
            centre: 0.45,
            sigma: 0.07,
            cycles: 1.0,
        },
        XProfile {
            centre: 0.55,
            sigma: 0.05,
            cycles: -1.0,
        },
    ]
}

/// `C^∞` bump supported on `[lo, hi]` (fractions of `a`) on every axis.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct LambdaBump {
    pub lo: f64,
    pub hi: f64,
}

impl LambdaBump {
    pub fn eval(&self, lambda: &[f64], a: &[f64]) -> f64 {
        lambda
            .iter()
            .zip(a)
            .map(|(l, a)| {
                let s = (2.0 * l / a - self.lo - self.hi) / (self.hi - self.lo);
                if s.abs() >= 1.0 {
                    0.0
                } else {
                    (1.0 - 1.0 / (1.0 - s * s)).exp()
                }
            })
            .product()
    }
}

/// A separable test field whose x-centre drifts slowly with `λ`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TestField {
    pub name: String,
    pub x: XProfile,
    pub lambda: LambdaBump,
    pub drift: f64,
}

pub fn standard_test_fields() -> Vec<TestField> {
    vec![
        TestField {
            name: "gauss-centred".into(),
            x: XProfile {
                centre: 0.5,
                sigma: 0.1,
                cycles: 0.0,
            },
            lambda: LambdaBump { lo: 0.3, hi: 1.0 },
            drift: 0.0,
        },
        TestField {
            name: "gauss-chirped".into(),
            x: XProfile {
                centre: 0.45,
                sigma: 0.12,
                cycles: 1.0,
            },
            lambda: LambdaBump { lo: 0.5, hi: 0.95 },
            drift: 0.05,
        },
        TestField {
            name: "gauss-offset".into(),
            x: XProfile {
                centre: 0.6,
                sigma: 0.09,
                cycles: -2.0,
            },
            lambda: LambdaBump { lo: 0.35, hi: 0.9 },
            drift: -0.04,
        },
    ]
}

#[derive(Clone, Debug, PartialEq)]
pub struct FieldSample {
    pub index: Vec<usize>,
    pub lambda: Vec<f64>,
    pub density: f64,
    pub values: SampledFunction,
}

/// `F(λ)` sampled at the nodes of a generator field's `λ`-grid.
#[derive(Clone, Debug, PartialEq)]
pub struct BandlimitedField {
    pub grid: LambdaGrid,
    pub nodes: Vec<FieldSample>,
}

impl BandlimitedField {
    /// `‖ψ‖² = Σ ‖F(λ)‖² r(λ) · cell`.
    pub fn norm_sq(&self) -> f64 {
        let cell = self.grid.cell_volume();
        self.nodes.iter().map(|n| n.values.norm_sq() * n.density * cell).sum()
    }

    pub fn scaled(&self, c: Complex64) -> Self {
        Self {
            grid: self.grid.clone(),
            nodes: self
                .nodes
                .iter()
                .map(|n| FieldSample {
                    values: n.values.scaled(c),
                    ..n.clone()
                })
                .collect(),
        }
    }

    /// Sample a test field on the nodes of `generator`, with `x_points`
    /// samples per translation step over `cells` steps.
    pub fn from_test(generator: &FrameGeneratorField, test: &TestField, x_points: usize, cells: usize) -> Self {
        let t = generator.params.b_f64().iter().map(|b| 1.0 / b).collect::<Vec<_>>();
        let xg = XGrid::for_lattice(&t, x_points, cells);
        let a = &generator.grid.a;
        let nodes = generator
            .nodes
            .iter()
            .map(|n| {
                let beta = test.lambda.eval(&n.lambda, a);
                let drift = test.drift * (TAU * n.lambda[0] / a[0]).sin();
                let values = SampledFunction::from_fn(xg.clone(), |x| beta * test.x.eval(x, &t, drift));
                FieldSample {
                    index: n.index.clone(),
                    lambda: n.lambda.clone(),
                    density: n.density,
                    values,
                }
            })
            .collect();
        Self {
            grid: generator.grid.clone(),
            nodes,
        }
    }

    /// The generator `η` itself, sampled on aligned grids.
    pub fn from_generator(generator: &FrameGeneratorField, x_points: usize) -> Self {
        let step: Vec<f64> = generator
            .params
            .b_f64()
            .iter()
            .map(|b| 1.0 / (b * x_points as f64))
            .collect();
        let nodes = generator
            .nodes
            .iter()
            .map(|n| FieldSample {
                index: n.index.clone(),
                lambda: n.lambda.clone(),
                density: n.density,
                values: super::sampling::sample_window(&n.window, &step, n.normalization),
            })
            .collect();
        Self {
            grid: generator.grid.clone(),
            nodes,
        }
    }
}
