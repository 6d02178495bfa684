//! Step-two nilpotent Lie algebras given by structure constants in a
//! Z/Y/X split basis, and the structural checks for the supported class.
//!
//! Basis order is fixed as `Z₁..Z_c, Y₁..Y_d, X₁..X_d` with `c = n − 2d`.
//! Internally all indices are 0-based; labels such as `"X2"` are 1-based.

use std::collections::BTreeMap;
use std::fmt;

use num_rational::BigRational;
use num_traits::Zero;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rational::Rational;
use crate::spectral;

/// Which block of the split basis an index belongs to.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Block {
    Z,
    Y,
    X,
}

/// `algebra` section of the config document.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AlgebraDocument {
    pub n: usize,
    pub d: usize,
    #[serde(default)]
    pub brackets: Vec<BracketEntry>,
}

/// One nonzero bracket `[left, right] = Σ value_k Z_k`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BracketEntry {
    pub pair: [String; 2],
    pub value: Vec<Rational>,
}

/// Normalized structure constants.
///
/// Only pairs `(i, j)` with `i < j` are stored; each value is the central
/// coordinate vector of `[b_i, b_j]`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LieAlgebraSpec {
    n: usize,
    d: usize,
    brackets: BTreeMap<(usize, usize), Vec<BigRational>>,
}

impl LieAlgebraSpec {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn d(&self) -> usize {
        self.d
    }

    /// Dimension of the center, `n − 2d`.
    pub fn center_dim(&self) -> usize {
        self.n - 2 * self.d
    }

    pub fn brackets(&self) -> &BTreeMap<(usize, usize), Vec<BigRational>> {
        &self.brackets
    }

    pub fn block(&self, index: usize) -> Block {
        let c = self.center_dim();
        if index < c {
            Block::Z
        } else if index < c + self.d {
            Block::Y
        } else {
            Block::X
        }
    }

    pub fn z_index(&self, i: usize) -> usize {
        i
    }

    pub fn y_index(&self, i: usize) -> usize {
        self.center_dim() + i
    }

    pub fn x_index(&self, i: usize) -> usize {
        self.center_dim() + self.d + i
    }

    /// Human label of a basis index, e.g. `"Y2"`.
    pub fn label(&self, index: usize) -> String {
        let c = self.center_dim();
        match self.block(index) {
            Block::Z => format!("Z{}", index + 1),
            Block::Y => format!("Y{}", index - c + 1),
            Block::X => format!("X{}", index - c - self.d + 1),
        }
    }

    /// Resolve a label like `"X1"` to its 0-based basis index.
    pub fn parse_label(&self, label: &str) -> Result<usize> {
        let t = label.trim();
        let bad = || Error::Malformed(format!("bad basis label {label:?}"));
        let mut chars = t.chars();
        let head = chars.next().ok_or_else(bad)?;
        let k: usize = chars.as_str().parse().map_err(|_| bad())?;
        let (limit, offset) = match head.to_ascii_uppercase() {
            'Z' => (self.center_dim(), 0),
            'Y' => (self.d, self.center_dim()),
            'X' => (self.d, self.center_dim() + self.d),
            _ => return Err(bad()),
        };
        if k == 0 || k > limit {
            return Err(Error::IndexOutOfRange(format!("{label} (block has {limit} elements)")));
        }
        Ok(offset + k - 1)
    }

    /// Structure constants of `[b_i, b_j]` for any ordered pair.
    pub fn basis_bracket(&self, i: usize, j: usize) -> Vec<BigRational> {
        let c = self.center_dim();
        if i == j {
            return vec![BigRational::zero(); c];
        }
        let (key, sign) = if i < j { ((i, j), 1) } else { ((j, i), -1) };
        match self.brackets.get(&key) {
            Some(v) if sign > 0 => v.clone(),
            Some(v) => v.iter().map(|x| -x).collect(),
            None => vec![BigRational::zero(); c],
        }
    }

    /// Bilinear antisymmetric extension of the stored brackets. The result
    /// is a length-`n` coefficient vector supported on the central block.
    pub fn bracket(&self, u: &[BigRational], v: &[BigRational]) -> Result<Vec<BigRational>> {
        for (name, w) in [("u", u), ("v", v)] {
            if w.len() != self.n {
                return Err(Error::DimensionMismatch {
                    what: format!("bracket argument {name}"),
                    expected: self.n,
                    got: w.len(),
                });
            }
        }
        let mut out = vec![BigRational::zero(); self.n];
        for (&(i, j), val) in &self.brackets {
            let w = &u[i] * &v[j] - &u[j] * &v[i];
            if w.is_zero() {
                continue;
            }
            for (k, c) in val.iter().enumerate() {
                out[k] += &w * c;
            }
        }
        Ok(out)
    }

    /// Matrix of `ad(b_k)` acting on coefficient vectors (column j is
    /// `[b_k, b_j]`).
    pub fn ad_matrix(&self, k: usize) -> Vec<Vec<BigRational>> {
        let mut m = vec![vec![BigRational::zero(); self.n]; self.n];
        for j in 0..self.n {
            for (z, c) in self.basis_bracket(k, j).into_iter().enumerate() {
                m[z][j] = c;
            }
        }
        m
    }

    pub fn unit(&self, index: usize) -> Vec<BigRational> {
        let mut v = vec![BigRational::zero(); self.n];
        v[index] = num_traits::One::one();
        v
    }
}

impl fmt::Display for LieAlgebraSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "n={}, d={}", self.n, self.d)?;
        for (&(i, j), v) in &self.brackets {
            let rhs: Vec<String> = v
                .iter()
                .enumerate()
                .filter(|(_, c)| !c.is_zero())
                .map(|(k, c)| format!("{}·Z{}", crate::rational::format_rational(c), k + 1))
                .collect();
            write!(f, "; [{},{}]={}", self.label(i), self.label(j), rhs.join("+"))?;
        }
        Ok(())
    }
}

/// Normalize an algebra document: canonical `(i < j)` keys, exact values.
pub fn load_spec(doc: &AlgebraDocument) -> Result<LieAlgebraSpec> {
    if doc.d == 0 {
        return Err(Error::Malformed("algebra.d must be positive".into()));
    }
    if doc.n <= 2 * doc.d {
        return Err(Error::Malformed(format!(
            "algebra.n = {} must exceed 2·d = {}",
            doc.n,
            2 * doc.d
        )));
    }
    let mut spec = LieAlgebraSpec {
        n: doc.n,
        d: doc.d,
        brackets: BTreeMap::new(),
    };
    let c = spec.center_dim();
    for (idx, entry) in doc.brackets.iter().enumerate() {
        if entry.value.len() != c {
            return Err(Error::DimensionMismatch {
                what: format!("algebra.brackets[{idx}].value"),
                expected: c,
                got: entry.value.len(),
            });
        }
        let i = spec.parse_label(&entry.pair[0])?;
        let j = spec.parse_label(&entry.pair[1])?;
        if i == j {
            return Err(Error::Malformed(format!(
                "algebra.brackets[{idx}]: bracket of {} with itself",
                entry.pair[0]
            )));
        }
        let mut value: Vec<BigRational> = entry.value.iter().map(|r| r.0.clone()).collect();
        let key = if i < j {
            (i, j)
        } else {
            value.iter_mut().for_each(|x| *x = -x.clone());
            (j, i)
        };
        if spec.brackets.contains_key(&key) {
            return Err(Error::Malformed(format!(
                "algebra.brackets[{idx}]: pair [{}, {}] given twice",
                entry.pair[0], entry.pair[1]
            )));
        }
        if value.iter().any(|x| !x.is_zero()) {
            spec.brackets.insert(key, value);
        }
    }
    Ok(spec)
}

pub fn load_spec_json(text: &str) -> Result<LieAlgebraSpec> {
    let doc: AlgebraDocument = serde_json::from_str(text).map_err(|e| Error::Malformed(e.to_string()))?;
    load_spec(&doc)
}

/// One named structural check.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub checks: Vec<Check>,
    pub passed: bool,
}

impl ValidationReport {
    fn from_checks(checks: Vec<Check>) -> Self {
        let passed = checks.iter().all(|c| c.passed);
        Self { checks, passed }
    }

    pub fn check(&self, name: &str) -> Option<&Check> {
        self.checks.iter().find(|c| c.name == name)
    }
}

fn nonzero_pairs(spec: &LieAlgebraSpec, pred: impl Fn(Block, Block) -> bool) -> Vec<String> {
    spec.brackets
        .keys()
        .filter(|&&(i, j)| pred(spec.block(i), spec.block(j)))
        .map(|&(i, j)| format!("[{},{}]", spec.label(i), spec.label(j)))
        .collect()
}

fn list_check(name: &str, offenders: Vec<String>, ok: &str) -> Check {
    Check {
        name: name.into(),
        passed: offenders.is_empty(),
        detail: if offenders.is_empty() {
            ok.into()
        } else {
            format!("nonzero: {}", offenders.join(", "))
        },
    }
}

/// Run the class checks. Failures are report entries, never errors.
pub fn validate_class(spec: &LieAlgebraSpec) -> ValidationReport {
    let mut checks = Vec::new();

    checks.push(list_check(
        "two_step_centrality",
        nonzero_pairs(spec, |a, b| a == Block::Z || b == Block::Z),
        "Z block is central; all brackets land in the center",
    ));
    checks.push(list_check(
        "p_abelian",
        nonzero_pairs(spec, |a, b| a == Block::Y && b == Block::Y),
        "brackets among Y vanish",
    ));
    checks.push(list_check(
        "m_abelian",
        nonzero_pairs(spec, |a, b| a == Block::X && b == Block::X),
        "brackets among X vanish",
    ));

    let xy = nonzero_pairs(spec, |a, b| {
        (a == Block::Y && b == Block::X) || (a == Block::X && b == Block::Y)
    });
    checks.push(Check {
        name: "nontrivial_action".into(),
        passed: !xy.is_empty(),
        detail: if xy.is_empty() {
            "no nonzero [X, Y] bracket".into()
        } else {
            format!("{} nonzero [X, Y] brackets", xy.len())
        },
    });

    let det_b = spectral::build_matrices(spec).b.determinant();
    checks.push(Check {
        name: "det_b_nonvanishing".into(),
        passed: !det_b.is_zero(),
        detail: format!("det B(λ) = {det_b}"),
    });

    // ±X_k share the same ad up to sign; checking X_k covers both.
    let mut bad = Vec::new();
    for k in 0..spec.d() {
        let idx = spec.x_index(k);
        let ad = spec.ad_matrix(idx);
        let nonzero = ad.iter().flatten().any(|x| !x.is_zero());
        let square_zero = mat_square_is_zero(&ad);
        if !nonzero {
            bad.push(format!("ad {} = 0", spec.label(idx)));
        }
        if !square_zero {
            bad.push(format!("(ad {})² ≠ 0", spec.label(idx)));
        }
    }
    checks.push(Check {
        name: "ad_nilpotent_nonzero".into(),
        passed: bad.is_empty(),
        detail: if bad.is_empty() {
            format!("ad(±X_k) ≠ 0 and (ad ±X_k)² = 0 for k = 1..{}", spec.d())
        } else {
            bad.join(", ")
        },
    });

    ValidationReport::from_checks(checks)
}

fn mat_square_is_zero(m: &[Vec<BigRational>]) -> bool {
    let n = m.len();
    (0..n).all(|i| {
        (0..n).all(|j| {
            (0..n)
                .fold(BigRational::zero(), |acc, k| acc + &m[i][k] * &m[k][j])
                .is_zero()
        })
    })
}

/// Jump indices of the generic layer (1-based): always the top `2d` block.
///
/// The generic rank of `M(λ)` is computed by fraction-free elimination over
/// the rational-function field; a rank below `2d`, or a nullspace that is
/// not the central span, puts the algebra outside the supported class.
pub fn jump_indices(spec: &LieAlgebraSpec) -> Result<Vec<usize>> {
    let mats = spectral::build_matrices(spec);
    let rank = mats.m.generic_rank();
    let expected = 2 * spec.d();
    if rank < expected {
        return Err(Error::RankDeficient { rank, expected });
    }
    let c = spec.center_dim();
    let central_cols_zero = (0..spec.n()).all(|i| (0..c).all(|j| mats.m.get(i, j).is_zero()));
    if rank != expected || !central_cols_zero {
        return Err(Error::Precondition(format!(
            "nullspace of M(λ) is not the central span (rank {rank}, expected {expected})"
        )));
    }
    Ok((c + 1..=spec.n()).collect())
}
