//! Randomized search for `f` positive real on `Π^N` and a strictly accretive
//! commuting tuple `R` with `f(R) + f(R)*` not PSD.
//!
//! Pencil-backed candidates cannot produce a violation and act as controls.
//! Other candidates are black-box evaluators applied to simultaneously
//! diagonalizable tuples through the joint spectrum.

use num_complex::Complex64;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::calculus::{calc_pencil, pencil_scale, make_tuple, pointwise_calculus, positivity_report, CommutingTuple, TupleClass, TupleRecipe};
use crate::error::{Error, Result};
use crate::function::{FnFunction, MatrixFunction};
use crate::io::{self, PencilJson};
use crate::matrix::{CMatrix, Tolerances};
use crate::sampling::{complex_normal, random_matrix, random_pencil, seeded, PencilShape};

/// A named black-box candidate.
pub struct BlackBox {
    pub name: String,
    pub f: Box<dyn MatrixFunction>,
}

/// `exp((1/N) Σ log z_k)`: homogeneous of degree one and positive real.
pub fn geometric_mean(num_vars: usize) -> BlackBox {
    let f = FnFunction::new(num_vars, 1, move |z: &[Complex64]| {
        let mean = z.iter().map(|c| c.ln()).sum::<Complex64>() / num_vars as f64;
        Ok(CMatrix::from_element(1, 1, mean.exp()))
    });
    BlackBox {
        name: "geometric_mean".into(),
        f: Box::new(f),
    }
}

/// Built-in black boxes by name.
pub fn black_box(name: &str, num_vars: usize) -> Result<BlackBox> {
    match name {
        "geometric_mean" => Ok(geometric_mean(num_vars)),
        other => Err(Error::Invalid(format!("unknown black-box candidate `{other}`"))),
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct HuntConfig {
    pub num_vars: usize,
    pub trials: usize,
    pub seed: u64,
    /// Tuples act on `C^m` with `m ≤ max_dim`.
    pub max_dim: usize,
    pub max_n: usize,
    pub max_p: usize,
    /// Draw a random pencil candidate in every trial.
    pub pencils: bool,
}

impl Default for HuntConfig {
    fn default() -> Self {
        Self {
            num_vars: 3,
            trials: 100,
            seed: 0,
            max_dim: 4,
            max_n: 2,
            max_p: 3,
            pencils: true,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Candidate {
    Pencil(PencilRecord),
    BlackBox { name: String, num_vars: usize },
}

/// Pencil JSON with equality for the log.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(transparent)]
pub struct PencilRecord(pub PencilJson);

impl PartialEq for PencilRecord {
    fn eq(&self, other: &Self) -> bool {
        self.0.num_vars == other.0.num_vars && self.0.n == other.0.n && self.0.p == other.0.p && self.0.coeffs == other.0.coeffs
    }
}

/// One trial; `norm` is `λ_min(f(R) + f(R)*)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HuntRecord {
    pub candidate: Candidate,
    #[serde(with = "io::matrices")]
    pub tuple: Vec<CMatrix>,
    pub norm: f64,
    pub violation: bool,
}

impl HuntRecord {
    pub fn to_json_line(&self) -> String {
        serde_json::to_string(self).expect("finite record")
    }

    pub fn from_json_line(line: &str) -> Result<Self> {
        Ok(serde_json::from_str(line)?)
    }
}

pub fn to_ndjson(records: &[HuntRecord]) -> String {
    records.iter().map(|r| r.to_json_line() + "\n").collect()
}

pub fn from_ndjson(text: &str) -> Result<Vec<HuntRecord>> {
    text.lines().filter(|l| !l.trim().is_empty()).map(HuntRecord::from_json_line).collect()
}

/// Simultaneously diagonalizable strictly accretive tuple `V diag V⁻¹` with
/// `V` near unitary and joint spectrum in `Π^N`.
pub fn random_accretive_tuple<R: Rng + ?Sized>(rng: &mut R, num_vars: usize, dim: usize, tol: &Tolerances) -> Result<CommutingTuple> {
    let base = random_matrix(rng, dim, dim);
    let mut spread = 0.4;
    for _ in 0..40 {
        let v = CMatrix::identity(dim, dim) + base.scale(spread / (dim as f64).sqrt());
        let diagonals: Vec<Vec<Complex64>> = (0..num_vars)
            .map(|_| {
                (0..dim)
                    .map(|_| {
                        let c = complex_normal(rng) * 2.0;
                        Complex64::new(0.05 + c.re.abs(), c.im)
                    })
                    .collect()
            })
            .collect();
        if let Ok(t) = make_tuple(TupleRecipe::Similarity { v, diagonals }, Some(TupleClass::Accretive), tol) {
            return Ok(t);
        }
        spread *= 0.8;
    }
    Err(Error::Margin("could not draw an accretive tuple".into()))
}

fn evaluate(value: &CMatrix, scale: f64, tol: &Tolerances) -> Result<(f64, bool)> {
    let rep = positivity_report(value, scale, tol)?;
    Ok((rep.min_eigenvalue, !rep.psd))
}

/// Runs `config.trials` trials; each draws one tuple and evaluates every
/// candidate on it. Records come in trial order.
pub fn hunt(config: &HuntConfig, black_boxes: &[BlackBox], tol: &Tolerances) -> Result<Vec<HuntRecord>> {
    if config.num_vars == 0 || config.max_dim == 0 || config.max_n == 0 {
        return Err(Error::Invalid("hunt needs N, max_dim and max_n positive".into()));
    }
    for b in black_boxes {
        if b.f.num_vars() != config.num_vars {
            return Err(Error::Dimension(format!("candidate {} has {} variables", b.name, b.f.num_vars())));
        }
    }
    let mut rng = seeded(config.seed);
    let mut out = Vec::new();
    for _ in 0..config.trials {
        let dim = rng.random_range(1..=config.max_dim);
        let tuple = random_accretive_tuple(&mut rng, config.num_vars, dim, tol)?;
        if config.pencils {
            let shape = PencilShape {
                num_vars: config.num_vars,
                n: rng.random_range(1..=config.max_n),
                p: rng.random_range(0..=config.max_p),
            };
            let real = rng.random::<bool>();
            let f = random_pencil(&mut rng, shape, real, *tol)?;
            let (norm, violation) = evaluate(&calc_pencil(f.pencil(), tuple.ops(), tol)?, pencil_scale(f.pencil(), tuple.ops()), tol)?;
            out.push(HuntRecord {
                candidate: Candidate::Pencil(PencilRecord(PencilJson::from_pencil(f.pencil()))),
                tuple: tuple.ops().to_vec(),
                norm,
                violation,
            });
        }
        let diag = tuple.diagonalization().expect("similarity tuples keep their diagonalization");
        for b in black_boxes {
            let (norm, violation) = evaluate(&pointwise_calculus(b.f.as_ref(), diag)?, 0.0, tol)?;
            out.push(HuntRecord {
                candidate: Candidate::BlackBox {
                    name: b.name.clone(),
                    num_vars: config.num_vars,
                },
                tuple: tuple.ops().to_vec(),
                norm,
                violation,
            });
        }
    }
    Ok(out)
}
