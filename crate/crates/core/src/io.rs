//! JSON formats. Complex matrices are row-major nested arrays whose entries
//! are `[re, im]` pairs; plain numbers are accepted as real entries.

use num_complex::Complex64;
use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::colligation::AglerColligation;
use crate::error::{Error, Result};
use crate::kernel::KernelSampleSet;
use crate::matrix::{CMatrix, Tolerances};
use crate::pencil::{Pencil, PsdPencil, RealizedFunction};

#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum Entry {
    Pair([f64; 2]),
    Real(f64),
}

impl From<Entry> for Complex64 {
    fn from(e: Entry) -> Self {
        match e {
            Entry::Pair([re, im]) => Complex64::new(re, im),
            Entry::Real(re) => Complex64::new(re, 0.0),
        }
    }
}

fn pair(z: &Complex64) -> [f64; 2] {
    [z.re, z.im]
}

fn matrix_rows(m: &CMatrix) -> Vec<Vec<[f64; 2]>> {
    (0..m.nrows()).map(|i| m.row(i).iter().map(pair).collect()).collect()
}

fn matrix_from_rows(rows: Vec<Vec<Entry>>) -> std::result::Result<CMatrix, String> {
    let nrows = rows.len();
    let ncols = rows.first().map(|r| r.len()).unwrap_or(0);
    if rows.iter().any(|r| r.len() != ncols) {
        return Err("matrix rows have different lengths".into());
    }
    let data: Vec<Complex64> = rows.into_iter().flatten().map(Complex64::from).collect();
    Ok(CMatrix::from_row_iterator(nrows, ncols, data))
}

/// `#[serde(with = "matrix")]` for a single [`CMatrix`].
pub mod matrix {
    use super::*;

    pub fn serialize<S: Serializer>(m: &CMatrix, s: S) -> std::result::Result<S::Ok, S::Error> {
        matrix_rows(m).serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<CMatrix, D::Error> {
        let rows = Vec::<Vec<Entry>>::deserialize(d)?;
        matrix_from_rows(rows).map_err(D::Error::custom)
    }
}

/// `#[serde(with = "matrices")]` for `Vec<CMatrix>`.
pub mod matrices {
    use super::*;

    pub fn serialize<S: Serializer>(ms: &[CMatrix], s: S) -> std::result::Result<S::Ok, S::Error> {
        ms.iter().map(matrix_rows).collect::<Vec<_>>().serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<Vec<CMatrix>, D::Error> {
        Vec::<Vec<Vec<Entry>>>::deserialize(d)?
            .into_iter()
            .map(|rows| matrix_from_rows(rows).map_err(D::Error::custom))
            .collect()
    }
}

/// `#[serde(with = "points")]` for `Vec<Vec<Complex64>>`.
pub mod points {
    use super::*;

    pub fn serialize<S: Serializer>(ps: &[Vec<Complex64>], s: S) -> std::result::Result<S::Ok, S::Error> {
        ps.iter()
            .map(|p| p.iter().map(pair).collect::<Vec<_>>())
            .collect::<Vec<_>>()
            .serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<Vec<Vec<Complex64>>, D::Error> {
        Ok(Vec::<Vec<Entry>>::deserialize(d)?
            .into_iter()
            .map(|p| p.into_iter().map(Complex64::from).collect())
            .collect())
    }
}

fn depth(v: &serde_json::Value) -> usize {
    match v {
        serde_json::Value::Array(items) => 1 + items.iter().map(depth).max().unwrap_or(0),
        serde_json::Value::Object(map) => 1 + map.values().map(depth).max().unwrap_or(0),
        _ => 0,
    }
}

fn layout(v: &serde_json::Value, indent: usize, out: &mut String) {
    let pad = "  ".repeat(indent + 1);
    match v {
        serde_json::Value::Array(items) if depth(v) > 2 && !items.is_empty() => {
            out.push_str("[\n");
            for (i, item) in items.iter().enumerate() {
                out.push_str(&pad);
                layout(item, indent + 1, out);
                out.push_str(if i + 1 < items.len() { ",\n" } else { "\n" });
            }
            out.push_str(&"  ".repeat(indent));
            out.push(']');
        }
        serde_json::Value::Object(map) if !map.is_empty() => {
            out.push_str("{\n");
            for (i, (k, item)) in map.iter().enumerate() {
                out.push_str(&pad);
                out.push_str(&serde_json::Value::String(k.clone()).to_string());
                out.push_str(": ");
                layout(item, indent + 1, out);
                out.push_str(if i + 1 < map.len() { ",\n" } else { "\n" });
            }
            out.push_str(&"  ".repeat(indent));
            out.push('}');
        }
        other => out.push_str(&other.to_string()),
    }
}

/// Indented JSON with matrix rows kept on one line each.
pub fn to_json_layout<T: Serialize>(value: &T) -> String {
    let v = serde_json::to_value(value).expect("serializable");
    let mut out = String::new();
    layout(&v, 0, &mut out);
    out
}

pub fn matrix_to_value(m: &CMatrix) -> serde_json::Value {
    serde_json::to_value(matrix_rows(m)).expect("finite matrix")
}

pub fn matrix_from_value(v: serde_json::Value) -> Result<CMatrix> {
    let rows: Vec<Vec<Entry>> = serde_json::from_value(v)?;
    matrix_from_rows(rows).map_err(Error::Invalid)
}

pub fn matrix_to_json(m: &CMatrix) -> String {
    matrix_to_value(m).to_string()
}

pub fn matrix_from_json(text: &str) -> Result<CMatrix> {
    matrix_from_value(serde_json::from_str(text)?)
}

#[derive(Serialize, Deserialize)]
struct PointList(#[serde(with = "points")] Vec<Vec<Complex64>>);

pub fn points_to_json(ps: &[Vec<Complex64>]) -> String {
    serde_json::to_string(&PointList(ps.to_vec())).expect("finite points")
}

/// Accepts a single point (`[[re, im], …]`) or a list of points.
/// A flat list of pairs is read as one point.
pub fn points_from_json(text: &str) -> Result<Vec<Vec<Complex64>>> {
    if let Ok(single) = serde_json::from_str::<Vec<Entry>>(text) {
        return Ok(vec![single.into_iter().map(Complex64::from).collect()]);
    }
    let PointList(ps) = serde_json::from_str(text)?;
    Ok(ps)
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct PencilJson {
    #[serde(rename = "N")]
    pub num_vars: usize,
    pub n: usize,
    pub p: usize,
    #[serde(with = "matrices")]
    pub coeffs: Vec<CMatrix>,
}

impl PencilJson {
    pub fn from_pencil(p: &Pencil) -> Self {
        Self {
            num_vars: p.num_vars(),
            n: p.dim_u(),
            p: p.dim_h(),
            coeffs: p.coeffs().to_vec(),
        }
    }

    /// Shape-checked, PSD-ness not required.
    pub fn to_pencil(&self) -> Result<Pencil> {
        if self.coeffs.len() != self.num_vars {
            return Err(Error::Dimension(format!(
                "N = {} but {} coefficients given",
                self.num_vars,
                self.coeffs.len()
            )));
        }
        Pencil::new(self.n, self.p, self.coeffs.clone())
    }

    pub fn to_realized(&self, tol: Tolerances) -> Result<RealizedFunction> {
        RealizedFunction::new(PsdPencil::new(self.to_pencil()?, &tol)?, tol)
    }
}

pub fn pencil_to_json(p: &Pencil) -> String {
    to_json_layout(&PencilJson::from_pencil(p))
}

pub fn pencil_from_json(text: &str) -> Result<Pencil> {
    serde_json::from_str::<PencilJson>(text)?.to_pencil()
}

#[derive(Serialize, Deserialize)]
struct KernelJson {
    #[serde(with = "points")]
    grid: Vec<Vec<Complex64>>,
    factors: Vec<FactorList>,
    #[serde(with = "matrices")]
    f_samples: Vec<CMatrix>,
}

#[derive(Serialize, Deserialize)]
struct FactorList(#[serde(with = "matrices")] Vec<CMatrix>);

pub fn kernels_to_json(ks: &KernelSampleSet) -> String {
    let j = KernelJson {
        grid: ks.grid.clone(),
        factors: ks.factors.iter().cloned().map(FactorList).collect(),
        f_samples: ks.f_samples.clone(),
    };
    to_json_layout(&j)
}

pub fn kernels_from_json(text: &str) -> Result<KernelSampleSet> {
    let j: KernelJson = serde_json::from_str(text)?;
    let ks = KernelSampleSet {
        grid: j.grid,
        factors: j.factors.into_iter().map(|f| f.0).collect(),
        f_samples: j.f_samples,
    };
    ks.validate()?;
    Ok(ks)
}

#[derive(Serialize, Deserialize)]
struct ColligationJson {
    dims: Vec<usize>,
    n: usize,
    #[serde(rename = "U", with = "matrix")]
    u: CMatrix,
    selfadjoint: bool,
}

pub fn colligation_to_json(c: &AglerColligation) -> String {
    let j = ColligationJson {
        dims: c.dims().to_vec(),
        n: c.io_dim(),
        u: c.u().clone(),
        selfadjoint: c.is_selfadjoint(),
    };
    to_json_layout(&j)
}

/// Loads and validates a colligation with the given tolerances.
pub fn colligation_from_json(text: &str, tol: &Tolerances) -> Result<AglerColligation> {
    let j: ColligationJson = serde_json::from_str(text)?;
    AglerColligation::new(j.dims, j.n, j.u, j.selfadjoint, tol)
}
