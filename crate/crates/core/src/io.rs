//! JSON file formats for systems and Taylor coefficient sequences.
//!
//! Complex entries are written as `[re, im]`; plain numbers are accepted on
//! input as real entries. Matrices are lists of rows.

use std::path::Path;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::colligation::{BareRealization, Colligation};
use crate::error::{Error, Result};
use crate::indefinite::{SignatureSpace, Tolerances};
use crate::matrix::ComplexMatrix;
use crate::schur::TransferFunction;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Entry {
    Complex([f64; 2]),
    Real(f64),
}

impl Entry {
    fn value(self) -> Complex64 {
        match self {
            Entry::Complex([re, im]) => Complex64::new(re, im),
            Entry::Real(re) => Complex64::new(re, 0.0),
        }
    }
}

pub type MatrixData = Vec<Vec<Entry>>;

pub fn matrix_to_data(m: &ComplexMatrix) -> MatrixData {
    (0..m.nrows())
        .map(|i| {
            (0..m.ncols())
                .map(|j| Entry::Complex([m[(i, j)].re, m[(i, j)].im]))
                .collect()
        })
        .collect()
}

pub fn matrix_from_data(
    data: &MatrixData,
    rows: usize,
    cols: usize,
    field: &str,
) -> Result<ComplexMatrix> {
    if data.len() != rows && !(rows == 0 && data.is_empty()) {
        return Err(Error::Parse(format!(
            "field {field}: expected {rows} rows, found {}",
            data.len()
        )));
    }
    let mut m = ComplexMatrix::zeros(rows, cols);
    for (i, row) in data.iter().enumerate() {
        if row.len() != cols {
            return Err(Error::Parse(format!(
                "field {field}, row {i}: expected {cols} entries, found {}",
                row.len()
            )));
        }
        for (j, e) in row.iter().enumerate() {
            let v = e.value();
            if !(v.re.is_finite() && v.im.is_finite()) {
                return Err(Error::Parse(format!(
                    "field {field}, entry ({i}, {j}) is not finite"
                )));
            }
            m[(i, j)] = v;
        }
    }
    Ok(m)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct StateSpec {
    pub pos: usize,
    pub neg: usize,
}

/// Optional overrides of the default tolerances.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ToleranceOverrides {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rank_tol: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub psd_tol: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub metric_tol: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub boundary_samples: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub disc_samples: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
}

impl ToleranceOverrides {
    pub fn apply(&self, base: Tolerances) -> Tolerances {
        Tolerances {
            rank_tol: self.rank_tol.unwrap_or(base.rank_tol),
            psd_tol: self.psd_tol.unwrap_or(base.psd_tol),
            metric_tol: self.metric_tol.unwrap_or(base.metric_tol),
            boundary_samples: self.boundary_samples.unwrap_or(base.boundary_samples),
            disc_samples: self.disc_samples.unwrap_or(base.disc_samples),
            seed: self.seed.unwrap_or(base.seed),
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Metadata {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tolerances: Option<ToleranceOverrides>,
    /// Free-form certificates attached to constructed systems.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub certificates: Option<serde_json::Value>,
}

/// A system on disk. Without `state` the file holds a metric-free
/// realization.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SystemFile {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub state: Option<StateSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub state_dim: Option<usize>,
    pub input_dim: usize,
    pub output_dim: usize,
    #[serde(rename = "A")]
    pub a: MatrixData,
    #[serde(rename = "B")]
    pub b: MatrixData,
    #[serde(rename = "C")]
    pub c: MatrixData,
    #[serde(rename = "D")]
    pub d: MatrixData,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub metadata: Option<Metadata>,
}

fn parse_json<T: serde::de::DeserializeOwned>(text: &str) -> Result<T> {
    serde_json::from_str(text)
        .map_err(|e| Error::Parse(format!("line {}, column {}: {e}", e.line(), e.column())))
}

fn read(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|e| Error::Parse(format!("{}: {e}", path.display())))
}

impl SystemFile {
    pub fn from_colligation(sys: &Colligation, name: Option<&str>) -> Self {
        let mut f = Self::from_bare(sys.bare(), name);
        f.state = Some(StateSpec {
            pos: sys.state().pos(),
            neg: sys.state().neg(),
        });
        f.state_dim = None;
        f
    }

    pub fn from_bare(r: &BareRealization, name: Option<&str>) -> Self {
        SystemFile {
            state: None,
            state_dim: Some(r.state_dim()),
            input_dim: r.input_dim(),
            output_dim: r.output_dim(),
            a: matrix_to_data(r.a()),
            b: matrix_to_data(r.b()),
            c: matrix_to_data(r.c()),
            d: matrix_to_data(r.d()),
            metadata: name.map(|n| Metadata {
                name: Some(n.to_string()),
                ..Metadata::default()
            }),
        }
    }

    pub fn from_transfer_function(s: &TransferFunction, name: Option<&str>) -> Self {
        match s.colligation() {
            Some(sys) => Self::from_colligation(sys, name),
            None => Self::from_bare(s.realization(), name),
        }
    }

    pub fn with_certificates(mut self, certificates: serde_json::Value) -> Self {
        self.metadata
            .get_or_insert_with(Metadata::default)
            .certificates = Some(certificates);
        self
    }

    fn state_size(&self) -> Result<usize> {
        match (self.state, self.state_dim) {
            (Some(s), None) => Ok(s.pos + s.neg),
            (Some(s), Some(n)) if n == s.pos + s.neg => Ok(n),
            (Some(s), Some(n)) => Err(Error::Parse(format!(
                "field state_dim: {n} disagrees with state pos + neg = {}",
                s.pos + s.neg
            ))),
            (None, Some(n)) => Ok(n),
            (None, None) => Ok(self.a.len()),
        }
    }

    pub fn to_bare(&self) -> Result<BareRealization> {
        let n = self.state_size()?;
        let (m, p) = (self.input_dim, self.output_dim);
        BareRealization::new(
            matrix_from_data(&self.a, n, n, "A")?,
            matrix_from_data(&self.b, n, m, "B")?,
            matrix_from_data(&self.c, p, n, "C")?,
            matrix_from_data(&self.d, p, m, "D")?,
        )
    }

    pub fn to_colligation(&self) -> Result<Colligation> {
        let s = self.state.ok_or_else(|| {
            Error::Parse("field state: required for a system with a state metric".into())
        })?;
        Colligation::from_bare(SignatureSpace::new(s.pos, s.neg), self.to_bare()?)
    }

    pub fn to_transfer_function(&self) -> Result<TransferFunction> {
        match self.state {
            Some(_) => Ok(TransferFunction::from_colligation(self.to_colligation()?)),
            None => Ok(TransferFunction::from_bare(self.to_bare()?)),
        }
    }

    pub fn tolerances(&self, base: Tolerances) -> Tolerances {
        self.metadata
            .as_ref()
            .and_then(|m| m.tolerances)
            .map_or(base, |o| o.apply(base))
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let f: SystemFile = parse_json(text)?;
        f.to_bare()?;
        Ok(f)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("system files always serialize")
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_json(&read(path)?)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_json() + "\n")
            .map_err(|e| Error::Parse(format!("{}: {e}", path.display())))
    }
}

/// Taylor coefficients h₀, h₁, … of a function at the origin.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TaylorFile {
    pub input_dim: usize,
    pub output_dim: usize,
    pub order_bound: usize,
    pub coefficients: Vec<MatrixData>,
}

impl TaylorFile {
    pub fn from_json(text: &str) -> Result<Self> {
        parse_json(text)
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_json(&read(path)?)
    }

    pub fn matrices(&self) -> Result<Vec<ComplexMatrix>> {
        self.coefficients
            .iter()
            .enumerate()
            .map(|(k, c)| {
                matrix_from_data(
                    c,
                    self.output_dim,
                    self.input_dim,
                    &format!("coefficients[{k}]"),
                )
            })
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::schur::blaschke_potapov_factor;

    fn blaschke(alpha: f64) -> Colligation {
        let e = ComplexMatrix::from_element(1, 1, Complex64::new(1.0, 0.0));
        blaschke_potapov_factor(
            Complex64::new(alpha, 0.0),
            Complex64::new(1.0, 0.0),
            &e,
            &Tolerances::default(),
        )
        .unwrap()
    }

    #[test]
    fn round_trip_is_bit_stable() {
        let sys = blaschke(0.3);
        let f = SystemFile::from_colligation(&sys, Some("b"));
        let text = f.to_json();
        let g = SystemFile::from_json(&text).unwrap();
        assert_eq!(f, g);
        assert_eq!(g.to_colligation().unwrap(), sys);
        assert_eq!(g.to_json(), text);
    }

    #[test]
    fn real_entries_and_overrides() {
        let text = r#"{"state":{"pos":1,"neg":0},"input_dim":1,"output_dim":1,
            "A":[[0.5]],"B":[[[1.0,0.0]]],"C":[[0.25]],"D":[[0]],
            "metadata":{"name":"x","tolerances":{"metric_tol":1e-6}}}"#;
        let f = SystemFile::from_json(text).unwrap();
        let sys = f.to_colligation().unwrap();
        assert_eq!(sys.a()[(0, 0)], Complex64::new(0.5, 0.0));
        assert_eq!(f.tolerances(Tolerances::default()).metric_tol, 1e-6);
    }

    #[test]
    fn shape_errors_name_the_field() {
        let text = r#"{"state":{"pos":1,"neg":0},"input_dim":1,"output_dim":1,
            "A":[[0.5]],"B":[[1.0, 2.0]],"C":[[0.25]],"D":[[0]]}"#;
        let e = SystemFile::from_json(text).unwrap_err();
        assert!(e.to_string().contains("field B"));
        let e = SystemFile::from_json("{\"state\": ").unwrap_err();
        assert!(matches!(e, Error::Parse(ref m) if m.contains("line 1")));
    }

    #[test]
    fn empty_state_and_bare_files() {
        let sys = Colligation::static_gain(crate::matrix::identity(2));
        let g = SystemFile::from_json(&SystemFile::from_colligation(&sys, None).to_json()).unwrap();
        assert_eq!(g.to_colligation().unwrap(), sys);
        let bare = SystemFile::from_bare(blaschke(0.5).bare(), None);
        let h = SystemFile::from_json(&bare.to_json()).unwrap();
        assert!(h.to_colligation().is_err());
        assert_eq!(
            h.to_transfer_function().unwrap().realization(),
            blaschke(0.5).bare()
        );
    }
}
