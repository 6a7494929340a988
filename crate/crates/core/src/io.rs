//! JSON formats for states, projectors and local unitaries.
//!
//! A state is `{"dims": [d1, ...], "re": [...], "im": [...]}` with amplitudes
//! in row-major order, party 1 most significant. A projector is
//! `{"dims": [...], "basis": [state, ...]}`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::CMatrix;
use crate::state::{PureState, SystemShape, C64};
use crate::subspace::SubspaceProjector;

/// Squared-norm slack accepted without `renormalize`.
pub const NORM_TOL: f64 = 1e-10;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StateFile {
    pub dims: Vec<usize>,
    pub re: Vec<f64>,
    pub im: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProjectorFile {
    pub dims: Vec<usize>,
    pub basis: Vec<StateFile>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MatrixFile {
    /// Row-major.
    pub re: Vec<Vec<f64>>,
    pub im: Vec<Vec<f64>>,
}

fn parse_err(e: serde_json::Error) -> Error {
    Error::Parse(format!("line {}, column {}: {e}", e.line(), e.column()))
}

impl StateFile {
    pub fn from_state(state: &PureState) -> Self {
        StateFile {
            dims: state.shape().dims().to_vec(),
            re: state.amplitudes().iter().map(|z| z.re).collect(),
            im: state.amplitudes().iter().map(|z| z.im).collect(),
        }
    }

    pub fn to_state(&self, renormalize: bool) -> Result<PureState> {
        let shape = SystemShape::new(self.dims.clone())?;
        if self.re.len() != self.im.len() {
            return Err(Error::Parse(format!("field 'im': {} entries, 're' has {}", self.im.len(), self.re.len())));
        }
        if self.re.len() != shape.total_dim() {
            return Err(Error::LengthMismatch { expected: shape.total_dim(), got: self.re.len() });
        }
        let amps: Vec<C64> = self.re.iter().zip(&self.im).map(|(&r, &i)| C64::new(r, i)).collect();
        if amps.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::Parse("amplitudes must be finite".into()));
        }
        if renormalize {
            PureState::new(shape, amps)
        } else {
            PureState::from_normalized(shape, amps, NORM_TOL)
        }
    }
}

pub fn state_to_json(state: &PureState) -> String {
    let mut s = serde_json::to_string_pretty(&StateFile::from_state(state)).expect("plain data serializes");
    s.push('\n');
    s
}

pub fn state_from_json(text: &str, renormalize: bool) -> Result<PureState> {
    let f: StateFile = serde_json::from_str(text).map_err(parse_err)?;
    f.to_state(renormalize)
}

pub fn projector_to_json(p: &SubspaceProjector) -> String {
    let f = ProjectorFile {
        dims: p.shape().dims().to_vec(),
        basis: p.basis().iter().map(StateFile::from_state).collect(),
    };
    let mut s = serde_json::to_string_pretty(&f).expect("plain data serializes");
    s.push('\n');
    s
}

/// Reads a projector; the basis must be orthonormal.
pub fn projector_from_json(text: &str, renormalize: bool) -> Result<SubspaceProjector> {
    let f: ProjectorFile = serde_json::from_str(text).map_err(parse_err)?;
    let basis = f.basis.iter().map(|b| b.to_state(renormalize)).collect::<Result<Vec<_>>>()?;
    for b in &basis {
        if b.shape().dims() != f.dims.as_slice() {
            return Err(Error::Parse(format!("basis state dims {:?} differ from {:?}", b.shape().dims(), f.dims)));
        }
    }
    SubspaceProjector::new(basis)
}

impl MatrixFile {
    pub fn from_matrix(m: &CMatrix) -> Self {
        let rows = |f: fn(&C64) -> f64| (0..m.nrows()).map(|i| (0..m.ncols()).map(|j| f(&m[(i, j)])).collect()).collect();
        MatrixFile { re: rows(|z| z.re), im: rows(|z| z.im) }
    }

    pub fn to_matrix(&self) -> Result<CMatrix> {
        let r = self.re.len();
        let c = self.re.first().map_or(0, |row| row.len());
        let ragged = self.re.iter().chain(&self.im).any(|row| row.len() != c);
        if self.im.len() != r || ragged {
            return Err(Error::Parse("matrix rows have inconsistent lengths".into()));
        }
        Ok(CMatrix::from_fn(r, c, |i, j| C64::new(self.re[i][j], self.im[i][j])))
    }
}

pub fn unitaries_to_json(us: &[CMatrix]) -> String {
    let f: Vec<MatrixFile> = us.iter().map(MatrixFile::from_matrix).collect();
    let mut s = serde_json::to_string_pretty(&f).expect("plain data serializes");
    s.push('\n');
    s
}

pub fn unitaries_from_json(text: &str) -> Result<Vec<CMatrix>> {
    let f: Vec<MatrixFile> = serde_json::from_str(text).map_err(parse_err)?;
    f.iter().map(MatrixFile::to_matrix).collect()
}
