//! JSON serialization of states, decompositions, maps and run reports.
//!
//! All formats carry a `"v": 1` schema version. States come in two shapes:
//! Bell probabilities `{"v":1,"p":[..]}` or a dense Hermitian matrix
//! `{"v":1,"dim":4,"re":[[..]],"im":[[..]]}`.

use std::collections::BTreeMap;

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::lqcc::{Filtration, LqccMap};
use crate::lsd::{EnsembleTerm, LsDecomposition};
use crate::matrix::{ComplexMatrix, ComplexVector, Tolerances};
use crate::qstate::{bd_to_density, BellDiagonal, DensityMatrix, PureState};

pub const SCHEMA_VERSION: u32 = 1;

fn default_version() -> u32 {
    SCHEMA_VERSION
}

/// Dense complex matrix as parallel real/imaginary row-major grids.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MatrixJson {
    pub dim: usize,
    pub re: Vec<Vec<f64>>,
    pub im: Vec<Vec<f64>>,
}

impl MatrixJson {
    pub fn from_matrix(m: &ComplexMatrix) -> Self {
        let n = m.dim();
        let grid = |f: fn(&C64) -> f64| -> Vec<Vec<f64>> {
            (0..n)
                .map(|i| (0..n).map(|j| f(&m[(i, j)])).collect())
                .collect()
        };
        MatrixJson {
            dim: n,
            re: grid(|z| z.re),
            im: grid(|z| z.im),
        }
    }

    pub fn to_matrix(&self) -> Result<ComplexMatrix> {
        let n = self.dim;
        if self.re.len() != n
            || self.im.len() != n
            || self.re.iter().any(|r| r.len() != n)
            || self.im.iter().any(|r| r.len() != n)
        {
            return Err(Error::InvalidState(format!(
                "matrix grids do not match dim {n}"
            )));
        }
        let mut m = ComplexMatrix::zeros(n);
        for i in 0..n {
            for j in 0..n {
                m[(i, j)] = C64::new(self.re[i][j], self.im[i][j]);
            }
        }
        Ok(m)
    }
}

/// Complex vector as parallel real/imaginary component lists.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct VectorJson {
    pub re: Vec<f64>,
    pub im: Vec<f64>,
}

impl VectorJson {
    pub fn from_vector(v: &ComplexVector) -> Self {
        VectorJson {
            re: v.entries().iter().map(|z| z.re).collect(),
            im: v.entries().iter().map(|z| z.im).collect(),
        }
    }

    pub fn to_vector(&self) -> Result<ComplexVector> {
        if self.re.len() != self.im.len() {
            return Err(Error::InvalidState(
                "vector re/im lengths differ".into(),
            ));
        }
        Ok(ComplexVector::new(
            self.re
                .iter()
                .zip(&self.im)
                .map(|(&r, &i)| C64::new(r, i))
                .collect(),
        ))
    }
}

/// Input state: Bell probabilities or a dense matrix.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(untagged)]
pub enum StateJson {
    Bell {
        #[serde(default = "default_version")]
        v: u32,
        p: [f64; 4],
    },
    Dense {
        #[serde(default = "default_version")]
        v: u32,
        dim: usize,
        re: Vec<Vec<f64>>,
        im: Vec<Vec<f64>>,
    },
}

/// Validated state plus Bell probabilities when the input is Bell-diagonal.
#[derive(Debug, Clone)]
pub struct StateInput {
    pub rho: DensityMatrix,
    pub bd: Option<BellDiagonal>,
}

/// Syntactic parse of a state file; schema errors stay `serde_json::Error`
/// so callers can distinguish parse failures from validation failures.
pub fn parse_state_json(text: &str) -> std::result::Result<StateJson, serde_json::Error> {
    serde_json::from_str(text)
}

/// Semantic validation of a parsed state.
pub fn validate_state(s: &StateJson, tol: &Tolerances) -> Result<StateInput> {
    match s {
        StateJson::Bell { p, .. } => {
            let bd = BellDiagonal::new(*p)?;
            Ok(StateInput {
                rho: bd_to_density(&bd, tol),
                bd: Some(bd),
            })
        }
        StateJson::Dense { dim, re, im, .. } => {
            let m = MatrixJson {
                dim: *dim,
                re: re.clone(),
                im: im.clone(),
            }
            .to_matrix()?;
            let rho = DensityMatrix::new(m, tol)?;
            let (p, exact) = crate::qstate::density_to_bd(&rho);
            let bd = if exact { BellDiagonal::new(p).ok() } else { None };
            Ok(StateInput { rho, bd })
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EnsembleTermJson {
    pub weight: f64,
    pub state: VectorJson,
}

/// Serialized decomposition: weights, normalized product states, the pure
/// part, and the separable part both dense and (when available) as Bell
/// probabilities.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LsDecompositionJson {
    #[serde(default = "default_version")]
    pub v: u32,
    pub lambda: f64,
    pub separable: MatrixJson,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub p_prime: Option<[f64; 4]>,
    pub ensemble: Vec<EnsembleTermJson>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub psi: Option<VectorJson>,
}

impl LsDecompositionJson {
    pub fn from_decomposition(d: &LsDecomposition) -> Self {
        LsDecompositionJson {
            v: SCHEMA_VERSION,
            lambda: d.lambda,
            separable: MatrixJson::from_matrix(d.separable.matrix()),
            p_prime: d.separable_bd.map(|b| b.p()),
            ensemble: d
                .ensemble
                .iter()
                .map(|t| EnsembleTermJson {
                    weight: t.weight,
                    state: VectorJson::from_vector(t.state.vector()),
                })
                .collect(),
            psi: d.psi.as_ref().map(|p| VectorJson::from_vector(p.vector())),
        }
    }

    pub fn to_decomposition(&self, tol: &Tolerances) -> Result<LsDecomposition> {
        let separable = DensityMatrix::new(self.separable.to_matrix()?, tol)?;
        let separable_bd = match self.p_prime {
            Some(p) => Some(BellDiagonal::new(p)?),
            None => None,
        };
        let ensemble = self
            .ensemble
            .iter()
            .map(|t| {
                Ok(EnsembleTerm {
                    weight: t.weight,
                    state: PureState::new(t.state.to_vector()?)?,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        let psi = match &self.psi {
            Some(v) => Some(PureState::new(v.to_vector()?)?),
            None => None,
        };
        Ok(LsDecomposition {
            lambda: self.lambda,
            separable,
            separable_bd,
            ensemble,
            psi,
        })
    }
}

/// Serialized LQCC map.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LqccMapJson {
    #[serde(default = "default_version")]
    pub v: u32,
    #[serde(rename = "U_A")]
    pub u_a: MatrixJson,
    #[serde(rename = "U_B")]
    pub u_b: MatrixJson,
    pub f_a: FiltrationJson,
    pub f_b: FiltrationJson,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FiltrationJson {
    pub mu: f64,
    pub a: f64,
    pub m: [f64; 3],
}

impl LqccMapJson {
    pub fn from_map(map: &LqccMap) -> Self {
        let f = |x: &Filtration| FiltrationJson {
            mu: x.mu,
            a: x.a,
            m: x.m,
        };
        LqccMapJson {
            v: SCHEMA_VERSION,
            u_a: MatrixJson::from_matrix(&map.u_a),
            u_b: MatrixJson::from_matrix(&map.u_b),
            f_a: f(&map.f_a),
            f_b: f(&map.f_b),
        }
    }

    pub fn to_map(&self) -> Result<LqccMap> {
        LqccMap::new(
            self.u_a.to_matrix()?,
            self.u_b.to_matrix()?,
            Filtration::new(self.f_a.mu, self.f_a.a, self.f_a.m)?,
            Filtration::new(self.f_b.mu, self.f_b.a, self.f_b.m)?,
        )
    }
}

pub fn parse_map_json(text: &str) -> std::result::Result<LqccMapJson, serde_json::Error> {
    serde_json::from_str(text)
}

/// SHA-256 digest of raw input bytes, hex-encoded.
pub fn sha256_hex(bytes: &[u8]) -> String {
    let mut h = Sha256::new();
    h.update(bytes);
    h.finalize().iter().map(|b| format!("{b:02x}")).collect()
}

/// Machine-readable run report emitted by the CLI.
#[derive(Debug, Clone, Serialize)]
pub struct Report {
    pub v: u32,
    pub command: String,
    /// Input label -> SHA-256 of the raw bytes.
    pub inputs: BTreeMap<String, String>,
    pub tolerances: Tolerances,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    pub wall_time_ms: u128,
    pub outputs: serde_json::Value,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub residuals: Option<serde_json::Value>,
}

impl Report {
    pub fn new(command: &str, tol: &Tolerances) -> Self {
        Report {
            v: SCHEMA_VERSION,
            command: command.to_string(),
            inputs: BTreeMap::new(),
            tolerances: *tol,
            seed: None,
            wall_time_ms: 0,
            outputs: serde_json::Value::Null,
            residuals: None,
        }
    }

    pub fn record_input(&mut self, label: &str, bytes: &[u8]) {
        self.inputs.insert(label.to_string(), sha256_hex(bytes));
    }
}
