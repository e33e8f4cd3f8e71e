//! JSON records shared by the command-line tool.
//!
//! A polynomial is `{"d": 2, "m": 4, "coeffs": [1, -5, 4]}` (standard order,
//! monic) or `{"roots": [1, 4]}`. A finite R-transform is
//! `{"d": 2, "m": 4, "r_coeffs": [0, a1, a2]}`. Outputs carry a
//! `schema_version`.

use std::path::Path;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::finite::FiniteR;
use crate::poly::{NonnegPoly, RectParams};
use crate::scalar::{exact_vec, Exact, Scalar};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PolyRecord {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub schema_version: Option<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub d: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub m: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub coeffs: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub roots: Option<Vec<f64>>,
}

impl PolyRecord {
    /// Output record with both coefficients and (when they can be computed)
    /// roots.
    pub fn from_poly<T: Scalar>(p: &NonnegPoly<T>, params: Option<&RectParams>) -> Self {
        PolyRecord {
            schema_version: Some(SCHEMA_VERSION),
            d: Some(p.degree()),
            m: params.map(RectParams::m),
            coeffs: Some(p.to_f64().coeffs().to_vec()),
            roots: p.roots().ok().map(|r| r.into_vec()),
        }
    }

    /// The polynomial in exact arithmetic, from `coeffs` when present (output
    /// records carry both) and otherwise from `roots`. A given `d` must match
    /// the degree.
    pub fn to_poly(&self) -> Result<NonnegPoly<Exact>> {
        let p = match (&self.coeffs, &self.roots) {
            (Some(c), _) => NonnegPoly::from_coeffs(exact_vec(c).map_err(usage)?).map_err(|e| match e {
                Error::RealRootedness { .. } | Error::ComplexRoots { .. } | Error::NegativeRoot { .. } => {
                    Error::Usage(format!("coefficients do not describe a polynomial with nonnegative roots: {e}"))
                }
                other => usage(other),
            })?,
            (None, Some(r)) => NonnegPoly::from_roots(&exact_vec(r).map_err(usage)?).map_err(usage)?,
            (None, None) => return Err(Error::Usage("polynomial record needs \"coeffs\" or \"roots\"".into())),
        };
        if let Some(d) = self.d {
            if d != p.degree() {
                return Err(Error::Usage(format!("record says d = {d} but the polynomial has degree {}", p.degree())));
            }
        }
        Ok(p)
    }
}

fn usage(e: Error) -> Error {
    match e {
        Error::Usage(_) => e,
        other => Error::Usage(other.to_string()),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FiniteRRecord {
    #[serde(default = "default_version")]
    pub schema_version: u32,
    pub d: usize,
    pub m: usize,
    pub r_coeffs: Vec<f64>,
}

fn default_version() -> u32 {
    SCHEMA_VERSION
}

impl FiniteRRecord {
    pub fn from_finite_r<T: Scalar>(r: &FiniteR<T>) -> Self {
        FiniteRRecord {
            schema_version: SCHEMA_VERSION,
            d: r.params().d(),
            m: r.params().m(),
            r_coeffs: r.to_f64().coeffs().to_vec(),
        }
    }

    pub fn to_finite_r(&self) -> Result<FiniteR<Exact>> {
        let params = RectParams::new(self.d, self.m)?;
        FiniteR::new(params, exact_vec(&self.r_coeffs).map_err(usage)?).map_err(usage)
    }
}

/// Reads a record from inline JSON (anything starting with `{`) or from a
/// file path.
pub fn load_record<T: DeserializeOwned>(arg: &str) -> Result<T> {
    let text = if arg.trim_start().starts_with('{') {
        arg.to_string()
    } else {
        std::fs::read_to_string(Path::new(arg)).map_err(|e| Error::Io(format!("{arg}: {e}")))?
    };
    Ok(serde_json::from_str(&text)?)
}
