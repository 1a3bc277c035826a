//! JSON format for systems.
//!
//! ```json
//! {"type": {"nx": 1, "ny": 1, "nz": 1, "r": 2, "s": 1},
//!  "polys": [{"degree": [1, 1, 0], "terms": {"1,0|1,0|0,0": "7", "0,1|0,1|0,0": "-1/2"}}],
//!  "f0": null}
//! ```
//!
//! A block written as a single `0` stands for the zero exponent of that block.

use std::collections::BTreeMap;
use std::path::Path;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::multihomo::{BilinearSystem, Exponent, MHPoly, MultiDegree, SystemType};

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(untagged)]
enum CoeffRepr {
    Int(i64),
    Text(String),
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct PolyRepr {
    degree: [usize; 3],
    terms: BTreeMap<String, CoeffRepr>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct SystemRepr {
    #[serde(rename = "type")]
    ty: SystemType,
    polys: Vec<PolyRepr>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    f0: Option<PolyRepr>,
}

/// Parses `"7"`, `"-3/4"` or an integer literal.
pub fn parse_rational(s: &str) -> Result<BigRational> {
    let s = s.trim();
    let err = || Error::Parse(format!("bad coefficient {s:?}"));
    match s.split_once('/') {
        Some((n, d)) => {
            let n: BigInt = n.trim().parse().map_err(|_| err())?;
            let d: BigInt = d.trim().parse().map_err(|_| err())?;
            if d.is_zero() {
                return Err(err());
            }
            Ok(BigRational::new(n, d))
        }
        None => Ok(BigRational::from_integer(s.parse().map_err(|_| err())?)),
    }
}

/// Integer when the denominator is one, `p/q` otherwise.
pub fn format_rational(q: &BigRational) -> String {
    if q.denom().is_one() {
        q.numer().to_string()
    } else {
        format!("{}/{}", q.numer(), q.denom())
    }
}

fn parse_key(key: &str, dims: [usize; 3]) -> Result<Exponent> {
    let blocks: Vec<&str> = key.split('|').collect();
    if blocks.len() != 3 {
        return Err(Error::Parse(format!("exponent key {key:?} needs three blocks")));
    }
    let mut parsed = Vec::with_capacity(3);
    for (b, n) in blocks.iter().zip(dims) {
        if b.trim() == "0" && n > 0 {
            parsed.push(vec![0u32; n + 1]);
            continue;
        }
        let v = b
            .split(',')
            .map(|p| p.trim().parse::<u32>())
            .collect::<std::result::Result<Vec<_>, _>>()
            .map_err(|_| Error::Parse(format!("bad exponent block {b:?} in {key:?}")))?;
        parsed.push(v);
    }
    let z = parsed.pop().expect("three blocks");
    let y = parsed.pop().expect("three blocks");
    let x = parsed.pop().expect("three blocks");
    Ok(Exponent::new(x, y, z))
}

fn poly_from_repr(p: &PolyRepr, dims: [usize; 3]) -> Result<MHPoly> {
    let degree = MultiDegree::new(p.degree[0], p.degree[1], p.degree[2]);
    let mut out = MHPoly::zero(dims, degree);
    for (k, c) in &p.terms {
        let coeff = match c {
            CoeffRepr::Int(v) => BigRational::from_integer((*v).into()),
            CoeffRepr::Text(s) => parse_rational(s)?,
        };
        out.add_term(parse_key(k, dims)?, coeff)?;
    }
    Ok(out)
}

fn poly_to_repr(p: &MHPoly) -> PolyRepr {
    PolyRepr {
        degree: p.degree().as_array(),
        terms: p.terms().map(|(e, c)| (e.key(), CoeffRepr::Text(format_rational(c)))).collect(),
    }
}

/// Parses a system from its JSON text.
pub fn parse_system(text: &str) -> Result<BilinearSystem> {
    let repr: SystemRepr = serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
    repr.ty.validate()?;
    let dims = repr.ty.dims();
    let f = repr.polys.iter().map(|p| poly_from_repr(p, dims)).collect::<Result<Vec<_>>>()?;
    let f0 = repr.f0.as_ref().map(|p| poly_from_repr(p, dims)).transpose()?;
    BilinearSystem::new(repr.ty, f, f0)
}

pub fn load_system(path: &Path) -> Result<BilinearSystem> {
    let text =
        std::fs::read_to_string(path).map_err(|e| Error::Parse(format!("cannot read {}: {e}", path.display())))?;
    parse_system(&text)
}

/// JSON value of a system, in the format accepted by [`parse_system`].
pub fn system_to_value(sys: &BilinearSystem) -> serde_json::Value {
    let repr = SystemRepr {
        ty: sys.system_type(),
        polys: sys.equations().iter().map(poly_to_repr).collect(),
        f0: sys.f0().map(poly_to_repr),
    };
    serde_json::to_value(repr).expect("serializable")
}

pub fn system_to_json(sys: &BilinearSystem) -> String {
    serde_json::to_string_pretty(&system_to_value(sys)).expect("serializable")
}
