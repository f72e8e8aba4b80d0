//! Instance files: one JSON document per instance, tagged by `kind`.
//!
//! Symmetric matrices are packed row-major upper triangles; bounds are
//! `{"lo": number | "-inf", "hi": number | "+inf"}`. [`write_instance`]
//! produces the canonical form, and parsing then writing a canonical file
//! reproduces it byte for byte.

use nalgebra::DMatrix;
use serde::de::{self, Deserializer};
use serde::ser::Serializer;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{SymMatrix, Vector};
use crate::model::{ilp_to_uq, BallIntersection, Bound, QcqpInstance, Sense, UqInstance};

/// A bound endpoint: finite number or signed infinity.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Endpoint(pub f64);

impl Serialize for Endpoint {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        if self.0 == f64::INFINITY {
            s.serialize_str("+inf")
        } else if self.0 == f64::NEG_INFINITY {
            s.serialize_str("-inf")
        } else {
            s.serialize_f64(self.0)
        }
    }
}

impl<'de> Deserialize<'de> for Endpoint {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Num(f64),
            Str(String),
        }
        match Raw::deserialize(d)? {
            Raw::Num(v) => Ok(Endpoint(v)),
            Raw::Str(s) => match s.as_str() {
                "+inf" | "inf" => Ok(Endpoint(f64::INFINITY)),
                "-inf" => Ok(Endpoint(f64::NEG_INFINITY)),
                other => Err(de::Error::custom(format!(
                    "expected a number, \"-inf\" or \"+inf\", got \"{other}\""
                ))),
            },
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BoundEntry {
    pub lo: Endpoint,
    pub hi: Endpoint,
}

impl BoundEntry {
    fn to_bound(self, field: &str) -> Result<Bound> {
        let lower = match self.lo.0 {
            v if v == f64::NEG_INFINITY => None,
            v if v.is_finite() => Some(v),
            _ => return Err(Error::Parse(format!("{field}.lo: \"+inf\" is not a lower bound"))),
        };
        let upper = match self.hi.0 {
            v if v == f64::INFINITY => None,
            v if v.is_finite() => Some(v),
            _ => return Err(Error::Parse(format!("{field}.hi: \"-inf\" is not an upper bound"))),
        };
        Bound::new(lower, upper).map_err(|e| Error::Parse(format!("{field}: {e}")))
    }

    fn from_bound(b: &Bound) -> Self {
        BoundEntry {
            lo: Endpoint(b.lower.unwrap_or(f64::NEG_INFINITY)),
            hi: Endpoint(b.upper.unwrap_or(f64::INFINITY)),
        }
    }
}

/// On-disk form of every instance kind.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum InstanceFile {
    /// `max xᵀQx + 2b₀ᵀx + d₀  s.t.  lo_i ≤ xᵀQx + 2b_iᵀx + d_i ≤ hi_i`
    Uq {
        n: usize,
        q: Vec<f64>,
        b: Vec<Vec<f64>>,
        d: Vec<f64>,
        bounds: Vec<BoundEntry>,
    },
    Qcqp {
        n: usize,
        sense: Sense,
        blocks: Vec<Vec<f64>>,
        signs: Vec<Vec<i8>>,
        b: Vec<Vec<f64>>,
        c: Vec<f64>,
        bounds: Vec<BoundEntry>,
    },
    Balls {
        n: usize,
        centers: Vec<Vec<f64>>,
        radii: Vec<f64>,
    },
    /// `max cᵀx  s.t.  Ax ≤ rhs,  x ∈ {0,1}ⁿ`
    Ilp {
        n: usize,
        c: Vec<f64>,
        a: Vec<Vec<f64>>,
        rhs: Vec<f64>,
    },
}

/// Binary linear program `max cᵀx s.t. Ax ≤ rhs`.
#[derive(Debug, Clone, PartialEq)]
pub struct IlpProblem {
    pub c: Vector,
    pub a: DMatrix<f64>,
    pub rhs: Vector,
}

impl IlpProblem {
    pub fn to_uq(&self) -> Result<UqInstance> {
        ilp_to_uq(&self.c, &self.a, &self.rhs)
    }
}

#[derive(Debug, Clone)]
pub enum Instance {
    Uq(UqInstance),
    Qcqp(QcqpInstance),
    Balls(BallIntersection),
    Ilp(IlpProblem),
}

impl Instance {
    pub fn kind(&self) -> &'static str {
        match self {
            Instance::Uq(_) => "uq",
            Instance::Qcqp(_) => "qcqp",
            Instance::Balls(_) => "balls",
            Instance::Ilp(_) => "ilp",
        }
    }
}

fn vector(field: &str, v: &[f64], n: usize) -> Result<Vector> {
    if v.len() != n {
        return Err(Error::Parse(format!("{field}: expected {n} entries, got {}", v.len())));
    }
    Ok(Vector::from_row_slice(v))
}

fn packed(field: &str, v: &[f64], n: usize) -> Result<SymMatrix> {
    SymMatrix::from_upper(n, v.to_vec()).map_err(|e| Error::Parse(format!("{field}: {e}")))
}

fn in_field<T>(field: &str, r: Result<T>) -> Result<T> {
    r.map_err(|e| match e {
        Error::Parse(m) => Error::Parse(m),
        other => Error::Parse(format!("{field}: {other}")),
    })
}

impl InstanceFile {
    pub fn to_instance(&self) -> Result<Instance> {
        match self {
            InstanceFile::Uq { n, q, b, d, bounds } => {
                let q = packed("q", q, *n)?;
                let b = b
                    .iter()
                    .enumerate()
                    .map(|(i, bi)| vector(&format!("b[{i}]"), bi, *n))
                    .collect::<Result<Vec<_>>>()?;
                let bounds = bounds
                    .iter()
                    .enumerate()
                    .map(|(i, bd)| bd.to_bound(&format!("bounds[{i}]")))
                    .collect::<Result<Vec<_>>>()?;
                in_field("instance", UqInstance::new(q, b, d.clone(), bounds)).map(Instance::Uq)
            }
            InstanceFile::Qcqp {
                n,
                sense,
                blocks,
                signs,
                b,
                c,
                bounds,
            } => {
                let blocks = blocks
                    .iter()
                    .enumerate()
                    .map(|(j, q)| packed(&format!("blocks[{j}]"), q, *n))
                    .collect::<Result<Vec<_>>>()?;
                let b = b
                    .iter()
                    .enumerate()
                    .map(|(i, bi)| vector(&format!("b[{i}]"), bi, *n))
                    .collect::<Result<Vec<_>>>()?;
                let bounds = bounds
                    .iter()
                    .enumerate()
                    .map(|(i, bd)| bd.to_bound(&format!("bounds[{i}]")))
                    .collect::<Result<Vec<_>>>()?;
                in_field(
                    "instance",
                    QcqpInstance::new(*n, *sense, blocks, signs.clone(), b, c.clone(), bounds),
                )
                .map(Instance::Qcqp)
            }
            InstanceFile::Balls { n, centers, radii } => {
                let centers = centers
                    .iter()
                    .enumerate()
                    .map(|(i, a)| vector(&format!("centers[{i}]"), a, *n))
                    .collect::<Result<Vec<_>>>()?;
                in_field("instance", BallIntersection::new(centers, radii.clone())).map(Instance::Balls)
            }
            InstanceFile::Ilp { n, c, a, rhs } => {
                let c = vector("c", c, *n)?;
                for (i, row) in a.iter().enumerate() {
                    vector(&format!("a[{i}]"), row, *n)?;
                }
                if rhs.len() != a.len() {
                    return Err(Error::Parse(format!(
                        "rhs: expected {} entries (one per row of a), got {}",
                        a.len(),
                        rhs.len()
                    )));
                }
                let a = DMatrix::from_fn(a.len(), *n, |i, j| a[i][j]);
                let ilp = IlpProblem {
                    c,
                    a,
                    rhs: Vector::from_row_slice(rhs),
                };
                in_field("instance", ilp.to_uq())?;
                Ok(Instance::Ilp(ilp))
            }
        }
    }

    pub fn from_instance(inst: &Instance) -> Self {
        let vecs = |vs: &[Vector]| vs.iter().map(|v| v.as_slice().to_vec()).collect::<Vec<_>>();
        match inst {
            Instance::Uq(u) => InstanceFile::Uq {
                n: u.n(),
                q: u.q().packed().to_vec(),
                b: vecs(u.bs()),
                d: u.ds().to_vec(),
                bounds: u.bounds().iter().map(BoundEntry::from_bound).collect(),
            },
            Instance::Qcqp(q) => InstanceFile::Qcqp {
                n: q.n(),
                sense: q.sense(),
                blocks: q.blocks().iter().map(|m| m.packed().to_vec()).collect(),
                signs: q.signs().to_vec(),
                b: vecs(q.bs()),
                c: q.cs().to_vec(),
                bounds: q.bounds().iter().map(BoundEntry::from_bound).collect(),
            },
            Instance::Balls(b) => InstanceFile::Balls {
                n: b.n(),
                centers: vecs(b.centers()),
                radii: b.radii().to_vec(),
            },
            Instance::Ilp(ilp) => InstanceFile::Ilp {
                n: ilp.c.len(),
                c: ilp.c.as_slice().to_vec(),
                a: (0..ilp.a.nrows())
                    .map(|i| ilp.a.row(i).iter().cloned().collect())
                    .collect(),
                rhs: ilp.rhs.as_slice().to_vec(),
            },
        }
    }
}

/// Parses an instance document. Syntax errors carry line and column; shape
/// errors name the offending field.
pub fn parse_instance(text: &str) -> Result<InstanceFile> {
    let file: InstanceFile = serde_json::from_str(text).map_err(|e| {
        Error::Parse(format!("line {}, column {}: {e}", e.line(), e.column()))
    })?;
    file.to_instance()?;
    Ok(file)
}

/// Canonical text of an instance: pretty JSON with a trailing newline.
pub fn write_instance(file: &InstanceFile) -> String {
    let mut s = serde_json::to_string_pretty(file).expect("instance files always serialise");
    s.push('\n');
    s
}

pub fn read_instance(path: &std::path::Path) -> Result<(InstanceFile, Instance)> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::Parse(format!("{}: {e}", path.display())))?;
    let file = parse_instance(&text).map_err(|e| match e {
        Error::Parse(m) => Error::Parse(format!("{}: {m}", path.display())),
        other => other,
    })?;
    let inst = file.to_instance()?;
    Ok((file, inst))
}
