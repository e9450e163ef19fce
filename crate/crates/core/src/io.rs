//! JSON schemas for toric inputs, covers and stratifications.
//!
//! Rationals are written as `"p/q"` strings (`"p"` for integers). Inputs may
//! also give them as JSON integers.

use std::collections::BTreeMap;

use serde::{Deserialize, Deserializer, Serialize, Serializer};
use sha2::{Digest, Sha256};

use crate::cover::PiecewiseAffineCover;
use crate::dh::DensityPoly;
use crate::error::{check_dim, Error, Result};
use crate::linalg::{format_rat, parse_rat, rat, Rat, RatMat, RatVec};
use crate::polyhedron::{HPolytope, Halfspace, RelOpenCell};
use crate::stratifier::{Stratification, Stratum};
use crate::toric::ToricAction;

pub const TOOL_VERSION: &str = concat!("strata ", env!("CARGO_PKG_VERSION"));

/// A rational number in JSON.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub struct Q(pub Rat);

impl Serialize for Q {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&format_rat(&self.0))
    }
}

impl<'de> Deserialize<'de> for Q {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Repr {
            Int(i64),
            Str(String),
        }
        match Repr::deserialize(d)? {
            Repr::Int(i) => Ok(Q(rat(i))),
            Repr::Str(s) => parse_rat(&s).map(Q).map_err(serde::de::Error::custom),
        }
    }
}

fn qvec(v: &[Rat]) -> Vec<Q> {
    v.iter().cloned().map(Q).collect()
}

fn rvec_of(v: &[Q]) -> RatVec {
    v.iter().map(|q| q.0.clone()).collect()
}

fn qmat(m: &RatMat) -> Vec<Vec<Q>> {
    m.rows().iter().map(|r| qvec(r)).collect()
}

fn mat_of(ncols: usize, rows: &[Vec<Q>]) -> Result<RatMat> {
    RatMat::new(ncols, rows.iter().map(|r| rvec_of(r)).collect())
}

fn parse_json<T: for<'de> Deserialize<'de>>(text: &str) -> Result<T> {
    serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))
}

fn to_json<T: Serialize>(v: &T) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("serializable");
    s.push('\n');
    s
}

/// Hex SHA-256 of an input file's bytes.
pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct InequalityRecord {
    pub normal: Vec<i64>,
    pub offset: Q,
}

/// A polytope `{x : normal_i · x <= offset_i}` with an `n x k` subtorus matrix.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ToricSpecFile {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    pub ambient_dim: usize,
    pub inequalities: Vec<InequalityRecord>,
    pub subtorus_matrix: Vec<Vec<i64>>,
}

impl ToricSpecFile {
    pub fn parse(text: &str) -> Result<Self> {
        parse_json(text)
    }

    pub fn to_json(&self) -> String {
        to_json(self)
    }

    pub fn from_action(a: &ToricAction, name: Option<String>) -> Result<Self> {
        let int = |x: &Rat| -> Result<i64> {
            if !x.is_integer() {
                return Err(Error::NonIntegralInput);
            }
            x.numer().try_into().map_err(|_| Error::Parse("entry does not fit in i64".into()))
        };
        let inequalities = a
            .polytope()
            .ineqs()
            .iter()
            .map(|h| {
                Ok(InequalityRecord {
                    normal: h.normal.iter().map(int).collect::<Result<_>>()?,
                    offset: Q(h.offset.clone()),
                })
            })
            .collect::<Result<_>>()?;
        let subtorus_matrix =
            a.b().rows().iter().map(|r| r.iter().map(int).collect::<Result<_>>()).collect::<Result<_>>()?;
        Ok(Self { name, ambient_dim: a.n(), inequalities, subtorus_matrix })
    }

    pub fn to_action(&self) -> Result<ToricAction> {
        let n = self.ambient_dim;
        let ineqs = self
            .inequalities
            .iter()
            .map(|r| {
                check_dim(n, r.normal.len())?;
                Ok(Halfspace::new(r.normal.iter().map(|&x| rat(x)).collect(), r.offset.0.clone()))
            })
            .collect::<Result<Vec<_>>>()?;
        check_dim(n, self.subtorus_matrix.len())?;
        let k = self.subtorus_matrix.first().map_or(0, Vec::len);
        let rows: Vec<&[i64]> = self.subtorus_matrix.iter().map(Vec::as_slice).collect();
        for r in &rows {
            check_dim(k, r.len())?;
        }
        ToricAction::new(HPolytope::new(n, ineqs)?, RatMat::from_i64(k, &rows))
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CarrierRecord {
    pub point: Vec<Q>,
    pub directions: Vec<Vec<Q>>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct HalfspaceRecord {
    pub normal: Vec<Q>,
    pub offset: Q,
}

/// A cover member, either as the open hull of points or as the relative
/// interior of `carrier ∩ {inequalities}`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum MemberRecord {
    Vertices {
        vertices: Vec<Vec<Q>>,
    },
    Closure {
        carrier: CarrierRecord,
        inequalities: Vec<HalfspaceRecord>,
        /// Faces removed from the closure, as sets of inequality indices.
        #[serde(default, skip_serializing_if = "Option::is_none")]
        excluded_faces: Option<Vec<Vec<usize>>>,
    },
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CoverFile {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    pub ambient_dim: usize,
    pub members: Vec<MemberRecord>,
}

impl CoverFile {
    pub fn parse(text: &str) -> Result<Self> {
        parse_json(text)
    }

    pub fn to_json(&self) -> String {
        to_json(self)
    }

    pub fn from_cover(c: &PiecewiseAffineCover) -> Self {
        let members = c
            .members()
            .iter()
            .map(|m| MemberRecord::Vertices { vertices: m.vertices().iter().map(|v| qvec(v)).collect() })
            .collect();
        Self { name: None, ambient_dim: c.ambient_dim(), members }
    }

    pub fn to_cover(&self) -> Result<PiecewiseAffineCover> {
        let n = self.ambient_dim;
        let members = self.members.iter().enumerate().map(|(i, m)| member_cell(n, i, m)).collect::<Result<_>>()?;
        PiecewiseAffineCover::new(n, members)
    }
}

fn member_cell(n: usize, index: usize, m: &MemberRecord) -> Result<RelOpenCell> {
    match m {
        MemberRecord::Vertices { vertices } => {
            let pts: Vec<RatVec> = vertices.iter().map(|v| rvec_of(v)).collect();
            for p in &pts {
                check_dim(n, p.len())?;
            }
            RelOpenCell::from_vertices(&pts)
        }
        MemberRecord::Closure { carrier, inequalities, excluded_faces } => {
            let carrier = carrier_of(n, carrier)?;
            let ineqs: Vec<Halfspace> =
                inequalities.iter().map(|h| Halfspace::new(rvec_of(&h.normal), h.offset.0.clone())).collect();
            let cell = RelOpenCell::from_closure(carrier, &ineqs)?.ok_or(Error::EmptyPolytope)?;
            if let Some(ex) = excluded_faces {
                // the member is open in its affine hull exactly when every
                // facet of its closure lies in a proper excluded face
                let verts = cell.vertices();
                let mut faces = Vec::new();
                for f in ex {
                    if f.iter().any(|&j| j >= ineqs.len()) {
                        return Err(Error::Parse(format!("member {index} excludes an unknown inequality")));
                    }
                    let fv: Vec<&RatVec> = verts.iter().filter(|v| f.iter().all(|&j| ineqs[j].is_tight(v))).collect();
                    if fv.len() < verts.len() {
                        faces.push(fv);
                    }
                }
                let open = cell
                    .ineqs()
                    .iter()
                    .all(|h| faces.iter().any(|fv| verts.iter().filter(|v| h.is_tight(v)).all(|v| fv.contains(&v))));
                if !open {
                    return Err(Error::Parse(format!("member {index} is not open in its affine hull")));
                }
            }
            Ok(cell)
        }
    }
}

fn carrier_of(n: usize, c: &CarrierRecord) -> Result<crate::linalg::AffineSubspace> {
    let p = rvec_of(&c.point);
    check_dim(n, p.len())?;
    crate::linalg::AffineSubspace::new(p, &mat_of(n, &c.directions)?)
}

fn carrier_record(c: &crate::linalg::AffineSubspace) -> CarrierRecord {
    CarrierRecord { point: qvec(c.base()), directions: qmat(c.directions()) }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CellRecord {
    pub carrier: CarrierRecord,
    pub inequalities: Vec<HalfspaceRecord>,
    pub excluded_faces: Vec<Vec<usize>>,
    pub vertices: Vec<Vec<Q>>,
}

impl CellRecord {
    pub fn from_cell(c: &RelOpenCell) -> Self {
        Self {
            carrier: carrier_record(c.carrier()),
            inequalities: c
                .ineqs()
                .iter()
                .map(|h| HalfspaceRecord { normal: qvec(&h.normal), offset: Q(h.offset.clone()) })
                .collect(),
            excluded_faces: c.excluded_faces(),
            vertices: c.vertices().iter().map(|v| qvec(v)).collect(),
        }
    }

    /// Rebuilds the cell and checks that the record is in canonical form.
    pub fn to_cell(&self, n: usize) -> Result<RelOpenCell> {
        let carrier = carrier_of(n, &self.carrier)?;
        let ineqs: Vec<Halfspace> = self
            .inequalities
            .iter()
            .map(|h| {
                check_dim(n, h.normal.len())?;
                Ok(Halfspace::new(rvec_of(&h.normal), h.offset.0.clone()))
            })
            .collect::<Result<_>>()?;
        let cell = RelOpenCell::from_closure(carrier, &ineqs)?.ok_or(Error::EmptyPolytope)?;
        if &Self::from_cell(&cell) != self {
            return Err(Error::Parse("cell record is not in canonical form".into()));
        }
        Ok(cell)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TermRecord {
    pub exponents: Vec<u32>,
    pub coefficient: Q,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DensityRecord {
    pub polynomial: String,
    pub degree: usize,
    pub terms: Vec<TermRecord>,
}

impl DensityRecord {
    pub fn from_poly(p: &DensityPoly) -> Self {
        Self {
            polynomial: p.to_string(),
            degree: p.degree,
            terms: p
                .coefficients
                .iter()
                .map(|(e, c)| TermRecord { exponents: e.clone(), coefficient: Q(c.clone()) })
                .collect(),
        }
    }

    pub fn to_poly(&self, stratum_id: usize, nvars: usize) -> Result<DensityPoly> {
        let mut coefficients = BTreeMap::new();
        for t in &self.terms {
            check_dim(nvars, t.exponents.len())?;
            coefficients.insert(t.exponents.clone(), t.coefficient.0.clone());
        }
        let p = DensityPoly::new(stratum_id, nvars, coefficients);
        if &Self::from_poly(&p) != self {
            return Err(Error::Parse(format!("density of stratum {stratum_id} is not canonical")));
        }
        Ok(p)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct StratumRecord {
    pub id: usize,
    pub dim: usize,
    /// Basis of the integer points of the direction space.
    pub integral_direction: Vec<Vec<Q>>,
    pub carrier: CarrierRecord,
    pub cells: Vec<CellRecord>,
    pub spanning_tree: Vec<(usize, usize)>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub density: Option<DensityRecord>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Provenance {
    pub input_sha256: String,
    pub tool_version: String,
}

impl Provenance {
    pub fn for_input(bytes: &[u8]) -> Self {
        Self { input_sha256: sha256_hex(bytes), tool_version: TOOL_VERSION.into() }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StratificationFile {
    pub ambient_dim: usize,
    pub counts_by_dim: Vec<usize>,
    pub strata: Vec<StratumRecord>,
    pub frontier: Vec<(usize, usize)>,
    pub provenance: Provenance,
}

impl StratificationFile {
    pub fn new(s: &Stratification, densities: &BTreeMap<usize, DensityPoly>, provenance: Provenance) -> Self {
        let strata = s
            .strata()
            .iter()
            .map(|t| StratumRecord {
                id: t.id,
                dim: t.dim,
                integral_direction: qmat(&t.integral_direction),
                carrier: carrier_record(&t.carrier),
                cells: t.cells.iter().map(CellRecord::from_cell).collect(),
                spanning_tree: t.spanning_tree.clone(),
                density: densities.get(&t.id).map(DensityRecord::from_poly),
            })
            .collect();
        Self {
            ambient_dim: s.ambient_dim(),
            counts_by_dim: s.counts_by_dim(),
            strata,
            frontier: s.frontier().to_vec(),
            provenance,
        }
    }

    pub fn parse(text: &str) -> Result<Self> {
        parse_json(text)
    }

    pub fn to_json(&self) -> String {
        to_json(self)
    }

    /// Rebuilds the stratification and its densities, checking that every
    /// stored derived field matches its recomputation.
    pub fn to_stratification(&self) -> Result<(Stratification, BTreeMap<usize, DensityPoly>)> {
        let n = self.ambient_dim;
        let mut strata = Vec::with_capacity(self.strata.len());
        let mut densities = BTreeMap::new();
        for (pos, r) in self.strata.iter().enumerate() {
            let cells = r.cells.iter().map(|c| c.to_cell(n)).collect::<Result<Vec<_>>>()?;
            let mut t = Stratum::from_cells(cells)?;
            t.id = r.id;
            let consistent = r.id == pos
                && t.dim == r.dim
                && t.carrier == carrier_of(n, &r.carrier)?
                && qmat(&t.integral_direction) == r.integral_direction
                && t.spanning_tree == r.spanning_tree;
            if !consistent {
                return Err(Error::Parse(format!("stratum record {pos} is inconsistent")));
            }
            if let Some(d) = &r.density {
                densities.insert(r.id, d.to_poly(r.id, n)?);
            }
            strata.push(t);
        }
        for &(i, j) in &self.frontier {
            if i >= strata.len() || j >= strata.len() {
                return Err(Error::Parse(format!("frontier pair ({i}, {j}) names an unknown stratum")));
            }
        }
        let s = Stratification::from_raw(n, strata, self.frontier.clone());
        if s.counts_by_dim() != self.counts_by_dim {
            return Err(Error::Parse("counts_by_dim does not match the strata".into()));
        }
        Ok((s, densities))
    }
}

/// Either kind of input accepted by `stratify`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum InputFile {
    Toric(ToricSpecFile),
    Cover(CoverFile),
}

impl InputFile {
    pub fn parse(text: &str) -> Result<Self> {
        let v: serde_json::Value = parse_json(text)?;
        if v.get("subtorus_matrix").is_some() {
            Ok(Self::Toric(serde_json::from_value(v).map_err(|e| Error::Parse(e.to_string()))?))
        } else if v.get("members").is_some() {
            Ok(Self::Cover(serde_json::from_value(v).map_err(|e| Error::Parse(e.to_string()))?))
        } else {
            Err(Error::Parse("expected a toric spec (subtorus_matrix) or a cover (members)".into()))
        }
    }
}
