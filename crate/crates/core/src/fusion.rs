//! Fusion rings, fusing matrices, and the shipped Ising dataset.
//!
//! A fusion ring records sector labels, a unit sector, conformal weights, and
//! multiplicities `N_{ij}^k`.  For each sector quadruple `(i,j,k;l)` the
//! fusing data stores a matrix indexed by pairs of intermediate sectors
//! `(m,n)`: `m` is the intermediate of the product channel (nonzero only when
//! `N_{jk}^m N_{im}^l > 0`) and `n` the intermediate of the iterate channel
//! (`N_{ij}^n N_{nk}^l > 0`).  A pair is *coupled* when both conditions hold;
//! fusing values exist exactly on coupled pairs, and uncoupled positions are
//! "don't care" (DC), which is distinct from a stored zero.
//!
//! With multiplicities `> 1` an entry is a block: rows are indexed by the
//! product-channel basis pairs `(i_idx, j_idx)` flattened as
//! `i_idx * N_{jk}^m + j_idx`, columns by the iterate-channel pairs
//! `(k_idx, l_idx)` flattened as `k_idx * N_{nk}^l + l_idx`.  All shipped data
//! has multiplicity at most one, so its blocks are 1x1.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::report::{CheckReport, Witness};
use crate::scalars::{parse_rational, rational_string, QSqrt2, Rational};

pub type SectorId = usize;
/// Sector quadruple `(i, j, k, l)`.
pub type Quad = (SectorId, SectorId, SectorId, SectorId);

#[derive(Debug, Error)]
pub enum FusionError {
    #[error("parse error: {0}")]
    Parse(String),
    #[error("duplicate sector label {0:?}")]
    DuplicateSector(String),
    #[error("unknown sector label {0:?}")]
    UnknownSector(String),
    #[error("sector index {0} out of range (have {1} sectors)")]
    SectorOutOfRange(usize, usize),
    #[error("missing weight for sector {0:?}")]
    MissingWeight(String),
    #[error("duplicate fusion multiplicity entry for ({0}, {1}, {2})")]
    DuplicateMultiplicity(usize, usize, usize),
    #[error("fusion multiplicity for ({0}, {1}, {2}) must be positive")]
    ZeroMultiplicity(usize, usize, usize),
    #[error("missing fusing matrix for quadruple {0:?}")]
    MissingQuadruple(Quad),
    #[error("duplicate fusing matrix for quadruple {0:?}")]
    DuplicateQuadruple(Quad),
    #[error("duplicate fusing entry at {mn:?} of quadruple {quad:?}")]
    DuplicateEntry { quad: Quad, mn: (usize, usize) },
    #[error("fusing entry at {mn:?} of quadruple {quad:?} out of sector range")]
    EntryOutOfRange { quad: Quad, mn: (usize, usize) },
    #[error(
        "fusing block at {mn:?} of quadruple {quad:?} has shape {got:?}, expected {expected:?}"
    )]
    BadBlockShape {
        quad: Quad,
        mn: (usize, usize),
        expected: (usize, usize),
        got: (usize, usize),
    },
    #[error("ragged fusing block at {mn:?} of quadruple {quad:?}")]
    RaggedBlock { quad: Quad, mn: (usize, usize) },
    #[error("diagonal-double check requires all multiplicities <= 1")]
    NeedsMultiplicityOne,
}

/// Sector labels, unit, weights, and multiplicities `N_{ij}^k`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FusionRing {
    sectors: Vec<String>,
    unit: SectorId,
    weights: Vec<Rational>,
    mult: Vec<u32>,
}

impl FusionRing {
    pub fn new(
        sectors: Vec<String>,
        unit_label: &str,
        weights: Vec<Rational>,
        triples: &[(usize, usize, usize, u32)],
    ) -> Result<Self, FusionError> {
        let s = sectors.len();
        let mut seen = BTreeSet::new();
        for label in &sectors {
            if !seen.insert(label.clone()) {
                return Err(FusionError::DuplicateSector(label.clone()));
            }
        }
        let unit = sectors
            .iter()
            .position(|l| l == unit_label)
            .ok_or_else(|| FusionError::UnknownSector(unit_label.to_string()))?;
        if weights.len() != s {
            return Err(FusionError::Parse(format!(
                "have {} weights for {} sectors",
                weights.len(),
                s
            )));
        }
        let mut mult = vec![0u32; s * s * s];
        let mut listed = BTreeSet::new();
        for &(i, j, k, n) in triples {
            for idx in [i, j, k] {
                if idx >= s {
                    return Err(FusionError::SectorOutOfRange(idx, s));
                }
            }
            if !listed.insert((i, j, k)) {
                return Err(FusionError::DuplicateMultiplicity(i, j, k));
            }
            if n == 0 {
                return Err(FusionError::ZeroMultiplicity(i, j, k));
            }
            mult[(i * s + j) * s + k] = n;
        }
        Ok(FusionRing {
            sectors,
            unit,
            weights,
            mult,
        })
    }

    pub fn num_sectors(&self) -> usize {
        self.sectors.len()
    }

    pub fn unit(&self) -> SectorId {
        self.unit
    }

    pub fn label(&self, i: SectorId) -> &str {
        &self.sectors[i]
    }

    pub fn labels(&self) -> &[String] {
        &self.sectors
    }

    pub fn weight(&self, i: SectorId) -> &Rational {
        &self.weights[i]
    }

    pub fn sector_index(&self, label: &str) -> Option<SectorId> {
        self.sectors.iter().position(|l| l == label)
    }

    /// Multiplicity `N_{ij}^k`.
    pub fn n(&self, i: SectorId, j: SectorId, k: SectorId) -> u32 {
        let s = self.num_sectors();
        self.mult[(i * s + j) * s + k]
    }

    pub fn max_multiplicity(&self) -> u32 {
        self.mult.iter().copied().max().unwrap_or(0)
    }

    /// Nonzero multiplicity triples in lexicographic order.
    pub fn nonzero_triples(&self) -> Vec<(usize, usize, usize, u32)> {
        let s = self.num_sectors();
        let mut out = Vec::new();
        for i in 0..s {
            for j in 0..s {
                for k in 0..s {
                    let n = self.n(i, j, k);
                    if n > 0 {
                        out.push((i, j, k, n));
                    }
                }
            }
        }
        out
    }
}

/// Product-channel and iterate-channel intermediate sets for a quadruple.
pub fn coupling_sides(ring: &FusionRing, quad: Quad) -> (BTreeSet<SectorId>, BTreeSet<SectorId>) {
    let (i, j, k, l) = quad;
    let mut ms = BTreeSet::new();
    let mut ns = BTreeSet::new();
    for x in 0..ring.num_sectors() {
        if ring.n(j, k, x) > 0 && ring.n(i, x, l) > 0 {
            ms.insert(x);
        }
        if ring.n(i, j, x) > 0 && ring.n(x, k, l) > 0 {
            ns.insert(x);
        }
    }
    (ms, ns)
}

/// Coupled pairs `(m, n)` of a quadruple; always a full rectangle `M x N`.
pub fn coupling_pairs(ring: &FusionRing, quad: Quad) -> BTreeSet<(SectorId, SectorId)> {
    let (ms, ns) = coupling_sides(ring, quad);
    let mut out = BTreeSet::new();
    for &m in &ms {
        for &n in &ns {
            out.insert((m, n));
        }
    }
    out
}

/// Expected block shape at pair `(m, n)` of `quad`:
/// `(N_{im}^l * N_{jk}^m, N_{ij}^n * N_{nk}^l)`.
pub fn expected_block_shape(ring: &FusionRing, quad: Quad, m: usize, n: usize) -> (usize, usize) {
    let (i, j, k, l) = quad;
    (
        (ring.n(i, m, l) * ring.n(j, k, m)) as usize,
        (ring.n(i, j, n) * ring.n(n, k, l)) as usize,
    )
}

/// Dense block of fusing values.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FusingBlock {
    pub rows: usize,
    pub cols: usize,
    pub data: Vec<QSqrt2>,
}

impl FusingBlock {
    pub fn scalar(v: QSqrt2) -> Self {
        FusingBlock {
            rows: 1,
            cols: 1,
            data: vec![v],
        }
    }

    pub fn get(&self, r: usize, c: usize) -> &QSqrt2 {
        &self.data[r * self.cols + c]
    }

    pub fn as_scalar(&self) -> Option<&QSqrt2> {
        if self.rows == 1 && self.cols == 1 {
            Some(&self.data[0])
        } else {
            None
        }
    }
}

/// Fusing matrix of one quadruple: values on stored pairs, DC elsewhere.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct FusingMatrix {
    pub entries: BTreeMap<(SectorId, SectorId), FusingBlock>,
}

impl FusingMatrix {
    pub fn entry(&self, m: SectorId, n: SectorId) -> Option<&FusingBlock> {
        self.entries.get(&(m, n))
    }

    pub fn is_dc(&self, m: SectorId, n: SectorId) -> bool {
        !self.entries.contains_key(&(m, n))
    }
}

/// A fusion ring together with one fusing matrix per sector quadruple.
#[derive(Debug, Clone, PartialEq)]
pub struct FusionData {
    ring: FusionRing,
    fusing: BTreeMap<Quad, FusingMatrix>,
}

impl FusionData {
    /// Structural construction: every quadruple present, entries in range,
    /// blocks of the expected shape.  Coupling consistency is checked by
    /// [`validate_fusing`], not here.
    pub fn new(
        ring: FusionRing,
        fusing: BTreeMap<Quad, FusingMatrix>,
    ) -> Result<Self, FusionError> {
        let s = ring.num_sectors();
        for i in 0..s {
            for j in 0..s {
                for k in 0..s {
                    for l in 0..s {
                        let quad = (i, j, k, l);
                        let matrix = fusing
                            .get(&quad)
                            .ok_or(FusionError::MissingQuadruple(quad))?;
                        for (&(m, n), block) in &matrix.entries {
                            if m >= s || n >= s {
                                return Err(FusionError::EntryOutOfRange { quad, mn: (m, n) });
                            }
                            let expected = expected_block_shape(&ring, quad, m, n);
                            let got = (block.rows, block.cols);
                            if got != expected {
                                return Err(FusionError::BadBlockShape {
                                    quad,
                                    mn: (m, n),
                                    expected,
                                    got,
                                });
                            }
                        }
                    }
                }
            }
        }
        for quad in fusing.keys() {
            let (i, j, k, l) = *quad;
            if i >= s || j >= s || k >= s || l >= s {
                return Err(FusionError::SectorOutOfRange(i.max(j).max(k).max(l), s));
            }
        }
        Ok(FusionData { ring, fusing })
    }

    pub fn ring(&self) -> &FusionRing {
        &self.ring
    }

    pub fn matrix(&self, quad: Quad) -> &FusingMatrix {
        &self.fusing[&quad]
    }

    pub fn entry(&self, quad: Quad, m: SectorId, n: SectorId) -> Option<&FusingBlock> {
        self.fusing[&quad].entry(m, n)
    }
}

/// Checks the unit laws `N_{ei}^j = N_{ie}^j = [i = j]` and all associativity
/// identities `sum_m N_{ij}^m N_{mk}^l = sum_m N_{jk}^m N_{im}^l`.
pub fn validate_ring(ring: &FusionRing) -> CheckReport {
    let s = ring.num_sectors();
    let e = ring.unit();
    let mut witnesses = Vec::new();
    for i in 0..s {
        for j in 0..s {
            let expected = u32::from(i == j);
            if ring.n(e, i, j) != expected {
                witnesses.push(Witness {
                    input: format!("N({}, {}, {})", ring.label(e), ring.label(i), ring.label(j)),
                    expected: expected.to_string(),
                    got: ring.n(e, i, j).to_string(),
                });
            }
            if ring.n(i, e, j) != expected {
                witnesses.push(Witness {
                    input: format!("N({}, {}, {})", ring.label(i), ring.label(e), ring.label(j)),
                    expected: expected.to_string(),
                    got: ring.n(i, e, j).to_string(),
                });
            }
        }
    }
    for i in 0..s {
        for j in 0..s {
            for k in 0..s {
                for l in 0..s {
                    let left: u32 = (0..s).map(|m| ring.n(i, j, m) * ring.n(m, k, l)).sum();
                    let right: u32 = (0..s).map(|m| ring.n(j, k, m) * ring.n(i, m, l)).sum();
                    if left != right {
                        witnesses.push(Witness {
                            input: format!("associativity at ({i}, {j}, {k}; {l})"),
                            expected: format!("{left} = {right}"),
                            got: format!("{left} != {right}"),
                        });
                    }
                }
            }
        }
    }
    CheckReport::exact("fusion-ring", witnesses)
}

/// Checks that stored fusing entries sit exactly on the coupled pairs, and
/// that in the multiplicity-one regime every quadruple containing the unit
/// sector carries a single entry of value +1 or -1.
pub fn validate_fusing(data: &FusionData) -> CheckReport {
    let ring = data.ring();
    let s = ring.num_sectors();
    let e = ring.unit();
    let mut witnesses = Vec::new();
    for i in 0..s {
        for j in 0..s {
            for k in 0..s {
                for l in 0..s {
                    let quad = (i, j, k, l);
                    let coupled = coupling_pairs(ring, quad);
                    let matrix = data.matrix(quad);
                    for pair in matrix.entries.keys() {
                        if !coupled.contains(pair) {
                            witnesses.push(Witness {
                                input: format!("quadruple {quad:?}, pair {pair:?}"),
                                expected: "DC (pair is not coupled)".into(),
                                got: "stored value".into(),
                            });
                        }
                    }
                    for pair in &coupled {
                        if matrix.is_dc(pair.0, pair.1) {
                            witnesses.push(Witness {
                                input: format!("quadruple {quad:?}, pair {pair:?}"),
                                expected: "stored value (pair is coupled)".into(),
                                got: "DC".into(),
                            });
                        }
                    }
                    let involves_unit = i == e || j == e || k == e || l == e;
                    let all_scalar = matrix.entries.values().all(|b| b.as_scalar().is_some());
                    if involves_unit && !coupled.is_empty() && all_scalar {
                        if matrix.entries.len() != 1 {
                            witnesses.push(Witness {
                                input: format!("unit-sector quadruple {quad:?}"),
                                expected: "exactly one stored entry".into(),
                                got: format!("{} entries", matrix.entries.len()),
                            });
                        }
                        for ((m, n), block) in &matrix.entries {
                            if let Some(v) = block.as_scalar() {
                                let plus = v.is_one();
                                let minus = (-v.clone()).is_one();
                                if !plus && !minus {
                                    witnesses.push(Witness {
                                        input: format!(
                                            "unit-sector quadruple {quad:?}, pair ({m}, {n})"
                                        ),
                                        expected: "+1 or -1".into(),
                                        got: v.to_string(),
                                    });
                                }
                            }
                        }
                    }
                }
            }
        }
    }
    CheckReport::exact("fusing-matrices", witnesses)
}

/// Orthogonality of fusing columns: for every quadruple and coupled iterate
/// intermediates `n, n'`, `sum_m F_{m;n} F_{m;n'} = [n = n']` over coupled
/// product intermediates `m`.  This is the exact condition under which the
/// diagonal-double construction over the data is associative.
///
/// Requires all multiplicities at most one.
pub fn diagonal_double_check(data: &FusionData) -> Result<CheckReport, FusionError> {
    let ring = data.ring();
    if ring.max_multiplicity() > 1 {
        return Err(FusionError::NeedsMultiplicityOne);
    }
    let s = ring.num_sectors();
    let mut witnesses = Vec::new();
    for i in 0..s {
        for j in 0..s {
            for k in 0..s {
                for l in 0..s {
                    let quad = (i, j, k, l);
                    let (ms, ns) = coupling_sides(ring, quad);
                    for &n1 in &ns {
                        for &n2 in &ns {
                            let mut sum = QSqrt2::zero();
                            let mut missing = false;
                            for &m in &ms {
                                match (data.entry(quad, m, n1), data.entry(quad, m, n2)) {
                                    (Some(b1), Some(b2)) => {
                                        let v1 = b1.as_scalar().expect("multiplicity one");
                                        let v2 = b2.as_scalar().expect("multiplicity one");
                                        sum = sum + v1.clone() * v2;
                                    }
                                    _ => missing = true,
                                }
                            }
                            let expected = if n1 == n2 {
                                QSqrt2::one()
                            } else {
                                QSqrt2::zero()
                            };
                            if missing {
                                witnesses.push(Witness {
                                    input: format!("quadruple {quad:?}, columns ({n1}, {n2})"),
                                    expected: "values on all coupled pairs".into(),
                                    got: "DC on a coupled pair".into(),
                                });
                            } else if sum != expected {
                                witnesses.push(Witness {
                                    input: format!("quadruple {quad:?}, columns ({n1}, {n2})"),
                                    expected: expected.to_string(),
                                    got: sum.to_string(),
                                });
                            }
                        }
                    }
                }
            }
        }
    }
    Ok(CheckReport::exact("diagonal-double-orthogonality", witnesses))
}

/// Single-entry fusing values of the Ising dataset: `(i, j, k, l, m, n, sign)`.
const ISING_SINGLE_ENTRIES: &[(usize, usize, usize, usize, usize, usize, i8)] = &[
    (0, 0, 0, 0, 0, 0, 1),
    (1, 1, 1, 1, 0, 0, 1),
    (1, 1, 0, 0, 1, 0, 1),
    (0, 0, 1, 1, 1, 0, 1),
    (1, 0, 0, 1, 0, 1, 1),
    (0, 1, 1, 0, 0, 1, 1),
    (1, 0, 1, 0, 1, 1, 1),
    (0, 1, 0, 1, 1, 1, 1),
    (2, 2, 0, 0, 2, 0, 1),
    (0, 0, 2, 2, 2, 0, 1),
    (1, 1, 2, 2, 2, 0, 1),
    (2, 2, 1, 1, 2, 0, 1),
    (0, 2, 2, 0, 0, 2, 1),
    (2, 0, 0, 2, 0, 2, 1),
    (1, 2, 2, 1, 0, 2, 1),
    (2, 1, 1, 2, 0, 2, 1),
    (0, 1, 2, 2, 2, 1, 1),
    (1, 0, 2, 2, 2, 1, 1),
    (2, 2, 0, 1, 2, 1, 1),
    (2, 2, 1, 0, 2, 1, 1),
    (0, 2, 2, 1, 1, 2, 1),
    (1, 2, 2, 0, 1, 2, 1),
    (2, 0, 1, 2, 1, 2, 1),
    (2, 1, 0, 2, 1, 2, 1),
    (1, 2, 1, 2, 2, 2, -1),
    (2, 1, 2, 1, 2, 2, -1),
    (0, 2, 0, 2, 2, 2, 1),
    (2, 0, 2, 0, 2, 2, 1),
    (0, 2, 1, 2, 2, 2, 1),
    (1, 2, 0, 2, 2, 2, 1),
    (2, 0, 2, 1, 2, 2, 1),
    (2, 1, 2, 0, 2, 2, 1),
];

/// The Ising fusion data: three sectors of weights 0, 1/2, 1/16, the ten
/// standard fusion rules, and the full fusing-matrix table.  Sector labels
/// are "0", "1", "2" in weight order, with "0" the unit.
pub fn ising_builtin() -> FusionData {
    let triples: &[(usize, usize, usize, u32)] = &[
        (0, 0, 0, 1),
        (0, 1, 1, 1),
        (1, 0, 1, 1),
        (1, 1, 0, 1),
        (0, 2, 2, 1),
        (2, 0, 2, 1),
        (2, 2, 0, 1),
        (1, 2, 2, 1),
        (2, 1, 2, 1),
        (2, 2, 1, 1),
    ];
    let ring = FusionRing::new(
        vec!["0".into(), "1".into(), "2".into()],
        "0",
        vec![
            crate::scalars::rint(0),
            crate::scalars::rat(1, 2),
            crate::scalars::rat(1, 16),
        ],
        triples,
    )
    .expect("builtin ring is well formed");

    let mut fusing: BTreeMap<Quad, FusingMatrix> = BTreeMap::new();
    for i in 0..3 {
        for j in 0..3 {
            for k in 0..3 {
                for l in 0..3 {
                    fusing.insert((i, j, k, l), FusingMatrix::default());
                }
            }
        }
    }
    for &(i, j, k, l, m, n, sign) in ISING_SINGLE_ENTRIES {
        let value = if sign >= 0 {
            QSqrt2::one()
        } else {
            -QSqrt2::one()
        };
        fusing
            .get_mut(&(i, j, k, l))
            .unwrap()
            .entries
            .insert((m, n), FusingBlock::scalar(value));
    }
    // Quadruple (2,2,2;2): both channels run over {0, 1} and the block is the
    // symmetric orthogonal matrix with entries +-1/sqrt(2).
    let half_sqrt2 = QSqrt2::new(crate::scalars::rint(0), crate::scalars::rat(1, 2));
    let m2222 = fusing.get_mut(&(2, 2, 2, 2)).unwrap();
    m2222
        .entries
        .insert((0, 0), FusingBlock::scalar(half_sqrt2.clone()));
    m2222
        .entries
        .insert((0, 1), FusingBlock::scalar(half_sqrt2.clone()));
    m2222
        .entries
        .insert((1, 0), FusingBlock::scalar(half_sqrt2.clone()));
    m2222
        .entries
        .insert((1, 1), FusingBlock::scalar(-half_sqrt2));
    FusionData::new(ring, fusing).expect("builtin data is well formed")
}

#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum ValueRepr {
    Scalar(QSqrt2),
    Block(Vec<Vec<QSqrt2>>),
}

#[derive(Serialize, Deserialize)]
struct MnEntryFile {
    mn: (usize, usize),
    value: ValueRepr,
}

#[derive(Serialize, Deserialize)]
struct QuadFile {
    ijkl: (usize, usize, usize, usize),
    entries: Vec<MnEntryFile>,
}

#[derive(Serialize, Deserialize)]
struct FusionFile {
    sectors: Vec<String>,
    unit: String,
    weights: BTreeMap<String, String>,
    fusion: Vec<(usize, usize, usize, u32)>,
    fusing: Vec<QuadFile>,
}

/// Parses fusion data from its JSON document form.
pub fn load_fusion_data(text: &str) -> Result<FusionData, FusionError> {
    let file: FusionFile =
        serde_json::from_str(text).map_err(|e| FusionError::Parse(e.to_string()))?;
    let mut weights = Vec::with_capacity(file.sectors.len());
    {
        let mut seen = BTreeSet::new();
        for label in &file.sectors {
            if !seen.insert(label.clone()) {
                return Err(FusionError::DuplicateSector(label.clone()));
            }
        }
    }
    for label in &file.sectors {
        let w = file
            .weights
            .get(label)
            .ok_or_else(|| FusionError::MissingWeight(label.clone()))?;
        weights.push(parse_rational(w).map_err(|e| FusionError::Parse(e.to_string()))?);
    }
    for label in file.weights.keys() {
        if !file.sectors.iter().any(|s| s == label) {
            return Err(FusionError::UnknownSector(label.clone()));
        }
    }
    let ring = FusionRing::new(file.sectors, &file.unit, weights, &file.fusion)?;
    let mut fusing: BTreeMap<Quad, FusingMatrix> = BTreeMap::new();
    for qf in file.fusing {
        let quad: Quad = (qf.ijkl.0, qf.ijkl.1, qf.ijkl.2, qf.ijkl.3);
        let mut matrix = FusingMatrix::default();
        for entry in qf.entries {
            let block = match entry.value {
                ValueRepr::Scalar(v) => FusingBlock::scalar(v),
                ValueRepr::Block(rows) => {
                    let r = rows.len();
                    let c = rows.first().map(|row| row.len()).unwrap_or(0);
                    if rows.iter().any(|row| row.len() != c) {
                        return Err(FusionError::RaggedBlock {
                            quad,
                            mn: entry.mn,
                        });
                    }
                    FusingBlock {
                        rows: r,
                        cols: c,
                        data: rows.into_iter().flatten().collect(),
                    }
                }
            };
            if matrix.entries.insert(entry.mn, block).is_some() {
                return Err(FusionError::DuplicateEntry {
                    quad,
                    mn: entry.mn,
                });
            }
        }
        if fusing.insert(quad, matrix).is_some() {
            return Err(FusionError::DuplicateQuadruple(quad));
        }
    }
    FusionData::new(ring, fusing)
}

/// Canonical JSON document for fusion data.  `load_fusion_data` of the output
/// reproduces the value, and saving a loaded canonical document reproduces
/// its bytes.
pub fn save_fusion_data(data: &FusionData) -> String {
    let ring = data.ring();
    let mut weights = BTreeMap::new();
    for i in 0..ring.num_sectors() {
        weights.insert(
            ring.label(i).to_string(),
            rational_string(ring.weight(i)),
        );
    }
    let mut fusing = Vec::new();
    for (quad, matrix) in &data.fusing {
        let entries = matrix
            .entries
            .iter()
            .map(|(&mn, block)| MnEntryFile {
                mn,
                value: match block.as_scalar() {
                    Some(v) => ValueRepr::Scalar(v.clone()),
                    None => ValueRepr::Block(
                        (0..block.rows)
                            .map(|r| (0..block.cols).map(|c| block.get(r, c).clone()).collect())
                            .collect(),
                    ),
                },
            })
            .collect();
        fusing.push(QuadFile {
            ijkl: *quad,
            entries,
        });
    }
    let file = FusionFile {
        sectors: ring.labels().to_vec(),
        unit: ring.label(ring.unit()).to_string(),
        weights,
        fusion: ring.nonzero_triples(),
        fusing,
    };
    serde_json::to_string_pretty(&file).expect("serialization cannot fail")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalars::rat;

    #[test]
    fn builtin_passes_structural_checks() {
        let data = ising_builtin();
        assert_eq!(data.ring().num_sectors(), 3);
        assert_eq!(data.ring().unit(), 0);
        assert_eq!(data.ring().weight(2), &rat(1, 16));
        assert!(validate_ring(data.ring()).passed);
        assert!(validate_fusing(&data).passed);
    }

    #[test]
    fn coupling_of_known_quadruples() {
        let data = ising_builtin();
        let ring = data.ring();
        let pairs = coupling_pairs(ring, (1, 1, 0, 0));
        assert_eq!(pairs.into_iter().collect::<Vec<_>>(), vec![(1, 0)]);
        let pairs = coupling_pairs(ring, (2, 2, 2, 2));
        assert_eq!(
            pairs.into_iter().collect::<Vec<_>>(),
            vec![(0, 0), (0, 1), (1, 0), (1, 1)]
        );
        assert!(coupling_pairs(ring, (1, 1, 1, 0)).is_empty());
    }

    #[test]
    fn moved_entry_fails_validation() {
        let mut data = ising_builtin();
        let matrix = data.fusing.get_mut(&(1, 1, 0, 0)).unwrap();
        let block = matrix.entries.remove(&(1, 0)).unwrap();
        matrix.entries.insert((0, 0), block);
        let report = validate_fusing(&data);
        assert!(!report.passed);
        assert!(report
            .witnesses
            .iter()
            .any(|w| w.input.contains("(1, 1, 0, 0)")));
    }

    #[test]
    fn diagonal_double_on_builtin() {
        let report = diagonal_double_check(&ising_builtin()).unwrap();
        assert!(report.passed, "witnesses: {:?}", report.witnesses);
    }

    #[test]
    fn diagonal_double_detects_broken_orthogonality() {
        let mut data = ising_builtin();
        let matrix = data.fusing.get_mut(&(2, 2, 2, 2)).unwrap();
        matrix
            .entries
            .insert((1, 1), FusingBlock::scalar(QSqrt2::new(rat(0, 1), rat(1, 2))));
        let report = diagonal_double_check(&data).unwrap();
        assert!(!report.passed);
    }

    #[test]
    fn unit_law_violation_reported() {
        let ring = FusionRing::new(
            vec!["e".into(), "x".into()],
            "e",
            vec![rat(0, 1), rat(1, 2)],
            &[(0, 0, 0, 1), (0, 1, 1, 1), (1, 0, 1, 1), (1, 1, 0, 1), (0, 1, 0, 1)],
        )
        .unwrap();
        let report = validate_ring(&ring);
        assert!(!report.passed);
        assert!(report.witnesses.iter().any(|w| w.input == "N(e, x, e)"));
    }

    #[test]
    fn missing_quadruple_is_a_load_error() {
        let data = ising_builtin();
        let mut text = save_fusion_data(&data);
        // Remove the (0,0,0,0) matrix block from the document.
        let needle = "\"ijkl\": [\n        0,\n        0,\n        0,\n        0\n      ],";
        let start = text.find(needle).expect("quadruple present");
        let open = text[..start].rfind('{').unwrap();
        let mut depth = 0usize;
        let mut end = open;
        for (pos, ch) in text[open..].char_indices() {
            match ch {
                '{' => depth += 1,
                '}' => {
                    depth -= 1;
                    if depth == 0 {
                        end = open + pos + 1;
                        break;
                    }
                }
                _ => {}
            }
        }
        let mut cut = text[..open].to_string();
        let rest = text[end..].trim_start().trim_start_matches(',');
        cut.push_str(rest);
        text = cut;
        match load_fusion_data(&text) {
            Err(FusionError::MissingQuadruple(q)) => assert_eq!(q, (0, 0, 0, 0)),
            other => panic!("expected missing-quadruple error, got {other:?}"),
        }
    }

    #[test]
    fn wrong_block_shape_rejected() {
        let mut data = ising_builtin();
        let matrix = data.fusing.get_mut(&(0, 0, 0, 0)).unwrap();
        matrix.entries.insert(
            (0, 0),
            FusingBlock {
                rows: 2,
                cols: 1,
                data: vec![QSqrt2::one(), QSqrt2::one()],
            },
        );
        let ring = data.ring.clone();
        match FusionData::new(ring, data.fusing.clone()) {
            Err(FusionError::BadBlockShape { quad, .. }) => assert_eq!(quad, (0, 0, 0, 0)),
            other => panic!("expected shape error, got {other:?}"),
        }
    }
}
