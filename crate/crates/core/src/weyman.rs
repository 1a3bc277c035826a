//! Dimensions of the terms of the Weyman complex of a 2-bilinear system and the search for
//! degree vectors giving a two-term (determinantal) complex.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::multihomo::{binomial, mhb, SystemType};

/// Degree vector `m = (m_x, m_y, m_z)` of a Weyman complex.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct DegreeVector {
    pub mx: i64,
    pub my: i64,
    pub mz: i64,
}

impl DegreeVector {
    pub const fn new(mx: i64, my: i64, mz: i64) -> Self {
        DegreeVector { mx, my, mz }
    }

    /// Exchanges the y and z components.
    pub fn swap_yz(&self) -> Self {
        DegreeVector::new(self.mx, self.mz, self.my)
    }
}

impl fmt::Display for DegreeVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{},{})", self.mx, self.my, self.mz)
    }
}

impl FromStr for DegreeVector {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let parts: Vec<i64> = s
            .trim_matches(|c| c == '(' || c == ')')
            .split(',')
            .map(|p| p.trim().parse::<i64>())
            .collect::<std::result::Result<_, _>>()
            .map_err(|_| Error::Parse(format!("bad degree vector {s:?}")))?;
        match parts.as_slice() {
            &[mx, my, mz] => Ok(DegreeVector::new(mx, my, mz)),
            _ => Err(Error::Parse(format!("degree vector {s:?} needs three components"))),
        }
    }
}

/// Whether a cohomology factor is a space of sections or the dual of one.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CohomologyKind {
    Sections,
    Dual,
}

/// Dimension of `H^q(P^n, O(d))`.
pub fn cohomology_dim(n: usize, q: usize, d: i64) -> u128 {
    let n_i = n as i64;
    if q == 0 && d >= 0 {
        binomial(n_i + d, d)
    } else if q == n && d < -n_i {
        let e = -d - 1 - n_i;
        binomial(n_i + e, e)
    } else {
        0
    }
}

fn cohomology_kind(q: usize, d: i64) -> CohomologyKind {
    if q == 0 && d >= 0 {
        CohomologyKind::Sections
    } else {
        CohomologyKind::Dual
    }
}

/// One nonzero summand of `K_{v,p}(m)`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TermEntry {
    pub v: i64,
    pub p: i64,
    pub a: i64,
    pub b: i64,
    pub c: i64,
    /// Cohomological degree per block.
    pub j: [usize; 3],
    /// Twist `m - (p, p-b, p-a)` per block.
    pub twist: [i64; 3],
    pub kind: [CohomologyKind; 3],
    pub dim: u128,
}

/// All nonzero summands of the Weyman complex for a type and degree vector.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TermTable {
    pub ty: SystemType,
    pub m: DegreeVector,
    pub entries: Vec<TermEntry>,
}

impl TermTable {
    /// Total dimension of `K_v`.
    pub fn dim(&self, v: i64) -> u128 {
        self.entries.iter().filter(|e| e.v == v).map(|e| e.dim).sum()
    }

    /// Total dimension of `K_{v,p}`.
    pub fn dim_at(&self, v: i64, p: i64) -> u128 {
        self.entries.iter().filter(|e| e.v == v && e.p == p).map(|e| e.dim).sum()
    }

    /// The `(v, p)` positions carrying a nonzero term, with their dimensions.
    pub fn positions(&self) -> BTreeMap<(i64, i64), u128> {
        let mut out = BTreeMap::new();
        for e in &self.entries {
            *out.entry((e.v, e.p)).or_insert(0) += e.dim;
        }
        out
    }

    pub fn find(&self, v: i64, p: i64, a: i64, b: i64, c: i64) -> Vec<&TermEntry> {
        self.entries.iter().filter(|e| (e.v, e.p, e.a, e.b, e.c) == (v, p, a, b, c)).collect()
    }
}

impl fmt::Display for TermTable {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "type {} m {}", self.ty, self.m)?;
        writeln!(
            f,
            "{:>4} {:>4} {:>3} {:>3} {:>3} {:>10} {:>16} {:>10}",
            "v", "p", "a", "b", "c", "j", "twist", "dim"
        )?;
        for e in &self.entries {
            let j = format!("({},{},{})", e.j[0], e.j[1], e.j[2]);
            let tw = format!("({},{},{})", e.twist[0], e.twist[1], e.twist[2]);
            writeln!(f, "{:>4} {:>4} {:>3} {:>3} {:>3} {:>10} {:>16} {:>10}", e.v, e.p, e.a, e.b, e.c, j, tw, e.dim)?;
        }
        for ((v, p), d) in self.positions() {
            writeln!(f, "K[{v},{p}] = {d}")?;
        }
        write!(f, "dim K1 = {}, dim K0 = {}", self.dim(1), self.dim(0))
    }
}

/// Enumerates every nonzero term `K_{v,p}(m)` with `|v| <= n + 1`.
pub fn term_table(t: &SystemType, m: DegreeVector) -> TermTable {
    let n = t.n() as i64;
    let (r, s) = (t.r as i64, t.s as i64);
    let dims = t.dims();
    let mut entries = Vec::new();
    for p in 0..=n + 1 {
        for c in 0..=1i64 {
            for a in 0..=r.min(p - c) {
                let b = p - a - c;
                if b < 0 || b > s {
                    continue;
                }
                let twist = [m.mx - p, m.my - (p - b), m.mz - (p - a)];
                let wedge = binomial(r, a) * binomial(s, b);
                for jx in split_choices(dims[0]) {
                    for jy in split_choices(dims[1]) {
                        for jz in split_choices(dims[2]) {
                            let j = [jx, jy, jz];
                            let v = p - (jx + jy + jz) as i64;
                            if v.abs() > n + 1 {
                                continue;
                            }
                            let dim = (0..3).map(|k| cohomology_dim(dims[k], j[k], twist[k])).product::<u128>() * wedge;
                            if dim == 0 {
                                continue;
                            }
                            let kind = [0, 1, 2].map(|k| cohomology_kind(j[k], twist[k]));
                            entries.push(TermEntry { v, p, a, b, c, j, twist, kind, dim });
                        }
                    }
                }
            }
        }
    }
    entries.sort_by_key(|e| (std::cmp::Reverse(e.v), std::cmp::Reverse(e.p), e.a, e.b, e.c, e.j));
    TermTable { ty: *t, m, entries }
}

fn split_choices(n: usize) -> Vec<usize> {
    if n == 0 {
        vec![0]
    } else {
        vec![0, n]
    }
}

/// Outcome of the two-term test.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct DeterminantalCheck {
    pub determinantal: bool,
    pub dim_k1: u128,
    pub dim_k0: u128,
}

/// The complex is determinantal when only `K_1` and `K_0` are nonzero and have equal dimension.
pub fn is_determinantal(t: &SystemType, m: DegreeVector) -> DeterminantalCheck {
    let table = term_table(t, m);
    let only_two = table.entries.iter().all(|e| e.v == 0 || e.v == 1);
    let (dim_k1, dim_k0) = (table.dim(1), table.dim(0));
    DeterminantalCheck { determinantal: only_two && dim_k1 == dim_k0 && dim_k1 > 0, dim_k1, dim_k0 }
}

/// Whether every `K_1` term sits at one `p` and every `K_0` term at `p - 1`, so that the
/// differential is linear in the coefficients.
pub fn has_linear_differential(table: &TermTable) -> bool {
    let ps = |v: i64| -> BTreeSet<i64> { table.entries.iter().filter(|e| e.v == v).map(|e| e.p).collect() };
    let (p1, p0) = (ps(1), ps(0));
    p1.len() == 1 && p0.len() == 1 && p1.first().map(|p| p - 1) == p0.first().copied()
}

/// The four known determinantal degree vectors of a type.
pub fn four_degree_vectors(t: &SystemType) -> [DegreeVector; 4] {
    let (nx, ny, nz, r, s) = (t.nx as i64, t.ny as i64, t.nz as i64, t.r as i64, t.s as i64);
    [
        DegreeVector::new(ny - 1, -1, nx + ny - r + 1),
        DegreeVector::new(nz + 1, nx + nz - s + 1, -1),
        DegreeVector::new(nz - 1, nx + nz - s + 1, -1),
        DegreeVector::new(ny + 1, -1, nx + ny - r + 1),
    ]
}

/// The degree vector used to assemble the Koszul matrix.
pub fn assembly_vector(t: &SystemType) -> DegreeVector {
    four_degree_vectors(t)[0]
}

/// The type obtained by exchanging the roles of `y` and `z`.
pub fn swap_yz(t: &SystemType) -> SystemType {
    SystemType { nx: t.nx, ny: t.nz, nz: t.ny, r: t.s, s: t.r }
}

/// Vector whose complex is dual to the one of `m`.
pub fn dual_vector(t: &SystemType, m: DegreeVector) -> DegreeVector {
    let (nx, ny, nz, r, s) = (t.nx as i64, t.ny as i64, t.nz as i64, t.r as i64, t.s as i64);
    DegreeVector::new(ny + nz - m.mx, nx + nz - s - m.my, nx + ny - r - m.mz)
}

/// Default search box `[-n-1, n+1]`.
pub fn default_box(t: &SystemType) -> (i64, i64) {
    let n = t.n() as i64;
    (-n - 1, n + 1)
}

/// All determinantal degree vectors in the cube `[lo, hi]^3`, sorted.
pub fn search_degree_vectors(t: &SystemType, lo: i64, hi: i64) -> Vec<DegreeVector> {
    if lo > hi {
        return Vec::new();
    }
    let mut found: Vec<DegreeVector> = (lo..=hi)
        .into_par_iter()
        .flat_map_iter(|mx| (lo..=hi).flat_map(move |my| (lo..=hi).map(move |mz| DegreeVector::new(mx, my, mz))))
        .filter(|m| is_determinantal(t, *m).determinantal)
        .collect();
    found.sort();
    found
}

/// Degree of the resultant, which is also the size of the Koszul matrix.
pub fn mu(t: &SystemType) -> Result<u64> {
    t.validate()?;
    let (nx, ny, nz, r, s) = (t.nx as u128, t.ny as u128, t.nz as u128, t.r as u128, t.s as u128);
    let num = (nx + 1) * mhb(t) as u128 * (r * s + r + s + 1 - ny * nz);
    let den = (r - ny + 1) * (s - nz + 1);
    if !num.is_multiple_of(den) {
        return Err(Error::Precondition(format!("degree formula not integral for {t}")));
    }
    Ok((num / den) as u64)
}
