//! Bases of the two nonzero Weyman terms, the contraction maps and assembly of the
//! Koszul resultant matrix.

use std::collections::{HashMap, HashSet};
use std::fmt;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::Field;
use crate::linalg::{self, Blocks, Matrix};
use crate::multihomo::{mhb, monomial_basis, BilinearSystem, Exponent, SystemType};
use crate::weyman::{assembly_vector, DegreeVector};

/// Summand of `K_1` (`L11`, `L12`) or `K_0` (`L01`..`L04`).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum BasisBlock {
    L11,
    L12,
    L01,
    L02,
    L03,
    L04,
}

impl BasisBlock {
    pub fn name(self) -> &'static str {
        match self {
            BasisBlock::L11 => "L11",
            BasisBlock::L12 => "L12",
            BasisBlock::L01 => "L01",
            BasisBlock::L02 => "L02",
            BasisBlock::L03 => "L03",
            BasisBlock::L04 => "L04",
        }
    }

    /// Degrees of the dual x, dual y and z factors.
    fn degrees(self, t: &SystemType) -> (i64, i64, i64) {
        let e = t.r as i64 - t.ny as i64;
        match self {
            BasisBlock::L11 => (1, e, 0),
            BasisBlock::L12 => (1, e + 1, 0),
            BasisBlock::L01 => (0, e - 1, 0),
            BasisBlock::L02 => (0, e, 1),
            BasisBlock::L03 => (0, e, 0),
            BasisBlock::L04 => (0, e + 1, 1),
        }
    }

    /// Sizes of `I ∩ {1..r}`, `I ∩ {r+1..n}` and `I ∩ {0}`.
    fn counts(self, t: &SystemType) -> (i64, i64, i64) {
        let (r, b) = (t.r as i64, t.s as i64 - t.nz as i64);
        match self {
            BasisBlock::L11 => (r, b + 1, 0),
            BasisBlock::L12 => (r, b, 1),
            BasisBlock::L01 => (r - 1, b + 1, 0),
            BasisBlock::L02 => (r, b, 0),
            BasisBlock::L03 => (r - 1, b, 1),
            BasisBlock::L04 => (r, b - 1, 1),
        }
    }
}

/// One basis vector `∂x^dx ⊗ ∂y^dy ⊗ z^dz ⊗ e_I` of `K_1` or `K_0`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct KoszulBasisElement {
    pub block: BasisBlock,
    pub dx: Vec<u32>,
    pub dy: Vec<u32>,
    pub dz: Vec<u32>,
    /// Exterior index set, ascending; 0 refers to `f0`.
    pub set: Vec<usize>,
}

fn fmt_exp(e: &[u32]) -> String {
    if e.iter().all(|&v| v == 0) {
        "()".to_string()
    } else {
        format!("({})", e.iter().map(u32::to_string).collect::<Vec<_>>().join(","))
    }
}

impl KoszulBasisElement {
    /// Serialized form, e.g. `L12|dx=(1,0)|dy=(1,1)|dz=()|I={0,1,2}`.
    pub fn label(&self) -> String {
        let set = self.set.iter().map(usize::to_string).collect::<Vec<_>>().join(",");
        format!(
            "{}|dx={}|dy={}|dz={}|I={{{}}}",
            self.block.name(),
            fmt_exp(&self.dx),
            fmt_exp(&self.dy),
            fmt_exp(&self.dz),
            set
        )
    }

    fn shape_key(&self) -> (Vec<u32>, Vec<u32>, Vec<u32>, Vec<usize>) {
        (self.dx.clone(), self.dy.clone(), self.dz.clone(), self.set.clone())
    }
}

impl fmt::Display for KoszulBasisElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.label())
    }
}

/// All `k`-subsets of `items` in lexicographic order.
pub fn subsets(items: &[usize], k: usize) -> Vec<Vec<usize>> {
    fn rec(items: &[usize], k: usize, start: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for i in start..items.len() {
            if items.len() - i < k - cur.len() {
                break;
            }
            cur.push(items[i]);
            rec(items, k, i + 1, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    if k <= items.len() {
        rec(items, k, 0, &mut Vec::new(), &mut out);
    }
    out
}

fn index_sets(t: &SystemType, counts: (i64, i64, i64)) -> Vec<Vec<usize>> {
    let (a, b, c) = counts;
    if a < 0 || b < 0 || c < 0 || a > t.r as i64 || b > t.s as i64 || c > 1 {
        return Vec::new();
    }
    let first: Vec<usize> = (1..=t.r).collect();
    let second: Vec<usize> = (t.r + 1..=t.n()).collect();
    let mut out = Vec::new();
    for i in subsets(&first, a as usize) {
        for j in subsets(&second, b as usize) {
            let mut set = Vec::with_capacity(c as usize + i.len() + j.len());
            if c == 1 {
                set.push(0);
            }
            set.extend(&i);
            set.extend(&j);
            out.push(set);
        }
    }
    out.sort();
    out
}

fn block_basis(t: &SystemType, block: BasisBlock) -> Vec<KoszulBasisElement> {
    let (ddx, ddy, ddz) = block.degrees(t);
    let bx = monomial_basis(t.nx, ddx);
    let by = monomial_basis(t.ny, ddy);
    let bz = monomial_basis(t.nz, ddz);
    let mut out = Vec::new();
    for set in index_sets(t, block.counts(t)) {
        for dx in &bx {
            for dy in &by {
                for dz in &bz {
                    out.push(KoszulBasisElement {
                        block,
                        dx: dx.clone(),
                        dy: dy.clone(),
                        dz: dz.clone(),
                        set: set.clone(),
                    });
                }
            }
        }
    }
    out
}

/// Column basis: `L11` then `L12`, each ordered by index set, then `dx`, then `dy`.
pub fn k1_basis(t: &SystemType) -> Vec<KoszulBasisElement> {
    [BasisBlock::L11, BasisBlock::L12].iter().flat_map(|b| block_basis(t, *b)).collect()
}

/// Row basis: `L01`..`L04`, each ordered by index set, then `dx`, `dy`, `dz`.
pub fn k0_basis(t: &SystemType) -> Vec<KoszulBasisElement> {
    [BasisBlock::L01, BasisBlock::L02, BasisBlock::L03, BasisBlock::L04]
        .iter()
        .flat_map(|b| block_basis(t, *b))
        .collect()
}

/// `t^mono ⋆ ∂t^dual`: the exponent `dual - mono`, or `None` when some component is negative.
pub fn star_contract(mono: &[u32], dual: &[u32]) -> Option<Vec<u32>> {
    debug_assert_eq!(mono.len(), dual.len());
    mono.iter().zip(dual).map(|(m, d)| d.checked_sub(*m)).collect()
}

/// Reference `sign · u_{poly, exponent}` to one coefficient of the input system.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SymbolicEntry {
    pub sign: i8,
    pub poly: usize,
    pub exponent: Exponent,
}

impl fmt::Display for SymbolicEntry {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = if self.sign > 0 { '+' } else { '-' };
        write!(f, "{s}u[{}][{}]", self.poly, self.exponent.key())
    }
}

/// One surviving term of `ψ(ℓ, f_i)`: the resulting `(dx, dy, dz)` and the coefficient reference.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PsiTerm {
    pub dx: Vec<u32>,
    pub dy: Vec<u32>,
    pub dz: Vec<u32>,
    pub entry: SymbolicEntry,
}

/// `ψ(∂x^dx ⊗ ∂y^dy ⊗ z^dz, f_i)` for a generic `f_i`: contracts the dual factors and multiplies
/// the z factor, term by term over the support of `f_i`.
pub fn psi_symbolic(t: &SystemType, dx: &[u32], dy: &[u32], dz: &[u32], poly: usize) -> Vec<PsiTerm> {
    let mut out = Vec::new();
    for sigma in Exponent::all(t.dims(), t.degree_of(poly)) {
        let Some(cx) = star_contract(&sigma.x, dx) else { continue };
        let Some(cy) = star_contract(&sigma.y, dy) else { continue };
        let z: Vec<u32> = dz.iter().zip(&sigma.z).map(|(a, b)| a + b).collect();
        out.push(PsiTerm { dx: cx, dy: cy, dz: z, entry: SymbolicEntry { sign: 1, poly, exponent: sigma } });
    }
    out
}

/// The matrix of the first differential with symbolic entries `±u_{i,σ}`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SymbolicResultantMatrix {
    pub ty: SystemType,
    pub m: DegreeVector,
    pub rows: Vec<KoszulBasisElement>,
    pub cols: Vec<KoszulBasisElement>,
    /// Nonzero entries of each column as `(row, entry)`, sorted by row.
    pub columns: Vec<Vec<(usize, SymbolicEntry)>>,
}

impl SymbolicResultantMatrix {
    pub fn size(&self) -> usize {
        self.cols.len()
    }

    pub fn nnz(&self) -> usize {
        self.columns.iter().map(Vec::len).sum()
    }

    pub fn entry(&self, row: usize, col: usize) -> Option<&SymbolicEntry> {
        self.columns[col].iter().find(|(r, _)| *r == row).map(|(_, e)| e)
    }

    /// All entries as `(row, col, entry)`, column by column.
    pub fn entries(&self) -> impl Iterator<Item = (usize, usize, &SymbolicEntry)> {
        self.columns.iter().enumerate().flat_map(|(c, col)| col.iter().map(move |(r, e)| (*r, c, e)))
    }

    pub fn row_index(&self, label: &str) -> Option<usize> {
        self.rows.iter().position(|r| r.label() == label)
    }

    pub fn col_index(&self, label: &str) -> Option<usize> {
        self.cols.iter().position(|c| c.label() == label)
    }

    /// Replaces every `u_{i,σ}` by the coefficient of `σ` in `f_i`.
    pub fn specialize<F: Field>(&self, sys: &BilinearSystem, field: &F) -> Result<Matrix<F::Elem>> {
        if sys.system_type() != self.ty {
            return Err(Error::DimensionMismatch(format!(
                "matrix built for {} but system has type {}",
                self.ty,
                sys.system_type()
            )));
        }
        if sys.f0().is_none() {
            return Err(Error::Precondition("specialization needs f0".into()));
        }
        let mut cache: HashMap<(usize, &Exponent), F::Elem> = HashMap::new();
        let n = self.size();
        let mut out = Matrix::filled(self.rows.len(), n, field.zero());
        for (r, c, e) in self.entries() {
            let key = (e.poly, &e.exponent);
            let value = match cache.get(&key) {
                Some(v) => v.clone(),
                None => {
                    let q = sys.poly(e.poly).expect("index in range").coeff(&e.exponent);
                    let v = field.from_rational(&q)?;
                    cache.insert(key, v.clone());
                    v
                }
            };
            out.set(r, c, if e.sign > 0 { value } else { field.neg(&value) });
        }
        Ok(out)
    }
}

/// Builds the Koszul resultant matrix of a type for the assembly degree vector.
pub fn assemble_delta1(t: &SystemType) -> Result<SymbolicResultantMatrix> {
    t.validate()?;
    let rows = k0_basis(t);
    let cols = k1_basis(t);
    if rows.len() != cols.len() {
        return Err(Error::NotSquare(rows.len(), cols.len()));
    }
    let index: HashMap<_, usize> = rows.iter().enumerate().map(|(i, r)| (r.shape_key(), i)).collect();
    let columns = cols
        .par_iter()
        .map(|col| {
            let mut out = Vec::new();
            for (pos, &poly) in col.set.iter().enumerate() {
                let sign: i8 = if pos % 2 == 0 { 1 } else { -1 };
                let rest: Vec<usize> = col.set.iter().copied().filter(|&k| k != poly).collect();
                for term in psi_symbolic(t, &col.dx, &col.dy, &col.dz, poly) {
                    let key = (term.dx, term.dy, term.dz, rest.clone());
                    let row = *index.get(&key).ok_or_else(|| {
                        Error::LabelMismatch(format!(
                            "column {col} produced dx={:?} dy={:?} dz={:?} I={:?}",
                            key.0, key.1, key.2, key.3
                        ))
                    })?;
                    out.push((row, SymbolicEntry { sign, ..term.entry }));
                }
            }
            out.sort_by_key(|(r, _)| *r);
            if out.windows(2).any(|w| w[0].0 == w[1].0) {
                return Err(Error::LabelMismatch(format!("column {col} hits a row twice")));
            }
            Ok(out)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(SymbolicResultantMatrix { ty: *t, m: assembly_vector(t), rows, cols, columns })
}

/// Permutations moving the `u_{0,θ}` entries onto the diagonal of the trailing block.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ThetaPartition {
    pub theta: Exponent,
    /// Original row index of each permuted row.
    pub row_perm: Vec<usize>,
    /// Original column index of each permuted column.
    pub col_perm: Vec<usize>,
    /// Size of the leading block `M11`.
    pub split: usize,
}

impl ThetaPartition {
    pub fn size(&self) -> usize {
        self.row_perm.len()
    }

    /// Original indices of the trailing rows and columns.
    pub fn trailing_rows(&self) -> &[usize] {
        &self.row_perm[self.split..]
    }

    pub fn trailing_cols(&self) -> &[usize] {
        &self.col_perm[self.split..]
    }

    pub fn permute<E: Clone>(&self, m: &Matrix<E>) -> Matrix<E> {
        m.select(&self.row_perm, &self.col_perm)
    }

    pub fn blocks<E: Clone>(&self, m: &Matrix<E>) -> Result<Blocks<E>> {
        linalg::split_blocks(&self.permute(m), self.split)
    }

    /// Reorders a vector given in permuted column order back to the original column order.
    pub fn unpermute_cols<E: Clone>(&self, v: &[E]) -> Vec<E> {
        let mut out = v.to_vec();
        for (k, &c) in self.col_perm.iter().enumerate() {
            out[c] = v[k].clone();
        }
        out
    }
}

/// Locates every `u_{0,θ}` and checks they form a diagonal of size MHB with sign +1.
pub fn theta_partition(m: &SymbolicResultantMatrix, theta: &Exponent) -> Result<ThetaPartition> {
    let t = m.ty;
    if theta.degree() != t.degree_of(0)
        || theta.x.len() != t.nx + 1
        || theta.y.len() != t.ny + 1
        || theta.z.len() != t.nz + 1
    {
        return Err(Error::Precondition(format!("θ = {theta} is not a trilinear monomial")));
    }
    let mut hits: Vec<(usize, usize)> = Vec::new();
    for (r, c, e) in m.entries() {
        if e.poly == 0 && &e.exponent == theta {
            if e.sign != 1 {
                return Err(Error::ThetaViolation(format!("u[0][{theta}] with sign -1 at ({r},{c})")));
            }
            hits.push((r, c));
        }
    }
    let expected = mhb(&t) as usize;
    if hits.len() != expected {
        return Err(Error::ThetaViolation(format!("{} occurrences, expected {expected}", hits.len())));
    }
    let rows: HashSet<usize> = hits.iter().map(|h| h.0).collect();
    let cols: HashSet<usize> = hits.iter().map(|h| h.1).collect();
    if rows.len() != hits.len() || cols.len() != hits.len() {
        return Err(Error::ThetaViolation("two occurrences share a row or column".into()));
    }
    hits.sort_by_key(|h| h.1);
    let split = m.size() - hits.len();
    let mut row_perm: Vec<usize> = (0..m.rows.len()).filter(|r| !rows.contains(r)).collect();
    let mut col_perm: Vec<usize> = (0..m.size()).filter(|c| !cols.contains(c)).collect();
    row_perm.extend(hits.iter().map(|h| h.0));
    col_perm.extend(hits.iter().map(|h| h.1));
    Ok(ThetaPartition { theta: theta.clone(), row_perm, col_perm, split })
}

/// Exponent of `x_0 y_0 z_0` for a type.
pub fn default_theta(t: &SystemType) -> Exponent {
    Exponent::unit(t.dims(), [Some(0), Some(0), Some(0)])
}
