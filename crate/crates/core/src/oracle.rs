//! Independent checks: exhaustive solving over a prime field, dual Veronese forms, the
//! embedding `ρ_α` into the column space, and the Koszul strand map of the linear z-system.

use std::collections::btree_map::Entry;
use std::collections::BTreeMap;

use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::{Signed, Zero};
use rand::Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::field::{ComplexFloat, Field, PrimeField, Rationals};
use crate::koszul::{self, star_contract, BasisBlock, KoszulBasisElement, SymbolicResultantMatrix, ThetaPartition};
use crate::linalg::{self, Matrix};
use crate::multihomo::{
    self, binomial, monomial_basis, BilinearSystem, Block, Exponent, MHPoly, MultiDegree, ProjectiveSolution,
    SystemType,
};

/// Default limit on the number of points enumerated by [`ff_solve`].
pub const DEFAULT_BUDGET: u128 = 10_000_000;

/// Canonical representatives (first nonzero coordinate 1) of `P^n(F_p)`.
pub fn projective_points(field: &PrimeField, n: usize) -> Vec<Vec<u64>> {
    let p = field.modulus();
    let mut out = Vec::new();
    for lead in 0..=n {
        let free = n - lead;
        let count = p.pow(free as u32);
        for mut code in 0..count {
            let mut v = vec![0u64; n + 1];
            v[lead] = 1;
            for slot in v.iter_mut().skip(lead + 1) {
                *slot = code % p;
                code /= p;
            }
            out.push(v);
        }
    }
    out
}

fn projective_count(p: u128, n: usize) -> u128 {
    (0..=n as u32).map(|k| p.pow(k)).sum()
}

/// All common zeros of `f_1..f_n` in `P^{n_x} x P^{n_y} x P^{n_z}` over `F_p`.
pub fn ff_solve(sys: &BilinearSystem, field: &PrimeField, budget: u128) -> Result<Vec<ProjectiveSolution<u64>>> {
    let t = sys.system_type();
    let p = field.modulus() as u128;
    let total: u128 = t.dims().iter().map(|&n| projective_count(p, n)).product();
    if total > budget {
        return Err(Error::BudgetExceeded(total));
    }
    let px = projective_points(field, t.nx);
    let py = projective_points(field, t.ny);
    let pz = projective_points(field, t.nz);
    let zero_z = vec![0u64; t.nz + 1];
    let zero_y = vec![0u64; t.ny + 1];
    let mut out: Vec<ProjectiveSolution<u64>> = px
        .par_iter()
        .map(|x| -> Result<Vec<ProjectiveSolution<u64>>> {
            let mut found = Vec::new();
            let mut zs = Vec::new();
            for z in &pz {
                let pt = ProjectiveSolution::new(x.clone(), zero_y.clone(), z.clone());
                let mut ok = true;
                for j in t.r + 1..=t.n() {
                    if sys.poly(j).expect("in range").evaluate(field, &pt)? != 0 {
                        ok = false;
                        break;
                    }
                }
                if ok {
                    zs.push(z);
                }
            }
            if zs.is_empty() {
                return Ok(found);
            }
            for y in &py {
                let pt = ProjectiveSolution::new(x.clone(), y.clone(), zero_z.clone());
                let mut ok = true;
                for j in 1..=t.r {
                    if sys.poly(j).expect("in range").evaluate(field, &pt)? != 0 {
                        ok = false;
                        break;
                    }
                }
                if ok {
                    found.extend(zs.iter().map(|z| ProjectiveSolution::new(x.clone(), y.clone(), (*z).clone())));
                }
            }
            Ok(found)
        })
        .collect::<Result<Vec<_>>>()?
        .into_iter()
        .flatten()
        .collect();
    out.sort_by(|a, b| (&a.x, &a.y, &a.z).cmp(&(&b.x, &b.y, &b.z)));
    Ok(out)
}

/// The dual form whose coefficient at `∂t^θ` is `(t^θ / t_0^d)(α)`; empty for `d < 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct DualVeronese<E> {
    pub block: Block,
    pub degree: i64,
    /// Coefficients over `monomial_basis(n_t, d)`.
    pub coeffs: Vec<E>,
}

impl<E: Clone> DualVeronese<E> {
    pub fn is_zero_form(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Coefficient at a dual monomial, looked up by exponent.
    pub fn coeff_at(&self, exps: &[u32], zero: E) -> E {
        if self.degree < 0 || exps.iter().sum::<u32>() as i64 != self.degree {
            return zero;
        }
        let basis = monomial_basis(exps.len() - 1, self.degree);
        match basis.iter().position(|b| b == exps) {
            Some(i) => self.coeffs[i].clone(),
            None => zero,
        }
    }
}

pub fn dual_veronese<F: Field>(field: &F, block: Block, d: i64, alpha: &[F::Elem]) -> Result<DualVeronese<F::Elem>> {
    if d < 0 {
        return Ok(DualVeronese { block, degree: d, coeffs: Vec::new() });
    }
    let lead = alpha.first().ok_or_else(|| Error::DimensionMismatch("empty block".into()))?;
    if field.is_zero(lead) {
        return Err(Error::ZeroLeadingCoordinate(block.letter()));
    }
    let inv = field.inv(lead).expect("nonzero");
    let ratios: Vec<F::Elem> = alpha.iter().map(|a| field.mul(a, &inv)).collect();
    let coeffs = monomial_basis(alpha.len() - 1, d)
        .iter()
        .map(|e| e.iter().zip(&ratios).fold(field.one(), |acc, (k, r)| field.mul(&acc, &field.pow(r, *k as u64))))
        .collect();
    Ok(DualVeronese { block, degree: d, coeffs })
}

/// `g ⋆ dv` computed termwise next to the predicted `(g / t_0^{d̄})(α) · dv(d − d̄)`.
/// `g` is given by its terms in one block, all of degree `d̄`.
pub fn star_eval_check<F: Field>(
    field: &F,
    g: &[(Vec<u32>, F::Elem)],
    g_degree: i64,
    dv: &DualVeronese<F::Elem>,
    alpha: &[F::Elem],
) -> Result<(Vec<F::Elem>, Vec<F::Elem>)> {
    let n = alpha.len() - 1;
    let target_deg = dv.degree - g_degree;
    let target = monomial_basis(n, target_deg);
    let index: BTreeMap<&Vec<u32>, usize> = target.iter().enumerate().map(|(i, e)| (e, i)).collect();
    let mut lhs = vec![field.zero(); target.len()];
    for (sigma, c) in monomial_basis(n, dv.degree).iter().zip(&dv.coeffs) {
        for (theta, gc) in g {
            if let Some(res) = star_contract(theta, sigma) {
                let k = index[&res];
                lhs[k] = field.add(&lhs[k], &field.mul(gc, c));
            }
        }
    }
    let lead = field.inv(&alpha[0]).ok_or(Error::ZeroLeadingCoordinate(dv.block.letter()))?;
    let mut value = field.zero();
    for (theta, gc) in g {
        let mono = theta
            .iter()
            .zip(alpha)
            .fold(field.one(), |acc, (k, a)| field.mul(&acc, &field.pow(&field.mul(a, &lead), *k as u64)));
        value = field.add(&value, &field.mul(gc, &mono));
    }
    let rest = dual_veronese(field, dv.block, target_deg, alpha)?;
    let rhs = rest.coeffs.iter().map(|c| field.mul(&value, c)).collect();
    Ok((lhs, rhs))
}

/// Sparse element of `S_x(·)^* ⊗ S_y(·)^* ⊗ S_z(·)` keyed by `(dx, dy, z)`.
pub type TripleMap<E> = BTreeMap<(Vec<u32>, Vec<u32>, Vec<u32>), E>;

/// `ψ(ℓ, f)` for a concrete `ℓ` and polynomial.
pub fn psi_apply<F: Field>(field: &F, ell: &TripleMap<F::Elem>, f: &MHPoly) -> Result<TripleMap<F::Elem>> {
    let mut out: TripleMap<F::Elem> = BTreeMap::new();
    for ((dx, dy, dz), c) in ell {
        for (sigma, fc) in f.terms() {
            let (Some(cx), Some(cy)) = (star_contract(&sigma.x, dx), star_contract(&sigma.y, dy)) else {
                continue;
            };
            let z: Vec<u32> = dz.iter().zip(&sigma.z).map(|(a, b)| a + b).collect();
            let v = field.mul(c, &field.from_rational(fc)?);
            let slot = out.entry((cx, cy, z)).or_insert_with(|| field.zero());
            *slot = field.add(slot, &v);
        }
    }
    out.retain(|_, v| !field.is_zero(v));
    Ok(out)
}

fn tensor<F: Field>(
    field: &F,
    dims: [usize; 3],
    vx: &DualVeronese<F::Elem>,
    vy: &DualVeronese<F::Elem>,
    gz: &[F::Elem],
    gz_degree: i64,
) -> TripleMap<F::Elem> {
    let mut out = BTreeMap::new();
    let bx = monomial_basis(dims[0], vx.degree);
    let by = monomial_basis(dims[1], vy.degree);
    let bz = monomial_basis(dims[2], gz_degree);
    for (ex, cx) in bx.iter().zip(&vx.coeffs) {
        for (ey, cy) in by.iter().zip(&vy.coeffs) {
            for (ez, cz) in bz.iter().zip(gz) {
                let v = field.mul(&field.mul(cx, cy), cz);
                if !field.is_zero(&v) {
                    out.insert((ex.clone(), ey.clone(), ez.clone()), v);
                }
            }
        }
    }
    out
}

/// Product of two z-polynomials given as coefficient vectors over canonical bases.
pub fn multiply_z<F: Field>(field: &F, nz: usize, a: &[F::Elem], da: i64, b: &[F::Elem], db: i64) -> Vec<F::Elem> {
    let ba = monomial_basis(nz, da);
    let bb = monomial_basis(nz, db);
    let target = monomial_basis(nz, da + db);
    let index: BTreeMap<&Vec<u32>, usize> = target.iter().enumerate().map(|(i, e)| (e, i)).collect();
    let mut out = vec![field.zero(); target.len()];
    for (ea, ca) in ba.iter().zip(a) {
        for (eb, cb) in bb.iter().zip(b) {
            let e: Vec<u32> = ea.iter().zip(eb).map(|(u, v)| u + v).collect();
            let k = index[&e];
            out[k] = field.add(&out[k], &field.mul(ca, cb));
        }
    }
    out
}

/// Both sides of `ψ(1_x(dx) ⊗ 1_y(dy) ⊗ g_z, f) = 1_x(dx − d̄x) ⊗ 1_y(dy − d̄y) ⊗ (g_z · f(α_x, α_y))`.
#[allow(clippy::too_many_arguments)]
pub fn psi_evaluation_sides<F: Field>(
    field: &F,
    f: &MHPoly,
    ax: &[F::Elem],
    ay: &[F::Elem],
    dx: i64,
    dy: i64,
    gz: &[F::Elem],
    gz_degree: i64,
) -> Result<(TripleMap<F::Elem>, TripleMap<F::Elem>)> {
    let dims = f.dims();
    let deg = f.degree();
    let vx = dual_veronese(field, Block::X, dx, ax)?;
    let vy = dual_veronese(field, Block::Y, dy, ay)?;
    let lhs = psi_apply(field, &tensor(field, dims, &vx, &vy, gz, gz_degree), f)?;
    let fv = f.partial_evaluate_xy(field, ax, ay)?;
    let prod = multiply_z(field, dims[2], gz, gz_degree, &fv, deg.dz as i64);
    let rx = dual_veronese(field, Block::X, dx - deg.dx as i64, ax)?;
    let ry = dual_veronese(field, Block::Y, dy - deg.dy as i64, ay)?;
    let rhs = tensor(field, dims, &rx, &ry, &prod, gz_degree + deg.dz as i64);
    Ok((lhs, rhs))
}

/// Index sets of the `L11` columns followed by those of the `L12` columns, in column order.
pub fn rho_index_sets(cols: &[KoszulBasisElement]) -> Vec<(BasisBlock, Vec<usize>)> {
    let mut out: Vec<(BasisBlock, Vec<usize>)> = Vec::new();
    for block in [BasisBlock::L11, BasisBlock::L12] {
        for c in cols.iter().filter(|c| c.block == block) {
            if !out.iter().any(|(b, s)| *b == block && *s == c.set) {
                out.push((block, c.set.clone()));
            }
        }
    }
    out
}

/// Coefficients of `ρ_α(λ)` in the column basis: the entry of `∂x^dx ∂y^dy e_I` is
/// `λ_I · 1_x(1)[dx] · 1_y(deg dy)[dy]`.
pub fn build_rho<F: Field>(
    field: &F,
    t: &SystemType,
    cols: &[KoszulBasisElement],
    ax: &[F::Elem],
    ay: &[F::Elem],
    lambda: &[F::Elem],
) -> Result<Vec<F::Elem>> {
    let sets = rho_index_sets(cols);
    let expected = binomial(t.s as i64 + 1, t.s as i64 - t.nz as i64 + 1) as usize;
    if sets.len() != expected || lambda.len() != expected {
        return Err(Error::DimensionMismatch(format!(
            "{} index sets and {} weights, expected {expected}",
            sets.len(),
            lambda.len()
        )));
    }
    let vx = dual_veronese(field, Block::X, 1, ax)?;
    let mut vy_cache: BTreeMap<i64, DualVeronese<F::Elem>> = BTreeMap::new();
    let mut out = Vec::with_capacity(cols.len());
    for c in cols {
        let k = sets.iter().position(|(b, s)| *b == c.block && *s == c.set).expect("collected above");
        let ydeg = c.dy.iter().sum::<u32>() as i64;
        if let Entry::Vacant(slot) = vy_cache.entry(ydeg) {
            slot.insert(dual_veronese(field, Block::Y, ydeg, ay)?);
        }
        let cx = vx.coeff_at(&c.dx, field.zero());
        let cy = vy_cache[&ydeg].coeff_at(&c.dy, field.zero());
        out.push(field.mul(&lambda[k], &field.mul(&cx, &cy)));
    }
    Ok(out)
}

/// `(f_0(α_x, α_y), f_{r+1}(α_x, α_y), .., f_n(α_x, α_y))` as coefficient vectors of linear z-forms.
pub fn linear_z_system<F: Field>(
    sys: &BilinearSystem,
    field: &F,
    ax: &[F::Elem],
    ay: &[F::Elem],
) -> Result<Vec<Vec<F::Elem>>> {
    let t = sys.system_type();
    let f0 = sys.f0().ok_or_else(|| Error::Precondition("linear z-system needs f0".into()))?;
    let mut out = vec![f0.partial_evaluate_xy(field, ax, ay)?];
    for j in t.r + 1..=t.n() {
        out.push(sys.poly(j).expect("in range").partial_evaluate_xy(field, ax, ay)?);
    }
    Ok(out)
}

/// Row labels `(z-variable, K)` and column labels `J` of [`koszul_strand_map`].
pub fn strand_labels(s: usize, nz: usize) -> (Vec<(usize, Vec<usize>)>, Vec<Vec<usize>>) {
    let all: Vec<usize> = (0..=s).collect();
    let cols = if s + 1 >= nz { koszul::subsets(&all, s + 1 - nz) } else { Vec::new() };
    let rows = if s >= nz {
        koszul::subsets(&all, s - nz).into_iter().flat_map(|k| (0..=nz).map(move |z| (z, k.clone()))).collect()
    } else {
        Vec::new()
    };
    (rows, cols)
}

/// Degree-zero strand of the `(s − n_z + 1)`-th Koszul differential of `s + 1` linear forms.
pub fn koszul_strand_map<F: Field>(field: &F, forms: &[Vec<F::Elem>], nz: usize) -> Result<Matrix<F::Elem>> {
    if forms.is_empty() || forms.iter().any(|g| g.len() != nz + 1) {
        return Err(Error::DimensionMismatch(format!("forms must have {} coefficients", nz + 1)));
    }
    let s = forms.len() - 1;
    let (rows, cols) = strand_labels(s, nz);
    let index: BTreeMap<&(usize, Vec<usize>), usize> = rows.iter().enumerate().map(|(i, r)| (r, i)).collect();
    let mut m = Matrix::filled(rows.len(), cols.len(), field.zero());
    for (c, set) in cols.iter().enumerate() {
        for (pos, &j) in set.iter().enumerate() {
            let rest: Vec<usize> = set.iter().copied().filter(|&k| k != j).collect();
            for (z, coeff) in forms[j].iter().enumerate() {
                let r = index[&(z, rest.clone())];
                let v = if pos % 2 == 0 { coeff.clone() } else { field.neg(coeff) };
                let cur = m.get(r, c).clone();
                m.set(r, c, field.add(&cur, &v));
            }
        }
    }
    Ok(m)
}

/// Maps a column index set to the strand labelling: `0 -> 0`, `r + j -> j`, dropping `1..r`.
fn to_strand_set(set: &[usize], r: usize) -> Vec<usize> {
    set.iter().filter(|&&i| i == 0 || i > r).map(|&i| if i == 0 { 0 } else { i - r }).collect()
}

/// The images `δ1 ∘ ρ_α` of the unit weights, as columns in row-basis coordinates.
pub fn rho_composition(
    m: &SymbolicResultantMatrix,
    sys: &BilinearSystem,
    ax: &[BigRational],
    ay: &[BigRational],
) -> Result<Matrix<BigRational>> {
    let t = m.ty;
    let spec = m.specialize(sys, &Rationals)?;
    let k = rho_index_sets(&m.cols).len();
    let mut out = Matrix::filled(m.rows.len(), k, BigRational::zero());
    for j in 0..k {
        let lambda: Vec<BigRational> = (0..k).map(|i| BigRational::from_integer(((i == j) as i64).into())).collect();
        let v = build_rho(&Rationals, &t, &m.cols, ax, ay, &lambda)?;
        for r in 0..m.rows.len() {
            let mut acc = BigRational::zero();
            for (c, vc) in v.iter().enumerate() {
                if !vc.is_zero() {
                    acc += spec.get(r, c) * vc;
                }
            }
            out.set(r, j, acc);
        }
    }
    Ok(out)
}

/// Largest deviation between `δ1 ∘ ρ_α` and the Koszul strand map of the linear z-system.
///
/// The identification places the strand entry of `(z_k, K)` on the row
/// `∂y^dy z_k e_{1..r ∪ K}` scaled by `1_y[dy]`, with a factor `(-1)^r` on columns whose
/// index set avoids 0 and on rows whose index set contains 0. Every other row must vanish.
pub fn verify_rho_composition(
    m: &SymbolicResultantMatrix,
    sys: &BilinearSystem,
    ax: &[BigRational],
    ay: &[BigRational],
) -> Result<BigRational> {
    let t = m.ty;
    for j in 1..=t.r {
        let v = sys.poly(j).expect("in range").substitute_xy(&Rationals, ax, ay)?;
        if v.iter().any(|c| !c.is_zero()) {
            return Err(Error::Precondition(format!("f{j} does not vanish at (α_x, α_y)")));
        }
    }
    let composed = rho_composition(m, sys, ax, ay)?;
    let forms = linear_z_system(sys, &Rationals, ax, ay)?;
    let strand = koszul_strand_map(&Rationals, &forms, t.nz)?;
    let (srows, scols) = strand_labels(t.s, t.nz);
    let sets = rho_index_sets(&m.cols);
    let parity = |neg: bool| if neg && t.r % 2 == 1 { -1i64 } else { 1 };
    let mut vy_cache: BTreeMap<i64, DualVeronese<BigRational>> = BTreeMap::new();
    let mut worst = BigRational::zero();
    for (j, (_, set)) in sets.iter().enumerate() {
        let jset = to_strand_set(set, t.r);
        let sc = scols
            .iter()
            .position(|c| *c == jset)
            .ok_or_else(|| Error::LabelMismatch(format!("index set {set:?} has no strand column")))?;
        let col_sign = parity(!set.contains(&0));
        for (r, row) in m.rows.iter().enumerate() {
            let expected = match row.block {
                BasisBlock::L02 | BasisBlock::L04 => {
                    let z = row.dz.iter().position(|&e| e == 1).expect("linear z factor");
                    let kset = to_strand_set(&row.set, t.r);
                    let sr = srows
                        .iter()
                        .position(|(zz, kk)| *zz == z && *kk == kset)
                        .ok_or_else(|| Error::LabelMismatch(format!("row {row} has no strand row")))?;
                    let ydeg = row.dy.iter().sum::<u32>() as i64;
                    if let Entry::Vacant(slot) = vy_cache.entry(ydeg) {
                        slot.insert(dual_veronese(&Rationals, Block::Y, ydeg, ay)?);
                    }
                    let cy = vy_cache[&ydeg].coeff_at(&row.dy, BigRational::zero());
                    let sign = col_sign * parity(row.set.contains(&0));
                    strand.get(sr, sc) * cy * BigRational::from_integer(sign.into())
                }
                _ => BigRational::zero(),
            };
            let dev = (composed.get(r, j) - expected).abs();
            if dev > worst {
                worst = dev;
            }
        }
    }
    Ok(worst)
}

/// `det` of the matrix specialized at an augmented system, over `F_p`.
pub fn det_mod_p(m: &SymbolicResultantMatrix, sys: &BilinearSystem, field: &PrimeField) -> Result<u64> {
    linalg::det_gauss(field, &m.specialize(sys, field)?)
}

/// Whether the leading block `M11` of a θ-partition is singular over `F_p`.
pub fn m11_singular_mod_p(
    m: &SymbolicResultantMatrix,
    partition: &ThetaPartition,
    sys: &BilinearSystem,
    field: &PrimeField,
) -> Result<bool> {
    let blocks = partition.blocks(&m.specialize(sys, field)?)?;
    Ok(linalg::det_gauss(field, &blocks.m11)? == 0)
}

/// Point whose coordinates are nonzero integers in `[-bound, bound]`.
pub fn random_full_support_point(dims: [usize; 3], rng: &mut impl Rng, bound: i64) -> ProjectiveSolution<BigRational> {
    let bound = bound.max(1);
    let mut block = |n: usize| -> Vec<BigRational> {
        (0..=n)
            .map(|_| loop {
                let v = rng.random_range(-bound..=bound);
                if v != 0 {
                    break BigRational::from_integer(v.into());
                }
            })
            .collect()
    };
    ProjectiveSolution::new(block(dims[0]), block(dims[1]), block(dims[2]))
}

/// Point on which the monomial `θ` vanishes: one coordinate in the support of `θ` is set to
/// zero, chosen in a block with at least two variables.
pub fn theta_vanishing_point(
    t: &SystemType,
    theta: &Exponent,
    rng: &mut impl Rng,
    bound: i64,
) -> ProjectiveSolution<BigRational> {
    let mut p = random_full_support_point(t.dims(), rng, bound);
    let dims = t.dims();
    for (k, b) in Block::ALL.into_iter().enumerate() {
        if dims[k] == 0 {
            continue;
        }
        if let Some(i) = theta.block(b).iter().position(|&e| e > 0) {
            match b {
                Block::X => p.x[i] = BigRational::zero(),
                Block::Y => p.y[i] = BigRational::zero(),
                Block::Z => p.z[i] = BigRational::zero(),
            }
            return p;
        }
    }
    unreachable!("some block has at least two variables")
}

/// System together with `f0` where all `n + 1` polynomials vanish at `α`.
pub fn planted_augmented_system(
    t: SystemType,
    alpha: &ProjectiveSolution<BigRational>,
    seed: u64,
) -> Result<BilinearSystem> {
    let sys = multihomo::planted_root_system(t, alpha, seed)?;
    let mut rng = multihomo::rng_from_seed(seed ^ 0xa5a5_a5a5);
    let f0 = multihomo::planted_poly(t.dims(), MultiDegree::new(1, 1, 1), std::slice::from_ref(alpha), &mut rng, 10)?;
    sys.with_f0(f0)
}

/// Random system together with a random `f0`, coefficients in `[-bound, bound]`.
pub fn random_augmented_system(t: SystemType, seed: u64, bound: i64) -> BilinearSystem {
    let sys = multihomo::random_system(t, seed, bound);
    let mut rng = multihomo::rng_from_seed(seed ^ 0x5eed_f0f0_5eed_f0f0);
    let f0 = multihomo::random_poly(t.dims(), MultiDegree::new(1, 1, 1), &mut rng, bound.max(1));
    sys.with_f0(f0).expect("degree (1,1,1)")
}

/// Relative distance of a complex column vector from the image of `ρ_α`.
pub fn rho_span_residual(
    t: &SystemType,
    cols: &[KoszulBasisElement],
    v: &[Complex64],
    ax: &[Complex64],
    ay: &[Complex64],
) -> Result<f64> {
    let sets = rho_index_sets(cols);
    let ones = vec![Complex64::new(1.0, 0.0); sets.len()];
    let w = build_rho(&ComplexFloat, t, cols, ax, ay, &ones)?;
    let mut resid = 0.0;
    for (block, set) in &sets {
        let idx: Vec<usize> = (0..cols.len()).filter(|&c| cols[c].block == *block && cols[c].set == *set).collect();
        let ww: f64 = idx.iter().map(|&c| w[c].norm_sqr()).sum();
        let proj: Complex64 = idx.iter().map(|&c| w[c].conj() * v[c]).sum::<Complex64>() / ww;
        resid += idx.iter().map(|&c| (v[c] - proj * w[c]).norm_sqr()).sum::<f64>();
    }
    let total: f64 = v.iter().map(|c| c.norm_sqr()).sum();
    Ok((resid / total).sqrt())
}
