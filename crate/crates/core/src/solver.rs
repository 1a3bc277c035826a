//! Square 2-bilinear solving through the eigen-decomposition of a Schur complement of the
//! Koszul resultant matrix.

use std::collections::BTreeMap;

use nalgebra::linalg::Schur;
use nalgebra::DMatrix;
use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::Zero;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::{rational_to_f64, ComplexFloat, Rationals};
use crate::koszul::{self, KoszulBasisElement, SymbolicResultantMatrix, ThetaPartition};
use crate::linalg::{self, Matrix};
use crate::multihomo::{
    monomial_basis, random_poly, rng_from_seed, BilinearSystem, CoordinateChange, Exponent, MHPoly, ProjectiveSolution,
    SystemType,
};

/// Numerical thresholds of the solver.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Tolerances {
    /// Relative distance below which two eigenvalues count as clustered.
    pub cluster: f64,
    /// Relative size below which an extraction anchor counts as zero.
    pub anchor: f64,
    /// Acceptance bound on the residual of a solution.
    pub residual: f64,
    /// Imaginary parts below this are reported as real.
    pub real: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances { cluster: 1e-7, anchor: 1e-9, residual: 1e-6, real: 1e-8 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolveOptions {
    pub seed: u64,
    pub tol: Tolerances,
    pub max_retries: usize,
    /// Entries of the random coordinate change are drawn from `[-bound, bound]`.
    pub coordinate_bound: i64,
    /// Coefficients of the random `f0` are drawn from `[-bound, bound]`.
    pub f0_bound: i64,
    /// Monomial of `f0` whose coefficient becomes the eigenvalue parameter; `x0 y0 z0` when unset.
    pub theta: Option<Exponent>,
}

impl Default for SolveOptions {
    fn default() -> Self {
        SolveOptions {
            seed: 0,
            tol: Tolerances::default(),
            max_retries: 10,
            coordinate_bound: 5,
            f0_bound: 10,
            theta: None,
        }
    }
}

/// Eigenvalue with a unit right eigenvector whose first significant entry is real positive.
#[derive(Debug, Clone, PartialEq)]
pub struct EigenPair {
    pub value: Complex64,
    pub vector: Vec<Complex64>,
    pub clustered: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolveReport {
    pub solutions: Vec<ProjectiveSolution<Complex64>>,
    /// Max `|f_i|` at each solution with every block scaled to unit norm.
    pub residuals: Vec<f64>,
    pub real: Vec<bool>,
    pub eigenpairs: Vec<EigenPair>,
    /// Failed attempts before the returned one.
    pub retries: usize,
    /// Seed of the attempt that produced the report.
    pub attempt_seed: u64,
    pub f0: MHPoly,
    pub theta: Exponent,
    pub coordinate_change: CoordinateChange,
}

impl SolveReport {
    pub fn max_residual(&self) -> f64 {
        self.residuals.iter().copied().fold(0.0, f64::max)
    }
}

fn to_f64_matrix(m: &Matrix<BigRational>) -> DMatrix<f64> {
    DMatrix::from_fn(m.rows(), m.cols(), |i, j| rational_to_f64(m.get(i, j)))
}

fn normalize_phase(v: &mut [Complex64]) {
    let norm = v.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
    if norm == 0.0 {
        return;
    }
    let max = v.iter().map(|c| c.norm()).fold(0.0, f64::max);
    let lead = v.iter().find(|c| c.norm() > 1e-8 * max).copied().unwrap_or(Complex64::new(1.0, 0.0));
    let phase = lead.conj() / lead.norm();
    for c in v.iter_mut() {
        *c = *c * phase / norm;
    }
}

/// Right singular vector of the smallest singular value, and the singular values ascending.
fn null_vector(m: &DMatrix<Complex64>) -> Result<(Vec<Complex64>, Vec<f64>)> {
    let cols = m.ncols();
    let padded = if m.nrows() < cols {
        let mut p = DMatrix::<Complex64>::zeros(cols, cols);
        p.view_mut((0, 0), (m.nrows(), cols)).copy_from(m);
        p
    } else {
        m.clone()
    };
    let svd = padded.svd(false, true);
    let v_t = svd.v_t.ok_or_else(|| Error::EigenFailure("SVD did not converge".into()))?;
    let mut order: Vec<usize> = (0..svd.singular_values.len()).collect();
    order.sort_by(|&a, &b| svd.singular_values[a].total_cmp(&svd.singular_values[b]));
    let k = order[0];
    let v = (0..cols).map(|j| v_t[(k, j)].conj()).collect();
    Ok((v, order.iter().map(|&i| svd.singular_values[i]).collect()))
}

/// All eigenpairs of a real square matrix, sorted by eigenvalue.
pub fn eigen_schur(s: &DMatrix<f64>, cluster_tol: f64) -> Result<Vec<EigenPair>> {
    if !s.is_square() {
        return Err(Error::NotSquare(s.nrows(), s.ncols()));
    }
    if s.iter().any(|v| !v.is_finite()) {
        return Err(Error::EigenFailure("non-finite entry".into()));
    }
    let n = s.nrows();
    let schur = Schur::try_new(s.clone(), f64::EPSILON, 100_000)
        .ok_or_else(|| Error::EigenFailure("Schur iteration did not converge".into()))?;
    let mut values: Vec<Complex64> = schur.complex_eigenvalues().iter().copied().collect();
    values.sort_by(|a, b| a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im)));
    let scale = 1.0 + values.iter().map(|v| v.norm()).fold(0.0, f64::max);
    let sc = s.map(|v| Complex64::new(v, 0.0));
    let mut out = Vec::with_capacity(n);
    for (i, &lambda) in values.iter().enumerate() {
        let shifted = &sc - DMatrix::<Complex64>::identity(n, n) * lambda;
        let (mut v, _) = null_vector(&shifted)?;
        normalize_phase(&mut v);
        let clustered = values.iter().enumerate().any(|(j, mu)| j != i && (lambda - mu).norm() < cluster_tol * scale);
        out.push(EigenPair { value: lambda, vector: v, clustered });
    }
    Ok(out)
}

/// Extends `v̄` to a kernel vector candidate `(−M11⁻¹ M12 v̄, v̄)` in the original column order.
/// `x` is the exact `M11⁻¹ M12`.
pub fn extend_eigenvector(
    partition: &ThetaPartition,
    x: &Matrix<BigRational>,
    vbar: &[Complex64],
) -> Result<Vec<Complex64>> {
    if vbar.len() != x.cols() || x.rows() != partition.split {
        return Err(Error::DimensionMismatch(format!(
            "eigenvector of length {} for a trailing block of size {}",
            vbar.len(),
            x.cols()
        )));
    }
    let mut permuted = Vec::with_capacity(partition.size());
    for i in 0..x.rows() {
        let mut acc = Complex64::zero();
        for (j, vj) in vbar.iter().enumerate() {
            let xij = x.get(i, j);
            if !xij.is_zero() {
                acc += vj * rational_to_f64(xij);
            }
        }
        permuted.push(-acc);
    }
    permuted.extend_from_slice(vbar);
    Ok(partition.unpermute_cols(&permuted))
}

/// Recovers `(α_x, α_y)` from a kernel vector indexed by the column basis.
///
/// The vector is a sum of rank-one tensors `λ_I · 1_x ⊗ 1_y ⊗ e_I`; inside the index set with the
/// largest entry, the column of the largest entry is proportional to `α_x` and shifting one
/// `∂y` of the largest entry through every variable gives a vector proportional to `α_y`.
pub fn extract_xy(
    v: &[Complex64],
    cols: &[KoszulBasisElement],
    t: &SystemType,
    anchor_tol: f64,
) -> Result<(Vec<Complex64>, Vec<Complex64>)> {
    if v.len() != cols.len() {
        return Err(Error::DimensionMismatch("vector and basis lengths differ".into()));
    }
    let global = v.iter().map(|c| c.norm()).fold(0.0, f64::max);
    if global == 0.0 {
        return Err(Error::DegenerateBlock("zero vector".into()));
    }
    let mut groups: BTreeMap<&[usize], BTreeMap<(&[u32], &[u32]), Complex64>> = BTreeMap::new();
    for (c, val) in cols.iter().zip(v) {
        let ydeg: u32 = c.dy.iter().sum();
        if ydeg == 0 && t.ny > 0 {
            continue;
        }
        groups.entry(&c.set).or_default().insert((&c.dx, &c.dy), *val);
    }
    let (_, group) = groups
        .iter()
        .map(|(set, g)| (set, g, g.values().map(|c| c.norm()).fold(0.0, f64::max)))
        .max_by(|a, b| a.2.total_cmp(&b.2))
        .map(|(s, g, _)| (s, g))
        .ok_or_else(|| Error::DegenerateBlock("no index set carries a y factor".into()))?;
    let ((dx_star, dy_star), anchor) =
        group.iter().max_by(|a, b| a.1.norm().total_cmp(&b.1.norm())).map(|(k, c)| (*k, *c)).expect("nonempty group");
    if anchor.norm() < anchor_tol * global {
        return Err(Error::DegenerateBlock(format!("anchor {:.3e} against {global:.3e}", anchor.norm())));
    }
    let get = |dx: &[u32], dy: &[u32]| group.get(&(dx, dy)).copied().unwrap_or_default();
    let ax: Vec<Complex64> = monomial_basis(t.nx, 1).iter().map(|dx| get(dx, dy_star)).collect();
    let ay: Vec<Complex64> = if t.ny == 0 {
        vec![Complex64::new(1.0, 0.0)]
    } else {
        let k = (0..dy_star.len()).max_by_key(|&i| dy_star[i]).expect("nonempty");
        (0..=t.ny)
            .map(|j| {
                let mut e = dy_star.to_vec();
                e[k] -= 1;
                e[j] += 1;
                get(dx_star, &e)
            })
            .collect()
    };
    Ok((ax, ay))
}

/// Common zero in `z` of `f_{r+1}(α_x, α_y, z), .., f_n(α_x, α_y, z)`.
pub fn solve_z(sys: &BilinearSystem, ax: &[Complex64], ay: &[Complex64], tol: f64) -> Result<Vec<Complex64>> {
    let t = sys.system_type();
    if t.nz == 0 {
        return Ok(vec![Complex64::new(1.0, 0.0)]);
    }
    let mut rows = Vec::with_capacity(t.s);
    for j in t.r + 1..=t.n() {
        let mut row = sys.poly(j).expect("index in range").substitute_xy(&ComplexFloat, ax, ay)?;
        let norm = row.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
        if norm > 0.0 {
            row.iter_mut().for_each(|c| *c /= norm);
        }
        rows.push(row);
    }
    let m = DMatrix::from_fn(rows.len(), t.nz + 1, |i, j| rows[i][j]);
    let (v, sv) = null_vector(&m)?;
    let largest = sv.last().copied().unwrap_or(0.0);
    if sv.len() < 2 || sv[1] <= tol * largest.max(1.0) {
        return Err(Error::RankDeficient(format!("linear z-system has singular values {sv:?}")));
    }
    Ok(v)
}

/// Random trilinear `f0` with a nonzero coefficient at `θ` (default `x0 y0 z0`).
pub fn choose_f0_and_theta(t: &SystemType, seed: u64, bound: i64, theta: Option<&Exponent>) -> (MHPoly, Exponent) {
    let mut rng = rng_from_seed(seed ^ 0x5eed_f0f0_5eed_f0f0);
    let theta = theta.cloned().unwrap_or_else(|| koszul::default_theta(t));
    let mut f0 = random_poly(t.dims(), t.degree_of(0), &mut rng, bound.max(1));
    if f0.coeff(&theta).is_zero() {
        let mut c = 0;
        while c == 0 {
            c = rng.random_range(-bound.max(1)..=bound.max(1));
        }
        f0.set_coeff(theta.clone(), BigRational::from_integer(c.into())).expect("θ is trilinear");
    }
    (f0, theta)
}

/// Scales every block of a complex point to unit norm.
pub fn unit_blocks(p: &ProjectiveSolution<Complex64>) -> ProjectiveSolution<Complex64> {
    let unit = |v: &[Complex64]| {
        let n = v.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
        v.iter().map(|c| if n > 0.0 { c / n } else { *c }).collect()
    };
    ProjectiveSolution::new(unit(&p.x), unit(&p.y), unit(&p.z))
}

/// Max `|f_i|` over the square part at a point with unit-norm blocks.
pub fn residual(sys: &BilinearSystem, p: &ProjectiveSolution<Complex64>) -> Result<f64> {
    let u = unit_blocks(p);
    Ok(sys.residuals(&ComplexFloat, &u)?.iter().map(|c| c.norm()).fold(0.0, f64::max))
}

/// Divides each block by its first coordinate of significant size.
pub fn normalize_complex(p: &ProjectiveSolution<Complex64>, tol: f64) -> ProjectiveSolution<Complex64> {
    let norm = |v: &[Complex64]| {
        let max = v.iter().map(|c| c.norm()).fold(0.0, f64::max);
        match v.iter().find(|c| c.norm() > tol * max) {
            Some(lead) => {
                let lead = *lead;
                v.iter().map(|c| if c.norm() > tol * max { c / lead } else { Complex64::zero() }).collect()
            }
            None => v.to_vec(),
        }
    };
    ProjectiveSolution::new(norm(&p.x), norm(&p.y), norm(&p.z))
}

/// Output of one numeric attempt.
struct Attempt {
    pairs: Vec<EigenPair>,
    solutions: Vec<ProjectiveSolution<Complex64>>,
    residuals: Vec<f64>,
}

/// Exact partition, Schur complement `S` and `X = M11⁻¹ M12` of a full system.
pub fn schur_data(
    matrix: &SymbolicResultantMatrix,
    full: &BilinearSystem,
    theta: &Exponent,
) -> Result<(ThetaPartition, Matrix<BigRational>, Matrix<BigRational>)> {
    let partition = koszul::theta_partition(matrix, theta)?;
    let spec = matrix.specialize(full, &Rationals)?;
    let blocks = partition.blocks(&spec)?;
    let (s, x) = linalg::schur_with_solution(&Rationals, &blocks)?;
    Ok((partition, s, x))
}

fn attempt(
    matrix: &SymbolicResultantMatrix,
    sys: &BilinearSystem,
    transformed: &BilinearSystem,
    a: &CoordinateChange,
    f0: &MHPoly,
    theta: &Exponent,
    tol: &Tolerances,
) -> Result<Attempt> {
    let t = sys.system_type();
    let full = transformed.with_f0(f0.clone())?;
    let (partition, s, x) = schur_data(matrix, &full, theta)?;
    let pairs = eigen_schur(&to_f64_matrix(&s), tol.cluster)?;
    if pairs.iter().any(|p| p.clustered) {
        return Err(Error::EigenFailure("clustered eigenvalues: multiplicity or separation failure".into()));
    }
    let mut solutions = Vec::with_capacity(pairs.len());
    let mut residuals = Vec::with_capacity(pairs.len());
    for pair in &pairs {
        let v = extend_eigenvector(&partition, &x, &pair.vector)?;
        let (ax, ay) = extract_xy(&v, &matrix.cols, &t, tol.anchor)?;
        let az = solve_z(transformed, &ax, &ay, tol.anchor)?;
        let local = ProjectiveSolution::new(ax, ay, az);
        let beta = a.apply_point(&ComplexFloat, &local)?;
        let beta = normalize_complex(&beta, tol.real);
        residuals.push(residual(sys, &beta)?);
        solutions.push(beta);
    }
    Ok(Attempt { pairs, solutions, residuals })
}

/// Solves a square system: random coordinate change, random `f0`, exact Schur complement,
/// numeric eigenpairs, recovery of each solution and a residual check. Retries with fresh
/// randomness on singular `M11`, clustered eigenvalues, failed recovery or large residuals.
pub fn solve_2bilinear(sys: &BilinearSystem, opts: &SolveOptions) -> Result<SolveReport> {
    let sys = sys.without_f0();
    let t = sys.system_type();
    let matrix = koszul::assemble_delta1(&t)?;
    let mut last = String::from("no attempt made");
    let mut best: Option<SolveReport> = None;
    for k in 0..opts.max_retries.max(1) {
        let attempt_seed = opts.seed.wrapping_add((k as u64).wrapping_mul(0x9e37_79b9_7f4a_7c15));
        let mut rng = rng_from_seed(attempt_seed);
        let a = CoordinateChange::random(t.dims(), &mut rng, opts.coordinate_bound.max(1));
        let transformed = sys.apply_coordinate_change(&a)?;
        let (f0, theta) = choose_f0_and_theta(&t, attempt_seed, opts.f0_bound, opts.theta.as_ref());
        match attempt(&matrix, &sys, &transformed, &a, &f0, &theta, &opts.tol) {
            Ok(out) => {
                let real = out
                    .solutions
                    .iter()
                    .map(|p| p.x.iter().chain(&p.y).chain(&p.z).all(|c| c.im.abs() < opts.tol.real))
                    .collect();
                let report = SolveReport {
                    solutions: out.solutions,
                    residuals: out.residuals,
                    real,
                    eigenpairs: out.pairs,
                    retries: k,
                    attempt_seed,
                    f0,
                    theta,
                    coordinate_change: a,
                };
                if report.max_residual() < opts.tol.residual {
                    return Ok(report);
                }
                last = format!("residual {:.3e} above {:.1e}", report.max_residual(), opts.tol.residual);
                if best.as_ref().is_none_or(|b| report.max_residual() < b.max_residual()) {
                    best = Some(report);
                }
            }
            Err(e) => last = e.to_string(),
        }
    }
    best.ok_or(Error::RetriesExhausted { attempts: opts.max_retries.max(1), last })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures::{self, PRINTED_COL_LABELS, PRINTED_EIGENVECTOR};
    use crate::multihomo::planted_root_system;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    #[test]
    fn eigen_examples() {
        let s = DMatrix::from_row_slice(2, 2, &[5.0, -2.0, 4.0, -1.0]);
        let pairs = eigen_schur(&s, 1e-7).unwrap();
        assert!((pairs[0].value - c(1.0)).norm() < 1e-10);
        assert!((pairs[1].value - c(3.0)).norm() < 1e-10);
        let v = &pairs[0].vector;
        assert!((v[1] / v[0] - c(2.0)).norm() < 1e-10);
        assert!(v[0].im.abs() < 1e-12 && v[0].re > 0.0);
        let id = DMatrix::<f64>::identity(3, 3);
        assert!(eigen_schur(&id, 1e-7).unwrap().iter().all(|p| p.clustered));
    }

    #[test]
    fn complex_eigenvalues_of_rotation() {
        let s = DMatrix::from_row_slice(2, 2, &[0.0, -1.0, 1.0, 0.0]);
        let pairs = eigen_schur(&s, 1e-7).unwrap();
        for p in &pairs {
            assert!((p.value.norm() - 1.0).abs() < 1e-12);
            let sv = s.map(c) * nalgebra::DVector::from_vec(p.vector.clone());
            for (a, b) in sv.iter().zip(&p.vector) {
                assert!((a - b * p.value).norm() < 1e-10);
            }
        }
    }

    #[test]
    fn example_extension_and_extraction() {
        let t = fixtures::example_type();
        let sys = fixtures::example_system();
        let m = koszul::assemble_delta1(&t).unwrap();
        let (p, s, x) = schur_data(&m, &sys, &koszul::default_theta(&t)).unwrap();
        assert_eq!(
            s.to_rows(),
            fixtures::PRINTED_SCHUR
                .iter()
                .map(|r| r.iter().map(|&v| BigRational::from_integer(v.into())).collect())
                .collect::<Vec<Vec<_>>>()
        );
        let v = extend_eigenvector(&p, &x, &[c(1.0), c(2.0)]).unwrap();
        for (k, label) in PRINTED_COL_LABELS.iter().enumerate() {
            let idx = m.col_index(label).unwrap();
            assert!((v[idx] - c(PRINTED_EIGENVECTOR[k] as f64)).norm() < 1e-12, "{label}");
        }
        let (ax, ay) = extract_xy(&v, &m.cols, &t, 1e-9).unwrap();
        assert!((ax[1] / ax[0] - c(3.0)).norm() < 1e-12);
        assert!((ay[1] / ay[0] - c(2.0)).norm() < 1e-12);
        let az = solve_z(&sys, &ax, &ay, 1e-9).unwrap();
        assert!((az[1] / az[0] - c(3.0)).norm() < 1e-12);
        assert!(extend_eigenvector(&p, &x, &[c(0.0), c(0.0)]).unwrap().iter().all(|z| z.norm() == 0.0));
    }

    #[test]
    fn solves_example() {
        let sys = fixtures::example_system();
        let report = solve_2bilinear(&sys, &SolveOptions::default()).unwrap();
        assert_eq!(report.solutions.len(), 2);
        let mut found = [false; 2];
        for (sol, res) in report.solutions.iter().zip(&report.residuals) {
            assert!(*res < 1e-8);
            for (k, root) in fixtures::example_roots().iter().enumerate() {
                let r = root.map(|q| c(rational_to_f64(q)));
                let close = |a: &[Complex64], b: &[Complex64]| a.iter().zip(b).all(|(u, v)| (u - v).norm() < 1e-8);
                if close(&sol.x, &r.x) && close(&sol.y, &r.y) && close(&sol.z, &r.z) {
                    found[k] = true;
                }
            }
        }
        assert_eq!(found, [true, true]);
        assert!(report.real.iter().all(|r| *r));
    }

    fn separated(sols: &[ProjectiveSolution<Complex64>]) -> bool {
        let flat = |p: &ProjectiveSolution<Complex64>| -> Vec<Complex64> {
            p.x.iter().chain(&p.y).chain(&p.z).copied().collect()
        };
        sols.iter()
            .enumerate()
            .all(|(i, a)| sols[i + 1..].iter().all(|b| flat(a).iter().zip(flat(b)).any(|(u, v)| (u - v).norm() > 1e-4)))
    }

    #[test]
    fn recovers_planted_roots() {
        let t = fixtures::example_type();
        let mut checked = 0;
        for seed in 0..40u64 {
            let alpha = ProjectiveSolution::from_ints(&[1, seed as i64 - 4], &[2, 1 + seed as i64], &[1, -3]);
            let sys = planted_root_system(t, &alpha, seed).unwrap();
            let report = solve_2bilinear(&sys, &SolveOptions { seed, ..Default::default() }).unwrap();
            if !separated(&report.solutions) {
                continue;
            }
            let target = alpha.normalized(&Rationals).unwrap().map(|q| c(rational_to_f64(q)));
            let hit = report.solutions.iter().zip(&report.residuals).any(|(s, r)| {
                *r < 1e-8
                    && s.x
                        .iter()
                        .chain(&s.y)
                        .chain(&s.z)
                        .zip(target.x.iter().chain(&target.y).chain(&target.z))
                        .all(|(a, b)| (a - b).norm() < 1e-8)
            });
            assert!(hit, "seed {seed}: {:?}", report.solutions);
            checked += 1;
            if checked == 10 {
                break;
            }
        }
        assert_eq!(checked, 10);
    }

    #[test]
    fn solve_z_trivial_block() {
        let t = SystemType::new(2, 1, 0, 1, 2).unwrap();
        let sys = crate::multihomo::random_system(t, 3, 5);
        assert_eq!(solve_z(&sys, &[c(1.0); 3], &[c(1.0); 2], 1e-9).unwrap(), vec![c(1.0)]);
    }

    #[test]
    fn f0_choice_is_deterministic() {
        let t = fixtures::example_type();
        let (a, th) = choose_f0_and_theta(&t, 4, 10, None);
        let (b, _) = choose_f0_and_theta(&t, 4, 10, None);
        assert_eq!(a, b);
        assert!(!a.coeff(&th).is_zero());
        assert_eq!(th, koszul::default_theta(&t));
    }
}
