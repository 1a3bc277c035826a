//! Multihomogeneous polynomials over three blocks of variables `x`, `y`, `z`.
//!
//! Monomials within a block are ordered graded reverse-lexicographically with
//! variable 0 ranked highest. That order is used for every basis, label and
//! serialization in the crate.

use std::cmp::Ordering;
use std::collections::btree_map::Entry;
use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::{Field, Rationals};
use crate::linalg::{self, Matrix};

/// Binomial coefficient, zero outside `0 <= k <= n`.
pub fn binomial(n: i64, k: i64) -> u128 {
    if k < 0 || n < 0 || k > n {
        return 0;
    }
    let k = k.min(n - k) as u128;
    let n = n as u128;
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc * (n - i) / (i + 1);
    }
    acc
}

/// Order of appearance in [`monomial_basis`]: by degree, then graded
/// reverse-lexicographic with variable 0 highest (higher monomials first).
pub fn canonical_cmp(a: &[u32], b: &[u32]) -> Ordering {
    let da: u32 = a.iter().sum();
    let db: u32 = b.iter().sum();
    if da != db {
        return da.cmp(&db);
    }
    for (ai, bi) in a.iter().zip(b).rev() {
        if ai != bi {
            // the rightmost differing exponent decides; smaller means higher in grevlex
            return ai.cmp(bi);
        }
    }
    a.len().cmp(&b.len())
}

/// Exponent vectors of all monomials of degree `d` in `n_t + 1` variables, in canonical order.
pub fn monomial_basis(n_t: usize, d: i64) -> Vec<Vec<u32>> {
    if d < 0 {
        return Vec::new();
    }
    fn rec(slots: usize, remaining: u32, prefix: &mut Vec<u32>, out: &mut Vec<Vec<u32>>) {
        if slots == 1 {
            prefix.push(remaining);
            out.push(prefix.clone());
            prefix.pop();
            return;
        }
        for e in 0..=remaining {
            prefix.push(e);
            rec(slots - 1, remaining - e, prefix, out);
            prefix.pop();
        }
    }
    let mut out = Vec::new();
    rec(n_t + 1, d as u32, &mut Vec::new(), &mut out);
    out.sort_by(|a, b| canonical_cmp(a, b));
    out
}

/// Position lookup for a monomial basis.
pub fn basis_index(basis: &[Vec<u32>]) -> HashMap<Vec<u32>, usize> {
    basis.iter().enumerate().map(|(i, e)| (e.clone(), i)).collect()
}

/// Shape `(n_x, n_y, n_z; r, s)` of a square 2-bilinear system.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct SystemType {
    pub nx: usize,
    pub ny: usize,
    pub nz: usize,
    pub r: usize,
    pub s: usize,
}

impl SystemType {
    pub fn new(nx: usize, ny: usize, nz: usize, r: usize, s: usize) -> Result<Self> {
        let t = SystemType { nx, ny, nz, r, s };
        t.validate()?;
        Ok(t)
    }

    pub fn validate(&self) -> Result<()> {
        if self.r == 0 || self.s == 0 {
            return Err(Error::InvalidType(format!("{self}: r and s must be positive")));
        }
        if self.r + self.s != self.nx + self.ny + self.nz {
            return Err(Error::InvalidType(format!("{self}: r + s must equal nx + ny + nz")));
        }
        if self.ny > self.r || self.nz > self.s {
            return Err(Error::InvalidType(format!("{self}: need ny <= r and nz <= s")));
        }
        Ok(())
    }

    /// Number of equations `n = n_x + n_y + n_z`.
    pub fn n(&self) -> usize {
        self.nx + self.ny + self.nz
    }

    pub fn dims(&self) -> [usize; 3] {
        [self.nx, self.ny, self.nz]
    }

    /// Multidegree of polynomial `i`, where index 0 is the trilinear `f0`.
    pub fn degree_of(&self, i: usize) -> MultiDegree {
        if i == 0 {
            MultiDegree::new(1, 1, 1)
        } else if i <= self.r {
            MultiDegree::new(1, 1, 0)
        } else {
            MultiDegree::new(1, 0, 1)
        }
    }

    /// Every admissible type with `n_x + n_y + n_z` between 1 and `max_n`.
    pub fn enumerate(max_n: usize) -> Vec<SystemType> {
        let mut out = Vec::new();
        for n in 1..=max_n {
            for nx in 0..=n {
                for ny in 0..=n - nx {
                    let nz = n - nx - ny;
                    for r in 1..n {
                        if let Ok(t) = SystemType::new(nx, ny, nz, r, n - r) {
                            out.push(t);
                        }
                    }
                }
            }
        }
        out
    }
}

impl fmt::Display for SystemType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{},{};{},{})", self.nx, self.ny, self.nz, self.r, self.s)
    }
}

impl FromStr for SystemType {
    type Err = Error;

    /// Parses `nx,ny,nz,r,s`.
    fn from_str(s: &str) -> Result<Self> {
        let parts: Vec<usize> = s
            .split([',', ';'])
            .map(|p| p.trim().parse::<usize>())
            .collect::<std::result::Result<_, _>>()
            .map_err(|_| Error::Parse(format!("bad type {s:?}, expected nx,ny,nz,r,s")))?;
        match parts.as_slice() {
            &[nx, ny, nz, r, s] => SystemType::new(nx, ny, nz, r, s),
            _ => Err(Error::Parse(format!("bad type {s:?}, expected five integers"))),
        }
    }
}

/// Degrees `(d_x, d_y, d_z)` of a multihomogeneous polynomial.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct MultiDegree {
    pub dx: usize,
    pub dy: usize,
    pub dz: usize,
}

impl MultiDegree {
    pub const fn new(dx: usize, dy: usize, dz: usize) -> Self {
        MultiDegree { dx, dy, dz }
    }

    pub fn as_array(&self) -> [usize; 3] {
        [self.dx, self.dy, self.dz]
    }
}

/// The three variable blocks.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Block {
    X,
    Y,
    Z,
}

impl Block {
    pub const ALL: [Block; 3] = [Block::X, Block::Y, Block::Z];

    pub fn letter(self) -> char {
        match self {
            Block::X => 'x',
            Block::Y => 'y',
            Block::Z => 'z',
        }
    }
}

/// Exponent triple `(σ_x, σ_y, σ_z)` of a monomial. Serializes as its `a,b|c,d|e,f` key.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(into = "String", try_from = "String")]
pub struct Exponent {
    pub x: Vec<u32>,
    pub y: Vec<u32>,
    pub z: Vec<u32>,
}

impl Exponent {
    pub fn new(x: Vec<u32>, y: Vec<u32>, z: Vec<u32>) -> Self {
        Exponent { x, y, z }
    }

    pub fn block(&self, b: Block) -> &[u32] {
        match b {
            Block::X => &self.x,
            Block::Y => &self.y,
            Block::Z => &self.z,
        }
    }

    pub fn degree(&self) -> MultiDegree {
        MultiDegree::new(
            self.x.iter().sum::<u32>() as usize,
            self.y.iter().sum::<u32>() as usize,
            self.z.iter().sum::<u32>() as usize,
        )
    }

    /// Exponent of `x_{i} y_{j} z_{k}`-style monomials: a unit vector per block of degree one,
    /// zero vector for degree zero.
    pub fn unit(dims: [usize; 3], idx: [Option<usize>; 3]) -> Self {
        let mk = |n: usize, i: Option<usize>| {
            let mut v = vec![0u32; n + 1];
            if let Some(i) = i {
                v[i] = 1;
            }
            v
        };
        Exponent::new(mk(dims[0], idx[0]), mk(dims[1], idx[1]), mk(dims[2], idx[2]))
    }

    /// All exponents of a given multidegree, in canonical order.
    pub fn all(dims: [usize; 3], degree: MultiDegree) -> Vec<Exponent> {
        let bx = monomial_basis(dims[0], degree.dx as i64);
        let by = monomial_basis(dims[1], degree.dy as i64);
        let bz = monomial_basis(dims[2], degree.dz as i64);
        let mut out = Vec::with_capacity(bx.len() * by.len() * bz.len());
        for x in &bx {
            for y in &by {
                for z in &bz {
                    out.push(Exponent::new(x.clone(), y.clone(), z.clone()));
                }
            }
        }
        out
    }

    /// Parses the `a,b|c,d|e,f` key format.
    pub fn parse_key(key: &str) -> Result<Self> {
        let blocks: Vec<&str> = key.split('|').collect();
        if blocks.len() != 3 {
            return Err(Error::Parse(format!("exponent key {key:?} needs three blocks")));
        }
        let parse_block = |s: &str| -> Result<Vec<u32>> {
            s.split(',')
                .map(|p| p.trim().parse::<u32>())
                .collect::<std::result::Result<_, _>>()
                .map_err(|_| Error::Parse(format!("bad exponent block {s:?} in {key:?}")))
        };
        Ok(Exponent::new(parse_block(blocks[0])?, parse_block(blocks[1])?, parse_block(blocks[2])?))
    }

    pub fn key(&self) -> String {
        let join = |v: &[u32]| v.iter().map(u32::to_string).collect::<Vec<_>>().join(",");
        format!("{}|{}|{}", join(&self.x), join(&self.y), join(&self.z))
    }

    fn fits(&self, dims: [usize; 3]) -> bool {
        self.x.len() == dims[0] + 1 && self.y.len() == dims[1] + 1 && self.z.len() == dims[2] + 1
    }
}

impl From<Exponent> for String {
    fn from(e: Exponent) -> String {
        e.key()
    }
}

impl TryFrom<String> for Exponent {
    type Error = Error;

    fn try_from(s: String) -> Result<Self> {
        Exponent::parse_key(&s)
    }
}

impl Ord for Exponent {
    fn cmp(&self, other: &Self) -> Ordering {
        canonical_cmp(&self.x, &other.x)
            .then_with(|| canonical_cmp(&self.y, &other.y))
            .then_with(|| canonical_cmp(&self.z, &other.z))
    }
}

impl PartialOrd for Exponent {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for Exponent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.key())
    }
}

/// A point of `P^{n_x} x P^{n_y} x P^{n_z}` with coordinates in some field.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ProjectiveSolution<E> {
    pub x: Vec<E>,
    pub y: Vec<E>,
    pub z: Vec<E>,
}

impl<E: Clone> ProjectiveSolution<E> {
    pub fn new(x: Vec<E>, y: Vec<E>, z: Vec<E>) -> Self {
        ProjectiveSolution { x, y, z }
    }

    pub fn block(&self, b: Block) -> &[E] {
        match b {
            Block::X => &self.x,
            Block::Y => &self.y,
            Block::Z => &self.z,
        }
    }

    pub fn map<T: Clone>(&self, mut f: impl FnMut(&E) -> T) -> ProjectiveSolution<T> {
        ProjectiveSolution {
            x: self.x.iter().map(&mut f).collect(),
            y: self.y.iter().map(&mut f).collect(),
            z: self.z.iter().map(&mut f).collect(),
        }
    }

    fn check_dims(&self, dims: [usize; 3]) -> Result<()> {
        for (b, n) in Block::ALL.iter().zip(dims) {
            if self.block(*b).len() != n + 1 {
                return Err(Error::DimensionMismatch(format!(
                    "{} block has {} coordinates, expected {}",
                    b.letter(),
                    self.block(*b).len(),
                    n + 1
                )));
            }
        }
        Ok(())
    }

    /// Scales each block so its first nonzero coordinate is one.
    pub fn normalized<F: Field<Elem = E>>(&self, field: &F) -> Result<Self> {
        let norm = |v: &[E], b: Block| -> Result<Vec<E>> {
            let lead = v
                .iter()
                .find(|c| !field.is_zero(c))
                .ok_or_else(|| Error::Precondition(format!("{} block is zero", b.letter())))?;
            let inv = field.inv(lead).expect("nonzero");
            Ok(v.iter().map(|c| field.mul(c, &inv)).collect())
        };
        Ok(ProjectiveSolution { x: norm(&self.x, Block::X)?, y: norm(&self.y, Block::Y)?, z: norm(&self.z, Block::Z)? })
    }
}

impl ProjectiveSolution<BigRational> {
    pub fn from_ints(x: &[i64], y: &[i64], z: &[i64]) -> Self {
        let conv = |v: &[i64]| v.iter().map(|&c| BigRational::from_integer(c.into())).collect();
        ProjectiveSolution { x: conv(x), y: conv(y), z: conv(z) }
    }
}

fn pow_elem<F: Field>(field: &F, a: &F::Elem, e: u32) -> F::Elem {
    field.pow(a, e as u64)
}

fn monomial_value<F: Field>(field: &F, exps: &[u32], point: &[F::Elem]) -> F::Elem {
    exps.iter()
        .zip(point)
        .filter(|(e, _)| **e > 0)
        .fold(field.one(), |acc, (e, v)| field.mul(&acc, &pow_elem(field, v, *e)))
}

/// Multihomogeneous polynomial with exact rational coefficients.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MHPoly {
    dims: [usize; 3],
    degree: MultiDegree,
    terms: BTreeMap<Exponent, BigRational>,
}

impl MHPoly {
    /// The zero polynomial of the given multidegree.
    pub fn zero(dims: [usize; 3], degree: MultiDegree) -> Self {
        MHPoly { dims, degree, terms: BTreeMap::new() }
    }

    pub fn from_terms(
        dims: [usize; 3],
        degree: MultiDegree,
        terms: impl IntoIterator<Item = (Exponent, BigRational)>,
    ) -> Result<Self> {
        let mut p = MHPoly::zero(dims, degree);
        for (e, c) in terms {
            p.add_term(e, c)?;
        }
        Ok(p)
    }

    /// Convenience constructor from integer coefficients.
    pub fn from_int_terms(dims: [usize; 3], degree: MultiDegree, terms: &[(Exponent, i64)]) -> Result<Self> {
        Self::from_terms(dims, degree, terms.iter().map(|(e, c)| (e.clone(), BigRational::from_integer((*c).into()))))
    }

    pub fn dims(&self) -> [usize; 3] {
        self.dims
    }

    pub fn degree(&self) -> MultiDegree {
        self.degree
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Exponent, &BigRational)> {
        self.terms.iter()
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn coeff(&self, e: &Exponent) -> BigRational {
        self.terms.get(e).cloned().unwrap_or_else(BigRational::zero)
    }

    /// Adds `c` to the coefficient of `e`, dropping the term when it cancels.
    pub fn add_term(&mut self, e: Exponent, c: BigRational) -> Result<()> {
        if !e.fits(self.dims) || e.degree() != self.degree {
            return Err(Error::InvalidPolynomial(format!("exponent {e} does not belong to degree {:?}", self.degree)));
        }
        match self.terms.entry(e) {
            Entry::Occupied(mut o) => {
                *o.get_mut() += c;
                if o.get().is_zero() {
                    o.remove();
                }
            }
            Entry::Vacant(v) => {
                if !c.is_zero() {
                    v.insert(c);
                }
            }
        }
        Ok(())
    }

    pub fn set_coeff(&mut self, e: Exponent, c: BigRational) -> Result<()> {
        let current = self.coeff(&e);
        self.add_term(e, c - current)
    }

    pub fn scale(&self, c: &BigRational) -> MHPoly {
        if c.is_zero() {
            return MHPoly::zero(self.dims, self.degree);
        }
        MHPoly {
            dims: self.dims,
            degree: self.degree,
            terms: self.terms.iter().map(|(e, v)| (e.clone(), v * c)).collect(),
        }
    }

    pub fn add(&self, other: &MHPoly) -> Result<MHPoly> {
        if self.dims != other.dims || self.degree != other.degree {
            return Err(Error::DimensionMismatch("adding polynomials of different shapes".into()));
        }
        let mut out = self.clone();
        for (e, c) in &other.terms {
            out.add_term(e.clone(), c.clone())?;
        }
        Ok(out)
    }

    /// Value at a point with coordinates in `field`.
    pub fn evaluate<F: Field>(&self, field: &F, point: &ProjectiveSolution<F::Elem>) -> Result<F::Elem> {
        point.check_dims(self.dims)?;
        let mut acc = field.zero();
        for (e, c) in &self.terms {
            let mut t = field.from_rational(c)?;
            t = field.mul(&t, &monomial_value(field, &e.x, &point.x));
            t = field.mul(&t, &monomial_value(field, &e.y, &point.y));
            t = field.mul(&t, &monomial_value(field, &e.z, &point.z));
            acc = field.add(&acc, &t);
        }
        Ok(acc)
    }

    /// Substitutes `x = α_x`, `y = α_y` without dehomogenizing. The result is the
    /// coefficient vector over `monomial_basis(n_z, d_z)`.
    pub fn substitute_xy<F: Field>(&self, field: &F, ax: &[F::Elem], ay: &[F::Elem]) -> Result<Vec<F::Elem>> {
        if ax.len() != self.dims[0] + 1 || ay.len() != self.dims[1] + 1 {
            return Err(Error::DimensionMismatch("partial evaluation point".into()));
        }
        let zbasis = monomial_basis(self.dims[2], self.degree.dz as i64);
        let zindex = basis_index(&zbasis);
        let mut out = vec![field.zero(); zbasis.len()];
        for (e, c) in &self.terms {
            let mut t = field.from_rational(c)?;
            t = field.mul(&t, &monomial_value(field, &e.x, ax));
            t = field.mul(&t, &monomial_value(field, &e.y, ay));
            let k = zindex[&e.z];
            out[k] = field.add(&out[k], &t);
        }
        Ok(out)
    }

    /// The polynomial `f / (x_0^{d_x} y_0^{d_y})` evaluated at `α_x`, `α_y`, as coefficients
    /// over `monomial_basis(n_z, d_z)`.
    pub fn partial_evaluate_xy<F: Field>(&self, field: &F, ax: &[F::Elem], ay: &[F::Elem]) -> Result<Vec<F::Elem>> {
        let x0 = ax.first().ok_or_else(|| Error::DimensionMismatch("empty x block".into()))?;
        let y0 = ay.first().ok_or_else(|| Error::DimensionMismatch("empty y block".into()))?;
        if field.is_zero(x0) {
            return Err(Error::ZeroLeadingCoordinate('x'));
        }
        if field.is_zero(y0) {
            return Err(Error::ZeroLeadingCoordinate('y'));
        }
        let denom = field.mul(&field.pow(x0, self.degree.dx as u64), &field.pow(y0, self.degree.dy as u64));
        let inv = field.inv(&denom).expect("nonzero");
        Ok(self.substitute_xy(field, ax, ay)?.iter().map(|c| field.mul(c, &inv)).collect())
    }

    /// Rational partial evaluation packaged as a polynomial of degree `(0, 0, d_z)`.
    pub fn partial_evaluate_xy_poly(&self, ax: &[BigRational], ay: &[BigRational]) -> Result<MHPoly> {
        let coeffs = self.partial_evaluate_xy(&Rationals, ax, ay)?;
        let zbasis = monomial_basis(self.dims[2], self.degree.dz as i64);
        let degree = MultiDegree::new(0, 0, self.degree.dz);
        let zx = vec![0u32; self.dims[0] + 1];
        let zy = vec![0u32; self.dims[1] + 1];
        MHPoly::from_terms(
            self.dims,
            degree,
            zbasis.into_iter().zip(coeffs).map(|(z, c)| (Exponent::new(zx.clone(), zy.clone(), z), c)),
        )
    }

    /// The composition `f(A_x x, A_y y, A_z z)`.
    pub fn compose(&self, a: &CoordinateChange) -> Result<MHPoly> {
        a.check_dims(self.dims)?;
        let mut out = MHPoly::zero(self.dims, self.degree);
        let mut cache: [HashMap<Vec<u32>, BTreeMap<Vec<u32>, BigRational>>; 3] = Default::default();
        for (e, c) in &self.terms {
            let mut parts = Vec::with_capacity(3);
            for (bi, (block, m)) in Block::ALL.iter().zip([&a.ax, &a.ay, &a.az]).enumerate() {
                let exps = e.block(*block).to_vec();
                let expanded =
                    cache[bi].entry(exps.clone()).or_insert_with(|| expand_linear_monomial(m, &exps)).clone();
                parts.push(expanded);
            }
            for (ex, cx) in &parts[0] {
                for (ey, cy) in &parts[1] {
                    let cxy = c * cx * cy;
                    for (ez, cz) in &parts[2] {
                        out.add_term(Exponent::new(ex.clone(), ey.clone(), ez.clone()), &cxy * cz)?;
                    }
                }
            }
        }
        Ok(out)
    }

    /// Dense coefficient vector over `Exponent::all(dims, degree)`.
    pub fn coefficient_vector(&self) -> Vec<BigRational> {
        Exponent::all(self.dims, self.degree).iter().map(|e| self.coeff(e)).collect()
    }
}

/// Expands `∏_i (Σ_k A[i][k] t_k)^{σ_i}` into a polynomial in one block.
fn expand_linear_monomial(a: &Matrix<BigRational>, exps: &[u32]) -> BTreeMap<Vec<u32>, BigRational> {
    let n = exps.len();
    let mut acc: BTreeMap<Vec<u32>, BigRational> = BTreeMap::new();
    acc.insert(vec![0; n], BigRational::one());
    for (i, &e) in exps.iter().enumerate() {
        for _ in 0..e {
            let mut next: BTreeMap<Vec<u32>, BigRational> = BTreeMap::new();
            for (mono, c) in &acc {
                for k in 0..n {
                    let aik = a.get(i, k);
                    if aik.is_zero() {
                        continue;
                    }
                    let mut m = mono.clone();
                    m[k] += 1;
                    *next.entry(m).or_insert_with(BigRational::zero) += c * aik;
                }
            }
            next.retain(|_, v| !v.is_zero());
            acc = next;
        }
    }
    acc
}

/// Block-diagonal linear change of coordinates `(x, y, z) -> (A_x x, A_y y, A_z z)`.
#[derive(Debug, Clone, PartialEq)]
pub struct CoordinateChange {
    pub ax: Matrix<BigRational>,
    pub ay: Matrix<BigRational>,
    pub az: Matrix<BigRational>,
}

impl CoordinateChange {
    pub fn new(ax: Matrix<BigRational>, ay: Matrix<BigRational>, az: Matrix<BigRational>) -> Result<Self> {
        for (m, b) in [(&ax, 'x'), (&ay, 'y'), (&az, 'z')] {
            if !m.is_square() {
                return Err(Error::NotSquare(m.rows(), m.cols()));
            }
            if Rationals.det(m)?.is_zero() {
                return Err(Error::Precondition(format!("singular {b} block")));
            }
        }
        Ok(CoordinateChange { ax, ay, az })
    }

    pub fn identity(dims: [usize; 3]) -> Self {
        CoordinateChange {
            ax: linalg::identity(&Rationals, dims[0] + 1),
            ay: linalg::identity(&Rationals, dims[1] + 1),
            az: linalg::identity(&Rationals, dims[2] + 1),
        }
    }

    /// Integer blocks with entries uniform in `[-bound, bound]`, resampled until invertible.
    pub fn random(dims: [usize; 3], rng: &mut impl Rng, bound: i64) -> Self {
        let mut block = |n: usize| loop {
            let m = Matrix::from_fn(n + 1, n + 1, |_, _| {
                BigRational::from_integer(rng.random_range(-bound..=bound).into())
            });
            if !Rationals.det(&m).expect("square").is_zero() {
                return m;
            }
        };
        let ax = block(dims[0]);
        let ay = block(dims[1]);
        let az = block(dims[2]);
        CoordinateChange { ax, ay, az }
    }

    fn check_dims(&self, dims: [usize; 3]) -> Result<()> {
        for (m, n) in [&self.ax, &self.ay, &self.az].into_iter().zip(dims) {
            if m.rows() != n + 1 {
                return Err(Error::DimensionMismatch(format!(
                    "coordinate block of size {} for {} variables",
                    m.rows(),
                    n + 1
                )));
            }
        }
        Ok(())
    }

    /// Blockwise product `A α`.
    pub fn apply_point<F: Field>(
        &self,
        field: &F,
        p: &ProjectiveSolution<F::Elem>,
    ) -> Result<ProjectiveSolution<F::Elem>> {
        let apply = |m: &Matrix<BigRational>, v: &[F::Elem]| -> Result<Vec<F::Elem>> {
            if m.cols() != v.len() {
                return Err(Error::DimensionMismatch("point block size".into()));
            }
            (0..m.rows())
                .map(|i| {
                    let mut acc = field.zero();
                    for (k, vk) in v.iter().enumerate() {
                        let a = field.from_rational(m.get(i, k))?;
                        acc = field.add(&acc, &field.mul(&a, vk));
                    }
                    Ok(acc)
                })
                .collect()
        };
        Ok(ProjectiveSolution { x: apply(&self.ax, &p.x)?, y: apply(&self.ay, &p.y)?, z: apply(&self.az, &p.z)? })
    }

    /// The inverse change of coordinates.
    pub fn inverse(&self) -> Result<CoordinateChange> {
        let inv = |m: &Matrix<BigRational>| linalg::solve(&Rationals, m, &linalg::identity(&Rationals, m.rows()));
        Ok(CoordinateChange { ax: inv(&self.ax)?, ay: inv(&self.ay)?, az: inv(&self.az)? })
    }
}

/// Square 2-bilinear system `f_1..f_n`, optionally augmented by a trilinear `f_0`.
#[derive(Debug, Clone, PartialEq)]
pub struct BilinearSystem {
    ty: SystemType,
    f: Vec<MHPoly>,
    f0: Option<MHPoly>,
}

impl BilinearSystem {
    pub fn new(ty: SystemType, f: Vec<MHPoly>, f0: Option<MHPoly>) -> Result<Self> {
        ty.validate()?;
        if f.len() != ty.n() {
            return Err(Error::InvalidPolynomial(format!("type {ty} needs {} polynomials, got {}", ty.n(), f.len())));
        }
        for (i, p) in f.iter().enumerate() {
            if p.dims() != ty.dims() || p.degree() != ty.degree_of(i + 1) {
                return Err(Error::InvalidPolynomial(format!(
                    "f{} has degree {:?}, expected {:?}",
                    i + 1,
                    p.degree(),
                    ty.degree_of(i + 1)
                )));
            }
        }
        if let Some(p) = &f0 {
            if p.dims() != ty.dims() || p.degree() != ty.degree_of(0) {
                return Err(Error::InvalidPolynomial("f0 must be trilinear".into()));
            }
        }
        Ok(BilinearSystem { ty, f, f0 })
    }

    pub fn system_type(&self) -> SystemType {
        self.ty
    }

    /// The square part `f_1..f_n`.
    pub fn equations(&self) -> &[MHPoly] {
        &self.f
    }

    pub fn f0(&self) -> Option<&MHPoly> {
        self.f0.as_ref()
    }

    /// Polynomial by index, 0 being `f_0`.
    pub fn poly(&self, i: usize) -> Option<&MHPoly> {
        if i == 0 {
            self.f0.as_ref()
        } else {
            self.f.get(i - 1)
        }
    }

    pub fn with_f0(&self, f0: MHPoly) -> Result<Self> {
        BilinearSystem::new(self.ty, self.f.clone(), Some(f0))
    }

    pub fn without_f0(&self) -> Self {
        BilinearSystem { ty: self.ty, f: self.f.clone(), f0: None }
    }

    /// Replaces equation `i` (1-based).
    pub fn with_equation(&self, i: usize, p: MHPoly) -> Result<Self> {
        let mut f = self.f.clone();
        if i == 0 || i > f.len() {
            return Err(Error::Precondition(format!("no equation f{i}")));
        }
        f[i - 1] = p;
        BilinearSystem::new(self.ty, f, self.f0.clone())
    }

    /// Every polynomial `f_i ∘ A`, including `f_0` when present.
    pub fn apply_coordinate_change(&self, a: &CoordinateChange) -> Result<Self> {
        let f = self.f.iter().map(|p| p.compose(a)).collect::<Result<Vec<_>>>()?;
        let f0 = self.f0.as_ref().map(|p| p.compose(a)).transpose()?;
        BilinearSystem::new(self.ty, f, f0)
    }

    /// Values of `f_1..f_n` at a point.
    pub fn residuals<F: Field>(&self, field: &F, p: &ProjectiveSolution<F::Elem>) -> Result<Vec<F::Elem>> {
        self.f.iter().map(|f| f.evaluate(field, p)).collect()
    }
}

pub fn rng_from_seed(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Polynomial with every coefficient uniform in `[-bound, bound]`, never identically zero.
pub fn random_poly(dims: [usize; 3], degree: MultiDegree, rng: &mut impl Rng, bound: i64) -> MHPoly {
    let exps = Exponent::all(dims, degree);
    loop {
        let terms: Vec<(Exponent, i64)> =
            exps.iter().map(|e| (e.clone(), rng.random_range(-bound..=bound))).filter(|(_, c)| *c != 0).collect();
        if !terms.is_empty() {
            return MHPoly::from_int_terms(dims, degree, &terms).expect("valid exponents");
        }
    }
}

/// Random square system with integer coefficients in `[-coeff_bound, coeff_bound]`.
pub fn random_system(t: SystemType, seed: u64, coeff_bound: i64) -> BilinearSystem {
    let mut rng = rng_from_seed(seed);
    let bound = coeff_bound.max(1);
    let f = (1..=t.n()).map(|i| random_poly(t.dims(), t.degree_of(i), &mut rng, bound)).collect();
    BilinearSystem::new(t, f, None).expect("valid by construction")
}

/// Random polynomial vanishing at every given point, with integer coefficients.
///
/// The coefficient vector is a random integer combination of a basis of the kernel of the
/// evaluation map, scaled to coprime integers.
pub fn planted_poly(
    dims: [usize; 3],
    degree: MultiDegree,
    roots: &[ProjectiveSolution<BigRational>],
    rng: &mut impl Rng,
    bound: i64,
) -> Result<MHPoly> {
    let exps = Exponent::all(dims, degree);
    let eval = Matrix::from_fn(roots.len(), exps.len(), |i, j| {
        let mono = MHPoly::from_terms(dims, degree, [(exps[j].clone(), BigRational::one())]).expect("valid exponent");
        mono.evaluate(&Rationals, &roots[i]).expect("root dimensions checked")
    });
    for r in roots {
        r.check_dims(dims)?;
    }
    let kernel = if roots.is_empty() {
        (0..exps.len()).map(|j| (0..exps.len()).map(|k| BigRational::from_integer((j == k).into())).collect()).collect()
    } else {
        linalg::nullspace(&Rationals, &eval)
    };
    if kernel.is_empty() {
        return Err(Error::Precondition("no nonzero polynomial vanishes at the given points".into()));
    }
    loop {
        let mut coeffs = vec![BigRational::zero(); exps.len()];
        for v in &kernel {
            let w = BigRational::from_integer(rng.random_range(-bound..=bound).into());
            for (c, vi) in coeffs.iter_mut().zip(v) {
                *c += &w * vi;
            }
        }
        if coeffs.iter().all(Zero::is_zero) {
            continue;
        }
        let coeffs = to_coprime_integers(&coeffs);
        return MHPoly::from_terms(dims, degree, exps.iter().cloned().zip(coeffs));
    }
}

/// Scales a rational vector to integers with gcd one.
pub fn to_coprime_integers(v: &[BigRational]) -> Vec<BigRational> {
    let l = v.iter().fold(BigInt::one(), |acc, q| acc.lcm(q.denom()));
    let ints: Vec<BigInt> = v.iter().map(|q| q.numer() * (&l / q.denom())).collect();
    let g = ints.iter().fold(BigInt::zero(), |acc, i| acc.gcd(i));
    let g = if g.is_zero() { BigInt::one() } else { g.abs() };
    ints.into_iter().map(|i| BigRational::from_integer(i / &g)).collect()
}

/// System whose equations all vanish at `α`.
pub fn planted_root_system(
    t: SystemType,
    alpha: &ProjectiveSolution<BigRational>,
    seed: u64,
) -> Result<BilinearSystem> {
    planted_roots_system(t, std::slice::from_ref(alpha), seed)
}

/// System whose equations all vanish at every given point.
pub fn planted_roots_system(
    t: SystemType,
    roots: &[ProjectiveSolution<BigRational>],
    seed: u64,
) -> Result<BilinearSystem> {
    for r in roots {
        for b in Block::ALL {
            if r.block(b).iter().all(Zero::is_zero) {
                return Err(Error::Precondition(format!("{} block of a root is zero", b.letter())));
            }
        }
    }
    let mut rng = rng_from_seed(seed);
    let f =
        (1..=t.n()).map(|i| planted_poly(t.dims(), t.degree_of(i), roots, &mut rng, 10)).collect::<Result<Vec<_>>>()?;
    BilinearSystem::new(t, f, None)
}

/// Multihomogeneous Bézout number of `n_x + n_y + n_z = degrees.len()` polynomials.
pub fn mhb(t: &SystemType) -> u64 {
    (binomial(t.r as i64, t.ny as i64) * binomial(t.s as i64, t.nz as i64)) as u64
}

/// Coefficient of `X^{n_x} Y^{n_y} Z^{n_z}` in `∏_j (d_{j,x} X + d_{j,y} Y + d_{j,z} Z)`.
pub fn bezout_coefficient(degrees: &[MultiDegree], dims: [usize; 3]) -> Result<u128> {
    if degrees.len() != dims.iter().sum::<usize>() {
        return Err(Error::DimensionMismatch(format!(
            "{} degrees for {} variables",
            degrees.len(),
            dims.iter().sum::<usize>()
        )));
    }
    let mut poly: HashMap<[usize; 3], u128> = HashMap::from([([0, 0, 0], 1)]);
    for d in degrees {
        let mut next: HashMap<[usize; 3], u128> = HashMap::new();
        for (mono, c) in &poly {
            for (k, dk) in d.as_array().iter().enumerate() {
                if *dk == 0 || mono[k] == dims[k] {
                    continue;
                }
                let mut m = *mono;
                m[k] += 1;
                *next.entry(m).or_insert(0) += c * *dk as u128;
            }
        }
        poly = next;
    }
    Ok(poly.get(&dims).copied().unwrap_or(0))
}
