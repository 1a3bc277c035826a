//! Reference data: the three-variable example system, its 10x10 Koszul matrix with row and
//! column labels, and published Koszul matrix sizes.

use crate::multihomo::{BilinearSystem, Exponent, MHPoly, MultiDegree, ProjectiveSolution, SystemType};

/// Type `(1,1,1;2,1)` of the example.
pub fn example_type() -> SystemType {
    SystemType::new(1, 1, 1, 2, 1).expect("valid")
}

fn e(x: [u32; 2], y: [u32; 2], z: [u32; 2], dy: bool, dz: bool) -> Exponent {
    Exponent::new(x.to_vec(), if dy { y.to_vec() } else { vec![0, 0] }, if dz { z.to_vec() } else { vec![0, 0] })
}

const X0: [u32; 2] = [1, 0];
const X1: [u32; 2] = [0, 1];

/// Example system with two solutions `(1:1;1:1;1:1)` and `(1:3;1:2;1:3)`, including its `f0`.
pub fn example_system() -> BilinearSystem {
    let dims = [1, 1, 1];
    let xy = |a: [u32; 2], b: [u32; 2]| e(a, b, [0, 0], true, false);
    let xz = |a: [u32; 2], c: [u32; 2]| e(a, [0, 0], c, false, true);
    let xyz = |a: [u32; 2], b: [u32; 2], c: [u32; 2]| e(a, b, c, true, true);
    let d110 = MultiDegree::new(1, 1, 0);
    let d101 = MultiDegree::new(1, 0, 1);
    let d111 = MultiDegree::new(1, 1, 1);
    let f1 =
        MHPoly::from_int_terms(dims, d110, &[(xy(X0, X0), 7), (xy(X0, X1), -8), (xy(X1, X0), -1), (xy(X1, X1), 2)]);
    let f2 =
        MHPoly::from_int_terms(dims, d110, &[(xy(X0, X0), -5), (xy(X0, X1), 7), (xy(X1, X0), -1), (xy(X1, X1), -1)]);
    let f3 =
        MHPoly::from_int_terms(dims, d101, &[(xz(X0, X0), -6), (xz(X0, X1), 9), (xz(X1, X0), -1), (xz(X1, X1), -2)]);
    let f0 = MHPoly::from_int_terms(
        dims,
        d111,
        &[
            (xyz(X0, X0, X0), 3),
            (xyz(X0, X0, X1), -1),
            (xyz(X0, X1, X0), -4),
            (xyz(X0, X1, X1), 2),
            (xyz(X1, X0, X0), 1),
            (xyz(X1, X0, X1), 2),
            (xyz(X1, X1, X0), 2),
            (xyz(X1, X1, X1), -2),
        ],
    );
    BilinearSystem::new(
        example_type(),
        vec![f1.expect("valid"), f2.expect("valid"), f3.expect("valid")],
        Some(f0.expect("valid")),
    )
    .expect("valid")
}

/// The two solutions of the example, normalized.
pub fn example_roots() -> [ProjectiveSolution<num_rational::BigRational>; 2] {
    [ProjectiveSolution::from_ints(&[1, 1], &[1, 1], &[1, 1]), ProjectiveSolution::from_ints(&[1, 3], &[1, 2], &[1, 3])]
}

/// Row labels `(I)`..`(X)` of the published matrix, in that order.
pub const PRINTED_ROW_LABELS: [&str; 10] = [
    "L01|dx=()|dy=()|dz=()|I={1,3}",
    "L01|dx=()|dy=()|dz=()|I={2,3}",
    "L03|dx=()|dy=(1,0)|dz=()|I={0,1}",
    "L03|dx=()|dy=(0,1)|dz=()|I={0,1}",
    "L03|dx=()|dy=(1,0)|dz=()|I={0,2}",
    "L03|dx=()|dy=(0,1)|dz=()|I={0,2}",
    "L02|dx=()|dy=(1,0)|dz=(0,1)|I={1,2}",
    "L02|dx=()|dy=(0,1)|dz=(0,1)|I={1,2}",
    "L02|dx=()|dy=(1,0)|dz=(1,0)|I={1,2}",
    "L02|dx=()|dy=(0,1)|dz=(1,0)|I={1,2}",
];

/// Column labels `(A)`..`(J)` of the published matrix. The published basis table names
/// `(H)` and `(J)` the other way round; these are the labels that match the printed entries.
pub const PRINTED_COL_LABELS: [&str; 10] = [
    "L12|dx=(1,0)|dy=(0,2)|dz=()|I={0,1,2}",
    "L12|dx=(0,1)|dy=(2,0)|dz=()|I={0,1,2}",
    "L12|dx=(0,1)|dy=(0,2)|dz=()|I={0,1,2}",
    "L11|dx=(1,0)|dy=(1,0)|dz=()|I={1,2,3}",
    "L11|dx=(1,0)|dy=(0,1)|dz=()|I={1,2,3}",
    "L11|dx=(0,1)|dy=(1,0)|dz=()|I={1,2,3}",
    "L11|dx=(0,1)|dy=(0,1)|dz=()|I={1,2,3}",
    "L12|dx=(0,1)|dy=(1,1)|dz=()|I={0,1,2}",
    "L12|dx=(1,0)|dy=(2,0)|dz=()|I={0,1,2}",
    "L12|dx=(1,0)|dy=(1,1)|dz=()|I={0,1,2}",
];

/// Published 10x10 matrix, rows `(I)`..`(X)`, columns `(A)`..`(J)`.
pub const PRINTED_MATRIX: [[i64; 10]; 10] = [
    [0, 0, 0, 5, -7, 1, 1, 0, 0, 0],
    [0, 0, 0, 7, -8, -1, 2, 0, 0, 0],
    [0, -1, 0, 0, 0, 0, 0, -1, -5, 7],
    [7, 0, -1, 0, 0, 0, 0, -1, 0, -5],
    [0, 1, 0, 0, 0, 0, 0, -2, -7, 8],
    [8, 0, -2, 0, 0, 0, 0, 1, 0, -7],
    [0, 2, 0, 9, 0, -2, 0, -2, -1, 2],
    [2, 0, -2, 0, 9, 0, -2, 2, 0, -1],
    [0, 1, 0, -6, 0, -1, 0, 2, 3, -4],
    [-4, 0, 2, 0, -6, 0, -1, 1, 0, 3],
];

/// Published Schur complement for `θ = x0 y0 z0`.
pub const PRINTED_SCHUR: [[i64; 2]; 2] = [[5, -2], [4, -1]];

/// Published extended eigenvector for eigenvalue 1, in column order `(A)`..`(J)`.
pub const PRINTED_EIGENVECTOR: [i64; 10] = [4, 3, 12, 1, 2, 3, 6, 6, 1, 2];

/// Published Koszul matrix sizes, keyed by type `(n_x, n_y, n_z, r, s)`.
pub const SIZE_TABLE: [((usize, usize, usize, usize, usize), u64); 7] = [
    ((2, 6, 4, 7, 5), 630),
    ((10, 1, 1, 10, 2), 352),
    ((5, 5, 2, 9, 3), 6804),
    ((4, 4, 4, 6, 6), 4125),
    ((5, 5, 2, 6, 6), 2106),
    ((6, 3, 3, 6, 6), 7000),
    ((6, 4, 2, 5, 7), 2450),
];
