use std::collections::HashSet;

use koszul_core::koszul::{self, assemble_delta1, theta_partition};
use koszul_core::multihomo::{self, monomial_basis, rng_from_seed};
use koszul_core::oracle;
use koszul_core::weyman::{self, dual_vector, term_table, CohomologyKind};
use koszul_core::{CoordinateChange, DegreeVector, Exponent, MHPoly, MultiDegree, Rationals, SystemType};
use num_rational::BigRational;
use proptest::prelude::*;
use rand::Rng;

fn small_types(max_n: usize) -> Vec<SystemType> {
    SystemType::enumerate(max_n)
}

fn q(v: i64) -> BigRational {
    BigRational::from_integer(v.into())
}

fn random_vec(rng: &mut impl Rng, len: usize, bound: i64) -> Vec<BigRational> {
    (0..len).map(|_| q(rng.random_range(-bound..=bound))).collect()
}

fn nonzero_lead(rng: &mut impl Rng, len: usize, bound: i64) -> Vec<BigRational> {
    let mut v = random_vec(rng, len, bound);
    if v[0] == q(0) {
        v[0] = q(1);
    }
    v
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn composition_commutes_with_evaluation(seed in any::<u64>(), idx in 0usize..64) {
        let types = small_types(4);
        let t = types[idx % types.len()];
        let mut rng = rng_from_seed(seed);
        let deg = MultiDegree::new(1, rng.random_range(0..=1), rng.random_range(0..=1));
        let p = multihomo::random_poly(t.dims(), deg, &mut rng, 5);
        let a = CoordinateChange::random(t.dims(), &mut rng, 3);
        let alpha = oracle::random_full_support_point(t.dims(), &mut rng, 6);
        let lhs = p.compose(&a).unwrap().evaluate(&Rationals, &alpha).unwrap();
        let rhs = p.evaluate(&Rationals, &a.apply_point(&Rationals, &alpha).unwrap()).unwrap();
        prop_assert_eq!(lhs, rhs);
    }

    #[test]
    fn psi_evaluation_identity(seed in any::<u64>(), idx in 0usize..64) {
        let types = small_types(5);
        let t = types[idx % types.len()];
        let mut rng = rng_from_seed(seed);
        let i = rng.random_range(0..=t.n());
        let f = multihomo::random_poly(t.dims(), t.degree_of(i), &mut rng, 5);
        let ax = nonzero_lead(&mut rng, t.nx + 1, 4);
        let ay = nonzero_lead(&mut rng, t.ny + 1, 4);
        let (dx, dy, dgz) = (rng.random_range(0..=2), rng.random_range(0..=2), rng.random_range(0..=1));
        let gz = random_vec(&mut rng, monomial_basis(t.nz, dgz).len(), 5);
        let (l, r) = oracle::psi_evaluation_sides(&Rationals, &f, &ax, &ay, dx, dy, &gz, dgz).unwrap();
        prop_assert_eq!(l, r);
    }

    #[test]
    fn star_contraction_evaluates_dual_veronese(seed in any::<u64>(), n in 1usize..4, d in 0i64..4) {
        let mut rng = rng_from_seed(seed);
        let alpha = nonzero_lead(&mut rng, n + 1, 5);
        let dbar = rng.random_range(0..=d);
        let g: Vec<(Vec<u32>, BigRational)> =
            monomial_basis(n, dbar).into_iter().map(|e| (e, q(rng.random_range(-5..=5)))).collect();
        let dv = oracle::dual_veronese(&Rationals, koszul_core::Block::Y, d, &alpha).unwrap();
        let (l, r) = oracle::star_eval_check(&Rationals, &g, dbar, &dv, &alpha).unwrap();
        prop_assert_eq!(l, r);
    }

    #[test]
    fn partial_evaluation_is_linear(seed in any::<u64>(), idx in 0usize..64) {
        let types = small_types(5);
        let t = types[idx % types.len()];
        let mut rng = rng_from_seed(seed);
        let deg = MultiDegree::new(1, 1, 1);
        let p1 = multihomo::random_poly(t.dims(), deg, &mut rng, 5);
        let p2 = multihomo::random_poly(t.dims(), deg, &mut rng, 5);
        let c = q(rng.random_range(-4..=4));
        let ax = nonzero_lead(&mut rng, t.nx + 1, 4);
        let ay = nonzero_lead(&mut rng, t.ny + 1, 4);
        let sum = p1.add(&p2.scale(&c)).unwrap().partial_evaluate_xy(&Rationals, &ax, &ay).unwrap();
        let e1 = p1.partial_evaluate_xy(&Rationals, &ax, &ay).unwrap();
        let e2 = p2.partial_evaluate_xy(&Rationals, &ax, &ay).unwrap();
        let expected: Vec<BigRational> = e1.iter().zip(&e2).map(|(a, b)| a + &c * b).collect();
        prop_assert_eq!(sum, expected);
    }

    #[test]
    fn duality_preserves_term_dimensions(seed in any::<u64>(), idx in 0usize..256) {
        let types = small_types(6);
        let t = types[idx % types.len()];
        let mut rng = rng_from_seed(seed);
        let m = DegreeVector::new(rng.random_range(-4..=4), rng.random_range(-4..=4), rng.random_range(-4..=4));
        let a = term_table(&t, m);
        let b = term_table(&t, dual_vector(&t, m));
        for v in -(t.n() as i64) - 2..=t.n() as i64 + 3 {
            prop_assert_eq!(a.dim(v), b.dim(1 - v), "type {} m {} v {}", t, m, v);
        }
    }
}

#[test]
fn partial_evaluation_multiplies_separated_monomials() {
    let t = SystemType::new(1, 1, 1, 2, 1).unwrap();
    let dims = t.dims();
    let (ax, ay) = (vec![q(2), q(5)], vec![q(3), q(-1)]);
    for x in 0..2 {
        for z in 0..2 {
            let p = MHPoly::from_int_terms(
                dims,
                MultiDegree::new(1, 0, 1),
                &[(Exponent::unit(dims, [Some(x), None, Some(z)]), 1)],
            )
            .unwrap();
            let got = p.partial_evaluate_xy(&Rationals, &ax, &ay).unwrap();
            let mut expected = vec![q(0), q(0)];
            expected[z] = &ax[x] / &ax[0];
            assert_eq!(got, expected);
        }
    }
}

#[test]
fn monomial_basis_sizes() {
    for n in 0..6 {
        for d in -2..6i64 {
            let expected = if d < 0 { 0 } else { multihomo::binomial(n as i64 + d, d) as usize };
            assert_eq!(monomial_basis(n, d).len(), expected);
        }
    }
}

#[test]
fn four_vectors_are_determinantal_up_to_eight() {
    for t in small_types(8) {
        let mu = weyman::mu(&t).unwrap() as u128;
        for m in weyman::four_degree_vectors(&t) {
            let c = weyman::is_determinantal(&t, m);
            assert!(c.determinantal, "{t} {m}");
            assert_eq!((c.dim_k1, c.dim_k0), (mu, mu), "{t} {m}");
        }
    }
}

#[test]
fn no_section_term_has_negative_twist() {
    for t in small_types(6) {
        for m in weyman::four_degree_vectors(&t) {
            for e in term_table(&t, m).entries {
                for k in 0..3 {
                    if e.kind[k] == CohomologyKind::Sections {
                        assert!(e.twist[k] >= 0, "{t} {m} {e:?}");
                    } else {
                        assert!(e.twist[k] < -(t.dims()[k] as i64), "{t} {m} {e:?}");
                    }
                }
            }
        }
    }
}

#[test]
fn every_theta_gives_a_partition() {
    for t in small_types(6) {
        let m = assemble_delta1(&t).unwrap();
        let mhb = multihomo::mhb(&t) as usize;
        for theta in Exponent::all(t.dims(), MultiDegree::new(1, 1, 1)) {
            let p = theta_partition(&m, &theta).unwrap_or_else(|e| panic!("{t} {theta}: {e}"));
            assert_eq!(m.size() - p.split, mhb, "{t} {theta}");
        }
    }
}

#[test]
fn coefficients_appear_once_per_row_and_column() {
    for t in small_types(6) {
        let m = assemble_delta1(&t).unwrap();
        let mut rows: Vec<HashSet<(usize, Exponent)>> = vec![HashSet::new(); m.size()];
        for (c, col) in m.columns.iter().enumerate() {
            let mut seen = HashSet::new();
            for (r, e) in col {
                assert!(seen.insert((e.poly, e.exponent.clone())), "{t} column {c}");
                assert!(rows[*r].insert((e.poly, e.exponent.clone())), "{t} row {r}");
            }
        }
    }
}

#[test]
fn f0_only_in_l12_columns() {
    for t in small_types(6) {
        let m = assemble_delta1(&t).unwrap();
        for (r, c, e) in m.entries() {
            if e.poly == 0 {
                assert_eq!(m.cols[c].block, koszul::BasisBlock::L12, "{t} row {r}");
            }
        }
    }
}
