//! Randomized invariants of the linear-algebra substrate and the operators built on it.

use fsl_core::certify::{certify, relative_disagreement, OperatorTriple};
use fsl_core::linalg::{gen_sym_eig, sym_eig, DenseMatrix, DenseSymMatrix};
use fsl_core::mmio;
use fsl_core::model::{strip_decomposition, ProblemKind, ProblemSpec};
use fsl_core::pseudoinverse::{projector, pseudo_inverse, weighted_pseudo_inverse, SurjectiveMap};
use fsl_core::rng::{gaussian_matrix, random_spd, stream_rng};
use fsl_core::schwarz::{assemble_preconditioner, build_block_b, build_r_map, Decomposition};
use proptest::prelude::*;

fn spd(seed: u64, n: usize) -> DenseSymMatrix {
    random_spd(&mut stream_rng(seed, 0, n as u64), n)
}

/// Random covering decomposition of `0..n` into `parts` increasing subsets.
fn decomposition(n: usize, parts: usize, picks: &[bool]) -> Decomposition {
    let mut subs: Vec<Vec<usize>> = vec![Vec::new(); parts];
    for i in 0..n {
        // every index lands in one home subset and possibly in others
        subs[i % parts].push(i);
        for (p, sub) in subs.iter_mut().enumerate() {
            if p != i % parts && picks[(i * parts + p) % picks.len()] {
                sub.push(i);
            }
        }
    }
    Decomposition::new(n, subs).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn cholesky_reconstructs(seed in any::<u64>(), n in 1usize..30) {
        let m = spd(seed, n);
        let l = m.cholesky().unwrap().factor_matrix();
        let llt = l.matmul(&l.transpose()).unwrap();
        prop_assert!(llt.max_abs_diff(m.as_matrix()) <= 1e-12 * m.max_abs());
        prop_assert!(m.cholesky().unwrap().pivots().iter().all(|&p| p > 0.0));
    }

    #[test]
    fn eigen_decomposition_reconstructs(seed in any::<u64>(), n in 1usize..25) {
        let m = spd(seed, n);
        let eig = sym_eig(&m).unwrap();
        let v = &eig.vectors;
        let vtv = v.transpose().matmul(v).unwrap();
        prop_assert!(vtv.distance_to_identity() < 1e-12);
        let lam = DenseMatrix::from_diagonal(&eig.values);
        let back = v.matmul(&lam).unwrap().matmul(&v.transpose()).unwrap();
        prop_assert!(back.max_abs_diff(m.as_matrix()) <= 1e-12 * m.max_abs());
        prop_assert!(eig.values.windows(2).all(|w| w[0] <= w[1]));
    }

    #[test]
    fn generalized_eigenvectors_are_weight_orthonormal(seed in any::<u64>(), n in 1usize..20) {
        let m = spd(seed, n);
        let w = spd(seed.wrapping_add(1), n);
        let eig = gen_sym_eig(&m, &w).unwrap();
        let v = &eig.vectors;
        let vwv = v.transpose().matmul(&w.as_matrix().matmul(v).unwrap()).unwrap();
        prop_assert!(vwv.distance_to_identity() < 1e-10);
        for k in 0..n {
            let x = eig.vector(k);
            let mx = m.matvec(&x).unwrap();
            let wx = w.matvec(&x).unwrap();
            let res = mx.iter().zip(&wx).map(|(a, b)| (a - eig.values[k] * b).abs()).fold(0.0, f64::max);
            prop_assert!(res <= 1e-10 * m.max_abs());
        }
    }

    #[test]
    fn pseudo_inverse_axioms(seed in any::<u64>(), m in 1usize..12, extra in 0usize..12) {
        let n = m + extra;
        let r = SurjectiveMap::new(gaussian_matrix(&mut stream_rng(seed, 1, 0), m, n)).unwrap();
        let plain = pseudo_inverse(&r).unwrap();
        let res = plain.residuals().unwrap();
        prop_assert!(res.right_inverse < 1e-9 && res.kernel_orthogonality < 1e-9);
        let p = projector(&plain).unwrap();
        prop_assert!(p.matmul(&p).unwrap().max_abs_diff(&p) < 1e-9);
        prop_assert!(p.asymmetry() < 1e-9);
        prop_assert!(plain.is_injective());

        let b = spd(seed, n);
        let weighted = weighted_pseudo_inverse(&r, &b).unwrap();
        prop_assert!(weighted.residuals().unwrap().right_inverse < 1e-9);
        let pr = weighted.projector_residuals().unwrap();
        prop_assert!(pr.idempotency < 1e-9 && pr.self_adjointness < 1e-9);
    }

    #[test]
    fn assembly_routes_agree(seed in any::<u64>(), n in 2usize..24, parts in 1usize..6, picks in prop::collection::vec(prop::bool::weighted(0.2), 1..50)) {
        let parts = parts.min(n);
        let d = decomposition(n, parts, &picks);
        let a = spd(seed, n);
        let r = build_r_map(&d).unwrap();
        let b = build_block_b(&d, &a).unwrap();
        let asm = assemble_preconditioner(&d, &r, &b).unwrap();
        prop_assert!(asm.route_gap <= 1e-10 * asm.m_inv.max_abs().max(1.0));
        prop_assert!(asm.m_inv.is_spd());
        // the text format round-trips
        prop_assert_eq!(Decomposition::parse_text(&d.to_text(), n).unwrap(), d);
    }

    #[test]
    fn certificates_scale_homogeneously(seed in any::<u64>(), n in 2usize..16, t in 0.1f64..20.0) {
        let d = decomposition(n, 2.min(n), &[true, false, false]);
        let a = spd(seed, n);
        let ops = fsl_core::schwarz::SchwarzOperators::build(&d, &a).unwrap();
        let triple: OperatorTriple = ops.triple().unwrap();
        let base = certify(&triple).unwrap();
        prop_assert!(base.c_minus > 0.0 && base.c_minus <= base.c_plus);
        prop_assert!((base.kappa - base.c_plus / base.c_minus).abs() <= 1e-14 * base.kappa);
        prop_assert!(base.routes_agree());
        let up = certify(&triple.with_scaled_a(t).unwrap()).unwrap();
        prop_assert!(relative_disagreement((t * base.c_minus, t * base.c_plus), (up.c_minus, up.c_plus)) < 1e-12);
        let down = certify(&triple.with_scaled_b(t).unwrap()).unwrap();
        prop_assert!(relative_disagreement((base.c_minus / t, base.c_plus / t), (down.c_minus, down.c_plus)) < 1e-12);
    }

    #[test]
    fn strips_cover(kind_2d in any::<bool>(), n in 1usize..40, parts in 1usize..10, overlap in 1usize..5) {
        let kind = if kind_2d { ProblemKind::Laplace2d } else { ProblemKind::Laplace1d };
        let n = if kind_2d { n.min(12) } else { n };
        prop_assume!(parts <= n);
        let spec = ProblemSpec::new(kind, n, parts, overlap).unwrap();
        let d = strip_decomposition(&spec).unwrap();
        prop_assert_eq!(d.len(), parts);
        prop_assert!(d.multiplicity().iter().all(|&m| m >= 1));
    }

    #[test]
    fn matrix_market_round_trip(seed in any::<u64>(), rows in 1usize..8, cols in 1usize..8) {
        let m = gaussian_matrix(&mut stream_rng(seed, 2, 0), rows, cols);
        let back = mmio::read(&mmio::write_dense(&m)).unwrap();
        prop_assert_eq!(back, m);
        let s = spd(seed, rows);
        prop_assert_eq!(mmio::read_symmetric(&mmio::write_symmetric(&s)).unwrap(), s);
    }
}
