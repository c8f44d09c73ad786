use msisland_core::linalg::{eigendecompose, reconstruction_error};
use msisland_core::network::ring_adjacency;
use msisland_core::{
    build_coupling, find_fixed_points, lambert_w0, lambert_w0_log, Complex64, DMatrix, MsfProblem,
    SystemKind, SystemModel,
};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};

fn complex_in(radius: f64) -> impl Strategy<Value = Complex64> {
    (-radius..radius, -radius..radius).prop_map(|(re, im)| Complex64::new(re, im))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(512))]

    #[test]
    fn lambert_defining_identity(z in complex_in(1e3)) {
        let w = lambert_w0(z).unwrap().value;
        prop_assert!((w * w.exp() - z).norm() < 1e-12 * z.norm().max(1.0));
    }

    #[test]
    fn lambert_conjugate_symmetry(z in complex_in(50.0)) {
        // Stay off the cut, where the two sides are different branches.
        prop_assume!(z.im.abs() > 1e-9 || z.re > -(-1.0f64).exp());
        let a = lambert_w0(z).unwrap().value;
        let b = lambert_w0(z.conj()).unwrap().value;
        prop_assert!((a.conj() - b).norm() < 1e-12 * (1.0 + a.norm()));
    }

    #[test]
    fn lambert_log_form_agrees(z in complex_in(1e3)) {
        prop_assume!(z.norm() > 1e-12);
        let a = lambert_w0(z).unwrap().value;
        let b = lambert_w0_log(z.ln()).unwrap().value;
        prop_assert!((a - b).norm() < 1e-12 * (1.0 + a.norm()));
    }

    #[test]
    fn eigendecomposition_reconstructs(entries in prop::collection::vec(-5.0f64..5.0, 16)) {
        let a = DMatrix::from_row_slice(4, 4, &entries);
        let dec = eigendecompose(&a).unwrap();
        prop_assume!(dec.is_diagonalizable() && dec.condition_number < 1e6);
        let err = reconstruction_error(&a, &dec).unwrap();
        prop_assert!(err < 1e-9 * dec.condition_number.max(1.0), "error {err}");
    }

    #[test]
    fn jacobian_matches_finite_differences(
        kind in prop_oneof![Just(SystemKind::Rossler), Just(SystemKind::Lorenz), Just(SystemKind::Chen)],
        x in prop::collection::vec(-20.0f64..20.0, 3),
    ) {
        let model = SystemModel::builtin(kind, &[]).unwrap();
        let j = model.jacobian(&x);
        let h = 1e-6;
        for k in 0..3 {
            let (mut xp, mut xm) = (x.clone(), x.clone());
            xp[k] += h;
            xm[k] -= h;
            let (fp, fm) = (model.eval(&xp), model.eval(&xm));
            for i in 0..3 {
                let fd = (fp[i] - fm[i]) / (2.0 * h);
                prop_assert!((fd - j[(i, k)]).abs() < 1e-5 * (1.0 + fd.abs()), "{kind:?} d{i}/dx{k}");
            }
        }
    }
}

/// Random connected undirected graph: a ring plus extra weighted edges.
fn random_graph(rng: &mut impl Rng, n: usize) -> DMatrix<f64> {
    let mut a = ring_adjacency(n);
    for _ in 0..n {
        let (i, j) = (rng.random_range(0..n), rng.random_range(0..n));
        if i != j {
            let w = rng.random_range(0.1..3.0);
            a[(i, j)] = w;
            a[(j, i)] = w;
        }
    }
    a
}

#[test]
fn coupling_spectra_of_random_graphs() {
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(99);
    for _ in 0..100 {
        let n = rng.random_range(3..=12);
        let g = build_coupling(&random_graph(&mut rng, n)).unwrap();
        let m = g.matrix();
        // Rows of D^-1 A are probability vectors, so the Gershgorin discs
        // keep every eigenvalue in [-1, 1].
        for i in 0..n {
            let row: f64 = (0..n).map(|j| m[(i, j)].abs()).sum();
            assert!((row - 1.0).abs() < 1e-12);
        }
        assert!(g.eigenvalues.iter().all(|&l| (-1.0..=1.0).contains(&l)));
        assert!((g.eigenvalues[0] - 1.0).abs() < 1e-12);
        assert_eq!(g.unit_multiplicity, 1);
        let ones = nalgebra::DVector::from_element(n, 1.0);
        assert!((&m * &ones - &ones).amax() < 1e-12);
        // Eigenvalues agree with nalgebra's general solver on G itself.
        let mut reference: Vec<f64> = m
            .clone()
            .complex_eigenvalues()
            .iter()
            .map(|z| z.re)
            .collect();
        reference.sort_by(|a, b| b.total_cmp(a));
        let mut ours = g.eigenvalues.clone();
        ours.sort_by(|a, b| b.total_cmp(a));
        let distinct = |v: &[f64]| {
            let mut d: Vec<f64> = Vec::new();
            for &x in v {
                if d.last().is_none_or(|&y| (y - x).abs() > 1e-8) {
                    d.push(x);
                }
            }
            d
        };
        let (a, b) = (distinct(&ours), distinct(&reference));
        assert_eq!(a.len(), b.len());
        assert!(a.iter().zip(&b).all(|(x, y)| (x - y).abs() < 1e-8));
    }
}

#[test]
fn real_axis_values_are_real_and_increasing() {
    let mut last = f64::NEG_INFINITY;
    for k in 0..2000 {
        let x = 1e-6 + k as f64 * 0.5;
        let w = lambert_w0(Complex64::new(x, 0.0)).unwrap().value;
        assert_eq!(w.im, 0.0);
        assert!(w.re > last);
        last = w.re;
    }
}

#[test]
fn uncoupled_msf_is_the_jacobian_growth() {
    for kind in SystemKind::all_builtin() {
        let model = SystemModel::builtin(kind, &[]).unwrap();
        let fps = find_fixed_points(&model).unwrap();
        let fp = fps.select(model.default_fixed_point_index()).unwrap();
        let p = MsfProblem::from_fixed_point(fp, DMatrix::identity(3, 3)).unwrap();
        for tau in [0.0, 0.5, 3.0, 11.0] {
            let omega = p.omega(tau, 0.0, 0.7).unwrap();
            assert!(
                (omega - fp.max_real_eigenvalue()).abs() < 1e-12,
                "{kind:?} tau={tau}"
            );
        }
    }
}
