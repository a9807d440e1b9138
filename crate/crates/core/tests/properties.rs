//! Randomized invariants of the matrix primitives, channel conversions,
//! incoherent-channel structure and superchannel application.

use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;

use qcoh_core::channel::{
    apply_channel, choi_from_kraus, compose, kraus_from_choi, validate_choi,
};
use qcoh_core::coherence::{channel_coherence, Measure};
use qcoh_core::harness::{
    random_channel, random_density, random_gaussian_matrix, random_ic_channel, random_isc,
    random_stochastic,
};
use qcoh_core::incoherent::{
    decompose_row_stochastic, dephased, deterministic_ic, ic_decompose, is_incoherent,
};
use qcoh_core::mat::{
    dephase, eigh, kron, partial_trace, vn_entropy, CMatrix, DimPair, Subsystem,
};
use qcoh_core::superchannel::{
    apply_superchannel, apply_superkraus, choi_from_superkraus, is_incoherent_expression,
    is_misc, kron_factorize, selective_apply, superkraus_from_choi, validate_super_choi,
    MISC_ENUMERATION_CAP,
};

fn rng_from(seed: u64) -> ChaCha12Rng {
    ChaCha12Rng::seed_from_u64(seed)
}

fn random_hermitian(n: usize, rng: &mut impl Rng) -> CMatrix {
    let g = random_gaussian_matrix(n, n, rng);
    let got = &g + &g.adjoint();
    got.scaled_re(0.5)
}

fn dim_strategy() -> impl Strategy<Value = (usize, usize)> {
    (1usize..=3, 1usize..=3)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn kron_associativity(seed in any::<u64>()) {
        let mut rng = rng_from(seed);
        let a = random_gaussian_matrix(2, 3, &mut rng);
        let b = random_gaussian_matrix(3, 2, &mut rng);
        let c = random_gaussian_matrix(2, 2, &mut rng);
        let lhs = kron(&kron(&a, &b), &c);
        let rhs = kron(&a, &kron(&b, &c));
        // Index placement is exact; regrouping the scalar triple product
        // changes only the last rounding step.
        prop_assert!(lhs.max_abs_diff(&rhs) <= 1e-13 * (1.0 + lhs.max_abs()));
    }

    #[test]
    fn partial_traces_preserve_trace(seed in any::<u64>(), (a, b) in dim_strategy()) {
        let mut rng = rng_from(seed);
        let dims = DimPair::new(a, b).unwrap();
        let m = random_gaussian_matrix(dims.prod(), dims.prod(), &mut rng);
        let total = m.trace();
        let kept_a = partial_trace(&m, dims, Subsystem::A).unwrap().trace();
        let kept_b = partial_trace(&m, dims, Subsystem::B).unwrap().trace();
        prop_assert!((total - kept_a).norm() <= 1e-12);
        prop_assert!((total - kept_b).norm() <= 1e-12);
    }

    #[test]
    fn dephase_is_a_trace_preserving_projection(seed in any::<u64>(), n in 1usize..=6) {
        let mut rng = rng_from(seed);
        let m = random_gaussian_matrix(n, n, &mut rng);
        let once = dephase(&m);
        prop_assert!(dephase(&once).max_abs_diff(&once) == 0.0);
        prop_assert!((once.trace() - m.trace()).norm() <= 1e-12);
    }

    #[test]
    fn dephasing_never_decreases_entropy(seed in any::<u64>(), n in 2usize..=6) {
        let mut rng = rng_from(seed);
        let rho = random_density(n, &mut rng);
        let before = vn_entropy(&rho).unwrap();
        let after = vn_entropy(&dephase(&rho)).unwrap();
        prop_assert!(after >= before - 1e-9);
    }

    #[test]
    fn eigh_reconstructs_and_is_unitary(seed in any::<u64>(), n in 1usize..=8) {
        let mut rng = rng_from(seed);
        let h = random_hermitian(n, &mut rng);
        let (values, vectors) = eigh(&h).unwrap();
        let rebuilt = &(&vectors * &CMatrix::diag(&values)) * &vectors.adjoint();
        prop_assert!(rebuilt.max_abs_diff(&h) <= 1e-11 * (1.0 + h.max_abs()));
        let gram = &vectors.adjoint() * &vectors;
        prop_assert!(gram.max_abs_diff(&CMatrix::identity(n)) <= 1e-12);
    }

    #[test]
    fn channel_kraus_round_trip(seed in any::<u64>(), a in 2usize..=4, b in 2usize..=4) {
        let mut rng = rng_from(seed);
        let dims = DimPair::new(a, b).unwrap();
        let phi = random_channel(dims, &mut rng);
        let kraus = kraus_from_choi(&phi).unwrap();
        let rebuilt = choi_from_kraus(&kraus);
        prop_assert!(rebuilt.choi().max_abs_diff(phi.choi()) <= 1e-9);
        let report = validate_choi(rebuilt.choi(), dims, 1e-9).unwrap();
        prop_assert!(report.verdict);
    }

    #[test]
    fn apply_matches_kraus_application(seed in any::<u64>(), (a, b) in dim_strategy()) {
        let mut rng = rng_from(seed);
        let dims = DimPair::new(a, b).unwrap();
        let phi = random_channel(dims, &mut rng);
        let rho = random_density(a, &mut rng);
        let via_choi = apply_channel(&phi, &rho).unwrap();
        let kraus = kraus_from_choi(&phi).unwrap();
        let mut via_kraus = CMatrix::zeros(b, b);
        for op in kraus.ops() {
            let term = &(op * &rho) * &op.adjoint();
            via_kraus = &via_kraus + &term;
        }
        prop_assert!(via_choi.max_abs_diff(&via_kraus) <= 1e-9);
    }

    #[test]
    fn compose_is_associative(seed in any::<u64>()) {
        let mut rng = rng_from(seed);
        let first = random_channel(DimPair::new(2, 3).unwrap(), &mut rng);
        let second = random_channel(DimPair::new(3, 2).unwrap(), &mut rng);
        let third = random_channel(DimPair::new(2, 4).unwrap(), &mut rng);
        let left = compose(&third, &compose(&second, &first).unwrap()).unwrap();
        let right = compose(&compose(&third, &second).unwrap(), &first).unwrap();
        prop_assert!(left.choi().max_abs_diff(right.choi()) <= 1e-9);
    }

    #[test]
    fn choi_trace_equals_input_dim(seed in any::<u64>(), (a, b) in dim_strategy()) {
        let mut rng = rng_from(seed);
        let phi = random_channel(DimPair::new(a, b).unwrap(), &mut rng);
        prop_assert!((phi.choi().trace().re - a as f64).abs() <= 1e-10);
    }

    #[test]
    fn dephasing_action_is_idempotent(seed in any::<u64>(), (a, b) in dim_strategy()) {
        let mut rng = rng_from(seed);
        let phi = random_channel(DimPair::new(a, b).unwrap(), &mut rng);
        let once = dephased(&phi);
        let twice = dephased(&once);
        prop_assert!(once.choi().max_abs_diff(twice.choi()) == 0.0);
        prop_assert!(is_incoherent(&once, 1e-9));
    }

    #[test]
    fn incoherent_channels_are_a_convex_set(seed in any::<u64>(), (a, b) in dim_strategy()) {
        let mut rng = rng_from(seed);
        let dims = DimPair::new(a, b).unwrap();
        let first = random_ic_channel(dims, &mut rng);
        let second = random_ic_channel(dims, &mut rng);
        let p: f64 = rng.gen();
        let mut choi = first.choi().scaled_re(p);
        choi.add_scaled(num_complex::Complex64::new(1.0 - p, 0.0), second.choi());
        let mixed = qcoh_core::channel::Channel::from_choi_unchecked(choi, dims);
        prop_assert!(is_incoherent(&mixed, 1e-9));
    }

    #[test]
    fn stochastic_decomposition_invariants(seed in any::<u64>(), m in 1usize..=5, n in 1usize..=5) {
        let mut rng = rng_from(seed);
        let p = random_stochastic(m, n, &mut rng);
        let decomposition = decompose_row_stochastic(&p);
        prop_assert!(decomposition.weights.len() <= m * (n - 1) + 1);
        prop_assert!(decomposition.weights.iter().all(|&w| w >= 0.0));
        let total: f64 = decomposition.weights.iter().sum();
        prop_assert!((total - 1.0).abs() <= 1e-9);
        let rebuilt = decomposition.reconstruct(m, n);
        for j in 0..m {
            for alpha in 0..n {
                prop_assert!((rebuilt[j * n + alpha] - p.get(j, alpha)).abs() <= 1e-9);
            }
        }
    }

    #[test]
    fn decomposition_terms_are_extreme(seed in any::<u64>(), (a, b) in dim_strategy()) {
        let mut rng = rng_from(seed);
        let dims = DimPair::new(a, b).unwrap();
        let chi = random_ic_channel(dims, &mut rng);
        let decomposition = ic_decompose(&chi, 1e-9).unwrap();
        for term in &decomposition.terms {
            let extreme = deterministic_ic(term, dims).unwrap();
            let choi = extreme.choi();
            prop_assert!(choi.max_offdiag_abs() == 0.0);
            let nonzero = (0..dims.prod())
                .filter(|&x| choi[(x, x)].norm() > 0.5)
                .count();
            prop_assert!(nonzero == dims.a);
        }
    }

    #[test]
    fn superchannel_applications_agree(seed in any::<u64>(), (a, b) in dim_strategy()) {
        let mut rng = rng_from(seed);
        let in_dims = DimPair::new(a, b).unwrap();
        let out_dims = DimPair::new(a, rng.gen_range(1..=4)).unwrap();
        let kraus = random_isc(in_dims, out_dims, &mut rng).unwrap();
        let s = choi_from_superkraus(&kraus);
        let phi = random_channel(in_dims, &mut rng);
        let via_choi = apply_superchannel(&s, &phi).unwrap();
        let via_kraus = apply_superkraus(&kraus, &phi).unwrap();
        prop_assert!(via_choi.choi().max_abs_diff(via_kraus.choi()) <= 1e-9);
    }

    #[test]
    fn superkraus_round_trip(seed in any::<u64>(), (a, b) in dim_strategy()) {
        let mut rng = rng_from(seed);
        let in_dims = DimPair::new(a, b).unwrap();
        let out_dims = DimPair::new(a, rng.gen_range(1..=3)).unwrap();
        let s = choi_from_superkraus(&random_isc(in_dims, out_dims, &mut rng).unwrap());
        let kraus = superkraus_from_choi(&s).unwrap();
        let rebuilt = choi_from_superkraus(&kraus);
        prop_assert!(rebuilt.choi().max_abs_diff(s.choi()) <= 1e-9);
    }

    #[test]
    fn selective_probabilities_sum_to_one(seed in any::<u64>(), (a, b) in dim_strategy()) {
        let mut rng = rng_from(seed);
        let in_dims = DimPair::new(a, b).unwrap();
        let out_dims = DimPair::new(a, rng.gen_range(1..=4)).unwrap();
        let kraus = random_isc(in_dims, out_dims, &mut rng).unwrap();
        let phi = random_channel(in_dims, &mut rng);
        let outcomes = selective_apply(&kraus, &phi).unwrap();
        let total: f64 = outcomes.iter().map(|o| o.probability).sum();
        prop_assert!((total - 1.0).abs() <= 1e-9);
    }

    #[test]
    fn incoherent_expressions_give_misc_superchannels(seed in any::<u64>()) {
        let mut rng = rng_from(seed);
        let in_dims = DimPair::new(rng.gen_range(1..=2), rng.gen_range(1..=3)).unwrap();
        let out_dims = DimPair::new(in_dims.a, rng.gen_range(1..=3)).unwrap();
        let kraus = random_isc(in_dims, out_dims, &mut rng).unwrap();
        prop_assert!(is_incoherent_expression(&kraus, 1e-9));
        let s = choi_from_superkraus(&kraus);
        prop_assert!(is_misc(&s, 1e-9, MISC_ENUMERATION_CAP).unwrap());
    }

    #[test]
    fn generated_superchannels_send_channels_to_channels(seed in any::<u64>(), (a, b) in dim_strategy()) {
        let mut rng = rng_from(seed);
        let in_dims = DimPair::new(a, b).unwrap();
        let out_dims = DimPair::new(a, rng.gen_range(1..=4)).unwrap();
        let kraus = random_isc(in_dims, out_dims, &mut rng).unwrap();
        let s = choi_from_superkraus(&kraus);
        prop_assert!(validate_super_choi(s.choi(), in_dims, out_dims, 1e-9).unwrap().verdict);
        let phi = random_channel(in_dims, &mut rng);
        let image = apply_superchannel(&s, &phi).unwrap();
        let report = validate_choi(image.choi(), out_dims, 1e-8).unwrap();
        prop_assert!(report.verdict);
    }

    #[test]
    fn product_factorization_round_trip(seed in any::<u64>()) {
        let mut rng = rng_from(seed);
        let in_dims = DimPair::new(rng.gen_range(1..=3), rng.gen_range(1..=3)).unwrap();
        let out_dims = DimPair::new(
            rng.gen_range(1..=in_dims.a),
            rng.gen_range(in_dims.b..=4),
        )
        .unwrap();
        let unitary = qcoh_core::harness::random_unitary(in_dims.a, &mut rng);
        let coisometry = CMatrix::from_fn(out_dims.a, in_dims.a, |r, c| unitary[(r, c)]);
        let isometry = qcoh_core::harness::random_isometry(out_dims.b, in_dims.b, &mut rng);
        let product = kron(&coisometry, &isometry);
        let (left, right) = kron_factorize(&product, in_dims, out_dims, 1e-9).unwrap();
        prop_assert!(kron(&left, &right).max_abs_diff(&product) <= 1e-9);
    }

    #[test]
    fn sandwich_matches_composition(seed in any::<u64>()) {
        let mut rng = rng_from(seed);
        let pre = random_channel(DimPair::new(2, 3).unwrap(), &mut rng);
        let post = random_channel(DimPair::new(2, 3).unwrap(), &mut rng);
        let phi = random_channel(DimPair::new(3, 2).unwrap(), &mut rng);
        let s = qcoh_core::superchannel::sandwich(&pre, &post).unwrap();
        let via_super = apply_superchannel(&s, &phi).unwrap();
        let via_compose = compose(&post, &compose(&phi, &pre).unwrap()).unwrap();
        prop_assert!(via_super.choi().max_abs_diff(via_compose.choi()) <= 1e-9);
        let report = validate_super_choi(
            s.choi(),
            DimPair::new(3, 2).unwrap(),
            DimPair::new(2, 3).unwrap(),
            1e-9,
        )
        .unwrap();
        prop_assert!(report.verdict);
    }

    #[test]
    fn measures_are_nonnegative_and_bounded(seed in any::<u64>(), (a, b) in dim_strategy()) {
        let mut rng = rng_from(seed);
        let dims = DimPair::new(a, b).unwrap();
        let phi = random_channel(dims, &mut rng);
        let d = dims.prod() as f64;
        let l1 = channel_coherence(&phi, Measure::L1).unwrap().value;
        prop_assert!(l1 >= -1e-9 && l1 <= d - 1.0 + 1e-9);
        let rel = channel_coherence(&phi, Measure::RelEnt).unwrap().value;
        prop_assert!(rel >= -1e-9 && rel <= d.log2() + 1e-9);
    }
}

// Eigenvalue accuracy at the largest matrix side the validity checks see:
// conjugating a known spectrum by a random unitary must give it back.
#[test]
fn eigvalsh_recovers_known_spectrum_at_size_64() {
    let mut rng = rng_from(21);
    let n = 64;
    let mut expected: Vec<f64> = (0..n).map(|i| (i as f64 * 0.37).sin() * 3.0).collect();
    let unitary = qcoh_core::harness::random_unitary(n, &mut rng);
    let conjugated = &(&unitary * &CMatrix::diag(&expected)) * &unitary.adjoint();
    let computed = qcoh_core::mat::eigvalsh(&conjugated).unwrap();
    expected.sort_by(|a, b| a.partial_cmp(b).unwrap());
    for (got, want) in computed.iter().zip(&expected) {
        assert!((got - want).abs() < 1e-10, "{got} vs {want}");
    }
}

// A dimension-reducing incoherent selection can concentrate coherence: the
// input-side average that defines a channel measure shrinks faster than
// the selected block. This pins why the monotonicity suites keep the
// input dimension fixed.
#[test]
fn dimension_reducing_preselection_can_increase_measures() {
    use num_complex::Complex64 as C64;

    // Measure-and-prepare qubit channel: |0><0| input yields a maximally
    // coherent state, |1><1| input yields the maximally mixed state.
    let dims = DimPair::new(2, 2).unwrap();
    let mut choi = CMatrix::zeros(4, 4);
    for (r, c, v) in [
        (0, 0, 0.5),
        (0, 1, 0.5),
        (1, 0, 0.5),
        (1, 1, 0.5),
        (2, 2, 0.5),
        (3, 3, 0.5),
    ] {
        choi[(r, c)] = C64::new(v, 0.0);
    }
    let phi = qcoh_core::channel::Channel::new(choi, dims, 1e-9).unwrap();

    // Single-operator incoherent superchannel selecting the |0> input
    // block: a valid superchannel into one-dimensional-input channels.
    let in_dims = dims;
    let out_dims = DimPair::new(1, 2).unwrap();
    let mut op = CMatrix::zeros(2, 4);
    op[(0, 0)] = C64::new(1.0, 0.0);
    op[(1, 1)] = C64::new(1.0, 0.0);
    let kraus =
        qcoh_core::superchannel::SuperKrausSet::new(in_dims, out_dims, vec![op]).unwrap();
    assert!(is_incoherent_expression(&kraus, 1e-9));
    let s = choi_from_superkraus(&kraus);
    assert!(validate_super_choi(s.choi(), in_dims, out_dims, 1e-9)
        .unwrap()
        .verdict);

    let image = apply_superkraus(&kraus, &phi).unwrap();
    let before = channel_coherence(&phi, Measure::L1).unwrap().value;
    let after = channel_coherence(&image, Measure::L1).unwrap().value;
    assert!((before - 0.5).abs() < 1e-12);
    assert!((after - 1.0).abs() < 1e-12);
    assert!(after > before);
}
