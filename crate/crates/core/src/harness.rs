//! Seeded random generators for channels, incoherent channels, superchannels
//! and states, plus the randomized property suites that exercise the
//! measure axioms (faithfulness, monotonicity, convexity), the structural
//! decompositions, and the validity conditions.
//!
//! Every trial derives its own RNG stream from `(seed, property, trial)`,
//! so reports are deterministic and independent of evaluation order.

use alloc::vec::Vec;

use num_complex::Complex64 as C64;
#[allow(unused_imports)]
use num_traits::Float;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;

use crate::channel::{
    choi_from_kraus, classical_channel, compose, constant_channel, dephasing_channel,
    identity_channel, is_mio, mixture, validate_choi, Channel, KrausSet,
};
use crate::coherence::{
    l1_channel, l1_state, max_coherent_channel, rel_ent_channel, subnormalized_coherence,
    verify_not_choi, Measure, PhaseMatrix,
};
use crate::error::{Error, Result};
use crate::incoherent::{
    decompose_row_stochastic, dephased, is_incoherent, StochasticMatrix,
};
use crate::mat::{kron, CMatrix, DimPair};
use crate::superchannel::{
    apply_superkraus, choi_from_superkraus, is_incoherent_expression, kron_factorize,
    selective_apply, validate_super_choi, SuperKrausSet,
};

/// Configuration of a property run.
#[derive(Clone, Debug)]
pub struct EnsembleConfig {
    pub seed: u64,
    pub trials: usize,
    pub dims: Vec<DimPair>,
    pub tol: f64,
}

impl Default for EnsembleConfig {
    fn default() -> Self {
        EnsembleConfig {
            seed: 0x5eed,
            trials: 500,
            dims: default_dims(),
            tol: crate::DEFAULT_TOL,
        }
    }
}

/// All channel dimension pairs exercised by default.
pub fn default_dims() -> Vec<DimPair> {
    let mut dims = Vec::new();
    for a in 1..=3 {
        for b in 1..=3 {
            dims.push(DimPair { a, b });
        }
    }
    dims.push(DimPair { a: 2, b: 4 });
    dims
}

/// Result of one property suite.
#[derive(Clone, Debug)]
pub struct PropertyReport {
    pub property: &'static str,
    pub trials: usize,
    pub failures: usize,
    /// Largest residual seen over all trials (violations are positive).
    pub worst_residual: f64,
    /// Trial seeds of the first few failures, for reproduction.
    pub failing_seeds: Vec<u64>,
    /// Trials whose generated objects failed their own validator; counted
    /// separately from property failures.
    pub generator_failures: usize,
    pub pass: bool,
}

/// The available property suites.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Property {
    /// Both measures vanish on incoherent channels and are strictly
    /// positive on random isometry channels.
    Faithfulness,
    /// Generated superchannels validate, and their images of random
    /// channels validate as channels.
    SuperchannelValidity,
    /// A channel is incoherent iff dephasing fixes its Choi matrix.
    IncoherenceFixedPoint,
    /// Row-stochastic matrices decompose into few deterministic terms
    /// with exact reconstruction.
    StochasticDecomposition,
    /// Kronecker products of a random coisometry and isometry factorize
    /// back; entangling matrices are rejected.
    ProductFactorization,
    /// Deterministic and selective-average monotonicity under incoherent
    /// superchannels, with the convexity implication cross-checked.
    SuperchannelMonotonicity,
    /// Measures are convex under channel mixing.
    Convexity,
    /// Composing with an incoherent channel on the output side never
    /// increases coherence.
    PostCompositionMonotonicity,
    /// Composing with a doubly-stochastic incoherent channel on the input
    /// side never increases coherence.
    PreCompositionMonotonicity,
    /// Maximally coherent channels attain the closed-form values.
    MaxCoherenceValues,
    /// Mixing a diagonal-image channel with a fixed preparation splits
    /// the l1 measure affinely.
    MixtureAffinity,
    /// For one-dimensional inputs, channel measures equal state measures
    /// exactly.
    StateDegeneration,
    /// Maximally coherent states need not normalize to Choi matrices.
    NonChoiWitness,
}

/// Every property, in report order.
pub const ALL_PROPERTIES: &[Property] = &[
    Property::SuperchannelValidity,
    Property::IncoherenceFixedPoint,
    Property::StochasticDecomposition,
    Property::ProductFactorization,
    Property::MaxCoherenceValues,
    Property::Faithfulness,
    Property::SuperchannelMonotonicity,
    Property::Convexity,
    Property::PostCompositionMonotonicity,
    Property::PreCompositionMonotonicity,
    Property::MixtureAffinity,
    Property::StateDegeneration,
    Property::NonChoiWitness,
];

impl Property {
    pub fn name(self) -> &'static str {
        match self {
            Property::Faithfulness => "faithfulness",
            Property::SuperchannelValidity => "superchannel_validity",
            Property::IncoherenceFixedPoint => "incoherence_fixed_point",
            Property::StochasticDecomposition => "stochastic_decomposition",
            Property::ProductFactorization => "product_factorization",
            Property::SuperchannelMonotonicity => "superchannel_monotonicity",
            Property::Convexity => "convexity",
            Property::PostCompositionMonotonicity => "post_composition_monotonicity",
            Property::PreCompositionMonotonicity => "pre_composition_monotonicity",
            Property::MaxCoherenceValues => "max_coherence_values",
            Property::MixtureAffinity => "mixture_affinity",
            Property::StateDegeneration => "state_degeneration",
            Property::NonChoiWitness => "non_choi_witness",
        }
    }

    pub fn parse(name: &str) -> Option<Property> {
        ALL_PROPERTIES.iter().copied().find(|p| p.name() == name)
    }

    fn tag(self) -> u64 {
        ALL_PROPERTIES
            .iter()
            .position(|p| *p == self)
            .expect("property is listed") as u64
    }
}

fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9e3779b97f4a7c15);
    x = (x ^ (x >> 30)).wrapping_mul(0xbf58476d1ce4e5b9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94d049bb133111eb);
    x ^ (x >> 31)
}

/// Seed of an individual trial, derived from config seed, property and
/// trial index.
pub fn trial_seed(seed: u64, property: Property, trial: u64) -> u64 {
    splitmix64(splitmix64(seed ^ property.tag().wrapping_mul(0xa076_1d64_78bd_642f)) ^ trial)
}

fn trial_rng(seed: u64, property: Property, trial: u64) -> ChaCha12Rng {
    ChaCha12Rng::seed_from_u64(trial_seed(seed, property, trial))
}

// ---------------------------------------------------------------------------
// Random generators
// ---------------------------------------------------------------------------

fn gaussian(rng: &mut impl Rng) -> f64 {
    // Box-Muller on (0, 1] x [0, 1).
    let u: f64 = 1.0 - rng.gen::<f64>();
    let v: f64 = rng.gen();
    (-2.0 * u.ln()).sqrt() * (core::f64::consts::TAU * v).cos()
}

fn complex_gaussian(rng: &mut impl Rng) -> C64 {
    C64::new(gaussian(rng), gaussian(rng))
}

/// Random matrix with independent complex Gaussian entries.
pub fn random_gaussian_matrix(rows: usize, cols: usize, rng: &mut impl Rng) -> CMatrix {
    CMatrix::from_fn(rows, cols, |_, _| complex_gaussian(rng))
}

/// Orthonormalize the columns of a tall matrix (modified Gram-Schmidt,
/// run twice); the input must have full column rank.
fn orthonormalize_columns(m: &CMatrix) -> CMatrix {
    let (rows, cols) = (m.rows(), m.cols());
    let mut q = m.clone();
    for _pass in 0..2 {
        for k in 0..cols {
            for i in 0..k {
                let mut overlap = C64::new(0.0, 0.0);
                for r in 0..rows {
                    overlap += q[(r, i)].conj() * q[(r, k)];
                }
                for r in 0..rows {
                    let correction = overlap * q[(r, i)];
                    q[(r, k)] -= correction;
                }
            }
            let norm: f64 = (0..rows).map(|r| q[(r, k)].norm_sqr()).sum::<f64>().sqrt();
            for r in 0..rows {
                q[(r, k)] = q[(r, k)].unscale(norm);
            }
        }
    }
    q
}

/// Haar-random unitary via Gram-Schmidt of a complex Gaussian matrix.
pub fn random_unitary(n: usize, rng: &mut impl Rng) -> CMatrix {
    orthonormalize_columns(&random_gaussian_matrix(n, n, rng))
}

/// Haar-random isometry with `rows >= cols` (orthonormal columns).
pub fn random_isometry(rows: usize, cols: usize, rng: &mut impl Rng) -> CMatrix {
    assert!(rows >= cols, "isometry needs rows >= cols");
    orthonormalize_columns(&random_gaussian_matrix(rows, cols, rng))
}

/// Random density matrix from a normalized Gaussian square.
pub fn random_density(d: usize, rng: &mut impl Rng) -> CMatrix {
    let g = random_gaussian_matrix(d, d, rng);
    let gram = &g * &g.adjoint();
    gram.scaled_re(1.0 / gram.trace().re)
}

/// Random diagonal density matrix.
pub fn random_diagonal_density(d: usize, rng: &mut impl Rng) -> CMatrix {
    CMatrix::diag(&dirichlet(d, rng))
}

fn dirichlet(n: usize, rng: &mut impl Rng) -> Vec<f64> {
    let mut values: Vec<f64> = (0..n).map(|_| -(1.0 - rng.gen::<f64>()).ln()).collect();
    let total: f64 = values.iter().sum();
    for v in values.iter_mut() {
        *v /= total;
    }
    values
}

/// Random row-stochastic matrix with Dirichlet-uniform rows.
pub fn random_stochastic(rows: usize, cols: usize, rng: &mut impl Rng) -> StochasticMatrix {
    let mut entries = Vec::with_capacity(rows * cols);
    for _ in 0..rows {
        entries.extend_from_slice(&dirichlet(cols, rng));
    }
    StochasticMatrix::new(rows, cols, entries).expect("rows are normalized by construction")
}

/// Random channel: a Haar-random isometry into `B ⊗ E` with a random
/// environment dimension, traced over `E`. For a one-dimensional output
/// the unique (trace) channel is returned.
pub fn random_channel(dims: DimPair, rng: &mut impl Rng) -> Channel {
    if dims.b == 1 {
        return Channel::from_choi_unchecked(CMatrix::identity(dims.a), dims);
    }
    let valid_envs: Vec<usize> = (1..=dims.b)
        .filter(|&e| dims.b * e >= dims.a)
        .collect();
    let env = valid_envs[rng.gen_range(0..valid_envs.len())];
    let w = random_isometry(dims.b * env, dims.a, rng);
    let ops: Vec<CMatrix> = (0..env)
        .map(|e| CMatrix::from_fn(dims.b, dims.a, |alpha, j| w[(alpha * env + e, j)]))
        .collect();
    choi_from_kraus(&KrausSet::new(dims, ops).expect("isometry columns are orthonormal"))
}

/// Random isometry channel (a single Kraus operator); needs `a <= b`.
pub fn random_isometry_channel(dims: DimPair, rng: &mut impl Rng) -> Result<Channel> {
    if dims.a > dims.b {
        return Err(Error::InputExceedsOutput {
            input: dims.a,
            output: dims.b,
        });
    }
    let w = random_isometry(dims.b, dims.a, rng);
    Ok(choi_from_kraus(&KrausSet::new(dims, alloc::vec![w])?))
}

/// Random incoherent channel: the classical channel of a random
/// row-stochastic matrix.
pub fn random_ic_channel(dims: DimPair, rng: &mut impl Rng) -> Channel {
    classical_channel(&random_stochastic(dims.a, dims.b, rng))
}

/// Random injective map from `0..from` into `0..to` (`from <= to`).
fn random_injection(from: usize, to: usize, rng: &mut impl Rng) -> Vec<usize> {
    assert!(from <= to);
    let mut pool: Vec<usize> = (0..to).collect();
    for i in 0..from {
        let j = rng.gen_range(i..to);
        pool.swap(i, j);
    }
    pool.truncate(from);
    pool
}

/// Random channel passing the diagonal-basis-image condition: a convex
/// mixture of a phase-decorated injection unitary, a random incoherent
/// channel and a constant preparation of a diagonal state. Needs `a <= b`.
pub fn random_mio_channel(dims: DimPair, rng: &mut impl Rng) -> Result<Channel> {
    if dims.a > dims.b {
        return Err(Error::InputExceedsOutput {
            input: dims.a,
            output: dims.b,
        });
    }
    let injection = random_injection(dims.a, dims.b, rng);
    let op = CMatrix::from_fn(dims.b, dims.a, |alpha, j| {
        if injection[j] == alpha {
            let angle = rng.gen::<f64>() * core::f64::consts::TAU;
            C64::new(angle.cos(), angle.sin())
        } else {
            C64::new(0.0, 0.0)
        }
    });
    let unitary_part = choi_from_kraus(&KrausSet::new(dims, alloc::vec![op])?);
    let ic_part = random_ic_channel(dims, rng);
    let constant_part = constant_channel(&random_diagonal_density(dims.b, rng), dims.a)?;

    let weights = dirichlet(3, rng);
    let mut choi = unitary_part.choi().scaled_re(weights[0]);
    choi.add_scaled(C64::new(weights[1], 0.0), ic_part.choi());
    choi.add_scaled(C64::new(weights[2], 0.0), constant_part.choi());
    Ok(Channel::from_choi_unchecked(choi, dims))
}

/// Random doubly-stochastic incoherent channel on `d` levels: a convex
/// mixture of permutation relabelings.
pub fn random_doubly_stochastic_ic(d: usize, rng: &mut impl Rng) -> Channel {
    let terms = rng.gen_range(1..=3);
    let weights = dirichlet(terms, rng);
    let mut entries = alloc::vec![0.0; d * d];
    for &weight in &weights {
        let permutation = random_injection(d, d, rng);
        for (j, &alpha) in permutation.iter().enumerate() {
            entries[j * d + alpha] += weight;
        }
    }
    classical_channel(
        &StochasticMatrix::new(d, d, entries).expect("mixture of permutations is stochastic"),
    )
}

/// Incoherent Kraus operators of a classical channel: one rank-one
/// operator `sqrt(P[j, alpha]) |alpha><j|` per nonzero entry.
fn classical_kraus(p: &StochasticMatrix) -> Vec<CMatrix> {
    let mut ops = Vec::new();
    for j in 0..p.rows() {
        for alpha in 0..p.cols() {
            let value = p.get(j, alpha);
            if value > 0.0 {
                let mut op = CMatrix::zeros(p.cols(), p.rows());
                op[(alpha, j)] = C64::new(value.sqrt(), 0.0);
                ops.push(op);
            }
        }
    }
    ops
}

/// Random superchannel with an incoherent Kraus expression, sampled
/// uniformly among the compatible generator families:
///
/// 1. post-composition with a random incoherent channel (`out.a == in.a`);
/// 2. pre-composition with a random subnormalized incoherent channel,
///    a mixture of injective relabelings (`out.b == in.b`, `out.a <= in.a`);
/// 3. a single-Kraus product of a phase-decorated partial permutation and
///    a phase-decorated injection (`out.a <= in.a`, `in.b <= out.b`).
pub fn random_isc(
    in_dims: DimPair,
    out_dims: DimPair,
    rng: &mut impl Rng,
) -> Result<SuperKrausSet> {
    let mut families = Vec::new();
    if out_dims.a == in_dims.a {
        families.push(0);
    }
    if out_dims.b == in_dims.b && out_dims.a <= in_dims.a {
        families.push(1);
    }
    if out_dims.a <= in_dims.a && in_dims.b <= out_dims.b {
        families.push(2);
    }
    if families.is_empty() {
        return Err(Error::NoCompatibleGenerator);
    }
    let family = families[rng.gen_range(0..families.len())];
    let ops = match family {
        0 => {
            let skeleton = random_stochastic(in_dims.b, out_dims.b, rng);
            let id = CMatrix::identity(in_dims.a);
            classical_kraus(&skeleton)
                .into_iter()
                .map(|m| kron(&id, &m))
                .collect()
        }
        1 => {
            let terms = rng.gen_range(1..=3);
            let weights = dirichlet(terms, rng);
            let id = CMatrix::identity(in_dims.b);
            let mut ops = Vec::new();
            for &weight in &weights {
                let f = random_injection(out_dims.a, in_dims.a, rng);
                for (m, &source) in f.iter().enumerate() {
                    let selector = CMatrix::unit(out_dims.a, in_dims.a, m, source);
                    ops.push(kron(&selector, &id).scaled_re(weight.sqrt()));
                }
            }
            ops
        }
        _ => {
            let left_map = random_injection(out_dims.a, in_dims.a, rng);
            let left = CMatrix::from_fn(out_dims.a, in_dims.a, |jp, j| {
                if left_map[jp] == j {
                    let angle = rng.gen::<f64>() * core::f64::consts::TAU;
                    C64::new(angle.cos(), angle.sin())
                } else {
                    C64::new(0.0, 0.0)
                }
            });
            let right_map = random_injection(in_dims.b, out_dims.b, rng);
            let right = CMatrix::from_fn(out_dims.b, in_dims.b, |ap, alpha| {
                if right_map[alpha] == ap {
                    let angle = rng.gen::<f64>() * core::f64::consts::TAU;
                    C64::new(angle.cos(), angle.sin())
                } else {
                    C64::new(0.0, 0.0)
                }
            });
            alloc::vec![kron(&left, &right)]
        }
    };
    SuperKrausSet::new(in_dims, out_dims, ops)
}

// ---------------------------------------------------------------------------
// Property suites
// ---------------------------------------------------------------------------

const MAX_RECORDED_FAILURES: usize = 8;

struct Collector {
    property: Property,
    trials: usize,
    failures: usize,
    worst_residual: f64,
    failing_seeds: Vec<u64>,
    generator_failures: usize,
}

impl Collector {
    fn new(property: Property) -> Self {
        Collector {
            property,
            trials: 0,
            failures: 0,
            worst_residual: f64::NEG_INFINITY,
            failing_seeds: Vec::new(),
            generator_failures: 0,
        }
    }

    /// Record one residual; the check fails when it exceeds `tol`.
    fn check(&mut self, seed: u64, residual: f64, tol: f64) {
        self.trials += 1;
        if residual.is_finite() {
            self.worst_residual = self.worst_residual.max(residual);
        } else {
            self.worst_residual = f64::INFINITY;
        }
        if residual > tol || residual.is_nan() {
            self.failures += 1;
            if self.failing_seeds.len() < MAX_RECORDED_FAILURES {
                self.failing_seeds.push(seed);
            }
        }
    }

    fn generator_failure(&mut self, seed: u64) {
        self.trials += 1;
        self.generator_failures += 1;
        if self.failing_seeds.len() < MAX_RECORDED_FAILURES {
            self.failing_seeds.push(seed);
        }
    }

    fn finish(self) -> PropertyReport {
        PropertyReport {
            property: self.property.name(),
            trials: self.trials,
            failures: self.failures,
            worst_residual: if self.worst_residual.is_finite() {
                self.worst_residual
            } else if self.trials == 0 {
                0.0
            } else {
                f64::INFINITY
            },
            failing_seeds: self.failing_seeds,
            generator_failures: self.generator_failures,
            pass: self.failures == 0 && self.generator_failures == 0,
        }
    }
}

fn pick<'a, T>(items: &'a [T], rng: &mut impl Rng) -> &'a T {
    &items[rng.gen_range(0..items.len())]
}

fn pick_dims_where(
    dims: &[DimPair],
    rng: &mut impl Rng,
    pred: impl Fn(DimPair) -> bool,
) -> Option<DimPair> {
    let filtered: Vec<DimPair> = dims.iter().copied().filter(|&d| pred(d)).collect();
    if filtered.is_empty() {
        None
    } else {
        Some(*pick(&filtered, rng))
    }
}

/// Largest measure value on a channel that is supposed to be incoherent;
/// used by the faithfulness suite and its self-test.
pub fn incoherence_residual(phi: &Channel) -> f64 {
    let l1 = l1_channel(phi).value;
    let rel = rel_ent_channel(phi).map(|v| v.value).unwrap_or(f64::INFINITY);
    l1.max(rel)
}

fn run_faithfulness(config: &EnsembleConfig) -> PropertyReport {
    let mut collect = Collector::new(Property::Faithfulness);
    for trial in 0..config.trials {
        let seed = trial_seed(config.seed, Property::Faithfulness, trial as u64);
        let mut rng = trial_rng(config.seed, Property::Faithfulness, trial as u64);

        let dims = *pick(&config.dims, &mut rng);
        let chi = random_ic_channel(dims, &mut rng);
        collect.check(seed, incoherence_residual(&chi), config.tol);

        // Positive side: generic isometry channels on at least two output
        // levels carry strictly positive coherence.
        if let Some(dims) = pick_dims_where(&config.dims, &mut rng, |d| d.a <= d.b && d.b >= 2) {
            match random_isometry_channel(dims, &mut rng) {
                Ok(phi) => {
                    let l1 = l1_channel(&phi).value;
                    let rel = rel_ent_channel(&phi).map(|v| v.value).unwrap_or(0.0);
                    let shortfall = (1e-3 - l1.min(rel)).max(0.0);
                    collect.check(seed, shortfall, 0.0);
                }
                Err(_) => collect.generator_failure(seed),
            }
        }
    }
    collect.finish()
}

const VALIDITY_IMAGES_PER_TRIAL: usize = 100;
const VALIDITY_RESIDUAL_TOL: f64 = 1e-8;

fn run_superchannel_validity(config: &EnsembleConfig) -> PropertyReport {
    let mut collect = Collector::new(Property::SuperchannelValidity);
    for trial in 0..config.trials {
        let seed = trial_seed(config.seed, Property::SuperchannelValidity, trial as u64);
        let mut rng = trial_rng(config.seed, Property::SuperchannelValidity, trial as u64);

        let in_dims = *pick(&config.dims, &mut rng);
        let compatible = |out: DimPair| {
            out.a == in_dims.a
                || (out.b == in_dims.b && out.a <= in_dims.a)
                || (out.a <= in_dims.a && in_dims.b <= out.b)
        };
        let out_dims = match pick_dims_where(&config.dims, &mut rng, compatible) {
            Some(d) => d,
            None => {
                collect.generator_failure(seed);
                continue;
            }
        };
        let kraus = match random_isc(in_dims, out_dims, &mut rng) {
            Ok(k) => k,
            Err(_) => {
                collect.generator_failure(seed);
                continue;
            }
        };
        if !is_incoherent_expression(&kraus, config.tol) {
            collect.generator_failure(seed);
            continue;
        }
        let superchannel = choi_from_superkraus(&kraus);
        let report = match validate_super_choi(superchannel.choi(), in_dims, out_dims, config.tol)
        {
            Ok(r) => r,
            Err(_) => {
                collect.check(seed, f64::INFINITY, VALIDITY_RESIDUAL_TOL);
                continue;
            }
        };
        let herm = superchannel.choi().herm_residual();
        let residual = report
            .slice_residual
            .max(report.completeness_residual)
            .max(report.trace_residual)
            .max((-report.min_eigenvalue).max(0.0))
            .max(herm);
        collect.check(seed, residual, VALIDITY_RESIDUAL_TOL);

        for _ in 0..VALIDITY_IMAGES_PER_TRIAL {
            let phi = random_channel(in_dims, &mut rng);
            let image = match apply_superkraus(&kraus, &phi) {
                Ok(image) => image,
                Err(_) => {
                    collect.check(seed, f64::INFINITY, VALIDITY_RESIDUAL_TOL);
                    continue;
                }
            };
            let image_report =
                match validate_choi(image.choi(), out_dims, config.tol) {
                    Ok(r) => r,
                    Err(_) => {
                        collect.check(seed, f64::INFINITY, VALIDITY_RESIDUAL_TOL);
                        continue;
                    }
                };
            let residual = image_report
                .trace_residual
                .max((-image_report.min_eigenvalue).max(0.0))
                .max(image.choi().herm_residual());
            collect.check(seed, residual, VALIDITY_RESIDUAL_TOL);
        }
    }
    collect.finish()
}

fn run_incoherence_fixed_point(config: &EnsembleConfig) -> PropertyReport {
    let mut collect = Collector::new(Property::IncoherenceFixedPoint);
    for trial in 0..config.trials {
        let seed = trial_seed(config.seed, Property::IncoherenceFixedPoint, trial as u64);
        let mut rng = trial_rng(config.seed, Property::IncoherenceFixedPoint, trial as u64);
        let dims = *pick(&config.dims, &mut rng);

        let generic = random_channel(dims, &mut rng);
        let incoherent = random_ic_channel(dims, &mut rng);
        let projected = dephased(&random_channel(dims, &mut rng));
        for phi in [&generic, &incoherent, &projected] {
            // Independent route: dephase by actual composition on both
            // sides, rather than by zeroing Choi entries.
            let sandwiched = compose(
                &dephasing_channel(dims.b),
                &compose(phi, &dephasing_channel(dims.a)).expect("dims match"),
            )
            .expect("dims match");
            let by_test = is_incoherent(phi, config.tol);
            let fixed_point_residual = phi.choi().max_abs_diff(sandwiched.choi());
            let by_fixed_point = fixed_point_residual <= config.tol;
            let agreement = if by_test == by_fixed_point { 0.0 } else { 1.0 };
            collect.check(seed, agreement, 0.0);
            // The composed route and the diagonal projection agree.
            collect.check(
                seed,
                sandwiched.choi().max_abs_diff(dephased(phi).choi()),
                config.tol,
            );
        }
    }
    collect.finish()
}

fn run_stochastic_decomposition(config: &EnsembleConfig) -> PropertyReport {
    let mut collect = Collector::new(Property::StochasticDecomposition);
    for trial in 0..config.trials {
        let seed = trial_seed(config.seed, Property::StochasticDecomposition, trial as u64);
        let mut rng = trial_rng(config.seed, Property::StochasticDecomposition, trial as u64);

        let m = rng.gen_range(1..=5);
        let n = rng.gen_range(1..=5);
        let p = random_stochastic(m, n, &mut rng);
        let decomposition = decompose_row_stochastic(&p);

        let rebuilt = decomposition.reconstruct(m, n);
        let mut residual = 0.0f64;
        for j in 0..m {
            for alpha in 0..n {
                residual = residual.max((rebuilt[j * n + alpha] - p.get(j, alpha)).abs());
            }
        }
        let weight_sum: f64 = decomposition.weights.iter().sum();
        residual = residual.max((weight_sum - 1.0).abs());
        if decomposition.weights.iter().any(|&w| w < 0.0) {
            residual = residual.max(1.0);
        }
        if decomposition.weights.len() > m * (n - 1) + 1 {
            residual = residual.max(1.0);
        }
        collect.check(seed, residual, config.tol);
    }
    collect.finish()
}

fn run_product_factorization(config: &EnsembleConfig) -> PropertyReport {
    let mut collect = Collector::new(Property::ProductFactorization);
    for trial in 0..config.trials {
        let seed = trial_seed(config.seed, Property::ProductFactorization, trial as u64);
        let mut rng = trial_rng(config.seed, Property::ProductFactorization, trial as u64);

        // Round trip on a genuine coisometry x isometry product.
        let in_dims = DimPair {
            a: rng.gen_range(1..=3),
            b: rng.gen_range(1..=3),
        };
        let out_dims = DimPair {
            a: rng.gen_range(1..=in_dims.a),
            b: rng.gen_range(in_dims.b..=4),
        };
        let unitary = random_unitary(in_dims.a, &mut rng);
        let coisometry = CMatrix::from_fn(out_dims.a, in_dims.a, |r, c| unitary[(r, c)]);
        let isometry = random_isometry(out_dims.b, in_dims.b, &mut rng);
        let product = kron(&coisometry, &isometry);
        match kron_factorize(&product, in_dims, out_dims, config.tol) {
            Ok((left, right)) => {
                let residual = kron(&left, &right).max_abs_diff(&product);
                collect.check(seed, residual, config.tol);
            }
            Err(_) => collect.check(seed, 1.0, 0.5),
        }

        // Rejection of entangling matrices on two qubits.
        let square = DimPair { a: 2, b: 2 };
        let mut entangler = CMatrix::zeros(4, 4);
        match trial % 3 {
            0 => {
                entangler[(0, 0)] = C64::new(1.0, 0.0);
                entangler[(1, 1)] = C64::new(1.0, 0.0);
                entangler[(2, 3)] = C64::new(1.0, 0.0);
                entangler[(3, 2)] = C64::new(1.0, 0.0);
            }
            1 => {
                let angle = 0.3 + 5.0 * rng.gen::<f64>();
                entangler[(0, 0)] = C64::new(1.0, 0.0);
                entangler[(1, 1)] = C64::new(1.0, 0.0);
                entangler[(2, 2)] = C64::new(1.0, 0.0);
                entangler[(3, 3)] = C64::new(angle.cos(), angle.sin());
            }
            _ => entangler = random_unitary(4, &mut rng),
        }
        let rejected = kron_factorize(&entangler, square, square, config.tol).is_err();
        collect.check(seed, if rejected { 0.0 } else { 1.0 }, 0.0);
    }
    collect.finish()
}

fn monotonicity_out_dims(in_dims: DimPair, rng: &mut impl Rng) -> DimPair {
    // Keep the input-side dimension: the measures are averages over the
    // input space, and dimension-reducing selections can concentrate
    // coherence (see the pre-composition counterexample in the tests).
    DimPair {
        a: in_dims.a,
        b: rng.gen_range(1..=4),
    }
}

fn run_superchannel_monotonicity(config: &EnsembleConfig) -> PropertyReport {
    let mut collect = Collector::new(Property::SuperchannelMonotonicity);
    for trial in 0..config.trials {
        let seed = trial_seed(config.seed, Property::SuperchannelMonotonicity, trial as u64);
        let mut rng = trial_rng(config.seed, Property::SuperchannelMonotonicity, trial as u64);

        let in_dims = *pick(&config.dims, &mut rng);
        let out_dims = monotonicity_out_dims(in_dims, &mut rng);
        let kraus = match random_isc(in_dims, out_dims, &mut rng) {
            Ok(k) => k,
            Err(_) => {
                collect.generator_failure(seed);
                continue;
            }
        };
        let phi = random_channel(in_dims, &mut rng);
        let image = match apply_superkraus(&kraus, &phi) {
            Ok(image) => image,
            Err(_) => {
                collect.generator_failure(seed);
                continue;
            }
        };
        let outcomes = match selective_apply(&kraus, &phi) {
            Ok(o) => o,
            Err(_) => {
                collect.generator_failure(seed);
                continue;
            }
        };

        for measure in [Measure::L1, Measure::RelEnt] {
            let total = match crate::coherence::channel_coherence(&phi, measure) {
                Ok(v) => v.value,
                Err(_) => {
                    collect.generator_failure(seed);
                    continue;
                }
            };
            let deterministic = match crate::coherence::channel_coherence(&image, measure) {
                Ok(v) => v.value,
                Err(_) => {
                    collect.generator_failure(seed);
                    continue;
                }
            };
            let mut average = 0.0;
            let mut outcome_ok = true;
            for outcome in &outcomes {
                if let Some(choi) = &outcome.choi {
                    match subnormalized_coherence(choi, out_dims.a, measure) {
                        Ok(v) => average += outcome.probability * v.value,
                        Err(_) => outcome_ok = false,
                    }
                }
            }
            if !outcome_ok {
                collect.generator_failure(seed);
                continue;
            }

            // Deterministic monotonicity.
            collect.check(seed, deterministic - total, config.tol);
            // Average (selective) monotonicity.
            collect.check(seed, average - total, config.tol);
            // Convexity + average monotonicity imply the deterministic
            // statement; a trial may not break it while both hold.
            let convexity_instance = deterministic - average;
            let meta_fires = deterministic > total + config.tol
                && average <= total + config.tol
                && convexity_instance <= config.tol;
            collect.check(seed, if meta_fires { 1.0 } else { 0.0 }, 0.0);
        }
    }
    collect.finish()
}

fn run_convexity(config: &EnsembleConfig) -> PropertyReport {
    let mut collect = Collector::new(Property::Convexity);
    for trial in 0..config.trials {
        let seed = trial_seed(config.seed, Property::Convexity, trial as u64);
        let mut rng = trial_rng(config.seed, Property::Convexity, trial as u64);

        let dims = *pick(&config.dims, &mut rng);
        let first = random_channel(dims, &mut rng);
        let second = random_channel(dims, &mut rng);
        for measure in [Measure::L1, Measure::RelEnt] {
            let c_first = crate::coherence::channel_coherence(&first, measure)
                .map(|v| v.value)
                .unwrap_or(f64::INFINITY);
            let c_second = crate::coherence::channel_coherence(&second, measure)
                .map(|v| v.value)
                .unwrap_or(f64::INFINITY);
            let mut residual = f64::NEG_INFINITY;
            for step in 1..=9 {
                let p = step as f64 / 10.0;
                let mut choi = first.choi().scaled_re(p);
                choi.add_scaled(C64::new(1.0 - p, 0.0), second.choi());
                let mixed = Channel::from_choi_unchecked(choi, dims);
                let c_mixed = crate::coherence::channel_coherence(&mixed, measure)
                    .map(|v| v.value)
                    .unwrap_or(f64::INFINITY);
                residual = residual.max(c_mixed - (p * c_first + (1.0 - p) * c_second));
            }
            collect.check(seed, residual, config.tol);
        }
    }
    collect.finish()
}

fn run_post_composition(config: &EnsembleConfig) -> PropertyReport {
    let mut collect = Collector::new(Property::PostCompositionMonotonicity);
    for trial in 0..config.trials {
        let seed = trial_seed(
            config.seed,
            Property::PostCompositionMonotonicity,
            trial as u64,
        );
        let mut rng = trial_rng(
            config.seed,
            Property::PostCompositionMonotonicity,
            trial as u64,
        );

        let dims = *pick(&config.dims, &mut rng);
        let phi = random_channel(dims, &mut rng);
        let post_dims = DimPair {
            a: dims.b,
            b: rng.gen_range(1..=4),
        };
        let chi = random_ic_channel(post_dims, &mut rng);
        let composed = match compose(&chi, &phi) {
            Ok(c) => c,
            Err(_) => {
                collect.generator_failure(seed);
                continue;
            }
        };
        let delta_composed = compose(&dephasing_channel(dims.b), &phi).expect("dims match");

        for measure in [Measure::L1, Measure::RelEnt] {
            let total = crate::coherence::channel_coherence(&phi, measure)
                .map(|v| v.value)
                .unwrap_or(f64::INFINITY);
            for reduced in [&composed, &delta_composed] {
                let value = crate::coherence::channel_coherence(reduced, measure)
                    .map(|v| v.value)
                    .unwrap_or(f64::INFINITY);
                collect.check(seed, value - total, config.tol);
            }
        }
    }
    collect.finish()
}

fn run_pre_composition(config: &EnsembleConfig) -> PropertyReport {
    let mut collect = Collector::new(Property::PreCompositionMonotonicity);
    for trial in 0..config.trials {
        let seed = trial_seed(
            config.seed,
            Property::PreCompositionMonotonicity,
            trial as u64,
        );
        let mut rng = trial_rng(
            config.seed,
            Property::PreCompositionMonotonicity,
            trial as u64,
        );

        let dims = *pick(&config.dims, &mut rng);
        let phi = random_channel(dims, &mut rng);
        let chi = random_doubly_stochastic_ic(dims.a, &mut rng);
        let composed = compose(&phi, &chi).expect("dims match");
        let delta_composed = compose(&phi, &dephasing_channel(dims.a)).expect("dims match");

        for measure in [Measure::L1, Measure::RelEnt] {
            let total = crate::coherence::channel_coherence(&phi, measure)
                .map(|v| v.value)
                .unwrap_or(f64::INFINITY);
            for reduced in [&composed, &delta_composed] {
                let value = crate::coherence::channel_coherence(reduced, measure)
                    .map(|v| v.value)
                    .unwrap_or(f64::INFINITY);
                collect.check(seed, value - total, config.tol);
            }
        }
    }
    collect.finish()
}

fn run_max_coherence_values(config: &EnsembleConfig) -> PropertyReport {
    let mut collect = Collector::new(Property::MaxCoherenceValues);
    let mut trial = 0u64;
    for a in 1..=4usize {
        for b in a..=4usize {
            let seed = trial_seed(config.seed, Property::MaxCoherenceValues, trial);
            let mut rng = trial_rng(config.seed, Property::MaxCoherenceValues, trial);
            trial += 1;
            let dims = DimPair { a, b };
            let target_l1 = (a * b) as f64 - 1.0;
            let target_rel = ((a * b) as f64).log2();

            let default = max_coherent_channel(dims, None).expect("fourier phases are valid");
            let l1 = l1_channel(&default).value;
            let rel = rel_ent_channel(&default).map(|v| v.value).unwrap_or(f64::NAN);
            collect.check(seed, (l1 - target_l1).abs(), config.tol);
            collect.check(seed, (rel - target_rel).abs(), config.tol);

            // Row- and column-shifted Fourier phases stay valid and attain
            // the same values.
            let mut theta = Vec::with_capacity(a * b);
            let row_shift: Vec<f64> = (0..a).map(|_| rng.gen::<f64>() * 6.0).collect();
            let col_shift: Vec<f64> = (0..b).map(|_| rng.gen::<f64>() * 6.0).collect();
            for (j, row) in row_shift.iter().enumerate() {
                for (alpha, col) in col_shift.iter().enumerate() {
                    theta.push(
                        core::f64::consts::TAU * (j * alpha) as f64 / b as f64 + row + col,
                    );
                }
            }
            let shifted = PhaseMatrix::new(a, b, theta);
            match max_coherent_channel(dims, Some(&shifted)) {
                Ok(channel) => {
                    let l1 = l1_channel(&channel).value;
                    collect.check(seed, (l1 - target_l1).abs(), config.tol);
                }
                Err(_) => collect.check(seed, 1.0, 0.5),
            }
        }
    }
    collect.finish()
}

const AFFINITY_GRID: [f64; 5] = [0.0, 0.25, 0.5, 0.75, 1.0];

fn run_mixture_affinity(config: &EnsembleConfig) -> PropertyReport {
    let mut collect = Collector::new(Property::MixtureAffinity);
    for trial in 0..config.trials {
        let seed = trial_seed(config.seed, Property::MixtureAffinity, trial as u64);
        let mut rng = trial_rng(config.seed, Property::MixtureAffinity, trial as u64);

        let dims = match pick_dims_where(&config.dims, &mut rng, |d| d.a <= d.b) {
            Some(d) => d,
            None => {
                collect.generator_failure(seed);
                continue;
            }
        };
        let phi = match random_mio_channel(dims, &mut rng) {
            Ok(phi) => phi,
            Err(_) => {
                collect.generator_failure(seed);
                continue;
            }
        };
        if !is_mio(&phi, config.tol) {
            collect.generator_failure(seed);
            continue;
        }
        let rho = random_density(dims.b, &mut rng);
        let channel_part = l1_channel(&phi).value;
        let state_part = match l1_state(&rho) {
            Ok(v) => v.value,
            Err(_) => {
                collect.generator_failure(seed);
                continue;
            }
        };
        let mut residual = 0.0f64;
        for &p in &AFFINITY_GRID {
            let mixed = match mixture(p, &phi, &rho) {
                Ok(m) => m,
                Err(_) => {
                    residual = f64::INFINITY;
                    break;
                }
            };
            let lhs = l1_channel(&mixed).value;
            let rhs = p * channel_part + (1.0 - p) * state_part;
            residual = residual.max((lhs - rhs).abs());
        }
        collect.check(seed, residual, config.tol);
    }
    collect.finish()
}

fn run_state_degeneration(config: &EnsembleConfig) -> PropertyReport {
    let mut collect = Collector::new(Property::StateDegeneration);
    for trial in 0..config.trials {
        let seed = trial_seed(config.seed, Property::StateDegeneration, trial as u64);
        let mut rng = trial_rng(config.seed, Property::StateDegeneration, trial as u64);

        let d = rng.gen_range(2..=4);
        let dims = DimPair { a: 1, b: d };
        let phi = random_channel(dims, &mut rng);
        let state = phi.choi().clone();

        let channel_l1 = l1_channel(&phi).value;
        let state_l1 = match l1_state(&state) {
            Ok(v) => v.value,
            Err(_) => {
                collect.generator_failure(seed);
                continue;
            }
        };
        collect.check(seed, (channel_l1 - state_l1).abs(), 1e-15);

        let channel_rel = rel_ent_channel(&phi).map(|v| v.value);
        let state_rel = crate::coherence::rel_ent_state(&state).map(|v| v.value);
        match (channel_rel, state_rel) {
            (Ok(c), Ok(s)) => collect.check(seed, (c - s).abs(), 1e-15),
            _ => collect.generator_failure(seed),
        }
    }
    collect.finish()
}

fn run_non_choi_witness(config: &EnsembleConfig) -> PropertyReport {
    let mut collect = Collector::new(Property::NonChoiWitness);
    let mut trial = 0u64;

    // Uniform maximally coherent states on a >= 2 are never rescaled Choi
    // matrices; normalized Choi matrices of actual channels always are.
    for a in 2..=3usize {
        for b in 2..=3usize {
            let seed = trial_seed(config.seed, Property::NonChoiWitness, trial);
            trial += 1;
            let dims = DimPair { a, b };
            let d = dims.prod();
            let uniform = CMatrix::from_fn(d, d, |_, _| C64::new(1.0 / d as f64, 0.0));
            let witnessed = verify_not_choi(&uniform, dims, config.tol).unwrap_or(false);
            collect.check(seed, if witnessed { 0.0 } else { 1.0 }, 0.0);
        }
    }

    let seed = trial_seed(config.seed, Property::NonChoiWitness, trial);
    trial += 1;
    let dims = DimPair { a: 2, b: 2 };
    let half_id = identity_channel(2).choi().scaled_re(0.5);
    let witnessed = verify_not_choi(&half_id, dims, config.tol).unwrap_or(true);
    collect.check(seed, if witnessed { 1.0 } else { 0.0 }, 0.0);

    // With a one-dimensional input every state is a channel.
    for d in 2..=4usize {
        let seed = trial_seed(config.seed, Property::NonChoiWitness, trial);
        let mut rng = trial_rng(config.seed, Property::NonChoiWitness, trial);
        trial += 1;
        let dims = DimPair { a: 1, b: d };
        let state = random_density(d, &mut rng);
        let witnessed = verify_not_choi(&state, dims, config.tol).unwrap_or(true);
        collect.check(seed, if witnessed { 1.0 } else { 0.0 }, 0.0);
    }

    // Random channels: their normalized Choi matrices are never witnessed.
    for _ in 0..config.trials {
        let seed = trial_seed(config.seed, Property::NonChoiWitness, trial);
        let mut rng = trial_rng(config.seed, Property::NonChoiWitness, trial);
        trial += 1;
        let dims = *pick(&config.dims, &mut rng);
        let phi = random_channel(dims, &mut rng);
        let normalized = phi.choi().scaled_re(1.0 / dims.a as f64);
        let witnessed = verify_not_choi(&normalized, dims, config.tol).unwrap_or(true);
        collect.check(seed, if witnessed { 1.0 } else { 0.0 }, 0.0);
    }
    collect.finish()
}

/// Run the selected property suites with the given configuration.
pub fn run_suite(config: &EnsembleConfig, properties: &[Property]) -> Vec<PropertyReport> {
    properties
        .iter()
        .map(|&property| match property {
            Property::Faithfulness => run_faithfulness(config),
            Property::SuperchannelValidity => run_superchannel_validity(config),
            Property::IncoherenceFixedPoint => run_incoherence_fixed_point(config),
            Property::StochasticDecomposition => run_stochastic_decomposition(config),
            Property::ProductFactorization => run_product_factorization(config),
            Property::SuperchannelMonotonicity => run_superchannel_monotonicity(config),
            Property::Convexity => run_convexity(config),
            Property::PostCompositionMonotonicity => run_post_composition(config),
            Property::PreCompositionMonotonicity => run_pre_composition(config),
            Property::MaxCoherenceValues => run_max_coherence_values(config),
            Property::MixtureAffinity => run_mixture_affinity(config),
            Property::StateDegeneration => run_state_degeneration(config),
            Property::NonChoiWitness => run_non_choi_witness(config),
        })
        .collect()
}

/// Run every property suite.
pub fn run_all(config: &EnsembleConfig) -> Vec<PropertyReport> {
    run_suite(config, ALL_PROPERTIES)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rng(seed: u64) -> ChaCha12Rng {
        ChaCha12Rng::seed_from_u64(seed)
    }

    fn small_config() -> EnsembleConfig {
        EnsembleConfig {
            trials: 20,
            ..EnsembleConfig::default()
        }
    }

    #[test]
    fn random_channels_validate() {
        let mut rng = rng(11);
        for dims in default_dims() {
            for _ in 0..100 {
                let phi = random_channel(dims, &mut rng);
                let report = validate_choi(phi.choi(), dims, 1e-9).unwrap();
                assert!(report.verdict, "{dims:?}: {report:?}");
            }
        }
    }

    #[test]
    fn fixed_seed_reproduces_identical_output() {
        let dims = DimPair { a: 2, b: 3 };
        let first = random_channel(dims, &mut rng(77));
        let second = random_channel(dims, &mut rng(77));
        assert_eq!(first.choi(), second.choi());
        let other = random_channel(dims, &mut rng(78));
        assert!(other.choi().max_abs_diff(first.choi()) > 1e-3);
    }

    #[test]
    fn random_ic_channels_are_incoherent_with_zero_measures() {
        let mut rng = rng(12);
        for dims in default_dims() {
            let chi = random_ic_channel(dims, &mut rng);
            assert!(is_incoherent(&chi, 1e-9));
            assert!(incoherence_residual(&chi) < 1e-9);
        }
    }

    #[test]
    fn random_unitaries_are_unitary() {
        let mut rng = rng(13);
        for n in 1..=5 {
            let u = random_unitary(n, &mut rng);
            let gram = &u.adjoint() * &u;
            assert!(gram.max_abs_diff(&CMatrix::identity(n)) < 1e-12);
        }
    }

    #[test]
    fn random_isc_families_are_incoherent_and_valid() {
        let mut rng = rng(14);
        let in_dims = DimPair { a: 2, b: 2 };
        for out_dims in [
            DimPair { a: 2, b: 2 },
            DimPair { a: 2, b: 3 },
            DimPair { a: 1, b: 2 },
            DimPair { a: 2, b: 1 },
        ] {
            for _ in 0..20 {
                let kraus = random_isc(in_dims, out_dims, &mut rng).unwrap();
                assert!(is_incoherent_expression(&kraus, 1e-9));
                let s = choi_from_superkraus(&kraus);
                let report =
                    validate_super_choi(s.choi(), in_dims, out_dims, 1e-9).unwrap();
                assert!(report.verdict, "{out_dims:?}: {report:?}");
            }
        }
    }

    #[test]
    fn incompatible_isc_dims_are_rejected() {
        let mut rng = rng(15);
        let in_dims = DimPair { a: 2, b: 3 };
        let out_dims = DimPair { a: 3, b: 2 };
        assert!(matches!(
            random_isc(in_dims, out_dims, &mut rng),
            Err(Error::NoCompatibleGenerator)
        ));
    }

    #[test]
    fn reports_are_deterministic() {
        let config = small_config();
        let first = run_suite(&config, &[Property::Convexity, Property::Faithfulness]);
        let second = run_suite(&config, &[Property::Convexity, Property::Faithfulness]);
        for (a, b) in first.iter().zip(&second) {
            assert_eq!(a.property, b.property);
            assert_eq!(a.failures, b.failures);
            assert_eq!(a.worst_residual, b.worst_residual);
            assert_eq!(a.failing_seeds, b.failing_seeds);
        }
    }

    #[test]
    fn different_seeds_preserve_verdicts() {
        for seed in [1u64, 2, 3, 4, 5] {
            let config = EnsembleConfig {
                seed,
                trials: 10,
                ..EnsembleConfig::default()
            };
            for report in run_suite(
                &config,
                &[Property::Convexity, Property::StochasticDecomposition],
            ) {
                assert!(report.pass, "seed {seed}: {report:?}");
            }
        }
    }

    #[test]
    fn faithfulness_detects_injected_bug() {
        // Sanity of the harness itself: skipping the dephasing step must
        // trip the zero-coherence check.
        let mut rng = rng(16);
        let phi = random_channel(DimPair { a: 2, b: 2 }, &mut rng);
        let honest = dephased(&phi);
        assert!(incoherence_residual(&honest) < 1e-9);
        assert!(incoherence_residual(&identity_channel(2)) > 1e-3);
    }

    #[test]
    fn small_suite_passes() {
        let config = small_config();
        for report in run_all(&config) {
            assert!(
                report.pass,
                "{}: {} failures, worst residual {:.3e}, seeds {:?}",
                report.property, report.failures, report.worst_residual, report.failing_seeds
            );
        }
    }
}
