//! Coherence measures for states and channels.
//!
//! A channel measure is the corresponding state measure evaluated on the
//! Choi matrix divided by the input dimension. Two closed-form measures
//! are provided: the l1 measure (sum of off-diagonal moduli) and the
//! relative-entropy measure (entropy gained by dephasing). Both vanish
//! exactly on incoherent objects.

use num_complex::Complex64 as C64;
#[allow(unused_imports)]
use num_traits::Float;

use crate::channel::{choi_from_kraus, require_density, Channel, KrausSet};
use crate::error::{Error, Result};
use crate::mat::{dephase, partial_trace, vn_entropy, CMatrix, DimPair, Subsystem};

/// Which coherence measure to evaluate.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Measure {
    L1,
    RelEnt,
}

impl Measure {
    pub fn name(self) -> &'static str {
        match self {
            Measure::L1 => "l1",
            Measure::RelEnt => "rel_ent",
        }
    }
}

/// A computed coherence value, tagged with the measure and the trace
/// normalization that was divided out (the input dimension for channels,
/// one for states).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CoherenceValue {
    pub measure: Measure,
    pub value: f64,
    pub normalization: f64,
}

/// Real phases `theta[j][alpha]` defining an equal-modulus isometry
/// column per input basis state.
#[derive(Clone, Debug, PartialEq)]
pub struct PhaseMatrix {
    da: usize,
    db: usize,
    theta: alloc::vec::Vec<f64>,
}

impl PhaseMatrix {
    pub fn new(da: usize, db: usize, theta: alloc::vec::Vec<f64>) -> Self {
        assert_eq!(theta.len(), da * db, "phase count must be da*db");
        PhaseMatrix { da, db, theta }
    }

    /// Discrete-Fourier phases `2 pi j alpha / db`, valid for any `da <= db`.
    pub fn fourier(dims: DimPair) -> Self {
        let mut theta = alloc::vec::Vec::with_capacity(dims.prod());
        for j in 0..dims.a {
            for alpha in 0..dims.b {
                theta.push(core::f64::consts::TAU * (j * alpha) as f64 / dims.b as f64);
            }
        }
        PhaseMatrix::new(dims.a, dims.b, theta)
    }

    #[inline]
    pub fn get(&self, j: usize, alpha: usize) -> f64 {
        self.theta[j * self.db + alpha]
    }

    /// Largest deviation of `(1/db) sum_alpha e^{i(theta_j - theta_k)}`
    /// from the identity, i.e. how far the induced columns are from
    /// orthonormal.
    pub fn orthogonality_residual(&self) -> f64 {
        let mut residual = 0.0f64;
        for j in 0..self.da {
            for k in 0..self.da {
                let mut sum = C64::new(0.0, 0.0);
                for alpha in 0..self.db {
                    let delta = self.get(j, alpha) - self.get(k, alpha);
                    sum += C64::new(delta.cos(), delta.sin());
                }
                sum = sum.unscale(self.db as f64);
                let target = if j == k { 1.0 } else { 0.0 };
                residual = residual.max((sum - C64::new(target, 0.0)).norm());
            }
        }
        residual
    }
}

fn offdiag_abs_sum(m: &CMatrix) -> f64 {
    let mut sum = 0.0;
    for i in 0..m.rows() {
        for j in 0..m.cols() {
            if i != j {
                sum += m[(i, j)].norm();
            }
        }
    }
    sum
}

fn rel_ent_of_normalized(rho: &CMatrix) -> Result<f64> {
    let value = vn_entropy(&dephase(rho))? - vn_entropy(rho)?;
    // Dephasing cannot decrease entropy; tiny negatives are rounding noise.
    if (-crate::DEFAULT_TOL..0.0).contains(&value) {
        return Ok(0.0);
    }
    Ok(value)
}

/// l1 coherence of a state: the sum of off-diagonal moduli.
pub fn l1_state(rho: &CMatrix) -> Result<CoherenceValue> {
    require_density(rho)?;
    Ok(CoherenceValue {
        measure: Measure::L1,
        value: offdiag_abs_sum(rho),
        normalization: 1.0,
    })
}

/// l1 coherence of a channel: the state measure on the Choi matrix
/// divided by the input dimension.
pub fn l1_channel(phi: &Channel) -> CoherenceValue {
    let da = phi.input_dim() as f64;
    CoherenceValue {
        measure: Measure::L1,
        value: offdiag_abs_sum(&phi.choi().scaled_re(1.0 / da)),
        normalization: da,
    }
}

/// Relative-entropy coherence of a state: the entropy of the dephased
/// state minus the entropy of the state, in bits.
pub fn rel_ent_state(rho: &CMatrix) -> Result<CoherenceValue> {
    require_density(rho)?;
    Ok(CoherenceValue {
        measure: Measure::RelEnt,
        value: rel_ent_of_normalized(rho)?,
        normalization: 1.0,
    })
}

/// Relative-entropy coherence of a channel: the state measure on the
/// Choi matrix divided by the input dimension.
pub fn rel_ent_channel(phi: &Channel) -> Result<CoherenceValue> {
    let da = phi.input_dim() as f64;
    Ok(CoherenceValue {
        measure: Measure::RelEnt,
        value: rel_ent_of_normalized(&phi.choi().scaled_re(1.0 / da))?,
        normalization: da,
    })
}

/// Coherence of a channel under the chosen measure.
pub fn channel_coherence(phi: &Channel, measure: Measure) -> Result<CoherenceValue> {
    match measure {
        Measure::L1 => Ok(l1_channel(phi)),
        Measure::RelEnt => rel_ent_channel(phi),
    }
}

/// Coherence of a state under the chosen measure.
pub fn state_coherence(rho: &CMatrix, measure: Measure) -> Result<CoherenceValue> {
    match measure {
        Measure::L1 => l1_state(rho),
        Measure::RelEnt => rel_ent_state(rho),
    }
}

/// Coherence of a subnormalized Choi matrix with trace `da_prime`, as
/// produced by selective superchannel application: the state measure on
/// `j / da_prime`. Coincides with the channel measure when `j` is the
/// Choi matrix of a valid channel.
pub fn subnormalized_coherence(
    j: &CMatrix,
    da_prime: usize,
    measure: Measure,
) -> Result<CoherenceValue> {
    if !j.is_square() {
        return Err(Error::NotSquare {
            rows: j.rows(),
            cols: j.cols(),
        });
    }
    let expected = da_prime as f64;
    let trace = j.trace().re;
    if (trace - expected).abs() > 1e-6 {
        return Err(Error::TraceMismatch {
            expected,
            found: trace,
        });
    }
    let scaled = j.scaled_re(1.0 / expected);
    let value = match measure {
        Measure::L1 => offdiag_abs_sum(&scaled),
        Measure::RelEnt => rel_ent_of_normalized(&scaled)?,
    };
    Ok(CoherenceValue {
        measure,
        value,
        normalization: expected,
    })
}

/// The maximally coherent channel for `da <= db`: the isometry whose
/// columns have equal moduli `1/sqrt(db)` and phases given by `theta`
/// (discrete-Fourier phases by default). Attains l1 coherence
/// `da * db - 1` and relative-entropy coherence `log2(da * db)`.
pub fn max_coherent_channel(dims: DimPair, theta: Option<&PhaseMatrix>) -> Result<Channel> {
    if dims.a > dims.b {
        return Err(Error::InputExceedsOutput {
            input: dims.a,
            output: dims.b,
        });
    }
    let fourier;
    let phases = match theta {
        Some(t) => t,
        None => {
            fourier = PhaseMatrix::fourier(dims);
            &fourier
        }
    };
    let residual = phases.orthogonality_residual();
    if residual > crate::DEFAULT_TOL {
        return Err(Error::InvalidPhaseMatrix { residual });
    }
    let scale = 1.0 / (dims.b as f64).sqrt();
    let op = CMatrix::from_fn(dims.b, dims.a, |alpha, j| {
        let angle = phases.get(j, alpha);
        C64::new(angle.cos(), angle.sin()).scale(scale)
    });
    let kraus = KrausSet::new(dims, alloc::vec![op])?;
    Ok(choi_from_kraus(&kraus))
}

/// Whether `da * psi` fails the channel trace condition, i.e. whether the
/// given state is *not* (a normalization of) any channel's Choi matrix.
pub fn verify_not_choi(psi: &CMatrix, dims: DimPair, tol: f64) -> Result<bool> {
    let reduced = partial_trace(&psi.scaled_re(dims.a as f64), dims, Subsystem::A)?;
    let residual = reduced.max_abs_diff(&CMatrix::identity(dims.a));
    Ok(residual > tol)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::{classical_channel, identity_channel, mixture};
    use crate::incoherent::StochasticMatrix;
    use alloc::vec;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    fn plus_state() -> CMatrix {
        CMatrix::from_fn(2, 2, |_, _| c(0.5, 0.0))
    }

    fn uniform_state(d: usize) -> CMatrix {
        CMatrix::from_fn(d, d, |_, _| c(1.0 / d as f64, 0.0))
    }

    #[test]
    fn l1_state_examples() {
        let diagonal = CMatrix::diag(&[0.25, 0.75]);
        assert!(l1_state(&diagonal).unwrap().value.abs() < 1e-15);

        assert!((l1_state(&plus_state()).unwrap().value - 1.0).abs() < 1e-15);

        for d in 2..=4 {
            let value = l1_state(&uniform_state(d)).unwrap().value;
            assert!((value - (d as f64 - 1.0)).abs() < 1e-12);
        }
    }

    #[test]
    fn l1_channel_examples() {
        let p = StochasticMatrix::new(2, 2, vec![0.3, 0.7, 0.5, 0.5]).unwrap();
        assert!(l1_channel(&classical_channel(&p)).value.abs() < 1e-15);

        assert!((l1_channel(&identity_channel(2)).value - 1.0).abs() < 1e-15);

        let dims = DimPair::new(2, 2).unwrap();
        let maxcoh = max_coherent_channel(dims, None).unwrap();
        assert!((l1_channel(&maxcoh).value - 3.0).abs() < 1e-12);
    }

    #[test]
    fn rel_ent_state_examples() {
        let diagonal = CMatrix::diag(&[0.25, 0.75]);
        assert!(rel_ent_state(&diagonal).unwrap().value.abs() < 1e-12);

        assert!((rel_ent_state(&plus_state()).unwrap().value - 1.0).abs() < 1e-12);

        let half_id = identity_channel(2).choi().scaled_re(0.5);
        assert!((rel_ent_state(&half_id).unwrap().value - 1.0).abs() < 1e-12);
    }

    #[test]
    fn rel_ent_channel_examples() {
        let p = StochasticMatrix::new(2, 3, vec![0.2, 0.3, 0.5, 0.6, 0.2, 0.2]).unwrap();
        assert!(rel_ent_channel(&classical_channel(&p)).unwrap().value.abs() < 1e-12);

        assert!((rel_ent_channel(&identity_channel(2)).unwrap().value - 1.0).abs() < 1e-12);

        let dephased = crate::incoherent::dephased(&identity_channel(2));
        assert!(rel_ent_channel(&dephased).unwrap().value.abs() < 1e-12);
    }

    #[test]
    fn subnormalized_examples() {
        let id = identity_channel(2);
        let from_choi = subnormalized_coherence(id.choi(), 2, Measure::L1).unwrap();
        let direct = l1_channel(&id);
        assert_eq!(from_choi.value, direct.value);

        let diagonal = CMatrix::diag(&[1.0, 0.0, 0.5, 0.5]);
        assert!(subnormalized_coherence(&diagonal, 2, Measure::L1)
            .unwrap()
            .value
            .abs()
            < 1e-15);

        let wrong_trace = CMatrix::diag(&[1.0, 1.0]);
        assert!(matches!(
            subnormalized_coherence(&wrong_trace, 3, Measure::L1),
            Err(Error::TraceMismatch { .. })
        ));
    }

    #[test]
    fn max_coherent_examples() {
        let prep = max_coherent_channel(DimPair::new(1, 4).unwrap(), None).unwrap();
        assert!((l1_channel(&prep).value - 3.0).abs() < 1e-12);

        let two_three = max_coherent_channel(DimPair::new(2, 3).unwrap(), None).unwrap();
        assert!((l1_channel(&two_three).value - 5.0).abs() < 1e-12);

        assert!(matches!(
            max_coherent_channel(DimPair::new(3, 2).unwrap(), None),
            Err(Error::InputExceedsOutput { .. })
        ));
    }

    #[test]
    fn max_coherent_rejects_bad_phases() {
        let dims = DimPair::new(2, 2).unwrap();
        let flat = PhaseMatrix::new(2, 2, vec![0.0; 4]);
        assert!(matches!(
            max_coherent_channel(dims, Some(&flat)),
            Err(Error::InvalidPhaseMatrix { .. })
        ));
    }

    #[test]
    fn max_coherent_accepts_shifted_phases() {
        let dims = DimPair::new(2, 3).unwrap();
        let mut shifted = PhaseMatrix::fourier(dims);
        // Row- and column-constant offsets keep the columns orthonormal.
        for j in 0..2 {
            for alpha in 0..3 {
                shifted.theta[j * 3 + alpha] += 0.7 * j as f64 + 0.3 * alpha as f64;
            }
        }
        let channel = max_coherent_channel(dims, Some(&shifted)).unwrap();
        assert!((l1_channel(&channel).value - 5.0).abs() < 1e-12);
    }

    #[test]
    fn mixture_affinity_example() {
        let id = identity_channel(2);
        let rho = plus_state();
        for p in [0.0, 0.25, 0.5, 0.75, 1.0] {
            let mixed = mixture(p, &id, &rho).unwrap();
            let lhs = l1_channel(&mixed).value;
            let rhs = p * l1_channel(&id).value + (1.0 - p) * l1_state(&rho).unwrap().value;
            assert!((lhs - rhs).abs() < 1e-12, "p = {p}: {lhs} vs {rhs}");
        }
    }

    #[test]
    fn not_choi_examples() {
        let dims = DimPair::new(2, 2).unwrap();
        assert!(verify_not_choi(&uniform_state(4), dims, 1e-9).unwrap());

        let half_id = identity_channel(2).choi().scaled_re(0.5);
        assert!(!verify_not_choi(&half_id, dims, 1e-9).unwrap());

        let prep_dims = DimPair::new(1, 4).unwrap();
        assert!(!verify_not_choi(&uniform_state(4), prep_dims, 1e-9).unwrap());
    }

    #[test]
    fn l1_channel_matches_total_modulus_form() {
        // Equivalent closed form on exactly normalized Choi matrices:
        // the sum of all entry moduli over the input dimension, minus one.
        for phi in [
            identity_channel(2),
            identity_channel(3),
            max_coherent_channel(DimPair::new(2, 3).unwrap(), None).unwrap(),
            constant_channel_for_test(),
        ] {
            let mut total = 0.0;
            for i in 0..phi.choi().rows() {
                for j in 0..phi.choi().cols() {
                    total += phi.choi()[(i, j)].norm();
                }
            }
            let literal = total / phi.input_dim() as f64 - 1.0;
            assert!((l1_channel(&phi).value - literal).abs() < 1e-12);
        }
    }

    fn constant_channel_for_test() -> crate::channel::Channel {
        crate::channel::constant_channel(&plus_state(), 3).unwrap()
    }

    #[test]
    fn dephasing_superchannel_never_increases_measures() {
        let id = identity_channel(2);
        let fixed = crate::incoherent::dephased(&id);
        assert!(l1_channel(&fixed).value <= l1_channel(&id).value);
        assert!(
            rel_ent_channel(&fixed).unwrap().value
                <= rel_ent_channel(&id).unwrap().value
        );
    }
}
