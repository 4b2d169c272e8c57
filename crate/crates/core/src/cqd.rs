//! Co-quantum collapse: the induction-driven polar trend, the branching
//! rule that picks `+z` or `−z`, and a seeded ensemble sampler.

use std::f64::consts::{PI, TAU};

use num_complex::Complex64;
use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::pauli::Mat2;
use crate::states::{bloch_from_angles, bloch_to_matrix, BlochAngles, Spinor};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum BranchSign {
    Negative,
    Zero,
    Positive,
}

impl BranchSign {
    pub fn as_f64(self) -> f64 {
        match self {
            BranchSign::Negative => -1.0,
            BranchSign::Zero => 0.0,
            BranchSign::Positive => 1.0,
        }
    }
}

/// `2 atan(tan(θ0/2) · exp(−sign · k_i · |Δφ|))`.
///
/// Positive sign drives θ toward 0, negative toward π. The poles are fixed
/// points and are returned unchanged.
pub fn collapse_theta(theta0: f64, delta_phi: f64, sign: BranchSign, k_i: f64) -> Result<f64> {
    if !(0.0..=PI).contains(&theta0) {
        return Err(Error::Domain(format!("theta0 = {theta0} outside [0, pi]")));
    }
    if !(k_i.is_finite() && k_i >= 0.0) || !delta_phi.is_finite() {
        return Err(Error::Domain(format!(
            "k_i = {k_i}, delta_phi = {delta_phi}"
        )));
    }
    if theta0 == 0.0 || theta0 == PI {
        return Ok(theta0);
    }
    let decay = (-sign.as_f64() * k_i * delta_phi.abs()).exp();
    Ok(2.0 * ((0.5 * theta0).tan() * decay).atan())
}

/// `sign(θn − θe)`
pub fn branch_sign(theta_n: f64, theta_e: f64) -> BranchSign {
    if theta_n > theta_e {
        BranchSign::Positive
    } else if theta_n == theta_e {
        BranchSign::Zero
    } else {
        BranchSign::Negative
    }
}

/// Electron moment direction and its nuclear co-quantum.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CoQuantumPair {
    pub mu_e: BlochAngles,
    pub mu_n: BlochAngles,
}

/// One collapsed outcome: `C+|+z⟩ + C− e^{iφe}|−z⟩` with exactly one
/// coefficient set.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Realization {
    pub c_plus: u8,
    pub c_minus: u8,
    pub phi_e: f64,
    pub ket: Spinor,
}

impl Realization {
    pub fn is_up(&self) -> bool {
        self.c_plus == 1
    }
}

pub fn predict(pair: &CoQuantumPair) -> Result<Realization> {
    let phi_e = pair.mu_e.phi();
    match branch_sign(pair.mu_n.theta(), pair.mu_e.theta()) {
        BranchSign::Positive => Ok(Realization {
            c_plus: 1,
            c_minus: 0,
            phi_e,
            ket: Spinor::PLUS_Z,
        }),
        BranchSign::Negative => Ok(Realization {
            c_plus: 0,
            c_minus: 1,
            phi_e,
            ket: Spinor::new(Complex64::new(0.0, 0.0), Complex64::from_polar(1.0, phi_e)),
        }),
        BranchSign::Zero => Err(Error::DegenerateBranch {
            theta: pair.mu_e.theta(),
        }),
    }
}

/// `|r1⟩⟨r2|` for two realizations sharing the electron direction.
pub fn pre_avg_density(r1: &Realization, r2: &Realization) -> Result<Mat2> {
    let d = (r1.phi_e - r2.phi_e).rem_euclid(TAU);
    if d.min(TAU - d) > 1e-12 {
        return Err(Error::Domain(format!(
            "realizations have different electron phases {} and {}",
            r1.phi_e, r2.phi_e
        )));
    }
    Ok(Mat2::outer(r1.ket.as_array(), r2.ket.as_array()))
}

/// Source of co-quantum directions. Implementations must be deterministic
/// given the generator state.
pub trait CoQuantumSampler: Sync {
    fn sample(&self, rng: &mut dyn RngCore) -> BlochAngles;
}

/// Isotropic directions: `cos θ` uniform on `[−1, 1]`, `φ` uniform on `[0, 2π)`.
#[derive(Debug, Clone, Copy, Default)]
pub struct UniformSphere;

impl CoQuantumSampler for UniformSphere {
    fn sample(&self, rng: &mut dyn RngCore) -> BlochAngles {
        let cos_theta = 1.0 - 2.0 * rng.random::<f64>();
        let phi = TAU * rng.random::<f64>();
        BlochAngles::new(cos_theta.clamp(-1.0, 1.0).acos(), phi).expect("acos lies in [0, pi]")
    }
}

pub fn rng_for(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn sample_co_quantum(seed: u64) -> BlochAngles {
    UniformSphere.sample(&mut rng_for(seed))
}

/// Ensemble statistics. `std_error` and `z_score` use the binomial
/// variance of the expected fraction.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EnsembleSummary {
    pub n: usize,
    pub theta_e: f64,
    pub k_i: f64,
    pub seed: u64,
    pub count_up: usize,
    pub fraction_up: f64,
    pub expected: f64,
    pub std_error: f64,
    pub z_score: f64,
    /// Degenerate draws that were resampled.
    pub resampled: usize,
    /// Mean polar angle after one full turn of induction collapse.
    pub mean_theta_after_turn: f64,
    /// Mean of `|r_2j⟩⟨r_2j+1|` over consecutive pairs, as
    /// `[[re, im]; 4]` in row-major order. Reported, not asserted.
    pub rho0_mean: [[f64; 2]; 4],
    /// Largest entry difference between `rho0_mean` and `ρ(θe, 0)`.
    pub rho0_quantum_deviation: f64,
}

struct Draw {
    realization: Realization,
    theta_after_turn: f64,
    resampled: usize,
}

/// Runs `n` independent realizations with the isotropic sampler.
/// Realization `i` uses seed `seed + i`, so the result does not depend on
/// the worker count.
pub fn ensemble_collapse(theta_e: f64, n: usize, k_i: f64, seed: u64) -> Result<EnsembleSummary> {
    ensemble_collapse_with(&UniformSphere, theta_e, n, k_i, seed)
}

pub fn ensemble_collapse_with<S: CoQuantumSampler>(
    sampler: &S,
    theta_e: f64,
    n: usize,
    k_i: f64,
    seed: u64,
) -> Result<EnsembleSummary> {
    if !(theta_e > 0.0 && theta_e < PI) {
        return Err(Error::Domain(format!(
            "theta_e = {theta_e} must lie strictly inside (0, pi)"
        )));
    }
    if n == 0 {
        return Err(Error::InvalidParameter("ensemble size must be >= 1".into()));
    }
    if !(k_i.is_finite() && k_i >= 0.0) {
        return Err(Error::InvalidParameter(format!(
            "k_i = {k_i} must be finite and >= 0"
        )));
    }
    let mu_e = BlochAngles::new(theta_e, 0.0)?;

    let draws: Vec<Draw> = (0..n as u64)
        .into_par_iter()
        .map(|i| {
            let mut rng = rng_for(seed.wrapping_add(i));
            let mut resampled = 0;
            loop {
                let mu_n = sampler.sample(&mut rng);
                let sign = branch_sign(mu_n.theta(), theta_e);
                if let Ok(realization) = predict(&CoQuantumPair { mu_e, mu_n }) {
                    let theta_after_turn = collapse_theta(theta_e, TAU, sign, k_i)?;
                    return Ok(Draw {
                        realization,
                        theta_after_turn,
                        resampled,
                    });
                }
                resampled += 1;
            }
        })
        .collect::<Result<_>>()?;

    let count_up = draws.iter().filter(|d| d.realization.is_up()).count();
    let resampled = draws.iter().map(|d| d.resampled).sum();
    let mean_theta_after_turn = draws.iter().map(|d| d.theta_after_turn).sum::<f64>() / n as f64;

    let mut rho0 = Mat2::ZERO;
    let pairs = n / 2;
    for pair in draws.chunks_exact(2) {
        rho0 = rho0 + pre_avg_density(&pair[0].realization, &pair[1].realization)?;
    }
    if pairs > 0 {
        rho0 = rho0.scale_re(1.0 / pairs as f64);
    }
    let quantum = bloch_to_matrix(bloch_from_angles(mu_e));
    let rho0_mean = [rho0[(0, 0)], rho0[(0, 1)], rho0[(1, 0)], rho0[(1, 1)]].map(|z| [z.re, z.im]);

    let fraction_up = count_up as f64 / n as f64;
    let expected = (0.5 * theta_e).cos().powi(2);
    let std_error = (expected * (1.0 - expected) / n as f64).sqrt();
    let diff = fraction_up - expected;
    let z_score = if std_error > 0.0 {
        diff / std_error
    } else if diff == 0.0 {
        0.0
    } else {
        diff.signum() * f64::INFINITY
    };

    Ok(EnsembleSummary {
        n,
        theta_e,
        k_i,
        seed,
        count_up,
        fraction_up,
        expected,
        std_error,
        z_score,
        resampled,
        mean_theta_after_turn,
        rho0_mean,
        rho0_quantum_deviation: if pairs > 0 {
            rho0.max_abs_diff(&quantum)
        } else {
            f64::NAN
        },
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;
    use rand::{Rng, RngCore};
    use std::f64::consts::FRAC_PI_2;

    fn ang(t: f64, p: f64) -> BlochAngles {
        BlochAngles::new(t, p).unwrap()
    }

    #[test]
    fn collapse_theta_examples() {
        let expected = 2.0 * (-0.1 * PI).exp().atan();
        let got = collapse_theta(FRAC_PI_2, TAU, BranchSign::Positive, 0.05).unwrap();
        assert_abs_diff_eq!(got, expected, epsilon = 1e-15);
        for dphi in [0.0, 1.0, 40.0] {
            assert_eq!(
                collapse_theta(0.7, dphi, BranchSign::Positive, 0.0).unwrap(),
                0.7
            );
            assert_abs_diff_eq!(
                collapse_theta(0.7, dphi, BranchSign::Zero, 0.3).unwrap(),
                0.7,
                epsilon = 1e-15
            );
        }
        let neg = collapse_theta(FRAC_PI_2, TAU, BranchSign::Negative, 0.05).unwrap();
        assert_abs_diff_eq!(neg, 2.0 * (0.1 * PI).exp().atan(), epsilon = 1e-15);
        assert_abs_diff_eq!(neg, PI - expected, epsilon = 1e-15);
        assert_eq!(
            collapse_theta(0.0, 3.0, BranchSign::Negative, 1.0).unwrap(),
            0.0
        );
        assert_eq!(
            collapse_theta(PI, 3.0, BranchSign::Positive, 1.0).unwrap(),
            PI
        );
        assert!(collapse_theta(-0.1, 1.0, BranchSign::Positive, 0.1).is_err());
        assert!(collapse_theta(1.0, 1.0, BranchSign::Positive, -0.1).is_err());
    }

    #[test]
    fn branch_sign_examples() {
        assert_eq!(branch_sign(0.8, 0.3), BranchSign::Positive);
        assert_eq!(branch_sign(0.3, 0.3), BranchSign::Zero);
        assert_eq!(branch_sign(0.1, 0.5), BranchSign::Negative);
    }

    #[test]
    fn predict_examples() {
        let r = predict(&CoQuantumPair {
            mu_e: ang(0.3, 1.0),
            mu_n: ang(0.8, 0.0),
        })
        .unwrap();
        assert_eq!((r.c_plus, r.c_minus), (1, 0));
        assert_eq!(r.ket, Spinor::PLUS_Z);
        let r = predict(&CoQuantumPair {
            mu_e: ang(0.5, FRAC_PI_2),
            mu_n: ang(0.1, 2.0),
        })
        .unwrap();
        assert_eq!((r.c_plus, r.c_minus), (0, 1));
        assert!(
            r.ket
                .max_abs_diff(&Spinor::new(0.0.into(), Complex64::new(0.0, 1.0)))
                <= 1e-16
        );
        let e = predict(&CoQuantumPair {
            mu_e: ang(0.4, 0.0),
            mu_n: ang(0.4, 1.0),
        })
        .unwrap_err();
        assert!(matches!(e, Error::DegenerateBranch { .. }));
    }

    fn realization(up: bool, phi_e: f64) -> Realization {
        let mu_n = if up { ang(3.0, 0.0) } else { ang(0.01, 0.0) };
        predict(&CoQuantumPair {
            mu_e: ang(1.0, phi_e),
            mu_n,
        })
        .unwrap()
    }

    #[test]
    fn pre_avg_density_examples() {
        let up = realization(true, 0.0);
        let down = realization(false, 0.0);
        let r = pre_avg_density(&up, &up).unwrap();
        assert_eq!(r, Mat2::from_real(1.0, 0.0, 0.0, 0.0));
        let r = pre_avg_density(&up, &down).unwrap();
        assert_eq!(r, Mat2::from_real(0.0, 1.0, 0.0, 0.0));
        assert_eq!(r.trace(), Complex64::new(0.0, 0.0));
        let d = realization(false, 2.0);
        let r = pre_avg_density(&d, &d).unwrap();
        assert_abs_diff_eq!(d.ket.norm_sqr(), 1.0, epsilon = 1e-15);
        assert!((r * r).max_abs_diff(&r) <= 1e-15);
        assert!(pre_avg_density(&up, &realization(true, 1.0)).is_err());
    }

    #[test]
    fn sampler_deterministic_and_isotropic() {
        assert_eq!(sample_co_quantum(42), sample_co_quantum(42));
        assert_ne!(sample_co_quantum(42), sample_co_quantum(43));
        let n = 100_000;
        let mut rng = rng_for(1);
        let draws: Vec<_> = (0..n).map(|_| UniformSphere.sample(&mut rng)).collect();
        let mean_cos = draws.iter().map(|a| a.theta().cos()).sum::<f64>() / n as f64;
        assert!(mean_cos.abs() <= 3.0 / (3.0f64.sqrt() * (n as f64).sqrt()));
        let north = draws.iter().filter(|a| a.theta() < FRAC_PI_2).count() as f64 / n as f64;
        assert!((north - 0.5).abs() <= 0.005);
    }

    #[test]
    fn ensemble_examples() {
        let s = ensemble_collapse(FRAC_PI_2, 100_000, 0.0, 11).unwrap();
        assert!((s.fraction_up - 0.5).abs() <= 0.005, "{}", s.fraction_up);
        let s = ensemble_collapse(2.0 * PI / 3.0, 100_000, 0.0, 11).unwrap();
        assert!((s.fraction_up - 0.25).abs() <= 0.0041, "{}", s.fraction_up);
        let s = ensemble_collapse(1e-3, 10_000, 0.0, 3).unwrap();
        assert!(s.fraction_up >= 0.999);
        let s = ensemble_collapse(1.0, 1, 0.1, 5).unwrap();
        assert!(s.fraction_up == 0.0 || s.fraction_up == 1.0);
        assert!(s.rho0_quantum_deviation.is_nan());
        assert!(ensemble_collapse(0.0, 10, 0.0, 0).is_err());
        assert!(ensemble_collapse(PI, 10, 0.0, 0).is_err());
        assert!(ensemble_collapse(1.0, 0, 0.0, 0).is_err());
    }

    #[test]
    fn ensemble_reproducible() {
        let a = ensemble_collapse(1.1, 5_000, 0.2, 9).unwrap();
        let b = ensemble_collapse(1.1, 5_000, 0.2, 9).unwrap();
        assert_eq!(a, b);
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(1)
            .build()
            .unwrap();
        let c = pool.install(|| ensemble_collapse(1.1, 5_000, 0.2, 9).unwrap());
        assert_eq!(a, c);
    }

    /// Sampler that always lands on the electron polar angle first.
    struct Sticky(f64);

    impl CoQuantumSampler for Sticky {
        fn sample(&self, rng: &mut dyn RngCore) -> BlochAngles {
            if rng.random::<f64>() < 0.5 {
                ang(self.0, 0.0)
            } else {
                UniformSphere.sample(rng)
            }
        }
    }

    #[test]
    fn degenerate_draws_are_resampled() {
        let s = ensemble_collapse_with(&Sticky(1.0), 1.0, 2_000, 0.0, 0).unwrap();
        assert!(s.resampled > 0);
        assert_eq!(s.n, 2_000);
    }

    proptest! {
        #[test]
        fn collapse_theta_composes(
            t0 in 0.01..3.13f64, d1 in 0.0..10.0f64, d2 in 0.0..10.0f64, k in 0.0..0.5f64, pos in any::<bool>()
        ) {
            let s = if pos { BranchSign::Positive } else { BranchSign::Negative };
            let two = collapse_theta(collapse_theta(t0, d1, s, k).unwrap(), d2, s, k).unwrap();
            let one = collapse_theta(t0, d1 + d2, s, k).unwrap();
            prop_assert!((two - one).abs() <= 1e-12);
        }

        #[test]
        fn collapse_theta_monotone(t0 in 0.01..3.13f64, d in 0.01..10.0f64, k in 0.01..0.5f64) {
            prop_assert!(collapse_theta(t0, d, BranchSign::Positive, k).unwrap() < t0);
            prop_assert!(collapse_theta(t0, d, BranchSign::Negative, k).unwrap() > t0);
        }

        #[test]
        fn realizations_well_formed(te in 0.01..3.13f64, pe in 0.0..TAU, seed in any::<u64>()) {
            let mu_n = sample_co_quantum(seed);
            if let Ok(r) = predict(&CoQuantumPair { mu_e: ang(te, pe), mu_n }) {
                prop_assert_eq!(r.c_plus * r.c_minus, 0);
                prop_assert_eq!(r.c_plus + r.c_minus, 1);
                prop_assert!((r.ket.norm_sqr() - 1.0).abs() <= 1e-15);
                prop_assert!((r.ket.inner(&r.ket) - 1.0).norm() <= 1e-15);
            }
        }

        #[test]
        fn pre_avg_trace_and_rank(a in any::<bool>(), b in any::<bool>(), pe in 0.0..TAU) {
            let r = pre_avg_density(&realization(a, pe), &realization(b, pe)).unwrap();
            let tr = r.trace();
            prop_assert!(tr == Complex64::new(0.0, 0.0) || (tr - 1.0).norm() <= 1e-15);
            prop_assert!(r.det().norm() <= 1e-15);
            if a == b {
                prop_assert!((tr - 1.0).norm() <= 1e-15);
                prop_assert!((Mat2::IDENTITY - r).det().norm() <= 1e-15);
            }
        }
    }
}
