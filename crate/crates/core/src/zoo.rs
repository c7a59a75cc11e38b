//! Generators for the example channel families.

use std::f64::consts::{FRAC_PI_4, PI};

use num_complex::Complex64;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::channel::KrausChannel;
use crate::error::{Error, Result};
use crate::linalg::{
    c64, haar_unitary, identity, ket, projector, real_matrix, tensor_product, tensor_vec, ComplexMatrix, ComplexVector,
    ONE, ZERO,
};

const NORM_TOL: f64 = 1e-12;

pub fn identity_channel(dims: &[usize]) -> KrausChannel {
    let d = dims.iter().product();
    KrausChannel::new("identity", dims.to_vec(), d, vec![identity(d)]).expect("valid by construction")
}

/// Projectors onto the four Bell states, ordered Φ+, Φ−, Ψ+, Ψ−.
pub fn bell_channel() -> KrausChannel {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let states = [
        (ket(4, 0) + ket(4, 3)).scale(s),
        (ket(4, 0) - ket(4, 3)).scale(s),
        (ket(4, 1) + ket(4, 2)).scale(s),
        (ket(4, 1) - ket(4, 2)).scale(s),
    ];
    KrausChannel::new("bell", vec![2, 2], 4, states.iter().map(projector).collect()).expect("valid by construction")
}

/// Party 0 measures in the computational basis; nothing happens to the rest.
pub fn local_dephasing_channel(dims: &[usize], party: usize) -> KrausChannel {
    assert!(party < dims.len());
    let kraus = (0..dims[party])
        .map(|k| {
            let factors: Vec<ComplexMatrix> = dims
                .iter()
                .enumerate()
                .map(|(p, &d)| if p == party { projector(&ket(d, k)) } else { identity(d) })
                .collect();
            crate::linalg::tensor_all(&factors)
        })
        .collect();
    let d = dims.iter().product();
    KrausChannel::new(format!("dephasing-party-{party}"), dims.to_vec(), d, kraus).expect("valid by construction")
}

pub fn swap_unitary() -> ComplexMatrix {
    real_matrix(4, 4, &[1., 0., 0., 0., 0., 0., 1., 0., 0., 1., 0., 0., 0., 0., 0., 1.])
}

/// A single-unitary channel.
pub fn unitary_channel(name: &str, dims: &[usize], u: ComplexMatrix) -> Result<KrausChannel> {
    let d: usize = dims.iter().product();
    KrausChannel::new(name, dims.to_vec(), d, vec![u])
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RotatedDominoParams {
    pub theta: [f64; 4],
}

impl RotatedDominoParams {
    pub fn new(theta: [f64; 4]) -> Result<Self> {
        let p = Self { theta };
        p.validate()?;
        Ok(p)
    }

    /// All four angles at π/4: the unrotated domino states.
    pub fn domino() -> Self {
        Self { theta: [FRAC_PI_4; 4] }
    }

    pub fn validate(&self) -> Result<()> {
        for (n, &t) in self.theta.iter().enumerate() {
            if !(0.0..=FRAC_PI_4 + 1e-12).contains(&t) {
                return Err(Error::InvalidParams(format!("theta{} = {t} outside [0, pi/4]", n + 1)));
            }
        }
        Ok(())
    }

    pub fn theta_min(&self) -> f64 {
        self.theta.iter().copied().fold(f64::INFINITY, f64::min)
    }

    /// Some pair is unrotated, so an explicit LOCC protocol exists.
    pub fn is_locc_known(&self) -> bool {
        self.theta.contains(&0.0)
    }
}

fn rotated(x: usize, y: usize, theta: f64, plus: bool) -> ComplexVector {
    let (s, c) = theta.sin_cos();
    if plus {
        ket(3, x).scale(c) + ket(3, y).scale(s)
    } else {
        ket(3, x).scale(s) - ket(3, y).scale(c)
    }
}

/// The nine rotated domino states `Ψ_1 … Ψ_9` on two qutrits.
pub fn rotated_domino_states(p: &RotatedDominoParams) -> Result<Vec<ComplexVector>> {
    p.validate()?;
    let [t1, t2, t3, t4] = p.theta;
    let k = |i| ket(3, i);
    Ok(vec![
        tensor_vec(&k(1), &k(1)),
        tensor_vec(&k(0), &rotated(0, 1, t1, true)),
        tensor_vec(&k(0), &rotated(0, 1, t1, false)),
        tensor_vec(&k(2), &rotated(1, 2, t2, true)),
        tensor_vec(&k(2), &rotated(1, 2, t2, false)),
        tensor_vec(&rotated(1, 2, t3, true), &k(0)),
        tensor_vec(&rotated(1, 2, t3, false), &k(0)),
        tensor_vec(&rotated(0, 1, t4, true), &k(2)),
        tensor_vec(&rotated(0, 1, t4, false), &k(2)),
    ])
}

pub fn rotated_domino_channel(p: &RotatedDominoParams) -> Result<KrausChannel> {
    let kraus = rotated_domino_states(p)?.iter().map(projector).collect();
    let name = if p.is_locc_known() {
        "rotated-domino (LOCC-known)"
    } else {
        "rotated-domino"
    };
    KrausChannel::new(name, vec![3, 3], 9, kraus)
}

pub fn domino_channel() -> KrausChannel {
    rotated_domino_channel(&RotatedDominoParams::domino())
        .expect("valid by construction")
        .with_name("domino")
}

/// `n_u` independent Haar unitaries on `Π dims`, each weighted `1/√n_u`.
pub fn random_unitary_channel<R: Rng + ?Sized>(dims: &[usize], n_u: usize, rng: &mut R) -> Result<KrausChannel> {
    if n_u == 0 {
        return Err(Error::InvalidParams("n_u must be at least 1".into()));
    }
    if dims.is_empty() || dims.contains(&0) {
        return Err(Error::InvalidParams(format!("invalid dims {dims:?}")));
    }
    let d: usize = dims.iter().product();
    let w = 1.0 / (n_u as f64).sqrt();
    let kraus = (0..n_u).map(|_| haar_unitary(d, rng).scale(w)).collect();
    KrausChannel::new(format!("random-unitary-{n_u}"), dims.to_vec(), d, kraus)
}

/// Amplitudes and priors of the two-qubit unambiguous-discrimination family.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct UsdParams {
    pub alpha1: Complex64,
    pub beta1: Complex64,
    pub alpha3: Complex64,
    pub beta3: Complex64,
    pub eta1: f64,
    pub eta3: f64,
}

pub const DEFAULT_ETA: f64 = 0.25;

impl UsdParams {
    pub fn new(
        alpha1: Complex64,
        beta1: Complex64,
        alpha3: Complex64,
        beta3: Complex64,
        eta1: f64,
        eta3: f64,
    ) -> Result<Self> {
        let p = Self {
            alpha1,
            beta1,
            alpha3,
            beta3,
            eta1,
            eta3,
        };
        p.validate()?;
        Ok(p)
    }

    /// Real positive `α1, β1, β3`, `α3 = r3·e^{iφ3}`, default priors.
    pub fn from_magnitudes(a1: f64, r3: f64, phase3: f64) -> Result<Self> {
        let b1 = (1.0 - a1 * a1).max(0.0).sqrt();
        let b3 = (1.0 - r3 * r3).max(0.0).sqrt();
        Self::new(
            c64(a1, 0.0),
            c64(b1, 0.0),
            Complex64::from_polar(r3, phase3),
            c64(b3, 0.0),
            DEFAULT_ETA,
            DEFAULT_ETA,
        )
    }

    pub fn validate(&self) -> Result<()> {
        self.validate_amplitudes(false)?;
        self.check_uniqueness_inequality()
    }

    fn validate_amplitudes(&self, allow_alpha3_zero: bool) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidParams(msg));
        for (name, z) in [
            ("alpha1", self.alpha1),
            ("beta1", self.beta1),
            ("alpha3", self.alpha3),
            ("beta3", self.beta3),
        ] {
            if !z.re.is_finite() || !z.im.is_finite() {
                return bad(format!("{name} is not finite"));
            }
        }
        for (j, a, b) in [(1, self.alpha1, self.beta1), (3, self.alpha3, self.beta3)] {
            let norm = a.norm_sqr() + b.norm_sqr();
            if (norm - 1.0).abs() > NORM_TOL {
                return bad(format!("|alpha{j}|^2 + |beta{j}|^2 = {norm}, expected 1"));
            }
            if b.norm() == 0.0 {
                return bad(format!("beta{j} must be nonzero"));
            }
        }
        if self.alpha1.norm() == 0.0 {
            return bad("alpha1 must be nonzero".into());
        }
        if !allow_alpha3_zero && self.alpha3.norm() == 0.0 {
            return bad("alpha3 must be nonzero".into());
        }
        if self.alpha1.norm() >= self.beta1.norm() {
            return bad(format!(
                "|alpha1| = {} must be strictly less than |beta1| = {}",
                self.alpha1.norm(),
                self.beta1.norm()
            ));
        }
        if !(self.eta1 > 0.0 && self.eta3 > 0.0) {
            return bad("priors eta1, eta3 must be positive".into());
        }
        if 2.0 * self.eta1 + self.eta3 >= 1.0 {
            return bad(format!(
                "2*eta1 + eta3 = {} must be below 1",
                2.0 * self.eta1 + self.eta3
            ));
        }
        Ok(())
    }

    /// Restriction that makes the optimal measurement unique.
    fn check_uniqueness_inequality(&self) -> Result<()> {
        let (lhs, rhs) = self.uniqueness_sides();
        if lhs < rhs {
            return Err(Error::InvalidParams(format!(
                "uniqueness inequality violated: {lhs} < {rhs}"
            )));
        }
        Ok(())
    }

    fn uniqueness_sides(&self) -> (f64, f64) {
        let (a1, b1, a3, b3) = (self.alpha1, self.beta1, self.alpha3, self.beta3);
        let lhs = (1.0 - (a1 * b3 / b1).norm_sqr()).powi(2);
        let rhs = self.eta3 / (4.0 * self.eta1) * (a3 / b1).norm_sqr() * (b3.norm_sqr() + (a3 * b1).norm_sqr());
        (lhs, rhs)
    }

    /// Draw from the unitarily invariant measure on each qubit state
    /// restricted to the valid region, with the default phase convention:
    /// `|α1|² ∈ (0, 1/2)`, `|α3|² ∈ (0, 1)`, `arg α3 ∈ [0, 2π)`.
    pub fn sample<R: Rng + ?Sized>(rng: &mut R, eta1: f64, eta3: f64) -> Result<Self> {
        for _ in 0..10_000 {
            let a1: f64 = rng.gen_range(0.0..0.5f64).sqrt();
            let r3: f64 = rng.gen_range(0.0..1.0f64).sqrt();
            let phase: f64 = rng.gen_range(0.0..2.0 * PI);
            if a1 == 0.0 || r3 == 0.0 {
                continue;
            }
            let b1 = (1.0 - a1 * a1).sqrt();
            let b3 = (1.0 - r3 * r3).sqrt();
            let candidate = Self {
                alpha1: c64(a1, 0.0),
                beta1: c64(b1, 0.0),
                alpha3: Complex64::from_polar(r3, phase),
                beta3: c64(b3, 0.0),
                eta1,
                eta3,
            };
            if candidate.validate().is_ok() && usd_coefficients(&candidate).is_ok() {
                return Ok(candidate);
            }
        }
        Err(Error::InvalidParams(format!(
            "no valid parameters found for eta1 = {eta1}, eta3 = {eta3}"
        )))
    }
}

/// The four states to be discriminated, `Φ_1 … Φ_4`.
pub fn usd_states(p: &UsdParams) -> Result<[ComplexVector; 4]> {
    p.validate()?;
    let (a1, b1, a3, b3) = (p.alpha1.conj(), p.beta1.conj(), p.alpha3.conj(), p.beta3.conj());
    let n = (p.beta3.norm_sqr() + (p.alpha3 * p.beta1).norm_sqr()).sqrt();
    let phi = |sign: f64| ComplexVector::from_vec(vec![b3 * b1 / n, sign * b3 * a1 / n, -a3 * b1 / n, ZERO]);
    Ok([phi(1.0), phi(-1.0), ket(4, 2), ket(4, 3)])
}

/// Coefficients `(p_1..p_5, |Ψ_1..Ψ_5⟩)` of the optimal measurement.
struct UsdCoefficients {
    weights: [f64; 5],
    states: [ComplexVector; 5],
}

fn usd_coefficients(p: &UsdParams) -> Result<UsdCoefficients> {
    let (a1, b1, a3, b3) = (p.alpha1, p.beta1, p.alpha3, p.beta3);
    let q = c64((b3.norm_sqr() + (a3 * b1).norm_sqr()).sqrt(), 0.0) / (a1.conj() * b1.conj() * b3.conj() * 2.0);
    let p12 = 1.0 / (2.0 * (q * b1).norm_sqr());
    let p3 = b3.norm_sqr() * (1.0 - (a1 / b1).norm_sqr()) / (1.0 - (a1 * b3 / b1).norm_sqr());

    let radicand = 1.0 - (a1 / b1).norm_sqr() - (a3 / b3).norm_sqr() * p3;
    if radicand < 0.0 {
        return Err(Error::InvalidParams(format!(
            "negative radicand {radicand:e} for the inconclusive amplitude"
        )));
    }
    let mu = radicand.sqrt();
    let ratio = a3 / b3;
    // -phase(nu) matches the phase of alpha3/beta3
    let conj_phase = if ratio.norm() > 0.0 {
        (ratio / ratio.norm()).conj()
    } else {
        ONE
    };
    let nu = -conj_phase * (1.0 - p3).max(0.0).sqrt();

    let k2 = |i| ket(2, i);
    let states = [
        tensor_vec(&k2(0), &(k2(0) * a1 + k2(1) * b1)) * q,
        tensor_vec(&k2(0), &(k2(0) * a1 - k2(1) * b1)) * q,
        tensor_vec(&(k2(0) * ratio + k2(1)), &k2(0)),
        tensor_vec(&k2(1), &k2(1)),
        tensor_vec(&(k2(0) * c64(mu, 0.0) + k2(1) * nu), &k2(0)),
    ];
    Ok(UsdCoefficients {
        weights: [p12, p12, p3, 1.0, 1.0],
        states,
    })
}

fn usd_from_coefficients(name: &str, c: UsdCoefficients) -> Result<KrausChannel> {
    let kraus = c
        .weights
        .iter()
        .zip(&c.states)
        .enumerate()
        .map(|(n, (&w, psi))| (ket(5, n) * psi.adjoint()).scale(w.sqrt()))
        .collect();
    KrausChannel::new(name, vec![2, 2], 5, kraus)
}

/// Five-outcome channel `K_n = √p_n |n⟩⟨Ψ_n|` realizing the optimal
/// unambiguous discrimination of [`usd_states`]; outcome 5 is inconclusive.
pub fn usd_channel(p: &UsdParams) -> Result<KrausChannel> {
    p.validate()?;
    usd_from_coefficients("usd", usd_coefficients(p)?)
}

/// The `α3 = 0` member of the family (`β3 = 1`), which admits a one-way
/// LOCC implementation and is therefore outside the validated region.
pub fn usd_limit_channel(alpha1: Complex64, beta1: Complex64) -> Result<KrausChannel> {
    let p = UsdParams {
        alpha1,
        beta1,
        alpha3: ZERO,
        beta3: ONE,
        eta1: DEFAULT_ETA,
        eta3: DEFAULT_ETA,
    };
    p.validate_amplitudes(true)?;
    usd_from_coefficients("usd-alpha3-zero", usd_coefficients(&p)?)
}

/// Product of single-party unitaries, one Kraus operator.
pub fn product_unitary_channel<R: Rng + ?Sized>(dims: &[usize], rng: &mut R) -> KrausChannel {
    let u = dims
        .iter()
        .fold(identity(1), |acc, &d| tensor_product(&acc, &haar_unitary(d, rng)));
    unitary_channel("product-unitary", dims, u).expect("valid by construction")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::max_abs_diff;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn gram(states: &[ComplexVector]) -> ComplexMatrix {
        let n = states.len();
        ComplexMatrix::from_fn(n, n, |i, j| states[i].dotc(&states[j]))
    }

    #[test]
    fn bell_products_vanish_off_diagonal() {
        let bell = bell_channel();
        for (i, a) in bell.kraus().iter().enumerate() {
            for (j, b) in bell.kraus().iter().enumerate() {
                if i != j {
                    assert!(crate::linalg::max_abs(&(a.adjoint() * b)) < 1e-15);
                }
            }
        }
        assert_eq!(bell.input_dims(), &[2, 2]);
        assert_eq!(bell.output_dim(), 4);
    }

    #[test]
    fn rotated_domino_states_are_orthonormal() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..20 {
            let theta = [(); 4].map(|_| rng.gen_range(0.0..=FRAC_PI_4));
            let states = rotated_domino_states(&RotatedDominoParams::new(theta).unwrap()).unwrap();
            assert!(max_abs_diff(&gram(&states), &identity(9)) < 1e-12);
        }
    }

    #[test]
    fn unrotated_first_pair() {
        let p = RotatedDominoParams::new([0.0, 0.3, 0.4, 0.5]).unwrap();
        assert!(p.is_locc_known());
        let s = rotated_domino_states(&p).unwrap();
        assert_eq!(s[1], tensor_vec(&ket(3, 0), &ket(3, 0)));
        assert_eq!(s[2], -tensor_vec(&ket(3, 0), &ket(3, 1)));
        let proj = projector(&s[2]);
        assert!(max_abs_diff(&proj, &projector(&tensor_vec(&ket(3, 0), &ket(3, 1)))) < 1e-15);
    }

    #[test]
    fn rotated_domino_rejects_out_of_range() {
        assert!(RotatedDominoParams::new([0.1, 0.2, 0.3, 1.0]).is_err());
        assert!(RotatedDominoParams::new([-0.1, 0.2, 0.3, 0.4]).is_err());
    }

    #[test]
    fn random_unitary_channel_is_complete() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for n_u in 1..=6 {
            let c = random_unitary_channel(&[2, 3], n_u, &mut rng).unwrap();
            assert!(c.completeness_residual() < 1e-10);
        }
        assert!(random_unitary_channel(&[2, 2], 0, &mut rng).is_err());
    }

    fn sample_params(seed: u64) -> UsdParams {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        UsdParams::sample(&mut rng, DEFAULT_ETA, DEFAULT_ETA).unwrap()
    }

    #[test]
    fn usd_channel_is_complete() {
        for seed in 0..50 {
            let c = usd_channel(&sample_params(seed)).unwrap();
            assert!(c.completeness_residual() < 1e-9, "seed {seed}");
        }
    }

    #[test]
    fn usd_channel_is_unambiguous() {
        for seed in 0..50 {
            let p = sample_params(seed);
            let c = usd_channel(&p).unwrap();
            let phis = usd_states(&p).unwrap();
            for n in 0..4 {
                for (j, phi) in phis.iter().enumerate() {
                    if j != n {
                        let overlap = (&c.kraus()[n] * phi).norm();
                        assert!(overlap < 1e-10, "seed {seed}: K{n} on Phi{j} = {overlap}");
                    }
                }
            }
        }
    }

    #[test]
    fn usd_states_normalized_with_expected_overlap() {
        let p = sample_params(7);
        let phis = usd_states(&p).unwrap();
        for phi in &phis {
            assert!((phi.norm() - 1.0).abs() < 1e-12);
        }
        assert_eq!(phis[2], ket(4, 2));
        assert_eq!(phis[3], ket(4, 3));
        let (a1, b1, a3, b3) = (p.alpha1, p.beta1, p.alpha3, p.beta3);
        let expected = ((b3 * b1).norm_sqr() - (b3 * a1).norm_sqr() + (a3 * b1).norm_sqr())
            / (b3.norm_sqr() + (a3 * b1).norm_sqr());
        let overlap = phis[0].dotc(&phis[1]);
        assert!((overlap - c64(expected, 0.0)).norm() < 1e-12);
    }

    #[test]
    fn usd_constraints_are_named() {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let err = |p: Result<UsdParams>| p.unwrap_err().to_string();
        assert!(err(UsdParams::from_magnitudes(0.0, 0.5, 0.0)).contains("alpha1"));
        assert!(err(UsdParams::from_magnitudes(s, 0.5, 0.0)).contains("strictly less"));
        assert!(err(UsdParams::from_magnitudes(0.3, 0.0, 0.0)).contains("alpha3"));
        assert!(err(UsdParams::new(
            c64(0.3, 0.0),
            c64(0.9, 0.0),
            c64(0.5, 0.0),
            c64(0.5, 0.0),
            0.25,
            0.25
        ))
        .contains("|alpha1|^2 + |beta1|^2"));
        assert!(err(UsdParams::new(
            c64(0.6, 0.0),
            c64(0.8, 0.0),
            c64(0.6, 0.0),
            c64(0.8, 0.0),
            0.4,
            0.25
        ))
        .contains("eta"));
    }

    #[test]
    fn usd_uniqueness_inequality_enforced() {
        // |alpha1/beta1| near 1 with large |alpha3| and heavy eta3 breaks it
        let r = UsdParams::new(
            c64(0.7, 0.0),
            c64((1.0f64 - 0.49).sqrt(), 0.0),
            c64(0.95, 0.0),
            c64((1.0f64 - 0.9025).sqrt(), 0.0),
            0.05,
            0.85,
        );
        assert!(r.unwrap_err().to_string().contains("uniqueness"));
    }

    #[test]
    fn usd_limit_channel_is_complete() {
        let c = usd_limit_channel(c64(0.4, 0.0), c64(0.84f64.sqrt(), 0.0)).unwrap();
        assert!(c.completeness_residual() < 1e-12);
    }

    #[test]
    fn seeded_generators_reproduce() {
        let a = random_unitary_channel(&[2, 2], 3, &mut ChaCha8Rng::seed_from_u64(9)).unwrap();
        let b = random_unitary_channel(&[2, 2], 3, &mut ChaCha8Rng::seed_from_u64(9)).unwrap();
        assert_eq!(a, b);
        assert_eq!(sample_params(3), sample_params(3));
    }

    #[test]
    fn usd_complex_phases_stay_complete_and_unambiguous() {
        for (p1, pb1, pb3) in [(0.7, 0.0, 0.0), (0.0, 1.1, 0.0), (0.0, 0.0, 2.0), (0.3, 1.3, -0.8)] {
            let p = UsdParams::new(
                Complex64::from_polar(0.4, p1),
                Complex64::from_polar(0.84f64.sqrt(), pb1),
                Complex64::from_polar(0.5, 0.9),
                Complex64::from_polar(0.75f64.sqrt(), pb3),
                DEFAULT_ETA,
                DEFAULT_ETA,
            )
            .unwrap();
            let c = usd_channel(&p).unwrap();
            assert!(c.completeness_residual() < 1e-12);
            let phis = usd_states(&p).unwrap();
            for n in 0..4 {
                for (m, phi) in phis.iter().enumerate() {
                    if m != n {
                        assert!((&c.kraus()[n] * phi).norm() < 1e-12);
                    }
                }
            }
        }
    }
}
