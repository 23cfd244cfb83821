//! Closed-form reference solutions, valid to leading order in the small
//! splitting Δ, for both models started in their ground states. These are the
//! oracles the numerical engines are validated against.
//!
//! Imaginary coherence parts are deliberately absent: their leading-order
//! evolution is itself O(Δ) and outside the reach of the perturbative
//! solutions, so only the numerical master results speak for them.
//!
//! Every function takes raw physical parameters (Δ, γ, βν) and derives the
//! timescales internally, so inconsistent (τ, γ) combinations cannot be fed
//! in.

/// Observables of the two-level model in the energy eigenbasis.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TwoLevelEigen {
    /// Excited-state population ρ₁₁(t).
    pub rho11: f64,
    /// Real part of the eigenstate coherence ρ₁₀ᴿ(t).
    pub re_coh: f64,
}

/// Observables of the two-level model in the decoherence (diagonalized-L)
/// basis.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TwoLevelAlternate {
    /// Population ρ₋₋(t) of |ψ−⟩.
    pub rho_mm: f64,
    /// Real part of the coherence ρ₊₋ᴿ(t).
    pub re_coh_pm: f64,
}

/// Observables of the V model in the energy eigenbasis.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct VModelEigen {
    /// Ground-state population ρ₁₁(t).
    pub rho11: f64,
    /// Real part of the excited-pair coherence ρ₃₂ᴿ(t).
    pub re_coh32: f64,
}

/// Populations of the V model in the {|1⟩, |+⟩, |−⟩} basis.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct VModelPm {
    pub rho_pp: f64,
    pub rho_mm: f64,
}

/// Slow timescale of the two-level model: τ₁ = 4γ/Δ².
pub fn two_level_tau1(delta: f64, gamma: f64) -> f64 {
    4.0 * gamma / (delta * delta)
}

/// Fast timescale of the two-level model: τ₂ = 1/(2γ).
pub fn two_level_tau2(gamma: f64) -> f64 {
    1.0 / (2.0 * gamma)
}

/// Slow timescale of the V model: τ₁ = (𝒵_I/𝒵)·γ/Δ².
pub fn v_model_tau1(delta: f64, gamma: f64, beta_nu: f64) -> f64 {
    let w = (-beta_nu).exp();
    let z = 1.0 + 2.0 * w;
    let zi = 1.0 + w;
    (zi / z) * gamma / (delta * delta)
}

/// Fast timescale of the V model: τ₂ = 1/(𝒵_I·γ).
pub fn v_model_tau2(gamma: f64, beta_nu: f64) -> f64 {
    let zi = 1.0 + (-beta_nu).exp();
    1.0 / (zi * gamma)
}

/// Two-level model, eigenbasis, ground start:
/// ρ₁₁(t) = ½ − ¼(e^{−t/τ₁} + e^{−t/τ₂}), ρ₁₀ᴿ(t) = ¼(e^{−t/τ₁} − e^{−t/τ₂}).
pub fn two_level_eigenbasis(t: f64, delta: f64, gamma: f64) -> TwoLevelEigen {
    let slow = (-t / two_level_tau1(delta, gamma)).exp();
    let fast = (-t / two_level_tau2(gamma)).exp();
    TwoLevelEigen {
        rho11: 0.5 - 0.25 * (slow + fast),
        re_coh: 0.25 * (slow - fast),
    }
}

/// Two-level model, decoherence basis, ground start: each observable carries
/// a single timescale —
/// ρ₋₋(t) = ½ − e^{−t/τ₁}/(2√2), ρ₊₋ᴿ(t) = −e^{−t/τ₂}/(2√2).
pub fn two_level_alternate(t: f64, delta: f64, gamma: f64) -> TwoLevelAlternate {
    let q = 0.5 * std::f64::consts::FRAC_1_SQRT_2;
    let slow = (-t / two_level_tau1(delta, gamma)).exp();
    let fast = (-t / two_level_tau2(gamma)).exp();
    TwoLevelAlternate {
        rho_mm: 0.5 - q * slow,
        re_coh_pm: -q * fast,
    }
}

/// Stationary two-time correlation of σz in the decoherence basis:
/// ⟨σz(t)σz(0)⟩ = e^{−Δ²t/4γ}.
pub fn sigma_z_autocorrelation(t: f64, delta: f64, gamma: f64) -> f64 {
    (-t / two_level_tau1(delta, gamma)).exp()
}

/// V model, eigenbasis, ground start:
///
/// ρ₁₁(t) = 1/𝒵 + (e^{−βν}/𝒵_I)·((1/𝒵)e^{−t/τ₁} + e^{−t/τ₂}),
/// ρ₃₂ᴿ(t) = (e^{−βν}/(2𝒵_I))·(e^{−t/τ₁} − e^{−t/τ₂}).
///
/// The coherence prefactor carries 1/𝒵_I: it is fixed by ρ₃₂ᴿ = (ρ₊₊−ρ₋₋)/2
/// together with the {|1⟩,|+⟩,|−⟩}-basis populations, and by the mode
/// expansion of the eigenbasis equations of motion.
pub fn v_model_eigenbasis(t: f64, nu: f64, delta: f64, gamma: f64, beta: f64) -> VModelEigen {
    let beta_nu = beta * nu;
    let w = (-beta_nu).exp();
    let z = 1.0 + 2.0 * w;
    let zi = 1.0 + w;
    let slow = (-t / v_model_tau1(delta, gamma, beta_nu)).exp();
    let fast = (-t / v_model_tau2(gamma, beta_nu)).exp();
    VModelEigen {
        rho11: 1.0 / z + (w / zi) * (slow / z + fast),
        re_coh32: (w / (2.0 * zi)) * (slow - fast),
    }
}

/// V model, {|1⟩, |+⟩, |−⟩} basis, ground start:
///
/// ρ₊₊(t) = e^{−βν}/𝒵 + (e^{−βν}/𝒵_I)·((e^{−βν}/𝒵)e^{−t/τ₁} − e^{−t/τ₂}),
/// ρ₋₋(t) = (e^{−βν}/𝒵)(1 − e^{−t/τ₁}).
///
/// Only the slow timescale appears in ρ₋₋: the |−⟩ state is fed exclusively
/// by the Rabi flow out of |+⟩, never by a jump.
pub fn v_model_pm(t: f64, nu: f64, delta: f64, gamma: f64, beta: f64) -> VModelPm {
    let beta_nu = beta * nu;
    let w = (-beta_nu).exp();
    let z = 1.0 + 2.0 * w;
    let zi = 1.0 + w;
    let slow = (-t / v_model_tau1(delta, gamma, beta_nu)).exp();
    let fast = (-t / v_model_tau2(gamma, beta_nu)).exp();
    VModelPm {
        rho_pp: w / z + (w / zi) * ((w / z) * slow - fast),
        rho_mm: (w / z) * (1.0 - slow),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    const DELTA: f64 = 0.001;
    const GAMMA: f64 = 0.02;

    #[test]
    fn two_level_eigenbasis_limits() {
        let start = two_level_eigenbasis(0.0, DELTA, GAMMA);
        assert_abs_diff_eq!(start.rho11, 0.0, epsilon = 1e-15);
        assert_abs_diff_eq!(start.re_coh, 0.0, epsilon = 1e-15);

        let late = two_level_eigenbasis(1e9, DELTA, GAMMA);
        assert_abs_diff_eq!(late.rho11, 0.5, epsilon = 1e-12);
        assert_abs_diff_eq!(late.re_coh, 0.0, epsilon = 1e-12);
    }

    #[test]
    fn two_level_eigenbasis_at_tau2() {
        // direct evaluation at t = τ₂ = 25 for the Δ=0.001, γ=0.02 parameters
        let v = two_level_eigenbasis(25.0, DELTA, GAMMA);
        let slow = (-25.0 / 80000.0_f64).exp();
        let fast = (-1.0_f64).exp();
        assert_abs_diff_eq!(v.re_coh, 0.25 * (slow - fast), epsilon = 1e-15);
        assert_abs_diff_eq!(v.re_coh, 0.157_952_026_912_899_2, epsilon = 1e-12);
        assert_abs_diff_eq!(v.rho11, 0.158_108_252_501_379_6, epsilon = 1e-12);
    }

    #[test]
    fn two_level_alternate_limits() {
        let q = 0.5 * std::f64::consts::FRAC_1_SQRT_2;
        let start = two_level_alternate(0.0, DELTA, GAMMA);
        assert_abs_diff_eq!(start.rho_mm, 0.5 - q, epsilon = 1e-15);
        assert_abs_diff_eq!(start.rho_mm, 0.146_446_609_406_726_24, epsilon = 1e-15);
        assert_abs_diff_eq!(start.re_coh_pm, -0.353_553_390_593_273_7, epsilon = 1e-15);

        let late = two_level_alternate(1e9, DELTA, GAMMA);
        assert_abs_diff_eq!(late.rho_mm, 0.5, epsilon = 1e-12);
        assert_abs_diff_eq!(late.re_coh_pm, 0.0, epsilon = 1e-12);
    }

    #[test]
    fn autocorrelation_slope() {
        assert_abs_diff_eq!(
            sigma_z_autocorrelation(0.0, DELTA, GAMMA),
            1.0,
            epsilon = 1e-15
        );
        let tau1 = two_level_tau1(DELTA, GAMMA);
        assert_abs_diff_eq!(
            sigma_z_autocorrelation(tau1, DELTA, GAMMA),
            (-1.0_f64).exp(),
            epsilon = 1e-15
        );
        let log2 = -sigma_z_autocorrelation(2.0 * tau1, DELTA, GAMMA).ln();
        assert_abs_diff_eq!(log2, 2.0, epsilon = 1e-12);
    }

    #[test]
    fn v_model_eigenbasis_starts_at_unit_ground_population() {
        // algebraic identity via 𝒵 = 𝒵_I + e^{−βν}
        let gamma = 0.02 * (1.0 / (1.0_f64.exp() - 1.0) + 1.0);
        let v = v_model_eigenbasis(0.0, 1.0, DELTA, gamma, 1.0);
        assert_abs_diff_eq!(v.rho11, 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(v.re_coh32, 0.0, epsilon = 1e-15);
    }

    #[test]
    fn v_model_eigenbasis_long_time_and_plateau() {
        let gamma = 0.02 * (1.0 / (1.0_f64.exp() - 1.0) + 1.0);
        let late = v_model_eigenbasis(1e9, 1.0, DELTA, gamma, 1.0);
        assert_abs_diff_eq!(late.rho11, 0.576_116_884_765_829_1, epsilon = 1e-9);
        assert_abs_diff_eq!(late.re_coh32, 0.0, epsilon = 1e-12);

        // metastable window: two-level Boltzmann plateau at 1/𝒵_I
        let t = 10.0 * v_model_tau2(gamma, 1.0);
        let mid = v_model_eigenbasis(t, 1.0, DELTA, gamma, 1.0);
        let plateau = 1.0 / (1.0 + (-1.0_f64).exp());
        assert!(
            (mid.rho11 - plateau).abs() / plateau < 0.02,
            "rho11 = {}",
            mid.rho11
        );
    }

    #[test]
    fn v_model_pm_starts_empty_and_thermalizes() {
        let gamma = 0.02 * (1.0 / (1.0_f64.exp() - 1.0) + 1.0);
        let start = v_model_pm(0.0, 1.0, DELTA, gamma, 1.0);
        assert_abs_diff_eq!(start.rho_pp, 0.0, epsilon = 1e-14);
        assert_abs_diff_eq!(start.rho_mm, 0.0, epsilon = 1e-14);

        let late = v_model_pm(1e9, 1.0, DELTA, gamma, 1.0);
        assert_abs_diff_eq!(late.rho_pp, 0.211_941_557_617_085_4, epsilon = 1e-9);
        assert_abs_diff_eq!(late.rho_mm, 0.211_941_557_617_085_4, epsilon = 1e-9);
    }

    #[test]
    fn pm_minus_population_is_single_exponential() {
        // fitting a single exponential to 1 − ρ₋₋·𝒵·e^{βν} recovers 1/τ₁
        let gamma = 0.02 * (1.0 / (1.0_f64.exp() - 1.0) + 1.0);
        let w = (-1.0_f64).exp();
        let z = 1.0 + 2.0 * w;
        let tau1 = v_model_tau1(DELTA, gamma, 1.0);
        for &t in &[100.0, 5_000.0, 60_000.0] {
            let v = v_model_pm(t, 1.0, DELTA, gamma, 1.0);
            let residual = 1.0 - v.rho_mm * z / w;
            assert_abs_diff_eq!(-residual.ln() / t, 1.0 / tau1, epsilon = 1e-10 / t);
        }
    }

    #[test]
    fn families_are_mutually_consistent() {
        // eigenbasis sum rule ρ22 = ρ33 = (1 − ρ11)/2 against the pm family:
        // ρ22 = (ρ++ + ρ−−)/2 when ρ+−ᴿ stays zero, and ρ32ᴿ = (ρ++ − ρ−−)/2
        let gamma = 0.02 * (1.0 / (1.0_f64.exp() - 1.0) + 1.0);
        for &t in &[0.0, 5.0, 23.1, 231.0, 24_936.0, 80_000.0] {
            let eig = v_model_eigenbasis(t, 1.0, DELTA, gamma, 1.0);
            let pm = v_model_pm(t, 1.0, DELTA, gamma, 1.0);
            let rho22_eig = (1.0 - eig.rho11) / 2.0;
            let rho22_pm = (pm.rho_pp + pm.rho_mm) / 2.0;
            assert_abs_diff_eq!(rho22_eig, rho22_pm, epsilon = 1e-12);
            assert_abs_diff_eq!(eig.re_coh32, (pm.rho_pp - pm.rho_mm) / 2.0, epsilon = 1e-12);
        }
    }

    #[test]
    fn observables_stay_bounded() {
        let gamma_v = 0.02 * (1.0 / (1.0_f64.exp() - 1.0) + 1.0);
        let mut t = 0.0;
        while t < 3.0e5 {
            let a = two_level_eigenbasis(t, DELTA, GAMMA);
            assert!((0.0..=1.0).contains(&a.rho11) && a.re_coh.abs() <= 0.5);
            let b = two_level_alternate(t, DELTA, GAMMA);
            assert!((0.0..=1.0).contains(&b.rho_mm) && b.re_coh_pm.abs() <= 0.5);
            let c = v_model_eigenbasis(t, 1.0, DELTA, gamma_v, 1.0);
            assert!((0.0..=1.0).contains(&c.rho11) && c.re_coh32.abs() <= 0.5);
            let d = v_model_pm(t, 1.0, DELTA, gamma_v, 1.0);
            assert!((0.0..=1.0).contains(&d.rho_pp) && (0.0..=1.0).contains(&d.rho_mm));
            t = t * 1.7 + 1.0;
        }
    }
}
