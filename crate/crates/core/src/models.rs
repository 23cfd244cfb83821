//! The two concrete systems: a nearly degenerate two-level model and the
//! three-level V model, with bath-induced rates from an Ohmic spectral
//! density at temperature T.
//!
//! Units: ħ = k_B = 1 throughout. Energies, rates and temperatures all share
//! one energy unit; times are inverse energies.

use thiserror::Error;

use crate::numkit::{c, ComplexMatrix};

#[derive(Debug, Error)]
pub enum ModelError {
    #[error("parameter `{name}` must be positive (got {value})")]
    NonPositive { name: &'static str, value: f64 },
    #[error("bose_einstein is undefined at omega = 0; use the analytic limit gamma = a*T instead")]
    ZeroFrequency,
    #[error("V model requires delta < nu (got delta = {delta}, nu = {nu}); the near-degenerate premise breaks down")]
    DeltaNotSmall { delta: f64, nu: f64 },
}

/// Bath description: Ohmic spectral density 𝒥(ω) = a·ω at temperature T.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BathSpec {
    pub coupling_a: f64,
    pub temperature: f64,
}

impl BathSpec {
    pub fn ohmic(coupling_a: f64, temperature: f64) -> Result<Self, ModelError> {
        if coupling_a <= 0.0 {
            return Err(ModelError::NonPositive {
                name: "coupling_a",
                value: coupling_a,
            });
        }
        if temperature <= 0.0 {
            return Err(ModelError::NonPositive {
                name: "temperature",
                value: temperature,
            });
        }
        Ok(Self {
            coupling_a,
            temperature,
        })
    }

    pub fn beta(&self) -> f64 {
        1.0 / self.temperature
    }
}

/// Physical parameters carried by a [`Model`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ModelParams {
    /// Small energy splitting Δ.
    pub delta: f64,
    /// Large splitting ν (V model only).
    pub nu: Option<f64>,
    pub temperature: f64,
    pub coupling_a: f64,
    /// Bath-induced rate: aT for the two-level model, aν(n(ν)+1) for the V model.
    pub gamma: f64,
    pub beta: f64,
}

/// A system: Hamiltonian, collapse operators, and physical parameters.
///
/// Basis conventions, fixed for all serialization: the two-level model uses
/// {|0⟩, |1⟩} with |0⟩ the ground state; the V model uses {|1⟩, |2⟩, |3⟩}
/// with the ground state |1⟩ at index 0.
#[derive(Clone, Debug)]
pub struct Model {
    pub dimension: usize,
    pub hamiltonian: ComplexMatrix,
    /// Δ-independent part of the Hamiltonian.
    pub hamiltonian_static: ComplexMatrix,
    /// Part of the Hamiltonian proportional to Δ; `static + delta_part == hamiltonian`.
    pub hamiltonian_delta: ComplexMatrix,
    /// Collapse operators in √rate units.
    pub collapse_ops: Vec<ComplexMatrix>,
    pub params: ModelParams,
    pub label: String,
    /// Non-fatal regime warnings emitted at construction.
    pub warnings: Vec<String>,
}

impl Model {
    /// Ground-state density matrix |g⟩⟨g| in the model's energy eigenbasis.
    /// Index 0 is the ground state for both models.
    pub fn ground_state(&self) -> ComplexMatrix {
        ComplexMatrix::ketbra(self.dimension, 0, 0)
    }
}

/// Bose-Einstein occupation n(ω) = (e^{βω} − 1)⁻¹.
///
/// The ω → 0 limit is handled symbolically by the rate constructors; calling
/// this at ω = 0 is an error rather than a NaN.
pub fn bose_einstein(omega: f64, beta: f64) -> Result<f64, ModelError> {
    if omega == 0.0 {
        return Err(ModelError::ZeroFrequency);
    }
    Ok(((beta * omega).exp() - 1.0).recip())
}

/// Two-level model with splitting Δ ≪ T.
///
/// H = (Δ/2)(|1⟩⟨1| − |0⟩⟨0|); a single collapse operator
/// L = √γ (σx + σz)/√2 with γ = aT (the ω → 0 limit of the Ohmic rate,
/// taken analytically).
pub fn build_two_level(delta: f64, bath: BathSpec) -> Result<Model, ModelError> {
    if delta <= 0.0 {
        return Err(ModelError::NonPositive {
            name: "delta",
            value: delta,
        });
    }
    if bath.coupling_a <= 0.0 {
        return Err(ModelError::NonPositive {
            name: "coupling_a",
            value: bath.coupling_a,
        });
    }
    if bath.temperature <= 0.0 {
        return Err(ModelError::NonPositive {
            name: "temperature",
            value: bath.temperature,
        });
    }

    let gamma = bath.coupling_a * bath.temperature;
    let h_delta = ComplexMatrix::from_real_rows(&[vec![-delta / 2.0, 0.0], vec![0.0, delta / 2.0]]);
    let h_static = ComplexMatrix::zeros(2, 2);

    // S = (σx + σz)/√2 in the energy eigenbasis; S² = I
    let inv_sqrt2 = std::f64::consts::FRAC_1_SQRT_2;
    let s =
        ComplexMatrix::from_real_rows(&[vec![inv_sqrt2, inv_sqrt2], vec![inv_sqrt2, -inv_sqrt2]]);
    let l = s.scale(c(gamma.sqrt(), 0.0));

    let mut warnings = Vec::new();
    if delta / bath.temperature > 0.1 {
        warnings.push(format!(
            "delta/T = {:.3} exceeds 0.1; the near-degeneracy approximation degrades \
             (the generator remains valid Lindblad form)",
            delta / bath.temperature
        ));
    }

    Ok(Model {
        dimension: 2,
        hamiltonian: h_static.add(&h_delta),
        hamiltonian_static: h_static,
        hamiltonian_delta: h_delta,
        collapse_ops: vec![l],
        params: ModelParams {
            delta,
            nu: None,
            temperature: bath.temperature,
            coupling_a: bath.coupling_a,
            gamma,
            beta: bath.beta(),
        },
        label: "two_level".into(),
        warnings,
    })
}

/// V model: ground state |1⟩ plus two nearly degenerate excited states
/// |2⟩, |3⟩ at energies ν − Δ and ν.
///
/// Collapse operators connect the ground state to (|2⟩+|3⟩)/√2:
/// L↓ = √(γ/2)|1⟩(⟨2|+⟨3|) and L↑ = √(e^{−βν}γ/2)(|2⟩+|3⟩)⟨1| with
/// γ = aν(n(ν)+1), so the upward/downward rate ratio is the detailed-balance
/// factor e^{−βν}.
pub fn build_v_model(nu: f64, delta: f64, bath: BathSpec) -> Result<Model, ModelError> {
    if nu <= 0.0 {
        return Err(ModelError::NonPositive {
            name: "nu",
            value: nu,
        });
    }
    if delta <= 0.0 {
        return Err(ModelError::NonPositive {
            name: "delta",
            value: delta,
        });
    }
    if bath.coupling_a <= 0.0 {
        return Err(ModelError::NonPositive {
            name: "coupling_a",
            value: bath.coupling_a,
        });
    }
    if bath.temperature <= 0.0 {
        return Err(ModelError::NonPositive {
            name: "temperature",
            value: bath.temperature,
        });
    }
    if delta >= nu {
        return Err(ModelError::DeltaNotSmall { delta, nu });
    }

    let beta = bath.beta();
    let occupation = bose_einstein(nu, beta).expect("nu > 0 checked above");
    let gamma = bath.coupling_a * nu * (occupation + 1.0);
    let boltzmann = (-beta * nu).exp();

    let h_static = ComplexMatrix::from_real_rows(&[
        vec![0.0, 0.0, 0.0],
        vec![0.0, nu, 0.0],
        vec![0.0, 0.0, nu],
    ]);
    let h_delta = ComplexMatrix::from_real_rows(&[
        vec![0.0, 0.0, 0.0],
        vec![0.0, -delta, 0.0],
        vec![0.0, 0.0, 0.0],
    ]);

    let down = (gamma / 2.0).sqrt();
    let l_down = ComplexMatrix::from_real_rows(&[
        vec![0.0, down, down],
        vec![0.0, 0.0, 0.0],
        vec![0.0, 0.0, 0.0],
    ]);
    let up = (boltzmann * gamma / 2.0).sqrt();
    let l_up = ComplexMatrix::from_real_rows(&[
        vec![0.0, 0.0, 0.0],
        vec![up, 0.0, 0.0],
        vec![up, 0.0, 0.0],
    ]);

    let mut warnings = Vec::new();
    if delta / nu > 0.1 {
        warnings.push(format!(
            "delta/nu = {:.3} exceeds 0.1; the excited pair is not close to degenerate",
            delta / nu
        ));
    }

    Ok(Model {
        dimension: 3,
        hamiltonian: h_static.add(&h_delta),
        hamiltonian_static: h_static,
        hamiltonian_delta: h_delta,
        collapse_ops: vec![l_down, l_up],
        params: ModelParams {
            delta,
            nu: Some(nu),
            temperature: bath.temperature,
            coupling_a: bath.coupling_a,
            gamma,
            beta,
        },
        label: "v_model".into(),
        warnings,
    })
}

/// Gibbs state of the system Hamiltonian with order-Δ splittings neglected.
///
/// Two-level: I₂/2. V model: diag(1, e^{−βν}, e^{−βν}) / 𝒵(β) with
/// 𝒵(β) = 1 + 2e^{−βν}.
pub fn thermal_state(model: &Model) -> ComplexMatrix {
    match model.params.nu {
        None => ComplexMatrix::identity(2).scale(c(0.5, 0.0)),
        Some(nu) => {
            let w = (-model.params.beta * nu).exp();
            let z = 1.0 + 2.0 * w;
            ComplexMatrix::from_real_rows(&[
                vec![1.0 / z, 0.0, 0.0],
                vec![0.0, w / z, 0.0],
                vec![0.0, 0.0, w / z],
            ])
        }
    }
}

/// Partition function 𝒵(β) = 1 + 2e^{−βν} of the V model to leading order
/// in βΔ.
pub fn partition_full(beta: f64, nu: f64) -> f64 {
    1.0 + 2.0 * (-beta * nu).exp()
}

/// Intermediate partition function 𝒵_I(β) = 1 + e^{−βν}: the two-level
/// normalization that governs the metastable plateau.
pub fn partition_intermediate(beta: f64, nu: f64) -> f64 {
    1.0 + (-beta * nu).exp()
}
