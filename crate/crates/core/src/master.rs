//! Master-equation engine: assembles the vectorized Lindblad generator,
//! propagates density operators exactly through its spectrum (the timescale
//! ratios here make step-wise integration to the slow scale infeasible),
//! computes steady states, and extracts the timescale hierarchy both
//! numerically and perturbatively.

use serde::Serialize;
use thiserror::Error;

use crate::bases::{transform_state, BasisError, BasisTransform, Direction};
use crate::models::Model;
use crate::numkit::{c, eig_general, kron, unvectorize, vectorize, ComplexMatrix, NumError, C64};

#[derive(Debug, Error)]
pub enum MasterError {
    #[error("input is not a density matrix: {0}")]
    NonState(String),
    #[error("time grid must be non-empty and ascending")]
    BadGrid,
    #[error("null space of the generator is {dim}-dimensional; no unique steady state")]
    DegenerateNullSpace { dim: usize },
    #[error("generator has no eigenvalue near zero (smallest |λ| = {smallest:.3e})")]
    NoStationaryMode { smallest: f64 },
    #[error(
        "unperturbed generator has {count} traceless near-zero modes; the perturbative \
         scheme needs exactly one"
    )]
    DegenerateUnperturbedKernel { count: usize },
    #[error(transparent)]
    Num(#[from] NumError),
    #[error(transparent)]
    Basis(#[from] BasisError),
}

/// The vectorized generator 𝓛 acting on column-stacked density matrices,
/// together with the model and basis it was assembled in.
#[derive(Clone, Debug)]
pub struct Liouvillian {
    matrix: ComplexMatrix,
    model: Model,
    basis: Option<BasisTransform>,
    basis_label: String,
}

/// Timescale hierarchy extracted from the Liouvillian spectrum.
///
/// `tau1` is `None` when the slow mode is degenerate with the stationary one
/// (the strict-degeneracy Δ → 0 limit, where the slow timescale diverges).
/// `metastable_window` is absent when the spectrum shows no usable gap.
#[derive(Clone, Debug, Serialize)]
pub struct TimescaleReport {
    /// All eigenvalues as (re, im), sorted by ascending |Re|.
    pub eigenvalues: Vec<(f64, f64)>,
    pub tau1: Option<f64>,
    pub tau2: f64,
    pub metastable_window: Option<(f64, f64)>,
}

impl Liouvillian {
    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    pub fn model(&self) -> &Model {
        &self.model
    }

    pub fn basis(&self) -> Option<&BasisTransform> {
        self.basis.as_ref()
    }

    pub fn basis_label(&self) -> &str {
        &self.basis_label
    }

    /// Hilbert-space dimension d (the matrix itself is d²×d²).
    pub fn dim(&self) -> usize {
        self.model.dimension
    }

    /// Model ground state expressed in this generator's basis.
    pub fn ground_state(&self) -> ComplexMatrix {
        let rho = self.model.ground_state();
        match &self.basis {
            None => rho,
            Some(b) => {
                transform_state(&rho, b, Direction::Forward).expect("basis dimension matches model")
            }
        }
    }

    /// ‖⟨⟨I|𝓛‖_∞ — trace preservation demands the vectorized identity be a
    /// left null vector.
    pub fn trace_preservation_defect(&self) -> f64 {
        let d = self.dim();
        let id = vectorize(&ComplexMatrix::identity(d));
        let n = d * d;
        let mut worst = 0.0_f64;
        for j in 0..n {
            let mut acc = C64::ZERO;
            for i in 0..n {
                acc += id[i].conj() * self.matrix[(i, j)];
            }
            worst = worst.max(acc.norm());
        }
        worst
    }
}

/// Lindblad dissipator 𝒟\[L\]ρ = LρL† − ½{L†L, ρ}. Traceless for any ρ.
pub fn dissipator(l: &ComplexMatrix, rho: &ComplexMatrix) -> Result<ComplexMatrix, MasterError> {
    if l.rows() != rho.rows() || l.cols() != rho.cols() || !rho.is_square() {
        return Err(MasterError::NonState(format!(
            "dimension mismatch: L is {}x{}, rho is {}x{}",
            l.rows(),
            l.cols(),
            rho.rows(),
            rho.cols()
        )));
    }
    let l_dag = l.adjoint();
    let ldl = l_dag.matmul(l);
    let gain = l.matmul(rho).matmul(&l_dag);
    let loss = ldl.matmul(rho).add(&rho.matmul(&ldl)).scale(c(0.5, 0.0));
    Ok(gain.sub(&loss))
}

/// Vectorized generator for a Hamiltonian and a set of collapse operators:
///
/// 𝓛 = −i(kron(I,H) − kron(Hᵀ,I))
///     + Σ_k [kron(L̄_k, L_k) − ½kron(I, L_k†L_k) − ½kron((L_k†L_k)ᵀ, I)]
pub fn generator_matrix(h: &ComplexMatrix, collapse_ops: &[ComplexMatrix]) -> ComplexMatrix {
    let d = h.rows();
    let id = ComplexMatrix::identity(d);
    let minus_i = c(0.0, -1.0);

    let mut gen = kron(&id, h).sub(&kron(&h.transpose(), &id)).scale(minus_i);
    for l in collapse_ops {
        let ldl = l.adjoint().matmul(l);
        let jump = kron(&l.conj(), l);
        let half = c(0.5, 0.0);
        let left = kron(&id, &ldl).scale(half);
        let right = kron(&ldl.transpose(), &id).scale(half);
        gen = gen.add(&jump).sub(&left).sub(&right);
    }
    gen
}

/// Assemble the generator for a model, optionally expressed in another basis
/// (the Hamiltonian and collapse operators are transformed before assembly).
pub fn assemble(model: &Model, basis: Option<&BasisTransform>) -> Result<Liouvillian, MasterError> {
    let (h, ls, label) = match basis {
        None => (
            model.hamiltonian.clone(),
            model.collapse_ops.clone(),
            "energy".to_string(),
        ),
        Some(b) => {
            let h = transform_state(&model.hamiltonian, b, Direction::Forward)?;
            let ls = model
                .collapse_ops
                .iter()
                .map(|l| transform_state(l, b, Direction::Forward))
                .collect::<Result<Vec<_>, _>>()?;
            (h, ls, b.to_label.clone())
        }
    };
    Ok(Liouvillian {
        matrix: generator_matrix(&h, &ls),
        model: model.clone(),
        basis: basis.cloned(),
        basis_label: label,
    })
}

fn validate_state(rho: &ComplexMatrix, dim: usize) -> Result<(), MasterError> {
    if rho.rows() != dim || rho.cols() != dim {
        return Err(MasterError::NonState(format!(
            "expected {dim}x{dim}, got {}x{}",
            rho.rows(),
            rho.cols()
        )));
    }
    let herm_defect = rho.sub(&rho.adjoint()).max_abs();
    if herm_defect > 1e-10 {
        return Err(MasterError::NonState(format!(
            "not Hermitian (defect {herm_defect:.3e})"
        )));
    }
    let tr = rho.trace();
    if (tr - C64::ONE).norm() > 1e-10 {
        return Err(MasterError::NonState(format!("trace is {tr}, expected 1")));
    }
    let eigs = eig_general(&rho.hermitize())?;
    let min_eig = eigs
        .eigenvalues
        .iter()
        .map(|z| z.re)
        .fold(f64::INFINITY, f64::min);
    if min_eig < -1e-10 {
        return Err(MasterError::NonState(format!(
            "not PSD (min eigenvalue {min_eig:.3e})"
        )));
    }
    Ok(())
}

/// Propagate ρ(t) = unvec(exp(𝓛t)·vec(ρ0)) over a time grid.
///
/// Propagation is exact in t through the spectral decomposition of 𝓛; each
/// grid point is independent. When the spectrum is defective the dense
/// fourth-order integrator takes over. Outputs are symmetrized to remove
/// 1e-15-level Hermiticity drift.
pub fn evolve(
    liouvillian: &Liouvillian,
    rho0: &ComplexMatrix,
    grid: &[f64],
) -> Result<Vec<ComplexMatrix>, MasterError> {
    let d = liouvillian.dim();
    validate_state(rho0, d)?;
    validate_grid(grid)?;

    let decomp = eig_general(&liouvillian.matrix)?;
    if decomp.is_defective() {
        let spectral_radius = decomp
            .eigenvalues
            .iter()
            .map(|z| z.norm())
            .fold(0.0, f64::max);
        return evolve_rk4(liouvillian, rho0, grid, spectral_radius);
    }

    let n = d * d;
    let v0 = vectorize(rho0);
    // expansion coefficients of the initial state on the eigenmodes
    let coeffs = decomp.left.apply(&v0);

    let mut out = Vec::with_capacity(grid.len());
    for &t in grid {
        let mut v = vec![C64::ZERO; n];
        for k in 0..n {
            let amp = (decomp.eigenvalues[k] * t).exp() * coeffs[k];
            if amp == C64::ZERO {
                continue;
            }
            for i in 0..n {
                v[i] += decomp.right[(i, k)] * amp;
            }
        }
        let rho = unvectorize(&v, d)?;
        out.push(rho.hermitize());
    }
    Ok(out)
}

/// Dense fixed-step fourth-order integrator over the grid. Retained as the
/// defective-spectrum fallback and for cross-checks against the spectral
/// propagator on short horizons.
pub fn evolve_rk4(
    liouvillian: &Liouvillian,
    rho0: &ComplexMatrix,
    grid: &[f64],
    spectral_radius_hint: f64,
) -> Result<Vec<ComplexMatrix>, MasterError> {
    let d = liouvillian.dim();
    validate_state(rho0, d)?;
    validate_grid(grid)?;

    let radius = if spectral_radius_hint > 0.0 {
        spectral_radius_hint
    } else {
        liouvillian.matrix.one_norm()
    };
    let h_max = 0.05 / radius.max(f64::MIN_POSITIVE);

    let gen = &liouvillian.matrix;
    let mut v = vectorize(rho0);
    let mut t = 0.0;
    let mut out = Vec::with_capacity(grid.len());

    let rhs = |v: &[C64]| gen.apply(v);
    for &target in grid {
        let span = target - t;
        if span > 0.0 {
            let steps = (span / h_max).ceil().max(1.0) as usize;
            let h = span / steps as f64;
            for _ in 0..steps {
                let k1 = rhs(&v);
                let k2 = rhs(&axpy(&v, &k1, h / 2.0));
                let k3 = rhs(&axpy(&v, &k2, h / 2.0));
                let k4 = rhs(&axpy(&v, &k3, h));
                for i in 0..v.len() {
                    v[i] += (k1[i] + (k2[i] + k3[i]) * 2.0 + k4[i]) * (h / 6.0);
                }
            }
            t = target;
        }
        out.push(unvectorize(&v, d)?.hermitize());
    }
    Ok(out)
}

fn axpy(v: &[C64], dv: &[C64], h: f64) -> Vec<C64> {
    v.iter().zip(dv).map(|(a, b)| a + b * h).collect()
}

fn validate_grid(grid: &[f64]) -> Result<(), MasterError> {
    if grid.is_empty() || grid[0] < 0.0 {
        return Err(MasterError::BadGrid);
    }
    if grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(MasterError::BadGrid);
    }
    Ok(())
}

/// Normalized stationary state: the null right-eigenvector of 𝓛, reshaped and
/// hermitized. Errors when the null space is not one-dimensional.
pub fn steady_state(liouvillian: &Liouvillian) -> Result<ComplexMatrix, MasterError> {
    let decomp = eig_general(&liouvillian.matrix)?;
    let gamma = liouvillian.model.params.gamma;
    let zero_tol = 1e-8 * gamma;

    let mut near_zero: Vec<usize> = (0..decomp.dim())
        .filter(|&k| decomp.eigenvalues[k].norm() <= zero_tol)
        .collect();
    if near_zero.is_empty() {
        let smallest = decomp
            .eigenvalues
            .iter()
            .map(|z| z.norm())
            .fold(f64::INFINITY, f64::min);
        return Err(MasterError::NoStationaryMode { smallest });
    }
    if near_zero.len() > 1 {
        return Err(MasterError::DegenerateNullSpace {
            dim: near_zero.len(),
        });
    }

    let k = near_zero.pop().expect("exactly one");
    let d = liouvillian.dim();
    let col: Vec<C64> = (0..d * d).map(|i| decomp.right[(i, k)]).collect();
    let rho = unvectorize(&col, d)?.hermitize();
    let tr = rho.trace();
    if tr.norm() < 1e-12 {
        return Err(MasterError::NonState("stationary mode is traceless".into()));
    }
    Ok(rho.scale(tr.inv()))
}

/// Timescale hierarchy using the model's ground state as the reference
/// initial condition (both bundled scenarios start there).
pub fn timescales(liouvillian: &Liouvillian) -> Result<TimescaleReport, MasterError> {
    let rho0 = liouvillian.ground_state();
    timescales_from(liouvillian, &rho0)
}

/// Timescale hierarchy relative to a chosen initial state.
///
/// τ1 comes from the slowest nonzero eigenvalue. τ2 comes from the
/// fastest-decaying eigenvalue whose mode overlaps the initial deviation:
/// several fast eigenvalues coexist, and the one that actually governs the
/// observable decay is the one the initial condition excites.
pub fn timescales_from(
    liouvillian: &Liouvillian,
    rho0: &ComplexMatrix,
) -> Result<TimescaleReport, MasterError> {
    let decomp = eig_general(&liouvillian.matrix)?;
    let gamma = liouvillian.model.params.gamma;
    let zero_tol = 1e-8 * gamma;
    let n = decomp.dim();

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| {
        decomp.eigenvalues[a]
            .re
            .abs()
            .partial_cmp(&decomp.eigenvalues[b].re.abs())
            .unwrap()
    });
    let eigenvalues: Vec<(f64, f64)> = order
        .iter()
        .map(|&k| (decomp.eigenvalues[k].re, decomp.eigenvalues[k].im))
        .collect();

    let zero_modes = decomp
        .eigenvalues
        .iter()
        .filter(|z| z.norm() <= zero_tol)
        .count();

    // overlap of the initial state with each decaying mode
    let coeffs = decomp.left.apply(&vectorize(rho0));
    let v0_norm = vectorize(rho0)
        .iter()
        .map(|z| z.norm_sqr())
        .sum::<f64>()
        .sqrt();
    let overlap_tol = 1e-8 * v0_norm.max(f64::MIN_POSITIVE);

    let nonzero: Vec<usize> = (0..n)
        .filter(|&k| decomp.eigenvalues[k].norm() > zero_tol)
        .collect();

    let tau1 = if zero_modes > 1 {
        None // strict degeneracy: the slow rate has collapsed into the kernel
    } else {
        let slowest_re = nonzero
            .iter()
            .map(|&k| decomp.eigenvalues[k].re.abs())
            .fold(f64::INFINITY, f64::min);
        (slowest_re.is_finite() && slowest_re > zero_tol).then(|| 1.0 / slowest_re)
    };

    let overlapping: Vec<usize> = nonzero
        .iter()
        .copied()
        .filter(|&k| coeffs[k].norm() > overlap_tol)
        .collect();
    let tau2_pool = if overlapping.is_empty() {
        &nonzero
    } else {
        &overlapping
    };
    let fastest = tau2_pool
        .iter()
        .map(|&k| decomp.eigenvalues[k].re.abs())
        .fold(0.0_f64, f64::max);
    let tau2 = 1.0 / fastest;

    let metastable_window = match tau1 {
        Some(t1) if t1 / tau2 >= 10.0 && 5.0 * tau2 < t1 / 5.0 => Some((5.0 * tau2, t1 / 5.0)),
        _ => None,
    };

    Ok(TimescaleReport {
        eigenvalues,
        tau1,
        tau2,
        metastable_window,
    })
}

/// Slow relaxation rate from perturbation theory in the small splitting Δ.
///
/// The generator splits as 𝓛 = 𝓛₀ + 𝓛_Δ, with 𝓛_Δ the commutator part
/// proportional to Δ. Both are restricted to the traceless sector (where the
/// stationary mode of 𝓛₀ drops out and its kernel is one-dimensional), the
/// kernel pair ⟨l₀|, |r₀⟩ of the restriction is found, and the returned rate
/// is the first-order correction ⟨l₀|𝓛_Δ|r₀⟩ — or, when that vanishes, the
/// second-order sum Σ_{k≠0} ⟨l₀|𝓛_Δ|r_k⟩⟨l_k|𝓛_Δ|r₀⟩ / (−λ_k).
pub fn perturbative_slow_eigenvalue(model: &Model) -> Result<C64, MasterError> {
    let gamma = model.params.gamma;
    let full0 = generator_matrix(&model.hamiltonian_static, &model.collapse_ops);
    let full_delta = generator_matrix(&model.hamiltonian_delta, &[]);

    let basis = traceless_hermitian_basis(model.dimension);
    let r0 = reduce_to_basis(&full0, &basis);
    let r_delta = reduce_to_basis(&full_delta, &basis);

    let decomp = eig_general(&r0)?;
    let m = decomp.dim();
    let zero_tol = 1e-9 * gamma;
    let zeros: Vec<usize> = (0..m)
        .filter(|&k| decomp.eigenvalues[k].norm() <= zero_tol)
        .collect();
    if zeros.len() != 1 {
        return Err(MasterError::DegenerateUnperturbedKernel { count: zeros.len() });
    }
    let k0 = zeros[0];

    let right_col = |k: usize| -> Vec<C64> { (0..m).map(|i| decomp.right[(i, k)]).collect() };
    let left_row = |k: usize| -> Vec<C64> { (0..m).map(|j| decomp.left[(k, j)]).collect() };

    let apply = |mat: &ComplexMatrix, v: &[C64]| mat.apply(v);
    let dot = |l: &[C64], v: &[C64]| -> C64 { l.iter().zip(v).map(|(a, b)| a * b).sum() };

    let r0_vec = right_col(k0);
    let l0_vec = left_row(k0);
    let delta_r0 = apply(&r_delta, &r0_vec);
    let first = dot(&l0_vec, &delta_r0);
    if first.norm() >= 1e-12 * gamma {
        return Ok(first);
    }

    let mut second = C64::ZERO;
    for k in 0..m {
        if k == k0 {
            continue;
        }
        let lk = left_row(k);
        let rk = right_col(k);
        let up = dot(&l0_vec, &apply(&r_delta, &rk));
        let down = dot(&lk, &delta_r0);
        second += up * down / (-decomp.eigenvalues[k]);
    }
    Ok(first + second)
}

/// Orthonormal basis of traceless Hermitian matrices (generalized Gell-Mann
/// construction): d²−1 elements for dimension d.
fn traceless_hermitian_basis(d: usize) -> Vec<ComplexMatrix> {
    let inv_sqrt2 = std::f64::consts::FRAC_1_SQRT_2;
    let mut out = Vec::with_capacity(d * d - 1);
    for i in 0..d {
        for j in (i + 1)..d {
            let mut sym = ComplexMatrix::zeros(d, d);
            sym[(i, j)] = c(inv_sqrt2, 0.0);
            sym[(j, i)] = c(inv_sqrt2, 0.0);
            out.push(sym);
            let mut asym = ComplexMatrix::zeros(d, d);
            asym[(i, j)] = c(0.0, -inv_sqrt2);
            asym[(j, i)] = c(0.0, inv_sqrt2);
            out.push(asym);
        }
    }
    for l in 1..d {
        let norm = 1.0 / ((l * (l + 1)) as f64).sqrt();
        let mut diag = ComplexMatrix::zeros(d, d);
        for i in 0..l {
            diag[(i, i)] = c(norm, 0.0);
        }
        diag[(l, l)] = c(-(l as f64) * norm, 0.0);
        out.push(diag);
    }
    out
}

/// Restriction of a vectorized superoperator to the span of an operator
/// basis: R[m][n] = ⟨vec(B_m), 𝓛·vec(B_n)⟩.
fn reduce_to_basis(gen: &ComplexMatrix, basis: &[ComplexMatrix]) -> ComplexMatrix {
    let m = basis.len();
    let cols: Vec<Vec<C64>> = basis.iter().map(|b| gen.apply(&vectorize(b))).collect();
    let vecs: Vec<Vec<C64>> = basis.iter().map(vectorize).collect();
    ComplexMatrix::from_fn(m, m, |i, j| {
        vecs[i]
            .iter()
            .zip(&cols[j])
            .map(|(a, b)| a.conj() * b)
            .sum()
    })
}
