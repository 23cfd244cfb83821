//! Jump unraveling of the master equation: deterministic no-jump drift of the
//! conditioned density matrix punctuated by normalized jumps, with seedable
//! randomness and worker-count-invariant parallel ensemble averaging.
//!
//! The unraveling operates on conditioned density matrices rather than
//! wavefunctions, so mixed initial states are first-class. Time stepping is
//! first-order in dt with renormalization each substep; the substep is sized
//! so the total jump probability per step stays at or below 1e-3.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use thiserror::Error;

use crate::bases::{transform_state, BasisError, BasisTransform, Direction};
use crate::models::Model;
use crate::numkit::{c, eig_general, ComplexMatrix, C64};

/// Name of the pseudo-random generator recorded into every trajectory.
/// Per-trajectory streams are independent by construction: trajectory `i` of
/// a run seeded with `s` uses the ChaCha8 stream `i` of seed `s`.
pub const RNG_NAME: &str = "chacha8";

/// Per-trajectory payload of an ensemble run: states at the grid points and
/// the corresponding observable rows.
type TrajectoryPayload = (Vec<ComplexMatrix>, Vec<Vec<f64>>);

/// Total jump probability allowed per substep.
const JUMP_BUDGET_PER_STEP: f64 = 1e-3;

#[derive(Debug, Error)]
pub enum TrajectoryError {
    #[error("invalid initial state: {0}")]
    InvalidState(String),
    #[error("time grid must be non-empty, ascending, and non-negative")]
    BadGrid,
    #[error(
        "step size {dt:.3e} violates the no-jump contract (jump probability {p:.3e} > 0.01); \
         use dt ≤ {required:.3e}"
    )]
    StepTooLarge { dt: f64, p: f64, required: f64 },
    #[error("jump channel has zero weight from this state; it cannot fire")]
    ZeroJumpWeight,
    #[error(transparent)]
    Basis(#[from] BasisError),
}

/// One stochastic realization: conditioned states on the observation grid and
/// the full jump log.
#[derive(Clone, Debug)]
pub struct TrajectoryRecord {
    pub grid: Vec<f64>,
    /// Conditioned density matrix at each grid point, in the run basis.
    pub states: Vec<ComplexMatrix>,
    /// Jump events as (time, channel index), strictly increasing in time.
    pub jumps: Vec<(f64, usize)>,
    pub base_seed: u64,
    pub stream: u64,
    pub rng_name: &'static str,
}

/// Ensemble mean and per-observable standard errors over seeded trajectories.
#[derive(Clone, Debug)]
pub struct EnsembleSummary {
    pub grid: Vec<f64>,
    pub mean_states: Vec<ComplexMatrix>,
    /// Observable labels matching rows of `std_error` (populations first,
    /// then Re/Im of each upper-triangle coherence).
    pub observable_names: Vec<String>,
    /// `std_error[g][o]`: standard error of observable `o` at grid point `g`.
    pub std_error: Vec<Vec<f64>>,
    pub count: usize,
    pub base_seed: u64,
    pub rng_name: &'static str,
}

/// Observable labels for a given Hilbert-space dimension: populations
/// `rho_ii`, then `re_coh`/`im_coh` per upper-triangle pair (suffixed `_ij`
/// when the dimension exceeds two).
pub fn observable_names(dim: usize) -> Vec<String> {
    let mut names: Vec<String> = (0..dim).map(|i| format!("rho_{i}{i}")).collect();
    for i in 0..dim {
        for j in (i + 1)..dim {
            if dim == 2 {
                names.push("re_coh".into());
                names.push("im_coh".into());
            } else {
                names.push(format!("re_coh_{i}{j}"));
                names.push(format!("im_coh_{i}{j}"));
            }
        }
    }
    names
}

/// Real observables of a density matrix in the order of [`observable_names`]:
/// populations, then Re and Im of ρ_ij for each i < j.
pub fn observables_of(rho: &ComplexMatrix) -> Vec<f64> {
    let dim = rho.rows();
    let mut out = Vec::with_capacity(dim * dim);
    for i in 0..dim {
        out.push(rho[(i, i)].re);
    }
    for i in 0..dim {
        for j in (i + 1)..dim {
            out.push(rho[(i, j)].re);
            out.push(rho[(i, j)].im);
        }
    }
    out
}

/// One explicit no-jump update of the conditioned state.
///
/// Applies dρ_c = −ℋ\[iH + ½Σ_k L_k†L_k\]ρ_c·dt with
/// ℋ\[A\]ρ = Aρ + ρA† − Tr\[Aρ + ρA†\]ρ, renormalizes the trace, and returns the
/// total jump probability p = dt·Σ_k Tr[L_kρ_cL_k†] evaluated on the input
/// state. Errors when that probability exceeds the 0.01 step contract.
pub fn no_jump_step(
    rho_c: &ComplexMatrix,
    model: &Model,
    dt: f64,
) -> Result<(ComplexMatrix, f64), TrajectoryError> {
    let stepper = Stepper::new(&model.hamiltonian, &model.collapse_ops);
    let mut rho = rho_c.clone();
    let mut scratch = ComplexMatrix::zeros(rho.rows(), rho.cols());
    let p = stepper.jump_probability(&rho, dt);
    if p > 0.01 {
        let rate = p / dt;
        return Err(TrajectoryError::StepTooLarge {
            dt,
            p,
            required: 0.01 / rate,
        });
    }
    stepper.drift_in_place(&mut rho, dt, &mut scratch);
    Ok((rho, p))
}

/// Post-jump state 𝒢-update: Lρ_cL† / Tr[Lρ_cL†].
pub fn jump(rho_c: &ComplexMatrix, l: &ComplexMatrix) -> Result<ComplexMatrix, TrajectoryError> {
    let tmp = l.matmul(rho_c);
    let out = tmp.matmul(&l.adjoint());
    let weight = out.trace().re;
    let scale = l.frobenius_norm().powi(2).max(f64::MIN_POSITIVE);
    if weight <= 1e-14 * scale {
        return Err(TrajectoryError::ZeroJumpWeight);
    }
    Ok(out.scale(c(1.0 / weight, 0.0)))
}

/// Sample a single jump trajectory.
///
/// `rho0` is given in the model's energy eigenbasis; when `basis` is set, the
/// state and operators are transformed and the trajectory runs (and records
/// its states) in that basis. Fully deterministic given
/// `(base_seed, stream, grid, model)`: the RNG is ChaCha8 seeded with
/// `base_seed` on stream `stream`.
pub fn sample_trajectory(
    model: &Model,
    basis: Option<&BasisTransform>,
    rho0: &ComplexMatrix,
    grid: &[f64],
    base_seed: u64,
    stream: u64,
) -> Result<TrajectoryRecord, TrajectoryError> {
    let (h, ls, mut rho) = prepare(model, basis, rho0)?;
    validate_grid(grid)?;
    validate_state(&rho)?;

    let stepper = Stepper::new(&h, &ls);
    let mut rng = ChaCha8Rng::seed_from_u64(base_seed);
    rng.set_stream(stream);

    let mut scratch = ComplexMatrix::zeros(rho.rows(), rho.cols());
    let mut jumps = Vec::new();
    let mut states = Vec::with_capacity(grid.len());
    let mut t = 0.0;
    let mut weights = vec![0.0_f64; stepper.channels.len()];

    for &target in grid {
        let span = target - t;
        if span > 0.0 {
            let steps = (span / stepper.dt_max).ceil().max(1.0) as usize;
            let h_sub = span / steps as f64;
            for s in 0..steps {
                let p_tot = stepper.channel_weights(&rho, h_sub, &mut weights);
                let u: f64 = rng.random();
                if u < p_tot {
                    // channel from one uniform draw over cumulative weights
                    let pick: f64 = rng.random::<f64>() * p_tot;
                    let mut acc = 0.0;
                    let mut channel = weights.len() - 1;
                    for (k, &w) in weights.iter().enumerate() {
                        acc += w;
                        if pick < acc {
                            channel = k;
                            break;
                        }
                    }
                    rho = jump(&rho, &stepper.channels[channel])?;
                    jumps.push((t + (s + 1) as f64 * h_sub, channel));
                } else {
                    stepper.drift_in_place(&mut rho, h_sub, &mut scratch);
                }
            }
            t = target;
        }
        states.push(rho.clone());
    }

    Ok(TrajectoryRecord {
        grid: grid.to_vec(),
        states,
        jumps,
        base_seed,
        stream,
        rng_name: RNG_NAME,
    })
}

/// Average `count` trajectories, derived deterministically from `base_seed`
/// (trajectory `i` uses stream `i`).
///
/// `workers = 0` uses all cores. The reduction runs in trajectory-index order
/// over results collected from the pool, so the output is identical for every
/// worker count, bit for bit.
pub fn ensemble_average(
    model: &Model,
    basis: Option<&BasisTransform>,
    rho0: &ComplexMatrix,
    grid: &[f64],
    count: usize,
    base_seed: u64,
    workers: usize,
) -> Result<EnsembleSummary, TrajectoryError> {
    assert!(count >= 1, "ensemble needs at least one trajectory");
    let dim = model.dimension;
    let names = observable_names(dim);
    let n_obs = names.len();

    let run = || -> Result<Vec<TrajectoryPayload>, TrajectoryError> {
        (0..count as u64)
            .into_par_iter()
            .map(|stream| {
                let rec = sample_trajectory(model, basis, rho0, grid, base_seed, stream)?;
                let obs: Vec<Vec<f64>> = rec.states.iter().map(observables_of).collect();
                Ok((rec.states, obs))
            })
            .collect()
    };

    let per_traj = if workers == 0 {
        run()?
    } else {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(workers)
            .build()
            .expect("thread pool construction");
        pool.install(run)?
    };

    let g = grid.len();
    let mut mean_states = vec![ComplexMatrix::zeros(dim, dim); g];
    let mut sum = vec![vec![0.0_f64; n_obs]; g];
    let mut sumsq = vec![vec![0.0_f64; n_obs]; g];
    for (states, obs) in &per_traj {
        for gi in 0..g {
            mean_states[gi] = mean_states[gi].add(&states[gi]);
            for oi in 0..n_obs {
                let x = obs[gi][oi];
                sum[gi][oi] += x;
                sumsq[gi][oi] += x * x;
            }
        }
    }
    let n = count as f64;
    for state in &mut mean_states {
        *state = state.scale(c(1.0 / n, 0.0));
    }
    let std_error: Vec<Vec<f64>> = (0..g)
        .map(|gi| {
            (0..n_obs)
                .map(|oi| {
                    if count < 2 {
                        return 0.0;
                    }
                    let mean = sum[gi][oi] / n;
                    let var = ((sumsq[gi][oi] - n * mean * mean) / (n - 1.0)).max(0.0);
                    (var / n).sqrt()
                })
                .collect()
        })
        .collect();

    Ok(EnsembleSummary {
        grid: grid.to_vec(),
        mean_states,
        observable_names: names,
        std_error,
        count,
        base_seed,
        rng_name: RNG_NAME,
    })
}

fn prepare(
    model: &Model,
    basis: Option<&BasisTransform>,
    rho0: &ComplexMatrix,
) -> Result<(ComplexMatrix, Vec<ComplexMatrix>, ComplexMatrix), TrajectoryError> {
    match basis {
        None => Ok((
            model.hamiltonian.clone(),
            model.collapse_ops.clone(),
            rho0.clone(),
        )),
        Some(b) => {
            let h = transform_state(&model.hamiltonian, b, Direction::Forward)?;
            let ls = model
                .collapse_ops
                .iter()
                .map(|l| transform_state(l, b, Direction::Forward))
                .collect::<Result<Vec<_>, _>>()?;
            let rho = transform_state(rho0, b, Direction::Forward)?;
            Ok((h, ls, rho))
        }
    }
}

fn validate_grid(grid: &[f64]) -> Result<(), TrajectoryError> {
    if grid.is_empty() || grid[0] < 0.0 || grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(TrajectoryError::BadGrid);
    }
    Ok(())
}

fn validate_state(rho: &ComplexMatrix) -> Result<(), TrajectoryError> {
    if !rho.is_square() {
        return Err(TrajectoryError::InvalidState("not square".into()));
    }
    if rho.sub(&rho.adjoint()).max_abs() > 1e-10 {
        return Err(TrajectoryError::InvalidState("not Hermitian".into()));
    }
    if (rho.trace() - C64::ONE).norm() > 1e-8 {
        return Err(TrajectoryError::InvalidState(format!(
            "trace = {}",
            rho.trace()
        )));
    }
    let decomp =
        eig_general(&rho.hermitize()).map_err(|e| TrajectoryError::InvalidState(e.to_string()))?;
    let min_eig = decomp
        .eigenvalues
        .iter()
        .map(|z| z.re)
        .fold(f64::INFINITY, f64::min);
    if min_eig < -1e-8 {
        return Err(TrajectoryError::InvalidState(format!(
            "min eigenvalue {min_eig:.3e}"
        )));
    }
    Ok(())
}

/// Precomputed operators for the substep loop. All per-step work runs on
/// preallocated buffers: the ensemble acceptance runs take ~1e8 substeps.
struct Stepper {
    /// A = iH + ½Σ_k L_k†L_k, the argument of the no-jump superoperator.
    drift: ComplexMatrix,
    channels: Vec<ComplexMatrix>,
    /// E_k = L_k†L_k; Tr[E_k ρ] is channel k's jump weight.
    weight_ops: Vec<ComplexMatrix>,
    dt_max: f64,
}

impl Stepper {
    fn new(h: &ComplexMatrix, ls: &[ComplexMatrix]) -> Self {
        let mut drift = h.scale(c(0.0, 1.0));
        let mut weight_ops = Vec::with_capacity(ls.len());
        let mut total_rate = 0.0;
        for l in ls {
            let e = l.adjoint().matmul(l);
            total_rate += operator_norm(&e);
            drift = drift.add(&e.scale(c(0.5, 0.0)));
            weight_ops.push(e);
        }
        let h_norm = operator_norm(h);
        let mut dt_max = f64::INFINITY;
        if total_rate > 0.0 {
            dt_max = JUMP_BUDGET_PER_STEP / total_rate;
        }
        if h_norm > 0.0 {
            // keep the coherent rotation per step small as well; with no
            // channels at all this is the only constraint
            let cap = if total_rate > 0.0 {
                0.05 / h_norm
            } else {
                5e-4 / h_norm
            };
            dt_max = dt_max.min(cap);
        }
        Self {
            drift,
            channels: ls.to_vec(),
            weight_ops,
            dt_max,
        }
    }

    /// Fill `weights[k] = dt·Tr[E_k ρ]` and return the total.
    fn channel_weights(&self, rho: &ComplexMatrix, dt: f64, weights: &mut [f64]) -> f64 {
        let mut total = 0.0;
        for (k, e) in self.weight_ops.iter().enumerate() {
            let w = dt * trace_product(e, rho).re.max(0.0);
            weights[k] = w;
            total += w;
        }
        total
    }

    fn jump_probability(&self, rho: &ComplexMatrix, dt: f64) -> f64 {
        self.weight_ops
            .iter()
            .map(|e| dt * trace_product(e, rho).re.max(0.0))
            .sum()
    }

    /// ρ ← renormalize(ρ + dt·(−(Aρ + (Aρ)†) + Tr[Aρ + (Aρ)†]·ρ)), using the
    /// Hermiticity of ρ to get ρA† as (Aρ)†.
    ///
    /// The explicit first-order step inflates purity by O((ω·dt)²) per step;
    /// over millions of substeps that dust would push a pure conditioned
    /// state outside the physical ball, so purity is clamped back to 1 when
    /// exceeded. The clamp never activates for genuinely mixed states.
    fn drift_in_place(&self, rho: &mut ComplexMatrix, dt: f64, scratch: &mut ComplexMatrix) {
        let dim = rho.rows();
        matmul_into(&self.drift, rho, scratch);
        let tr2 = 2.0 * scratch.trace().re;
        for i in 0..dim {
            for j in 0..dim {
                let s = scratch[(i, j)] + scratch[(j, i)].conj();
                let r = rho[(i, j)];
                rho[(i, j)] = r + (tr2 * r - s) * dt;
            }
        }
        let tr = rho.trace().re;
        if tr != 1.0 && tr > 0.0 {
            let inv = 1.0 / tr;
            for i in 0..dim {
                for j in 0..dim {
                    rho[(i, j)] *= inv;
                }
            }
        }
        let purity: f64 = rho.data().iter().map(|z| z.norm_sqr()).sum();
        if purity > 1.0 {
            // shrink the traceless part: ρ = I/d + X with Tr X² = purity − 1/d
            let base = 1.0 / dim as f64;
            let scale = ((1.0 - base) / (purity - base)).sqrt();
            for i in 0..dim {
                for j in 0..dim {
                    let id = if i == j { base } else { 0.0 };
                    rho[(i, j)] = (rho[(i, j)] - id) * scale + id;
                }
            }
        }
    }
}

/// Tr[A·B] without forming the product.
fn trace_product(a: &ComplexMatrix, b: &ComplexMatrix) -> C64 {
    let n = a.rows();
    let mut acc = C64::ZERO;
    for i in 0..n {
        for j in 0..n {
            acc += a[(i, j)] * b[(j, i)];
        }
    }
    acc
}

fn matmul_into(a: &ComplexMatrix, b: &ComplexMatrix, out: &mut ComplexMatrix) {
    let n = a.rows();
    for i in 0..n {
        for j in 0..n {
            let mut acc = C64::ZERO;
            for k in 0..n {
                acc += a[(i, k)] * b[(k, j)];
            }
            out[(i, j)] = acc;
        }
    }
}

/// Largest eigenvalue magnitude of a Hermitian PSD operator by power
/// iteration (deterministic start).
fn operator_norm(m: &ComplexMatrix) -> f64 {
    let n = m.rows();
    if m.max_abs() == 0.0 {
        return 0.0;
    }
    let mut v: Vec<C64> = (0..n)
        .map(|i| c(1.0 + (i as f64) * 0.3, 0.1 * i as f64))
        .collect();
    let mut norm = 0.0;
    for _ in 0..40 {
        let w = m.apply(&v);
        norm = w.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if norm == 0.0 {
            return m.one_norm(); // start vector in the kernel; fall back to a bound
        }
        v = w.into_iter().map(|z| z / norm).collect();
    }
    norm
}
