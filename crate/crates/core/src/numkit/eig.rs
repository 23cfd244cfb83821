//! General complex eigendecomposition via Hessenberg reduction and shifted QR.
//!
//! Good for dense matrices up to a couple hundred rows, which covers every
//! superoperator this crate builds. Left eigenvectors come from inverting the
//! right-eigenvector matrix, so left·right is biorthonormal by construction.

use super::{ComplexMatrix, NumError, C64};

/// Near-zero threshold, relative to the matrix scale, below which an
/// off-diagonal element is considered deflated.
const DEFLATE_EPS: f64 = 1e-15;

/// QR sweeps allowed per eigenvalue before giving up.
const MAX_SWEEPS_PER_EIGENVALUE: usize = 60;

/// Eigenvalues within `CLUSTER_TOL · ‖M‖` of each other count as a degenerate
/// cluster.
const CLUSTER_TOL: f64 = 1e-10;

/// Eigenvector-matrix condition number above which the spectrum is treated as
/// defective for the purpose of spectral matrix functions.
pub const DEFECTIVE_CONDITION: f64 = 1e8;

/// Full eigendecomposition of a general complex matrix.
///
/// `right` holds right eigenvectors as columns, `left` holds the biorthogonal
/// left eigenvectors as rows, so `left · right == I` and
/// `M == right · diag(eigenvalues) · left` whenever the spectrum is not
/// defective.
#[derive(Clone, Debug)]
pub struct SpectralDecomposition {
    pub eigenvalues: Vec<C64>,
    pub right: ComplexMatrix,
    pub left: ComplexMatrix,
    /// One-norm condition estimate of the right-eigenvector matrix.
    pub condition_estimate: f64,
    /// True when some eigenvalues coincide within `1e-10 · ‖M‖`.
    pub degenerate: bool,
}

impl SpectralDecomposition {
    pub fn dim(&self) -> usize {
        self.eigenvalues.len()
    }

    /// Whether spectral matrix functions should refuse this decomposition.
    pub fn is_defective(&self) -> bool {
        !self.condition_estimate.is_finite() || self.condition_estimate > DEFECTIVE_CONDITION
    }

    /// Σ_k λ_k |r_k⟩⟨l_k| — reproduces the decomposed matrix.
    pub fn reconstruct(&self) -> Result<ComplexMatrix, NumError> {
        matrix_function_via_spectrum(self, |z| z)
    }

    /// Largest residual ‖M·r_k − λ_k·r_k‖₂ over all eigenpairs.
    pub fn max_residual(&self, m: &ComplexMatrix) -> f64 {
        let n = self.dim();
        let mut worst = 0.0_f64;
        for k in 0..n {
            let col: Vec<C64> = (0..n).map(|i| self.right[(i, k)]).collect();
            let mv = m.apply(&col);
            let r2: f64 = mv
                .iter()
                .zip(&col)
                .map(|(a, b)| (a - b * self.eigenvalues[k]).norm_sqr())
                .sum();
            worst = worst.max(r2.sqrt());
        }
        worst
    }
}

/// Eigendecomposition of a general (non-Hermitian) complex matrix.
///
/// Reduces to upper Hessenberg form with Householder reflections, then runs a
/// Wilkinson-shifted QR iteration with deflation to reach complex Schur form,
/// and finally extracts eigenvectors by triangular back-substitution.
/// Eigenvalues come out in deflation order; callers sort as needed.
pub fn eig_general(m: &ComplexMatrix) -> Result<SpectralDecomposition, NumError> {
    if !m.is_square() {
        return Err(NumError::NotSquare {
            rows: m.rows(),
            cols: m.cols(),
        });
    }
    let n = m.rows();
    let scale = m.frobenius_norm();

    if n == 0 {
        return Err(NumError::NotSquare { rows: 0, cols: 0 });
    }
    if n == 1 {
        return Ok(SpectralDecomposition {
            eigenvalues: vec![m[(0, 0)]],
            right: ComplexMatrix::identity(1),
            left: ComplexMatrix::identity(1),
            condition_estimate: 1.0,
            degenerate: false,
        });
    }

    let (mut t, mut q) = hessenberg(m);
    qr_iterate(&mut t, &mut q, scale)?;

    let eigenvalues: Vec<C64> = (0..n).map(|i| t[(i, i)]).collect();
    let right = eigenvectors_from_schur(&t, &q, &eigenvalues, scale);

    let (left, condition_estimate) = match right.inverse() {
        Ok(inv) => {
            let cond = right.one_norm() * inv.one_norm();
            (inv, cond)
        }
        Err(_) => {
            // Defective to working precision: no usable left vectors.
            (ComplexMatrix::zeros(n, n), f64::INFINITY)
        }
    };

    let degenerate = has_cluster(&eigenvalues, CLUSTER_TOL * scale.max(f64::MIN_POSITIVE));

    Ok(SpectralDecomposition {
        eigenvalues,
        right,
        left,
        condition_estimate,
        degenerate,
    })
}

/// Apply a scalar function to a matrix through its spectral decomposition:
/// returns `Σ_k f(λ_k) |r_k⟩⟨l_k|`. With `f = exp(λ·t)` this is the exact
/// propagator of the linear system generated by the decomposed matrix.
pub fn matrix_function_via_spectrum(
    d: &SpectralDecomposition,
    f: impl Fn(C64) -> C64,
) -> Result<ComplexMatrix, NumError> {
    if d.is_defective() {
        return Err(NumError::DefectiveSpectrum {
            condition: d.condition_estimate,
        });
    }
    let n = d.dim();
    let mut scaled = d.right.clone();
    for k in 0..n {
        let fk = f(d.eigenvalues[k]);
        for i in 0..n {
            scaled[(i, k)] *= fk;
        }
    }
    Ok(scaled.matmul(&d.left))
}

fn has_cluster(eigenvalues: &[C64], tol: f64) -> bool {
    for (i, a) in eigenvalues.iter().enumerate() {
        for b in &eigenvalues[i + 1..] {
            if (a - b).norm() <= tol {
                return true;
            }
        }
    }
    false
}

/// Householder reduction to upper Hessenberg form; returns (H, Q) with
/// `M = Q H Q†`.
fn hessenberg(m: &ComplexMatrix) -> (ComplexMatrix, ComplexMatrix) {
    let n = m.rows();
    let mut h = m.clone();
    let mut q = ComplexMatrix::identity(n);

    for k in 0..n.saturating_sub(2) {
        // Householder vector zeroing h[k+2.., k]
        let mut x: Vec<C64> = (k + 1..n).map(|i| h[(i, k)]).collect();
        let norm_x = x.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if norm_x == 0.0 {
            continue;
        }
        let phase = if x[0].norm() > 0.0 {
            x[0] / x[0].norm()
        } else {
            C64::ONE
        };
        let alpha = -phase * norm_x;
        x[0] -= alpha;
        let vnorm2: f64 = x.iter().map(|z| z.norm_sqr()).sum();
        if vnorm2 == 0.0 {
            continue;
        }
        let tau = 2.0 / vnorm2;

        // h ← P h P with P = I − τ v v† acting on rows/cols k+1..n
        // left: h[i,:] for i in k+1..n
        for j in 0..n {
            let mut dot = C64::ZERO;
            for (r, xi) in x.iter().enumerate() {
                dot += xi.conj() * h[(k + 1 + r, j)];
            }
            dot *= tau;
            for (r, xi) in x.iter().enumerate() {
                h[(k + 1 + r, j)] -= xi * dot;
            }
        }
        // right: h[:,j] for j in k+1..n
        for i in 0..n {
            let mut dot = C64::ZERO;
            for (r, xj) in x.iter().enumerate() {
                dot += h[(i, k + 1 + r)] * xj;
            }
            dot *= tau;
            for (r, xj) in x.iter().enumerate() {
                h[(i, k + 1 + r)] -= dot * xj.conj();
            }
        }
        // accumulate q ← q P
        for i in 0..n {
            let mut dot = C64::ZERO;
            for (r, xj) in x.iter().enumerate() {
                dot += q[(i, k + 1 + r)] * xj;
            }
            dot *= tau;
            for (r, xj) in x.iter().enumerate() {
                q[(i, k + 1 + r)] -= dot * xj.conj();
            }
        }
        // clean the column we just zeroed
        for i in k + 2..n {
            h[(i, k)] = C64::ZERO;
        }
        h[(k + 1, k)] = alpha;
    }
    (h, q)
}

/// Complex Givens rotation [[c, s], [−s̄, c]] with real c that zeroes `g` in
/// (f, g).
fn givens(f: C64, g: C64) -> (f64, C64) {
    if g == C64::ZERO {
        return (1.0, C64::ZERO);
    }
    if f == C64::ZERO {
        return (0.0, g.conj() / g.norm());
    }
    let d = (f.norm_sqr() + g.norm_sqr()).sqrt();
    let cc = f.norm() / d;
    let s = (f / f.norm()) * g.conj() / d;
    (cc, s)
}

/// Wilkinson shift: eigenvalue of the trailing 2×2 block closest to its lower
/// right entry.
fn wilkinson_shift(a: C64, b: C64, cc: C64, d: C64) -> C64 {
    let tr = a + d;
    let det = a * d - b * cc;
    let disc = (tr * tr - 4.0 * det).sqrt();
    let l1 = (tr + disc) * 0.5;
    let l2 = (tr - disc) * 0.5;
    if (l1 - d).norm() <= (l2 - d).norm() {
        l1
    } else {
        l2
    }
}

/// Shifted QR iteration with deflation on an upper Hessenberg matrix.
/// Accumulates rotations into `q`; on exit `t` is upper triangular.
///
/// Each sweep is an explicit shifted step: factor `T − μI = G₀†…G_m†·R` with
/// Givens rotations on the subdiagonal, then form `R·G₀†…G_m† + μI`.
fn qr_iterate(t: &mut ComplexMatrix, q: &mut ComplexMatrix, scale: f64) -> Result<(), NumError> {
    let n = t.rows();
    let eps_scale = DEFLATE_EPS * scale.max(f64::MIN_POSITIVE);
    let mut hi = n - 1;
    let mut sweeps_left = MAX_SWEEPS_PER_EIGENVALUE * n;
    let mut stagnation = 0usize;

    let negligible = |t: &ComplexMatrix, k: usize| -> bool {
        let sub = t[(k, k - 1)].norm();
        let local = t[(k - 1, k - 1)].norm() + t[(k, k)].norm();
        sub <= DEFLATE_EPS * local.max(f64::MIN_POSITIVE) || sub <= eps_scale
    };

    while hi > 0 {
        if negligible(t, hi) {
            t[(hi, hi - 1)] = C64::ZERO;
            hi -= 1;
            stagnation = 0;
            continue;
        }

        // active block [lo..=hi]: walk up to the first negligible subdiagonal
        let mut lo = hi;
        while lo > 0 && !negligible(t, lo) {
            lo -= 1;
        }
        if lo > 0 {
            t[(lo, lo - 1)] = C64::ZERO;
        }

        if sweeps_left == 0 {
            let worst = (1..=hi).map(|k| t[(k, k - 1)].norm()).fold(0.0, f64::max);
            return Err(NumError::NonConvergence { residual: worst });
        }
        sweeps_left -= 1;
        stagnation += 1;

        // Wilkinson shift, with an exceptional shift when progress stalls
        let mu = if stagnation.is_multiple_of(12) {
            t[(hi, hi)] + 0.75 * t[(hi, hi - 1)].norm()
        } else {
            wilkinson_shift(
                t[(hi - 1, hi - 1)],
                t[(hi - 1, hi)],
                t[(hi, hi - 1)],
                t[(hi, hi)],
            )
        };

        for i in lo..=hi {
            t[(i, i)] -= mu;
        }

        // left sweep: G_i zeroes the subdiagonal entry (i+1, i)
        let mut rots: Vec<(f64, C64)> = Vec::with_capacity(hi - lo);
        for i in lo..hi {
            let (cc, s) = givens(t[(i, i)], t[(i + 1, i)]);
            rots.push((cc, s));
            for j in i..n {
                let a = t[(i, j)];
                let b = t[(i + 1, j)];
                t[(i, j)] = cc * a + s * b;
                t[(i + 1, j)] = -s.conj() * a + cc * b;
            }
            t[(i + 1, i)] = C64::ZERO;
        }

        // right sweep: T ← T·G₀†…G_m†, Q ← Q·G₀†…G_m†
        for (k, &(cc, s)) in rots.iter().enumerate() {
            let col = lo + k;
            for r in 0..=(col + 1) {
                let a = t[(r, col)];
                let b = t[(r, col + 1)];
                t[(r, col)] = cc * a + s.conj() * b;
                t[(r, col + 1)] = -s * a + cc * b;
            }
            for r in 0..n {
                let a = q[(r, col)];
                let b = q[(r, col + 1)];
                q[(r, col)] = cc * a + s.conj() * b;
                q[(r, col + 1)] = -s * a + cc * b;
            }
        }

        for i in lo..=hi {
            t[(i, i)] += mu;
        }
    }
    Ok(())
}

/// Right eigenvectors of `M = Q T Q†` by back-substitution on the triangular
/// factor. Near-defective pivots are floored at `eps·‖M‖` so a vector always
/// comes out; the condition estimate downstream reports the damage.
fn eigenvectors_from_schur(
    t: &ComplexMatrix,
    q: &ComplexMatrix,
    eigenvalues: &[C64],
    scale: f64,
) -> ComplexMatrix {
    let n = t.rows();
    let floor = 1e-15 * scale.max(f64::MIN_POSITIVE);
    let mut v = ComplexMatrix::zeros(n, n);
    let mut y = vec![C64::ZERO; n];

    for (idx, &lambda) in eigenvalues.iter().enumerate() {
        for yi in y.iter_mut() {
            *yi = C64::ZERO;
        }
        y[idx] = C64::ONE;
        for i in (0..idx).rev() {
            let mut rhs = C64::ZERO;
            for j in (i + 1)..=idx {
                rhs -= t[(i, j)] * y[j];
            }
            let mut denom = t[(i, i)] - lambda;
            if denom.norm() < floor {
                denom = C64::new(floor, 0.0);
            }
            y[i] = rhs / denom;
        }
        // back to the original basis
        let mut col = vec![C64::ZERO; n];
        for r in 0..n {
            let mut acc = C64::ZERO;
            for k in 0..=idx {
                acc += q[(r, k)] * y[k];
            }
            col[r] = acc;
        }
        let norm = col.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        // deterministic phase: largest-magnitude entry made real positive
        let mut big = C64::ONE;
        let mut big_mag = 0.0;
        for z in &col {
            if z.norm() > big_mag {
                big_mag = z.norm();
                big = *z;
            }
        }
        let phase = if big_mag > 0.0 {
            big.conj() / big_mag
        } else {
            C64::ONE
        };
        for (r, z) in col.iter().enumerate() {
            v[(r, idx)] = z * phase / norm;
        }
    }
    v
}
