//! Basis machinery: diagonalizing a single Lindblad operator to expose the
//! decoherence basis, the V-model {|1⟩, |+⟩, |−⟩} basis, state/operator
//! transforms, and the Bloch-vector picture for two-level conditioned states.

use thiserror::Error;

use crate::models::Model;
use crate::numkit::{eig_general, ComplexMatrix, NumError, C64};

#[derive(Debug, Error)]
pub enum BasisError {
    #[error(
        "operator is not normal (‖LL† − L†L‖ = {defect:.3e}); no basis exists in which it \
         describes pure decoherence"
    )]
    NotNormal { defect: f64 },
    #[error(
        "model has {count} collapse operators that cannot be simultaneously diagonalized; \
         jumps over a finite splitting cannot be read as pure decoherence in any basis"
    )]
    MultipleChannels { count: usize },
    #[error("transform matrix is not unitary (‖V†V − I‖ = {defect:.3e})")]
    NotUnitary { defect: f64 },
    #[error("dimension mismatch: transform is {transform}-dimensional, state is {state}")]
    DimensionMismatch { transform: usize, state: usize },
    #[error(transparent)]
    Num(#[from] NumError),
}

/// Unitary change of basis. Columns of `matrix` are the new basis states
/// expressed in the old coordinates.
#[derive(Clone, Debug)]
pub struct BasisTransform {
    matrix: ComplexMatrix,
    pub from_label: String,
    pub to_label: String,
}

/// Direction for [`transform_state`].
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Direction {
    /// Old coordinates → new basis: ρ̃ = V†ρV.
    Forward,
    /// New basis → old coordinates: ρ = Vρ̃V†.
    Backward,
}

impl BasisTransform {
    /// Wrap a unitary; rejects matrices with ‖V†V − I‖ > 1e-10.
    pub fn new(
        matrix: ComplexMatrix,
        from_label: impl Into<String>,
        to_label: impl Into<String>,
    ) -> Result<Self, BasisError> {
        let defect = matrix
            .adjoint()
            .matmul(&matrix)
            .sub(&ComplexMatrix::identity(matrix.rows()))
            .max_abs();
        if defect > 1e-10 {
            return Err(BasisError::NotUnitary { defect });
        }
        Ok(Self {
            matrix,
            from_label: from_label.into(),
            to_label: to_label.into(),
        })
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    pub fn dimension(&self) -> usize {
        self.matrix.rows()
    }
}

/// Diagonalize a single (normal) Lindblad operator: returns the unitary V and
/// the diagonal L̃ = V†LV, with eigenvalues ordered by ascending real part and
/// each column's largest-magnitude entry made real positive.
///
/// For the two-level model's L ∝ (σx + σz)/√2 this yields L̃ = −√γ·σz, the
/// basis in which the dissipator is pure decoherence.
pub fn diagonalize_lindblad(
    l: &ComplexMatrix,
) -> Result<(BasisTransform, ComplexMatrix), BasisError> {
    let scale = l.max_abs().max(f64::MIN_POSITIVE);
    let defect = l.matmul(&l.adjoint()).sub(&l.adjoint().matmul(l)).max_abs();
    if defect > 1e-10 * scale {
        return Err(BasisError::NotNormal { defect });
    }

    let decomp = eig_general(l)?;
    let n = l.rows();

    // sort eigenpairs by ascending real part (imaginary part breaks ties)
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| {
        let (za, zb) = (decomp.eigenvalues[a], decomp.eigenvalues[b]);
        za.re
            .partial_cmp(&zb.re)
            .unwrap()
            .then(za.im.partial_cmp(&zb.im).unwrap())
    });

    let mut v = ComplexMatrix::zeros(n, n);
    let mut diag = ComplexMatrix::zeros(n, n);
    for (new_col, &old_col) in order.iter().enumerate() {
        for r in 0..n {
            v[(r, new_col)] = decomp.right[(r, old_col)];
        }
        diag[(new_col, new_col)] = decomp.eigenvalues[old_col];
    }

    // A normal operator has orthogonal eigenvectors across distinct
    // eigenvalues; re-orthonormalize within clusters so V is unitary.
    gram_schmidt_columns(&mut v);
    fix_column_phases(&mut v);

    let transform = BasisTransform::new(v, "energy", "lindblad_diagonal")?;
    Ok((transform, diag))
}

/// Decoherence basis of a model with a single collapse operator.
///
/// Errors with [`BasisError::MultipleChannels`] for the V model: its two
/// collapse operators cannot be simultaneously diagonalized.
pub fn decoherence_basis(model: &Model) -> Result<(BasisTransform, ComplexMatrix), BasisError> {
    if model.collapse_ops.len() != 1 {
        return Err(BasisError::MultipleChannels {
            count: model.collapse_ops.len(),
        });
    }
    diagonalize_lindblad(&model.collapse_ops[0])
}

/// The V-model basis {|1⟩, |+⟩, |−⟩} with |±⟩ = (|2⟩ ± |3⟩)/√2.
///
/// In this basis the collapse operators become √γ|1⟩⟨+| and
/// √(e^{−βν}γ)|+⟩⟨1|: jumps between basis states, leaving |−⟩ untouched by
/// the bath.
pub fn v_model_pm_basis() -> BasisTransform {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let m =
        ComplexMatrix::from_real_rows(&[vec![1.0, 0.0, 0.0], vec![0.0, s, s], vec![0.0, s, -s]]);
    BasisTransform::new(m, "energy", "pm").expect("hard-coded unitary")
}

/// Transform a state (or any operator): forward is ρ̃ = V†ρV, backward is
/// Vρ̃V†. Spectrum and trace are preserved.
pub fn transform_state(
    rho: &ComplexMatrix,
    transform: &BasisTransform,
    direction: Direction,
) -> Result<ComplexMatrix, BasisError> {
    if rho.rows() != transform.dimension() || !rho.is_square() {
        return Err(BasisError::DimensionMismatch {
            transform: transform.dimension(),
            state: rho.rows(),
        });
    }
    let v = transform.matrix();
    Ok(match direction {
        Direction::Forward => v.adjoint().matmul(rho).matmul(v),
        Direction::Backward => v.matmul(rho).matmul(&v.adjoint()),
    })
}

/// Bloch vector of a two-level conditioned state in the decoherence basis
/// {|ψ−⟩, |ψ+⟩}: s_x = 2ρ₊₋ᴿ, s_y = 2ρ₊₋ᴵ, s_z = ρ₋₋ − ρ₊₊, where
/// ρ₊₋ = ⟨ψ+|ρ|ψ−⟩.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BlochVector {
    pub sx: f64,
    pub sy: f64,
    pub sz: f64,
}

impl BlochVector {
    pub fn norm(&self) -> f64 {
        (self.sx * self.sx + self.sy * self.sy + self.sz * self.sz).sqrt()
    }
}

/// Map a 2×2 conditioned state (decoherence-basis coordinates, index 0 = |ψ−⟩)
/// to its Bloch vector.
pub fn bloch_map(rho_c: &ComplexMatrix) -> BlochVector {
    assert_eq!(rho_c.rows(), 2, "bloch_map expects a 2x2 state");
    let coh = rho_c[(1, 0)]; // ρ₊₋ = ⟨ψ+|ρ|ψ−⟩
    BlochVector {
        sx: 2.0 * coh.re,
        sy: 2.0 * coh.im,
        sz: rho_c[(0, 0)].re - rho_c[(1, 1)].re,
    }
}

/// Drive vector Ω = (Δ/√2, 0, Δ/√2) of the two-level model in the
/// decoherence basis.
pub fn drive_vector(model: &Model) -> (f64, f64, f64) {
    let d = model.params.delta * std::f64::consts::FRAC_1_SQRT_2;
    (d, 0.0, d)
}

/// Coherent part of the Bloch-vector motion: ṡ = Ω × s (right-handed cross
/// product), the Rabi precession about the drive vector.
pub fn bloch_coherent_derivative(s: &BlochVector, model: &Model) -> BlochVector {
    let (ox, oy, oz) = drive_vector(model);
    BlochVector {
        sx: oy * s.sz - oz * s.sy,
        sy: oz * s.sx - ox * s.sz,
        sz: ox * s.sy - oy * s.sx,
    }
}

fn gram_schmidt_columns(v: &mut ComplexMatrix) {
    let n = v.rows();
    for j in 0..n {
        for k in 0..j {
            let mut dot = C64::ZERO;
            for r in 0..n {
                dot += v[(r, k)].conj() * v[(r, j)];
            }
            for r in 0..n {
                let prev = v[(r, k)];
                v[(r, j)] -= dot * prev;
            }
        }
        let norm: f64 = (0..n).map(|r| v[(r, j)].norm_sqr()).sum::<f64>().sqrt();
        for r in 0..n {
            v[(r, j)] /= norm;
        }
    }
}

fn fix_column_phases(v: &mut ComplexMatrix) {
    let n = v.rows();
    for j in 0..n {
        let mut big = C64::ONE;
        let mut mag = 0.0;
        for r in 0..n {
            if v[(r, j)].norm() > mag {
                mag = v[(r, j)].norm();
                big = v[(r, j)];
            }
        }
        if mag > 0.0 {
            let phase = big.conj() / mag;
            for r in 0..n {
                v[(r, j)] *= phase;
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::{build_two_level, build_v_model, thermal_state, BathSpec};
    use crate::numkit::{c, sigma_z};
    use approx::assert_abs_diff_eq;

    fn bath() -> BathSpec {
        BathSpec::ohmic(0.02, 1.0).unwrap()
    }

    #[test]
    fn two_level_lindblad_diagonalizes_to_minus_sqrt_gamma_sigma_z() {
        let m = build_two_level(0.001, bath()).unwrap();
        let (v, diag) = diagonalize_lindblad(&m.collapse_ops[0]).unwrap();
        let g = m.params.gamma.sqrt();

        // ascending real part: diag(−√γ, +√γ) = −√γ σz
        assert_abs_diff_eq!(diag[(0, 0)].re, -g, epsilon = 1e-12);
        assert_abs_diff_eq!(diag[(1, 1)].re, g, epsilon = 1e-12);
        assert!(diag[(0, 1)].norm() < 1e-12 && diag[(1, 0)].norm() < 1e-12);

        // column magnitudes: {sin, cos} of π/8 (the √((1 ∓ 1/√2)/2) pattern)
        let lo = ((1.0 - std::f64::consts::FRAC_1_SQRT_2) / 2.0_f64).sqrt();
        let hi = ((1.0 + std::f64::consts::FRAC_1_SQRT_2) / 2.0_f64).sqrt();
        let vm = v.matrix();
        assert_abs_diff_eq!(vm[(0, 0)].norm(), lo, epsilon = 1e-12);
        assert_abs_diff_eq!(vm[(1, 0)].norm(), hi, epsilon = 1e-12);
        assert_abs_diff_eq!(vm[(0, 1)].norm(), hi, epsilon = 1e-12);
        assert_abs_diff_eq!(vm[(1, 1)].norm(), lo, epsilon = 1e-12);

        // and V†LV actually reproduces the diagonal
        let back = vm.adjoint().matmul(&m.collapse_ops[0]).matmul(vm);
        assert!(back.sub(&diag).max_abs() < 1e-12);
    }

    #[test]
    fn already_diagonal_operator_keeps_identity_transform() {
        let l = sigma_z().scale(c(0.1, 0.0));
        let (v, diag) = diagonalize_lindblad(&l).unwrap();
        // ascending order swaps the two basis states; columns stay axis-aligned
        for j in 0..2 {
            let col: Vec<f64> = (0..2).map(|r| v.matrix()[(r, j)].norm()).collect();
            assert!(col.iter().any(|&x| (x - 1.0).abs() < 1e-12));
        }
        assert_abs_diff_eq!(diag[(0, 0)].re, -0.1, epsilon = 1e-12);
        assert_abs_diff_eq!(diag[(1, 1)].re, 0.1, epsilon = 1e-12);
    }

    #[test]
    fn v_model_channels_are_not_normal() {
        let m = build_v_model(1.0, 0.001, bath()).unwrap();
        assert!(matches!(
            diagonalize_lindblad(&m.collapse_ops[0]),
            Err(BasisError::NotNormal { .. })
        ));
        assert!(matches!(
            decoherence_basis(&m),
            Err(BasisError::MultipleChannels { count: 2 })
        ));
    }

    #[test]
    fn ground_state_into_decoherence_basis() {
        let m = build_two_level(0.001, bath()).unwrap();
        let (v, _) = decoherence_basis(&m).unwrap();
        let rho = transform_state(&m.ground_state(), &v, Direction::Forward).unwrap();

        // ½(I − (σx+σz)/√2)
        let q = 0.5 * std::f64::consts::FRAC_1_SQRT_2;
        assert_abs_diff_eq!(rho[(0, 0)].re, 0.5 - q, epsilon = 1e-12);
        assert_abs_diff_eq!(rho[(1, 1)].re, 0.5 + q, epsilon = 1e-12);
        assert_abs_diff_eq!(rho[(1, 0)].re, -q, epsilon = 1e-12);
        assert!(rho[(1, 0)].im.abs() < 1e-12);

        // round trip
        let back = transform_state(&rho, &v, Direction::Backward).unwrap();
        assert!(back.sub(&m.ground_state()).max_abs() < 1e-12);
    }

    #[test]
    fn pm_basis_transforms_hamiltonian_and_channels() {
        let m = build_v_model(1.0, 0.001, bath()).unwrap();
        let w = v_model_pm_basis();
        let (nu, delta) = (1.0, 0.001);

        let h = transform_state(&m.hamiltonian, &w, Direction::Forward).unwrap();
        // (ν − Δ/2)(|+⟩⟨+| + |−⟩⟨−|) − (Δ/2)(|+⟩⟨−| + |−⟩⟨+|); the tunnelling
        // sign follows from |±⟩ = (|2⟩ ± |3⟩)/√2 applied to H = ν − Δ|2⟩⟨2|
        assert_abs_diff_eq!(h[(0, 0)].re, 0.0, epsilon = 1e-15);
        assert_abs_diff_eq!(h[(1, 1)].re, nu - delta / 2.0, epsilon = 1e-15);
        assert_abs_diff_eq!(h[(2, 2)].re, nu - delta / 2.0, epsilon = 1e-15);
        assert_abs_diff_eq!(h[(1, 2)].re, -delta / 2.0, epsilon = 1e-15);
        assert_abs_diff_eq!(h[(2, 1)].re, -delta / 2.0, epsilon = 1e-15);
        assert!(h[(0, 1)].norm() < 1e-15 && h[(0, 2)].norm() < 1e-15);

        // L̃↓ = √γ|1⟩⟨+|, L̃↑ = √(e^{−βν}γ)|+⟩⟨1|
        let g = m.params.gamma;
        let ld = transform_state(&m.collapse_ops[0], &w, Direction::Forward).unwrap();
        assert_abs_diff_eq!(ld[(0, 1)].re, g.sqrt(), epsilon = 1e-14);
        let lu = transform_state(&m.collapse_ops[1], &w, Direction::Forward).unwrap();
        assert_abs_diff_eq!(
            lu[(1, 0)].re,
            ((-1.0_f64).exp() * g).sqrt(),
            epsilon = 1e-14
        );

        // |−⟩ is untouched: row 2 and column 2 vanish for both channels
        for l in [&ld, &lu] {
            for k in 0..3 {
                assert!(l[(2, k)].norm() < 1e-14, "channel produces |−⟩");
                assert!(l[(k, 2)].norm() < 1e-14, "channel consumes |−⟩");
            }
        }
    }

    #[test]
    fn ket2_projector_expands_into_pm_plus_cross_terms() {
        let w = v_model_pm_basis();
        let p2 = ComplexMatrix::ketbra(3, 1, 1);
        let t = transform_state(&p2, &w, Direction::Forward).unwrap();
        // ½(|+⟩+|−⟩)(⟨+|+⟨−|)
        for (i, j) in [(1, 1), (1, 2), (2, 1), (2, 2)] {
            assert_abs_diff_eq!(t[(i, j)].re, 0.5, epsilon = 1e-15);
            assert!(t[(i, j)].im.abs() < 1e-15);
        }
        for k in 0..3 {
            assert!(t[(0, k)].norm() < 1e-15 && t[(k, 0)].norm() < 1e-15);
        }
    }

    #[test]
    fn thermal_state_is_invariant_under_pm_transform() {
        let m = build_v_model(1.0, 0.001, bath()).unwrap();
        let th = thermal_state(&m);
        let t = transform_state(&th, &v_model_pm_basis(), Direction::Forward).unwrap();
        assert!(
            t.sub(&th).max_abs() < 1e-14,
            "excited 2x2 block ∝ I must not move"
        );
    }

    #[test]
    fn identity_transform_is_a_no_op() {
        let id = BasisTransform::new(ComplexMatrix::identity(2), "a", "b").unwrap();
        let m = build_two_level(0.001, bath()).unwrap();
        let rho = transform_state(&m.ground_state(), &id, Direction::Forward).unwrap();
        assert_eq!(rho, m.ground_state());
    }

    #[test]
    fn transform_preserves_spectrum() {
        let m = build_two_level(0.001, bath()).unwrap();
        let (v, _) = decoherence_basis(&m).unwrap();
        let rho = ComplexMatrix::from_rows(&[
            vec![c(0.7, 0.0), c(0.1, 0.2)],
            vec![c(0.1, -0.2), c(0.3, 0.0)],
        ]);
        let t = transform_state(&rho, &v, Direction::Forward).unwrap();
        let mut before: Vec<f64> = eig_general(&rho)
            .unwrap()
            .eigenvalues
            .iter()
            .map(|z| z.re)
            .collect();
        let mut after: Vec<f64> = eig_general(&t)
            .unwrap()
            .eigenvalues
            .iter()
            .map(|z| z.re)
            .collect();
        before.sort_by(|a, b| a.partial_cmp(b).unwrap());
        after.sort_by(|a, b| a.partial_cmp(b).unwrap());
        for (b, a) in before.iter().zip(&after) {
            assert_abs_diff_eq!(b, a, epsilon = 1e-10);
        }
        assert_abs_diff_eq!(t.trace().re, rho.trace().re, epsilon = 1e-12);
    }

    #[test]
    fn bloch_ground_state_is_a_fixed_point_of_the_drive() {
        let m = build_two_level(0.001, bath()).unwrap();
        let (v, _) = decoherence_basis(&m).unwrap();
        let rho = transform_state(&m.ground_state(), &v, Direction::Forward).unwrap();
        let s = bloch_map(&rho);

        let q = std::f64::consts::FRAC_1_SQRT_2;
        assert_abs_diff_eq!(s.sx, -q, epsilon = 1e-12);
        assert_abs_diff_eq!(s.sy, 0.0, epsilon = 1e-12);
        assert_abs_diff_eq!(s.sz, -q, epsilon = 1e-12);

        // antiparallel to Ω ⇒ stationary
        let ds = bloch_coherent_derivative(&s, &m);
        assert!(ds.norm() < 1e-15);
    }

    #[test]
    fn bloch_cross_product_orientation() {
        let m = build_two_level(0.001, bath()).unwrap();
        let s = BlochVector {
            sx: 1.0,
            sy: 0.0,
            sz: 0.0,
        };
        let ds = bloch_coherent_derivative(&s, &m);
        // Ω × x̂ = (0, Δ/√2, 0) for right-handed orientation
        assert_abs_diff_eq!(ds.sx, 0.0, epsilon = 1e-18);
        assert_abs_diff_eq!(
            ds.sy,
            0.001 * std::f64::consts::FRAC_1_SQRT_2,
            epsilon = 1e-18
        );
        assert_abs_diff_eq!(ds.sz, 0.0, epsilon = 1e-18);
    }

    #[test]
    fn maximally_mixed_maps_to_origin() {
        let rho = ComplexMatrix::identity(2).scale(c(0.5, 0.0));
        let s = bloch_map(&rho);
        assert_eq!((s.sx, s.sy, s.sz), (0.0, 0.0, 0.0));
    }

    #[test]
    fn transform_rejects_mismatched_dimensions() {
        let rho2 = ComplexMatrix::identity(2).scale(c(0.5, 0.0));
        assert!(matches!(
            transform_state(&rho2, &v_model_pm_basis(), Direction::Forward),
            Err(BasisError::DimensionMismatch {
                transform: 3,
                state: 2
            })
        ));
    }

    #[test]
    fn non_unitary_transform_is_rejected() {
        let m = ComplexMatrix::from_real_rows(&[vec![1.0, 0.0], vec![0.0, 2.0]]);
        assert!(matches!(
            BasisTransform::new(m, "a", "b"),
            Err(BasisError::NotUnitary { .. })
        ));
    }
}
