use super::{c, Mat2, C64};

/// Factor B with B·Bᵀ = D (plain transpose) for a complex symmetric 2×2 `D`.
///
/// Positive semidefinite real input gives a real pivoted Cholesky factor.
/// Otherwise the factor is complex, and the simulated coordinates live in a
/// doubled phase space where only ensemble moments are meaningful.
pub fn noise_factorization(d: &Mat2) -> Mat2 {
    let a = d[0][0];
    let e = d[1][1];
    let off = 0.5 * (d[0][1] + d[1][0]);
    let zero = c(0.0);
    if off == zero {
        return [[sqrt_pref(a), zero], [zero, sqrt_pref(e)]];
    }
    let real_input = a.im == 0.0 && e.im == 0.0 && off.im == 0.0;
    let tiny = 1e-14 * (a.norm() + e.norm() + off.norm());
    // rounding can push the Schur complement of a PSD matrix just below zero
    let root_of_rest = |rest: C64| {
        if real_input && rest.re < 0.0 && -rest.re <= tiny {
            zero
        } else {
            sqrt_pref(rest)
        }
    };
    if a.norm() >= e.norm() && a.norm() >= off.norm() {
        let l11 = sqrt_pref(a);
        let l21 = off / l11;
        return [[l11, zero], [l21, root_of_rest(e - off * off / a)]];
    }
    if e.norm() >= off.norm() {
        let u22 = sqrt_pref(e);
        let u12 = off / u22;
        return [[root_of_rest(a - off * off / e), u12], [zero, u22]];
    }
    // |off| dominates: B = [[p, iq], [r, −is]] with σ² a root of
    // P² − 2·off·P + a·e = 0 taken away from cancellation.
    let root = (off * off - a * e).sqrt();
    let p_big = if (off + root).norm() >= (off - root).norm() { off + root } else { off - root };
    let sigma = p_big.sqrt();
    let i = C64::new(0.0, 1.0);
    let p = 0.5 * (sigma + a / sigma);
    let q = 0.5 * (sigma - a / sigma);
    let r = 0.5 * (sigma + e / sigma);
    let s = 0.5 * (sigma - e / sigma);
    [[p, i * q], [r, -i * s]]
}

/// Square root with a purely imaginary result for negative reals.
fn sqrt_pref(z: C64) -> C64 {
    if z.im == 0.0 {
        if z.re >= 0.0 {
            c(z.re.sqrt())
        } else {
            C64::new(0.0, (-z.re).sqrt())
        }
    } else {
        z.sqrt()
    }
}

/// Factorization of a real symmetric matrix; the flag tells whether the factor
/// is real.
pub fn noise_factorization_real(d: [[f64; 2]; 2]) -> (Mat2, bool) {
    let b = noise_factorization(&super::mat_real(d));
    let real = b.iter().flatten().all(|z| z.im == 0.0);
    (b, real)
}

#[cfg(test)]
mod tests {
    use super::super::{mat_mul, transpose};
    use super::*;
    use proptest::prelude::*;

    fn reconstruct_err(d: &Mat2) -> f64 {
        let b = noise_factorization(d);
        let bbt = mat_mul(&b, &transpose(&b));
        let scale = d.iter().flatten().map(|z| z.norm()).fold(0.0, f64::max).max(1e-300);
        let mut err: f64 = 0.0;
        for i in 0..2 {
            for j in 0..2 {
                let target = if i == j { d[i][i] } else { 0.5 * (d[0][1] + d[1][0]) };
                err = err.max((bbt[i][j] - target).norm() / scale);
            }
        }
        err
    }

    #[test]
    fn zero_matrix() {
        let (b, real) = noise_factorization_real([[0.0, 0.0], [0.0, 0.0]]);
        assert!(real);
        assert!(b.iter().flatten().all(|z| z.norm() == 0.0));
    }

    #[test]
    fn pure_cross_diffusion_is_complex() {
        for d in [1.0, 3.7e-5, 2.0e9] {
            let m = super::super::mat_real([[0.0, d], [d, 0.0]]);
            let (_, real) = noise_factorization_real([[0.0, d], [d, 0.0]]);
            assert!(!real);
            assert!(reconstruct_err(&m) < 1e-14);
        }
        let m = super::super::mat_real([[0.0, -2.0], [-2.0, 0.0]]);
        assert!(reconstruct_err(&m) < 1e-14);
    }

    #[test]
    fn rank_one_phase_diffusion() {
        let (b, real) = noise_factorization_real([[0.0, 0.0], [0.0, 4.0]]);
        assert!(real);
        assert_eq!(b[1][1], c(2.0));
        assert_eq!(b[0][0], c(0.0));
        assert_eq!(b[0][1], c(0.0));
        assert_eq!(b[1][0], c(0.0));
    }

    #[test]
    fn psd_gives_real_triangular_factor() {
        let (b, real) = noise_factorization_real([[5.0, 2.0], [2.0, 4.0]]);
        assert!(real);
        assert_eq!(b[0][1], c(0.0));
        assert!((b[1][1].re * b[1][1].re - 3.2).abs() < 1e-14);
        // larger lower-right pivot: upper triangular; singular input
        let (b, real) = noise_factorization_real([[1.0, 2.0], [2.0, 4.0]]);
        assert!(real);
        assert_eq!(b[1][0], c(0.0));
        assert_eq!(b[0][0], c(0.0));
    }

    proptest! {
        #[test]
        fn reconstruction_real(a in -10.0f64..10.0, d in -10.0f64..10.0, e in -10.0f64..10.0) {
            let m = super::super::mat_real([[a, d], [d, e]]);
            prop_assert!(reconstruct_err(&m) < 1e-14);
        }

        #[test]
        fn reconstruction_complex(
            ar in -5.0f64..5.0, ai in -5.0f64..5.0,
            dr in -5.0f64..5.0, di in -5.0f64..5.0,
            er in -5.0f64..5.0, ei in -5.0f64..5.0,
        ) {
            let d = C64::new(dr, di);
            let m = [[C64::new(ar, ai), d], [d, C64::new(er, ei)]];
            prop_assert!(reconstruct_err(&m) < 1e-14);
        }

        #[test]
        fn psd_real_factor(l11 in -3.0f64..3.0, l21 in -3.0f64..3.0, l22 in -3.0f64..3.0) {
            let d = [[l11 * l11, l11 * l21], [l11 * l21, l21 * l21 + l22 * l22]];
            let (_, real) = noise_factorization_real(d);
            prop_assert!(real);
        }

        #[test]
        fn scale_range(exp in -12i32..12, d in 0.1f64..1.0) {
            let s = 10f64.powi(exp);
            let m = super::super::mat_real([[0.0, d * s], [d * s, 0.0]]);
            prop_assert!(reconstruct_err(&m) < 1e-14);
        }
    }
}
