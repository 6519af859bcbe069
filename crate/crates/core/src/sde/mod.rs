//! Stochastic simulation of the linear and state-dependent Langevin systems,
//! with the deterministic oracles used to validate the closed forms.

mod model;
mod noise;
mod oracle;
mod simulate;
mod welch;

pub use model::{
    balanced_weights, eps_psi_weights, field_weights, InvFreeSde, LinearSDE, SdeModel,
};
pub use noise::{noise_factorization, noise_factorization_real};
pub use oracle::{
    invfree_moment_oracle, linear_moment_oracle, ou_spectrum_oracle, LinearMoments, OracleOptions,
};
pub use simulate::{
    read_trajectory_dump, simulate, simulate_reduce, write_trajectory_dump, SimConfig,
    TrajectoryEnsemble,
};
pub use welch::{welch_estimate, WelchConfig, WelchEstimator, WelchSpectrum};

use num_complex::Complex64;

pub type C64 = Complex64;
/// Row-major 2×2 complex matrix.
pub type Mat2 = [[C64; 2]; 2];
pub type Vec2 = [C64; 2];

pub(crate) fn c(re: f64) -> C64 {
    C64::new(re, 0.0)
}

pub(crate) fn mat_real(m: [[f64; 2]; 2]) -> Mat2 {
    [[c(m[0][0]), c(m[0][1])], [c(m[1][0]), c(m[1][1])]]
}

pub(crate) fn mat_mul(a: &Mat2, b: &Mat2) -> Mat2 {
    let mut out = [[c(0.0); 2]; 2];
    for i in 0..2 {
        for j in 0..2 {
            out[i][j] = a[i][0] * b[0][j] + a[i][1] * b[1][j];
        }
    }
    out
}

pub(crate) fn mat_vec(a: &Mat2, v: &Vec2) -> Vec2 {
    [a[0][0] * v[0] + a[0][1] * v[1], a[1][0] * v[0] + a[1][1] * v[1]]
}

pub(crate) fn transpose(a: &Mat2) -> Mat2 {
    [[a[0][0], a[1][0]], [a[0][1], a[1][1]]]
}

pub(crate) fn det(a: &Mat2) -> C64 {
    a[0][0] * a[1][1] - a[0][1] * a[1][0]
}

pub(crate) fn inverse(a: &Mat2) -> Option<Mat2> {
    let d = det(a);
    if d.norm() == 0.0 || !d.is_finite() {
        return None;
    }
    Some([[a[1][1] / d, -a[0][1] / d], [-a[1][0] / d, a[0][0] / d]])
}

/// Eigenvalues of a 2×2 matrix.
pub(crate) fn eigenvalues(a: &Mat2) -> [C64; 2] {
    let half_tr = (a[0][0] + a[1][1]) * 0.5;
    let disc = (half_tr * half_tr - det(a)).sqrt();
    [half_tr + disc, half_tr - disc]
}
