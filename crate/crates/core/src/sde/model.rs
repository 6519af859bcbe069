use serde::Serialize;

use super::{c, eigenvalues, inverse, mat_real, mat_vec, noise_factorization, Mat2, Vec2, C64};
use crate::error::{Error, Result};
use crate::invfree::{InvFreeCoeffs, SteadyMoments};
use crate::linearized::DriftDiffusion;

/// Two-component Itô system dx = a(x) dt + B(x) dW with real Wiener
/// increments dW.
pub trait SdeModel: Sync {
    fn drift(&self, x: &Vec2) -> Vec2;
    /// Writes B(x) into `out`.
    fn noise_factor(&self, x: &Vec2, out: &mut Mat2);
    /// Deterministic fixed point, the default initial state.
    fn fixed_point(&self) -> Vec2;
    /// Eigenvalues of the drift Jacobian at the fixed point.
    fn rates(&self) -> [C64; 2];

    /// Largest |λ| of the drift Jacobian.
    fn max_rate(&self) -> f64 {
        let r = self.rates();
        r[0].norm().max(r[1].norm())
    }

    /// Slowest relaxation, min(−Re λ). Negative when unstable.
    fn slowest_decay(&self) -> f64 {
        let r = self.rates();
        (-r[0].re).min(-r[1].re)
    }
}

/// Linear system with constant diffusion, dx = (Mx + drive) dt + B dW, BBᵀ = Q.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LinearSDE {
    pub drift: Mat2,
    pub diffusion: Mat2,
    pub drive: Vec2,
    pub labels: [String; 2],
    factor: Mat2,
}

impl LinearSDE {
    pub fn new(drift: Mat2, diffusion: Mat2, drive: Vec2, labels: [&str; 2]) -> Result<Self> {
        let asym = (diffusion[0][1] - diffusion[1][0]).norm();
        let scale = diffusion.iter().flatten().map(|z| z.norm()).fold(0.0, f64::max);
        if asym > 1e-12 * scale {
            return Err(Error::Domain("diffusion matrix must be symmetric".into()));
        }
        Ok(LinearSDE {
            factor: noise_factorization(&diffusion),
            drift,
            diffusion,
            drive,
            labels: [labels[0].to_string(), labels[1].to_string()],
        })
    }

    /// Intensity/phase fluctuations (ε, ψ) as they stand.
    pub fn from_drift_diffusion(dd: &DriftDiffusion) -> Self {
        Self::new(mat_real(dd.drift_matrix()), mat_real(dd.diffusion_matrix()), [c(0.0); 2], ["eps", "psi"])
            .expect("diffusion built symmetric")
    }

    /// Same system in the rescaled pair (ε/(2√U), √U ψ), whose components
    /// have comparable size; pair with [`balanced_weights`].
    pub fn balanced(dd: &DriftDiffusion, u: f64) -> Self {
        let s = [0.5 / u.sqrt(), u.sqrt()];
        let m = dd.drift_matrix();
        let q = dd.diffusion_matrix();
        let mut drift = [[0.0; 2]; 2];
        let mut diff = [[0.0; 2]; 2];
        for i in 0..2 {
            for j in 0..2 {
                drift[i][j] = s[i] * m[i][j] / s[j];
                diff[i][j] = s[i] * q[i][j] * s[j];
            }
        }
        Self::new(mat_real(drift), mat_real(diff), [c(0.0); 2], ["eps_bal", "psi_bal"])
            .expect("diffusion built symmetric")
    }

    /// Fluctuations of (α, α*) around the stationary state, with the
    /// state-dependent diffusion frozen at the stationary moments.
    pub fn from_invfree(cf: &InvFreeCoeffs, m: &SteadyMoments) -> Self {
        let alpha2 = m.mean_alpha * m.mean_alpha + m.mu * C64::from_polar(1.0, 2.0 * m.theta);
        let cross = 2.0 * (cf.b + m.mean_n * cf.lam_aas);
        let diffusion = [
            [2.0 * cf.lam_aa * alpha2, c(cross)],
            [c(cross), 2.0 * (cf.lam_aa * alpha2).conj()],
        ];
        let zero = c(0.0);
        Self::new([[cf.k, zero], [zero, cf.k.conj()]], diffusion, [zero; 2], ["alpha", "alpha_conj"])
            .expect("diffusion built symmetric")
    }

    pub fn factor(&self) -> &Mat2 {
        &self.factor
    }

    /// Real drift, drive and noise factor: trajectories stay real.
    pub fn is_real(&self) -> bool {
        self.drift.iter().flatten().chain(self.factor.iter().flatten()).chain(self.drive.iter()).all(|z| z.im == 0.0)
    }

    pub fn is_stable(&self) -> bool {
        self.slowest_decay() > 0.0
    }
}

impl SdeModel for LinearSDE {
    fn drift(&self, x: &Vec2) -> Vec2 {
        let mx = mat_vec(&self.drift, x);
        [mx[0] + self.drive[0], mx[1] + self.drive[1]]
    }

    fn noise_factor(&self, _x: &Vec2, out: &mut Mat2) {
        *out = self.factor;
    }

    fn fixed_point(&self) -> Vec2 {
        match inverse(&self.drift) {
            Some(inv) => {
                let v = mat_vec(&inv, &self.drive);
                [-v[0], -v[1]]
            }
            None => [c(0.0); 2],
        }
    }

    fn rates(&self) -> [C64; 2] {
        eigenvalues(&self.drift)
    }
}

/// Injected cavity with the inversion-free medium, simulated in the doubled
/// phase space (α, α⁺): dα = (kα + a₀)dt + f_α, dα⁺ = (k*α⁺ + a₀)dt + f_α⁺,
/// ⟨f_α f_α⟩ = 2Λ_αα α², ⟨f_α f_α⁺⟩ = 2(b + Λ_αα* αα⁺).
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct InvFreeSde {
    pub coeffs: InvFreeCoeffs,
}

impl SdeModel for InvFreeSde {
    fn drift(&self, x: &Vec2) -> Vec2 {
        let k = self.coeffs.k;
        let a0 = self.coeffs.a0;
        [k * x[0] + a0, k.conj() * x[1] + a0]
    }

    fn noise_factor(&self, x: &Vec2, out: &mut Mat2) {
        let cf = &self.coeffs;
        let cross = 2.0 * (cf.b + cf.lam_aas * x[0] * x[1]);
        let d = [[2.0 * cf.lam_aa * x[0] * x[0], cross], [cross, 2.0 * cf.lam_aa.conj() * x[1] * x[1]]];
        *out = noise_factorization(&d);
    }

    fn fixed_point(&self) -> Vec2 {
        let m = -self.coeffs.a0 / self.coeffs.k;
        [m, m.conj()]
    }

    fn rates(&self) -> [C64; 2] {
        [self.coeffs.k, self.coeffs.k.conj()]
    }
}

/// Weights (ν, μ) on (ε, ψ) of the quadrature at Θ − φ₀ = `theta_rel`.
pub fn eps_psi_weights(u: f64, theta_rel: f64) -> Vec2 {
    let r = (2.0 * u).sqrt();
    [c(theta_rel.cos() / r), c(r * theta_rel.sin())]
}

/// The same quadrature in the coordinates of [`LinearSDE::balanced`].
pub fn balanced_weights(theta_rel: f64) -> Vec2 {
    let r = std::f64::consts::SQRT_2;
    [c(r * theta_rel.cos()), c(r * theta_rel.sin())]
}

/// X = α e^{−iΘ} + α* e^{iΘ} on (α, α*).
pub fn field_weights(theta: f64) -> Vec2 {
    [C64::from_polar(1.0, -theta), C64::from_polar(1.0, theta)]
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn balanced_coordinates_preserve_quadrature() {
        let dd = DriftDiffusion { a: 1.0, a12: -3.0, a21: 0.2, d_ee: 0.0, d_ep: -0.5, d_pp: 0.1 };
        let u: f64 = 7.0;
        let th = 0.37;
        let x = [c(0.3), c(-0.02)];
        let xb = [x[0] * (0.5 / u.sqrt()), x[1] * u.sqrt()];
        let w = eps_psi_weights(u, th);
        let wb = balanced_weights(th);
        let y = w[0] * x[0] + w[1] * x[1];
        let yb = wb[0] * xb[0] + wb[1] * xb[1];
        assert!((y - yb).norm() < 1e-15);
        // drift commutes with the rescaling
        let lin = LinearSDE::from_drift_diffusion(&dd);
        let bal = LinearSDE::balanced(&dd, u);
        let d = lin.drift(&x);
        let db = bal.drift(&xb);
        assert!((db[0] - d[0] * (0.5 / u.sqrt())).norm() < 1e-15);
        assert!((db[1] - d[1] * u.sqrt()).norm() < 1e-15);
    }

    #[test]
    fn invfree_fixed_point_and_rates() {
        let cf = InvFreeCoeffs { k: C64::new(-2.0, 1.0), lam_aa: c(0.0), lam_aas: 0.0, b: 0.0, a0: 3.0 };
        let m = InvFreeSde { coeffs: cf };
        let fp = m.fixed_point();
        let d = m.drift(&fp);
        assert!(d[0].norm() < 1e-15 && d[1].norm() < 1e-15);
        assert_eq!(m.slowest_decay(), 2.0);
    }

    #[test]
    fn psd_system_is_real() {
        let dd = DriftDiffusion { a: 1.0, a12: 0.0, a21: 0.0, d_ee: 1.0, d_ep: 0.0, d_pp: 2.0 };
        assert!(LinearSDE::from_drift_diffusion(&dd).is_real());
        let hm_like = DriftDiffusion { d_ee: 0.0, d_ep: -0.3, d_pp: 0.0, ..dd };
        assert!(!LinearSDE::from_drift_diffusion(&hm_like).is_real());
    }
}
