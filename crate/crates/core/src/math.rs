//! Small math helpers shared across modules.

use nalgebra::{Matrix3, Vector3};

/// Wrap an angle to (-π, π].
pub fn wrap_angle(a: f64) -> f64 {
    let mut x = a.rem_euclid(2.0 * std::f64::consts::PI);
    if x > std::f64::consts::PI {
        x -= 2.0 * std::f64::consts::PI;
    }
    x
}

/// Rotation matrix from body to inertial frame for Euler angles (φ, θ, ψ),
/// i.e. R_Ib such that v_inertial = R_Ib * v_body.
pub fn rotation_body_to_inertial(phi: f64, theta: f64, psi: f64) -> Matrix3<f64> {
    let (sph, cph) = phi.sin_cos();
    let (sth, cth) = theta.sin_cos();
    let (sps, cps) = psi.sin_cos();
    Matrix3::new(
        cth * cps,
        sph * sth * cps - cph * sps,
        cph * sth * cps + sph * sps,
        cth * sps,
        sph * sth * sps + cph * cps,
        cph * sth * sps - sph * cps,
        -sth,
        sph * cth,
        cph * cth,
    )
}

/// Euler rate matrix ε(φ, θ) mapping body rates to Euler angle rates,
/// θ̇ = ε(φ, θ) ω. Singular at |θ| = π/2.
pub fn euler_rate_matrix(phi: f64, theta: f64) -> Matrix3<f64> {
    let (sph, cph) = phi.sin_cos();
    let cth = theta.cos();
    let tth = theta.tan();
    Matrix3::new(
        1.0,
        sph * tth,
        cph * tth,
        0.0,
        cph,
        -sph,
        0.0,
        sph / cth,
        cph / cth,
    )
}

/// Body rates for a steady state with Euler rates (0, 0, ψ̇):
/// ω = ε(φ,θ)⁻¹ [0, 0, ψ̇].
pub fn body_rates_for_turn(phi: f64, theta: f64, psi_dot: f64) -> Vector3<f64> {
    let (sph, cph) = phi.sin_cos();
    let (sth, cth) = theta.sin_cos();
    Vector3::new(-psi_dot * sth, psi_dot * sph * cth, psi_dot * cph * cth)
}

pub fn clamp(x: f64, lo: f64, hi: f64) -> f64 {
    x.max(lo).min(hi)
}
