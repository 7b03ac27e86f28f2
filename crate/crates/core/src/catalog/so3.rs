//! Rotation-vector chart on SO(3).

use nalgebra::{Matrix3, Vector3};

pub fn hat(v: &Vector3<f64>) -> Matrix3<f64> {
    Matrix3::new(0.0, -v.z, v.y, v.z, 0.0, -v.x, -v.y, v.x, 0.0)
}

pub fn vee(m: &Matrix3<f64>) -> Vector3<f64> {
    Vector3::new(m[(2, 1)], m[(0, 2)], m[(1, 0)])
}

pub fn exp(q: &Vector3<f64>) -> Matrix3<f64> {
    let th = q.norm();
    let k = hat(q);
    let (a, b) = if th < 1e-4 {
        let t2 = th * th;
        (1.0 - t2 / 6.0 + t2 * t2 / 120.0, 0.5 - t2 / 24.0 + t2 * t2 / 720.0)
    } else {
        (th.sin() / th, (1.0 - th.cos()) / (th * th))
    };
    Matrix3::identity() + k * a + k * k * b
}

/// Inverse of `exp` for rotation angles below pi.
pub fn log(r: &Matrix3<f64>) -> Vector3<f64> {
    let c = ((r.trace() - 1.0) * 0.5).clamp(-1.0, 1.0);
    let th = c.acos();
    let skew = vee(&((r - r.transpose()) * 0.5));
    let f = if th < 1e-4 {
        1.0 + th * th / 6.0 + 7.0 * th.powi(4) / 360.0
    } else {
        th / th.sin()
    };
    skew * f
}

/// `J` with `d/dt exp(q + t dq) exp(q)^T = hat(J(q) dq)`.
pub fn left_jacobian(q: &Vector3<f64>) -> Matrix3<f64> {
    let th = q.norm();
    let k = hat(q);
    let (a, b) = if th < 1e-4 {
        let t2 = th * th;
        (0.5 - t2 / 24.0 + t2 * t2 / 720.0, 1.0 / 6.0 - t2 / 120.0 + t2 * t2 / 5040.0)
    } else {
        ((1.0 - th.cos()) / (th * th), (th - th.sin()) / (th * th * th))
    };
    Matrix3::identity() + k * a + k * k * b
}

pub fn rot_z(angle: f64) -> Matrix3<f64> {
    let (s, c) = angle.sin_cos();
    Matrix3::new(c, -s, 0.0, s, c, 0.0, 0.0, 0.0, 1.0)
}
