//! Independent reference integrator shared by the integration tests.

#![allow(dead_code)]

use waveheat::linalg::{StateVector3, C64};

/// Adaptive Dormand–Prince 5(4) integration of `y' = f(y)` from 0 to `t`.
pub fn dopri5<const D: usize, F>(f: F, y0: [f64; D], t: f64, rtol: f64, atol: f64) -> [f64; D]
where
    F: Fn(&[f64; D]) -> [f64; D],
{
    const C: [[f64; 6]; 6] = [
        [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
        [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
        [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
        [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0, 0.0, 0.0],
        [9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0, 0.0],
        [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0],
    ];
    const E: [f64; 7] = [
        71.0 / 57600.0,
        0.0,
        -71.0 / 16695.0,
        71.0 / 1920.0,
        -17253.0 / 339200.0,
        22.0 / 525.0,
        -1.0 / 40.0,
    ];
    let mut y = y0;
    let mut now = 0.0;
    let mut h = (t / 100.0).clamp(1e-12, 1e-3);
    let mut k1 = f(&y);
    while now < t {
        h = h.min(t - now);
        let mut k = [[0.0; D]; 7];
        k[0] = k1;
        for s in 0..6 {
            let mut ys = y;
            for d in 0..D {
                ys[d] += h * (0..=s).map(|j| C[s][j] * k[j][d]).sum::<f64>();
            }
            k[s + 1] = f(&ys);
            if s == 5 {
                let mut err: f64 = 0.0;
                for d in 0..D {
                    let e = h * (0..7).map(|j| E[j] * k[j][d]).sum::<f64>();
                    let sc = atol + rtol * y[d].abs().max(ys[d].abs());
                    err = err.max((e / sc).abs());
                }
                if err <= 1.0 {
                    now += h;
                    y = ys;
                    k1 = k[6];
                }
                let factor = if err == 0.0 { 5.0 } else { (0.9 * err.powf(-0.2)).clamp(0.2, 5.0) };
                h *= factor;
            }
        }
    }
    y
}

/// `W(t)` of `dW/dt = −A(z) W` by direct integration; `A(z)` is real, so the
/// real and imaginary parts evolve separately.
pub fn ode_matrix_system(z: f64, t: f64, w0: &StateVector3, rtol: f64) -> StateVector3 {
    let s = z.sqrt();
    let rhs = |w: &[f64; 3]| [s * w[1] - w[2], -s * w[0] - w[2], 0.5 * (w[0] + w[1]) - z * w[2]];
    let re = dopri5(rhs, w0.0.map(|c| c.re), t, rtol, rtol * 1e-3);
    let im = dopri5(rhs, w0.0.map(|c| c.im), t, rtol, rtol * 1e-3);
    StateVector3([0, 1, 2].map(|i| C64::new(re[i], im[i])))
}

/// Same evolution through the scalar system `u'' + z u + θ = 0`,
/// `θ' + z θ = u'`, mapped back with `W = (u' + √z u, u' − √z u, θ)`.
pub fn ode_scalar_system(z: f64, t: f64, w0: &StateVector3, rtol: f64) -> StateVector3 {
    let s = z.sqrt();
    let rhs = |y: &[f64; 3]| [y[1], -z * y[0] - y[2], y[1] - z * y[2]];
    let lift = |part: [f64; 3]| [(part[0] - part[1]) / (2.0 * s), 0.5 * (part[0] + part[1]), part[2]];
    let drop = |y: [f64; 3]| [y[1] + s * y[0], y[1] - s * y[0], y[2]];
    let re = drop(dopri5(rhs, lift(w0.0.map(|c| c.re)), t, rtol, rtol * 1e-3));
    let im = drop(dopri5(rhs, lift(w0.0.map(|c| c.im)), t, rtol, rtol * 1e-3));
    StateVector3([0, 1, 2].map(|i| C64::new(re[i], im[i])))
}
