//! Single-step kernels. Scratch buffers live in [`Workspace`] so the hot
//! loop does not allocate.

use super::Dynamics;

pub(super) struct Workspace {
    pub k: [Vec<f64>; 7],
    pub tmp: Vec<f64>,
    pub err: Vec<f64>,
    /// `k[0]` already holds f(t, x) from the last accepted step.
    pub fsal_valid: bool,
}

impl Workspace {
    pub fn new(dim: usize) -> Self {
        Workspace {
            k: std::array::from_fn(|_| vec![0.0; dim]),
            tmp: vec![0.0; dim],
            err: vec![0.0; dim],
            fsal_valid: false,
        }
    }
}

fn combine(x: &[f64], h: f64, terms: &[(f64, &[f64])], out: &mut [f64]) {
    for (i, o) in out.iter_mut().enumerate() {
        let mut acc = 0.0;
        for (c, k) in terms {
            acc += c * k[i];
        }
        *o = x[i] + h * acc;
    }
}

/// Classical fourth-order Runge-Kutta step; writes into `out`.
pub(super) fn rk4<D: Dynamics + ?Sized>(sys: &D, t: f64, x: &[f64], h: f64, ws: &mut Workspace, out: &mut [f64]) {
    let [k1, k2, k3, k4, ..] = &mut ws.k;
    sys.derivative(t, x, k1);
    combine(x, h, &[(0.5, k1)], &mut ws.tmp);
    sys.derivative(t + 0.5 * h, &ws.tmp, k2);
    combine(x, h, &[(0.5, k2)], &mut ws.tmp);
    sys.derivative(t + 0.5 * h, &ws.tmp, k3);
    combine(x, h, &[(1.0, k3)], &mut ws.tmp);
    sys.derivative(t + h, &ws.tmp, k4);
    combine(
        x,
        h,
        &[(1.0 / 6.0, k1), (1.0 / 3.0, k2), (1.0 / 3.0, k3), (1.0 / 6.0, k4)],
        out,
    );
}

// Dormand-Prince 5(4) tableau.
const C: [f64; 7] = [0.0, 1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0, 1.0, 1.0];
const A21: f64 = 1.0 / 5.0;
const A3: [f64; 2] = [3.0 / 40.0, 9.0 / 40.0];
const A4: [f64; 3] = [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0];
const A5: [f64; 4] = [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0];
const A6: [f64; 5] = [
    9017.0 / 3168.0,
    -355.0 / 33.0,
    46732.0 / 5247.0,
    49.0 / 176.0,
    -5103.0 / 18656.0,
];
const B: [f64; 6] = [
    35.0 / 384.0,
    0.0,
    500.0 / 1113.0,
    125.0 / 192.0,
    -2187.0 / 6784.0,
    11.0 / 84.0,
];
// Fifth-order minus embedded fourth-order weights.
const E: [f64; 7] = [
    71.0 / 57600.0,
    0.0,
    -71.0 / 16695.0,
    71.0 / 1920.0,
    -17253.0 / 339200.0,
    22.0 / 525.0,
    -1.0 / 40.0,
];

/// One Dormand-Prince attempt. Writes the fifth-order solution into `out`
/// and returns the scaled RMS error estimate (accept when `<= 1`).
#[allow(clippy::too_many_arguments)]
pub(super) fn dopri5<D: Dynamics + ?Sized>(
    sys: &D,
    t: f64,
    x: &[f64],
    h: f64,
    rel_tol: f64,
    abs_tol: f64,
    ws: &mut Workspace,
    out: &mut [f64],
) -> f64 {
    if !ws.fsal_valid {
        sys.derivative(t, x, &mut ws.k[0]);
        ws.fsal_valid = true;
    }
    let [k1, k2, k3, k4, k5, k6, k7] = &mut ws.k;
    combine(x, h, &[(A21, k1)], &mut ws.tmp);
    sys.derivative(t + C[1] * h, &ws.tmp, k2);
    combine(x, h, &[(A3[0], k1), (A3[1], k2)], &mut ws.tmp);
    sys.derivative(t + C[2] * h, &ws.tmp, k3);
    combine(x, h, &[(A4[0], k1), (A4[1], k2), (A4[2], k3)], &mut ws.tmp);
    sys.derivative(t + C[3] * h, &ws.tmp, k4);
    combine(x, h, &[(A5[0], k1), (A5[1], k2), (A5[2], k3), (A5[3], k4)], &mut ws.tmp);
    sys.derivative(t + C[4] * h, &ws.tmp, k5);
    combine(
        x,
        h,
        &[(A6[0], k1), (A6[1], k2), (A6[2], k3), (A6[3], k4), (A6[4], k5)],
        &mut ws.tmp,
    );
    sys.derivative(t + C[5] * h, &ws.tmp, k6);
    combine(x, h, &[(B[0], k1), (B[2], k3), (B[3], k4), (B[4], k5), (B[5], k6)], out);
    sys.derivative(t + h, out, k7);

    let n = x.len();
    let mut sum = 0.0;
    for i in 0..n {
        let e = h * (E[0] * k1[i] + E[2] * k3[i] + E[3] * k4[i] + E[4] * k5[i] + E[5] * k6[i] + E[6] * k7[i]);
        ws.err[i] = e;
        let scale = abs_tol + rel_tol * x[i].abs().max(out[i].abs());
        sum += (e / scale).powi(2);
    }
    (sum / n as f64).sqrt()
}

/// Promotes `k7` to `k1` after an accepted step (first-same-as-last).
pub(super) fn dopri5_accept(ws: &mut Workspace) {
    ws.k.swap(0, 6);
    ws.fsal_valid = true;
}
