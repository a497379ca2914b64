//! Bessel functions of the first kind for integer order and real argument.
//!
//! All orders `0..=n` at one argument come out of a single Miller backward
//! recurrence normalised with `J_0 + 2 Σ_k J_2k = 1`.

const RESCALE_AT: f64 = 1e250;

fn start_order(n_max: usize, ax: f64) -> usize {
    let top = (n_max as f64).max(ax);
    let m = top + 30.0 + (60.0 * top).sqrt();
    let m = m.ceil() as usize;
    m + (m % 2)
}

/// `J_k(x)` for `k = 0..=n_max`.
pub fn bessel_j_all(n_max: usize, x: f64) -> Vec<f64> {
    let mut out = vec![0.0; n_max + 1];
    if x == 0.0 {
        out[0] = 1.0;
        return out;
    }
    let ax = x.abs();
    let start = start_order(n_max, ax);

    // out[k] holds the unnormalised J_k for k <= n_max
    let mut next = 0.0f64; // J_{k+1}
    let mut cur = 1e-300f64; // J_k, seeded at k = start
    let mut even_sum = 0.0f64;
    for k in (0..=start).rev() {
        if k <= n_max {
            out[k] = cur;
        }
        if k % 2 == 0 && k > 0 {
            even_sum += cur;
        }
        if k == 0 {
            break;
        }
        let prev = (2.0 * k as f64 / ax) * cur - next;
        next = cur;
        cur = prev;
        if cur.abs() > RESCALE_AT {
            let s = 1.0 / RESCALE_AT;
            cur *= s;
            next *= s;
            even_sum *= s;
            for v in out.iter_mut() {
                *v *= s;
            }
        }
    }
    let norm = out[0] + 2.0 * even_sum;
    for v in out.iter_mut() {
        *v /= norm;
    }
    if x < 0.0 {
        for (k, v) in out.iter_mut().enumerate() {
            if k % 2 == 1 {
                *v = -*v;
            }
        }
    }
    out
}

/// `J_n(x)` for any integer order, using `J_{-n} = (-1)^n J_n`.
pub fn bessel_j(n: i32, x: f64) -> f64 {
    let k = n.unsigned_abs() as usize;
    let v = bessel_j_all(k, x)[k];
    if n < 0 && k % 2 == 1 {
        -v
    } else {
        v
    }
}
