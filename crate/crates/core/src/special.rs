//! Integer-order Bessel functions of the first kind.
//!
//! Rows `J_0(x) … J_n(x)` come from Miller's backward recurrence normalized
//! with the Neumann sum `J_0 + 2 Σ J_{2k} = 1`. Backward recurrence is the
//! stable direction for orders above the argument, which is where the
//! transport tails live. Negative orders are never stored; callers fold them
//! with `J_{−n} = (−1)ⁿ J_n`.

/// Γ(2/3).
const GAMMA_TWO_THIRDS: f64 = 1.354_117_939_426_400_4;

const RESCALE_ABOVE: f64 = 1e250;
const RESCALE_BY: f64 = 1e-250;

/// `J_0(x) … J_{n_max}(x)` for one argument.
#[derive(Debug, Clone, PartialEq)]
pub struct BesselRow {
    pub x: f64,
    pub values: Vec<f64>,
}

impl BesselRow {
    /// `J_n(x)` for any integer order; orders beyond the row are treated as zero.
    pub fn get(&self, n: i64) -> f64 {
        let k = n.unsigned_abs() as usize;
        let v = self.values.get(k).copied().unwrap_or(0.0);
        if n < 0 && k % 2 == 1 {
            -v
        } else {
            v
        }
    }

    pub fn n_max(&self) -> usize {
        self.values.len() - 1
    }

    /// `J_0 + 2 Σ_{k≥1} J_{2k}`, which is 1 when the row covers the tail.
    pub fn neumann_sum(&self) -> f64 {
        self.values
            .iter()
            .enumerate()
            .map(|(n, v)| match n {
                0 => *v,
                n if n % 2 == 0 => 2.0 * v,
                _ => 0.0,
            })
            .sum()
    }
}

/// Order beyond which `|J_n(x)| < 1e−15`: `ceil(|x| + 12·|x|^{1/3} + 20)`.
pub fn tail_cutoff(x: f64) -> usize {
    let x = x.abs();
    (x + 12.0 * x.cbrt() + 20.0).ceil() as usize
}

/// `J_n(x)` for `n ≥ 0`.
pub fn bessel_j(n: usize, x: f64) -> f64 {
    if x == 0.0 {
        return if n == 0 { 1.0 } else { 0.0 };
    }
    bessel_row(n, x).values[n]
}

/// `J_0(x) … J_{n_max}(x)`.
pub fn bessel_row(n_max: usize, x: f64) -> BesselRow {
    let mut values = vec![0.0; n_max + 1];
    if x == 0.0 {
        values[0] = 1.0;
        return BesselRow { x, values };
    }
    let ax = x.abs();

    // Start far enough above both the requested order and the argument that
    // the arbitrary seed has decayed below double precision.
    let top = n_max.max(tail_cutoff(ax)) + 16 + (2.0 * (ax + n_max as f64).sqrt()) as usize;
    let start = top + (top % 2);

    let keep = n_max.min(start);
    let mut upper = 0.0_f64; // f_{k+1}
    let mut current = 1e-30_f64; // f_k, seeded at k = start
    let mut even_sum = 0.0_f64;
    let mut k = start;
    loop {
        if k <= keep {
            values[k] = current;
        }
        if k % 2 == 0 {
            even_sum += if k == 0 { current } else { 2.0 * current };
        }
        if k == 0 {
            break;
        }
        let lower = (2.0 * k as f64 / ax) * current - upper;
        upper = current;
        current = lower;
        k -= 1;
        if current.abs() > RESCALE_ABOVE {
            current *= RESCALE_BY;
            upper *= RESCALE_BY;
            even_sum *= RESCALE_BY;
            for v in values.iter_mut().skip(k + 1) {
                *v *= RESCALE_BY;
            }
        }
    }

    let norm = 1.0 / even_sum;
    for (n, v) in values.iter_mut().enumerate() {
        *v *= norm;
        if x < 0.0 && n % 2 == 1 {
            *v = -*v;
        }
    }
    BesselRow { x, values }
}

/// Large-order estimate `J_n(n) ≈ (2/(9n))^{1/3} / Γ(2/3)`.
pub fn asymptotic_jnn(n: usize) -> f64 {
    assert!(n >= 1, "asymptotic_jnn needs n >= 1");
    (2.0 / (9.0 * n as f64)).cbrt() / GAMMA_TWO_THIRDS
}

#[cfg(test)]
pub(crate) mod oracle {
    //! Independent reference evaluations used only by tests.

    /// Power series `Σ (−1)^k (x/2)^{n+2k} / (k!(n+k)!)`; accurate for modest x.
    pub fn series(n: usize, x: f64) -> f64 {
        let half = x / 2.0;
        let mut term = 1.0;
        for k in 1..=n {
            term *= half / k as f64;
        }
        let mut sum = term;
        let mut k = 0usize;
        loop {
            k += 1;
            term *= -half * half / (k as f64 * (n + k) as f64);
            sum += term;
            if term.abs() < 1e-18 * sum.abs().max(1e-300) && k > 5 {
                break;
            }
            if k > 500 {
                break;
            }
        }
        sum
    }

    /// Bessel's integral `(1/π) ∫_0^π cos(nτ − x sin τ) dτ` by the trapezoid
    /// rule, which converges geometrically for this periodic integrand.
    pub fn integral(n: usize, x: f64) -> f64 {
        let m = 2 * (n + x.abs() as usize) + 200;
        let h = std::f64::consts::PI / m as f64;
        let f = |tau: f64| (n as f64 * tau - x * tau.sin()).cos();
        let mut s = 0.5 * (f(0.0) + f(std::f64::consts::PI));
        for i in 1..m {
            s += f(i as f64 * h);
        }
        s * h / std::f64::consts::PI
    }
}
