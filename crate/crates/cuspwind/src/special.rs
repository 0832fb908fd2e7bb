//! Real special functions on the ranges the asymptotics need: Gamma on
//! (0, 2), zeta off the pole, the Dirichlet series
//! `K_b(q) = sum_{l>=1} exp(-l q) l^{1-2b}`, its Mellin principal term
//! `Gamma(2-2b) q^{2b-2} + zeta(2b-1)`, and a fast evaluator for general
//! exponentially damped power sums used by the pressure tails.

use std::f64::consts::PI;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum SpecialError {
    #[error("argument {x} outside the supported range {range}")]
    OutOfRange { x: f64, range: &'static str },
    #[error("argument {s} too close to the pole at 1")]
    NearPole { s: f64 },
}

const LANCZOS_G: f64 = 7.0;
const LANCZOS: [f64; 9] = [
    0.999_999_999_999_809_93,
    676.520_368_121_885_1,
    -1_259.139_216_722_402_8,
    771.323_428_777_653_13,
    -176.615_029_162_140_59,
    12.507_343_278_686_905,
    -0.138_571_095_265_720_12,
    9.984_369_578_019_571_6e-6,
    1.505_632_735_149_311_6e-7,
];

/// Gamma for any positive real (Lanczos; reflection below 1/2).
fn gamma_real(x: f64) -> f64 {
    if x < 0.5 {
        PI / ((PI * x).sin() * gamma_real(1.0 - x))
    } else {
        let z = x - 1.0;
        let mut acc = LANCZOS[0];
        for (i, &c) in LANCZOS.iter().enumerate().skip(1) {
            acc += c / (z + i as f64);
        }
        let t = z + LANCZOS_G + 0.5;
        (2.0 * PI).sqrt() * t.powf(z + 0.5) * (-t).exp() * acc
    }
}

/// `Gamma(x)` on `(0, 2)`, at least `1e-6` away from 0.
pub fn gamma_fn(x: f64) -> Result<f64, SpecialError> {
    if !(x >= 1e-6 && x < 2.0) {
        return Err(SpecialError::OutOfRange {
            x,
            range: "[1e-6, 2)",
        });
    }
    Ok(gamma_real(x))
}

/// Alternating series `sum (-1)^k a_k` accelerated with the Chebyshev
/// weights of Cohen, Rodriguez-Villegas and Zagier; error decays like
/// `(3 + sqrt 8)^{-n}`.
fn alternating_sum(n: usize, a: impl Fn(usize) -> f64) -> f64 {
    let mut d = (3.0 + 8.0_f64.sqrt()).powi(n as i32);
    d = (d + 1.0 / d) / 2.0;
    let mut b = -1.0;
    let mut c = -d;
    let mut s = 0.0;
    for k in 0..n {
        c = b - c;
        s += c * a(k);
        let kf = k as f64;
        let nf = n as f64;
        b *= (kf + nf) * (kf - nf) / ((kf + 0.5) * (kf + 1.0));
    }
    s / d
}

fn eta(s: f64) -> f64 {
    alternating_sum(52, |k| ((k + 1) as f64).powf(-s))
}

/// Riemann zeta for `s > 0`, `s != 1`, via `zeta = eta / (1 - 2^{1-s})`.
fn zeta_positive(s: f64) -> f64 {
    eta(s) / (1.0 - 2.0_f64.powf(1.0 - s))
}

/// Zeta on the full real line except the pole; the reflection formula
/// covers `s < 1/2`.
pub(crate) fn zeta_any(s: f64) -> f64 {
    if s.abs() < 1e-8 {
        // zeta(s) = -1/2 - s ln(2 pi)/2 + O(s^2)
        return -0.5 - s * (2.0 * PI).ln() / 2.0;
    }
    if s >= 0.5 {
        zeta_positive(s)
    } else {
        2.0_f64.powf(s) * PI.powf(s - 1.0) * (PI * s / 2.0).sin() * gamma_real(1.0 - s)
            * zeta_positive(1.0 - s)
    }
}

/// `zeta(s)` on `(0, 1) U (1, inf)`, guarded `1e-4` away from the pole.
pub fn zeta_fn(s: f64) -> Result<f64, SpecialError> {
    if !(s > 0.0) {
        return Err(SpecialError::OutOfRange { x: s, range: "(0, inf)" });
    }
    if (s - 1.0).abs() <= 1e-4 {
        return Err(SpecialError::NearPole { s });
    }
    Ok(zeta_positive(s))
}

/// Parameters of the Dirichlet series in the regime `2b - 1 in (0, 1)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DirichletQuery {
    b: f64,
    q: f64,
}

impl DirichletQuery {
    pub fn new(b: f64, q: f64) -> Result<Self, SpecialError> {
        if !(b > 0.5 && b < 1.0) {
            return Err(SpecialError::OutOfRange {
                x: b,
                range: "(1/2, 1)",
            });
        }
        if !(q > 0.0) {
            return Err(SpecialError::OutOfRange { x: q, range: "(0, inf)" });
        }
        Ok(Self { b, q })
    }

    pub fn b(&self) -> f64 {
        self.b
    }

    pub fn q(&self) -> f64 {
        self.q
    }
}

/// Direct summation of `sum_{l>=1} exp(-l q) l^{1-2b}` for any real `b` and
/// `q > 0`; stops once the geometric tail bound drops below `rel_tol` times
/// the partial sum.
pub fn dirichlet_sum(b: f64, q: f64, rel_tol: f64) -> f64 {
    assert!(q > 0.0, "dirichlet_sum needs q > 0");
    let e = 1.0 - 2.0 * b;
    let decay = (-q).exp();
    let mut acc = 0.0f64;
    let mut l: u64 = 1;
    loop {
        let lf = l as f64;
        let term = (-q * lf + e * lf.ln()).exp();
        acc += term;
        // Once the per-term growth factor of l^e is tame, the tail is
        // dominated by a geometric series with ratio decay * growth.
        let growth = if e > 0.0 {
            (1.0 + 1.0 / lf).powf(e)
        } else {
            1.0
        };
        let ratio = decay * growth;
        if ratio < 1.0 {
            let tail_bound = term * ratio / (1.0 - ratio);
            if tail_bound < rel_tol * acc && lf > e.max(0.0) / q {
                return acc;
            }
        }
        l += 1;
        if l > 200_000_000 {
            return acc;
        }
    }
}

/// `K_b(q)` for a validated query (direct summation).
pub fn dirichlet_k(query: &DirichletQuery, rel_tol: f64) -> f64 {
    dirichlet_sum(query.b, query.q, rel_tol)
}

/// Principal term of the Mellin expansion: `Gamma(2-2b) q^{2b-2} + zeta(2b-1)`.
pub fn mellin_principal(b: f64, q: f64) -> Result<f64, SpecialError> {
    if !(q > 0.0) {
        return Err(SpecialError::OutOfRange { x: q, range: "(0, inf)" });
    }
    let g = gamma_fn(2.0 - 2.0 * b)?;
    let z = zeta_fn(2.0 * b - 1.0)?;
    Ok(g * q.powf(2.0 * b - 2.0) + z)
}

/// One row of the power-law comparability table.
#[derive(Debug, Clone, Copy)]
pub struct ComparabilityRow {
    pub q: f64,
    /// `K_b(q) / (Gamma(2-2b) q^{2b-2})`
    pub ratio: f64,
}

#[derive(Debug, Clone)]
pub struct ComparabilityTable {
    pub rows: Vec<ComparabilityRow>,
    /// Empirical comparability constant: max of `max(ratio, 1/ratio)`.
    pub z: f64,
}

/// Ratios of `K_b(q)` against the pure power `Gamma(2-2b) q^{2b-2}` over a
/// decreasing grid of `q` values.
pub fn comparability_check(b: f64, q_grid: &[f64]) -> Result<ComparabilityTable, SpecialError> {
    DirichletQuery::new(b, *q_grid.first().unwrap_or(&1.0))?;
    let g = gamma_fn(2.0 - 2.0 * b)?;
    let mut rows = Vec::with_capacity(q_grid.len());
    let mut z = 1.0f64;
    for &q in q_grid {
        let k = dirichlet_sum(b, q, 1e-9);
        let ratio = k / (g * q.powf(2.0 * b - 2.0));
        z = z.max(ratio.max(1.0 / ratio));
        rows.push(ComparabilityRow { q, ratio });
    }
    Ok(ComparabilityTable { rows, z })
}

// ---------------------------------------------------------------------------
// Exponentially damped power sums S_c(q) = sum_{m>=1} exp(-q m) m^{-c}.
//
// Small q is the hard regime; there the polylogarithm expansion
//   S_c(q) = Gamma(1-c) q^{c-1} + sum_{k>=0} zeta(c-k) (-q)^k / k!
// converges for q < 2 pi. At integer c >= 1 the Gamma pole cancels against
// one zeta pole; those points are crossed by linear interpolation from
// c +/- delta, which keeps the evaluator total in c.
// ---------------------------------------------------------------------------

const SUM_DIRECT_Q: f64 = 0.05;
const POLE_NUDGE: f64 = 2e-5;

fn exp_power_sum_direct(c: f64, q: f64) -> f64 {
    let mut acc = 0.0f64;
    let peak = (-c / q).max(1.0);
    let mut m: u64 = 1;
    loop {
        let mf = m as f64;
        let term = (-q * mf - c * mf.ln()).exp();
        acc += term;
        if mf > peak && term < 1e-18 * acc {
            return acc;
        }
        m += 1;
        if m > 100_000_000 {
            return acc;
        }
    }
}

fn exp_power_sum_expansion(c: f64, q: f64) -> f64 {
    let mut acc = gamma_real_signed(1.0 - c) * q.powf(c - 1.0);
    let mut qpow = 1.0;
    let mut fact = 1.0;
    for k in 0..=14u32 {
        if k > 0 {
            qpow *= -q;
            fact *= k as f64;
        }
        acc += zeta_any(c - k as f64) * qpow / fact;
    }
    acc
}

/// Gamma on the real line minus the non-positive integers.
fn gamma_real_signed(x: f64) -> f64 {
    if x > 0.0 {
        gamma_real(x)
    } else {
        PI / ((PI * x).sin() * gamma_real(1.0 - x))
    }
}

/// `S_c(q) = sum_{m>=1} exp(-q m) m^{-c}` for `q > 0` (any real `c`), or
/// `q = 0` with `c > 1` where it degenerates to `zeta(c)`.
pub fn exp_power_sum(c: f64, q: f64) -> f64 {
    assert!(q >= 0.0, "exp_power_sum needs q >= 0");
    if q == 0.0 {
        assert!(c > 1.0, "exp_power_sum at q = 0 needs c > 1");
        return zeta_any(c);
    }
    if q >= SUM_DIRECT_Q {
        return exp_power_sum_direct(c, q);
    }
    let nearest = c.round();
    if nearest >= 1.0 && (c - nearest).abs() < POLE_NUDGE {
        let lo = exp_power_sum_expansion(nearest - POLE_NUDGE, q);
        let hi = exp_power_sum_expansion(nearest + POLE_NUDGE, q);
        let t = (c - (nearest - POLE_NUDGE)) / (2.0 * POLE_NUDGE);
        return lo + t * (hi - lo);
    }
    exp_power_sum_expansion(c, q)
}

/// `sum_{m >= m_start} exp(-q m) m^{-c}`.
pub fn exp_power_sum_from(c: f64, q: f64, m_start: u64) -> f64 {
    if m_start <= 1 {
        return exp_power_sum(c, q);
    }
    let mut head = 0.0f64;
    for m in 1..m_start {
        let mf = m as f64;
        head += (-q * mf - c * mf.ln()).exp();
    }
    (exp_power_sum(c, q) - head).max(0.0)
}

/// `sum_{m>=1} exp(-q m) m^{-c} ln m`, as `-dS_c/dc` by central difference.
pub fn exp_power_log_sum(c: f64, q: f64) -> f64 {
    let delta = 1e-6;
    (exp_power_sum(c - delta, q) - exp_power_sum(c + delta, q)) / (2.0 * delta)
}
