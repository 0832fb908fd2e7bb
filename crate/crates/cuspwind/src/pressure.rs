//! Topological pressure of the potential family
//! `phi_{alpha,q,b} = q (alpha - a1) - b log |f'|` on the induced system,
//! with Gibbs-weighted equilibrium averages (Ruelle derivatives).
//!
//! Word sums over the countable alphabet factorize through a transfer matrix
//! indexed by the terminal hyperbolic letter. Each symbol enters with its
//! exact `log |f'|` range over the part of its cylinder that admits a
//! continuation; the infimum/supremum weights give certified lower/upper
//! matrices and the midpoint weights define the locally-constant model whose
//! pressure is the point estimate all solvers bisect on. Parabolic powers
//! beyond the tabulated range contribute through the asymptotic form
//! `log |f'| ~ 2 log l + c` with constants fitted (and margin-padded) at the
//! table edge, summed in closed form via [`crate::special::exp_power_sum`].

use crate::geometry::Arc;
use crate::schottky::{GeneratorSet, Letter};
use crate::special::{exp_power_log_sum, exp_power_sum};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum PressureError {
    #[error("potential parameters (q = {q}, b = {b}) lie outside the finiteness region")]
    DivergentSum { q: f64, b: f64 },
    #[error(
        "parabolic tail beyond power {l} carries {share:.1}% of the single-symbol mass; increase the truncation"
    )]
    TruncationDominates { share: f64, l: u64 },
    #[error("equilibrium average of the cusp winding requires q > 0")]
    NonIntegrableObservable,
}

/// Potential parameters: target cusp-winding average, conjugate parameter,
/// dimension parameter.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PotentialParams {
    pub alpha: f64,
    pub q: f64,
    pub b: f64,
}

impl PotentialParams {
    pub fn new(alpha: f64, q: f64, b: f64) -> Self {
        Self { alpha, q, b }
    }
}

/// `true` iff the single-symbol sums of `exp(-q a1 - b log|f'|)` converge:
/// `q > 0` with `b >= 0`, or `q = 0` with `b > 1/2`.
pub fn finiteness_region(q: f64, b: f64) -> bool {
    (q > 0.0 && b >= 0.0) || (q == 0.0 && b > 0.5)
}

/// Which part of the induced alphabet enters the sums.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Alphabet {
    Full,
    /// Only the bare hyperbolic letters (a finite subshift, always summable).
    HyperbolicOnly,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PressureMethod {
    /// `log(Z_n / Z_{n-1})`; converges geometrically.
    WordSumRatio,
    /// `(1/n) log Z_n`; the definitional form, O(1/n) convergence.
    WordSumDirect,
}

/// A bracketed pressure value.
#[derive(Debug, Clone, Copy)]
pub struct PressureEstimate {
    /// Point estimate: pressure of the midpoint-weight model.
    pub value: f64,
    /// Certified lower bound (infimum weights).
    pub lower: f64,
    /// Upper bound (supremum weights, analytic tail folded in).
    pub upper: f64,
    pub n: usize,
    /// Parabolic powers above this use the fitted asymptotic tail.
    pub l_used: u64,
    /// Log-scale contribution of the analytic tail to the upper bound.
    pub tail_bound: f64,
    pub method: PressureMethod,
}

#[derive(Debug, Clone, Copy)]
struct RangeEntry {
    lo: f64,
    mid: f64,
    hi: f64,
}

#[derive(Debug, Clone, Copy)]
struct TailConstants {
    c_lo: f64,
    c_mid: f64,
    c_hi: f64,
}

/// Precomputed per-symbol geometry: exact `log |f'|` ranges over the
/// continuation-restricted cylinders, plus tail constants at the table edge.
#[derive(Debug, Clone)]
pub struct SymbolTable {
    n_letters: usize,
    l_max: u64,
    hyp: Vec<RangeEntry>,
    /// Indexed `(sign * n_letters + terminal) * l_max + (l - 1)`.
    par: Vec<RangeEntry>,
    tail: Vec<TailConstants>,
    ln_l: Vec<f64>,
}

impl SymbolTable {
    pub fn build(g: &GeneratorSet, l_max: u64) -> Self {
        let l_max = l_max.max(2);
        let n_letters = g.hyp_letter_count();
        let letters: Vec<Letter> = g.all_letters();
        let range_over_supports =
            |m: &crate::geometry::MobiusMap, forbidden: Letter| -> RangeEntry {
                let mut lo = f64::INFINITY;
                let mut hi = f64::NEG_INFINITY;
                for &next in &letters {
                    if next == forbidden {
                        continue;
                    }
                    let sub: Arc = m
                        .pullback_arc(g.letter_arc(next))
                        .expect("pullback of generator arcs");
                    let (dmin, dmax) = m.deriv_mod_range(&sub);
                    lo = lo.min(dmin.ln());
                    hi = hi.max(dmax.ln());
                }
                RangeEntry {
                    lo,
                    mid: 0.5 * (lo + hi),
                    hi,
                }
            };

        let mut hyp = Vec::with_capacity(n_letters);
        for le in g.hyp_letters() {
            let m = g.letter_map(Letter::Hyp(le));
            hyp.push(range_over_supports(m, Letter::Hyp(le.inverse())));
        }

        let mut par = Vec::with_capacity(2 * n_letters * l_max as usize);
        for sign in 0..2usize {
            for terminal in g.hyp_letters() {
                let h_map = *g.letter_map(Letter::Hyp(terminal));
                let forbidden = Letter::Hyp(terminal.inverse());
                for l in 1..=l_max {
                    let m = h_map.compose(&g.parabolic_power(sign == 1, l));
                    par.push(range_over_supports(&m, forbidden));
                }
            }
        }

        // Tail constants: log|f'| - 2 log l over the trailing window of the
        // table, padded by the observed spread so the bracket stays honest.
        let window = ((l_max / 8).max(8)).min(l_max) as usize;
        let mut tail = Vec::with_capacity(2 * n_letters);
        for block in 0..(2 * n_letters) {
            let base = block * l_max as usize;
            let mut lo_min = f64::INFINITY;
            let mut lo_max = f64::NEG_INFINITY;
            let mut hi_min = f64::INFINITY;
            let mut hi_max = f64::NEG_INFINITY;
            let mut mid_last = 0.0;
            for l in (l_max as usize - window + 1)..=(l_max as usize) {
                let e = par[base + l - 1];
                let two_ln = 2.0 * (l as f64).ln();
                lo_min = lo_min.min(e.lo - two_ln);
                lo_max = lo_max.max(e.lo - two_ln);
                hi_min = hi_min.min(e.hi - two_ln);
                hi_max = hi_max.max(e.hi - two_ln);
                mid_last = e.mid - two_ln;
            }
            tail.push(TailConstants {
                c_lo: lo_min - (lo_max - lo_min),
                c_mid: mid_last,
                c_hi: hi_max + (hi_max - hi_min),
            });
        }

        let ln_l = (1..=l_max).map(|l| (l as f64).ln()).collect();
        Self {
            n_letters,
            l_max,
            hyp,
            par,
            tail,
            ln_l,
        }
    }

    pub fn l_max(&self) -> u64 {
        self.l_max
    }

    fn par_entry(&self, sign: usize, terminal: usize, l: u64) -> RangeEntry {
        self.par[(sign * self.n_letters + terminal) * self.l_max as usize + (l - 1) as usize]
    }

    fn tail_of(&self, sign: usize, terminal: usize) -> TailConstants {
        self.tail[sign * self.n_letters + terminal]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Band {
    Lower,
    Mid,
    Upper,
}

fn pick(e: RangeEntry, band: Band) -> f64 {
    // The potential carries -b log|f'| with b >= 0: the lower weight band
    // uses the supremum of log|f'| and vice versa.
    match band {
        Band::Lower => e.hi,
        Band::Mid => e.mid,
        Band::Upper => e.lo,
    }
}

fn pick_tail(t: TailConstants, band: Band) -> f64 {
    match band {
        Band::Lower => t.c_hi,
        Band::Mid => t.c_mid,
        Band::Upper => t.c_lo,
    }
}

/// Square nonnegative matrix in row-major order; rows are "from" states.
#[derive(Debug, Clone)]
struct Mat {
    n: usize,
    a: Vec<f64>,
}

impl Mat {
    fn zero(n: usize) -> Self {
        Self {
            n,
            a: vec![0.0; n * n],
        }
    }

    fn at(&self, i: usize, j: usize) -> f64 {
        self.a[i * self.n + j]
    }

    /// `out = v M` for a row vector (state propagation appends a symbol).
    fn row_mul(&self, v: &[f64], out: &mut [f64]) {
        out.iter_mut().for_each(|x| *x = 0.0);
        for i in 0..self.n {
            let vi = v[i];
            if vi == 0.0 {
                continue;
            }
            for j in 0..self.n {
                out[j] += vi * self.at(i, j);
            }
        }
    }

    /// `out = M v` for a column vector.
    fn col_mul(&self, v: &[f64], out: &mut [f64]) {
        for i in 0..self.n {
            let mut acc = 0.0;
            for j in 0..self.n {
                acc += self.at(i, j) * v[j];
            }
            out[i] = acc;
        }
    }
}

/// Per-call weight data: the transfer matrix (without the `exp(q alpha)`
/// factor), the unconstrained first-symbol row, and tail diagnostics.
struct WeightSystem {
    mat: Mat,
    first: Vec<f64>,
    tail_share: f64,
    l_eff: u64,
}

fn effective_truncation(table: &SymbolTable, q: f64) -> u64 {
    if q > 0.0 {
        table.l_max.min(((30.0 / q).ceil() as u64).max(1000))
    } else {
        table.l_max
    }
}

/// Pure tail `sum_{l > l_eff} e^{-q l} l^{-2b}`, shared across symbol blocks.
fn pure_power_tail(table: &SymbolTable, q: f64, b: f64, l_eff: u64) -> f64 {
    let mut head = 0.0;
    for l in 1..=l_eff {
        head += (-q * l as f64 - 2.0 * b * table.ln_l[(l - 1) as usize]).exp();
    }
    (exp_power_sum(2.0 * b, q) - head).max(0.0)
}

fn weights(table: &SymbolTable, q: f64, b: f64, alphabet: Alphabet, band: Band) -> WeightSystem {
    let n = table.n_letters;
    let l_eff = effective_truncation(table, q);

    let w_hyp: Vec<f64> = table
        .hyp
        .iter()
        .map(|e| (-b * pick(*e, band)).exp())
        .collect();

    let mut par_sum = vec![0.0f64; 2 * n];
    let mut tail_total = 0.0f64;
    if alphabet == Alphabet::Full {
        let tail_pure = pure_power_tail(table, q, b, l_eff);
        for sign in 0..2 {
            for terminal in 0..n {
                let mut acc = 0.0;
                for l in 1..=l_eff {
                    let e = table.par_entry(sign, terminal, l);
                    acc += (-q * (l - 1) as f64 - b * pick(e, band)).exp();
                }
                let c = pick_tail(table.tail_of(sign, terminal), band);
                let tail = (q - b * c).exp() * tail_pure;
                tail_total += tail;
                par_sum[sign * n + terminal] = acc + tail;
            }
        }
    }

    let mut mat = Mat::zero(n);
    let mut first = vec![0.0f64; n];
    for j in 0..n {
        let par_j = par_sum[j] + par_sum[n + j];
        first[j] = w_hyp[j] + par_j;
        for i in 0..n {
            // State i is the previous terminal letter; bare letter j is
            // forbidden exactly when it cancels it (paired index i ^ 1).
            let hyp_part = if (i ^ 1) == j { 0.0 } else { w_hyp[j] };
            mat.a[i * n + j] = hyp_part + par_j;
        }
    }

    let total: f64 = first.iter().sum();
    WeightSystem {
        mat,
        first,
        tail_share: if total > 0.0 { tail_total / total } else { 0.0 },
        l_eff,
    }
}

fn normalize(v: &mut [f64]) {
    let s: f64 = v.iter().sum();
    if s > 0.0 && s.is_finite() {
        v.iter_mut().for_each(|x| *x /= s);
    }
}

/// Collatz-Wielandt bounds on `log rho(M)` after `n - 1` power steps.
fn collatz_log_bounds(m: &Mat, n: usize) -> (f64, f64) {
    let mut v = vec![1.0f64; m.n];
    let mut tmp = vec![0.0f64; m.n];
    for _ in 0..n.saturating_sub(1) {
        m.col_mul(&v, &mut tmp);
        std::mem::swap(&mut v, &mut tmp);
        normalize(&mut v);
    }
    m.col_mul(&v, &mut tmp);
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for i in 0..m.n {
        if v[i] > 0.0 {
            let r = tmp[i] / v[i];
            lo = lo.min(r);
            hi = hi.max(r);
        }
    }
    (lo.max(1e-300).ln(), hi.max(1e-300).ln())
}

/// `log(Z_n / Z_{n-1})` with `Z_k` the admissible word sums seeded by the
/// unconstrained first-symbol row.
fn ratio_log_value(first: &[f64], m: &Mat, n: usize) -> f64 {
    let mut row = first.to_vec();
    let mut tmp = vec![0.0f64; m.n];
    for _ in 0..n.saturating_sub(2) {
        m.row_mul(&row, &mut tmp);
        std::mem::swap(&mut row, &mut tmp);
        normalize(&mut row);
    }
    let z_prev: f64 = row.iter().sum();
    m.row_mul(&row, &mut tmp);
    let z: f64 = tmp.iter().sum();
    (z / z_prev).max(1e-300).ln()
}

/// `(1/n) log Z_n` on a log scale.
fn direct_log_value(first: &[f64], m: &Mat, n: usize) -> f64 {
    let mut row = first.to_vec();
    let mut tmp = vec![0.0f64; m.n];
    let mut log_scale = 0.0f64;
    for _ in 0..n - 1 {
        let s: f64 = row.iter().sum::<f64>().max(1e-300);
        log_scale += s.ln();
        row.iter_mut().for_each(|x| *x /= s);
        m.row_mul(&row, &mut tmp);
        std::mem::swap(&mut row, &mut tmp);
    }
    let s: f64 = row.iter().sum::<f64>().max(1e-300);
    (log_scale + s.ln()) / n as f64
}

/// Midpoint-model pressure value; the function every solver bisects on.
pub(crate) fn pressure_value(
    table: &SymbolTable,
    params: &PotentialParams,
    alphabet: Alphabet,
    n: usize,
) -> f64 {
    let ws = weights(table, params.q, params.b, alphabet, Band::Mid);
    params.q * params.alpha + ratio_log_value(&ws.first, &ws.mat, n)
}

pub(crate) fn pressure_core(
    table: &SymbolTable,
    params: &PotentialParams,
    alphabet: Alphabet,
    n: usize,
    method: PressureMethod,
    check_truncation: bool,
) -> Result<PressureEstimate, PressureError> {
    assert!(n >= 2, "pressure needs word length n >= 2");
    if alphabet == Alphabet::Full && !finiteness_region(params.q, params.b) {
        return Err(PressureError::DivergentSum {
            q: params.q,
            b: params.b,
        });
    }
    let shift = params.q * params.alpha;

    let mid = weights(table, params.q, params.b, alphabet, Band::Mid);
    if check_truncation && mid.tail_share > 0.10 {
        return Err(PressureError::TruncationDominates {
            share: 100.0 * mid.tail_share,
            l: mid.l_eff,
        });
    }
    let value = shift
        + match method {
            PressureMethod::WordSumRatio => ratio_log_value(&mid.first, &mid.mat, n),
            PressureMethod::WordSumDirect => direct_log_value(&mid.first, &mid.mat, n),
        };

    let low_ws = weights(table, params.q, params.b, alphabet, Band::Lower);
    let (lo_bound, _) = collatz_log_bounds(&low_ws.mat, n);
    let up_ws = weights(table, params.q, params.b, alphabet, Band::Upper);
    let (_, up_bound) = collatz_log_bounds(&up_ws.mat, n);

    // Tail contribution to the upper bound: the same matrix with the
    // analytic tail stripped from every column.
    let tail_bound = if alphabet == Alphabet::Full {
        let n_letters = table.n_letters;
        let mut stripped = up_ws.mat.clone();
        let tail_pure = pure_power_tail(table, params.q, params.b, up_ws.l_eff);
        for j in 0..n_letters {
            let hyp_w = (-params.b * pick(table.hyp[j], Band::Upper)).exp();
            let tail_j: f64 = (0..2)
                .map(|sign| {
                    let c = pick_tail(table.tail_of(sign, j), Band::Upper);
                    (params.q - params.b * c).exp() * tail_pure
                })
                .sum();
            for i in 0..n_letters {
                let floor = if (i ^ 1) == j { 0.0 } else { hyp_w };
                let idx = i * n_letters + j;
                stripped.a[idx] = (stripped.a[idx] - tail_j).max(floor);
            }
        }
        let (_, up_stripped) = collatz_log_bounds(&stripped, n);
        (up_bound - up_stripped).max(0.0)
    } else {
        0.0
    };

    Ok(PressureEstimate {
        value,
        lower: shift + lo_bound,
        upper: shift + up_bound,
        n,
        l_used: mid.l_eff,
        tail_bound,
        method,
    })
}

/// Pressure on the full induced alphabet with parabolic truncation `l_max`.
pub fn pressure(
    g: &GeneratorSet,
    params: &PotentialParams,
    n: usize,
    l_max: u64,
) -> Result<PressureEstimate, PressureError> {
    let table = SymbolTable::build(g, l_max);
    pressure_core(
        &table,
        params,
        Alphabet::Full,
        n,
        PressureMethod::WordSumRatio,
        true,
    )
}

/// Pressure restricted to the bare hyperbolic letters (a finite subshift;
/// no finiteness constraint, no tail).
pub fn pressure_hyperbolic_only(
    g: &GeneratorSet,
    params: &PotentialParams,
    n: usize,
) -> Result<PressureEstimate, PressureError> {
    let table = SymbolTable::build(g, 2);
    pressure_core(
        &table,
        params,
        Alphabet::HyperbolicOnly,
        n,
        PressureMethod::WordSumRatio,
        false,
    )
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Observable {
    /// The cusp-winding weight `a1`.
    CuspWinding,
    /// `log |f'|` (midpoint values on cylinders).
    LogDeriv,
}

struct PerronData {
    right: Vec<f64>,
    left: Vec<f64>,
}

fn perron(m: &Mat) -> PerronData {
    let n = m.n;
    let mut right = vec![1.0f64; n];
    let mut left = vec![1.0f64; n];
    let mut tmp = vec![0.0f64; n];
    let mut rho = 0.0;
    for _ in 0..500 {
        m.col_mul(&right, &mut tmp);
        let new_rho: f64 = tmp.iter().sum::<f64>() / right.iter().sum::<f64>();
        std::mem::swap(&mut right, &mut tmp);
        normalize(&mut right);
        m.row_mul(&left, &mut tmp);
        std::mem::swap(&mut left, &mut tmp);
        normalize(&mut left);
        if (new_rho - rho).abs() <= 1e-15 * new_rho.abs() {
            break;
        }
        rho = new_rho;
    }
    PerronData { right, left }
}

/// Equilibrium (Gibbs) average of an observable in the midpoint model:
/// exact stationary symbol measure from the Perron vectors, including the
/// analytic parabolic tail.
pub(crate) fn equilibrium_average_with_table(
    table: &SymbolTable,
    params: &PotentialParams,
    observable: Observable,
) -> Result<f64, PressureError> {
    if observable == Observable::CuspWinding && !(params.q > 0.0) {
        return Err(PressureError::NonIntegrableObservable);
    }
    if !finiteness_region(params.q, params.b) {
        return Err(PressureError::DivergentSum {
            q: params.q,
            b: params.b,
        });
    }
    let (q, b) = (params.q, params.b);
    let n = table.n_letters;
    let ws = weights(table, q, b, Alphabet::Full, Band::Mid);
    let pd = perron(&ws.mat);
    let left_total: f64 = pd.left.iter().sum();
    let l_eff = ws.l_eff;

    let mut numer = 0.0f64;
    let mut denom = 0.0f64;
    for j in 0..n {
        let v_j = pd.right[j];
        // Bare hyperbolic symbol: predecessor states exclude the cancelling one.
        let u_hyp = left_total - pd.left[j ^ 1];
        let w_hyp = (-b * pick(table.hyp[j], Band::Mid)).exp();
        let obs_hyp = match observable {
            Observable::CuspWinding => 0.0,
            Observable::LogDeriv => pick(table.hyp[j], Band::Mid),
        };
        numer += u_hyp * w_hyp * obs_hyp * v_j;
        denom += u_hyp * w_hyp * v_j;

        for sign in 0..2 {
            let mut acc_w = 0.0;
            let mut acc_wo = 0.0;
            for l in 1..=l_eff {
                let e = table.par_entry(sign, j, l);
                let w = (-q * (l - 1) as f64 - b * pick(e, Band::Mid)).exp();
                let obs = match observable {
                    Observable::CuspWinding => (l - 1) as f64,
                    Observable::LogDeriv => pick(e, Band::Mid),
                };
                acc_w += w;
                acc_wo += w * obs;
            }
            // Analytic tail with midpoint constants.
            let c = pick_tail(table.tail_of(sign, j), Band::Mid);
            let scale = (q - b * c).exp();
            let s_2b = pure_power_tail(table, q, b, l_eff);
            acc_w += scale * s_2b;
            match observable {
                Observable::CuspWinding => {
                    // (l - 1) e^{-ql} l^{-2b} = e^{-ql} l^{1-2b} - e^{-ql} l^{-2b}.
                    let mut head1 = 0.0;
                    for l in 1..=l_eff {
                        head1 +=
                            (-q * l as f64 - (2.0 * b - 1.0) * table.ln_l[(l - 1) as usize]).exp();
                    }
                    let s_2bm1 = (exp_power_sum(2.0 * b - 1.0, q) - head1).max(0.0);
                    acc_wo += scale * (s_2bm1 - s_2b);
                }
                Observable::LogDeriv => {
                    let mut head_log = 0.0;
                    for l in 1..=l_eff {
                        let lnl = table.ln_l[(l - 1) as usize];
                        head_log += (-q * l as f64 - 2.0 * b * lnl).exp() * lnl;
                    }
                    let s_log = (exp_power_log_sum(2.0 * b, q) - head_log).max(0.0);
                    acc_wo += scale * (2.0 * s_log + c * s_2b);
                }
            }
            numer += left_total * acc_wo * v_j;
            denom += left_total * acc_w * v_j;
        }
    }
    debug_assert!(
        numer.is_finite() && denom.is_finite() && denom > 0.0,
        "degenerate equilibrium sums: numer = {numer}, denom = {denom}"
    );
    Ok(numer / denom)
}

/// Gibbs-weighted average of `a1` or `log |f'|` at the given parameters.
pub fn equilibrium_average(
    g: &GeneratorSet,
    params: &PotentialParams,
    observable: Observable,
    l_max: u64,
) -> Result<f64, PressureError> {
    let table = SymbolTable::build(g, l_max);
    equilibrium_average_with_table(&table, params, observable)
}

/// Maximal deviation of empirical level-`n` cylinder masses from the Gibbs
/// form `exp(-2 P + S_2 phi)` over two-cylinders: returns
/// `max(ratio, 1/ratio)` maximized over the terminal state.
pub fn gibbs_bracket_check(
    g: &GeneratorSet,
    params: &PotentialParams,
    alphabet: Alphabet,
    n: usize,
    l_max: u64,
) -> Result<f64, PressureError> {
    assert!(n >= 3, "gibbs_bracket_check needs n >= 3");
    if alphabet == Alphabet::Full && !finiteness_region(params.q, params.b) {
        return Err(PressureError::DivergentSum {
            q: params.q,
            b: params.b,
        });
    }
    let table = SymbolTable::build(g, l_max);
    let ws = weights(&table, params.q, params.b, alphabet, Band::Mid);
    let dim = table.n_letters;
    // Continuation mass vectors z_k(state).
    let mut z = vec![vec![1.0f64; dim]];
    for _ in 0..n - 1 {
        let prev = z.last().unwrap().clone();
        let mut next = vec![0.0f64; dim];
        ws.mat.col_mul(&prev, &mut next);
        z.push(next);
    }
    let z_n: f64 = (0..dim).map(|j| ws.first[j] * z[n - 1][j]).sum();
    let rho_hat = ratio_log_value(&ws.first, &ws.mat, n).exp();
    let mut worst = 1.0f64;
    for le in 0..dim {
        // mu([x y]) / exp(-2 P + phi(x) + phi(y)) = rho^2 z_{n-2}(le) / Z_n,
        // for every admissible pair whose second symbol ends in state le.
        let ratio = rho_hat * rho_hat * z[n - 2][le] / z_n;
        worst = worst.max(ratio.max(1.0 / ratio));
    }
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::schottky::{GeneratorSet, HypLetter, Letter};

    fn defaults() -> GeneratorSet {
        GeneratorSet::example_group(1.0, 6.0, 9.0).unwrap()
    }


    #[test]
    fn finiteness_region_table() {
        assert!(finiteness_region(1.0, 0.0));
        assert!(!finiteness_region(0.0, 0.4));
        assert!(finiteness_region(0.0, 0.75));
        assert!(!finiteness_region(-0.1, 1.0));
        assert!(!finiteness_region(1.0, -0.1));
    }

    #[test]
    fn finite_subshift_pressure_is_log_row_sum() {
        // k hyperbolic pairs, zero potential: every row of the transition
        // matrix sums to 2k - 1.
        for k in 1..=3usize {
            let g = GeneratorSet::example_group_multi(k, 1.0, 6.0, 100.0).unwrap();
            let p = PotentialParams::new(0.0, 0.0, 0.0);
            let est = pressure_hyperbolic_only(&g, &p, 6).unwrap();
            let expect = ((2 * k - 1) as f64).ln();
            assert!(
                (est.value - expect).abs() < 1e-9,
                "k = {k}: {} vs {expect}",
                est.value
            );
            assert!(est.upper - est.lower < 1e-9);
        }
    }

    #[test]
    fn divergence_outside_region() {
        let g = defaults();
        let p = PotentialParams::new(0.0, 0.0, 0.4);
        match pressure(&g, &p, 4, 100) {
            Err(PressureError::DivergentSum { .. }) => {}
            other => panic!("expected DivergentSum, got {other:?}"),
        }
    }

    #[test]
    fn truncation_dominates_for_tiny_tables() {
        let g = defaults();
        let p = PotentialParams::new(0.0, 0.0, 0.75);
        match pressure(&g, &p, 4, 5) {
            Err(PressureError::TruncationDominates { .. }) => {}
            other => panic!("expected TruncationDominates, got {other:?}"),
        }
    }

    #[test]
    fn bracket_orders_and_shrinks_with_n() {
        let g = defaults();
        let p = PotentialParams::new(0.0, 0.0, 0.75);
        let e4 = pressure(&g, &p, 4, 400).unwrap();
        let e8 = pressure(&g, &p, 8, 400).unwrap();
        for e in [&e4, &e8] {
            assert!(e.lower <= e.value && e.value <= e.upper);
            assert!(e.tail_bound >= 0.0);
        }
        assert!(e8.upper - e8.lower <= e4.upper - e4.lower + 1e-12);
        // The point estimate is already stable at these depths.
        assert!((e4.value - e8.value).abs() < 1e-3);
    }

    #[test]
    fn ratio_beats_direct_convergence() {
        let g = defaults();
        let table = SymbolTable::build(&g, 400);
        let p = PotentialParams::new(0.0, 0.0, 0.75);
        let ratio6 =
            pressure_core(&table, &p, Alphabet::Full, 6, PressureMethod::WordSumRatio, true)
                .unwrap()
                .value;
        let ratio12 =
            pressure_core(&table, &p, Alphabet::Full, 12, PressureMethod::WordSumRatio, true)
                .unwrap()
                .value;
        let direct12 =
            pressure_core(&table, &p, Alphabet::Full, 12, PressureMethod::WordSumDirect, true)
                .unwrap()
                .value;
        assert!((ratio6 - ratio12).abs() < (direct12 - ratio12).abs());
    }

    #[test]
    fn pressure_decreases_in_b() {
        let g = defaults();
        let table = SymbolTable::build(&g, 400);
        let (z, _) = g.expansion_bounds();
        let mut prev = f64::INFINITY;
        for i in 0..6 {
            let b = 0.55 + 0.08 * i as f64;
            let v = pressure_value(&table, &PotentialParams::new(0.0, 0.0, b), Alphabet::Full, 6);
            assert!(v < prev, "pressure not decreasing at b = {b}");
            if prev.is_finite() {
                // Strict decrease with slope at least log Z.
                assert!(prev - v >= 0.08 * z.ln() - 1e-9);
            }
            prev = v;
        }
    }

    #[test]
    fn pressure_convex_in_q() {
        let g = defaults();
        let table = SymbolTable::build(&g, 400);
        let f = |q: f64| {
            pressure_value(&table, &PotentialParams::new(2.0, q, 0.7), Alphabet::Full, 6)
        };
        let qs = [0.05, 0.1, 0.2, 0.4, 0.8];
        for w in qs.windows(2) {
            let (q1, q2) = (w[0], w[1]);
            assert!(f((q1 + q2) / 2.0) <= (f(q1) + f(q2)) / 2.0 + 1e-9);
        }
    }

    #[test]
    fn variational_lower_bound_from_periodic_point() {
        // Point mass on the repelling fixed point of a bare hyperbolic
        // letter: phi(fp) <= upper pressure bound.
        let g = defaults();
        let p = PotentialParams::new(3.0, 0.5, 0.7);
        let est = pressure(&g, &p, 6, 400).unwrap();
        let h = g.letter_map(Letter::Hyp(HypLetter {
            pair: 0,
            inv: false,
        }));
        let fp = h
            .fixed_points()
            .unwrap()
            .into_iter()
            .find(|&zp| h.deriv_mod(zp).unwrap() > 1.0)
            .unwrap();
        let phi = p.q * p.alpha - p.b * h.deriv_mod(fp).unwrap().ln();
        assert!(phi <= est.upper + 1e-9);
    }

    #[test]
    fn tail_bound_validity_under_doubling() {
        let g = defaults();
        let p = PotentialParams::new(0.0, 0.0, 0.7);
        let e1 = pressure(&g, &p, 6, 300).unwrap();
        let e2 = pressure(&g, &p, 6, 600).unwrap();
        assert!(
            (e1.value - e2.value).abs() <= e1.tail_bound.max(1e-10),
            "doubling the truncation moved the value by {} > tail bound {}",
            (e1.value - e2.value).abs(),
            e1.tail_bound
        );
        // Brackets never become disjoint under refinement.
        assert!(e1.lower - e1.tail_bound <= e2.upper);
        assert!(e2.lower - e2.tail_bound <= e1.upper);
    }

    #[test]
    fn ruelle_derivatives_match_finite_differences() {
        let g = defaults();
        let table = SymbolTable::build(&g, 800);
        let (alpha, q, b) = (3.0, 0.2, 0.7);
        let avg_a1 = equilibrium_average_with_table(
            &table,
            &PotentialParams::new(alpha, q, b),
            Observable::CuspWinding,
        )
        .unwrap();
        // dP/dq = alpha - int a1 dmu via central differences of the value.
        let dq = 1e-5;
        let n = 40;
        let f =
            |qq: f64| pressure_value(&table, &PotentialParams::new(alpha, qq, b), Alphabet::Full, n);
        let fd = (f(q + dq) - f(q - dq)) / (2.0 * dq);
        assert!(
            (fd - (alpha - avg_a1)).abs() < 1e-4 * (1.0 + avg_a1.abs()),
            "fd {fd} vs ruelle {}",
            alpha - avg_a1
        );

        // dP/db = -int log|f'| dmu.
        let lam = equilibrium_average_with_table(
            &table,
            &PotentialParams::new(alpha, q, b),
            Observable::LogDeriv,
        )
        .unwrap();
        let db = 1e-5;
        let fb =
            |bb: f64| pressure_value(&table, &PotentialParams::new(alpha, q, bb), Alphabet::Full, n);
        let fd_b = (fb(b + db) - fb(b - db)) / (2.0 * db);
        assert!(
            (fd_b + lam).abs() < 1e-4 * lam.abs(),
            "fd {fd_b} vs -lambda {lam}"
        );
        let (z, _) = g.expansion_bounds();
        assert!(lam >= z.ln());
    }

    #[test]
    fn cusp_average_needs_positive_q() {
        let g = defaults();
        let p = PotentialParams::new(1.0, 0.0, 0.75);
        match equilibrium_average(&g, &p, Observable::CuspWinding, 100) {
            Err(PressureError::NonIntegrableObservable) => {}
            other => panic!("expected NonIntegrableObservable, got {other:?}"),
        }
    }

    #[test]
    fn gibbs_ratio_finite_alphabet_oracle() {
        // Zero potential on 2k hyperbolic letters: the exact stationary
        // measure gives max(ratio, 1/ratio) = 2k / (2k - 1).
        for k in 1..=3usize {
            let g = GeneratorSet::example_group_multi(k, 1.0, 6.0, 100.0).unwrap();
            let p = PotentialParams::new(0.0, 0.0, 0.0);
            let m = gibbs_bracket_check(&g, &p, Alphabet::HyperbolicOnly, 6, 2).unwrap();
            let expect = (2 * k) as f64 / (2 * k - 1) as f64;
            assert!((m - expect).abs() < 1e-9, "k = {k}: {m} vs {expect}");
            assert!((1.0..=2.0).contains(&m));
        }
    }

    #[test]
    fn gibbs_ratio_full_alphabet_stable() {
        let g = defaults();
        let p = PotentialParams::new(5.0, 0.1, 0.7);
        let m4 = gibbs_bracket_check(&g, &p, Alphabet::Full, 4, 400).unwrap();
        let m6 = gibbs_bracket_check(&g, &p, Alphabet::Full, 6, 400).unwrap();
        assert!(m4.is_finite() && m6.is_finite());
        assert!(m4 >= 1.0 && m6 >= 1.0);
        assert!((m4 - m6).abs() < 0.2 * m4, "unstable: {m4} vs {m6}");
    }
}
