//! Small statistics helpers shared by the harnesses.

use serde::Serialize;

/// Success proportion with a 95% Wilson score interval.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Proportion {
    pub successes: u64,
    pub trials: u64,
    pub rate: f64,
    pub wilson_low: f64,
    pub wilson_high: f64,
}

const Z95: f64 = 1.959_963_984_540_054;

impl Proportion {
    pub fn new(successes: u64, trials: u64) -> Self {
        if trials == 0 {
            return Self {
                successes,
                trials,
                rate: 0.0,
                wilson_low: 0.0,
                wilson_high: 1.0,
            };
        }
        let n = trials as f64;
        let p = successes as f64 / n;
        let z2 = Z95 * Z95;
        let denom = 1.0 + z2 / n;
        let center = (p + z2 / (2.0 * n)) / denom;
        let half = Z95 * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt() / denom;
        Self {
            successes,
            trials,
            rate: p,
            wilson_low: (center - half).max(0.0),
            wilson_high: (center + half).min(1.0),
        }
    }

    pub fn from_flags<I: IntoIterator<Item = bool>>(flags: I) -> Self {
        let (mut s, mut t) = (0, 0);
        for f in flags {
            t += 1;
            s += u64::from(f);
        }
        Self::new(s, t)
    }
}

/// Pearson correlation of two equally long bit sequences. Returns 0 when
/// either side is constant.
pub fn bit_correlation(a: &[bool], b: &[bool]) -> f64 {
    assert_eq!(a.len(), b.len());
    let n = a.len() as f64;
    if a.is_empty() {
        return 0.0;
    }
    let (mut sa, mut sb, mut sab) = (0u64, 0u64, 0u64);
    for (&x, &y) in a.iter().zip(b) {
        sa += u64::from(x);
        sb += u64::from(y);
        sab += u64::from(x && y);
    }
    let pa = sa as f64 / n;
    let pb = sb as f64 / n;
    let cov = sab as f64 / n - pa * pb;
    let var = pa * (1.0 - pa) * pb * (1.0 - pb);
    if var <= 0.0 {
        0.0
    } else {
        cov / var.sqrt()
    }
}

/// Lag-1 autocorrelation of a bit sequence.
pub fn lag1_autocorrelation(bits: &[bool]) -> f64 {
    if bits.len() < 2 {
        return 0.0;
    }
    bit_correlation(&bits[..bits.len() - 1], &bits[1..])
}

/// Chernoff tail bound `Pr[|X - E X| >= t] <= exp(-t^2 / (2 (λ + t/3)))` for
/// `X ~ Bin(m, p)`, `λ = m p`.
pub fn chernoff_tail(m: u64, p: f64, t: f64) -> f64 {
    let lambda = m as f64 * p;
    (-(t * t) / (2.0 * (lambda + t / 3.0))).exp()
}
