//! Generalized Lomb-Scargle periodogram (floating-mean sinusoid fit) and its
//! false-alarm test.
//!
//! For each trial frequency the model `a cos(wt) + b sin(wt) + c` is fitted
//! by least squares with uniform weights, and the power is the fraction of
//! the variance about the mean that the fit explains (Zechmeister & Kürster
//! 2009, eqs. 4-15).

use std::f64::consts::TAU;
use std::io::Write;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::signal::SampledSignal;

/// Oversampling of the frequency grid relative to `1 / span`.
pub const OVERSAMPLING: f64 = 5.0;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Periodogram {
    /// Cycles per unit time, strictly ascending.
    pub frequencies: Vec<f64>,
    /// Normalized power in `[0, 1]`.
    pub power: Vec<f64>,
    /// `(frequency, power)` at the maximum.
    pub best: (f64, f64),
}

impl Periodogram {
    pub fn write_csv<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(out, "frequency,power")?;
        for (f, p) in self.frequencies.iter().zip(&self.power) {
            writeln!(out, "{f},{p}")?;
        }
        Ok(())
    }
}

fn gls_power(times: &[f64], centered: &[f64], yy: f64, frequency: f64) -> f64 {
    let n = times.len() as f64;
    let omega = TAU * frequency;
    let (mut c, mut s, mut yc, mut ys, mut cc, mut ss, mut cs) = (0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0);
    for (&t, &y) in times.iter().zip(centered) {
        let (sin, cos) = (omega * t).sin_cos();
        c += cos;
        s += sin;
        yc += y * cos;
        ys += y * sin;
        cc += cos * cos;
        ss += sin * sin;
        cs += cos * sin;
    }
    let (c, s) = (c / n, s / n);
    let (yc, ys) = (yc / n, ys / n);
    let cc = cc / n - c * c;
    let ss = ss / n - s * s;
    let cs = cs / n - c * s;
    let d = cc * ss - cs * cs;
    if d > 1e-12 * cc.max(ss).powi(2) {
        (ss * yc * yc + cc * ys * ys - 2.0 * cs * yc * ys) / (yy * d)
    } else if cc >= ss && cc > 0.0 {
        // cos and sin columns are collinear: single-regressor fit
        yc * yc / (yy * cc)
    } else if ss > 0.0 {
        ys * ys / (yy * ss)
    } else {
        0.0
    }
}

/// Power at each of `frequencies` (cycles per unit time).
pub fn gls_periodogram(signal: &SampledSignal, frequencies: &[f64]) -> Result<Periodogram> {
    let n = signal.len();
    if n < 4 {
        return Err(Error::invalid(format!("the periodogram needs n >= 4 samples, got {n}")));
    }
    if frequencies.is_empty() {
        return Err(Error::invalid("empty frequency grid"));
    }
    if frequencies.iter().any(|f| !(*f > 0.0 && f.is_finite())) {
        return Err(Error::invalid("frequencies must be positive and finite"));
    }
    if frequencies.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::invalid("frequencies must be strictly ascending"));
    }
    let mean = signal.values().iter().sum::<f64>() / n as f64;
    let centered: Vec<f64> = signal.values().iter().map(|v| v - mean).collect();
    let yy = centered.iter().map(|y| y * y).sum::<f64>() / n as f64;
    let power: Vec<f64> = if yy > 0.0 {
        frequencies
            .par_iter()
            .map(|&f| gls_power(signal.times(), &centered, yy, f))
            .collect()
    } else {
        vec![0.0; frequencies.len()]
    };
    let best = frequencies
        .iter()
        .zip(&power)
        .fold((frequencies[0], power[0]), |acc, (&f, &p)| if p > acc.1 { (f, p) } else { acc });
    Ok(Periodogram {
        frequencies: frequencies.to_vec(),
        power,
        best,
    })
}

/// Grid from `1 / span` to the pseudo-Nyquist `n / (2 span)` in steps of
/// `1 / (OVERSAMPLING span)`.
pub fn default_grid(signal: &SampledSignal) -> Vec<f64> {
    let span = signal.span();
    let f_min = 1.0 / span;
    let f_max = signal.len() as f64 / (2.0 * span);
    let step = 1.0 / (OVERSAMPLING * span);
    let count = ((f_max - f_min) / step).floor() as usize + 1;
    (0..count).map(|k| f_min + k as f64 * step).collect()
}

/// False-alarm probability of a peak of normalized power `p` among `m`
/// trial frequencies with `n` samples: `1 - (1 - (1 - p)^((n-3)/2))^m`.
pub fn false_alarm_probability(p: f64, n: usize, m: usize) -> f64 {
    let single = (1.0 - p).max(0.0).powf((n as f64 - 3.0) / 2.0);
    // 1 - (1 - single)^m without cancellation for tiny `single`
    -((m as f64) * (-single).ln_1p()).exp_m1()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GlsOutcome {
    pub periodic: bool,
    pub best_frequency: f64,
    pub best_power: f64,
    pub fap: f64,
    pub grid_size: usize,
}

/// Periodogram on [`default_grid`]; periodic when the peak's false-alarm
/// probability is below `alpha`.
pub fn gls_test(signal: &SampledSignal, alpha: f64) -> Result<GlsOutcome> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::invalid(format!("alpha must lie in (0, 1), got {alpha}")));
    }
    let grid = default_grid(signal);
    let pg = gls_periodogram(signal, &grid)?;
    let fap = false_alarm_probability(pg.best.1, signal.len(), grid.len());
    Ok(GlsOutcome {
        periodic: fap < alpha,
        best_frequency: pg.best.0,
        best_power: pg.best.1,
        fap,
        grid_size: grid.len(),
    })
}
