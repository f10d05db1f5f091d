use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Least-squares fit of `E₀(t) ≈ C e^{−γ(t − t_a)} E₀(t_a)` on a window.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DecayFit {
    pub gamma: f64,
    #[serde(rename = "C")]
    pub c: f64,
    #[serde(rename = "r2")]
    pub r_squared: f64,
    pub window: [f64; 2],
    pub samples: usize,
}

/// Ordinary least squares on `(t, ln E₀)` over the samples with
/// `t_a ≤ t ≤ t_b`. A series with no variance in `ln E₀` reports
/// `r_squared = 0`.
pub fn fit_decay_rate(series: &[(f64, f64)], window: (f64, f64)) -> Result<DecayFit> {
    let (ta, tb) = window;
    let pts: Vec<(f64, f64)> = series
        .iter()
        .copied()
        .filter(|&(t, _)| t >= ta && t <= tb)
        .collect();
    if pts.len() < 3 {
        return Err(Error::InsufficientData(pts.len()));
    }
    if let Some(&(t, value)) = pts.iter().find(|&&(_, e)| !(e > 0.0)) {
        return Err(Error::NonpositiveMass { t, value });
    }
    let t0 = pts[0].0;
    let e_start = pts[0].1;
    let n = pts.len() as f64;
    let xs: Vec<f64> = pts.iter().map(|p| p.0 - t0).collect();
    let ys: Vec<f64> = pts.iter().map(|p| p.1.ln()).collect();
    let xm = xs.iter().sum::<f64>() / n;
    let ym = ys.iter().sum::<f64>() / n;
    let mut sxx = 0.0;
    let mut sxy = 0.0;
    let mut syy = 0.0;
    for (x, y) in xs.iter().zip(&ys) {
        sxx += (x - xm) * (x - xm);
        sxy += (x - xm) * (y - ym);
        syy += (y - ym) * (y - ym);
    }
    if sxx == 0.0 {
        return Err(Error::InsufficientData(1));
    }
    let slope = sxy / sxx;
    let intercept = ym - slope * xm;
    let r_squared = if syy > 0.0 {
        let ss_res: f64 = xs
            .iter()
            .zip(&ys)
            .map(|(x, y)| (y - intercept - slope * x).powi(2))
            .sum();
        (1.0 - ss_res / syy).clamp(0.0, 1.0)
    } else {
        0.0
    };
    Ok(DecayFit {
        gamma: -slope,
        c: intercept.exp() / e_start,
        r_squared,
        window: [ta, tb],
        samples: pts.len(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_exponential() {
        let s: Vec<(f64, f64)> = (0..50).map(|k| {
            let t = k as f64;
            (t, 3.0 * (-0.1 * t).exp())
        }).collect();
        let f = fit_decay_rate(&s, (0.0, 49.0)).unwrap();
        assert!((f.gamma - 0.1).abs() <= 1e-10);
        assert!((f.r_squared - 1.0).abs() <= 1e-12);
        assert!((f.c - 1.0).abs() <= 1e-10);
        assert_eq!(f.samples, 50);
    }

    #[test]
    fn constant_series() {
        let s: Vec<(f64, f64)> = (0..10).map(|k| (k as f64, 0.7)).collect();
        let f = fit_decay_rate(&s, (0.0, 10.0)).unwrap();
        assert_eq!(f.gamma, 0.0);
        assert_eq!(f.r_squared, 0.0);
    }

    #[test]
    fn perturbed_exponential() {
        // Oracle: the log of the perturbation, 0.01 sin t, is bounded by
        // 0.01, so over [0, 100] it moves the slope by well under 1e-3.
        let s: Vec<(f64, f64)> = (0..=1000).map(|k| {
            let t = k as f64 * 0.1;
            (t, (-0.1 * t).exp() * (1.0 + 0.01 * t.sin()))
        }).collect();
        let f = fit_decay_rate(&s, (0.0, 100.0)).unwrap();
        assert!((f.gamma - 0.1).abs() <= 1e-3, "{f:?}");
        assert!(f.r_squared > 0.999);
    }

    #[test]
    fn window_and_errors() {
        let s = vec![(0.0, 1.0), (1.0, 0.5), (2.0, 0.25), (3.0, 0.0)];
        assert!(matches!(fit_decay_rate(&s, (0.0, 1.5)), Err(Error::InsufficientData(2))));
        assert!(matches!(fit_decay_rate(&s, (0.0, 3.0)), Err(Error::NonpositiveMass { .. })));
        let f = fit_decay_rate(&s, (0.0, 2.0)).unwrap();
        assert!((f.gamma - 2f64.ln()).abs() < 1e-14);
    }
}
