//! Log-log slope fitting for convergence-order experiments.

use serde::Serialize;

/// Points with `|y|` at or below this multiple of the data scale are
/// treated as roundoff and excluded from fits.
pub const ROUNDOFF_FLOOR: f64 = 1e-13;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SlopeFit {
    pub slope: f64,
    pub intercept: f64,
    /// Root-mean-square residual of the fit in log space.
    pub residual: f64,
    /// Which input points entered the final fit.
    pub used: Vec<bool>,
    /// Every point was at the roundoff floor: the quantity is zero up to
    /// rounding and no slope exists.
    pub exact: bool,
}

impl SlopeFit {
    pub fn points_used(&self) -> usize {
        self.used.iter().filter(|&&u| u).count()
    }
}

/// Ordinary least squares `y ≈ a + b x`; returns `(b, a, rms residual)`.
pub fn least_squares(xs: &[f64], ys: &[f64]) -> (f64, f64, f64) {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let slope = if sxx > 0.0 { sxy / sxx } else { 0.0 };
    let intercept = my - slope * mx;
    let rss: f64 = xs
        .iter()
        .zip(ys)
        .map(|(x, y)| (y - intercept - slope * x).powi(2))
        .sum();
    (slope, intercept, (rss / n).sqrt())
}

/// Fits `log|y|` against `log x`.
///
/// Points with `|y| ≤ floor` are dropped first. Afterwards, up to two of
/// the smallest-`x` points are discarded while the residual at the
/// smallest remaining point spikes above three times the median residual
/// (and above 0.05 in log units) and at least four points would remain.
pub fn fit_loglog(xs: &[f64], ys: &[f64], floor: f64) -> SlopeFit {
    assert_eq!(xs.len(), ys.len());
    let mut used: Vec<bool> = xs
        .iter()
        .zip(ys)
        .map(|(&x, &y)| x > 0.0 && y.is_finite() && y.abs() > floor)
        .collect();

    if used.iter().filter(|&&u| u).count() < 2 {
        let exact = ys.iter().all(|y| y.abs() <= floor);
        return SlopeFit {
            slope: f64::NAN,
            intercept: f64::NAN,
            residual: f64::NAN,
            used,
            exact,
        };
    }

    let fit_used = |used: &[bool]| {
        let (lx, ly): (Vec<f64>, Vec<f64>) = xs
            .iter()
            .zip(ys)
            .zip(used)
            .filter(|(_, &u)| u)
            .map(|((x, y), _)| (x.ln(), y.abs().ln()))
            .unzip();
        least_squares(&lx, &ly)
    };

    let (mut slope, mut intercept, mut residual) = fit_used(&used);
    for _ in 0..2 {
        let active: Vec<usize> = (0..xs.len()).filter(|&i| used[i]).collect();
        if active.len() <= 4 {
            break;
        }
        let res = |i: usize| (ys[i].abs().ln() - intercept - slope * xs[i].ln()).abs();
        let mut sorted: Vec<f64> = active.iter().map(|&i| res(i)).collect();
        sorted.sort_by(|a, b| a.partial_cmp(b).expect("finite residuals"));
        let median = sorted[sorted.len() / 2];
        let smallest = *active
            .iter()
            .min_by(|a, b| xs[**a].partial_cmp(&xs[**b]).expect("finite x"))
            .expect("nonempty");
        if res(smallest) > 0.05 && res(smallest) > 3.0 * median {
            used[smallest] = false;
            (slope, intercept, residual) = fit_used(&used);
        } else {
            break;
        }
    }

    SlopeFit {
        slope,
        intercept,
        residual,
        used,
        exact: false,
    }
}

/// `count` logarithmically spaced values from `max` down to `min`.
pub fn log_grid(max: f64, min: f64, count: usize) -> Vec<f64> {
    assert!(count >= 2 && max > min && min > 0.0);
    let (lmax, lmin) = (max.ln(), min.ln());
    (0..count)
        .map(|i| (lmax + (lmin - lmax) * i as f64 / (count - 1) as f64).exp())
        .collect()
}
