//! Statistical tests behind the interestingness scores.

use statrs::distribution::{ChiSquared, ContinuousCDF, Normal};

/// Standard normal CDF.
pub fn normal_cdf(z: f64) -> f64 {
    Normal::standard().cdf(z)
}

fn normal_quantile(p: f64) -> f64 {
    Normal::standard().inverse_cdf(p)
}

/// Upper-tail probability of a chi-squared variable.
pub fn chi_squared_sf(statistic: f64, dof: f64) -> f64 {
    if statistic <= 0.0 {
        return 1.0;
    }
    let dist = ChiSquared::new(dof).expect("positive degrees of freedom");
    (1.0 - dist.cdf(statistic)).clamp(0.0, 1.0)
}

/// Chi-squared statistic of `values` against their mean, `Σ(x − x̄)² / x̄`,
/// with `n − 1` degrees of freedom. Returns `(statistic, p)`; `None` when
/// the mean is not positive or fewer than two values are given.
pub fn chi_squared_uniform(values: &[f64]) -> Option<(f64, f64)> {
    if values.len() < 2 {
        return None;
    }
    let mean = values.iter().sum::<f64>() / values.len() as f64;
    if !(mean > 0.0) {
        return None;
    }
    let stat = values.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / mean;
    Some((stat, chi_squared_sf(stat, (values.len() - 1) as f64)))
}

/// Shapiro-Wilk W statistic and p-value (Royston's approximation, valid for
/// 3 ≤ n ≤ 5000). `None` for fewer than 3 values or a zero range.
pub fn shapiro_wilk(values: &[f64]) -> Option<(f64, f64)> {
    let n = values.len();
    if n < 3 {
        return None;
    }
    let mut x = values.to_vec();
    x.sort_by(f64::total_cmp);
    let range = x[n - 1] - x[0];
    if range < 1e-19 * x[n - 1].abs().max(1.0) {
        return None;
    }
    let a = shapiro_wilk_coefficients(n);
    let mean = x.iter().sum::<f64>() / n as f64;
    let ssq: f64 = x.iter().map(|v| (v - mean).powi(2)).sum();
    let num: f64 = a.iter().enumerate().map(|(i, ai)| ai * (x[n - 1 - i] - x[i])).sum();
    let w = (num * num / ssq).min(1.0);
    Some((w, shapiro_wilk_p(w, n)))
}

const C1: [f64; 6] = [0.0, 0.221157, -0.147981, -2.07119, 4.434685, -2.706056];
const C2: [f64; 6] = [0.0, 0.042981, -0.293762, -1.752461, 5.682633, -3.582633];
const C3: [f64; 4] = [0.544, -0.39978, 0.025054, -6.714e-4];
const C4: [f64; 4] = [1.3822, -0.77857, 0.062767, -0.0020322];
const C5: [f64; 4] = [-1.5861, -0.31082, -0.083751, 0.0038915];
const C6: [f64; 3] = [-0.4803, -0.082676, 0.0030302];
const G: [f64; 2] = [-2.273, 0.459];

fn poly(c: &[f64], x: f64) -> f64 {
    c.iter().rev().fold(0.0, |acc, &ci| acc * x + ci)
}

/// Coefficients for the upper half of the order statistics.
fn shapiro_wilk_coefficients(n: usize) -> Vec<f64> {
    let half = n / 2;
    if n == 3 {
        return vec![std::f64::consts::FRAC_1_SQRT_2];
    }
    let an25 = n as f64 + 0.25;
    let m: Vec<f64> = (1..=half).map(|i| normal_quantile((i as f64 - 0.375) / an25)).collect();
    let summ2 = 2.0 * m.iter().map(|v| v * v).sum::<f64>();
    let ssumm2 = summ2.sqrt();
    let rsn = 1.0 / (n as f64).sqrt();
    let a1 = poly(&C1, rsn) - m[0] / ssumm2;
    let mut a = vec![0.0; half];
    a[0] = a1;
    let (first, fac) = if n > 5 {
        let a2 = -m[1] / ssumm2 + poly(&C2, rsn);
        a[1] = a2;
        let fac = ((summ2 - 2.0 * m[0] * m[0] - 2.0 * m[1] * m[1]) / (1.0 - 2.0 * a1 * a1 - 2.0 * a2 * a2)).sqrt();
        (2, fac)
    } else {
        let fac = ((summ2 - 2.0 * m[0] * m[0]) / (1.0 - 2.0 * a1 * a1)).sqrt();
        (1, fac)
    };
    for i in first..half {
        a[i] = -m[i] / fac;
    }
    a
}

fn shapiro_wilk_p(w: f64, n: usize) -> f64 {
    if n == 3 {
        let p = 6.0 / std::f64::consts::PI * (w.sqrt().asin() - std::f64::consts::PI / 3.0);
        return p.clamp(0.0, 1.0);
    }
    let w1 = 1.0 - w;
    if w1 <= 0.0 {
        return 1.0;
    }
    let an = n as f64;
    let mut y = w1.ln();
    let (mean, sd) = if n <= 11 {
        let gamma = poly(&G, an);
        if y >= gamma {
            return 1e-99;
        }
        y = -(gamma - y).ln();
        (poly(&C3, an), poly(&C4, an).exp())
    } else {
        let lx = an.ln();
        (poly(&C5, lx), poly(&C6, lx).exp())
    };
    (1.0 - normal_cdf((y - mean) / sd)).clamp(0.0, 1.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    // Reference values computed with scipy.stats.shapiro / scipy.stats.chi2.
    #[test]
    fn shapiro_wilk_matches_reference() {
        let cases: &[(&[f64], f64, f64)] = &[
            (&[1.0, 2.0, 4.0], 0.9642857142857142, 0.6368868450289689),
            (&[2.1, 3.5, 3.9, 7.2], 0.9119714740632421, 0.49290968089040554),
            (&[1.0, 2.0, 3.0, 4.0, 5.0, 6.0, 7.0, 8.0, 9.0, 10.0], 0.9701646110856056, 0.8923673061902978),
            (&[1.0, 1.0, 2.0, 3.0, 5.0, 8.0, 13.0, 21.0, 34.0, 55.0, 89.0, 144.0], 0.7354517330167729, 0.001891573101477397),
            (
                &[0.3, 1.2, 0.9, 2.5, 1.1, 0.7, 1.4, 1.9, 0.2, 3.3, 1.0, 0.8, 1.6, 2.2, 0.4],
                0.9380037734686724,
                0.3579320323161321,
            ),
            (&[5.0, 3.0, 8.0, 1.0, 9.0, 2.0, 7.0], 0.9358594983366896, 0.6017552641193418),
        ];
        for (v, w, p) in cases {
            let (gw, gp) = shapiro_wilk(v).unwrap();
            assert_abs_diff_eq!(gw, *w, epsilon = 1e-6);
            assert_abs_diff_eq!(gp, *p, epsilon = 1e-5);
        }
        let mut long: Vec<f64> = (1..=30).map(f64::from).collect();
        long.push(100.0);
        let (w, p) = shapiro_wilk(&long).unwrap();
        assert_abs_diff_eq!(w, 0.6503033988579079, epsilon = 1e-6);
        assert_abs_diff_eq!(p, 2.320982224617436e-07, epsilon = 1e-8);
    }

    #[test]
    fn shapiro_wilk_degenerate_inputs() {
        assert!(shapiro_wilk(&[1.0, 2.0]).is_none());
        assert!(shapiro_wilk(&[3.0, 3.0, 3.0, 3.0]).is_none());
        let (w, p) = shapiro_wilk(&[1.0, 2.0, 3.0]).unwrap();
        assert_abs_diff_eq!(w, 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(p, 1.0, epsilon = 1e-9);
    }

    #[test]
    fn chi_squared_matches_reference() {
        let cases: &[(&[f64], f64, f64)] = &[
            (&[4.0, 3.0, 3.0], 0.2, 0.09516258196404044),
            (&[1.0, 2.0, 3.0, 4.0], 2.0, 0.42759329552912023),
            (&[10.0, 1.0, 1.0, 1.0, 1.0], 23.14285714285715, 0.9998814293895422),
            (&[5.0, 5.0, 5.0, 6.0], 0.14285714285714285, 0.01376053295134748),
        ];
        for (v, stat, cdf) in cases {
            let (s, p) = chi_squared_uniform(v).unwrap();
            assert_abs_diff_eq!(s, *stat, epsilon = 1e-12);
            assert_abs_diff_eq!(1.0 - p, *cdf, epsilon = 1e-9);
        }
        let (s, p) = chi_squared_uniform(&[5.0, 5.0, 5.0, 5.0]).unwrap();
        assert_eq!((s, p), (0.0, 1.0));
        assert!(chi_squared_uniform(&[0.0, 0.0]).is_none());
    }
}
