//! Small statistics toolkit: descriptive stats, Student-t tail
//! probabilities from the regularized incomplete beta function, and the
//! paired t-test.

use crate::error::{Error, Result};

pub fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

/// Sample standard deviation (`n - 1` denominator); 0 for fewer than two values.
pub fn sample_std(xs: &[f64]) -> f64 {
    if xs.len() < 2 {
        return 0.0;
    }
    let m = mean(xs);
    let ss: f64 = xs.iter().map(|x| (x - m).powi(2)).sum();
    (ss / (xs.len() - 1) as f64).sqrt()
}

/// `ln Gamma(x)` for `x > 0`, Lanczos approximation (g = 7, 9 terms).
pub fn ln_gamma(x: f64) -> f64 {
    const G: f64 = 7.0;
    const COEF: [f64; 9] = [
        0.999_999_999_999_809_9,
        676.520_368_121_885_1,
        -1_259.139_216_722_402_8,
        771.323_428_777_653_1,
        -176.615_029_162_140_6,
        12.507_343_278_686_905,
        -0.138_571_095_265_720_12,
        9.984_369_578_019_572e-6,
        1.505_632_735_149_311_6e-7,
    ];
    if x < 0.5 {
        // reflection
        let pi = std::f64::consts::PI;
        return (pi / (pi * x).sin()).ln() - ln_gamma(1.0 - x);
    }
    let x = x - 1.0;
    let mut acc = COEF[0];
    for (i, c) in COEF.iter().enumerate().skip(1) {
        acc += c / (x + i as f64);
    }
    let t = x + G + 0.5;
    0.5 * (2.0 * std::f64::consts::PI).ln() + (x + 0.5) * t.ln() - t + acc.ln()
}

/// Continued fraction for the incomplete beta function (modified Lentz).
fn beta_cf(a: f64, b: f64, x: f64) -> f64 {
    const MAX_ITER: usize = 300;
    const EPS: f64 = 1e-15;
    const TINY: f64 = 1e-300;
    let (qab, qap, qam) = (a + b, a + 1.0, a - 1.0);
    let mut c = 1.0;
    let mut d = 1.0 - qab * x / qap;
    if d.abs() < TINY {
        d = TINY;
    }
    d = 1.0 / d;
    let mut h = d;
    for m in 1..=MAX_ITER {
        let m = m as f64;
        let m2 = 2.0 * m;
        let aa = m * (b - m) * x / ((qam + m2) * (a + m2));
        d = 1.0 + aa * d;
        if d.abs() < TINY {
            d = TINY;
        }
        c = 1.0 + aa / c;
        if c.abs() < TINY {
            c = TINY;
        }
        d = 1.0 / d;
        h *= d * c;
        let aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
        d = 1.0 + aa * d;
        if d.abs() < TINY {
            d = TINY;
        }
        c = 1.0 + aa / c;
        if c.abs() < TINY {
            c = TINY;
        }
        d = 1.0 / d;
        let del = d * c;
        h *= del;
        if (del - 1.0).abs() < EPS {
            break;
        }
    }
    h
}

/// Regularized incomplete beta function `I_x(a, b)`.
pub fn inc_beta(a: f64, b: f64, x: f64) -> f64 {
    if x <= 0.0 {
        return 0.0;
    }
    if x >= 1.0 {
        return 1.0;
    }
    let ln_front = ln_gamma(a + b) - ln_gamma(a) - ln_gamma(b) + a * x.ln() + b * (1.0 - x).ln();
    let front = ln_front.exp();
    if x < (a + 1.0) / (a + b + 2.0) {
        front * beta_cf(a, b, x) / a
    } else {
        1.0 - front * beta_cf(b, a, 1.0 - x) / b
    }
}

/// Student-t CDF with `df` degrees of freedom.
pub fn student_t_cdf(t: f64, df: f64) -> f64 {
    let tail = 0.5 * inc_beta(0.5 * df, 0.5, df / (df + t * t));
    if t >= 0.0 {
        1.0 - tail
    } else {
        tail
    }
}

/// Two-sided tail probability `P(|T| >= |t|)`.
pub fn student_t_two_sided(t: f64, df: f64) -> f64 {
    if t == 0.0 {
        return 1.0;
    }
    inc_beta(0.5 * df, 0.5, df / (df + t * t))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TTest {
    pub t: f64,
    pub p_value: f64,
    pub df: usize,
}

/// Paired two-sided t-test on `a - b`.
pub fn paired_t_test(a: &[f64], b: &[f64]) -> Result<TTest> {
    if a.len() != b.len() {
        return Err(Error::LengthMismatch {
            expected: a.len(),
            actual: b.len(),
        });
    }
    if a.len() < 2 {
        return Err(Error::Empty("paired t-test needs at least two pairs"));
    }
    let diffs: Vec<f64> = a.iter().zip(b).map(|(x, y)| x - y).collect();
    let n = diffs.len();
    let df = n - 1;
    let m = mean(&diffs);
    let sd = sample_std(&diffs);
    if sd == 0.0 {
        if m == 0.0 {
            return Ok(TTest {
                t: 0.0,
                p_value: 1.0,
                df,
            });
        }
        return Err(Error::DegenerateTTest { mean: m });
    }
    let t = m / (sd / (n as f64).sqrt());
    Ok(TTest {
        t,
        p_value: student_t_two_sided(t, df as f64),
        df,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use statrs::distribution::{ContinuousCDF, StudentsT};
    use statrs::function::beta::beta_reg;
    use statrs::function::gamma::ln_gamma as sr_ln_gamma;

    #[test]
    fn ln_gamma_matches_reference() {
        for x in [0.1, 0.5, 1.0, 1.5, 3.5, 10.0, 42.3] {
            assert_relative_eq!(
                ln_gamma(x),
                sr_ln_gamma(x),
                epsilon = 1e-12,
                max_relative = 1e-12
            );
        }
    }

    #[test]
    fn inc_beta_matches_reference() {
        for &(a, b) in &[(0.5, 0.5), (1.0, 3.0), (3.5, 0.5), (10.0, 2.0)] {
            for x in [0.01, 0.2, 0.5, 0.77, 0.99] {
                assert_relative_eq!(inc_beta(a, b, x), beta_reg(a, b, x), epsilon = 1e-12);
            }
        }
    }

    #[test]
    fn t_cdf_matches_reference() {
        for df in [1.0, 2.0, 7.0, 30.0] {
            let dist = StudentsT::new(0.0, 1.0, df).unwrap();
            for t in [-4.0, -1.3, 0.0, 0.7, 2.365, 9.0] {
                assert_relative_eq!(student_t_cdf(t, df), dist.cdf(t), epsilon = 1e-10);
            }
        }
    }

    #[test]
    fn paired_examples() {
        let r = paired_t_test(&[1.0, 2.0, 3.0], &[1.0, 2.0, 3.0]).unwrap();
        assert_eq!((r.t, r.p_value, r.df), (0.0, 1.0, 2));

        let r = paired_t_test(&[1.0, 2.0, 3.0], &[0.0, 0.0, 0.0]).unwrap();
        assert_relative_eq!(r.t, 12f64.sqrt(), epsilon = 1e-12);
        assert_relative_eq!(r.p_value, 0.074_179_900_227_448_53, epsilon = 1e-9);
        assert_eq!(r.df, 2);

        let r = paired_t_test(&[0.1; 8], &[0.2, 0.1, 0.3, 0.0, 0.1, 0.15, 0.12, 0.05]).unwrap();
        assert_eq!(r.df, 7);
    }

    #[test]
    fn swap_negates_t() {
        let a = [0.9, 0.85, 0.97, 0.91, 0.88];
        let b = [0.8, 0.86, 0.9, 0.95, 0.7];
        let ab = paired_t_test(&a, &b).unwrap();
        let ba = paired_t_test(&b, &a).unwrap();
        assert_relative_eq!(ab.t, -ba.t);
        assert_relative_eq!(ab.p_value, ba.p_value);
    }

    #[test]
    fn degenerate_and_bad_input() {
        assert!(matches!(
            paired_t_test(&[1.0, 2.0], &[0.0, 1.0]),
            Err(Error::DegenerateTTest { .. })
        ));
        assert!(paired_t_test(&[1.0], &[0.0]).is_err());
        assert!(paired_t_test(&[1.0, 2.0], &[0.0]).is_err());
    }

    #[test]
    fn std_examples() {
        assert_eq!(sample_std(&[1.0]), 0.0);
        assert_relative_eq!(sample_std(&[1.0, 2.0, 3.0]), 1.0);
    }
}
