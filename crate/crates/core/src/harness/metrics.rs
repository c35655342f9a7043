use serde::{Deserialize, Serialize};

/// Sample summary: mean with standard deviation and standard error.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Stat {
    pub n: usize,
    pub mean: f64,
    pub sd: f64,
    pub se: f64,
}

impl Stat {
    /// Population-style sd for `n < 2` is zero; otherwise the sample sd.
    pub fn of(values: &[f64]) -> Self {
        let n = values.len();
        if n == 0 {
            return Self {
                n,
                mean: f64::NAN,
                sd: f64::NAN,
                se: f64::NAN,
            };
        }
        let mean = values.iter().sum::<f64>() / n as f64;
        let sd = if n < 2 {
            0.0
        } else {
            (values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1) as f64).sqrt()
        };
        Self {
            n,
            mean,
            sd,
            se: sd / (n as f64).sqrt(),
        }
    }

    /// Binomial rate in percent with `se = sqrt(p(1-p)/n) * 100`.
    pub fn rate_percent(successes: usize, n: usize) -> Self {
        if n == 0 {
            return Self::of(&[]);
        }
        let p = successes as f64 / n as f64;
        let sd = (p * (1.0 - p)).sqrt();
        Self {
            n,
            mean: 100.0 * p,
            sd: 100.0 * sd,
            se: 100.0 * sd / (n as f64).sqrt(),
        }
    }
}

/// Normalized rescue benefit. `None` when `t_no <= t_opt`, where the ratio
/// is undefined.
pub fn percent_improvement(t_no: u32, t_with: u32, t_opt: u32) -> Option<f64> {
    (t_no > t_opt).then(|| (f64::from(t_no) - f64::from(t_with)) / (f64::from(t_no) - f64::from(t_opt)))
}

/// Two-proportion z statistic and one-sided p-value for `p1 > p2`, using the
/// pooled proportion.
pub fn two_proportion_z(successes1: usize, n1: usize, successes2: usize, n2: usize) -> (f64, f64) {
    let (p1, p2) = (successes1 as f64 / n1 as f64, successes2 as f64 / n2 as f64);
    let pooled = (successes1 + successes2) as f64 / (n1 + n2) as f64;
    let se = (pooled * (1.0 - pooled) * (1.0 / n1 as f64 + 1.0 / n2 as f64)).sqrt();
    if se == 0.0 {
        return (0.0, if p1 > p2 { 0.0 } else { 1.0 });
    }
    let z = (p1 - p2) / se;
    (z, 0.5 * erfc(z / std::f64::consts::SQRT_2))
}

/// Complementary error function, Numerical Recipes `erfcc` (|error| < 1.2e-7).
pub fn erfc(x: f64) -> f64 {
    let z = x.abs();
    let t = 1.0 / (1.0 + 0.5 * z);
    let poly = -z * z - 1.265_512_23
        + t * (1.000_023_68
            + t * (0.374_091_96
                + t * (0.096_784_18
                    + t * (-0.186_288_06
                        + t * (0.278_868_07
                            + t * (-1.135_203_98 + t * (1.488_515_87 + t * (-0.822_152_23 + t * 0.170_872_77))))))));
    let r = t * poly.exp();
    if x >= 0.0 {
        r
    } else {
        2.0 - r
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn improvement_examples() {
        assert_eq!(percent_improvement(40, 25, 20), Some(0.75));
        assert_eq!(percent_improvement(40, 20, 20), Some(1.0));
        assert_eq!(percent_improvement(40, 40, 20), Some(0.0));
        assert_eq!(percent_improvement(20, 20, 20), None);
    }

    #[test]
    fn binomial_se() {
        let s = Stat::rate_percent(60, 100);
        assert!((s.mean - 60.0).abs() < 1e-12);
        assert!((s.se - (0.6f64 * 0.4 / 100.0).sqrt() * 100.0).abs() < 1e-12);
    }

    #[test]
    fn sample_stats() {
        let s = Stat::of(&[1.0, 2.0, 3.0, 4.0]);
        assert_eq!(s.mean, 2.5);
        assert!((s.sd - (5.0f64 / 3.0).sqrt()).abs() < 1e-12);
        assert!((s.se - s.sd / 2.0).abs() < 1e-12);
    }

    #[test]
    fn erfc_reference_values() {
        assert!((erfc(0.0) - 1.0).abs() < 1e-7);
        assert!((erfc(1.0) - 0.157_299_207_050_285).abs() < 1e-6);
        assert!((erfc(-1.0) - 1.842_700_792_949_715).abs() < 1e-6);
    }

    #[test]
    fn z_test_direction() {
        let (z, p) = two_proportion_z(60, 100, 40, 100);
        assert!(z > 2.8 && z < 2.9);
        assert!(p < 0.01);
        let (_, p) = two_proportion_z(40, 100, 60, 100);
        assert!(p > 0.99);
    }
}
