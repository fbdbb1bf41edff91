//! Goodness-of-fit tools for the Monte Carlo checks.

use randflight_core::density::RadialLaw;
use randflight_core::quad::QuadSettings;
use serde::Serialize;
use statrs::distribution::{ChiSquared, ContinuousCDF};

use crate::{Error, Result};

/// One-sample Kolmogorov-Smirnov result.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct KsResult {
    pub n: usize,
    pub statistic: f64,
    pub p_value: f64,
}

impl KsResult {
    pub fn passes(&self, alpha: f64) -> bool {
        self.p_value >= alpha
    }
}

/// Survival function of the Kolmogorov distribution, `P(K > x)`.
pub fn kolmogorov_sf(x: f64) -> f64 {
    if x <= 0.0 {
        return 1.0;
    }
    if x < 1.18 {
        // small-x form converges faster here
        let y = (-std::f64::consts::PI.powi(2) / (8.0 * x * x)).exp();
        let s: f64 = (0..20).map(|j| y.powi((2 * j + 1) * (2 * j + 1))).sum();
        return (1.0 - (2.0 * std::f64::consts::PI).sqrt() / x * s).clamp(0.0, 1.0);
    }
    let mut s = 0.0;
    for j in 1..=100 {
        let term = (-2.0 * (j * j) as f64 * x * x).exp();
        s += if j % 2 == 1 { term } else { -term };
        if term < 1e-18 {
            break;
        }
    }
    (2.0 * s).clamp(0.0, 1.0)
}

/// KS test of `sample` against the continuous CDF `cdf`.  The p-value uses
/// the asymptotic distribution with Stephens' finite-`n` correction.
pub fn ks_test(sample: &[f64], cdf: impl Fn(f64) -> f64) -> Result<KsResult> {
    if sample.is_empty() {
        return Err(Error::Config("KS test needs at least one observation".into()));
    }
    let mut xs = sample.to_vec();
    xs.sort_by(f64::total_cmp);
    let n = xs.len() as f64;
    let mut d: f64 = 0.0;
    for (i, x) in xs.iter().enumerate() {
        let f = cdf(*x);
        d = d.max(f - i as f64 / n).max((i + 1) as f64 / n - f);
    }
    let sn = n.sqrt();
    let p = kolmogorov_sf((sn + 0.12 + 0.11 / sn) * d);
    Ok(KsResult {
        n: xs.len(),
        statistic: d,
        p_value: p,
    })
}

/// Pearson chi-square result.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ChiSquareResult {
    pub statistic: f64,
    pub dof: usize,
    pub p_value: f64,
}

impl ChiSquareResult {
    pub fn passes(&self, alpha: f64) -> bool {
        self.p_value >= alpha
    }
}

/// Pearson test with `dof = bins - 1 - fitted`.
pub fn chi_square(observed: &[u64], expected: &[f64], fitted: usize) -> Result<ChiSquareResult> {
    if observed.len() != expected.len() || observed.len() < fitted + 2 {
        return Err(Error::Config("chi-square needs matching bins and positive degrees of freedom".into()));
    }
    if expected.iter().any(|e| e.is_nan() || *e <= 0.0) {
        return Err(Error::Config("chi-square expected counts must be positive".into()));
    }
    let statistic = observed
        .iter()
        .zip(expected)
        .map(|(&o, &e)| (o as f64 - e).powi(2) / e)
        .sum();
    let dof = observed.len() - 1 - fitted;
    let dist = ChiSquared::new(dof as f64).map_err(|e| Error::Config(e.to_string()))?;
    Ok(ChiSquareResult {
        statistic,
        dof,
        p_value: dist.sf(statistic),
    })
}

/// `(successes - n p) / sqrt(n p (1 - p))`.
pub fn binomial_z(successes: u64, n: u64, p: f64) -> f64 {
    let nf = n as f64;
    (successes as f64 - nf * p) / (nf * p * (1.0 - p)).sqrt()
}

/// CDF of the radial marginal of a law, tabulated by quadrature on nodes
/// `r = ct sin(phi)` with uniform `phi` and interpolated linearly in `phi`,
/// which absorbs the square-root behaviour common at the light cone.
/// Normalized to end at 1.
#[derive(Debug, Clone)]
pub struct TabulatedCdf {
    ct: f64,
    step: f64,
    cdf: Vec<f64>,
    total: f64,
}

impl TabulatedCdf {
    pub fn new(law: &RadialLaw, segments: usize) -> Result<Self> {
        if segments < 2 {
            return Err(Error::Config("tabulated CDF needs at least 2 segments".into()));
        }
        let ct = law.radius();
        let step = std::f64::consts::FRAC_PI_2 / segments as f64;
        let settings = QuadSettings::default();
        let node = |i: usize| if i == segments { ct } else { ct * (step * i as f64).sin() };
        let mut cdf = Vec::with_capacity(segments + 1);
        cdf.push(0.0);
        let mut acc = 0.0;
        for i in 0..segments {
            acc += law.mass_between(node(i), node(i + 1), &settings)?.value;
            cdf.push(acc);
        }
        for v in cdf.iter_mut() {
            *v /= acc;
        }
        Ok(Self { ct, step, cdf, total: acc })
    }

    /// Mass before normalization.
    pub fn total(&self) -> f64 {
        self.total
    }

    pub fn cdf(&self, r: f64) -> f64 {
        if r <= 0.0 {
            return 0.0;
        }
        if r >= self.ct {
            return 1.0;
        }
        let x = (r / self.ct).asin() / self.step;
        let i = (x.floor() as usize).min(self.cdf.len() - 2);
        let s = x - i as f64;
        self.cdf[i] + s * (self.cdf[i + 1] - self.cdf[i])
    }

    pub fn quantile(&self, q: f64) -> f64 {
        let q = q.clamp(0.0, 1.0);
        let i = self.cdf.partition_point(|x| *x < q).clamp(1, self.cdf.len() - 1) - 1;
        let (fa, fb) = (self.cdf[i], self.cdf[i + 1]);
        let s = if fb > fa { (q - fa) / (fb - fa) } else { 0.0 };
        let phi = self.step * (i as f64 + s);
        if phi >= std::f64::consts::FRAC_PI_2 {
            self.ct
        } else {
            self.ct * phi.sin()
        }
    }
}

/// Counts of `values` in the bins delimited by increasing `edges`
/// (`edges.len() - 1` bins; values outside are dropped).
pub fn histogram(values: impl IntoIterator<Item = f64>, edges: &[f64]) -> Vec<u64> {
    let mut counts = vec![0u64; edges.len().saturating_sub(1)];
    let last = *edges.last().unwrap_or(&0.0);
    for v in values {
        if v < edges[0] || v > last {
            continue;
        }
        let i = edges.partition_point(|e| *e <= v).clamp(1, counts.len()) - 1;
        counts[i] += 1;
    }
    counts
}

#[cfg(test)]
mod tests {
    use super::*;
    use randflight_core::density::{LawKind, Model};
    use randflight_core::SeriesControl;

    #[test]
    fn kolmogorov_reference_values() {
        // Classical critical values: P(K > 1.3581) = 0.05, P(K > 1.6276) = 0.01.
        assert!((kolmogorov_sf(1.3581) - 0.05).abs() < 2e-4);
        assert!((kolmogorov_sf(1.6276) - 0.01).abs() < 1e-4);
        // both branches agree where they meet
        let a = kolmogorov_sf(1.18 - 1e-12);
        let b = kolmogorov_sf(1.18);
        assert!((a - b).abs() < 1e-10);
    }

    #[test]
    fn ks_on_uniform_grid_sample() {
        let xs: Vec<f64> = (0..1000).map(|i| (i as f64 + 0.5) / 1000.0).collect();
        let r = ks_test(&xs, |x| x).unwrap();
        assert!(r.statistic <= 0.0005 + 1e-12);
        assert!(r.p_value > 0.99);
        let shifted: Vec<f64> = xs.iter().map(|x| x * x).collect();
        assert!(ks_test(&shifted, |x| x).unwrap().p_value < 1e-6);
    }

    #[test]
    fn chi_square_reference() {
        // statistic 0 on exact counts, and a textbook value: 3 bins, chi2 = 5.991 at 2 dof is p = 0.05
        let r = chi_square(&[10, 20, 30], &[10.0, 20.0, 30.0], 0).unwrap();
        assert_eq!(r.statistic, 0.0);
        assert!((r.p_value - 1.0).abs() < 1e-12);
        let d = ChiSquared::new(2.0).unwrap();
        assert!((d.sf(5.991464547) - 0.05).abs() < 1e-9);
        assert!(chi_square(&[1], &[1.0], 0).is_err());
    }

    #[test]
    fn tabulated_cdf_matches_closed_form() {
        // X in the plane, k = 1: radial marginal 2 pi r p(r) with p = 1/(2 pi ct w)
        // integrates to 1 - w/(ct).
        let law = RadialLaw::new(Model::X, 2, 1.0, 1.0, 1.0, LawKind::Conditional(1), SeriesControl::default()).unwrap();
        let tab = TabulatedCdf::new(&law, 512).unwrap();
        for r in [0.1, 0.5, 0.9, 0.999] {
            let exact = 1.0 - (1.0f64 - r * r).sqrt();
            assert!((tab.cdf(r) - exact).abs() < 1e-5, "{r}");
            assert!((tab.cdf(tab.quantile(exact)) - exact).abs() < 1e-9);
        }
        assert!((tab.total() - 1.0).abs() < 1e-10);
    }

    #[test]
    fn histogram_edges() {
        let h = histogram([0.0, 0.5, 1.0, 1.5, 2.0, 3.0], &[0.0, 1.0, 2.0]);
        assert_eq!(h, vec![2, 3]);
    }
}
