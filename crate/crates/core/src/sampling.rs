//! Uniform directions on `S^{d-1}` and Dirichlet inter-change times.
//!
//! Directions are drawn by normalizing `d` independent standard normals, which
//! is exactly uniform on the sphere in every dimension.  Between `k` direction
//! changes the `k + 1` sojourn times are Dirichlet on the simplex
//! `{tau_j > 0, sum tau_j = t}` with every parameter equal to `d - 1` (`First`)
//! or `d/2 - 1` (`Second`).

use alloc::vec::Vec;

#[allow(unused_imports)] // needed when std is absent
use num_traits::Float;
use rand::Rng;
use rand_distr::{Distribution, Gamma, StandardNormal};

use crate::counts::CountFamily;
use crate::specfun::gamma_ln;
use crate::{Error, Result};

/// A unit vector in `R^d`.
#[derive(Debug, Clone, PartialEq)]
pub struct Direction(Vec<f64>);

impl Direction {
    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.0
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }
}

/// Writes a uniform direction into `out` (its length is the dimension).
pub fn fill_direction<R: Rng + ?Sized>(out: &mut [f64], rng: &mut R) {
    loop {
        let mut norm2 = 0.0;
        for x in out.iter_mut() {
            *x = StandardNormal.sample(rng);
            norm2 += *x * *x;
        }
        if norm2 > 0.0 {
            let inv = 1.0 / norm2.sqrt();
            out.iter_mut().for_each(|x| *x *= inv);
            return;
        }
    }
}

pub fn sample_direction<R: Rng + ?Sized>(d: usize, rng: &mut R) -> Result<Direction> {
    if d < 2 {
        return Err(Error::InvalidParameter("directions need dimension d ≥ 2"));
    }
    let mut v = alloc::vec![0.0; d];
    fill_direction(&mut v, rng);
    Ok(Direction(v))
}

/// Dirichlet law of the `k + 1` sojourn times of a flight with `k` changes.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DirichletFamily {
    family: CountFamily,
    d: u32,
    k: usize,
    t: f64,
    shape: f64,
}

impl DirichletFamily {
    pub fn new(family: CountFamily, d: u32, k: usize, t: f64) -> Result<Self> {
        let shape = match family {
            CountFamily::First if d >= 2 => f64::from(d) - 1.0,
            CountFamily::First => return Err(Error::InvalidModel("First family requires dim ≥ 2")),
            CountFamily::Second if d >= 3 => 0.5 * f64::from(d) - 1.0,
            CountFamily::Second => return Err(Error::InvalidModel("Second family requires dim ≥ 3")),
            CountFamily::HomogeneousPoisson => {
                return Err(Error::InvalidModel("sojourn times are Dirichlet only for First and Second"))
            }
        };
        if !(t > 0.0) || !t.is_finite() {
            return Err(Error::InvalidParameter("time t must be positive and finite"));
        }
        Ok(Self { family, d, k, t, shape })
    }

    pub fn family(&self) -> CountFamily {
        self.family
    }

    pub fn dim(&self) -> u32 {
        self.d
    }

    pub fn changes(&self) -> usize {
        self.k
    }

    pub fn horizon(&self) -> f64 {
        self.t
    }

    /// Common Dirichlet parameter.
    pub fn shape(&self) -> f64 {
        self.shape
    }
}

/// Fills `out` with `k + 1` sojourn times summing to `t`.
pub fn fill_times<R: Rng + ?Sized>(fam: &DirichletFamily, rng: &mut R, out: &mut Vec<f64>) {
    out.clear();
    if fam.k == 0 {
        out.push(fam.t);
        return;
    }
    let gamma = Gamma::new(fam.shape, 1.0).expect("shape is positive");
    'draw: loop {
        out.clear();
        let mut s = 0.0;
        for _ in 0..=fam.k {
            let g: f64 = gamma.sample(rng);
            if !(g > 0.0) {
                continue 'draw;
            }
            s += g;
            out.push(g);
        }
        let scale = fam.t / s;
        let mut head = 0.0;
        for g in out[..fam.k].iter_mut() {
            *g *= scale;
            head += *g;
        }
        let last = fam.t - head;
        if !(last > 0.0) {
            continue;
        }
        out[fam.k] = last;
        let total: f64 = out.iter().sum();
        if total != fam.t {
            let fix = fam.t / total;
            out.iter_mut().for_each(|x| *x *= fix);
        }
        if out.iter().all(|&x| x > 0.0) {
            return;
        }
    }
}

pub fn sample_times<R: Rng + ?Sized>(fam: &DirichletFamily, rng: &mut R) -> Vec<f64> {
    let mut v = Vec::with_capacity(fam.k + 1);
    fill_times(fam, rng, &mut v);
    v
}

/// Joint density of the `k` free times `tau_1..tau_k`; `tau_{k+1} = t - sum`.
///
/// `Gamma((k+1)a) / Gamma(a)^{k+1} * t^{1-(k+1)a} * prod_{j=1}^{k+1} tau_j^{a-1}`.
pub fn density_times(fam: &DirichletFamily, tau: &[f64]) -> Result<f64> {
    if tau.len() != fam.k {
        return Err(Error::InvalidParameter("expected exactly k free sojourn times"));
    }
    if fam.k == 0 {
        return Ok(1.0);
    }
    let head: f64 = tau.iter().sum();
    if tau.iter().any(|&x| !(x > 0.0)) || !(head < fam.t) {
        return Err(Error::Domain {
            what: "sojourn times must be positive with sum below t",
            value: head,
        });
    }
    let a = fam.shape;
    let k1 = (fam.k + 1) as f64;
    let mut ln = gamma_ln(k1 * a)?.0 - k1 * gamma_ln(a)?.0 + (1.0 - k1 * a) * fam.t.ln();
    for &x in tau.iter().chain(core::iter::once(&(fam.t - head))) {
        ln += (a - 1.0) * x.ln();
    }
    Ok(ln.exp())
}

#[cfg(test)]
mod tests {
    use super::*;
    use core::f64::consts::PI;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    // Asymptotic Kolmogorov critical value at significance 0.01.
    fn ks_passes(mut xs: Vec<f64>, cdf: impl Fn(f64) -> f64) -> bool {
        xs.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let n = xs.len() as f64;
        let mut dmax: f64 = 0.0;
        for (i, &x) in xs.iter().enumerate() {
            let f = cdf(x);
            dmax = dmax.max((i as f64 + 1.0) / n - f).max(f - i as f64 / n);
        }
        dmax * n.sqrt() < 1.6276
    }

    #[test]
    fn directions_are_unit_and_isotropic() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for d in 2..=6 {
            let n = 20_000;
            let mut mean = alloc::vec![0.0; d];
            for _ in 0..n {
                let v = sample_direction(d, &mut rng).unwrap();
                let norm: f64 = v.as_slice().iter().map(|x| x * x).sum::<f64>().sqrt();
                assert!((norm - 1.0).abs() < 1e-12);
                mean.iter_mut().zip(v.as_slice()).for_each(|(m, x)| *m += x / n as f64);
            }
            let mnorm = mean.iter().map(|x| x * x).sum::<f64>().sqrt();
            assert!(mnorm <= 4.0 / (n as f64).sqrt(), "d={d}: {mnorm}");
        }
        assert!(sample_direction(1, &mut rng).is_err());
    }

    #[test]
    fn planar_angle_is_uniform() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let n = 100_000;
        let mut bins = [0usize; 16];
        for _ in 0..n {
            let v = sample_direction(2, &mut rng).unwrap();
            let phi = v.as_slice()[1].atan2(v.as_slice()[0]).rem_euclid(2.0 * PI);
            bins[((phi / (2.0 * PI) * 16.0) as usize).min(15)] += 1;
        }
        let e = n as f64 / 16.0;
        let chi2: f64 = bins.iter().map(|&o| (o as f64 - e).powi(2) / e).sum();
        // 0.99 quantile of chi-square with 15 degrees of freedom.
        assert!(chi2 < 30.578, "{chi2}");
    }

    #[test]
    fn polar_cosine_is_uniform_in_3d() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let xs: Vec<f64> = (0..100_000)
            .map(|_| sample_direction(3, &mut rng).unwrap().as_slice()[2])
            .collect();
        assert!(ks_passes(xs, |x| 0.5 * (x + 1.0)));
    }

    #[test]
    fn times_sum_to_horizon() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for (fam, d) in [(CountFamily::First, 2), (CountFamily::First, 5), (CountFamily::Second, 3)] {
            for k in 0..8 {
                let f = DirichletFamily::new(fam, d, k, 1.7).unwrap();
                for _ in 0..200 {
                    let tau = sample_times(&f, &mut rng);
                    assert_eq!(tau.len(), k + 1);
                    assert!(tau.iter().all(|&x| x > 0.0));
                    assert!((tau.iter().sum::<f64>() - 1.7).abs() <= 4.0 * f64::EPSILON);
                }
            }
        }
        let f = DirichletFamily::new(CountFamily::First, 3, 0, 2.0).unwrap();
        assert_eq!(sample_times(&f, &mut rng), alloc::vec![2.0]);
    }

    #[test]
    fn dirichlet_marginals() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        let f = DirichletFamily::new(CountFamily::First, 2, 2, 1.0).unwrap();
        let draws: Vec<Vec<f64>> = (0..50_000).map(|_| sample_times(&f, &mut rng)).collect();
        let beta12 = |x: f64| 1.0 - (1.0 - x).powi(2);
        assert!(ks_passes(draws.iter().map(|v| v[0]).collect(), beta12));
        assert!(ks_passes(draws.iter().map(|v| v[2]).collect(), beta12));

        let f = DirichletFamily::new(CountFamily::Second, 4, 1, 2.0).unwrap();
        let xs: Vec<f64> = (0..50_000).map(|_| sample_times(&f, &mut rng)[0] / 2.0).collect();
        assert!(ks_passes(xs, |x| x));

        let f = DirichletFamily::new(CountFamily::Second, 5, 3, 1.0).unwrap();
        let n = 40_000;
        let mut sum = [0.0; 4];
        let mut sum2 = [0.0; 4];
        for _ in 0..n {
            for (j, &x) in sample_times(&f, &mut rng).iter().enumerate() {
                sum[j] += x;
                sum2[j] += x * x;
            }
        }
        for j in 0..4 {
            let m = sum[j] / n as f64;
            let se = ((sum2[j] / n as f64 - m * m) / n as f64).sqrt();
            assert!((m - 0.25).abs() < 3.0 * se, "j={j} mean={m}");
        }
    }

    #[test]
    fn density_examples() {
        let f = DirichletFamily::new(CountFamily::First, 2, 1, 3.0).unwrap();
        for &x in &[0.1, 1.0, 2.9] {
            assert!((density_times(&f, &[x]).unwrap() - 1.0 / 3.0).abs() < 1e-14);
        }
        let f = DirichletFamily::new(CountFamily::First, 3, 1, 1.0).unwrap();
        assert!((density_times(&f, &[0.5]).unwrap() - 1.5).abs() < 1e-13);
        let f0 = DirichletFamily::new(CountFamily::Second, 3, 0, 1.0).unwrap();
        assert_eq!(density_times(&f0, &[]).unwrap(), 1.0);
        assert!(density_times(&f, &[1.2]).is_err());
        assert!(DirichletFamily::new(CountFamily::Second, 2, 1, 1.0).is_err());
    }

    #[test]
    fn density_integrates_to_one() {
        // Midpoint rule for k = 1, hit-or-miss on the simplex for k = 2, 3.
        let f = DirichletFamily::new(CountFamily::Second, 5, 1, 2.0).unwrap();
        let m = 200_000;
        let s: f64 = (0..m)
            .map(|i| density_times(&f, &[2.0 * (i as f64 + 0.5) / m as f64]).unwrap())
            .sum::<f64>()
            * 2.0
            / m as f64;
        assert!((s - 1.0).abs() < 1e-3);

        let mut rng = ChaCha8Rng::seed_from_u64(77);
        for k in 2..=3usize {
            let f = DirichletFamily::new(CountFamily::First, 3, k, 1.0).unwrap();
            let n = 200_000;
            let (mut s, mut s2) = (0.0, 0.0);
            for _ in 0..n {
                let tau: Vec<f64> = (0..k).map(|_| rng.random::<f64>()).collect();
                let v = if tau.iter().sum::<f64>() < 1.0 { density_times(&f, &tau).unwrap() } else { 0.0 };
                s += v;
                s2 += v * v;
            }
            let m = s / n as f64;
            let se = ((s2 / n as f64 - m * m) / n as f64).sqrt();
            assert!((m - 1.0).abs() < 3.0 * se, "k={k}: {m} ± {se}");
        }
    }
}
