//! Monte-Carlo estimation of Gaussian conditional mutual information.

use nalgebra::{DMatrix, DVector};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};
use crate::gaussian::check_psd;

pub const MIN_SAMPLES: usize = 10_000;

/// Estimate with its standard error, in bits.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MiEstimate {
    pub estimate: f64,
    pub stderr: f64,
    pub samples: usize,
}

impl MiEstimate {
    /// Whether `value` lies within `k` standard errors. A floor of `1e-9`
    /// covers degenerate terms whose log-ratio is identically zero.
    pub fn agrees_with(&self, value: f64, k: f64) -> bool {
        (self.estimate - value).abs() <= k * self.stderr + 1e-9
    }
}

/// Whitening data of one marginal: `L^-1` and `log det`.
struct Marginal {
    idx: Vec<usize>,
    l_inv: DMatrix<f64>,
    log_det: f64,
}

impl Marginal {
    fn new(cov: &DMatrix<f64>, idx: Vec<usize>) -> Result<Self> {
        if idx.is_empty() {
            return Ok(Self { idx, l_inv: DMatrix::zeros(0, 0), log_det: 0.0 });
        }
        let sub = DMatrix::from_fn(idx.len(), idx.len(), |i, j| cov[(idx[i], idx[j])]);
        let chol = sub
            .cholesky()
            .ok_or_else(|| Error::Numerical("singular marginal covariance in Monte-Carlo estimate".into()))?;
        let l = chol.l();
        let log_det = 2.0 * l.diagonal().iter().map(|d| d.ln()).sum::<f64>();
        let l_inv = l
            .solve_lower_triangular(&DMatrix::identity(idx.len(), idx.len()))
            .ok_or_else(|| Error::Numerical("triangular solve failed".into()))?;
        Ok(Self { idx, l_inv, log_det })
    }

    /// Real log-density up to the dimension constant.
    fn log_density(&self, z: &DVector<f64>, buf: &mut DVector<f64>) -> f64 {
        let d = self.idx.len();
        let mut q = 0.0;
        for i in 0..d {
            let mut s = 0.0;
            for j in 0..=i {
                s += self.l_inv[(i, j)] * z[self.idx[j]];
            }
            buf[i] = s;
            q += s * s;
        }
        -0.5 * (self.log_det + q)
    }
}

/// Monte-Carlo estimate of `I(A; B | C)` for a circularly symmetric complex
/// Gaussian vector with covariance `cov`; `a`, `b`, `c` index its entries.
///
/// Each complex sample is drawn as two real `N(0, cov)` vectors and scored
/// by the log-density ratio `log p(a,b,c) p(c) / (p(a,c) p(b,c))`, whose
/// mean is the mutual information.
pub fn gaussian_mi_mc(
    cov: &DMatrix<f64>,
    a: &[usize],
    b: &[usize],
    c: &[usize],
    samples: usize,
    seed: u64,
) -> Result<MiEstimate> {
    let dim = cov.nrows();
    if cov.ncols() != dim {
        return Err(Error::Domain("covariance must be square".into()));
    }
    if samples < MIN_SAMPLES {
        return Err(Error::Domain(format!("at least {MIN_SAMPLES} samples required, got {samples}")));
    }
    if a.is_empty() || b.is_empty() {
        return Err(Error::VariableSet("both sides of the mutual information must be non-empty".into()));
    }
    let mut seen = vec![false; dim];
    for &i in a.iter().chain(b).chain(c) {
        if i >= dim {
            return Err(Error::Index(format!("entry {i} outside a {dim}-dimensional covariance")));
        }
        if std::mem::replace(&mut seen[i], true) {
            return Err(Error::VariableSet(format!("entry {i} appears in more than one set")));
        }
    }
    if (0..dim).any(|i| (0..i).any(|j| (cov[(i, j)] - cov[(j, i)]).abs() > 1e-12 * (cov[(i, i)] + cov[(j, j)]).max(1.0))) {
        return Err(Error::Domain("covariance must be symmetric".into()));
    }
    check_psd(cov)?;

    let join = |x: &[usize], y: &[usize]| -> Vec<usize> { x.iter().chain(y).copied().collect() };
    let abc = Marginal::new(cov, join(&join(a, b), c))?;
    let cc = Marginal::new(cov, c.to_vec())?;
    let ac = Marginal::new(cov, join(a, c))?;
    let bc = Marginal::new(cov, join(b, c))?;

    // sampling factor that tolerates semidefinite covariances
    let eig = cov.clone().symmetric_eigen();
    let root = &eig.eigenvectors * DMatrix::from_diagonal(&eig.eigenvalues.map(|v| v.max(0.0).sqrt()));

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut w = DVector::zeros(dim);
    let mut z = DVector::zeros(dim);
    let mut buf = DVector::zeros(dim);
    let mut mean = 0.0;
    let mut m2 = 0.0;
    for t in 0..samples {
        let mut ratio = 0.0;
        for _ in 0..2 {
            for v in w.iter_mut() {
                *v = StandardNormal.sample(&mut rng);
            }
            root.mul_to(&w, &mut z);
            ratio += abc.log_density(&z, &mut buf) + cc.log_density(&z, &mut buf)
                - ac.log_density(&z, &mut buf)
                - bc.log_density(&z, &mut buf);
        }
        let bits = ratio / std::f64::consts::LN_2;
        let delta = bits - mean;
        mean += delta / (t + 1) as f64;
        m2 += delta * (bits - mean);
    }
    let variance = m2 / (samples - 1) as f64;
    Ok(MiEstimate { estimate: mean, stderr: (variance / samples as f64).sqrt(), samples })
}

/// Closed form of the same quantity:
/// `log2 det S_ac + log2 det S_bc - log2 det S_abc - log2 det S_c`.
pub fn gaussian_mi_exact(cov: &DMatrix<f64>, a: &[usize], b: &[usize], c: &[usize]) -> Result<f64> {
    let log2_det = |idx: Vec<usize>| -> Result<f64> {
        Ok(Marginal::new(cov, idx)?.log_det / std::f64::consts::LN_2)
    };
    let join = |x: &[usize], y: &[usize]| -> Vec<usize> { x.iter().chain(y).copied().collect() };
    let v = log2_det(join(a, c))? + log2_det(join(b, c))? - log2_det(join(&join(a, b), c))? - log2_det(c.to_vec())?;
    Ok(v.max(0.0))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn scalar_snr_ten_gives_one_hop_rate() {
        // X unit power, Y = sqrt(10) X + Z
        let s = 10f64.sqrt();
        let cov = DMatrix::from_row_slice(2, 2, &[1.0, s, s, 11.0]);
        let r = gaussian_mi_mc(&cov, &[0], &[1], &[], 100_000, 7).unwrap();
        assert!(r.agrees_with(3.4594, 3.0), "{r:?}");
        assert!((gaussian_mi_exact(&cov, &[0], &[1], &[]).unwrap() - 11f64.log2()).abs() < 1e-12);
    }

    #[test]
    fn zero_cross_covariance_gives_zero() {
        let cov = DMatrix::from_row_slice(2, 2, &[2.0, 0.0, 0.0, 3.0]);
        let r = gaussian_mi_mc(&cov, &[0], &[1], &[], 20_000, 1).unwrap();
        assert!(r.estimate.abs() < 1e-12);
    }

    #[test]
    fn two_by_two_matches_determinant_ratio() {
        let cov = DMatrix::from_row_slice(3, 3, &[2.0, 0.8, 0.5, 0.8, 1.5, 0.3, 0.5, 0.3, 1.0]);
        let exact = {
            let det = |m: DMatrix<f64>| m.determinant();
            let s_ac = DMatrix::from_row_slice(2, 2, &[2.0, 0.5, 0.5, 1.0]);
            let s_bc = DMatrix::from_row_slice(2, 2, &[1.5, 0.3, 0.3, 1.0]);
            (det(s_ac) * det(s_bc) / (det(cov.clone()) * 1.0)).log2()
        };
        assert!((gaussian_mi_exact(&cov, &[0], &[1], &[2]).unwrap() - exact).abs() < 1e-12);
        let r = gaussian_mi_mc(&cov, &[0], &[1], &[2], 50_000, 3).unwrap();
        assert!(r.agrees_with(exact, 4.0), "{r:?} vs {exact}");
    }

    #[test]
    fn rejects_bad_inputs() {
        let cov = DMatrix::from_row_slice(2, 2, &[1.0, 2.0, 2.0, 1.0]);
        assert!(matches!(gaussian_mi_mc(&cov, &[0], &[1], &[], 10_000, 0), Err(Error::NotPsd { .. })));
        let ok = DMatrix::identity(2, 2);
        assert!(gaussian_mi_mc(&ok, &[0], &[1], &[], 100, 0).is_err());
        assert!(gaussian_mi_mc(&ok, &[0], &[0], &[], 10_000, 0).is_err());
        assert!(gaussian_mi_mc(&ok, &[0], &[], &[], 10_000, 0).is_err());
        assert!(gaussian_mi_mc(&ok, &[0], &[2], &[], 10_000, 0).is_err());
    }

    #[test]
    fn seeded_estimates_repeat() {
        let cov = DMatrix::from_row_slice(2, 2, &[1.0, 0.5, 0.5, 1.0]);
        let x = gaussian_mi_mc(&cov, &[0], &[1], &[], 10_000, 5).unwrap();
        let y = gaussian_mi_mc(&cov, &[0], &[1], &[], 10_000, 5).unwrap();
        assert_eq!(x, y);
    }
}
