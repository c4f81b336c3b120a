//! Maximum-likelihood fitting of the stochastic cusp with linear control maps.
//!
//! For every sample `t` the state and the two controls are linear in the
//! data:
//!
//! ```text
//! y[t]     = w0 + w1*Y[t,1] + ... + wq*Y[t,q]
//! alpha[t] = a0 + a1*X[t,1] + ... + ap*X[t,p]
//! beta[t]  = b0 + b1*Z[t,1] + ... + br*Z[t,r]
//! ```
//!
//! and `y[t]` follows the cusp density with controls `(alpha[t], beta[t])`.
//! With [`StateMap::Linear`] the state map is estimated and the likelihood
//! carries the Jacobian `|w1|`, so it is a density of the observed first
//! state column. [`StateMap::Identity`] pins `w = (0, 1)`.
//!
//! The negative log-likelihood gradient is analytic: `d log psi / d alpha`
//! and `d log psi / d beta` are the first and half the second moment of the
//! density, which the quadrature returns in the same pass as `psi`.

use nalgebra::{DMatrix, DVector};
use rand_distr::{Distribution, StandardNormal};

use crate::cusp_model::{self, CuspParams};
use crate::dataset::{Dataset, FeatureId};
use crate::error::{Error, Result};
use crate::optim::{self, BfgsOptions};
use crate::seed;

/// A column addressed by role.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ColumnRef {
    Outcome,
    Feature(FeatureId),
}

/// How the latent cusp state relates to the observed state columns.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum StateMap {
    /// `y = w0 + sum w_j Y_j` with all `w` estimated.
    #[default]
    Linear,
    /// `y = Y_1` exactly; requires a single state column.
    Identity,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CuspRegressionSpec {
    pub state_cols: Vec<ColumnRef>,
    pub alpha_cols: Vec<ColumnRef>,
    pub beta_cols: Vec<ColumnRef>,
    pub state_map: StateMap,
}

impl CuspRegressionSpec {
    /// Outcome as state, `asymmetry` driving alpha, `bifurcation` driving beta.
    pub fn for_feature(bifurcation: FeatureId, asymmetry: FeatureId) -> Self {
        CuspRegressionSpec {
            state_cols: vec![ColumnRef::Outcome],
            alpha_cols: vec![ColumnRef::Feature(asymmetry)],
            beta_cols: vec![ColumnRef::Feature(bifurcation)],
            state_map: StateMap::Linear,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let groups = [
            ("state", &self.state_cols),
            ("alpha", &self.alpha_cols),
            ("beta", &self.beta_cols),
        ];
        for (name, cols) in groups {
            if cols.is_empty() {
                return Err(Error::invalid(format!("{name} column list is empty")));
            }
        }
        let mut all: Vec<&ColumnRef> = groups.iter().flat_map(|(_, c)| c.iter()).collect();
        let total = all.len();
        all.sort_by_key(|c| match c {
            ColumnRef::Outcome => 0,
            ColumnRef::Feature(id) => id.0,
        });
        all.dedup();
        if all.len() != total {
            return Err(Error::invalid(
                "state, alpha and beta columns must be pairwise disjoint",
            ));
        }
        if self.state_map == StateMap::Identity && self.state_cols.len() != 1 {
            return Err(Error::invalid("identity state map needs exactly one state column"));
        }
        Ok(())
    }

    /// Number of free parameters `k`.
    pub fn n_params(&self) -> usize {
        let w = match self.state_map {
            StateMap::Linear => self.state_cols.len() + 1,
            StateMap::Identity => 0,
        };
        w + self.alpha_cols.len() + 1 + self.beta_cols.len() + 1
    }
}

/// Full coefficient vectors, including fixed entries.
#[derive(Debug, Clone, PartialEq)]
pub struct CuspCoefficients {
    pub w: Vec<f64>,
    pub a: Vec<f64>,
    pub b: Vec<f64>,
}

/// Columns gathered for a fit. Values are used as given.
#[derive(Debug, Clone)]
pub struct CuspDesign {
    state: Vec<Vec<f64>>,
    alpha: Vec<Vec<f64>>,
    beta: Vec<Vec<f64>>,
    map: StateMap,
    n: usize,
}

impl CuspDesign {
    pub fn new(
        state: Vec<Vec<f64>>,
        alpha: Vec<Vec<f64>>,
        beta: Vec<Vec<f64>>,
        map: StateMap,
    ) -> Result<Self> {
        if state.is_empty() || alpha.is_empty() || beta.is_empty() {
            return Err(Error::invalid("every column group needs at least one column"));
        }
        if map == StateMap::Identity && state.len() != 1 {
            return Err(Error::invalid("identity state map needs exactly one state column"));
        }
        let n = state[0].len();
        if n == 0 {
            return Err(Error::invalid("no samples"));
        }
        for col in state.iter().chain(&alpha).chain(&beta) {
            if col.len() != n {
                return Err(Error::LengthMismatch {
                    left: n,
                    right: col.len(),
                });
            }
            if col.iter().any(|v| !v.is_finite()) {
                return Err(Error::invalid("non-finite value in cusp design"));
            }
        }
        Ok(CuspDesign {
            state,
            alpha,
            beta,
            map,
            n,
        })
    }

    /// Gather the (normalized) columns named by `spec`.
    pub fn from_dataset(ds: &Dataset, spec: &CuspRegressionSpec) -> Result<Self> {
        spec.validate()?;
        let gather = |cols: &[ColumnRef]| -> Result<Vec<Vec<f64>>> {
            cols.iter()
                .map(|c| match c {
                    ColumnRef::Outcome => Ok(ds.outcome().to_vec()),
                    ColumnRef::Feature(id) => ds.feature(*id).map(<[f64]>::to_vec),
                })
                .collect()
        };
        CuspDesign::new(
            gather(&spec.state_cols)?,
            gather(&spec.alpha_cols)?,
            gather(&spec.beta_cols)?,
            spec.state_map,
        )
    }

    pub fn n_samples(&self) -> usize {
        self.n
    }

    pub fn n_params(&self) -> usize {
        self.w_len() + self.alpha.len() + 1 + self.beta.len() + 1
    }

    fn w_len(&self) -> usize {
        match self.map {
            StateMap::Linear => self.state.len() + 1,
            StateMap::Identity => 0,
        }
    }

    /// Split a flat parameter vector `[w.., a.., b..]` (no `w` for the
    /// identity map) into full coefficient vectors.
    pub fn unpack(&self, params: &[f64]) -> Result<CuspCoefficients> {
        if params.len() != self.n_params() {
            return Err(Error::LengthMismatch {
                left: self.n_params(),
                right: params.len(),
            });
        }
        let (w, rest) = params.split_at(self.w_len());
        let (a, b) = rest.split_at(self.alpha.len() + 1);
        let w = match self.map {
            StateMap::Linear => w.to_vec(),
            StateMap::Identity => vec![0.0, 1.0],
        };
        Ok(CuspCoefficients {
            w,
            a: a.to_vec(),
            b: b.to_vec(),
        })
    }

    pub fn pack(&self, c: &CuspCoefficients) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.n_params());
        if self.map == StateMap::Linear {
            out.extend_from_slice(&c.w);
        }
        out.extend_from_slice(&c.a);
        out.extend_from_slice(&c.b);
        out
    }

    fn linear(coef: &[f64], cols: &[Vec<f64>], t: usize) -> f64 {
        coef[1..]
            .iter()
            .zip(cols)
            .fold(coef[0], |acc, (c, col)| acc + c * col[t])
    }

    fn sample_terms(&self, c: &CuspCoefficients, t: usize) -> (f64, CuspParams) {
        let y = Self::linear(&c.w, &self.state, t);
        let p = CuspParams::new(
            Self::linear(&c.a, &self.alpha, t),
            Self::linear(&c.b, &self.beta, t),
        );
        (y, p)
    }

    /// Controls `(alpha[t], beta[t])` and latent states for every sample.
    pub fn evaluate(&self, c: &CuspCoefficients) -> Vec<(f64, CuspParams)> {
        (0..self.n).map(|t| self.sample_terms(c, t)).collect()
    }

    pub fn negative_log_likelihood(&self, params: &[f64]) -> Result<f64> {
        let c = self.unpack(params)?;
        let jacobian = self.log_jacobian(&c);
        let mut nll = 0.0;
        for t in 0..self.n {
            let (y, p) = self.sample_terms(&c, t);
            let log_psi = cusp_model::log_normalizer(p).map_err(|e| Error::AtSample {
                sample: t,
                source: Box::new(e),
            })?;
            nll += log_psi - p.exponent(y) - jacobian;
        }
        Ok(nll)
    }

    fn log_jacobian(&self, c: &CuspCoefficients) -> f64 {
        match self.map {
            StateMap::Linear => c.w[1].abs().ln(),
            StateMap::Identity => 0.0,
        }
    }

    /// Negative log-likelihood and its analytic gradient.
    pub fn nll_and_gradient(&self, params: &[f64]) -> Result<(f64, Vec<f64>)> {
        let c = self.unpack(params)?;
        let jacobian = self.log_jacobian(&c);
        let wl = self.w_len();
        let al = self.alpha.len() + 1;
        let mut grad = vec![0.0; params.len()];
        let mut nll = 0.0;
        for t in 0..self.n {
            let (y, p) = self.sample_terms(&c, t);
            let m = cusp_model::moments(p).map_err(|e| Error::AtSample {
                sample: t,
                source: Box::new(e),
            })?;
            nll += m.log_psi - p.exponent(y) - jacobian;

            let d_alpha = m.mean - y;
            let d_beta = 0.5 * (m.second - y * y);
            grad[wl] += d_alpha;
            for (j, col) in self.alpha.iter().enumerate() {
                grad[wl + 1 + j] += d_alpha * col[t];
            }
            grad[wl + al] += d_beta;
            for (j, col) in self.beta.iter().enumerate() {
                grad[wl + al + 1 + j] += d_beta * col[t];
            }
            if self.map == StateMap::Linear {
                let d_y = -(p.alpha + p.beta * y - y * y * y);
                grad[0] += d_y;
                for (j, col) in self.state.iter().enumerate() {
                    grad[1 + j] += d_y * col[t];
                }
            }
        }
        if self.map == StateMap::Linear {
            grad[1] -= self.n as f64 / c.w[1];
        }
        Ok((nll, grad))
    }

    /// Moment-based starting point.
    ///
    /// The latent state is started as the standardized first state column
    /// (linear map) or the column itself (identity map). Alpha coefficients
    /// come from regressing that state on the alpha covariates; beta slopes
    /// from the correlation of each beta covariate with the squared state.
    pub fn initial_guess(&self) -> Vec<f64> {
        let s0 = &self.state[0];
        let (mean, sd) = mean_sd(s0);
        let sd = if sd > 0.0 { sd } else { 1.0 };
        let (w, y, precision): (Vec<f64>, Vec<f64>, f64) = match self.map {
            StateMap::Linear => {
                let mut w = vec![0.0; self.state.len() + 1];
                w[0] = -mean / sd;
                w[1] = 1.0 / sd;
                (w, s0.iter().map(|v| (v - mean) / sd).collect(), 1.0)
            }
            StateMap::Identity => (Vec::new(), s0.clone(), 1.0 / (sd * sd)),
        };

        let mut a = least_squares(&self.alpha, &y).unwrap_or_else(|| {
            let mut a = vec![0.0; self.alpha.len() + 1];
            a[0] = mean_sd(&y).0;
            a
        });
        a.iter_mut().for_each(|v| *v *= precision);

        let y2: Vec<f64> = y.iter().map(|v| v * v).collect();
        let mut b = vec![0.0; self.beta.len() + 1];
        if self.map == StateMap::Identity {
            b[0] = -precision;
        }
        for (j, col) in self.beta.iter().enumerate() {
            b[j + 1] = correlation(col, &y2);
        }

        self.pack(&CuspCoefficients { w, a, b })
    }

    fn perturb(&self, base: &[f64], scale: f64, rng: &mut impl rand::Rng) -> Vec<f64> {
        base.iter()
            .enumerate()
            .map(|(i, &v)| {
                let z: f64 = StandardNormal.sample(rng);
                if self.map == StateMap::Linear && i == 1 {
                    // Keep the Jacobian coefficient away from zero.
                    v * (scale * z).exp()
                } else {
                    v + scale * z * v.abs().max(1.0)
                }
            })
            .collect()
    }
}

fn mean_sd(x: &[f64]) -> (f64, f64) {
    let n = x.len() as f64;
    let mean = x.iter().sum::<f64>() / n;
    let var = x.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n;
    (mean, var.sqrt())
}

fn correlation(x: &[f64], y: &[f64]) -> f64 {
    let (mx, sx) = mean_sd(x);
    let (my, sy) = mean_sd(y);
    if sx == 0.0 || sy == 0.0 {
        return 0.0;
    }
    let cov = x
        .iter()
        .zip(y)
        .map(|(a, b)| (a - mx) * (b - my))
        .sum::<f64>()
        / x.len() as f64;
    cov / (sx * sy)
}

/// Intercept-first OLS coefficients, `None` when the design is singular.
fn least_squares(cols: &[Vec<f64>], y: &[f64]) -> Option<Vec<f64>> {
    let n = y.len();
    let x = DMatrix::from_fn(n, cols.len() + 1, |r, c| if c == 0 { 1.0 } else { cols[c - 1][r] });
    let xtx = x.transpose() * &x;
    let xty = x.transpose() * DVector::from_column_slice(y);
    xtx.cholesky().map(|ch| ch.solve(&xty).iter().copied().collect())
}

#[derive(Debug, Clone, Copy)]
pub struct FitOptions {
    /// Number of optimizer starts: one moment-based start plus perturbations.
    pub starts: usize,
    /// Perturbation scale for the extra starts.
    pub perturbation: f64,
    pub bfgs: BfgsOptions,
}

impl Default for FitOptions {
    fn default() -> Self {
        FitOptions {
            starts: 5,
            perturbation: 0.5,
            bfgs: BfgsOptions::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CuspFit {
    pub coefficients: CuspCoefficients,
    /// Maximized log-likelihood in nats.
    pub loglik: f64,
    /// Number of free parameters.
    pub k: usize,
    pub aic: f64,
    pub converged: bool,
    pub iterations: usize,
    pub grad_norm: f64,
}

/// `-2 * loglik + 2 * k`.
pub fn aic(loglik: f64, k: usize) -> f64 {
    -2.0 * loglik + 2.0 * k as f64
}

pub fn aic_of(fit: &CuspFit) -> f64 {
    aic(fit.loglik, fit.k)
}

/// Fit `spec` on the normalized columns of `ds`.
pub fn fit(
    ds: &Dataset,
    spec: &CuspRegressionSpec,
    init: Option<&[f64]>,
    seed: u64,
    opts: &FitOptions,
) -> Result<CuspFit> {
    let design = CuspDesign::from_dataset(ds, spec)?;
    fit_design(&design, init, seed, opts)
}

/// Multistart BFGS on a prepared design.
///
/// Returns the converged start with the highest likelihood, or the best
/// unconverged one flagged `converged = false`.
pub fn fit_design(
    design: &CuspDesign,
    init: Option<&[f64]>,
    seed: u64,
    opts: &FitOptions,
) -> Result<CuspFit> {
    if design.state[0].iter().all(|&v| v == design.state[0][0]) {
        return Err(Error::FitFailed("state column is constant".into()));
    }
    let base = match init {
        Some(x) if x.len() == design.n_params() => x.to_vec(),
        Some(x) => {
            return Err(Error::LengthMismatch {
                left: design.n_params(),
                right: x.len(),
            })
        }
        None => design.initial_guess(),
    };
    let mut rng = seed::rng(seed);
    let starts = opts.starts.max(1);
    let mut best: Option<optim::Minimum> = None;
    for s in 0..starts {
        let x0 = if s == 0 {
            base.clone()
        } else {
            design.perturb(&base, opts.perturbation, &mut rng)
        };
        let Some(m) = optim::minimize(|x| design.nll_and_gradient(x).ok(), &x0, &opts.bfgs)
        else {
            continue;
        };
        let better = match &best {
            None => true,
            Some(b) => (m.converged, -m.value) > (b.converged, -b.value),
        };
        if better {
            best = Some(m);
        }
    }
    let best = best.ok_or_else(|| {
        Error::FitFailed("likelihood could not be evaluated at any start".into())
    })?;

    let mut coefficients = design.unpack(&best.x)?;
    if design.map == StateMap::Linear && coefficients.w[1] < 0.0 {
        // (y, alpha) -> (-y, -alpha) leaves the density unchanged.
        coefficients.w.iter_mut().for_each(|v| *v = -*v);
        coefficients.a.iter_mut().for_each(|v| *v = -*v);
    }
    let loglik = -best.value;
    let k = design.n_params();
    Ok(CuspFit {
        coefficients,
        loglik,
        k,
        aic: aic(loglik, k),
        converged: best.converged,
        iterations: best.iterations,
        grad_norm: best.grad_norm,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cusp_model::CuspSampler;
    use crate::dataset::OutcomeSelector;
    use rand::Rng;

    fn uniform(n: usize, seed: u64) -> Vec<f64> {
        let mut rng = seed::rng(seed);
        (0..n).map(|_| rng.random::<f64>()).collect()
    }

    /// Draw states at controls `a0 + a1*x`, `b0 + b1*z`, observed as `(y - w0) / w1`.
    fn synthetic(n: usize, truth: &CuspCoefficients, seed: u64) -> CuspDesign {
        let x = uniform(n, seed ^ 1);
        let z = uniform(n, seed ^ 2);
        let mut rng = seed::rng(seed);
        let obs = (0..n)
            .map(|t| {
                let p = CuspParams::new(truth.a[0] + truth.a[1] * x[t], truth.b[0] + truth.b[1] * z[t]);
                let y = CuspSampler::new(p).unwrap().sample(&mut rng);
                (y - truth.w[0]) / truth.w[1]
            })
            .collect();
        CuspDesign::new(vec![obs], vec![x], vec![z], StateMap::Linear).unwrap()
    }

    #[test]
    fn k_counts() {
        let spec = CuspRegressionSpec::for_feature(FeatureId(1), FeatureId(2));
        assert_eq!(spec.n_params(), 6);
        let spec = CuspRegressionSpec {
            state_map: StateMap::Identity,
            ..spec
        };
        assert_eq!(spec.n_params(), 4);
    }

    #[test]
    fn spec_validation() {
        let mut spec = CuspRegressionSpec::for_feature(FeatureId(1), FeatureId(1));
        assert!(spec.validate().is_err());
        spec.alpha_cols = vec![];
        assert!(spec.validate().is_err());
        let spec = CuspRegressionSpec {
            state_cols: vec![ColumnRef::Outcome, ColumnRef::Feature(FeatureId(3))],
            alpha_cols: vec![ColumnRef::Feature(FeatureId(1))],
            beta_cols: vec![ColumnRef::Feature(FeatureId(2))],
            state_map: StateMap::Identity,
        };
        assert!(spec.validate().is_err());
    }

    #[test]
    fn single_zero_state_gives_log_psi_origin() {
        let d = CuspDesign::new(vec![vec![0.0]], vec![vec![0.3]], vec![vec![0.7]], StateMap::Identity)
            .unwrap();
        let nll = d.negative_log_likelihood(&[0.0, 0.0, 0.0, 0.0]).unwrap();
        let psi = statrs::function::gamma::gamma(0.25) / 2f64.sqrt();
        assert!((nll - psi.ln()).abs() < 1e-10);
        assert!((nll - 0.9416).abs() < 2e-4);
    }

    #[test]
    fn duplicated_samples_double_nll() {
        let d = synthetic(30, &CuspCoefficients { w: vec![0.0, 1.0], a: vec![0.2, 1.0], b: vec![1.0, 0.5] }, 5);
        let twice = CuspDesign::new(
            vec![[d.state[0].clone(), d.state[0].clone()].concat()],
            vec![[d.alpha[0].clone(), d.alpha[0].clone()].concat()],
            vec![[d.beta[0].clone(), d.beta[0].clone()].concat()],
            StateMap::Linear,
        )
        .unwrap();
        let params = [0.1, 0.9, 0.3, -0.2, 0.5, 1.0];
        let one = d.negative_log_likelihood(&params).unwrap();
        let two = twice.negative_log_likelihood(&params).unwrap();
        assert!((two - 2.0 * one).abs() <= 1e-12 * one.abs());
    }

    #[test]
    fn truth_dominates_origin() {
        let n = 500;
        let mut rng = seed::rng(11);
        let sampler = CuspSampler::new(CuspParams::new(1.0, 2.0)).unwrap();
        let y: Vec<f64> = (0..n).map(|_| sampler.sample(&mut rng)).collect();
        let d = CuspDesign::new(vec![y], vec![vec![0.0; n]], vec![vec![0.0; n]], StateMap::Identity)
            .unwrap();
        let truth = d.negative_log_likelihood(&[1.0, 0.0, 2.0, 0.0]).unwrap();
        let origin = d.negative_log_likelihood(&[0.0, 0.0, 0.0, 0.0]).unwrap();
        assert!(truth <= origin, "{truth} > {origin}");
    }

    #[test]
    fn gradient_matches_central_differences() {
        let d = synthetic(
            200,
            &CuspCoefficients { w: vec![0.5, 2.0], a: vec![-0.5, 1.0], b: vec![0.5, 2.0] },
            7,
        );
        let mut rng = seed::rng(99);
        let h = 1e-5;
        for _ in 0..5 {
            let x: Vec<f64> = (0..6)
                .map(|i| if i == 1 { rng.random_range(0.5..3.0) } else { rng.random_range(-2.0..2.0) })
                .collect();
            let (_, g) = d.nll_and_gradient(&x).unwrap();
            for i in 0..6 {
                let mut xp = x.clone();
                let mut xm = x.clone();
                xp[i] += h;
                xm[i] -= h;
                let fd = (d.negative_log_likelihood(&xp).unwrap()
                    - d.negative_log_likelihood(&xm).unwrap())
                    / (2.0 * h);
                let rel = (fd - g[i]).abs() / g[i].abs().max(1.0);
                assert!(rel <= 1e-4, "param {i}: fd {fd} analytic {}", g[i]);
            }
        }
    }

    #[test]
    fn recovers_known_coefficients() {
        let truth = CuspCoefficients {
            w: vec![0.0, 1.0],
            a: vec![0.5, -1.0],
            b: vec![-0.5, 3.0],
        };
        let d = synthetic(2000, &truth, 21);
        let fit = fit_design(&d, None, 1, &FitOptions::default()).unwrap();
        assert!(fit.converged, "{fit:?}");
        let got = d.pack(&fit.coefficients);
        for (g, t) in got.iter().zip(d.pack(&truth)) {
            assert!((g - t).abs() <= 0.2, "{got:?} vs truth");
        }
        assert_eq!(fit.aic, -2.0 * fit.loglik + 2.0 * 6.0);
        assert!(fit.grad_norm <= 1e-6 * (1.0 + fit.loglik.abs()));
    }

    #[test]
    fn affine_covariate_change_is_absorbed() {
        let truth = CuspCoefficients {
            w: vec![0.2, 1.5],
            a: vec![0.3, 0.8],
            b: vec![0.5, 1.5],
        };
        let d = synthetic(300, &truth, 3);
        let shifted = CuspDesign::new(
            d.state.clone(),
            vec![d.alpha[0].iter().map(|x| 2.0 * x + 1.0).collect()],
            d.beta.clone(),
            StateMap::Linear,
        )
        .unwrap();
        let f1 = fit_design(&d, None, 4, &FitOptions::default()).unwrap();
        let f2 = fit_design(&shifted, None, 4, &FitOptions::default()).unwrap();
        assert!((f1.loglik - f2.loglik).abs() <= 1e-6, "{} vs {}", f1.loglik, f2.loglik);
    }

    #[test]
    fn fit_is_deterministic_and_dataset_wired() {
        let n = 120;
        let x = uniform(n, 1);
        let z = uniform(n, 2);
        let mut rng = seed::rng(8);
        let y: Vec<f64> = (0..n)
            .map(|t| {
                CuspSampler::new(CuspParams::new(0.5 * x[t], 3.0 * z[t] - 1.0))
                    .unwrap()
                    .sample(&mut rng)
            })
            .collect();
        let ds = Dataset::from_columns(
            vec!["z".into(), "x".into(), "y".into()],
            vec![z, x, y],
            OutcomeSelector::Last,
        )
        .unwrap();
        let spec = CuspRegressionSpec::for_feature(FeatureId(1), FeatureId(2));
        let a = fit(&ds, &spec, None, 5, &FitOptions::default()).unwrap();
        let b = fit(&ds, &spec, None, 5, &FitOptions::default()).unwrap();
        assert_eq!(a, b);
        assert!(a.coefficients.w[1] > 0.0);
        assert_eq!(aic_of(&a), a.aic);
    }

    #[test]
    fn constant_state_is_rejected() {
        let d = CuspDesign::new(vec![vec![0.0; 10]], vec![uniform(10, 1)], vec![uniform(10, 2)], StateMap::Linear)
            .unwrap();
        assert!(matches!(fit_design(&d, None, 0, &FitOptions::default()), Err(Error::FitFailed(_))));
    }

    #[test]
    fn aic_arithmetic() {
        assert_eq!(aic(0.0, 0), 0.0);
        assert_eq!(aic(-100.0, 6), 212.0);
        assert!(aic(-10.0, 4) < aic(-11.0, 4));
        assert!((1.0f64 / 318.066 - 0.003144).abs() < 5e-7);
    }
}
