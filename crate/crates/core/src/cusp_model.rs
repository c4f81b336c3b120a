//! The canonical cusp: potential, equilibria and the stationary density.
//!
//! With control parameters `alpha` (asymmetry) and `beta` (bifurcation) the
//! negated potential is
//!
//! ```text
//! -V(y) = alpha*y + beta*y^2/2 - y^4/4
//! ```
//!
//! whose equilibria solve `alpha + beta*y - y^3 = 0`. The stochastic cusp
//! density is `exp(-V(y)) / psi(alpha, beta)`. The normalizer `psi` has no
//! closed form and is computed by adaptive quadrature over a window that
//! brackets every stationary point. The exponent is shifted by its maximum and
//! expanded around the nearest mode, so large controls neither overflow nor
//! lose precision to cancellation.

use rand::Rng;

use crate::error::{Error, Result};
use crate::quadrature;

/// Relative tolerance on the scaled normalizer.
const QUAD_REL_TOL: f64 = 1e-12;
const QUAD_MAX_PANELS: usize = 4000;
/// Integration window ends where the integrand has fallen by `exp(-TAIL_DROP)`.
const TAIL_DROP: f64 = 46.0;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CuspParams {
    pub alpha: f64,
    pub beta: f64,
}

impl CuspParams {
    pub fn new(alpha: f64, beta: f64) -> Self {
        CuspParams { alpha, beta }
    }

    pub fn is_finite(&self) -> bool {
        self.alpha.is_finite() && self.beta.is_finite()
    }

    /// `-V(y)`, the log of the unnormalized density.
    #[inline]
    pub fn exponent(&self, y: f64) -> f64 {
        let y2 = y * y;
        self.alpha * y + 0.5 * self.beta * y2 - 0.25 * y2 * y2
    }
}

/// `V(y; alpha, beta) = -(alpha*y + beta*y^2/2 - y^4/4)`.
pub fn potential(y: f64, p: CuspParams) -> f64 {
    -p.exponent(y)
}

/// Cardan discriminant `27*alpha^2 - 4*beta^3`.
///
/// Positive: one real equilibrium. Negative: three. Zero: degenerate.
pub fn discriminant(p: CuspParams) -> f64 {
    27.0 * p.alpha * p.alpha - 4.0 * p.beta * p.beta * p.beta
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Stability {
    Stable,
    Unstable,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EquilibriumSet {
    /// Ascending.
    pub roots: Vec<f64>,
    pub stability: Vec<Stability>,
    pub discriminant: f64,
}

impl EquilibriumSet {
    pub fn stable_roots(&self) -> impl Iterator<Item = f64> + '_ {
        self.roots
            .iter()
            .zip(&self.stability)
            .filter(|(_, s)| **s == Stability::Stable)
            .map(|(r, _)| *r)
    }
}

fn newton_polish(p: CuspParams, r: f64) -> f64 {
    let f = p.alpha + p.beta * r - r * r * r;
    let df = p.beta - 3.0 * r * r;
    if df != 0.0 {
        let next = r + f / (3.0 * r * r - p.beta);
        if next.is_finite() {
            return next;
        }
    }
    r
}

/// Real roots of `y^3 - beta*y - alpha = 0` with their stability.
///
/// Closed-form (trigonometric for three roots, Cardano for one) followed by a
/// Newton step. At a degenerate point (`discriminant == 0` up to rounding,
/// cusp point excluded) the double root is reported once, as unstable.
pub fn equilibria(p: CuspParams) -> EquilibriumSet {
    let (alpha, beta) = (p.alpha, p.beta);
    let delta = discriminant(p);
    let scale = 27.0 * alpha * alpha + 4.0 * beta.abs().powi(3);
    let degenerate = delta.abs() <= 8.0 * f64::EPSILON * scale;

    let (roots, stability) = if scale == 0.0 {
        (vec![0.0], vec![Stability::Stable])
    } else if degenerate && beta > 0.0 {
        let simple = 3.0 * alpha / beta;
        let double = -1.5 * alpha / beta;
        let simple = newton_polish(p, simple);
        if simple < double {
            (
                vec![simple, double],
                vec![Stability::Stable, Stability::Unstable],
            )
        } else {
            (
                vec![double, simple],
                vec![Stability::Unstable, Stability::Stable],
            )
        }
    } else if delta < 0.0 {
        // beta > 0 here.
        let m = 2.0 * (beta / 3.0).sqrt();
        let arg = (1.5 * alpha / beta * (3.0 / beta).sqrt()).clamp(-1.0, 1.0);
        let theta = arg.acos() / 3.0;
        let tau = 2.0 * std::f64::consts::PI / 3.0;
        let mut r: Vec<f64> = (0..3)
            .map(|k| newton_polish(p, m * (theta - tau * k as f64).cos()))
            .collect();
        r.sort_by(f64::total_cmp);
        (
            r,
            vec![Stability::Stable, Stability::Unstable, Stability::Stable],
        )
    } else {
        let s = (delta / 108.0).sqrt();
        let u = (0.5 * alpha + if alpha >= 0.0 { s } else { -s }).cbrt();
        let y = if u == 0.0 { 0.0 } else { u + beta / (3.0 * u) };
        (vec![newton_polish(p, y)], vec![Stability::Stable])
    };
    EquilibriumSet {
        roots,
        stability,
        discriminant: delta,
    }
}

/// Normalizer and first two moments of the cusp density.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CuspMoments {
    /// `log psi(alpha, beta)`.
    pub log_psi: f64,
    /// `E[y]`, equal to `d log psi / d alpha`.
    pub mean: f64,
    /// `E[y^2]`, equal to `2 * d log psi / d beta`.
    pub second: f64,
}

/// Local expansion of the exponent around a stationary point `c`.
///
/// `-V(c + u) - (-V(c))` written as a polynomial in `u`, which keeps the
/// integrand accurate near the modes when the controls are large.
#[derive(Debug, Clone, Copy)]
struct Expansion {
    center: f64,
    slope: f64,
    curvature: f64,
    /// `-V(c)` minus the global maximum of `-V`.
    offset: f64,
}

impl Expansion {
    fn new(p: CuspParams, center: f64, peak: f64) -> Self {
        Expansion {
            center,
            slope: p.alpha + p.beta * center - center * center * center,
            curvature: p.beta - 3.0 * center * center,
            offset: p.exponent(center) - peak,
        }
    }

    #[inline]
    fn log_integrand(&self, y: f64) -> f64 {
        let u = y - self.center;
        let u2 = u * u;
        self.offset + self.slope * u + 0.5 * self.curvature * u2 - self.center * u2 * u - 0.25 * u2 * u2
    }
}

/// Integration window with interior breakpoints at the equilibria, plus the
/// expansions used left and right of the middle breakpoint.
struct Window {
    points: Vec<f64>,
    split: f64,
    left: Expansion,
    right: Expansion,
}

impl Window {
    fn new(p: CuspParams) -> Self {
        let eq = equilibria(p);
        let peak = eq
            .roots
            .iter()
            .map(|&r| p.exponent(r))
            .fold(f64::NEG_INFINITY, f64::max);
        let stable: Vec<f64> = eq.stable_roots().collect();
        let (left_c, right_c, split) = if eq.roots.len() == 3 {
            (eq.roots[0], eq.roots[2], eq.roots[1])
        } else {
            (stable[0], stable[0], f64::INFINITY)
        };
        let left = Expansion::new(p, left_c, peak);
        let right = Expansion::new(p, right_c, peak);
        let first = eq.roots[0];
        let last = *eq.roots.last().expect("at least one root");
        let reach = |start: f64, dir: f64, e: &Expansion| {
            let mut d = 0.5;
            while e.log_integrand(start + dir * d) > -TAIL_DROP {
                d *= 2.0;
            }
            start + dir * d
        };
        let mut points = Vec::with_capacity(eq.roots.len() + 2);
        points.push(reach(first, -1.0, &left));
        points.extend_from_slice(&eq.roots);
        points.push(reach(last, 1.0, &right));
        points.dedup();
        Window {
            points,
            split,
            left,
            right,
        }
    }

    /// `log` of the integrand scaled so its maximum is about one.
    #[inline]
    fn log_integrand(&self, y: f64) -> f64 {
        if y < self.split {
            self.left.log_integrand(y)
        } else {
            self.right.log_integrand(y)
        }
    }
}

/// `log psi` together with `E[y]` and `E[y^2]`, from one quadrature pass.
pub fn moments(p: CuspParams) -> Result<CuspMoments> {
    let failure = || Error::Quadrature {
        alpha: p.alpha,
        beta: p.beta,
    };
    if !p.is_finite() {
        return Err(failure());
    }
    let window = Window::new(p);
    let integral = quadrature::integrate(
        |y| {
            let g = window.log_integrand(y).exp();
            [g, g * y, g * y * y]
        },
        &window.points,
        QUAD_REL_TOL,
        QUAD_MAX_PANELS,
    )
    .ok_or_else(failure)?;
    let [z0, z1, z2] = integral.value;
    if !(z0 > 0.0) {
        return Err(failure());
    }
    let peak = p.exponent(window.left.center) - window.left.offset;
    Ok(CuspMoments {
        log_psi: peak + z0.ln(),
        mean: z1 / z0,
        second: z2 / z0,
    })
}

/// `log psi(alpha, beta)` where `psi = integral of exp(alpha*y + beta*y^2/2 - y^4/4)`.
pub fn log_normalizer(p: CuspParams) -> Result<f64> {
    moments(p).map(|m| m.log_psi)
}

/// Density of the stochastic cusp at `y`.
pub fn density(y: f64, p: CuspParams) -> Result<f64> {
    let log_psi = log_normalizer(p)?;
    Ok(density_with(y, p, log_psi))
}

/// Density with a precomputed `log psi`; the exponent is clamped so the
/// result is always finite.
pub fn density_with(y: f64, p: CuspParams, log_psi: f64) -> f64 {
    (p.exponent(y) - log_psi).clamp(-745.0, 700.0).exp()
}

/// Inverse-CDF sampler on a fine grid over the integration window.
#[derive(Debug, Clone)]
pub struct CuspSampler {
    grid: Vec<f64>,
    cdf: Vec<f64>,
}

impl CuspSampler {
    const NODES: usize = 8192;

    pub fn new(p: CuspParams) -> Result<Self> {
        if !p.is_finite() {
            return Err(Error::Quadrature {
                alpha: p.alpha,
                beta: p.beta,
            });
        }
        let window = Window::new(p);
        let (lo, hi) = (window.points[0], *window.points.last().expect("window"));
        let step = (hi - lo) / (Self::NODES - 1) as f64;
        let grid: Vec<f64> = (0..Self::NODES).map(|i| lo + step * i as f64).collect();
        let dens: Vec<f64> = grid.iter().map(|&y| window.log_integrand(y).exp()).collect();
        let mut cdf = Vec::with_capacity(Self::NODES);
        let mut acc = 0.0;
        cdf.push(0.0);
        for w in dens.windows(2) {
            acc += 0.5 * (w[0] + w[1]) * step;
            cdf.push(acc);
        }
        for c in &mut cdf {
            *c /= acc;
        }
        Ok(CuspSampler { grid, cdf })
    }

    pub fn sample(&self, rng: &mut impl Rng) -> f64 {
        let u: f64 = rng.random();
        let i = self.cdf.partition_point(|&c| c < u).clamp(1, self.cdf.len() - 1);
        let (c0, c1) = (self.cdf[i - 1], self.cdf[i]);
        let t = if c1 > c0 { (u - c0) / (c1 - c0) } else { 0.5 };
        self.grid[i - 1] + t * (self.grid[i] - self.grid[i - 1])
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn psi_00() -> f64 {
        statrs::function::gamma::gamma(0.25) / 2f64.sqrt()
    }

    /// Plain trapezoid over a wide window; independent of the adaptive path.
    fn trapezoid_psi(p: CuspParams) -> f64 {
        let (lo, hi, n) = (-12.0, 12.0, 200_000);
        let h = (hi - lo) / n as f64;
        let f = |y: f64| p.exponent(y).exp();
        let inner: f64 = (1..n).map(|i| f(lo + h * i as f64)).sum();
        h * (0.5 * (f(lo) + f(hi)) + inner)
    }

    fn bisect(f: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64) -> f64 {
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if (f(lo) < 0.0) == (f(mid) < 0.0) {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        0.5 * (lo + hi)
    }

    #[test]
    fn potential_values() {
        assert_eq!(potential(0.0, CuspParams::new(3.0, -2.0)), 0.0);
        assert_eq!(potential(1.0, CuspParams::new(0.0, 0.0)), 0.25);
        assert_eq!(potential(2.0, CuspParams::new(1.0, 3.0)), -4.0);
    }

    #[test]
    fn discriminant_and_roots() {
        assert_eq!(discriminant(CuspParams::new(0.0, 0.0)), 0.0);
        let p = CuspParams::new(1.0, 0.0);
        assert_eq!(discriminant(p), 27.0);
        let eq = equilibria(p);
        assert_eq!(eq.roots.len(), 1);
        assert!((eq.roots[0] - 1.0).abs() < 1e-15);

        let p = CuspParams::new(0.0, 3.0);
        assert_eq!(discriminant(p), -108.0);
        let eq = equilibria(p);
        let s3 = 3f64.sqrt();
        let expected = [-s3, 0.0, s3];
        for (r, e) in eq.roots.iter().zip(expected) {
            assert!((r - e).abs() < 1e-14, "{r} vs {e}");
        }
        assert_eq!(
            eq.stability,
            vec![Stability::Stable, Stability::Unstable, Stability::Stable]
        );
        for &r in &eq.roots {
            // V'' = 3r^2 - beta
            let curvature = 3.0 * r * r - 3.0;
            assert!(curvature.abs() > 1.0);
        }
    }

    #[test]
    fn cusp_point_single_stable_root() {
        let eq = equilibria(CuspParams::new(0.0, 0.0));
        assert_eq!(eq.roots, vec![0.0]);
        assert_eq!(eq.stability, vec![Stability::Stable]);
    }

    #[test]
    fn large_alpha_single_root_matches_bisection() {
        let p = CuspParams::new(10.0, 1.0);
        let eq = equilibria(p);
        assert_eq!(eq.roots.len(), 1);
        assert_eq!(eq.stability, vec![Stability::Stable]);
        let oracle = bisect(|y| y * y * y - y - 10.0, 2.0, 3.0);
        assert!((eq.roots[0] - oracle).abs() < 1e-12);
        assert!((eq.roots[0] - 2.3089).abs() < 1e-4);
    }

    #[test]
    fn degenerate_double_root() {
        // beta = 3, alpha = 2: y^3 - 3y - 2 = (y + 1)^2 (y - 2)
        let eq = equilibria(CuspParams::new(2.0, 3.0));
        assert_eq!(eq.roots.len(), 2);
        assert!((eq.roots[0] + 1.0).abs() < 1e-12);
        assert!((eq.roots[1] - 2.0).abs() < 1e-12);
        assert_eq!(eq.stability, vec![Stability::Unstable, Stability::Stable]);
    }

    #[test]
    fn normalizer_at_origin() {
        let lp = log_normalizer(CuspParams::new(0.0, 0.0)).unwrap();
        assert!((lp.exp() - psi_00()).abs() < 1e-10);
        // ln(2.5637) = 0.94145
        assert!((lp - 0.9416).abs() < 2e-4);
        assert!((psi_00() - 2.5637).abs() < 1e-4);
        let trap = trapezoid_psi(CuspParams::new(0.0, 0.0));
        assert!((trap - psi_00()).abs() < 1e-8);
    }

    #[test]
    fn normalizer_monotone_and_symmetric() {
        let origin = log_normalizer(CuspParams::new(0.0, 0.0)).unwrap();
        let damped = log_normalizer(CuspParams::new(0.0, -4.0)).unwrap();
        assert!(damped < origin);
        assert!((trapezoid_psi(CuspParams::new(0.0, -4.0)).ln() - damped).abs() < 1e-8);
        let pos = log_normalizer(CuspParams::new(3.0, 0.0)).unwrap();
        let neg = log_normalizer(CuspParams::new(-3.0, 0.0)).unwrap();
        assert!((pos - neg).abs() < 1e-12);
    }

    #[test]
    fn extreme_controls_stay_finite() {
        for &(a, b) in &[(500.0, -300.0), (-1e3, 50.0), (0.0, 400.0), (1e4, 1e3)] {
            let m = moments(CuspParams::new(a, b)).unwrap();
            assert!(m.log_psi.is_finite() && m.mean.is_finite() && m.second.is_finite());
            let d = density(m.mean, CuspParams::new(a, b)).unwrap();
            assert!(d.is_finite() && d >= 0.0);
        }
        assert!(matches!(
            log_normalizer(CuspParams::new(f64::NAN, 0.0)),
            Err(Error::Quadrature { .. })
        ));
    }

    #[test]
    fn density_is_even_without_asymmetry() {
        let p = CuspParams::new(0.0, 1.7);
        for &y in &[0.1, 0.8, 1.3, 2.9] {
            assert_eq!(density(y, p).unwrap(), density(-y, p).unwrap());
        }
    }

    #[test]
    fn density_modes_are_stable_equilibria() {
        for &(a, b) in &[(0.3, 2.0), (-1.0, 4.0), (2.0, -1.0), (0.0, 0.5)] {
            let p = CuspParams::new(a, b);
            let eq = equilibria(p);
            for r in eq.stable_roots() {
                let h = 1e-3;
                let d0 = density(r, p).unwrap();
                assert!(d0 > density(r - h, p).unwrap());
                assert!(d0 > density(r + h, p).unwrap());
                // golden-section on the density around the root
                let (mut lo, mut hi) = (r - 0.1, r + 0.1);
                for _ in 0..200 {
                    let m1 = lo + (hi - lo) / 3.0;
                    let m2 = hi - (hi - lo) / 3.0;
                    if p.exponent(m1) < p.exponent(m2) {
                        lo = m1;
                    } else {
                        hi = m2;
                    }
                }
                assert!((0.5 * (lo + hi) - r).abs() < 1e-6);
            }
        }
    }

    #[test]
    fn moments_match_finite_differences() {
        let h = 1e-5;
        for &a in &[-2.0, -1.0, 0.0, 1.0, 2.0] {
            for &b in &[-2.0, -1.0, 0.0, 1.0, 2.0] {
                let m = moments(CuspParams::new(a, b)).unwrap();
                let lp = |a, b| log_normalizer(CuspParams::new(a, b)).unwrap();
                let da = (lp(a + h, b) - lp(a - h, b)) / (2.0 * h);
                let db = (lp(a, b + h) - lp(a, b - h)) / (2.0 * h);
                let rel = |x: f64, y: f64| (x - y).abs() / y.abs().max(1e-3);
                assert!(rel(da, m.mean) <= 1e-5, "{a} {b}: {da} vs {}", m.mean);
                assert!(rel(db, 0.5 * m.second) <= 1e-5);
            }
        }
    }

    #[test]
    fn sampler_reproduces_moments() {
        use rand::SeedableRng;
        let p = CuspParams::new(0.5, 1.5);
        let m = moments(p).unwrap();
        let s = CuspSampler::new(p).unwrap();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
        let n = 200_000;
        let draws: Vec<f64> = (0..n).map(|_| s.sample(&mut rng)).collect();
        let mean = draws.iter().sum::<f64>() / n as f64;
        let second = draws.iter().map(|y| y * y).sum::<f64>() / n as f64;
        assert!((mean - m.mean).abs() < 0.01);
        assert!((second - m.second).abs() < 0.01);
    }

    proptest! {
        #[test]
        fn roots_satisfy_the_cubic(a in -5.0f64..5.0, b in -5.0f64..5.0) {
            let p = CuspParams::new(a, b);
            let eq = equilibria(p);
            prop_assert!(eq.roots.windows(2).all(|w| w[0] <= w[1]));
            for &r in &eq.roots {
                prop_assert!((a + b * r - r * r * r).abs() <= 1e-9);
            }
            let delta = discriminant(p);
            if delta.abs() > 1e-9 {
                prop_assert_eq!(eq.roots.len(), if delta > 0.0 { 1 } else { 3 });
            }
        }
    }
}
