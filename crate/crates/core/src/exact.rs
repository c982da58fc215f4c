//! Exact and numerical block-size distributions.
//!
//! The exact layer works in arbitrary-precision rationals: the first-block
//! law `phi(m, n, k)`, the block-count identity behind it, confined-scheme
//! counting, and the joint law of birth-ordered block sizes. The numerical
//! layer evaluates the limit density `f(lambda, x)` of `N^2/(lambda^2+N^2)`
//! and the largest-block limit CDF (a finite alternating series of simplex
//! integrals, evaluated by adaptive quadrature).

use crate::error::{Error, Result};
use crate::quad;
use num_bigint::BigUint;
use num_rational::Ratio;
use num_traits::{One, ToPrimitive, Zero};

/// An exact probability as a reduced big-integer fraction.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct ExactProbability(Ratio<BigUint>);

impl ExactProbability {
    /// Builds `num / den`, rejecting values outside `[0, 1]`.
    pub fn new(num: BigUint, den: BigUint) -> Result<Self> {
        if den.is_zero() || num > den {
            return Err(Error::JointLawDomain);
        }
        Ok(ExactProbability(Ratio::new(num, den)))
    }

    pub fn zero() -> Self {
        ExactProbability(Ratio::zero())
    }

    pub fn one() -> Self {
        ExactProbability(Ratio::one())
    }

    pub fn numerator(&self) -> &BigUint {
        self.0.numer()
    }

    pub fn denominator(&self) -> &BigUint {
        self.0.denom()
    }

    pub fn to_f64(&self) -> f64 {
        self.0.numer().to_f64().unwrap_or(f64::INFINITY)
            / self.0.denom().to_f64().unwrap_or(f64::INFINITY)
    }

    pub fn mul(&self, other: &Self) -> Self {
        ExactProbability(&self.0 * &other.0)
    }

    pub fn add(&self, other: &Self) -> Self {
        ExactProbability(&self.0 + &other.0)
    }

    pub fn is_one(&self) -> bool {
        self.0.is_one()
    }
}

fn big(x: usize) -> BigUint {
    BigUint::from(x)
}

fn big_pow(base: usize, exp: usize) -> BigUint {
    big(base).pow(exp as u32)
}

/// Number of confined schemes (place `m` left empty) for `n` cars on `m`
/// places: `(m - n) m^(n-1)`, and 1 for the empty scheme.
pub fn count_confined(m: usize, n: usize) -> BigUint {
    assert!(n < m, "confined schemes need n < m");
    if n == 0 {
        BigUint::one()
    } else {
        big(m - n) * big_pow(m, n - 1)
    }
}

/// Probability that the block containing car 1 has `k` elements when `n`
/// uniform cars park on `m` places:
///
/// ```text
/// phi(m, n, k) = C(n-1, k-1) (k+1)^(k-1) m (m-k-1)^(n-k-1) (m-n-1) / m^n
/// ```
///
/// the last two factors being the count of confined schemes of the remaining
/// `n - k` cars on `m - k - 1` places. Requires `1 <= k <= n <= m - 2`.
pub fn phi(m: usize, n: usize, k: usize) -> Result<ExactProbability> {
    if k < 1 || k > n || n + 2 > m {
        return Err(Error::PhiDomain { m, n, k });
    }
    let num = num_integer::binomial(big(n - 1), big(k - 1))
        * big_pow(k + 1, k - 1)
        * big(m)
        * count_confined(m - k - 1, n - k);
    ExactProbability::new(num, big_pow(m, n))
}

/// First-block law including the forced case `l = 1`, where the single block
/// must hold all `n` cars. Used by [`joint_birth_law`] when the recursion
/// reaches its last empty place.
pub fn first_block_law(m: usize, n: usize, k: usize) -> Result<ExactProbability> {
    if k < 1 || k > n || n >= m {
        return Err(Error::PhiDomain { m, n, k });
    }
    if m - n == 1 {
        return Ok(if k == n {
            ExactProbability::one()
        } else {
            ExactProbability::zero()
        });
    }
    phi(m, n, k)
}

/// Exact check of the block-count identity
/// `m^n = sum_k C(n-1,k-1) m (k+1)^(k-1) (m-k-1)^(n-k-1) (m-n-1)`.
/// Returns both sides.
pub fn verify_identity(m: usize, n: usize) -> Result<(bool, BigUint, BigUint)> {
    if n < 1 || n + 2 > m {
        return Err(Error::PhiDomain { m, n, k: 1 });
    }
    let lhs = big_pow(m, n);
    let mut rhs = BigUint::zero();
    for k in 1..=n {
        rhs += num_integer::binomial(big(n - 1), big(k - 1))
            * big_pow(k + 1, k - 1)
            * big(m)
            * count_confined(m - k - 1, n - k);
    }
    Ok((lhs == rhs, lhs, rhs))
}

/// Joint law of the first birth-ordered block sizes:
/// `Pr(R_j = k_j, 1 <= j <= i) = prod_j phi(m - d_{j-1} - (j-1), n - d_{j-1}, k_j)`
/// with `d_j = k_1 + .. + k_j`. For one block this is `phi` itself.
pub fn joint_birth_law(m: usize, n: usize, ks: &[usize]) -> Result<ExactProbability> {
    if ks.is_empty() || ks.iter().any(|&k| k == 0) {
        return Err(Error::JointLawDomain);
    }
    let d: usize = ks.iter().sum();
    if d > n || ks.len() > m - n {
        return Err(Error::JointLawDomain);
    }
    let mut prob = ExactProbability::one();
    let mut consumed = 0usize;
    for (j, &k) in ks.iter().enumerate() {
        let factor = first_block_law(m - consumed - j, n - consumed, k)?;
        prob = prob.mul(&factor);
        consumed += k;
    }
    Ok(prob)
}

/// Natural log of `phi(m, n, k)` in floating point, for regimes where the
/// exact rational is astronomically long (large-`m` asymptotics).
pub fn phi_ln(m: usize, n: usize, k: usize) -> Result<f64> {
    if k < 1 || k > n || n + 2 > m {
        return Err(Error::PhiDomain { m, n, k });
    }
    use statrs::function::gamma::ln_gamma;
    let (mf, nf, kf) = (m as f64, n as f64, k as f64);
    let ln_choose = ln_gamma(nf) - ln_gamma(kf) - ln_gamma(nf - kf + 1.0);
    let mut v = ln_choose + (kf - 1.0) * (kf + 1.0).ln() + mf.ln() - nf * mf.ln();
    if k < n {
        v += (nf - kf - 1.0) * (mf - kf - 1.0).ln() + (mf - nf - 1.0).ln();
    }
    Ok(v)
}

/// Probability that two given blocks of sizes `x` and `y` in a scheme with
/// `l >= 2` empty places merge at the next arrival: `(x + y + 2)/((l-1) m)`.
pub fn merge_probability(x: usize, y: usize, l: usize, m: usize) -> Result<ExactProbability> {
    if l < 2 {
        return Err(Error::TooFewEmpties(l));
    }
    if x == 0 || y == 0 || x + y + l > m {
        return Err(Error::JointLawDomain);
    }
    ExactProbability::new(big(x + y + 2), big((l - 1) * m))
}

/// The same transition written for masses `x' = x + 1`, `y' = y + 1` (each
/// block carrying the empty place on its right): `(x' + y')/(m (l - 1))`,
/// the additive-coalescent kernel at total mass `m`.
pub fn merge_probability_masses(
    x_mass: usize,
    y_mass: usize,
    l: usize,
    m: usize,
) -> Result<ExactProbability> {
    if l < 2 {
        return Err(Error::TooFewEmpties(l));
    }
    if x_mass < 2 || y_mass < 2 {
        return Err(Error::JointLawDomain);
    }
    merge_probability(x_mass - 1, y_mass - 1, l, m)
}

/// Parameter holder for the limit laws at `lambda = lim l / sqrt(m) > 0`.
#[derive(Debug, Clone, Copy)]
pub struct LimitDensityParams {
    pub lambda: f64,
}

impl LimitDensityParams {
    pub fn new(lambda: f64) -> Result<Self> {
        if lambda <= 0.0 || !lambda.is_finite() {
            return Err(Error::NonPositiveLambda(lambda));
        }
        Ok(LimitDensityParams { lambda })
    }

    /// Density of `N^2/(lambda^2 + N^2)` at `x`, zero outside `(0, 1)`.
    pub fn density(&self, x: f64) -> f64 {
        limit_density_unchecked(self.lambda, x)
    }

    /// `int_0^x f(lambda, u) du` by quadrature (substitution `u = t^2` to
    /// absorb the left-edge singularity).
    pub fn cdf_quadrature(&self, x: f64) -> Result<f64> {
        if x <= 0.0 {
            return Ok(0.0);
        }
        let lambda = self.lambda;
        let upper = x.min(1.0).sqrt();
        quad::integrate(
            move |t| {
                let arg = lambda * lambda * t * t / (2.0 * (1.0 - t * t));
                if !(t * t < 1.0) || arg > 700.0 {
                    return 0.0;
                }
                2.0 * lambda / (2.0 * std::f64::consts::PI).sqrt()
                    * (1.0 - t * t).powf(-1.5)
                    * (-arg).exp()
            },
            0.0,
            upper,
            1e-10,
        )
    }

    /// Same CDF in closed form: `P(N^2 <= lambda^2 x / (1 - x))`.
    pub fn cdf_gaussian_form(&self, x: f64) -> f64 {
        if x <= 0.0 {
            return 0.0;
        }
        if x >= 1.0 {
            return 1.0;
        }
        let y = self.lambda * (x / (1.0 - x)).sqrt();
        statrs::function::erf::erf(y / std::f64::consts::SQRT_2)
    }

    /// Largest-block limit CDF `P(B_1(lambda) <= x)` via the finite
    /// alternating series of simplex integrals; see [`largest_block_cdf`].
    pub fn largest_block_cdf(&self, x: f64) -> Result<f64> {
        largest_block_cdf(self.lambda, x)
    }
}

/// Density `f(lambda, x)` of `N^2/(lambda^2 + N^2)`:
/// `lambda/sqrt(2 pi) x^(-1/2) (1-x)^(-3/2) exp(-lambda^2 x / (2(1-x)))` on
/// `(0, 1)`, zero outside. Rejects `lambda <= 0`.
pub fn limit_density(lambda: f64, x: f64) -> Result<f64> {
    LimitDensityParams::new(lambda).map(|p| p.density(x))
}

fn limit_density_unchecked(lambda: f64, x: f64) -> f64 {
    if x <= 0.0 || x >= 1.0 {
        return 0.0;
    }
    let arg = lambda * lambda * x / (2.0 * (1.0 - x));
    if arg > 700.0 {
        return 0.0;
    }
    lambda / (2.0 * std::f64::consts::PI).sqrt() * x.powf(-0.5) * (1.0 - x).powf(-1.5) * (-arg).exp()
}

/// `u^(-3/2) exp(-lambda^4 / (2u))` for the remaining simplex mass `u`,
/// extended by continuity to 0 at `u = 0`.
fn tail(lambda: f64, u: f64) -> f64 {
    if u <= 0.0 {
        return 0.0;
    }
    let arg = lambda.powi(4) / (2.0 * u);
    if arg > 700.0 {
        return 0.0;
    }
    u.powf(-1.5) * (-arg).exp()
}

/// `P(B_1(lambda) <= x)` for the width of the largest excursion:
///
/// ```text
/// 1 + lambda^3 e^(lambda^2/2) sum_{k>=1} (-1)^k/k!
///     int_{D(lambda,x,k)} lambda^(2k) exp(-lambda^4/(2(lambda^2 - s)))
///     / ((2 pi)^(k/2) (x_1..x_k (lambda^2 - s))^(3/2)) dx,   s = sum x_i,
/// ```
///
/// over `D = {x_i >= lambda^2 x, s <= lambda^2}`, which is empty as soon as
/// `k x > 1`, so for `x > 1/4` at most three terms contribute. Deeper `x`
/// is rejected; use the Monte Carlo estimate from the limit simulation there.
pub fn largest_block_cdf(lambda: f64, x: f64) -> Result<f64> {
    if lambda <= 0.0 || !lambda.is_finite() {
        return Err(Error::NonPositiveLambda(lambda));
    }
    if x >= 1.0 {
        return Ok(1.0);
    }
    if x <= 0.25 {
        return Err(Error::CdfRangeTooDeep(x));
    }
    let l2 = lambda * lambda;
    let c = l2 * x;
    let two_pi = 2.0 * std::f64::consts::PI;

    let mut series = 0.0;
    let mut sign = -1.0;
    let mut factorial = 1.0;
    for k in 1..=3usize {
        factorial *= k as f64;
        if k as f64 * x < 1.0 {
            let integral = simplex_integral(lambda, c, k)?;
            series += sign / factorial * l2.powi(k as i32) / two_pi.powf(k as f64 / 2.0) * integral;
        }
        sign = -sign;
    }
    let cdf = 1.0 + lambda.powi(3) * (l2 / 2.0).exp() * series;
    Ok(cdf.clamp(0.0, 1.0))
}

/// `int_D prod x_i^(-3/2) tail(lambda, lambda^2 - s) dx` over the truncated
/// simplex, by nested adaptive quadrature (dimension <= 3). The essential
/// zero of `tail` at `s = lambda^2` tames the boundary singularity.
fn simplex_integral(lambda: f64, c: f64, k: usize) -> Result<f64> {
    let l2 = lambda * lambda;
    match k {
        1 => quad::integrate(|x1| x1.powf(-1.5) * tail(lambda, l2 - x1), c, l2, 1e-8),
        2 => quad::integrate(
            |x1| {
                let inner = quad::integrate(
                    |x2| x2.powf(-1.5) * tail(lambda, l2 - x1 - x2),
                    c,
                    l2 - x1,
                    1e-9,
                )
                .unwrap_or(0.0);
                x1.powf(-1.5) * inner
            },
            c,
            l2 - c,
            1e-8,
        ),
        3 => quad::integrate(
            |x1| {
                let mid = quad::integrate(
                    |x2| {
                        let inner = quad::integrate(
                            |x3| x3.powf(-1.5) * tail(lambda, l2 - x1 - x2 - x3),
                            c,
                            l2 - x1 - x2,
                            1e-10,
                        )
                        .unwrap_or(0.0);
                        x2.powf(-1.5) * inner
                    },
                    c,
                    l2 - x1 - c,
                    1e-9,
                )
                .unwrap_or(0.0);
                x1.powf(-1.5) * mid
            },
            c,
            l2 - 2.0 * c,
            1e-8,
        ),
        _ => unreachable!("series truncated at k = 3"),
    }
}
