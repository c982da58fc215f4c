//! Lattice paths on the grid `j/N` with exact arithmetic, and the
//! drift-reflection operator
//!
//! ```text
//! psi_lambda f(t) = f(t) - lambda t - inf_{s <= t} (f(s) - lambda s)
//! ```
//!
//! over the periodic extension of a circular path. Values are stored as
//! `(a sqrt(N) + b) / denom` with integer `a`, `b`: empirical paths are
//! integer heights over `sqrt(N)`, drifts are rationals, and `psi` stays in
//! this form, so zero detection, excursion boundaries, and the semigroup
//! identity `psi_mu . psi_lambda = psi_{lambda+mu}` are decided by integer
//! comparisons, never by floating-point tolerance. For perfect-square `N`
//! the root part folds away and everything is a plain rational.
//!
//! Paths produced by Brownian rescaling of a restriction carry plain `f64`
//! values; they feed statistics only and cannot be run through the exact
//! operator again.

use crate::error::{Error, Result};
use num_integer::Integer;

/// Square root of `n` if `n` is a perfect square.
fn exact_sqrt(n: usize) -> Option<u64> {
    let r = (n as f64).sqrt().round() as u64;
    for c in [r.saturating_sub(1), r, r + 1] {
        if c * c == n as u64 {
            return Some(c);
        }
    }
    None
}

/// Best rational `p/q` for a nonnegative float, denominator capped at 1e6.
/// Exact for the dyadic and small-fraction drifts used by the test suites.
pub fn rational_drift(lambda: f64) -> Result<(i64, u64)> {
    if !(lambda >= 0.0) || !lambda.is_finite() {
        return Err(Error::NonPositiveLambda(lambda));
    }
    const MAX_DEN: u64 = 1_000_000;
    let (mut h0, mut h1) = (1i64, lambda.floor() as i64);
    let (mut k0, mut k1) = (0u64, 1u64);
    let mut frac = lambda - lambda.floor();
    for _ in 0..40 {
        if frac.abs() < 1e-13 {
            break;
        }
        let inv = 1.0 / frac;
        let a = inv.floor();
        let k2 = k1.saturating_mul(a as u64).saturating_add(k0);
        if k2 > MAX_DEN {
            break;
        }
        let h2 = h1 * a as i64 + h0;
        (h0, h1) = (h1, h2);
        (k0, k1) = (k1, k2);
        frac = inv - a;
    }
    Ok((h1, k1))
}

#[derive(Debug, Clone, PartialEq)]
enum Repr {
    /// `value_j = (a_j sqrt(N) + b_j) / denom`; `a` is identically zero when
    /// `N` is a perfect square (folded into `b` on canonicalization).
    Exact {
        a: Vec<i128>,
        b: Vec<i128>,
        denom: u128,
    },
    /// Plain floating values, for rescaled restrictions.
    Real(Vec<f64>),
}

/// A finite real path on the uniform grid `t = j/N`, `j = 0..=N`.
#[derive(Debug, Clone, PartialEq)]
pub struct LatticePath {
    n: usize,
    circular: bool,
    repr: Repr,
}

impl LatticePath {
    /// Path with values `heights[j] / sqrt(n)`, the natural scaling of an
    /// empirical lattice path. `heights` must have `n + 1` entries.
    pub fn from_heights(n: usize, heights: &[i64], circular: bool) -> Result<Self> {
        if n < 2 || heights.len() != n + 1 {
            return Err(Error::BadResolution(n));
        }
        if circular && heights[0] != heights[n] {
            return Err(Error::NotCircular);
        }
        let mut path = LatticePath {
            n,
            circular,
            repr: Repr::Exact {
                a: heights.iter().map(|&h| h as i128).collect(),
                b: vec![0; n + 1],
                denom: n as u128,
            },
        };
        path.canonicalize();
        Ok(path)
    }

    /// Path with values `heights[j] / (extra_denom * sqrt(n))`, for lattice
    /// data carrying an additional exact scale (e.g. the empirical bridge
    /// `A_k = (m A_k) / m` stored through its integer numerators).
    pub fn from_heights_scaled(
        n: usize,
        heights: &[i64],
        extra_denom: u64,
        circular: bool,
    ) -> Result<Self> {
        if n < 2 || heights.len() != n + 1 || extra_denom == 0 {
            return Err(Error::BadResolution(n));
        }
        if circular && heights[0] != heights[n] {
            return Err(Error::NotCircular);
        }
        let mut path = LatticePath {
            n,
            circular,
            repr: Repr::Exact {
                a: heights.iter().map(|&h| h as i128).collect(),
                b: vec![0; n + 1],
                denom: n as u128 * extra_denom as u128,
            },
        };
        path.canonicalize();
        Ok(path)
    }

    /// Path with plain floating values (no exact operations available).
    pub fn from_values(values: Vec<f64>, circular: bool) -> Result<Self> {
        if values.len() < 3 {
            return Err(Error::BadResolution(values.len().saturating_sub(1)));
        }
        Ok(LatticePath {
            n: values.len() - 1,
            circular,
            repr: Repr::Real(values),
        })
    }

    pub fn resolution(&self) -> usize {
        self.n
    }

    pub fn is_circular(&self) -> bool {
        self.circular
    }

    /// Whether the path carries exact lattice arithmetic.
    pub fn is_exact(&self) -> bool {
        matches!(self.repr, Repr::Exact { .. })
    }

    pub fn value(&self, j: usize) -> f64 {
        match &self.repr {
            Repr::Exact { a, b, denom } => {
                (a[j] as f64 * (self.n as f64).sqrt() + b[j] as f64) / *denom as f64
            }
            Repr::Real(v) => v[j],
        }
    }

    pub fn values(&self) -> Vec<f64> {
        (0..=self.n).map(|j| self.value(j)).collect()
    }

    pub fn max_value(&self) -> f64 {
        (0..=self.n).map(|j| self.value(j)).fold(f64::MIN, f64::max)
    }

    /// Exact zero test at a grid point.
    pub fn is_zero(&self, j: usize) -> bool {
        match &self.repr {
            Repr::Exact { a, b, .. } => a[j] == 0 && b[j] == 0,
            Repr::Real(v) => v[j] == 0.0,
        }
    }

    pub fn is_nonnegative(&self) -> bool {
        match &self.repr {
            Repr::Exact { a, b, .. } => (0..=self.n)
                .all(|j| cmp_root_combination(a[j], b[j], self.n) != std::cmp::Ordering::Less),
            Repr::Real(v) => v.iter().all(|&x| x >= 0.0),
        }
    }

    /// Fold the root part for perfect squares and divide out common factors.
    fn canonicalize(&mut self) {
        if let Repr::Exact { a, b, denom } = &mut self.repr {
            if let Some(s) = exact_sqrt(self.n) {
                for (aj, bj) in a.iter_mut().zip(b.iter_mut()) {
                    *bj += *aj * s as i128;
                    *aj = 0;
                }
            }
            let mut g = *denom as i128;
            for &x in a.iter().chain(b.iter()) {
                g = g.gcd(&x);
                if g == 1 {
                    break;
                }
            }
            if g > 1 {
                for x in a.iter_mut() {
                    *x /= g;
                }
                for x in b.iter_mut() {
                    *x /= g;
                }
                *denom /= g as u128;
            }
        }
    }

    /// The operator `psi` with rational drift `p/q >= 0`, computed by one
    /// sliding-window minimum sweep over a doubled period. Requires a
    /// circular exact path; the result is nonnegative, circular, exact.
    pub fn psi_rational(&self, p: i64, q: u64) -> Result<LatticePath> {
        if !self.circular || !self.is_exact() {
            return Err(Error::NotCircular);
        }
        if p < 0 || q == 0 {
            return Err(Error::NonPositiveLambda(p as f64 / q.max(1) as f64));
        }
        let (a, b, denom) = match &self.repr {
            Repr::Exact { a, b, denom } => (a, b, denom),
            Repr::Real(_) => unreachable!(),
        };
        let n = self.n;
        let qn = q as i128 * n as i128;
        let pd = p as i128 * *denom as i128;

        // Drifted values over two periods, common denominator denom * q * n:
        //   H_t = a_{t mod n} qn sqrt(N) + b_{t mod n} qn - p t denom.
        let idx = |t: usize| if t < n { t } else { t - n };
        let ah = |t: usize| a[idx(t)] * qn;
        let bh = |t: usize| b[idx(t)] * qn - pd * t as i128;

        // Monotone deque for the minimum over the window [t - n, t].
        let mut deque: std::collections::VecDeque<usize> = std::collections::VecDeque::new();
        let mut out_a = vec![0i128; n + 1];
        let mut out_b = vec![0i128; n + 1];
        for t in 0..=2 * n {
            while let Some(&back) = deque.back() {
                if cmp_root_combination(ah(back) - ah(t), bh(back) - bh(t), n)
                    != std::cmp::Ordering::Less
                {
                    deque.pop_back();
                } else {
                    break;
                }
            }
            deque.push_back(t);
            while *deque.front().unwrap() + n < t {
                deque.pop_front();
            }
            if t >= n {
                let m = *deque.front().unwrap();
                out_a[t - n] = ah(t) - ah(m);
                out_b[t - n] = bh(t) - bh(m);
            }
        }
        let mut out = LatticePath {
            n,
            circular: true,
            repr: Repr::Exact {
                a: out_a,
                b: out_b,
                denom: *denom * q as u128 * n as u128,
            },
        };
        out.canonicalize();
        debug_assert_eq!(out.is_zero(0), out.is_zero(n));
        Ok(out)
    }

    /// `psi` with a floating drift, snapped to the nearest rational with
    /// denominator at most 1e6 (exact for the dyadic drifts used in tests;
    /// a sub-1e-6 drift perturbation otherwise, far below lattice bias).
    pub fn psi(&self, lambda: f64) -> Result<LatticePath> {
        let (p, q) = rational_drift(lambda)?;
        self.psi_rational(p, q)
    }

    /// Restriction to `len` cells starting at `start` (circular indexing),
    /// Brownian-rescaled to `[0, 1]`: values multiplied by `sqrt(n / len)`.
    /// The result carries floating values.
    pub fn restrict_rescale(&self, start: usize, len: usize) -> Result<LatticePath> {
        if len < 2 || len > self.n {
            return Err(Error::BadResolution(len));
        }
        let scale = (self.n as f64 / len as f64).sqrt();
        let values: Vec<f64> = (0..=len)
            .map(|i| self.value((start + i) % self.n) * scale)
            .collect();
        LatticePath::from_values(values, false)
    }

    /// Exact Brownian rescaling of a restriction, available when both the
    /// resolution and `len` are perfect squares (the scale `sqrt(n/len)` is
    /// then rational).
    pub fn restrict_rescale_exact(&self, start: usize, len: usize) -> Result<LatticePath> {
        let s = exact_sqrt(self.n).ok_or(Error::BadResolution(self.n))?;
        let w = exact_sqrt(len).ok_or(Error::BadResolution(len))?;
        let (a, b, denom) = match &self.repr {
            Repr::Exact { a, b, denom } => (a, b, denom),
            Repr::Real(_) => return Err(Error::NotCircular),
        };
        debug_assert!(a.iter().all(|&x| x == 0), "square-N paths are folded");
        let vals: Vec<i128> = (0..=len)
            .map(|i| b[(start + i) % self.n] * s as i128)
            .collect();
        let circular = vals[0] == vals[len];
        let mut out = LatticePath {
            n: len,
            circular,
            repr: Repr::Exact {
                a: vec![0; len + 1],
                b: vals,
                denom: *denom * w as u128,
            },
        };
        out.canonicalize();
        Ok(out)
    }

    /// Circular shift: `(tau_x f)(t) = f(x + t)` with `x = shift/n`.
    pub fn shift(&self, shift: usize) -> LatticePath {
        let n = self.n;
        let values: Vec<f64> = (0..=n).map(|i| self.value((shift + i) % n)).collect();
        LatticePath {
            n,
            circular: self.circular,
            repr: Repr::Real(values),
        }
    }

    /// Indices `j` in `0..n` with value exactly zero.
    pub fn zero_set(&self) -> Vec<usize> {
        (0..self.n).filter(|&j| self.is_zero(j)).collect()
    }

    /// Maximal strictly-positive runs of a nonnegative circular path.
    pub fn excursions(&self) -> ExcursionSet {
        let n = self.n;
        let zeros = self.zero_set();
        if zeros.is_empty() {
            return ExcursionSet {
                n,
                intervals: vec![(0, n)],
            };
        }
        let mut intervals = Vec::new();
        for (i, &z) in zeros.iter().enumerate() {
            let next = if i + 1 < zeros.len() {
                zeros[i + 1]
            } else {
                zeros[0] + n
            };
            let gap = next - z;
            if gap >= 2 {
                intervals.push((z + 1, gap - 1));
            }
        }
        ExcursionSet { n, intervals }
    }
}

/// Compares `a sqrt(n) + b` against zero by exact integer arithmetic.
fn cmp_root_combination(a: i128, b: i128, n: usize) -> std::cmp::Ordering {
    use std::cmp::Ordering::*;
    if a == 0 {
        return b.cmp(&0);
    }
    if a > 0 && b >= 0 {
        return Greater;
    }
    if a < 0 && b <= 0 {
        return Less;
    }
    // opposite signs: compare a^2 n against b^2
    let lhs = a
        .checked_mul(a)
        .and_then(|x| x.checked_mul(n as i128))
        .expect("lattice coefficients exceed i128 range");
    let rhs = b.checked_mul(b).expect("lattice coefficients exceed i128 range");
    if a > 0 {
        lhs.cmp(&rhs)
    } else {
        rhs.cmp(&lhs)
    }
}

/// Strictly-positive grid intervals of a circular path, with positions.
/// `intervals` holds `(first positive index mod n, number of positive
/// points)` in circular order; the width of an excursion is its positive
/// point count over `n`, so widths plus zero points partition the circle.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExcursionSet {
    pub n: usize,
    pub intervals: Vec<(usize, usize)>,
}

impl ExcursionSet {
    /// Widths in grid cells, descending.
    pub fn widths_cells_desc(&self) -> Vec<usize> {
        let mut w: Vec<usize> = self.intervals.iter().map(|&(_, len)| len).collect();
        w.sort_unstable_by(|a, b| b.cmp(a));
        w
    }

    /// Widths as fractions of the circle, descending.
    pub fn widths_desc(&self) -> Vec<f64> {
        self.widths_cells_desc()
            .into_iter()
            .map(|w| w as f64 / self.n as f64)
            .collect()
    }

    pub fn largest_width(&self) -> f64 {
        self.widths_cells_desc()
            .first()
            .map_or(0.0, |&w| w as f64 / self.n as f64)
    }

    pub fn total_positive_cells(&self) -> usize {
        self.intervals.iter().map(|&(_, len)| len).sum()
    }

    /// Index of the excursion containing grid cell `j`, if `j` is positive.
    pub fn containing(&self, j: usize) -> Option<usize> {
        let j = j % self.n;
        self.intervals.iter().position(|&(start, len)| {
            let off = (j + self.n - start % self.n) % self.n;
            off < len
        })
    }

    /// Excursion hit by the point `rho` in `[0, 1)`: the one containing the
    /// cell `floor(rho n)`, or, when that cell is a zero, the first positive
    /// cell to its right (wrapping).
    pub fn locate(&self, rho: f64) -> Option<usize> {
        if self.intervals.is_empty() {
            return None;
        }
        let j = ((rho * self.n as f64).floor() as usize).min(self.n - 1);
        if let Some(i) = self.containing(j) {
            return Some(i);
        }
        self.intervals
            .iter()
            .enumerate()
            .map(|(i, &(start, _))| (((start % self.n) + self.n - j) % self.n, i))
            .min()
            .map(|(_, i)| i)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn flat_excursion(n: usize, bump: &[i64]) -> LatticePath {
        let mut h = vec![0i64; n + 1];
        for (i, &v) in bump.iter().enumerate() {
            h[i + 1] = v;
        }
        LatticePath::from_heights(n, &h, true).unwrap()
    }

    #[test]
    fn rational_drift_recovers_simple_fractions() {
        assert_eq!(rational_drift(0.0).unwrap(), (0, 1));
        assert_eq!(rational_drift(0.5).unwrap(), (1, 2));
        assert_eq!(rational_drift(2.0).unwrap(), (2, 1));
        assert_eq!(rational_drift(0.75).unwrap(), (3, 4));
        let (p, q) = rational_drift(std::f64::consts::SQRT_2).unwrap();
        assert!((p as f64 / q as f64 - std::f64::consts::SQRT_2).abs() < 1e-9);
        assert!(rational_drift(-1.0).is_err());
    }

    #[test]
    fn zero_path_maps_to_zero_path() {
        let z = LatticePath::from_heights(8, &[0; 9], true).unwrap();
        let img = z.psi(1.0).unwrap();
        assert!((0..=8).all(|j| img.is_zero(j)));
    }

    #[test]
    fn psi_zero_of_excursion_is_identity() {
        // nonnegative circular path with min 0: the inf term vanishes
        let e = flat_excursion(8, &[1, 2, 3, 2, 1, 1, 0]);
        let img = e.psi(0.0).unwrap();
        assert_eq!(img, e);
    }

    #[test]
    fn psi_requires_circular_exact_input() {
        let open = LatticePath::from_heights(4, &[0, 1, 2, 1, 1], false).unwrap();
        assert!(open.psi(1.0).is_err());
        let real = LatticePath::from_values(vec![0.0, 1.0, 0.0], true).unwrap();
        assert!(real.psi(1.0).is_err());
    }

    #[test]
    fn psi_image_is_nonnegative_and_vanishes_at_the_drifted_argmin() {
        let e = LatticePath::from_heights(4, &[0, 2, 4, 2, 0], true).unwrap();
        let img = e.psi(4.0).unwrap();
        assert!(img.is_nonnegative());
        assert!(!img.zero_set().is_empty());
        let drifted: Vec<f64> = (0..=4).map(|j| e.value(j) - 4.0 * j as f64 / 4.0).collect();
        let argmin = (0..4)
            .min_by(|&i, &j| drifted[i].partial_cmp(&drifted[j]).unwrap())
            .unwrap();
        assert!(img.is_zero(argmin));
    }

    #[test]
    fn semigroup_on_a_fixture() {
        let e = flat_excursion(16, &[1, 3, 2, 5, 4, 4, 2, 1, 0, 0, 2, 6, 3, 1, 1]);
        for (l1, l2) in [((1i64, 2u64), (1i64, 2u64)), ((1, 4), (3, 4)), ((0, 1), (2, 1))] {
            let chained = e
                .psi_rational(l1.0, l1.1)
                .unwrap()
                .psi_rational(l2.0, l2.1)
                .unwrap();
            let p = l1.0 * l2.1 as i64 + l2.0 * l1.1 as i64;
            let q = l1.1 * l2.1;
            let direct = e.psi_rational(p, q).unwrap();
            assert_eq!(chained, direct);
        }
    }

    #[test]
    fn refinement_zeros_only_grow() {
        let e = flat_excursion(12, &[2, 5, 3, 1, 4, 6, 2, 1, 3, 2, 1]);
        let z1 = e.psi(0.5).unwrap().zero_set();
        let z2 = e.psi(1.5).unwrap().zero_set();
        for z in &z1 {
            assert!(z2.contains(z), "zero at {z} vanished as drift grew");
        }
    }

    #[test]
    fn excursions_partition_positive_cells() {
        // h = (0,1,2,0,0,3,1,0,2,1,0): positive at 1,2,5,6,8,9
        let e = flat_excursion(10, &[1, 2, 0, 0, 3, 1, 0, 2, 1]);
        let ex = e.excursions();
        assert_eq!(ex.total_positive_cells(), 6);
        assert_eq!(ex.widths_cells_desc(), vec![2, 2, 2]);
        assert_eq!(ex.total_positive_cells() + e.zero_set().len(), 10);
    }

    #[test]
    fn excursions_can_wrap_the_seam() {
        let mut h = vec![0i64; 11];
        h[9] = 1;
        h[0] = 2;
        h[10] = 2; // circular: value(10) = value(0)
        let e = LatticePath::from_heights(10, &h, true).unwrap();
        let ex = e.excursions();
        assert_eq!(ex.intervals, vec![(9, 2)]);
        assert_eq!(ex.containing(9), Some(0));
        assert_eq!(ex.containing(0), Some(0));
        assert_eq!(ex.containing(1), None);
    }

    #[test]
    fn locate_steps_right_over_zeros() {
        // h = (0,1,1,0,0,2,2,0,1,0,0): runs start at 1, 5, 8
        let e = flat_excursion(10, &[1, 1, 0, 0, 2, 2, 0, 1, 0]);
        let ex = e.excursions();
        let hit = ex.locate(0.3).unwrap();
        assert_eq!(ex.intervals[hit].0, 5);
        let hit = ex.locate(0.15).unwrap();
        assert_eq!(ex.intervals[hit].0, 1);
        let hit = ex.locate(0.95).unwrap();
        assert_eq!(ex.intervals[hit].0, 1);
    }

    #[test]
    fn brownian_scaling_commutes_with_psi_exactly() {
        // nonnegative path on n = 100 with zeros at 0 and 25; restriction
        // length 25 is a perfect square, so both routes stay exact.
        let n = 100;
        let mut h = vec![0i64; n + 1];
        for j in 1..25 {
            h[j] = (5 - (j as i64 % 7) - 1).abs() + 1;
        }
        h[25] = 0;
        for j in 26..n {
            h[j] = (j as i64 % 5) + 1;
        }
        h[40] = 0;
        h[70] = 0;
        let f = LatticePath::from_heights(n, &h, true).unwrap();

        // left: psi(f, 2) restricted to [0, 25], rescaled by sqrt(100/25) = 2
        let left = f
            .psi_rational(2, 1)
            .unwrap()
            .restrict_rescale_exact(0, 25)
            .unwrap();
        // right: psi of the rescaled restriction with drift 2 sqrt(25/100) = 1
        let right = f
            .restrict_rescale_exact(0, 25)
            .unwrap()
            .psi_rational(1, 1)
            .unwrap();
        assert_eq!(left, right);
    }

    #[test]
    fn root_comparisons_are_exact() {
        use std::cmp::Ordering::*;
        // 3 sqrt(2) vs 4: 18 > 16
        assert_eq!(cmp_root_combination(3, -4, 2), Greater);
        // 2 sqrt(2) vs 3: 8 < 9
        assert_eq!(cmp_root_combination(2, -3, 2), Less);
        assert_eq!(cmp_root_combination(0, 0, 7), Equal);
        assert_eq!(cmp_root_combination(-1, 1, 2), Less);
    }
}
