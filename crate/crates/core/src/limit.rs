//! Lattice simulation of the scaling-limit objects: the empirical bridge and
//! its Vervaat rotation (the discrete stand-in for the normalized Brownian
//! excursion), excursion widths of the drifted reflection (the limit block
//! sizes), the sampled block containing an independent uniform point, the
//! induced subordinator, the path decomposition at the sampled excursion, and
//! size-biased partial sums.
//!
//! Everything is built by the route the discrete theory itself uses: `n`
//! uniform first tries give an integer-valued bridge, rotation at its first
//! argmin gives a nonnegative circular path, and the reflection operator
//! produces the excursion structure. Widths count strictly positive grid
//! cells, so a parking block of `s` cars corresponds exactly to width `s/n`;
//! the flanking-zero gap is one cell wider, which matters only at `O(1/n)`.

use crate::error::{Error, Result};
use crate::lattice::{ExcursionSet, LatticePath};
use crate::rng;
use rand_chacha::ChaCha8Rng;

/// Empirical lattice excursion at resolution `n` from stream 0 of the seeded
/// generator. See [`sample_excursion_rng`].
pub fn sample_excursion(n: usize, seed: u64) -> Result<LatticePath> {
    sample_excursion_rng(n, &mut rng::replica_rng(seed, 0))
}

/// Draws `n` uniform cells, forms the centered count bridge
/// `A_k = #{tries <= k} - k`, locates the first argmin `V`, and rotates so
/// the path starts there: a nonnegative circular path with endpoints zero
/// and integer heights over `sqrt(n)`.
pub fn sample_excursion_rng(n: usize, rng: &mut ChaCha8Rng) -> Result<LatticePath> {
    if n < 2 {
        return Err(Error::BadResolution(n));
    }
    let mut y = vec![0i64; n];
    for _ in 0..n {
        y[rng::uniform_place(rng, n) - 1] += 1;
    }
    let mut a = vec![0i64; n + 1];
    for k in 1..=n {
        a[k] = a[k - 1] + y[k - 1] - 1;
    }
    debug_assert_eq!(a[n], 0);
    let mut v = 1;
    for k in 2..=n {
        if a[k] < a[v] {
            v = k;
        }
    }
    let heights: Vec<i64> = (0..=n).map(|j| a[(v + j) % n] - a[v]).collect();
    LatticePath::from_heights(n, &heights, true)
}

/// Widths of the excursions of `psi(path, lambda)`.
pub fn excursion_widths(path: &LatticePath, lambda: f64) -> Result<ExcursionSet> {
    Ok(path.psi(lambda)?.excursions())
}

/// The sampled excursion: flanking zeros and width of the excursion of
/// `psi(path, lambda)` containing the point `rho1`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct R1Sample {
    /// Width as a fraction of the circle (positive cells / n).
    pub width: f64,
    pub width_cells: usize,
    /// Position of the last zero before the excursion, in `[0, 1)`.
    pub g: f64,
    /// Position of the first zero after it, in `[0, 1)` (wraps below `g`
    /// when the excursion straddles the seam).
    pub d: f64,
    /// First positive cell and positive cell count.
    pub interval: (usize, usize),
}

/// Width and flanking zeros of the excursion containing `rho1`; when `rho1`
/// lands on a grid zero the next excursion to the right is taken.
pub fn sample_r1(path: &LatticePath, lambda: f64, rho1: f64) -> Result<R1Sample> {
    let image = path.psi(lambda)?;
    let ex = image.excursions();
    let hit = ex.locate(rho1).ok_or(Error::FlatPath)?;
    Ok(r1_from_interval(ex.intervals[hit], path.resolution()))
}

fn r1_from_interval(interval: (usize, usize), n: usize) -> R1Sample {
    let (start, len) = interval;
    let g_cell = (start + n - 1) % n;
    let d_cell = (start + len) % n;
    R1Sample {
        width: len as f64 / n as f64,
        width_cells: len,
        g: g_cell as f64 / n as f64,
        d: d_cell as f64 / n as f64,
        interval: (start % n, len),
    }
}

/// The subordinator `Sigma(lambda) = -1 + 1/R_1(lambda)` along an increasing
/// lambda grid, evaluated on one path with one sampling point throughout.
#[derive(Debug, Clone, PartialEq)]
pub struct SubordinatorSample {
    pub lambda_grid: Vec<f64>,
    /// `R_1(lambda_i)` as a fraction of the circle.
    pub widths: Vec<f64>,
    /// `Sigma(lambda_i)`.
    pub values: Vec<f64>,
}

/// Evaluates `R_1` and `Sigma` along the grid. Successive excursions are
/// located inside the previous one (the zero set only grows with the
/// drift), which makes `Sigma` nondecreasing on every path, not just in
/// law; if the previous excursion has flattened entirely, the width sticks
/// at one cell.
pub fn subordinator_path(
    path: &LatticePath,
    rho1: f64,
    lambda_grid: &[f64],
) -> Result<SubordinatorSample> {
    if lambda_grid.is_empty()
        || lambda_grid.windows(2).any(|w| w[0] >= w[1])
        || lambda_grid.iter().any(|&l| l < 0.0)
    {
        return Err(Error::BadLambdaGrid);
    }
    let n = path.resolution();
    let j0 = ((rho1 * n as f64).floor() as usize).min(n - 1);
    let mut widths = Vec::with_capacity(lambda_grid.len());
    let mut values = Vec::with_capacity(lambda_grid.len());
    // zone: the excursion found at the previous grid point
    let mut zone: Option<(usize, usize)> = None;
    let mut collapsed = false;
    for &lambda in lambda_grid {
        let image = path.psi(lambda)?;
        let interval = if collapsed {
            None
        } else {
            match zone {
                None => {
                    let ex = image.excursions();
                    match ex.locate(rho1) {
                        Some(hit) => Some(ex.intervals[hit]),
                        None => {
                            collapsed = true;
                            None
                        }
                    }
                }
                Some((zs, zl)) => {
                    // first positive cell inside the zone, scanning right
                    // from rho1's cell and wrapping within the zone
                    let rel0 = ((j0 + n - zs) % n).min(zl.saturating_sub(1));
                    let found = (0..zl)
                        .map(|i| (zs + (rel0 + i) % zl) % n)
                        .find(|&cell| !image.is_zero(cell));
                    match found {
                        None => {
                            collapsed = true;
                            None
                        }
                        Some(cell) => {
                            let ex = image.excursions();
                            let hit = ex.containing(cell).expect("cell is positive");
                            Some(ex.intervals[hit])
                        }
                    }
                }
            }
        };
        let width_cells = match interval {
            Some((s, l)) => {
                zone = Some((s, l));
                l
            }
            None => 1,
        };
        let w = width_cells as f64 / n as f64;
        widths.push(w);
        values.push(-1.0 + 1.0 / w);
    }
    Ok(SubordinatorSample {
        lambda_grid: lambda_grid.to_vec(),
        widths,
        values,
    })
}

/// Path decomposition at the sampled excursion.
#[derive(Debug, Clone)]
pub struct Decomposition {
    /// `d - g`, the flanking-zero gap of the sampled excursion, so the two
    /// rescaled pieces tile the circle: `r1 + (1 - r1) = 1`.
    pub r1: f64,
    /// The sampled excursion, Brownian-rescaled to `[0, 1]`.
    pub q: LatticePath,
    /// The complement `[d, g + 1]`, Brownian-rescaled and circularly
    /// shifted by the independent uniform `w`.
    pub r_shifted: LatticePath,
}

/// Cuts `psi(path, lambda)` at the excursion containing `rho1` into the
/// rescaled excursion `q` and the shifted rescaled remainder.
pub fn decompose(path: &LatticePath, lambda: f64, rho1: f64, w: f64) -> Result<Decomposition> {
    let n = path.resolution();
    let image = path.psi(lambda)?;
    let ex = image.excursions();
    let hit = ex.locate(rho1).ok_or(Error::FlatPath)?;
    let (start, len) = ex.intervals[hit];
    if len + 2 > n {
        // complement too short to carry a path
        return Err(Error::TooFewExcursions { need: 2, found: 1 });
    }
    let g_cell = (start + n - 1) % n;
    let d_cell = (start + len) % n;
    let q = image.restrict_rescale(g_cell, len + 1)?;
    let rest = n - len - 1;
    let r = image.restrict_rescale(d_cell, rest)?;
    let shift = ((rest as f64 * w).ceil() as usize) % rest;
    Ok(Decomposition {
        r1: (len + 1) as f64 / n as f64,
        q,
        r_shifted: r.shift(shift),
    })
}

/// Partial sums `S_1..S_k` of the widths of the first `k` distinct
/// excursions of `psi(path, lambda)` hit by the sampling points: the
/// rejection construction of the size-biased order.
pub fn size_biased_sums(
    path: &LatticePath,
    lambda: f64,
    rho_sequence: &[f64],
    k: usize,
) -> Result<Vec<f64>> {
    let image = path.psi(lambda)?;
    let ex = image.excursions();
    if ex.intervals.len() < k {
        return Err(Error::TooFewExcursions {
            need: k,
            found: ex.intervals.len(),
        });
    }
    let n = path.resolution() as f64;
    let mut seen = vec![false; ex.intervals.len()];
    let mut sums = Vec::with_capacity(k);
    let mut acc = 0.0;
    for &rho in rho_sequence {
        let hit = ex.locate(rho).ok_or(Error::FlatPath)?;
        if !seen[hit] {
            seen[hit] = true;
            acc += ex.intervals[hit].1 as f64 / n;
            sums.push(acc);
            if sums.len() == k {
                return Ok(sums);
            }
        }
    }
    Err(Error::SamplingExhausted {
        need: k,
        selected: sums.len(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coupling::centered_counts;
    use crate::parking::simulate_uniform;
    use crate::rng::{replica_rng, uniform_unit};

    #[test]
    fn excursion_shape() {
        let e = sample_excursion(1000, 9).unwrap();
        assert_eq!(e.value(0), 0.0);
        assert_eq!(e.value(1000), 0.0);
        assert!(e.is_nonnegative());
        assert!(e.is_circular());
        assert!(e.is_exact());
    }

    #[test]
    fn excursion_resolution_guard() {
        assert!(sample_excursion(1, 0).is_err());
    }

    #[test]
    fn excursion_max_mean_matches_brownian_value() {
        // E[max e] = sqrt(pi/2) ~ 1.2533; 400 replicas at n = 10^4 give a
        // standard error around 0.015. The acceptance suite repeats this at
        // full replica count; here we pin the construction.
        let mut rng = replica_rng(31, 0);
        let reps = 400;
        let mean: f64 = (0..reps)
            .map(|_| sample_excursion_rng(10_000, &mut rng).unwrap().max_value())
            .sum::<f64>()
            / reps as f64;
        assert!(
            (mean - (std::f64::consts::PI / 2.0).sqrt()).abs() < 0.05,
            "mean excursion max {mean}"
        );
    }

    #[test]
    fn lambda_zero_keeps_the_whole_excursion_up_to_lattice_ties() {
        let e = sample_excursion(400, 3).unwrap();
        let r = sample_r1(&e, 0.0, 0.37).unwrap();
        // psi_0 e = e; interior zeros (ties of the bridge minimum) can split
        // the lattice path, so the width is 1 only up to those cells.
        let interior_zeros = e.zero_set().len() - 1;
        assert!(r.width >= 1.0 - (interior_zeros + 1) as f64 / 400.0);
        if interior_zeros == 0 {
            assert_eq!(r.width_cells, 399);
        }
    }

    #[test]
    fn r1_width_shrinks_with_drift_on_fixed_path_and_point() {
        let e = sample_excursion(2500, 17).unwrap();
        let mut rng = replica_rng(18, 0);
        for _ in 0..25 {
            let rho = uniform_unit(&mut rng);
            let mut prev = f64::INFINITY;
            for lambda in [0.25, 0.5, 1.0, 2.0, 4.0] {
                let w = sample_r1(&e, lambda, rho).unwrap().width;
                assert!(w <= prev + 1e-12, "width grew at lambda={lambda}");
                prev = w;
            }
        }
    }

    #[test]
    fn subordinator_is_monotone_on_every_path() {
        let grid = [0.5, 1.0, 1.5, 2.0, 3.0, 5.0];
        let mut rng = replica_rng(77, 0);
        for _ in 0..50 {
            let e = sample_excursion_rng(900, &mut rng).unwrap();
            let rho = uniform_unit(&mut rng);
            let s = subordinator_path(&e, rho, &grid).unwrap();
            for w in s.values.windows(2) {
                assert!(w[1] >= w[0] - 1e-12, "Sigma decreased: {:?}", s.values);
            }
            for w in s.widths.windows(2) {
                assert!(w[1] <= w[0] + 1e-12);
            }
        }
    }

    #[test]
    fn subordinator_rejects_bad_grids() {
        let e = sample_excursion(100, 1).unwrap();
        assert!(subordinator_path(&e, 0.5, &[]).is_err());
        assert!(subordinator_path(&e, 0.5, &[1.0, 1.0]).is_err());
        assert!(subordinator_path(&e, 0.5, &[-1.0, 1.0]).is_err());
    }

    #[test]
    fn decomposition_pieces_tile_and_q_is_an_excursion() {
        let e = sample_excursion(2000, 5).unwrap();
        let d = decompose(&e, 1.0, 0.42, 0.3).unwrap();
        let q = &d.q;
        assert!(q.value(0).abs() < 1e-12);
        assert!(q.value(q.resolution()).abs() < 1e-12);
        assert!(q.values().iter().all(|&v| v >= 0.0));
        assert!(d.r_shifted.values().iter().all(|&v| v >= 0.0));
        let total = d.r1 + d.r_shifted.resolution() as f64 / 2000.0;
        assert!((total - 1.0).abs() < 1e-12);
    }

    #[test]
    fn size_biased_sums_are_monotone_and_bounded() {
        let e = sample_excursion(5000, 21).unwrap();
        let mut rng = replica_rng(22, 0);
        let rhos: Vec<f64> = (0..256).map(|_| uniform_unit(&mut rng)).collect();
        let sums = size_biased_sums(&e, 2.0, &rhos, 4).unwrap();
        assert_eq!(sums.len(), 4);
        for w in sums.windows(2) {
            assert!(w[1] > w[0]);
        }
        assert!(*sums.last().unwrap() <= 1.0);
        // asking for more excursions than exist is an error
        let err = size_biased_sums(&e, 0.0, &rhos, 4000);
        assert!(matches!(err, Err(Error::TooFewExcursions { .. })));
    }

    /// The reflection of the empirical bridge with drift l/sqrt(m)
    /// reproduces the parking profile up to the bounded correction: the
    /// difference never exceeds max(Y) + 1 in units of 1/sqrt(m), and the
    /// reconstructed profile's positive runs are exactly the blocks.
    #[test]
    fn psi_of_bridge_tracks_profile_within_bounded_correction() {
        let m = 10_000usize; // perfect square: l/sqrt(m) is exactly rational
        let ell = 100usize;
        let s = simulate_uniform(m, m - ell, 4242).unwrap();
        let cc = centered_counts(&s);

        // bridge A_k as an exact path: value = (m A_k) / (m sqrt(m))
        let heights: Vec<i64> = std::iter::once(0)
            .chain(cc.a_scaled.iter().copied())
            .collect();
        let bridge = LatticePath::from_heights_scaled(m, &heights, m as u64, true).unwrap();
        let image = bridge.psi_rational(ell as i64, 100).unwrap();

        let h = s.profile().h;
        let max_y = *cc.y.iter().max().unwrap() as f64;
        let sqrt_m = (m as f64).sqrt();
        for j in 0..m {
            let place = if j == 0 { m } else { j };
            let diff = (image.value(j) * sqrt_m - h[place - 1] as f64).abs();
            assert!(
                diff <= max_y + 1.0 + 1e-9,
                "correction exceeded at place {place}: {diff}"
            );
        }

        // reconstructed profile H as a path: positive runs = blocks
        let h_heights: Vec<i64> = (0..=m)
            .map(|j| h[if j == 0 { m - 1 } else { j - 1 }] as i64)
            .collect();
        let h_path = LatticePath::from_heights(m, &h_heights, true).unwrap();
        let ex = h_path.excursions();
        let blocks = s.blocks();
        let mut expected: Vec<(usize, usize)> = blocks
            .blocks
            .iter()
            .map(|b| (b.start % m, b.size))
            .collect();
        let mut got = ex.intervals.clone();
        expected.sort_unstable();
        got.sort_unstable();
        assert_eq!(got, expected);
    }
}
