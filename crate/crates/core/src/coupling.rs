//! Coupling between parking and empirical processes.
//!
//! For a scheme with first-try counts `Y_1..Y_m`, the centered counts are
//!
//! ```text
//! A_k = Y_1 + .. + Y_k - k n / m        (the empirical process at k/m, scaled)
//! C_k = Y_1 + .. + Y_k - k              (drops by l over one period)
//! ```
//!
//! The special place `V` is the first argmin of `A`; it is always empty, the
//! profile can be rebuilt from `C` alone starting there, and the empty places
//! are exactly the strict records of `-C` read from `V`. Everything here is
//! integer arithmetic (`A` is stored as `m * A_k`), so record detection has
//! no ties to misjudge.

use crate::parking::{ParkingScheme, Profile};

/// First-try counts and centered partial sums of a scheme, plus the special
/// empty place `V`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CenteredCounts {
    m: usize,
    n: usize,
    /// `y[k]` = number of cars whose first try was place `k + 1`.
    pub y: Vec<usize>,
    /// `a_scaled[k] = m * A_{k+1}`, exact.
    pub a_scaled: Vec<i64>,
    /// `c[k] = C_{k+1}`.
    pub c: Vec<i64>,
    /// The special place, 1-indexed: first argmin of `A` over `1..=m`.
    pub v: usize,
}

/// Centered counts of a scheme. For `n = 0` every index ties at zero and
/// `V = 1` by the first-argmin rule.
pub fn centered_counts(scheme: &ParkingScheme) -> CenteredCounts {
    let m = scheme.m();
    let n = scheme.n();
    let mut y = vec![0usize; m];
    for &t in scheme.tries() {
        y[t - 1] += 1;
    }
    let mut a_scaled = Vec::with_capacity(m);
    let mut c = Vec::with_capacity(m);
    let mut s = 0i64;
    for (k, &yk) in y.iter().enumerate() {
        s += yk as i64;
        let k1 = (k + 1) as i64;
        a_scaled.push(s * m as i64 - k1 * n as i64);
        c.push(s - k1);
    }
    let mut v = 1;
    let mut best = a_scaled[0];
    for k in 1..m {
        if a_scaled[k] < best {
            best = a_scaled[k];
            v = k + 1;
        }
    }
    CenteredCounts {
        m,
        n,
        y,
        a_scaled,
        c,
        v,
    }
}

impl CenteredCounts {
    pub fn m(&self) -> usize {
        self.m
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// `C_j` for any integer `j >= 0` through the periodic extension
    /// `C_{j+m} = C_j - l` (and `C_0 = 0`).
    pub fn c_ext(&self, j: usize) -> i64 {
        let ell = (self.m - self.n) as i64;
        let (q, r) = (j / self.m, j % self.m);
        let base = if r == 0 { 0 } else { self.c[r - 1] };
        base - q as i64 * ell
    }

    /// Profile reconstruction from the counts alone:
    /// `H_{V+k} = C_{V+k} - C_V + max_{1<=i<=k} (C_{V-1} - C_{V+i-1})_+`,
    /// seeded with `H_V = 0`. Differential oracle for
    /// [`ParkingScheme::profile`].
    pub fn profile(&self) -> Profile {
        let m = self.m;
        let mut h = vec![0usize; m];
        if self.n == 0 {
            return Profile { h };
        }
        let v = self.v;
        let c_v = self.c_ext(v);
        let c_before = self.c_ext(v - 1);
        let mut gamma = 0i64;
        for k in 1..m {
            gamma = gamma.max(c_before - self.c_ext(v + k - 1));
            let val = self.c_ext(v + k) - c_v + gamma.max(0);
            debug_assert!(val >= 0);
            h[(v - 1 + k) % m] = val as usize;
        }
        Profile { h }
    }

    /// The empty places as strict records of `-C` starting at `V`, in record
    /// order. Equals the complement of the occupancy mask as a set.
    pub fn empty_places_as_records(&self) -> Vec<usize> {
        let m = self.m;
        let v = self.v;
        let mut records = Vec::with_capacity(self.m - self.n);
        let mut run_min = self.c_ext(v - 1);
        for k in 0..m {
            let cj = self.c_ext(v + k);
            if cj < run_min {
                run_min = cj;
                records.push((v - 1 + k) % m + 1);
            }
        }
        records
    }
}
