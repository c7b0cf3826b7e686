//! The root-of-unity diagonal `D_n`, the cyclic shift `T_n`, and the doubling
//! permutation `x ↦ 2x mod n` that conjugates `D_n` to `D_n²`.

use std::collections::BTreeMap;
use std::io::Write;

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::matkernel::{CMat, Eigendata, UnitaryMatrix};
use crate::scalar::{cis, root_angle, Real, C};

/// Largest `n` for which the doubling permutation is built with a dense eigenframe.
pub const DENSE_FRAME_LIMIT: u64 = 4096;

fn require_odd(n: u64) -> Result<()> {
    if n.is_multiple_of(2) {
        return Err(Error::OutOfRange(format!("n = {n} must be odd")));
    }
    Ok(())
}

/// `D_n = diag(e^{2πik/n})`, `k = 0..n−1`.
pub fn diag_root_matrix<T: Real>(n: u64) -> UnitaryMatrix<T> {
    let angles: Vec<T> = (0..n).map(|k| root_angle(k, n)).collect();
    UnitaryMatrix::diagonal_from_angles(&angles)
}

/// `T_n = e_{1,2} + e_{2,3} + … + e_{n,1}`, with its Fourier eigenbasis.
pub fn shift_matrix<T: Real>(n: u64) -> UnitaryMatrix<T> {
    let nu = n as usize;
    let one = C::new(T::one(), T::zero());
    let mat = CMat::from_fn(nu, nu, |i, j| {
        if j == (i + 1) % nu {
            one
        } else {
            C::new(T::zero(), T::zero())
        }
    });
    // T v_m = e^{2πim/n} v_m for v_m = n^{-1/2} Σ_t e^{2πimt/n} e_t
    let scale = T::one() / T::from_u64(n).unwrap().sqrt();
    let frame = CMat::from_fn(nu, nu, |t, m| cis(root_angle::<T>((m * t) as u64, n)) * scale);
    let angles = (0..n).map(|m| root_angle(m, n)).collect();
    UnitaryMatrix::with_trusted_eigendata(mat, Eigendata { frame, angles })
}

/// Image of `x` under the doubling map.
#[inline]
pub fn double_mod(x: u64, n: u64) -> u64 {
    ((x as u128 * 2) % n as u128) as u64
}

/// Orbits of `x ↦ 2x mod n`, each listed as `x, 2x, 4x, …` from its smallest element,
/// in increasing order of that element.
pub fn orbits(n: u64) -> Result<Vec<Vec<u64>>> {
    require_odd(n)?;
    let mut seen = vec![false; n as usize];
    let mut out = Vec::new();
    for x in 0..n {
        if seen[x as usize] {
            continue;
        }
        let mut cycle = vec![x];
        seen[x as usize] = true;
        let mut y = double_mod(x, n);
        while y != x {
            seen[y as usize] = true;
            cycle.push(y);
            y = double_mod(y, n);
        }
        out.push(cycle);
    }
    Ok(out)
}

/// The permutation matrix `P` with `P e_x = e_{2x mod n}`.
pub fn doubling_permutation_matrix<T: Real>(n: u64) -> Result<CMat<T>> {
    require_odd(n)?;
    let nu = n as usize;
    let mut mat = CMat::zeros(nu, nu);
    for x in 0..n {
        mat[(double_mod(x, n) as usize, x as usize)] = C::new(T::one(), T::zero());
    }
    Ok(mat)
}

/// Eigendata of the doubling permutation: for a cycle `c_0, …, c_{L−1}` the
/// vectors `L^{-1/2} Σ_t e^{−2πimt/L} e_{c_t}` have eigenangle `2πm/L`.
/// Columns are grouped by cycle (in [`orbits`] order), `m = 0..L−1` within a cycle.
pub fn doubling_eigendata<T: Real>(n: u64) -> Result<Eigendata<T>> {
    let nu = n as usize;
    let mut frame = CMat::zeros(nu, nu);
    let mut angles = Vec::with_capacity(nu);
    let mut col = 0;
    for cycle in orbits(n)? {
        let l = cycle.len() as u64;
        let scale = T::one() / T::from_u64(l).unwrap().sqrt();
        for m in 0..l {
            for (t, &c) in cycle.iter().enumerate() {
                frame[(c as usize, col)] = cis(-root_angle::<T>(m * t as u64, l)) * scale;
            }
            angles.push(root_angle(m, l));
            col += 1;
        }
    }
    Eigendata::new(frame, angles)
}

/// The doubling permutation with eigendata from its cycle decomposition.
/// Satisfies `P⁻¹ D_n P = D_n²`.
pub fn doubling_permutation<T: Real>(n: u64) -> Result<UnitaryMatrix<T>> {
    require_odd(n)?;
    if n > DENSE_FRAME_LIMIT {
        return Err(Error::Cap(format!(
            "dense doubling permutation of size {n} (limit {DENSE_FRAME_LIMIT})"
        )));
    }
    Ok(UnitaryMatrix::with_trusted_eigendata(
        doubling_permutation_matrix(n)?,
        doubling_eigendata(n)?,
    ))
}

/// Largest entrywise error of `P⁻¹ D_n P − D_n²`, where `P` is read off the
/// dense permutation matrix and `D_n²` is the floating square of `D_n`.
/// The sandwich is evaluated through the permutation structure, not by dense products.
pub fn doubling_identity_error<T: Real>(n: u64) -> Result<T> {
    let p = doubling_permutation_matrix::<T>(n)?;
    let d = diag_root_matrix::<T>(n);
    let nu = n as usize;
    // image[x] = the row holding the single 1 in column x
    let mut image = vec![usize::MAX; nu];
    for x in 0..nu {
        for r in 0..nu {
            let z = p[(r, x)];
            if z.re == T::one() && z.im == T::zero() {
                if image[x] != usize::MAX {
                    return Err(Error::Precondition(format!("column {x} has two nonzero entries")));
                }
                image[x] = r;
            } else if z.re != T::zero() || z.im != T::zero() {
                return Err(Error::Precondition(format!("entry ({r}, {x}) is not 0 or 1")));
            }
        }
    }
    // P⁻¹ D P e_x = d_{σ(x)} e_x since P⁻¹ = Pᵀ
    let mut err = T::zero();
    for (x, &sx) in image.iter().enumerate() {
        let lhs = d.matrix()[(sx, sx)];
        let dx = d.matrix()[(x, x)];
        err = err.max((lhs - dx * dx).norm());
    }
    Ok(err)
}

fn factorize(mut n: u64) -> Vec<(u64, u32)> {
    let mut out = Vec::new();
    let mut q = 2;
    while q * q <= n {
        if n.is_multiple_of(q) {
            let mut e = 0;
            while n.is_multiple_of(q) {
                n /= q;
                e += 1;
            }
            out.push((q, e));
        }
        q += if q == 2 { 1 } else { 2 };
    }
    if n > 1 {
        out.push((n, 1));
    }
    out
}

fn pow_mod(base: u64, mut e: u64, m: u64) -> u64 {
    let m128 = m as u128;
    let mut acc = 1u128 % m128;
    let mut b = base as u128 % m128;
    while e > 0 {
        if e & 1 == 1 {
            acc = acc * b % m128;
        }
        b = b * b % m128;
        e >>= 1;
    }
    acc as u64
}

fn divisors(factors: &[(u64, u32)]) -> Vec<(u64, Vec<(u64, u32)>)> {
    let mut out = vec![(1u64, Vec::new())];
    for &(q, e) in factors {
        let mut next = Vec::with_capacity(out.len() * (e as usize + 1));
        for (d, f) in &out {
            let mut pk = 1;
            for k in 0..=e {
                let mut f2 = f.clone();
                if k > 0 {
                    f2.push((q, k));
                }
                next.push((d * pk, f2));
                pk *= q;
            }
        }
        out = next;
    }
    out
}

fn totient(factors: &[(u64, u32)]) -> u64 {
    factors
        .iter()
        .map(|&(q, e)| (q - 1) * q.pow(e - 1))
        .product()
}

/// Multiplicative order of 2 modulo odd `d`, given the factorization of `d`.
fn order_of_two(d: u64, factors: &[(u64, u32)]) -> u64 {
    if d == 1 {
        return 1;
    }
    let mut ord = totient(factors);
    for (q, _) in factorize(ord) {
        while ord.is_multiple_of(q) && pow_mod(2, ord / q, d) == 1 {
            ord /= q;
        }
    }
    ord
}

/// Cycle census `(length, count)` of `x ↦ 2x mod n`, sorted by length.
///
/// Elements with `n / gcd(x, n) = d` form `φ(d)` points, each on an orbit of
/// length `ord_d(2)`; only integer arithmetic is involved.
pub fn cycle_structure(n: u64) -> Result<Vec<(u64, u64)>> {
    require_odd(n)?;
    let mut census: BTreeMap<u64, u64> = BTreeMap::new();
    for (d, f) in divisors(&factorize(n)) {
        let len = order_of_two(d, &f);
        *census.entry(len).or_default() += totient(&f) / len;
    }
    Ok(census.into_iter().collect())
}

/// One arc of the doubling-spectrum histogram.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct HistogramBin {
    pub n: u64,
    pub bin_start_angle: f64,
    pub bin_end_angle: f64,
    pub count: u64,
    pub fraction: f64,
}

/// Eigenvalue counts of the doubling permutation over `bins` equal half-open
/// arcs `[2πb/bins, 2π(b+1)/bins)`.
///
/// An eigenangle `2πm/L` lies in bin `⌊m·bins/L⌋`, so each `L`-cycle puts
/// `⌈(b+1)L/bins⌉ − ⌈bL/bins⌉` eigenvalues in bin `b`. The counts are exact.
pub fn spectrum_histogram(n: u64, bins: u64) -> Result<Vec<HistogramBin>> {
    if bins == 0 {
        return Err(Error::OutOfRange("bins must be positive".into()));
    }
    let census = cycle_structure(n)?;
    let ceil_div = |a: u128, b: u128| a.div_ceil(b);
    let tau = std::f64::consts::TAU;
    Ok((0..bins)
        .map(|b| {
            let count: u128 = census
                .iter()
                .map(|&(l, c)| {
                    let (l, bb, nb) = (l as u128, b as u128, bins as u128);
                    (ceil_div((bb + 1) * l, nb) - ceil_div(bb * l, nb)) * c as u128
                })
                .sum();
            HistogramBin {
                n,
                bin_start_angle: tau * b as f64 / bins as f64,
                bin_end_angle: tau * (b + 1) as f64 / bins as f64,
                count: count as u64,
                fraction: count as f64 / n as f64,
            }
        })
        .collect())
}

/// Histograms for many `n`, computed in parallel and returned in ascending `n`.
pub fn density_scan(ns: &[u64], bins: u64) -> Result<Vec<Vec<HistogramBin>>> {
    let mut sorted = ns.to_vec();
    sorted.sort_unstable();
    sorted.par_iter().map(|&n| spectrum_histogram(n, bins)).collect()
}

/// CSV with header `n,bin_start_angle,bin_end_angle,count,fraction`.
pub fn write_histogram_csv<W: Write>(out: W, rows: &[HistogramBin]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let io = |e: csv::Error| Error::Io {
        path: "histogram csv".into(),
        source: std::io::Error::other(e),
    };
    if rows.is_empty() {
        w.write_record(["n", "bin_start_angle", "bin_end_angle", "count", "fraction"])
            .map_err(io)?;
    }
    for r in rows {
        w.serialize(r).map_err(io)?;
    }
    w.flush().map_err(|source| Error::Io {
        path: "histogram csv".into(),
        source,
    })
}

/// Census as `(1,1),(5,6)`.
pub fn format_census(census: &[(u64, u64)]) -> String {
    census
        .iter()
        .map(|(l, c)| format!("({l},{c})"))
        .collect::<Vec<_>>()
        .join(",")
}
