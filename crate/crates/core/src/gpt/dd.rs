//! Exact double description for pointed cones `{z | A z ≥ 0}` over the
//! integers.
//!
//! The cone is seeded from a nonsingular square subsystem, whose extreme
//! rays are the columns of its inverse, and the remaining rows are added one
//! at a time. New rays combine a positive and a negative ray that are
//! adjacent, tested combinatorially on their sets of tight rows. Rays are
//! kept as primitive integer vectors.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};
use crate::rational::Rational;

pub type IntVec = Vec<BigInt>;

fn dot(a: &[BigInt], b: &[BigInt]) -> BigInt {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Divides by the gcd of the entries.
pub fn primitive(mut v: IntVec) -> IntVec {
    let g = v.iter().fold(BigInt::zero(), |g, x| g.gcd(x));
    if !g.is_zero() && !g.is_one() {
        v.iter_mut().for_each(|x| *x /= &g);
    }
    v
}

/// Clears denominators and reduces to a primitive integer vector.
pub fn integral(v: &[Rational]) -> IntVec {
    let l = v.iter().fold(BigInt::one(), |l, x| l.lcm(x.denom()));
    primitive(v.iter().map(|x| (x * &l).to_integer()).collect())
}

#[derive(Clone)]
struct Ray {
    z: IntVec,
    /// Bitset of rows tight at this ray.
    tight: Vec<u64>,
}

fn set_bit(bits: &mut [u64], k: usize) {
    bits[k / 64] |= 1 << (k % 64);
}

fn subset(a: &[u64], b: &[u64]) -> bool {
    a.iter().zip(b).all(|(x, y)| x & !y == 0)
}

fn popcount(a: &[u64]) -> usize {
    a.iter().map(|x| x.count_ones() as usize).sum()
}

/// Rows of `rows` forming a basis of their span, chosen greedily in order.
fn independent_rows(rows: &[IntVec], dim: usize) -> Vec<usize> {
    let mut basis: Vec<(usize, Vec<Rational>)> = Vec::new();
    let mut chosen = Vec::new();
    for (k, row) in rows.iter().enumerate() {
        let mut v: Vec<Rational> = row.iter().map(|x| Rational::from_integer(x.clone())).collect();
        for (p, b) in &basis {
            if !v[*p].is_zero() {
                let f = v[*p].clone();
                for (vi, bi) in v.iter_mut().zip(b) {
                    *vi -= &f * bi;
                }
            }
        }
        if let Some(p) = v.iter().position(|x| !x.is_zero()) {
            let inv = v[p].recip();
            v.iter_mut().for_each(|x| *x *= &inv);
            basis.push((p, v));
            chosen.push(k);
            if chosen.len() == dim {
                break;
            }
        }
    }
    chosen
}

/// Inverse of a nonsingular square matrix by Gauss-Jordan elimination.
fn inverse(m: &[Vec<Rational>]) -> Vec<Vec<Rational>> {
    let n = m.len();
    let mut a: Vec<Vec<Rational>> = m
        .iter()
        .enumerate()
        .map(|(i, row)| {
            let mut r = row.clone();
            r.extend((0..n).map(|j| if i == j { Rational::one() } else { Rational::zero() }));
            r
        })
        .collect();
    for col in 0..n {
        let p = (col..n).find(|&r| !a[r][col].is_zero()).expect("nonsingular");
        a.swap(col, p);
        let inv = a[col][col].recip();
        a[col].iter_mut().for_each(|x| *x *= &inv);
        for r in 0..n {
            if r != col && !a[r][col].is_zero() {
                let f = a[r][col].clone();
                let pivot = a[col].clone();
                for (x, y) in a[r].iter_mut().zip(&pivot) {
                    *x -= &f * y;
                }
            }
        }
    }
    a.into_iter().map(|r| r[n..].to_vec()).collect()
}

/// Extreme rays of `{z ∈ R^dim | row·z ≥ 0 for every row}`, sorted. Errors
/// if the cone contains a line.
pub fn extreme_rays(rows: &[IntVec], dim: usize) -> Result<Vec<IntVec>> {
    let seed = independent_rows(rows, dim);
    if seed.len() < dim {
        return Err(Error::Unbounded(format!(
            "constraints have rank {} in dimension {dim}",
            seed.len()
        )));
    }
    let words = rows.len().div_ceil(64).max(1);
    let square: Vec<Vec<Rational>> = seed
        .iter()
        .map(|&k| rows[k].iter().map(|x| Rational::from_integer(x.clone())).collect())
        .collect();
    let inv = inverse(&square);
    let mut rays: Vec<Ray> = (0..dim)
        .map(|j| {
            let col: Vec<Rational> = (0..dim).map(|i| inv[i][j].clone()).collect();
            let mut tight = vec![0u64; words];
            for (i, &k) in seed.iter().enumerate() {
                if i != j {
                    set_bit(&mut tight, k);
                }
            }
            Ray { z: integral(&col), tight }
        })
        .collect();

    let mut in_seed = vec![false; rows.len()];
    for &k in &seed {
        in_seed[k] = true;
    }
    for (k, row) in rows.iter().enumerate() {
        if in_seed[k] {
            continue;
        }
        let values: Vec<BigInt> = rays.iter().map(|r| dot(row, &r.z)).collect();
        if values.iter().all(|v| !v.is_negative()) {
            for (r, v) in rays.iter_mut().zip(&values) {
                if v.is_zero() {
                    set_bit(&mut r.tight, k);
                }
            }
            continue;
        }
        let pos: Vec<usize> = (0..rays.len()).filter(|&i| values[i].is_positive()).collect();
        let neg: Vec<usize> = (0..rays.len()).filter(|&i| values[i].is_negative()).collect();
        let mut next: Vec<Ray> = Vec::new();
        for &i in &pos {
            for &j in &neg {
                let common: Vec<u64> = rays[i].tight.iter().zip(&rays[j].tight).map(|(a, b)| a & b).collect();
                if popcount(&common) + 2 < dim {
                    continue;
                }
                let adjacent = rays
                    .iter()
                    .enumerate()
                    .all(|(l, r)| l == i || l == j || !subset(&common, &r.tight));
                if !adjacent {
                    continue;
                }
                let z: IntVec = rays[j]
                    .z
                    .iter()
                    .zip(&rays[i].z)
                    .map(|(zj, zi)| &values[i] * zj - &values[j] * zi)
                    .collect();
                let mut tight = common;
                set_bit(&mut tight, k);
                next.push(Ray { z: primitive(z), tight });
            }
        }
        for (i, mut r) in rays.into_iter().enumerate() {
            if values[i].is_negative() {
                continue;
            }
            if values[i].is_zero() {
                set_bit(&mut r.tight, k);
            }
            next.push(r);
        }
        rays = next;
    }
    let mut out: Vec<IntVec> = rays.into_iter().map(|r| r.z).collect();
    out.sort();
    out.dedup();
    Ok(out)
}
