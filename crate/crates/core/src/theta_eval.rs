//! Theta functions with characteristics on the Siegel upper half-space.
//!
//! ```text
//! theta[a1; a2](z, tau) = sum_{m in Z^g} exp(pi i ((m + a1/2)^T tau (m + a1/2)
//!                                          + 2 (m + a1/2)^T (z + a2/2)))
//! ```
//!
//! The series is summed over a box centred at the largest term. Its radius is
//! the smallest one whose Gaussian tail bound drops below the policy's target.

use std::f64::consts::PI;

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::char2::{self, Characteristic, MAX_GENUS};
use crate::error::{Error, Result};

/// Componentwise tolerance on `tau - tau^T`.
pub const SYMMETRY_TOL: f64 = 1e-12;

/// Period matrices with `lambda_min(Im tau)` below this are rejected.
pub const MIN_EIGENVALUE: f64 = 1e-6;

/// Radius searched when reporting how far the cap falls short.
const RADIUS_SEARCH_LIMIT: u32 = 1 << 16;

/// Point of the Siegel upper half-space.
#[derive(Clone, Debug, PartialEq)]
pub struct PeriodMatrix {
    g: usize,
    tau: Vec<Complex64>,
    im_inv: Vec<f64>,
    lambda_min: f64,
}

impl PeriodMatrix {
    /// `tau` is row-major `g x g`.
    pub fn new(g: usize, tau: Vec<Complex64>) -> Result<Self> {
        char2::check_genus(g, MAX_GENUS)?;
        if tau.len() != g * g {
            return Err(Error::InvalidPeriodMatrix(format!(
                "expected {} entries, got {}",
                g * g,
                tau.len()
            )));
        }
        if tau.iter().any(|t| !t.re.is_finite() || !t.im.is_finite()) {
            return Err(Error::InvalidPeriodMatrix("non-finite entry".into()));
        }
        let mut sym = tau;
        for i in 0..g {
            for j in 0..i {
                let (a, b) = (sym[i * g + j], sym[j * g + i]);
                if (a - b).norm() > SYMMETRY_TOL {
                    return Err(Error::InvalidPeriodMatrix(format!(
                        "not symmetric at ({i}, {j}): {a} vs {b}"
                    )));
                }
                let mean = (a + b) * 0.5;
                sym[i * g + j] = mean;
                sym[j * g + i] = mean;
            }
        }
        let im = DMatrix::from_fn(g, g, |i, j| sym[i * g + j].im);
        let lambda_min = SymmetricEigen::new(im.clone())
            .eigenvalues
            .iter()
            .copied()
            .fold(f64::INFINITY, f64::min);
        if !(lambda_min > 0.0) {
            return Err(Error::InvalidPeriodMatrix(format!(
                "imaginary part not positive definite (lambda_min = {lambda_min:e})"
            )));
        }
        if lambda_min < MIN_EIGENVALUE {
            return Err(Error::InvalidPeriodMatrix(format!(
                "lambda_min = {lambda_min:e} below {MIN_EIGENVALUE:e}"
            )));
        }
        let inv = im
            .cholesky()
            .ok_or_else(|| Error::InvalidPeriodMatrix("Cholesky failed".into()))?
            .inverse();
        let im_inv = (0..g * g).map(|k| inv[(k / g, k % g)]).collect();
        Ok(PeriodMatrix {
            g,
            tau: sym,
            im_inv,
            lambda_min,
        })
    }

    pub fn from_parts(re: &[Vec<f64>], im: &[Vec<f64>]) -> Result<Self> {
        let g = re.len();
        if im.len() != g || re.iter().chain(im).any(|row| row.len() != g) {
            return Err(Error::InvalidPeriodMatrix(
                "re and im must both be square of the same size".into(),
            ));
        }
        let tau = re
            .iter()
            .flatten()
            .zip(im.iter().flatten())
            .map(|(&r, &i)| Complex64::new(r, i))
            .collect();
        Self::new(g, tau)
    }

    pub fn diagonal(entries: &[Complex64]) -> Result<Self> {
        let g = entries.len();
        let mut tau = vec![Complex64::new(0.0, 0.0); g * g];
        for (k, &t) in entries.iter().enumerate() {
            tau[k * g + k] = t;
        }
        Self::new(g, tau)
    }

    /// `diag(i, ..., i)`.
    pub fn diagonal_i(g: usize) -> Result<Self> {
        Self::diagonal(&vec![Complex64::new(0.0, 1.0); g])
    }

    pub fn block_diagonal(blocks: &[PeriodMatrix]) -> Result<Self> {
        let g: usize = blocks.iter().map(|b| b.g).sum();
        let mut tau = vec![Complex64::new(0.0, 0.0); g * g];
        let mut off = 0;
        for b in blocks {
            for i in 0..b.g {
                for j in 0..b.g {
                    tau[(off + i) * g + off + j] = b.entry(i, j);
                }
            }
            off += b.g;
        }
        Self::new(g, tau)
    }

    pub fn genus(&self) -> usize {
        self.g
    }

    pub fn entry(&self, i: usize, j: usize) -> Complex64 {
        self.tau[i * self.g + j]
    }

    /// Smallest eigenvalue of `Im tau`.
    pub fn lambda_min(&self) -> f64 {
        self.lambda_min
    }

    pub fn re_rows(&self) -> Vec<Vec<f64>> {
        (0..self.g)
            .map(|i| (0..self.g).map(|j| self.entry(i, j).re).collect())
            .collect()
    }

    pub fn im_rows(&self) -> Vec<Vec<f64>> {
        (0..self.g)
            .map(|i| (0..self.g).map(|j| self.entry(i, j).im).collect())
            .collect()
    }

    /// `tau * v` for a real vector `v`.
    pub fn mul_real(&self, v: &[f64]) -> Vec<Complex64> {
        (0..self.g)
            .map(|i| (0..self.g).map(|j| self.entry(i, j) * v[j]).sum())
            .collect()
    }

    fn im_inv_mul(&self, y: &[f64]) -> Vec<f64> {
        (0..self.g)
            .map(|i| {
                (0..self.g)
                    .map(|j| self.im_inv[i * self.g + j] * y[j])
                    .sum()
            })
            .collect()
    }
}

#[derive(Serialize, Deserialize)]
struct PeriodMatrixRepr {
    g: usize,
    re: Vec<Vec<f64>>,
    im: Vec<Vec<f64>>,
}

impl Serialize for PeriodMatrix {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        PeriodMatrixRepr {
            g: self.g,
            re: self.re_rows(),
            im: self.im_rows(),
        }
        .serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for PeriodMatrix {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let repr = PeriodMatrixRepr::deserialize(deserializer)?;
        if repr.re.len() != repr.g {
            return Err(serde::de::Error::custom(format!(
                "declared g = {} but matrix has {} rows",
                repr.g,
                repr.re.len()
            )));
        }
        PeriodMatrix::from_parts(&repr.re, &repr.im).map_err(serde::de::Error::custom)
    }
}

/// Argument `z` of a theta function.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Point(pub Vec<Complex64>);

impl Point {
    pub fn new(z: Vec<Complex64>) -> Result<Self> {
        if z.iter().any(|c| !c.re.is_finite() || !c.im.is_finite()) {
            return Err(Error::Input("point has non-finite component".into()));
        }
        Ok(Point(z))
    }

    pub fn zero(g: usize) -> Self {
        Point(vec![Complex64::new(0.0, 0.0); g])
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn scaled(&self, k: f64) -> Point {
        Point(self.0.iter().map(|c| c * k).collect())
    }

    pub fn neg(&self) -> Point {
        self.scaled(-1.0)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TruncationPolicy {
    /// Absolute bound on the discarded tail.
    pub target_eps: f64,
    /// Largest admissible box radius.
    pub max_radius: u32,
}

impl Default for TruncationPolicy {
    fn default() -> Self {
        TruncationPolicy {
            target_eps: 1e-11,
            max_radius: 64,
        }
    }
}

impl TruncationPolicy {
    pub fn with_eps(target_eps: f64) -> Result<Self> {
        let p = TruncationPolicy {
            target_eps,
            ..Default::default()
        };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.target_eps >= 1e-14) || !self.target_eps.is_finite() {
            return Err(Error::InvalidPolicy(format!(
                "target_eps = {:e} must be finite and >= 1e-14",
                self.target_eps
            )));
        }
        if self.max_radius == 0 || self.max_radius > 64 {
            return Err(Error::InvalidPolicy(format!(
                "max_radius = {} must lie in 1..=64",
                self.max_radius
            )));
        }
        Ok(())
    }
}

/// A theta value together with the truncation that produced it.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ThetaValue {
    pub value: Complex64,
    pub radius: u32,
    /// Upper bound on the modulus of the discarded tail.
    pub error_bound: f64,
    /// Sum of the moduli of the retained terms; sets the rounding scale.
    pub term_modulus_sum: f64,
}

/// Natural log of the tail bound for the box of radius `r` around the
/// maximal term.
///
/// With `c = Y^{-1} y`, every term has modulus
/// `exp(pi c^T Y c) exp(-pi w^T Y w)`, `w = m + a1/2 + c`, and
/// `w^T Y w >= lambda |w|^2`. Terms outside the box have `|w_j| > r` for some
/// `j`; summing one-dimensional Gaussian tails over the shifted lattice gives
///
/// ```text
/// tail <= exp(pi c^T Y c) * g * A^(g-1) * 2 exp(-pi lambda r^2) / (1 - exp(-2 pi lambda r))
/// A = 2 + 1 / sqrt(lambda)
/// ```
pub fn log_tail_bound(g: usize, lambda: f64, log_scale: f64, r: f64) -> f64 {
    let a = 2.0 + 1.0 / lambda.sqrt();
    log_scale + (g as f64).ln() + (g as f64 - 1.0) * a.ln() + 2f64.ln()
        - PI * lambda * r * r
        - (-(-2.0 * PI * lambda * r).exp()).ln_1p()
}

/// Smallest radius meeting `target_eps`, searching up to `limit`.
fn required_radius(
    g: usize,
    lambda: f64,
    log_scale: f64,
    target_eps: f64,
    limit: u32,
) -> Option<u32> {
    let goal = target_eps.ln();
    (1..=limit).find(|&r| log_tail_bound(g, lambda, log_scale, r as f64) < goal)
}

/// Evaluates `theta[c](z, tau)` to within `policy.target_eps`.
pub fn theta_with_char(
    c: &Characteristic,
    z: &Point,
    tau: &PeriodMatrix,
    policy: &TruncationPolicy,
) -> Result<ThetaValue> {
    policy.validate()?;
    let g = tau.genus();
    if c.genus() != g {
        return Err(Error::GenusMismatch {
            left: c.genus(),
            right: g,
        });
    }
    if z.dim() != g {
        return Err(Error::DimensionMismatch {
            expected: g,
            got: z.dim(),
        });
    }
    let y: Vec<f64> = z.0.iter().map(|v| v.im).collect();
    let centre = tau.im_inv_mul(&y);
    let log_scale = PI * y.iter().zip(&centre).map(|(a, b)| a * b).sum::<f64>();
    let radius = match required_radius(
        g,
        tau.lambda_min,
        log_scale,
        policy.target_eps,
        policy.max_radius,
    ) {
        Some(r) => r,
        None => {
            let required = required_radius(
                g,
                tau.lambda_min,
                log_scale,
                policy.target_eps,
                RADIUS_SEARCH_LIMIT,
            )
            .unwrap_or(RADIUS_SEARCH_LIMIT);
            return Err(Error::RadiusCapReached {
                required,
                cap: policy.max_radius,
            });
        }
    };
    let (value, term_modulus_sum) = box_sum(c, z, tau, &centre, radius as f64);
    Ok(ThetaValue {
        value,
        radius,
        error_bound: log_tail_bound(g, tau.lambda_min, log_scale, radius as f64).exp(),
        term_modulus_sum,
    })
}

/// Sums the series over `{m : |m_j + a1_j/2 + centre_j| <= r}`.
fn box_sum(
    c: &Characteristic,
    z: &Point,
    tau: &PeriodMatrix,
    centre: &[f64],
    r: f64,
) -> (Complex64, f64) {
    let g = tau.genus();
    let half_a1: Vec<f64> = c.a1_bits().iter().map(|&b| b as f64 * 0.5).collect();
    let shift: Vec<Complex64> =
        z.0.iter()
            .zip(c.a2_bits())
            .map(|(zj, b)| zj + b as f64 * 0.5)
            .collect();
    let lo: Vec<i64> = (0..g)
        .map(|j| (-centre[j] - r - half_a1[j]).ceil() as i64)
        .collect();
    let hi: Vec<i64> = (0..g)
        .map(|j| (-centre[j] + r - half_a1[j]).floor() as i64)
        .collect();
    if lo.iter().zip(&hi).any(|(l, h)| l > h) {
        return (Complex64::new(0.0, 0.0), 0.0);
    }

    let mut m = lo.clone();
    let mut n = vec![0.0; g];
    let mut sum = Complex64::new(0.0, 0.0);
    let mut modulus_sum = 0.0;
    loop {
        for j in 0..g {
            n[j] = m[j] as f64 + half_a1[j];
        }
        let mut w = Complex64::new(0.0, 0.0);
        for i in 0..g {
            let mut row = Complex64::new(0.0, 0.0);
            for j in 0..g {
                row += tau.tau[i * g + j] * n[j];
            }
            w += n[i] * (row + 2.0 * shift[i]);
        }
        // exp(pi i w)
        let modulus = (-PI * w.im).exp();
        let phase = PI * w.re;
        sum += Complex64::new(modulus * phase.cos(), modulus * phase.sin());
        modulus_sum += modulus;

        let mut k = g;
        loop {
            if k == 0 {
                return (sum, modulus_sum);
            }
            k -= 1;
            if m[k] < hi[k] {
                m[k] += 1;
                break;
            }
            m[k] = lo[k];
        }
    }
}

/// Same sum over an explicit radius, bypassing the tail-bound search.
pub fn theta_at_radius(
    c: &Characteristic,
    z: &Point,
    tau: &PeriodMatrix,
    radius: u32,
) -> Result<Complex64> {
    if c.genus() != tau.genus() || z.dim() != tau.genus() {
        return Err(Error::GenusMismatch {
            left: c.genus(),
            right: tau.genus(),
        });
    }
    let y: Vec<f64> = z.0.iter().map(|v| v.im).collect();
    let centre = tau.im_inv_mul(&y);
    Ok(box_sum(c, z, tau, &centre, radius as f64).0)
}

/// `theta[c](0, tau)` for every even `c`, canonical order.
pub fn theta_nulls(
    tau: &PeriodMatrix,
    policy: &TruncationPolicy,
) -> Result<Vec<(Characteristic, Complex64)>> {
    let zero = Point::zero(tau.genus());
    char2::even_characteristics(tau.genus())?
        .into_par_iter()
        .map(|c| Ok((c, theta_with_char(&c, &zero, tau, policy)?.value)))
        .collect()
}

/// `theta[c](z, tau)` for every characteristic in `chars`, preserving order.
pub fn theta_batch(
    chars: &[Characteristic],
    z: &Point,
    tau: &PeriodMatrix,
    policy: &TruncationPolicy,
) -> Result<Vec<Complex64>> {
    chars
        .par_iter()
        .map(|c| Ok(theta_with_char(c, z, tau, policy)?.value))
        .collect()
}

/// Half-period `(a1 + tau a2) / 2` with bits lifted to `0/1`.
pub fn two_torsion_point(a: &Characteristic, tau: &PeriodMatrix) -> Result<Point> {
    if a.genus() != tau.genus() {
        return Err(Error::GenusMismatch {
            left: a.genus(),
            right: tau.genus(),
        });
    }
    let p: Vec<f64> = a.a1_bits().iter().map(|&b| b as f64).collect();
    let q: Vec<f64> = a.a2_bits().iter().map(|&b| b as f64).collect();
    let tq = tau.mul_real(&q);
    Ok(Point(
        p.iter()
            .zip(tq)
            .map(|(&pj, tqj)| (tqj + pj) * 0.5)
            .collect(),
    ))
}

/// The half-period whose translation shifts characteristics by `a`:
/// `theta[c](z + z_a)` is a multiple of `theta[c + a](z)`.
///
/// Translating by `(p + tau q)/2` moves `[c1; c2]` to `[c1 + q; c2 + p]`, so
/// this is [`two_torsion_point`] of the swapped pair `(a2, a1)`.
pub fn translation_point(a: &Characteristic, tau: &PeriodMatrix) -> Result<Point> {
    two_torsion_point(&a.swapped(), tau)
}

/// `tau = S + i (B B^T + floor I)` with `S`, `B` uniform on `[-1/2, 1/2]`.
pub fn random_tau(g: usize, seed: u64, floor: f64) -> Result<PeriodMatrix> {
    if !(floor > 0.0) || !floor.is_finite() {
        return Err(Error::Input(format!("floor must be positive, got {floor}")));
    }
    char2::check_genus(g, MAX_GENUS)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut s = vec![0.0; g * g];
    for i in 0..g {
        for j in i..g {
            let v = rng.gen_range(-0.5..=0.5);
            s[i * g + j] = v;
            s[j * g + i] = v;
        }
    }
    let b: Vec<f64> = (0..g * g).map(|_| rng.gen_range(-0.5..=0.5)).collect();
    let mut tau = Vec::with_capacity(g * g);
    for i in 0..g {
        for j in 0..g {
            let mut y: f64 = (0..g).map(|k| b[i * g + k] * b[j * g + k]).sum();
            if i == j {
                y += floor;
            }
            tau.push(Complex64::new(s[i * g + j], y));
        }
    }
    PeriodMatrix::new(g, tau)
}

/// `z = u + tau v` with `u, v` uniform on `[0, 1)^g`: one fundamental cell.
pub fn sample_cell_point<R: Rng + ?Sized>(tau: &PeriodMatrix, rng: &mut R) -> Point {
    let g = tau.genus();
    let u: Vec<f64> = (0..g).map(|_| rng.gen::<f64>()).collect();
    let v: Vec<f64> = (0..g).map(|_| rng.gen::<f64>()).collect();
    let tv = tau.mul_real(&v);
    Point(u.iter().zip(tv).map(|(&uj, t)| t + uj).collect())
}

/// Seeded generator shared by the samplers.
pub fn seeded_rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ch(s: &str) -> Characteristic {
        s.parse().unwrap()
    }

    fn i() -> Complex64 {
        Complex64::new(0.0, 1.0)
    }

    /// Plain symmetric-box summation, doubling the radius until stable.
    fn oracle(c: &Characteristic, z: &Point, tau: &PeriodMatrix) -> Complex64 {
        let mut r = 4;
        let mut prev = theta_at_radius(c, z, tau, r).unwrap();
        loop {
            r *= 2;
            let next = theta_at_radius(c, z, tau, r).unwrap();
            if (next - prev).norm() < 1e-13 * next.norm().max(1.0) {
                return next;
            }
            prev = next;
        }
    }

    #[test]
    fn theta3_at_i() {
        let tau = PeriodMatrix::diagonal(&[i()]).unwrap();
        let z = Point::zero(1);
        let got = theta_with_char(&ch("0,0"), &z, &tau, &TruncationPolicy::default()).unwrap();
        let want = oracle(&ch("0,0"), &z, &tau);
        assert!((got.value - want).norm() < 1e-11);
        assert!((got.value.re - 1.086434811213308).abs() < 1e-12);
        assert!(got.value.im.abs() < 1e-14);
        assert!(got.error_bound < 1e-11);
    }

    #[test]
    fn odd_null_genus_one() {
        let p = TruncationPolicy::default();
        for seed in 0..5 {
            let tau = random_tau(1, seed, 0.5).unwrap();
            let v = theta_with_char(&ch("1,1"), &Point::zero(1), &tau, &p).unwrap();
            assert!(v.value.norm() < p.target_eps);
        }
    }

    #[test]
    fn block_factorization_at_zero() {
        let (t1, t2) = (Complex64::new(0.2, 1.1), Complex64::new(-0.3, 0.8));
        let tau = PeriodMatrix::diagonal(&[t1, t2]).unwrap();
        let (tau1, tau2) = (
            PeriodMatrix::diagonal(&[t1]).unwrap(),
            PeriodMatrix::diagonal(&[t2]).unwrap(),
        );
        let p = TruncationPolicy::default();
        for c1 in char2::enumerate_characteristics(1).unwrap() {
            for c2 in char2::enumerate_characteristics(1).unwrap() {
                let c = c1.concat(&c2).unwrap();
                let whole = theta_with_char(&c, &Point::zero(2), &tau, &p)
                    .unwrap()
                    .value;
                let prod = theta_with_char(&c1, &Point::zero(1), &tau1, &p)
                    .unwrap()
                    .value
                    * theta_with_char(&c2, &Point::zero(1), &tau2, &p)
                        .unwrap()
                        .value;
                assert!((whole - prod).norm() < 1e-10, "{c}: {whole} vs {prod}");
            }
        }
    }

    #[test]
    fn nulls_genus_one_at_i() {
        let tau = PeriodMatrix::diagonal(&[i()]).unwrap();
        let nulls = theta_nulls(&tau, &TruncationPolicy::default()).unwrap();
        let labels: Vec<_> = nulls.iter().map(|(c, _)| *c).collect();
        assert_eq!(labels, vec![ch("0,0"), ch("0,1"), ch("1,0")]);
        assert!(nulls.iter().all(|(_, v)| v.norm() > 0.5));
        assert!((nulls[1].1 - nulls[2].1).norm() < 1e-12);
        for (c, v) in &nulls {
            assert!((v - oracle(c, &Point::zero(1), &tau)).norm() < 1e-12);
        }
    }

    #[test]
    fn nulls_diag_ii_single_vanishing() {
        let tau = PeriodMatrix::diagonal_i(2).unwrap();
        let nulls = theta_nulls(&tau, &TruncationPolicy::default()).unwrap();
        let max = nulls.iter().map(|(_, v)| v.norm()).fold(0.0, f64::max);
        let small: Vec<_> = nulls
            .iter()
            .filter(|(_, v)| v.norm() < 1e-10 * max)
            .map(|(c, _)| *c)
            .collect();
        assert_eq!(small, vec![ch("11,11")]);
    }

    #[test]
    fn two_torsion_examples() {
        let tau = PeriodMatrix::diagonal(&[i()]).unwrap();
        assert_eq!(two_torsion_point(&ch("0,0"), &tau).unwrap(), Point::zero(1));
        let z = two_torsion_point(&ch("1,0"), &tau).unwrap();
        assert!((z.0[0] - Complex64::new(0.5, 0.0)).norm() < 1e-15);
        let z = two_torsion_point(&ch("0,1"), &tau).unwrap();
        assert!((z.0[0] - Complex64::new(0.0, 0.5)).norm() < 1e-15);
        let z = translation_point(&ch("1,0"), &tau).unwrap();
        assert!((z.0[0] - Complex64::new(0.0, 0.5)).norm() < 1e-15);
        assert!(two_torsion_point(&ch("10,00"), &tau).is_err());
    }

    #[test]
    fn random_tau_contract() {
        let a = random_tau(3, 7, 1.0).unwrap();
        let b = random_tau(3, 7, 1.0).unwrap();
        assert_eq!(a, b);
        for i in 0..3 {
            for j in 0..3 {
                assert_eq!(a.entry(i, j), a.entry(j, i));
            }
        }
        for seed in 0..10 {
            assert!(random_tau(2, seed, 1.0).unwrap().lambda_min() >= 1.0 - 1e-12);
        }
        assert_ne!(
            random_tau(2, 1, 1.0).unwrap(),
            random_tau(2, 2, 1.0).unwrap()
        );
        assert!(random_tau(2, 1, 0.0).is_err());
    }

    #[test]
    fn rejects_bad_period_matrices() {
        let c = |re, im| Complex64::new(re, im);
        assert!(PeriodMatrix::new(2, vec![c(0., 1.), c(0.1, 0.), c(0., 0.), c(0., 1.)]).is_err());
        assert!(PeriodMatrix::new(2, vec![c(0., 1.), c(0., 2.), c(0., 2.), c(0., 1.)]).is_err());
        assert!(PeriodMatrix::new(1, vec![c(0., 1e-8)]).is_err());
        assert!(PeriodMatrix::new(1, vec![c(f64::NAN, 1.)]).is_err());
        assert!(PeriodMatrix::new(2, vec![c(0., 1.)]).is_err());
    }

    #[test]
    fn radius_cap_reports_requirement() {
        let tau = PeriodMatrix::diagonal(&[Complex64::new(0.0, 0.01)]).unwrap();
        let policy = TruncationPolicy {
            target_eps: 1e-11,
            max_radius: 2,
        };
        match theta_with_char(&ch("0,0"), &Point::zero(1), &tau, &policy) {
            Err(Error::RadiusCapReached { required, cap }) => {
                assert_eq!(cap, 2);
                assert!(required > 2);
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn policy_validation() {
        assert!(TruncationPolicy::with_eps(1e-15).is_err());
        assert!(TruncationPolicy::with_eps(f64::NAN).is_err());
        assert!(TruncationPolicy {
            target_eps: 1e-10,
            max_radius: 65
        }
        .validate()
        .is_err());
        assert!(TruncationPolicy::with_eps(1e-9).is_ok());
    }

    #[test]
    fn json_roundtrip() {
        let tau = random_tau(2, 3, 1.0).unwrap();
        let js = serde_json::to_string(&tau).unwrap();
        let back: PeriodMatrix = serde_json::from_str(&js).unwrap();
        assert_eq!(back, tau);
        assert!(serde_json::from_str::<PeriodMatrix>(
            r#"{"g":2,"re":[[0,0],[0,0]],"im":[[1,0],[0,-1]]}"#
        )
        .is_err());
    }
}
