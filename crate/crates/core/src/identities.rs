//! Riemann's quartic addition relation
//!
//! ```text
//! theta[a](z)^4 = 2^-g sum_b (-1)^(a1.b2 + a2.b1) theta[b](0)^3 theta[b](2z)
//! ```
//!
//! summed over all `2^(2g)` characteristics `b`, and its inversion for even `c`
//!
//! ```text
//! 2^g theta[c](0)^3 theta[c](2z) = -2^g theta[c](z)^4
//!                                  + 2 sum_{a even} (-1)^(a1.c2 + a2.c1) theta[a](z)^4
//! ```

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use crate::char2::{self, Characteristic};
use crate::error::{Error, Result};
use crate::mmatrix::{self, RationalMatrix, MAX_M_GENUS};
use crate::theta_eval::{self, PeriodMatrix, Point, TruncationPolicy};

/// Largest genus for [`derive_inversion_coefficients`].
pub const MAX_COEFFICIENT_GENUS: usize = 4;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum IdentityKind {
    RiemannQuartic,
    Inversion,
}

#[derive(Clone, Debug, Serialize)]
pub struct IdentityResidual {
    pub identity: IdentityKind,
    pub characteristic: Characteristic,
    pub z: Point,
    pub tau: PeriodMatrix,
    pub policy: TruncationPolicy,
    pub lhs: Complex64,
    pub rhs: Complex64,
    pub abs_residual: f64,
    /// `|lhs - rhs| / max(|lhs|, |rhs|, 1e-30)`.
    pub rel_residual: f64,
    /// `|lhs - rhs|` over the largest single term on either side. Stays
    /// meaningful when both sides cancel to rounding noise.
    pub scaled_residual: f64,
}

impl IdentityResidual {
    fn new(
        identity: IdentityKind,
        characteristic: Characteristic,
        table: &ThetaTable,
        lhs: Complex64,
        rhs: Complex64,
        term_scale: f64,
    ) -> Self {
        let abs_residual = (lhs - rhs).norm();
        IdentityResidual {
            identity,
            characteristic,
            z: table.z.clone(),
            tau: table.tau.clone(),
            policy: table.policy,
            lhs,
            rhs,
            abs_residual,
            rel_residual: relative_residual(lhs, rhs),
            scaled_residual: abs_residual / term_scale.max(lhs.norm()).max(rhs.norm()).max(1e-30),
        }
    }
}

pub fn relative_residual(lhs: Complex64, rhs: Complex64) -> f64 {
    (lhs - rhs).norm() / lhs.norm().max(rhs.norm()).max(1e-30)
}

/// Every theta value the two relations need at one `(z, tau)`: `theta[b](z)`,
/// `theta[b](0)` and `theta[b](2z)` for all `b`, indexed by canonical index.
#[derive(Clone, Debug)]
pub struct ThetaTable {
    z: Point,
    tau: PeriodMatrix,
    policy: TruncationPolicy,
    at_z: Vec<Complex64>,
    nulls: Vec<Complex64>,
    at_2z: Vec<Complex64>,
}

impl ThetaTable {
    pub fn compute(z: &Point, tau: &PeriodMatrix, policy: &TruncationPolicy) -> Result<Self> {
        let chars = char2::enumerate_characteristics(tau.genus())?;
        if z.dim() != tau.genus() {
            return Err(Error::DimensionMismatch {
                expected: tau.genus(),
                got: z.dim(),
            });
        }
        Ok(ThetaTable {
            z: z.clone(),
            tau: tau.clone(),
            policy: *policy,
            at_z: theta_eval::theta_batch(&chars, z, tau, policy)?,
            nulls: theta_eval::theta_batch(&chars, &Point::zero(tau.genus()), tau, policy)?,
            at_2z: theta_eval::theta_batch(&chars, &z.scaled(2.0), tau, policy)?,
        })
    }

    pub fn genus(&self) -> usize {
        self.tau.genus()
    }

    pub fn at_z(&self, c: &Characteristic) -> Complex64 {
        self.at_z[c.index()]
    }

    pub fn null(&self, c: &Characteristic) -> Complex64 {
        self.nulls[c.index()]
    }

    pub fn at_2z(&self, c: &Characteristic) -> Complex64 {
        self.at_2z[c.index()]
    }

    fn check(&self, c: &Characteristic) -> Result<()> {
        if c.genus() != self.genus() {
            return Err(Error::GenusMismatch {
                left: c.genus(),
                right: self.genus(),
            });
        }
        Ok(())
    }

    /// Quartic relation for `c`; `zeroed` replaces one theta-null by 0 on the
    /// right-hand side.
    fn quartic_impl(
        &self,
        c: &Characteristic,
        zeroed: Option<&Characteristic>,
    ) -> Result<IdentityResidual> {
        self.check(c)?;
        let g = self.genus();
        let norm = (1u64 << g) as f64;
        let mut rhs = Complex64::new(0.0, 0.0);
        let mut scale: f64 = 0.0;
        for b in char2::enumerate_characteristics(g)? {
            if zeroed == Some(&b) {
                continue;
            }
            let sign = char2::weil_pairing(c, &b)?.as_f64();
            let term = self.null(&b).powi(3) * self.at_2z(&b) / norm;
            scale = scale.max(term.norm());
            rhs += sign * term;
        }
        let lhs = self.at_z(c).powi(4);
        Ok(IdentityResidual::new(
            IdentityKind::RiemannQuartic,
            *c,
            self,
            lhs,
            rhs,
            scale,
        ))
    }

    pub fn quartic(&self, c: &Characteristic) -> Result<IdentityResidual> {
        self.quartic_impl(c, None)
    }

    /// The quartic relation with the theta-null of `zeroed` forced to 0.
    /// Should fail on generic input.
    pub fn quartic_with_zeroed_null(
        &self,
        c: &Characteristic,
        zeroed: &Characteristic,
    ) -> Result<IdentityResidual> {
        self.check(zeroed)?;
        self.quartic_impl(c, Some(zeroed))
    }

    pub fn inversion(&self, c: &Characteristic) -> Result<IdentityResidual> {
        self.check(c)?;
        if !c.is_even() {
            return Err(Error::OddCharacteristic(c.to_string()));
        }
        let g = self.genus();
        let two_g = (1u64 << g) as f64;
        let lhs = two_g * self.null(c).powi(3) * self.at_2z(c);
        let mut sum = Complex64::new(0.0, 0.0);
        let mut scale = two_g * self.at_z(c).powi(4).norm();
        for a in char2::even_characteristics(g)? {
            let fourth = self.at_z(&a).powi(4);
            scale = scale.max(2.0 * fourth.norm());
            sum += char2::weil_pairing(&a, c)?.as_f64() * fourth;
        }
        let rhs = -two_g * self.at_z(c).powi(4) + 2.0 * sum;
        Ok(IdentityResidual::new(
            IdentityKind::Inversion,
            *c,
            self,
            lhs,
            rhs,
            scale,
        ))
    }
}

pub fn riemann_quartic_check(
    c: &Characteristic,
    z: &Point,
    tau: &PeriodMatrix,
    policy: &TruncationPolicy,
) -> Result<IdentityResidual> {
    ThetaTable::compute(z, tau, policy)?.quartic(c)
}

pub fn inversion_check(
    c: &Characteristic,
    z: &Point,
    tau: &PeriodMatrix,
    policy: &TruncationPolicy,
) -> Result<IdentityResidual> {
    if !c.is_even() {
        return Err(Error::OddCharacteristic(c.to_string()));
    }
    ThetaTable::compute(z, tau, policy)?.inversion(c)
}

/// Exact coefficients expressing `theta[c](0)^3 theta[c](2z)` through the
/// fourth powers `theta[a](z)^4`, rows and columns over the even pairs.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct InversionTable {
    pub index: Vec<Characteristic>,
    /// `(2 M - 2^g I) / 2^g`.
    pub coefficients: RationalMatrix,
}

impl InversionTable {
    /// Applies the table to fourth powers listed in `index` order.
    pub fn apply_complex(&self, fourth_powers: &[Complex64]) -> Result<Vec<Complex64>> {
        let n = self.index.len();
        if fourth_powers.len() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                got: fourth_powers.len(),
            });
        }
        let coeffs = self.coefficients.to_f64();
        Ok((0..n)
            .map(|i| (0..n).map(|j| coeffs[i * n + j] * fourth_powers[j]).sum())
            .collect())
    }
}

pub fn derive_inversion_coefficients(g: usize) -> Result<InversionTable> {
    char2::check_genus(g, MAX_COEFFICIENT_GENUS.min(MAX_M_GENUS))?;
    let m = mmatrix::build_m(g)?;
    let two_g = 1i128 << g;
    let coefficients = mmatrix::shifted_scaled(&m, 2, two_g, two_g)?;
    Ok(InversionTable {
        index: m.index().to_vec(),
        coefficients,
    })
}

/// `n` seeded points in the fundamental cell of `tau`.
pub fn sample_points(tau: &PeriodMatrix, n: usize, seed: u64) -> Vec<Point> {
    let mut rng = theta_eval::seeded_rng(seed);
    (0..n)
        .map(|_| theta_eval::sample_cell_point(tau, &mut rng))
        .collect()
}

/// Quartic relation for every characteristic at every sample point.
pub fn verify_quartic(
    tau: &PeriodMatrix,
    samples: usize,
    seed: u64,
    policy: &TruncationPolicy,
) -> Result<Vec<IdentityResidual>> {
    let chars = char2::enumerate_characteristics(tau.genus())?;
    run_over_samples(tau, samples, seed, policy, |table| {
        chars.iter().map(|c| table.quartic(c)).collect()
    })
}

/// Inversion formula for every even characteristic at every sample point.
pub fn verify_inversion(
    tau: &PeriodMatrix,
    samples: usize,
    seed: u64,
    policy: &TruncationPolicy,
) -> Result<Vec<IdentityResidual>> {
    let chars = char2::even_characteristics(tau.genus())?;
    run_over_samples(tau, samples, seed, policy, |table| {
        chars.iter().map(|c| table.inversion(c)).collect()
    })
}

fn run_over_samples<F>(
    tau: &PeriodMatrix,
    samples: usize,
    seed: u64,
    policy: &TruncationPolicy,
    per_table: F,
) -> Result<Vec<IdentityResidual>>
where
    F: Fn(&ThetaTable) -> Result<Vec<IdentityResidual>> + Sync,
{
    let points = sample_points(tau, samples, seed);
    let nested: Vec<Vec<IdentityResidual>> = points
        .par_iter()
        .map(|z| per_table(&ThetaTable::compute(z, tau, policy)?))
        .collect::<Result<_>>()?;
    Ok(nested.into_iter().flatten().collect())
}
