//! The sign matrix `M` of Weil pairings between even pairs, its closed-form
//! inverse, and exact verification of the identities they satisfy.
//!
//! Everything here is exact. `M` has entries `+-1`; the inverse and the
//! inversion coefficients are dyadic rationals, stored as an integer
//! numerator matrix over one common denominator.

use num_integer::Integer;
use num_rational::Ratio;
use serde::Serialize;

use crate::char2::{self, Characteristic};
use crate::error::{Error, Result};

/// Largest genus for which `M` is built (dimension 528).
pub const MAX_M_GENUS: usize = 5;

pub type Rational = Ratio<i128>;

/// The `d+ x d+` matrix `(-1)^(a1 . b2 + a2 . b1)` over an ordered set of
/// 2-torsion points.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SignMatrix {
    g: usize,
    index: Vec<Characteristic>,
    entries: Vec<i8>,
}

/// `M` indexed by the even pairs in canonical order.
pub fn build_m(g: usize) -> Result<SignMatrix> {
    char2::check_genus(g, MAX_M_GENUS)?;
    SignMatrix::pairing_table(&Characteristic::zero(g)?)
}

impl SignMatrix {
    /// Weil pairing table on `even_points(kappa0)`. For `kappa0 = 0` this is `M`;
    /// for other even `kappa0` it is `M` up to a symplectic relabelling.
    pub fn pairing_table(kappa0: &Characteristic) -> Result<Self> {
        let g = kappa0.genus();
        char2::check_genus(g, MAX_M_GENUS)?;
        let index = char2::even_points(kappa0)?;
        let n = index.len();
        let mut entries = Vec::with_capacity(n * n);
        for a in &index {
            for b in &index {
                entries.push(char2::weil_pairing(a, b)?.value() as i8);
            }
        }
        Ok(SignMatrix { g, index, entries })
    }

    pub fn genus(&self) -> usize {
        self.g
    }

    pub fn dim(&self) -> usize {
        self.index.len()
    }

    /// Row/column labels.
    pub fn index(&self) -> &[Characteristic] {
        &self.index
    }

    pub fn entry(&self, i: usize, j: usize) -> i64 {
        self.entries[i * self.dim() + j] as i64
    }

    pub fn rows(&self) -> Vec<Vec<i64>> {
        let n = self.dim();
        (0..n)
            .map(|i| (0..n).map(|j| self.entry(i, j)).collect())
            .collect()
    }

    pub fn is_symmetric(&self) -> bool {
        let n = self.dim();
        (0..n).all(|i| (0..i).all(|j| self.entry(i, j) == self.entry(j, i)))
    }

    pub fn trace(&self) -> i64 {
        (0..self.dim()).map(|i| self.entry(i, i)).sum()
    }

    /// Exact `M^2`, row-major.
    pub fn square(&self) -> Vec<i64> {
        let n = self.dim();
        let mut out = vec![0i64; n * n];
        for i in 0..n {
            for k in 0..n {
                let mik = self.entry(i, k);
                let row = &self.entries[k * n..(k + 1) * n];
                for (o, &mkj) in out[i * n..(i + 1) * n].iter_mut().zip(row) {
                    *o += mik * mkj as i64;
                }
            }
        }
        out
    }

    /// `M^2 = 2^(g-1) M + 2^(2g-1) I`.
    pub fn satisfies_quadratic_identity(&self) -> bool {
        let n = self.dim();
        let lin = 1i64 << (self.g - 1);
        let id = 1i64 << (2 * self.g - 1);
        let sq = self.square();
        (0..n).all(|i| {
            (0..n).all(|j| {
                let want = lin * self.entry(i, j) + if i == j { id } else { 0 };
                sq[i * n + j] == want
            })
        })
    }

    pub fn to_rational(&self) -> RationalMatrix {
        RationalMatrix::new(
            self.dim(),
            self.entries.iter().map(|&e| e as i128).collect(),
            1,
        )
        .expect("unit denominator")
    }
}

/// Exact sum over even pairs `b` of `(-1)^(a1 . b2 + a2 . b1)`.
pub fn row_sum(g: usize, a: &Characteristic) -> Result<i64> {
    char2::check_genus(g, MAX_M_GENUS)?;
    if a.genus() != g {
        return Err(Error::GenusMismatch {
            left: g,
            right: a.genus(),
        });
    }
    let mut sum = 0;
    for b in char2::even_characteristics(g)? {
        sum += char2::weil_pairing(a, &b)?.value() as i64;
    }
    Ok(sum)
}

/// Closed form of [`row_sum`]: `d+` at `a = 0`, else `(-1)^(a1 . a2) 2^(g-1)`.
pub fn row_sum_closed_form(a: &Characteristic) -> i64 {
    let g = a.genus();
    if a.is_zero() {
        char2::even_count(g) as i64
    } else {
        char2::parity(a).value() as i64 * (1i64 << (g - 1))
    }
}

/// Square rational matrix `numer / denom` with a shared denominator kept in
/// lowest terms.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RationalMatrix {
    dim: usize,
    numer: Vec<i128>,
    denom: i128,
}

impl RationalMatrix {
    pub fn new(dim: usize, numer: Vec<i128>, denom: i128) -> Result<Self> {
        if numer.len() != dim * dim {
            return Err(Error::DimensionMismatch {
                expected: dim * dim,
                got: numer.len(),
            });
        }
        if denom == 0 {
            return Err(Error::Input("zero denominator".into()));
        }
        let mut m = RationalMatrix { dim, numer, denom };
        m.reduce();
        Ok(m)
    }

    pub fn identity(dim: usize) -> Self {
        let mut numer = vec![0; dim * dim];
        for i in 0..dim {
            numer[i * dim + i] = 1;
        }
        RationalMatrix {
            dim,
            numer,
            denom: 1,
        }
    }

    fn reduce(&mut self) {
        if self.denom < 0 {
            self.denom = -self.denom;
            self.numer.iter_mut().for_each(|x| *x = -*x);
        }
        let g = self.numer.iter().fold(self.denom, |acc, &x| acc.gcd(&x));
        if g > 1 {
            self.denom /= g;
            self.numer.iter_mut().for_each(|x| *x /= g);
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Common denominator in lowest terms.
    pub fn denominator(&self) -> i128 {
        self.denom
    }

    pub fn entry(&self, i: usize, j: usize) -> Rational {
        Rational::new(self.numer[i * self.dim + j], self.denom)
    }

    pub fn rows(&self) -> Vec<Vec<Rational>> {
        (0..self.dim)
            .map(|i| (0..self.dim).map(|j| self.entry(i, j)).collect())
            .collect()
    }

    /// Entries as `f64`, row-major.
    pub fn to_f64(&self) -> Vec<f64> {
        let d = self.denom as f64;
        self.numer.iter().map(|&x| x as f64 / d).collect()
    }

    /// Exact product, failing on `i128` overflow.
    pub fn mul(&self, rhs: &RationalMatrix) -> Result<RationalMatrix> {
        if self.dim != rhs.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                got: rhs.dim,
            });
        }
        let n = self.dim;
        let mut out = vec![0i128; n * n];
        for i in 0..n {
            for k in 0..n {
                let a = self.numer[i * n + k];
                if a == 0 {
                    continue;
                }
                for j in 0..n {
                    let prod = a
                        .checked_mul(rhs.numer[k * n + j])
                        .ok_or(Error::Overflow("matrix product"))?;
                    out[i * n + j] = out[i * n + j]
                        .checked_add(prod)
                        .ok_or(Error::Overflow("matrix product"))?;
                }
            }
        }
        let denom = self
            .denom
            .checked_mul(rhs.denom)
            .ok_or(Error::Overflow("matrix product"))?;
        RationalMatrix::new(n, out, denom)
    }

    pub fn is_identity(&self) -> bool {
        *self == RationalMatrix::identity(self.dim)
    }
}

/// `M^{-1} = (M - 2^(g-1) I) / 2^(2g-1)`.
pub fn inverse_m(g: usize) -> Result<RationalMatrix> {
    let m = build_m(g)?;
    shifted_scaled(&m, 1, 1i128 << (g - 1), 1i128 << (2 * g - 1))
}

/// `(scale * M - shift * I) / denom`.
pub(crate) fn shifted_scaled(
    m: &SignMatrix,
    scale: i128,
    shift: i128,
    denom: i128,
) -> Result<RationalMatrix> {
    let n = m.dim();
    let mut numer = Vec::with_capacity(n * n);
    for i in 0..n {
        for j in 0..n {
            let diag = if i == j { shift } else { 0 };
            numer.push(scale * m.entry(i, j) as i128 - diag);
        }
    }
    RationalMatrix::new(n, numer, denom)
}

/// Exact matrix-vector product.
pub trait LinearMap {
    fn dim(&self) -> usize;

    fn apply(&self, v: &[Rational]) -> Result<Vec<Rational>>;
}

fn check_len(dim: usize, v: &[Rational]) -> Result<()> {
    if v.len() != dim {
        return Err(Error::DimensionMismatch {
            expected: dim,
            got: v.len(),
        });
    }
    Ok(())
}

impl LinearMap for SignMatrix {
    fn dim(&self) -> usize {
        SignMatrix::dim(self)
    }

    fn apply(&self, v: &[Rational]) -> Result<Vec<Rational>> {
        let n = SignMatrix::dim(self);
        check_len(n, v)?;
        Ok((0..n)
            .map(|i| {
                v.iter()
                    .enumerate()
                    .fold(Rational::from_integer(0), |acc, (j, x)| {
                        if self.entry(i, j) > 0 {
                            acc + x
                        } else {
                            acc - x
                        }
                    })
            })
            .collect())
    }
}

impl LinearMap for RationalMatrix {
    fn dim(&self) -> usize {
        self.dim
    }

    fn apply(&self, v: &[Rational]) -> Result<Vec<Rational>> {
        check_len(self.dim, v)?;
        Ok((0..self.dim)
            .map(|i| {
                v.iter()
                    .enumerate()
                    .fold(Rational::from_integer(0), |acc, (j, x)| {
                        acc + self.entry(i, j) * x
                    })
            })
            .collect())
    }
}

/// Outcome of the exact checks on `M` for one genus.
#[derive(Clone, Debug, Serialize, PartialEq, Eq)]
pub struct MVerification {
    pub g: usize,
    pub dim: usize,
    pub symmetric: bool,
    pub trace_is_dim: bool,
    pub quadratic_identity: bool,
    pub inverse_identity: bool,
    pub row_sums: bool,
}

impl MVerification {
    pub fn all_hold(&self) -> bool {
        self.symmetric
            && self.trace_is_dim
            && self.quadratic_identity
            && self.inverse_identity
            && self.row_sums
    }
}

/// Runs every exact identity for `M` at genus `g`.
pub fn verify(g: usize) -> Result<MVerification> {
    let m = build_m(g)?;
    let inv = inverse_m(g)?;
    let inverse_identity = m.to_rational().mul(&inv)?.is_identity();
    let mut row_sums = true;
    for a in char2::enumerate_characteristics(g)? {
        row_sums &= row_sum(g, &a)? == row_sum_closed_form(&a);
    }
    Ok(MVerification {
        g,
        dim: m.dim(),
        symmetric: m.is_symmetric(),
        trace_is_dim: m.trace() == m.dim() as i64,
        quadratic_identity: m.satisfies_quadratic_identity(),
        inverse_identity,
        row_sums,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ch(s: &str) -> Characteristic {
        s.parse().unwrap()
    }

    #[test]
    fn genus_one_matrix() {
        let m = build_m(1).unwrap();
        assert_eq!(m.index(), &[ch("0,0"), ch("0,1"), ch("1,0")]);
        assert_eq!(
            m.rows(),
            vec![vec![1, 1, 1], vec![1, 1, -1], vec![1, -1, 1]]
        );
    }

    #[test]
    fn first_row_column_and_diagonal() {
        for g in 1..=4 {
            let m = build_m(g).unwrap();
            let n = m.dim();
            assert_eq!(n, char2::even_count(g));
            for i in 0..n {
                assert_eq!(m.entry(0, i), 1);
                assert_eq!(m.entry(i, 0), 1);
                assert_eq!(m.entry(i, i), 1);
            }
        }
    }

    #[test]
    fn row_sum_examples() {
        assert_eq!(row_sum(2, &ch("00,00")).unwrap(), 10);
        assert_eq!(row_sum(1, &ch("1,0")).unwrap(), 1);
        for a in char2::enumerate_characteristics(2).unwrap() {
            if !a.is_even() {
                assert_eq!(row_sum(2, &a).unwrap(), -2);
            }
        }
        assert!(row_sum(6, &Characteristic::zero(6).unwrap()).is_err());
        assert!(row_sum(2, &ch("1,0")).is_err());
    }

    #[test]
    fn genus_one_inverse() {
        let inv = inverse_m(1).unwrap();
        let half = Rational::new(1, 2);
        let m = build_m(1).unwrap();
        for i in 0..3 {
            for j in 0..3 {
                let want = half * Rational::from_integer((m.entry(i, j) - (i == j) as i64) as i128);
                assert_eq!(inv.entry(i, j), want);
            }
        }
        assert!(m.to_rational().mul(&inv).unwrap().is_identity());
    }

    #[test]
    fn genus_two_denominators_divide_eight() {
        let inv = inverse_m(2).unwrap();
        assert_eq!(8 % inv.denominator(), 0);
        for row in inv.rows() {
            for x in row {
                assert_eq!(8 % x.denom(), 0);
            }
        }
    }

    #[test]
    fn apply_examples() {
        let m = build_m(2).unwrap();
        let ones = vec![Rational::from_integer(1); 10];
        let got = m.apply(&ones).unwrap();
        for (a, s) in m.index().iter().zip(&got) {
            assert_eq!(*s, Rational::from_integer(row_sum(2, a).unwrap() as i128));
        }
        let mut e0 = vec![Rational::from_integer(0); 10];
        e0[0] = Rational::from_integer(1);
        assert_eq!(m.apply(&e0).unwrap(), ones);
        assert!(matches!(
            m.apply(&ones[..9]),
            Err(Error::DimensionMismatch {
                expected: 10,
                got: 9
            })
        ));
    }

    #[test]
    fn out_of_range() {
        assert!(build_m(0).is_err());
        assert!(build_m(6).is_err());
        assert!(inverse_m(6).is_err());
    }

    #[test]
    fn verify_small_genera() {
        for g in 1..=3 {
            assert!(verify(g).unwrap().all_hold());
        }
    }

    #[test]
    fn pairing_table_for_nonzero_kappa0() {
        for kappa0 in char2::even_characteristics(2).unwrap() {
            let t = SignMatrix::pairing_table(&kappa0).unwrap();
            assert_eq!(t.dim(), 10);
            assert!(t.is_symmetric());
            assert!(t.satisfies_quadratic_identity());
        }
    }

    #[test]
    fn rational_matrix_reduces() {
        let m = RationalMatrix::new(1, vec![-4], -8).unwrap();
        assert_eq!(m.denominator(), 2);
        assert_eq!(m.entry(0, 0), Rational::new(1, 2));
        assert!(RationalMatrix::new(2, vec![1, 2, 3], 1).is_err());
    }
}
