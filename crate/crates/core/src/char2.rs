//! Theta characteristics over GF(2).
//!
//! A characteristic is a pair `(a1, a2)` of `g`-bit vectors. The same type
//! labels points of the 2-torsion group, since both are `(Z/2)^g x (Z/2)^g`
//! once a level structure is fixed. Bit vectors are packed into integers
//! most-significant-bit first: coordinate `k` of `a1` lives in bit `g - 1 - k`.

use std::fmt;
use std::ops::Mul;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

/// Largest genus supported by the exact combinatorics (`2^12` characteristics).
pub const MAX_GENUS: usize = 6;

/// Number of even characteristics, `2^(g-1) (2^g + 1)`.
pub fn even_count(g: usize) -> usize {
    (1 << (g - 1)) * ((1 << g) + 1)
}

/// Number of odd characteristics, `2^(g-1) (2^g - 1)`.
pub fn odd_count(g: usize) -> usize {
    (1 << (g - 1)) * ((1 << g) - 1)
}

pub(crate) fn check_genus(g: usize, max: usize) -> Result<()> {
    if g == 0 || g > max {
        return Err(Error::GenusOutOfRange { g, max });
    }
    Ok(())
}

/// A value in `{+1, -1}`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Sign {
    Plus,
    Minus,
}

impl Sign {
    /// `(-1)^e`.
    pub fn from_exponent(e: u32) -> Self {
        if e & 1 == 0 {
            Sign::Plus
        } else {
            Sign::Minus
        }
    }

    pub fn value(self) -> i32 {
        match self {
            Sign::Plus => 1,
            Sign::Minus => -1,
        }
    }

    pub fn as_f64(self) -> f64 {
        self.value() as f64
    }

    pub fn is_plus(self) -> bool {
        self == Sign::Plus
    }
}

impl Mul for Sign {
    type Output = Sign;

    fn mul(self, rhs: Sign) -> Sign {
        if self == rhs {
            Sign::Plus
        } else {
            Sign::Minus
        }
    }
}

impl fmt::Display for Sign {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Sign::Plus => "+1",
            Sign::Minus => "-1",
        })
    }
}

/// Dot product of two packed bit vectors over GF(2).
#[inline]
fn dot(x: u8, y: u8) -> u32 {
    (x & y).count_ones() & 1
}

/// A pair of `g`-bit vectors over GF(2).
///
/// Ordering is the canonical one: by genus, then by the index
/// `(a1 << g) | a2`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Characteristic {
    g: u8,
    a1: u8,
    a2: u8,
}

impl Characteristic {
    /// Builds a characteristic from two bit slices given in coordinate order.
    pub fn new(a1: &[u8], a2: &[u8]) -> Result<Self> {
        if a1.len() != a2.len() {
            return Err(Error::MalformedCharacteristic(format!(
                "a1 has {} coordinates, a2 has {}",
                a1.len(),
                a2.len()
            )));
        }
        let g = a1.len();
        check_genus(g, MAX_GENUS)?;
        let pack = |bits: &[u8]| -> Result<u8> {
            bits.iter().try_fold(0u8, |acc, &b| match b {
                0 | 1 => Ok((acc << 1) | b),
                other => Err(Error::MalformedCharacteristic(format!(
                    "coordinate {other} is not a bit"
                ))),
            })
        };
        Ok(Characteristic {
            g: g as u8,
            a1: pack(a1)?,
            a2: pack(a2)?,
        })
    }

    /// Builds a characteristic from two integers read most-significant-bit first.
    pub fn from_ints(g: usize, a1: u32, a2: u32) -> Result<Self> {
        check_genus(g, MAX_GENUS)?;
        if a1 >> g != 0 || a2 >> g != 0 {
            return Err(Error::MalformedCharacteristic(format!(
                "({a1}, {a2}) does not fit in {g} bits"
            )));
        }
        Ok(Characteristic {
            g: g as u8,
            a1: a1 as u8,
            a2: a2 as u8,
        })
    }

    /// Inverse of [`Characteristic::index`].
    pub fn from_index(g: usize, index: usize) -> Result<Self> {
        check_genus(g, MAX_GENUS)?;
        if index >> (2 * g) != 0 {
            return Err(Error::MalformedCharacteristic(format!(
                "index {index} out of range for genus {g}"
            )));
        }
        let mask = (1usize << g) - 1;
        Ok(Characteristic {
            g: g as u8,
            a1: (index >> g) as u8,
            a2: (index & mask) as u8,
        })
    }

    pub fn zero(g: usize) -> Result<Self> {
        Self::from_ints(g, 0, 0)
    }

    pub fn genus(&self) -> usize {
        self.g as usize
    }

    /// Canonical index: high `g` bits are `a1`, low `g` bits are `a2`.
    pub fn index(&self) -> usize {
        ((self.a1 as usize) << self.g) | self.a2 as usize
    }

    pub fn a1_int(&self) -> u32 {
        self.a1 as u32
    }

    pub fn a2_int(&self) -> u32 {
        self.a2 as u32
    }

    pub fn a1_bits(&self) -> Vec<u8> {
        self.bits(self.a1)
    }

    pub fn a2_bits(&self) -> Vec<u8> {
        self.bits(self.a2)
    }

    fn bits(&self, packed: u8) -> Vec<u8> {
        (0..self.g)
            .map(|k| (packed >> (self.g - 1 - k)) & 1)
            .collect()
    }

    pub fn is_zero(&self) -> bool {
        self.a1 == 0 && self.a2 == 0
    }

    pub fn is_even(&self) -> bool {
        parity(self).is_plus()
    }

    /// The pair `(a2, a1)`.
    pub fn swapped(&self) -> Self {
        Characteristic {
            g: self.g,
            a1: self.a2,
            a2: self.a1,
        }
    }

    /// Direct sum with another characteristic: coordinates of `self` first.
    pub fn concat(&self, other: &Characteristic) -> Result<Self> {
        let g = self.genus() + other.genus();
        check_genus(g, MAX_GENUS)?;
        Ok(Characteristic {
            g: g as u8,
            a1: (self.a1 << other.g) | other.a1,
            a2: (self.a2 << other.g) | other.a2,
        })
    }

    fn same_genus(&self, other: &Characteristic) -> Result<()> {
        if self.g != other.g {
            return Err(Error::GenusMismatch {
                left: self.genus(),
                right: other.genus(),
            });
        }
        Ok(())
    }
}

impl fmt::Display for Characteristic {
    /// `a1,a2` as bit strings, e.g. `10,01`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for b in self.a1_bits() {
            write!(f, "{b}")?;
        }
        f.write_str(",")?;
        for b in self.a2_bits() {
            write!(f, "{b}")?;
        }
        Ok(())
    }
}

impl FromStr for Characteristic {
    type Err = Error;

    /// Parses `a1,a2` where each half is a bit string like `101`.
    fn from_str(s: &str) -> Result<Self> {
        let (left, right) = s.split_once(',').ok_or_else(|| {
            Error::MalformedCharacteristic(format!("expected \"a1,a2\", got {s:?}"))
        })?;
        let parse = |part: &str| -> Result<Vec<u8>> {
            part.trim()
                .chars()
                .map(|ch| match ch {
                    '0' => Ok(0),
                    '1' => Ok(1),
                    other => Err(Error::MalformedCharacteristic(format!(
                        "unexpected character {other:?} in {s:?}"
                    ))),
                })
                .collect()
        };
        Characteristic::new(&parse(left)?, &parse(right)?)
    }
}

#[derive(Serialize)]
struct BitsRepr {
    a1: Vec<u8>,
    a2: Vec<u8>,
}

#[derive(Deserialize)]
#[serde(untagged)]
enum CharRepr {
    Bits { a1: Vec<u8>, a2: Vec<u8> },
    Ints { g: usize, a1: u32, a2: u32 },
}

impl Serialize for Characteristic {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        BitsRepr {
            a1: self.a1_bits(),
            a2: self.a2_bits(),
        }
        .serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for Characteristic {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let repr = CharRepr::deserialize(deserializer)?;
        match repr {
            CharRepr::Bits { a1, a2 } => Characteristic::new(&a1, &a2),
            CharRepr::Ints { g, a1, a2 } => Characteristic::from_ints(g, a1, a2),
        }
        .map_err(serde::de::Error::custom)
    }
}

/// All `2^(2g)` characteristics in canonical order.
pub fn enumerate_characteristics(g: usize) -> Result<Vec<Characteristic>> {
    check_genus(g, MAX_GENUS)?;
    (0..1usize << (2 * g))
        .map(|i| Characteristic::from_index(g, i))
        .collect()
}

/// Even characteristics in canonical order.
pub fn even_characteristics(g: usize) -> Result<Vec<Characteristic>> {
    Ok(enumerate_characteristics(g)?
        .into_iter()
        .filter(Characteristic::is_even)
        .collect())
}

/// `(-1)^(a1 . a2)`.
pub fn parity(c: &Characteristic) -> Sign {
    Sign::from_exponent(dot(c.a1, c.a2))
}

/// The symplectic form `(-1)^(a1 . b2 + a2 . b1)`.
pub fn weil_pairing(a: &Characteristic, b: &Characteristic) -> Result<Sign> {
    a.same_genus(b)?;
    Ok(Sign::from_exponent(dot(a.a1, b.a2) + dot(a.a2, b.a1)))
}

/// The quadratic form attached to `c`, evaluated at the 2-torsion point `a`:
/// `(-1)^(a1 . a2 + c1 . a2 + c2 . a1)`.
pub fn kappa_value(c: &Characteristic, a: &Characteristic) -> Result<Sign> {
    c.same_genus(a)?;
    Ok(Sign::from_exponent(
        dot(a.a1, a.a2) + dot(c.a1, a.a2) + dot(c.a2, a.a1),
    ))
}

/// Action of the 2-torsion point `b` on the characteristic `c`: the sum `c + b`.
pub fn translate(b: &Characteristic, c: &Characteristic) -> Result<Characteristic> {
    b.same_genus(c)?;
    Ok(Characteristic {
        g: c.g,
        a1: c.a1 ^ b.a1,
        a2: c.a2 ^ b.a2,
    })
}

/// Points where the quadratic form of the even characteristic `c` is `+1`.
pub fn even_points(c: &Characteristic) -> Result<Vec<Characteristic>> {
    if !c.is_even() {
        return Err(Error::OddCharacteristic(c.to_string()));
    }
    let all = enumerate_characteristics(c.genus())?;
    let mut out = Vec::with_capacity(even_count(c.genus()));
    for a in all {
        if kappa_value(c, &a)?.is_plus() {
            out.push(a);
        }
    }
    Ok(out)
}
