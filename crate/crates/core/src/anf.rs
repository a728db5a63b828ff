//! Boolean functions over `n` bits: bitstrings, truth tables and the
//! algebraic normal form (XOR of AND-monomials).
//!
//! Bit `i` of the underlying integer is the variable `x_i`, which is also
//! qubit `q_i` in the simulator. The textual form of a [`BitString`] lists
//! `x_0` first, so `"1010"` has `x_0 = x_2 = 1`.

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use crate::error::{QpacError, Result};

/// Largest supported arity.
pub const MAX_ARITY: usize = 24;

fn check_arity(n: usize) -> Result<()> {
    if n > MAX_ARITY {
        return Err(QpacError::ArityTooLarge(n));
    }
    Ok(())
}

/// An `n`-bit assignment. Used both as an input point `x` and as a monomial
/// mask `u` (the set of variables appearing in `x^u`).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct BitString {
    bits: u64,
    width: usize,
}

impl BitString {
    pub fn new(bits: u64, width: usize) -> Result<Self> {
        check_arity(width)?;
        if bits >> width != 0 {
            return Err(QpacError::BitsOutOfRange { value: bits, width });
        }
        Ok(Self { bits, width })
    }

    pub fn zero(width: usize) -> Result<Self> {
        Self::new(0, width)
    }

    /// The weight-1 string with only bit `i` set.
    pub fn unit(i: usize, width: usize) -> Result<Self> {
        if i >= width {
            return Err(QpacError::BitsOutOfRange {
                value: 1u64 << i.min(63),
                width,
            });
        }
        Self::new(1 << i, width)
    }

    #[inline]
    pub fn bits(&self) -> u64 {
        self.bits
    }

    #[inline]
    pub fn width(&self) -> usize {
        self.width
    }

    #[inline]
    pub fn get(&self, i: usize) -> bool {
        (self.bits >> i) & 1 == 1
    }

    #[inline]
    pub fn hamming_weight(&self) -> usize {
        self.bits.count_ones() as usize
    }

    /// Bitwise XOR of two strings of equal width.
    pub fn xor(&self, other: &BitString) -> Result<BitString> {
        if self.width != other.width {
            return Err(QpacError::WidthMismatch {
                expected: self.width,
                actual: other.width,
            });
        }
        Ok(BitString {
            bits: self.bits ^ other.bits,
            width: self.width,
        })
    }

    /// Inner product over GF(2): parity of `popcount(self & other)`.
    pub fn dot(&self, other: &BitString) -> bool {
        (self.bits & other.bits).count_ones() & 1 == 1
    }
}

impl fmt::Display for BitString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for i in 0..self.width {
            f.write_str(if self.get(i) { "1" } else { "0" })?;
        }
        Ok(())
    }
}

impl FromStr for BitString {
    type Err = QpacError;

    /// Parses `x_0 x_1 … x_{n-1}` written left to right.
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let mut bits = 0u64;
        for (i, ch) in s.chars().enumerate() {
            match ch {
                '0' => {}
                '1' => bits |= 1 << i.min(63),
                _ => return Err(QpacError::Parse(format!("invalid bitstring {s:?}"))),
            }
        }
        BitString::new(bits, s.chars().count())
    }
}

/// Truth table of an `n`-ary Boolean function, indexed by the integer value
/// of the input.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TruthTable {
    n: usize,
    values: Vec<bool>,
}

impl TruthTable {
    pub fn new(n: usize, values: Vec<bool>) -> Result<Self> {
        check_arity(n)?;
        if values.len() != 1 << n {
            return Err(QpacError::WidthMismatch {
                expected: 1 << n,
                actual: values.len(),
            });
        }
        Ok(Self { n, values })
    }

    pub fn from_fn(n: usize, f: impl Fn(u64) -> bool) -> Result<Self> {
        check_arity(n)?;
        Ok(Self {
            n,
            values: (0..1u64 << n).map(f).collect(),
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn get(&self, x: u64) -> bool {
        self.values[x as usize]
    }

    pub fn values(&self) -> &[bool] {
        &self.values
    }
}

/// Algebraic normal form: `f(x) = ⊕_u α_u x^u` with the set of masks `u`
/// for which `α_u = 1`. The empty set is the constant-0 function and the
/// zero mask is the constant-1 monomial.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Anf {
    n: usize,
    monomials: BTreeSet<u64>,
}

impl Anf {
    pub fn zero(n: usize) -> Result<Self> {
        check_arity(n)?;
        Ok(Self {
            n,
            monomials: BTreeSet::new(),
        })
    }

    /// Builds an ANF from raw masks. Duplicates collapse (set semantics).
    pub fn from_masks(n: usize, masks: impl IntoIterator<Item = u64>) -> Result<Self> {
        check_arity(n)?;
        let mut monomials = BTreeSet::new();
        for m in masks {
            if m >> n != 0 {
                return Err(QpacError::BitsOutOfRange { value: m, width: n });
            }
            monomials.insert(m);
        }
        Ok(Self { n, monomials })
    }

    pub fn from_bitstrings<'a>(n: usize, masks: impl IntoIterator<Item = &'a BitString>) -> Result<Self> {
        let mut raw = Vec::new();
        for m in masks {
            if m.width() != n {
                return Err(QpacError::WidthMismatch {
                    expected: n,
                    actual: m.width(),
                });
            }
            raw.push(m.bits());
        }
        Self::from_masks(n, raw)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Monomial masks in ascending order.
    pub fn monomials(&self) -> impl Iterator<Item = u64> + '_ {
        self.monomials.iter().copied()
    }

    pub fn len(&self) -> usize {
        self.monomials.len()
    }

    pub fn is_empty(&self) -> bool {
        self.monomials.is_empty()
    }

    pub fn contains(&self, mask: u64) -> bool {
        self.monomials.contains(&mask)
    }

    pub fn evaluate(&self, x: &BitString) -> Result<bool> {
        if x.width() != self.n {
            return Err(QpacError::WidthMismatch {
                expected: self.n,
                actual: x.width(),
            });
        }
        Ok(self.evaluate_bits(x.bits()))
    }

    /// Unchecked evaluation on a raw input; bits above `n` are ignored.
    #[inline]
    pub fn evaluate_bits(&self, x: u64) -> bool {
        self.monomials.iter().fold(false, |acc, &u| acc ^ (x & u == u))
    }

    /// Symmetric difference of the monomial sets, i.e. `f ⊕ g`.
    pub fn xor(&self, other: &Anf) -> Result<Anf> {
        if self.n != other.n {
            return Err(QpacError::WidthMismatch {
                expected: self.n,
                actual: other.n,
            });
        }
        let monomials = self.monomials.symmetric_difference(&other.monomials).copied().collect();
        Ok(Anf { n: self.n, monomials })
    }

    pub fn to_truth_table(&self) -> TruthTable {
        let mut values = vec![false; 1 << self.n];
        for &u in &self.monomials {
            values[u as usize] = true;
        }
        moebius_in_place(&mut values, self.n);
        TruthTable { n: self.n, values }
    }

    pub fn from_truth_table(table: &TruthTable) -> Anf {
        let mut coeffs = table.values.clone();
        moebius_in_place(&mut coeffs, table.n);
        let monomials = coeffs
            .iter()
            .enumerate()
            .filter_map(|(u, &a)| a.then_some(u as u64))
            .collect();
        Anf { n: table.n, monomials }
    }

    /// `"n=4; 0x1,0x4"`. The constant-0 function renders as `"n=4; "`.
    pub fn render(&self) -> String {
        let masks: Vec<String> = self.monomials.iter().map(|m| format!("{m:#x}")).collect();
        format!("n={}; {}", self.n, masks.join(","))
    }

    pub fn parse_rendered(s: &str) -> Result<Anf> {
        let bad = || QpacError::Parse(format!("invalid ANF text {s:?}"));
        let (head, tail) = s.split_once(';').ok_or_else(bad)?;
        let n: usize = head
            .trim()
            .strip_prefix("n=")
            .ok_or_else(bad)?
            .parse()
            .map_err(|_| bad())?;
        let mut masks = Vec::new();
        for tok in tail.split(',').map(str::trim).filter(|t| !t.is_empty()) {
            let hex = tok.strip_prefix("0x").ok_or_else(bad)?;
            masks.push(u64::from_str_radix(hex, 16).map_err(|_| bad())?);
        }
        Anf::from_masks(n, masks)
    }
}

impl fmt::Display for Anf {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.render())
    }
}

/// Binary Möbius transform over GF(2). It is an involution, so the same
/// routine maps truth tables to ANF coefficients and back.
fn moebius_in_place(values: &mut [bool], n: usize) {
    for i in 0..n {
        let bit = 1usize << i;
        for x in 0..values.len() {
            if x & bit != 0 {
                values[x] ^= values[x ^ bit];
            }
        }
    }
}

/// The parity concept `p_s(x) = s·x`, one linear monomial per set bit of `s`.
pub fn parity_anf(s: &BitString) -> Anf {
    let monomials = (0..s.width()).filter(|&i| s.get(i)).map(|i| 1u64 << i).collect();
    Anf {
        n: s.width(),
        monomials,
    }
}

/// All `2^n` parity concepts in ascending mask order.
pub fn all_parities(n: usize) -> Result<Vec<BitString>> {
    check_arity(n)?;
    (0..1u64 << n).map(|s| BitString::new(s, n)).collect()
}
