//! Three-valued logic scalars and fixed-width bit vectors.
//!
//! Every signal in the simulator and every memory cell is a [`BitVector`].
//! Bit 0 is the least-significant bit; rendering is MSB-first so that the
//! text reads the same way a bus is written (`A3:A0`).

use std::fmt;
use std::ops::Not;

use serde::{Serialize, Serializer};
use thiserror::Error;

/// A single logic level.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub enum Bit {
    Zero,
    One,
    /// Uninitialized, undriven-by-design, or corrupted by a timing violation.
    #[default]
    Unknown,
}

impl Bit {
    pub fn from_bool(b: bool) -> Self {
        if b {
            Bit::One
        } else {
            Bit::Zero
        }
    }

    pub fn is_known(self) -> bool {
        self != Bit::Unknown
    }

    pub fn to_char(self) -> char {
        match self {
            Bit::Zero => '0',
            Bit::One => '1',
            Bit::Unknown => 'x',
        }
    }

    pub fn from_char(c: char) -> Option<Self> {
        match c {
            '0' => Some(Bit::Zero),
            '1' => Some(Bit::One),
            'x' | 'X' => Some(Bit::Unknown),
            _ => None,
        }
    }
}

impl Not for Bit {
    type Output = Bit;

    fn not(self) -> Bit {
        match self {
            Bit::Zero => Bit::One,
            Bit::One => Bit::Zero,
            Bit::Unknown => Bit::Unknown,
        }
    }
}

impl fmt::Display for Bit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.to_char())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum LiteralError {
    #[error("malformed literal `{0}`")]
    Malformed(String),
    #[error("literal `{literal}` does not fit in {width} bit(s)")]
    Overflow { literal: String, width: usize },
    #[error("`x` digits are only allowed in binary literals (`{0}`)")]
    UnknownInNonBinary(String),
    #[error("bit width must be positive")]
    ZeroWidth,
}

/// Fixed-width vector of [`Bit`]s, index 0 = LSB.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct BitVector {
    bits: Box<[Bit]>,
}

impl BitVector {
    /// All-`Zero` vector. Panics on zero width.
    pub fn zeros(width: usize) -> Self {
        Self::filled(width, Bit::Zero)
    }

    /// All-`Unknown` vector. Panics on zero width.
    pub fn unknown(width: usize) -> Self {
        Self::filled(width, Bit::Unknown)
    }

    pub fn filled(width: usize, bit: Bit) -> Self {
        assert!(width > 0, "BitVector width must be positive");
        BitVector {
            bits: vec![bit; width].into_boxed_slice(),
        }
    }

    /// Builds a vector from LSB-first bits.
    pub fn from_bits(bits: Vec<Bit>) -> Result<Self, LiteralError> {
        if bits.is_empty() {
            return Err(LiteralError::ZeroWidth);
        }
        Ok(BitVector {
            bits: bits.into_boxed_slice(),
        })
    }

    /// The low `width` bits of `value`. Higher bits of `value` must be zero.
    pub fn from_u64(value: u64, width: usize) -> Result<Self, LiteralError> {
        if width == 0 {
            return Err(LiteralError::ZeroWidth);
        }
        if width < 64 && value >> width != 0 {
            return Err(LiteralError::Overflow {
                literal: value.to_string(),
                width,
            });
        }
        let bits = (0..width)
            .map(|i| Bit::from_bool(i < 64 && (value >> i) & 1 == 1))
            .collect();
        Self::from_bits(bits)
    }

    /// Parses `0b…` (digits 0/1/x), `0x…` (hex) or a decimal literal into a
    /// vector of exactly `width` bits, zero-extending short literals.
    pub fn parse(text: &str, width: usize) -> Result<Self, LiteralError> {
        if width == 0 {
            return Err(LiteralError::ZeroWidth);
        }
        let malformed = || LiteralError::Malformed(text.to_string());
        let overflow = || LiteralError::Overflow {
            literal: text.to_string(),
            width,
        };

        // LSB-first digits, each contributing `digit_bits` bits.
        let lsb_first: Vec<Bit> = if let Some(digits) = text.strip_prefix("0b") {
            if digits.is_empty() {
                return Err(malformed());
            }
            digits
                .chars()
                .rev()
                .map(|c| Bit::from_char(c).ok_or_else(malformed))
                .collect::<Result<_, _>>()?
        } else if let Some(digits) = text.strip_prefix("0x") {
            if digits.is_empty() {
                return Err(malformed());
            }
            let mut out = Vec::with_capacity(digits.len() * 4);
            for c in digits.chars().rev() {
                if c == 'x' || c == 'X' {
                    return Err(LiteralError::UnknownInNonBinary(text.to_string()));
                }
                let nibble = c.to_digit(16).ok_or_else(malformed)?;
                out.extend((0..4).map(|i| Bit::from_bool((nibble >> i) & 1 == 1)));
            }
            out
        } else {
            if text.is_empty() || !text.chars().all(|c| c.is_ascii_digit()) {
                if text.chars().any(|c| c == 'x' || c == 'X') && !text.starts_with('0') {
                    return Err(LiteralError::UnknownInNonBinary(text.to_string()));
                }
                return Err(malformed());
            }
            decimal_to_bits(text).ok_or_else(overflow)?
        };

        if lsb_first[width.min(lsb_first.len())..]
            .iter()
            .any(|&b| b != Bit::Zero)
        {
            return Err(overflow());
        }
        let mut bits = vec![Bit::Zero; width];
        for (slot, b) in bits.iter_mut().zip(lsb_first) {
            *slot = b;
        }
        Self::from_bits(bits)
    }

    pub fn width(&self) -> usize {
        self.bits.len()
    }

    pub fn bit(&self, index: usize) -> Bit {
        self.bits[index]
    }

    pub fn set_bit(&mut self, index: usize, bit: Bit) {
        self.bits[index] = bit;
    }

    /// LSB-first view of the bits.
    pub fn bits(&self) -> &[Bit] {
        &self.bits
    }

    pub fn is_fully_defined(&self) -> bool {
        self.bits.iter().all(|b| b.is_known())
    }

    /// Decodes the vector as an unsigned index; `None` if any bit is
    /// `Unknown` or the value does not fit in 64 bits.
    pub fn to_index(&self) -> Option<u64> {
        let mut acc: u64 = 0;
        for (i, b) in self.bits.iter().enumerate() {
            match b {
                Bit::Zero => {}
                Bit::One if i < 64 => acc |= 1 << i,
                Bit::One => return None,
                Bit::Unknown => return None,
            }
        }
        Some(acc)
    }

    /// Indices of bits that differ between `self` and `other`.
    /// An `Unknown` on either side counts as different.
    pub fn differing_bits(&self, other: &BitVector) -> Vec<usize> {
        assert_eq!(self.width(), other.width());
        self.bits
            .iter()
            .zip(other.bits.iter())
            .enumerate()
            .filter(|(_, (a, b))| a != b || !a.is_known())
            .map(|(i, _)| i)
            .collect()
    }

    /// MSB-first digit string, e.g. `"1x0"`.
    pub fn to_bit_string(&self) -> String {
        self.bits.iter().rev().map(|b| b.to_char()).collect()
    }

    /// Canonical binary literal accepted by [`BitVector::parse`].
    pub fn to_literal(&self) -> String {
        format!("0b{}", self.to_bit_string())
    }
}

impl Not for &BitVector {
    type Output = BitVector;

    fn not(self) -> BitVector {
        BitVector {
            bits: self.bits.iter().map(|&b| !b).collect(),
        }
    }
}

impl fmt::Display for BitVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_bit_string())
    }
}

impl Serialize for BitVector {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.serialize_str(&self.to_bit_string())
    }
}

/// Decimal string to LSB-first bits by repeated halving; `None` if empty.
fn decimal_to_bits(text: &str) -> Option<Vec<Bit>> {
    let mut digits: Vec<u8> = text.bytes().map(|b| b - b'0').collect();
    let mut out = Vec::new();
    loop {
        while digits.len() > 1 && digits[0] == 0 {
            digits.remove(0);
        }
        if digits.is_empty() {
            return None;
        }
        if digits == [0] {
            break;
        }
        let mut rem = 0u8;
        for d in digits.iter_mut() {
            let cur = rem * 10 + *d;
            *d = cur / 2;
            rem = cur % 2;
        }
        out.push(Bit::from_bool(rem == 1));
    }
    if out.is_empty() {
        out.push(Bit::Zero);
    }
    Some(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn bv(text: &str, width: usize) -> BitVector {
        BitVector::parse(text, width).unwrap()
    }

    #[test]
    fn zero_literal() {
        assert_eq!(bv("0x0", 16), BitVector::zeros(16));
    }

    #[test]
    fn binary_positional() {
        let v = bv("0b10", 2);
        assert_eq!(v.bit(1), Bit::One);
        assert_eq!(v.bit(0), Bit::Zero);
    }

    #[test]
    fn hex_expansion() {
        // A5C3 = 1010 0101 1100 0011, listed LSB first.
        let expected = [1, 1, 0, 0, 0, 0, 1, 1, 1, 0, 1, 0, 0, 1, 0, 1];
        let v = bv("0xA5C3", 16);
        for (i, &e) in expected.iter().enumerate() {
            assert_eq!(v.bit(i), Bit::from_bool(e == 1), "bit {i}");
        }
    }

    #[test]
    fn decimal_and_extension() {
        assert_eq!(bv("5", 4).to_index(), Some(5));
        assert_eq!(bv("0", 3), BitVector::zeros(3));
        assert_eq!(bv("65535", 16), BitVector::filled(16, Bit::One));
        assert_eq!(bv("0b1", 8).to_index(), Some(1));
    }

    #[test]
    fn literal_errors() {
        assert!(matches!(
            BitVector::parse("0x1F", 4),
            Err(LiteralError::Overflow { .. })
        ));
        assert!(matches!(
            BitVector::parse("16", 4),
            Err(LiteralError::Overflow { .. })
        ));
        assert!(matches!(
            BitVector::parse("0b101", 2),
            Err(LiteralError::Overflow { .. })
        ));
        assert!(matches!(
            BitVector::parse("0x1x", 8),
            Err(LiteralError::UnknownInNonBinary(_))
        ));
        for bad in ["", "0b", "0x", "0b102", "12a", "-1", "0xg"] {
            assert!(
                matches!(BitVector::parse(bad, 8), Err(LiteralError::Malformed(_))),
                "{bad:?}"
            );
        }
        assert_eq!(BitVector::parse("0", 0), Err(LiteralError::ZeroWidth));
    }

    #[test]
    fn leading_zeros_beyond_width_are_fine() {
        assert_eq!(bv("0b0011", 2).to_index(), Some(3));
        assert_eq!(bv("0x0003", 2).to_index(), Some(3));
    }

    #[test]
    fn fully_defined() {
        assert!(BitVector::zeros(4).is_fully_defined());
        let v = BitVector::from_bits(vec![Bit::Unknown, Bit::One]).unwrap();
        assert!(!v.is_fully_defined());
        assert!(!bv("0b1x", 2).is_fully_defined());
    }

    #[test]
    fn index_decoding() {
        assert_eq!(bv("0b0101", 4).to_index(), Some(5));
        assert_eq!(bv("0b0000", 4).to_index(), Some(0));
        assert_eq!(bv("0b1x00", 4).to_index(), None);
    }

    #[test]
    fn render_is_msb_first() {
        let v = BitVector::from_bits(vec![Bit::Unknown, Bit::One]).unwrap();
        assert_eq!(v.to_string(), "1x");
        assert_eq!(v.to_literal(), "0b1x");
    }

    #[test]
    fn not_keeps_unknown() {
        assert_eq!(!Bit::Unknown, Bit::Unknown);
        assert_eq!(!&bv("0b10", 2), bv("0b01", 2));
    }

    proptest! {
        #[test]
        fn literal_round_trip(bits in prop::collection::vec(0u8..3, 1..70)) {
            let v = BitVector::from_bits(bits.iter().map(|&b| match b {
                0 => Bit::Zero, 1 => Bit::One, _ => Bit::Unknown,
            }).collect()).unwrap();
            prop_assert_eq!(BitVector::parse(&v.to_literal(), v.width()).unwrap(), v);
        }

        #[test]
        fn index_is_a_bijection(width in 1usize..=16, value in any::<u64>()) {
            let value = value & ((1u64 << width) - 1);
            let v = BitVector::from_u64(value, width).unwrap();
            prop_assert_eq!(v.to_index(), Some(value));
            prop_assert_eq!(BitVector::parse(&value.to_string(), width).unwrap(), v.clone());
            prop_assert_eq!(BitVector::parse(&format!("0x{value:x}"), width).unwrap(), v);
        }

        #[test]
        fn unknown_absorbs_decoding(width in 1usize..=16, value in any::<u64>(), pos in any::<prop::sample::Index>()) {
            let value = value & ((1u64 << width) - 1);
            let mut v = BitVector::from_u64(value, width).unwrap();
            v.set_bit(pos.index(width), Bit::Unknown);
            prop_assert_eq!(v.to_index(), None);
        }
    }
}
