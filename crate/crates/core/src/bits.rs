//! Packed n-bit strings labeling computational basis states and Z-strings.

use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};
use std::fmt;

pub const MAX_QUBITS: usize = 30;

/// An n-bit label, bit `j` of `bits` is qubit `j` (LSB = qubit 0).
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct BitString {
    bits: u32,
    n: u8,
}

impl BitString {
    pub fn new(bits: u32, n: usize) -> Result<Self> {
        if n == 0 || n > MAX_QUBITS {
            return Err(Error::Input(format!("bitstring length {n} out of 1..={MAX_QUBITS}")));
        }
        if n < 32 && bits >> n != 0 {
            return Err(Error::Input(format!("bits {bits:#b} exceed length {n}")));
        }
        Ok(Self { bits, n: n as u8 })
    }

    pub fn zero(n: usize) -> Result<Self> {
        Self::new(0, n)
    }

    pub fn bits(&self) -> u32 {
        self.bits
    }

    pub fn len(&self) -> usize {
        self.n as usize
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn bit(&self, j: usize) -> bool {
        (self.bits >> j) & 1 == 1
    }

    pub fn is_zero(&self) -> bool {
        self.bits == 0
    }

    /// GF(2) inner product <self, other>.
    pub fn dot(&self, other: &BitString) -> Result<u32> {
        if self.n != other.n {
            return Err(Error::Input(format!(
                "length mismatch: {} vs {}",
                self.n, other.n
            )));
        }
        Ok((self.bits & other.bits).count_ones() & 1)
    }

    pub fn xor(&self, other: &BitString) -> Result<BitString> {
        if self.n != other.n {
            return Err(Error::Input("length mismatch in xor".into()));
        }
        BitString::new(self.bits ^ other.bits, self.len())
    }
}

impl fmt::Debug for BitString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        // qubit 0 printed first
        for j in 0..self.len() {
            write!(f, "{}", u8::from(self.bit(j)))?;
        }
        Ok(())
    }
}

impl fmt::Display for BitString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(self, f)
    }
}
