//! MSB-first bit packing and order-0 Exp-Golomb codes.

use super::CodecError;

#[derive(Debug, Default)]
pub(crate) struct BitWriter {
    bytes: Vec<u8>,
    acc: u8,
    used: u8,
}

impl BitWriter {
    pub fn new(bytes: Vec<u8>) -> Self {
        Self { bytes, acc: 0, used: 0 }
    }

    #[inline]
    pub fn put_bit(&mut self, bit: bool) {
        self.acc = (self.acc << 1) | bit as u8;
        self.used += 1;
        if self.used == 8 {
            self.bytes.push(self.acc);
            self.acc = 0;
            self.used = 0;
        }
    }

    /// Writes the low `n` bits of `value`, most significant first.
    pub fn put_bits(&mut self, value: u32, n: u32) {
        debug_assert!(n <= 32);
        for i in (0..n).rev() {
            self.put_bit((value >> i) & 1 == 1);
        }
    }

    /// Unsigned order-0 Exp-Golomb.
    pub fn put_ue(&mut self, value: u32) {
        let code = value as u64 + 1;
        let len = 64 - code.leading_zeros();
        for _ in 0..len - 1 {
            self.put_bit(false);
        }
        for i in (0..len).rev() {
            self.put_bit((code >> i) & 1 == 1);
        }
    }

    /// Signed level through the interleaving map 0, 1, -1, 2, -2, ...
    pub fn put_se(&mut self, level: i32) {
        self.put_ue(signed_to_code(level));
    }

    /// Pads the final partial byte with zero bits.
    pub fn finish(mut self) -> Vec<u8> {
        if self.used > 0 {
            self.acc <<= 8 - self.used;
            self.bytes.push(self.acc);
        }
        self.bytes
    }
}

#[inline]
pub(crate) fn signed_to_code(level: i32) -> u32 {
    if level > 0 {
        (level as u32) * 2 - 1
    } else {
        level.unsigned_abs() * 2
    }
}

#[inline]
pub(crate) fn code_to_signed(code: u32) -> i64 {
    if code % 2 == 1 {
        (code as i64 + 1) / 2
    } else {
        -(code as i64 / 2)
    }
}

pub(crate) struct BitReader<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> BitReader<'a> {
    pub fn new(bytes: &'a [u8]) -> Self {
        Self { bytes, pos: 0 }
    }

    #[inline]
    pub fn bit(&mut self) -> Result<bool, CodecError> {
        let byte = self.bytes.get(self.pos / 8).ok_or(CodecError::Truncated)?;
        let bit = (byte >> (7 - self.pos % 8)) & 1 == 1;
        self.pos += 1;
        Ok(bit)
    }

    pub fn bits(&mut self, n: u32) -> Result<u32, CodecError> {
        let mut v = 0u32;
        for _ in 0..n {
            v = (v << 1) | self.bit()? as u32;
        }
        Ok(v)
    }

    pub fn ue(&mut self) -> Result<u32, CodecError> {
        let mut zeros = 0u32;
        while !self.bit()? {
            zeros += 1;
            if zeros > 31 {
                return Err(CodecError::InvalidPayload("exp-golomb prefix longer than 31 bits"));
            }
        }
        let rest = self.bits(zeros)? as u64;
        let code = (1u64 << zeros) + rest - 1;
        u32::try_from(code).map_err(|_| CodecError::InvalidPayload("exp-golomb value overflows"))
    }

    pub fn se(&mut self) -> Result<i64, CodecError> {
        Ok(code_to_signed(self.ue()?))
    }

    /// Succeeds only if every bit after the cursor is zero padding within the
    /// current byte.
    pub fn expect_end(&self) -> Result<(), CodecError> {
        let consumed_bytes = self.pos.div_ceil(8);
        if consumed_bytes < self.bytes.len() {
            return Err(CodecError::TrailingData(self.bytes.len() - consumed_bytes));
        }
        if !self.pos.is_multiple_of(8) {
            let last = self.bytes[consumed_bytes - 1];
            let pad_mask = (1u8 << (8 - self.pos % 8)) - 1;
            if last & pad_mask != 0 {
                return Err(CodecError::InvalidPayload("nonzero padding bits"));
            }
        }
        Ok(())
    }
}
