//! The built-in intra codec ("TIC1").
//!
//! Layout, all integers big-endian:
//!
//! ```text
//! 0   4  magic "TIC1"
//! 4   1  version (1)
//! 5   1  qp
//! 6   4  luma width
//! 10  4  luma height
//! 14  4  frame count
//! 18  1  plane count (1 = gray, 3 = YUV 4:2:0)
//! 19  8n per plane: width, height
//! ..     payload, MSB-first bits, zero padded to a byte
//! ```
//!
//! The payload holds, per frame and per plane, the 8x8 blocks of the
//! edge-padded plane in raster order. A block is either a single `1` bit (all
//! levels zero) or a `0` bit, the 6-bit zigzag index of the last nonzero level,
//! and the signed Exp-Golomb levels for zigzag positions `0..=last`.

use super::bits::{BitReader, BitWriter};
use super::dct::{self, N};
use super::{qstep_from_qp, validate_qp, CodecError};
use crate::imagecore::{quantize_sample, ColorFormat, Frame, Plane, VideoSequence};

pub const MAGIC: [u8; 4] = *b"TIC1";
pub const VERSION: u8 = 1;
const FIXED_HEADER_LEN: usize = 19;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BitstreamHeader {
    pub version: u8,
    pub qp: u8,
    pub width: u32,
    pub height: u32,
    pub frames: u32,
    pub planes: Vec<(u32, u32)>,
}

impl BitstreamHeader {
    pub fn encoded_len(&self) -> usize {
        FIXED_HEADER_LEN + 8 * self.planes.len()
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(self.encoded_len());
        self.write(&mut out);
        out
    }

    fn write(&self, out: &mut Vec<u8>) {
        out.extend_from_slice(&MAGIC);
        out.push(self.version);
        out.push(self.qp);
        out.extend_from_slice(&self.width.to_be_bytes());
        out.extend_from_slice(&self.height.to_be_bytes());
        out.extend_from_slice(&self.frames.to_be_bytes());
        out.push(self.planes.len() as u8);
        for &(w, h) in &self.planes {
            out.extend_from_slice(&w.to_be_bytes());
            out.extend_from_slice(&h.to_be_bytes());
        }
    }

    pub fn parse(bytes: &[u8]) -> Result<Self, CodecError> {
        if bytes.len() < 4 {
            return Err(CodecError::Truncated);
        }
        if bytes[..4] != MAGIC {
            return Err(CodecError::BadMagic);
        }
        if bytes.len() < FIXED_HEADER_LEN {
            return Err(CodecError::Truncated);
        }
        let u32_at = |i: usize| u32::from_be_bytes([bytes[i], bytes[i + 1], bytes[i + 2], bytes[i + 3]]);
        let version = bytes[4];
        if version != VERSION {
            return Err(CodecError::UnsupportedVersion(version));
        }
        let qp = bytes[5];
        validate_qp(qp as i64)?;
        let (width, height, frames) = (u32_at(6), u32_at(10), u32_at(14));
        let plane_count = bytes[18] as usize;
        if bytes.len() < FIXED_HEADER_LEN + 8 * plane_count {
            return Err(CodecError::Truncated);
        }
        let planes: Vec<(u32, u32)> = (0..plane_count)
            .map(|p| {
                let at = FIXED_HEADER_LEN + 8 * p;
                (u32_at(at), u32_at(at + 4))
            })
            .collect();
        let header = Self {
            version,
            qp,
            width,
            height,
            frames,
            planes,
        };
        header.validate()?;
        Ok(header)
    }

    fn validate(&self) -> Result<(), CodecError> {
        let bad = |m: &'static str| Err(CodecError::InvalidHeader(m));
        if self.width == 0 || self.height == 0 {
            return bad("zero luma dimension");
        }
        if self.frames == 0 {
            return bad("zero frame count");
        }
        match self.planes.len() {
            1 => {
                if self.planes[0] != (self.width, self.height) {
                    return bad("plane 0 dimensions differ from luma dimensions");
                }
            }
            3 => {
                if !self.width.is_multiple_of(2) || !self.height.is_multiple_of(2) {
                    return bad("4:2:0 stream with odd luma dimensions");
                }
                let chroma = (self.width / 2, self.height / 2);
                if self.planes[0] != (self.width, self.height) || self.planes[1] != chroma || self.planes[2] != chroma {
                    return bad("plane dimensions inconsistent with 4:2:0");
                }
            }
            _ => return bad("plane count must be 1 or 3"),
        }
        Ok(())
    }

    pub fn format(&self) -> ColorFormat {
        if self.planes.len() == 1 {
            ColorFormat::Gray
        } else {
            ColorFormat::Yuv420
        }
    }

    /// Number of 8x8 blocks coded per frame.
    pub fn blocks_per_frame(&self) -> u64 {
        self.planes
            .iter()
            .map(|&(w, h)| (w as u64).div_ceil(N as u64) * (h as u64).div_ceil(N as u64))
            .fold(0u64, u64::saturating_add)
    }
}

/// An encoded built-in stream: header followed by the entropy-coded payload.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Bitstream {
    bytes: Vec<u8>,
}

impl Bitstream {
    pub fn from_bytes(bytes: Vec<u8>) -> Self {
        Self { bytes }
    }

    pub fn bytes(&self) -> &[u8] {
        &self.bytes
    }

    pub fn into_bytes(self) -> Vec<u8> {
        self.bytes
    }

    pub fn len(&self) -> usize {
        self.bytes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bytes.is_empty()
    }

    pub fn header(&self) -> Result<BitstreamHeader, CodecError> {
        BitstreamHeader::parse(&self.bytes)
    }
}

/// Encodes a GRAY or YUV 4:2:0 sequence at the given QP.
pub fn encode_builtin(seq: &VideoSequence, qp: u8) -> Result<Bitstream, CodecError> {
    validate_qp(qp as i64)?;
    let format = seq.format();
    if !matches!(format, ColorFormat::Yuv420 | ColorFormat::Gray) {
        return Err(CodecError::UnsupportedFormat(format));
    }
    let dim = |v: usize| u32::try_from(v).map_err(|_| CodecError::InvalidHeader("dimension exceeds 32 bits"));
    let first = &seq.frames()[0];
    let header = BitstreamHeader {
        version: VERSION,
        qp,
        width: dim(seq.width())?,
        height: dim(seq.height())?,
        frames: u32::try_from(seq.len()).map_err(|_| CodecError::InvalidHeader("too many frames"))?,
        planes: first
            .planes()
            .iter()
            .map(|p| Ok((dim(p.width())?, dim(p.height())?)))
            .collect::<Result<_, CodecError>>()?,
    };
    let mut bytes = Vec::with_capacity(header.encoded_len());
    header.write(&mut bytes);

    let qstep = qstep_from_qp(qp)?;
    let zigzag = dct::zigzag();
    let mut w = BitWriter::new(bytes);
    for frame in seq.frames() {
        for plane in frame.planes() {
            for_each_block(plane, |block| {
                let coefs = dct::forward(block);
                let mut levels = [0i32; N * N];
                for (k, &raster) in zigzag.iter().enumerate() {
                    let c = coefs[raster / N][raster % N];
                    levels[k] = (c / qstep).round() as i32;
                }
                match levels.iter().rposition(|&l| l != 0) {
                    None => w.put_bit(true),
                    Some(last) => {
                        w.put_bit(false);
                        w.put_bits(last as u32, 6);
                        for &l in &levels[..=last] {
                            w.put_se(l);
                        }
                    }
                }
            });
        }
    }
    Ok(Bitstream::from_bytes(w.finish()))
}

/// Visits the level-shifted 8x8 blocks of an edge-replicated plane.
fn for_each_block(plane: &Plane, mut f: impl FnMut(&[[f64; N]; N])) {
    let (w, h) = (plane.width(), plane.height());
    let mut block = [[0.0; N]; N];
    for by in (0..h).step_by(N) {
        for bx in (0..w).step_by(N) {
            for (dy, row) in block.iter_mut().enumerate() {
                let y = (by + dy).min(h - 1);
                for (dx, v) in row.iter_mut().enumerate() {
                    let x = (bx + dx).min(w - 1);
                    *v = plane.get(x, y) as f64 - 128.0;
                }
            }
            f(&block);
        }
    }
}

/// Decodes a built-in stream. The container does not carry a frame rate, so
/// the caller supplies one.
pub fn decode_builtin(bs: &Bitstream, fps: f64) -> Result<VideoSequence, CodecError> {
    let header = bs.header()?;
    let payload = &bs.bytes()[header.encoded_len()..];
    // every block costs at least one bit
    let blocks = header.blocks_per_frame().saturating_mul(header.frames as u64);
    if blocks > payload.len() as u64 * 8 {
        return Err(CodecError::Truncated);
    }

    let qstep = qstep_from_qp(header.qp)?;
    let zigzag = dct::zigzag();
    let mut r = BitReader::new(payload);
    let mut frames = Vec::with_capacity(header.frames as usize);
    for _ in 0..header.frames {
        let mut planes = Vec::with_capacity(header.planes.len());
        for &(pw, ph) in &header.planes {
            let (pw, ph) = (pw as usize, ph as usize);
            let mut data = vec![0u8; pw * ph];
            for by in (0..ph).step_by(N) {
                for bx in (0..pw).step_by(N) {
                    let mut coefs = [[0.0; N]; N];
                    if !r.bit()? {
                        let last = r.bits(6)? as usize;
                        for &raster in &zigzag[..=last] {
                            coefs[raster / N][raster % N] = r.se()? as f64 * qstep;
                        }
                    }
                    let pixels = dct::inverse(&coefs);
                    for (dy, row) in pixels.iter().enumerate().take(ph - by) {
                        let out = &mut data[(by + dy) * pw + bx..];
                        for (dx, &v) in row.iter().enumerate().take(pw - bx) {
                            out[dx] = quantize_sample(v + 128.0);
                        }
                    }
                }
            }
            planes.push(Plane::new(pw, ph, data)?);
        }
        frames.push(Frame::new(header.format(), planes)?);
    }
    r.expect_end()?;
    Ok(VideoSequence::new(frames, fps)?)
}
