//! Baseline sequential JPEG for 8-bit grayscale images.
//!
//! Float DCT, standard luminance tables, standard Huffman tables, no restart
//! intervals. The decoder accepts any single-component baseline stream
//! with 8-bit quantisation tables.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;
use std::sync::OnceLock;

use ndarray::Array2;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

/// Annex K.1 luminance table, natural (row-major) order.
pub const STD_LUMINANCE_TABLE: [u16; 64] = [
    16, 11, 10, 16, 24, 40, 51, 61, //
    12, 12, 14, 19, 26, 58, 60, 55, //
    14, 13, 16, 24, 40, 57, 69, 56, //
    14, 17, 22, 29, 51, 87, 80, 62, //
    18, 22, 37, 56, 68, 109, 103, 77, //
    24, 35, 55, 64, 81, 104, 113, 92, //
    49, 64, 78, 87, 103, 121, 120, 101, //
    72, 92, 95, 98, 112, 100, 103, 99,
];

/// Natural index of the k-th coefficient in zig-zag order.
pub const UNZIGZAG: [usize; 64] = [
    0, 1, 8, 16, 9, 2, 3, 10, 17, 24, 32, 25, 18, 11, 4, 5, 12, 19, 26, 33, 40, 48, 41, 34, 27, 20, 13, 6, 7, 14, 21, 28,
    35, 42, 49, 56, 57, 50, 43, 36, 29, 22, 15, 23, 30, 37, 44, 51, 58, 59, 52, 45, 38, 31, 39, 46, 53, 60, 61, 54, 47,
    55, 62, 63,
];

const DC_BITS: [u8; 16] = [0, 1, 5, 1, 1, 1, 1, 1, 1, 0, 0, 0, 0, 0, 0, 0];
const DC_VALUES: [u8; 12] = [0, 1, 2, 3, 4, 5, 6, 7, 8, 9, 10, 11];
const AC_BITS: [u8; 16] = [0, 2, 1, 3, 3, 2, 4, 3, 5, 5, 4, 4, 0, 0, 1, 0x7d];
const AC_VALUES: [u8; 162] = [
    0x01, 0x02, 0x03, 0x00, 0x04, 0x11, 0x05, 0x12, 0x21, 0x31, 0x41, 0x06, 0x13, 0x51, 0x61, 0x07, 0x22, 0x71, 0x14,
    0x32, 0x81, 0x91, 0xa1, 0x08, 0x23, 0x42, 0xb1, 0xc1, 0x15, 0x52, 0xd1, 0xf0, 0x24, 0x33, 0x62, 0x72, 0x82, 0x09,
    0x0a, 0x16, 0x17, 0x18, 0x19, 0x1a, 0x25, 0x26, 0x27, 0x28, 0x29, 0x2a, 0x34, 0x35, 0x36, 0x37, 0x38, 0x39, 0x3a,
    0x43, 0x44, 0x45, 0x46, 0x47, 0x48, 0x49, 0x4a, 0x53, 0x54, 0x55, 0x56, 0x57, 0x58, 0x59, 0x5a, 0x63, 0x64, 0x65,
    0x66, 0x67, 0x68, 0x69, 0x6a, 0x73, 0x74, 0x75, 0x76, 0x77, 0x78, 0x79, 0x7a, 0x83, 0x84, 0x85, 0x86, 0x87, 0x88,
    0x89, 0x8a, 0x92, 0x93, 0x94, 0x95, 0x96, 0x97, 0x98, 0x99, 0x9a, 0xa2, 0xa3, 0xa4, 0xa5, 0xa6, 0xa7, 0xa8, 0xa9,
    0xaa, 0xb2, 0xb3, 0xb4, 0xb5, 0xb6, 0xb7, 0xb8, 0xb9, 0xba, 0xc2, 0xc3, 0xc4, 0xc5, 0xc6, 0xc7, 0xc8, 0xc9, 0xca,
    0xd2, 0xd3, 0xd4, 0xd5, 0xd6, 0xd7, 0xd8, 0xd9, 0xda, 0xe1, 0xe2, 0xe3, 0xe4, 0xe5, 0xe6, 0xe7, 0xe8, 0xe9, 0xea,
    0xf1, 0xf2, 0xf3, 0xf4, 0xf5, 0xf6, 0xf7, 0xf8, 0xf9, 0xfa,
];

/// A JPEG setting for the compression pipeline: no compression, or a
/// quality factor in `1..=100`. Serialised as `"NC"` or the integer.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum JpegQuality {
    NoCompression,
    Quality(u8),
}

impl JpegQuality {
    pub fn quality(qf: u32) -> Result<Self> {
        if (1..=100).contains(&qf) {
            Ok(JpegQuality::Quality(qf as u8))
        } else {
            Err(Error::invalid_argument(format!("JPEG quality must be in 1..=100, got {qf}")))
        }
    }

    /// Larger is more compressed; NC is 0.
    pub fn severity(self) -> u32 {
        match self {
            JpegQuality::NoCompression => 0,
            JpegQuality::Quality(q) => 101 - q as u32,
        }
    }
}

impl fmt::Display for JpegQuality {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            JpegQuality::NoCompression => f.write_str("NC"),
            JpegQuality::Quality(q) => write!(f, "{q}"),
        }
    }
}

impl FromStr for JpegQuality {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let t = s.trim();
        if t.eq_ignore_ascii_case("nc") {
            return Ok(JpegQuality::NoCompression);
        }
        let q: u32 = t.parse().map_err(|_| Error::invalid_argument(format!("not a JPEG quality: {s:?}")))?;
        JpegQuality::quality(q)
    }
}

impl Serialize for JpegQuality {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            JpegQuality::NoCompression => s.serialize_str("NC"),
            JpegQuality::Quality(q) => s.serialize_u8(*q),
        }
    }
}

impl<'de> Deserialize<'de> for JpegQuality {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Int(u32),
            Str(String),
        }
        match Raw::deserialize(d)? {
            Raw::Int(q) => JpegQuality::quality(q),
            Raw::Str(s) => s.parse(),
        }
        .map_err(serde::de::Error::custom)
    }
}

fn check_qf(qf: u8) -> Result<()> {
    if (1..=100).contains(&qf) {
        Ok(())
    } else {
        Err(Error::invalid_argument(format!("JPEG quality must be in 1..=100, got {qf}")))
    }
}

/// Percentage applied to the standard table.
pub fn quality_scale(qf: u8) -> Result<u32> {
    check_qf(qf)?;
    let q = qf as u32;
    Ok(if q < 50 { 5000 / q } else { 200 - 2 * q })
}

/// Scaled luminance table in natural order, entries clamped to `[1, 255]`.
pub fn quantization_table(qf: u8) -> Result<[u16; 64]> {
    let scale = quality_scale(qf)?;
    let mut t = [0u16; 64];
    for (dst, &base) in t.iter_mut().zip(STD_LUMINANCE_TABLE.iter()) {
        *dst = ((base as u32 * scale + 50) / 100).clamp(1, 255) as u16;
    }
    Ok(t)
}

/// `cos_table()[x][u] = C(u)/2 * cos((2x+1) u pi / 16)`.
fn cos_table() -> &'static [[f64; 8]; 8] {
    static TABLE: OnceLock<[[f64; 8]; 8]> = OnceLock::new();
    TABLE.get_or_init(|| {
        let mut t = [[0.0; 8]; 8];
        for (x, row) in t.iter_mut().enumerate() {
            for (u, v) in row.iter_mut().enumerate() {
                let c = if u == 0 { std::f64::consts::FRAC_1_SQRT_2 } else { 1.0 };
                *v = 0.5 * c * ((2 * x + 1) as f64 * u as f64 * PI / 16.0).cos();
            }
        }
        t
    })
}

fn fdct(block: &[f64; 64]) -> [f64; 64] {
    let c = cos_table();
    let mut tmp = [0.0; 64];
    for i in 0..8 {
        for v in 0..8 {
            tmp[i * 8 + v] = (0..8).map(|j| c[j][v] * block[i * 8 + j]).sum();
        }
    }
    let mut out = [0.0; 64];
    for u in 0..8 {
        for v in 0..8 {
            out[u * 8 + v] = (0..8).map(|i| c[i][u] * tmp[i * 8 + v]).sum();
        }
    }
    out
}

fn idct(coef: &[f64; 64]) -> [f64; 64] {
    let c = cos_table();
    let mut tmp = [0.0; 64];
    for i in 0..8 {
        for v in 0..8 {
            tmp[i * 8 + v] = (0..8).map(|u| c[i][u] * coef[u * 8 + v]).sum();
        }
    }
    let mut out = [0.0; 64];
    for i in 0..8 {
        for j in 0..8 {
            out[i * 8 + j] = (0..8).map(|v| c[j][v] * tmp[i * 8 + v]).sum();
        }
    }
    out
}

/// Level shift, forward DCT and quantisation of one block (natural order).
pub fn quantize_block(pixels: &[u8; 64], table: &[u16; 64]) -> [i32; 64] {
    let mut shifted = [0.0; 64];
    for (s, &p) in shifted.iter_mut().zip(pixels.iter()) {
        *s = p as f64 - 128.0;
    }
    let f = fdct(&shifted);
    let mut q = [0i32; 64];
    for k in 0..64 {
        q[k] = round_half_away(f[k] / table[k] as f64);
    }
    q
}

/// Rounds to nearest, ties away from zero. Some coefficients of integer
/// blocks are exact half-integers (DC, and the rows and columns of index 4),
/// so values within float noise of a tie are treated as ties.
fn round_half_away(x: f64) -> i32 {
    let a = x.abs();
    let mag = if (a.fract() - 0.5).abs() < 1e-9 { a.trunc() + 1.0 } else { a.round() };
    (mag.copysign(x)) as i32
}

fn dequantize_block(q: &[i32; 64], table: &[u16; 64]) -> [u8; 64] {
    let mut coef = [0.0; 64];
    for k in 0..64 {
        coef[k] = q[k] as f64 * table[k] as f64;
    }
    let p = idct(&coef);
    let mut out = [0u8; 64];
    for (o, v) in out.iter_mut().zip(p.iter()) {
        *o = (v + 128.0).round().clamp(0.0, 255.0) as u8;
    }
    out
}

/// Quantised coefficients of every block, edge-replicating partial blocks.
/// Blocks are in raster order.
pub fn quantized_coefficients(img: &Array2<u8>, qf: u8) -> Result<Vec<[i32; 64]>> {
    let table = quantization_table(qf)?;
    let (h, w) = img.dim();
    if h == 0 || w == 0 {
        return Err(Error::invalid_input("empty image"));
    }
    let (bh, bw) = (h.div_ceil(8), w.div_ceil(8));
    let mut blocks = Vec::with_capacity(bh * bw);
    for by in 0..bh {
        for bx in 0..bw {
            let mut px = [0u8; 64];
            for i in 0..8 {
                for j in 0..8 {
                    px[i * 8 + j] = img[[(by * 8 + i).min(h - 1), (bx * 8 + j).min(w - 1)]];
                }
            }
            blocks.push(quantize_block(&px, &table));
        }
    }
    Ok(blocks)
}

struct HuffTable {
    /// (code, length) per symbol
    codes: [(u16, u8); 256],
    /// decoding: max code per length, value pointer, min code
    maxcode: [i32; 18],
    valptr: [usize; 17],
    mincode: [u16; 17],
    values: Vec<u8>,
}

impl HuffTable {
    fn new(bits: &[u8; 16], values: &[u8]) -> Result<Self> {
        let total: usize = bits.iter().map(|&b| b as usize).sum();
        if total != values.len() || total > 256 {
            return Err(Error::invalid_input("inconsistent Huffman table"));
        }
        let mut codes = [(0u16, 0u8); 256];
        let mut maxcode = [-1i32; 18];
        let mut valptr = [0usize; 17];
        let mut mincode = [0u16; 17];
        let mut code: u32 = 0;
        let mut k = 0;
        for len in 1..=16 {
            let n = bits[len - 1] as usize;
            valptr[len] = k;
            mincode[len] = code as u16;
            for _ in 0..n {
                if code >= (1 << len) {
                    return Err(Error::invalid_input("over-subscribed Huffman table"));
                }
                codes[values[k] as usize] = (code as u16, len as u8);
                code += 1;
                k += 1;
            }
            if n > 0 {
                maxcode[len] = code as i32 - 1;
            }
            code <<= 1;
        }
        maxcode[17] = i32::MAX;
        Ok(Self { codes, maxcode, valptr, mincode, values: values.to_vec() })
    }
}

fn std_tables() -> &'static (HuffTable, HuffTable) {
    static T: OnceLock<(HuffTable, HuffTable)> = OnceLock::new();
    T.get_or_init(|| {
        (
            HuffTable::new(&DC_BITS, &DC_VALUES).expect("standard DC table"),
            HuffTable::new(&AC_BITS, &AC_VALUES).expect("standard AC table"),
        )
    })
}

struct BitWriter {
    out: Vec<u8>,
    acc: u32,
    n: u32,
}

impl BitWriter {
    fn put(&mut self, bits: u32, len: u32) {
        for i in (0..len).rev() {
            self.acc = (self.acc << 1) | ((bits >> i) & 1);
            self.n += 1;
            if self.n == 8 {
                let byte = self.acc as u8;
                self.out.push(byte);
                if byte == 0xFF {
                    self.out.push(0x00);
                }
                self.acc = 0;
                self.n = 0;
            }
        }
    }

    fn flush(&mut self) {
        if self.n > 0 {
            let pad = 8 - self.n;
            self.put((1 << pad) - 1, pad);
        }
    }
}

fn magnitude_category(v: i32) -> u32 {
    32 - v.unsigned_abs().leading_zeros()
}

fn amplitude_bits(v: i32, size: u32) -> u32 {
    if v >= 0 {
        v as u32
    } else {
        (v - 1) as u32 & ((1u32 << size) - 1)
    }
}

fn segment(out: &mut Vec<u8>, marker: u8, payload: &[u8]) {
    out.extend_from_slice(&[0xFF, marker]);
    out.extend_from_slice(&((payload.len() + 2) as u16).to_be_bytes());
    out.extend_from_slice(payload);
}

fn dht_payload(class_id: u8, bits: &[u8; 16], values: &[u8]) -> Vec<u8> {
    let mut p = vec![class_id];
    p.extend_from_slice(bits);
    p.extend_from_slice(values);
    p
}

/// Encodes to a JFIF byte stream.
pub fn encode_gray(img: &Array2<u8>, qf: u8) -> Result<Vec<u8>> {
    let table = quantization_table(qf)?;
    let (h, w) = img.dim();
    if h > u16::MAX as usize || w > u16::MAX as usize {
        return Err(Error::invalid_input("image too large for baseline JPEG"));
    }
    let blocks = quantized_coefficients(img, qf)?;
    let mut out = vec![0xFF, 0xD8];
    segment(&mut out, 0xE0, &[b'J', b'F', b'I', b'F', 0, 1, 1, 0, 0, 1, 0, 1, 0, 0]);
    let mut dqt = vec![0u8];
    dqt.extend(UNZIGZAG.iter().map(|&k| table[k] as u8));
    segment(&mut out, 0xDB, &dqt);
    let mut sof = vec![8];
    sof.extend_from_slice(&(h as u16).to_be_bytes());
    sof.extend_from_slice(&(w as u16).to_be_bytes());
    sof.extend_from_slice(&[1, 1, 0x11, 0]);
    segment(&mut out, 0xC0, &sof);
    segment(&mut out, 0xC4, &dht_payload(0x00, &DC_BITS, &DC_VALUES));
    segment(&mut out, 0xC4, &dht_payload(0x10, &AC_BITS, &AC_VALUES));
    segment(&mut out, 0xDA, &[1, 1, 0x00, 0, 63, 0]);

    let (dc, ac) = std_tables();
    let mut bw = BitWriter { out, acc: 0, n: 0 };
    let mut pred = 0i32;
    for q in &blocks {
        let diff = q[0] - pred;
        pred = q[0];
        let s = magnitude_category(diff);
        let (code, len) = dc.codes[s as usize];
        bw.put(code as u32, len as u32);
        bw.put(amplitude_bits(diff, s), s);
        let mut run = 0;
        for &nat in UNZIGZAG.iter().skip(1) {
            let v = q[nat];
            if v == 0 {
                run += 1;
                continue;
            }
            while run > 15 {
                let (code, len) = ac.codes[0xF0];
                bw.put(code as u32, len as u32);
                run -= 16;
            }
            let s = magnitude_category(v);
            let (code, len) = ac.codes[((run << 4) | s) as usize];
            bw.put(code as u32, len as u32);
            bw.put(amplitude_bits(v, s), s);
            run = 0;
        }
        if run > 0 {
            let (code, len) = ac.codes[0x00];
            bw.put(code as u32, len as u32);
        }
    }
    bw.flush();
    let mut out = bw.out;
    out.extend_from_slice(&[0xFF, 0xD9]);
    Ok(out)
}

struct BitReader<'a> {
    data: &'a [u8],
    pos: usize,
    acc: u32,
    n: u32,
}

impl BitReader<'_> {
    fn bit(&mut self) -> Result<u32> {
        if self.n == 0 {
            let byte = *self.data.get(self.pos).ok_or_else(|| Error::invalid_input("truncated JPEG scan"))?;
            self.pos += 1;
            if byte == 0xFF {
                match self.data.get(self.pos) {
                    Some(0x00) => self.pos += 1,
                    _ => return Err(Error::invalid_input("unexpected marker inside JPEG scan")),
                }
            }
            self.acc = byte as u32;
            self.n = 8;
        }
        self.n -= 1;
        Ok((self.acc >> self.n) & 1)
    }

    fn bits(&mut self, len: u32) -> Result<u32> {
        let mut v = 0;
        for _ in 0..len {
            v = (v << 1) | self.bit()?;
        }
        Ok(v)
    }

    fn symbol(&mut self, t: &HuffTable) -> Result<u8> {
        let mut code = 0i32;
        for len in 1..=16 {
            code = (code << 1) | self.bit()? as i32;
            if code <= t.maxcode[len] {
                let idx = t.valptr[len] + (code - t.mincode[len] as i32) as usize;
                return t.values.get(idx).copied().ok_or_else(|| Error::invalid_input("bad Huffman code"));
            }
        }
        Err(Error::invalid_input("bad Huffman code"))
    }
}

fn extend(v: u32, size: u32) -> i32 {
    if size == 0 {
        0
    } else if v < (1 << (size - 1)) {
        v as i32 - (1 << size) as i32 + 1
    } else {
        v as i32
    }
}

/// Decodes a single-component baseline stream.
pub fn decode_gray(bytes: &[u8]) -> Result<Array2<u8>> {
    let bad = |m: &str| Error::invalid_input(format!("JPEG: {m}"));
    if bytes.len() < 4 || bytes[0] != 0xFF || bytes[1] != 0xD8 {
        return Err(bad("missing SOI"));
    }
    let mut qt: [Option<[u16; 64]>; 4] = [None; 4];
    let mut dc_t: [Option<HuffTable>; 4] = [None, None, None, None];
    let mut ac_t: [Option<HuffTable>; 4] = [None, None, None, None];
    let mut frame: Option<(usize, usize, usize)> = None;
    let mut pos = 2;
    loop {
        if pos + 4 > bytes.len() || bytes[pos] != 0xFF {
            return Err(bad("malformed segment"));
        }
        let marker = bytes[pos + 1];
        let len = u16::from_be_bytes([bytes[pos + 2], bytes[pos + 3]]) as usize;
        let body = bytes.get(pos + 4..pos + 2 + len).ok_or_else(|| bad("truncated segment"))?;
        pos += 2 + len;
        match marker {
            0xDB => {
                let mut b = body;
                while !b.is_empty() {
                    let (pq, tq) = (b[0] >> 4, (b[0] & 15) as usize);
                    if pq != 0 || tq > 3 || b.len() < 65 {
                        return Err(bad("unsupported quantisation table"));
                    }
                    let mut t = [0u16; 64];
                    for (k, &nat) in UNZIGZAG.iter().enumerate() {
                        t[nat] = b[1 + k] as u16;
                    }
                    qt[tq] = Some(t);
                    b = &b[65..];
                }
            }
            0xC4 => {
                let mut b = body;
                while !b.is_empty() {
                    if b.len() < 17 {
                        return Err(bad("truncated Huffman table"));
                    }
                    let (tc, th) = (b[0] >> 4, (b[0] & 15) as usize);
                    let mut bits = [0u8; 16];
                    bits.copy_from_slice(&b[1..17]);
                    let n: usize = bits.iter().map(|&x| x as usize).sum();
                    let vals = b.get(17..17 + n).ok_or_else(|| bad("truncated Huffman table"))?;
                    let table = HuffTable::new(&bits, vals)?;
                    match (tc, th) {
                        (0, 0..=3) => dc_t[th] = Some(table),
                        (1, 0..=3) => ac_t[th] = Some(table),
                        _ => return Err(bad("invalid Huffman table id")),
                    }
                    b = &b[17 + n..];
                }
            }
            0xC0 | 0xC1 => {
                if body.len() < 9 || body[0] != 8 || body[5] != 1 {
                    return Err(bad("only 8-bit single-component frames are supported"));
                }
                let h = u16::from_be_bytes([body[1], body[2]]) as usize;
                let w = u16::from_be_bytes([body[3], body[4]]) as usize;
                if h == 0 || w == 0 {
                    return Err(bad("empty frame"));
                }
                frame = Some((h, w, (body[8] & 3) as usize));
            }
            0xC2..=0xCF if marker != 0xC4 && marker != 0xC8 && marker != 0xCC => {
                return Err(bad("only baseline sequential streams are supported"));
            }
            0xDD => return Err(bad("restart intervals are not supported")),
            0xDA => {
                let (h, w, tq) = frame.ok_or_else(|| bad("scan before frame header"))?;
                if body.len() < 6 || body[0] != 1 {
                    return Err(bad("expected a single-component scan"));
                }
                let (td, ta) = ((body[2] >> 4) as usize, (body[2] & 15) as usize);
                let table = qt.get(tq).copied().flatten().ok_or_else(|| bad("missing quantisation table"))?;
                let dc = dc_t.get(td).and_then(|t| t.as_ref()).ok_or_else(|| bad("missing DC table"))?;
                let ac = ac_t.get(ta).and_then(|t| t.as_ref()).ok_or_else(|| bad("missing AC table"))?;
                return decode_scan(&bytes[pos..], h, w, &table, dc, ac);
            }
            0xD9 => return Err(bad("no scan before EOI")),
            _ => {}
        }
    }
}

fn decode_scan(data: &[u8], h: usize, w: usize, table: &[u16; 64], dc: &HuffTable, ac: &HuffTable) -> Result<Array2<u8>> {
    let (bh, bw) = (h.div_ceil(8), w.div_ceil(8));
    let mut img = Array2::zeros((h, w));
    let mut r = BitReader { data, pos: 0, acc: 0, n: 0 };
    let mut pred = 0i32;
    for by in 0..bh {
        for bx in 0..bw {
            let mut q = [0i32; 64];
            let s = r.symbol(dc)? as u32;
            if s > 11 {
                return Err(Error::invalid_input("JPEG: DC category out of range"));
            }
            pred += extend(r.bits(s)?, s);
            q[0] = pred;
            let mut k = 1;
            while k < 64 {
                let rs = r.symbol(ac)?;
                let (run, size) = ((rs >> 4) as usize, (rs & 15) as u32);
                if size == 0 {
                    if run == 15 {
                        k += 16;
                        continue;
                    }
                    break;
                }
                k += run;
                if k > 63 {
                    return Err(Error::invalid_input("JPEG: coefficient index out of range"));
                }
                q[UNZIGZAG[k]] = extend(r.bits(size)?, size);
                k += 1;
            }
            let px = dequantize_block(&q, table);
            for i in 0..8 {
                for j in 0..8 {
                    let (y, x) = (by * 8 + i, bx * 8 + j);
                    if y < h && x < w {
                        img[[y, x]] = px[i * 8 + j];
                    }
                }
            }
        }
    }
    Ok(img)
}

/// Encode then decode at `qf`.
pub fn jpeg_codec(img8: &Array2<u8>, qf: u8) -> Result<Array2<u8>> {
    decode_gray(&encode_gray(img8, qf)?)
}
