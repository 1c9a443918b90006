//! Baseline sequential JPEG encoder: standard Annex K quantization and
//! Huffman tables, libjpeg quality scaling, 4:2:0 chroma subsampling for
//! colour input and a single luma component for gray input.

use super::RasterImage;
use crate::error::{Error, Result};

#[rustfmt::skip]
const LUMA_QUANT: [u16; 64] = [
    16, 11, 10, 16, 24, 40, 51, 61,
    12, 12, 14, 19, 26, 58, 60, 55,
    14, 13, 16, 24, 40, 57, 69, 56,
    14, 17, 22, 29, 51, 87, 80, 62,
    18, 22, 37, 56, 68, 109, 103, 77,
    24, 35, 55, 64, 81, 104, 113, 92,
    49, 64, 78, 87, 103, 121, 120, 101,
    72, 92, 95, 98, 112, 100, 103, 99,
];

#[rustfmt::skip]
const CHROMA_QUANT: [u16; 64] = [
    17, 18, 24, 47, 99, 99, 99, 99,
    18, 21, 26, 66, 99, 99, 99, 99,
    24, 26, 56, 99, 99, 99, 99, 99,
    47, 66, 99, 99, 99, 99, 99, 99,
    99, 99, 99, 99, 99, 99, 99, 99,
    99, 99, 99, 99, 99, 99, 99, 99,
    99, 99, 99, 99, 99, 99, 99, 99,
    99, 99, 99, 99, 99, 99, 99, 99,
];

/// Natural (row-major) index of each zigzag position.
#[rustfmt::skip]
const ZIGZAG: [usize; 64] = [
     0,  1,  8, 16,  9,  2,  3, 10,
    17, 24, 32, 25, 18, 11,  4,  5,
    12, 19, 26, 33, 40, 48, 41, 34,
    27, 20, 13,  6,  7, 14, 21, 28,
    35, 42, 49, 56, 57, 50, 43, 36,
    29, 22, 15, 23, 30, 37, 44, 51,
    58, 59, 52, 45, 38, 31, 39, 46,
    53, 60, 61, 54, 47, 55, 62, 63,
];

const LUMA_DC_BITS: [u8; 16] = [0, 1, 5, 1, 1, 1, 1, 1, 1, 0, 0, 0, 0, 0, 0, 0];
const CHROMA_DC_BITS: [u8; 16] = [0, 3, 1, 1, 1, 1, 1, 1, 1, 1, 1, 0, 0, 0, 0, 0];
const DC_VALUES: [u8; 12] = [0, 1, 2, 3, 4, 5, 6, 7, 8, 9, 10, 11];

const LUMA_AC_BITS: [u8; 16] = [0, 2, 1, 3, 3, 2, 4, 3, 5, 5, 4, 4, 0, 0, 1, 0x7d];
#[rustfmt::skip]
const LUMA_AC_VALUES: [u8; 162] = [
    0x01, 0x02, 0x03, 0x00, 0x04, 0x11, 0x05, 0x12, 0x21, 0x31, 0x41, 0x06, 0x13, 0x51, 0x61, 0x07,
    0x22, 0x71, 0x14, 0x32, 0x81, 0x91, 0xA1, 0x08, 0x23, 0x42, 0xB1, 0xC1, 0x15, 0x52, 0xD1, 0xF0,
    0x24, 0x33, 0x62, 0x72, 0x82, 0x09, 0x0A, 0x16, 0x17, 0x18, 0x19, 0x1A, 0x25, 0x26, 0x27, 0x28,
    0x29, 0x2A, 0x34, 0x35, 0x36, 0x37, 0x38, 0x39, 0x3A, 0x43, 0x44, 0x45, 0x46, 0x47, 0x48, 0x49,
    0x4A, 0x53, 0x54, 0x55, 0x56, 0x57, 0x58, 0x59, 0x5A, 0x63, 0x64, 0x65, 0x66, 0x67, 0x68, 0x69,
    0x6A, 0x73, 0x74, 0x75, 0x76, 0x77, 0x78, 0x79, 0x7A, 0x83, 0x84, 0x85, 0x86, 0x87, 0x88, 0x89,
    0x8A, 0x92, 0x93, 0x94, 0x95, 0x96, 0x97, 0x98, 0x99, 0x9A, 0xA2, 0xA3, 0xA4, 0xA5, 0xA6, 0xA7,
    0xA8, 0xA9, 0xAA, 0xB2, 0xB3, 0xB4, 0xB5, 0xB6, 0xB7, 0xB8, 0xB9, 0xBA, 0xC2, 0xC3, 0xC4, 0xC5,
    0xC6, 0xC7, 0xC8, 0xC9, 0xCA, 0xD2, 0xD3, 0xD4, 0xD5, 0xD6, 0xD7, 0xD8, 0xD9, 0xDA, 0xE1, 0xE2,
    0xE3, 0xE4, 0xE5, 0xE6, 0xE7, 0xE8, 0xE9, 0xEA, 0xF1, 0xF2, 0xF3, 0xF4, 0xF5, 0xF6, 0xF7, 0xF8,
    0xF9, 0xFA,
];

const CHROMA_AC_BITS: [u8; 16] = [0, 2, 1, 2, 4, 4, 3, 4, 7, 5, 4, 4, 0, 1, 2, 0x77];
#[rustfmt::skip]
const CHROMA_AC_VALUES: [u8; 162] = [
    0x00, 0x01, 0x02, 0x03, 0x11, 0x04, 0x05, 0x21, 0x31, 0x06, 0x12, 0x41, 0x51, 0x07, 0x61, 0x71,
    0x13, 0x22, 0x32, 0x81, 0x08, 0x14, 0x42, 0x91, 0xA1, 0xB1, 0xC1, 0x09, 0x23, 0x33, 0x52, 0xF0,
    0x15, 0x62, 0x72, 0xD1, 0x0A, 0x16, 0x24, 0x34, 0xE1, 0x25, 0xF1, 0x17, 0x18, 0x19, 0x1A, 0x26,
    0x27, 0x28, 0x29, 0x2A, 0x35, 0x36, 0x37, 0x38, 0x39, 0x3A, 0x43, 0x44, 0x45, 0x46, 0x47, 0x48,
    0x49, 0x4A, 0x53, 0x54, 0x55, 0x56, 0x57, 0x58, 0x59, 0x5A, 0x63, 0x64, 0x65, 0x66, 0x67, 0x68,
    0x69, 0x6A, 0x73, 0x74, 0x75, 0x76, 0x77, 0x78, 0x79, 0x7A, 0x82, 0x83, 0x84, 0x85, 0x86, 0x87,
    0x88, 0x89, 0x8A, 0x92, 0x93, 0x94, 0x95, 0x96, 0x97, 0x98, 0x99, 0x9A, 0xA2, 0xA3, 0xA4, 0xA5,
    0xA6, 0xA7, 0xA8, 0xA9, 0xAA, 0xB2, 0xB3, 0xB4, 0xB5, 0xB6, 0xB7, 0xB8, 0xB9, 0xBA, 0xC2, 0xC3,
    0xC4, 0xC5, 0xC6, 0xC7, 0xC8, 0xC9, 0xCA, 0xD2, 0xD3, 0xD4, 0xD5, 0xD6, 0xD7, 0xD8, 0xD9, 0xDA,
    0xE2, 0xE3, 0xE4, 0xE5, 0xE6, 0xE7, 0xE8, 0xE9, 0xEA, 0xF2, 0xF3, 0xF4, 0xF5, 0xF6, 0xF7, 0xF8,
    0xF9, 0xFA,
];

/// libjpeg `jpeg_quality_scaling` applied to a base table (natural order).
fn scaled_table(base: &[u16; 64], quality: u8) -> [u16; 64] {
    let q = u32::from(quality);
    let scale = if q < 50 { 5000 / q } else { 200 - 2 * q };
    let mut out = [0u16; 64];
    for (o, &b) in out.iter_mut().zip(base) {
        *o = ((u32::from(b) * scale + 50) / 100).clamp(1, 255) as u16;
    }
    out
}

struct HuffTable {
    bits: &'static [u8; 16],
    values: &'static [u8],
    /// (code, length) indexed by symbol.
    codes: [(u16, u8); 256],
}

impl HuffTable {
    fn new(bits: &'static [u8; 16], values: &'static [u8]) -> Self {
        let mut codes = [(0u16, 0u8); 256];
        let mut code = 0u16;
        let mut k = 0;
        for (len_minus_one, &count) in bits.iter().enumerate() {
            for _ in 0..count {
                codes[values[k] as usize] = (code, len_minus_one as u8 + 1);
                code += 1;
                k += 1;
            }
            code <<= 1;
        }
        Self { bits, values, codes }
    }
}

struct BitWriter {
    out: Vec<u8>,
    acc: u32,
    nbits: u32,
}

impl BitWriter {
    fn write(&mut self, code: u16, len: u8) {
        debug_assert!(len <= 16);
        self.acc = (self.acc << len) | u32::from(code) & ((1u32 << len) - 1);
        self.nbits += u32::from(len);
        while self.nbits >= 8 {
            let byte = (self.acc >> (self.nbits - 8)) as u8;
            self.out.push(byte);
            if byte == 0xFF {
                self.out.push(0x00);
            }
            self.nbits -= 8;
        }
        self.acc &= (1u32 << self.nbits) - 1;
    }

    fn flush(&mut self) {
        if self.nbits > 0 {
            let pad = 8 - self.nbits as u8;
            self.write((1u16 << pad) - 1, pad);
        }
    }
}

/// Magnitude category and the low-order bits that encode `v`.
fn category(v: i32) -> (u8, u16) {
    let mag = v.unsigned_abs();
    let size = (32 - mag.leading_zeros()) as u8;
    let bits = if v < 0 { (v - 1) as u32 } else { v as u32 };
    (size, (bits & ((1u32 << size) - 1)) as u16)
}

struct DctBasis([[f64; 8]; 8]);

impl DctBasis {
    fn new() -> Self {
        let mut c = [[0.0; 8]; 8];
        for (k, row) in c.iter_mut().enumerate() {
            let ck = if k == 0 { std::f64::consts::FRAC_1_SQRT_2 } else { 1.0 };
            for (n, v) in row.iter_mut().enumerate() {
                *v = 0.5 * ck * (((2 * n + 1) * k) as f64 * std::f64::consts::PI / 16.0).cos();
            }
        }
        Self(c)
    }

    /// Forward DCT of a level-shifted block, quantized, in zigzag order.
    fn quantize(&self, block: &[f64; 64], table: &[u16; 64]) -> [i32; 64] {
        let c = &self.0;
        let mut tmp = [0.0; 64];
        for y in 0..8 {
            for u in 0..8 {
                tmp[y * 8 + u] = (0..8).map(|x| c[u][x] * block[y * 8 + x]).sum();
            }
        }
        let mut out = [0i32; 64];
        for (zz, &nat) in ZIGZAG.iter().enumerate() {
            let (v, u) = (nat / 8, nat % 8);
            let coef: f64 = (0..8).map(|y| c[v][y] * tmp[y * 8 + u]).sum();
            out[zz] = (coef / f64::from(table[nat])).round() as i32;
        }
        out
    }
}

struct Component {
    id: u8,
    sampling: u8,
    quant_id: u8,
    huff_id: u8,
}

fn encode_block(w: &mut BitWriter, coefs: &[i32; 64], prev_dc: &mut i32, dc: &HuffTable, ac: &HuffTable) {
    let (size, bits) = category(coefs[0] - *prev_dc);
    *prev_dc = coefs[0];
    let (code, len) = dc.codes[size as usize];
    w.write(code, len);
    if size > 0 {
        w.write(bits, size);
    }
    let mut run = 0;
    for &v in &coefs[1..] {
        if v == 0 {
            run += 1;
            continue;
        }
        while run > 15 {
            let (code, len) = ac.codes[0xF0];
            w.write(code, len);
            run -= 16;
        }
        let (size, bits) = category(v);
        let (code, len) = ac.codes[(run << 4 | size) as usize];
        w.write(code, len);
        w.write(bits, size);
        run = 0;
    }
    if run > 0 {
        let (code, len) = ac.codes[0x00];
        w.write(code, len);
    }
}

fn push_segment(out: &mut Vec<u8>, marker: u8, payload: &[u8]) {
    out.extend_from_slice(&[0xFF, marker]);
    out.extend_from_slice(&((payload.len() + 2) as u16).to_be_bytes());
    out.extend_from_slice(payload);
}

/// Encodes `img` as a baseline JPEG at `quality` (1..=100).
pub fn jpeg_encode(img: &RasterImage, quality: u8) -> Result<Vec<u8>> {
    if !(1..=100).contains(&quality) {
        return Err(Error::arg(format!("JPEG quality must be in 1..=100, got {quality}")));
    }
    let (w, h) = (img.width(), img.height());
    if w > 0xFFFF || h > 0xFFFF {
        return Err(Error::arg(format!("image {w}x{h} exceeds JPEG dimension limit")));
    }
    let color = img.channels() == 3;
    let tables = [scaled_table(&LUMA_QUANT, quality), scaled_table(&CHROMA_QUANT, quality)];
    let dc_tables = [
        HuffTable::new(&LUMA_DC_BITS, &DC_VALUES),
        HuffTable::new(&CHROMA_DC_BITS, &DC_VALUES),
    ];
    let ac_tables = [
        HuffTable::new(&LUMA_AC_BITS, &LUMA_AC_VALUES),
        HuffTable::new(&CHROMA_AC_BITS, &CHROMA_AC_VALUES),
    ];
    let components: Vec<Component> = if color {
        vec![
            Component {
                id: 1,
                sampling: 0x22,
                quant_id: 0,
                huff_id: 0,
            },
            Component {
                id: 2,
                sampling: 0x11,
                quant_id: 1,
                huff_id: 1,
            },
            Component {
                id: 3,
                sampling: 0x11,
                quant_id: 1,
                huff_id: 1,
            },
        ]
    } else {
        vec![Component {
            id: 1,
            sampling: 0x11,
            quant_id: 0,
            huff_id: 0,
        }]
    };

    let mut out = vec![0xFF, 0xD8];
    push_segment(&mut out, 0xE0, b"JFIF\0\x01\x01\x00\x00\x01\x00\x01\x00\x00");
    let mut dqt = Vec::new();
    for (id, table) in tables.iter().enumerate().take(if color { 2 } else { 1 }) {
        dqt.push(id as u8);
        dqt.extend(ZIGZAG.iter().map(|&nat| table[nat] as u8));
    }
    push_segment(&mut out, 0xDB, &dqt);
    let mut sof = vec![8];
    sof.extend_from_slice(&(h as u16).to_be_bytes());
    sof.extend_from_slice(&(w as u16).to_be_bytes());
    sof.push(components.len() as u8);
    for c in &components {
        sof.extend_from_slice(&[c.id, c.sampling, c.quant_id]);
    }
    push_segment(&mut out, 0xC0, &sof);
    let mut dht = Vec::new();
    for id in 0..if color { 2 } else { 1 } {
        for (class, t) in [(0u8, &dc_tables[id]), (1u8, &ac_tables[id])] {
            dht.push(class << 4 | id as u8);
            dht.extend_from_slice(t.bits);
            dht.extend_from_slice(t.values);
        }
    }
    push_segment(&mut out, 0xC4, &dht);
    let mut sos = vec![components.len() as u8];
    for c in &components {
        sos.extend_from_slice(&[c.id, c.huff_id << 4 | c.huff_id]);
    }
    sos.extend_from_slice(&[0, 63, 0]);
    push_segment(&mut out, 0xDA, &sos);

    // Level-shifted component planes, edge-replicated to whole MCUs.
    let mcu = if color { 16 } else { 8 };
    let pw = w.div_ceil(mcu) * mcu;
    let ph = h.div_ceil(mcu) * mcu;
    let sample = |y: usize, x: usize, c: usize| f64::from(img.get(y.min(h - 1), x.min(w - 1), c));
    let mut planes: Vec<Vec<f64>> = vec![vec![0.0; pw * ph]; if color { 3 } else { 1 }];
    for y in 0..ph {
        for x in 0..pw {
            let i = y * pw + x;
            if color {
                let (r, g, b) = (sample(y, x, 0), sample(y, x, 1), sample(y, x, 2));
                planes[0][i] = 0.299 * r + 0.587 * g + 0.114 * b - 128.0;
                planes[1][i] = -0.168_735_892 * r - 0.331_264_108 * g + 0.5 * b;
                planes[2][i] = 0.5 * r - 0.418_687_589 * g - 0.081_312_411 * b;
            } else {
                planes[0][i] = sample(y, x, 0) - 128.0;
            }
        }
    }
    let block_at = |plane: &[f64], stride: usize, by: usize, bx: usize| -> [f64; 64] {
        let mut b = [0.0; 64];
        for y in 0..8 {
            b[y * 8..y * 8 + 8].copy_from_slice(&plane[(by + y) * stride + bx..(by + y) * stride + bx + 8]);
        }
        b
    };
    let subsample = |plane: &[f64], by: usize, bx: usize| -> [f64; 64] {
        let mut b = [0.0; 64];
        for y in 0..8 {
            for x in 0..8 {
                let (sy, sx) = (by + 2 * y, bx + 2 * x);
                b[y * 8 + x] = 0.25
                    * (plane[sy * pw + sx]
                        + plane[sy * pw + sx + 1]
                        + plane[(sy + 1) * pw + sx]
                        + plane[(sy + 1) * pw + sx + 1]);
            }
        }
        b
    };

    let dct = DctBasis::new();
    let mut writer = BitWriter { out, acc: 0, nbits: 0 };
    let mut prev_dc = [0i32; 3];
    for my in (0..ph).step_by(mcu) {
        for mx in (0..pw).step_by(mcu) {
            if color {
                for (dy, dx) in [(0, 0), (0, 8), (8, 0), (8, 8)] {
                    let q = dct.quantize(&block_at(&planes[0], pw, my + dy, mx + dx), &tables[0]);
                    encode_block(&mut writer, &q, &mut prev_dc[0], &dc_tables[0], &ac_tables[0]);
                }
                for c in 1..3 {
                    let q = dct.quantize(&subsample(&planes[c], my, mx), &tables[1]);
                    encode_block(&mut writer, &q, &mut prev_dc[c], &dc_tables[1], &ac_tables[1]);
                }
            } else {
                let q = dct.quantize(&block_at(&planes[0], pw, my, mx), &tables[0]);
                encode_block(&mut writer, &q, &mut prev_dc[0], &dc_tables[0], &ac_tables[0]);
            }
        }
    }
    writer.flush();
    let mut out = writer.out;
    out.extend_from_slice(&[0xFF, 0xD9]);
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn quality_scaling_matches_libjpeg() {
        assert!(scaled_table(&LUMA_QUANT, 100).iter().all(|&v| v == 1));
        assert_eq!(scaled_table(&LUMA_QUANT, 50), LUMA_QUANT);
        // q=70 -> scale 60: 16*60/100 = 9.6 -> 10 with +50 rounding.
        assert_eq!(scaled_table(&LUMA_QUANT, 70)[0], 10);
        // q=10 -> scale 500: 99*5 = 495 clamps to 255.
        assert_eq!(scaled_table(&CHROMA_QUANT, 10)[63], 255);
    }

    #[test]
    fn categories() {
        assert_eq!(category(0), (0, 0));
        assert_eq!(category(1), (1, 1));
        assert_eq!(category(-1), (1, 0));
        assert_eq!(category(-3), (2, 0));
        assert_eq!(category(5), (3, 5));
        assert_eq!(category(-5), (3, 2));
    }

    #[test]
    fn huffman_codes_are_canonical() {
        let t = HuffTable::new(&LUMA_DC_BITS, &DC_VALUES);
        assert_eq!(t.codes[0], (0b00, 2));
        assert_eq!(t.codes[1], (0b010, 3));
        assert_eq!(t.codes[5], (0b110, 3));
        assert_eq!(t.codes[11], (0b1_1111_1110, 9));
    }

    #[test]
    fn bitwriter_stuffs_ff() {
        let mut w = BitWriter {
            out: Vec::new(),
            acc: 0,
            nbits: 0,
        };
        w.write(0xFF, 8);
        w.write(0b1, 1);
        w.flush();
        assert_eq!(w.out, vec![0xFF, 0x00, 0xFF, 0x00]);
    }

    #[test]
    fn rejects_out_of_range_quality() {
        let img = RasterImage::filled(8, 8, &[1, 2, 3]).unwrap();
        assert!(jpeg_encode(&img, 0).is_err());
        assert!(jpeg_encode(&img, 101).is_err());
    }
}
