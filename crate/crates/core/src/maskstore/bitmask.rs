/// Row-major bit-packed binary mask, MSB first within each byte. Each row
/// starts on a byte boundary; trailing padding bits are always zero.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Bitmask {
    width: u32,
    height: u32,
    bytes: Vec<u8>,
}

impl Bitmask {
    pub fn new(width: u32, height: u32) -> Self {
        let stride = Self::stride_for(width);
        Self { width, height, bytes: vec![0; stride * height as usize] }
    }

    pub fn from_fn(width: u32, height: u32, mut f: impl FnMut(u32, u32) -> bool) -> Self {
        let mut m = Self::new(width, height);
        for y in 0..height {
            for x in 0..width {
                if f(x, y) {
                    m.set(x, y, true);
                }
            }
        }
        m
    }

    pub(crate) fn stride_for(width: u32) -> usize {
        (width as usize).div_ceil(8)
    }

    /// Wraps packed rows. Returns `None` if the length is wrong or a padding
    /// bit is set.
    pub(crate) fn from_packed(width: u32, height: u32, bytes: Vec<u8>) -> Option<Self> {
        let stride = Self::stride_for(width);
        if bytes.len() != stride * height as usize {
            return None;
        }
        let pad = (stride * 8 - width as usize) as u32;
        if pad > 0 {
            let pad_mask = (1u8 << pad) - 1;
            if bytes.chunks(stride).any(|row| row[stride - 1] & pad_mask != 0) {
                return None;
            }
        }
        Some(Self { width, height, bytes })
    }

    pub fn width(&self) -> u32 {
        self.width
    }

    pub fn height(&self) -> u32 {
        self.height
    }

    pub fn stride(&self) -> usize {
        Self::stride_for(self.width)
    }

    pub fn as_bytes(&self) -> &[u8] {
        &self.bytes
    }

    #[inline]
    pub fn get(&self, x: u32, y: u32) -> bool {
        let byte = self.bytes[y as usize * self.stride() + (x / 8) as usize];
        byte & (0x80 >> (x % 8)) != 0
    }

    pub fn set(&mut self, x: u32, y: u32, value: bool) {
        let stride = self.stride();
        let byte = &mut self.bytes[y as usize * stride + (x / 8) as usize];
        let bit = 0x80 >> (x % 8);
        if value {
            *byte |= bit;
        } else {
            *byte &= !bit;
        }
    }

    pub fn count_ones(&self) -> u32 {
        self.bytes.iter().map(|b| b.count_ones()).sum()
    }

    /// Calls `f(x, y)` for every set pixel in row-major order.
    pub fn for_each_set(&self, mut f: impl FnMut(u32, u32)) {
        let stride = self.stride();
        for (y, row) in self.bytes.chunks(stride).enumerate() {
            for (bx, &byte) in row.iter().enumerate() {
                if byte == 0 {
                    continue;
                }
                for bit in 0..8 {
                    if byte & (0x80 >> bit) != 0 {
                        f(bx as u32 * 8 + bit, y as u32);
                    }
                }
            }
        }
    }

    /// Arithmetic mean of set pixel centers, or `None` when empty.
    pub fn centroid(&self) -> Option<(f64, f64)> {
        let (mut sx, mut sy, mut n) = (0.0, 0.0, 0u64);
        self.for_each_set(|x, y| {
            sx += f64::from(x) + 0.5;
            sy += f64::from(y) + 0.5;
            n += 1;
        });
        (n > 0).then(|| (sx / n as f64, sy / n as f64))
    }

    /// True if any set pixel center lies within `radius` pixels (Euclidean)
    /// of pixel `(x, y)`; the disc-dilated membership test.
    pub fn within(&self, x: u32, y: u32, radius: u32) -> bool {
        let r = i64::from(radius);
        let (cx, cy) = (i64::from(x), i64::from(y));
        let y0 = (cy - r).max(0);
        let y1 = (cy + r).min(i64::from(self.height) - 1);
        for py in y0..=y1 {
            let dy = py - cy;
            let span = ((r * r - dy * dy) as f64).sqrt().floor() as i64;
            let x0 = (cx - span).max(0);
            let x1 = (cx + span).min(i64::from(self.width) - 1);
            for px in x0..=x1 {
                if self.get(px as u32, py as u32) {
                    return true;
                }
            }
        }
        false
    }
}
