use std::fmt;

/// Fixed-width sign vector identifying one full-dimensional region of an
/// arrangement: bit `i` = 1 when the region lies on the positive side of the
/// oriented functional `i`. Multi-word storage, so the hyperplane count is
/// bounded only by memory.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct RegionEncoding {
    len: usize,
    /// Little-endian words: bit `i` lives in `words[i / 64]` at `i % 64`.
    words: Vec<u64>,
}

impl RegionEncoding {
    pub fn all_ones(len: usize) -> Self {
        let mut words = vec![u64::MAX; len.div_ceil(64)];
        if !len.is_multiple_of(64) {
            if let Some(last) = words.last_mut() {
                *last = (1u64 << (len % 64)) - 1;
            }
        }
        if len == 0 {
            words.clear();
        }
        RegionEncoding { len, words }
    }

    pub fn all_zeros(len: usize) -> Self {
        RegionEncoding {
            len,
            words: vec![0; len.div_ceil(64)],
        }
    }

    pub fn from_bits(bits: &[bool]) -> Self {
        let mut enc = Self::all_zeros(bits.len());
        for (i, &b) in bits.iter().enumerate() {
            if b {
                enc.set_bit(i, true);
            }
        }
        enc
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn bit(&self, i: usize) -> bool {
        debug_assert!(i < self.len);
        self.words[i / 64] >> (i % 64) & 1 == 1
    }

    pub fn set_bit(&mut self, i: usize, value: bool) {
        debug_assert!(i < self.len);
        if value {
            self.words[i / 64] |= 1u64 << (i % 64);
        } else {
            self.words[i / 64] &= !(1u64 << (i % 64));
        }
    }

    pub fn with_bit_cleared(&self, i: usize) -> Self {
        let mut out = self.clone();
        out.set_bit(i, false);
        out
    }

    pub fn with_bit_flipped(&self, i: usize) -> Self {
        let mut out = self.clone();
        out.set_bit(i, !self.bit(i));
        out
    }

    /// Poset rank: the number of sign flips away from the base region, i.e.
    /// the count of zero bits.
    pub fn rank(&self) -> usize {
        self.len - self.words.iter().map(|w| w.count_ones() as usize).sum::<usize>()
    }

    /// Bitwise complement (the centrally-opposite sign vector).
    pub fn complement(&self) -> Self {
        let mut out = Self::all_ones(self.len);
        for (o, w) in out.words.iter_mut().zip(self.words.iter()) {
            *o &= !w;
        }
        out
    }

    pub fn iter_bits(&self) -> impl Iterator<Item = bool> + '_ {
        (0..self.len).map(move |i| self.bit(i))
    }

    /// Hex digest, most significant nibble first, `ceil(len/4)` digits.
    pub fn to_hex(&self) -> String {
        if self.len == 0 {
            return String::new();
        }
        let nibbles = self.len.div_ceil(4);
        let mut out = String::with_capacity(nibbles);
        for k in (0..nibbles).rev() {
            let mut nib = 0u8;
            for b in 0..4 {
                let i = k * 4 + b;
                if i < self.len && self.bit(i) {
                    nib |= 1 << b;
                }
            }
            out.push(char::from_digit(nib as u32, 16).unwrap());
        }
        out
    }
}

impl Ord for RegionEncoding {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.len
            .cmp(&other.len)
            .then_with(|| self.words.iter().rev().cmp(other.words.iter().rev()))
    }
}

impl PartialOrd for RegionEncoding {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Debug for RegionEncoding {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        // Bit 0 printed leftmost to match functional order.
        let bits: String = self.iter_bits().map(|b| if b { '1' } else { '0' }).collect();
        write!(f, "RegionEncoding({bits})")
    }
}
