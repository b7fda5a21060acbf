//! The allowed-factor language, stored as packed length-9 windows.

use crate::complex::{Complex, VertexId};

/// Longest factor the zero rule looks at.
pub const WINDOW: usize = 9;
const BITS: u32 = 14;
/// Largest letter code that fits a packed slot (0 marks an empty slot).
pub const MAX_CODE: u16 = (1 << BITS) - 1;

/// Pack up to `WINDOW` codes left-aligned, so integer order is word order and
/// every extension of a prefix lies in one contiguous range.
pub fn pack(codes: &[u16]) -> u128 {
    debug_assert!(codes.len() <= WINDOW);
    let mut x = 0u128;
    for i in 0..WINDOW {
        x = (x << BITS) | codes.get(i).copied().unwrap_or(0) as u128;
    }
    x
}

pub fn unpack(x: u128) -> Vec<u16> {
    let mask = MAX_CODE as u128;
    (0..WINDOW)
        .map(|i| ((x >> (BITS * (WINDOW - 1 - i) as u32)) & mask) as u16)
        .take_while(|&c| c != 0)
        .collect()
}

fn prefix_range(codes: &[u16]) -> (u128, u128) {
    let lo = pack(codes);
    let free = BITS * (WINDOW - codes.len()) as u32;
    let hi = if free == 0 {
        lo
    } else {
        lo | ((1u128 << free) - 1)
    };
    (lo, hi)
}

/// Every length-9 factor of every walk encoding, sorted. A shorter word is
/// allowed iff it prefixes some window: walks always extend to the right, so
/// this is exactly factor closure.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct AllowedLanguage {
    windows: Vec<u128>,
}

impl AllowedLanguage {
    pub fn from_windows(mut windows: Vec<u128>) -> AllowedLanguage {
        windows.sort_unstable();
        windows.dedup();
        AllowedLanguage { windows }
    }

    pub fn len(&self) -> usize {
        self.windows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.windows.is_empty()
    }

    pub fn windows(&self) -> &[u128] {
        &self.windows
    }

    /// Membership of a word of length at most `WINDOW`.
    pub fn contains(&self, codes: &[u16]) -> bool {
        if codes.len() > WINDOW || codes.contains(&0) {
            return false;
        }
        if codes.is_empty() {
            return !self.windows.is_empty();
        }
        let (lo, hi) = prefix_range(codes);
        let i = self.windows.partition_point(|&w| w < lo);
        i < self.windows.len() && self.windows[i] <= hi
    }

    /// Windows of `other` missing here.
    pub fn missing_from(&self, other: &AllowedLanguage) -> usize {
        other
            .windows
            .iter()
            .filter(|w| self.windows.binary_search(w).is_err())
            .count()
    }

    pub fn union(&self, other: &AllowedLanguage) -> AllowedLanguage {
        let mut w = Vec::with_capacity(self.len() + other.len());
        w.extend_from_slice(&self.windows);
        w.extend_from_slice(&other.windows);
        AllowedLanguage::from_windows(w)
    }
}

/// Codes for one traversal step: (code of Out, code of In, code of target color).
pub(crate) type StepCodes = [u16; 3];

/// Collect every length-9 window of every 4-edge walk on `c`. `color` gives
/// the code of a vertex's color letter; `step` the codes of leaving `from`
/// along its `k`-th neighbor entry.
pub(crate) fn walk_windows(
    c: &Complex,
    color: impl Fn(VertexId) -> u16,
    step: impl Fn(VertexId, usize) -> StepCodes,
) -> AllowedLanguage {
    const FLUSH: usize = 1 << 22;
    let mut buf: Vec<u128> = Vec::new();
    let mut word = [0u16; 13];
    let flush = |buf: &mut Vec<u128>| {
        buf.sort_unstable();
        buf.dedup();
    };
    for v0 in c.vertex_ids() {
        word[0] = color(v0);
        for (k1, &(v1, _)) in c.neighbors(v0).iter().enumerate() {
            word[1..4].copy_from_slice(&step(v0, k1));
            for (k2, &(v2, _)) in c.neighbors(v1).iter().enumerate() {
                word[4..7].copy_from_slice(&step(v1, k2));
                for (k3, &(v3, _)) in c.neighbors(v2).iter().enumerate() {
                    word[7..10].copy_from_slice(&step(v2, k3));
                    buf.push(pack(&word[0..9]));
                    buf.push(pack(&word[1..10]));
                    for k4 in 0..c.neighbors(v3).len() {
                        word[10..13].copy_from_slice(&step(v3, k4));
                        buf.push(pack(&word[2..11]));
                    }
                }
            }
            if buf.len() > FLUSH {
                flush(&mut buf);
            }
        }
    }
    AllowedLanguage::from_windows(buf)
}
