//! Branchless lane-parallel update.
//!
//! Each iteration loads `W` adjacent cells plus their neighbors and builds
//! per-lane masks that are all-ones or all-zeros. The new state is
//! `(move_in & VEHICLE) | (move_out & EMPTY) | (keep & center)`, the
//! select-by-mask form of the scalar rule. Loads and stores are unaligned.
//! Cells left over at the end of a row (`n mod W`) go through the scalar rule.

use super::{horizontal_byte, vertical_byte, Phase};
use crate::grid::{EMPTY, LR, TB};

/// Lane implementation used by [`super::Backend::Lanes`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum LaneKernel {
    /// 32 lanes, x86-64 with AVX2 (runtime detected).
    Avx2,
    /// 16 lanes, x86-64 baseline.
    Sse2,
    /// 16 lanes emulated with two 64-bit words. Available everywhere.
    Swar,
}

impl LaneKernel {
    /// Widest kernel the running CPU supports.
    pub fn detect() -> LaneKernel {
        #[cfg(target_arch = "x86_64")]
        {
            if std::is_x86_feature_detected!("avx2") {
                return LaneKernel::Avx2;
            }
            LaneKernel::Sse2
        }
        #[cfg(not(target_arch = "x86_64"))]
        LaneKernel::Swar
    }

    pub fn is_supported(self) -> bool {
        match self {
            LaneKernel::Swar => true,
            #[cfg(target_arch = "x86_64")]
            LaneKernel::Sse2 => true,
            #[cfg(target_arch = "x86_64")]
            LaneKernel::Avx2 => std::is_x86_feature_detected!("avx2"),
            #[cfg(not(target_arch = "x86_64"))]
            _ => false,
        }
    }

    /// Cells per inner-loop iteration.
    pub fn width(self) -> usize {
        match self {
            LaneKernel::Avx2 => 32,
            LaneKernel::Sse2 | LaneKernel::Swar => 16,
        }
    }

    /// All kernels usable on this CPU.
    pub fn available() -> Vec<LaneKernel> {
        [LaneKernel::Avx2, LaneKernel::Sse2, LaneKernel::Swar]
            .into_iter()
            .filter(|k| k.is_supported())
            .collect()
    }
}

/// A register of `WIDTH` byte lanes with lane-wise compare and bitwise ops.
trait LaneVec: Copy {
    const WIDTH: usize;
    /// Safety: `p..p + WIDTH` must be readable.
    unsafe fn load(p: *const u8) -> Self;
    /// Safety: `p..p + WIDTH` must be writable.
    unsafe fn store(self, p: *mut u8);
    fn splat(b: u8) -> Self;
    /// All-ones in lanes where `self == other`, zero elsewhere.
    fn eq(self, other: Self) -> Self;
    fn and(self, other: Self) -> Self;
    fn or(self, other: Self) -> Self;
    fn not(self) -> Self;
}

#[derive(Clone, Copy)]
struct Swar([u64; 2]);

const LOW7: u64 = 0x7f7f_7f7f_7f7f_7f7f;
const HIGH: u64 = 0x8080_8080_8080_8080;

/// 0xff in each byte where `x` is zero. Exact for all byte values.
#[inline(always)]
fn zero_bytes(x: u64) -> u64 {
    let nonzero = (((x & LOW7).wrapping_add(LOW7)) | x) & HIGH;
    ((!nonzero & HIGH) >> 7) * 0xff
}

impl LaneVec for Swar {
    const WIDTH: usize = 16;

    #[inline(always)]
    unsafe fn load(p: *const u8) -> Self {
        let bytes = p.cast::<[u8; 16]>().read_unaligned();
        let (lo, hi) = bytes.split_at(8);
        Swar([
            u64::from_ne_bytes(lo.try_into().unwrap()),
            u64::from_ne_bytes(hi.try_into().unwrap()),
        ])
    }

    #[inline(always)]
    unsafe fn store(self, p: *mut u8) {
        let mut bytes = [0u8; 16];
        bytes[..8].copy_from_slice(&self.0[0].to_ne_bytes());
        bytes[8..].copy_from_slice(&self.0[1].to_ne_bytes());
        p.cast::<[u8; 16]>().write_unaligned(bytes);
    }

    #[inline(always)]
    fn splat(b: u8) -> Self {
        let w = u64::from_ne_bytes([b; 8]);
        Swar([w, w])
    }

    #[inline(always)]
    fn eq(self, o: Self) -> Self {
        Swar([zero_bytes(self.0[0] ^ o.0[0]), zero_bytes(self.0[1] ^ o.0[1])])
    }

    #[inline(always)]
    fn and(self, o: Self) -> Self {
        Swar([self.0[0] & o.0[0], self.0[1] & o.0[1]])
    }

    #[inline(always)]
    fn or(self, o: Self) -> Self {
        Swar([self.0[0] | o.0[0], self.0[1] | o.0[1]])
    }

    #[inline(always)]
    fn not(self) -> Self {
        Swar([!self.0[0], !self.0[1]])
    }
}

#[cfg(target_arch = "x86_64")]
mod x86 {
    use super::LaneVec;
    use std::arch::x86_64::*;

    #[derive(Clone, Copy)]
    pub(super) struct Sse2(__m128i);

    // SSE2 is part of the x86-64 baseline, so these intrinsics are always available.
    impl LaneVec for Sse2 {
        const WIDTH: usize = 16;

        #[inline(always)]
        unsafe fn load(p: *const u8) -> Self {
            Sse2(_mm_loadu_si128(p.cast()))
        }

        #[inline(always)]
        unsafe fn store(self, p: *mut u8) {
            _mm_storeu_si128(p.cast(), self.0)
        }

        #[inline(always)]
        fn splat(b: u8) -> Self {
            unsafe { Sse2(_mm_set1_epi8(b as i8)) }
        }

        #[inline(always)]
        fn eq(self, o: Self) -> Self {
            unsafe { Sse2(_mm_cmpeq_epi8(self.0, o.0)) }
        }

        #[inline(always)]
        fn and(self, o: Self) -> Self {
            unsafe { Sse2(_mm_and_si128(self.0, o.0)) }
        }

        #[inline(always)]
        fn or(self, o: Self) -> Self {
            unsafe { Sse2(_mm_or_si128(self.0, o.0)) }
        }

        #[inline(always)]
        fn not(self) -> Self {
            unsafe { Sse2(_mm_xor_si128(self.0, _mm_set1_epi8(-1))) }
        }
    }

    #[derive(Clone, Copy)]
    pub(super) struct Avx2(__m256i);

    // Only instantiated inside `#[target_feature(enable = "avx2")]` functions
    // after runtime detection.
    impl LaneVec for Avx2 {
        const WIDTH: usize = 32;

        #[inline(always)]
        unsafe fn load(p: *const u8) -> Self {
            Avx2(_mm256_loadu_si256(p.cast()))
        }

        #[inline(always)]
        unsafe fn store(self, p: *mut u8) {
            _mm256_storeu_si256(p.cast(), self.0)
        }

        #[inline(always)]
        fn splat(b: u8) -> Self {
            unsafe { Avx2(_mm256_set1_epi8(b as i8)) }
        }

        #[inline(always)]
        fn eq(self, o: Self) -> Self {
            unsafe { Avx2(_mm256_cmpeq_epi8(self.0, o.0)) }
        }

        #[inline(always)]
        fn and(self, o: Self) -> Self {
            unsafe { Avx2(_mm256_and_si256(self.0, o.0)) }
        }

        #[inline(always)]
        fn or(self, o: Self) -> Self {
            unsafe { Avx2(_mm256_or_si256(self.0, o.0)) }
        }

        #[inline(always)]
        fn not(self) -> Self {
            unsafe { Avx2(_mm256_xor_si256(self.0, _mm256_set1_epi8(-1))) }
        }
    }

    #[target_feature(enable = "avx2")]
    pub(super) unsafe fn band_avx2(
        cur: &[u8],
        band: &mut [u8],
        first: usize,
        n: usize,
        phase: super::Phase,
    ) {
        super::band::<Avx2>(cur, band, first, n, phase)
    }
}

/// `vehicle` enters where `from == vehicle` and `center` is empty; leaves
/// where `center == vehicle` and `to` is empty; otherwise `center` is kept.
#[inline(always)]
fn select<V: LaneVec>(from: V, center: V, to: V, vehicle: V, empty: V) -> V {
    let mask_in = from.eq(vehicle).and(center.eq(empty));
    let mask_out = center.eq(vehicle).and(to.eq(empty));
    let mask_keep = mask_in.or(mask_out).not();
    mask_in
        .and(vehicle)
        .or(mask_out.and(empty))
        .or(mask_keep.and(center))
}

#[inline(always)]
fn band<V: LaneVec>(cur: &[u8], band: &mut [u8], first: usize, n: usize, phase: Phase) {
    let s = n + 2;
    let rows = band.len() / s;
    assert!(band.len() == rows * s && (first + rows + 1) * s <= cur.len() && first >= 1);
    let empty = V::splat(EMPTY);
    for r in 0..rows {
        let i = first + r;
        let out = &mut band[r * s..(r + 1) * s];
        let mut j = 1;
        match phase {
            Phase::Horizontal => {
                let row = &cur[i * s..(i + 1) * s];
                let lr = V::splat(LR);
                // Reads row[j - 1 .. j + W + 1], writes out[j .. j + W].
                while j + V::WIDTH <= n + 1 {
                    unsafe {
                        let left = V::load(row.as_ptr().add(j - 1));
                        let center = V::load(row.as_ptr().add(j));
                        let right = V::load(row.as_ptr().add(j + 1));
                        select(left, center, right, lr, empty).store(out.as_mut_ptr().add(j));
                    }
                    j += V::WIDTH;
                }
                for j in j..=n {
                    out[j] = horizontal_byte(row[j - 1], row[j], row[j + 1]);
                }
            }
            Phase::Vertical => {
                let top = &cur[(i - 1) * s..i * s];
                let mid = &cur[i * s..(i + 1) * s];
                let bottom = &cur[(i + 1) * s..(i + 2) * s];
                let tb = V::splat(TB);
                while j + V::WIDTH <= n + 1 {
                    unsafe {
                        let t = V::load(top.as_ptr().add(j));
                        let c = V::load(mid.as_ptr().add(j));
                        let b = V::load(bottom.as_ptr().add(j));
                        select(t, c, b, tb, empty).store(out.as_mut_ptr().add(j));
                    }
                    j += V::WIDTH;
                }
                for j in j..=n {
                    out[j] = vertical_byte(top[j], mid[j], bottom[j]);
                }
            }
        }
    }
}

pub(super) fn phase_band(
    kernel: LaneKernel,
    cur: &[u8],
    out: &mut [u8],
    first: usize,
    n: usize,
    phase: Phase,
) {
    match kernel {
        LaneKernel::Swar => band::<Swar>(cur, out, first, n, phase),
        #[cfg(target_arch = "x86_64")]
        LaneKernel::Sse2 => band::<x86::Sse2>(cur, out, first, n, phase),
        // Engine construction rejects Avx2 unless the CPU reports it.
        #[cfg(target_arch = "x86_64")]
        LaneKernel::Avx2 => unsafe { x86::band_avx2(cur, out, first, n, phase) },
        #[cfg(not(target_arch = "x86_64"))]
        _ => unreachable!("lane kernel {kernel:?} requires x86-64"),
    }
}
