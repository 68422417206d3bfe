use num_complex::Complex64;
use std::f64::consts::TAU;

/// Fractional part of `freq * index` in cycles, folded into `[-0.5, 0.5)`.
///
/// The product is split into a rounded head and an exact FMA tail so the
/// reduction stays accurate to ~1e-16 cycles even for indices in the millions.
#[inline]
pub(crate) fn reduced_cycles(freq: f64, index: i64) -> f64 {
    let k = index as f64;
    let hi = freq * k;
    let lo = freq.mul_add(k, -hi);
    let c = (hi - hi.floor()) + lo;
    c - (c + 0.5).floor()
}

/// `exp(-j 2 pi freq index)` with exact argument reduction.
#[inline]
pub(crate) fn rotor(freq: f64, index: i64) -> Complex64 {
    Complex64::cis(-TAU * reduced_cycles(freq, index))
}

/// `exp(+j (2 pi freq index + offset))` with exact argument reduction.
#[inline]
pub(crate) fn oscillator(freq: f64, index: i64, offset: f64) -> Complex64 {
    Complex64::cis(TAU * reduced_cycles(freq, index) + offset)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reduction_is_exact_for_large_indices() {
        let f = 0.125;
        assert_eq!(reduced_cycles(f, 8_000_003), 0.375);
        assert_eq!(reduced_cycles(f, -4), -0.5);
        assert_eq!(reduced_cycles(f, 4), -0.5);
        let c = reduced_cycles(0.3, 1 << 40);
        assert!((-0.5..0.5).contains(&c));
    }

    #[test]
    fn rotor_matches_naive_for_small_arguments() {
        for n in -50..50 {
            let a = rotor(0.0371, n);
            let b = Complex64::cis(-TAU * 0.0371 * n as f64);
            assert!((a - b).norm() < 1e-13);
        }
    }
}
