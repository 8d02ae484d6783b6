//! SNR to bit-error-rate link model.
//!
//! The secondary link is scored per slot by the Gaussian tail of coherent
//! binary signaling: at a signal-to-noise ratio of `s` dB the bit error rate
//! is `Q(sqrt(2 * 10^(s/10)))`, which is `erfc(sqrt(10^(s/10))) / 2` through
//! the complementary error function. The BER never drives throughput (a slot
//! delivers its payload all or nothing); it is the graded response value fed
//! to the Q-model classifier, so only its range [0, 0.5] and monotonicity
//! matter downstream.

use rand::Rng;

use crate::scalar::{cast, Real};

/// Bit error rate at the given SNR: `erfc(sqrt(10^(snr_db/10))) / 2`.
///
/// Strictly decreasing in `snr_db`, approaching 0.5 as the SNR falls and 0 as
/// it rises. Evaluated at double precision regardless of the working scalar.
pub fn ber_from_snr_db<T: Real>(snr_db: T) -> T {
    let snr = snr_db.to_f64().expect("finite SNR");
    let gamma = 10f64.powf(snr / 10.0);
    cast::<T>(0.5 * libm::erfc(gamma.sqrt()))
}

/// Fold the per-bit energy into the configured SNR: adds
/// `10 * log10(energy_per_bit)` dB, a pass-through at 1 J.
pub fn effective_snr_db<T: Real>(snr_db: T, energy_per_bit: T) -> T {
    let energy = energy_per_bit.to_f64().expect("finite energy");
    snr_db + cast::<T>(10.0 * energy.log10())
}

/// Draw one slot's SNR uniformly from `[lo, hi]` dB. The uniform variate is
/// drawn at double precision for cross-scalar stream identity.
pub fn draw_snr_db<T: Real, R: Rng + ?Sized>(range: (T, T), rng: &mut R) -> T {
    let (lo, hi) = range;
    lo + (hi - lo) * cast::<T>(rng.random::<f64>())
}
