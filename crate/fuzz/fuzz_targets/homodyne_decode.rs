#![no_main]

use libfuzzer_sys::fuzz_target;
use squeeze_qnd::readout::{decode, misidentification_prob, ReadoutConfig};

fn f64_at(data: &[u8], i: usize) -> f64 {
    let mut b = [0u8; 8];
    b.copy_from_slice(&data[i * 8..(i + 1) * 8]);
    f64::from_le_bytes(b)
}

fuzz_target!(|data: &[u8]| {
    if data.len() < 32 {
        return;
    }
    let chi = f64_at(data, 0);
    let g_mag = f64_at(data, 1);
    let tau = f64_at(data, 2);
    let x_value = f64_at(data, 3);
    let Ok(cfg) = ReadoutConfig::new(chi, 1.0, g_mag, tau, true) else {
        return;
    };
    // decode never panics, for any measured value including NaN/inf
    let _ = decode(x_value, &cfg);
    let p = misidentification_prob(&cfg);
    assert!((0.0..=1.0).contains(&p), "tail probability out of range: {p}");
});
