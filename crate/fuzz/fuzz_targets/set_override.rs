#![no_main]

use libfuzzer_sys::fuzz_target;
use squeeze_qnd_cli::config::RunConfig;

fuzz_target!(|data: &[u8]| {
    let Ok(spec) = std::str::from_utf8(data) else {
        return;
    };
    let mut cfg = RunConfig::parse_str("r = 0.9\nseed = 1\n").expect("static config parses");
    let _ = cfg.apply_override(spec);
    // config must stay usable whether or not the override applied
    let mut r = cfg.resolver();
    let _ = r.f64_or("r", 0.9);
    let _ = r.u64_or("seed", 1);
    let _ = r.finish("fuzz");
});
