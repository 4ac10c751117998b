#![no_main]

use libfuzzer_sys::fuzz_target;
use squeeze_qnd_cli::config::RunConfig;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    let Ok(cfg) = RunConfig::parse_str(text) else {
        return;
    };
    // typed resolution over whatever parsed must never panic
    let mut r = cfg.resolver();
    let _ = r.f64_or("r", 0.9);
    let _ = r.u64_or("trials", 1);
    let _ = r.usize_opt("n_max");
    let _ = r.bool_or("noise_enabled", true);
    let _ = r.str_or("units", "normalized");
    let _ = r.finish("fuzz");
});
