#![no_main]

use libfuzzer_sys::fuzz_target;
use logdecay::config::parse_t_grid;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(grid) = parse_t_grid(text) {
        assert!(!grid.is_empty());
        assert!(grid.iter().all(|t| t.is_finite() && *t > 0.0));
        assert!(grid.windows(2).all(|w| w[1] > w[0]));
    }
});
