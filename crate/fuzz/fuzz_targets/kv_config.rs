#![no_main]

use libfuzzer_sys::fuzz_target;
use logdecay::config::{model_from_config, model_to_config, KvConfig};

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    let Ok(cfg) = KvConfig::parse(text) else { return };
    // a parsed file renders to an equivalent file
    let again = KvConfig::parse(&cfg.render()).expect("rendered config parses");
    assert_eq!(again.render(), cfg.render());
    if let Ok(model) = model_from_config(&cfg) {
        let back = model_from_config(&model_to_config(&model)).expect("model config roundtrips");
        assert_eq!(back, model);
    }
});
