#![no_main]

use libfuzzer_sys::fuzz_target;

use hawkmass::config::{parse_config, render_config};

// The parser must be total (errors, never panics), and any config it
// accepts must survive the render -> reparse round trip unchanged.
fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    if let Ok(config) = parse_config(text) {
        let echoed = render_config(&config);
        let reparsed = parse_config(&echoed).expect("rendered config must reparse");
        assert_eq!(reparsed, config);
    }
});
