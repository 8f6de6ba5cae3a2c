#![no_main]

use libfuzzer_sys::fuzz_target;
use oneparticle_cli::ScenarioConfig;

fuzz_target!(|data: &[u8]| {
    if let Ok(text) = std::str::from_utf8(data) {
        if let Ok(cfg) = ScenarioConfig::parse(text) {
            if let Some(grid) = cfg.time {
                if grid.samples <= 4096 {
                    let _ = grid.points();
                }
            }
        }
    }
});
