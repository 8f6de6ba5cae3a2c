#![no_main]

use libfuzzer_sys::fuzz_target;
use oneparticle_cli::{build, ScenarioConfig};

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    let Ok(cfg) = ScenarioConfig::parse(text) else {
        return;
    };
    let Ok(n) = build::mode_count(&cfg) else {
        return;
    };
    // keep allocations bounded
    if n > 16 {
        return;
    }
    let mut rng = build::rng(cfg.seed.unwrap_or(0));
    if let Some(spec) = &cfg.model {
        if spec.decay_count.is_some_and(|k| k > 16) {
            return;
        }
        if let Ok(model) = build::model(spec, n, Some(&mut rng)) {
            let _ = model.validate_window(1.0, 5);
        }
    }
    if let Some(spec) = &cfg.initial {
        if let Ok(s) = build::initial_state(spec, n, Some(&mut rng)) {
            assert!(s.rho00().is_finite());
        }
    }
    let _ = build::moments(&cfg, n);
    let _ = build::partition(&cfg, n);
});
