#![no_main]

use hrt_core::tree;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    if let Ok(model) = tree::load(text) {
        let saved = tree::save(&model);
        let again = tree::load(&saved).expect("saved model reloads");
        assert_eq!(again.root, model.root);
        assert_eq!(tree::save(&again), saved);
        let x = vec![0.5; model.dim];
        let _ = model.predict(&x);
    }
});
