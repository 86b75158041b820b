#![no_main]

use hrt_core::StepPolicy;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    if let Ok(step) = text.parse::<StepPolicy>() {
        assert!(step.validate().is_ok());
        assert_eq!(step.to_string().parse::<StepPolicy>(), Ok(step));
    }
});
