#![no_main]

use hrt_core::datasets::{CsvTable, TargetColumn};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Some((&flags, rest)) = data.split_first() else {
        return;
    };
    let Ok(text) = std::str::from_utf8(rest) else {
        return;
    };
    if let Ok(table) = CsvTable::parse(text, flags & 1 == 1) {
        let _ = table.into_design(&TargetColumn::Index(usize::from(flags >> 1)));
    }
});
