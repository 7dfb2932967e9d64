#![no_main]

use libfuzzer_sys::fuzz_target;

// tagged point JSON, checked against three models
fuzz_target!(|data: &[u8]| {
    hadamard_cli::decode::point_json(data);
});
