#![no_main]

use libfuzzer_sys::fuzz_target;

// representation files, including the isometry sampling check
fuzz_target!(|data: &[u8]| {
    hadamard_cli::decode::representation_json(data);
});
