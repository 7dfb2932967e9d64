#![no_main]

use libfuzzer_sys::fuzz_target;

// tree files must decode, re-encode and compare equal
fuzz_target!(|data: &[u8]| {
    hadamard_cli::decode::tree_json(data);
});
