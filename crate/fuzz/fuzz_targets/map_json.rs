#![no_main]

use libfuzzer_sys::fuzz_target;

// map files: representation, graph and images
fuzz_target!(|data: &[u8]| {
    hadamard_cli::decode::map_json(data);
});
