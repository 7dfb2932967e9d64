#![no_main]

use libfuzzer_sys::fuzz_target;

// alphabet, list a, list b: a found conjugator must re-verify
fuzz_target!(|data: &[u8]| {
    hadamard_cli::decode::conjugacy_lists(data);
});
