#![no_main]

use libfuzzer_sys::fuzz_target;

// alphabet spec on the first line, then a comma-separated word list
fuzz_target!(|data: &[u8]| {
    hadamard_cli::decode::word_list(data);
});
