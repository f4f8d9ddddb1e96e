#![no_main]

use libfuzzer_sys::fuzz_target;
use paired_spectra::harness::csvio::read_boundary;

fuzz_target!(|data: &[u8]| {
    let _ = read_boundary(data);
});
