#![no_main]

use libfuzzer_sys::fuzz_target;
use paired_spectra::harness::csvio::{read_eigen_rows, write_eigen_rows};

fuzz_target!(|data: &[u8]| {
    if let Ok(rows) = read_eigen_rows(data) {
        let mut buf = Vec::new();
        write_eigen_rows(&mut buf, &rows).unwrap();
        assert_eq!(read_eigen_rows(buf.as_slice()).unwrap(), rows);
    }
});
