#![no_main]

use cdcl_stream::stream::{read_stream, write_stream};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    if let Ok(deltas) = read_stream(data) {
        let mut buf = Vec::new();
        write_stream(&deltas, &mut buf).unwrap();
        assert_eq!(read_stream(buf.as_slice()).expect("written stream reads back"), deltas);
    }
});
