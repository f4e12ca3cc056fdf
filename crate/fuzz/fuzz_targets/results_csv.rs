#![no_main]

use cdcl_stream::harness::{read_results, summarize, write_results};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    if let Ok(rows) = read_results(data) {
        let mut buf = Vec::new();
        write_results(&rows, &mut buf).unwrap();
        assert_eq!(read_results(buf.as_slice()).unwrap().len(), rows.len());
        if let Ok(s) = summarize(&rows) {
            assert!(s.rows.iter().all(|r| r.wall_ms.q1 <= r.wall_ms.median && r.wall_ms.median <= r.wall_ms.q3));
        }
    }
});
