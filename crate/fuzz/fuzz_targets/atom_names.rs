#![no_main]

use cdcl_stream::encode::qc::{parse_queen, queen};
use cdcl_stream::generate::Schema;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Some(sq) = parse_queen(text) {
        assert_eq!(parse_queen(&queen(sq.0, sq.1)), Some(sq));
    }
    if let Ok(s) = text.parse::<Schema>() {
        assert_eq!(s.to_string().parse::<Schema>().unwrap(), s);
    }
});
