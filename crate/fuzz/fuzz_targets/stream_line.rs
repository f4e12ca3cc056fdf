#![no_main]

use cdcl_stream::stream::parse_delta_line;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(delta) = parse_delta_line(text, 1) {
        let again = parse_delta_line(&delta.to_line(), 1).expect("serialized delta parses");
        assert_eq!(again, delta);
    }
});
