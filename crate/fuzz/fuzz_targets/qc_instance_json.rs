#![no_main]

use cdcl_stream::encode::qc::QcInstanceFile;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(f) = QcInstanceFile::from_json(text) {
        assert_eq!(QcInstanceFile::from_json(&f.to_json()).unwrap(), f);
    }
});
