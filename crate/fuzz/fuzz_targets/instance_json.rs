#![no_main]

use cdcl_stream::generate::Instance;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    // encoding is only attempted on small instances to keep runs fast
    if let Ok(inst) = Instance::from_json(text) {
        assert_eq!(Instance::from_json(&inst.to_json()).unwrap(), inst);
        if text.len() < 512 {
            let _ = inst.encode();
        }
    }
});
