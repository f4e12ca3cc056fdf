#![no_main]

use cdcl_stream::encode::pup::{encode_pup, PupInstance};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(inst) = PupInstance::from_json(text) {
        if text.len() < 512 {
            let p = encode_pup(&inst);
            assert!(p.clauses.iter().all(|c| c.max_atom() <= p.atom_count));
        }
    }
});
