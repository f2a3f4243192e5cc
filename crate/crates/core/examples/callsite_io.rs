//! Synthesize call-site records with naive candidates and round-trip them through JSONL.

use callrank::candidates::{read_callsites_from, synthesize_call_sites, write_callsites_to, NaiveCandidates};
use callrank::corpus::FunctionSequence;

fn seq(file: &str, name: &str, calls: &[&str]) -> FunctionSequence {
    FunctionSequence::new(file, name, calls.iter().map(|c| c.to_string()).collect())
}

fn main() -> callrank::Result<()> {
    let held_out = vec![
        seq("app/src/FileSize.java", "size", &["isFile", "toString", "length"]),
        seq("app/src/FileSize.java", "exists", &["isFile"]),
        seq("lib/src/Io.java", "copy", &["newInputStream", "copy", "close"]),
    ];
    let set = synthesize_call_sites(&held_out, &NaiveCandidates::from_sequences(&held_out));
    println!("{} sites, candidates from: {}", set.len(), set.source_label);

    let mut buf = Vec::new();
    write_callsites_to(&mut buf, &set.records)?;
    print!("{}", String::from_utf8_lossy(&buf));
    let back = read_callsites_from(buf.as_slice())?;
    assert_eq!(back, set.records);
    Ok(())
}
