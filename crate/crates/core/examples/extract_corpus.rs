//! Extract call sequences from an inline Java file, then split them into subtokens.

use callrank::corpus::{extract_sequences, TokenizerConfig};

const SOURCE: &str = r#"
package demo;

public class FileSize {
    public long size(File f) throws IOException {
        if (!f.isFile()) {
            throw new IllegalArgumentException(f.toString());
        }
        return f.length();
    }

    void copy(Path from, Path to) {
        try (InputStream in = Files.newInputStream(from)) {
            Files.copy(in, to, StandardCopyOption.REPLACE_EXISTING);
        } catch (IOException e) {
            log.warn("copy failed", e);
        }
    }
}
"#;

fn main() {
    let full = extract_sequences("demo/src/FileSize.java", SOURCE, &TokenizerConfig::default());
    for s in &full.sequences {
        println!("{:<28} {}", s.source_id, s.tokens().collect::<Vec<_>>().join(" "));
    }
    for s in &full.sequences {
        let sub = s.to_subtokens(true, true);
        println!("subtokens: {}", sub.tokens().collect::<Vec<_>>().join(" "));
    }
    let with_new = extract_sequences(
        "demo/src/FileSize.java",
        SOURCE,
        &TokenizerConfig {
            include_constructors: true,
            ..TokenizerConfig::default()
        },
    );
    println!("with constructors: {}", with_new.sequences[0].calls.join(" "));
    for d in &full.diagnostics {
        eprintln!("diagnostic: {d}");
    }
}
