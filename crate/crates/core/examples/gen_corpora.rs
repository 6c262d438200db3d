//! Regenerates the bundled mini-corpora under `data/corpora/`.
//!
//! cargo run -p speller-core --example gen_corpora

use std::io::Write;
use std::path::Path;

use speller_core::insilico::synth::{generate_corpus, CorpusStyle};

fn main() -> std::io::Result<()> {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("data/corpora");
    for (i, style) in CorpusStyle::ALL.into_iter().enumerate() {
        let path = dir.join(format!("{style}.txt"));
        let mut f = std::io::BufWriter::new(std::fs::File::create(&path)?);
        for line in generate_corpus(style, 2000, 2024 + i as u64) {
            writeln!(f, "{line}")?;
        }
        f.flush()?;
        println!("wrote {}", path.display());
    }
    Ok(())
}
