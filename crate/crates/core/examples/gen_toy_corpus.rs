//! Regenerate `data/toy_corpus.jsonl`:
//!
//! ```text
//! cargo run -p absa-core --example gen_toy_corpus > crates/core/data/toy_corpus.jsonl
//! ```

use std::io::{self, BufWriter};

use absa_core::corpus::write_corpus;
use absa_core::io::write_header;
use absa_core::toy::{generate, TOY_REVIEWS, TOY_SEED};
use serde_json::json;

fn main() -> absa_core::Result<()> {
    let mut out = BufWriter::new(io::stdout().lock());
    write_header(
        &mut out,
        &json!({"generator": "gen_toy_corpus", "reviews": TOY_REVIEWS, "seed": TOY_SEED}),
    )?;
    write_corpus(&mut out, &generate(TOY_REVIEWS, TOY_SEED))
}
