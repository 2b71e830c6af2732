//! Train the fused model and the text-only ablation on a synthetic corpus
//! and print the comparison grid.
//!
//! cargo run --example train_ablation -- [seed]

use std::time::Instant;

use mmhate::pipeline::{Experiment, RunConfig};

fn main() -> mmhate::Result<()> {
    let seed = std::env::args()
        .nth(1)
        .map_or(0, |s| s.parse().expect("seed must be an integer"));
    let start = Instant::now();
    let exp = Experiment::run(&RunConfig::seeded(seed))?;
    let s = exp.summary();
    println!(
        "{:<10} {:>8} {:>10} {:>10}",
        "model", "f1_hate", "f1_overall", "code_word"
    );
    for row in &s.models {
        let cw = row
            .code_word_f1_hate
            .map_or("-".to_string(), |v| format!("{v:.3}"));
        println!(
            "{:<10} {:>8.3} {:>10.3} {:>10}",
            row.model, row.f1_hate, row.f1_overall, cw
        );
    }
    for p in &s.purity {
        let v = p.purity.map_or("-".to_string(), |v| format!("{v:.3}"));
        println!("purity {:<10} {v} over {} tweets", p.model, p.n);
    }
    println!(
        "beta_social: code-word hate {:.3}, overt hate {:.3}",
        s.beta_social_code_hate, s.beta_social_overt_hate
    );
    println!(
        "attention/occlusion agreement {:.3} over {} tweets",
        s.agreement.mean, s.agreement.used
    );
    println!(
        "epochs: text+sc {} (best {}), text-only {} (best {})",
        exp.text_sc.trained.history.len(),
        exp.text_sc.trained.best_epoch,
        exp.text_only.trained.history.len(),
        exp.text_only.trained.best_epoch
    );
    println!("elapsed {:.1}s", start.elapsed().as_secs_f64());
    Ok(())
}
