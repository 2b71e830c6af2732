#![allow(dead_code)]

use mmhate::corpus::{Source, TweetRecord, UnifiedLabel};
use mmhate::encoders::StubProvider;
use mmhate::fusion::xent_loss;
use mmhate::hategraph::HateAccountSet;
use mmhate::model::ModalityMask;
use mmhate::model::{FeatureSource, GraphArtifacts, HateModel, ModelConfig, ModelInput};
use mmhate::nn::{Tape, Var};
use proptest::prelude::*;
use rand::seq::IndexedRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub mod oracles;

pub const WORDS: &[&str] = &[
    "zop", "ka", "mirel", "tuvo", "be", "snarq", "el", "dorin", "q",
];

pub fn toy_config() -> ModelConfig {
    ModelConfig {
        word_dim: 6,
        char_dim: 4,
        hidden_dim: 6,
        cultural_dim: 4,
        social_dim: 4,
        social_hidden: 5,
        attn_dim: 4,
        fused_dim: 6,
        max_words: 6,
        min_word_count: 1,
    }
}

pub struct Toy {
    pub model: HateModel,
    pub inputs: Vec<ModelInput>,
    pub labels: Vec<usize>,
}

fn sentence(rng: &mut ChaCha8Rng, max_len: usize) -> String {
    let n = rng.random_range(1..=max_len);
    (0..n)
        .map(|_| {
            if rng.random_bool(0.15) {
                // unseen word exercises the OOV rows
                "xyzzy".to_string()
            } else {
                WORDS.choose(rng).unwrap().to_string()
            }
        })
        .collect::<Vec<_>>()
        .join(" ")
}

/// Random toy model and `n` random inputs with sequence length at most 6.
pub fn toy(seed: u64, text_only: bool, n: usize) -> Toy {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let vocab_texts: Vec<TweetRecord> = (0..8)
        .map(|i| {
            record(
                &format!("v{i}"),
                &sentence(&mut rng, 6),
                "u0",
                UnifiedLabel::None,
            )
        })
        .collect();
    let accounts: Vec<String> = (0..5).map(|i| format!("h{i}")).collect();
    let hate = HateAccountSet::from_ordered(accounts.clone()).unwrap();
    let mut edges = Vec::new();
    for a in 0..4 {
        for h in &accounts {
            if rng.random_bool(0.4) {
                edges.push((format!("u{a}"), h.clone()));
            }
        }
    }
    let graph = GraphArtifacts::new(hate, &edges);
    let provider = StubProvider::new(4, seed);
    let src = FeatureSource {
        graph: &graph,
        provider: &provider,
    };
    let mut model = HateModel::for_records(toy_config(), &vocab_texts, 5, text_only, seed).unwrap();
    // nonzero biases so every parameter carries gradient signal
    let ids: Vec<_> = model.params.ids().collect();
    for id in ids {
        for x in model.params.get_mut(id).data.iter_mut() {
            if *x == 0.0 {
                *x = rng.random_range(-0.3..0.3);
            }
        }
    }
    let mut inputs = Vec::new();
    let mut labels = Vec::new();
    for i in 0..n {
        let author = format!("u{}", rng.random_range(0..5));
        let r = record(
            &format!("t{i}"),
            &sentence(&mut rng, 6),
            &author,
            UnifiedLabel::Hate,
        );
        inputs.push(model.prepare(&r, src).unwrap());
        labels.push(rng.random_range(0..3));
    }
    Toy {
        model,
        inputs,
        labels,
    }
}

pub fn record(id: &str, text: &str, author: &str, label: UnifiedLabel) -> TweetRecord {
    TweetRecord {
        id: id.into(),
        text: text.into(),
        author_id: author.into(),
        label,
        source: Source::Synthetic,
    }
}

/// `|a − n| / max(|a|, |n|, 1e-6)`.
pub fn relative_error(analytic: f64, numeric: f64) -> f64 {
    (analytic - numeric).abs() / analytic.abs().max(numeric.abs()).max(1e-6)
}

fn loss(model: &HateModel, input: &ModelInput, label: usize) -> f64 {
    xent_loss(&model.predict(input).unwrap().probs, label)
}

/// Largest relative error between backprop and central differences over
/// every parameter scalar, for the loss of one example.
pub fn max_gradient_error(toy: &mut Toy, example: usize, h: f64) -> (f64, String) {
    let input = toy.inputs[example].clone();
    let label = toy.labels[example];
    let mut grads = toy.model.params.zeros_like();
    toy.model
        .accumulate_gradient(&input, label, 1.0, &mut grads)
        .unwrap();
    let mut worst = (0.0, String::new());
    let ids: Vec<_> = toy.model.params.ids().collect();
    for id in ids {
        for i in 0..toy.model.params.get(id).len() {
            let orig = toy.model.params.get(id).data[i];
            toy.model.params.get_mut(id).data[i] = orig + h;
            let up = loss(&toy.model, &input, label);
            toy.model.params.get_mut(id).data[i] = orig - h;
            let down = loss(&toy.model, &input, label);
            toy.model.params.get_mut(id).data[i] = orig;
            let numeric = (up - down) / (2.0 * h);
            let analytic = grads.get(id).data[i];
            let e = relative_error(analytic, numeric);
            if e > worst.0 {
                worst = (
                    e,
                    format!(
                        "{}[{i}]: analytic {analytic:e}, numeric {numeric:e}",
                        toy.model.params.name(id)
                    ),
                );
            }
        }
    }
    worst
}

/// Small end-to-end configuration for the command-line pipeline.
pub const SMALL_RUN_TOML: &str = r#"
seed = 3

[synth]
n_tweets = 1000
vocab_size = 120
n_accounts = 60
tweets_per_author = 4

[model]
word_dim = 16
char_dim = 8
hidden_dim = 16
cultural_dim = 8
social_dim = 8
social_hidden = 8
attn_dim = 8
fused_dim = 16

[train]
epochs = 15
learning_rate = 0.003
early_stop_patience = 15

[linear]
epochs = 10

[analysis]
k_clusters = 3
"#;

pub fn mmhate(out: &std::path::Path, config: &std::path::Path, args: &[&str]) {
    let status = std::process::Command::new(env!("CARGO_BIN_EXE_mmhate"))
        .args(args)
        .arg("--out")
        .arg(out)
        .arg("--config")
        .arg(config)
        .stdout(std::process::Stdio::null())
        .status()
        .unwrap();
    assert!(status.success(), "mmhate {args:?} failed: {status}");
}

/// Run synth → graph → train → eval → cluster for both variants, then the
/// report, in a fresh directory. Returns every metric, cluster and report
/// file by name.
pub fn cli_pipeline(dir: &std::path::Path) -> std::collections::BTreeMap<String, Vec<u8>> {
    let config = dir.join("run.toml");
    std::fs::write(&config, SMALL_RUN_TOML).unwrap();
    let out = dir.join("run");
    mmhate(&out, &config, &["synth"]);
    mmhate(&out, &config, &["graph"]);
    for extra in [&[][..], &["--text-only"][..]] {
        for cmd in ["train", "eval", "cluster"] {
            let mut args = vec![cmd];
            args.extend_from_slice(extra);
            mmhate(&out, &config, &args);
        }
    }
    mmhate(&out, &config, &["report"]);
    std::fs::read_dir(&out)
        .unwrap()
        .map(|e| e.unwrap().file_name().into_string().unwrap())
        .filter(|n| {
            ["metrics-", "clusters-", "purity-", "report."]
                .iter()
                .any(|p| n.starts_with(p))
        })
        .map(|n| {
            let bytes = std::fs::read(out.join(&n)).unwrap();
            (n, bytes)
        })
        .collect()
}

const TOL: f64 = 1e-6;

fn check_simplex(tape: &Tape, v: Var, what: &str) -> Result<(), TestCaseError> {
    let xs = &tape.value(v).data;
    prop_assert!(!xs.is_empty(), "{what} is empty");
    prop_assert!(
        xs.iter().all(|x| x.is_finite() && *x >= 0.0),
        "{what} has a negative entry: {xs:?}"
    );
    let s: f64 = xs.iter().sum();
    prop_assert!((s - 1.0).abs() <= TOL, "{what} sums to {s}");
    Ok(())
}

pub fn masks() -> impl Strategy<Value = ModalityMask> {
    (any::<bool>(), any::<bool>()).prop_map(|(c, s)| ModalityMask {
        drop_cultural: c,
        drop_social: s,
    })
}

/// Build a random toy model with weights scaled by `scale` and check that
/// every softmax output of every forward pass is a distribution.
pub fn check_distributions(
    seed: u64,
    text_only: bool,
    mask: ModalityMask,
    scale: f64,
) -> Result<(), TestCaseError> {
    let mut t = toy(seed, text_only, 4);
    // large weights push softmax towards saturation
    let ids: Vec<_> = t.model.params.ids().collect();
    for id in ids {
        for x in t.model.params.get_mut(id).data.iter_mut() {
            *x *= scale;
        }
    }
    for input in &t.inputs {
        let mut tape = Tape::new(&t.model.params);
        let vars = t.model.forward(&mut tape, input, mask).unwrap();
        check_simplex(&tape, vars.text.alpha, "alpha")?;
        check_simplex(&tape, vars.fusion.beta, "beta")?;
        check_simplex(&tape, vars.fusion.probs, "probs")?;
        for ctx in &vars.text.chars {
            check_simplex(&tape, ctx.inside_weights, "inside char weights")?;
            if let Some(w) = ctx.outside_weights {
                check_simplex(&tape, w, "outside char weights")?;
            }
        }
        let p = t.model.predict_masked(input, mask).unwrap();
        for (name, xs) in [("alpha", &p.alpha), ("beta", &p.beta), ("probs", &p.probs)] {
            prop_assert!(xs.iter().all(|x| *x >= 0.0), "{name}");
            prop_assert!((xs.iter().sum::<f64>() - 1.0).abs() <= TOL, "{name}");
        }
        prop_assert_eq!(
            p.alpha.len(),
            input.tokens.len().min(t.model.config.max_words).max(1)
        );
        if text_only {
            prop_assert_eq!(&p.beta, &vec![1.0, 0.0, 0.0]);
        }
    }
    Ok(())
}
