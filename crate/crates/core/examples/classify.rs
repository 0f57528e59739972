//! Scores sentences with the bundled lexicon, and Playground's elaborations
//! with the oracle.

use normshape::prior::{Lexicon, NormativePrior, Oracle, OracleConfig};
use normshape::worlds::{scenario, Scenario};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut lexicon = Lexicon::bundled();
    let sentences: Vec<String> = match std::env::args().nth(1) {
        Some(s) => vec![s],
        None => vec![
            "Politely help your teammates clean up.".into(),
            "Rudely interrupt the speaker.".into(),
            "Walk to the meeting room.".into(),
        ],
    };
    for s in &sentences {
        let v = lexicon.classify(s)?;
        println!("lexicon {:+.2} {:+.2}  p_norm {:.3}  {s}", v.l_norm, v.l_nonnorm, v.p_norm());
    }

    let bundle = scenario(Scenario::Playground);
    let mut oracle = Oracle::new(&bundle, OracleConfig::default())?;
    for (a, _, phrase) in bundle.all_phrases().filter(|(_, k, _)| *k == 0) {
        let v = oracle.classify(phrase)?;
        println!("oracle  score {:+.1}  {:<20} {phrase}", v.score(), bundle.spec.actions[a].id);
    }
    Ok(())
}
