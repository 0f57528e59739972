//! Average and maximum normative probability per action under the bundled
//! lexicon, next to the action's metric label.

use std::collections::BTreeMap;

use normshape::harness::{derive_labels, valence_dump};
use normshape::prior::Lexicon;
use normshape::worlds::{scenario, Scenario};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    for s in Scenario::ALL {
        let bundle = scenario(s);
        let labels = derive_labels(&bundle)?;
        let rows = valence_dump(&bundle, &mut Lexicon::bundled(), &labels)?;
        let mut per_action: BTreeMap<&str, Vec<f64>> = BTreeMap::new();
        for r in &rows {
            per_action.entry(r.action.as_str()).or_default().push(r.p_norm);
        }
        println!("{s}");
        for (action, p) in per_action {
            let mean = p.iter().sum::<f64>() / p.len() as f64;
            let max = p.iter().cloned().fold(f64::MIN, f64::max);
            let label = rows.iter().find(|r| r.action == action).map(|r| r.label).unwrap();
            println!("  {action:<22} {label:<10?} mean {mean:.3} max {max:.3}");
        }
    }
    Ok(())
}
