//! Derives metric labels for every world and lists where the bundled
//! overrides disagree with the derivation.

use normshape::harness::label_report;
use normshape::worlds::{scenario, Scenario};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    for s in Scenario::ALL {
        let bundle = scenario(s);
        let report = label_report(&bundle)?;
        let named = report.labels.named(&bundle.spec);
        println!("{s}");
        println!("  task      {}", named.task_oriented.join(" "));
        println!("  normative {}", named.normative.join(" "));
        println!("  failure   {}", named.failure.join(" "));
        println!("  neutral   {}", named.neutral.join(" "));
        for d in &report.disagreements {
            println!("  override {}: derived {:?}, assigned {:?}", d.action, d.derived, d.assigned);
        }
    }
    Ok(())
}
