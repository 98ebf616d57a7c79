//! Verify every hand-derived gradient against the central finite-difference
//! oracle, for both architectures.
//!
//! The harness builds a small model, picks a random sentence and label,
//! runs the analytic backward pass, then nudges each parameter by ±1e-4 and
//! compares the loss slope. One line per parameter group; worst relative
//! error must stay below 1e-4.
//!
//! ```sh
//! cargo run --example gradient_check
//! ```

use feedbacknet::models::Architecture;
use feedbacknet::training::{gradient_check_run, GRAD_CHECK_TOLERANCE};

fn main() -> feedbacknet::Result<()> {
    for architecture in [Architecture::Cnn, Architecture::CnnGru] {
        println!("== {architecture} ==");
        let report = gradient_check_run(architecture, 42)?;
        print!("{}", report.format_lines());
        assert!(report.passed(), "gradient check failed");
        println!();
    }
    println!("both architectures verified to {GRAD_CHECK_TOLERANCE:.0e}");
    Ok(())
}
