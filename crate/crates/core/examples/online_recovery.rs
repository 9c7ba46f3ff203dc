//! Feeds measurements of a seeded 256-long, 20-sparse signal one at a time
//! and prints the reconstruction error as it falls.

use seqzap_core::{generate_problem, msd, OnlineState, ProblemSpec, ZapConfig};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let seed = std::env::args()
        .nth(1)
        .map(|s| s.parse())
        .transpose()?
        .unwrap_or(1);
    let cfg = ZapConfig::default();
    let mut problem = generate_problem(ProblemSpec::new(256, 20, seed))?;
    let truth = problem.x_true().clone();
    let mut state = OnlineState::new(256, &cfg)?;

    while state.m() < 120 {
        let (a, y) = problem.next_measurement();
        state.ingest_sample(&a, y, &cfg)?;
        let error = msd(state.estimate(), &truth);
        if state.m() % 10 == 0 {
            println!("m = {:3}  msd = {error:.3e}", state.m());
        }
        if error < cfg.epsilon {
            println!("recovered after {} measurements", state.m());
            break;
        }
    }
    Ok(())
}
