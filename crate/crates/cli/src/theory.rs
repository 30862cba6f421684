use clap::Args;
use lossforge::losses::{sigmoid_expectation_slope, verify_cs_decomposition, verify_expectation_identity};
use lossforge::numerics::{softmax_rows, Dense2, Rng};

use crate::{CliError, CliResult};

pub const EXPECTATION_TOLERANCE: f64 = 1e-12;
pub const CS_TOLERANCE: f64 = 1e-10;
pub const SLOPE_TOLERANCE: f64 = 1e-12;
pub const SATURATED_SLOPE: f64 = 1e-10;

#[derive(Debug, Args)]
pub struct TheoryArgs {
    /// RNG seed for the random batches
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Rows per random batch
    #[arg(long, default_value_t = 32)]
    pub batch: usize,
    /// Number of random batches
    #[arg(long, default_value_t = 1000)]
    pub batches: usize,
    /// Add this amount to the first probability of every row (negative control; any
    /// nonzero value should make the identities FAIL)
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    pub perturb: f64,
}

/// Worst residuals over all batches.
struct Residuals {
    l1: f64,
    l2: f64,
    cs: f64,
}

fn residuals(args: &TheoryArgs) -> Result<Residuals, String> {
    let mut rng = Rng::new(args.seed);
    let mut worst = Residuals {
        l1: 0.0,
        l2: 0.0,
        cs: 0.0,
    };
    for _ in 0..args.batches {
        let k = 2 + rng.below(9);
        let mut y = Dense2::zeros(args.batch, k);
        for r in 0..args.batch {
            y.set(r, rng.below(k), 1.0);
        }
        let o = Dense2::new(args.batch, k, (0..args.batch * k).map(|_| 3.0 * rng.normal()).collect())
            .map_err(|e| e.to_string())?;
        let mut p = softmax_rows(&o).map_err(|e| e.to_string())?;
        for r in 0..args.batch {
            p.set(r, 0, p.get(r, 0) + args.perturb);
        }
        let e = verify_expectation_identity(&y, &p).map_err(|e| e.to_string())?;
        worst.l1 = worst.l1.max(e.l1);
        worst.l2 = worst.l2.max(e.l2);
        worst.cs = worst.cs.max(verify_cs_decomposition(&y, &p).map_err(|e| e.to_string())?);
    }
    Ok(worst)
}

fn report(failures: &mut Vec<&'static str>, name: &'static str, ok: bool, detail: String) {
    println!("{} {name:<22} {detail}", if ok { "PASS" } else { "FAIL" });
    if !ok {
        failures.push(name);
    }
}

pub fn run(args: &TheoryArgs) -> CliResult {
    if args.batch == 0 || args.batches == 0 {
        return Err(CliError::Usage("--batch and --batches must be positive".into()));
    }
    let mut failures = Vec::new();

    match residuals(args) {
        Ok(r) => {
            report(
                &mut failures,
                "expectation-l1",
                r.l1 < EXPECTATION_TOLERANCE,
                format!("residual={:.3e} (< {EXPECTATION_TOLERANCE:e})", r.l1),
            );
            report(
                &mut failures,
                "expectation-l2",
                r.l2 < EXPECTATION_TOLERANCE,
                format!("residual={:.3e} (< {EXPECTATION_TOLERANCE:e})", r.l2),
            );
            report(
                &mut failures,
                "cauchy-schwarz-split",
                r.cs < CS_TOLERANCE,
                format!("residual={:.3e} (< {CS_TOLERANCE:e})", r.cs),
            );
        }
        Err(msg) => {
            for name in ["expectation-l1", "expectation-l2", "cauchy-schwarz-split"] {
                report(&mut failures, name, false, format!("invalid batch: {msg}"));
            }
        }
    }

    println!("sigmoid expectation slope, positive label:");
    println!("{:>8}  {:>12}", "o", "slope");
    let mut slopes = Vec::new();
    for o in [-30.0, 0.0, 30.0] {
        let s = sigmoid_expectation_slope(o).map_err(|e| CliError::Failed(e.to_string()))?;
        println!("{o:>8}  {s:>12.4e}");
        slopes.push(s);
    }
    let (left, mid, right) = (slopes[0], slopes[1], slopes[2]);
    let ok = (mid + 0.25).abs() <= SLOPE_TOLERANCE
        && left.abs() < SATURATED_SLOPE
        && right.abs() < SATURATED_SLOPE
        && mid.abs() > left.abs()
        && mid.abs() > right.abs();
    report(
        &mut failures,
        "sigmoid-slope",
        ok,
        format!("slope(0)={mid} |slope(±30)|<{SATURATED_SLOPE:e}"),
    );

    if failures.is_empty() {
        Ok(())
    } else {
        Err(CliError::Failed(format!("failed: {}", failures.join(", "))))
    }
}
