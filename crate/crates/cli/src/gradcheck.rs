use clap::Args;
use lossforge::losses::{LossId, LossSpec, Sigma};
use lossforge::numerics::{finite_diff_grad, max_relative_error, sigmoid_rows, softmax_rows, Dense2, Rng, DEFAULT_STEP};

use crate::options::{parse_loss_set, LossSet};
use crate::{CliError, CliResult};

/// Largest relative error accepted between analytic and numeric gradients.
pub const TOLERANCE: f64 = 1e-5;

/// Points closer than this to a kink are redrawn.
const KINK_CLEARANCE: f64 = 1e-3;

#[derive(Debug, Args)]
pub struct GradcheckArgs {
    /// Loss id, comma-separated ids, or `all`
    #[arg(long, default_value = "all", value_parser = parse_loss_set)]
    pub loss: LossSet,
    /// Random non-kink points per loss
    #[arg(long, default_value_t = 200)]
    pub trials: usize,
    /// RNG seed
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

fn random_point(rng: &mut Rng) -> (Dense2, Dense2) {
    let n = 1 + rng.below(4);
    let k = 2 + rng.below(9);
    let mut y = Dense2::zeros(n, k);
    for r in 0..n {
        y.set(r, rng.below(k), 1.0);
    }
    let o = Dense2::new(n, k, (0..n * k).map(|_| 2.0 * rng.normal()).collect()).expect("sizes agree");
    (y, o)
}

fn near_kink(spec: &LossSpec, y: &Dense2, o: &Dense2) -> bool {
    let pairs = || o.as_slice().iter().zip(y.as_slice());
    match spec.id {
        LossId::L1 => pairs().any(|(o, y)| (o - y).abs() < KINK_CLEARANCE),
        LossId::Hinge | LossId::Hinge2 | LossId::Hinge3 => {
            pairs().any(|(o, y)| (spec.hinge_margin - (2.0 * y - 1.0) * o).abs() < KINK_CLEARANCE)
        }
        LossId::Chebyshev => {
            let p = match spec.sigma {
                Sigma::Softmax => softmax_rows(o),
                Sigma::Sigmoid => sigmoid_rows(o),
            }
            .expect("finite outputs");
            let tied = y.row_iter().zip(p.row_iter()).any(|(y, p)| {
                let mut d: Vec<f64> = p.iter().zip(y).map(|(p, y)| (p - y).abs()).collect();
                d.sort_by(|a, b| b.total_cmp(a));
                d[0] - d[1] < 0.1 * KINK_CLEARANCE
            });
            tied
        }
        _ => false,
    }
}

/// Worst analytic-vs-numeric relative error over `trials` random points.
pub fn worst_error(spec: &LossSpec, trials: usize, rng: &mut Rng) -> f64 {
    let mut worst: f64 = 0.0;
    let mut done = 0;
    while done < trials {
        let (y, o) = random_point(rng);
        if near_kink(spec, &y, &o) {
            continue;
        }
        let analytic = spec.evaluate(&y, &o).expect("valid batch").grad;
        let (rows, cols) = o.shape();
        let numeric = finite_diff_grad(
            |v| {
                let probe = Dense2::new(rows, cols, v.to_vec()).expect("sizes agree");
                spec.evaluate(&y, &probe).expect("valid batch").value
            },
            o.as_slice(),
            DEFAULT_STEP,
        );
        worst = worst.max(max_relative_error(analytic.as_slice(), &numeric));
        done += 1;
    }
    worst
}

/// Largest gap between the log-loss gradient and `(p − y) / N`.
fn log_closed_form_gap(trials: usize, rng: &mut Rng) -> f64 {
    let spec = LossSpec::new(LossId::Log);
    let mut worst: f64 = 0.0;
    for _ in 0..trials {
        let (y, o) = random_point(rng);
        let grad = spec.evaluate(&y, &o).expect("valid batch").grad;
        let p = softmax_rows(&o).expect("finite outputs");
        let n = y.rows() as f64;
        for ((g, p), y) in grad.as_slice().iter().zip(p.as_slice()).zip(y.as_slice()) {
            worst = worst.max((g - (p - y) / n).abs());
        }
    }
    worst
}

pub fn run(args: &GradcheckArgs) -> CliResult {
    if args.trials == 0 {
        return Err(CliError::Usage("--trials must be positive".into()));
    }
    let mut failed = Vec::new();
    for (i, &loss) in args.loss.0.iter().enumerate() {
        let mut rng = Rng::with_stream(args.seed, i as u64);
        let worst = worst_error(&LossSpec::new(loss), args.trials, &mut rng);
        let verdict = if worst < TOLERANCE { "PASS" } else { "FAIL" };
        print!("{verdict} {:<15} max_rel_err={worst:.3e}", loss.id());
        if loss == LossId::Log {
            let gap = log_closed_form_gap(args.trials, &mut rng);
            print!(" p_minus_y_gap={gap:.3e}");
        }
        println!();
        if worst >= TOLERANCE {
            failed.push(loss.id());
        }
    }
    if failed.is_empty() {
        Ok(())
    } else {
        Err(CliError::Failed(format!(
            "gradient check exceeded {TOLERANCE:e} for: {}",
            failed.join(", ")
        )))
    }
}
