use std::time::Instant;

use clap::{Args, ValueEnum};
use domprod_core::dominance::{dominance_blocked, predict_exponent, Mode};
use domprod_core::geometry::{generate_points, Distribution};
use domprod_core::matmul::{count_product, BitMatrix};
use serde_json::json;

use crate::report::{Parameters, RunReport};
use crate::{BlockArg, Failure, KernelArg};

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum BenchOp {
    /// Blocked LE dominance on uniform random points.
    Dominance,
    /// Boolean count product of random n x k and k x n matrices.
    Product,
}

#[derive(Args)]
pub struct BenchArgs {
    #[arg(long, value_enum, default_value = "dominance")]
    op: BenchOp,
    #[arg(long, value_delimiter = ',', default_values_t = [64usize, 128, 256])]
    n: Vec<usize>,
    /// Dimensions (dominance only).
    #[arg(long, value_delimiter = ',', default_values_t = [16usize])]
    d: Vec<usize>,
    /// Inner dimensions (product only).
    #[arg(long, value_delimiter = ',', default_values_t = [4096usize])]
    k: Vec<usize>,
    #[arg(long, value_delimiter = ',', default_value = "auto")]
    s: Vec<BlockArg>,
    #[arg(long, value_enum, value_delimiter = ',', default_value = "bitpack")]
    kernel: Vec<KernelArg>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Repetitions per cell; the minimum time is reported.
    #[arg(long, default_value_t = 3, value_parser = clap::value_parser!(u32).range(1..))]
    reps: u32,
}

fn min_time_ms(reps: u32, mut f: impl FnMut() -> Result<(), Failure>) -> Result<f64, Failure> {
    let mut best = f64::INFINITY;
    for _ in 0..reps {
        let start = Instant::now();
        f()?;
        best = best.min(start.elapsed().as_secs_f64() * 1e3);
    }
    Ok(best)
}

/// Least-squares slope of `ln y` against `ln x`.
fn loglog_slope(samples: &[(f64, f64)]) -> Option<f64> {
    if samples.len() < 2 {
        return None;
    }
    let pts: Vec<(f64, f64)> = samples
        .iter()
        .map(|&(x, y)| (x.ln(), y.max(1e-6).ln()))
        .collect();
    let m = pts.len() as f64;
    let (mx, my) = pts
        .iter()
        .fold((0.0, 0.0), |(a, b), (x, y)| (a + x / m, b + y / m));
    let sxx: f64 = pts.iter().map(|(x, _)| (x - mx).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|(x, y)| (x - mx) * (y - my)).sum();
    (sxx > 0.0).then(|| sxy / sxx)
}

pub fn run(args: BenchArgs) -> Result<(), Failure> {
    match args.op {
        BenchOp::Dominance => dominance_grid(&args),
        BenchOp::Product => product_grid(&args),
    }
}

fn dominance_grid(args: &BenchArgs) -> Result<(), Failure> {
    for &kernel in &args.kernel {
        for &s in &args.s {
            for &d in &args.d {
                let mut samples = Vec::new();
                for &n in &args.n {
                    let points = generate_points(n, d, Distribution::UniformReal, args.seed)?;
                    let choice = kernel.choice();
                    let time = min_time_ms(args.reps, || {
                        dominance_blocked(&points, s.into(), &choice, Mode::Le)?;
                        Ok(())
                    })?;
                    samples.push((n as f64, time));

                    let mut report = RunReport::new("bench");
                    report.algorithm = Some("blocked".into());
                    report.n = Some(n);
                    report.d = Some(d);
                    report.domain = Some("real".into());
                    report.seed = Some(args.seed);
                    report.parameters = Parameters {
                        s: Some(match s {
                            BlockArg::Auto => "auto".into(),
                            BlockArg::Fixed(v) => v.to_string(),
                        }),
                        kernel: Some(kernel.name().into()),
                        mode: Some("le".into()),
                        ..Parameters::default()
                    };
                    report.result = json!({ "op": "dominance", "min_ms": time, "reps": args.reps });
                    report.wall_time_ms = time;
                    report.emit();
                }
                emit_summary(kernel, s, d, &samples);
            }
        }
    }
    Ok(())
}

/// Measured slope against the reference exponent at the sweep's mean `zeta`.
fn emit_summary(kernel: KernelArg, s: BlockArg, d: usize, samples: &[(f64, f64)]) {
    let slope = loglog_slope(samples);
    let zetas: Vec<f64> = samples
        .iter()
        .map(|&(n, _)| (d as f64).ln() / n.ln())
        .collect();
    let zeta = zetas.iter().sum::<f64>() / zetas.len().max(1) as f64;
    let predicted = predict_exponent(zeta).ok().map(|p| p.exponent);
    let mut report = RunReport::new("bench");
    report.algorithm = Some("summary".into());
    report.d = Some(d);
    report.parameters = Parameters {
        s: Some(match s {
            BlockArg::Auto => "auto".into(),
            BlockArg::Fixed(v) => v.to_string(),
        }),
        kernel: Some(kernel.name().into()),
        ..Parameters::default()
    };
    report.result = json!({
        "measured_slope": slope,
        "mean_zeta": zeta,
        "predicted_exponent": predicted,
        "kernel_exponent": kernel.choice().effective_exponent(),
        "cells": samples.len(),
    });
    report.wall_time_ms = samples.iter().map(|s| s.1).sum();
    report.emit();
}

fn product_grid(args: &BenchArgs) -> Result<(), Failure> {
    for &n in &args.n {
        for &k in &args.k {
            let mut state = args.seed ^ 0x9E37_79B9_7F4A_7C15;
            let mut bit = || {
                // xorshift64: cheap reproducible fill, quality is irrelevant here.
                state ^= state << 13;
                state ^= state >> 7;
                state ^= state << 17;
                state & 1 == 1
            };
            let a = BitMatrix::from_fn(n, k, |_, _| bit());
            let b = BitMatrix::from_fn(n, k, |_, _| bit());
            let mut times = Vec::new();
            for &kernel in &args.kernel {
                let choice = kernel.choice();
                let time = min_time_ms(args.reps, || {
                    count_product(&a, &b, &choice)?;
                    Ok(())
                })?;
                times.push((kernel, time));
                let mut report = RunReport::new("bench");
                report.algorithm = Some("count_product".into());
                report.n = Some(n);
                report.seed = Some(args.seed);
                report.parameters.kernel = Some(kernel.name().into());
                report.result =
                    json!({ "op": "product", "k": k, "min_ms": time, "reps": args.reps });
                report.wall_time_ms = time;
                report.emit();
            }
            if let Some(&(_, naive)) = times.iter().find(|(kr, _)| *kr == KernelArg::Naive) {
                let speedups: serde_json::Map<String, serde_json::Value> = times
                    .iter()
                    .map(|(kr, t)| (kr.name().to_string(), json!(naive / t.max(1e-6))))
                    .collect();
                let mut report = RunReport::new("bench");
                report.algorithm = Some("summary".into());
                report.n = Some(n);
                report.result = json!({ "op": "product", "k": k, "speedup_vs_naive": speedups });
                report.wall_time_ms = times.iter().map(|t| t.1).sum();
                report.emit();
            }
        }
    }
    Ok(())
}
