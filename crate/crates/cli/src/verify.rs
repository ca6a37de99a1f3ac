use std::path::PathBuf;

use clap::Args;
use ordpat_core::theory::{self, format_matrix, ratio_to_f64};

use crate::EXIT_MISMATCH;

#[derive(Args, Debug)]
pub struct VerifyArgs {
    /// Load the type matrix from this file, building and saving it if absent
    #[arg(long)]
    pub cache: Option<PathBuf>,
}

pub fn run(args: VerifyArgs) -> u8 {
    let tm = match &args.cache {
        Some(path) => match theory::cached_type_matrix(path) {
            Ok(tm) => tm,
            Err(e) => {
                eprintln!("error: {}: {e}", path.display());
                return 1;
            }
        },
        None => theory::build_type_matrix(),
    };
    let report = theory::verify(&tm);
    let cov = &report.covariance;

    println!("orderings of a 3x3 block: {}", report.rows);
    println!("neighbor covariance C (horizontal): {}", format_matrix(&cov.neighbor));
    println!("neighbor covariance C (vertical):   {}", format_matrix(&report.vertical));
    println!("diagonal neighbor covariance:       {}", format_matrix(&cov.diagonal));
    println!("U Cov(q):                           {}", format_matrix(&cov.scaled_cov));
    println!(
        "U Var tau = {}, U Var kappa = {}, U Cov(tau, kappa) = {}, corr = {:.6} (squared {})",
        cov.var_tau, cov.var_kappa, cov.cov_tau_kappa, cov.correlation, cov.correlation_squared
    );
    let c = &report.conditional;
    println!(
        "P(III) = {} ; given one neighbor III: {} = {:.4} ; two: {} = {:.4} ; three: {} = {:.4}",
        c.baseline,
        c.one,
        ratio_to_f64(c.one),
        c.two,
        ratio_to_f64(c.two),
        c.three,
        ratio_to_f64(c.three)
    );
    println!("combination counts (lexicographic, mean {}):", theory::BLOCK_PERMUTATIONS / 81);
    for (b, n) in report.combos.iter().enumerate() {
        let t = theory::combo_from_bin(b).map(|x| x.value());
        println!("  {},{},{},{} {n}", t[0], t[1], t[2], t[3]);
    }
    println!();
    for check in &report.checks {
        if check.pass {
            println!("PASS {}", check.name);
        } else {
            println!("FAIL {}\n  expected: {}\n  computed: {}", check.name, check.expected, check.computed);
        }
    }
    if report.passed() {
        0
    } else {
        EXIT_MISMATCH
    }
}
