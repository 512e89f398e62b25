//! A small Monte Carlo grid: relative error of empirical limiting
//! covariances shrinking with the sample size (and refusing to shrink
//! when the distinct-eigenvalue condition is violated).
//!
//!     cargo run --example monte_carlo_convergence

use spectral_anon::simulate::{
    run_grid, DistributionKind, MethodName, SimulationSpec, DEFAULT_O_SA_N_CAP,
};

fn main() {
    let spec = SimulationSpec {
        base_seed: 7,
        replications: 1000,
        distributions: vec![
            DistributionKind::NormalDistinct,
            DistributionKind::NormalIdentity,
        ],
        n_grid: vec![25, 100, 400, 1600],
        p_grid: vec![2],
        methods: vec![MethodName::P, MethodName::J, MethodName::O],
        o_sa_n_cap: DEFAULT_O_SA_N_CAP,
    };

    println!(
        "M = {} replications per cell, covariance statistic\n",
        spec.replications
    );
    let records = run_grid(&spec).unwrap();

    for kind in &spec.distributions {
        println!("{}:", kind.label());
        println!("{:>10} {:>10} {:>10} {:>10} {:>10}", "n", "original", "p", "j", "o");
        for &n in &spec.n_grid {
            let mut row = format!("{n:>10}");
            for method in ["original", "p", "j", "o"] {
                let record = records
                    .iter()
                    .find(|r| {
                        r.distribution == kind.label()
                            && r.n == n
                            && r.method == method
                            && r.statistic == "covariance"
                    })
                    .unwrap();
                match record.relative_error {
                    Some(re) => row.push_str(&format!(" {re:>10.4}")),
                    None => row.push_str(&format!(" {:>10}", "—")),
                }
            }
            println!("{row}");
        }
        println!();
    }
    println!("Distinct eigenvalues: errors fall toward zero as n grows.");
    println!("Identity covariance: errors level off — the closed form no longer applies.");
    println!("(— marks orthogonal cells above the n ≤ {DEFAULT_O_SA_N_CAP} cap.)");
}
