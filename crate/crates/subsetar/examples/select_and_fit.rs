//! Search for the best lag subset on the bundled chemical-process series,
//! then fit the winner by exact maximum likelihood.

use subsetar::selection::SelectionConfig;
use subsetar::{likelihood, selection, SubsetSpec, TimeSeries};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let values: Vec<f64> = std::fs::read_to_string("data/seriesA.txt")?
        .lines()
        .map(|l| l.parse().unwrap())
        .collect();
    let series = TimeSeries::new(values)?;

    // search, then fit the winner exactly
    let best = &selection::select_models(&series, &SelectionConfig::new(20, 10, 1))?[0];
    let spec = SubsetSpec::from_lags(&best.lags)?;
    let fit = likelihood::fit_mle(&series, &spec, None)?;
    println!(
        "{spec}: loglik {:.2}, sigma {:.3}",
        fit.loglik,
        fit.sigma2.sqrt()
    );
    Ok(())
}
