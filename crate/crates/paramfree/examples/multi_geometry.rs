//! Run the three-geometry combiner on the sparse-optimum instance and
//! report the population suboptimality of the selected output.

use paramfree::*;

fn main() -> Result<()> {
    let spec = ProblemSpec::sparse_optimum_l1(50, 1.0)?;
    let samples = sample_batch(&spec, 6000, 42)?;
    let result = multi_geometry(
        &spec,
        &samples,
        0.1,
        3.0,
        &ErmConfig::default(),
        &adaptive::LambdaStrategy::GridSup(Default::default()),
    )?;
    let oracle = spec.population_oracle()?;
    println!(
        "picked candidate {} with suboptimality {:.4}",
        result.outcome.chosen,
        oracle.suboptimality(&result.selected_output),
    );
    Ok(())
}
