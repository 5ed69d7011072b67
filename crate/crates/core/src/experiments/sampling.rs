use crate::error::{Error, Result};
use crate::fieldsim::circulant::Workspace;
use crate::fieldsim::{max_on_subgrid_raw, FieldSimulator};
use crate::parallel::map_reps_with;

/// Per-replication maxima of the weak field: `out[rep][k]` is the maximum
/// over the sub-lattice with strides `strides[k]`. Replications `2p` and
/// `2p + 1` come from the same FFT.
pub fn field_maxima(sim: &FieldSimulator, seed: u64, reps: u64, strides: &[(usize, usize)]) -> Vec<Vec<f64>> {
    let (nx, ny) = sim.shape();
    let pairs = reps.div_ceil(2);
    let init = || (Workspace::default(), vec![0.0; nx * ny], vec![0.0; nx * ny]);
    let out = map_reps_with(pairs, init, |(ws, a, b), p| {
        sim.sample_pair_into(seed, p, ws, a, b);
        let maxima = |v: &[f64]| strides.iter().map(|&(sx, sy)| max_on_subgrid_raw(v, nx, ny, sx, sy)).collect::<Vec<_>>();
        [maxima(a), maxima(b)]
    });
    let mut flat: Vec<Vec<f64>> = out.into_iter().flatten().collect();
    flat.truncate(reps as usize);
    flat
}

/// Rejects runs whose total lattice work exceeds `cap`.
pub fn check_work(reps: u64, sim: &FieldSimulator, cap: u128) -> Result<()> {
    let (nx, ny) = sim.shape();
    let work = reps as u128 * (nx * ny) as u128;
    if work > cap {
        return Err(Error::BudgetExceeded { work, cap });
    }
    Ok(())
}
