use crate::scalar::Real;
use crate::state::StateVec;
use crate::Error;

/// `Σ_i |u_i − ref_i| Δx` per component.
pub fn l1_error<T: Real>(num: &[StateVec<T>], reference: &[StateVec<T>], dx: T) -> Result<Vec<f64>, Error> {
    if num.len() != reference.len() || num.is_empty() {
        return Err(Error::Config(format!("grid mismatch: {} vs {} cells", num.len(), reference.len())));
    }
    let n = num[0].len();
    let mut e = vec![0.0f64; n];
    for (u, r) in num.iter().zip(reference) {
        for (k, ek) in e.iter_mut().enumerate() {
            *ek += (u[k] - r[k]).abs().to_f64().unwrap();
        }
    }
    let dx = dx.to_f64().unwrap();
    Ok(e.into_iter().map(|v| v * dx).collect())
}

/// `log2(e_{2h} / e_h)` between consecutive meshes whose cell counts
/// differ by a factor two.
pub fn convergence_orders(rows: &[(usize, Vec<f64>)]) -> Vec<Vec<Option<f64>>> {
    let mut out = Vec::with_capacity(rows.len());
    for (k, (cells, errs)) in rows.iter().enumerate() {
        let prev = k.checked_sub(1).map(|p| &rows[p]).filter(|(c, e)| 2 * *c == *cells && e.len() == errs.len());
        out.push(
            errs.iter()
                .enumerate()
                .map(|(j, e)| {
                    let (_, pe) = prev?;
                    (*e > 0.0 && pe[j] > 0.0).then(|| (pe[j] / e).log2())
                })
                .collect(),
        );
    }
    out
}

/// Averages consecutive groups of fine cells onto a grid `ratio` times
/// coarser.
pub fn restrict<T: Real>(fine: &[StateVec<T>], coarse_cells: usize) -> Result<Vec<StateVec<T>>, Error> {
    if coarse_cells == 0 || fine.len() % coarse_cells != 0 {
        return Err(Error::Config(format!("{} fine cells do not restrict to {coarse_cells}", fine.len())));
    }
    let r = fine.len() / coarse_cells;
    let inv = T::one() / T::from_usize(r).unwrap();
    Ok(fine
        .chunks(r)
        .map(|c| c[1..].iter().fold(c[0], |acc, v| acc + *v) * inv)
        .collect())
}
