use super::association::{covariance_of_up_sets, scan_association};
use super::{
    condition_zeros_mask, lift_up_set, project_out, sites_of, zero_event, CheckOptions, Measure, Property,
    PropertyReport, Witness,
};
use crate::error::Result;
use crate::lattice::UpSet;
use crate::rational::Scalar;

/// Association of `μ{· | η ≡ 0 on A}` for every `A` (including `∅`) whose
/// event has positive probability. Zero sets are visited in increasing mask
/// order; the witness is the first failing `A` with its first failing pair,
/// lifted back to the full configuration space.
pub fn is_downward_fkg<T: Scalar>(mu: &Measure<T>, opts: &CheckOptions) -> Result<PropertyReport> {
    let sites = mu.sites();
    let mut witness: Option<(Witness, T)> = None;
    let mut minimum: Option<T> = None;
    let mut skipped = 0usize;
    for zeros in 0..=sites.full_mask() {
        if mu.prob_event(zero_event(sites, zeros)).is_zero() {
            skipped += 1;
            continue;
        }
        let cond = condition_zeros_mask(mu, zeros)?;
        let Some((reduced, free)) = project_out(&cond, zeros) else { continue };
        let scan = scan_association(&reduced, opts)?;
        let lift = |i: usize| lift_up_set(sites, &free, scan.masks[i]);
        let cov = |u: UpSet, v: UpSet| covariance_of_up_sets(&cond, u, v);
        if let Some((i, j)) = scan.result.first_violation {
            if witness.is_none() {
                let (u, v) = (lift(i), lift(j));
                witness = Some((Witness::Conditioned { zeros: sites_of(zeros), u, v }, cov(u, v)));
                if !opts.full_margin {
                    break;
                }
            }
        }
        if let Some((i, j)) = scan.result.minimum {
            let m = cov(lift(i), lift(j));
            if minimum.as_ref().is_none_or(|b| m < *b) {
                minimum = Some(m);
            }
        }
    }
    let mut report = match witness {
        Some((w, slack)) => {
            let margin = if opts.full_margin { minimum.unwrap_or(slack) } else { slack };
            PropertyReport::fails(Property::DownwardFkg, w, Some(margin.to_margin()))
        }
        None => PropertyReport::holds(Property::DownwardFkg, minimum.map(|m| m.to_margin())),
    };
    if skipped > 0 {
        report = report.with_note(format!("{skipped} zero-probability conditioning events skipped"));
    }
    Ok(report)
}
