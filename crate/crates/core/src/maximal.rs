//! Uncentered Hardy–Littlewood, restricted and Orlicz maximal operators.
//!
//! Every supremum over balls containing a point is a maximum over the ball
//! catalog, so the values below are exact up to floating-point arithmetic.

use alloc::vec;
use alloc::vec::Vec;
use core::ops::Deref;

use crate::error::{Error, Result};
use crate::orlicz::{local_norm, YoungFunction};
use crate::space::{Ball, QuasiMetricSpace};

/// Nonnegative finite function values, one per point.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
#[cfg_attr(feature = "serde", serde(transparent))]
pub struct FieldVector(Vec<f64>);

impl FieldVector {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if let Some(index) = values.iter().position(|v| !(v.is_finite() && *v >= 0.0)) {
            return Err(Error::InvalidEntry { what: "field", index });
        }
        Ok(FieldVector(values))
    }

    pub fn constant(n: usize, c: f64) -> Result<Self> {
        Self::new(vec![c; n])
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.0
    }

    pub(crate) fn check_len(&self, space: &QuasiMetricSpace) -> Result<()> {
        check_len(space, &self.0, "field")
    }
}

impl Deref for FieldVector {
    type Target = [f64];
    fn deref(&self) -> &[f64] {
        &self.0
    }
}

pub(crate) fn check_len(space: &QuasiMetricSpace, v: &[f64], what: &'static str) -> Result<()> {
    if v.len() != space.len() {
        return Err(Error::DimensionMismatch {
            what,
            expected: space.len(),
            got: v.len(),
        });
    }
    Ok(())
}

/// Averages of `f` over every catalog ball, in catalog order.
pub(crate) fn ball_averages(space: &QuasiMetricSpace, f: &[f64]) -> Vec<f64> {
    let mass = space.mass();
    let mut averages = Vec::with_capacity(space.canonical_balls().len());
    let mut center = usize::MAX;
    let mut prefix = Vec::with_capacity(space.len() + 1);
    for cb in space.canonical_balls() {
        if cb.ball.center != center {
            center = cb.ball.center;
            prefix.clear();
            prefix.push(0.0);
            let mut acc = 0.0;
            for &y in space.order(center) {
                acc += f[y] * mass[y];
                prefix.push(acc);
            }
        }
        averages.push(prefix[cb.len] / cb.measure);
    }
    averages
}

/// `Mf` without input validation.
pub(crate) fn max_average(space: &QuasiMetricSpace, f: &[f64]) -> Vec<f64> {
    let averages = ball_averages(space, f);
    let mut out = vec![0.0f64; space.len()];
    for (cb, avg) in space.canonical_balls().iter().zip(averages) {
        for &y in space.catalog_members(cb) {
            if avg > out[y] {
                out[y] = avg;
            }
        }
    }
    out
}

/// `Mf(x) = max_{B ∋ x} (1/mu(B)) sum_B f mu`.
pub fn hl_maximal(space: &QuasiMetricSpace, f: &FieldVector) -> Result<FieldVector> {
    f.check_len(space)?;
    Ok(FieldVector(max_average(space, f)))
}

/// `M(f χ_B)` evaluated on the whole space.
pub fn restricted_maximal(space: &QuasiMetricSpace, f: &FieldVector, ball: &Ball) -> Result<FieldVector> {
    f.check_len(space)?;
    Ok(FieldVector(max_average(space, &restrict(space, f, ball))))
}

pub(crate) fn restrict(space: &QuasiMetricSpace, f: &[f64], ball: &Ball) -> Vec<f64> {
    let mut g = vec![0.0; space.len()];
    for &y in space.members(ball) {
        g[y] = f[y];
    }
    g
}

/// `M_Phi f(x) = max_{B ∋ x} ||f||_{Phi, B}`.
pub fn orlicz_maximal(space: &QuasiMetricSpace, f: &FieldVector, phi: &YoungFunction) -> Result<FieldVector> {
    f.check_len(space)?;
    Ok(FieldVector(orlicz_max(space, f, phi)))
}

pub(crate) fn orlicz_max(space: &QuasiMetricSpace, f: &[f64], phi: &YoungFunction) -> Vec<f64> {
    let mass = space.mass();
    let mut out = vec![0.0f64; space.len()];
    let mut terms = Vec::with_capacity(space.len());
    for cb in space.canonical_balls() {
        let members = space.catalog_members(cb);
        terms.clear();
        terms.extend(members.iter().map(|&y| (f[y], mass[y] / cb.measure)));
        let norm = local_norm(&terms, phi);
        for &y in members {
            if norm > out[y] {
                out[y] = norm;
            }
        }
    }
    out
}
