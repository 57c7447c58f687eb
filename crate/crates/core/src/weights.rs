//! Weight constants as maxima over the ball catalog.

use alloc::collections::BTreeMap;
use alloc::vec;
use alloc::vec::Vec;
use core::ops::Deref;

use crate::error::{Error, Result};
use crate::maximal::{check_len, max_average};
use crate::orlicz::{local_norm, LebesgueExponent, YoungFunction};
use crate::space::QuasiMetricSpace;

/// Nonnegative density against `mu` with at least one positive entry.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
#[cfg_attr(feature = "serde", serde(transparent))]
pub struct WeightVector(Vec<f64>);

impl WeightVector {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if let Some(index) = values.iter().position(|v| !(v.is_finite() && *v >= 0.0)) {
            return Err(Error::InvalidEntry { what: "weight", index });
        }
        if !values.iter().any(|&v| v > 0.0) {
            return Err(Error::IdenticallyZero { what: "weight" });
        }
        Ok(WeightVector(values))
    }

    pub fn ones(n: usize) -> Self {
        WeightVector(vec![1.0; n])
    }

    /// `w(y) = (d(center, y) + offset)^alpha`; `offset > 0` is required when `alpha < 0`.
    pub fn power(space: &QuasiMetricSpace, alpha: f64, center: usize, offset: f64) -> Result<Self> {
        if center >= space.len() {
            return Err(Error::param("center", "index out of range"));
        }
        if !alpha.is_finite() || !offset.is_finite() || offset < 0.0 {
            return Err(Error::param("offset", "alpha and offset must be finite, offset >= 0"));
        }
        if alpha < 0.0 && offset <= 0.0 {
            return Err(Error::param("offset", "offset must be positive when alpha < 0"));
        }
        let values = (0..space.len())
            .map(|y| libm::pow(space.dist(center, y) + offset, alpha))
            .collect();
        Self::new(values)
    }

    pub fn scaled(&self, c: f64) -> Result<Self> {
        Self::new(self.0.iter().map(|v| v * c).collect())
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.0
    }

    fn first_zero(&self) -> Option<usize> {
        self.0.iter().position(|&v| v == 0.0)
    }
}

impl Deref for WeightVector {
    type Target = [f64];
    fn deref(&self) -> &[f64] {
        &self.0
    }
}

fn average(space: &QuasiMetricSpace, members: &[usize], measure: f64, f: impl Fn(usize) -> f64) -> f64 {
    let mass = space.mass();
    members.iter().map(|&y| f(y) * mass[y]).sum::<f64>() / measure
}

/// `[w]_{A_p} = max_B (avg_B w)(avg_B w^{-1/(p-1)})^{p-1}`.
pub fn ap_constant(space: &QuasiMetricSpace, w: &WeightVector, p: LebesgueExponent) -> Result<f64> {
    check_len(space, w, "w")?;
    if let Some(index) = w.first_zero() {
        return Err(Error::ZeroWeight { what: "Ap", index });
    }
    let p = p.p();
    let dual = -1.0 / (p - 1.0);
    Ok(space
        .canonical_balls()
        .iter()
        .map(|cb| {
            let m = space.catalog_members(cb);
            let a = average(space, m, cb.measure, |y| w[y]);
            let b = average(space, m, cb.measure, |y| libm::pow(w[y], dual));
            a * libm::pow(b, p - 1.0)
        })
        .fold(0.0, f64::max))
}

/// `[w, σ]_{A_p} = max_B (avg_B w)(avg_B σ)^{p-1}`.
pub fn two_weight_ap(
    space: &QuasiMetricSpace,
    w: &WeightVector,
    sigma: &WeightVector,
    p: LebesgueExponent,
) -> Result<f64> {
    check_len(space, w, "w")?;
    check_len(space, sigma, "sigma")?;
    let p = p.p();
    Ok(space
        .canonical_balls()
        .iter()
        .map(|cb| {
            let m = space.catalog_members(cb);
            let a = average(space, m, cb.measure, |y| w[y]);
            let b = average(space, m, cb.measure, |y| sigma[y]);
            a * libm::pow(b, p - 1.0)
        })
        .fold(0.0, f64::max))
}

/// Fujii–Wilson constant `max_B (1/w(B)) ∫_B M(w χ_B) dmu`, skipping balls with `w(B) = 0`.
pub fn ainfty_fujii_wilson(space: &QuasiMetricSpace, w: &WeightVector) -> Result<f64> {
    check_len(space, w, "w")?;
    let mass = space.mass();
    let mut best: f64 = 0.0;
    let mut local = vec![0.0; space.len()];
    for cb in space.canonical_balls() {
        let members = space.catalog_members(cb);
        let wb: f64 = members.iter().map(|&y| w[y] * mass[y]).sum();
        if wb == 0.0 {
            continue;
        }
        local.iter_mut().for_each(|v| *v = 0.0);
        for &y in members {
            local[y] = w[y];
        }
        let m = max_average(space, &local);
        let integral: f64 = members.iter().map(|&y| m[y] * mass[y]).sum();
        best = best.max(integral / wb);
    }
    Ok(best)
}

/// Exponential constant `max_B (avg_B w) exp(avg_B log w^{-1})`.
pub fn ainfty_exp(space: &QuasiMetricSpace, w: &WeightVector) -> Result<f64> {
    check_len(space, w, "w")?;
    if let Some(index) = w.first_zero() {
        return Err(Error::ZeroWeight { what: "exponential A-infinity", index });
    }
    Ok(space
        .canonical_balls()
        .iter()
        .map(|cb| {
            let m = space.catalog_members(cb);
            let a = average(space, m, cb.measure, |y| w[y]);
            let l = average(space, m, cb.measure, |y| -libm::log(w[y]));
            a * libm::exp(l)
        })
        .fold(0.0, f64::max))
}

/// Bump constant `max_B (avg_B w) ||σ^{1/p'}||_{Phi, B}^p`.
pub fn bump_ap(
    space: &QuasiMetricSpace,
    w: &WeightVector,
    sigma: &WeightVector,
    p: LebesgueExponent,
    phi: &YoungFunction,
) -> Result<f64> {
    check_len(space, w, "w")?;
    check_len(space, sigma, "sigma")?;
    let mass = space.mass();
    let dual = p.conjugate();
    let root: Vec<f64> = sigma.iter().map(|&s| libm::pow(s, 1.0 / dual)).collect();
    let mut terms = Vec::with_capacity(space.len());
    let mut best: f64 = 0.0;
    for cb in space.canonical_balls() {
        let m = space.catalog_members(cb);
        let a = average(space, m, cb.measure, |y| w[y]);
        terms.clear();
        terms.extend(m.iter().map(|&y| (root[y], mass[y] / cb.measure)));
        let norm = local_norm(&terms, phi);
        best = best.max(a * libm::pow(norm, p.p()));
    }
    Ok(best)
}

/// `[σ, Phi]_{W_p} = max_B (1/σ(B)) ∫_B M_Phi(σ^{1/p} χ_B)^p dmu`, skipping `σ(B) = 0`.
pub fn wp_constant(
    space: &QuasiMetricSpace,
    sigma: &WeightVector,
    p: LebesgueExponent,
    phi: &YoungFunction,
) -> Result<f64> {
    check_len(space, sigma, "sigma")?;
    let n = space.len();
    let mass = space.mass();
    let root: Vec<f64> = sigma.iter().map(|&s| libm::pow(s, 1.0 / p.p())).collect();
    let catalog = space.canonical_balls();
    let mut inside = vec![false; n];
    let mut maximal = vec![0.0f64; n];
    let mut terms = Vec::with_capacity(n);
    let mut best: f64 = 0.0;
    let mut key = vec![0u64; n.div_ceil(64)];
    let mut smallest: BTreeMap<Vec<u64>, f64> = BTreeMap::new();
    for cb in catalog {
        let members = space.catalog_members(cb);
        let sb: f64 = members.iter().map(|&y| sigma[y] * mass[y]).sum();
        if sb == 0.0 {
            continue;
        }
        inside.iter_mut().for_each(|v| *v = false);
        for &y in members {
            inside[y] = true;
        }
        maximal.iter_mut().for_each(|v| *v = 0.0);
        // For a fixed intersection S = B ∩ B' the norm decreases as mu(B') grows,
        // so each distinct S is evaluated once with its smallest enclosing measure.
        smallest.clear();
        for other in catalog {
            key.iter_mut().for_each(|w| *w = 0);
            let mut positive = false;
            for &y in space.catalog_members(other) {
                if inside[y] {
                    key[y / 64] |= 1 << (y % 64);
                    positive |= root[y] > 0.0;
                }
            }
            if !positive {
                continue;
            }
            smallest
                .entry(key.clone())
                .and_modify(|m: &mut f64| *m = m.min(other.measure))
                .or_insert(other.measure);
        }
        for (set, &measure) in &smallest {
            terms.clear();
            terms.extend(set_bits(set).filter(|&y| root[y] > 0.0).map(|y| (root[y], mass[y] / measure)));
            let norm = local_norm(&terms, phi);
            for y in set_bits(set) {
                if norm > maximal[y] {
                    maximal[y] = norm;
                }
            }
        }
        let integral: f64 = members.iter().map(|&y| libm::pow(maximal[y], p.p()) * mass[y]).sum();
        best = best.max(integral / sb);
    }
    Ok(best)
}

fn set_bits(words: &[u64]) -> impl Iterator<Item = usize> + '_ {
    words.iter().enumerate().flat_map(|(i, &w)| {
        (0..64).filter(move |b| w & (1u64 << b) != 0).map(move |b| 64 * i + b)
    })
}

/// Sawyer testing constant `max_B ((1/σ(B)) ∫_B M(σ χ_B)^p w dmu)^{1/p}`, skipping `σ(B) = 0`.
pub fn sawyer_constant(
    space: &QuasiMetricSpace,
    w: &WeightVector,
    sigma: &WeightVector,
    p: LebesgueExponent,
) -> Result<f64> {
    check_len(space, w, "w")?;
    check_len(space, sigma, "sigma")?;
    let p = p.p();
    let mass = space.mass();
    let mut local = vec![0.0; space.len()];
    let mut best: f64 = 0.0;
    for cb in space.canonical_balls() {
        let members = space.catalog_members(cb);
        let sb: f64 = members.iter().map(|&y| sigma[y] * mass[y]).sum();
        if sb == 0.0 {
            continue;
        }
        local.iter_mut().for_each(|v| *v = 0.0);
        for &y in members {
            local[y] = sigma[y];
        }
        let m = max_average(space, &local);
        let integral: f64 = members
            .iter()
            .map(|&y| libm::pow(m[y], p) * w[y] * mass[y])
            .sum();
        best = best.max(integral / sb);
    }
    Ok(libm::pow(best, 1.0 / p))
}

/// Every weight constant for one `(space, w, σ, p, Phi)` context.
///
/// `ap` and `ainfty_exp` are `None` when `w` vanishes somewhere.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct ConstantsReport {
    pub p: f64,
    pub ap: Option<f64>,
    pub two_weight_ap: f64,
    pub ainfty_fw: f64,
    pub ainfty_exp: Option<f64>,
    pub bump_ap: f64,
    pub wp: f64,
    pub sawyer: f64,
}

/// Computes every constant; `wp` uses the conjugate of `phi`, as in the two-weight bound.
pub fn constants_report(
    space: &QuasiMetricSpace,
    w: &WeightVector,
    sigma: &WeightVector,
    p: LebesgueExponent,
    phi: &YoungFunction,
) -> Result<ConstantsReport> {
    let positive = w.first_zero().is_none();
    let phi_bar = phi.conjugate()?;
    Ok(ConstantsReport {
        p: p.p(),
        ap: if positive { Some(ap_constant(space, w, p)?) } else { None },
        two_weight_ap: two_weight_ap(space, w, sigma, p)?,
        ainfty_fw: ainfty_fujii_wilson(space, w)?,
        ainfty_exp: if positive { Some(ainfty_exp(space, w)?) } else { None },
        bump_ap: bump_ap(space, w, sigma, p, phi)?,
        wp: wp_constant(space, sigma, p, &phi_bar)?,
        sawyer: sawyer_constant(space, w, sigma, p)?,
    })
}
