use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::gaussian::{log_negativity, photon_fluctuations, squeezing_spectrum, steady_covariance_with};
use crate::model::SystemParams;
use crate::numerics::Tolerances;
use crate::scalar::Scalar;
use crate::semiclassical::BranchId;
use crate::stability::{classify_params, RegionLabel, RegionSignature, StabilityClass};

/// `count` evenly spaced values from `min` to `max` inclusive.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct LinRange<T> {
    pub min: T,
    pub max: T,
    pub count: usize,
}

impl<T: Scalar> LinRange<T> {
    pub fn new(min: T, max: T, count: usize) -> Result<Self> {
        let r = LinRange { min, max, count };
        r.validate()?;
        Ok(r)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.min.is_finite() && self.max.is_finite()) {
            return Err(Error::InvalidRange("range bounds must be finite".into()));
        }
        if self.count < 2 {
            return Err(Error::InvalidRange(format!("need at least 2 points, got {}", self.count)));
        }
        if !(self.max > self.min) {
            return Err(Error::InvalidRange(format!("empty range {}:{}", self.min, self.max)));
        }
        Ok(())
    }

    pub fn value(&self, i: usize) -> T {
        let t = T::lit(i as f64) / T::lit((self.count - 1) as f64);
        if i + 1 == self.count {
            self.max
        } else {
            self.min + (self.max - self.min) * t
        }
    }

    pub fn values(&self) -> Vec<T> {
        (0..self.count).map(|i| self.value(i)).collect()
    }

    pub fn step(&self) -> T {
        (self.max - self.min) / T::lit((self.count - 1) as f64)
    }
}

/// Rectangular grid over `(Δ̃, G)` at fixed rates.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct GridSpec<T> {
    pub dtilde: LinRange<T>,
    pub g: LinRange<T>,
    pub kappa: T,
    pub gamma: T,
    pub omega_m: T,
}

/// Quantum measures to evaluate per cell.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize)]
pub struct Measures {
    pub entanglement: bool,
    pub squeezing: bool,
    pub fluctuations: bool,
}

impl Measures {
    pub fn any(&self) -> bool {
        self.entanglement || self.squeezing || self.fluctuations
    }

    pub fn all() -> Self {
        Measures { entanglement: true, squeezing: true, fluctuations: true }
    }
}

/// Which branch the measures refer to where two branches are stable.
/// Single-stable regions always use their stable branch.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct BranchRule {
    pub a: BranchId,
    pub b: BranchId,
    pub c: BranchId,
}

impl Default for BranchRule {
    /// III in A and B, I in C.
    fn default() -> Self {
        BranchRule { a: BranchId::III, b: BranchId::III, c: BranchId::I }
    }
}

impl BranchRule {
    /// Branch whose steady state the measures describe, if any is stable.
    pub fn select<T: Scalar>(&self, sig: &RegionSignature<T>) -> Option<BranchId> {
        let stable = sig.stable_set();
        match stable.len() {
            1 => Some(stable[0]),
            2 => {
                let pick = match sig.label {
                    RegionLabel::A => self.a,
                    RegionLabel::B => self.b,
                    RegionLabel::C => self.c,
                    _ => stable[0],
                };
                Some(if stable.contains(&pick) { pick } else { stable[0] })
            }
            _ => None,
        }
    }
}

/// Quantum measures of the selected branch in one cell.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct CellMeasures<T> {
    pub branch: BranchId,
    pub log_neg: Option<T>,
    pub min_eigenvalue: Option<T>,
    pub min_quadrature_diagonal: Option<T>,
    pub fluctuations: Option<T>,
}

/// One grid cell.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Cell<T> {
    pub dtilde: T,
    pub g: T,
    pub label: RegionLabel,
    pub classes: [StabilityClass; 3],
    /// Photon numbers of the physical branches.
    pub n: [Option<T>; 3],
    /// Branch selected by the rule in force (stable), if any.
    pub selected: Option<BranchId>,
    /// Slowest eigenvalue `|Re λ₁|`, `|Im λ₁|` of the selected branch, or of
    /// branch I where nothing is stable.
    pub gap_real: T,
    pub gap_imag: T,
    /// Margins and spectrum agree on every branch.
    pub consistent: bool,
    pub measures: Option<CellMeasures<T>>,
    /// Failure while evaluating measures.
    pub error: Option<String>,
}

impl<T: Scalar> Cell<T> {
    pub fn is_stable(&self, id: BranchId) -> bool {
        self.classes[id.index()].is_stable()
    }
}

/// Result of a grid sweep; cells are stored with `G` varying fastest.
#[derive(Clone, Debug, Serialize)]
pub struct PhaseMap<T> {
    pub spec: GridSpec<T>,
    pub measures: Measures,
    pub rule: BranchRule,
    pub cells: Vec<Cell<T>>,
}

impl<T: Scalar> PhaseMap<T> {
    pub fn cell(&self, i_dtilde: usize, i_g: usize) -> &Cell<T> {
        &self.cells[i_dtilde * self.spec.g.count + i_g]
    }

    pub fn label_counts(&self) -> BTreeMap<RegionLabel, usize> {
        let mut m = BTreeMap::new();
        for c in &self.cells {
            *m.entry(c.label).or_insert(0) += 1;
        }
        m
    }
}

/// Classifies a single point and evaluates the requested measures.
pub fn evaluate_cell<T: Scalar>(
    p: &SystemParams<T>,
    measures: Measures,
    rule: &BranchRule,
    tol: &Tolerances<T>,
) -> Cell<T> {
    let sig = classify_params(p, tol);
    let selected = rule.select(&sig);
    let gap_branch = selected.unwrap_or(BranchId::I);
    let (gap_real, gap_imag) = sig.reports[gap_branch.index()]
        .map(|r| (r.gap_real, r.gap_imag))
        .unwrap_or((T::nan(), T::nan()));
    let mut cell = Cell {
        dtilde: p.dtilde,
        g: p.g_eff,
        label: sig.label,
        classes: sig.classes,
        n: sig.branches.map(|b| b.physical.then(|| b.n())),
        selected,
        gap_real,
        gap_imag,
        consistent: sig.consistent(),
        measures: None,
        error: None,
    };
    if let (true, Some(id)) = (measures.any(), selected) {
        match cell_measures(p, id, measures, tol) {
            Ok(m) => cell.measures = Some(m),
            Err(e) => cell.error = Some(e.to_string()),
        }
    }
    cell
}

fn cell_measures<T: Scalar>(
    p: &SystemParams<T>,
    id: BranchId,
    measures: Measures,
    tol: &Tolerances<T>,
) -> Result<CellMeasures<T>> {
    let state = steady_covariance_with(p, id, tol)?;
    let mut m = CellMeasures {
        branch: id,
        log_neg: None,
        min_eigenvalue: None,
        min_quadrature_diagonal: None,
        fluctuations: None,
    };
    if measures.entanglement {
        m.log_neg = Some(log_negativity(&state.v)?.log_neg);
    }
    if measures.squeezing {
        let s = squeezing_spectrum(&state.v)?;
        m.min_eigenvalue = Some(s.min_eigenvalue);
        m.min_quadrature_diagonal = Some(s.min_quadrature_diagonal);
    }
    if measures.fluctuations {
        m.fluctuations = Some(photon_fluctuations(&state.v)?);
    }
    Ok(m)
}

/// Sweeps the grid in parallel on the current rayon pool; the output order
/// does not depend on scheduling.
pub fn sweep_grid<T: Scalar>(
    spec: &GridSpec<T>,
    measures: Measures,
    rule: &BranchRule,
    tol: &Tolerances<T>,
) -> Result<PhaseMap<T>> {
    spec.dtilde.validate()?;
    spec.g.validate()?;
    // Validates the rates once; per-cell construction cannot fail afterwards
    // because G ≥ 0 is checked here too.
    let template = SystemParams::from_effective(spec.dtilde.min, T::zero(), spec.kappa, spec.gamma, spec.omega_m)?;
    if spec.g.min < T::zero() {
        return Err(Error::InvalidRange("G range must be non-negative".into()));
    }
    let ny = spec.g.count;
    let cells = (0..spec.dtilde.count * ny)
        .into_par_iter()
        .map(|k| {
            let (i, j) = (k / ny, k % ny);
            let p = template
                .with_effective(spec.dtilde.value(i), spec.g.value(j))
                .expect("grid point validated");
            evaluate_cell(&p, measures, rule, tol)
        })
        .collect();
    Ok(PhaseMap { spec: *spec, measures, rule: *rule, cells })
}
