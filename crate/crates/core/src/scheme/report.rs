use super::GridFunction;
use crate::mesh::Mesh;
use crate::sum::CompensatedSum;

/// Global quantities of one time level.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepRecord {
    pub step: usize,
    pub time: f64,
    /// `Σ |K| u_K`.
    pub mass: f64,
    pub min: f64,
    pub max: f64,
    /// `Σ |K| |u_K|`.
    pub l1: f64,
    /// `(Σ |K| u_K^2)^{1/2}`.
    pub l2: f64,
}

impl StepRecord {
    pub fn measure(mesh: &Mesh, u: &GridFunction) -> Self {
        let mut mass = CompensatedSum::new();
        let mut l1 = CompensatedSum::new();
        let mut l2 = CompensatedSum::new();
        let mut min = f64::INFINITY;
        let mut max = f64::NEG_INFINITY;
        for (cell, &v) in mesh.cells.iter().zip(&u.values) {
            mass.add(cell.area * v);
            l1.add(cell.area * v.abs());
            l2.add(cell.area * v * v);
            min = min.min(v);
            max = max.max(v);
        }
        Self {
            step: u.step,
            time: u.time,
            mass: mass.value(),
            min,
            max,
            l1: l1.value(),
            l2: l2.value().sqrt(),
        }
    }
}

/// Per-step ledger of a run.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct StepReport {
    pub records: Vec<StepRecord>,
}

impl StepReport {
    pub fn push(&mut self, mesh: &Mesh, u: &GridFunction) {
        self.records.push(StepRecord::measure(mesh, u));
    }

    /// `max_n |mass_n - mass_0| / max(|mass_0|, L¹_0)`.
    pub fn relative_mass_drift(&self) -> f64 {
        let Some(first) = self.records.first() else {
            return 0.0;
        };
        let scale = first.mass.abs().max(first.l1).max(f64::MIN_POSITIVE);
        self.records
            .iter()
            .map(|r| (r.mass - first.mass).abs() / scale)
            .fold(0.0, f64::max)
    }

    /// Largest excursion outside the initial range `[min_0, max_0]`.
    pub fn bound_excursion(&self) -> f64 {
        let Some(first) = self.records.first() else {
            return 0.0;
        };
        self.records
            .iter()
            .map(|r| (first.min - r.min).max(r.max - first.max).max(0.0))
            .fold(0.0, f64::max)
    }

    /// Largest per-step increase of the L¹ norm relative to the initial one.
    pub fn max_l1_increase(&self) -> f64 {
        self.max_increase(|r| r.l1)
    }

    /// Largest per-step increase of the L² norm relative to the initial one.
    pub fn max_l2_increase(&self) -> f64 {
        self.max_increase(|r| r.l2)
    }

    fn max_increase(&self, f: impl Fn(&StepRecord) -> f64) -> f64 {
        let Some(first) = self.records.first() else {
            return 0.0;
        };
        let scale = f(first).max(f64::MIN_POSITIVE);
        self.records
            .windows(2)
            .map(|w| (f(&w[1]) - f(&w[0])) / scale)
            .fold(0.0, f64::max)
    }
}
