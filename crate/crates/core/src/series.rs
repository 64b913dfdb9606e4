/// Whether an energy series comes from a quantum state or a classical ensemble.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EnergyKind {
    Quantum,
    Classical,
}

/// Scaled rotational energy recorded after every kick.
///
/// `values[0]` is the energy of the initial state, `values[n]` the energy
/// after kick `n`.
#[derive(Debug, Clone, PartialEq)]
pub struct EnergySeries {
    pub kind: EnergyKind,
    pub values: Vec<f64>,
}

impl EnergySeries {
    pub fn new(kind: EnergyKind, values: Vec<f64>) -> Self {
        Self { kind, values }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Number of kicks covered (one less than the number of entries).
    pub fn n_kicks(&self) -> usize {
        self.values.len().saturating_sub(1)
    }

    pub fn at(&self, kick: usize) -> Option<f64> {
        self.values.get(kick).copied()
    }

    /// The first `n_kicks + 1` entries.
    pub fn truncated(&self, n_kicks: usize) -> Self {
        Self {
            kind: self.kind,
            values: self.values[..=n_kicks.min(self.n_kicks())].to_vec(),
        }
    }
}

/// Neumaier compensated accumulator.
#[derive(Debug, Clone, Copy, Default)]
pub(crate) struct CompensatedSum {
    sum: f64,
    comp: f64,
}

impl CompensatedSum {
    #[inline]
    pub(crate) fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.comp += (self.sum - t) + x;
        } else {
            self.comp += (x - t) + self.sum;
        }
        self.sum = t;
    }

    #[inline]
    pub(crate) fn value(&self) -> f64 {
        self.sum + self.comp
    }
}

pub(crate) fn compensated_sum(xs: impl IntoIterator<Item = f64>) -> f64 {
    let mut acc = CompensatedSum::default();
    for x in xs {
        acc.add(x);
    }
    acc.value()
}
