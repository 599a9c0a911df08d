//! Bath cluster states and the classification of their coherences.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::linalg::{ComplexMatrix, DensityMatrix, Tolerances, C64};
use crate::spin::{binomial, BasisOrdering, CollectiveOps, DEFAULT_MAX_QUBITS};

/// Operator matrix elements below this modulus count as zero.
pub const EFFECTIVE_THRESHOLD: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub enum BathKind {
    ProductMixed { p_e: f64 },
    ThermalHec { n_bar: f64 },
    DickeBlock { k: usize },
    Explicit(DensityMatrix),
}

/// Declarative bath description; materialize it with [`validate_bath`].
#[derive(Debug, Clone, PartialEq)]
pub struct BathSpec {
    pub n: usize,
    pub kind: BathKind,
}

impl BathSpec {
    pub fn product_mixed(n: usize, p_e: f64) -> Self {
        BathSpec { n, kind: BathKind::ProductMixed { p_e } }
    }

    pub fn thermal_hec(n: usize, n_bar: f64) -> Self {
        BathSpec { n, kind: BathKind::ThermalHec { n_bar } }
    }

    pub fn dicke(n: usize, k: usize) -> Self {
        BathSpec { n, kind: BathKind::DickeBlock { k } }
    }

    pub fn explicit(n: usize, rho: DensityMatrix) -> Self {
        BathSpec { n, kind: BathKind::Explicit(rho) }
    }

    pub fn kind_tag(&self) -> &'static str {
        match self.kind {
            BathKind::ProductMixed { .. } => "product",
            BathKind::ThermalHec { .. } => "thermal-hec",
            BathKind::DickeBlock { .. } => "dicke",
            BathKind::Explicit(_) => "explicit",
        }
    }
}

fn check_qubits(n: usize) -> Result<()> {
    if n == 0 {
        return Err(Error::range("N", "need at least one bath qubit"));
    }
    if n > DEFAULT_MAX_QUBITS {
        return Err(Error::TooManyQubits { n, max: DEFAULT_MAX_QUBITS });
    }
    Ok(())
}

/// ⊗ᵢ (p_g|g⟩⟨g| + p_e|e⟩⟨e|).
pub fn product_mixed_state(n: usize, p_e: f64) -> Result<DensityMatrix> {
    check_qubits(n)?;
    if !(0.0..=1.0).contains(&p_e) {
        return Err(Error::range("p_e", format!("{p_e} is not a probability")));
    }
    let basis = BasisOrdering::new(n);
    let diag: Vec<f64> = (0..basis.dim())
        .map(|s| {
            let k = basis.excitation(s) as i32;
            p_e.powi(k) * (1.0 - p_e).powi(n as i32 - k)
        })
        .collect();
    Ok(DensityMatrix::from_trusted(ComplexMatrix::from_real_diag(&diag)))
}

/// Ratio r = n̄/(n̄+1) of consecutive ladder populations in a thermal state.
pub fn thermal_ratio(n_bar: f64) -> f64 {
    n_bar / (n_bar + 1.0)
}

/// Per-entry weights d_k of the thermally prepared block-diagonal state.
pub fn thermal_hec_weights(n: usize, n_bar: f64) -> Result<Vec<f64>> {
    if !(n_bar >= 0.0 && n_bar.is_finite()) {
        return Err(Error::range("n_bar", format!("{n_bar} must be finite and non-negative")));
    }
    let r = thermal_ratio(n_bar);
    let norm = (1.0 - r) / (1.0 - r.powi(n as i32 + 1));
    Ok((0..=n).map(|k| norm * r.powi(k as i32) / binomial(n, k) as f64).collect())
}

/// Block-diagonal state with block k equal to d_k times the all-ones matrix.
pub fn thermal_hec_state(n: usize, n_bar: f64) -> Result<DensityMatrix> {
    check_qubits(n)?;
    let d = thermal_hec_weights(n, n_bar)?;
    let basis = BasisOrdering::new(n);
    let mut m = ComplexMatrix::zeros(basis.dim(), basis.dim());
    for (k, &dk) in d.iter().enumerate() {
        let range = basis.block_range(k);
        for i in range.clone() {
            for j in range.clone() {
                m[(i, j)] = C64::new(dk, 0.0);
            }
        }
    }
    Ok(DensityMatrix::from_trusted(m))
}

/// Projector onto the symmetric Dicke state with `k` excitations.
pub fn dicke_block_state(n: usize, k: usize) -> Result<DensityMatrix> {
    check_qubits(n)?;
    if k > n {
        return Err(Error::range("k", format!("{k} excitations for {n} qubits")));
    }
    let basis = BasisOrdering::new(n);
    let range = basis.block_range(k);
    let w = C64::new(1.0 / range.len() as f64, 0.0);
    let mut m = ComplexMatrix::zeros(basis.dim(), basis.dim());
    for i in range.clone() {
        for j in range.clone() {
            m[(i, j)] = w;
        }
    }
    Ok(DensityMatrix::from_trusted(m))
}

/// Materializes a bath description into a validated density matrix.
pub fn validate_bath(spec: &BathSpec) -> Result<DensityMatrix> {
    validate_bath_with(spec, &Tolerances::default())
}

pub fn validate_bath_with(spec: &BathSpec, tol: &Tolerances) -> Result<DensityMatrix> {
    check_qubits(spec.n)?;
    match &spec.kind {
        BathKind::ProductMixed { p_e } => product_mixed_state(spec.n, *p_e),
        BathKind::ThermalHec { n_bar } => thermal_hec_state(spec.n, *n_bar),
        BathKind::DickeBlock { k } => dicke_block_state(spec.n, *k),
        BathKind::Explicit(rho) => {
            if rho.dim() != 1 << spec.n {
                return Err(Error::state("dimension", format!("dim {} for N = {}", rho.dim(), spec.n)));
            }
            DensityMatrix::validate(rho.matrix().clone(), tol)
        }
    }
}

/// Header line of explicit bath CSV files.
pub fn explicit_csv_header(n: usize) -> String {
    format!("N={n},basis=excitation-sorted")
}

/// Parses an explicit bath matrix: a header line `N=<n>,basis=excitation-sorted`
/// followed by 2^N rows of 2^N complex cells such as `0.25`, `0.1-0.2i`.
pub fn parse_explicit_csv(text: &str) -> Result<(usize, ComplexMatrix)> {
    let mut lines = text.lines().filter(|l| !l.trim().is_empty());
    let header = lines.next().ok_or_else(|| Error::Parse("empty bath file".into()))?;
    let mut n = None;
    let mut basis_ok = false;
    for field in header.split(',') {
        match field.trim().split_once('=') {
            Some(("N", v)) => n = Some(v.trim().parse::<usize>().map_err(|e| Error::Parse(format!("N: {e}")))?),
            Some(("basis", "excitation-sorted")) => basis_ok = true,
            Some(("basis", other)) => return Err(Error::Parse(format!("unsupported basis `{other}`"))),
            _ => return Err(Error::Parse(format!("unexpected header field `{field}`"))),
        }
    }
    let n = n.ok_or_else(|| Error::Parse("header lacks N=<n>".into()))?;
    if !basis_ok {
        return Err(Error::Parse("header lacks basis=excitation-sorted".into()));
    }
    check_qubits(n)?;
    let dim = 1usize << n;
    let mut data = Vec::with_capacity(dim * dim);
    let mut rows = 0;
    for (row, line) in lines.enumerate() {
        let cells: Vec<&str> = line.split(',').collect();
        if cells.len() != dim {
            return Err(Error::Parse(format!("row {row} has {} cells, expected {dim}", cells.len())));
        }
        for cell in cells {
            let z = C64::from_str(cell.trim()).map_err(|_| Error::Parse(format!("bad complex number `{cell}`")))?;
            data.push(z);
        }
        rows += 1;
    }
    if rows != dim {
        return Err(Error::Parse(format!("{rows} rows, expected {dim}")));
    }
    Ok((n, ComplexMatrix::from_vec(dim, dim, data)?))
}

pub fn write_explicit_csv(n: usize, m: &ComplexMatrix) -> String {
    let mut out = explicit_csv_header(n);
    out.push('\n');
    for i in 0..m.rows() {
        let cells: Vec<String> = m.row(i).iter().map(|z| format_complex(*z)).collect();
        out.push_str(&cells.join(","));
        out.push('\n');
    }
    out
}

pub(crate) fn format_complex(z: C64) -> String {
    let sign = if z.im.is_sign_negative() { '-' } else { '+' };
    format!("{:.16e}{}{:.16e}i", z.re, sign, z.im.abs())
}

/// Role a bath coherence plays in the target-qubit master equation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Coherence {
    Population,
    Hec,
    Displacement,
    Squeezing,
    Ineffective,
}

impl Coherence {
    pub const ALL: [Coherence; 5] =
        [Coherence::Population, Coherence::Hec, Coherence::Displacement, Coherence::Squeezing, Coherence::Ineffective];

    pub fn name(self) -> &'static str {
        match self {
            Coherence::Population => "population",
            Coherence::Hec => "hec",
            Coherence::Displacement => "displacement",
            Coherence::Squeezing => "squeezing",
            Coherence::Ineffective => "ineffective",
        }
    }
}

impl fmt::Display for Coherence {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Set of effectiveness tests that fired for an off-diagonal entry.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Hash)]
pub struct LabelSet(u8);

impl LabelSet {
    const POPULATION: u8 = 1;
    const HEC: u8 = 2;
    const DISPLACEMENT: u8 = 4;
    const SQUEEZING: u8 = 8;

    fn bit(c: Coherence) -> u8 {
        match c {
            Coherence::Population => Self::POPULATION,
            Coherence::Hec => Self::HEC,
            Coherence::Displacement => Self::DISPLACEMENT,
            Coherence::Squeezing => Self::SQUEEZING,
            Coherence::Ineffective => 0,
        }
    }

    pub fn contains(self, c: Coherence) -> bool {
        match c {
            Coherence::Ineffective => self.0 == 0,
            other => self.0 & Self::bit(other) != 0,
        }
    }

    fn insert(&mut self, c: Coherence) {
        self.0 |= Self::bit(c);
    }

    /// Reporting label, by precedence displacement > squeezing > HEC.
    pub fn primary(self) -> Coherence {
        [Coherence::Population, Coherence::Displacement, Coherence::Squeezing, Coherence::Hec]
            .into_iter()
            .find(|&c| self.contains(c))
            .unwrap_or(Coherence::Ineffective)
    }

    pub fn labels(self) -> Vec<Coherence> {
        if self.0 == 0 {
            return vec![Coherence::Ineffective];
        }
        Coherence::ALL.into_iter().filter(|&c| c != Coherence::Ineffective && self.contains(c)).collect()
    }
}

/// Per-entry classification of a bath density matrix.
#[derive(Debug, Clone)]
pub struct CoherenceMap {
    pub basis: BasisOrdering,
    labels: Vec<LabelSet>,
}

impl CoherenceMap {
    pub fn dim(&self) -> usize {
        self.basis.dim()
    }

    pub fn labels(&self, i: usize, j: usize) -> LabelSet {
        self.labels[i * self.dim() + j]
    }

    pub fn primary(&self, i: usize, j: usize) -> Coherence {
        self.labels(i, j).primary()
    }

    /// Excitation numbers (k_i, k_j) of the entry.
    pub fn block_index(&self, i: usize, j: usize) -> (usize, usize) {
        (self.basis.excitation(i), self.basis.excitation(j))
    }

    /// Number of entries (ordered pairs) per primary label.
    pub fn counts(&self) -> Vec<(Coherence, usize)> {
        Coherence::ALL
            .into_iter()
            .map(|c| (c, self.labels.iter().filter(|l| l.primary() == c).count()))
            .collect()
    }
}

/// Labels every entry of `rho` by the collective-operator matrix elements
/// that couple its two basis states.
///
/// An off-diagonal entry (i, j) is an HEC when ⟨j|J₊J₋|i⟩ or ⟨j|J₋J₊|i⟩ is
/// nonzero, a displacement coherence when ⟨j|J±|i⟩ is nonzero, a squeezing
/// coherence when ⟨j|J±²|i⟩ is nonzero, and ineffective otherwise.
///
/// Note that the anti-diagonal is not ineffective in general: for N = 2 the
/// pair (|ge⟩, |eg⟩) sits on it and has ⟨eg|J₊J₋|ge⟩ = 1.
pub fn classify_coherences(rho: &DensityMatrix, ops: &CollectiveOps) -> Result<CoherenceMap> {
    let dim = rho.dim();
    if !dim.is_power_of_two() {
        return Err(Error::DimensionMismatch(format!("bath dimension {dim} is not a power of two")));
    }
    if dim != ops.dim() {
        return Err(Error::DimensionMismatch(format!("bath dimension {dim} vs operators for {} qubits", ops.qubits())));
    }
    let nonzero = |z: C64| z.norm() > EFFECTIVE_THRESHOLD;
    let mut labels = vec![LabelSet::default(); dim * dim];
    for i in 0..dim {
        labels[i * dim + i].insert(Coherence::Population);
    }
    let mut mark = |i: usize, j: usize, c: Coherence| {
        if i != j {
            labels[i * dim + j].insert(c);
            labels[j * dim + i].insert(c);
        }
    };
    // (op)_{ji} nonzero; the adjoint operators cover the transposed entries.
    for (j, i, v) in ops.j_plus_j_minus.iter().chain(ops.j_minus_j_plus.iter()) {
        if nonzero(v) {
            mark(i, j, Coherence::Hec);
        }
    }
    for (j, i, v) in ops.j_minus.iter() {
        if nonzero(v) {
            mark(i, j, Coherence::Displacement);
        }
    }
    for (j, i, v) in ops.j_minus_sq.iter() {
        if nonzero(v) {
            mark(i, j, Coherence::Squeezing);
        }
    }
    Ok(CoherenceMap { basis: ops.basis.clone(), labels })
}
