//! Site network, decoherence rates, and the transfer-efficiency functional.
//!
//! The FMO complex is modeled as seven bosonic sites exchanging excitations,
//! with site 3 feeding an irreversible reaction center ("sink", counted as
//! site 8). Site indices are 1-based everywhere in the public API; the sink
//! is never part of the 7-site network itself.

use thiserror::Error;

/// Number of chromophore sites in the network (the sink is separate).
pub const N_SITES: usize = 7;

/// Index (1-based) of the site that feeds the reaction center.
pub const SINK_SOURCE_SITE: usize = 3;

/// Conversion constant: 1 ps^-1 = 5.3 cm^-1 with hbar = 1.
///
/// Kept at exactly 5.3 rather than a higher-precision physical conversion so
/// that energies in ps^-1 round-trip the published matrix entries.
pub const WAVENUMBERS_PER_INV_PS: f64 = 5.3;

/// 7-site FMO Hamiltonian in the site basis, in cm^-1.
///
/// Diagonal entries are site excitation energies relative to a common offset
/// (site 3 defines the zero); off-diagonal entries are hopping rates.
const FMO_HAMILTONIAN_CM: [[f64; N_SITES]; N_SITES] = [
    [215.0, -104.1, 5.1, -4.3, 4.7, -15.1, -7.8],
    [-104.1, 220.0, 32.6, 7.1, 5.4, 8.3, 0.8],
    [5.1, 32.6, 0.0, -46.8, 1.0, -8.1, 5.1],
    [-4.3, 7.1, -46.8, 125.0, -70.7, -14.7, -61.5],
    [4.7, 5.4, 1.0, -70.7, 450.0, 89.7, -2.5],
    [-15.1, 8.3, -8.1, -14.7, 89.7, 330.0, 32.7],
    [-7.8, 0.8, 5.1, -61.5, -2.5, 32.7, 280.0],
];

/// Errors from constructing or validating model data.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum ModelError {
    #[error("site index {0} out of range (valid: 1..={N_SITES})")]
    SiteOutOfRange(usize),
    #[error("matrix element [{i}][{j}] = {a} != [{j}][{i}] = {b}; network must be symmetric")]
    Asymmetric { i: usize, j: usize, a: f64, b: f64 },
    #[error("expected network in {expected:?} units, got {found:?}")]
    WrongUnit { expected: Unit, found: Unit },
    #[error("initial excitation count must be at least 1")]
    ZeroExcitations,
    #[error("invalid run configuration: {0}")]
    InvalidConfig(String),
}

/// Unit tag for [`SiteNetwork`] matrix elements.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Unit {
    /// Spectroscopic wavenumbers, cm^-1.
    Wavenumber,
    /// Angular frequency in ps^-1 (hbar = 1); the unit the propagators use.
    AngularPs,
}

/// 1-based chromophore site index, guaranteed in `1..=7`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Site(u8);

impl Site {
    pub fn new(index: usize) -> Result<Self, ModelError> {
        if (1..=N_SITES).contains(&index) {
            Ok(Site(index as u8))
        } else {
            Err(ModelError::SiteOutOfRange(index))
        }
    }

    /// The 1-based site number.
    pub fn number(self) -> usize {
        self.0 as usize
    }

    /// Zero-based storage offset.
    pub(crate) fn idx(self) -> usize {
        self.0 as usize - 1
    }

    /// All seven sites in order.
    pub fn all() -> impl Iterator<Item = Site> {
        (1..=N_SITES).map(|i| Site(i as u8))
    }
}

impl std::fmt::Display for Site {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// Symmetric matrix of site energies (diagonal) and hopping rates
/// (off-diagonal) with an explicit unit tag.
#[derive(Debug, Clone, PartialEq)]
pub struct SiteNetwork {
    elements: [[f64; N_SITES]; N_SITES],
    unit: Unit,
}

impl SiteNetwork {
    /// Builds a network from a symmetric matrix. Rejects asymmetric input.
    pub fn new(elements: [[f64; N_SITES]; N_SITES], unit: Unit) -> Result<Self, ModelError> {
        for i in 0..N_SITES {
            for j in (i + 1)..N_SITES {
                if elements[i][j] != elements[j][i] {
                    return Err(ModelError::Asymmetric {
                        i: i + 1,
                        j: j + 1,
                        a: elements[i][j],
                        b: elements[j][i],
                    });
                }
            }
        }
        Ok(SiteNetwork { elements, unit })
    }

    pub fn unit(&self) -> Unit {
        self.unit
    }

    pub fn n_sites(&self) -> usize {
        N_SITES
    }

    /// Matrix element between two 1-based sites.
    pub fn element(&self, i: Site, j: Site) -> f64 {
        self.elements[i.idx()][j.idx()]
    }

    /// Site excitation energy (diagonal element).
    pub fn site_energy(&self, j: Site) -> f64 {
        self.elements[j.idx()][j.idx()]
    }

    /// Hopping rate between two distinct sites (off-diagonal element).
    pub fn hopping(&self, i: Site, j: Site) -> f64 {
        debug_assert_ne!(i, j, "hopping is defined between distinct sites");
        self.elements[i.idx()][j.idx()]
    }

    /// Converts wavenumber entries to angular ps^-1 by dividing by
    /// [`WAVENUMBERS_PER_INV_PS`]. Calling this on an already-converted
    /// network is an error rather than a no-op, so unit bugs surface early.
    pub fn to_angular(&self) -> Result<SiteNetwork, ModelError> {
        if self.unit != Unit::Wavenumber {
            return Err(ModelError::WrongUnit {
                expected: Unit::Wavenumber,
                found: self.unit,
            });
        }
        let mut elements = self.elements;
        for row in elements.iter_mut() {
            for x in row.iter_mut() {
                *x /= WAVENUMBERS_PER_INV_PS;
            }
        }
        Ok(SiteNetwork {
            elements,
            unit: Unit::AngularPs,
        })
    }

    /// Returns the network in angular ps^-1 units, converting if needed.
    pub(crate) fn ensure_angular(&self) -> SiteNetwork {
        match self.unit {
            Unit::Wavenumber => self.to_angular().expect("wavenumber input converts"),
            Unit::AngularPs => self.clone(),
        }
    }

    /// Raw matrix storage (zero-based) for the propagator inner loops.
    pub(crate) fn raw(&self) -> &[[f64; N_SITES]; N_SITES] {
        &self.elements
    }
}

/// The 7-site FMO Hamiltonian in cm^-1.
pub fn build_fmo_hamiltonian() -> SiteNetwork {
    SiteNetwork::new(FMO_HAMILTONIAN_CM, Unit::Wavenumber).expect("FMO matrix is symmetric")
}

/// Convenience free-function form of [`SiteNetwork::to_angular`].
pub fn to_angular(network: &SiteNetwork) -> Result<SiteNetwork, ModelError> {
    network.to_angular()
}

/// The full set of decoherence rates entering the master equation, all in
/// ps^-1: local dissipation and dephasing per site, non-local (cross-site)
/// dissipation and dephasing matrices, and the sink absorption rate.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct DecoherenceSpec {
    gamma_diss: [f64; N_SITES],
    gamma_deph: [f64; N_SITES],
    nl_diss: [[f64; N_SITES]; N_SITES],
    nl_deph: [[f64; N_SITES]; N_SITES],
    sink: f64,
}

impl DecoherenceSpec {
    /// All rates zero (including the sink, which then transfers nothing).
    pub fn none() -> Self {
        Self::default()
    }

    /// All rates zero except the sink absorption rate.
    pub fn with_sink(sink: f64) -> Self {
        DecoherenceSpec {
            sink,
            ..Self::default()
        }
    }

    pub fn sink(&self) -> f64 {
        self.sink
    }

    pub fn set_sink(&mut self, rate: f64) {
        self.sink = rate;
    }

    pub fn local_diss(&self, j: Site) -> f64 {
        self.gamma_diss[j.idx()]
    }

    pub fn local_deph(&self, j: Site) -> f64 {
        self.gamma_deph[j.idx()]
    }

    pub fn nl_diss(&self, i: Site, j: Site) -> f64 {
        self.nl_diss[i.idx()][j.idx()]
    }

    pub fn nl_deph(&self, i: Site, j: Site) -> f64 {
        self.nl_deph[i.idx()][j.idx()]
    }

    pub fn set_local_diss(&mut self, j: Site, rate: f64) {
        self.gamma_diss[j.idx()] = rate;
    }

    pub fn set_local_deph(&mut self, j: Site, rate: f64) {
        self.gamma_deph[j.idx()] = rate;
    }

    /// Sets a single directed non-local dissipation entry. The matrix must be
    /// symmetric to pass [`validate_rates`]; use [`set_nl_diss_pair`] to set
    /// both directions at once.
    pub fn set_nl_diss(&mut self, i: Site, j: Site, rate: f64) {
        self.nl_diss[i.idx()][j.idx()] = rate;
    }

    pub fn set_nl_deph(&mut self, i: Site, j: Site, rate: f64) {
        self.nl_deph[i.idx()][j.idx()] = rate;
    }

    pub fn set_nl_diss_pair(&mut self, i: Site, j: Site, rate: f64) {
        self.nl_diss[i.idx()][j.idx()] = rate;
        self.nl_diss[j.idx()][i.idx()] = rate;
    }

    pub fn set_nl_deph_pair(&mut self, i: Site, j: Site, rate: f64) {
        self.nl_deph[i.idx()][j.idx()] = rate;
        self.nl_deph[j.idx()][i.idx()] = rate;
    }

    pub fn set_all_local_diss(&mut self, rate: f64) {
        self.gamma_diss = [rate; N_SITES];
    }

    pub fn set_all_local_deph(&mut self, rate: f64) {
        self.gamma_deph = [rate; N_SITES];
    }

    /// Sets every off-diagonal non-local dissipation entry to `rate`.
    pub fn set_all_nl_diss(&mut self, rate: f64) {
        for i in 0..N_SITES {
            for j in 0..N_SITES {
                if i != j {
                    self.nl_diss[i][j] = rate;
                }
            }
        }
    }

    pub fn set_all_nl_deph(&mut self, rate: f64) {
        for i in 0..N_SITES {
            for j in 0..N_SITES {
                if i != j {
                    self.nl_deph[i][j] = rate;
                }
            }
        }
    }

    /// The seven local dephasing rates in site order, with the sink rate
    /// appended; the layout the optimizer searches over.
    pub fn dephasing_vector(&self) -> [f64; N_SITES + 1] {
        let mut v = [0.0; N_SITES + 1];
        v[..N_SITES].copy_from_slice(&self.gamma_deph);
        v[N_SITES] = self.sink;
        v
    }

    pub(crate) fn diss(&self) -> &[f64; N_SITES] {
        &self.gamma_diss
    }

    pub(crate) fn deph(&self) -> &[f64; N_SITES] {
        &self.gamma_deph
    }

    pub(crate) fn nl_diss_raw(&self) -> &[[f64; N_SITES]; N_SITES] {
        &self.nl_diss
    }

    pub(crate) fn nl_deph_raw(&self) -> &[[f64; N_SITES]; N_SITES] {
        &self.nl_deph
    }
}

/// One violated entry found by [`validate_rates`].
#[derive(Debug, Clone, PartialEq)]
pub struct RateViolation {
    /// Which entry is at fault, e.g. `gamma_deph[2]` or `nl_diss[1][7]`.
    pub entry: String,
    pub kind: ViolationKind,
}

#[derive(Debug, Clone, PartialEq)]
pub enum ViolationKind {
    Negative(f64),
    NonFinite(f64),
    /// Off-diagonal pair differs: the mirrored entry holds `other`.
    Asymmetric { value: f64, other: f64 },
    NonzeroDiagonal(f64),
}

impl std::fmt::Display for RateViolation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match &self.kind {
            ViolationKind::Negative(v) => write!(f, "{} = {} is negative", self.entry, v),
            ViolationKind::NonFinite(v) => write!(f, "{} = {} is not finite", self.entry, v),
            ViolationKind::Asymmetric { value, other } => write!(
                f,
                "{} = {} but the mirrored entry is {}; matrix must be symmetric",
                self.entry, value, other
            ),
            ViolationKind::NonzeroDiagonal(v) => {
                write!(f, "{} = {} but the diagonal must be zero", self.entry, v)
            }
        }
    }
}

/// Checks every rate against the model's admissibility rules: entrywise
/// non-negative and finite, non-local matrices symmetric with zero diagonal.
/// Returns the full list of violations rather than stopping at the first.
pub fn validate_rates(spec: &DecoherenceSpec) -> Result<(), Vec<RateViolation>> {
    let mut violations = Vec::new();
    let mut check_scalar = |entry: String, v: f64| {
        if !v.is_finite() {
            violations.push(RateViolation {
                entry,
                kind: ViolationKind::NonFinite(v),
            });
        } else if v < 0.0 {
            violations.push(RateViolation {
                entry,
                kind: ViolationKind::Negative(v),
            });
        }
    };

    for j in 0..N_SITES {
        check_scalar(format!("gamma_diss[{}]", j + 1), spec.gamma_diss[j]);
        check_scalar(format!("gamma_deph[{}]", j + 1), spec.gamma_deph[j]);
    }
    check_scalar("sink".to_string(), spec.sink);

    for (name, m) in [("nl_diss", &spec.nl_diss), ("nl_deph", &spec.nl_deph)] {
        for i in 0..N_SITES {
            for j in 0..N_SITES {
                let entry = format!("{}[{}][{}]", name, i + 1, j + 1);
                let v = m[i][j];
                if i == j {
                    if v != 0.0 {
                        violations.push(RateViolation {
                            entry,
                            kind: ViolationKind::NonzeroDiagonal(v),
                        });
                    }
                    continue;
                }
                check_scalar(entry.clone(), v);
                if i < j && v != m[j][i] {
                    violations.push(RateViolation {
                        entry,
                        kind: ViolationKind::Asymmetric {
                            value: v,
                            other: m[j][i],
                        },
                    });
                }
            }
        }
    }

    if violations.is_empty() {
        Ok(())
    } else {
        Err(violations)
    }
}

/// Rescaled reaction-center population: sink population over the initial
/// excitation count. Deliberately not clamped to [0, 1]; a closure that
/// overshoots should be visible, not hidden.
pub fn transfer_efficiency(sink_population: f64, n0: u32) -> Result<f64, ModelError> {
    if n0 == 0 {
        return Err(ModelError::ZeroExcitations);
    }
    Ok(sink_population / f64::from(n0))
}

/// Which closed set of equations propagates the dynamics.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Theory {
    /// Complex site amplitudes; dissipation and dephasing act identically.
    Semiclassical,
    /// Second-moment matrix with the sink correlation factorized.
    MeanField,
    /// Exact density-matrix propagation in a truncated excitation sector.
    Oracle,
}

impl std::fmt::Display for Theory {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Theory::Semiclassical => write!(f, "semiclassical"),
            Theory::MeanField => write!(f, "meanfield"),
            Theory::Oracle => write!(f, "oracle"),
        }
    }
}

/// Default integration horizon, ps.
pub const DEFAULT_HORIZON_PS: f64 = 5.0;
/// Default integrator step, ps: about 74 steps per period of the fastest
/// site energy (450 cm^-1 / 5.3 ~ 85 ps^-1).
pub const DEFAULT_STEP_PS: f64 = 1e-3;
/// Default trajectory sampling interval, ps.
pub const DEFAULT_SAMPLE_INTERVAL_PS: f64 = 1e-2;

/// Simulation run parameters shared by all three propagators.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RunConfig {
    theory: Theory,
    n0: u32,
    horizon: f64,
    step: f64,
    sample_interval: f64,
}

impl RunConfig {
    /// Builds a config, validating `horizon > 0` and `0 < step <= horizon`.
    /// The sample interval defaults to 0.01 ps, clamped into `[step, horizon]`.
    pub fn new(theory: Theory, n0: u32, horizon: f64, step: f64) -> Result<Self, ModelError> {
        if n0 == 0 {
            return Err(ModelError::ZeroExcitations);
        }
        if !(horizon > 0.0 && horizon.is_finite()) {
            return Err(ModelError::InvalidConfig(format!(
                "horizon must be positive and finite, got {horizon}"
            )));
        }
        if !(step > 0.0 && step.is_finite()) {
            return Err(ModelError::InvalidConfig(format!(
                "step must be positive and finite, got {step}"
            )));
        }
        if step > horizon {
            return Err(ModelError::InvalidConfig(format!(
                "step {step} exceeds horizon {horizon}"
            )));
        }
        let sample_interval = DEFAULT_SAMPLE_INTERVAL_PS.clamp(step, horizon);
        Ok(RunConfig {
            theory,
            n0,
            horizon,
            step,
            sample_interval,
        })
    }

    /// Config with the standard 5 ps horizon and 0.001 ps step.
    pub fn standard(theory: Theory, n0: u32) -> Result<Self, ModelError> {
        Self::new(theory, n0, DEFAULT_HORIZON_PS, DEFAULT_STEP_PS)
    }

    pub fn with_sample_interval(mut self, sample_interval: f64) -> Result<Self, ModelError> {
        if !(sample_interval >= self.step && sample_interval <= self.horizon) {
            return Err(ModelError::InvalidConfig(format!(
                "sample interval {sample_interval} must lie in [step, horizon] = [{}, {}]",
                self.step, self.horizon
            )));
        }
        self.sample_interval = sample_interval;
        Ok(self)
    }

    pub fn with_theory(mut self, theory: Theory) -> Self {
        self.theory = theory;
        self
    }

    pub fn with_n0(mut self, n0: u32) -> Result<Self, ModelError> {
        if n0 == 0 {
            return Err(ModelError::ZeroExcitations);
        }
        self.n0 = n0;
        Ok(self)
    }

    pub fn theory(&self) -> Theory {
        self.theory
    }

    pub fn n0(&self) -> u32 {
        self.n0
    }

    pub fn horizon(&self) -> f64 {
        self.horizon
    }

    pub fn step(&self) -> f64 {
        self.step
    }

    pub fn sample_interval(&self) -> f64 {
        self.sample_interval
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn site(i: usize) -> Site {
        Site::new(i).unwrap()
    }

    #[test]
    fn fmo_hamiltonian_matches_published_entries() {
        let h = build_fmo_hamiltonian();
        assert_eq!(h.unit(), Unit::Wavenumber);
        assert_eq!(h.element(site(1), site(2)), -104.1);
        assert_eq!(h.site_energy(site(3)), 0.0);
        assert_eq!(h.element(site(2), site(1)), h.element(site(1), site(2)));
        let diag: Vec<f64> = Site::all().map(|j| h.site_energy(j)).collect();
        assert_eq!(diag, vec![215.0, 220.0, 0.0, 125.0, 450.0, 330.0, 280.0]);
    }

    #[test]
    fn fmo_hamiltonian_is_symmetric() {
        let h = build_fmo_hamiltonian();
        for i in Site::all() {
            for j in Site::all() {
                assert_eq!(h.element(i, j), h.element(j, i));
            }
        }
    }

    #[test]
    fn asymmetric_matrix_rejected() {
        let mut m = [[0.0; N_SITES]; N_SITES];
        m[0][1] = 1.0;
        assert!(matches!(
            SiteNetwork::new(m, Unit::Wavenumber),
            Err(ModelError::Asymmetric { i: 1, j: 2, .. })
        ));
    }

    #[test]
    fn to_angular_divides_by_conversion_constant() {
        let h = build_fmo_hamiltonian().to_angular().unwrap();
        assert_eq!(h.unit(), Unit::AngularPs);
        assert_relative_eq!(h.site_energy(site(1)), 215.0 / 5.3, max_relative = 1e-15);
        assert_relative_eq!(h.site_energy(site(1)), 40.566, max_relative = 1e-4);
        assert_eq!(h.site_energy(site(3)), 0.0);
        assert_relative_eq!(
            h.hopping(site(1), site(2)),
            -104.1 / 5.3,
            max_relative = 1e-15
        );
        assert_relative_eq!(h.hopping(site(1), site(2)), -19.642, max_relative = 1e-4);
    }

    #[test]
    fn to_angular_rejects_angular_input() {
        let h = build_fmo_hamiltonian().to_angular().unwrap();
        assert_eq!(
            h.to_angular(),
            Err(ModelError::WrongUnit {
                expected: Unit::Wavenumber,
                found: Unit::AngularPs,
            })
        );
    }

    #[test]
    fn to_angular_preserves_symmetry_and_zero_pattern() {
        let cm = build_fmo_hamiltonian();
        let ps = cm.to_angular().unwrap();
        for i in Site::all() {
            for j in Site::all() {
                assert_eq!(ps.element(i, j), ps.element(j, i));
                assert_eq!(cm.element(i, j) == 0.0, ps.element(i, j) == 0.0);
            }
        }
    }

    #[test]
    fn validate_rates_accepts_zero_spec_with_sink() {
        let spec = DecoherenceSpec::with_sink(0.32);
        assert!(validate_rates(&spec).is_ok());
    }

    #[test]
    fn validate_rates_accepts_symmetric_nonlocal_pairs() {
        let mut spec = DecoherenceSpec::with_sink(0.32);
        spec.set_nl_deph_pair(site(1), site(7), 0.74);
        spec.set_nl_deph_pair(site(2), site(5), 24.0);
        assert_eq!(spec.nl_deph(site(7), site(1)), 0.74);
        assert!(validate_rates(&spec).is_ok());
    }

    #[test]
    fn validate_rates_flags_asymmetry() {
        let mut spec = DecoherenceSpec::none();
        spec.set_nl_diss(site(1), site(2), 1.0);
        let violations = validate_rates(&spec).unwrap_err();
        assert_eq!(violations.len(), 1);
        assert_eq!(violations[0].entry, "nl_diss[1][2]");
        assert!(matches!(
            violations[0].kind,
            ViolationKind::Asymmetric { value: 1.0, other: 0.0 }
        ));
    }

    #[test]
    fn validate_rates_flags_negative_and_diagonal_entries() {
        let mut spec = DecoherenceSpec::none();
        spec.set_local_deph(site(4), -0.1);
        spec.set_nl_deph(site(2), site(2), 5.0);
        let violations = validate_rates(&spec).unwrap_err();
        let entries: Vec<&str> = violations.iter().map(|v| v.entry.as_str()).collect();
        assert!(entries.contains(&"gamma_deph[4]"));
        assert!(entries.contains(&"nl_deph[2][2]"));
    }

    #[test]
    fn efficiency_is_sink_over_n0() {
        assert_eq!(transfer_efficiency(62.5, 100).unwrap(), 0.625);
        assert_eq!(transfer_efficiency(0.0, 100).unwrap(), 0.0);
        assert_eq!(transfer_efficiency(91.77, 100).unwrap(), 0.9177);
        assert_eq!(
            transfer_efficiency(1.0, 0),
            Err(ModelError::ZeroExcitations)
        );
    }

    #[test]
    fn run_config_validates_times() {
        assert!(RunConfig::new(Theory::MeanField, 100, 5.0, 1e-3).is_ok());
        assert!(RunConfig::new(Theory::MeanField, 0, 5.0, 1e-3).is_err());
        assert!(RunConfig::new(Theory::MeanField, 1, -1.0, 1e-3).is_err());
        assert!(RunConfig::new(Theory::MeanField, 1, 5.0, 0.0).is_err());
        assert!(RunConfig::new(Theory::MeanField, 1, 1.0, 2.0).is_err());
        let c = RunConfig::new(Theory::MeanField, 1, 0.005, 1e-3).unwrap();
        assert_eq!(c.sample_interval(), 0.005);
    }

    #[test]
    fn site_index_bounds() {
        assert!(Site::new(0).is_err());
        assert!(Site::new(8).is_err());
        assert_eq!(Site::new(3).unwrap().number(), 3);
    }
}
