//! Command-line front end.

use std::ffi::OsString;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::json;

use crate::analysis::{
    amplitude_exponent, mirror_scan, normalize_to_max, replica_decomposition, scaling_exponent, time_grid,
    zq_pair_intensity,
};
use crate::chain::{
    collective_signal, magnetization_profile, transport_probability, two_spin_signal, ChainSpec, HamiltonianKind,
    InitialState, FAP_SPACING_M, FAP_STRUCTURAL_COUPLING,
};
use crate::error::{Error, Result};
use crate::io::{
    fit_signal, ingest_csv, report_json, synthetic_trace, table_to_csv, trace_to_csv, velocity_report, write_atomic,
    FitModel, SignalTrace,
};
use crate::liouville::{correlation_amplitudes, evolve_coefficients, x_basis_spectrum, z_basis_spectrum, Basis};
use crate::oracle;

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_NUMERICAL: i32 = 2;

#[derive(Debug, Parser)]
#[command(name = "dqchain", version, about = "Magnetization transport in DQ and XX spin chains")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ModelArg {
    Thermal,
    EndPolarized,
    SingleSite,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum HamiltonianArg {
    Dq,
    Xx,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum FormatArg {
    Csv,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum BasisArg {
    Z,
    X,
}

#[derive(Debug, Clone, Args)]
pub struct Common {
    /// Number of spins.
    #[arg(long = "N", default_value_t = 20)]
    pub n_sites: usize,
    /// Nearest-neighbour coupling d, rad/s.
    #[arg(long = "d-rads", default_value_t = FAP_STRUCTURAL_COUPLING)]
    pub d_rads: f64,
    /// Lattice spacing, metres.
    #[arg(long = "spacing-m", default_value_t = FAP_SPACING_M)]
    pub spacing_m: f64,
    /// End of the time grid, seconds [default: 1.5·N/(2d)].
    #[arg(long = "t-max")]
    pub t_max: Option<f64>,
    /// Number of grid intervals.
    #[arg(long = "t-steps", default_value_t = 200)]
    pub t_steps: usize,
    #[arg(long, value_enum, default_value_t = ModelArg::Thermal)]
    pub model: ModelArg,
    /// Source spin for `single-site`.
    #[arg(long, default_value_t = 1)]
    pub site: usize,
    #[arg(long, value_enum, default_value_t = HamiltonianArg::Dq)]
    pub hamiltonian: HamiltonianArg,
    /// Output file; stdout when absent.
    #[arg(long)]
    pub output: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub format: Option<FormatArg>,
    /// Seed for synthetic noise.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Magnetization profiles and collective signals on a time grid.
    Simulate {
        #[command(flatten)]
        common: Common,
        /// Emit a `t_seconds,signal[,sigma]` trace of the collective signal.
        #[arg(long)]
        trace: bool,
        /// Relative Gaussian noise added to the trace.
        #[arg(long, default_value_t = 0.0)]
        noise: f64,
    },
    /// Multi-spin correlation amplitudes along the chain.
    Correlations {
        #[command(flatten)]
        common: Common,
        /// Correlation order, 1 to 4.
        #[arg(long, default_value_t = 1)]
        order: usize,
    },
    /// Coherence-order spectra of the evolved state.
    Coherence {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_enum, default_value_t = BasisArg::Z)]
        basis: BasisArg,
        /// Scale each spectrum to unit total.
        #[arg(long)]
        normalize: bool,
    },
    /// Mirror-time scan and image decomposition.
    Mirror {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = 1)]
        source: usize,
        /// Target spin [default: N].
        #[arg(long)]
        target: Option<usize>,
        /// Also report zero-quantum pair intensity at this site.
        #[arg(long)]
        zq_site: Option<usize>,
    },
    /// Power-law exponent of end-to-end transfer.
    Scaling {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = 50)]
        n_min: usize,
        #[arg(long, default_value_t = 500)]
        n_max: usize,
    },
    /// Fit a measured trace with the three-parameter model.
    Fit {
        #[command(flatten)]
        common: Common,
        /// CSV trace with header `t_seconds,signal[,sigma]`.
        #[arg(long)]
        input: PathBuf,
        /// Starting coupling, rad/s.
        #[arg(long, default_value_t = FAP_STRUCTURAL_COUPLING)]
        init_d: f64,
        /// Time window for the velocity report, seconds.
        #[arg(long, default_value_t = 1.5e-3)]
        window_s: f64,
    },
    /// Group velocity and distance covered in a time window.
    Velocity {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = 1.5e-3)]
        window_s: f64,
    },
    /// Compare closed forms with the dense simulator.
    OracleCheck {
        #[command(flatten)]
        common: Common,
        /// Largest tolerated deviation.
        #[arg(long, default_value_t = 1e-10)]
        tolerance: f64,
    },
    /// Weight lost from the bilinear space under long-range couplings.
    Leakage {
        #[command(flatten)]
        common: Common,
        /// Largest coupled distance [default: N−1].
        #[arg(long)]
        cutoff: Option<usize>,
        #[arg(long, default_value_t = 3.0)]
        range_power: f64,
    },
}

impl Common {
    fn spec(&self) -> Result<ChainSpec> {
        ChainSpec::with_spacing(self.n_sites, self.d_rads, self.spacing_m)
    }

    fn kind(&self) -> HamiltonianKind {
        match self.hamiltonian {
            HamiltonianArg::Dq => HamiltonianKind::Dq,
            HamiltonianArg::Xx => HamiltonianKind::Xx,
        }
    }

    fn state(&self) -> InitialState {
        match self.model {
            ModelArg::Thermal => InitialState::Thermal,
            ModelArg::EndPolarized => InitialState::EndPolarized,
            ModelArg::SingleSite => InitialState::SingleSite(self.site),
        }
    }

    fn grid(&self, spec: &ChainSpec) -> Result<Vec<f64>> {
        let t_max = self.t_max.unwrap_or(1.5 * spec.mirror_time());
        if !(t_max > 0.0 && t_max.is_finite()) || self.t_steps == 0 {
            return Err(Error::InvalidSpec("need t-max > 0 and t-steps ≥ 1".into()));
        }
        Ok(time_grid(t_max, self.t_steps))
    }

    fn format(&self, default: FormatArg) -> FormatArg {
        self.format.unwrap_or(default)
    }

    fn emit(&self, text: String) -> Result<()> {
        match &self.output {
            Some(path) => write_atomic(path, text.as_bytes()),
            None => {
                print!("{text}");
                Ok(())
            }
        }
    }
}

/// Exit status for an error: bad input is a usage error, everything the
/// numerics reject is a numerical failure.
pub fn exit_code(err: &Error) -> i32 {
    match err {
        Error::SiteOutOfRange { .. }
        | Error::InvalidSpec(_)
        | Error::SizeCap { .. }
        | Error::Parse { .. }
        | Error::NonMonotonic { .. }
        | Error::Io(_) => EXIT_USAGE,
        Error::NotHermitian(_)
        | Error::Aliasing { .. }
        | Error::EmptyGrid
        | Error::DegenerateRange(_)
        | Error::DegenerateTrace(_)
        | Error::Json(_) => EXIT_NUMERICAL,
    }
}

/// Parse `argv` and run; returns the process exit status.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    match execute(&cli.command) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}

fn json<T: Serialize>(name: &str, body: T) -> Result<String> {
    report_json(name, body)
}

pub fn execute(command: &Command) -> Result<i32> {
    match command {
        Command::Simulate { common, trace, noise } => simulate(common, *trace, *noise),
        Command::Correlations { common, order } => correlations(common, *order),
        Command::Coherence { common, basis, normalize } => coherence(common, *basis, *normalize),
        Command::Mirror { common, source, target, zq_site } => mirror(common, *source, *target, *zq_site),
        Command::Scaling { common, n_min, n_max } => scaling(common, *n_min, *n_max),
        Command::Fit { common, input, init_d, window_s } => fit(common, input, *init_d, *window_s),
        Command::Velocity { common, window_s } => velocity(common, *window_s),
        Command::OracleCheck { common, tolerance } => oracle_check(common, *tolerance),
        Command::Leakage { common, cutoff, range_power } => leakage(common, *cutoff, *range_power),
    }
}

fn simulate(c: &Common, trace: bool, noise: f64) -> Result<i32> {
    let spec = c.spec()?;
    let grid = c.grid(&spec)?;
    let (state, kind) = (c.state(), c.kind());
    if trace {
        if !(noise >= 0.0 && noise.is_finite()) {
            return Err(Error::InvalidSpec(format!("noise must be non-negative, got {noise}")));
        }
        let values = grid
            .iter()
            .map(|&t| collective_signal(&spec, state, kind, t))
            .collect::<Result<Vec<f64>>>()?;
        let mut tr = SignalTrace::new(grid.clone(), values, None)?;
        if noise > 0.0 {
            // Same seeded noise stream as the synthetic fit traces.
            let zero = synthetic_trace(FitModel::Thermal, 1.0, 1.0, 0.0, &grid, noise, c.seed)?;
            let clean = synthetic_trace(FitModel::Thermal, 1.0, 1.0, 0.0, &grid, 0.0, c.seed)?;
            let amp = tr.values.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
            for ((v, z), cl) in tr.values.iter_mut().zip(&zero.values).zip(&clean.values) {
                *v += (z - cl) * amp;
            }
            tr.sigma = Some(vec![noise * amp; grid.len()]);
        }
        tr.meta.insert("n_sites".into(), spec.n_sites.to_string());
        tr.meta.insert("d_rads".into(), format!("{:?}", spec.coupling));
        tr.meta.insert("state".into(), format!("{state:?}"));
        tr.meta.insert("hamiltonian".into(), format!("{kind:?}"));
        c.emit(trace_to_csv(&tr))?;
        return Ok(EXIT_OK);
    }
    let mut rows = Vec::with_capacity(grid.len());
    for &t in &grid {
        let mut row = vec![
            t,
            collective_signal(&spec, state, kind, t)?,
            two_spin_signal(&spec, state, kind, t)?,
        ];
        row.extend(magnetization_profile(&spec, state, kind, t)?);
        rows.push(row);
    }
    match c.format(FormatArg::Csv) {
        FormatArg::Csv => {
            let mut headers = vec!["t_seconds".to_string(), "collective".into(), "two_spin".into()];
            headers.extend((1..=spec.n_sites).map(|q| format!("sz_{q}")));
            let h: Vec<&str> = headers.iter().map(String::as_str).collect();
            c.emit(table_to_csv(&h, &rows)?)?;
        }
        FormatArg::Json => {
            let body = json!({
                "spec": spec,
                "state": state,
                "hamiltonian": kind,
                "times": grid,
                "collective": rows.iter().map(|r| r[1]).collect::<Vec<_>>(),
                "two_spin": rows.iter().map(|r| r[2]).collect::<Vec<_>>(),
                "profiles": rows.iter().map(|r| r[3..].to_vec()).collect::<Vec<_>>(),
            });
            c.emit(json("simulate", body)?)?;
        }
    }
    Ok(EXIT_OK)
}

fn correlations(c: &Common, order: usize) -> Result<i32> {
    let spec = c.spec()?;
    let grid = c.grid(&spec)?;
    let mut rows = Vec::new();
    for &t in &grid {
        for (n, a) in correlation_amplitudes(&spec, c.site, t, order)? {
            rows.push(vec![t, n as f64, a]);
        }
    }
    match c.format(FormatArg::Csv) {
        FormatArg::Csv => c.emit(table_to_csv(&["t_seconds", "site", "amplitude"], &rows)?)?,
        FormatArg::Json => c.emit(json(
            "correlations",
            json!({"spec": spec, "source": c.site, "order": order, "rows": rows}),
        )?)?,
    }
    Ok(EXIT_OK)
}

fn coherence(c: &Common, basis: BasisArg, normalize: bool) -> Result<i32> {
    let spec = c.spec()?;
    let grid = c.grid(&spec)?;
    let mut rows = Vec::new();
    for &t in &grid {
        let coeffs = evolve_coefficients(&spec, c.state(), c.kind(), t)?;
        let mut s = match basis {
            BasisArg::Z => z_basis_spectrum(&coeffs),
            BasisArg::X => x_basis_spectrum(&coeffs),
        };
        if normalize {
            s = s.normalized();
        }
        for (order, v) in &s.intensities {
            rows.push(vec![t, *order as f64, *v]);
        }
    }
    let basis_name = match basis {
        BasisArg::Z => Basis::Z,
        BasisArg::X => Basis::X,
    };
    match c.format(FormatArg::Csv) {
        FormatArg::Csv => c.emit(table_to_csv(&["t_seconds", "order", "intensity"], &rows)?)?,
        FormatArg::Json => c.emit(json(
            "coherence",
            json!({"spec": spec, "basis": basis_name, "normalized": normalize, "rows": rows}),
        )?)?,
    }
    Ok(EXIT_OK)
}

fn mirror(c: &Common, source: usize, target: Option<usize>, zq_site: Option<usize>) -> Result<i32> {
    let spec = c.spec()?;
    let grid = c.grid(&spec)?;
    let target = target.unwrap_or(spec.n_sites);
    let report = mirror_scan(&spec, source, target, &grid)?;
    let decomposition = replica_decomposition(&spec, source, target, report.mirror_time_estimate)?;
    let zq = match zq_site {
        Some(l) => Some(normalize_to_max(&zq_pair_intensity(&spec, source, l, &grid)?)),
        None => None,
    };
    match c.format(FormatArg::Json) {
        FormatArg::Json => {
            let terms: Vec<_> = decomposition
                .significant(1e-12)
                .into_iter()
                .map(|(m, v)| json!({"m": m, "re": v.re, "im": v.im}))
                .collect();
            c.emit(json(
                "mirror",
                json!({
                    "spec": spec,
                    "mirror_time_units": spec.mirror_time(),
                    "result": report,
                    "replica_terms_at_peak": terms,
                    "zq_pair_intensity": zq,
                }),
            )?)?;
        }
        FormatArg::Csv => {
            let mut rows = Vec::new();
            for (i, &t) in grid.iter().enumerate() {
                let d = replica_decomposition(&spec, source, target, t)?;
                let mut row = vec![t, d.sum().norm_sqr(), d.term(0).norm_sqr()];
                if let Some(z) = &zq {
                    row.push(z[i]);
                }
                rows.push(row);
            }
            let mut headers = vec!["t_seconds", "probability", "direct_probability"];
            if zq.is_some() {
                headers.push("zq_pair_intensity");
            }
            c.emit(table_to_csv(&headers, &rows)?)?;
        }
    }
    Ok(EXIT_OK)
}

fn scaling(c: &Common, n_min: usize, n_max: usize) -> Result<i32> {
    let d = c.d_rads;
    let exponent = scaling_exponent(n_min, n_max, d)?;
    let amp = amplitude_exponent(n_min, n_max, d)?;
    match c.format(FormatArg::Json) {
        FormatArg::Json => c.emit(json(
            "scaling",
            json!({"n_min": n_min, "n_max": n_max, "d_rads": d,
                   "probability_exponent": exponent, "amplitude_exponent": amp}),
        )?)?,
        FormatArg::Csv => {
            let rows: Vec<Vec<f64>> = (n_min..=n_max)
                .map(|n| {
                    let t = n as f64 / (2.0 * d);
                    vec![n as f64, t, transport_probability(n, t, d)]
                })
                .collect();
            c.emit(table_to_csv(&["site", "t_seconds", "probability"], &rows)?)?;
        }
    }
    Ok(EXIT_OK)
}

fn fit(c: &Common, input: &std::path::Path, init_d: f64, window_s: f64) -> Result<i32> {
    let model = match c.model {
        ModelArg::Thermal => FitModel::Thermal,
        ModelArg::EndPolarized => FitModel::EndPolarized,
        ModelArg::SingleSite => {
            return Err(Error::InvalidSpec("fit supports --model thermal or end-polarized".into()))
        }
    };
    let trace = ingest_csv(input)?;
    let result = fit_signal(&trace, model, init_d)?;
    let velocity = velocity_report(&result, c.spacing_m, window_s)?;
    c.emit(json(
        "fit",
        json!({"input": input.display().to_string(), "samples": trace.len(), "result": result, "velocity": velocity}),
    )?)?;
    Ok(if result.converged { EXIT_OK } else { EXIT_NUMERICAL })
}

fn velocity(c: &Common, window_s: f64) -> Result<i32> {
    let spec = c.spec()?;
    let fit = crate::io::FitResult {
        model: FitModel::Thermal,
        scale: 1.0,
        coupling_d: spec.coupling,
        baseline: 0.0,
        covariance: [[0.0; 3]; 3],
        residual_norm: 0.0,
        iterations: 0,
        converged: true,
    };
    let r = velocity_report(&fit, spec.spacing, window_s)?;
    match c.format(FormatArg::Json) {
        FormatArg::Json => c.emit(json("velocity", r)?)?,
        FormatArg::Csv => c.emit(table_to_csv(
            &["coupling_d", "spacing_m", "v_g", "window_s", "displacement_m", "sites_per_window"],
            &[vec![r.coupling_d, r.spacing_m, r.v_g, r.window_s, r.displacement_m, r.sites_per_window]],
        )?)?,
    }
    Ok(EXIT_OK)
}

/// Largest deviations between closed forms and the dense simulator.
#[derive(Debug, Clone, Default, Serialize)]
pub struct OracleDeviations {
    pub profile: f64,
    pub collective: f64,
    pub two_spin: f64,
    pub coefficients: f64,
    pub cases: usize,
}

/// Cross-check profiles, signals and coefficient vectors for every state and
/// Hamiltonian kind on `times`.
pub fn oracle_deviations(n: usize, d: f64, times: &[f64]) -> Result<OracleDeviations> {
    let spec = ChainSpec::new(n, d)?;
    let indices = oracle::all_bilinear_indices(n);
    let mut dev = OracleDeviations::default();
    let mut states: Vec<InitialState> = (1..=n).map(InitialState::SingleSite).collect();
    states.push(InitialState::Thermal);
    states.push(InitialState::EndPolarized);
    for kind in [HamiltonianKind::Dq, HamiltonianKind::Xx] {
        let h = oracle::build_hamiltonian(&oracle::HamiltonianSpec::for_kind(kind, n, d))?;
        let prop = oracle::Propagator::new(&h)?;
        for &state in &states {
            let rho0 = oracle::initial_density(n, state)?;
            for &t in times {
                let rho = prop.evolve(&rho0, t);
                let dense_profile = oracle::site_magnetization(&rho);
                let profile = magnetization_profile(&spec, state, kind, t)?;
                for (a, b) in profile.iter().zip(&dense_profile) {
                    dev.profile = dev.profile.max((a - b).abs());
                }
                let dense_collective: f64 = -dense_profile.iter().sum::<f64>();
                dev.collective = dev
                    .collective
                    .max((collective_signal(&spec, state, kind, t)? - dense_collective).abs());
                dev.two_spin = dev
                    .two_spin
                    .max((two_spin_signal(&spec, state, kind, t)? - oracle::two_spin_correlation(&rho)).abs());
                let coeffs = evolve_coefficients(&spec, state, kind, t)?;
                for (k, v) in oracle::project_bilinear(&rho, &indices) {
                    dev.coefficients = dev.coefficients.max((coeffs.get(&k) - v).norm());
                }
                dev.cases += 1;
            }
        }
    }
    Ok(dev)
}

fn oracle_check(c: &Common, tolerance: f64) -> Result<i32> {
    let n = c.n_sites;
    if !(2..=oracle::DEFAULT_SIZE_CAP).contains(&n) {
        return Err(Error::SizeCap { n_sites: n, cap: oracle::DEFAULT_SIZE_CAP });
    }
    let d = c.d_rads;
    let t_max = c.t_max.unwrap_or(12.0 / (2.0 * d));
    let steps = c.t_steps.clamp(1, 40);
    let grid = time_grid(t_max, steps);
    let dev = oracle_deviations(n, d, &grid)?;
    let worst = dev.profile.max(dev.collective).max(dev.two_spin).max(dev.coefficients);
    let pass = worst <= tolerance;
    c.emit(json(
        "oracle_check",
        json!({"n_sites": n, "d_rads": d, "t_max": t_max, "time_points": grid.len(),
               "tolerance": tolerance, "max_deviation": dev, "pass": pass}),
    )?)?;
    Ok(if pass { EXIT_OK } else { EXIT_NUMERICAL })
}

fn leakage(c: &Common, cutoff: Option<usize>, range_power: f64) -> Result<i32> {
    let n = c.n_sites;
    let mut h = oracle::HamiltonianSpec::dq_long_range(n, c.d_rads);
    h.range_power = range_power;
    if let Some(k) = cutoff {
        h = h.with_cutoff(k);
    }
    let t_max = c.t_max.unwrap_or(3.0 / (2.0 * c.d_rads));
    let grid = time_grid(t_max, c.t_steps.clamp(1, 100));
    let state = c.state();
    let values = oracle::leakage_series(&h, state, &grid)?;
    match c.format(FormatArg::Csv) {
        FormatArg::Csv => {
            let rows: Vec<Vec<f64>> = grid.iter().zip(&values).map(|(t, v)| vec![*t, *v]).collect();
            c.emit(table_to_csv(&["t_seconds", "leakage"], &rows)?)?;
        }
        FormatArg::Json => c.emit(json(
            "leakage",
            json!({"hamiltonian": h, "state": state, "times": grid, "leakage": values}),
        )?)?,
    }
    Ok(EXIT_OK)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn usage_errors_exit_one() {
        assert_eq!(run(["dqchain", "simulate", "--N", "0"]), EXIT_USAGE);
        assert_eq!(run(["dqchain", "simulate", "--bogus"]), EXIT_USAGE);
        assert_eq!(run(["dqchain"]), EXIT_USAGE);
        assert_eq!(run(["dqchain", "--help"]), EXIT_OK);
    }

    #[test]
    fn error_classes() {
        assert_eq!(exit_code(&Error::EmptyGrid), EXIT_NUMERICAL);
        assert_eq!(exit_code(&Error::InvalidSpec(String::new())), EXIT_USAGE);
    }

    #[test]
    fn oracle_agrees_on_a_short_chain() {
        let times = time_grid(3.0, 5);
        let dev = oracle_deviations(4, 1.0, &times).unwrap();
        assert!(dev.profile < 1e-10 && dev.collective < 1e-10);
        assert!(dev.two_spin < 1e-10 && dev.coefficients < 1e-10, "{dev:?}");
    }
}
