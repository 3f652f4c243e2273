//! Argument parsing and the subcommands.

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use exvib_core::band::{build_grid, dos_weighted_rates, exciton_dispersion, golden_rule_rate, vertex, ChannelKind, ExcitonBand, Species};
use exvib_core::couplings::{classify_regime, dipole_transfer, transfer_vibration, CouplingSet, RegimeThresholds};
use exvib_core::dynamics::{basis_state, evolve_with, expectation, mean_quanta, site_populations, EvolveOptions};
use exvib_core::fock::{enumerate_basis, FockState, DEFAULT_BASIS_CAP};
use exvib_core::hamiltonian::{assemble_hamiltonian, TermMask};
use exvib_core::polaron::{dressed_transfer_check, polaron_report};
use exvib_core::relaxation::{build_rate_matrix, evolve_populations, heating_report};
use exvib_core::spectrum::{diagonalize_with, SolverOptions};
use exvib_core::units::{oscillator_length, Params};
use serde::Serialize;
use serde_json::{json, Value};

use crate::config::Config;
use crate::output::{json_num, num, open_sink, write_csv, write_json, Format, Table};
use crate::{CliError, EXIT_OK, EXIT_USAGE};

/// Largest single-site dimension (n_max + 1)² accepted by `polaron`.
pub const POLARON_SITE_CAP: usize = 4096;

#[derive(Debug, Parser)]
#[command(name = "exvib", version, about = "Exciton-vibration model of atoms in a 1D optical lattice")]
pub struct Cli {
    #[command(flatten)]
    pub common: Common,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct Common {
    /// Scenario file (flat TOML, dotted keys); defaults apply when omitted.
    #[arg(long, global = true, value_name = "PATH")]
    pub config: Option<PathBuf>,
    /// Override one config key, e.g. `--set lattice.n=6`.
    #[arg(long = "set", global = true, value_name = "KEY=VALUE")]
    pub overrides: Vec<String>,
    /// Write the artifact here instead of stdout.
    #[arg(long, global = true, value_name = "PATH")]
    pub output: Option<PathBuf>,
    #[arg(long, global = true, value_enum)]
    pub format: Option<Format>,
    /// Cap on the number of Fock basis states.
    #[arg(long, global = true, default_value_t = DEFAULT_BASIS_CAP)]
    pub max_basis: usize,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// All coupling constants for the configured parameters (JSON).
    Couplings,
    /// ħJ and ħF^λ against the dipole angle (CSV).
    SweepTheta(SweepArgs),
    /// Exciton dispersion on the periodic grid (CSV).
    Band(BandArgs),
    /// Golden-rule weights per mode, species and channel (CSV).
    Rates(RatesArgs),
    /// Lowest eigenvalues of the truncated Fock-space Hamiltonian (JSON).
    Ed(EdArgs),
    /// Time evolution from a localized excitation (CSV).
    Evolve(EvolveArgs),
    /// Polaron shift and the check of the site transformation (JSON).
    Polaron(PolaronArgs),
    /// Rate-equation relaxation over the Bloch modes (CSV + heating summary).
    Relax(RelaxArgs),
}

#[derive(Debug, Args, Serialize)]
pub struct SweepArgs {
    /// First angle, degrees.
    #[arg(long, default_value_t = 0.0)]
    pub from: f64,
    /// Last angle, degrees.
    #[arg(long, default_value_t = 90.0)]
    pub to: f64,
    /// Number of sample points, both ends included.
    #[arg(long, default_value_t = 181)]
    pub steps: usize,
}

#[derive(Debug, Args, Serialize)]
pub struct BandArgs {
    /// Centre the band on ω₀ = ω_a − Δ instead of ω_a.
    #[arg(long)]
    pub renormalized: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum RateVariant {
    /// 2π|ħF^λ(k)|² per mode, in eV².
    Verbatim,
    /// Summed over final modes with a Gaussian density of states, in eV.
    Dos,
}

#[derive(Debug, Args, Serialize)]
pub struct RatesArgs {
    /// Energy broadening η, eV; defaults to 10% of the band-centre level spacing.
    #[arg(long)]
    pub eta_ev: Option<f64>,
    #[arg(long, value_enum, default_value_t = RateVariant::Verbatim)]
    pub variant: RateVariant,
}

#[derive(Debug, Args, Serialize)]
pub struct EdArgs {
    /// Comma-separated terms: ex, vib, onsite, transfer, I, II, III, IV, all.
    #[arg(long, default_value = "ex,vib,onsite,transfer")]
    pub terms: String,
    #[arg(long, default_value_t = 6, value_name = "COUNT")]
    pub eigs: usize,
}

#[derive(Debug, Args, Serialize)]
pub struct EvolveArgs {
    /// Total time in ħ/eV.
    #[arg(long = "t")]
    pub t: f64,
    #[arg(long, default_value_t = 100)]
    pub steps: usize,
    /// Site carrying the excitation at t = 0, vibrations in their ground state.
    #[arg(long, default_value_t = 0, value_name = "SITE")]
    pub initial: usize,
    #[arg(long, default_value = "ex,vib,onsite,transfer")]
    pub terms: String,
}

#[derive(Debug, Args, Serialize)]
pub struct PolaronArgs {
    /// Per-mode truncation of the site space; defaults to `vib.n_max`.
    #[arg(long)]
    pub n_max: Option<usize>,
    /// Also extract the four transfer vertices of the dressed two-site model.
    #[arg(long)]
    pub vertices: bool,
}

#[derive(Debug, Args, Serialize)]
pub struct RelaxArgs {
    /// Final time in ħ/eV.
    #[arg(long)]
    pub t_max: f64,
    #[arg(long, default_value_t = 100)]
    pub steps: usize,
    /// k_B T in eV; 0 switches absorption off.
    #[arg(long, default_value_t = 0.0)]
    pub temp_ev: f64,
    /// Energy broadening η, eV; defaults to 10% of the band-centre level spacing.
    #[arg(long)]
    pub eta_ev: Option<f64>,
    /// Grid index of the initially occupied mode; defaults to the band top.
    #[arg(long, value_name = "INDEX")]
    pub initial_k: Option<usize>,
    /// Also write the heating summary as JSON to this path.
    #[arg(long, value_name = "PATH")]
    #[serde(skip)]
    pub summary: Option<PathBuf>,
}

/// Parses `args` (program name first), runs the subcommand and returns the exit status.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) if !e.use_stderr() => {
            let _ = e.print();
            return EXIT_OK;
        }
        Err(e) => {
            let first = e.to_string().lines().next().unwrap_or("").trim_start_matches("error: ").to_string();
            let err = CliError::Usage(first);
            eprintln!("{}", err.to_line());
            return EXIT_USAGE;
        }
    };
    match execute(&cli) {
        Ok(()) => EXIT_OK,
        Err(e) => {
            eprintln!("{}", e.to_line());
            e.exit_code()
        }
    }
}

pub fn execute(cli: &Cli) -> Result<(), CliError> {
    let config = Config::load(cli.common.config.as_deref(), &cli.common.overrides)?;
    let params = config.params()?;
    let ctx = Context {
        config: &config,
        params: &params,
        common: &cli.common,
    };
    match &cli.command {
        Command::Couplings => couplings(&ctx),
        Command::SweepTheta(a) => sweep_theta(&ctx, a),
        Command::Band(a) => band(&ctx, a),
        Command::Rates(a) => rates(&ctx, a),
        Command::Ed(a) => ed(&ctx, a),
        Command::Evolve(a) => evolve(&ctx, a),
        Command::Polaron(a) => polaron(&ctx, a),
        Command::Relax(a) => relax(&ctx, a),
    }
}

struct Context<'a> {
    config: &'a Config,
    params: &'a Params,
    common: &'a Common,
}

impl Context<'_> {
    fn format(&self, default: Format) -> Format {
        self.common.format.unwrap_or(default)
    }

    fn emit(&self, command: &str, options: &impl Serialize, default: Format, table: &Table, body: Value) -> Result<(), CliError> {
        let mut out = open_sink(self.common.output.as_deref())?;
        match self.format(default) {
            Format::Csv => write_csv(&mut out, command, options, self.config, table),
            Format::Json => write_json(&mut out, command, options, self.config, body),
        }
    }

    fn couplings(&self) -> Result<CouplingSet, CliError> {
        Ok(CouplingSet::from_params(self.params)?)
    }

    fn band(&self, centre: f64, transfer: f64) -> Result<ExcitonBand, CliError> {
        let grid = build_grid(self.params.lattice())?;
        Ok(exciton_dispersion(&grid, centre, transfer))
    }
}

fn rows_to_json(table: &Table) -> Value {
    let rows: Vec<Value> = table
        .rows
        .iter()
        .map(|row| {
            let obj: serde_json::Map<String, Value> = table
                .header
                .iter()
                .zip(row)
                .map(|(h, cell)| {
                    let v = cell.parse::<i64>().map(Value::from).or_else(|_| cell.parse::<f64>().map(json_num));
                    (h.clone(), v.unwrap_or_else(|_| Value::from(cell.as_str())))
                })
                .collect();
            Value::Object(obj)
        })
        .collect();
    Value::Array(rows)
}

fn couplings(ctx: &Context) -> Result<(), CliError> {
    let c = ctx.couplings()?;
    let regime = classify_regime(&c, RegimeThresholds::default()).ok();
    let quantities = [
        ("transition_ev", c.transition),
        ("vib_ground_ev", c.vib_ground),
        ("vib_excited_ev", c.vib_excited),
        ("hJ_ev", c.transfer),
        ("hF_g_ev", c.transfer_vib_ground),
        ("hF_e_ev", c.transfer_vib_excited),
        ("hM_g_ev", c.onsite_ground),
        ("hM_e_ev", c.onsite_excited),
        ("delta_ev", c.shift),
        ("omega0_ev", c.renormalized_transition),
        ("abar_g_angstrom", c.length_ground.unwrap_or(f64::NAN)),
        ("abar_e_angstrom", c.length_excited.unwrap_or(f64::NAN)),
        ("f_over_j", c.transfer_vib_ground / c.transfer),
    ];
    let mut table = Table::new(["quantity", "value"]);
    let mut body = serde_json::Map::new();
    for (name, v) in quantities {
        table.push(vec![name.into(), num(v)]);
        body.insert(name.into(), json_num(v));
    }
    if let Some(r) = regime {
        table.push(vec!["regime".into(), r.regime.as_str().into()]);
        table.push(vec!["regime_ratio".into(), num(r.ratio)]);
    }
    body.insert(
        "regime".into(),
        regime.map_or(Value::Null, |r| {
            json!({
                "name": r.regime.as_str(),
                "ratio": json_num(r.ratio),
                "lower": r.thresholds.lower,
                "upper": r.thresholds.upper,
            })
        }),
    );
    ctx.emit("couplings", &json!({}), Format::Json, &table, json!({ "couplings": body }))
}

fn sweep_theta(ctx: &Context, a: &SweepArgs) -> Result<(), CliError> {
    if !(0.0..=180.0).contains(&a.from) || !(0.0..=180.0).contains(&a.to) {
        return Err(CliError::Config("sweep angles must lie in [0, 180] degrees".into()));
    }
    if a.steps < 2 {
        return Err(CliError::Config("sweep needs at least 2 points".into()));
    }
    let p = ctx.params;
    let units = p.units();
    let mut table = Table::new(["theta_deg", "hJ_ev", "hF_g_ev", "hF_e_ev"]);
    let mut crossings = Vec::new();
    let mut last: Option<(f64, f64)> = None;
    for i in 0..a.steps {
        let theta = a.from + (a.to - a.from) * i as f64 / (a.steps - 1) as f64;
        let atom = exvib_core::units::AtomSpec {
            angle: theta.to_radians(),
            ..*p.atom()
        };
        let j = dipole_transfer(&atom, p.lattice(), units);
        let fg = transfer_vibration(&atom, p.lattice(), p.vib().ground_energy, units)?;
        let fe = transfer_vibration(&atom, p.lattice(), p.vib().excited_energy, units)?;
        if let Some((t0, j0)) = last {
            if j0 != 0.0 && j != 0.0 && (j0 < 0.0) != (j < 0.0) {
                crossings.push(t0 + (theta - t0) * j0 / (j0 - j));
            } else if j == 0.0 {
                crossings.push(theta);
            }
        }
        last = Some((theta, j));
        table.push(vec![num(theta), num(j), num(fg), num(fe)]);
    }
    let len = oscillator_length(p.atom().rest_mass_energy, p.vib().ground_energy, units)?;
    let body = json!({
        "rows": rows_to_json(&table),
        "zero_crossings_deg": crossings,
        "abs_f_over_j": json_num(3.0 * len / p.lattice().spacing),
    });
    ctx.emit("sweep-theta", a, Format::Csv, &table, body)
}

fn band(ctx: &Context, a: &BandArgs) -> Result<(), CliError> {
    let c = ctx.couplings()?;
    let centre = if a.renormalized { c.renormalized_transition } else { c.transition };
    let band = ctx.band(centre, c.transfer)?;
    let mut table = Table::new(["n", "k_inv_angstrom", "homega_ev"]);
    for (mode, e) in band.grid().modes().iter().zip(band.energies()) {
        table.push(vec![mode.label.to_string(), num(mode.k), num(*e)]);
    }
    let body = json!({
        "centre_ev": json_num(centre),
        "bandwidth_ev": json_num(band.bandwidth()),
        "rows": rows_to_json(&table),
    });
    ctx.emit("band", a, Format::Csv, &table, body)
}

fn rates(ctx: &Context, a: &RatesArgs) -> Result<(), CliError> {
    let c = ctx.couplings()?;
    let band = ctx.band(c.transition, c.transfer)?;
    let eta = a.eta_ev.unwrap_or_else(|| band.default_broadening());
    if !(eta > 0.0 && eta.is_finite()) {
        return Err(CliError::Config("eta must be positive".into()));
    }
    let mut table = Table::new(["k", "species", "channel", "w"]);
    let grid = band.grid();
    let species = [
        (Species::Ground, c.transfer_vib_ground, c.vib_ground),
        (Species::Excited, c.transfer_vib_excited, c.vib_excited),
    ];
    let kinds = [ChannelKind::Emission, ChannelKind::Absorption];
    let mut columns = Vec::new();
    for (s, coupling, quantum) in species {
        for kind in kinds {
            let w = match a.variant {
                RateVariant::Verbatim => vertex(grid, coupling).into_iter().map(golden_rule_rate).collect(),
                RateVariant::Dos => dos_weighted_rates(&band, s, kind, coupling, quantum, eta),
            };
            columns.push((s, kind, w));
        }
    }
    for (k, mode) in grid.modes().iter().enumerate() {
        for (s, kind, w) in &columns {
            table.push(vec![mode.label.to_string(), s.as_str().into(), kind.as_str().into(), num(w[k])]);
        }
    }
    let body = json!({
        "eta_ev": json_num(eta),
        "rows": rows_to_json(&table),
    });
    ctx.emit("rates", a, Format::Csv, &table, body)
}

fn ed(ctx: &Context, a: &EdArgs) -> Result<(), CliError> {
    let terms = TermMask::parse(&a.terms)?;
    let c = ctx.couplings()?;
    let basis = enumerate_basis(ctx.params.lattice(), ctx.params.vib(), ctx.common.max_basis)?;
    let h = assemble_hamiltonian(&basis, ctx.params.lattice(), &c, terms)?;
    let opts = SolverOptions::default();
    let spectrum = diagonalize_with(&h, a.eigs, &opts)?;
    let mut table = Table::new(["index", "eigenvalue_ev", "residual_ev"]);
    for (i, (e, r)) in spectrum.eigenvalues.iter().zip(&spectrum.residuals).enumerate() {
        table.push(vec![i.to_string(), num(*e), num(*r)]);
    }
    let body = json!({
        "terms": terms.to_string(),
        "basis_size": basis.len(),
        "solver": if h.dim() <= opts.dense_limit { "dense" } else { "lanczos" },
        "eigenvalues_ev": spectrum.eigenvalues.iter().map(|&x| json_num(x)).collect::<Vec<_>>(),
        "residuals_ev": spectrum.residuals.iter().map(|&x| json_num(x)).collect::<Vec<_>>(),
    });
    ctx.emit("ed", a, Format::Json, &table, body)
}

fn evolve(ctx: &Context, a: &EvolveArgs) -> Result<(), CliError> {
    let terms = TermMask::parse(&a.terms)?;
    let c = ctx.couplings()?;
    let n = ctx.params.lattice().sites;
    if a.initial >= n {
        return Err(CliError::Config(format!("initial site {} outside 0..{n}", a.initial)));
    }
    let basis = enumerate_basis(ctx.params.lattice(), ctx.params.vib(), ctx.common.max_basis)?;
    let h = assemble_hamiltonian(&basis, ctx.params.lattice(), &c, terms)?;
    let psi0 = basis_state(&basis, &FockState::vacuum(n, a.initial))?;

    let mut header = vec!["t".to_string(), "norm".into(), "energy_ev".into()];
    header.extend((0..n).map(|i| format!("p_site{i}")));
    header.extend(["n_g".to_string(), "n_e".into()]);
    let mut table = Table::new(header);
    evolve_with(&h, &psi0, a.t, a.steps, &EvolveOptions::default(), |_, t, psi| {
        let norm = psi.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt();
        let mut row = vec![num(t), num(norm), num(expectation(&h, psi))];
        row.extend(site_populations(psi, &basis).into_iter().map(num));
        let (g, e) = mean_quanta(psi, &basis);
        row.extend([num(g), num(e)]);
        table.push(row);
    })?;
    let body = json!({
        "basis_size": basis.len(),
        "terms": terms.to_string(),
        "rows": rows_to_json(&table),
    });
    ctx.emit("evolve", a, Format::Csv, &table, body)
}

fn polaron(ctx: &Context, a: &PolaronArgs) -> Result<(), CliError> {
    let c = ctx.couplings()?;
    let n_max = a.n_max.unwrap_or(ctx.params.vib().n_max);
    let site_dim = (n_max + 1).saturating_mul(n_max + 1);
    if site_dim > POLARON_SITE_CAP {
        return Err(exvib_core::Error::BasisTooLarge {
            size: site_dim as u128,
            cap: POLARON_SITE_CAP,
        }
        .into());
    }
    let r = polaron_report(&c, n_max)?;
    let regime = classify_regime(&c, RegimeThresholds::default()).ok();
    let mut body = json!({
        "delta_ev": json_num(r.delta),
        "omega0_ev": json_num(r.omega0),
        "unitarity_residual": json_num(r.unitarity_residual),
        "shift_residual": json_num(r.shift_residual),
        "spectrum_residual_ev": json_num(r.spectrum_residual),
        "lowest_level_ev": json_num(r.lowest_level),
        "n_max": n_max,
        "regime": regime.map_or(Value::Null, |r| Value::from(r.regime.as_str())),
    });
    let mut table = Table::new(["quantity", "value"]);
    for (name, v) in [
        ("delta_ev", r.delta),
        ("omega0_ev", r.omega0),
        ("unitarity_residual", r.unitarity_residual),
        ("shift_residual", r.shift_residual),
        ("spectrum_residual_ev", r.spectrum_residual),
        ("lowest_level_ev", r.lowest_level),
    ] {
        table.push(vec![name.into(), num(v)]);
    }
    if a.vertices {
        let check = dressed_transfer_check(&c, n_max)?;
        let vertices: Vec<Value> = check
            .amplitudes
            .iter()
            .map(|v| {
                json!({
                    "process": v.process.name(),
                    "expected_ev": json_num(v.expected),
                    "extracted_ev": json_num(v.extracted),
                    "deviation_ev": json_num(v.deviation),
                })
            })
            .collect();
        for v in &check.amplitudes {
            table.push(vec![format!("vertex_{}_ev", v.process.name()), num(v.extracted)]);
        }
        body["vertices"] = Value::Array(vertices);
        body["transfer_reduction"] = check.transfer_reduction.map_or(Value::Null, json_num);
    }
    ctx.emit("polaron", a, Format::Json, &table, body)
}

fn relax(ctx: &Context, a: &RelaxArgs) -> Result<(), CliError> {
    let c = ctx.couplings()?;
    let band = ctx.band(c.transition, c.transfer)?;
    let eta = a.eta_ev.unwrap_or_else(|| band.default_broadening());
    let n = band.energies().len();
    let start = match a.initial_k {
        Some(k) if k < n => k,
        Some(k) => return Err(CliError::Config(format!("initial mode {k} outside 0..{n}"))),
        None => {
            let top = band.max_energy();
            band.energies().iter().position(|&e| e == top).unwrap_or(0)
        }
    };
    let rates = build_rate_matrix(&band, &c, eta, a.temp_ev)?;
    let mut p0 = vec![0.0; n];
    p0[start] = 1.0;
    let traj = evolve_populations(&rates, &p0, a.t_max, a.steps)?;
    let heat = heating_report(&traj, &band, c.vib_ground, c.vib_excited, eta);

    let mut header = vec!["t".to_string(), "mean_energy_ev".into()];
    header.extend((0..n).map(|k| format!("P_k{k}")));
    let mut table = Table::new(header);
    for ((t, e), p) in traj.times.iter().zip(&heat.mean_energy).zip(&traj.populations) {
        let mut row = vec![num(*t), num(*e)];
        row.extend(p.iter().copied().map(num));
        table.push(row);
    }
    let summary = json!({
        "eta_ev": json_num(eta),
        "temp_ev": json_num(a.temp_ev),
        "initial_k": start,
        "transitions_allowed": rates.transitions().len(),
        "emitted_g": json_num(heat.emitted[0]),
        "emitted_e": json_num(heat.emitted[1]),
        "absorbed_g": json_num(heat.absorbed[0]),
        "absorbed_e": json_num(heat.absorbed[1]),
        "initial_mean_energy_ev": json_num(heat.mean_energy[0]),
        "final_mean_energy_ev": json_num(*heat.mean_energy.last().expect("at least one point")),
        "exciton_energy_lost_ev": json_num(heat.exciton_energy_lost),
        "vibrational_energy_ev": json_num(heat.vibrational_energy),
        "expected_transitions": json_num(heat.transitions),
        "bookkeeping_residual_ev": json_num(heat.bookkeeping_residual),
        "bookkeeping_bound_ev": json_num(heat.bookkeeping_bound),
    });
    if let Some(path) = &a.summary {
        let mut out = open_sink(Some(path))?;
        write_json(&mut out, "relax", a, ctx.config, json!({ "heating": summary.clone() }))?;
        out.flush()?;
    }
    let body = json!({
        "rows": rows_to_json(&table),
        "heating": summary,
    });
    ctx.emit("relax", a, Format::Csv, &table, body)
}
