//! Subcommand implementations behind the `hybridq` binary.
//!
//! Every command takes already-read input text and returns the documents to
//! write, so nothing touches the filesystem before the input has validated.

use std::f64::consts::PI;
use std::fmt;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use sha2::{Digest, Sha256};

use hybrid_core::constants::mev_to_angular;
use hybrid_core::dynamics::{
    fit_rabi_rate, propagate, rabi_rate_rwa, resonance_frequency, DriveSpec, ModulatedTerm, Waveform,
};
use hybrid_core::encoded::{verify_sequence, ConnectivityGraph, GateSequence, GraphLabel, LogicalEncoding};
use hybrid_core::hubbard::{dot_spectra, HubbardParams};
use hybrid_core::linalg::{C64, ZERO};
use hybrid_core::optimizer::{
    hybrid_search, preset_template, template_search, Objective, Progress, SearchConfig, Target, Weights,
};
use hybrid_core::schrieffer_wolff::{
    effective_couplings, effective_hamiltonian_analytic, effective_hamiltonian_numeric, exact_qubit_levels,
    gap_scaling, AnalyticForm, EffectiveQubit, NumericOptions,
};

pub const EXIT_OK: i32 = 0;
pub const EXIT_INPUT: i32 = 2;
pub const EXIT_NUMERICAL: i32 = 3;
pub const EXIT_SEARCH_FAILED: i32 = 4;

pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");

/// Failure with its process exit code.
#[derive(Debug, Clone, PartialEq)]
pub struct CliError {
    pub code: i32,
    pub message: String,
}

impl CliError {
    pub fn input(message: impl Into<String>) -> Self {
        CliError { code: EXIT_INPUT, message: message.into() }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.message)
    }
}

impl std::error::Error for CliError {}

impl From<hybrid_core::Error> for CliError {
    fn from(e: hybrid_core::Error) -> Self {
        let code = if e.is_numerical_regime() { EXIT_NUMERICAL } else { EXIT_INPUT };
        CliError { code, message: e.to_string() }
    }
}

pub type CliResult<T> = std::result::Result<T, CliError>;

fn parse_json<T: serde::de::DeserializeOwned>(text: &str, what: &str) -> CliResult<T> {
    serde_json::from_str(text)
        .map_err(|e| CliError::input(format!("{what}: line {} column {}: {e}", e.line(), e.column())))
}

/// JSON with object keys sorted, no whitespace.
pub fn canonical_json(v: &Value) -> String {
    // serde_json's default map is ordered by key
    let sorted: Value = serde_json::from_str(&v.to_string()).expect("reparse");
    sorted.to_string()
}

pub fn pretty(v: &Value) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("serialize");
    s.push('\n');
    s
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}

/// Provenance record written next to every result.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub subcommand: String,
    /// SHA-256 of the canonical JSON of the resolved input.
    pub config_digest: String,
    pub tool_version: String,
    pub seed: u64,
    pub outputs: Vec<String>,
    pub wall_time_s: f64,
}

impl RunManifest {
    pub fn new(subcommand: &str, resolved_input: &Value, seed: u64) -> Self {
        RunManifest {
            subcommand: subcommand.to_string(),
            config_digest: sha256_hex(canonical_json(resolved_input).as_bytes()),
            tool_version: TOOL_VERSION.to_string(),
            seed,
            outputs: Vec::new(),
            wall_time_s: 0.0,
        }
    }
}

/// A file to be written, relative to the output directory.
#[derive(Debug, Clone, PartialEq)]
pub struct Artifact {
    pub name: String,
    pub contents: String,
}

/// Everything a command produces.
#[derive(Debug, Clone, PartialEq)]
pub struct CommandOutput {
    pub artifacts: Vec<Artifact>,
    pub manifest: RunManifest,
    /// Exit code to report after writing; nonzero only for unsuccessful searches.
    pub code: i32,
}

impl CommandOutput {
    /// Writes artifacts and the manifest into `dir` and returns the paths written.
    pub fn write_to(&mut self, dir: &Path, wall_time_s: f64) -> std::io::Result<Vec<PathBuf>> {
        std::fs::create_dir_all(dir)?;
        let mut written = Vec::new();
        self.manifest.outputs.clear();
        for a in &self.artifacts {
            let p = dir.join(&a.name);
            std::fs::write(&p, &a.contents)?;
            self.manifest.outputs.push(p.display().to_string());
            written.push(p);
        }
        self.manifest.wall_time_s = wall_time_s;
        let mp = dir.join(format!("{}.manifest.json", self.manifest.subcommand));
        let mv = serde_json::to_value(&self.manifest).expect("manifest");
        std::fs::write(&mp, pretty(&mv))?;
        written.push(mp);
        Ok(written)
    }
}

fn h2_value(h: &[[f64; 2]; 2]) -> Value {
    json!([[h[0][0], h[0][1]], [h[1][0], h[1][1]]])
}

/// Scaling sweep fractions of `E_S^R − E_T^L` used by `derive-effective`.
pub const SCALING_FRACTIONS: [f64; 3] = [0.02, 0.05, 0.1];

/// Couplings, analytic and numeric 2×2 Hamiltonians, the exact gap and the
/// gap-error scaling for a parameter file.
pub fn derive_effective(params_text: &str) -> CliResult<CommandOutput> {
    let params = HubbardParams::from_json(params_text)?;
    let spectra = dot_spectra(&params);
    let couplings = effective_couplings(&params)?;
    let published = effective_hamiltonian_analytic(&params, AnalyticForm::Published)?;
    let second = effective_hamiltonian_analytic(&params, AnalyticForm::SecondOrder)?;
    let numeric = effective_hamiltonian_numeric(&params, NumericOptions::default())?;
    let [e0, e1] = exact_qubit_levels(&params)?;
    let scaling = gap_scaling(&params, &SCALING_FRACTIONS, AnalyticForm::Published)?;
    let mut warnings = spectra.warnings();
    warnings.extend(couplings.warnings.iter().cloned());
    let imag_max = numeric.h2.iter().flatten().map(|z| z.im.abs()).fold(0.0, f64::max);
    let report = json!({
        "dot_spectra": {
            "e_s_l": spectra.e_s_l,
            "e_s_r": spectra.e_s_r,
            "e_t_l": spectra.e_t_l,
            "e_t_r": spectra.e_t_r,
            "delta_st_left": spectra.delta_st_left(),
        },
        "couplings": { "j1": couplings.j1, "j2": couplings.j2, "jp": couplings.jp, "t": couplings.t },
        "analytic": {
            "published": { "h2": h2_value(&published.h2), "gap": published.gap(),
                           "frequency_ghz": resonance_frequency(&published) },
            "second_order": { "h2": h2_value(&second.h2), "gap": second.gap(),
                              "frequency_ghz": resonance_frequency(&second) },
        },
        "numeric": {
            "h2": h2_value(&numeric.real_h2()),
            "h2_imag_max": imag_max,
            "spin_mixing": numeric.spin_mixing,
            "gap": numeric.gap(),
        },
        "exact": { "levels": [e0, e1], "gap": e1 - e0 },
        "scaling": scaling,
        "warnings": warnings,
    });
    let input = json!({ "subcommand": "derive-effective", "params": serde_json::to_value(&params).expect("params") });
    Ok(CommandOutput {
        artifacts: vec![Artifact { name: "effective.json".into(), contents: pretty(&report) }],
        manifest: RunManifest::new("derive-effective", &input, 0),
        code: EXIT_OK,
    })
}

/// Options of `search-cnot` after flag parsing.
#[derive(Debug, Clone, PartialEq)]
pub struct SearchRequest {
    /// Preset label or the text of a custom graph file.
    pub graph: GraphSource,
    pub length: usize,
    pub target: Target,
    pub weights: Weights,
    pub config: SearchConfig,
    /// Explicit edge template; otherwise a shipped preset or random templates.
    pub template: Option<Vec<(usize, usize)>>,
    /// Random templates tried when no template is given or shipped.
    pub random_templates: usize,
    pub result_name: String,
}

#[derive(Debug, Clone, PartialEq)]
pub enum GraphSource {
    Preset(GraphLabel),
    Custom(String),
}

impl GraphSource {
    fn resolve(&self) -> CliResult<ConnectivityGraph> {
        match self {
            GraphSource::Preset(l) => Ok(ConnectivityGraph::preset(*l)?),
            GraphSource::Custom(text) => {
                let mut g: ConnectivityGraph = parse_json(text, "graph file")?;
                g.label = GraphLabel::Custom;
                Ok(g.validated()?)
            }
        }
    }
}

/// Parses `"2-3,0-1"` into spin pairs.
pub fn parse_template(s: &str) -> CliResult<Vec<(usize, usize)>> {
    s.split(',')
        .map(|tok| {
            let (a, b) = tok
                .trim()
                .split_once('-')
                .ok_or_else(|| CliError::input(format!("template entry {tok:?} is not of the form i-j")))?;
            let a = a.parse().map_err(|_| CliError::input(format!("bad spin index in {tok:?}")))?;
            let b = b.parse().map_err(|_| CliError::input(format!("bad spin index in {tok:?}")))?;
            Ok((a, b))
        })
        .collect()
}

fn target_str(t: Target) -> &'static str {
    match t {
        Target::CnotClass => "class",
        Target::ExactCnot => "exact",
    }
}

/// Runs the duration search and re-verifies the best sequence through the
/// full-matrix route.
pub fn search_cnot(req: &SearchRequest, progress: &(dyn Fn(&Progress) + Sync)) -> CliResult<CommandOutput> {
    req.config.validate()?;
    if req.length == 0 {
        return Err(CliError::input("--length must be at least 1"));
    }
    let graph = req.graph.resolve()?;
    let enc = LogicalEncoding::for_graph(&graph)?;
    let objective = Objective { target: req.target, weights: req.weights };

    let (template, source) = match &req.template {
        Some(t) => {
            if t.len() != req.length {
                return Err(CliError::input(format!("template has {} pulses but --length is {}", t.len(), req.length)));
            }
            for &(i, j) in t {
                if !graph.contains(i, j) {
                    return Err(CliError::input(format!("template edge {i}-{j} is not in the graph")));
                }
            }
            (Some(t.clone()), "user")
        }
        None => match preset_template(graph.label, req.target, req.length) {
            Some(t) => (Some(t), "preset"),
            None => (None, "random"),
        },
    };

    let outcome = match &template {
        Some(t) => hybrid_search(&objective, &graph, &enc, t, &req.config, progress)?,
        None => template_search(&objective, &graph, &enc, req.length, req.random_templates.max(1), &req.config, progress)?
            .expect("at least one template"),
    };

    let verification = verify_sequence(&outcome.sequence)?;
    let reverified = match req.target {
        Target::CnotClass => verification.cnot_class,
        Target::ExactCnot => verification.distance_to_cnot < 1e-4 && verification.leakage < 1e-8,
    };
    let success = outcome.success && reverified;
    let template_pairs: Vec<[usize; 2]> = outcome.sequence.pulses.iter().map(|p| [p.edge.0, p.edge.1]).collect();
    let result = json!({
        "success": success,
        "objective_value": outcome.objective_value,
        "target": target_str(req.target),
        "graph": graph.label.as_str(),
        "length": req.length,
        "template_source": source,
        "template": template_pairs,
        "sequence": outcome.sequence,
        "verification": verification,
        "restart": outcome.restart,
        "restart_values": outcome.restart_values,
        "evaluations": outcome.evaluations,
        "config": req.config,
        "weights": req.weights,
    });
    let input = json!({
        "subcommand": "search-cnot",
        "graph": serde_json::to_value(&graph).expect("graph"),
        "length": req.length,
        "target": target_str(req.target),
        "weights": req.weights,
        "config": req.config,
        "template": req.template,
        "random_templates": req.random_templates,
    });
    Ok(CommandOutput {
        artifacts: vec![Artifact { name: req.result_name.clone(), contents: pretty(&result) }],
        manifest: RunManifest::new("search-cnot", &input, req.config.seed),
        code: if success { EXIT_OK } else { EXIT_SEARCH_FAILED },
    })
}

/// Accepts either a bare sequence or a `search-cnot` result holding one.
pub fn read_sequence(text: &str) -> CliResult<GateSequence> {
    let v: Value = parse_json(text, "sequence file")?;
    let inner = match v.get("sequence") {
        Some(s) if v.get("pulses").is_none() => s.clone(),
        _ => v,
    };
    let seq: GateSequence =
        serde_json::from_value(inner).map_err(|e| CliError::input(format!("sequence file: {e}")))?;
    let graph = seq.resolve_graph()?;
    seq.validate_on(&graph)?;
    Ok(seq)
}

pub fn verify(sequence_text: &str) -> CliResult<CommandOutput> {
    let seq = read_sequence(sequence_text)?;
    let v = verify_sequence(&seq)?;
    let report = serde_json::to_value(&v).expect("verification");
    let input = json!({ "subcommand": "verify-sequence", "sequence": seq });
    Ok(CommandOutput {
        artifacts: vec![Artifact { name: "verification.json".into(), contents: pretty(&report) }],
        manifest: RunManifest::new("verify-sequence", &input, seq.seed.unwrap_or(0)),
        code: EXIT_OK,
    })
}

/// Drive description read by `simulate-rabi`. The qubit is given either
/// directly or through Hubbard parameters and an analytic form; the drive
/// frequency defaults to the qubit resonance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DriveFile {
    #[serde(default)]
    pub qubit: Option<EffectiveQubit>,
    #[serde(default)]
    pub params: Option<HubbardParams>,
    #[serde(default)]
    pub form: Option<AnalyticForm>,
    pub modulated_term: ModulatedTerm,
    #[serde(default)]
    pub waveform: Waveform,
    /// meV.
    pub amplitude: f64,
    #[serde(default)]
    pub frequency_ghz: Option<f64>,
    /// s.
    pub duration: f64,
    #[serde(default)]
    pub timestep: Option<f64>,
    #[serde(default)]
    pub record_every: Option<usize>,
    /// Initial logical state, 0 or 1.
    #[serde(default)]
    pub initial: u8,
}

impl DriveFile {
    pub fn resolve(&self) -> CliResult<DriveSpec> {
        let base = match (&self.qubit, &self.params) {
            (Some(q), None) => q.clone(),
            (None, Some(p)) => {
                p.validate()?;
                effective_hamiltonian_analytic(p, self.form.unwrap_or(AnalyticForm::Published))?
            }
            _ => return Err(CliError::input("drive file needs exactly one of \"qubit\" and \"params\"")),
        };
        if self.initial > 1 {
            return Err(CliError::input("\"initial\" must be 0 or 1"));
        }
        let angular_frequency = match self.frequency_ghz {
            Some(f) => 2.0 * PI * f * 1e9,
            None => mev_to_angular(base.gap()),
        };
        Ok(DriveSpec {
            base,
            modulated_term: self.modulated_term,
            waveform: self.waveform,
            amplitude: self.amplitude,
            angular_frequency,
            duration: self.duration,
            timestep: self.timestep,
            record_every: self.record_every,
        })
    }
}

/// Population trace as CSV plus a summary with the fitted Rabi rate.
pub fn simulate_rabi(drive_text: &str) -> CliResult<CommandOutput> {
    let file: DriveFile = parse_json(drive_text, "drive file")?;
    let drive = file.resolve()?;
    let initial = if file.initial == 0 { [C64::new(1.0, 0.0), ZERO] } else { [ZERO, C64::new(1.0, 0.0)] };
    let trace = propagate(&drive, initial)?;
    let mut csv = String::from("time_s,p0,p1\n");
    for (t, p) in trace.times.iter().zip(&trace.populations) {
        csv.push_str(&format!("{t:e},{:.12},{:.12}\n", p[0], p[1]));
    }
    let fitted = if file.initial == 0 { fit_rabi_rate(&trace) } else { None };
    let rwa = match drive.modulated_term {
        ModulatedTerm::OffDiagonal => Some(rabi_rate_rwa(drive.amplitude)),
        ModulatedTerm::Detuning => None,
    };
    let norm_dev = trace.fidelity_norm.iter().map(|n| (n - 1.0).abs()).fold(0.0, f64::max);
    let p1_max = trace.populations.iter().map(|p| p[1]).fold(0.0, f64::max);
    let summary = json!({
        "qubit_frequency_ghz": resonance_frequency(&drive.base),
        "drive_frequency_ghz": drive.angular_frequency / (2.0 * PI * 1e9),
        "fitted_rabi_rate_rad_s": fitted,
        "fitted_rabi_frequency_hz": fitted.map(|w| w / PI),
        "rwa_rabi_rate_rad_s": rwa,
        "p1_max": p1_max,
        "samples": trace.times.len(),
        "timestep_s": drive.effective_timestep(),
        "max_norm_deviation": norm_dev,
    });
    let input = json!({ "subcommand": "simulate-rabi", "drive": serde_json::to_value(&file).expect("drive") });
    Ok(CommandOutput {
        artifacts: vec![
            Artifact { name: "rabi.csv".into(), contents: csv },
            Artifact { name: "rabi_summary.json".into(), contents: pretty(&summary) },
        ],
        manifest: RunManifest::new("simulate-rabi", &input, 0),
        code: EXIT_OK,
    })
}
