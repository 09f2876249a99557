//! JSON configuration: system parameters in GHz, decoherence times in μs,
//! sweep description and encodings.

use std::path::{Path, PathBuf};

use serde_json::{Map, Value};

use super::{Experiment, Grid, Profile, SweepSpec};
use crate::dynamics::{ConvergenceCheck, IntegratorConfig};
use crate::encoding::EncodingFamilySpec;
use crate::error::{Error, Result};
use crate::model::{derive_detunings, DecoherenceParams, SystemParams, TargetParity, Toggles};
use crate::{ghz_to_rad_per_s, rad_per_s_to_ghz, C64};

/// Agreement required between derived and listed detunings (GHz).
pub const LISTED_DETUNING_TOL: f64 = 1e-6;

/// Command-line choices that take precedence over the file.
#[derive(Clone, Debug, Default)]
pub struct ConfigOverrides {
    pub experiment: Option<Experiment>,
    pub profile: Option<Profile>,
    pub output_path: Option<PathBuf>,
    pub jobs: Option<usize>,
}

pub fn load_config(path: impl AsRef<Path>) -> Result<(SystemParams, DecoherenceParams, SweepSpec)> {
    load_config_with(path, &ConfigOverrides::default())
}

pub fn load_config_with(
    path: impl AsRef<Path>,
    overrides: &ConfigOverrides,
) -> Result<(SystemParams, DecoherenceParams, SweepSpec)> {
    let text = std::fs::read_to_string(path.as_ref())?;
    parse_config(&text, overrides)
}

pub fn parse_config(text: &str, overrides: &ConfigOverrides) -> Result<(SystemParams, DecoherenceParams, SweepSpec)> {
    let root: Value = serde_json::from_str(text)?;
    let root = as_object(&root, "config")?;
    let params = parse_system(as_object(required(root, "system")?, "system")?)?;
    let dec = parse_decoherence(as_object(required(root, "decoherence")?, "decoherence")?, params.n_cavities())?;
    let encodings = match root.get("encodings") {
        Some(v) => serde_json::from_value::<Vec<EncodingFamilySpec>>(v.clone())?,
        None => Vec::new(),
    };
    let empty = Map::new();
    let sweep = match root.get("sweep") {
        Some(v) => as_object(v, "sweep")?,
        None => &empty,
    };
    let spec = parse_sweep(sweep, encodings, params.n_cavities(), overrides)?;
    Ok((params, dec, spec))
}

fn required<'a>(obj: &'a Map<String, Value>, key: &str) -> Result<&'a Value> {
    obj.get(key).ok_or_else(|| Error::MissingKey(key.to_string()))
}

fn as_object<'a>(v: &'a Value, what: &str) -> Result<&'a Map<String, Value>> {
    v.as_object()
        .ok_or_else(|| Error::Config(format!("{what} must be a JSON object")))
}

fn number(obj: &Map<String, Value>, key: &str) -> Result<f64> {
    required(obj, key)?
        .as_f64()
        .ok_or_else(|| Error::Config(format!("{key} must be a number")))
}

fn opt_number(obj: &Map<String, Value>, key: &str) -> Result<Option<f64>> {
    match obj.get(key) {
        None | Some(Value::Null) => Ok(None),
        Some(v) => v
            .as_f64()
            .map(Some)
            .ok_or_else(|| Error::Config(format!("{key} must be a number"))),
    }
}

fn numbers(v: &Value, key: &str) -> Result<Vec<f64>> {
    let arr = v
        .as_array()
        .ok_or_else(|| Error::Config(format!("{key} must be a list of numbers")))?;
    arr.iter()
        .map(|x| x.as_f64().ok_or_else(|| Error::Config(format!("{key} must be a list of numbers"))))
        .collect()
}

/// Highest `j` among keys `prefix{j}`.
fn max_index(obj: &Map<String, Value>, prefix: &str) -> usize {
    obj.keys()
        .filter_map(|k| k.strip_prefix(prefix)?.parse::<usize>().ok())
        .max()
        .unwrap_or(0)
}

fn parse_system(sys: &Map<String, Value>) -> Result<SystemParams> {
    let w = ghz_to_rad_per_s;
    let n = max_index(sys, "omega_c").max(max_index(sys, "g"));
    if n == 0 {
        return Err(Error::MissingKey("omega_c1".into()));
    }
    let omega_eg = w(number(sys, "omega_eg")?);
    let omega_fe = w(number(sys, "omega_fe")?);
    let omega_fg = w(number(sys, "omega_fg")?);
    let omega_c = (1..=n)
        .map(|j| number(sys, &format!("omega_c{j}")).map(w))
        .collect::<Result<Vec<_>>>()?;
    let g = (1..=n)
        .map(|j| number(sys, &format!("g{j}")).map(w))
        .collect::<Result<Vec<_>>>()?;
    let g_prime = if (1..=n).any(|j| sys.contains_key(&format!("g{j}_prime"))) {
        (1..=n)
            .map(|j| number(sys, &format!("g{j}_prime")).map(w))
            .collect::<Result<Vec<_>>>()?
    } else {
        g.clone()
    };
    let mut params = SystemParams {
        omega_eg,
        omega_fe,
        omega_fg,
        omega_c,
        g,
        g_prime: Some(g_prime),
        g_cross: None,
    };
    params.validate()?;
    params.set_uniform_crosstalk(opt_number(sys, "crosstalk_fraction")?.unwrap_or(0.01));
    if let Some(v) = sys.get("solve_couplings") {
        let solve = as_object(v, "solve_couplings")?;
        let parity: TargetParity = match solve.get("parity") {
            Some(p) => serde_json::from_value(p.clone())?,
            None => TargetParity::Even,
        };
        let m = number(solve, "m")?;
        if m < 0.0 || m.fract() != 0.0 {
            return Err(Error::Config(format!("solve_couplings.m = {m} must be a nonnegative integer")));
        }
        params = params.with_solved_couplings(parity, m as u32)?;
    }
    if let Some(v) = sys.get("detunings") {
        check_listed(&params, as_object(v, "detunings")?)?;
    }
    Ok(params)
}

/// Compares listed detunings (GHz) with the ones derived from the
/// frequencies. Crosstalk detunings only produce a warning, since published
/// tables label them inconsistently.
fn check_listed(params: &SystemParams, listed: &Map<String, Value>) -> Result<()> {
    let det = derive_detunings(params)?;
    let n = params.n_cavities();
    for (key, value) in listed {
        let Some(expected) = value.as_f64() else {
            continue;
        };
        let derived = if let Some(j) = key.strip_prefix("delta_prime_") {
            index(j, n).map(|j| det.delta_prime[j])
        } else if let Some(j) = key.strip_prefix("delta_") {
            index(j, n).map(|j| det.delta[j])
        } else if let Some(kl) = key.strip_prefix("Delta_tilde_") {
            let pair = pair_index(kl, n);
            let derived = pair.map(|(k, l)| rad_per_s_to_ghz(det.cross[k][l]));
            match derived {
                Some(d) if (d - expected).abs() > LISTED_DETUNING_TOL && (d + expected).abs() > LISTED_DETUNING_TOL => {
                    log::warn!("{key}: listed {expected} GHz, derived from cavity frequencies {d:.6} GHz; using derived value");
                }
                Some(_) => {}
                None => return Err(Error::Config(format!("unknown detuning key {key}"))),
            }
            continue;
        } else if key.starts_with('_') {
            continue;
        } else {
            return Err(Error::Config(format!("unknown detuning key {key}")));
        };
        let derived = derived
            .map(rad_per_s_to_ghz)
            .ok_or_else(|| Error::Config(format!("unknown detuning key {key}")))?;
        if (derived - expected).abs() > LISTED_DETUNING_TOL {
            return Err(Error::Consistency(format!(
                "{key}: listed {expected} GHz but the frequencies give {derived:.6} GHz"
            )));
        }
    }
    Ok(())
}

fn index(s: &str, n: usize) -> Option<usize> {
    let j: usize = s.parse().ok()?;
    (1..=n).contains(&j).then(|| j - 1)
}

fn pair_index(s: &str, n: usize) -> Option<(usize, usize)> {
    let b = s.as_bytes();
    if b.len() != 2 {
        return None;
    }
    Some((index(&s[..1], n)?, index(&s[1..], n)?))
}

fn parse_decoherence(dec: &Map<String, Value>, n: usize) -> Result<DecoherenceParams> {
    let t = number(dec, "T_us")? * 1e-6;
    let kappa_inv = number(dec, "kappa_inv_us")? * 1e-6;
    DecoherenceParams::from_t(t, kappa_inv, n)
}

fn parse_sweep(
    sweep: &Map<String, Value>,
    encodings: Vec<EncodingFamilySpec>,
    n: usize,
    overrides: &ConfigOverrides,
) -> Result<SweepSpec> {
    let experiment = match (overrides.experiment, sweep.get("experiment")) {
        (Some(e), _) => e,
        (None, Some(v)) => serde_json::from_value(v.clone())?,
        (None, None) => Experiment::TruthTable,
    };
    let profile = match (overrides.profile, sweep.get("profile")) {
        (Some(p), _) => p,
        (None, Some(v)) => serde_json::from_value(v.clone())?,
        (None, None) => Profile::Smoke,
    };
    let mut spec = SweepSpec::new(experiment, profile, n);
    spec.encodings = encodings;
    if let Some(g) = sweep.get("grid") {
        let g = as_object(g, "grid")?;
        apply_grid(&mut spec.grid, g)?;
    }
    if let Some(v) = sweep.get("truncations") {
        spec.truncations = serde_json::from_value(v.clone())?;
    }
    if let Some(v) = sweep.get("toggles") {
        spec.toggles = serde_json::from_value::<Toggles>(v.clone())?;
    }
    if let Some(f) = opt_number(sweep, "alpha")? {
        spec.alpha = C64::new(f, 0.0);
    }
    if let Some(d) = opt_number(sweep, "truth_dim")? {
        spec.truth_dim = d as usize;
    }
    if let Some(b) = opt_number(sweep, "budget_s")? {
        spec.budget_s = Some(b);
    }
    if let Some(v) = sweep.get("output_path").and_then(Value::as_str) {
        spec.output_path = Some(PathBuf::from(v));
    }
    if let Some(j) = opt_number(sweep, "jobs")? {
        spec.jobs = j as usize;
    }
    if let Some(v) = sweep.get("integrator") {
        spec.integrator = parse_integrator(as_object(v, "integrator")?, spec.integrator.clone())?;
    }
    if let Some(p) = &overrides.output_path {
        spec.output_path = Some(p.clone());
    }
    if let Some(j) = overrides.jobs {
        spec.jobs = j;
    }
    spec.validate()?;
    Ok(spec)
}

fn apply_grid(grid: &mut Grid, g: &Map<String, Value>) -> Result<()> {
    for (key, v) in g {
        match key.as_str() {
            "kappa_inv_us" => grid.kappa_inv_us = numbers(v, key)?,
            "T_us" => grid.t_us = numbers(v, key)?,
            "x" => grid.x = numbers(v, key)?,
            "m" => grid.m = serde_json::from_value(v.clone())?,
            "n" => grid.n = serde_json::from_value(v.clone())?,
            "crosstalk" => grid.crosstalk = serde_json::from_value(v.clone())?,
            other => return Err(Error::Config(format!("unknown grid axis {other}"))),
        }
    }
    Ok(())
}

fn parse_integrator(obj: &Map<String, Value>, mut cfg: IntegratorConfig) -> Result<IntegratorConfig> {
    if let Some(r) = opt_number(obj, "max_frequency_resolution")? {
        cfg.max_frequency_resolution = r as u32;
    }
    if let Some(t) = opt_number(obj, "convergence_tol")? {
        cfg.convergence_tol = t;
    }
    if let Some(s) = opt_number(obj, "record_stride")? {
        cfg.record_stride = s as usize;
    }
    if let Some(dt) = opt_number(obj, "dt_s")? {
        cfg.dt = Some(dt);
    }
    if let Some(v) = obj.get("check") {
        cfg.check = serde_json::from_value::<ConvergenceCheck>(v.clone())?;
    }
    Ok(cfg)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rad_per_s_to_ghz as ghz;

    const MINIMAL: &str = r#"{
        "system": {"omega_eg": 8, "omega_fe": 12, "omega_fg": 20,
                   "omega_c1": 18.4, "omega_c2": 10, "omega_c3": 9.6,
                   "g1": 0.16, "g2": 0.198, "g3": 0.303},
        "decoherence": {"T_us": 10, "kappa_inv_us": 20}
    }"#;

    #[test]
    fn units_are_converted() {
        let (p, d, s) = parse_config(MINIMAL, &ConfigOverrides::default()).unwrap();
        assert!((ghz(p.omega_c[0]) - 18.4).abs() < 1e-12);
        assert!((d.kappa[0] - 5e4).abs() < 1e-9);
        assert!((d.gamma_fe - 1e5).abs() < 1e-6);
        assert_eq!(s.truncations, vec![4, 10, 10]);
        assert!((p.crosstalk_fraction().unwrap() - 0.01).abs() < 1e-15);
    }

    #[test]
    fn missing_cavity_frequency_is_named() {
        let text = MINIMAL.replace(r#", "omega_c3": 9.6"#, "");
        let err = parse_config(&text, &ConfigOverrides::default()).unwrap_err();
        assert_eq!(err.to_string(), "missing key omega_c3");
    }

    #[test]
    fn inconsistent_frequencies_print_both() {
        let text = MINIMAL.replace(r#""omega_fg": 20"#, r#""omega_fg": 21"#);
        let err = parse_config(&text, &ConfigOverrides::default()).unwrap_err().to_string();
        assert!(err.contains("21.000000") && err.contains("20.000000"), "{err}");
    }

    #[test]
    fn listed_detuning_mismatch_is_rejected() {
        let text = MINIMAL.replace(
            r#""g3": 0.303"#,
            r#""g3": 0.303, "detunings": {"delta_1": 1.4}"#,
        );
        assert!(matches!(
            parse_config(&text, &ConfigOverrides::default()),
            Err(Error::Consistency(_))
        ));
        let text = MINIMAL.replace(
            r#""g3": 0.303"#,
            r#""g3": 0.303, "detunings": {"delta_1": 1.6, "delta_prime_2": 10.0, "Delta_tilde_13": 0.4}"#,
        );
        assert!(parse_config(&text, &ConfigOverrides::default()).is_ok());
    }

    #[test]
    fn overrides_win() {
        let o = ConfigOverrides {
            experiment: Some(Experiment::Fig8),
            profile: Some(Profile::Reproduce),
            ..Default::default()
        };
        let (_, _, s) = parse_config(MINIMAL, &o).unwrap();
        assert_eq!(s.experiment, Experiment::Fig8);
        assert_eq!(s.truncations, vec![5, 15, 15]);
    }
}
