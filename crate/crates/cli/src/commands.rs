//! One function per subcommand. Each validates its inputs, runs the
//! seeded trials in parallel and hands a [`Report`] back for output.

use std::path::Path;

use rayon::prelude::*;
use serde_json::{json, Map, Value};

use otc_core::cloner::CloneBackend;
use otc_core::cnf::{parse_dimacs, CnfFormula, COUNT_MAX_VARS};
use otc_core::gates::{c_plus, embed, gell_mann, pauli_x, permutation_unitary};
use otc_core::protocols::{
    default_rounds, hoeffding_bound, informationally_complete_set, otc_clone_with, otc_measure,
    predicted_failure, s_gate_closed_form, s_gate_iterated, sat_decide, MeasurementPlan,
    SatMode, Verdict,
};
use otc_core::qmath::SubsystemLayout;
use otc_core::qstate::{bloch_of, expectation, state_of_bloch, BlochVector, StateFixture};
use otc_core::timelike::{
    ctc_evolve, deutsch_fixed_point_with, CtcSpec, FixedPointOptions, Strategy,
};
use otc_core::{DensityMatrixF64, ObservableF64};

use crate::report::{binomial_limit, mean_and_sd, Report};
use crate::{
    BackendArg, CloneArgs, Command, Common, Failure, FixpointArgs, InteractionArg, MeasureArgs,
    ModeArg, SatArgs, SgateArgs, StateInput, StrategyArg,
};

pub fn run(command: &Command) -> Result<(), Failure> {
    let config = serde_json::to_value(command).map_err(|e| Failure::Protocol(e.to_string()))?;
    let (report, common) = match command {
        Command::Measure(a) => (measure(a, config)?, &a.common),
        Command::Sgate(a) => (sgate(a, config)?, &a.common),
        Command::Sat(a) => (sat(a, config)?, &a.common),
        Command::Clone(a) => (clone(a, config)?, &a.common),
        Command::Fixpoint(a) => (fixpoint(a, config)?, &a.common),
    };
    report.emit(common)
}

fn trials<F>(common: &Common, f: F) -> Result<Vec<Value>, Failure>
where
    F: Fn(u64) -> Result<Value, Failure> + Sync,
{
    if common.trials == 0 {
        return Err(Failure::Usage("--trials must be at least 1".into()));
    }
    (0..common.trials)
        .into_par_iter()
        .map(|i| {
            let seed = common.seed.wrapping_add(i);
            let mut v = f(seed)?;
            if let Value::Object(m) = &mut v {
                m.insert("trial".into(), json!(i));
                m.insert("seed".into(), json!(seed));
            }
            Ok(v)
        })
        .collect()
}

fn read_file(flag: &str, path: &Path) -> Result<String, Failure> {
    std::fs::read_to_string(path)
        .map_err(|e| Failure::Input(format!("{flag} {}: {e}", path.display())))
}

fn load_state(input: &StateInput) -> Result<DensityMatrixF64, Failure> {
    match (&input.state, &input.bloch) {
        (Some(path), _) => {
            let text = read_file("--state", path)?;
            let fixture = StateFixture::from_json(&text)
                .map_err(|e| Failure::Input(format!("--state {}: {e}", path.display())))?;
            DensityMatrixF64::from_fixture(&fixture)
                .map_err(|e| Failure::Input(format!("--state {}: {e}", path.display())))
        }
        (None, Some(v)) => {
            if v.len() != 3 {
                return Err(Failure::Usage(format!(
                    "--bloch: expected three components x,y,z, got {}",
                    v.len()
                )));
            }
            let n = BlochVector::new(v[0], v[1], v[2])
                .map_err(|e| Failure::Usage(format!("--bloch: {e}")))?;
            Ok(state_of_bloch(&n))
        }
        (None, None) => Err(Failure::Usage("one of --state or --bloch is required".into())),
    }
}

fn single_qudit(rho: &DensityMatrixF64, flag: &str) -> Result<usize, Failure> {
    if rho.layout().len() != 1 {
        return Err(Failure::Usage(format!(
            "{flag}: expected a single qudit, got layout {:?}",
            rho.layout().dims()
        )));
    }
    Ok(rho.dim())
}

fn parse_observable(name: &str, d: usize) -> Result<ObservableF64, Failure> {
    let bad = || Failure::Usage(format!("--obs: unknown observable {name:?} for dimension {d}"));
    let gm = |k: usize| -> Result<ObservableF64, Failure> {
        let all = gell_mann::<f64>(d).map_err(Failure::from)?;
        let m = all.get(k.wrapping_sub(1)).ok_or_else(bad)?;
        ObservableF64::new(m.clone()).map_err(Failure::from)
    };
    match name {
        "sigmax" | "sigmay" | "sigmaz" if d != 2 => Err(bad()),
        "sigmax" => Ok(ObservableF64::pauli_x()),
        "sigmay" => Ok(ObservableF64::pauli_y()),
        "sigmaz" => Ok(ObservableF64::pauli_z()),
        _ => match name.strip_prefix("gm").and_then(|k| k.parse::<usize>().ok()) {
            Some(k) => gm(k),
            None => Err(bad()),
        },
    }
}

fn require_delta_eps(delta: f64, eps: f64) -> Result<(), Failure> {
    hoeffding_bound(1.0, delta, eps).map(|_| ()).map_err(Failure::from)
}

fn state_json(rho: &DensityMatrixF64) -> Value {
    let mut v = serde_json::to_value(rho.to_fixture()).unwrap_or(Value::Null);
    if rho.layout().dims() == [2] {
        if let (Ok(n), Value::Object(m)) = (bloch_of(rho), &mut v) {
            m.insert("bloch".into(), json!(n.components()));
        }
    }
    v
}

fn obj(pairs: Vec<(&str, Value)>) -> Map<String, Value> {
    pairs.into_iter().map(|(k, v)| (k.to_string(), v)).collect()
}

fn measure(a: &MeasureArgs, config: Value) -> Result<Report, Failure> {
    let rho = load_state(&a.input)?;
    let d = single_qudit(&rho, "--state")?;
    let obs = parse_observable(&a.obs, d)?;
    require_delta_eps(a.delta, a.eps)?;
    let bound = hoeffding_bound(obs.range(), a.delta, a.eps)?;
    let budget = MeasurementPlan::auto(obs.clone(), a.delta, a.eps, 0)?.ancillas;
    let ancillas = a.n.unwrap_or(budget);
    let truth = expectation(&rho, &obs)?;

    let records = trials(&a.common, |seed| {
        let plan = MeasurementPlan {
            ancillas,
            seed,
            ..MeasurementPlan::auto(obs.clone(), a.delta, a.eps, seed)?
        };
        let r = otc_measure(&rho, &plan)?;
        let mut counts: Vec<(f64, usize)> = obs.eigenvalues().iter().map(|&v| (v, 0)).collect();
        for x in &r.outcomes {
            if let Some(slot) = counts.iter_mut().find(|(v, _)| (v - x).abs() < 1e-9) {
                slot.1 += 1;
            }
        }
        Ok(json!({
            "estimate": r.estimate,
            "samples": r.samples,
            "otc_uses": r.otc_uses,
            "failed": (r.estimate - truth).abs() >= a.delta,
            "outcome_counts": counts.iter().map(|(v, c)| json!({"value": v, "count": c})).collect::<Vec<_>>(),
        }))
    })?;
    let estimates: Vec<f64> = records.iter().filter_map(|r| r["estimate"].as_f64()).collect();
    let failures = records.iter().filter(|r| r["failed"] == json!(true)).count();
    let (mean, sd) = mean_and_sd(&estimates);
    Ok(Report {
        config,
        trials: records,
        aggregate: obj(vec![
            ("mean_estimate", json!(mean)),
            ("sd_estimate", json!(sd)),
            ("failures", json!(failures)),
            ("failure_rate", json!(failures as f64 / a.common.trials as f64)),
        ]),
        theory: obj(vec![
            ("expectation", json!(truth)),
            ("ancillas", json!(ancillas)),
            ("hoeffding_ancillas", json!(budget)),
            ("hoeffding_bound", json!(bound)),
            ("max_failure_probability", json!(a.eps)),
            ("failure_rate_limit_3sigma", json!(binomial_limit(a.eps, a.common.trials))),
        ]),
    })
}

fn sgate(a: &SgateArgs, config: Value) -> Result<Report, Failure> {
    let rho = load_state(&a.input)?;
    if rho.layout().dims() != [2] {
        return Err(Failure::Usage("--state: the S-gate takes a single qubit".into()));
    }
    let nz = bloch_of(&rho)?.z;
    let predicted = nz.powi(1 << a.p.min(30));
    let once = s_gate_closed_form(&rho)?;
    let records = trials(&a.common, |_| {
        let out = s_gate_iterated(&rho, a.p)?;
        Ok(json!({
            "n_z": bloch_of(&out)?.z,
            "output": state_json(&out),
        }))
    })?;
    let out_nz = records[0]["n_z"].as_f64().unwrap_or(f64::NAN);
    Ok(Report {
        config,
        trials: records,
        aggregate: obj(vec![
            ("n_z_in", json!(nz)),
            ("n_z_out", json!(out_nz)),
            ("deviation", json!((out_nz - predicted).abs())),
        ]),
        theory: obj(vec![
            ("n_z_out", json!(predicted)),
            ("single_application", state_json(&once)),
        ]),
    })
}

fn load_cnf(path: &Path) -> Result<CnfFormula, Failure> {
    let text = read_file("--cnf", path)?;
    parse_dimacs(&text).map_err(|e| Failure::Input(format!("--cnf {}: {e}", path.display())))
}

fn sat(a: &SatArgs, config: Value) -> Result<Report, Failure> {
    let f = load_cnf(&a.cnf)?;
    let n = f.num_vars();
    let p = a.p.unwrap_or_else(|| default_rounds(n));
    let mode = match a.mode {
        ModeArg::Circuit => SatMode::Circuit,
        ModeArg::Analytic => SatMode::Analytic,
    };
    let truth = if n <= COUNT_MAX_VARS {
        Some(f.count_satisfying()?)
    } else {
        None
    };
    let records = trials(&a.common, |seed| {
        let d = sat_decide::<f64>(&f, p, a.q, mode, seed)?;
        Ok(json!({
            "answer": d.answer,
            "ones": d.ones,
            "satisfying": d.satisfying,
            "target_n_z": d.target_nz,
            "tautology": d.tautology,
        }))
    })?;
    let sat_votes = records
        .iter()
        .filter(|r| r["answer"] == json!(Verdict::Satisfiable))
        .count();
    let total = a.common.trials as f64;
    let errors = match truth {
        Some(0) => sat_votes,
        Some(_) => records.len() - sat_votes,
        None => 0,
    };
    let predicted = match truth {
        Some(s) if n > 0 => Some(predicted_failure(n, s, p, a.q)?),
        _ => None,
    };
    Ok(Report {
        config,
        trials: records,
        aggregate: obj(vec![
            ("satisfiable_votes", json!(sat_votes)),
            ("satisfiable_fraction", json!(sat_votes as f64 / total)),
            ("errors", json!(errors)),
            ("failure_rate", json!(errors as f64 / total)),
        ]),
        theory: obj(vec![
            ("num_vars", json!(n)),
            ("satisfying", json!(truth)),
            ("p", json!(p)),
            ("q", json!(a.q)),
            ("predicted_p_fail", json!(predicted)),
        ]),
    })
}

fn clone(a: &CloneArgs, config: Value) -> Result<Report, Failure> {
    let rho = load_state(&a.input)?;
    let d = single_qudit(&rho, "--state")?;
    require_delta_eps(a.delta, a.eps)?;
    let backend = match a.backend {
        BackendArg::Marginal => CloneBackend::MarginalModel,
        BackendArg::Exact => CloneBackend::ExactSymmetric,
    };
    let observables = informationally_complete_set::<f64>(d)?;
    let truth: Vec<f64> = observables
        .iter()
        .map(|o| expectation(&rho, o))
        .collect::<Result<_, _>>()?;
    let records = trials(&a.common, |seed| {
        let r = otc_clone_with(&rho, a.delta, a.eps, seed, backend)?;
        let rec: Vec<f64> = observables
            .iter()
            .map(|o| expectation(&r.reconstructed, o))
            .collect::<Result<_, _>>()?;
        let within = rec.iter().zip(&truth).all(|(x, t)| (x - t).abs() <= a.delta);
        Ok(json!({
            "fidelity": r.fidelity_to_input,
            "within_delta": within,
            "total_otc_uses": r.total_otc_uses,
            "reconstructed": state_json(&r.reconstructed),
            "per_observable": r.per_observable.iter().map(|e| json!({
                "id": e.id,
                "raw": e.raw,
                "unbiased": e.unbiased,
                "ancillas": e.ancillas,
            })).collect::<Vec<_>>(),
        }))
    })?;
    let fidelities: Vec<f64> = records.iter().filter_map(|r| r["fidelity"].as_f64()).collect();
    let good = records.iter().filter(|r| r["within_delta"] == json!(true)).count();
    let (mean_f, sd_f) = mean_and_sd(&fidelities);
    let first = otc_clone_with(&rho, a.delta, a.eps, a.common.seed, backend)?;
    Ok(Report {
        config,
        trials: records,
        aggregate: obj(vec![
            ("mean_fidelity", json!(mean_f)),
            ("sd_fidelity", json!(sd_f)),
            ("success_rate", json!(good as f64 / a.common.trials as f64)),
            ("total_otc_uses", json!(first.total_otc_uses)),
        ]),
        theory: obj(vec![
            ("clones", json!(first.clones)),
            ("shrinking_factor", json!(first.shrinking_factor)),
            ("scaling_reference", json!(first.scaling_reference)),
            ("gell_mann_expectations", json!(truth)),
            ("max_failure_probability_per_observable", json!(a.eps)),
        ]),
    })
}

fn fixpoint(a: &FixpointArgs, config: Value) -> Result<Report, Failure> {
    let rho = load_state(&a.input)?;
    let chron = rho.layout().clone();
    let qubit_only = |what: &str| -> Result<(), Failure> {
        if chron.dims() != [2] {
            Err(Failure::Usage(format!(
                "--interaction {what} needs a single-qubit input"
            )))
        } else {
            Ok(())
        }
    };
    let joint = SubsystemLayout::qubits(2)?;
    let spec = match a.interaction {
        InteractionArg::Swap => {
            qubit_only("swap")?;
            CtcSpec::appended(permutation_unitary(&joint, &[1, 0])?, &chron, &[2])?
        }
        InteractionArg::Cnot => {
            qubit_only("cnot")?;
            CtcSpec::appended(embed(&c_plus(2)?, &joint, &[0, 1])?, &chron, &[2])?
        }
        InteractionArg::Grandfather => {
            qubit_only("grandfather")?;
            let cnot = embed(&c_plus(2)?, &joint, &[1, 0])?;
            let flip = embed(&pauli_x(), &joint, &[1])?;
            CtcSpec::appended(flip.matmul(&cnot), &chron, &[2])?
        }
        InteractionArg::Otc => CtcSpec::interaction_free(&chron, &[0])?,
    };
    if !(a.tol > 0.0) {
        return Err(Failure::Usage("--tol must be positive".into()));
    }
    let opts = FixedPointOptions {
        tolerance: a.tol,
        max_iter: a.max_iter,
        strategy: match a.strategy {
            StrategyArg::Auto => Strategy::Auto,
            StrategyArg::Iterative => Strategy::Iterative,
            StrategyArg::Spectral => Strategy::SpectralExact,
        },
    };
    let records = trials(&a.common, |_| {
        let fp = deutsch_fixed_point_with(&rho, &spec, &opts)?;
        let out = ctc_evolve(&rho, &spec, &fp)?;
        Ok(json!({
            "solution": state_json(&fp.solution),
            "residual": fp.residual,
            "iterations": fp.iterations,
            "method": fp.method,
            "fixed_space_dim": fp.fixed_space_dim,
            "output": state_json(&out),
            "output_purity": out.purity(),
        }))
    })?;
    let first = &records[0];
    Ok(Report {
        config,
        aggregate: obj(vec![
            ("residual", first["residual"].clone()),
            ("iterations", first["iterations"].clone()),
            ("method", first["method"].clone()),
        ]),
        trials: records,
        theory: obj(vec![
            ("tolerance", json!(a.tol)),
            ("input_purity", json!(rho.purity())),
        ]),
    })
}
