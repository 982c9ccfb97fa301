//! The eight pipeline commands. Each takes a parsed config and returns a
//! serializable result; file placement and process concerns live in the
//! dispatcher.

use serde::Serialize;
use serde_json::json;

use super::config::*;
use crate::afc::{
    self, additive_error_scan, afc_red_flag_check, ppt_phase_scan, relative_error_scan, ModelTag,
    RedFlagMode, ScanRecord, ScanTarget,
};
use crate::circuits::{
    apply_circuit, default_gamma_grid, gamma_threshold_sweep, random_site_bases,
    sample_random_circuit, verify_chain_factorization, verify_pt_factorization,
    verify_purity_factorization, ProductInput,
};
use crate::dense::{log_negativity, renyi_entropy, renyi_moment, Interval, PtProbe};
use crate::error::{Error, Result};
use crate::seeds::SeedTree;
use crate::shadows::{
    estimate_moment, estimate_pt_moment, estimate_purity, hamming_purity, simulate_batch,
    MeasurementBatch, Scheme, StateBackend,
};
use crate::stitch::{
    afc_required_k, afc_required_m, make_covering_partition, required_m_purity_fdqc,
    run_f3_protocol, run_purity_protocol_with, stitched_purity,
};
use crate::tn::{analyze_transfer_spectrum, mpdo_purity_bound_check, random_mpdo_tensor, thermal_mpo, ThermalOptions};

pub fn cmd_oracle(config: &OracleConfig) -> Result<serde_json::Value> {
    let rho = config.state.build_dense()?;
    let l = rho.n_qubits();
    let region = config.region.unwrap_or_else(|| rho.full_interval());
    let cut = config.cut.unwrap_or(l / 2);
    if cut == 0 || cut >= l {
        return Err(Error::Config(format!("cut {cut} outside the chain")));
    }
    let a = Interval::new(0, cut);
    let b = Interval::new(cut, l - cut);
    let reduced = crate::dense::partial_trace(&rho, region)?;
    let probe = PtProbe::new(&rho, a, b)?;

    let mut moments = serde_json::Map::new();
    let mut entropies = serde_json::Map::new();
    let mut pt_moments = serde_json::Map::new();
    let mut normalized = serde_json::Map::new();
    for &n in &config.moments {
        moments.insert(n.to_string(), json!(renyi_moment(&reduced, n)?));
        if n >= 2 {
            entropies.insert(n.to_string(), json!(renyi_entropy(&reduced, n)?));
        }
        pt_moments.insert(n.to_string(), json!(probe.p(n)));
        normalized.insert(n.to_string(), json!(probe.p_tilde(n)?));
    }
    Ok(json!({
        "region": region,
        "cut": cut,
        "moments": moments,
        "renyi_entropies": entropies,
        "pt_moments": pt_moments,
        "normalized_pt_moments": normalized,
        "log_negativity": log_negativity(&rho, a)?,
        "f3": probe.f3()?,
        "f5": probe.f5()?,
    }))
}

pub fn cmd_fdqc_check(config: &FdqcCheckConfig) -> Result<serde_json::Value> {
    let tree = SeedTree::new(config.seed);
    let circuit = sample_random_circuit(config.l, config.ell, tree.child(0).value())?;
    let bases = random_site_bases(config.l, tree.child(1).value());
    let rho = apply_circuit(&circuit, &ProductInput::depolarized(&bases, config.gamma)?)?;
    let threshold = 2 * config.ell - 1;

    let mut three_interval = Vec::new();
    for &b_size in &config.b_sizes {
        if b_size + 2 > config.l {
            return Err(Error::Config(format!("separator size {b_size} leaves no room")));
        }
        let rest = config.l - b_size;
        let a = Interval::new(0, rest / 2);
        let b = a.then(b_size);
        let c = b.then(config.l - a.len - b_size);
        let deviation = verify_purity_factorization(&rho, a, b, c)?;
        three_interval.push(json!({
            "b_size": b_size,
            "deviation": deviation,
            "exact_expected": b_size >= threshold,
        }));
    }

    let mut chain = Vec::new();
    for &k in &config.k_sizes {
        if config.l % k != 0 {
            continue;
        }
        let deviation = verify_chain_factorization(&rho, k)?;
        chain.push(json!({
            "k": k,
            "deviation": deviation,
            "exact_expected": k >= threshold,
        }));
    }

    let mut four_interval = Vec::new();
    let half = config.l / 2;
    for &k in &config.k_sizes {
        if k > half / 2 || config.l % 2 != 0 {
            continue;
        }
        let a1 = Interval::new(0, half - k);
        let a2 = a1.then(k);
        let b1 = a2.then(k);
        let b2 = b1.then(half - k);
        let deviation = verify_pt_factorization(&rho, a1, a2, b1, b2, config.pt_order)?;
        four_interval.push(json!({
            "k": k,
            "n": config.pt_order,
            "deviation": deviation,
            "exact_expected": k >= threshold,
        }));
    }

    Ok(json!({
        "threshold": threshold,
        "three_interval": three_interval,
        "chain": chain,
        "four_interval_pt": four_interval,
    }))
}

pub struct ShadowSimOutput {
    pub estimates: serde_json::Value,
    pub batch: MeasurementBatch,
}

pub fn cmd_shadow_sim(config: &ShadowSimConfig) -> Result<ShadowSimOutput> {
    let rho = config.state.build_dense()?;
    let batch = simulate_batch(
        &StateBackend::Dense(&rho),
        config.region,
        config.m,
        config.scheme.scheme(),
        config.seed,
    )?;
    let region = config.region;
    let exact_marginal = crate::dense::partial_trace(&rho, region)?;
    let exact_purity = exact_marginal.purity();
    let estimates = match batch.scheme {
        Scheme::Shadow => {
            let purity = estimate_purity(&batch, region)?;
            let moment3 = estimate_moment(&batch, region, 3)?;
            let (pt2, pt3) = if region.len >= 2 {
                let a = Interval::new(region.start, region.len / 2);
                let b = Interval::new(region.start + region.len / 2, region.len - region.len / 2);
                (
                    Some(estimate_pt_moment(&batch, a, b, 2)?),
                    Some(estimate_pt_moment(&batch, a, b, 3)?),
                )
            } else {
                (None, None)
            };
            json!({
                "purity": purity,
                "moment3": moment3,
                "pt_moment2": pt2,
                "pt_moment3": pt3,
                "exact_purity": exact_purity,
            })
        }
        Scheme::Reuse { .. } => {
            let purity = hamming_purity(&batch, region)?;
            json!({ "hamming_purity": purity, "exact_purity": exact_purity })
        }
    };
    Ok(ShadowSimOutput { estimates, batch })
}

pub fn cmd_stitch_run(config: &StitchRunConfig) -> Result<serde_json::Value> {
    let rho = config.state.build_dense()?;
    let l = rho.n_qubits();
    let k = afc_required_k(config.alpha2, config.xi2, l as u32, config.delta)?
        .min(l / 2)
        .max(1);
    let bound_m = afc_required_m(config.alpha2, config.xi2, l as u32, config.delta, config.confidence)?;
    let m = match (config.m, config.m_cap) {
        (Some(m), _) => m,
        (None, Some(cap)) => {
            let capped: u64 = bound_m.clone().try_into().unwrap_or(u64::MAX);
            (capped as usize).min(cap)
        }
        (None, None) => bound_m.clone().try_into().map(|v: u64| v as usize).map_err(|_| {
            Error::Precondition(format!(
                "bound-implied M = {bound_m} is astronomically large; set m or m_cap"
            ))
        })?,
    };
    let mut warnings = Vec::new();
    let fdqc_floor = required_m_purity_fdqc(k as u32, l as u32, config.delta)?;
    if num_bigint::BigUint::from(m) < fdqc_floor {
        warnings.push(format!(
            "M = {m} is below the guarantee threshold {fdqc_floor} for k = {k}"
        ));
    }
    let tree = SeedTree::new(config.seed);
    let partition = make_covering_partition(l, k)?;
    let purity = run_purity_protocol_with(&rho, partition, m, tree.child(0).value())?;
    if !purity.stitched.is_reliable() {
        warnings.push(format!(
            "{} negative region estimates entered the stitched product",
            purity.stitched.negative_inputs
        ));
    }
    let f3_result = if config.with_f3 {
        let k_f3 = k.min(l / 4).max(1);
        Some(run_f3_protocol(&rho, k_f3, m, tree.child(1).value())?)
    } else {
        None
    };
    Ok(json!({
        "k": k,
        "m": m,
        "bound_m": bound_m.to_string(),
        "purity": purity,
        "f3": f3_result,
        "warnings": warnings,
    }))
}

#[derive(Serialize)]
pub struct MpsDemoRow {
    pub instance: usize,
    pub n_u: usize,
    pub n_m: usize,
    pub total_measurements: usize,
    pub estimate: f64,
    pub exact_r2: f64,
    pub exact_half_purity: f64,
    pub statistical_error: f64,
    pub full_error: f64,
}

pub fn cmd_mps_demo(config: &MpsDemoConfig) -> Result<Vec<MpsDemoRow>> {
    if config.l % 2 != 0 {
        return Err(Error::Config("mps demo needs an even chain".into()));
    }
    let half = config.l / 2;
    if half % config.k != 0 {
        return Err(Error::Config(format!(
            "interval size {} must divide the half chain {half}",
            config.k
        )));
    }
    let tree = SeedTree::new(config.seed);
    let mut rows = Vec::new();
    for instance in 0..config.instances {
        let instance_tree = tree.child(instance as u64);
        let mps = crate::tn::random_mps(config.l, config.chi, instance_tree.child(0).value())?;
        let half_region = Interval::new(0, half);
        let partition = crate::stitch::make_partition(half, config.k)?;
        // exact targets: the factorized product r₂ and the true purity
        let mpo = mps.to_density_mpo();
        let pair_purities: Vec<f64> = partition
            .pairs()
            .iter()
            .map(|&p| mpo.trace_power(p, 2))
            .collect::<Result<_>>()?;
        let interior_purities: Vec<f64> = partition
            .interiors()
            .iter()
            .map(|&p| mpo.trace_power(p, 2))
            .collect::<Result<_>>()?;
        let exact_r2 = stitched_purity(&pair_purities, &interior_purities)?.value;
        let exact_half_purity = mps.prefix_purity(half)?;

        for (ui, &n_u) in config.n_u_list.iter().enumerate() {
            let m = n_u * config.n_m;
            let batch = simulate_batch(
                &StateBackend::Mps(&mps),
                half_region,
                m,
                Scheme::Reuse { n_u, n_m: config.n_m },
                instance_tree.child(1 + ui as u64).value(),
            )?;
            let pairs: Vec<f64> = partition
                .pairs()
                .iter()
                .map(|&p| hamming_purity(&batch, p))
                .collect::<Result<_>>()?;
            let interiors: Vec<f64> = partition
                .interiors()
                .iter()
                .map(|&p| hamming_purity(&batch, p))
                .collect::<Result<_>>()?;
            let estimate = stitched_purity(&pairs, &interiors)?.value;
            rows.push(MpsDemoRow {
                instance,
                n_u,
                n_m: config.n_m,
                total_measurements: m,
                estimate,
                exact_r2,
                exact_half_purity,
                statistical_error: (estimate / exact_r2 - 1.0).abs(),
                full_error: (estimate / exact_half_purity - 1.0).abs(),
            });
        }
    }
    Ok(rows)
}

pub fn mps_demo_csv(rows: &[MpsDemoRow]) -> String {
    let mut out = String::from(
        "instance,n_u,n_m,total_measurements,estimate,exact_r2,exact_half_purity,statistical_error,full_error\n",
    );
    for r in rows {
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{},{}\n",
            r.instance,
            r.n_u,
            r.n_m,
            r.total_measurements,
            r.estimate,
            r.exact_r2,
            r.exact_half_purity,
            r.statistical_error,
            r.full_error
        ));
    }
    out
}

pub fn cmd_afc_scan(config: &AfcScanConfig) -> Result<Vec<ScanRecord>> {
    let mut records = Vec::new();
    for &l in &config.l_list {
        let tag = ModelTag {
            model: config.model.name().into(),
            h_x: match config.model {
                ModelConfig::Ising(p) => Some(p.h_x),
                _ => None,
            },
            h_z: match config.model {
                ModelConfig::Ising(p) => Some(p.h_z),
                _ => None,
            },
            delta_aniso: match config.model {
                ModelConfig::Xxz(p) => Some(p.delta),
                _ => None,
            },
            beta: Some(config.beta),
        };
        let target = match config.backend {
            BackendConfig::Dense => {
                let h = config.model.spec().dense(l)?;
                ScanTarget::Dense(crate::dense::gibbs_state(&h, config.beta)?)
            }
            BackendConfig::Mpo(MpoBackendParams { max_chi }) => {
                let opts = ThermalOptions { max_chi, ..ThermalOptions::default() };
                let check_opts =
                    ThermalOptions { max_chi: (max_chi / 2).max(2), truncation_failure: 1.0, ..opts };
                ScanTarget::Mpo {
                    mpo: thermal_mpo(config.model.spec(), l, config.beta, &opts)?,
                    chi: max_chi,
                    check: Some(thermal_mpo(config.model.spec(), l, config.beta, &check_opts)?),
                }
            }
        };
        let ks: Vec<usize> =
            config.k_list.iter().copied().filter(|&k| k >= 1 && k <= l / 2).collect();
        records.extend(relative_error_scan(&target, &tag, &ks)?);
        if config.with_additive && l % 2 == 0 {
            let feasible: Vec<usize> = ks.iter().copied().filter(|&k| 2 * k <= l / 2).collect();
            if !feasible.is_empty() {
                records.extend(additive_error_scan(&target, &tag, &feasible)?);
            }
        }
    }
    Ok(records)
}

pub fn cmd_ppt_scan(config: &PptScanConfig) -> Result<String> {
    let points = ppt_phase_scan(
        config.model.spec(),
        &config.beta_list,
        &config.l_list,
        config.c3,
        config.c5,
    )?;
    let mut out = String::from("model,beta,L,f3,f5,detect3,detect5\n");
    for p in &points {
        out.push_str(&format!(
            "{},{},{},{},{},{},{}\n",
            config.model.name(),
            p.beta,
            p.l,
            p.f3,
            p.f5,
            p.detect3,
            p.detect5
        ));
    }
    Ok(out)
}

pub fn cmd_mpdo_bound(config: &MpdoBoundConfig) -> Result<String> {
    let mut out = String::from("tensor_seed,chi,zeta,c_constant,L,k,k_min,actual,bound,pass\n");
    let tree = SeedTree::new(config.seed);
    let mut found = 0usize;
    let mut attempt = 0u64;
    while found < config.tensors {
        if attempt > 200 * config.tensors as u64 {
            return Err(Error::Convergence(format!(
                "only {found} admissible tensors in {attempt} draws"
            )));
        }
        let tensor_seed = tree.child(attempt).value();
        attempt += 1;
        let tensor = random_mpdo_tensor(config.chi, tensor_seed)?;
        let Ok(spectrum) = analyze_transfer_spectrum(&tensor) else { continue };
        let mut any = false;
        let mut lines = Vec::new();
        for &l in &config.l_list {
            let k_min = spectrum.k_min(l);
            for k in k_min..=l / 4 {
                if l % k != 0 || l < spectrum.min_chain_length(k) {
                    continue;
                }
                let check = mpdo_purity_bound_check(&tensor, l, k)?;
                lines.push(format!(
                    "{},{},{:.6},{:.6},{},{},{},{:.6e},{:.6e},{}\n",
                    tensor_seed,
                    config.chi,
                    spectrum.zeta,
                    spectrum.c_constant,
                    l,
                    k,
                    check.k_min,
                    check.actual,
                    check.bound,
                    check.pass
                ));
                any = true;
            }
        }
        if any {
            found += 1;
            for line in lines {
                out.push_str(&line);
            }
        }
    }
    Ok(out)
}

/// Consistency-check wrapper used by the CLI and the examples: repeats the
/// estimation with growing ansatz scales and reports the red flag.
pub fn red_flag_for_state(
    state: &StateConfig,
    ansatz: &[(f64, f64)],
    delta: f64,
    sampled: Option<(usize, u64)>,
) -> Result<afc::RedFlagReport> {
    let rho = state.build_dense()?;
    let mode = match sampled {
        Some((m, seed)) => RedFlagMode::Sampled { m, seed },
        None => RedFlagMode::Exact,
    };
    afc_red_flag_check(&rho, ansatz, delta, mode)
}

/// Depolarization-threshold wrapper for the examples and tests.
pub fn gamma_thresholds_for_circuit(
    l: usize,
    ell: usize,
    seed: u64,
    grid_points: usize,
) -> Result<crate::circuits::GammaThresholdReport> {
    let tree = SeedTree::new(seed);
    let circuit = sample_random_circuit(l, ell, tree.child(0).value())?;
    let bases = random_site_bases(l, tree.child(1).value());
    gamma_threshold_sweep(&circuit, &bases, &default_gamma_grid(grid_points))
}
