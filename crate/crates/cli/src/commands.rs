use serde::Deserialize;
use serde_json::{json, Value};

use subcarve::carver::{self, carve_checks, states_equivalent_by_chain, AgentPayload, AgentSpec};
use subcarve::channels::{ChannelJson, StateDM};
use subcarve::coherence::classify_monoid;
use subcarve::group_rep::{adversarial_group, close_group, isotypic_decompose};
use subcarve::numerics::random::{random_density, random_unitary, SeedSplitter};
use subcarve::numerics::{CMatrix, MatrixJson};
use subcarve::purification::{connect_purifications, purify as purify_blocks, BlockReduced};
use subcarve::star_algebra::{
    block_decompose, center, commutant, generate_algebra, BlockDecomposition,
};
use subcarve::Error;

use crate::config::RunConfig;
use crate::error::{parse, CliError, EXIT_NUMERIC};
use crate::report::Outcome;

fn to_value<T: serde::Serialize>(x: &T) -> Value {
    serde_json::to_value(x).expect("reports serialize")
}

/// Complex number as `[re, im]` with round-off below `1e-12` cleared.
fn complex_json(z: subcarve::numerics::Complex64) -> Value {
    let snap = |x: f64| if x.abs() < 1e-12 { 0.0 } else { x };
    json!([snap(z.re), snap(z.im)])
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct DecomposeInput {
    #[serde(alias = "dim")]
    dimension: usize,
    agent: AgentPayload,
}

pub fn decompose(text: &str, cfg: &RunConfig) -> Result<Outcome, CliError> {
    let input: DecomposeInput = parse(text)?;
    let spec = AgentSpec {
        dim: input.dimension,
        payload: input.agent,
    };
    let carver::Agent::Algebra { dim, generators } = spec.resolve(&cfg.tol)? else {
        return Err(
            Error::InvalidInput("decompose expects an algebra_generators agent".into()).into(),
        );
    };
    let t = &cfg.tol;
    let alg = generate_algebra(dim, &generators, t)?;
    let split = SeedSplitter::new(cfg.seed);
    let dec = block_decompose(&alg, split.child_seed("blocks"), t)?;
    let residual = alg
        .basis()
        .iter()
        .map(|m| dec.algebra_parts(m).1)
        .fold(0.0, f64::max);
    let center_dim = center(&alg, t)?.span_dim();
    Ok(Outcome::ok(json!({
        "blocks": dec.blocks,
        "algebra_dim": alg.span_dim(),
        "commutant_dim": commutant(&alg, t)?.span_dim(),
        "center_dim": center_dim,
        "factor": center_dim == 1,
        "block_residual": residual,
        "unitary": MatrixJson::from(&dec.unitary),
    })))
}

pub fn carve(text: &str, cfg: &RunConfig) -> Result<Outcome, CliError> {
    let spec: AgentSpec = parse(text)?;
    let t = &cfg.tol;
    let agent = spec.resolve(t)?;
    let split = SeedSplitter::new(cfg.seed);
    let sub = carver::carve(&agent, split.child_seed("carve"), &cfg.carve_options(), t)?;
    let checks = carve_checks(&agent, &sub, split.child_seed("checks"), t)?;
    let passed = checks.iter().all(|c| c.passed);
    let check_map: serde_json::Map<String, Value> = checks
        .iter()
        .map(|c| {
            (
                c.name.clone(),
                json!({ "passed": c.passed, "residual": c.residual }),
            )
        })
        .collect();

    // A random state and its canonical representative, joined through the
    // adversary's collapsing operation.
    let probe = match sub.adversary.collapse() {
        None => Value::Null,
        Some(col) => {
            let mut rng = split.child("probe");
            let d = agent.dim();
            let rho = StateDM::new(random_density(d, d, &mut rng), t)?;
            let rep = sub.embed(&sub.quotient(&rho, t)?, t)?;
            match states_equivalent_by_chain(&rho, &rep, &[col], &cfg.chain_search(), t)? {
                Some(cert) => json!({
                    "found": true,
                    "chain_length": cert.len(),
                    "max_residual": cert.max_residual()?,
                }),
                None => json!({ "found": false }),
            }
        }
    };
    let mut result = json!({
        "agent": agent.kind(),
        "dimension": agent.dim(),
        "state_space": sub.state_space,
        "adversary": sub.adversary,
        "checks": check_map,
        "equivalence_probe": probe,
    });
    if let Some(c) = &sub.classification {
        result["classification"] = to_value(c);
    }
    Ok(Outcome {
        result,
        passed,
        failure_code: EXIT_NUMERIC,
    })
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct ClassifyInput {
    #[serde(alias = "dim")]
    dimension: usize,
    channels: Vec<ChannelJson>,
    #[serde(default)]
    contains_classical: bool,
}

pub fn classify(text: &str, cfg: &RunConfig) -> Result<Outcome, CliError> {
    let input: ClassifyInput = parse(text)?;
    let t = &cfg.tol;
    let channels = input
        .channels
        .iter()
        .enumerate()
        .map(|(i, c)| {
            let ch = c.to_channel(t)?;
            if ch.dim_in() != input.dimension || ch.dim_out() != input.dimension {
                return Err(Error::DimensionMismatch(format!(
                    "channel {i} maps {} -> {}, expected dimension {}",
                    ch.dim_in(),
                    ch.dim_out(),
                    input.dimension
                )));
            }
            Ok(ch)
        })
        .collect::<Result<Vec<_>, _>>()?;
    let report = classify_monoid(&channels, input.contains_classical, cfg.max_words, t)?;
    Ok(Outcome::ok(to_value(&report)))
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct GroupInput {
    #[serde(alias = "dim")]
    dimension: usize,
    generators: Vec<MatrixJson>,
}

pub fn grouprep(text: &str, cfg: &RunConfig) -> Result<Outcome, CliError> {
    let input: GroupInput = parse(text)?;
    let t = &cfg.tol;
    let gens: Vec<CMatrix> = input
        .generators
        .iter()
        .map(MatrixJson::to_matrix)
        .collect::<Result<_, _>>()?;
    let rep = close_group(input.dimension, &gens, cfg.max_order, t)?;
    let split = SeedSplitter::new(cfg.seed);
    let iso = isotypic_decompose(&rep, split.child_seed("isotypic"), t)?;
    let adv = adversarial_group(&iso, split.child_seed("adversarial"), t)?;
    let irreps: Vec<Value> = iso
        .blocks
        .iter()
        .map(|b| json!({ "dim": b.dim, "mult": b.mult }))
        .collect();
    let perms: Vec<Value> = adv
        .permutations
        .iter()
        .map(|p| {
            json!({
                "perm": p.perm,
                "omega": p.omega.iter().map(|&z| complex_json(z)).collect::<Vec<_>>(),
            })
        })
        .collect();
    let excluded: Vec<Value> = adv
        .excluded
        .iter()
        .map(|e| {
            json!({
                "omega": e.omega.iter().map(|&z| complex_json(z)).collect::<Vec<_>>(),
                "reason": e.reason,
            })
        })
        .collect();
    Ok(Outcome::ok(json!({
        "order": rep.order(),
        "irreps": irreps,
        "unitary": MatrixJson::from(iso.unitary()),
        "adversarial": {
            "permutation_group_order": adv.permutations.len(),
            "permutations": perms,
            "permutations_commute": adv.permutations_commute(),
            "excluded": excluded,
            "commutant_dim": adv.commutant_basis.len(),
            "group_commutant_dim": adv.group_commutant_dim(t)?,
        },
    })))
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct ReducedInput {
    p: f64,
    rho: MatrixJson,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct PurifyInput {
    blocks: Vec<(usize, usize)>,
    reduced: Vec<ReducedInput>,
    /// Second purification to connect to; a random one when absent.
    #[serde(default)]
    second: Option<MatrixJson>,
}

pub fn purify(text: &str, connect: bool, cfg: &RunConfig) -> Result<Outcome, CliError> {
    let input: PurifyInput = parse(text)?;
    let t = &cfg.tol;
    let dec = BlockDecomposition::standard(&input.blocks)?;
    let reduced: Vec<BlockReduced> = input
        .reduced
        .iter()
        .map(|r| {
            Ok(BlockReduced {
                p: r.p,
                rho: r.rho.to_matrix()?,
            })
        })
        .collect::<Result<_, Error>>()?;
    let w = purify_blocks(&dec, &reduced, t)?;
    let mut result = json!({
        "dimension": dec.dim(),
        "blocks": dec.blocks,
        "global_pure": MatrixJson::from(&w.global_pure),
    });
    if connect {
        let (second, source) = match &input.second {
            Some(m) => (m.to_matrix()?, "input"),
            None => {
                let mut rng = SeedSplitter::new(cfg.seed).child("second-purification");
                let parts: Vec<CMatrix> = dec
                    .blocks
                    .iter()
                    .map(|&(_, m)| random_unitary(m, &mut rng))
                    .collect();
                (
                    dec.embed_commutant(&parts)? * &w.global_pure,
                    "random_commutant_unitary",
                )
            }
        };
        let c = connect_purifications(&dec, &w.global_pure, &second, t)?;
        let u = c.connecting_unitary.expect("connection carries a unitary");
        let residual = (&u * &w.global_pure - &second).norm();
        result["connection"] = json!({
            "second_source": source,
            "second": MatrixJson::from(&second),
            "connecting_unitary": MatrixJson::from(&u),
            "direction": c.direction,
            "residual": residual,
        });
    }
    Ok(Outcome::ok(result))
}
