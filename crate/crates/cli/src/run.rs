//! Build the named instances and run the requested analyses.

use std::collections::HashMap;
use std::time::Instant;

use char2alg::algebra::{tensor_vec, Vector};
use char2alg::classify::{self, ClassifyError};
use char2alg::corpus::{self, Instance};
use char2alg::csa;
use char2alg::decompose::{self, check_certificate, certificate_from_generators, DecomposeError};
use char2alg::fields::{Field, FieldElem};
use char2alg::VerifyLevel;
use serde_json::{json, Value};

use crate::parse::{CertificateSpec, Command, Directive, InputError, InvolutionSpec, JobSpec};

/// Exit status of a job.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum Status {
    Ok = 0,
    /// A certificate failed its checks, or a verification did not pass.
    Invalid = 1,
    Input = 2,
}

#[derive(Clone, Copy, Debug)]
pub struct Options {
    pub level: VerifyLevel,
    /// Replaces every scramble seed and seeds the random searches.
    pub seed: Option<u64>,
}

impl Default for Options {
    fn default() -> Options {
        Options { level: VerifyLevel::Full, seed: None }
    }
}

pub struct Outcome {
    pub report: Value,
    pub status: Status,
}

fn render_vec(f: &Field, v: &[FieldElem]) -> String {
    let terms: Vec<String> = v
        .iter()
        .enumerate()
        .filter(|(_, x)| !x.is_zero())
        .map(|(i, x)| if x.is_one() { format!("e{i}") } else { format!("({})*e{i}", f.render(x)) })
        .collect();
    if terms.is_empty() {
        "0".into()
    } else {
        terms.join(" + ")
    }
}

fn ms(t: Instant) -> f64 {
    (t.elapsed().as_secs_f64() * 1e6).round() / 1e3
}

fn build_error(line: usize, e: impl std::fmt::Display) -> InputError {
    InputError::new(line, 1, e.to_string())
}

/// Tensor two certified instances; generators are `g (x) 1` and `1 (x) h`.
fn tensor(name: &str, x: &Instance, y: &Instance, level: VerifyLevel) -> Result<Instance, DecomposeError> {
    let f = x.algebra.field();
    let (algebra, involution) = csa::tensor_with_involution(&x.algebra, &x.involution, &y.algebra, &y.involution, level)?;
    let mut gens: Vec<Vector> = x.certificate.generators.iter().map(|g| tensor_vec(f, g, y.algebra.unit())).collect();
    gens.extend(y.certificate.generators.iter().map(|h| tensor_vec(f, x.algebra.unit(), h)));
    let certificate = certificate_from_generators(&algebra, &involution, gens, level)?;
    Ok(Instance { label: name.to_string(), algebra, involution, certificate })
}

fn build(spec: &JobSpec, opts: Options) -> Result<(HashMap<String, Instance>, Vec<(Command, String, usize)>), InputError> {
    let f = &spec.field;
    let level = opts.level;
    let mut values: HashMap<String, Instance> = HashMap::new();
    let mut runs = Vec::new();
    for step in &spec.steps {
        let line = step.line;
        match &step.directive {
            Directive::Quaternion { name, a, b, involution } => {
                let pair = match involution {
                    InvolutionSpec::Symplectic => corpus::symplectic_quaternion(f, a, b),
                    InvolutionSpec::Orthogonal(c) => corpus::orthogonal_quaternion(f, a, b, [&c[0], &c[1], &c[2]]),
                }
                .map_err(|e| build_error(line, e))?;
                let inst = corpus::product(name.clone(), &[pair], level).map_err(|e| build_error(line, e))?;
                values.insert(name.clone(), inst);
            }
            Directive::Tensor { name, left, right } => {
                let inst = tensor(name, &values[left], &values[right], level).map_err(|e| build_error(line, e))?;
                values.insert(name.clone(), inst);
            }
            Directive::Scramble { name, seed } => {
                let seed = opts.seed.unwrap_or(*seed);
                let mut inst = corpus::scramble(&values[name], seed, level).map_err(|e| build_error(line, e))?;
                inst.label = name.clone();
                values.insert(name.clone(), inst);
            }
            Directive::Certificate { name, spec: cs } => {
                let inst = values.get_mut(name).expect("checked by the parser");
                let d = inst.algebra.dim();
                let (basis, gens) = match cs {
                    CertificateSpec::Unit => (vec![inst.algebra.unit().clone()], vec![]),
                    CertificateSpec::Generators(g) => {
                        let mut gens = Vec::with_capacity(g.len());
                        for comb in g {
                            let mut v = inst.algebra.zero_vec();
                            for (c, i) in comb {
                                if *i >= d {
                                    return Err(InputError::new(line, 1, format!("basis index e{i} out of range (dim {d})")));
                                }
                                v[*i] = f.add(&v[*i], c);
                            }
                            gens.push(v);
                        }
                        (char2alg::conic::vector_subset_products(&inst.algebra, &gens), gens)
                    }
                };
                inst.certificate = check_certificate(&inst.algebra, &inst.involution, basis, Some(gens), level)
                    .map_err(|e| build_error(line, e))?;
            }
            Directive::Run { command, name } => runs.push((*command, name.clone(), line)),
        }
    }
    Ok((values, runs))
}

fn certificate_json(inst: &Instance) -> Value {
    let flags = &inst.certificate.flags;
    json!({
        "valid": inst.certificate.is_valid(),
        "failure": flags.first_failure(),
        "flags": flags,
        "dim": inst.certificate.dim(),
        "involution_type": inst.certificate.involution_type,
    })
}

fn analyze(cmd: Command, inst: &Instance, opts: Options) -> Result<(Value, Status), ClassifyError> {
    let f = inst.algebra.field();
    let (a, s, c, level) = (&inst.algebra, &inst.involution, &inst.certificate, opts.level);
    let out = match cmd {
        Command::CheckCertificate => json!({}),
        Command::AnalyzeConic => {
            let phi = classify::phi_algebra(a, s, c)?;
            json!({
                "dim": phi.dim(),
                "squares": phi.squares().iter().map(|x| f.render(x)).collect::<Vec<_>>(),
                "min_rank": phi.min_rank(),
                "residue_rank": phi.residue_rank(),
                "maximal_ideal_dim": phi.maximal_ideal().len(),
                "loewy_length": phi.loewy_length(),
                "socle_dim": phi.socle_dim(),
                "frobenius": phi.is_frobenius(),
                "rho_generated": phi.is_rho_generated()?,
                "fingerprint": classify::Fingerprint::of(&phi),
            })
        }
        Command::Decompose => {
            let rep = decompose::full_decomposition(a, s, c, level)?;
            let factors: Vec<Value> = rep
                .factors
                .iter()
                .map(|q| {
                    json!({
                        "a": f.render(&q.a),
                        "b": f.render(&q.b),
                        "case": q.case,
                        "pivot": q.pivot,
                        "involution_type": q.involution_type,
                        "alpha": q.alpha.as_ref().map(|x| f.render(x)),
                        "basis": q.basis.iter().map(|v| render_vec(f, v)).collect::<Vec<_>>(),
                    })
                })
                .collect();
            let ok = rep.checks.all_pass();
            let v = json!({
                "factors": factors,
                "involution_type": rep.involution_type,
                "checks": rep.checks,
                "pivot_retries": rep.pivot_retries,
                "verified": ok,
            });
            return Ok((v, if ok { Status::Ok } else { Status::Invalid }));
        }
        Command::Pfister => {
            let pf = decompose::pfister_invariant(a, s, c, level)?;
            json!({
                "alphas": pf.alphas.iter().map(|x| f.render(x)).collect::<Vec<_>>(),
                "form": pf.form.render(),
                "cases": pf.report.cases(),
            })
        }
        Command::Classify => {
            let inv = classify::invariants(a, s, c, level)?;
            json!({ "record": inv.record, "transpose": inv.transpose })
        }
        Command::Transpose => {
            let flags = classify::transpose_suite(a, s, c, level)?;
            json!({ "conditions": flags })
        }
        Command::Metabolic => {
            let rep = classify::metabolic_suite(a, s, c, level, opts.seed.unwrap_or(0))?;
            let split = rep.split.as_ref().map(|sp| {
                json!({
                    "idempotent": render_vec(f, &sp.idempotent),
                    "matrix_units": sp.matrix_units.iter().map(|v| render_vec(f, v)).collect::<Vec<_>>(),
                    "b_dim": sp.b_algebra.dim(),
                    "idempotent_verified": sp.idempotent_verified,
                    "reconstruction_verified": sp.reconstruction_verified,
                })
            });
            let ok = rep.split.as_ref().is_none_or(|sp| sp.idempotent_verified && sp.reconstruction_verified);
            let v = json!({ "record": rep.invariants.record, "flags": rep.flags, "split": split });
            return Ok((v, if ok { Status::Ok } else { Status::Invalid }));
        }
    };
    Ok((out, Status::Ok))
}

fn input_failure(e: &ClassifyError) -> bool {
    matches!(
        e,
        ClassifyError::NotOrthogonal
            | ClassifyError::DegreeMismatch(..)
            | ClassifyError::Decompose(DecomposeError::NotOrthogonal | DecomposeError::Precondition(_))
    )
}

/// Run a parsed job. Input errors that only surface while building are
/// returned as `Err`; everything else is reported in the document.
pub fn execute(spec: &JobSpec, opts: Options) -> Result<Outcome, InputError> {
    let start = Instant::now();
    let (values, runs) = build(spec, opts)?;
    let build_ms = ms(start);
    let mut results = Vec::new();
    let mut timings = Vec::new();
    let mut status = Status::Ok;
    for (cmd, name, line) in runs {
        let t = Instant::now();
        let inst = &values[&name];
        let mut entry = json!({
            "command": cmd.name(),
            "target": name,
            "line": line,
            "algebra_dim": inst.algebra.dim(),
            "certificate": certificate_json(inst),
        });
        let st = if !inst.certificate.is_valid() {
            entry["verdict"] = json!("certificate invalid");
            Status::Invalid
        } else {
            match analyze(cmd, inst, opts) {
                Ok((v, st)) => {
                    entry["result"] = v;
                    entry["verdict"] = json!(if st == Status::Ok { "ok" } else { "verification failed" });
                    st
                }
                Err(e) => {
                    entry["error"] = json!(e.to_string());
                    if input_failure(&e) {
                        entry["verdict"] = json!("input error");
                        Status::Input
                    } else {
                        entry["verdict"] = json!("verification failed");
                        Status::Invalid
                    }
                }
            }
        };
        status = status.max(st);
        entry["exit_code"] = json!(st as i32);
        timings.push(json!({ "command": cmd.name(), "target": name, "ms": ms(t) }));
        results.push(entry);
    }
    let report = json!({
        "input": spec.canonical(),
        "verify_level": opts.level,
        "seed_override": opts.seed,
        "results": results,
        "exit_code": status as i32,
        "timings": { "build_ms": build_ms, "commands": timings, "total_ms": ms(start) },
    });
    Ok(Outcome { report, status })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parse::parse;

    fn run(text: &str) -> Outcome {
        execute(&parse(text).unwrap(), Options::default()).unwrap()
    }

    #[test]
    fn unit_certificate_is_invalid() {
        let out = run("field gf(2) vars t1,t2\nlet q = quaternion(t1, t2) with involution orthogonal\ncertificate q unit\nrun check-certificate on q\n");
        assert_eq!(out.status, Status::Invalid);
        assert_eq!(out.report["results"][0]["certificate"]["valid"], json!(false));
    }

    #[test]
    fn symplectic_pfister_is_an_input_error() {
        let out = run("field gf(2) vars t1,t2\nlet q = quaternion(t1, t2) with involution symplectic\nrun pfister on q\n");
        assert_eq!(out.status, Status::Input);
    }

    #[test]
    fn zero_conjugator_fails_to_build() {
        let err = execute(
            &parse("field gf(2) vars t1\nlet q = quaternion(t1, t1) with involution orthogonal(0, 0, 0)\nrun pfister on q\n").unwrap(),
            Options::default(),
        )
        .err()
        .unwrap();
        assert_eq!(err.line, 2);
    }
}
