//! Plant grammar: "VARS:Q<q>->TARGET[@NOISE]".
//!
//! VARS is a comma list of column indices or inclusive ranges
//! ("0-5", "0,2,9"). Examples: "0-5:Q6->6", "1,3,7:Q2->10@0.05".

use hoc_core::PlantSpec;

use crate::CliError;

pub fn parse_plant(text: &str) -> Result<PlantSpec, CliError> {
    let usage = |msg: String| CliError::Usage(format!("plant spec {text:?}: {msg}"));
    let (body, noise) = match text.rsplit_once('@') {
        Some((body, noise)) => {
            let rate: f64 = noise
                .parse()
                .map_err(|_| usage(format!("bad noise rate {noise:?}")))?;
            (body, rate)
        }
        None => (text, 0.0),
    };
    let (vars_part, rule_part) = body
        .split_once(':')
        .ok_or_else(|| usage("expected VARS:Q<q>->TARGET".into()))?;
    let rule_part = rule_part
        .strip_prefix('Q')
        .ok_or_else(|| usage("quorum must be written Q<number>".into()))?;
    let (quorum_text, target_text) = rule_part
        .split_once("->")
        .ok_or_else(|| usage("expected Q<q>->TARGET".into()))?;
    let quorum: usize = quorum_text
        .parse()
        .map_err(|_| usage(format!("bad quorum {quorum_text:?}")))?;
    let target_var: usize = target_text
        .parse()
        .map_err(|_| usage(format!("bad target {target_text:?}")))?;
    let mut relevant_vars = Vec::new();
    for item in vars_part.split(',') {
        let item = item.trim();
        if item.is_empty() {
            return Err(usage("empty variable entry".into()));
        }
        match item.split_once('-') {
            Some((lo, hi)) => {
                let lo: usize = lo.parse().map_err(|_| usage(format!("bad index {lo:?}")))?;
                let hi: usize = hi.parse().map_err(|_| usage(format!("bad index {hi:?}")))?;
                if hi < lo {
                    return Err(usage(format!("range {item:?} is reversed")));
                }
                relevant_vars.extend(lo..=hi);
            }
            None => relevant_vars.push(
                item.parse()
                    .map_err(|_| usage(format!("bad index {item:?}")))?,
            ),
        }
    }
    Ok(PlantSpec::new(relevant_vars, quorum, target_var, noise))
}
