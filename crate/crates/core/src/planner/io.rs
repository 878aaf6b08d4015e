use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::parsers::{parse_num, strip_comment, words};
use crate::planner::{Algorithm, Budget, MaterializationPlan, PlannedNode};

/// Plan file text:
///
/// ```text
/// plan <tree-hash> <k|space> <budget> <benefit>
/// # algo <dp|greedy|exhaustive>
/// mat <node> U=<int> w=<int> p=<float>
/// ```
pub fn write_plan(plan: &MaterializationPlan) -> String {
    let mut s = String::new();
    let _ =
        writeln!(s, "plan {:016x} {} {} {}", plan.tree_hash, plan.budget.kind(), plan.budget.amount(), plan.benefit);
    let _ = writeln!(s, "# algo {}", plan.algorithm.name());
    for n in &plan.per_node {
        let _ = writeln!(s, "mat {} U={} w={} p={}", n.node, n.total, n.w, n.p);
    }
    s
}

fn syntax(line: usize, column: usize, message: impl Into<String>) -> Error {
    Error::Syntax { line, column, message: message.into() }
}

fn keyed<T: std::str::FromStr>(line: usize, (col, w): (usize, &str), key: &str) -> Result<T> {
    let value = w
        .strip_prefix(key)
        .and_then(|r| r.strip_prefix('='))
        .ok_or_else(|| syntax(line, col, format!("expected {key}=<value>, found `{w}`")))?;
    parse_num(line, (col + key.len() + 1, value), key)
}

/// Parses the text produced by [`write_plan`]. Stops at the first line that
/// is not part of a plan, returning the plan and the number of lines used.
pub(crate) fn parse_plan_prefix(text: &str) -> Result<(MaterializationPlan, usize)> {
    let mut plan: Option<MaterializationPlan> = None;
    let mut used = 0;
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        if let Some(name) = raw.trim().strip_prefix("# algo ") {
            if let Some(p) = plan.as_mut() {
                p.algorithm = match name.trim() {
                    "dp" => Algorithm::Dp,
                    "greedy" => Algorithm::Greedy,
                    "exhaustive" => Algorithm::Exhaustive,
                    other => return Err(syntax(line, 8, format!("unknown algorithm `{other}`"))),
                };
            }
            used = line;
            continue;
        }
        let w = words(strip_comment(raw));
        let Some(&(col, head)) = w.first() else {
            used = line;
            continue;
        };
        match head {
            "plan" if plan.is_none() => {
                if w.len() != 5 {
                    return Err(syntax(line, col, "plan header needs <hash> <kind> <budget> <benefit>"));
                }
                let tree_hash = u64::from_str_radix(w[1].1, 16)
                    .map_err(|_| syntax(line, w[1].0, format!("bad tree hash `{}`", w[1].1)))?;
                let amount: u64 = parse_num(line, w[3], "budget")?;
                let budget = match w[2].1 {
                    "k" => Budget::Cardinality(amount as usize),
                    "space" => Budget::Space(amount),
                    other => return Err(syntax(line, w[2].0, format!("unknown budget kind `{other}`"))),
                };
                let benefit: f64 = parse_num(line, w[4], "benefit")?;
                plan = Some(MaterializationPlan {
                    selected: Vec::new(),
                    budget,
                    algorithm: Algorithm::Dp,
                    benefit,
                    per_node: Vec::new(),
                    tree_hash,
                });
            }
            "mat" => {
                let p = plan.as_mut().ok_or_else(|| syntax(line, col, "`mat` before the plan header"))?;
                if w.len() != 5 {
                    return Err(syntax(line, col, "expected mat <node> U=<int> w=<int> p=<float>"));
                }
                let node = PlannedNode {
                    node: parse_num(line, w[1], "node id")?,
                    total: keyed(line, w[2], "U")?,
                    w: keyed(line, w[3], "w")?,
                    p: keyed(line, w[4], "p")?,
                };
                p.selected.push(node.node);
                p.per_node.push(node);
            }
            _ if plan.is_some() => break,
            _ => return Err(syntax(line, col, format!("expected plan header, found `{head}`"))),
        }
        used = line;
    }
    let mut plan = plan.ok_or_else(|| syntax(1, 1, "missing plan header"))?;
    let mut order: Vec<usize> = (0..plan.selected.len()).collect();
    order.sort_by_key(|&i| plan.selected[i]);
    plan.per_node = order.iter().map(|&i| plan.per_node[i].clone()).collect();
    plan.selected.sort_unstable();
    if plan.selected.windows(2).any(|w| w[0] == w[1]) {
        return Err(Error::contract("plan lists a node twice"));
    }
    Ok((plan, used))
}

pub fn parse_plan(text: &str) -> Result<MaterializationPlan> {
    let (plan, used) = parse_plan_prefix(text)?;
    if let Some((i, raw)) = text.lines().enumerate().skip(used).find(|(_, l)| !strip_comment(l).trim().is_empty()) {
        return Err(syntax(i + 1, 1, format!("unexpected line `{}`", raw.trim())));
    }
    Ok(plan)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::elimination::{build_elimination_tree, EliminationOrder};
    use crate::model::fixtures::{survey, survey_ids::*};
    use crate::planner::{plan_dp, plan_greedy_space};
    use crate::workload::base_usefulness_uniform;

    #[test]
    fn round_trip() {
        let net = survey();
        let t = build_elimination_tree(&net, &EliminationOrder::given(&net, vec![A, S, T, E, O, R]).unwrap());
        let p = base_usefulness_uniform(&t, &[1, 2, 3]);
        for plan in [plan_dp(&t, 3, &p).unwrap(), plan_greedy_space(&t, 7, &p).unwrap(), plan_dp(&t, 0, &p).unwrap()] {
            let text = write_plan(&plan);
            assert_eq!(parse_plan(&text).unwrap(), plan);
        }
    }

    #[test]
    fn empty_plan_text() {
        let net = survey();
        let t = build_elimination_tree(&net, &EliminationOrder::given(&net, vec![A, S, T, E, O, R]).unwrap());
        let p = base_usefulness_uniform(&t, &[1]);
        let text = write_plan(&plan_dp(&t, 0, &p).unwrap());
        assert!(text.starts_with(&format!("plan {:016x} k 0 0\n", t.fingerprint())));
        assert_eq!(text.lines().count(), 2);
    }

    #[test]
    fn errors() {
        assert!(parse_plan("mat 1 U=2 w=1 p=0.5").is_err());
        assert!(parse_plan("plan zz k 1 0").is_err());
        assert!(parse_plan("plan 0 k 1 0\nmat 7 U=2 w=x p=0").is_err());
        assert!(parse_plan("plan 0 k 1 0\nbogus").is_err());
    }
}
