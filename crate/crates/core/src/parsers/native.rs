//! Line-oriented native network format.
//!
//! ```text
//! bn 2
//! var 0 A 2 a0 a1
//! var 1 B 2 b0 b1
//! cpt 0 : 0.4 0.6
//! cpt 1 0 : 0.1 0.9 0.8 0.2
//! ```
//!
//! CPT values follow the factor layout: row-major over the ascending scope.

use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::model::{BayesianNetwork, Factor, VarId, Variable};

pub fn serialize_native(net: &BayesianNetwork) -> String {
    serialize_native_with_comments(net, &[])
}

/// Like [`serialize_native`], with leading `#` comment lines.
pub fn serialize_native_with_comments(net: &BayesianNetwork, comments: &[String]) -> String {
    let mut s = String::new();
    for c in comments {
        let _ = writeln!(s, "# {c}");
    }
    let _ = writeln!(s, "bn {}", net.len());
    for v in net.variables() {
        let _ = writeln!(s, "var {} {} {} {}", v.id, v.name, v.cardinality(), v.states.join(" "));
    }
    for v in net.variables() {
        let _ = write!(s, "cpt {}", v.id);
        for p in net.parents(v.id) {
            let _ = write!(s, " {p}");
        }
        s.push_str(" :");
        write_values(&mut s, net.cpt(v.id).values());
        s.push('\n');
    }
    s
}

pub(crate) fn write_values(s: &mut String, values: &[f64]) {
    for x in values {
        let _ = write!(s, " {x}");
    }
}

/// Splits a line into whitespace-separated words with their 1-based columns.
pub(crate) fn words(line: &str) -> Vec<(usize, &str)> {
    let mut out = Vec::new();
    let mut start = None;
    for (i, c) in line.char_indices() {
        match (c.is_whitespace(), start) {
            (true, Some(s)) => {
                out.push((s, &line[s..i]));
                start = None;
            }
            (false, None) => start = Some(i),
            _ => {}
        }
    }
    if let Some(s) = start {
        out.push((s, &line[s..]));
    }
    out.into_iter().map(|(s, w)| (line[..s].chars().count() + 1, w)).collect()
}

pub(crate) fn strip_comment(line: &str) -> &str {
    line.split('#').next().unwrap_or("")
}

pub(crate) fn parse_num<T: std::str::FromStr>(line: usize, (col, w): (usize, &str), what: &str) -> Result<T> {
    w.parse().map_err(|_| Error::Syntax { line, column: col, message: format!("expected {what}, found `{w}`") })
}

type CptEntry = (Vec<VarId>, Vec<f64>, usize);

pub fn parse_native(text: &str) -> Result<BayesianNetwork> {
    let mut n: Option<usize> = None;
    let mut vars: Vec<Option<Variable>> = Vec::new();
    // (parents, values, line) per variable
    let mut cpts: Vec<Option<CptEntry>> = Vec::new();
    let mut last_line = 0;
    for (i, raw) in text.lines().enumerate() {
        let ln = i + 1;
        last_line = ln;
        let ws = words(strip_comment(raw));
        let Some(&(col, head)) = ws.first() else { continue };
        let syntax = |column: usize, message: String| Error::Syntax { line: ln, column, message };
        match (head, n) {
            ("bn", None) => {
                if ws.len() != 2 {
                    return Err(syntax(col, "expected `bn <count>`".into()));
                }
                let k: usize = parse_num(ln, ws[1], "a variable count")?;
                if k == 0 {
                    return Err(syntax(ws[1].0, "network has no variables".into()));
                }
                n = Some(k);
                vars = vec![None; k];
                cpts = vec![None; k];
            }
            (_, None) => return Err(syntax(col, format!("expected `bn` header, found `{head}`"))),
            ("bn", Some(_)) => return Err(syntax(col, "second `bn` header".into())),
            ("var", Some(k)) => {
                if ws.len() < 4 {
                    return Err(syntax(col, "expected `var <id> <name> <cardinality> <states...>`".into()));
                }
                let id: usize = parse_num(ln, ws[1], "a variable id")?;
                if id >= k || vars[id].is_some() {
                    return Err(syntax(ws[1].0, format!("variable id {id} is out of range or repeated")));
                }
                let card: usize = parse_num(ln, ws[3], "a cardinality")?;
                let states: Vec<String> = ws[4..].iter().map(|(_, w)| w.to_string()).collect();
                if card == 0 || states.len() != card {
                    return Err(syntax(ws[3].0, format!("cardinality {card} but {} state names", states.len())));
                }
                vars[id] = Some(Variable::new(id, ws[2].1, states));
            }
            ("cpt", Some(k)) => {
                let colon = ws
                    .iter()
                    .position(|(_, w)| *w == ":")
                    .ok_or_else(|| syntax(col, "cpt line needs ` : ` before its values".into()))?;
                if colon < 2 {
                    return Err(syntax(col, "expected `cpt <id> <parents...> : <values...>`".into()));
                }
                let id: usize = parse_num(ln, ws[1], "a variable id")?;
                if id >= k || cpts[id].is_some() {
                    return Err(syntax(ws[1].0, format!("cpt id {id} is out of range or repeated")));
                }
                let parents = ws[2..colon]
                    .iter()
                    .map(|&w| {
                        let p: usize = parse_num(ln, w, "a parent id")?;
                        if p >= k {
                            return Err(Error::UnknownVariable { line: ln, name: w.1.to_string() });
                        }
                        Ok(p)
                    })
                    .collect::<Result<Vec<_>>>()?;
                let values = ws[colon + 1..]
                    .iter()
                    .map(|&w| parse_num::<f64>(ln, w, "a probability"))
                    .collect::<Result<Vec<_>>>()?;
                cpts[id] = Some((parents, values, ln));
            }
            _ => return Err(syntax(col, format!("unknown record `{head}`"))),
        }
    }
    let Some(k) = n else {
        return Err(Error::Syntax { line: last_line.max(1), column: 1, message: "missing `bn` header".into() });
    };
    let mut variables = Vec::with_capacity(k);
    for (id, v) in vars.into_iter().enumerate() {
        variables.push(v.ok_or_else(|| Error::UnknownVariable { line: last_line, name: id.to_string() })?);
    }
    let mut parents = Vec::with_capacity(k);
    let mut factors = Vec::with_capacity(k);
    for (id, c) in cpts.into_iter().enumerate() {
        let (ps, values, ln) = c.ok_or_else(|| Error::RowCount {
            line: last_line,
            var: variables[id].name.clone(),
            expected: variables[id].cardinality(),
            found: 0,
        })?;
        let mut scope: Vec<VarId> = ps.clone();
        scope.push(id);
        scope.sort_unstable();
        if scope.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::Syntax { line: ln, column: 1, message: format!("repeated variable in cpt of {id}") });
        }
        let cards: Vec<usize> = scope.iter().map(|&v| variables[v].cardinality()).collect();
        let expected: usize = cards.iter().product();
        if values.len() != expected {
            return Err(Error::RowCount { line: ln, var: variables[id].name.clone(), expected, found: values.len() });
        }
        let f = Factor::new(scope, cards, values).map_err(|e| Error::Syntax {
            line: ln,
            column: 1,
            message: e.to_string(),
        })?;
        parents.push(ps);
        factors.push(f);
    }
    BayesianNetwork::new(variables, parents, factors)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::fixtures::survey;
    use crate::model::random::{random_network, RandomNetworkSpec};
    use rand::SeedableRng;

    #[test]
    fn doc_example_parses() {
        let text = "bn 2\nvar 0 A 2 a0 a1\nvar 1 B 2 b0 b1\ncpt 0 : 0.4 0.6\ncpt 1 0 : 0.1 0.9 0.8 0.2\n";
        let net = parse_native(text).unwrap();
        assert_eq!(net.parents(1), &[0]);
        assert_eq!(serialize_native(&net), text);
    }

    #[test]
    fn round_trip_is_identity() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        for _ in 0..20 {
            let net = random_network(&mut rng, RandomNetworkSpec { variables: 12, ..Default::default() });
            let text = serialize_native(&net);
            let back = parse_native(&text).unwrap();
            assert_eq!(back, net);
            assert_eq!(serialize_native(&back), text);
        }
        assert_eq!(parse_native(&serialize_native(&survey())).unwrap(), survey());
    }

    #[test]
    fn errors_carry_positions() {
        let e = parse_native("bn 1\nvar 0 A 2 a\n").unwrap_err();
        assert!(matches!(e, Error::Syntax { line: 2, column: 9, .. }), "{e:?}");
        let e = parse_native("bn 1\nvar 0 A 2 a b\ncpt 0 : 0.5 0.25 0.25\n").unwrap_err();
        assert!(matches!(e, Error::RowCount { line: 3, expected: 2, found: 3, .. }), "{e:?}");
        let e = parse_native("bn 1\nvar 0 A 2 a b\ncpt 0 4 : 0.5 0.5\n").unwrap_err();
        assert!(matches!(e, Error::UnknownVariable { line: 3, .. }), "{e:?}");
        let e = parse_native("var 0 A 2 a b\n").unwrap_err();
        assert!(matches!(e, Error::Syntax { line: 1, column: 1, .. }), "{e:?}");
    }

    #[test]
    fn comments_and_blank_lines_are_ignored() {
        let text = "# survey\n\nbn 1 # one\nvar 0 A 2 a b\ncpt 0 : 0.5 0.5\n";
        assert_eq!(parse_native(text).unwrap().len(), 1);
    }
}
