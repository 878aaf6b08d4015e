//! Reader and writer for the discrete subset of the BIF interchange format.

use std::collections::HashMap;
use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::model::{BayesianNetwork, Factor, VarId, Variable};

/// Rows whose sum is within this distance of one are rescaled to sum to one.
/// Published files round their decimals, which leaves rows a few 1e-7 off.
/// Rows already within 1e-12 are kept verbatim so round trips are exact.
pub const ROW_RENORMALIZE_WINDOW: f64 = 1e-4;

/// A parsed BIF document.
#[derive(Debug, Clone)]
pub struct BifDocument {
    pub name: String,
    pub network: BayesianNetwork,
    /// `property` lines, verbatim, in file order.
    pub properties: Vec<String>,
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Word(String),
    Punct(char),
}

#[derive(Debug, Clone)]
struct Token {
    tok: Tok,
    line: usize,
    column: usize,
}

fn lex(text: &str) -> Result<Vec<Token>> {
    let mut out = Vec::new();
    let mut chars = text.char_indices().peekable();
    let (mut line, mut col) = (1usize, 1usize);
    let bytes = text.as_bytes();
    while let Some(&(i, c)) = chars.peek() {
        if c == '\n' {
            chars.next();
            line += 1;
            col = 1;
            continue;
        }
        if c.is_whitespace() {
            chars.next();
            col += 1;
            continue;
        }
        if c == '/' && bytes.get(i + 1) == Some(&b'/') {
            while let Some(&(_, c2)) = chars.peek() {
                if c2 == '\n' {
                    break;
                }
                chars.next();
            }
            continue;
        }
        if c == '/' && bytes.get(i + 1) == Some(&b'*') {
            let (sl, sc) = (line, col);
            chars.next();
            chars.next();
            col += 2;
            let mut closed = false;
            while let Some((j, c2)) = chars.next() {
                if c2 == '\n' {
                    line += 1;
                    col = 1;
                } else {
                    col += 1;
                }
                if c2 == '*' && bytes.get(j + 1) == Some(&b'/') {
                    chars.next();
                    col += 1;
                    closed = true;
                    break;
                }
            }
            if !closed {
                return Err(Error::Syntax { line: sl, column: sc, message: "unterminated comment".into() });
            }
            continue;
        }
        if "{}[]()|,;".contains(c) {
            out.push(Token { tok: Tok::Punct(c), line, column: col });
            chars.next();
            col += 1;
            continue;
        }
        let (sl, sc) = (line, col);
        let mut word = String::new();
        while let Some(&(_, c2)) = chars.peek() {
            if c2.is_whitespace() || "{}[]()|,;".contains(c2) {
                break;
            }
            word.push(c2);
            chars.next();
            col += 1;
        }
        out.push(Token { tok: Tok::Word(word), line: sl, column: sc });
    }
    Ok(out)
}

struct Cursor {
    toks: Vec<Token>,
    pos: usize,
    last: (usize, usize),
}

impl Cursor {
    fn peek(&self) -> Option<&Token> {
        self.toks.get(self.pos)
    }

    fn next(&mut self) -> Result<Token> {
        let t = self.toks.get(self.pos).cloned().ok_or_else(|| Error::Syntax {
            line: self.last.0,
            column: self.last.1,
            message: "unexpected end of input".into(),
        })?;
        self.pos += 1;
        self.last = (t.line, t.column);
        Ok(t)
    }

    fn err<T>(&self, t: &Token, message: impl Into<String>) -> Result<T> {
        Err(Error::Syntax { line: t.line, column: t.column, message: message.into() })
    }

    fn punct(&mut self, c: char) -> Result<Token> {
        let t = self.next()?;
        match t.tok {
            Tok::Punct(p) if p == c => Ok(t),
            _ => self.err(&t, format!("expected `{c}`, found {}", describe(&t.tok))),
        }
    }

    fn word(&mut self) -> Result<(String, Token)> {
        let t = self.next()?;
        match &t.tok {
            Tok::Word(w) => Ok((w.clone(), t)),
            other => self.err(&t, format!("expected a name, found {}", describe(other))),
        }
    }

    fn keyword(&mut self, kw: &str) -> Result<Token> {
        let (w, t) = self.word()?;
        if w == kw {
            Ok(t)
        } else {
            self.err(&t, format!("expected `{kw}`, found `{w}`"))
        }
    }

    fn is_punct(&self, c: char) -> bool {
        matches!(self.peek(), Some(Token { tok: Tok::Punct(p), .. }) if *p == c)
    }

    /// Raw words up to the next `;`, consuming it.
    fn until_semicolon(&mut self) -> Result<Vec<Token>> {
        let mut out = Vec::new();
        loop {
            let t = self.next()?;
            if t.tok == Tok::Punct(';') {
                return Ok(out);
            }
            out.push(t);
        }
    }
}

fn describe(t: &Tok) -> String {
    match t {
        Tok::Word(w) => format!("`{w}`"),
        Tok::Punct(c) => format!("`{c}`"),
    }
}

struct VarDecl {
    name: String,
    states: Vec<String>,
    line: usize,
}

enum Entry {
    Table(Vec<f64>),
    Default(Vec<f64>),
    Row(Vec<String>, Vec<f64>),
}

struct ProbDecl {
    child: String,
    parents: Vec<String>,
    entries: Vec<Entry>,
    line: usize,
}

fn parse_number(t: &Token) -> Result<f64> {
    match &t.tok {
        Tok::Word(w) => w.parse::<f64>().map_err(|_| Error::Syntax {
            line: t.line,
            column: t.column,
            message: format!("expected a probability, found `{w}`"),
        }),
        other => Err(Error::Syntax {
            line: t.line,
            column: t.column,
            message: format!("expected a probability, found {}", describe(other)),
        }),
    }
}

/// Numbers separated by optional commas, up to `;` or a closing `}`.
fn number_list(cur: &mut Cursor) -> Result<Vec<f64>> {
    let mut out = Vec::new();
    loop {
        if cur.is_punct('}') {
            return Ok(out);
        }
        let t = cur.next()?;
        match &t.tok {
            Tok::Punct(';') => return Ok(out),
            Tok::Punct(',') => continue,
            _ => out.push(parse_number(&t)?),
        }
    }
}

fn parse_variable(cur: &mut Cursor, props: &mut Vec<String>) -> Result<VarDecl> {
    let (name, t) = cur.word()?;
    cur.punct('{')?;
    let mut states = None;
    loop {
        if cur.is_punct('}') {
            cur.next()?;
            break;
        }
        let (kw, kt) = cur.word()?;
        match kw.as_str() {
            "type" => {
                cur.keyword("discrete")?;
                cur.punct('[')?;
                let (k, ktok) = cur.word()?;
                let k: usize = k.parse().or_else(|_| cur.err(&ktok, "expected a state count"))?;
                cur.punct(']')?;
                cur.punct('{')?;
                let mut s = Vec::new();
                loop {
                    let t2 = cur.next()?;
                    match &t2.tok {
                        Tok::Punct('}') => break,
                        Tok::Punct(',') => {}
                        Tok::Word(w) => s.push(w.clone()),
                        other => return cur.err(&t2, format!("unexpected {} in state list", describe(other))),
                    }
                }
                if s.len() != k {
                    return cur.err(&ktok, format!("variable {name} declares {k} states but lists {}", s.len()));
                }
                if k == 0 {
                    return cur.err(&ktok, format!("variable {name} has no states"));
                }
                cur.punct(';')?;
                states = Some(s);
            }
            "property" => {
                let rest = cur.until_semicolon()?;
                props.push(join_words(&rest));
            }
            other => return cur.err(&kt, format!("unsupported variable entry `{other}`")),
        }
    }
    let states = states.map_or_else(|| cur.err(&t, format!("variable {name} has no `type discrete` line")), Ok)?;
    Ok(VarDecl { name, states, line: t.line })
}

fn join_words(toks: &[Token]) -> String {
    let mut s = String::new();
    for t in toks {
        if !s.is_empty() {
            s.push(' ');
        }
        match &t.tok {
            Tok::Word(w) => s.push_str(w),
            Tok::Punct(c) => s.push(*c),
        }
    }
    s
}

fn parse_probability(cur: &mut Cursor, props: &mut Vec<String>) -> Result<ProbDecl> {
    let open = cur.punct('(')?;
    let (child, _) = cur.word()?;
    let mut parents = Vec::new();
    if cur.is_punct('|') {
        cur.next()?;
        loop {
            let (p, _) = cur.word()?;
            parents.push(p);
            if cur.is_punct(',') {
                cur.next()?;
            } else {
                break;
            }
        }
    }
    cur.punct(')')?;
    cur.punct('{')?;
    let mut entries = Vec::new();
    loop {
        let t = cur.next()?;
        match &t.tok {
            Tok::Punct('}') => break,
            Tok::Punct('(') => {
                let mut states = Vec::new();
                loop {
                    let t2 = cur.next()?;
                    match &t2.tok {
                        Tok::Punct(')') => break,
                        Tok::Punct(',') => {}
                        Tok::Word(w) => states.push(w.clone()),
                        other => return cur.err(&t2, format!("unexpected {} in parent assignment", describe(other))),
                    }
                }
                entries.push(Entry::Row(states, number_list(cur)?));
            }
            Tok::Word(w) if w == "table" => entries.push(Entry::Table(number_list(cur)?)),
            Tok::Word(w) if w == "default" => entries.push(Entry::Default(number_list(cur)?)),
            Tok::Word(w) if w == "property" => {
                let rest = cur.until_semicolon()?;
                props.push(join_words(&rest));
            }
            other => return cur.err(&t, format!("unexpected {} in probability block", describe(other))),
        }
    }
    Ok(ProbDecl { child, parents, entries, line: open.line })
}

/// Parses a BIF document into a validated network.
pub fn parse_bif(text: &str) -> Result<BayesianNetwork> {
    Ok(parse_bif_document(text)?.network)
}

pub fn parse_bif_document(text: &str) -> Result<BifDocument> {
    let mut cur = Cursor { toks: lex(text)?, pos: 0, last: (1, 1) };
    let mut name = String::from("unknown");
    let mut properties = Vec::new();
    let mut vars = Vec::new();
    let mut probs = Vec::new();
    while cur.peek().is_some() {
        let (kw, t) = cur.word()?;
        match kw.as_str() {
            "network" => {
                let (n, _) = cur.word()?;
                name = n;
                cur.punct('{')?;
                loop {
                    if cur.is_punct('}') {
                        cur.next()?;
                        break;
                    }
                    let (k, kt) = cur.word()?;
                    if k != "property" {
                        return cur.err(&kt, format!("unsupported network entry `{k}`"));
                    }
                    let rest = cur.until_semicolon()?;
                    properties.push(join_words(&rest));
                }
            }
            "variable" => vars.push(parse_variable(&mut cur, &mut properties)?),
            "probability" => probs.push(parse_probability(&mut cur, &mut properties)?),
            other => return cur.err(&t, format!("expected `network`, `variable` or `probability`, found `{other}`")),
        }
    }
    let network = assemble(vars, probs)?;
    Ok(BifDocument { name, network, properties })
}

fn assemble(vars: Vec<VarDecl>, probs: Vec<ProbDecl>) -> Result<BayesianNetwork> {
    let mut index: HashMap<&str, VarId> = HashMap::new();
    for (i, v) in vars.iter().enumerate() {
        if index.insert(v.name.as_str(), i).is_some() {
            return Err(Error::Syntax {
                line: v.line,
                column: 1,
                message: format!("variable {} declared twice", v.name),
            });
        }
    }
    let n = vars.len();
    if n == 0 {
        return Err(Error::Syntax { line: 1, column: 1, message: "document declares no variables".into() });
    }
    let cards: Vec<usize> = vars.iter().map(|v| v.states.len()).collect();
    let mut parents: Vec<Option<Vec<VarId>>> = vec![None; n];
    let mut cpts: Vec<Option<Factor>> = vec![None; n];
    for p in &probs {
        let lookup = |name: &str| {
            index.get(name).copied().ok_or_else(|| Error::UnknownVariable { line: p.line, name: name.to_string() })
        };
        let child = lookup(&p.child)?;
        let pids = p.parents.iter().map(|s| lookup(s)).collect::<Result<Vec<_>>>()?;
        if cpts[child].is_some() {
            return Err(Error::Syntax {
                line: p.line,
                column: 1,
                message: format!("second probability block for {}", p.child),
            });
        }
        let cpt = build_cpt(p, child, &pids, &vars, &cards)?;
        parents[child] = Some(pids);
        cpts[child] = Some(cpt);
    }
    let mut variables = Vec::with_capacity(n);
    let mut ps = Vec::with_capacity(n);
    let mut fs = Vec::with_capacity(n);
    for (i, v) in vars.into_iter().enumerate() {
        let cpt = cpts[i].take().ok_or_else(|| Error::RowCount {
            line: v.line,
            var: v.name.clone(),
            expected: cards[i],
            found: 0,
        })?;
        ps.push(parents[i].take().unwrap_or_default());
        fs.push(cpt);
        variables.push(Variable::new(i, v.name, v.states));
    }
    BayesianNetwork::new(variables, ps, fs)
}

fn build_cpt(p: &ProbDecl, child: VarId, pids: &[VarId], vars: &[VarDecl], cards: &[usize]) -> Result<Factor> {
    let ccard = cards[child];
    let pcards: Vec<usize> = pids.iter().map(|&q| cards[q]).collect();
    let rows: usize = pcards.iter().product();
    let expected = rows * ccard;
    // layout (parents..., child), child fastest
    let mut values: Vec<Option<f64>> = vec![None; expected];
    let mut default: Option<Vec<f64>> = None;
    let row_count_err = |found: usize| Error::RowCount { line: p.line, var: p.child.clone(), expected, found };
    for e in &p.entries {
        match e {
            Entry::Table(t) => {
                if t.len() != expected {
                    return Err(row_count_err(t.len()));
                }
                // table order: child slowest, then parents with the last fastest
                for (i, &x) in t.iter().enumerate() {
                    let (c, r) = (i / rows, i % rows);
                    values[r * ccard + c] = Some(x);
                }
            }
            Entry::Default(d) => {
                if d.len() != ccard {
                    return Err(row_count_err(d.len()));
                }
                default = Some(d.clone());
            }
            Entry::Row(states, probs) => {
                if states.len() != pids.len() || probs.len() != ccard {
                    return Err(row_count_err(probs.len()));
                }
                let mut r = 0usize;
                for ((s, &q), &pc) in states.iter().zip(pids).zip(&pcards) {
                    let idx = vars[q]
                        .states
                        .iter()
                        .position(|x| x == s)
                        .or_else(|| s.parse::<usize>().ok().filter(|&k| k < pc))
                        .ok_or_else(|| Error::Syntax {
                            line: p.line,
                            column: 1,
                            message: format!("unknown state `{s}` of {}", vars[q].name),
                        })?;
                    r = r * pc + idx;
                }
                for (c, &x) in probs.iter().enumerate() {
                    values[r * ccard + c] = Some(x);
                }
            }
        }
    }
    let mut flat = Vec::with_capacity(expected);
    let mut found = 0usize;
    for r in 0..rows {
        let row = &values[r * ccard..(r + 1) * ccard];
        if row.iter().all(Option::is_some) {
            found += ccard;
            flat.extend(row.iter().map(|x| x.unwrap()));
        } else if let Some(d) = &default {
            flat.extend_from_slice(d);
        } else {
            return Err(row_count_err(found + row.iter().filter(|x| x.is_some()).count()));
        }
    }
    for row in flat.chunks_mut(ccard) {
        let sum: f64 = row.iter().sum();
        let off = (sum - 1.0).abs();
        if off > 1e-12 && off <= ROW_RENORMALIZE_WINDOW {
            row.iter_mut().for_each(|x| *x /= sum);
        }
    }
    let mut scope_vars = pids.to_vec();
    scope_vars.push(child);
    let mut scope_cards = pcards;
    scope_cards.push(ccard);
    Factor::from_layout(&scope_vars, &scope_cards, flat).map_err(|e| match e {
        Error::Contract(m) => Error::Syntax { line: p.line, column: 1, message: m },
        other => other,
    })
}

/// Writes a network as BIF with one row per parent assignment.
pub fn write_bif(net: &BayesianNetwork, name: &str) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "network {name} {{\n}}");
    for v in net.variables() {
        let _ = writeln!(
            s,
            "variable {} {{\n  type discrete [ {} ] {{ {} }};\n}}",
            v.name,
            v.cardinality(),
            v.states.join(", ")
        );
    }
    for v in net.variables() {
        let ps = net.parents(v.id);
        let cpt = net.cpt(v.id);
        if ps.is_empty() {
            let vals: Vec<String> = cpt.values().iter().map(|x| x.to_string()).collect();
            let _ = writeln!(s, "probability ( {} ) {{\n  table {};\n}}", v.name, vals.join(", "));
            continue;
        }
        let pnames: Vec<&str> = ps.iter().map(|&p| net.variable(p).name.as_str()).collect();
        let _ = writeln!(s, "probability ( {} | {} ) {{", v.name, pnames.join(", "));
        let pcards: Vec<usize> = ps.iter().map(|&p| net.cardinality(p)).collect();
        let rows: usize = pcards.iter().product();
        let mut assign = vec![0usize; ps.len()];
        let mut full = vec![0usize; cpt.scope().len()];
        for _ in 0..rows {
            for (&p, &a) in ps.iter().zip(&assign) {
                full[cpt.position(p).unwrap()] = a;
            }
            let labels: Vec<&str> = ps.iter().zip(&assign).map(|(&p, &a)| net.variable(p).states[a].as_str()).collect();
            let cpos = cpt.position(v.id).unwrap();
            let vals: Vec<String> = (0..v.cardinality())
                .map(|c| {
                    full[cpos] = c;
                    cpt.value_at(&full).to_string()
                })
                .collect();
            let _ = writeln!(s, "  ({}) {};", labels.join(", "), vals.join(", "));
            for i in (0..assign.len()).rev() {
                assign[i] += 1;
                if assign[i] < pcards[i] {
                    break;
                }
                assign[i] = 0;
            }
        }
        s.push_str("}\n");
    }
    s
}
