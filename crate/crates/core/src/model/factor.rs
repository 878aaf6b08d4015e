//! Tabular factors over discrete variables.
//!
//! Values are stored flat, row-major over the scope sorted by ascending
//! variable id, with the last scope variable varying fastest. The empty scope
//! is a scalar factor holding a single entry.

use crate::error::{Error, Result};
use crate::model::VarId;

/// Default guard on the number of entries a single factor may hold.
pub const DEFAULT_ENTRY_CAP: u64 = 1 << 31;

#[derive(Debug, Clone, PartialEq)]
pub struct Factor {
    scope: Vec<VarId>,
    cards: Vec<usize>,
    values: Vec<f64>,
}

/// Number of entries of a table over variables with the given cardinalities.
///
/// Returned as `f64` so that exploding orders can be measured without
/// overflowing.
pub fn table_size(cards: impl IntoIterator<Item = usize>) -> f64 {
    cards.into_iter().map(|c| c as f64).product()
}

fn check_cap(scope: &[VarId], entries: f64, cap: u64) -> Result<()> {
    if entries > cap as f64 {
        return Err(Error::SizeLimit { scope: scope.to_vec(), entries, cap });
    }
    Ok(())
}

impl Factor {
    /// Builds a factor from a sorted scope, matching cardinalities and a
    /// row-major value table.
    pub fn new(scope: Vec<VarId>, cards: Vec<usize>, values: Vec<f64>) -> Result<Self> {
        if scope.len() != cards.len() {
            return Err(Error::contract("scope and cardinality lists differ in length"));
        }
        if scope.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::contract(format!("factor scope {scope:?} must be strictly ascending")));
        }
        if cards.contains(&0) {
            return Err(Error::contract("cardinalities must be positive"));
        }
        let expected: usize = cards.iter().product();
        if values.len() != expected {
            return Err(Error::contract(format!(
                "factor over {scope:?} needs {expected} values, got {}",
                values.len()
            )));
        }
        if let Some(bad) = values.iter().find(|v| !(v.is_finite() && **v >= 0.0)) {
            return Err(Error::contract(format!("factor entry {bad} is not a non-negative number")));
        }
        Ok(Factor { scope, cards, values })
    }

    /// Builds a factor from a table laid out row-major over `vars` in the
    /// given (arbitrary) order, permuting it into the canonical layout.
    pub fn from_layout(vars: &[VarId], cards: &[usize], values: Vec<f64>) -> Result<Self> {
        if vars.len() != cards.len() {
            return Err(Error::contract("scope and cardinality lists differ in length"));
        }
        let mut perm: Vec<usize> = (0..vars.len()).collect();
        perm.sort_by_key(|&i| vars[i]);
        if perm.windows(2).any(|w| vars[w[0]] == vars[w[1]]) {
            return Err(Error::contract(format!("duplicate variable in scope {vars:?}")));
        }
        let scope: Vec<VarId> = perm.iter().map(|&i| vars[i]).collect();
        let sorted_cards: Vec<usize> = perm.iter().map(|&i| cards[i]).collect();
        let expected: usize = cards.iter().product();
        if values.len() != expected {
            return Err(Error::contract(format!("factor over {vars:?} needs {expected} values, got {}", values.len())));
        }
        if perm.iter().enumerate().all(|(i, &p)| i == p) {
            return Factor::new(scope, sorted_cards, values);
        }
        // Source strides, indexed by source position.
        let src_strides = strides(cards);
        let mut out = vec![0.0; expected];
        let mut counter = vec![0usize; scope.len()];
        let mut src = 0usize;
        for slot in out.iter_mut() {
            *slot = values[src];
            for pos in (0..scope.len()).rev() {
                let sp = perm[pos];
                counter[pos] += 1;
                src += src_strides[sp];
                if counter[pos] < sorted_cards[pos] {
                    break;
                }
                src -= src_strides[sp] * sorted_cards[pos];
                counter[pos] = 0;
            }
        }
        Factor::new(scope, sorted_cards, out)
    }

    pub fn scalar(value: f64) -> Self {
        Factor { scope: Vec::new(), cards: Vec::new(), values: vec![value] }
    }

    /// All-ones factor over a sorted scope.
    pub fn ones(scope: Vec<VarId>, cards: Vec<usize>) -> Result<Self> {
        let len = cards.iter().product();
        Factor::new(scope, cards, vec![1.0; len])
    }

    pub fn scope(&self) -> &[VarId] {
        &self.scope
    }

    pub fn cards(&self) -> &[usize] {
        &self.cards
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn is_scalar(&self) -> bool {
        self.scope.is_empty()
    }

    /// Sum of all entries.
    pub fn total(&self) -> f64 {
        self.values.iter().sum()
    }

    pub fn position(&self, var: VarId) -> Option<usize> {
        self.scope.binary_search(&var).ok()
    }

    pub fn contains(&self, var: VarId) -> bool {
        self.position(var).is_some()
    }

    pub fn card_of(&self, var: VarId) -> Option<usize> {
        self.position(var).map(|p| self.cards[p])
    }

    /// Entry at an assignment given in scope order.
    pub fn value_at(&self, assignment: &[usize]) -> f64 {
        debug_assert_eq!(assignment.len(), self.scope.len());
        let idx = assignment.iter().zip(&self.cards).fold(0usize, |acc, (&a, &c)| acc * c + a);
        self.values[idx]
    }

    /// Natural join (pointwise product) with the default entry cap.
    pub fn join(&self, other: &Factor) -> Result<Factor> {
        Factor::product(&[self, other], DEFAULT_ENTRY_CAP)
    }

    pub fn join_capped(&self, other: &Factor, cap: u64) -> Result<Factor> {
        Factor::product(&[self, other], cap)
    }

    /// Multi-way natural join of any number of factors in a single pass.
    ///
    /// The result has `∏ cards(union scope)` entries and each one is computed
    /// with one multiply per input factor.
    pub fn product(factors: &[&Factor], cap: u64) -> Result<Factor> {
        let (scope, cards) = union_scope(factors)?;
        check_cap(&scope, table_size(cards.iter().copied()), cap)?;
        let size: usize = cards.iter().product();
        match factors {
            [] => return Ok(Factor::scalar(1.0)),
            [only] => return Ok((*only).clone()),
            _ => {}
        }
        let m = scope.len();
        if m == 0 {
            return Ok(Factor::scalar(factors.iter().map(|f| f.values[0]).product()));
        }
        // moves[d]: (factor, stride) pairs advanced when position d steps;
        // groups[d]: factors whose fastest position in the result is d
        let mut moves: Vec<Vec<(usize, usize)>> = vec![Vec::new(); m];
        let mut groups: Vec<Vec<usize>> = vec![Vec::new(); m];
        let mut constant = 1.0;
        for (fi, f) in factors.iter().enumerate() {
            let own = strides(&f.cards);
            let mut last = None;
            for (d, v) in scope.iter().enumerate() {
                if let Some(p) = f.position(*v) {
                    moves[d].push((fi, own[p]));
                    last = Some(d);
                }
            }
            match last {
                Some(d) => groups[d].push(fi),
                None => constant *= f.values[0],
            }
        }
        let values: Vec<&[f64]> = factors.iter().map(|f| f.values.as_slice()).collect();
        let mut idx = vec![0usize; factors.len()];
        // prefix[d]: product of the factors finished before position d
        let last = m - 1;
        let mut prefix = vec![constant; m];
        let refresh = |prefix: &mut [f64], idx: &[usize], from: usize| {
            for d in from..last {
                prefix[d + 1] = groups[d].iter().fold(prefix[d], |acc, &fi| acc * values[fi][idx[fi]]);
            }
        };
        refresh(&mut prefix, &idx, 0);
        let inner = cards[last];
        let tail: Vec<(usize, usize)> = moves[last].clone();
        let mut out = Vec::with_capacity(size);
        let mut counter = vec![0usize; last];
        for _ in 0..size / inner {
            let p = prefix[last];
            match tail.as_slice() {
                [] => out.extend(std::iter::repeat_n(p, inner)),
                [(f, st)] => {
                    let (v, i0) = (values[*f], idx[*f]);
                    out.extend((0..inner).map(|c| p * v[i0 + c * st]));
                }
                [(f, st), (g, su)] => {
                    let (v, i0, w, j0) = (values[*f], idx[*f], values[*g], idx[*g]);
                    out.extend((0..inner).map(|c| p * v[i0 + c * st] * w[j0 + c * su]));
                }
                _ => out
                    .extend((0..inner).map(|c| tail.iter().fold(p, |acc, &(f, st)| acc * values[f][idx[f] + c * st]))),
            }
            for pos in (0..last).rev() {
                counter[pos] += 1;
                if counter[pos] < cards[pos] {
                    for &(fi, st) in &moves[pos] {
                        idx[fi] += st;
                    }
                    refresh(&mut prefix, &idx, pos);
                    break;
                }
                for &(fi, st) in &moves[pos] {
                    idx[fi] -= st * (cards[pos] - 1);
                }
                counter[pos] = 0;
            }
        }
        Ok(Factor { scope, cards, values: out })
    }

    /// Sums `var` out of the factor.
    pub fn sum_out(&self, var: VarId) -> Result<Factor> {
        let pos = self
            .position(var)
            .ok_or_else(|| Error::contract(format!("variable {var} is not in scope {:?}", self.scope)))?;
        let card = self.cards[pos];
        let inner: usize = self.cards[pos + 1..].iter().product();
        let outer: usize = self.cards[..pos].iter().product();
        let mut out = vec![0.0; outer * inner];
        for o in 0..outer {
            let dst = &mut out[o * inner..(o + 1) * inner];
            for s in 0..card {
                let base = (o * card + s) * inner;
                for (d, v) in dst.iter_mut().zip(&self.values[base..base + inner]) {
                    *d += v;
                }
            }
        }
        Ok(self.without(pos, out))
    }

    /// Keeps the slice where `var = state` and drops `var` from the scope.
    pub fn reduce(&self, var: VarId, state: usize) -> Result<Factor> {
        let pos = self
            .position(var)
            .ok_or_else(|| Error::contract(format!("variable {var} is not in scope {:?}", self.scope)))?;
        let card = self.cards[pos];
        if state >= card {
            return Err(Error::contract(format!("state {state} out of range for variable {var} with {card} states")));
        }
        let inner: usize = self.cards[pos + 1..].iter().product();
        let outer: usize = self.cards[..pos].iter().product();
        let mut out = Vec::with_capacity(outer * inner);
        for o in 0..outer {
            let base = (o * card + state) * inner;
            out.extend_from_slice(&self.values[base..base + inner]);
        }
        Ok(self.without(pos, out))
    }

    /// Sums out every variable not in `keep`.
    pub fn marginalize_onto(&self, keep: &[VarId]) -> Result<Factor> {
        let mut f = self.clone();
        for &v in self.scope.iter().rev() {
            if !keep.contains(&v) {
                f = f.sum_out(v)?;
            }
        }
        Ok(f)
    }

    /// Pointwise division by a factor whose scope is a subset of this one,
    /// with `0 / 0 = 0`.
    pub fn divide(&self, other: &Factor) -> Result<Factor> {
        if let Some(v) = other.scope.iter().find(|v| !self.contains(**v)) {
            return Err(Error::contract(format!("divisor variable {v} is not in the dividend scope")));
        }
        // divisor broadcast onto this factor's layout
        let ones = Factor::ones(self.scope.clone(), self.cards.clone())?;
        let spread = Factor::product(&[&ones, other], u64::MAX)?;
        let values = self
            .values
            .iter()
            .zip(&spread.values)
            .map(|(&num, &den)| if den == 0.0 { 0.0 } else { num / den })
            .collect();
        Ok(Factor { scope: self.scope.clone(), cards: self.cards.clone(), values })
    }

    /// Largest absolute entrywise difference, or `None` when the scopes differ.
    pub fn max_abs_diff(&self, other: &Factor) -> Option<f64> {
        if self.scope != other.scope || self.cards != other.cards {
            return None;
        }
        Some(self.values.iter().zip(&other.values).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max))
    }

    fn without(&self, pos: usize, values: Vec<f64>) -> Factor {
        let mut scope = self.scope.clone();
        let mut cards = self.cards.clone();
        scope.remove(pos);
        cards.remove(pos);
        Factor { scope, cards, values }
    }
}

fn strides(cards: &[usize]) -> Vec<usize> {
    let mut s = vec![1usize; cards.len()];
    for i in (0..cards.len().saturating_sub(1)).rev() {
        s[i] = s[i + 1] * cards[i + 1];
    }
    s
}

/// Sorted union of the factors' scopes with their cardinalities.
pub(crate) fn union_scope(factors: &[&Factor]) -> Result<(Vec<VarId>, Vec<usize>)> {
    let mut pairs: Vec<(VarId, usize)> =
        factors.iter().flat_map(|f| f.scope.iter().copied().zip(f.cards.iter().copied())).collect();
    pairs.sort_unstable();
    pairs.dedup();
    if pairs.windows(2).any(|w| w[0].0 == w[1].0) {
        return Err(Error::contract("factors disagree on a variable's cardinality"));
    }
    Ok(pairs.into_iter().unzip())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn f(scope: &[VarId], cards: &[usize], values: &[f64]) -> Factor {
        Factor::new(scope.to_vec(), cards.to_vec(), values.to_vec()).unwrap()
    }

    #[test]
    fn join_with_scalar_one_is_identity() {
        let a = f(&[0, 2], &[2, 3], &[0.1, 0.2, 0.3, 0.4, 0.5, 0.6]);
        assert_eq!(a.join(&Factor::scalar(1.0)).unwrap(), a);
    }

    #[test]
    fn disjoint_join_is_outer_product() {
        let a = f(&[0], &[2], &[0.3, 0.7]);
        let b = f(&[1], &[2], &[0.5, 0.5]);
        let j = a.join(&b).unwrap();
        assert_eq!(j.scope(), &[0, 1]);
        assert_eq!(j.values(), &[0.15, 0.15, 0.35, 0.35]);
    }

    #[test]
    fn join_respects_entry_cap() {
        let a = f(&[0], &[4], &[1.0; 4]);
        let b = f(&[1], &[4], &[1.0; 4]);
        let err = a.join_capped(&b, 15).unwrap_err();
        match err {
            Error::SizeLimit { scope, .. } => assert_eq!(scope, vec![0, 1]),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn sum_out_only_variable_gives_total_mass() {
        let a = f(&[3], &[3], &[0.2, 0.5, 0.3]);
        let s = a.sum_out(3).unwrap();
        assert!(s.is_scalar());
        assert!((s.values()[0] - 1.0).abs() < 1e-15);
    }

    #[test]
    fn sum_out_missing_variable_is_contract_error() {
        let a = f(&[3], &[3], &[0.2, 0.5, 0.3]);
        assert!(matches!(a.sum_out(1), Err(Error::Contract(_))));
    }

    #[test]
    fn reduce_picks_slice() {
        let a = f(&[0], &[3], &[0.2, 0.5, 0.3]);
        assert_eq!(a.reduce(0, 0).unwrap(), Factor::scalar(0.2));
        assert!(matches!(a.reduce(0, 3), Err(Error::Contract(_))));
        let b = f(&[0, 1], &[2, 3], &[1.0, 2.0, 3.0, 4.0, 5.0, 6.0]);
        assert_eq!(b.reduce(1, 2).unwrap().values(), &[3.0, 6.0]);
        assert_eq!(b.reduce(0, 1).unwrap().values(), &[4.0, 5.0, 6.0]);
    }

    #[test]
    fn from_layout_permutes_to_sorted_scope() {
        // layout over (B=1, A=0) with A fastest
        let g = Factor::from_layout(&[1, 0], &[2, 3], vec![1.0, 2.0, 3.0, 4.0, 5.0, 6.0]).unwrap();
        assert_eq!(g.scope(), &[0, 1]);
        // entry (A=a, B=b) was at b*3 + a
        assert_eq!(g.values(), &[1.0, 4.0, 2.0, 5.0, 3.0, 6.0]);
    }

    #[test]
    fn rejects_negative_and_unsorted() {
        assert!(Factor::new(vec![0], vec![2], vec![-0.1, 1.0]).is_err());
        assert!(Factor::new(vec![1, 0], vec![2, 2], vec![0.0; 4]).is_err());
        assert!(Factor::new(vec![0], vec![2], vec![0.0; 3]).is_err());
    }

    #[test]
    fn divide_handles_zero_over_zero() {
        let a = f(&[0, 1], &[2, 2], &[0.0, 0.2, 0.3, 0.5]);
        let b = f(&[1], &[2], &[0.0, 0.5]);
        let d = a.divide(&b).unwrap();
        assert_eq!(d.values(), &[0.0, 0.4, 0.0, 1.0]);
        assert!(a.divide(&f(&[2], &[2], &[1.0, 1.0])).is_err());
    }

    #[test]
    fn multiway_product_matches_pointwise_definition() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
        let cards = [2, 3, 1, 4, 2];
        for _ in 0..200 {
            let count = rng.gen_range(1..=5);
            let parts: Vec<Factor> = (0..count)
                .map(|_| {
                    let scope: Vec<VarId> = (0..5).filter(|_| rng.gen_bool(0.4)).collect();
                    let cs: Vec<usize> = scope.iter().map(|&v| cards[v]).collect();
                    let n = cs.iter().product();
                    Factor::new(scope, cs, (0..n).map(|_| rng.gen_range(0.0..1.0)).collect()).unwrap()
                })
                .collect();
            let refs: Vec<&Factor> = parts.iter().collect();
            let p = Factor::product(&refs, DEFAULT_ENTRY_CAP).unwrap();
            let mut assignment = vec![0usize; p.scope().len()];
            for i in 0..p.len() {
                let mut rest = i;
                for d in (0..assignment.len()).rev() {
                    assignment[d] = rest % p.cards()[d];
                    rest /= p.cards()[d];
                }
                let expected: f64 = parts
                    .iter()
                    .map(|g| {
                        let a: Vec<usize> = g.scope().iter().map(|v| assignment[p.position(*v).unwrap()]).collect();
                        g.value_at(&a)
                    })
                    .product();
                assert!((p.values()[i] - expected).abs() < 1e-15);
            }
        }
    }
}
