//! Canonical finite sets and total functions between them.
//!
//! Elements of a [`FinObj`] of size `n` are the integers `0..n`. Labels are
//! carried for display only and never take part in equality, so two functions
//! are equal exactly when their sizes and tables agree.
//!
//! Products use the row-major pairing `(x, y) ↦ x·|Y| + y` everywhere in the
//! crate. Functions `m → n` are enumerated in lexicographic table order, which
//! coincides with reading the table as a base-`n` numeral with the first entry
//! most significant (see [`function_index`]).

use std::fmt;
use std::hash::{Hash, Hasher};

use crate::error::{Error, Result};

#[derive(Clone, Debug)]
pub struct FinObj {
    size: usize,
    labels: Option<Vec<String>>,
}

impl FinObj {
    pub fn new(size: usize) -> Self {
        FinObj { size, labels: None }
    }

    pub fn with_labels(labels: Vec<String>) -> Result<Self> {
        let mut sorted: Vec<&String> = labels.iter().collect();
        sorted.sort();
        if let Some(w) = sorted.windows(2).find(|w| w[0] == w[1]) {
            return Err(Error::Labels(format!("label `{}` is repeated", w[0])));
        }
        Ok(FinObj {
            size: labels.len(),
            labels: Some(labels),
        })
    }

    pub fn size(&self) -> usize {
        self.size
    }

    pub fn labels(&self) -> Option<&[String]> {
        self.labels.as_deref()
    }

    pub fn label(&self, x: usize) -> String {
        match &self.labels {
            Some(l) if x < l.len() => l[x].clone(),
            _ => x.to_string(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.size == 0
    }

    pub fn elements(&self) -> std::ops::Range<usize> {
        0..self.size
    }
}

impl PartialEq for FinObj {
    fn eq(&self, other: &Self) -> bool {
        self.size == other.size
    }
}

impl Eq for FinObj {}

impl Hash for FinObj {
    fn hash<H: Hasher>(&self, state: &mut H) {
        self.size.hash(state)
    }
}

impl From<usize> for FinObj {
    fn from(size: usize) -> Self {
        FinObj::new(size)
    }
}

/// A total function between canonical finite sets.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct FinFun {
    dom: FinObj,
    cod: FinObj,
    table: Vec<usize>,
}

impl FinFun {
    pub fn new(dom: impl Into<FinObj>, cod: impl Into<FinObj>, table: Vec<usize>) -> Result<Self> {
        let (dom, cod) = (dom.into(), cod.into());
        if table.len() != dom.size() {
            return Err(Error::Mismatch(format!(
                "table has {} entries but the domain has size {}",
                table.len(),
                dom.size()
            )));
        }
        if let Some((position, &value)) = table.iter().enumerate().find(|(_, &v)| v >= cod.size()) {
            return Err(Error::TableOutOfRange {
                position,
                value,
                cod: cod.size(),
            });
        }
        Ok(FinFun { dom, cod, table })
    }

    pub(crate) fn from_table_unchecked(cod: usize, table: Vec<usize>) -> Self {
        debug_assert!(table.iter().all(|&v| v < cod));
        FinFun {
            dom: FinObj::new(table.len()),
            cod: FinObj::new(cod),
            table,
        }
    }

    pub fn identity(obj: impl Into<FinObj>) -> Self {
        let obj = obj.into();
        let table = (0..obj.size()).collect();
        FinFun {
            dom: obj.clone(),
            cod: obj,
            table,
        }
    }

    /// The map `1 → cod` picking out `x`.
    pub fn point(cod: impl Into<FinObj>, x: usize) -> Result<Self> {
        let cod = cod.into();
        if x >= cod.size() {
            return Err(Error::ElementOutOfRange {
                element: x,
                size: cod.size(),
            });
        }
        Ok(FinFun {
            dom: FinObj::new(1),
            cod,
            table: vec![x],
        })
    }

    pub fn constant(dom: impl Into<FinObj>, cod: impl Into<FinObj>, x: usize) -> Result<Self> {
        let dom = dom.into();
        FinFun::new(dom.clone(), cod, vec![x; dom.size()])
    }

    /// The unique map into the one-element set.
    pub fn to_unit(dom: impl Into<FinObj>) -> Self {
        let dom = dom.into();
        let table = vec![0; dom.size()];
        FinFun {
            dom,
            cod: FinObj::new(1),
            table,
        }
    }

    pub fn dom(&self) -> &FinObj {
        &self.dom
    }

    pub fn cod(&self) -> &FinObj {
        &self.cod
    }

    pub fn table(&self) -> &[usize] {
        &self.table
    }

    pub fn apply(&self, x: usize) -> usize {
        self.table[x]
    }

    /// `self ∘ f`.
    pub fn after(&self, f: &FinFun) -> Result<FinFun> {
        compose(self, f)
    }

    /// Position of this function in the lexicographic enumeration of
    /// `dom → cod`.
    pub fn index(&self) -> usize {
        function_index(&self.table, self.cod.size())
    }

    pub fn is_identity(&self) -> bool {
        self.dom == self.cod && self.table.iter().enumerate().all(|(i, &v)| i == v)
    }

    pub fn is_injective(&self) -> bool {
        let mut seen = vec![false; self.cod.size()];
        self.table.iter().all(|&v| !std::mem::replace(&mut seen[v], true))
    }

    pub fn is_surjective(&self) -> bool {
        let mut hit = vec![false; self.cod.size()];
        self.table.iter().for_each(|&v| hit[v] = true);
        hit.into_iter().all(|h| h)
    }

    /// Elements of the domain mapped to `y`.
    pub fn fiber(&self, y: usize) -> impl Iterator<Item = usize> + '_ {
        self.table
            .iter()
            .enumerate()
            .filter(move |(_, &v)| v == y)
            .map(|(x, _)| x)
    }

    pub fn image_mask(&self) -> u64 {
        self.table.iter().fold(0u64, |m, &v| m | (1 << v))
    }
}

impl fmt::Display for FinFun {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}→{}[", self.dom.size(), self.cod.size())?;
        for (i, v) in self.table.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{v}")?;
        }
        write!(f, "]")
    }
}

/// `g ∘ f`.
pub fn compose(g: &FinFun, f: &FinFun) -> Result<FinFun> {
    if f.cod != g.dom {
        return Err(Error::Mismatch(format!(
            "cannot compose {g} after {f}: codomain {} differs from domain {}",
            f.cod.size(),
            g.dom.size()
        )));
    }
    Ok(FinFun {
        dom: f.dom.clone(),
        cod: g.cod.clone(),
        table: f.table.iter().map(|&x| g.table[x]).collect(),
    })
}

/// Number of functions `m → n`, or `None` if it does not fit in a `u128`.
pub fn function_count(m: usize, n: usize) -> Option<u128> {
    (n as u128).checked_pow(u32::try_from(m).ok()?)
}

pub fn function_index(table: &[usize], cod: usize) -> usize {
    table.iter().fold(0usize, |acc, &v| acc * cod + v)
}

pub fn function_table(index: usize, dom: usize, cod: usize) -> Vec<usize> {
    let mut table = vec![0; dom];
    let mut rest = index;
    for slot in table.iter_mut().rev() {
        *slot = rest % cod;
        rest /= cod;
    }
    table
}

/// Lexicographic iterator over the tables of all functions `m → n`.
#[derive(Clone, Debug)]
pub struct Tables {
    cod: usize,
    next: Option<Vec<usize>>,
}

impl Tables {
    pub fn new(dom: usize, cod: usize) -> Self {
        let next = if dom > 0 && cod == 0 {
            None
        } else {
            Some(vec![0; dom])
        };
        Tables { cod, next }
    }
}

impl Iterator for Tables {
    type Item = Vec<usize>;

    fn next(&mut self) -> Option<Vec<usize>> {
        let current = self.next.take()?;
        let mut succ = current.clone();
        let mut i = succ.len();
        loop {
            if i == 0 {
                break;
            }
            i -= 1;
            succ[i] += 1;
            if succ[i] < self.cod {
                self.next = Some(succ);
                break;
            }
            succ[i] = 0;
        }
        Some(current)
    }
}

/// All `|Y|^|X|` functions `X → Y`, each once, in lexicographic table order.
pub fn enumerate_functions(x: &FinObj, y: &FinObj) -> Vec<FinFun> {
    Tables::new(x.size(), y.size())
        .map(|table| FinFun {
            dom: x.clone(),
            cod: y.clone(),
            table,
        })
        .collect()
}

/// A binary product with its projections.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Product {
    pub object: FinObj,
    pub left: FinFun,
    pub right: FinFun,
}

impl Product {
    pub fn pair(&self, x: usize, y: usize) -> usize {
        x * self.right.cod().size() + y
    }

    /// The unique `h` with `left ∘ h = g1` and `right ∘ h = g2`.
    pub fn tuple(&self, g1: &FinFun, g2: &FinFun) -> Result<FinFun> {
        if g1.dom() != g2.dom() || g1.cod() != self.left.cod() || g2.cod() != self.right.cod() {
            return Err(Error::Mismatch(format!("cannot tuple {g1} and {g2} into this product")));
        }
        let table = g1
            .table()
            .iter()
            .zip(g2.table())
            .map(|(&a, &b)| self.pair(a, b))
            .collect();
        FinFun::new(g1.dom().clone(), self.object.clone(), table)
    }
}

pub fn product(x: &FinObj, y: &FinObj) -> Product {
    let (p, q) = (x.size(), y.size());
    let object = FinObj::new(p * q);
    let left = FinFun {
        dom: object.clone(),
        cod: x.clone(),
        table: (0..p * q).map(|i| i / q).collect(),
    };
    let right = FinFun {
        dom: object.clone(),
        cod: y.clone(),
        table: (0..p * q).map(|i| i % q).collect(),
    };
    Product { object, left, right }
}

/// Row-major product of several sets with all of its projections. The empty
/// family yields the one-element set.
pub fn product_many(factors: &[usize]) -> (FinObj, Vec<FinFun>) {
    let total: usize = factors.iter().product();
    let projections = factors
        .iter()
        .enumerate()
        .map(|(i, &size)| {
            let stride: usize = factors[i + 1..].iter().product();
            let table = (0..total).map(|k| (k / stride) % size).collect();
            FinFun::from_table_unchecked(size, table)
        })
        .collect();
    (FinObj::new(total), projections)
}

/// The equalizer `S = {x | f(x) = g(x)}` and its inclusion, in increasing
/// element order.
pub fn equalizer(f: &FinFun, g: &FinFun) -> Result<(FinObj, FinFun)> {
    if f.dom() != g.dom() || f.cod() != g.cod() {
        return Err(Error::Mismatch(format!("{f} and {g} are not parallel")));
    }
    let table: Vec<usize> = (0..f.dom().size()).filter(|&x| f.apply(x) == g.apply(x)).collect();
    let object = FinObj::new(table.len());
    let inclusion = FinFun {
        dom: object.clone(),
        cod: f.dom().clone(),
        table,
    };
    Ok((object, inclusion))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fun(cod: usize, table: &[usize]) -> FinFun {
        FinFun::new(table.len(), cod, table.to_vec()).unwrap()
    }

    fn all_functions_up_to(max: usize) -> Vec<FinFun> {
        let mut out = Vec::new();
        for m in 0..=max {
            for n in 0..=max {
                out.extend(enumerate_functions(&m.into(), &n.into()));
            }
        }
        out
    }

    #[test]
    fn compose_examples() {
        let swap = fun(2, &[1, 0]);
        assert_eq!(compose(&FinFun::identity(2), &swap).unwrap(), swap);
        let c0 = fun(2, &[0, 0, 0]);
        assert_eq!(compose(&swap, &c0).unwrap(), fun(2, &[1, 1, 1]));
        assert_eq!(compose(&fun(2, &[1, 0]), &fun(2, &[0, 1, 1])).unwrap(), fun(2, &[1, 0, 0]));
    }

    #[test]
    fn compose_rejects_mismatch() {
        assert!(matches!(
            compose(&fun(2, &[0, 1, 1]), &fun(2, &[0, 1])),
            Err(Error::Mismatch(_))
        ));
    }

    #[test]
    fn new_rejects_bad_tables() {
        assert!(matches!(FinFun::new(2, 2, vec![0, 2]), Err(Error::TableOutOfRange { .. })));
        assert!(matches!(FinFun::new(3, 2, vec![0, 1]), Err(Error::Mismatch(_))));
    }

    #[test]
    fn enumeration_counts() {
        assert_eq!(enumerate_functions(&2.into(), &3.into()).len(), 9);
        let empty = enumerate_functions(&0.into(), &5.into());
        assert_eq!(empty.len(), 1);
        assert!(empty[0].table().is_empty());
        assert!(enumerate_functions(&2.into(), &0.into()).is_empty());
        assert_eq!(enumerate_functions(&0.into(), &0.into()).len(), 1);
    }

    #[test]
    fn enumeration_is_lexicographic_and_matches_index() {
        for m in 0..=3 {
            for n in 1..=3 {
                let all = enumerate_functions(&m.into(), &n.into());
                assert_eq!(all.len() as u128, function_count(m, n).unwrap());
                for (i, f) in all.iter().enumerate() {
                    assert_eq!(f.index(), i);
                    assert_eq!(function_table(i, m, n), f.table());
                }
                assert!(all.windows(2).all(|w| w[0].table() < w[1].table()));
            }
        }
    }

    #[test]
    fn product_examples() {
        let p = product(&2.into(), &3.into());
        assert_eq!(p.object.size(), 6);
        assert_eq!(p.left.table(), &[0, 0, 0, 1, 1, 1]);
        assert_eq!(p.right.table(), &[0, 1, 2, 0, 1, 2]);
        let unit = product(&1.into(), &4.into());
        assert!(unit.right.is_identity() || unit.right.table() == [0, 1, 2, 3]);
        assert_eq!(unit.right.table(), FinFun::identity(4).table());
        assert_eq!(product(&0.into(), &4.into()).object.size(), 0);
    }

    #[test]
    fn product_many_agrees_with_binary_product() {
        let (obj, projs) = product_many(&[2, 3]);
        let p = product(&2.into(), &3.into());
        assert_eq!(obj, p.object);
        assert_eq!(projs[0], p.left);
        assert_eq!(projs[1], p.right);
        let (unit, none) = product_many(&[]);
        assert_eq!(unit.size(), 1);
        assert!(none.is_empty());
    }

    #[test]
    fn equalizer_examples() {
        let swap = fun(2, &[1, 0]);
        let (s, i) = equalizer(&swap, &FinFun::identity(2)).unwrap();
        assert_eq!(s.size(), 0);
        assert!(i.table().is_empty());

        let f = fun(2, &[0, 1, 1]);
        let (s, i) = equalizer(&f, &f).unwrap();
        assert_eq!(s.size(), 3);
        assert!(i.is_identity());

        let (s, i) = equalizer(&f, &fun(2, &[0, 0, 1])).unwrap();
        assert_eq!(s.size(), 2);
        assert_eq!(i.table(), &[0, 2]);
    }

    #[test]
    fn labels_are_display_only() {
        let a = FinObj::with_labels(vec!["up".into(), "down".into()]).unwrap();
        assert_eq!(a, FinObj::new(2));
        assert_eq!(a.label(1), "down");
        assert!(FinObj::with_labels(vec!["x".into(), "x".into()]).is_err());
    }

    #[test]
    fn composition_is_associative_and_unital_up_to_three() {
        let all = all_functions_up_to(3);
        for f in &all {
            assert_eq!(&compose(&FinFun::identity(f.cod().clone()), f).unwrap(), f);
            assert_eq!(&compose(f, &FinFun::identity(f.dom().clone())).unwrap(), f);
        }
        for h in &all {
            for g in all.iter().filter(|g| g.cod() == h.dom()) {
                let hg = compose(h, g).unwrap();
                for f in all.iter().filter(|f| f.cod() == g.dom()) {
                    let left = compose(&hg, f).unwrap();
                    let right = compose(h, &compose(g, f).unwrap()).unwrap();
                    assert_eq!(left, right);
                }
            }
        }
    }

    #[test]
    fn tupling_then_projecting_recovers_inputs_up_to_three() {
        for p in 0..=3 {
            for q in 0..=3 {
                let prod = product(&p.into(), &q.into());
                for z in 0..=3 {
                    for g1 in enumerate_functions(&z.into(), &p.into()) {
                        for g2 in enumerate_functions(&z.into(), &q.into()) {
                            let h = prod.tuple(&g1, &g2).unwrap();
                            assert_eq!(compose(&prod.left, &h).unwrap(), g1);
                            assert_eq!(compose(&prod.right, &h).unwrap(), g2);
                            // uniqueness: any k with the same projections is h
                            for k in enumerate_functions(&z.into(), &prod.object) {
                                if compose(&prod.left, &k).unwrap() == g1
                                    && compose(&prod.right, &k).unwrap() == g2
                                {
                                    assert_eq!(k, h);
                                }
                            }
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn equalizer_universal_property_up_to_three() {
        for m in 0..=3 {
            for n in 0..=3 {
                let fs = enumerate_functions(&m.into(), &n.into());
                for f in &fs {
                    for g in &fs {
                        let (s, i) = equalizer(f, g).unwrap();
                        assert_eq!(compose(f, &i).unwrap(), compose(g, &i).unwrap());
                        for z in 0..=3 {
                            for h in enumerate_functions(&z.into(), &m.into()) {
                                if compose(f, &h).unwrap() != compose(g, &h).unwrap() {
                                    continue;
                                }
                                let factors: Vec<FinFun> = enumerate_functions(&z.into(), &s)
                                    .into_iter()
                                    .filter(|k| compose(&i, k).unwrap() == h)
                                    .collect();
                                assert_eq!(factors.len(), 1, "h = {h} for f = {f}, g = {g}");
                            }
                        }
                    }
                }
            }
        }
    }
}
