//! Finitely presented measurement theories.
//!
//! Elements over `n` are formal pushforwards `h_*g` of named generators,
//! identified by the congruence generated by the user relations and by
//! `(!_g)_* g ≡ τ`. A congruence here means: whenever `f_*g ≡ f'_*g'` then
//! `(h∘f)_*g ≡ (h∘f')_*g'` for every `h` within the bound. Because every
//! identification is applied after post-composing with all such `h`, the
//! union-find partition is closed under post-processing and pushforward is
//! well defined on classes.

use std::fmt;

use super::{invalid, Family, Payload};
use crate::error::{Error, Result};
use crate::finset::{compose, function_index, FinFun, Tables};

/// `left_map_*(generators[left]) ≡ right_map_*(generators[right])`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Relation {
    pub left: usize,
    pub left_map: FinFun,
    pub right: usize,
    pub right_map: FinFun,
}

const PAIR_CAP: usize = 1 << 22;

#[derive(Clone)]
pub struct Presented {
    /// Index 0 is the implicit unit generator over the one-element set.
    names: Vec<String>,
    arities: Vec<usize>,
    bound: usize,
    /// `offsets[g][n]`: first pair index of generator `g` into a set of size `n`.
    offsets: Vec<Vec<usize>>,
    /// Canonical (least) pair index of each pair's class.
    rep: Vec<usize>,
    classes: Vec<Vec<Payload>>,
}

impl fmt::Debug for Presented {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Presented")
            .field("generators", &&self.names[1..])
            .field("bound", &self.bound)
            .finish()
    }
}

struct UnionFind(Vec<usize>);

impl UnionFind {
    fn find(&mut self, mut x: usize) -> usize {
        let mut root = x;
        while self.0[root] != root {
            root = self.0[root];
        }
        while self.0[x] != root {
            let next = self.0[x];
            self.0[x] = root;
            x = next;
        }
        root
    }

    /// Keeps the smaller index as root so that roots are least representatives.
    fn union(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra != rb {
            let (lo, hi) = if ra < rb { (ra, rb) } else { (rb, ra) };
            self.0[hi] = lo;
        }
    }
}

impl Presented {
    /// Saturates the relations over every post-processing into sets of size at
    /// most `bound`. Relation indices refer to positions in `generators`.
    pub fn new(generators: Vec<(String, usize)>, relations: &[Relation], bound: usize) -> Result<Self> {
        let mut names = vec!["τ".to_string()];
        let mut arities = vec![1];
        for (name, arity) in generators {
            if arity > bound {
                return Err(Error::ExceedsBound { size: arity, bound });
            }
            names.push(name);
            arities.push(arity);
        }

        let mut offsets = Vec::with_capacity(arities.len());
        let mut total = 0usize;
        for &a in &arities {
            let mut row = Vec::with_capacity(bound + 1);
            for n in 0..=bound {
                row.push(total);
                total = total.saturating_add(super::power(n, a).min(PAIR_CAP as u128) as usize);
            }
            offsets.push(row);
        }
        if total > PAIR_CAP {
            return Err(Error::TooLarge {
                what: "presentation",
                needed: total as u128,
                cap: PAIR_CAP as u128,
            });
        }

        let mut p = Presented {
            names,
            arities,
            bound,
            offsets,
            rep: Vec::new(),
            classes: Vec::new(),
        };
        let mut uf = UnionFind((0..total).collect());

        for g in 1..p.arities.len() {
            let bang = FinFun::to_unit(p.arities[g]);
            p.saturate(&mut uf, 0, &FinFun::identity(1), g, &bang);
        }
        for (k, r) in relations.iter().enumerate() {
            let (l, rr) = (r.left + 1, r.right + 1);
            for (g, map) in [(l, &r.left_map), (rr, &r.right_map)] {
                if g >= p.arities.len() {
                    return Err(Error::Presentation(format!(
                        "relation {k} refers to unknown generator {}",
                        g - 1
                    )));
                }
                if map.dom().size() != p.arities[g] {
                    return Err(Error::Presentation(format!(
                        "relation {k}: map {map} does not start at the {} outcomes of {}",
                        p.arities[g], p.names[g]
                    )));
                }
            }
            if r.left_map.cod() != r.right_map.cod() {
                return Err(Error::Presentation(format!(
                    "relation {k}: the two sides land in sets of different sizes"
                )));
            }
            if r.left_map.cod().size() > bound {
                return Err(Error::ExceedsBound {
                    size: r.left_map.cod().size(),
                    bound,
                });
            }
            p.saturate(&mut uf, l, &r.left_map, rr, &r.right_map);
        }

        p.rep = (0..total).map(|i| uf.find(i)).collect();
        p.classes = vec![Vec::new(); bound + 1];
        for g in 0..p.arities.len() {
            for n in 0..=bound {
                for (k, table) in Tables::new(p.arities[g], n).enumerate() {
                    let idx = p.offsets[g][n] + k;
                    if p.rep[idx] == idx {
                        p.classes[n].push(Payload::Presented { generator: g, map: table });
                    }
                }
            }
        }
        for c in &mut p.classes {
            c.sort();
        }
        Ok(p)
    }

    fn pair(&self, g: usize, map: &[usize], n: usize) -> usize {
        self.offsets[g][n] + function_index(map, n)
    }

    fn decode(&self, idx: usize) -> (usize, Vec<usize>) {
        for g in (0..self.arities.len()).rev() {
            for n in (0..=self.bound).rev() {
                let start = self.offsets[g][n];
                let count = super::power(n, self.arities[g]) as usize;
                if idx >= start && idx < start + count {
                    return (g, crate::finset::function_table(idx - start, self.arities[g], n));
                }
            }
        }
        unreachable!("pair index {idx} out of range")
    }

    fn saturate(&self, uf: &mut UnionFind, g1: usize, f1: &FinFun, g2: usize, f2: &FinFun) {
        let y = f1.cod().clone();
        for n in 0..=self.bound {
            for h in crate::finset::enumerate_functions(&y, &n.into()) {
                let a = compose(&h, f1).expect("maps share a codomain");
                let b = compose(&h, f2).expect("maps share a codomain");
                uf.union(self.pair(g1, a.table(), n), self.pair(g2, b.table(), n));
            }
        }
    }

    pub fn bound(&self) -> usize {
        self.bound
    }

    pub fn generator_count(&self) -> usize {
        self.names.len() - 1
    }

    /// The class of generator `i` (as listed to [`Presented::new`]) with its
    /// outcome-set size.
    pub fn generator(&self, i: usize) -> Option<(usize, Payload)> {
        let g = i + 1;
        let a = *self.arities.get(g)?;
        let id: Vec<usize> = (0..a).collect();
        let (generator, map) = self.decode(self.rep[self.pair(g, &id, a)]);
        Some((a, Payload::Presented { generator, map }))
    }

    pub fn generator_name(&self, i: usize) -> Option<&str> {
        self.names.get(i + 1).map(String::as_str)
    }
}

impl Family for Presented {
    fn name(&self) -> String {
        format!("presented({} generators)", self.generator_count())
    }

    fn unit(&self) -> Payload {
        Payload::Presented {
            generator: 0,
            map: vec![0],
        }
    }

    fn check(&self, arity: usize, payload: &Payload) -> Result<()> {
        let name = self.name();
        let Payload::Presented { generator, map } = payload else {
            return Err(invalid(&name, "expected a presented class"));
        };
        if arity > self.bound {
            return Err(Error::ExceedsBound {
                size: arity,
                bound: self.bound,
            });
        }
        let Some(&a) = self.arities.get(*generator) else {
            return Err(invalid(&name, format!("unknown generator {generator}")));
        };
        super::check_table(&name, arity, map, a)?;
        let idx = self.pair(*generator, map, arity);
        if self.rep[idx] != idx {
            return Err(invalid(&name, "not the canonical representative of its class"));
        }
        Ok(())
    }

    fn pushforward(&self, table: &[usize], cod: usize, payload: &Payload) -> Result<Payload> {
        let Payload::Presented { generator, map } = payload else {
            return Err(invalid(&self.name(), "expected a presented class"));
        };
        if cod > self.bound {
            return Err(Error::ExceedsBound {
                size: cod,
                bound: self.bound,
            });
        }
        let composed: Vec<usize> = map.iter().map(|&x| table[x]).collect();
        let (generator, map) = self.decode(self.rep[self.pair(*generator, &composed, cod)]);
        Ok(Payload::Presented { generator, map })
    }

    fn cardinality(&self, arity: usize) -> Option<u128> {
        self.classes.get(arity).map(|c| c.len() as u128)
    }

    fn enumerate(&self, arity: usize) -> Option<Vec<Payload>> {
        self.classes.get(arity).cloned()
    }

    fn is_enumerable(&self) -> bool {
        true
    }

    fn max_arity(&self) -> Option<usize> {
        Some(self.bound)
    }

    fn describe(&self, payload: &Payload) -> String {
        match payload {
            Payload::Presented { generator: 0, map } => format!("δ({})", map[0]),
            Payload::Presented { generator, map } => {
                let name = self.names.get(*generator).map_or("?", String::as_str);
                let cells: Vec<String> = map.iter().map(usize::to_string).collect();
                format!("{name}[{}]", cells.join(","))
            }
            other => other.to_string(),
        }
    }
}
