use super::{binomial, invalid, Family, Payload};
use crate::error::Result;

/// `M(X) = {τ_X} + C(X, 3)`: the only nontrivial measurements are 3-element
/// subsets, and a post-processing that merges any two of the three elements
/// collapses to `τ`.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Weird;

impl Family for Weird {
    fn name(&self) -> String {
        "weird".into()
    }

    fn unit(&self) -> Payload {
        Payload::Weird(None)
    }

    fn check(&self, arity: usize, payload: &Payload) -> Result<()> {
        match payload {
            Payload::Weird(None) => Ok(()),
            Payload::Weird(Some([a, b, c])) if a < b && b < c && *c < arity => Ok(()),
            Payload::Weird(Some(_)) => Err(invalid(
                "weird",
                format!("expected a sorted 3-subset of a {arity}-element set"),
            )),
            _ => Err(invalid("weird", "expected τ or a 3-subset")),
        }
    }

    fn pushforward(&self, table: &[usize], _cod: usize, payload: &Payload) -> Result<Payload> {
        match payload {
            Payload::Weird(None) => Ok(Payload::Weird(None)),
            Payload::Weird(Some(s)) => {
                let mut image = s.map(|x| table[x]);
                image.sort_unstable();
                let distinct = image[0] != image[1] && image[1] != image[2];
                Ok(Payload::Weird(distinct.then_some(image)))
            }
            _ => Err(invalid("weird", "expected τ or a 3-subset")),
        }
    }

    fn cardinality(&self, arity: usize) -> Option<u128> {
        Some(1 + binomial(arity, 3))
    }

    fn enumerate(&self, arity: usize) -> Option<Vec<Payload>> {
        let mut out = vec![Payload::Weird(None)];
        for a in 0..arity {
            for b in a + 1..arity {
                for c in b + 1..arity {
                    out.push(Payload::Weird(Some([a, b, c])));
                }
            }
        }
        Some(out)
    }

    fn is_enumerable(&self) -> bool {
        true
    }
}
