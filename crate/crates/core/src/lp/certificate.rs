//! Farkas certificates for the probabilistic-state system and their text form.
//!
//! A certificate holds one multiplier per constraint of a [`StateSystem`]:
//! first the equality rows (any sign), then one per nonnegativity row
//! `−x_v ≤ 0` (must be nonnegative). Replaying it sums the constraints with
//! those weights; it is valid iff every variable cancels and the combined
//! right-hand side is negative, i.e. the sum reads `0 ≤ c` with `c < 0`.
//!
//! Text form:
//!
//! ```text
//! farkas-certificate v1
//! family <name>
//! bound <N>
//! variables <V>
//! equalities <E>
//! layout-sha256 <hex digest of the equality rows>
//! constraint <k> <row>          (one line per nonzero multiplier, informative)
//! multipliers <count>
//! <k> <p/q>                      (nonzero multipliers only)
//! end
//! ```

use std::fmt::Write as _;

use num_traits::{Signed, Zero};

use super::system::StateSystem;
use crate::error::{Error, Result};
use crate::rational::{self, Rational};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Certificate {
    pub family: String,
    pub bound: usize,
    pub num_vars: usize,
    pub num_equalities: usize,
    pub digest: String,
    /// Equalities first, then one per variable.
    pub multipliers: Vec<Rational>,
}

const MAGIC: &str = "farkas-certificate v1";

impl Certificate {
    pub fn new(sys: &StateSystem, multipliers: Vec<Rational>) -> Self {
        Certificate {
            family: sys.family().to_string(),
            bound: sys.bound(),
            num_vars: sys.num_vars(),
            num_equalities: sys.num_equalities(),
            digest: sys.layout_digest(),
            multipliers,
        }
    }

    /// Exact replay against `sys`. Errors if the certificate was made for a
    /// different system; otherwise reports whether it proves infeasibility.
    pub fn replay(&self, sys: &StateSystem) -> Result<bool> {
        if self.num_vars != sys.num_vars()
            || self.num_equalities != sys.num_equalities()
            || self.multipliers.len() != sys.num_constraints()
        {
            return Err(Error::Certificate(format!(
                "dimension mismatch: certificate has {} variables, {} equalities and {} multipliers; system has {}, {} and {}",
                self.num_vars,
                self.num_equalities,
                self.multipliers.len(),
                sys.num_vars(),
                sys.num_equalities(),
                sys.num_constraints()
            )));
        }
        if self.digest != sys.layout_digest() {
            return Err(Error::Certificate(
                "constraint layout digest does not match the system".into(),
            ));
        }
        let (eq, nonneg) = self.multipliers.split_at(sys.num_equalities());
        if nonneg.iter().any(|l| l.is_negative()) {
            return Ok(false);
        }
        let mut combo = vec![Rational::zero(); sys.num_vars()];
        let mut rhs = Rational::zero();
        for (row, mu) in sys.rows().iter().zip(eq) {
            if mu.is_zero() {
                continue;
            }
            for &(v, c) in &row.coeffs {
                combo[v] += mu * rational::int(c);
            }
            rhs += mu * rational::int(row.rhs);
        }
        for (v, l) in nonneg.iter().enumerate() {
            combo[v] -= l;
        }
        Ok(combo.iter().all(Zero::is_zero) && rhs.is_negative())
    }

    pub fn nonzero(&self) -> impl Iterator<Item = (usize, &Rational)> {
        self.multipliers
            .iter()
            .enumerate()
            .filter(|(_, m)| !m.is_zero())
    }

    pub fn to_text(&self, sys: Option<&StateSystem>) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "{MAGIC}");
        let _ = writeln!(s, "family {}", self.family);
        let _ = writeln!(s, "bound {}", self.bound);
        let _ = writeln!(s, "variables {}", self.num_vars);
        let _ = writeln!(s, "equalities {}", self.num_equalities);
        let _ = writeln!(s, "layout-sha256 {}", self.digest);
        if let Some(sys) = sys {
            for (k, _) in self.nonzero() {
                let _ = writeln!(s, "constraint {k} {}", sys.describe_row(k));
            }
        }
        let _ = writeln!(s, "multipliers {}", self.nonzero().count());
        for (k, m) in self.nonzero() {
            let _ = writeln!(s, "{k} {}", rational::format(m));
        }
        s.push_str("end\n");
        s
    }

    pub fn parse(text: &str) -> Result<Self> {
        let bad = |msg: &str| Error::Parse(format!("certificate: {msg}"));
        let mut lines = text.lines().map(str::trim).filter(|l| !l.is_empty());
        if lines.next() != Some(MAGIC) {
            return Err(bad("missing header line"));
        }
        let mut field = |name: &str| -> Result<String> {
            let line = lines.next().ok_or_else(|| bad(&format!("missing `{name}`")))?;
            line.strip_prefix(name)
                .and_then(|r| r.strip_prefix(' '))
                .map(str::to_string)
                .ok_or_else(|| bad(&format!("expected `{name}`, found `{line}`")))
        };
        let family = field("family")?;
        let number = |s: String, what: &str| -> Result<usize> {
            s.trim().parse().map_err(|_| bad(&format!("bad {what}")))
        };
        let bound = number(field("bound")?, "bound")?;
        let num_vars = number(field("variables")?, "variable count")?;
        let num_equalities = number(field("equalities")?, "equality count")?;
        let digest = field("layout-sha256")?;
        let mut multipliers = vec![Rational::zero(); num_vars + num_equalities];
        let mut count = None;
        for line in lines.by_ref() {
            if line.starts_with("constraint ") {
                continue;
            }
            if let Some(c) = line.strip_prefix("multipliers ") {
                count = Some(number(c.to_string(), "multiplier count")?);
                break;
            }
            return Err(bad(&format!("unexpected line `{line}`")));
        }
        let count = count.ok_or_else(|| bad("missing `multipliers`"))?;
        for _ in 0..count {
            let line = lines.next().ok_or_else(|| bad("too few multipliers"))?;
            let (k, v) = line
                .split_once(' ')
                .ok_or_else(|| bad(&format!("bad multiplier line `{line}`")))?;
            let k = number(k.to_string(), "multiplier index")?;
            if k >= multipliers.len() {
                return Err(Error::Certificate(format!(
                    "multiplier index {k} is outside the {} constraints",
                    multipliers.len()
                )));
            }
            multipliers[k] = rational::parse(v)?;
        }
        if lines.next() != Some("end") {
            return Err(bad("missing `end`"));
        }
        Ok(Certificate {
            family,
            bound,
            num_vars,
            num_equalities,
            digest,
            multipliers,
        })
    }
}
