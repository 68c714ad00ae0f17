use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;

use super::{JacobiTriple, POLE_EPS};
use crate::elliptic::ModulusContext;
use crate::error::{Error, Result};

/// The nine ratios of `sn`, `cn`, `dn` and `1`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum AuxCode {
    Nd,
    Cd,
    Sd,
    Ns,
    Cs,
    Ds,
    Nc,
    Dc,
    Sc,
}

#[derive(Clone, Copy)]
enum Part {
    One,
    Sn,
    Cn,
    Dn,
}

impl Part {
    fn pick(self, t: &JacobiTriple) -> Complex64 {
        match self {
            Part::One => Complex64::new(1.0, 0.0),
            Part::Sn => t.sn,
            Part::Cn => t.cn,
            Part::Dn => t.dn,
        }
    }

    fn name(self) -> &'static str {
        match self {
            Part::One => "1",
            Part::Sn => "sn",
            Part::Cn => "cn",
            Part::Dn => "dn",
        }
    }
}

impl AuxCode {
    pub const ALL: [AuxCode; 9] = [
        AuxCode::Nd,
        AuxCode::Cd,
        AuxCode::Sd,
        AuxCode::Ns,
        AuxCode::Cs,
        AuxCode::Ds,
        AuxCode::Nc,
        AuxCode::Dc,
        AuxCode::Sc,
    ];

    fn parts(self) -> (Part, Part) {
        use AuxCode::*;
        match self {
            Nd => (Part::One, Part::Dn),
            Cd => (Part::Cn, Part::Dn),
            Sd => (Part::Sn, Part::Dn),
            Ns => (Part::One, Part::Sn),
            Cs => (Part::Cn, Part::Sn),
            Ds => (Part::Dn, Part::Sn),
            Nc => (Part::One, Part::Cn),
            Dc => (Part::Dn, Part::Cn),
            Sc => (Part::Sn, Part::Cn),
        }
    }

    pub fn name(self) -> &'static str {
        use AuxCode::*;
        match self {
            Nd => "nd",
            Cd => "cd",
            Sd => "sd",
            Ns => "ns",
            Cs => "cs",
            Ds => "ds",
            Nc => "nc",
            Dc => "dc",
            Sc => "sc",
        }
    }

    /// Ratio from an already computed triple, rejecting a vanishing
    /// denominator.
    pub fn apply(self, t: &JacobiTriple, z: Complex64) -> Result<Complex64> {
        let (num, den) = self.parts();
        let d = den.pick(t);
        if d.norm() < POLE_EPS {
            return Err(Error::VanishingDenominator {
                function: den.name().to_string(),
                point: z,
            });
        }
        Ok(num.pick(t) / d)
    }

    /// Names of numerator and denominator, e.g. `("cn", "sn")` for `cs`.
    pub fn ratio_names(self) -> (&'static str, &'static str) {
        let (n, d) = self.parts();
        (n.name(), d.name())
    }
}

impl fmt::Display for AuxCode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for AuxCode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        AuxCode::ALL
            .iter()
            .copied()
            .find(|c| c.name() == s)
            .ok_or_else(|| Error::domain(format!("unknown auxiliary function `{s}`")))
    }
}

/// One auxiliary function at a complex argument.
pub fn aux(code: AuxCode, z: Complex64, ctx: &ModulusContext) -> Result<Complex64> {
    let t = ctx.sncndn(z)?;
    code.apply(&t, z)
}
