//! Unit-carrying quantities in config text.
//!
//! Every physical value is written as `<number> <unit>`; lists as
//! `<n1>, <n2>, ... <unit>`. Values are converted to the canonical unit of
//! their dimension (CGS plus MeV for energies).

use std::fmt;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Dimension {
    Length,
    Time,
    Rate,
    Wavenumber,
    Energy,
    PerMass,
    /// Multiples of the collapse length `a` (simulation grids).
    LatticeLength,
    /// Multiples of `1/a`.
    LatticeMomentum,
    /// Multiples of the collapse time `1/λ`.
    CollapseTime,
    Dimensionless,
}

impl Dimension {
    pub fn canonical_unit(self) -> &'static str {
        match self {
            Dimension::Length => "cm",
            Dimension::Time => "s",
            Dimension::Rate => "/s",
            Dimension::Wavenumber => "/cm",
            Dimension::Energy => "MeV",
            Dimension::PerMass => "/kg",
            Dimension::LatticeLength => "a",
            Dimension::LatticeMomentum => "/a",
            Dimension::CollapseTime => "/lambda",
            Dimension::Dimensionless => "",
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Dimension::Length => "length",
            Dimension::Time => "time",
            Dimension::Rate => "rate",
            Dimension::Wavenumber => "wavenumber",
            Dimension::Energy => "energy",
            Dimension::PerMass => "count per mass",
            Dimension::LatticeLength => "length in units of a",
            Dimension::LatticeMomentum => "momentum in units of 1/a",
            Dimension::CollapseTime => "time in units of 1/lambda",
            Dimension::Dimensionless => "dimensionless",
        }
    }
}

const UNITS: &[(&str, Dimension, f64)] = &[
    ("cm", Dimension::Length, 1.0),
    ("m", Dimension::Length, 100.0),
    ("mm", Dimension::Length, 0.1),
    ("um", Dimension::Length, 1e-4),
    ("nm", Dimension::Length, 1e-7),
    ("fm", Dimension::Length, 1e-13),
    ("s", Dimension::Time, 1.0),
    ("ms", Dimension::Time, 1e-3),
    ("us", Dimension::Time, 1e-6),
    ("ns", Dimension::Time, 1e-9),
    ("ps", Dimension::Time, 1e-12),
    ("fs", Dimension::Time, 1e-15),
    ("day", Dimension::Time, 86_400.0),
    ("/s", Dimension::Rate, 1.0),
    ("1/s", Dimension::Rate, 1.0),
    ("Hz", Dimension::Rate, 1.0),
    ("/day", Dimension::Rate, 1.0 / 86_400.0),
    ("/cm", Dimension::Wavenumber, 1.0),
    ("1/cm", Dimension::Wavenumber, 1.0),
    ("/m", Dimension::Wavenumber, 0.01),
    ("1/m", Dimension::Wavenumber, 0.01),
    ("/fm", Dimension::Wavenumber, 1e13),
    ("1/fm", Dimension::Wavenumber, 1e13),
    ("eV", Dimension::Energy, 1e-6),
    ("keV", Dimension::Energy, 1e-3),
    ("MeV", Dimension::Energy, 1.0),
    ("GeV", Dimension::Energy, 1e3),
    ("/kg", Dimension::PerMass, 1.0),
    ("1/kg", Dimension::PerMass, 1.0),
    ("/g", Dimension::PerMass, 1e3),
    ("a", Dimension::LatticeLength, 1.0),
    ("/a", Dimension::LatticeMomentum, 1.0),
    ("1/a", Dimension::LatticeMomentum, 1.0),
    ("/lambda", Dimension::CollapseTime, 1.0),
    ("1/lambda", Dimension::CollapseTime, 1.0),
];

/// A parsed value in the canonical unit of `dimension`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Quantity {
    pub value: f64,
    pub dimension: Dimension,
}

#[derive(Debug, Clone, PartialEq)]
pub enum UnitError {
    MissingUnit { allowed: Vec<Dimension> },
    UnknownUnit(String),
    WrongDimension { unit: String, allowed: Vec<Dimension> },
    BadNumber(String),
    UnexpectedUnit(String),
    Empty,
}

impl fmt::Display for UnitError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let names = |dims: &[Dimension]| {
            dims.iter()
                .map(|d| format!("{} (e.g. {})", d.name(), d.canonical_unit()))
                .collect::<Vec<_>>()
                .join(" or ")
        };
        match self {
            UnitError::MissingUnit { allowed } => write!(f, "missing unit; expected {}", names(allowed)),
            UnitError::UnknownUnit(u) => write!(f, "unknown unit `{u}`"),
            UnitError::WrongDimension { unit, allowed } => {
                write!(f, "unit `{unit}` has the wrong dimension; expected {}", names(allowed))
            }
            UnitError::BadNumber(s) => write!(f, "`{s}` is not a number"),
            UnitError::UnexpectedUnit(u) => write!(f, "dimensionless value given unit `{u}`"),
            UnitError::Empty => write!(f, "empty value"),
        }
    }
}

fn lookup(unit: &str) -> Option<(Dimension, f64)> {
    UNITS.iter().find(|(u, _, _)| *u == unit).map(|&(_, d, s)| (d, s))
}

fn parse_number(s: &str) -> Result<f64, UnitError> {
    s.trim()
        .parse::<f64>()
        .map_err(|_| UnitError::BadNumber(s.trim().to_string()))
}

/// Split `"1e-16 /s"` into the numeric text and the unit text.
fn split_unit(text: &str) -> (&str, &str) {
    let text = text.trim();
    match text.rfind(char::is_whitespace) {
        Some(i) => (text[..i].trim(), text[i..].trim()),
        None => (text, ""),
    }
}

fn convert(unit: &str, allowed: &[Dimension]) -> Result<(Dimension, f64), UnitError> {
    if unit.is_empty() {
        return if allowed.contains(&Dimension::Dimensionless) {
            Ok((Dimension::Dimensionless, 1.0))
        } else {
            Err(UnitError::MissingUnit {
                allowed: allowed.to_vec(),
            })
        };
    }
    if allowed == [Dimension::Dimensionless] {
        return Err(UnitError::UnexpectedUnit(unit.to_string()));
    }
    let (dim, scale) = lookup(unit).ok_or_else(|| UnitError::UnknownUnit(unit.to_string()))?;
    if !allowed.contains(&dim) {
        return Err(UnitError::WrongDimension {
            unit: unit.to_string(),
            allowed: allowed.to_vec(),
        });
    }
    Ok((dim, scale))
}

/// Parse one quantity whose dimension is one of `allowed`.
pub fn parse_quantity(text: &str, allowed: &[Dimension]) -> Result<Quantity, UnitError> {
    if text.trim().is_empty() {
        return Err(UnitError::Empty);
    }
    let (number, unit) = split_unit(text);
    // a bare number with a dimensionless slot has no unit part
    let (number, unit) = if unit.is_empty() || number.is_empty() || parse_number(unit).is_ok() {
        (text.trim(), "")
    } else {
        (number, unit)
    };
    let (dimension, scale) = convert(unit, allowed)?;
    Ok(Quantity {
        value: parse_number(number)? * scale,
        dimension,
    })
}

/// Parse `"v1, v2, ... unit"`; the trailing unit applies to every entry.
pub fn parse_quantity_list(text: &str, allowed: &[Dimension]) -> Result<Vec<Quantity>, UnitError> {
    if text.trim().is_empty() {
        return Ok(Vec::new());
    }
    let (numbers, unit) = split_unit(text);
    let (numbers, unit) = if unit.is_empty() || parse_number(unit.trim_start_matches(',')).is_ok() {
        (text.trim(), "")
    } else {
        (numbers, unit)
    };
    let (dimension, scale) = convert(unit, allowed)?;
    numbers
        .split(',')
        .map(|s| {
            Ok(Quantity {
                value: parse_number(s)? * scale,
                dimension,
            })
        })
        .collect()
}

/// Shortest text that parses back to exactly `x`.
pub fn format_f64(x: f64) -> String {
    format!("{x:e}")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rates_and_lengths() {
        let q = parse_quantity("1e-16 /s", &[Dimension::Rate]).unwrap();
        assert_eq!(q.value, 1e-16);
        let q = parse_quantity("100 nm", &[Dimension::Length]).unwrap();
        assert!((q.value - 1e-5).abs() < 1e-20);
    }

    #[test]
    fn missing_and_wrong_units() {
        assert!(matches!(
            parse_quantity("1e-5", &[Dimension::Length]),
            Err(UnitError::MissingUnit { .. })
        ));
        assert!(matches!(
            parse_quantity("1 s", &[Dimension::Length]),
            Err(UnitError::WrongDimension { .. })
        ));
        assert!(matches!(
            parse_quantity("1 furlong", &[Dimension::Length]),
            Err(UnitError::UnknownUnit(_))
        ));
        assert!(matches!(
            parse_quantity("3 cm", &[Dimension::Dimensionless]),
            Err(UnitError::UnexpectedUnit(_))
        ));
    }

    #[test]
    fn lists() {
        let v = parse_quantity_list("0, 1, 2 a", &[Dimension::LatticeLength]).unwrap();
        assert_eq!(v.iter().map(|q| q.value).collect::<Vec<_>>(), vec![0.0, 1.0, 2.0]);
        let v = parse_quantity_list("0.5, 1, 10", &[Dimension::Dimensionless]).unwrap();
        assert_eq!(v.len(), 3);
    }

    #[test]
    fn format_round_trips() {
        for x in [0.1, 1e-16, 17.9e-12, 3.0e24, std::f64::consts::PI] {
            assert_eq!(format_f64(x).parse::<f64>().unwrap(), x);
        }
    }
}
