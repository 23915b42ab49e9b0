//! Unit-suffixed numeric arguments: `10GHz`, `17.85mm`, `1.25uV`, `290K`.

use anyhow::{bail, Result};

/// Parses a number with an optional SI unit suffix and returns the value in
/// base SI units. Plain numbers pass through unchanged.
pub fn parse_quantity(input: &str) -> Result<f64> {
    let s = input.trim();
    if let Ok(v) = s.parse::<f64>() {
        return Ok(v);
    }
    let split = s
        .char_indices()
        .rev()
        .take_while(|(_, c)| c.is_alphabetic() || *c == 'µ')
        .last()
        .map(|(i, _)| i)
        .unwrap_or(s.len());
    let (num, suffix) = s.split_at(split);
    let value: f64 = num
        .trim()
        .parse()
        .map_err(|_| anyhow::anyhow!("cannot parse number in `{input}`"))?;
    let scale = match suffix.trim() {
        "THz" => 1e12,
        "GHz" => 1e9,
        "MHz" => 1e6,
        "kHz" => 1e3,
        "Hz" => 1.0,
        "km" => 1e3,
        "m" => 1.0,
        "cm" => 1e-2,
        "mm" => 1e-3,
        "um" | "µm" => 1e-6,
        "nm" => 1e-9,
        "V" => 1.0,
        "mV" => 1e-3,
        "uV" | "µV" => 1e-6,
        "nV" => 1e-9,
        "K" => 1.0,
        "W" => 1.0,
        "mW" => 1e-3,
        "uW" | "µW" => 1e-6,
        other => bail!("unknown unit suffix `{other}` in `{input}`"),
    };
    Ok(value * scale)
}
