//! `TBF_CAPS=closure=20000,char_table=2000,quotient=5000`; any subset of
//! keys may be given.

use tbf_core::Caps;

pub const ENV_VAR: &str = "TBF_CAPS";

pub fn parse_caps(spec: &str) -> Result<Caps, String> {
    let mut caps = Caps::default();
    for part in spec.split(',').map(str::trim).filter(|p| !p.is_empty()) {
        let (key, value) = part
            .split_once('=')
            .ok_or_else(|| format!("expected key=value, found `{part}`"))?;
        let value: usize = value
            .trim()
            .parse()
            .map_err(|_| format!("`{value}` is not a positive integer"))?;
        if value == 0 {
            return Err(format!("cap `{key}` must be positive"));
        }
        match key.trim() {
            "closure" => caps.closure = value,
            "char_table" => caps.char_table_order = value,
            "quotient" => caps.quotient_order = value,
            other => return Err(format!("unknown cap `{other}` (expected closure, char_table or quotient)")),
        }
    }
    Ok(caps)
}

/// Caps from the environment, defaults when unset.
pub fn caps_from_env() -> Result<Caps, String> {
    match std::env::var(ENV_VAR) {
        Ok(spec) => parse_caps(&spec).map_err(|e| format!("{ENV_VAR}: {e}")),
        Err(_) => Ok(Caps::default()),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn partial_override() {
        let caps = parse_caps("quotient=100, closure=50").unwrap();
        assert_eq!(caps.quotient_order, 100);
        assert_eq!(caps.closure, 50);
        assert_eq!(caps.char_table_order, Caps::default().char_table_order);
        assert_eq!(parse_caps("").unwrap(), Caps::default());
    }

    #[test]
    fn rejects_garbage() {
        assert!(parse_caps("quotient").is_err());
        assert!(parse_caps("quotient=-1").is_err());
        assert!(parse_caps("quotient=0").is_err());
        assert!(parse_caps("depth=3").is_err());
    }
}
