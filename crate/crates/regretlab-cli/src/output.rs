//! CSV assembly: `.` decimal, LF endings, 17 significant digits, header
//! row first and a trailing `#` metadata comment carrying version, seed,
//! and a hash of the effective config.

/// 17 significant digits, enough to round-trip any f64.
pub fn fmt_g17(x: f64) -> String {
    if x.is_nan() {
        return "nan".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    format!("{x:.16e}")
}

/// FNV-1a over the canonical config serialization.
pub fn fnv1a64(bytes: &[u8]) -> u64 {
    let mut h: u64 = 0xcbf29ce484222325;
    for &b in bytes {
        h ^= b as u64;
        h = h.wrapping_mul(0x100000001b3);
    }
    h
}

pub struct Csv {
    lines: Vec<String>,
}

impl Csv {
    pub fn new(header: &[&str]) -> Self {
        Self { lines: vec![header.join(",")] }
    }

    pub fn row(&mut self, fields: &[String]) {
        self.lines.push(fields.join(","));
    }

    pub fn finish(mut self, seed: u64, config_json: &str) -> String {
        self.lines.push(format!(
            "# version={} seed={} config_hash={:016x}",
            env!("CARGO_PKG_VERSION"),
            seed,
            fnv1a64(config_json.as_bytes())
        ));
        let mut out = self.lines.join("\n");
        out.push('\n');
        out
    }
}
