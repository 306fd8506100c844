use std::fmt;

/// Six significant digits, switching to exponent form outside `[1e-4, 1e6)`.
pub fn g6(x: f64) -> String {
    if x == 0.0 || !x.is_finite() {
        return format!("{x}");
    }
    let e = x.abs().log10().floor() as i32;
    if !(-4..6).contains(&e) {
        format!("{x:.5e}")
    } else {
        let decimals = (5 - e).max(0) as usize;
        format!("{x:.decimals$}")
    }
}

/// Two-column `label  value` listing with aligned values.
#[derive(Default)]
pub struct Table {
    rows: Vec<(String, String)>,
}

impl Table {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn row(&mut self, label: &str, value: String) {
        self.rows.push((label.to_string(), value));
    }
}

impl fmt::Display for Table {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let width = self.rows.iter().map(|(l, _)| l.len()).max().unwrap_or(0);
        for (label, value) in &self.rows {
            writeln!(f, "{label:<width$}  {value}")?;
        }
        Ok(())
    }
}
