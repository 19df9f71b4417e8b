use crate::error::{Error, Result};

/// How an environment sequence `ξ` is produced. Family labels are 0-based.
#[derive(Debug, Clone, PartialEq)]
pub enum EnvironmentRule {
    Constant(usize),
    Periodic(Vec<usize>),
    /// Greedy sequence whose running frequencies track `p`, checked against
    /// `|h_a(m) − p_a| ≤ c0 / m`.
    FrequencyTarget { p: Vec<f64>, c0: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FrequencyViolation {
    /// Prefix length at which the bound fails (1-based).
    pub m: usize,
    pub family: usize,
    pub deviation: f64,
    pub bound: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EnvironmentReport {
    pub sequence: Vec<usize>,
    /// `frequencies[m - 1][a] = h_a(m)`, the share of label `a` in `ξ₁..ξₘ`.
    pub frequencies: Vec<Vec<f64>>,
    pub violations: Vec<FrequencyViolation>,
}

/// Builds an environment of length `len` over `families` labels.
pub fn build_environment(rule: &EnvironmentRule, len: usize, families: usize) -> Result<EnvironmentReport> {
    if len == 0 {
        return Err(Error::InvalidParameter("environment length must be at least 1".into()));
    }
    let check_label = |a: usize| {
        if a < families {
            Ok(a)
        } else {
            Err(Error::InvalidParameter(format!(
                "family label {} exceeds the {families} available",
                a + 1
            )))
        }
    };
    let sequence: Vec<usize> = match rule {
        EnvironmentRule::Constant(a) => vec![check_label(*a)?; len],
        EnvironmentRule::Periodic(pattern) => {
            if pattern.is_empty() {
                return Err(Error::InvalidParameter("empty periodic pattern".into()));
            }
            for &a in pattern {
                check_label(a)?;
            }
            pattern.iter().copied().cycle().take(len).collect()
        }
        EnvironmentRule::FrequencyTarget { p, c0 } => {
            if p.len() != families {
                return Err(Error::InvalidParameter(format!(
                    "{} target frequencies for {families} families",
                    p.len()
                )));
            }
            if p.iter().any(|&v| v < 0.0) || (p.iter().sum::<f64>() - 1.0).abs() > 1e-12 {
                return Err(Error::InvalidParameter("target frequencies must form a probability vector".into()));
            }
            if !(*c0 > 0.0) {
                return Err(Error::InvalidParameter(format!("C0 = {c0} must be positive")));
            }
            let mut counts = vec![0usize; families];
            let mut seq = Vec::with_capacity(len);
            for m in 1..=len {
                let mut best = 0;
                let mut best_deficit = f64::NEG_INFINITY;
                for (a, &pa) in p.iter().enumerate() {
                    let deficit = pa * m as f64 - counts[a] as f64;
                    if deficit > best_deficit {
                        best = a;
                        best_deficit = deficit;
                    }
                }
                counts[best] += 1;
                seq.push(best);
            }
            seq
        }
    };

    let mut counts = vec![0usize; families];
    let mut frequencies = Vec::with_capacity(len);
    let mut violations = Vec::new();
    for (i, &a) in sequence.iter().enumerate() {
        counts[a] += 1;
        let m = i + 1;
        let h: Vec<f64> = counts.iter().map(|&c| c as f64 / m as f64).collect();
        if let EnvironmentRule::FrequencyTarget { p, c0 } = rule {
            let bound = c0 / m as f64;
            for (family, (&ha, &pa)) in h.iter().zip(p).enumerate() {
                let deviation = (ha - pa).abs();
                if deviation > bound + 1e-15 {
                    violations.push(FrequencyViolation {
                        m,
                        family,
                        deviation,
                        bound,
                    });
                }
            }
        }
        frequencies.push(h);
    }
    Ok(EnvironmentReport {
        sequence,
        frequencies,
        violations,
    })
}
