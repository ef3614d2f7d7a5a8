use std::io::Write;

/// Communication cost counters.
///
/// `consensus_rounds` follows the convention that one network-wide scalar
/// agreement costs one round, with a push-sum run charged as two.
/// `nc_invocations` charges every agreement as one regardless of protocol.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct RoundMetrics {
    pub consensus_rounds: u64,
    pub scalar_messages: u64,
    pub wall_rounds: u64,
    pub nc_invocations: u64,
}

/// One line of the metrics CSV.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct MetricsRow {
    pub t: usize,
    pub metrics: RoundMetrics,
}

/// Writes `t,consensus_rounds,scalar_messages,wall_rounds`.
pub fn write_metrics_csv(mut w: impl Write, rows: &[MetricsRow]) -> std::io::Result<()> {
    writeln!(w, "t,consensus_rounds,scalar_messages,wall_rounds")?;
    for r in rows {
        writeln!(
            w,
            "{},{},{},{}",
            r.t, r.metrics.consensus_rounds, r.metrics.scalar_messages, r.metrics.wall_rounds
        )?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_layout() {
        let mut buf = Vec::new();
        let m = RoundMetrics {
            consensus_rounds: 4,
            scalar_messages: 10,
            wall_rounds: 2,
            nc_invocations: 2,
        };
        write_metrics_csv(&mut buf, &[MetricsRow { t: 1, metrics: m }]).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap(), "t,consensus_rounds,scalar_messages,wall_rounds\n1,4,10,2\n");
    }
}
