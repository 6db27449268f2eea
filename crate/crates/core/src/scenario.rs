//! Experiment configuration: a flat, line-oriented `key = value` format
//! with section headers, chosen for diff-friendly experiment tracking.
//!
//! ```text
//! [constellation]
//! orbits = 6
//! sats = 11
//!
//! [flow]
//! src = 0,0
//! dst = 1,2
//! rate_pps = 100
//! ```
//!
//! Unknown keys, malformed values and cross-field violations are rejected
//! with the offending line number.

use std::fmt::Write as _;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Mode {
    UnicastSource,
    UnicastOptimal,
    Elr,
    MulticastSpf,
    MulticastPnb,
    NodeDemo,
}

impl Mode {
    pub fn tag(self) -> &'static str {
        match self {
            Mode::UnicastSource => "unicast-source",
            Mode::UnicastOptimal => "unicast-optimal",
            Mode::Elr => "elr",
            Mode::MulticastSpf => "multicast-spf",
            Mode::MulticastPnb => "multicast-pnb",
            Mode::NodeDemo => "node-identified-demo",
        }
    }

    fn parse(s: &str) -> Option<Mode> {
        Some(match s {
            "unicast-source" | "source" => Mode::UnicastSource,
            "unicast-optimal" | "optimal-segment" => Mode::UnicastOptimal,
            "elr" => Mode::Elr,
            "multicast-spf" => Mode::MulticastSpf,
            "multicast-pnb" => Mode::MulticastPnb,
            "node-identified-demo" => Mode::NodeDemo,
            _ => return None,
        })
    }

    pub fn is_multicast(self) -> bool {
        matches!(self, Mode::MulticastSpf | Mode::MulticastPnb)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Management {
    None,
    Lsa,
    Odr,
    Odd,
    OspfLsa,
}

impl Management {
    pub fn tag(self) -> &'static str {
        match self {
            Management::None => "none",
            Management::Lsa => "lsa",
            Management::Odr => "odr",
            Management::Odd => "odd",
            Management::OspfLsa => "ospf-lsa",
        }
    }

    fn parse(s: &str) -> Option<Management> {
        Some(match s {
            "none" => Management::None,
            "lsa" => Management::Lsa,
            "odr" => Management::Odr,
            "odd" => Management::Odd,
            "ospf-lsa" => Management::OspfLsa,
            _ => return None,
        })
    }
}

/// Filter sizing: one fixed length, or the overhead-optimal length for
/// whatever segment is being encoded.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BfLength {
    Optimal,
    Fixed(u32),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Pattern {
    Cbr,
    Poisson,
}

#[derive(Clone, Debug, PartialEq)]
pub struct FlowSpec {
    pub src: (u16, u16),
    pub dsts: Vec<(u16, u16)>,
    pub rate_pps: f64,
    pub pattern: Pattern,
    pub start_s: f64,
    pub duration_s: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Scenario {
    // constellation
    pub orbits: u16,
    pub sats: u16,
    pub altitude_km: f64,
    pub seam: bool,
    pub orbital_motion: bool,
    // filter
    pub bf_m: BfLength,
    pub bf_k: u32,
    pub m_eq: u32,
    m_eq_explicit: bool,
    // link/packet parameters
    pub payload_bits: u32,
    pub bandwidth_bps: f64,
    pub tau_s: f64,
    pub ttl: u16,
    pub queue_capacity: u32,
    // failure management
    pub management: Management,
    /// link identifiers forced down from t = 0 (scripted outages)
    pub down_links: Vec<u32>,
    pub failure_rate: f64,
    pub mttr_s: f64,
    pub hello_interval_s: f64,
    pub odd_fallback: bool,
    pub odr_replan: bool,
    // run control
    pub horizon_s: f64,
    pub mode: Mode,
    pub seeds: (u64, u64),
    pub flows: Vec<FlowSpec>,
}

impl Default for Scenario {
    fn default() -> Self {
        Scenario {
            orbits: 6,
            sats: 11,
            altitude_km: 780.0,
            seam: false,
            orbital_motion: false,
            bf_m: BfLength::Optimal,
            bf_k: 5,
            m_eq: 32,
            m_eq_explicit: false,
            payload_bits: 8192,
            bandwidth_bps: 10.0e6,
            tau_s: 10.0e-6,
            ttl: 64,
            queue_capacity: 1000,
            management: Management::None,
            down_links: Vec::new(),
            failure_rate: 0.0,
            mttr_s: 1.0,
            hello_interval_s: 1.0,
            odd_fallback: false,
            odr_replan: false,
            horizon_s: 1.0,
            mode: Mode::UnicastSource,
            seeds: (1, 1),
            flows: Vec::new(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ConfigError {
    pub line: usize,
    pub msg: String,
}

impl std::fmt::Display for ConfigError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        if self.line == 0 {
            write!(f, "config error: {}", self.msg)
        } else {
            write!(f, "config error at line {}: {}", self.line, self.msg)
        }
    }
}

impl std::error::Error for ConfigError {}

fn err<T>(line: usize, msg: impl Into<String>) -> Result<T, ConfigError> {
    Err(ConfigError {
        line,
        msg: msg.into(),
    })
}

fn parse_coord(line: usize, v: &str) -> Result<(u16, u16), ConfigError> {
    let mut it = v.split(',').map(str::trim);
    match (it.next(), it.next(), it.next()) {
        (Some(a), Some(b), None) => match (a.parse(), b.parse()) {
            (Ok(o), Ok(s)) => Ok((o, s)),
            _ => err(line, format!("bad coordinate `{v}`, expected `orbit,slot`")),
        },
        _ => err(line, format!("bad coordinate `{v}`, expected `orbit,slot`")),
    }
}

fn parse_num<T: std::str::FromStr>(line: usize, key: &str, v: &str) -> Result<T, ConfigError> {
    v.parse().map_err(|_| ConfigError {
        line,
        msg: format!("bad value `{v}` for `{key}`"),
    })
}

fn parse_bool(line: usize, key: &str, v: &str) -> Result<bool, ConfigError> {
    match v {
        "true" | "yes" | "1" => Ok(true),
        "false" | "no" | "0" => Ok(false),
        _ => err(line, format!("bad boolean `{v}` for `{key}`")),
    }
}

/// Inclusive seed range: `5` or `1..500`.
pub fn parse_seed_range(v: &str) -> Option<(u64, u64)> {
    if let Some((a, b)) = v.split_once("..") {
        let lo = a.trim().parse().ok()?;
        let hi = b.trim().parse().ok()?;
        (lo <= hi).then_some((lo, hi))
    } else {
        let s = v.trim().parse().ok()?;
        Some((s, s))
    }
}

impl Scenario {
    pub fn parse(text: &str) -> Result<Scenario, ConfigError> {
        let mut scn = Scenario::default();
        let mut section = String::new();
        let mut flow: Option<(usize, FlowSpec)> = None;

        for (idx, raw) in text.lines().enumerate() {
            let line = idx + 1;
            let stripped = match raw.find('#') {
                Some(i) => &raw[..i],
                None => raw,
            }
            .trim();
            if stripped.is_empty() {
                continue;
            }
            if let Some(name) = stripped.strip_prefix('[') {
                let name = name
                    .strip_suffix(']')
                    .ok_or(ConfigError {
                        line,
                        msg: "unterminated section header".into(),
                    })?
                    .trim();
                if section == "flow" {
                    scn.push_flow(&mut flow)?;
                }
                section = name.to_string();
                match section.as_str() {
                    "constellation" | "bf" | "params" | "failure" | "sim" => {}
                    "flow" => {
                        flow = Some((
                            line,
                            FlowSpec {
                                src: (0, 0),
                                dsts: Vec::new(),
                                rate_pps: 0.0,
                                pattern: Pattern::Cbr,
                                start_s: 0.0,
                                duration_s: f64::INFINITY,
                            },
                        ))
                    }
                    other => return err(line, format!("unknown section `[{other}]`")),
                }
                continue;
            }
            let (key, value) = match stripped.split_once('=') {
                Some((k, v)) => (k.trim(), v.trim()),
                None => return err(line, format!("expected `key = value`, got `{stripped}`")),
            };
            scn.apply_key(&section, key, value, line, &mut flow)?;
        }
        if section == "flow" {
            scn.push_flow(&mut flow)?;
        }
        scn.validate()?;
        Ok(scn)
    }

    fn push_flow(&mut self, slot: &mut Option<(usize, FlowSpec)>) -> Result<(), ConfigError> {
        if let Some((line, f)) = slot.take() {
            if f.dsts.is_empty() {
                return err(line, "flow needs at least one `dst`");
            }
            if f.rate_pps <= 0.0 {
                return err(line, "flow needs a positive `rate_pps`");
            }
            self.flows.push(f);
        }
        Ok(())
    }

    fn apply_key(
        &mut self,
        section: &str,
        key: &str,
        value: &str,
        line: usize,
        flow: &mut Option<(usize, FlowSpec)>,
    ) -> Result<(), ConfigError> {
        match (section, key) {
            ("constellation", "orbits") => self.orbits = parse_num(line, key, value)?,
            ("constellation", "sats") => self.sats = parse_num(line, key, value)?,
            ("constellation", "altitude_km") => self.altitude_km = parse_num(line, key, value)?,
            ("constellation", "seam") => self.seam = parse_bool(line, key, value)?,
            ("constellation", "orbital_motion") => {
                self.orbital_motion = parse_bool(line, key, value)?
            }
            ("bf", "m") => {
                self.bf_m = if value == "optimal" {
                    BfLength::Optimal
                } else {
                    BfLength::Fixed(parse_num(line, key, value)?)
                }
            }
            ("bf", "k") => self.bf_k = parse_num(line, key, value)?,
            ("bf", "m_eq") => {
                self.m_eq = parse_num(line, key, value)?;
                self.m_eq_explicit = true;
            }
            ("params", "payload_bits") => self.payload_bits = parse_num(line, key, value)?,
            ("params", "bandwidth_bps") => self.bandwidth_bps = parse_num(line, key, value)?,
            ("params", "tau_us") => self.tau_s = parse_num::<f64>(line, key, value)? * 1.0e-6,
            ("params", "ttl") => self.ttl = parse_num(line, key, value)?,
            ("params", "queue_capacity") => self.queue_capacity = parse_num(line, key, value)?,
            ("failure", "management") => {
                self.management = Management::parse(value).ok_or(ConfigError {
                    line,
                    msg: format!("unknown management `{value}`"),
                })?
            }
            ("failure", "down_links") => {
                self.down_links = value
                    .split(',')
                    .map(|part| parse_num(line, key, part.trim()))
                    .collect::<Result<_, _>>()?
            }
            ("failure", "rate") => self.failure_rate = parse_num(line, key, value)?,
            ("failure", "mttr_s") => self.mttr_s = parse_num(line, key, value)?,
            ("failure", "hello_interval_s") => self.hello_interval_s = parse_num(line, key, value)?,
            ("failure", "odd_fallback") => self.odd_fallback = parse_bool(line, key, value)?,
            ("failure", "odr_replan") => self.odr_replan = parse_bool(line, key, value)?,
            ("sim", "horizon_s") => self.horizon_s = parse_num(line, key, value)?,
            ("sim", "mode") => {
                self.mode = Mode::parse(value).ok_or(ConfigError {
                    line,
                    msg: format!("unknown mode `{value}`"),
                })?
            }
            ("sim", "seeds") => {
                self.seeds = parse_seed_range(value).ok_or(ConfigError {
                    line,
                    msg: format!("bad seed range `{value}`"),
                })?
            }
            ("flow", _) => {
                let (_, f) = flow.as_mut().ok_or(ConfigError {
                    line,
                    msg: "flow key outside a [flow] section".into(),
                })?;
                match key {
                    "src" => f.src = parse_coord(line, value)?,
                    "dst" => {
                        f.dsts = value
                            .split(';')
                            .map(|part| parse_coord(line, part.trim()))
                            .collect::<Result<_, _>>()?
                    }
                    "rate_pps" => f.rate_pps = parse_num(line, key, value)?,
                    "pattern" => {
                        f.pattern = match value {
                            "cbr" => Pattern::Cbr,
                            "poisson" => Pattern::Poisson,
                            _ => return err(line, format!("unknown pattern `{value}`")),
                        }
                    }
                    "start_s" => f.start_s = parse_num(line, key, value)?,
                    "duration_s" => f.duration_s = parse_num(line, key, value)?,
                    other => return err(line, format!("unknown flow key `{other}`")),
                }
            }
            (sec, other) => {
                return err(line, format!("unknown key `{other}` in section `[{sec}]`"))
            }
        }
        Ok(())
    }

    /// Cross-field checks; `line` 0 means "whole file".
    pub fn validate(&self) -> Result<(), ConfigError> {
        if self.orbits < 2 || self.sats < 3 {
            return err(0, "constellation needs orbits >= 2 and sats >= 3");
        }
        if self.bf_k == 0 || self.bf_k > 64 {
            return err(0, "bf.k must be in 1..=64");
        }
        if let BfLength::Fixed(m) = self.bf_m {
            if m == 0 {
                return err(0, "bf.m must be positive");
            }
        }
        if self.m_eq_explicit && self.management != Management::Odd {
            return err(0, "bf.m_eq only applies with failure.management = odd");
        }
        let total_links = if self.seam {
            4 * self.orbits as u32 * self.sats as u32 - 2 * self.sats as u32
        } else {
            4 * self.orbits as u32 * self.sats as u32
        };
        for &id in &self.down_links {
            if id == 0 || id > total_links {
                return err(0, format!("down_links entry {id} outside 1..={total_links}"));
            }
        }
        if !(0.0..=0.95).contains(&self.failure_rate) {
            return err(0, "failure.rate must be in [0, 0.95]");
        }
        if self.failure_rate > 0.0 && self.mttr_s <= 0.0 {
            return err(0, "failure.mttr_s must be positive when failures are on");
        }
        if self.horizon_s <= 0.0 {
            return err(0, "sim.horizon_s must be positive");
        }
        if self.management == Management::OspfLsa && self.mode != Mode::UnicastSource {
            return err(
                0,
                "ospf-lsa management forwards hop-by-hop; set mode = unicast-source",
            );
        }
        if self.mode == Mode::NodeDemo && self.management != Management::None {
            return err(0, "node-identified-demo runs without failure management");
        }
        if self.mode.is_multicast() && self.management == Management::Odr {
            return err(
                0,
                "odr needs a single destination; use odd or lsa with multicast",
            );
        }
        if self.mode == Mode::Elr && !matches!(self.management, Management::None | Management::Lsa)
        {
            return err(0, "elr supports only management none or lsa");
        }
        for f in &self.flows {
            if f.dsts.is_empty() {
                return err(0, "flow needs at least one destination");
            }
            if (self.mode.is_multicast() || self.mode == Mode::NodeDemo) && f.dsts.len() > 8 {
                return err(0, "multicast destination set is limited to 8");
            }
            for &(o, s) in f.dsts.iter().chain(std::iter::once(&f.src)) {
                if o >= self.orbits || s >= self.sats {
                    return err(0, format!("satellite ({o},{s}) outside the grid"));
                }
            }
            if f.dsts.contains(&f.src) {
                return err(0, "flow source cannot be one of its destinations");
            }
        }
        Ok(())
    }

    /// Canonical serialization; `parse` of the result reproduces the value.
    pub fn to_config_string(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "[constellation]");
        let _ = writeln!(s, "orbits = {}", self.orbits);
        let _ = writeln!(s, "sats = {}", self.sats);
        let _ = writeln!(s, "altitude_km = {}", self.altitude_km);
        let _ = writeln!(s, "seam = {}", self.seam);
        let _ = writeln!(s, "orbital_motion = {}", self.orbital_motion);
        let _ = writeln!(s, "\n[bf]");
        match self.bf_m {
            BfLength::Optimal => {
                let _ = writeln!(s, "m = optimal");
            }
            BfLength::Fixed(m) => {
                let _ = writeln!(s, "m = {m}");
            }
        }
        let _ = writeln!(s, "k = {}", self.bf_k);
        if self.m_eq_explicit {
            let _ = writeln!(s, "m_eq = {}", self.m_eq);
        }
        let _ = writeln!(s, "\n[params]");
        let _ = writeln!(s, "payload_bits = {}", self.payload_bits);
        let _ = writeln!(s, "bandwidth_bps = {}", self.bandwidth_bps);
        let _ = writeln!(s, "tau_us = {}", self.tau_s * 1.0e6);
        let _ = writeln!(s, "ttl = {}", self.ttl);
        let _ = writeln!(s, "queue_capacity = {}", self.queue_capacity);
        let _ = writeln!(s, "\n[failure]");
        let _ = writeln!(s, "management = {}", self.management.tag());
        if !self.down_links.is_empty() {
            let ids: Vec<String> = self.down_links.iter().map(u32::to_string).collect();
            let _ = writeln!(s, "down_links = {}", ids.join(", "));
        }
        let _ = writeln!(s, "rate = {}", self.failure_rate);
        let _ = writeln!(s, "mttr_s = {}", self.mttr_s);
        let _ = writeln!(s, "hello_interval_s = {}", self.hello_interval_s);
        let _ = writeln!(s, "odd_fallback = {}", self.odd_fallback);
        let _ = writeln!(s, "odr_replan = {}", self.odr_replan);
        let _ = writeln!(s, "\n[sim]");
        let _ = writeln!(s, "horizon_s = {}", self.horizon_s);
        let _ = writeln!(s, "mode = {}", self.mode.tag());
        let _ = writeln!(s, "seeds = {}..{}", self.seeds.0, self.seeds.1);
        for f in &self.flows {
            let _ = writeln!(s, "\n[flow]");
            let _ = writeln!(s, "src = {},{}", f.src.0, f.src.1);
            let dsts: Vec<String> = f.dsts.iter().map(|d| format!("{},{}", d.0, d.1)).collect();
            let _ = writeln!(s, "dst = {}", dsts.join(" ; "));
            let _ = writeln!(s, "rate_pps = {}", f.rate_pps);
            let _ = writeln!(
                s,
                "pattern = {}",
                match f.pattern {
                    Pattern::Cbr => "cbr",
                    Pattern::Poisson => "poisson",
                }
            );
            let _ = writeln!(s, "start_s = {}", f.start_s);
            if f.duration_s.is_finite() {
                let _ = writeln!(s, "duration_s = {}", f.duration_s);
            }
        }
        s
    }

    /// FNV-1a over the canonical serialization; goes into every CSV row.
    pub fn hash(&self) -> String {
        let mut h = 0xcbf29ce484222325u64;
        for b in self.to_config_string().bytes() {
            h = (h ^ b as u64).wrapping_mul(0x100000001b3);
        }
        format!("{h:016x}")
    }

    /// Applies a `section.key=value` override (CLI `--set`).
    pub fn apply_override(&mut self, spec: &str) -> Result<(), ConfigError> {
        let (path, value) = spec.split_once('=').ok_or(ConfigError {
            line: 0,
            msg: format!("override `{spec}` must be `section.key=value`"),
        })?;
        let (section, key) = path.trim().split_once('.').ok_or(ConfigError {
            line: 0,
            msg: format!("override `{spec}` must be `section.key=value`"),
        })?;
        if section == "flow" {
            return err(0, "flow overrides are not supported; edit the config");
        }
        let mut none = None;
        self.apply_key(section, key, value.trim(), 0, &mut none)?;
        self.validate()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const SAMPLE: &str = "\
# sample experiment
[constellation]
orbits = 6
sats = 11
altitude_km = 780
seam = false

[bf]
m = optimal
k = 5

[params]
payload_bits = 8192
bandwidth_bps = 10000000
tau_us = 10
ttl = 64
queue_capacity = 1000

[failure]
management = none
rate = 0

[sim]
horizon_s = 2
mode = unicast-optimal
seeds = 1..20

[flow]
src = 0,0
dst = 1,2
rate_pps = 100
pattern = cbr
start_s = 0
duration_s = 1.5
";

    #[test]
    fn parses_sample() {
        let scn = Scenario::parse(SAMPLE).unwrap();
        assert_eq!(scn.mode, Mode::UnicastOptimal);
        assert_eq!(scn.seeds, (1, 20));
        assert_eq!(scn.flows.len(), 1);
        assert_eq!(scn.flows[0].dsts, vec![(1, 2)]);
    }

    #[test]
    fn round_trips_field_for_field() {
        let mut scn = Scenario::parse(SAMPLE).unwrap();
        scn.management = Management::Odr;
        scn.down_links = vec![11, 59];
        let text = scn.to_config_string();
        let again = Scenario::parse(&text).unwrap();
        assert_eq!(scn, again);
        assert_eq!(scn.hash(), again.hash());
        let bad = SAMPLE.replace("management = none", "management = none\ndown_links = 999");
        assert!(Scenario::parse(&bad).unwrap_err().msg.contains("999"));
    }

    #[test]
    fn errors_carry_line_numbers() {
        let bad = SAMPLE.replace("rate_pps = 100", "rate_pps = fast");
        let e = Scenario::parse(&bad).unwrap_err();
        assert!(e.msg.contains("rate_pps"));
        assert!(e.line > 0, "{e}");
        let bad = SAMPLE.replace("mode = unicast-optimal", "mode = teleport");
        assert!(Scenario::parse(&bad).unwrap_err().msg.contains("teleport"));
    }

    #[test]
    fn cross_field_validation() {
        // equivalent-path filter is an odd-only knob
        let bad = SAMPLE.replace("k = 5", "k = 5\nm_eq = 64");
        let e = Scenario::parse(&bad).unwrap_err();
        assert!(e.msg.contains("m_eq"), "{e}");
        // out-of-grid satellite
        let bad = SAMPLE.replace("dst = 1,2", "dst = 9,2");
        assert!(Scenario::parse(&bad).is_err());
        // multicast group size cap
        let dsts: Vec<String> = (1..=9).map(|i| format!("1,{i}")).collect();
        let bad = SAMPLE
            .replace("mode = unicast-optimal", "mode = multicast-spf")
            .replace("dst = 1,2", &format!("dst = {}", dsts.join(" ; ")));
        assert!(Scenario::parse(&bad)
            .unwrap_err()
            .msg
            .contains("limited to 8"));
    }

    #[test]
    fn overrides_apply() {
        let mut scn = Scenario::parse(SAMPLE).unwrap();
        scn.apply_override("bf.m=40").unwrap();
        assert_eq!(scn.bf_m, BfLength::Fixed(40));
        scn.apply_override("sim.mode=unicast-source").unwrap();
        assert_eq!(scn.mode, Mode::UnicastSource);
        assert!(scn.apply_override("bf.m").is_err());
    }

    #[test]
    fn seed_ranges() {
        assert_eq!(parse_seed_range("7"), Some((7, 7)));
        assert_eq!(parse_seed_range("1..500"), Some((1, 500)));
        assert_eq!(parse_seed_range("5..2"), None);
    }
}
