//! Sectioned scenario text format.
//!
//! A scenario file is a sequence of sections, each introduced by a `#` header
//! line and followed by rows of whitespace-separated numbers. Lines starting
//! with `%` are comments. Sections must appear in the canonical order below;
//! the `Line Capacity` and `Cyclic` sections are optional.

use std::collections::BTreeMap;
use std::fmt::{self, Write as _};

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Identifier of a surveillance point, `1..=n_points`. Points `1..=n_buses`
/// are the bus (substation) points.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct PointId(pub u32);

/// Identifier of a grid bus, `1..=n_buses`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct BusId(pub u32);

impl PointId {
    pub fn index(self) -> usize {
        self.0 as usize - 1
    }
}

impl BusId {
    pub fn index(self) -> usize {
        self.0 as usize - 1
    }
}

impl fmt::Display for PointId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl fmt::Display for BusId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LineSpec {
    pub from: BusId,
    pub to: BusId,
    /// Series reactance in p.u.
    pub reactance: f64,
}

/// The ordered point list of one transmission line, as it appeared in the file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinePoints {
    /// Zero-based index into [`ScenarioSpec::lines`].
    pub line: usize,
    pub points: Vec<PointId>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SegmentSpec {
    pub a: PointId,
    pub b: PointId,
    /// Fuel cost ratio for flying `a -> b`; `None` when the file omits it.
    pub ratio: Option<f64>,
}

impl SegmentSpec {
    pub fn ratio_or_default(&self) -> f64 {
        self.ratio.unwrap_or(1.0)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct UavSpec {
    pub init_point: PointId,
    pub init_fuel: u64,
    pub fuel_cap: u64,
    /// Fuel per level-flight step.
    pub ffuel: u64,
    /// Fuel per hover step.
    pub hfuel: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioSpec {
    pub n_buses: usize,
    pub n_lines: usize,
    pub n_points: usize,
    pub n_segments: usize,
    pub segment_len: u32,
    pub n_uavs: usize,
    pub horizon: usize,
    pub loads: BTreeMap<BusId, f64>,
    pub gens: BTreeMap<BusId, f64>,
    pub lines: Vec<LineSpec>,
    /// Explicit line capacities in MW keyed by zero-based line index.
    pub capacities: Option<BTreeMap<usize, f64>>,
    pub pi_distance: f64,
    pub line_points: Vec<LinePoints>,
    pub segments: Vec<SegmentSpec>,
    pub uavs: Vec<UavSpec>,
    pub tc: usize,
    pub k: usize,
    pub tr: usize,
    pub cs_pct: u32,
    pub rcs_pct: u32,
    pub base_point: PointId,
    pub cyclic: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum IngestError {
    #[error("line {line}: malformed section: {msg}")]
    MalformedSection { line: usize, msg: String },
    #[error("line {line}: dangling reference: {msg}")]
    DanglingReference { line: usize, msg: String },
    #[error("line {line}: invariant violation: {msg}")]
    InvariantViolation { line: usize, msg: String },
}

impl IngestError {
    pub fn line(&self) -> usize {
        match self {
            IngestError::MalformedSection { line, .. }
            | IngestError::DanglingReference { line, .. }
            | IngestError::InvariantViolation { line, .. } => *line,
        }
    }
}

fn malformed(line: usize, msg: impl Into<String>) -> IngestError {
    IngestError::MalformedSection { line, msg: msg.into() }
}

fn dangling(line: usize, msg: impl Into<String>) -> IngestError {
    IngestError::DanglingReference { line, msg: msg.into() }
}

fn violation(line: usize, msg: impl Into<String>) -> IngestError {
    IngestError::InvariantViolation { line, msg: msg.into() }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
enum SectionKind {
    Header,
    Loads,
    Gens,
    Lines,
    Capacities,
    Distance,
    LinePointSets,
    Segments,
    Uavs,
    Freshness,
    Resilience,
    Scores,
    BasePoint,
    Cyclic,
}

impl SectionKind {
    const ORDER: [SectionKind; 14] = [
        SectionKind::Header,
        SectionKind::Loads,
        SectionKind::Gens,
        SectionKind::Lines,
        SectionKind::Capacities,
        SectionKind::Distance,
        SectionKind::LinePointSets,
        SectionKind::Segments,
        SectionKind::Uavs,
        SectionKind::Freshness,
        SectionKind::Resilience,
        SectionKind::Scores,
        SectionKind::BasePoint,
        SectionKind::Cyclic,
    ];

    fn optional(self) -> bool {
        matches!(self, SectionKind::Capacities | SectionKind::Cyclic)
    }

    fn classify(header: &str) -> Option<SectionKind> {
        let h = header.trim_start_matches('#').trim().to_ascii_lowercase();
        let table = [
            ("number of buses", SectionKind::Header),
            ("load", SectionKind::Loads),
            ("generation", SectionKind::Gens),
            ("transmission line", SectionKind::Lines),
            ("line capacit", SectionKind::Capacities),
            ("maximum criticality", SectionKind::Distance),
            ("line point", SectionKind::LinePointSets),
            ("segment", SectionKind::Segments),
            ("uav", SectionKind::Uavs),
            ("threshold time", SectionKind::Freshness),
            ("resilien", SectionKind::Resilience),
            ("minimum criticality", SectionKind::Scores),
            ("base point", SectionKind::BasePoint),
            ("cyclic", SectionKind::Cyclic),
        ];
        table.iter().find(|(prefix, _)| h.starts_with(prefix)).map(|&(_, kind)| kind)
    }

    fn canonical_header(self) -> &'static str {
        match self {
            SectionKind::Header => "# Number of Buses, Lines, Points, and Segments, Segment Length in Time Units, Number of UAVs, Surveillance Period",
            SectionKind::Loads => "# Load Information (Bus No, Load)",
            SectionKind::Gens => "# Generation Information (Bus No, Generation)",
            SectionKind::Lines => "# Transmission Line Info (From-Bus, To-Bus, Reactance)",
            SectionKind::Capacities => "# Line Capacity (Line No, Capacity)",
            SectionKind::Distance => "# Maximum Criticality (PI Score) Distance",
            SectionKind::LinePointSets => "# Line Point Set",
            SectionKind::Segments => "# Segments/Links (End Points, Fuel Cost Ratio)",
            SectionKind::Uavs => "# UAV Properties (Initial Point, Stored Fuel, Fuel Capacity (Watt), Mileage (Fuel/Step), Hovering Cost (Fuel/Step))",
            SectionKind::Freshness => "# Threshold Time between Two Consecutive Visits to a Point",
            SectionKind::Resilience => "# Resiliency Requirements (k, Threshold Time)",
            SectionKind::Scores => "# Minimum Criticality Scores under Continuous Surveillance and Resilient Surveillance",
            SectionKind::BasePoint => "# Base Point",
            SectionKind::Cyclic => "# Cyclic",
        }
    }
}

struct Row<'a> {
    line: usize,
    tokens: Vec<&'a str>,
}

impl Row<'_> {
    fn expect_arity(&self, range: std::ops::RangeInclusive<usize>, what: &str) -> Result<(), IngestError> {
        if range.contains(&self.tokens.len()) {
            Ok(())
        } else {
            Err(malformed(self.line, format!("{what}: expected {range:?} fields, found {}", self.tokens.len())))
        }
    }

    fn uint(&self, i: usize) -> Result<u64, IngestError> {
        self.tokens[i]
            .parse::<u64>()
            .map_err(|_| malformed(self.line, format!("expected a non-negative integer, found `{}`", self.tokens[i])))
    }

    fn real(&self, i: usize) -> Result<f64, IngestError> {
        match self.tokens[i].parse::<f64>() {
            Ok(v) if v.is_finite() => Ok(v),
            _ => Err(malformed(self.line, format!("expected a number, found `{}`", self.tokens[i]))),
        }
    }
}

struct Section<'a> {
    kind: SectionKind,
    header_line: usize,
    rows: Vec<Row<'a>>,
}

impl Section<'_> {
    fn single_row(&self, arity: usize) -> Result<&Row<'_>, IngestError> {
        match self.rows.as_slice() {
            [row] => {
                row.expect_arity(arity..=arity, "row")?;
                Ok(row)
            }
            _ => {
                Err(malformed(self.header_line, format!("section expects exactly one row, found {}", self.rows.len())))
            }
        }
    }
}

fn split_sections(text: &str) -> Result<Vec<Section<'_>>, IngestError> {
    let mut sections: Vec<Section> = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let trimmed = raw.trim();
        if trimmed.is_empty() || trimmed.starts_with('%') {
            continue;
        }
        if trimmed.starts_with('#') {
            let kind = SectionKind::classify(trimmed)
                .ok_or_else(|| malformed(line, format!("unknown section `{trimmed}`")))?;
            sections.push(Section { kind, header_line: line, rows: Vec::new() });
            continue;
        }
        let section = sections.last_mut().ok_or_else(|| malformed(line, "data before the first section header"))?;
        // a trailing '%' on a data row is tolerated as a comment marker
        let data = trimmed.split('%').next().unwrap_or("");
        section.rows.push(Row { line, tokens: data.split_whitespace().collect() });
    }
    Ok(sections)
}

/// Parses a scenario file into a validated [`ScenarioSpec`].
pub fn parse_scenario(text: &str) -> Result<ScenarioSpec, IngestError> {
    let sections = split_sections(text)?;
    let eof_line = text.lines().count() + 1;

    let mut by_kind: BTreeMap<SectionKind, &Section> = BTreeMap::new();
    let mut cursor = 0;
    for section in &sections {
        let pos = SectionKind::ORDER.iter().position(|k| *k == section.kind).expect("every kind is in ORDER");
        if by_kind.contains_key(&section.kind) {
            return Err(malformed(section.header_line, "duplicate section"));
        }
        if pos < cursor {
            return Err(malformed(section.header_line, "section out of order"));
        }
        for skipped in &SectionKind::ORDER[cursor..pos] {
            if !skipped.optional() {
                return Err(malformed(
                    section.header_line,
                    format!("missing section `{}`", skipped.canonical_header()),
                ));
            }
        }
        cursor = pos + 1;
        by_kind.insert(section.kind, section);
    }
    for kind in &SectionKind::ORDER[cursor..] {
        if !kind.optional() {
            return Err(malformed(eof_line, format!("missing section `{}`", kind.canonical_header())));
        }
    }

    let header = by_kind[&SectionKind::Header].single_row(7)?;
    let n_buses = header.uint(0)? as usize;
    let n_lines = header.uint(1)? as usize;
    let n_points = header.uint(2)? as usize;
    let n_segments = header.uint(3)? as usize;
    let segment_len = header.uint(4)? as u32;
    let n_uavs = header.uint(5)? as usize;
    let horizon = header.uint(6)? as usize;
    if n_buses == 0 || n_points < n_buses {
        return Err(violation(header.line, "need at least one bus and n_points >= n_buses"));
    }
    if segment_len != 1 {
        return Err(violation(header.line, "only unit segment length is supported"));
    }
    if horizon == 0 {
        return Err(violation(header.line, "surveillance period must be positive"));
    }

    let bus = |row: &Row, i: usize| -> Result<BusId, IngestError> {
        let b = row.uint(i)?;
        if b == 0 || b as usize > n_buses {
            return Err(dangling(row.line, format!("bus {b} outside 1..={n_buses}")));
        }
        Ok(BusId(b as u32))
    };
    let point = |row: &Row, i: usize| -> Result<PointId, IngestError> {
        let p = row.uint(i)?;
        if p == 0 || p as usize > n_points {
            return Err(dangling(row.line, format!("point {p} outside 1..={n_points}")));
        }
        Ok(PointId(p as u32))
    };

    let injections = |kind: SectionKind| -> Result<BTreeMap<BusId, f64>, IngestError> {
        let mut out = BTreeMap::new();
        for row in &by_kind[&kind].rows {
            row.expect_arity(2..=2, "bus row")?;
            let b = bus(row, 0)?;
            let mw = row.real(1)?;
            if mw < 0.0 {
                return Err(violation(row.line, "injection must be non-negative"));
            }
            if out.insert(b, mw).is_some() {
                return Err(violation(row.line, format!("bus {b} listed twice")));
            }
        }
        Ok(out)
    };
    let loads = injections(SectionKind::Loads)?;
    let gens = injections(SectionKind::Gens)?;

    let line_section = by_kind[&SectionKind::Lines];
    if line_section.rows.len() != n_lines {
        return Err(malformed(
            line_section.header_line,
            format!("expected {n_lines} transmission lines, found {}", line_section.rows.len()),
        ));
    }
    let mut lines = Vec::with_capacity(n_lines);
    for row in &line_section.rows {
        row.expect_arity(3..=3, "line row")?;
        let from = bus(row, 0)?;
        let to = bus(row, 1)?;
        let reactance = row.real(2)?;
        if from == to {
            return Err(violation(row.line, "line endpoints must differ"));
        }
        if reactance <= 0.0 {
            return Err(violation(row.line, "reactance must be positive"));
        }
        lines.push(LineSpec { from, to, reactance });
    }

    let capacities = match by_kind.get(&SectionKind::Capacities) {
        None => None,
        Some(section) => {
            let mut caps = BTreeMap::new();
            for row in &section.rows {
                row.expect_arity(2..=2, "capacity row")?;
                let l = row.uint(0)? as usize;
                if l == 0 || l > n_lines {
                    return Err(dangling(row.line, format!("line {l} outside 1..={n_lines}")));
                }
                let cap = row.real(1)?;
                if cap <= 0.0 {
                    return Err(violation(row.line, "capacity must be positive"));
                }
                if caps.insert(l - 1, cap).is_some() {
                    return Err(violation(row.line, format!("capacity for line {l} listed twice")));
                }
            }
            Some(caps)
        }
    };

    let pi_distance = by_kind[&SectionKind::Distance].single_row(1)?.real(0)?;
    if pi_distance < 0.0 {
        return Err(violation(by_kind[&SectionKind::Distance].header_line, "criticality distance must be >= 0"));
    }

    let lp_section = by_kind[&SectionKind::LinePointSets];
    if lp_section.rows.len() != n_lines {
        return Err(malformed(
            lp_section.header_line,
            format!("expected {n_lines} line point sets, found {}", lp_section.rows.len()),
        ));
    }
    let mut assigned = vec![false; n_lines];
    let mut line_points = Vec::with_capacity(n_lines);
    for row in &lp_section.rows {
        if row.tokens.len() < 2 {
            return Err(malformed(row.line, "a line point set needs at least its two bus points"));
        }
        let points = (0..row.tokens.len()).map(|i| point(row, i)).collect::<Result<Vec<_>, _>>()?;
        let first = points[0];
        let last = *points.last().unwrap();
        if first.0 as usize > n_buses || last.0 as usize > n_buses {
            return Err(violation(row.line, "a line point set must start and end at bus points"));
        }
        // match to the first unassigned line with these endpoints, either orientation
        let line = lines
            .iter()
            .enumerate()
            .position(|(i, l)| {
                !assigned[i] && ((l.from.0 == first.0 && l.to.0 == last.0) || (l.from.0 == last.0 && l.to.0 == first.0))
            })
            .ok_or_else(|| dangling(row.line, format!("no unassigned line joins buses {first} and {last}")))?;
        assigned[line] = true;
        line_points.push(LinePoints { line, points });
    }

    let seg_section = by_kind[&SectionKind::Segments];
    if seg_section.rows.len() != n_segments {
        return Err(malformed(
            seg_section.header_line,
            format!("expected {n_segments} segments, found {}", seg_section.rows.len()),
        ));
    }
    let mut segments = Vec::with_capacity(n_segments);
    for row in &seg_section.rows {
        row.expect_arity(2..=3, "segment row")?;
        let a = point(row, 0)?;
        let b = point(row, 1)?;
        let ratio = if row.tokens.len() == 3 { Some(row.real(2)?) } else { None };
        if ratio.is_some_and(|r| r <= 0.0) {
            return Err(violation(row.line, "cost ratio must be positive"));
        }
        segments.push(SegmentSpec { a, b, ratio });
    }

    let uav_section = by_kind[&SectionKind::Uavs];
    if uav_section.rows.len() != n_uavs {
        return Err(malformed(
            uav_section.header_line,
            format!("expected {n_uavs} UAVs, found {}", uav_section.rows.len()),
        ));
    }
    let mut uavs = Vec::with_capacity(n_uavs);
    for row in &uav_section.rows {
        row.expect_arity(5..=5, "UAV row")?;
        let uav = UavSpec {
            init_point: point(row, 0)?,
            init_fuel: row.uint(1)?,
            fuel_cap: row.uint(2)?,
            ffuel: row.uint(3)?,
            hfuel: row.uint(4)?,
        };
        if uav.init_fuel == 0 || uav.init_fuel > uav.fuel_cap {
            return Err(violation(row.line, "need 0 < initial fuel <= fuel capacity"));
        }
        if uav.ffuel == 0 || uav.hfuel == 0 {
            return Err(violation(row.line, "flight and hover costs must be positive"));
        }
        uavs.push(uav);
    }

    let fresh = by_kind[&SectionKind::Freshness].single_row(1)?;
    let tc = fresh.uint(0)? as usize;
    let res = by_kind[&SectionKind::Resilience].single_row(2)?;
    let k = res.uint(0)? as usize;
    let tr = res.uint(1)? as usize;
    let scores = by_kind[&SectionKind::Scores].single_row(2)?;
    let cs_pct = scores.uint(0)? as u32;
    let rcs_pct = scores.uint(1)? as u32;
    if tc == 0 || tc > horizon {
        return Err(violation(fresh.line, "need 1 <= TC <= surveillance period"));
    }
    if tr == 0 || tr > horizon {
        return Err(violation(res.line, "need 1 <= TR <= surveillance period"));
    }
    if rcs_pct > cs_pct || cs_pct > 100 {
        return Err(violation(scores.line, "need 0 <= RCS <= CS <= 100"));
    }

    let base_row = by_kind[&SectionKind::BasePoint].single_row(1)?;
    let base_point = point(base_row, 0)?;

    let cyclic = match by_kind.get(&SectionKind::Cyclic) {
        None => false,
        Some(section) => {
            let row = section.single_row(1)?;
            match row.tokens[0].to_ascii_lowercase().as_str() {
                "1" | "true" | "yes" => true,
                "0" | "false" | "no" => false,
                other => return Err(malformed(row.line, format!("expected a boolean flag, found `{other}`"))),
            }
        }
    };

    Ok(ScenarioSpec {
        n_buses,
        n_lines,
        n_points,
        n_segments,
        segment_len,
        n_uavs,
        horizon,
        loads,
        gens,
        lines,
        capacities,
        pi_distance,
        line_points,
        segments,
        uavs,
        tc,
        k,
        tr,
        cs_pct,
        rcs_pct,
        base_point,
        cyclic,
    })
}

/// Writes `spec` back in the sectioned format accepted by [`parse_scenario`].
pub fn serialize_scenario(spec: &ScenarioSpec) -> String {
    let header = |out: &mut String, kind: SectionKind| {
        out.push_str(kind.canonical_header());
        out.push('\n');
    };
    let mut out = String::new();
    header(&mut out, SectionKind::Header);
    let _ = writeln!(
        out,
        "{} {} {} {} {} {} {}",
        spec.n_buses, spec.n_lines, spec.n_points, spec.n_segments, spec.segment_len, spec.n_uavs, spec.horizon
    );
    header(&mut out, SectionKind::Loads);
    for (b, mw) in &spec.loads {
        let _ = writeln!(out, "{b} {mw:?}");
    }
    header(&mut out, SectionKind::Gens);
    for (b, mw) in &spec.gens {
        let _ = writeln!(out, "{b} {mw:?}");
    }
    header(&mut out, SectionKind::Lines);
    for l in &spec.lines {
        let _ = writeln!(out, "{} {} {:?}", l.from, l.to, l.reactance);
    }
    if let Some(caps) = &spec.capacities {
        header(&mut out, SectionKind::Capacities);
        for (l, cap) in caps {
            let _ = writeln!(out, "{} {cap:?}", l + 1);
        }
    }
    header(&mut out, SectionKind::Distance);
    let _ = writeln!(out, "{:?}", spec.pi_distance);
    header(&mut out, SectionKind::LinePointSets);
    for lp in &spec.line_points {
        let row: Vec<String> = lp.points.iter().map(|p| p.to_string()).collect();
        let _ = writeln!(out, "{}", row.join(" "));
    }
    header(&mut out, SectionKind::Segments);
    for s in &spec.segments {
        match s.ratio {
            Some(r) => {
                let _ = writeln!(out, "{} {} {r:?}", s.a, s.b);
            }
            None => {
                let _ = writeln!(out, "{} {}", s.a, s.b);
            }
        }
    }
    header(&mut out, SectionKind::Uavs);
    for u in &spec.uavs {
        let _ = writeln!(out, "{} {} {} {} {}", u.init_point, u.init_fuel, u.fuel_cap, u.ffuel, u.hfuel);
    }
    header(&mut out, SectionKind::Freshness);
    let _ = writeln!(out, "{}", spec.tc);
    header(&mut out, SectionKind::Resilience);
    let _ = writeln!(out, "{} {}", spec.k, spec.tr);
    header(&mut out, SectionKind::Scores);
    let _ = writeln!(out, "{} {}", spec.cs_pct, spec.rcs_pct);
    header(&mut out, SectionKind::BasePoint);
    let _ = writeln!(out, "{}", spec.base_point);
    if spec.cyclic {
        header(&mut out, SectionKind::Cyclic);
        out.push_str("1\n");
    }
    out
}

impl ScenarioSpec {
    /// Point list of the line with zero-based index `line`.
    pub fn points_of_line(&self, line: usize) -> &[PointId] {
        self.line_points.iter().find(|lp| lp.line == line).map(|lp| lp.points.as_slice()).unwrap_or(&[])
    }

    /// Net injection (generation minus load) per bus, indexed by `BusId::index`.
    pub fn net_injections(&self) -> Vec<f64> {
        let mut inj = vec![0.0; self.n_buses];
        for (b, mw) in &self.gens {
            inj[b.index()] += mw;
        }
        for (b, mw) in &self.loads {
            inj[b.index()] -= mw;
        }
        inj
    }

    /// Copy of the scenario restricted to the first `n` UAVs.
    pub fn with_fleet_prefix(&self, n: usize) -> ScenarioSpec {
        let mut out = self.clone();
        out.uavs.truncate(n);
        out.n_uavs = out.uavs.len();
        out
    }

    pub fn points(&self) -> impl Iterator<Item = PointId> {
        (1..=self.n_points as u32).map(PointId)
    }
}

#[cfg(test)]
pub(crate) mod tests {
    use super::*;

    pub(crate) const TINY: &str = "\
# Number of Buses, Lines, Points, and Segments, Segment Length in Time Units, Number of UAVs, Surveillance Period
2 1 3 2 1 1 6
# Load Information (Bus No, Load)
2 100.0
# Generation Information(Bus No, Generation)
1 100.0
# Transmission Line Info (From-Bus, To-Bus, Reactance)
1 2 0.5
# Maximum Criticality (PI Score) Distance
15
%
# Line Point Set
1 3 2
# Segments/Links (End Points, Fuel Cost Ratio)
1 3 0.95
3 2
# UAV Properties (Initial Point, Stored Fuel, Fuel Capacity (Watt), Mileage (Fuel/Step), Hovering Cost (Fuel/Step))
3 100 120 10 2
# Threshold Time between Two Consecutive Visits to a Point
3
# Resiliency Requirements (k, Threshold Time)
0 4
# Minimum Criticality Scores under Continuous Surveillance and Resilient Surveillance
50 0
# Base Point
1
";

    #[test]
    fn parses_tiny_file() {
        let spec = parse_scenario(TINY).unwrap();
        assert_eq!((spec.n_buses, spec.n_lines, spec.n_points, spec.n_segments), (2, 1, 3, 2));
        assert_eq!(spec.horizon, 6);
        assert_eq!(spec.segments[0].ratio, Some(0.95));
        assert_eq!(spec.segments[1].ratio, None);
        assert_eq!(spec.points_of_line(0), &[PointId(1), PointId(3), PointId(2)]);
        assert_eq!(spec.base_point, PointId(1));
        assert!(!spec.cyclic);
        assert_eq!(spec.net_injections(), vec![100.0, -100.0]);
    }

    #[test]
    fn empty_input_is_malformed() {
        assert!(matches!(parse_scenario(""), Err(IngestError::MalformedSection { .. })));
        assert!(matches!(parse_scenario("\n\n% nothing\n"), Err(IngestError::MalformedSection { .. })));
    }

    #[test]
    fn unknown_section_rejected_with_line() {
        let text = TINY.replace("# Base Point", "# Weather Forecast");
        let err = parse_scenario(&text).unwrap_err();
        assert!(matches!(err, IngestError::MalformedSection { .. }));
        assert_eq!(err.line(), 25);
    }

    #[test]
    fn wrong_arity_and_order() {
        let text = TINY.replace("1 2 0.5", "1 2");
        assert!(matches!(parse_scenario(&text), Err(IngestError::MalformedSection { line: 8, .. })));
        let swapped = TINY
            .replace("# Load Information (Bus No, Load)\n2 100.0\n", "")
            .replace("# Base Point\n1\n", "# Base Point\n1\n# Load Information\n2 100.0\n");
        assert!(matches!(parse_scenario(&swapped), Err(IngestError::MalformedSection { .. })));
    }

    #[test]
    fn dangling_and_invariants() {
        let text = TINY.replace("3 2\n#", "3 4\n#");
        assert!(matches!(parse_scenario(&text), Err(IngestError::DanglingReference { .. })));
        let text = TINY.replace("3 100 120 10 2", "3 130 120 10 2");
        assert!(matches!(parse_scenario(&text), Err(IngestError::InvariantViolation { .. })));
        let text = TINY.replace("50 0", "40 60");
        assert!(matches!(parse_scenario(&text), Err(IngestError::InvariantViolation { .. })));
        let text = TINY.replace("1 3 0.95", "1 3 -0.5");
        assert!(matches!(parse_scenario(&text), Err(IngestError::InvariantViolation { .. })));
        let text = TINY.replace("# Line Point Set\n1 3 2", "# Line Point Set\n3 1 2");
        assert!(matches!(parse_scenario(&text), Err(IngestError::InvariantViolation { .. })));
    }

    #[test]
    fn serialize_round_trip() {
        let mut spec = parse_scenario(TINY).unwrap();
        assert_eq!(parse_scenario(&serialize_scenario(&spec)).unwrap(), spec);
        spec.cyclic = true;
        spec.capacities = Some(BTreeMap::from([(0, 150.0)]));
        assert_eq!(parse_scenario(&serialize_scenario(&spec)).unwrap(), spec);
    }
}
