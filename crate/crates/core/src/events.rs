//! Acceleration records, threshold-triggered event windows and quiet windows.

use std::fs;
use std::io::{BufWriter, Read, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::simulate::ExcitationSignal;

/// Magic bytes opening a binary record file.
pub const BINARY_MAGIC: &[u8; 8] = b"PEHACC1\0";

#[derive(Debug, Clone, PartialEq)]
pub struct AccelerationRecord {
    /// [Hz]
    pub sample_rate: f64,
    pub channel: String,
    /// [m/s^2]
    pub samples: Vec<f64>,
    /// Time of the first sample [s].
    pub start_time: f64,
}

impl AccelerationRecord {
    pub fn new(channel: impl Into<String>, sample_rate: f64, samples: Vec<f64>) -> Result<Self> {
        if !(sample_rate > 0.0 && sample_rate.is_finite()) {
            return Err(Error::InvalidInput(format!("sample rate {sample_rate} must be positive")));
        }
        Ok(Self {
            sample_rate,
            channel: channel.into(),
            samples,
            start_time: 0.0,
        })
    }

    pub fn duration(&self) -> f64 {
        self.samples.len() as f64 / self.sample_rate
    }
}

/// Window extraction parameters, in seconds and m/s^2.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EventParams {
    pub threshold: f64,
    pub window: f64,
    pub peak_at: f64,
    pub min_separation: f64,
}

impl Default for EventParams {
    fn default() -> Self {
        Self {
            threshold: 0.15,
            window: 30.0,
            peak_at: 10.0,
            min_separation: 30.0,
        }
    }
}

impl EventParams {
    fn validate(&self) -> Result<()> {
        if !(self.threshold > 0.0) {
            return Err(Error::InvalidInput(format!("threshold {} must be positive", self.threshold)));
        }
        if !(self.peak_at > 0.0 && self.window > self.peak_at) {
            return Err(Error::InvalidInput(format!(
                "need window > peak offset > 0, got {} and {}",
                self.window, self.peak_at
            )));
        }
        if !(self.min_separation >= 0.0) {
            return Err(Error::InvalidInput("min separation must be non-negative".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Event {
    /// 1-based, in order of detection.
    pub id: usize,
    pub source: String,
    pub sample_rate: f64,
    pub samples: Vec<f64>,
    /// Index of the peak inside the window.
    pub peak_index: usize,
    /// Signed acceleration at the peak [m/s^2].
    pub peak_value: f64,
    /// Index of the first window sample in the source record.
    pub start_index: usize,
}

impl Event {
    pub fn excitation(&self) -> ExcitationSignal {
        ExcitationSignal {
            sample_rate: self.sample_rate,
            samples: self.samples.clone(),
        }
    }

    /// Window start relative to the source record start [s].
    pub fn offset(&self) -> f64 {
        self.start_index as f64 / self.sample_rate
    }
}

/// Metadata written next to each event's samples.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EventMeta {
    pub id: usize,
    pub peak_value: f64,
    pub source: String,
    pub offset: f64,
    pub sample_rate: f64,
    pub peak_index: usize,
    pub samples: usize,
}

fn samples_in(seconds: f64, rate: f64) -> usize {
    (seconds * rate).round() as usize
}

/// Threshold-triggered, peak-aligned windows. Crossings closer than the
/// minimum separation are one event, represented by its largest `|a|`.
/// Windows that would run past either end of the record are dropped.
pub fn extract_events(record: &AccelerationRecord, params: &EventParams) -> Result<Vec<Event>> {
    params.validate()?;
    if record.samples.is_empty() {
        return Err(Error::EmptyRecord(format!("record '{}' has no samples", record.channel)));
    }
    let rate = record.sample_rate;
    let a = &record.samples;
    let sep = samples_in(params.min_separation, rate);
    let n_win = samples_in(params.window, rate);
    let n_peak = samples_in(params.peak_at, rate);

    let mut groups: Vec<(usize, usize)> = Vec::new();
    for (i, v) in a.iter().enumerate() {
        if v.abs() > params.threshold {
            match groups.last_mut() {
                Some(g) if i - g.1 <= sep => g.1 = i,
                _ => groups.push((i, i)),
            }
        }
    }

    let mut events = Vec::new();
    for (first, last) in groups {
        let mut peak = first;
        for i in first..=last {
            if a[i].abs() > a[peak].abs() {
                peak = i;
            }
        }
        if peak < n_peak || peak - n_peak + n_win > a.len() {
            log::info!("event at sample {peak} truncated by the record edge; skipped");
            continue;
        }
        let start = peak - n_peak;
        events.push(Event {
            id: events.len() + 1,
            source: record.channel.clone(),
            sample_rate: rate,
            samples: a[start..start + n_win].to_vec(),
            peak_index: n_peak,
            peak_value: a[peak],
            start_index: start,
        });
    }
    Ok(events)
}

#[derive(Debug, Clone, PartialEq)]
pub struct QuietWindow {
    pub start_index: usize,
    pub signal: ExcitationSignal,
}

#[derive(Debug, Clone, PartialEq)]
pub struct QuietWindows {
    pub windows: Vec<QuietWindow>,
    /// Fewer windows than requested exist.
    pub insufficient: bool,
}

/// Earliest-first, non-overlapping windows of `window` seconds with every
/// `|a|` below the threshold.
pub fn extract_quiet_windows(record: &AccelerationRecord, threshold: f64, window: f64, count: usize) -> Result<QuietWindows> {
    if !(window > 0.0) {
        return Err(Error::InvalidInput(format!("quiet window length {window} must be positive")));
    }
    let n = samples_in(window, record.sample_rate);
    let a = &record.samples;
    let mut windows = Vec::new();
    let mut start = 0usize;
    while windows.len() < count && start + n <= a.len() {
        match (start..start + n).rev().find(|&i| a[i].abs() >= threshold) {
            Some(bad) => start = bad + 1,
            None => {
                windows.push(QuietWindow {
                    start_index: start,
                    signal: ExcitationSignal {
                        sample_rate: record.sample_rate,
                        samples: a[start..start + n].to_vec(),
                    },
                });
                start += n;
            }
        }
    }
    let insufficient = windows.len() < count;
    if insufficient {
        log::warn!("InsufficientQuiet: found {} of {count} quiet windows", windows.len());
    }
    Ok(QuietWindows { windows, insufficient })
}

/// Reads a record from CSV (`t,a` or `a` with `rate`) or the binary format.
pub fn read_record(path: &Path, rate: Option<f64>) -> Result<AccelerationRecord> {
    let mut head = [0u8; 8];
    let is_binary = fs::File::open(path)?.read(&mut head)? == 8 && &head == BINARY_MAGIC;
    let channel = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "record".into());
    if is_binary {
        read_binary(path, channel)
    } else {
        read_csv(path, channel, rate)
    }
}

fn read_binary(path: &Path, channel: String) -> Result<AccelerationRecord> {
    let bytes = fs::read(path)?;
    if bytes.len() < 24 {
        return Err(Error::InvalidInput(format!("{}: truncated binary header", path.display())));
    }
    let rate = f64::from_le_bytes(bytes[8..16].try_into().unwrap());
    let count = u64::from_le_bytes(bytes[16..24].try_into().unwrap()) as usize;
    let body = &bytes[24..];
    if body.len() != count * 8 {
        return Err(Error::InvalidInput(format!(
            "{}: header declares {count} samples but body holds {} bytes",
            path.display(),
            body.len()
        )));
    }
    let samples = body.chunks_exact(8).map(|c| f64::from_le_bytes(c.try_into().unwrap())).collect();
    AccelerationRecord::new(channel, rate, samples)
}

fn read_csv(path: &Path, channel: String, rate: Option<f64>) -> Result<AccelerationRecord> {
    let mut rdr = csv::ReaderBuilder::new().comment(Some(b'#')).trim(csv::Trim::All).from_path(path)?;
    let headers = rdr.headers()?.clone();
    let col = |name: &str| headers.iter().position(|h| h == name);
    let a_col = col("a").ok_or_else(|| Error::InvalidInput(format!("{}: missing column 'a'", path.display())))?;
    let t_col = col("t");
    let mut times = Vec::new();
    let mut samples = Vec::new();
    for (line, rec) in rdr.records().enumerate() {
        let rec = rec?;
        let parse = |c: usize| -> Result<f64> {
            rec.get(c)
                .and_then(|s| s.parse::<f64>().ok())
                .ok_or_else(|| Error::InvalidInput(format!("{}: bad number on data row {}", path.display(), line + 1)))
        };
        samples.push(parse(a_col)?);
        if let Some(tc) = t_col {
            times.push(parse(tc)?);
        }
    }
    let (rate, start) = match (rate, times.len() >= 2) {
        (Some(r), _) => (r, times.first().copied().unwrap_or(0.0)),
        (None, true) => {
            let span = times[times.len() - 1] - times[0];
            let r = (times.len() - 1) as f64 / span;
            let dt = 1.0 / r;
            if times.windows(2).any(|w| ((w[1] - w[0]) - dt).abs() > 1e-6 * dt.max(1e-9) + 1e-9) {
                return Err(Error::InvalidInput(format!("{}: timestamps are not uniform", path.display())));
            }
            (r, times[0])
        }
        (None, false) => {
            return Err(Error::InvalidInput(format!(
                "{}: sample rate unknown (need a 't' column or an explicit rate)",
                path.display()
            )))
        }
    };
    let mut rec = AccelerationRecord::new(channel, rate, samples)?;
    rec.start_time = start;
    Ok(rec)
}

pub fn write_binary_record(path: &Path, record: &AccelerationRecord) -> Result<()> {
    let mut w = BufWriter::new(fs::File::create(path)?);
    w.write_all(BINARY_MAGIC)?;
    w.write_all(&record.sample_rate.to_le_bytes())?;
    w.write_all(&(record.samples.len() as u64).to_le_bytes())?;
    for v in &record.samples {
        w.write_all(&v.to_le_bytes())?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_csv_record(path: &Path, record: &AccelerationRecord) -> Result<()> {
    let mut w = BufWriter::new(fs::File::create(path)?);
    writeln!(w, "t,a")?;
    for (k, v) in record.samples.iter().enumerate() {
        writeln!(w, "{},{}", record.start_time + k as f64 / record.sample_rate, v)?;
    }
    w.flush()?;
    Ok(())
}

fn event_stem(id: usize) -> String {
    format!("event_{id:05}")
}

/// Writes `event_NNNNN.csv` (`t,a`, time from window start) and `event_NNNNN.json`.
pub fn write_event(dir: &Path, event: &Event) -> Result<(PathBuf, PathBuf)> {
    fs::create_dir_all(dir)?;
    let stem = event_stem(event.id);
    let csv_path = dir.join(format!("{stem}.csv"));
    let json_path = dir.join(format!("{stem}.json"));
    let mut w = BufWriter::new(fs::File::create(&csv_path)?);
    writeln!(w, "t,a")?;
    for (k, v) in event.samples.iter().enumerate() {
        writeln!(w, "{},{}", k as f64 / event.sample_rate, v)?;
    }
    w.flush()?;
    let meta = EventMeta {
        id: event.id,
        peak_value: event.peak_value,
        source: event.source.clone(),
        offset: event.offset(),
        sample_rate: event.sample_rate,
        peak_index: event.peak_index,
        samples: event.samples.len(),
    };
    fs::write(&json_path, serde_json::to_string_pretty(&meta)? + "\n")?;
    Ok((csv_path, json_path))
}

/// Reads every `event_*.json` / `.csv` pair in `dir`, ordered by id.
pub fn read_events(dir: &Path) -> Result<Vec<Event>> {
    let mut metas = Vec::new();
    for entry in fs::read_dir(dir)? {
        let p = entry?.path();
        let is_meta = p.extension().is_some_and(|e| e == "json")
            && p.file_name().is_some_and(|n| n.to_string_lossy().starts_with("event_"));
        if is_meta {
            let meta: EventMeta = serde_json::from_str(&fs::read_to_string(&p)?)?;
            metas.push(meta);
        }
    }
    metas.sort_by_key(|m| m.id);
    let mut events = Vec::with_capacity(metas.len());
    for m in metas {
        let rec = read_csv(&dir.join(format!("{}.csv", event_stem(m.id))), m.source.clone(), Some(m.sample_rate))?;
        events.push(Event {
            id: m.id,
            source: m.source,
            sample_rate: m.sample_rate,
            samples: rec.samples,
            peak_index: m.peak_index,
            peak_value: m.peak_value,
            start_index: (m.offset * m.sample_rate).round() as usize,
        });
    }
    Ok(events)
}
