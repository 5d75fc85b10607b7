use chrono::{DateTime, Datelike, Duration, Months, NaiveDate, TimeZone, Utc};
use serde::{Deserialize, Serialize};

use super::Dataset;

/// A half-open calendar interval `[start, end)` in UTC.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct TimeSlot {
    pub index: usize,
    pub start: DateTime<Utc>,
    pub end: DateTime<Utc>,
    /// The data stops before the slot's last second.
    pub partial: bool,
}

impl TimeSlot {
    pub fn contains(&self, t: DateTime<Utc>) -> bool {
        self.start <= t && t < self.end
    }
}

/// Partitions the dataset's time range into calendar-aligned slots of
/// `months` months, starting at the month of the first event.
///
/// A slot is partial when the last event lies before the slot's final second.
pub fn slice_into_slots(dataset: &Dataset, months: u32) -> Vec<TimeSlot> {
    match dataset.time_span() {
        Some((first, last)) => slice_span(first, last, months),
        None => Vec::new(),
    }
}

/// Slots covering `[month_start(first), last]`.
pub fn slice_span(first: DateTime<Utc>, last: DateTime<Utc>, months: u32) -> Vec<TimeSlot> {
    assert!(months > 0, "slot length must be at least one month");
    let mut start = month_start(first);
    let mut slots = Vec::new();
    while start <= last {
        let end = start + Months::new(months);
        slots.push(TimeSlot {
            index: slots.len(),
            start,
            end,
            partial: last < end - Duration::seconds(1),
        });
        start = end;
    }
    slots
}

/// Slots that take part in analysis (partial slots are dropped).
pub fn analyzed_slots(slots: &[TimeSlot], exclude_partial: bool) -> Vec<TimeSlot> {
    slots
        .iter()
        .filter(|s| !(exclude_partial && s.partial))
        .copied()
        .collect()
}

/// Position in `slots` of the slot containing `t`. `slots` must be contiguous.
pub fn slot_of(slots: &[TimeSlot], t: DateTime<Utc>) -> Option<usize> {
    let pos = slots.partition_point(|s| s.end <= t);
    slots.get(pos).filter(|s| s.contains(t)).map(|_| pos)
}

fn month_start(t: DateTime<Utc>) -> DateTime<Utc> {
    let day = NaiveDate::from_ymd_opt(t.year(), t.month(), 1).expect("valid month");
    Utc.from_utc_datetime(&day.and_hms_opt(0, 0, 0).expect("midnight"))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::fixtures::*;
    use crate::dataset::Dataset;

    fn utc(y: i32, m: u32, d: u32, hh: u32, mm: u32, ss: u32) -> DateTime<Utc> {
        Utc.with_ymd_and_hms(y, m, d, hh, mm, ss).unwrap()
    }

    #[test]
    fn sixty_seven_monthly_slots_last_partial() {
        let slots = slice_span(utc(2008, 1, 1, 0, 0, 0), utc(2013, 7, 6, 0, 0, 0), 1);
        assert_eq!(slots.len(), 67);
        assert!(slots.last().unwrap().partial);
        assert!(slots[..66].iter().all(|s| !s.partial));
        assert_eq!(analyzed_slots(&slots, true).len(), 66);
        assert_eq!(analyzed_slots(&slots, false).len(), 67);
    }

    #[test]
    fn exact_quarter_has_no_partial_slot() {
        let slots = slice_span(utc(2008, 1, 1, 0, 0, 0), utc(2008, 3, 31, 23, 59, 59), 1);
        assert_eq!(slots.len(), 3);
        assert!(slots.iter().all(|s| !s.partial));
        assert_eq!(slots[2].end, utc(2008, 4, 1, 0, 0, 0));
    }

    #[test]
    fn slots_are_contiguous_and_aligned() {
        let slots = slice_span(utc(2009, 11, 17, 5, 0, 0), utc(2010, 4, 2, 0, 0, 0), 2);
        assert_eq!(slots[0].start, utc(2009, 11, 1, 0, 0, 0));
        for pair in slots.windows(2) {
            assert_eq!(pair[0].end, pair[1].start);
        }
        assert_eq!(slots.len(), 3);
        assert!(slots[2].partial);
    }

    #[test]
    fn empty_dataset_has_no_slots() {
        let ds = Dataset::new("salon24.pl", vec![], vec![], vec![]).unwrap();
        assert!(slice_into_slots(&ds, 1).is_empty());
    }

    #[test]
    fn every_event_in_exactly_one_slot() {
        let ds = Dataset::new(
            "salon24.pl",
            vec![blogger("a")],
            vec![
                post("p1", "a", ts(2008, 1, 31), &[]),
                post("p2", "a", ts(2008, 3, 1), &[]),
            ],
            vec![comment("c1", "p1", "a", ts(2008, 2, 1))],
        )
        .unwrap();
        let slots = slice_into_slots(&ds, 1);
        assert_eq!(slots.len(), 3);
        for t in [ts(2008, 1, 31), ts(2008, 2, 1), ts(2008, 3, 1)] {
            assert_eq!(slots.iter().filter(|s| s.contains(t)).count(), 1);
            assert!(slot_of(&slots, t).is_some());
        }
        assert_eq!(slot_of(&slots, ts(2007, 1, 1)), None);
        assert_eq!(slot_of(&slots, ts(2008, 2, 1)), Some(1));
    }
}
