#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "support.hpp"

using namespace ddtune;

TEST(SegmentKind, CodesAndNames) {
  EXPECT_EQ(kAllSegmentKinds.size(), 4u);
  EXPECT_EQ(to_code(SegmentKind::fid), 0);
  EXPECT_EQ(to_code(SegmentKind::hahn), 1);
  EXPECT_EQ(to_code(SegmentKind::cpmg), 2);
  EXPECT_EQ(to_code(SegmentKind::udd), 3);
  for (auto k : kAllSegmentKinds) {
    EXPECT_EQ(kind_from_code(to_code(k)), k);
    EXPECT_EQ(parse_segment_kind(to_string(k)), k);
  }
  EXPECT_EQ(to_string(SegmentKind::cpmg), "CPMG");
  EXPECT_THROW(kind_from_code(4), std::exception);
  EXPECT_THROW(kind_from_code(-1), std::exception);
  EXPECT_THROW(parse_segment_kind("XY4"), std::exception);
}

TEST(PulseTimes, Fid) { EXPECT_TRUE(pulse_times(make_segment(SegmentKind::fid, 0, 4)).empty()); }

TEST(PulseTimes, Hahn) {
  const auto t = pulse_times(make_segment(SegmentKind::hahn, 0, 4));
  ASSERT_EQ(t.size(), 1u);
  EXPECT_DOUBLE_EQ(t[0], 2.0);
}

TEST(PulseTimes, Cpmg) {
  const auto t = pulse_times(make_segment(SegmentKind::cpmg, 0, 4));
  const std::vector<double> expected{0.5, 1.5, 2.5, 3.5};
  ASSERT_EQ(t.size(), 4u);
  for (std::size_t j = 0; j < 4; ++j) EXPECT_DOUBLE_EQ(t[j], expected[j]);
}

TEST(PulseTimes, Udd) {
  const auto t = pulse_times(make_segment(SegmentKind::udd, 0, 4));
  ASSERT_EQ(t.size(), 4u);
  const std::vector<double> approx{0.382, 1.382, 2.618, 3.618};
  for (std::size_t j = 0; j < 4; ++j) {
    const double s = std::sin((j + 1) * std::numbers::pi / 10.0);
    EXPECT_NEAR(t[j], 4.0 * s * s, 1e-15);
    EXPECT_NEAR(t[j], approx[j], 1e-3);
  }
}

TEST(PulseTimes, OffsetSegmentShifts) {
  const auto base = pulse_times(make_segment(SegmentKind::udd, 0, 4));
  const auto shifted = pulse_times(make_segment(SegmentKind::udd, 8, 12));
  for (std::size_t j = 0; j < base.size(); ++j) EXPECT_NEAR(shifted[j], base[j] + 8.0, 1e-12);
}

TEST(Segment, RejectsBadInput) {
  EXPECT_THROW(make_segment(SegmentKind::fid, 4, 4), DomainError);
  EXPECT_THROW(make_segment(SegmentKind::cpmg, 0, 4, 0), DomainError);
}

TEST(Parity, PerKind) {
  EXPECT_EQ(segment_parity(make_segment(SegmentKind::fid, 0, 4)), 1);
  EXPECT_EQ(segment_parity(make_segment(SegmentKind::hahn, 0, 4)), -1);
  EXPECT_EQ(segment_parity(make_segment(SegmentKind::cpmg, 0, 4)), 1);
  EXPECT_EQ(segment_parity(make_segment(SegmentKind::udd, 0, 4)), 1);
  EXPECT_EQ(segment_parity(make_segment(SegmentKind::cpmg, 0, 4, 3)), -1);
}

TEST(Modulation, AllFid) {
  const auto seq = DdSequence::uniform(SegmentKind::fid, 3);
  for (double t : {0.0, 1.0, 5.5, 12.0}) EXPECT_EQ(seq.modulation_value(t), 1);
}

TEST(Modulation, Hahn) {
  const DdSequence seq({SegmentKind::hahn});
  EXPECT_EQ(seq.modulation_value(1.0), 1);
  EXPECT_EQ(seq.modulation_value(3.0), -1);
  EXPECT_EQ(seq.modulation_value(2.0), -1);  // pulse at t has already flipped
}

TEST(Modulation, OddPulseCountCarriesIntoNextSegment) {
  const DdSequence seq({SegmentKind::hahn, SegmentKind::fid});
  EXPECT_EQ(seq.modulation_value(5.0), -1);
  EXPECT_EQ(seq.entry_parity(1), -1);
  EXPECT_EQ(seq.exit_parity(), -1);
}

TEST(Modulation, OutsideIntervalIsDomainError) {
  const DdSequence seq({SegmentKind::cpmg});
  EXPECT_THROW(seq.modulation_value(-0.1), DomainError);
  EXPECT_THROW(seq.modulation_value(4.1), DomainError);
}

TEST(DdSequence, Layout) {
  const DdSequence seq({SegmentKind::udd, SegmentKind::cpmg, SegmentKind::hahn});
  EXPECT_EQ(seq.size(), 3u);
  EXPECT_DOUBLE_EQ(seq.total_time(), 12.0);
  EXPECT_EQ(seq.total_pulses(), 9);
  EXPECT_DOUBLE_EQ(seq.segments()[2].t_start, 8.0);
  EXPECT_DOUBLE_EQ(seq.segments()[2].t_end, 12.0);
  EXPECT_EQ(seq.to_string(), "UDD|CPMG|Hahn");
  EXPECT_THROW(DdSequence({SegmentKind::fid}, 0.0), DomainError);
}

TEST(DdSequence, SegmentsForTime) {
  EXPECT_EQ(segments_for_time(200.0, 4.0), 50u);
  EXPECT_EQ(segments_for_time(4.0, 4.0), 1u);
  EXPECT_THROW(segments_for_time(10.0, 4.0), ConfigError);
  EXPECT_THROW(segments_for_time(0.0, 4.0), ConfigError);
}

// Properties

TEST(SequenceProperty, SignChangesEqualPulseCount) {
  testing_support::SequenceGen gen(11);
  for (int trial = 0; trial < 100; ++trial) {
    const auto seq = gen.sequence(12);
    std::vector<double> pulses;
    for (const auto& s : seq.segments())
      for (double p : pulse_times(s)) pulses.push_back(p);
    // Sample every piece between consecutive pulses.
    std::vector<double> breaks{0.0};
    breaks.insert(breaks.end(), pulses.begin(), pulses.end());
    breaks.push_back(seq.total_time());
    int changes = 0;
    int prev = seq.modulation_value(0.5 * (breaks[0] + breaks[1]));
    for (std::size_t i = 1; i + 1 < breaks.size(); ++i) {
      const int v = seq.modulation_value(0.5 * (breaks[i] + breaks[i + 1]));
      if (v != prev) ++changes;
      prev = v;
    }
    EXPECT_EQ(changes, seq.total_pulses());
    EXPECT_EQ(static_cast<int>(pulses.size()), seq.total_pulses());
  }
}

TEST(SequenceProperty, EntryParityRecurrence) {
  testing_support::SequenceGen gen(12);
  for (int trial = 0; trial < 200; ++trial) {
    const auto seq = gen.sequence(15);
    EXPECT_EQ(seq.entry_parity(0), 1);
    int pulses_before = 0;
    for (std::size_t k = 0; k < seq.size(); ++k) {
      EXPECT_EQ(seq.entry_parity(k), pulses_before % 2 == 0 ? 1 : -1);
      if (k + 1 < seq.size()) {
        EXPECT_EQ(seq.entry_parity(k + 1), seq.entry_parity(k) * segment_parity(seq.segments()[k]));
      }
      pulses_before += seq.segments()[k].n_pulses;
    }
    // y just before T matches the exit parity.
    EXPECT_EQ(seq.modulation_value(seq.total_time() - 1e-9), seq.exit_parity());
  }
}

TEST(SequenceProperty, PulseTimesInteriorIncreasingAndUddSymmetric) {
  testing_support::SequenceGen gen(13);
  for (int n = 1; n <= 12; ++n) {
    for (auto kind : kAllSegmentKinds) {
      const double t0 = gen.uniform(0.0, 100.0);
      const double dt = gen.uniform(0.5, 10.0);
      const auto seg = make_segment(kind, t0, t0 + dt, n);
      const auto t = pulse_times(seg);
      ASSERT_EQ(static_cast<int>(t.size()), seg.n_pulses);
      for (std::size_t j = 0; j < t.size(); ++j) {
        EXPECT_GT(t[j], seg.t_start);
        EXPECT_LT(t[j], seg.t_end);
        if (j > 0) {
          EXPECT_GT(t[j], t[j - 1]);
        }
      }
      if (kind == SegmentKind::udd) {
        const double mid = 0.5 * (seg.t_start + seg.t_end);
        for (std::size_t j = 0; j < t.size(); ++j) EXPECT_NEAR(t[j] + t[t.size() - 1 - j], 2.0 * mid, 1e-12);
      }
    }
  }
}
