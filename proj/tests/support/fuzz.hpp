#pragma once

// Randomized manifest construction plus an independent validity predicate, so
// validator and extractor can be cross-checked without sharing logic.

#include <cstdint>
#include <string>

#include <pcbnet/manifest.hpp>
#include <pcbnet/rng.hpp>

namespace fuzz {

// Builds a structurally valid manifest: disjoint in-range events in ascending
// order, suspect appearance at or before the first crime. Zero-width PCB
// candidates (gap of zero between events) are produced on purpose, as is the
// scm_start == ccm_start edge.
inline pcbnet::AnnotationManifest make_valid_manifest(pcbnet::Rng& rng) {
  pcbnet::AnnotationManifest m;
  m.video_id = "fz_" + std::to_string(rng.below(100000));
  m.frame_count = 50 + rng.below(1950);
  m.fps = 10.0 + static_cast<double>(rng.below(50));
  const std::uint64_t fc = m.frame_count;
  std::uint64_t cursor = rng.below(fc / 4 + 1);
  const std::uint64_t want_events = rng.below(5);
  for (std::uint64_t e = 0; e < want_events; ++e) {
    if (cursor + 4 > fc) {
      break;
    }
    pcbnet::CrimeEvent ev;
    ev.ccm_start = cursor + (e == 0 ? rng.below(fc / 4 + 1) : rng.below(20));  // gap may be zero
    if (ev.ccm_start + 3 > fc) {
      break;
    }
    const std::uint64_t room = fc - ev.ccm_start;  // at least 3
    ev.scm_start = ev.ccm_start + rng.below(std::min<std::uint64_t>(room - 1, 40));
    ev.scm_end = ev.scm_start + 1 + rng.below(std::min<std::uint64_t>(fc - ev.scm_start, 30));
    ev.cl_end = ev.scm_end + rng.below(std::min<std::uint64_t>(fc - ev.scm_end + 1, 25));
    m.events.push_back(ev);
    cursor = ev.cl_end;
  }
  if (m.events.empty()) {
    m.suspect_first_appearance = rng.below(fc);
  } else {
    m.suspect_first_appearance = rng.below(m.events.front().ccm_start + 1);
  }
  return m;
}

// Independent validity check, written directly from the field constraints.
inline bool manifest_valid_brute(const pcbnet::AnnotationManifest& m) {
  if (m.frame_count == 0 || !(m.fps > 0.0) || !std::isfinite(m.fps)) {
    return false;
  }
  if (m.suspect_first_appearance >= m.frame_count) {
    return false;
  }
  std::uint64_t prev_end = 0;
  bool first = true;
  for (const auto& ev : m.events) {
    if (!(ev.ccm_start <= ev.scm_start && ev.scm_start < ev.scm_end && ev.scm_end <= ev.cl_end)) {
      return false;
    }
    if (ev.ccm_start >= m.frame_count || ev.scm_start >= m.frame_count ||
        ev.scm_end > m.frame_count || ev.cl_end > m.frame_count) {
      return false;
    }
    if (!first && ev.ccm_start < prev_end) {
      return false;
    }
    prev_end = ev.cl_end;
    first = false;
  }
  if (!m.events.empty() && m.suspect_first_appearance > m.events.front().ccm_start) {
    return false;
  }
  return true;
}

// Applies one random constraint-breaking mutation. Returns false when the
// manifest has no mutable surface for the chosen strategy (caller retries).
inline bool break_manifest(pcbnet::AnnotationManifest& m, pcbnet::Rng& rng) {
  switch (rng.below(6)) {
    case 0:
      m.frame_count = 0;
      return true;
    case 1:
      m.fps = -1.0;
      return true;
    case 2:
      m.suspect_first_appearance = m.frame_count;
      return true;
    case 3:
      if (m.events.empty()) return false;
      m.events[0].scm_end = m.events[0].scm_start;  // collapses the shoplifting interval
      return true;
    case 4:
      if (m.events.empty()) return false;
      m.events.back().cl_end = m.frame_count + 5;
      return true;
    default:
      if (m.events.size() < 2) return false;
      m.events[1].ccm_start = m.events[0].cl_end - 1;  // cl_end >= 1 always holds
      return true;
  }
}

}  // namespace fuzz
