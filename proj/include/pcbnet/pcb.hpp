#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <pcbnet/errors.hpp>
#include <pcbnet/manifest.hpp>

namespace pcbnet {

// Pre-crime behavior segment: frames from the suspect's first appearance (or
// the end of the previous crime lapse) up to the next crime lapse's start.
struct PcbSegment {
  std::string video_id;
  std::uint64_t start = 0;
  std::uint64_t end = 0;  // exclusive
  std::uint32_t ordinal = 0;  // 1-based position within the video

  bool operator==(const PcbSegment&) const = default;
};

struct PcbExtraction {
  std::vector<PcbSegment> segments;
  std::size_t dropped_zero_width = 0;
};

// Candidate segments precede each crime lapse: the first starts at the
// suspect's first appearance, later ones where the previous lapse ended.
// Zero-width candidates are dropped and counted; a video with no crime events
// yields no segments.
inline PcbExtraction extract_pcb_segments(const AnnotationManifest& m) {
  require_valid_manifest(m);
  PcbExtraction result;
  std::uint64_t cursor = m.suspect_first_appearance;
  for (const CrimeEvent& e : m.events) {
    if (e.ccm_start > cursor) {
      PcbSegment seg;
      seg.video_id = m.video_id;
      seg.start = cursor;
      seg.end = e.ccm_start;
      seg.ordinal = static_cast<std::uint32_t>(result.segments.size() + 1);
      result.segments.push_back(std::move(seg));
    } else {
      result.dropped_zero_width += 1;
    }
    cursor = e.cl_end;
  }
  return result;
}

enum class FrameCategory : std::uint8_t {
  pre_appearance,
  pcb,
  ccm,
  scm,
  cl_residue,
  post,
};

inline const char* to_string(FrameCategory c) {
  switch (c) {
    case FrameCategory::pre_appearance: return "pre_appearance";
    case FrameCategory::pcb: return "pcb";
    case FrameCategory::ccm: return "ccm";
    case FrameCategory::scm: return "scm";
    case FrameCategory::cl_residue: return "cl_residue";
    case FrameCategory::post: return "post";
  }
  return "unknown";
}

// Assigns every frame exactly one category. Frames between crime lapses are
// pcb; frames after the final lapse (or the whole timeline, when no crime
// exists) are post.
inline std::vector<FrameCategory> segment_timeline(const AnnotationManifest& m) {
  require_valid_manifest(m);
  std::vector<FrameCategory> timeline(m.frame_count, FrameCategory::post);
  for (std::uint64_t f = 0; f < m.suspect_first_appearance; ++f) {
    timeline[f] = FrameCategory::pre_appearance;
  }
  for (const PcbSegment& seg : extract_pcb_segments(m).segments) {
    for (std::uint64_t f = seg.start; f < seg.end; ++f) {
      timeline[f] = FrameCategory::pcb;
    }
  }
  for (const CrimeEvent& e : m.events) {
    for (std::uint64_t f = e.ccm_start; f < e.scm_start; ++f) {
      timeline[f] = FrameCategory::ccm;
    }
    for (std::uint64_t f = e.scm_start; f < e.scm_end; ++f) {
      timeline[f] = FrameCategory::scm;
    }
    for (std::uint64_t f = e.scm_end; f < e.cl_end; ++f) {
      timeline[f] = FrameCategory::cl_residue;
    }
  }
  return timeline;
}

}  // namespace pcbnet
