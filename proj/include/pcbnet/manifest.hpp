#pragma once

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <initializer_list>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include <pcbnet/errors.hpp>

namespace pcbnet {

// One annotated crime: the comprehensive moment opens the crime lapse, the
// strict moment lies inside it, and cl_end closes it. scm_end and cl_end are
// exclusive bounds.
struct CrimeEvent {
  std::uint64_t ccm_start = 0;
  std::uint64_t scm_start = 0;
  std::uint64_t scm_end = 0;
  std::uint64_t cl_end = 0;

  bool operator==(const CrimeEvent&) const = default;
};

struct AnnotationManifest {
  std::string video_id;
  std::uint64_t frame_count = 0;
  double fps = 0.0;
  std::uint64_t suspect_first_appearance = 0;
  std::vector<CrimeEvent> events;  // sorted ascending, pairwise disjoint

  bool operator==(const AnnotationManifest&) const = default;
};

// A violation names the offending field and, for event-level problems, the
// event's index. Violations are data, not exceptions.
struct ManifestViolation {
  std::optional<std::size_t> event_index;
  std::string field;
  std::string message;

  std::string to_string() const {
    std::string out;
    if (event_index) {
      out += "events[" + std::to_string(*event_index) + "].";
    }
    out += field + ": " + message;
    return out;
  }
};

// Checks every manifest invariant. Inclusive frame indices must lie inside
// [0, frame_count); exclusive interval ends may equal frame_count, since the
// frames they cover still do.
inline std::vector<ManifestViolation> validate_manifest(const AnnotationManifest& m) {
  std::vector<ManifestViolation> out;
  if (m.frame_count == 0) {
    out.push_back({std::nullopt, "frame_count", "must be positive"});
  }
  if (!(m.fps > 0.0) || !std::isfinite(m.fps)) {
    out.push_back({std::nullopt, "fps", "must be a positive finite rate"});
  }
  if (m.frame_count > 0 && m.suspect_first_appearance >= m.frame_count) {
    out.push_back({std::nullopt, "suspect_first_appearance",
                   "frame index " + std::to_string(m.suspect_first_appearance) +
                       " not below frame_count " + std::to_string(m.frame_count)});
  }
  for (std::size_t i = 0; i < m.events.size(); ++i) {
    const CrimeEvent& e = m.events[i];
    if (e.scm_start < e.ccm_start) {
      out.push_back({i, "scm_start", "precedes ccm_start"});
    }
    if (e.scm_end <= e.scm_start) {
      out.push_back({i, "scm_end", "does not exceed scm_start"});
    }
    if (e.scm_end > e.cl_end) {
      out.push_back({i, "scm_end", "exceeds cl_end"});
    }
    if (m.frame_count > 0) {
      if (e.ccm_start >= m.frame_count) {
        out.push_back({i, "ccm_start", "frame index not below frame_count"});
      }
      if (e.scm_start >= m.frame_count) {
        out.push_back({i, "scm_start", "frame index not below frame_count"});
      }
      if (e.scm_end > m.frame_count) {
        out.push_back({i, "scm_end", "exceeds frame_count"});
      }
      if (e.cl_end > m.frame_count) {
        out.push_back({i, "cl_end", "exceeds frame_count"});
      }
    }
    if (i + 1 < m.events.size() && m.events[i + 1].ccm_start < e.cl_end) {
      out.push_back({i + 1, "ccm_start", "overlaps previous event's crime lapse"});
    }
  }
  if (!m.events.empty() && m.suspect_first_appearance > m.events.front().ccm_start) {
    out.push_back({std::nullopt, "suspect_first_appearance", "exceeds first event's ccm_start"});
  }
  return out;
}

inline void require_valid_manifest(const AnnotationManifest& m) {
  const auto violations = validate_manifest(m);
  if (!violations.empty()) {
    std::string msg = "manifest for \"" + m.video_id + "\" is invalid:";
    for (const auto& v : violations) {
      msg += " [" + v.to_string() + "]";
    }
    throw ValidationError(msg);
  }
}

namespace detail {

inline void reject_unknown_fields(const nlohmann::json& obj, const char* what,
                                  std::initializer_list<const char*> known) {
  std::vector<std::string> unknown;
  for (const auto& [key, value] : obj.items()) {
    bool found = false;
    for (const char* k : known) {
      if (key == k) {
        found = true;
        break;
      }
    }
    if (!found) {
      unknown.push_back(key);
    }
  }
  if (!unknown.empty()) {
    std::string msg = std::string("unknown ") + what + " field(s):";
    for (const auto& k : unknown) {
      msg += " \"" + k + "\"";
    }
    throw ParseError(msg);
  }
}

inline std::uint64_t json_frame_index(const nlohmann::json& obj, const char* field,
                                      const char* what) {
  if (!obj.contains(field)) {
    throw ParseError(std::string(what) + " is missing required field \"" + field + "\"");
  }
  const auto& v = obj.at(field);
  if (!v.is_number_integer() || v.get<std::int64_t>() < 0) {
    throw ParseError(std::string(what) + " field \"" + field +
                     "\" must be a non-negative integer");
  }
  return v.get<std::uint64_t>();
}

}  // namespace detail

inline AnnotationManifest manifest_from_json(const nlohmann::json& doc) {
  if (!doc.is_object()) {
    throw ParseError("manifest document must be a JSON object");
  }
  detail::reject_unknown_fields(
      doc, "manifest", {"video_id", "frame_count", "fps", "suspect_first_appearance", "events"});
  AnnotationManifest m;
  if (!doc.contains("video_id") || !doc.at("video_id").is_string()) {
    throw ParseError("manifest field \"video_id\" must be a string");
  }
  m.video_id = doc.at("video_id").get<std::string>();
  m.frame_count = detail::json_frame_index(doc, "frame_count", "manifest");
  if (!doc.contains("fps") || !doc.at("fps").is_number()) {
    throw ParseError("manifest field \"fps\" must be a number");
  }
  m.fps = doc.at("fps").get<double>();
  if (doc.contains("suspect_first_appearance")) {
    m.suspect_first_appearance =
        detail::json_frame_index(doc, "suspect_first_appearance", "manifest");
  }
  if (doc.contains("events")) {
    if (!doc.at("events").is_array()) {
      throw ParseError("manifest field \"events\" must be an array");
    }
    for (const auto& ev : doc.at("events")) {
      if (!ev.is_object()) {
        throw ParseError("manifest event must be a JSON object");
      }
      detail::reject_unknown_fields(ev, "event", {"ccm_start", "scm_start", "scm_end", "cl_end"});
      CrimeEvent e;
      e.ccm_start = detail::json_frame_index(ev, "ccm_start", "event");
      e.scm_start = detail::json_frame_index(ev, "scm_start", "event");
      e.scm_end = detail::json_frame_index(ev, "scm_end", "event");
      e.cl_end = detail::json_frame_index(ev, "cl_end", "event");
      m.events.push_back(e);
    }
  }
  return m;
}

inline nlohmann::json manifest_to_json(const AnnotationManifest& m) {
  nlohmann::json events = nlohmann::json::array();
  for (const auto& e : m.events) {
    events.push_back({{"ccm_start", e.ccm_start},
                      {"scm_start", e.scm_start},
                      {"scm_end", e.scm_end},
                      {"cl_end", e.cl_end}});
  }
  return {{"video_id", m.video_id},
          {"frame_count", m.frame_count},
          {"fps", m.fps},
          {"suspect_first_appearance", m.suspect_first_appearance},
          {"events", events}};
}

inline AnnotationManifest load_manifest(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw IoError("cannot open manifest file " + path.string());
  }
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError("manifest " + path.string() + ": " + e.what());
  }
  return manifest_from_json(doc);
}

}  // namespace pcbnet
