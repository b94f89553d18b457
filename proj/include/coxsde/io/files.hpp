#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "coxsde/events.hpp"
#include "json.hpp"

namespace coxsde::io {

namespace fs = std::filesystem;

/// Writes to a temporary sibling and renames it over `path`.
void atomic_write(const fs::path& path, std::string_view content);
std::string read_file(const fs::path& path);

/// SHA-1 of "blob <size>\0<content>", as git computes object ids.
std::string content_hash(std::string_view content);

/// Header `tau`, one time per row, preceded by `# horizon=<T>`.
std::string events_to_csv(const EventSequence& events);
EventSequence events_from_csv(std::string_view text, const std::string& origin = "<memory>");

/// Numbered event files seq_00000.csv, ... plus manifest.json. The manifest
/// always carries n and T; `manifest` adds generator details.
void save_dataset(const fs::path& dir, std::span<const EventSequence> data, nlohmann::json manifest);
std::vector<EventSequence> load_dataset(const fs::path& dir, nlohmann::json* manifest = nullptr);

/// Per-day arrivals per minute of the day.
struct MinuteCounts {
  std::string day;
  std::vector<std::int64_t> counts = std::vector<std::int64_t>(1440, 0);
};

/// CSV with header `day,minute,count`; days in order of first appearance.
std::vector<MinuteCounts> minute_counts_from_csv(std::string_view text);

/// Default rescale: a 1440-minute day maps onto [0, 4].
inline constexpr double kMinuteRescale = 4.0 / 1440.0;

/// A count k in minute m becomes events at m + (i - 1/2) / k, i = 1..k; each
/// is kept with probability p; kept times are multiplied by `rescale`.
EventSequence spread_and_thin(const MinuteCounts& day, double p, std::uint64_t seed,
                              double rescale = kMinuteRescale);

/// Number formatting used by all text outputs (round-trip precision).
std::string format_double(double x);

}  // namespace coxsde::io
