#include "coxsde/io/files.hpp"

#include <openssl/evp.h>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iomanip>
#include <map>
#include <random>
#include <sstream>

#include "coxsde/errors.hpp"
#include "coxsde/random.hpp"

namespace coxsde::io {
namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

double parse_double(std::string_view s, const std::string& where) {
  s = trim(s);
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size()) fail(ErrorCode::IoError, where + ": not a number: '" + std::string(s) + "'");
  return v;
}

std::int64_t parse_int(std::string_view s, const std::string& where) {
  s = trim(s);
  std::int64_t v = 0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size()) fail(ErrorCode::IoError, where + ": not an integer: '" + std::string(s) + "'");
  return v;
}

std::vector<std::string_view> lines_of(std::string_view text) {
  std::vector<std::string_view> out;
  while (!text.empty()) {
    const auto nl = text.find('\n');
    out.push_back(text.substr(0, nl));
    if (nl == std::string_view::npos) break;
    text.remove_prefix(nl + 1);
  }
  return out;
}

std::string sequence_name(std::size_t i) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "seq_%05zu.csv", i);
  return buf;
}

}  // namespace

std::string format_double(double x) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, ptr);
}

void atomic_write(const fs::path& path, std::string_view content) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  fs::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream os(tmp, std::ios::binary | std::ios::trunc);
    if (!os) fail(ErrorCode::IoError, "cannot write " + tmp.string());
    os.write(content.data(), static_cast<std::streamsize>(content.size()));
    if (!os) fail(ErrorCode::IoError, "write failed for " + tmp.string());
  }
  fs::rename(tmp, path);
}

std::string read_file(const fs::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) fail(ErrorCode::IoError, "cannot read " + path.string());
  std::ostringstream ss;
  ss << is.rdbuf();
  return ss.str();
}

std::string content_hash(std::string_view content) {
  const std::string header = "blob " + std::to_string(content.size()) + '\0';
  EVP_MD_CTX* ctx = EVP_MD_CTX_new();
  unsigned char md[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  EVP_DigestInit_ex(ctx, EVP_sha1(), nullptr);
  EVP_DigestUpdate(ctx, header.data(), header.size());
  EVP_DigestUpdate(ctx, content.data(), content.size());
  EVP_DigestFinal_ex(ctx, md, &len);
  EVP_MD_CTX_free(ctx);
  std::ostringstream os;
  for (unsigned int i = 0; i < len; ++i) os << std::hex << std::setw(2) << std::setfill('0') << static_cast<int>(md[i]);
  return os.str();
}

std::string events_to_csv(const EventSequence& events) {
  std::string out = "# horizon=" + format_double(events.horizon()) + "\ntau\n";
  for (double t : events.times()) {
    out += format_double(t);
    out += '\n';
  }
  return out;
}

EventSequence events_from_csv(std::string_view text, const std::string& origin) {
  double horizon = std::nan("");
  bool header = false;
  std::vector<double> times;
  std::size_t line_no = 0;
  for (auto line : lines_of(text)) {
    ++line_no;
    line = trim(line);
    if (line.empty()) continue;
    const std::string where = origin + ":" + std::to_string(line_no);
    if (line.front() == '#') {
      const auto pos = line.find("horizon=");
      if (pos != std::string_view::npos) horizon = parse_double(line.substr(pos + 8), where);
      continue;
    }
    if (!header) {
      if (line != "tau") fail(ErrorCode::IoError, where + ": expected header 'tau'");
      header = true;
      continue;
    }
    times.push_back(parse_double(line, where));
  }
  if (std::isnan(horizon)) fail(ErrorCode::IoError, origin + ": missing '# horizon=' line");
  return EventSequence(std::move(times), horizon);
}

void save_dataset(const fs::path& dir, std::span<const EventSequence> data, nlohmann::json manifest) {
  fs::create_directories(dir);
  for (std::size_t i = 0; i < data.size(); ++i) atomic_write(dir / sequence_name(i), events_to_csv(data[i]));
  manifest["n"] = data.size();
  manifest["T"] = data.empty() ? 0.0 : data.front().horizon();
  manifest["files"] = data.size();
  atomic_write(dir / "manifest.json", manifest.dump(2) + "\n");
}

std::vector<EventSequence> load_dataset(const fs::path& dir, nlohmann::json* manifest) {
  nlohmann::json m;
  try {
    m = nlohmann::json::parse(read_file(dir / "manifest.json"));
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorCode::IoError, "bad manifest in " + dir.string() + ": " + e.what());
  }
  const std::size_t n = m.at("n").get<std::size_t>();
  std::vector<EventSequence> out;
  out.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    const fs::path p = dir / sequence_name(i);
    out.push_back(events_from_csv(read_file(p), p.string()));
  }
  if (manifest) *manifest = std::move(m);
  return out;
}

std::vector<MinuteCounts> minute_counts_from_csv(std::string_view text) {
  std::vector<MinuteCounts> days;
  std::map<std::string, std::size_t, std::less<>> index;
  bool header = false;
  std::size_t line_no = 0;
  for (auto line : lines_of(text)) {
    ++line_no;
    line = trim(line);
    if (line.empty() || line.front() == '#') continue;
    const std::string where = "minute counts:" + std::to_string(line_no);
    if (!header) {
      if (line != "day,minute,count") fail(ErrorCode::IoError, where + ": expected header 'day,minute,count'");
      header = true;
      continue;
    }
    const auto c1 = line.find(',');
    const auto c2 = c1 == std::string_view::npos ? c1 : line.find(',', c1 + 1);
    if (c2 == std::string_view::npos) fail(ErrorCode::IoError, where + ": expected three fields");
    const std::string day(trim(line.substr(0, c1)));
    const std::int64_t minute = parse_int(line.substr(c1 + 1, c2 - c1 - 1), where);
    const std::int64_t count = parse_int(line.substr(c2 + 1), where);
    if (minute < 0 || minute >= 1440) fail(ErrorCode::IoError, where + ": minute outside [0, 1440)");
    if (count < 0) fail(ErrorCode::IoError, where + ": negative count");
    auto it = index.find(day);
    if (it == index.end()) {
      it = index.emplace(day, days.size()).first;
      days.push_back(MinuteCounts{day});
    }
    days[it->second].counts[static_cast<std::size_t>(minute)] += count;
  }
  return days;
}

EventSequence spread_and_thin(const MinuteCounts& day, double p, std::uint64_t seed, double rescale) {
  if (!(p >= 0.0 && p <= 1.0)) fail(ErrorCode::InvalidArgument, "thinning probability must lie in [0, 1]");
  Rng rng = make_rng(seed);
  std::bernoulli_distribution keep(p);
  std::vector<double> times;
  for (std::size_t m = 0; m < day.counts.size(); ++m) {
    const std::int64_t k = day.counts[m];
    for (std::int64_t i = 1; i <= k; ++i) {
      if (!keep(rng)) continue;
      times.push_back((static_cast<double>(m) + (static_cast<double>(i) - 0.5) / static_cast<double>(k)) * rescale);
    }
  }
  return EventSequence(std::move(times), static_cast<double>(day.counts.size()) * rescale);
}

}  // namespace coxsde::io
