#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <string_view>

#include "json.hpp"

namespace coxsde::cli {

/// Output directory of one command invocation. Every file written through
/// it is recorded with its content hash in run.json on finish().
class RunDir {
 public:
  RunDir(std::filesystem::path root, std::string command);

  const std::filesystem::path& root() const { return root_; }

  void write(const std::string& name, std::string_view content);
  void add_input(const std::string& label, std::string_view content);
  void set(const std::string& key, nlohmann::json value) { info_[key] = std::move(value); }
  void finish();

 private:
  std::filesystem::path root_;
  nlohmann::json info_;
  std::map<std::string, std::string> outputs_;
  std::map<std::string, std::string> inputs_;
};

}  // namespace coxsde::cli
