#include "run_dir.hpp"

#include "coxsde/io/files.hpp"

namespace coxsde::cli {

RunDir::RunDir(std::filesystem::path root, std::string command) : root_(std::move(root)) {
  std::filesystem::create_directories(root_);
  info_["command"] = std::move(command);
}

void RunDir::write(const std::string& name, std::string_view content) {
  io::atomic_write(root_ / name, content);
  outputs_[name] = io::content_hash(content);
}

void RunDir::add_input(const std::string& label, std::string_view content) { inputs_[label] = io::content_hash(content); }

void RunDir::finish() {
  info_["inputs"] = inputs_;
  info_["outputs"] = outputs_;
  std::string joined;
  for (const auto& [k, v] : inputs_) joined += k + "=" + v + "\n";
  info_["input_hash"] = io::content_hash(joined);
  io::atomic_write(root_ / "run.json", info_.dump(2) + "\n");
}

}  // namespace coxsde::cli
