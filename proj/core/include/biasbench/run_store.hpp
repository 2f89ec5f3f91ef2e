#pragma once

#include <filesystem>
#include <fstream>
#include <map>
#include <memory>
#include <mutex>
#include <string>
#include <tuple>
#include <vector>

#include "biasbench/gateway.hpp"

namespace biasbench {

/// Append-only response store: one line-delimited JSON file per
/// (model, temperature). Later lines for the same prompt supersede earlier
/// ones, so a retried transport failure replaces its error record.
class RunStore {
 public:
  /// Creates `dir` if needed and loads every existing "*.jsonl" file.
  explicit RunStore(std::filesystem::path dir);
  ~RunStore();

  RunStore(const RunStore&) = delete;
  RunStore& operator=(const RunStore&) = delete;

  static std::string file_name(const std::string& model_id, double temperature);

  const std::filesystem::path& dir() const { return dir_; }

  bool has_success(const PromptRef& ref, const std::string& model_id, double temperature) const;

  /// Writes one line and flushes. Safe to call from several threads.
  void append(const ResponseRecord& record);

  /// Latest record per (model, temperature, prompt), sorted by that key.
  std::vector<ResponseRecord> records() const;

  std::size_t size() const;

 private:
  using Key = std::tuple<std::string, std::string, PromptRef>;

  void load_file(const std::filesystem::path& path);

  std::filesystem::path dir_;
  mutable std::mutex mu_;
  std::map<Key, ResponseRecord> index_;
  std::map<std::string, std::unique_ptr<std::ofstream>> writers_;
};

}  // namespace biasbench
