#include "biasbench/run_store.hpp"

#include <fmt/format.h>

#include "biasbench/error.hpp"
#include "biasbench/serialize.hpp"

namespace biasbench {

RunStore::RunStore(std::filesystem::path dir) : dir_(std::move(dir)) {
  std::filesystem::create_directories(dir_);
  std::vector<std::filesystem::path> files;
  for (const auto& entry : std::filesystem::directory_iterator(dir_)) {
    if (entry.is_regular_file() && entry.path().extension() == ".jsonl") files.push_back(entry.path());
  }
  std::sort(files.begin(), files.end());
  for (const auto& f : files) load_file(f);
}

RunStore::~RunStore() = default;

std::string RunStore::file_name(const std::string& model_id, double temperature) {
  std::string safe;
  for (char c : model_id) {
    const bool ok = std::isalnum(static_cast<unsigned char>(c)) || c == '.' || c == '-' || c == '_';
    safe.push_back(ok ? c : '_');
  }
  return fmt::format("{}__t{}.jsonl", safe, temperature_key(temperature));
}

void RunStore::load_file(const std::filesystem::path& path) {
  read_jsonl(path, [&](const nlohmann::json& j) {
    ResponseRecord r = response_from_json(j);
    Key key{r.model_id, temperature_key(r.temperature), r.prompt_ref};
    index_[std::move(key)] = std::move(r);
  }, true);
}

bool RunStore::has_success(const PromptRef& ref, const std::string& model_id, double temperature) const {
  std::lock_guard lock(mu_);
  auto it = index_.find(Key{model_id, temperature_key(temperature), ref});
  return it != index_.end() && it->second.ok();
}

void RunStore::append(const ResponseRecord& record) {
  const std::string name = file_name(record.model_id, record.temperature);
  const std::string line = to_json(record).dump();
  std::lock_guard lock(mu_);
  auto& writer = writers_[name];
  if (!writer) {
    const auto path = dir_ / name;
    bool needs_newline = false;
    if (std::ifstream prev(path, std::ios::binary | std::ios::ate); prev && prev.tellg() > 0) {
      prev.seekg(-1, std::ios::end);
      needs_newline = prev.get() != '\n';
    }
    writer = std::make_unique<std::ofstream>(path, std::ios::binary | std::ios::app);
    if (!*writer) throw Error(fmt::format("cannot open '{}' for append", path.string()));
    if (needs_newline) *writer << '\n';
  }
  *writer << line << '\n';
  writer->flush();
  if (!*writer) throw Error(fmt::format("append to '{}' failed", (dir_ / name).string()));
  index_[Key{record.model_id, temperature_key(record.temperature), record.prompt_ref}] = record;
}

std::vector<ResponseRecord> RunStore::records() const {
  std::lock_guard lock(mu_);
  std::vector<ResponseRecord> out;
  out.reserve(index_.size());
  for (const auto& [_, r] : index_) out.push_back(r);
  return out;
}

std::size_t RunStore::size() const {
  std::lock_guard lock(mu_);
  return index_.size();
}

}  // namespace biasbench
