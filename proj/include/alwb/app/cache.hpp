#pragma once

// Content-addressed artifact cache. Each entry is a directory holding the
// artifact files plus a checksum list; concurrent processes serialize on a
// per-entry lock file.

#include <cstdint>
#include <filesystem>
#include <functional>
#include <string>
#include <string_view>
#include <vector>

namespace alwb::app {

/// Collects warnings for the run manifest and echoes them to stderr.
struct RunLog {
  std::vector<std::string> warnings;
  bool quiet = false;

  void warn(const std::string& message);
  void info(const std::string& message) const;
};

/// Incremental 64-bit FNV-1a over length-prefixed fields.
class KeyHasher {
 public:
  KeyHasher& add(std::string_view field);
  KeyHasher& add(long long v) { return add(std::to_string(v)); }
  std::string hex() const;

 private:
  std::uint64_t h_ = 0xcbf29ce484222325ULL;
};

/// FNV-1a 64 of a file's bytes, as 16 hex digits. Throws DataError when the
/// file cannot be read.
std::string file_hash(const std::filesystem::path& path);
std::string bytes_hash(std::string_view bytes);

class ArtifactCache {
 public:
  /// `dir` is created on first use.
  explicit ArtifactCache(std::filesystem::path dir);

  /// ALWB_CACHE_DIR when set, otherwise `configured`.
  static std::filesystem::path resolve_dir(const std::string& configured);

  const std::filesystem::path& dir() const { return dir_; }
  std::filesystem::path entry_path(const std::string& kind, const std::string& key) const;

  /// Load the entry (kind, key), building it first when it is missing. A
  /// stored entry whose checksums do not match or whose loader throws is
  /// discarded with a warning and rebuilt. `build` writes files into the
  /// directory it is given. Returns true on a cache hit.
  bool fetch(const std::string& kind, const std::string& key,
             const std::function<void(const std::filesystem::path&)>& build,
             const std::function<void(const std::filesystem::path&)>& load, RunLog& log);

  int hits() const { return hits_; }
  int misses() const { return misses_; }

 private:
  std::filesystem::path dir_;
  int hits_ = 0;
  int misses_ = 0;
};

}  // namespace alwb::app
