#include "alwb/app/cache.hpp"

#include <fcntl.h>
#include <sys/file.h>
#include <unistd.h>

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <iterator>
#include <map>
#include <sstream>

#include "alwb/errors.hpp"
#include "alwb/text.hpp"

namespace fs = std::filesystem;

namespace alwb::app {

void RunLog::warn(const std::string& message) {
  warnings.push_back(message);
  std::cerr << "warning: " << message << '\n';
}

void RunLog::info(const std::string& message) const {
  if (!quiet) std::cerr << message << '\n';
}

KeyHasher& KeyHasher::add(std::string_view field) {
  auto mix = [this](unsigned char c) {
    h_ ^= c;
    h_ *= 0x100000001b3ULL;
  };
  for (char c : std::to_string(field.size())) mix(static_cast<unsigned char>(c));
  mix(':');
  for (char c : field) mix(static_cast<unsigned char>(c));
  return *this;
}

namespace {

std::string to_hex(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

constexpr const char* kChecksums = "CHECKSUMS";

class FileLock {
 public:
  explicit FileLock(const fs::path& path) {
    fd_ = ::open(path.c_str(), O_CREAT | O_RDWR, 0644);
    if (fd_ < 0) throw DataError("cannot open lock file " + path.string());
    if (::flock(fd_, LOCK_EX) != 0) {
      ::close(fd_);
      throw DataError("cannot lock " + path.string());
    }
  }
  ~FileLock() {
    ::flock(fd_, LOCK_UN);
    ::close(fd_);
  }
  FileLock(const FileLock&) = delete;
  FileLock& operator=(const FileLock&) = delete;

 private:
  int fd_ = -1;
};

std::map<std::string, std::string> hash_files(const fs::path& dir) {
  std::map<std::string, std::string> out;
  for (const auto& e : fs::directory_iterator(dir)) {
    if (!e.is_regular_file() || e.path().filename() == kChecksums) continue;
    out[e.path().filename().string()] = file_hash(e.path());
  }
  return out;
}

void write_checksums(const fs::path& dir) {
  std::ofstream out(dir / kChecksums);
  for (const auto& [name, h] : hash_files(dir)) out << h << ' ' << name << '\n';
  if (!out) throw DataError("cannot write checksums in " + dir.string());
}

bool checksums_match(const fs::path& dir) {
  std::ifstream in(dir / kChecksums);
  if (!in) return false;
  std::map<std::string, std::string> stored;
  std::string h, name;
  while (in >> h >> name) stored[name] = h;
  return !stored.empty() && stored == hash_files(dir);
}

}  // namespace

std::string KeyHasher::hex() const { return to_hex(h_); }

std::string bytes_hash(std::string_view bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (char c : bytes) {
    h ^= static_cast<unsigned char>(c);
    h *= 0x100000001b3ULL;
  }
  return to_hex(h);
}

std::string file_hash(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot read " + path.string());
  const std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return bytes_hash(bytes);
}

ArtifactCache::ArtifactCache(fs::path dir) : dir_(std::move(dir)) {}

fs::path ArtifactCache::resolve_dir(const std::string& configured) {
  if (const char* env = std::getenv("ALWB_CACHE_DIR"); env != nullptr && *env != '\0') return env;
  return configured;
}

fs::path ArtifactCache::entry_path(const std::string& kind, const std::string& key) const {
  return dir_ / (kind + "-" + key);
}

bool ArtifactCache::fetch(const std::string& kind, const std::string& key,
                          const std::function<void(const fs::path&)>& build,
                          const std::function<void(const fs::path&)>& load, RunLog& log) {
  fs::create_directories(dir_);
  const auto entry = entry_path(kind, key);
  const FileLock lock(fs::path(entry.string() + ".lock"));

  if (fs::exists(entry)) {
    if (checksums_match(entry)) {
      try {
        load(entry);
        ++hits_;
        return true;
      } catch (const std::exception&) {
      }
    }
    log.warn("corrupt cache entry " + entry.string() + "; rebuilding");
    fs::remove_all(entry);
  }

  ++misses_;
  const fs::path staging(entry.string() + ".tmp");
  fs::remove_all(staging);
  fs::create_directories(staging);
  try {
    build(staging);
    write_checksums(staging);
  } catch (...) {
    fs::remove_all(staging);
    throw;
  }
  fs::rename(staging, entry);
  load(entry);
  return false;
}

}  // namespace alwb::app
