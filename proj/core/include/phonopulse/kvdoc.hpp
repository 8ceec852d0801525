#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace phonopulse {

/// Ordered nested key-value text document:
///
///   # comment
///   [section]
///   key = value
///
/// Used for run configuration, trace sidecar metadata, and fit reports.
/// Parsing preserves order; lookups are strict so that consumers can reject
/// unknown keys outright.
class KvDoc {
 public:
  struct Entry {
    std::string key;
    std::string value;
  };
  struct Section {
    std::string name;
    std::vector<Entry> entries;
  };

  static KvDoc parse_text(const std::string& text);
  static KvDoc load(const std::filesystem::path& path);

  /// Serialize; `header` lines are emitted as leading comments.
  std::string to_text(const std::vector<std::string>& header = {}) const;
  /// Atomic write: temp file in the same directory, then rename.
  void save(const std::filesystem::path& path,
            const std::vector<std::string>& header = {}) const;

  bool has_section(const std::string& section) const;
  bool has(const std::string& section, const std::string& key) const;
  const std::vector<Section>& sections() const { return sections_; }

  void set(const std::string& section, const std::string& key,
           const std::string& value);
  void set_double(const std::string& section, const std::string& key,
                  double value);
  void set_int(const std::string& section, const std::string& key,
               std::int64_t value);

  std::string get(const std::string& section, const std::string& key) const;
  std::string get_or(const std::string& section, const std::string& key,
                     const std::string& fallback) const;
  double get_double(const std::string& section, const std::string& key) const;
  std::int64_t get_int(const std::string& section, const std::string& key) const;
  std::vector<double> get_double_list(const std::string& section,
                                      const std::string& key) const;

  /// FNV-1a 64-bit hash of the canonical serialization (no header comments).
  std::uint64_t hash() const;

 private:
  Section* find_section(const std::string& name);
  const Section* find_section(const std::string& name) const;
  std::vector<Section> sections_;
};

/// Atomic whole-file text write (temp + rename); creates parent directories.
void atomic_write_text(const std::filesystem::path& path,
                       const std::string& content);

}  // namespace phonopulse
