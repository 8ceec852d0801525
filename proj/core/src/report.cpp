#include "phonopulse/kvdoc.hpp"

#include <cinttypes>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "phonopulse/errors.hpp"

namespace phonopulse {

namespace {

std::string trim(const std::string& s) {
  const auto begin = s.find_first_not_of(" \t\r\n");
  if (begin == std::string::npos) return {};
  const auto end = s.find_last_not_of(" \t\r\n");
  return s.substr(begin, end - begin + 1);
}

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

}  // namespace

KvDoc KvDoc::parse_text(const std::string& text) {
  KvDoc doc;
  std::istringstream in(text);
  std::string line;
  std::string current;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string t = trim(line);
    if (t.empty() || t[0] == '#') continue;
    if (t.front() == '[') {
      if (t.back() != ']')
        throw FormatError("unterminated section header at line " +
                              std::to_string(line_no),
                          t);
      current = trim(t.substr(1, t.size() - 2));
      if (current.empty())
        throw FormatError("empty section name at line " + std::to_string(line_no),
                          t);
      if (!doc.find_section(current))
        doc.sections_.push_back({current, {}});
      continue;
    }
    const auto eq = t.find('=');
    if (eq == std::string::npos)
      throw FormatError("expected 'key = value' at line " + std::to_string(line_no),
                        t);
    if (current.empty())
      throw FormatError("key outside any [section] at line " +
                            std::to_string(line_no),
                        t);
    Entry e{trim(t.substr(0, eq)), trim(t.substr(eq + 1))};
    if (e.key.empty())
      throw FormatError("empty key at line " + std::to_string(line_no), t);
    Section* sec = doc.find_section(current);
    for (const auto& existing : sec->entries) {
      if (existing.key == e.key)
        throw FormatError("duplicate key at line " + std::to_string(line_no),
                          current + "." + e.key);
    }
    sec->entries.push_back(std::move(e));
  }
  return doc;
}

KvDoc KvDoc::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_text(ss.str());
}

std::string KvDoc::to_text(const std::vector<std::string>& header) const {
  std::ostringstream out;
  for (const auto& h : header) out << "# " << h << "\n";
  for (const auto& sec : sections_) {
    out << "[" << sec.name << "]\n";
    for (const auto& e : sec.entries) out << e.key << " = " << e.value << "\n";
    out << "\n";
  }
  return out.str();
}

void KvDoc::save(const std::filesystem::path& path,
                 const std::vector<std::string>& header) const {
  atomic_write_text(path, to_text(header));
}

KvDoc::Section* KvDoc::find_section(const std::string& name) {
  for (auto& s : sections_)
    if (s.name == name) return &s;
  return nullptr;
}

const KvDoc::Section* KvDoc::find_section(const std::string& name) const {
  for (const auto& s : sections_)
    if (s.name == name) return &s;
  return nullptr;
}

bool KvDoc::has_section(const std::string& section) const {
  return find_section(section) != nullptr;
}

bool KvDoc::has(const std::string& section, const std::string& key) const {
  const Section* s = find_section(section);
  if (!s) return false;
  for (const auto& e : s->entries)
    if (e.key == key) return true;
  return false;
}

void KvDoc::set(const std::string& section, const std::string& key,
                const std::string& value) {
  Section* s = find_section(section);
  if (!s) {
    sections_.push_back({section, {}});
    s = &sections_.back();
  }
  for (auto& e : s->entries) {
    if (e.key == key) {
      e.value = value;
      return;
    }
  }
  s->entries.push_back({key, value});
}

void KvDoc::set_double(const std::string& section, const std::string& key,
                       double value) {
  set(section, key, format_double(value));
}

void KvDoc::set_int(const std::string& section, const std::string& key,
                    std::int64_t value) {
  set(section, key, std::to_string(value));
}

std::string KvDoc::get(const std::string& section, const std::string& key) const {
  const Section* s = find_section(section);
  if (!s) throw FormatError("missing section [" + section + "]", section);
  for (const auto& e : s->entries)
    if (e.key == key) return e.value;
  throw FormatError("missing key '" + key + "' in [" + section + "]",
                    section + "." + key);
}

std::string KvDoc::get_or(const std::string& section, const std::string& key,
                          const std::string& fallback) const {
  return has(section, key) ? get(section, key) : fallback;
}

double KvDoc::get_double(const std::string& section, const std::string& key) const {
  const std::string v = get(section, key);
  std::size_t pos = 0;
  double out = 0.0;
  try {
    out = std::stod(v, &pos);
  } catch (const std::exception&) {
    throw FormatError("not a number: '" + v + "'", section + "." + key);
  }
  if (trim(v.substr(pos)) != "")
    throw FormatError("trailing junk after number: '" + v + "'",
                      section + "." + key);
  return out;
}

std::int64_t KvDoc::get_int(const std::string& section,
                            const std::string& key) const {
  const std::string v = get(section, key);
  try {
    std::size_t pos = 0;
    const std::int64_t out = std::stoll(v, &pos);
    if (trim(v.substr(pos)) != "")
      throw FormatError("trailing junk after integer: '" + v + "'",
                        section + "." + key);
    return out;
  } catch (const FormatError&) {
    throw;
  } catch (const std::exception&) {
    throw FormatError("not an integer: '" + v + "'", section + "." + key);
  }
}

std::vector<double> KvDoc::get_double_list(const std::string& section,
                                           const std::string& key) const {
  const std::string v = get(section, key);
  std::vector<double> out;
  std::stringstream ss(v);
  std::string item;
  while (std::getline(ss, item, ',')) {
    const std::string t = trim(item);
    if (t.empty()) continue;
    try {
      out.push_back(std::stod(t));
    } catch (const std::exception&) {
      throw FormatError("bad list element: '" + t + "'", section + "." + key);
    }
  }
  if (out.empty())
    throw FormatError("empty list", section + "." + key);
  return out;
}

std::uint64_t KvDoc::hash() const {
  const std::string text = to_text();
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char c : text) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  return h;
}

void atomic_write_text(const std::filesystem::path& path,
                       const std::string& content) {
  namespace fs = std::filesystem;
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  fs::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write " + tmp.string());
    out << content;
    if (!out.good()) throw std::runtime_error("write failed: " + tmp.string());
  }
  fs::rename(tmp, path);
}

}  // namespace phonopulse
