#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace radiant {

// Flat `key = value` text. Blank lines and '#' comments are ignored; keys
// may appear once. Lookups name the key and the source on failure.
class KeyValues {
 public:
  KeyValues() = default;
  explicit KeyValues(std::string source) : source_(std::move(source)) {}

  void set(const std::string& key, const std::string& value, int line = 0);
  bool has(const std::string& key) const { return values_.count(key) != 0; }
  const std::map<std::string, std::string>& entries() const { return values_; }
  const std::string& source() const { return source_; }

  // Throws std::invalid_argument naming the key when it is absent or does not parse.
  std::string get_string(const std::string& key) const;
  int get_int(const std::string& key) const;
  std::uint64_t get_u64(const std::string& key) const;
  double get_double(const std::string& key) const;
  std::vector<double> get_doubles(const std::string& key, std::size_t count) const;
  std::vector<std::string> get_words(const std::string& key) const;

  std::string get_string(const std::string& key, const std::string& fallback) const;
  int get_int(const std::string& key, int fallback) const;
  std::uint64_t get_u64(const std::string& key, std::uint64_t fallback) const;
  double get_double(const std::string& key, double fallback) const;

  // Rejects any key the predicate does not accept.
  void reject_unknown(const std::function<bool(const std::string&)>& known) const;

 private:
  std::string where(const std::string& key) const;

  std::string source_;
  std::map<std::string, std::string> values_;
  std::map<std::string, int> lines_;
};

KeyValues parse_key_values(const std::string& text, const std::string& source);

}  // namespace radiant
