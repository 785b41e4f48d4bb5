#include "radiant/config.hpp"

#include <cmath>
#include <cstdint>
#include <sstream>
#include <stdexcept>

namespace radiant {
namespace {

std::string trim(const std::string& s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

bool valid_key(const std::string& key) {
  if (key.empty()) return false;
  for (char c : key) {
    const bool ok = (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') ||
                    c == '_' || c == '.';
    if (!ok) return false;
  }
  return true;
}

}  // namespace

KeyValues parse_key_values(const std::string& text, const std::string& source) {
  KeyValues kv(source);
  std::istringstream in(text);
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    if (trim(line).empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw std::invalid_argument(source + ":" + std::to_string(line_no) +
                                  ": expected 'key = value'");
    }
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (!valid_key(key)) {
      throw std::invalid_argument(source + ":" + std::to_string(line_no) + ": bad key '" + key +
                                  "'");
    }
    if (value.empty()) {
      throw std::invalid_argument(source + ":" + std::to_string(line_no) + ": key '" + key +
                                  "' has no value");
    }
    kv.set(key, value, line_no);
  }
  return kv;
}

void KeyValues::set(const std::string& key, const std::string& value, int line) {
  if (has(key)) {
    throw std::invalid_argument(source_ + ":" + std::to_string(line) + ": duplicate key '" + key +
                                "'");
  }
  values_[key] = value;
  lines_[key] = line;
}

std::string KeyValues::where(const std::string& key) const {
  const auto it = lines_.find(key);
  if (it == lines_.end() || it->second == 0) return source_;
  return source_ + ":" + std::to_string(it->second);
}

std::string KeyValues::get_string(const std::string& key) const {
  const auto it = values_.find(key);
  if (it == values_.end()) {
    throw std::invalid_argument(source_ + ": missing required key '" + key + "'");
  }
  return it->second;
}

int KeyValues::get_int(const std::string& key) const {
  const std::string text = get_string(key);
  try {
    std::size_t used = 0;
    const long long v = std::stoll(text, &used);
    if (used == text.size() && v >= INT32_MIN && v <= INT32_MAX) return static_cast<int>(v);
  } catch (const std::exception&) {
  }
  throw std::invalid_argument(where(key) + ": key '" + key + "' expects an integer, got '" +
                              text + "'");
}

std::uint64_t KeyValues::get_u64(const std::string& key) const {
  const std::string text = get_string(key);
  try {
    std::size_t used = 0;
    if (!text.empty() && text[0] != '-') {
      const unsigned long long v = std::stoull(text, &used);
      if (used == text.size()) return v;
    }
  } catch (const std::exception&) {
  }
  throw std::invalid_argument(where(key) + ": key '" + key +
                              "' expects a non-negative integer, got '" + text + "'");
}

double KeyValues::get_double(const std::string& key) const {
  const std::string text = get_string(key);
  try {
    std::size_t used = 0;
    const double v = std::stod(text, &used);
    if (used == text.size() && std::isfinite(v)) return v;
  } catch (const std::exception&) {
  }
  throw std::invalid_argument(where(key) + ": key '" + key + "' expects a number, got '" + text +
                              "'");
}

std::vector<double> KeyValues::get_doubles(const std::string& key, std::size_t count) const {
  const auto words = get_words(key);
  std::vector<double> out;
  for (const auto& w : words) {
    try {
      std::size_t used = 0;
      const double v = std::stod(w, &used);
      if (used == w.size() && std::isfinite(v)) {
        out.push_back(v);
        continue;
      }
    } catch (const std::exception&) {
    }
    out.clear();
    break;
  }
  if (out.size() != count || words.size() != count) {
    throw std::invalid_argument(where(key) + ": key '" + key + "' expects " +
                                std::to_string(count) + " numbers");
  }
  return out;
}

std::vector<std::string> KeyValues::get_words(const std::string& key) const {
  std::istringstream in(get_string(key));
  std::vector<std::string> words;
  std::string w;
  while (in >> w) words.push_back(w);
  return words;
}

std::string KeyValues::get_string(const std::string& key, const std::string& fallback) const {
  return has(key) ? get_string(key) : fallback;
}

int KeyValues::get_int(const std::string& key, int fallback) const {
  return has(key) ? get_int(key) : fallback;
}

std::uint64_t KeyValues::get_u64(const std::string& key, std::uint64_t fallback) const {
  return has(key) ? get_u64(key) : fallback;
}

double KeyValues::get_double(const std::string& key, double fallback) const {
  return has(key) ? get_double(key) : fallback;
}

void KeyValues::reject_unknown(const std::function<bool(const std::string&)>& known) const {
  for (const auto& [key, value] : values_) {
    if (!known(key)) throw std::invalid_argument(where(key) + ": unknown key '" + key + "'");
  }
}

}  // namespace radiant
