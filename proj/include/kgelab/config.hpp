#ifndef KGELAB_CONFIG_HPP
#define KGELAB_CONFIG_HPP

#include <iosfwd>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace kgelab {

class ConfigError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// Flat key-value configuration with dotted keys ("model.m1").
///
/// Text form: `key = value` lines, `#` comments, and optional `[block]`
/// headers that prefix the keys below them ("[model]" then "m1 = 1").
class Config {
public:
  static Config parse(std::istream& is);
  static Config parse_string(const std::string& text);
  static Config load(const std::string& path);

  /// Writes block-less keys first, then one `[block]` section per key prefix.
  void write(std::ostream& os) const;
  std::string to_string() const;

  bool has(const std::string& key) const { return values_.count(key) != 0; }
  void set(const std::string& key, const std::string& value) { values_[key] = value; }
  const std::map<std::string, std::string>& entries() const { return values_; }

  std::string get_string(const std::string& key) const;
  std::string get_string(const std::string& key, const std::string& fallback) const;
  double get_double(const std::string& key) const;
  double get_double(const std::string& key, double fallback) const;
  long get_int(const std::string& key) const;
  long get_int(const std::string& key, long fallback) const;
  bool get_bool(const std::string& key, bool fallback) const;
  std::vector<double> get_doubles(const std::string& key) const;
  std::vector<int> get_ints(const std::string& key) const;

private:
  std::map<std::string, std::string> values_;
};

/// Shortest decimal form that parses back to the same double.
std::string format_double(double x);

}  // namespace kgelab

#endif  // KGELAB_CONFIG_HPP
