#ifndef PROXPHASE_CONFIG_HPP
#define PROXPHASE_CONFIG_HPP

// Line-oriented key=value configuration files.

#include <filesystem>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

namespace proxphase {

struct ConfigEntry {
  std::string key;
  std::string value;
  int line = 0;
};

/// Parses `key=value` lines. Blank lines and `#` comments are skipped and
/// whitespace around keys and values is trimmed. Entries keep file order, so
/// later duplicates override earlier ones when applied in sequence.
std::vector<ConfigEntry> parse_config(std::istream &in,
                                      std::string_view source = "config");
std::vector<ConfigEntry> read_config_file(const std::filesystem::path &path);

/// Throws naming the first key not in `known`.
void check_config_keys(const std::vector<ConfigEntry> &entries,
                       const std::vector<std::string> &known,
                       std::string_view source = "config");

/// `--key=value` tokens, in file order.
std::vector<std::string> config_arguments(const std::vector<ConfigEntry> &entries);

/// Splits a comma-separated list, trimming each item; empty items are errors.
std::vector<std::string> split_list(std::string_view text);

} // namespace proxphase

#endif // PROXPHASE_CONFIG_HPP
