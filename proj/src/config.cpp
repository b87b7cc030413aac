#include "proxphase/config.hpp"

#include "proxphase/types.hpp"

#include <algorithm>
#include <fstream>
#include <istream>

namespace proxphase {

namespace {

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) {
    return {};
  }
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

} // namespace

std::vector<ConfigEntry> parse_config(std::istream &in, std::string_view source) {
  std::vector<ConfigEntry> entries;
  std::string raw;
  int line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    std::string_view line = raw;
    if (line_no == 1 && line.substr(0, 3) == "\xEF\xBB\xBF") {
      line.remove_prefix(3);
    }
    if (const auto hash = line.find('#'); hash != std::string_view::npos) {
      line = line.substr(0, hash);
    }
    line = trim(line);
    if (line.empty()) {
      continue;
    }
    const auto eq = line.find('=');
    const std::string where = std::string(source) + ":" + std::to_string(line_no);
    if (eq == std::string_view::npos) {
      throw Error(where + ": expected key=value");
    }
    const std::string_view key = trim(line.substr(0, eq));
    if (key.empty()) {
      throw Error(where + ": empty key");
    }
    entries.push_back({std::string(key), std::string(trim(line.substr(eq + 1))),
                       line_no});
  }
  return entries;
}

std::vector<ConfigEntry> read_config_file(const std::filesystem::path &path) {
  std::ifstream in(path);
  if (!in) {
    throw Error("cannot open config file " + path.string());
  }
  return parse_config(in, path.string());
}

void check_config_keys(const std::vector<ConfigEntry> &entries,
                       const std::vector<std::string> &known,
                       std::string_view source) {
  for (const ConfigEntry &e : entries) {
    if (std::find(known.begin(), known.end(), e.key) == known.end()) {
      throw Error(std::string(source) + ":" + std::to_string(e.line) +
                  ": unknown key '" + e.key + "'");
    }
  }
}

std::vector<std::string> config_arguments(const std::vector<ConfigEntry> &entries) {
  std::vector<std::string> args;
  args.reserve(entries.size());
  for (const ConfigEntry &e : entries) {
    args.push_back("--" + e.key + "=" + e.value);
  }
  return args;
}

std::vector<std::string> split_list(std::string_view text) {
  std::vector<std::string> items;
  while (true) {
    const auto comma = text.find(',');
    const std::string_view item = trim(text.substr(0, comma));
    if (item.empty()) {
      throw Error("empty item in list '" + std::string(text) + "'");
    }
    items.emplace_back(item);
    if (comma == std::string_view::npos) {
      break;
    }
    text.remove_prefix(comma + 1);
  }
  return items;
}

} // namespace proxphase
