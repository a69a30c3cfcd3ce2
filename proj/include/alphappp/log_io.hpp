#pragma once

#include <string>
#include <string_view>

#include <json.hpp>

#include "alphappp/csv.hpp"
#include "alphappp/error.hpp"
#include "alphappp/event_log.hpp"
#include "alphappp/xes.hpp"

namespace alphappp {

enum class LogFormat { xes, xes_gz, csv };

/// Picks the format from the file name, falling back to sniffing the content.
inline LogFormat detect_format(std::string_view name, std::string_view bytes) {
  auto ends_with = [&](std::string_view suffix) {
    return name.size() >= suffix.size() && name.substr(name.size() - suffix.size()) == suffix;
  };
  if (ends_with(".xes.gz") || ends_with(".gz")) return LogFormat::xes_gz;
  if (ends_with(".xes") || ends_with(".xml")) return LogFormat::xes;
  if (ends_with(".csv")) return LogFormat::csv;
  if (detail::is_gzip(bytes)) return LogFormat::xes_gz;
  const auto first = bytes.find_first_not_of(" \t\r\n\xEF\xBB\xBF");
  if (first != std::string_view::npos && bytes[first] == '<') return LogFormat::xes;
  return LogFormat::csv;
}

inline EventLog load_log(std::string_view name, std::string_view bytes, const CsvMapping& csv = {}) {
  switch (detect_format(name, bytes)) {
    case LogFormat::xes:
    case LogFormat::xes_gz:
      return parse_xes(bytes);
    case LogFormat::csv:
      return parse_csv(bytes, csv);
  }
  throw Error("unreachable log format");
}

inline EventLog load_log_file(const std::string& path, const CsvMapping& csv = {}) {
  return load_log(path, read_file(path), csv);
}

/// Event, activity, trace and variant counts of an unaugmented log.
inline nlohmann::json log_stats(const EventLog& log) {
  std::size_t acts = 0;
  for (const auto& a : activities(log))
    if (!a.is_endpoint()) ++acts;
  std::uint64_t events = 0;
  for (const auto& [trace, count] : log.variants())
    for (const auto& a : trace)
      if (!a.is_endpoint()) events += count;
  return {{"events", events}, {"activities", acts}, {"traces", log.total_cases()}, {"variants", log.num_variants()}};
}

}  // namespace alphappp
