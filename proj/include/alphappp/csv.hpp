#pragma once

#include <algorithm>
#include <cctype>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include <boost/tokenizer.hpp>

#include "alphappp/error.hpp"
#include "alphappp/event_log.hpp"
#include "alphappp/timestamp.hpp"

namespace alphappp {

struct CsvMapping {
  std::string case_column = "case";
  std::string activity_column = "activity";
  std::optional<std::string> timestamp_column;
  /// strftime-style format; ISO-8601 when empty.
  std::optional<std::string> timestamp_format;
  char delimiter = ',';
};

namespace detail {

inline std::vector<std::string> split_csv_row(const std::string& line, char delimiter) {
  using Separator = boost::escaped_list_separator<char>;
  boost::tokenizer<Separator> tok(line, Separator('\\', delimiter, '"'));
  std::vector<std::string> out(tok.begin(), tok.end());
  return out;
}

inline std::string trim(std::string s) {
  auto not_space = [](unsigned char c) { return !std::isspace(c); };
  s.erase(s.begin(), std::find_if(s.begin(), s.end(), not_space));
  s.erase(std::find_if(s.rbegin(), s.rend(), not_space).base(), s.end());
  return s;
}

}  // namespace detail

/// Parses delimited text with a header row. Rows are grouped by case id and
/// ordered by timestamp (stable) when a timestamp column is mapped.
inline EventLog parse_csv(std::string_view text, const CsvMapping& mapping) {
  std::vector<std::string> lines;
  {
    std::size_t start = 0;
    while (start <= text.size()) {
      auto nl = text.find('\n', start);
      if (nl == std::string_view::npos) nl = text.size();
      std::string line(text.substr(start, nl - start));
      if (!line.empty() && line.back() == '\r') line.pop_back();
      lines.push_back(std::move(line));
      start = nl + 1;
    }
  }
  if (lines.empty() || lines.front().empty()) throw ParseError("CSV input has no header row", 1);
  if (!lines.front().empty() && lines.front().rfind("\xEF\xBB\xBF", 0) == 0) lines.front().erase(0, 3);

  std::vector<std::string> header;
  try {
    header = detail::split_csv_row(lines.front(), mapping.delimiter);
  } catch (const boost::escaped_list_error& e) {
    throw ParseError(std::string("malformed CSV header: ") + e.what(), 1);
  }
  for (auto& h : header) h = detail::trim(h);
  auto column = [&](const std::string& name) -> std::size_t {
    auto it = std::find(header.begin(), header.end(), name);
    if (it == header.end()) throw ConfigError("CSV column '" + name + "' not found in header");
    return static_cast<std::size_t>(it - header.begin());
  };
  const std::size_t case_col = column(mapping.case_column);
  const std::size_t act_col = column(mapping.activity_column);
  std::optional<std::size_t> time_col;
  if (mapping.timestamp_column) time_col = column(*mapping.timestamp_column);

  struct Row {
    std::string activity;
    TimestampMs time = 0;
  };
  std::vector<std::string> case_order;
  std::unordered_map<std::string, std::vector<Row>> cases;

  for (std::size_t i = 1; i < lines.size(); ++i) {
    if (detail::trim(lines[i]).empty()) continue;
    const std::size_t line_no = i + 1;
    std::vector<std::string> cells;
    try {
      cells = detail::split_csv_row(lines[i], mapping.delimiter);
    } catch (const boost::escaped_list_error& e) {
      throw ParseError(std::string("malformed CSV row: ") + e.what(), line_no);
    }
    const std::size_t needed = std::max({case_col, act_col, time_col.value_or(0)}) + 1;
    if (cells.size() < needed) throw ParseError("CSV row has too few columns", line_no);
    Row row{cells[act_col], 0};
    if (time_col) {
      const auto& raw = cells[*time_col];
      auto ts = mapping.timestamp_format ? parse_timestamp(raw, *mapping.timestamp_format) : parse_iso8601(raw);
      if (!ts) throw ParseError("unparsable timestamp '" + raw + "'", line_no);
      row.time = *ts;
    }
    auto [it, inserted] = cases.try_emplace(cells[case_col]);
    if (inserted) case_order.push_back(cells[case_col]);
    it->second.push_back(std::move(row));
  }

  EventLog log;
  for (const auto& id : case_order) {
    auto& rows = cases[id];
    if (time_col)
      std::stable_sort(rows.begin(), rows.end(), [](const Row& x, const Row& y) { return x.time < y.time; });
    Trace trace;
    trace.reserve(rows.size());
    for (const auto& r : rows) trace.push_back(Activity::observed(r.activity));
    log.add_trace(trace);
  }
  return log;
}

}  // namespace alphappp
