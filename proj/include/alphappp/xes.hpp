#pragma once

#include <algorithm>
#include <cstring>
#include <fstream>
#include <iterator>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include <expat.h>
#include <zlib.h>

#include "alphappp/error.hpp"
#include "alphappp/event_log.hpp"
#include "alphappp/timestamp.hpp"

namespace alphappp {

namespace detail {

inline bool is_gzip(std::string_view bytes) {
  return bytes.size() >= 2 && static_cast<unsigned char>(bytes[0]) == 0x1f &&
         static_cast<unsigned char>(bytes[1]) == 0x8b;
}

/// Feeds the (possibly gzip-compressed) input to `sink` in chunks.
template <class Sink>
void for_each_decompressed_chunk(std::string_view bytes, Sink&& sink) {
  if (!is_gzip(bytes)) {
    sink(bytes, true);
    return;
  }
  z_stream zs{};
  if (inflateInit2(&zs, 16 + MAX_WBITS) != Z_OK) throw ParseError("cannot initialise gzip decoder");
  std::unique_ptr<z_stream, decltype(&inflateEnd)> guard(&zs, &inflateEnd);
  zs.next_in = reinterpret_cast<Bytef*>(const_cast<char*>(bytes.data()));
  zs.avail_in = static_cast<uInt>(bytes.size());
  std::vector<char> buffer(1 << 18);
  int rc = Z_OK;
  do {
    zs.next_out = reinterpret_cast<Bytef*>(buffer.data());
    zs.avail_out = static_cast<uInt>(buffer.size());
    rc = inflate(&zs, Z_NO_FLUSH);
    if (rc != Z_OK && rc != Z_STREAM_END) throw ParseError(std::string("corrupt gzip stream: ") + (zs.msg ? zs.msg : "?"));
    const std::size_t produced = buffer.size() - zs.avail_out;
    sink(std::string_view(buffer.data(), produced), rc == Z_STREAM_END);
  } while (rc != Z_STREAM_END && (zs.avail_in > 0 || zs.avail_out == 0));
  if (rc != Z_STREAM_END) throw ParseError("truncated gzip stream");
}

class XesReader {
 public:
  XesReader() : parser_(XML_ParserCreate("UTF-8"), &XML_ParserFree) {
    if (!parser_) throw Error("cannot create XML parser");
    XML_SetUserData(parser_.get(), this);
    XML_SetElementHandler(parser_.get(), &XesReader::on_start, &XesReader::on_end);
  }

  void feed(std::string_view chunk, bool last) {
    if (XML_Parse(parser_.get(), chunk.data(), static_cast<int>(chunk.size()), last ? 1 : 0) == XML_STATUS_ERROR) {
      if (pending_) std::rethrow_exception(pending_);
      throw ParseError(std::string("malformed XML: ") + XML_ErrorString(XML_GetErrorCode(parser_.get())),
                       static_cast<std::size_t>(XML_GetCurrentLineNumber(parser_.get())));
    }
    if (last && !saw_log_) throw ParseError("document has no <log> element");
  }

  EventLog take() { return std::move(log_); }

 private:
  struct PendingEvent {
    std::optional<std::string> name;
    std::optional<TimestampMs> time;
  };

  static void on_start(void* self, const XML_Char* name, const XML_Char** attrs) {
    auto* r = static_cast<XesReader*>(self);
    try {
      r->start(name, attrs);
    } catch (...) {
      r->abort(std::current_exception());
    }
  }
  static void on_end(void* self, const XML_Char* name) {
    auto* r = static_cast<XesReader*>(self);
    try {
      r->end(name);
    } catch (...) {
      r->abort(std::current_exception());
    }
  }

  void abort(std::exception_ptr e) {
    pending_ = e;
    XML_StopParser(parser_.get(), XML_FALSE);
  }

  static std::string_view local(const XML_Char* name) {
    std::string_view n(name);
    auto colon = n.rfind(':');
    return colon == std::string_view::npos ? n : n.substr(colon + 1);
  }

  void start(const XML_Char* raw, const XML_Char** attrs) {
    const auto tag = local(raw);
    const std::size_t depth = stack_.size();
    const std::string_view parent = depth ? std::string_view(stack_.back()) : std::string_view{};
    stack_.emplace_back(tag);
    if (tag == "log") {
      saw_log_ = true;
    } else if (tag == "trace" && parent == "log") {
      in_trace_ = true;
      events_.clear();
      ++trace_index_;
    } else if (tag == "event" && in_trace_ && parent == "trace") {
      events_.emplace_back();
    } else if (parent == "event" && in_trace_ && !events_.empty()) {
      std::string_view key, value;
      for (std::size_t i = 0; attrs[i]; i += 2) {
        if (std::strcmp(attrs[i], "key") == 0) key = attrs[i + 1];
        if (std::strcmp(attrs[i], "value") == 0) value = attrs[i + 1];
      }
      if (tag == "string" && key == "concept:name") {
        events_.back().name = std::string(value);
      } else if (tag == "date" && key == "time:timestamp") {
        auto ts = parse_iso8601(value);
        if (!ts)
          throw ParseError("unparsable time:timestamp '" + std::string(value) + "'",
                           static_cast<std::size_t>(XML_GetCurrentLineNumber(parser_.get())));
        events_.back().time = ts;
      }
    }
  }

  void end(const XML_Char* raw) {
    const auto tag = local(raw);
    stack_.pop_back();
    if (tag == "trace" && in_trace_ && (stack_.empty() || stack_.back() == "log")) {
      in_trace_ = false;
      finish_trace();
    }
  }

  void finish_trace() {
    const bool all_timed = std::all_of(events_.begin(), events_.end(), [](const auto& e) { return e.time.has_value(); });
    std::vector<std::size_t> order(events_.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    if (all_timed)
      std::stable_sort(order.begin(), order.end(),
                       [&](std::size_t x, std::size_t y) { return *events_[x].time < *events_[y].time; });
    Trace trace;
    trace.reserve(events_.size());
    for (std::size_t i = 0; i < events_.size(); ++i) {
      const auto& ev = events_[order[i]];
      if (!ev.name)
        throw ParseError("trace " + std::to_string(trace_index_) + ", event " + std::to_string(order[i]) +
                         ": missing concept:name");
      auto it = interned_.find(*ev.name);
      if (it == interned_.end()) it = interned_.emplace(*ev.name, Activity::observed(*ev.name)).first;
      trace.push_back(it->second);
    }
    log_.add_trace(trace);
  }

  std::unique_ptr<XML_ParserStruct, decltype(&XML_ParserFree)> parser_;
  std::vector<std::string> stack_;
  std::vector<PendingEvent> events_;
  std::unordered_map<std::string, Activity> interned_;
  EventLog log_;
  std::exception_ptr pending_;
  std::size_t trace_index_ = 0;
  bool in_trace_ = false;
  bool saw_log_ = false;
};

}  // namespace detail

/// Parses an XES document, optionally gzip-compressed. Events are ordered by
/// time:timestamp (stable) when every event of the trace carries one.
inline EventLog parse_xes(std::string_view bytes) {
  detail::XesReader reader;
  detail::for_each_decompressed_chunk(bytes, [&](std::string_view chunk, bool last) { reader.feed(chunk, last); });
  return reader.take();
}

inline std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError("cannot open '" + path + "'");
  return std::string(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
}

}  // namespace alphappp
