#pragma once

#include <filesystem>
#include <fstream>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <tuple>
#include <utility>

#include <httplib.h>
#include <json.hpp>
#include <openssl/evp.h>

#include "alphappp/discovery.hpp"
#include "alphappp/log_io.hpp"
#include "alphappp/net_export.hpp"

namespace alphappp {

struct ServiceOptions {
  /// Uploaded logs are stored under <storage_dir>/logs/<log id>/.
  std::filesystem::path storage_dir = "alphappp-data";
  std::size_t max_upload_bytes = std::size_t{512} << 20;
};

namespace detail {

inline std::string sha256_hex(std::string_view bytes) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(bytes.data(), bytes.size(), digest, &len, EVP_sha256(), nullptr) != 1)
    throw Error("SHA-256 digest failed");
  static const char* hex = "0123456789abcdef";
  std::string out;
  for (unsigned int i = 0; i < len; ++i) {
    out += hex[digest[i] >> 4];
    out += hex[digest[i] & 0xf];
  }
  return out;
}

/// Short content address used for log and net ids.
inline std::string content_id(std::string_view bytes) { return sha256_hex(bytes).substr(0, 20); }

class NotFound : public Error {
 public:
  using Error::Error;
};

inline nlohmann::json parse_body(const std::string& body) {
  if (body.empty()) return nlohmann::json::object();
  try {
    auto j = nlohmann::json::parse(body);
    if (!j.is_object()) throw ConfigError("request body must be a JSON object");
    return j;
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError(std::string("malformed JSON body: ") + e.what());
  }
}

inline nlohmann::json dfg_to_json(const Dfg& dfg) {
  nlohmann::json nodes = nlohmann::json::array(), arcs = nlohmann::json::array();
  for (const auto& a : dfg.nodes()) nodes.push_back(a.label());
  for (const auto& [arc, w] : dfg.arcs())
    arcs.push_back({{"source", arc.first.label()}, {"target", arc.second.label()}, {"weight", w}});
  return {{"nodes", std::move(nodes)}, {"arcs", std::move(arcs)}};
}

}  // namespace detail

/// JSON-over-HTTP front end for the discovery pipeline. Logs are content
/// addressed; repaired logs and candidate pools are cached per log so that
/// changes to b, t or r only rerun the cheap stages.
class Service {
 public:
  explicit Service(ServiceOptions opts) : opts_(std::move(opts)) {
    std::filesystem::create_directories(opts_.storage_dir / "logs");
  }

  Service(const Service&) = delete;
  Service& operator=(const Service&) = delete;

  const ServiceOptions& options() const noexcept { return opts_; }

  void mount(httplib::Server& server) {
    server.set_payload_max_length(opts_.max_upload_bytes);
    server.set_default_headers({{"Access-Control-Allow-Origin", "*"},
                                {"Access-Control-Allow-Methods", "GET, POST, OPTIONS"},
                                {"Access-Control-Allow-Headers", "Content-Type"}});
    server.Options(R"(.*)", [](const httplib::Request&, httplib::Response& res) { res.status = 204; });
    server.Get("/presets", wrap([](const httplib::Request&, httplib::Response& res) {
                 nlohmann::json out = nlohmann::json::object();
                 for (const auto& [name, cfg] : presets()) out[name] = to_json(cfg);
                 json_reply(res, out);
               }));
    server.Post("/logs", wrap([this](const httplib::Request& req, httplib::Response& res) { upload(req, res); }));
    server.Get(R"(/logs/([0-9a-f]+))", wrap([this](const httplib::Request& req, httplib::Response& res) {
                 auto s = session(req.matches[1]);
                 json_reply(res, {{"log_id", std::string(req.matches[1])}, {"name", s->name}, {"stats", log_stats(s->log)}});
               }));
    server.Get(R"(/logs/([0-9a-f]+)/dfg)",
               wrap([this](const httplib::Request& req, httplib::Response& res) { dfg(req, res); }));
    server.Post(R"(/logs/([0-9a-f]+)/discover)",
                wrap([this](const httplib::Request& req, httplib::Response& res) { discover(req, res); }));
    server.Get(R"(/nets/([0-9a-f]+)\.pnml)", wrap([this](const httplib::Request& req, httplib::Response& res) {
                 res.set_content(to_pnml(net(req.matches[1])->net), "application/xml");
               }));
    server.Get(R"(/nets/([0-9a-f]+))", wrap([this](const httplib::Request& req, httplib::Response& res) {
                 auto n = net(req.matches[1]);
                 json_reply(res, {{"net_id", std::string(req.matches[1])}, {"net", to_json(n->net)}, {"dot", to_dot(n->net)}});
               }));
    server.Get(R"(/nets/([0-9a-f]+)/disconnected)",
               wrap([this](const httplib::Request& req, httplib::Response& res) { disconnected(req, res); }));
    server.Post(R"(/nets/([0-9a-f]+)/remove-disconnected)",
                wrap([this](const httplib::Request& req, httplib::Response& res) { remove_disconnected(req, res); }));
  }

 private:
  using RepairKey = std::tuple<std::string, double, double, int>;
  using PoolKey = std::tuple<RepairKey, std::uint64_t, double, std::size_t>;

  struct LogSession {
    std::mutex mutex;
    std::string name;
    EventLog log;
    std::map<RepairKey, std::shared_ptr<const RepairStage>> repairs;
    std::map<PoolKey, std::shared_ptr<const CandidatePool>> pools;
    std::optional<std::string> current_net;
  };

  struct StoredNet {
    AcceptingPetriNet net;
    /// Activity frequencies used to order disconnected transitions.
    ActivityMultiset counts;
    /// The log the net is replayed against (repaired log for Alpha+++).
    EventLog replay_log;
  };

  using Handler = std::function<void(const httplib::Request&, httplib::Response&)>;

  static void json_reply(httplib::Response& res, const nlohmann::json& body, int status = 200) {
    res.status = status;
    res.set_content(body.dump(), "application/json");
  }

  static Handler wrap(Handler h) {
    return [h = std::move(h)](const httplib::Request& req, httplib::Response& res) {
      try {
        h(req, res);
      } catch (const detail::NotFound& e) {
        json_reply(res, {{"error", e.what()}}, 404);
      } catch (const ConfigError& e) {
        json_reply(res, {{"error", e.what()}}, 400);
      } catch (const nlohmann::json::exception& e) {
        json_reply(res, {{"error", std::string("malformed request: ") + e.what()}}, 400);
      } catch (const Error& e) {
        json_reply(res, {{"error", e.what()}}, 422);
      } catch (const std::exception& e) {
        json_reply(res, {{"error", e.what()}}, 500);
      }
    };
  }

  std::filesystem::path log_dir(const std::string& id) const { return opts_.storage_dir / "logs" / id; }

  static CsvMapping csv_mapping(const nlohmann::json& j) {
    CsvMapping m;
    if (j.contains("case_column")) m.case_column = j.at("case_column").get<std::string>();
    if (j.contains("activity_column")) m.activity_column = j.at("activity_column").get<std::string>();
    if (j.contains("timestamp_column")) m.timestamp_column = j.at("timestamp_column").get<std::string>();
    if (j.contains("timestamp_format")) m.timestamp_format = j.at("timestamp_format").get<std::string>();
    if (j.contains("delimiter")) {
      const auto d = j.at("delimiter").get<std::string>();
      if (d.size() != 1) throw ConfigError("delimiter must be a single character");
      m.delimiter = d[0];
    }
    return m;
  }

  void upload(const httplib::Request& req, httplib::Response& res) {
    if (!req.has_file("file")) throw ConfigError("multipart field 'file' is required");
    const auto file = req.get_file_value("file");
    nlohmann::json meta{{"name", file.filename.empty() ? std::string("log") : file.filename}};
    for (const char* key : {"case_column", "activity_column", "timestamp_column", "timestamp_format", "delimiter"})
      if (req.has_file(key)) meta[key] = req.get_file_value(key).content;
    const bool csv = detect_format(meta["name"].get<std::string>(), file.content) == LogFormat::csv;
    const CsvMapping mapping = csv_mapping(meta);
    EventLog log = load_log(meta["name"].get<std::string>(), file.content, mapping);
    if (log.empty()) throw ParseError("log contains no traces");

    std::string address = file.content;
    if (csv) address += "\n" + meta.dump();
    const std::string id = detail::content_id(address);
    const auto dir = log_dir(id);
    if (!std::filesystem::exists(dir / "meta.json")) {
      std::filesystem::create_directories(dir);
      std::ofstream(dir / "log.bin", std::ios::binary) << file.content;
      std::ofstream(dir / "meta.json") << meta.dump();
    }
    auto s = std::make_shared<LogSession>();
    s->name = meta["name"];
    s->log = std::move(log);
    nlohmann::json stats = log_stats(s->log);
    {
      std::lock_guard lock(registry_);
      logs_.try_emplace(id, std::move(s));
    }
    json_reply(res, {{"log_id", id}, {"stats", std::move(stats)}}, 201);
  }

  /// In-memory session, reloaded from the storage directory after a restart.
  std::shared_ptr<LogSession> session(const std::string& id) {
    std::lock_guard lock(registry_);
    if (auto it = logs_.find(id); it != logs_.end()) return it->second;
    const auto dir = log_dir(id);
    if (!std::filesystem::exists(dir / "meta.json")) throw detail::NotFound("unknown log id '" + id + "'");
    const auto meta = nlohmann::json::parse(read_file((dir / "meta.json").string()));
    auto s = std::make_shared<LogSession>();
    s->name = meta.at("name").get<std::string>();
    s->log = load_log(s->name, read_file((dir / "log.bin").string()), csv_mapping(meta));
    logs_.emplace(id, s);
    return s;
  }

  std::shared_ptr<const StoredNet> net(const std::string& id) {
    std::lock_guard lock(registry_);
    auto it = nets_.find(id);
    if (it == nets_.end()) throw detail::NotFound("unknown net id '" + id + "'");
    return it->second;
  }

  void store_net(const std::string& id, StoredNet n) {
    std::lock_guard lock(registry_);
    nets_.insert_or_assign(id, std::make_shared<const StoredNet>(std::move(n)));
  }

  void dfg(const httplib::Request& req, httplib::Response& res) {
    auto s = session(req.matches[1]);
    std::uint64_t min_weight = 0;
    if (req.has_param("min_weight")) {
      try {
        min_weight = std::stoull(req.get_param_value("min_weight"));
      } catch (const std::exception&) {
        throw ConfigError("min_weight must be a non-negative integer");
      }
    }
    const Dfg full = build_dfg(s->log);
    Dfg shown;
    for (const auto& a : full.nodes()) shown.add_node(a);
    for (const auto& [arc, w] : full.arcs())
      if (w >= min_weight) shown.add_arc(arc.first, arc.second, w);
    nlohmann::json out = detail::dfg_to_json(shown);
    out["mean_weight"] = mean_weight(full);
    out["dot"] = to_dot(shown);
    json_reply(res, out);
  }

  void discover(const httplib::Request& req, httplib::Response& res) {
    const std::string log_id = req.matches[1];
    auto s = session(log_id);
    const nlohmann::json body = detail::parse_body(req.body);
    const std::string algorithm = body.value("algorithm", std::string("alphappp"));
    if (algorithm != "alphappp" && algorithm != "alpha") throw ConfigError("algorithm must be 'alphappp' or 'alpha'");
    const std::string filter_spec = body.value("variant_filter", std::string());
    NetDotOptions dot_opts;
    if (body.contains("dot")) dot_opts.connect_fragments = body.at("dot").value("connect_fragments", false);

    std::lock_guard lock(s->mutex);
    const EventLog input = filter_spec.empty() ? s->log : filter_variants(s->log, VariantFilter::parse(filter_spec));
    nlohmann::json out{{"log_id", log_id}, {"algorithm", algorithm}};
    StoredNet stored;
    if (algorithm == "alpha") {
      auto result = discover_alpha_classic_detailed(input);
      out["stage_report"] = {{"places", result.net.net.places().size()},
                             {"selected", result.selected.size()},
                             {"disconnected_labeled", disconnected_transitions(result.net).size()}};
      stored = {std::move(result.net), activity_multiset(input), input};
    } else {
      const DiscoveryConfig cfg = config_from_json(body);
      out["config"] = to_json(cfg);
      const RepairKey rkey{filter_spec, cfg.problem_threshold, cfg.d.value, static_cast<int>(cfg.d.mode)};
      const PoolKey pkey{rkey, cfg.n, cfg.min_weight_fraction, cfg.candidate_size_cap.value_or(0)};
      bool repair_cached = true, pool_cached = true;
      auto& repair = s->repairs[rkey];
      if (!repair) {
        repair = std::make_shared<const RepairStage>(run_repair(input, cfg));
        repair_cached = false;
      }
      auto& pool = s->pools[pkey];
      if (!pool) {
        pool = std::make_shared<const CandidatePool>(build_candidate_pool(*repair, cfg));
        pool_cached = false;
      }
      auto result = finish_discovery(*repair, *pool, cfg);
      result.report.repair_cached = repair_cached;
      result.report.candidates_cached = pool_cached;
      out["stage_report"] = to_json(result.report);
      stored = {std::move(result.net), activity_multiset(repair->repaired), repair->repaired};
    }
    nlohmann::json identity{{"log", log_id}, {"algorithm", algorithm}, {"filter", filter_spec}};
    if (out.contains("config")) identity["config"] = out["config"];
    const std::string net_id = detail::content_id(identity.dump());
    out["net_id"] = net_id;
    out["net"] = to_json(stored.net);
    out["dot"] = to_dot(stored.net, dot_opts);
    s->current_net = net_id;
    store_net(net_id, std::move(stored));
    json_reply(res, out);
  }

  void disconnected(const httplib::Request& req, httplib::Response& res) {
    auto n = net(req.matches[1]);
    nlohmann::json list = nlohmann::json::array();
    for (auto t : greedy_removal_order(n->net, n->counts)) {
      const auto& tr = n->net.net.transition(t);
      auto it = n->counts.find(tr.activity);
      list.push_back({{"id", "t" + std::to_string(t.value)},
                      {"label", *tr.label},
                      {"frequency", it == n->counts.end() ? 0 : it->second}});
    }
    json_reply(res, {{"net_id", std::string(req.matches[1])}, {"count", list.size()}, {"disconnected", std::move(list)}});
  }

  void remove_disconnected(const httplib::Request& req, httplib::Response& res) {
    const std::string id = req.matches[1];
    auto n = net(id);
    const nlohmann::json body = detail::parse_body(req.body);
    if (!body.contains("k") || !body.at("k").is_number_integer() || body.at("k").get<std::int64_t>() < 0)
      throw ConfigError("body must contain a non-negative integer 'k'");
    const auto k = body.at("k").get<std::size_t>();
    auto order = greedy_removal_order(n->net, n->counts);
    if (k > order.size())
      throw ConfigError("k = " + std::to_string(k) + " exceeds the " + std::to_string(order.size()) +
                        " disconnected transitions");
    order.resize(k);
    nlohmann::json removed = nlohmann::json::array();
    for (auto t : order) removed.push_back(*n->net.net.transition(t).label);
    StoredNet next{remove_transitions(n->net, order), n->counts, n->replay_log};
    const std::string next_id = detail::content_id(id + "/remove/" + std::to_string(k));
    nlohmann::json out{{"net_id", next_id},
                       {"removed", std::move(removed)},
                       {"fitting_fraction", fitting_fraction(next.net, next.replay_log)},
                       {"net", to_json(next.net)},
                       {"dot", to_dot(next.net)}};
    store_net(next_id, std::move(next));
    json_reply(res, out);
  }

  ServiceOptions opts_;
  std::mutex registry_;
  std::map<std::string, std::shared_ptr<LogSession>> logs_;
  std::map<std::string, std::shared_ptr<const StoredNet>> nets_;
};

}  // namespace alphappp
