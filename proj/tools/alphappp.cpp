#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "alphappp/alphappp.hpp"
#include "alphappp/service.hpp"

namespace {

constexpr int exit_input_error = 2;
constexpr int exit_config_error = 3;

struct Options {
  std::string input;
  std::string algorithm = "alphappp";
  std::optional<std::string> preset;
  std::optional<double> d;
  std::optional<std::string> d_mode;
  std::optional<std::uint64_t> n;
  std::optional<double> b, t, r, problem_threshold, min_weight_fraction;
  std::optional<std::size_t> size_cap;
  std::string out;
  std::optional<std::string> dot;
  bool connect_fragments = false;
  std::optional<std::string> report;
  std::optional<std::string> candidates;
  std::optional<std::string> variant_filter;
  std::optional<std::string> remove_disconnected;
  alphappp::CsvMapping csv;
  std::optional<std::string> timestamp_column, timestamp_format;
  char delimiter = ',';
  std::optional<int> serve;
  std::string host = "0.0.0.0";
  std::string storage = "alphappp-data";
  std::size_t max_upload_mb = 512;
};

class FlagError : public alphappp::ConfigError {
 public:
  FlagError(const std::string& flag, const std::string& what) : ConfigError(flag + ": " + what) {}
};

alphappp::DiscoveryConfig build_config(const Options& o) {
  using namespace alphappp;
  DiscoveryConfig cfg = o.preset ? preset(*o.preset) : DiscoveryConfig{};
  if (o.d) cfg.d.value = *o.d;
  if (o.d_mode) {
    if (*o.d_mode == "relative") {
      cfg.d.mode = ThresholdMode::relative;
    } else if (*o.d_mode == "absolute") {
      cfg.d.mode = ThresholdMode::absolute;
    } else {
      throw FlagError("--d-mode", "expected 'absolute' or 'relative', got '" + *o.d_mode + "'");
    }
  }
  if (o.n) cfg.n = *o.n;
  if (o.b) cfg.b = *o.b;
  if (o.t) cfg.t = *o.t;
  if (o.r) cfg.r = *o.r;
  if (o.problem_threshold) cfg.problem_threshold = *o.problem_threshold;
  if (o.min_weight_fraction) cfg.min_weight_fraction = *o.min_weight_fraction;
  if (o.size_cap) cfg.candidate_size_cap = *o.size_cap;
  cfg.validate();
  return cfg;
}

std::optional<std::size_t> parse_removal(const std::optional<std::string>& spec) {
  if (!spec) return std::nullopt;
  const std::string prefix = "greedy:";
  if (spec->rfind(prefix, 0) != 0) throw FlagError("--remove-disconnected", "expected greedy:<k>, got '" + *spec + "'");
  try {
    std::size_t used = 0;
    const long k = std::stol(spec->substr(prefix.size()), &used);
    if (k < 0 || used != spec->size() - prefix.size()) throw std::invalid_argument("k");
    return static_cast<std::size_t>(k);
  } catch (const std::exception&) {
    throw FlagError("--remove-disconnected", "k must be a non-negative integer, got '" + *spec + "'");
  }
}

void write_file(const std::string& path, const std::string& content, const char* flag) {
  std::ofstream out(path, std::ios::binary);
  if (!out || !(out << content)) throw alphappp::ParseError(std::string(flag) + ": cannot write '" + path + "'");
}

int serve(const Options& o) {
  alphappp::ServiceOptions opts;
  opts.storage_dir = o.storage;
  opts.max_upload_bytes = o.max_upload_mb << 20;
  alphappp::Service service(opts);
  httplib::Server server;
  service.mount(server);
  std::cout << "listening on " << o.host << ":" << *o.serve << std::endl;
  if (!server.listen(o.host, *o.serve)) {
    std::cerr << "error: cannot listen on " << o.host << ":" << *o.serve << "\n";
    return EXIT_FAILURE;
  }
  return EXIT_SUCCESS;
}

int run(const Options& o) {
  using namespace alphappp;
  if (o.algorithm != "alphappp" && o.algorithm != "alpha")
    throw FlagError("--algorithm", "expected 'alphappp' or 'alpha', got '" + o.algorithm + "'");
  std::optional<VariantFilter> filter;
  if (o.variant_filter) {
    try {
      filter = VariantFilter::parse(*o.variant_filter);
    } catch (const ConfigError& e) {
      throw FlagError("--variant-filter", e.what());
    }
  }
  const auto removal = parse_removal(o.remove_disconnected);
  std::optional<DiscoveryConfig> cfg;
  if (o.algorithm == "alphappp") cfg = build_config(o);

  CsvMapping csv = o.csv;
  csv.timestamp_column = o.timestamp_column;
  csv.timestamp_format = o.timestamp_format;
  csv.delimiter = o.delimiter;
  EventLog log;
  try {
    log = load_log_file(o.input, csv);
  } catch (const ConfigError& e) {
    throw FlagError("--input", e.what());
  } catch (const Error& e) {
    throw ParseError("--input '" + o.input + "': " + e.what());
  }
  if (filter) log = filter_variants(log, *filter);

  AcceptingPetriNet net;
  nlohmann::json report;
  ActivityMultiset counts;
  EventLog replay_log;
  if (cfg) {
    auto result = discover_alphappp(log, *cfg, o.candidates.has_value());
    report = to_json(result.report);
    report["config"] = to_json(*cfg);
    if (o.candidates) write_file(*o.candidates, candidate_dump(result.records), "--candidates");
    net = std::move(result.net);
    replay_log = std::move(result.repaired);
    counts = activity_multiset(replay_log);
  } else {
    auto result = discover_alpha_classic_detailed(log);
    net = std::move(result.net);
    report = {{"algorithm", "alpha"}, {"places", net.net.places().size()}, {"selected", result.selected.size()}};
    replay_log = log;
    counts = activity_multiset(log);
  }
  if (removal) {
    auto order = greedy_removal_order(net, counts);
    if (*removal > order.size())
      throw FlagError("--remove-disconnected", "k = " + std::to_string(*removal) + " exceeds the " +
                                                   std::to_string(order.size()) + " disconnected transitions");
    order.resize(*removal);
    nlohmann::json removed = nlohmann::json::array();
    for (auto t : order) removed.push_back(*net.net.transition(t).label);
    net = remove_transitions(net, order);
    report["removed_transitions"] = std::move(removed);
  }
  report["disconnected_labeled"] = disconnected_transitions(net).size();
  report["fitting_fraction"] = fitting_fraction(net, replay_log);

  write_file(o.out, to_pnml(net), "--out");
  if (o.dot) write_file(*o.dot, to_dot(net, {o.connect_fragments}), "--dot");
  if (o.report) write_file(*o.report, report.dump(2) + "\n", "--report");
  return EXIT_SUCCESS;
}

}  // namespace

int main(int argc, char** argv) {
  Options o;
  CLI::App app{"Alpha+++ process discovery"};
  app.add_option("--input", o.input, "Event log (.xes, .xes.gz or .csv)");
  app.add_option("--algorithm", o.algorithm, "alphappp or alpha")->capture_default_str();
  app.add_option("--preset", o.preset, "Named parameter preset, e.g. 2.0/b0.5t0.5r0.5");
  app.add_option("--d", o.d, "Loop/skip detection threshold");
  app.add_option("--d-mode", o.d_mode, "absolute or relative (to the mean DFG weight)");
  app.add_option("--n", o.n, "Absolute advising-DFG cutoff");
  app.add_option("--b", o.b, "Balance threshold");
  app.add_option("--t", o.t, "Local fitness threshold");
  app.add_option("--r", o.r, "Place replay threshold");
  app.add_option("--problem-threshold", o.problem_threshold, "Problematic-activity threshold");
  app.add_option("--min-weight-fraction", o.min_weight_fraction, "Relative advising-DFG cutoff");
  app.add_option("--size-cap", o.size_cap, "Maximum |A1|+|A2| during candidate enumeration");
  app.add_option("--out", o.out, "PNML output path");
  app.add_option("--dot", o.dot, "Graphviz output path");
  app.add_flag("--connect-fragments", o.connect_fragments, "Draw start/end boxes and a hub for disconnected transitions");
  app.add_option("--report", o.report, "Stage report JSON output path");
  app.add_option("--candidates", o.candidates, "Candidate dump (JSON lines) output path");
  app.add_option("--variant-filter", o.variant_filter, "top:<k> or coverage:<fraction>");
  app.add_option("--remove-disconnected", o.remove_disconnected, "greedy:<k>");
  app.add_option("--case-column", o.csv.case_column, "CSV case id column")->capture_default_str();
  app.add_option("--activity-column", o.csv.activity_column, "CSV activity column")->capture_default_str();
  app.add_option("--timestamp-column", o.timestamp_column, "CSV timestamp column");
  app.add_option("--timestamp-format", o.timestamp_format, "strftime format of the CSV timestamps");
  app.add_option("--delimiter", o.delimiter, "CSV delimiter")->capture_default_str();
  app.add_option("--serve", o.serve, "Run the HTTP service on this port");
  app.add_option("--host", o.host, "HTTP bind address")->capture_default_str();
  app.add_option("--storage", o.storage, "Directory for uploaded logs")->capture_default_str();
  app.add_option("--max-upload-mb", o.max_upload_mb, "Upload size cap in MiB")->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : exit_config_error;
  }

  try {
    if (o.serve) return serve(o);
    if (o.input.empty()) throw FlagError("--input", "required");
    if (o.out.empty()) throw FlagError("--out", "required");
    return run(o);
  } catch (const alphappp::ConfigError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return exit_config_error;
  } catch (const alphappp::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return exit_input_error;
  }
}
