// Command-line frontend: cluster, evaluate, verify.
//
// Exit codes: 0 success, 1 verification divergence, 2 invalid flags,
// 3 I/O errors, 4 algorithmic errors. JSON results go to stdout, human
// logs to stderr (HAC_LOG=error|info|debug).

#include <chrono>
#include <cstdlib>
#include <iostream>
#include <random>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "hac/hac.hpp"

namespace {

using nlohmann::ordered_json;

enum class LogLevel { Error = 0, Info = 1, Debug = 2 };

LogLevel log_level() {
  static const LogLevel level = [] {
    const char* env = std::getenv("HAC_LOG");
    if (env == nullptr) return LogLevel::Error;
    const std::string v = env;
    if (v == "debug") return LogLevel::Debug;
    if (v == "info") return LogLevel::Info;
    return LogLevel::Error;
  }();
  return level;
}

void log_info(const std::string& msg) {
  if (log_level() >= LogLevel::Info) std::cerr << "[hac] " << msg << "\n";
}

void log_error(const std::string& msg) {
  std::cerr << "[hac] error: " << msg << "\n";
}

constexpr int kExitDivergence = 1;
constexpr int kExitFlags = 2;
constexpr int kExitIo = 3;
constexpr int kExitAlgorithm = 4;

struct FlagError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct AlgoError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

bool ends_with(const std::string& s, const std::string& suffix) {
  return s.size() >= suffix.size() &&
         s.compare(s.size() - suffix.size(), suffix.size(), suffix) == 0;
}

hac::Dataset load_dataset(const std::string& path, bool has_header,
                          const std::string& label_column) {
  std::optional<hac::LabelColumn> label;
  if (!label_column.empty()) {
    std::size_t idx = 0;
    auto [p, ec] = std::from_chars(label_column.data(),
                                   label_column.data() + label_column.size(),
                                   idx);
    if (ec == std::errc() && p == label_column.data() + label_column.size())
      label = hac::LabelColumn{idx};
    else
      label = hac::LabelColumn{label_column};
  }
  if (ends_with(path, ".csv")) return hac::load_csv(path, has_header, label);
  return hac::load_binary(path);
}

double seconds_since(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() -
                                       start)
      .count();
}

struct ClusterArgs {
  std::string input;
  std::string linkage;
  std::string metric = "euclidean";
  std::string output;
  std::int64_t tradeoff_t = 0;  // 0 = unset
  unsigned threads = 0;
  bool has_header = false;
  std::string label_column;
};

int run_cluster(const ClusterArgs& args) {
  const auto linkage = hac::parse_linkage(args.linkage);
  if (!linkage) throw FlagError("unknown linkage: " + args.linkage);
  hac::BaseMetric metric;
  if (args.metric == "euclidean") metric = hac::BaseMetric::Euclidean;
  else if (args.metric == "sqeuclidean")
    metric = hac::BaseMetric::SquaredEuclidean;
  else
    throw FlagError("unknown metric: " + args.metric);

  const hac::Dataset ds =
      load_dataset(args.input, args.has_header, args.label_column);
  log_info("loaded " + std::to_string(ds.n) + " points of dimension " +
           std::to_string(ds.d));

  const bool wants_tradeoff = args.tradeoff_t != 0;
  if (wants_tradeoff) {
    const auto* variant = std::get_if<hac::ChamferVariant>(&*linkage);
    if (variant == nullptr)
      throw AlgoError("--tradeoff-t requires chamfer or chamfer-n");
    if (hac::is_symmetric(*variant))
      throw AlgoError("tradeoff unsupported for symmetric variants");
    if (args.tradeoff_t < 1 ||
        static_cast<std::size_t>(args.tradeoff_t) > ds.n)
      throw FlagError("--tradeoff-t must be in [1, n]");
  }

  const unsigned threads =
      args.threads == 0
          ? std::max(1u, std::thread::hardware_concurrency())
          : args.threads;
  hac::ThreadPool pool(threads);
  hac::EngineOptions opts;
  if (threads > 1) opts.pool = &pool;

  const auto start = std::chrono::steady_clock::now();
  hac::Dendrogram dg;
  std::size_t peak = 0;
  if (const auto* variant = std::get_if<hac::ChamferVariant>(&*linkage)) {
    if (wants_tradeoff) {
      hac::TradeoffChamferBackend backend(
          *variant, metric,
          hac::TradeoffConfig{static_cast<std::size_t>(args.tradeoff_t)});
      dg = hac::run_hac(ds, backend, opts);
      peak = backend.peak_entries();
    } else if (hac::is_symmetric(*variant)) {
      hac::SymmetricChamferBackend backend(*variant, metric);
      dg = hac::run_hac(ds, backend, opts);
      peak = backend.peak_entries();
    } else {
      hac::ChamferBackend backend(*variant, metric);
      dg = hac::run_hac(ds, backend, opts);
      peak = backend.peak_entries();
    }
  } else {
    hac::ClassicalBackend backend(std::get<hac::ClassicalKind>(*linkage),
                                  metric);
    dg = hac::run_hac(ds, backend, opts);
    peak = backend.peak_entries();
  }
  const double elapsed = seconds_since(start);

  hac::save_dendrogram(dg, args.output);
  log_info("wrote " + args.output);

  ordered_json summary;
  summary["n"] = ds.n;
  summary["d"] = ds.d;
  summary["linkage"] = args.linkage;
  summary["seconds"] = elapsed;
  summary["peak-entry-count"] = peak;
  summary["dendrogram-height"] = hac::height(dg);
  std::cout << summary.dump() << "\n";
  return 0;
}

struct EvaluateArgs {
  std::string dendrogram;
  std::string labels;
  std::string metrics = "ari,nmi,ami,fmi";
  std::string format = "json";
};

int run_evaluate(const EvaluateArgs& args) {
  if (args.format != "json" && args.format != "tsv")
    throw FlagError("unknown format: " + args.format);
  std::vector<hac::Metric> metrics;
  for (const auto& token : hac::io_detail::split(args.metrics, ',')) {
    const auto metric = hac::parse_metric(std::string(token));
    if (!metric) throw FlagError("unknown metric: " + std::string(token));
    metrics.push_back(*metric);
  }
  const hac::Dendrogram dg = hac::load_dendrogram(args.dendrogram);
  const std::vector<std::uint64_t> truth = hac::load_labels(args.labels);
  if (truth.size() != dg.n)
    throw AlgoError("label count does not match dendrogram leaf count");

  const hac::EvalReport report = hac::evaluate_dendrogram(dg, truth, metrics);
  if (args.format == "json") {
    ordered_json out;
    for (const auto& [metric, best] : report.results) {
      ordered_json entry;
      entry["best"] = best.best;
      entry["order"] = hac::order_label(best.order);
      entry["clusters"] = best.clusters;
      out["metrics"][hac::metric_label(metric)] = entry;
    }
    std::cout << out.dump() << "\n";
  } else {
    std::string out;
    for (const auto& [metric, best] : report.results) {
      out += hac::metric_label(metric);
      out += '\t';
      hac::io_detail::append_double(out, best.best);
      out += '\t';
      out += hac::order_label(best.order);
      out += '\t';
      out += std::to_string(best.clusters);
      out += '\n';
    }
    std::cout << out;
  }
  return 0;
}

struct VerifyArgs {
  std::uint64_t seeds = 100;
  std::size_t max_n = 64;
  std::string linkages;
  std::string tradeoff_ts = "1,3";
  bool inject_fault = false;
};

int run_verify(const VerifyArgs& args) {
  if (args.max_n > hac::kOracleDefaultCap)
    throw FlagError("--max-n exceeds the oracle cap of " +
                    std::to_string(hac::kOracleDefaultCap));
  if (args.max_n < 2) throw FlagError("--max-n must be at least 2");

  std::vector<std::string> linkages;
  if (args.linkages.empty()) {
    for (const char* name : hac::kAllLinkageNames) linkages.push_back(name);
  } else {
    for (const auto& token : hac::io_detail::split(args.linkages, ','))
      linkages.emplace_back(token);
  }
  for (const auto& name : linkages)
    if (!hac::parse_linkage(name)) throw FlagError("unknown linkage: " + name);

  std::vector<std::size_t> ts;
  for (const auto& token : hac::io_detail::split(args.tradeoff_ts, ',')) {
    std::size_t t = 0;
    if (!hac::io_detail::parse_integer(token, t) || t < 1)
      throw FlagError("bad --tradeoff-ts entry: " + std::string(token));
    ts.push_back(t);
  }

  std::uint64_t comparisons = 0;
  bool first_comparison = true;
  for (std::uint64_t seed = 1; seed <= args.seeds; ++seed) {
    std::mt19937_64 rng(seed * 0x9e3779b97f4a7c15ull);
    const std::size_t n = 2 + rng() % (args.max_n - 1);
    const std::size_t dims[3] = {1, 2, 8};
    const std::size_t d = dims[rng() % 3];
    hac::Dataset ds;
    ds.n = n;
    ds.d = d;
    ds.points.resize(n * d);
    std::uniform_real_distribution<double> coord(0.0, 1.0);
    for (double& v : ds.points) v = coord(rng);

    auto report_divergence = [&](const std::string& linkage,
                                 const std::string& what) {
      const std::string repro = "hac_verify_repro_seed" +
                                std::to_string(seed) + "_" + linkage + ".bin";
      hac::save_binary(ds, repro);
      ordered_json out;
      out["status"] = "divergence";
      out["seed"] = seed;
      out["n"] = n;
      out["d"] = d;
      out["linkage"] = linkage;
      out["detail"] = what;
      out["repro"] = repro;
      std::cout << out.dump() << "\n";
      return kExitDivergence;
    };

    for (const auto& name : linkages) {
      const hac::Linkage linkage = *hac::parse_linkage(name);
      hac::Dendrogram fast;
      if (const auto* v = std::get_if<hac::ChamferVariant>(&linkage)) {
        if (hac::is_symmetric(*v)) {
          hac::SymmetricChamferBackend backend(*v, hac::BaseMetric::Euclidean);
          fast = hac::run_hac(ds, backend);
        } else {
          hac::ChamferBackend backend(*v, hac::BaseMetric::Euclidean);
          fast = hac::run_hac(ds, backend);
        }
      } else {
        hac::ClassicalBackend backend(std::get<hac::ClassicalKind>(linkage),
                                      hac::BaseMetric::Euclidean);
        fast = hac::run_hac(ds, backend);
      }
      if (args.inject_fault && first_comparison && !fast.merges.empty()) {
        fast.merges[0].cost += 0.5;  // deliberate corruption for testing
        first_comparison = false;
      }
      const hac::Dendrogram reference =
          hac::oracle_hac(ds, linkage, hac::BaseMetric::Euclidean);
      ++comparisons;

      bool match = reference.merges.size() == fast.merges.size();
      for (std::size_t i = 0; match && i < reference.merges.size(); ++i) {
        const auto& a = reference.merges[i];
        const auto& b = fast.merges[i];
        if (a.left != b.left || a.right != b.right || a.size != b.size)
          match = false;
        else if (a.cost != b.cost) {
          const double scale = std::max(std::abs(a.cost), std::abs(b.cost));
          if (std::abs(a.cost - b.cost) > 1e-9 * scale) match = false;
        }
      }
      if (!match) return report_divergence(name, "oracle mismatch");

      if (const auto* v = std::get_if<hac::ChamferVariant>(&linkage);
          v != nullptr && !hac::is_symmetric(*v)) {
        for (const std::size_t t : ts) {
          if (t > n) continue;
          hac::TradeoffChamferBackend backend(*v, hac::BaseMetric::Euclidean,
                                              hac::TradeoffConfig{t});
          const hac::Dendrogram dg = hac::run_hac(ds, backend);
          ++comparisons;
          if (!(dg == fast))
            return report_divergence(
                name, "tradeoff t=" + std::to_string(t) + " mismatch");
        }
      }
    }
    if (seed % 25 == 0)
      log_info("verified " + std::to_string(seed) + "/" +
               std::to_string(args.seeds) + " seeds");
  }

  ordered_json out;
  out["status"] = "ok";
  out["seeds"] = args.seeds;
  out["comparisons"] = comparisons;
  std::cout << out.dump() << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Hierarchical agglomerative clustering with Chamfer linkage"};
  app.require_subcommand(1);

  ClusterArgs cluster_args;
  CLI::App* cluster = app.add_subcommand(
      "cluster", "Run HAC and write the dendrogram as TSV");
  cluster->add_option("--input", cluster_args.input,
                      "Input dataset (.csv or binary)")->required();
  cluster->add_option("--linkage", cluster_args.linkage,
                      "chamfer|chamfer-n|chamfer-s|chamfer-ns|single|"
                      "complete|average|centroid|ward")->required();
  cluster->add_option("--metric", cluster_args.metric,
                      "euclidean|sqeuclidean");
  cluster->add_option("--output", cluster_args.output,
                      "Output dendrogram path")->required();
  cluster->add_option("--tradeoff-t", cluster_args.tradeoff_t,
                      "Space-time trade-off threshold (chamfer/chamfer-n)");
  cluster->add_option("--threads", cluster_args.threads,
                      "Worker threads (default: all cores)");
  cluster->add_flag("--has-header", cluster_args.has_header,
                    "Treat the first CSV row as a header");
  cluster->add_option("--label-column", cluster_args.label_column,
                      "CSV column (index or name) holding labels; excluded "
                      "from features");

  EvaluateArgs evaluate_args;
  CLI::App* evaluate = app.add_subcommand(
      "evaluate", "Score a dendrogram against ground-truth labels");
  evaluate->add_option("--dendrogram", evaluate_args.dendrogram,
                       "Dendrogram TSV path")->required();
  evaluate->add_option("--labels", evaluate_args.labels,
                       "Labels (.csv single column or binary dataset)")
      ->required();
  evaluate->add_option("--metrics", evaluate_args.metrics,
                       "Comma list of ari,nmi,ami,fmi");
  evaluate->add_option("--format", evaluate_args.format, "json|tsv");

  VerifyArgs verify_args;
  CLI::App* verify = app.add_subcommand(
      "verify", "Fuzz fast backends against the brute-force reference");
  verify->add_option("--seeds", verify_args.seeds, "Number of random seeds");
  verify->add_option("--max-n", verify_args.max_n, "Largest instance size");
  verify->add_option("--linkages", verify_args.linkages,
                     "Comma list (default: all nine)");
  verify->add_option("--tradeoff-ts", verify_args.tradeoff_ts,
                     "Comma list of thresholds to cross-check");
  verify
      ->add_flag("--inject-fault", verify_args.inject_fault,
                 "Corrupt one result to exercise the divergence path")
      ->group("");  // hidden

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << e.what() << "\n";
    return kExitFlags;
  }

  try {
    if (cluster->parsed()) return run_cluster(cluster_args);
    if (evaluate->parsed()) return run_evaluate(evaluate_args);
    return run_verify(verify_args);
  } catch (const FlagError& e) {
    log_error(e.what());
    return kExitFlags;
  } catch (const hac::io_error& e) {
    log_error(e.what());
    return kExitIo;
  } catch (const AlgoError& e) {
    log_error(e.what());
    return kExitAlgorithm;
  } catch (const std::exception& e) {
    log_error(e.what());
    return kExitAlgorithm;
  }
}
