#include "dearest/experiment.hpp"

#include <charconv>
#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <memory>
#include <sstream>

#include "dearest/dataset.hpp"
#include "dearest/error.hpp"

namespace dearest {

namespace {

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

template <class T>
bool parse_number(std::string_view text, T &out) {
  if (!text.empty() && text.front() == '+') text.remove_prefix(1);
  if (text.empty()) return false;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), out);
  return ec == std::errc() && ptr == text.data() + text.size();
}

[[noreturn]] void bad_value(const std::string &key, long line, const std::string &expected,
                            std::string_view value) {
  throw ConfigError("line " + std::to_string(line) + ": key '" + key + "' expects " + expected +
                    ", got '" + std::string(value) + "'");
}

template <class T>
T as_number(const std::string &key, long line, std::string_view value, const char *expected) {
  T out{};
  if (!parse_number(value, out)) bad_value(key, line, expected, value);
  if constexpr (std::is_floating_point_v<T>)
    if (!std::isfinite(out)) bad_value(key, line, expected, value);
  return out;
}

std::string format_double(double v) {
  char buf[32];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, ptr);
}

using Setter = std::function<void(ExperimentSpec &, const std::string &, long, std::string_view)>;

Setter int_field(int ExperimentSpec::*f) {
  return [f](ExperimentSpec &s, const std::string &k, long l, std::string_view v) {
    s.*f = as_number<int>(k, l, v, "an integer");
  };
}
Setter double_field(double ExperimentSpec::*f) {
  return [f](ExperimentSpec &s, const std::string &k, long l, std::string_view v) {
    s.*f = as_number<double>(k, l, v, "a real number");
  };
}
Setter string_field(std::string ExperimentSpec::*f) {
  return [f](ExperimentSpec &s, const std::string &k, long l, std::string_view v) {
    if (v.empty()) bad_value(k, l, "a non-empty string", v);
    s.*f = std::string(v);
  };
}
template <class T>
Setter optional_field(std::optional<T> ExperimentSpec::*f, const char *expected) {
  return [f, expected](ExperimentSpec &s, const std::string &k, long l, std::string_view v) {
    s.*f = as_number<T>(k, l, v, expected);
  };
}

const std::map<std::string, Setter> &setters() {
  static const std::map<std::string, Setter> table = {
      {"objective", string_field(&ExperimentSpec::objective)},
      {"topology", string_field(&ExperimentSpec::topology)},
      {"m", int_field(&ExperimentSpec::m)},
      {"epsilon", double_field(&ExperimentSpec::epsilon)},
      {"seeds",
       [](ExperimentSpec &s, const std::string &k, long l, std::string_view v) {
         s.seeds.clear();
         std::size_t pos = 0;
         while (pos <= v.size()) {
           const auto comma = std::min(v.find(',', pos), v.size());
           s.seeds.push_back(
               as_number<std::uint64_t>(k, l, trim(v.substr(pos, comma - pos)),
                                        "a comma-separated list of nonnegative integers"));
           pos = comma + 1;
         }
       }},
      {"dataset", string_field(&ExperimentSpec::dataset)},
      {"dim", optional_field(&ExperimentSpec::dim, "an integer")},
      {"samples", int_field(&ExperimentSpec::synthetic_samples)},
      {"features", int_field(&ExperimentSpec::synthetic_features)},
      {"n", int_field(&ExperimentSpec::n)},
      {"d", int_field(&ExperimentSpec::d)},
      {"normalize",
       [](ExperimentSpec &s, const std::string &k, long l, std::string_view v) {
         if (v == "true") s.normalize = true;
         else if (v == "false") s.normalize = false;
         else bad_value(k, l, "true or false", v);
       }},
      {"lambda", double_field(&ExperimentSpec::lambda)},
      {"edge_prob", double_field(&ExperimentSpec::edge_prob)},
      {"graph", string_field(&ExperimentSpec::graph)},
      {"data_seed",
       [](ExperimentSpec &s, const std::string &k, long l, std::string_view v) {
         s.data_seed = as_number<std::uint64_t>(k, l, v, "a nonnegative integer");
       }},
      {"eta", optional_field(&ExperimentSpec::eta, "a real number")},
      {"b", optional_field(&ExperimentSpec::b, "an integer")},
      {"p", optional_field(&ExperimentSpec::p, "a real number")},
      {"big_k", optional_field(&ExperimentSpec::big_k, "an integer")},
      {"hat_k", optional_field(&ExperimentSpec::hat_k, "an integer")},
      {"k_in", optional_field(&ExperimentSpec::k_in, "an integer")},
      {"t_max", optional_field(&ExperimentSpec::t_max, "an integer")},
      {"output_dir", string_field(&ExperimentSpec::output_dir)},
      {"telemetry_stride",
       [](ExperimentSpec &s, const std::string &k, long l, std::string_view v) {
         s.telemetry_stride = as_number<long long>(k, l, v, "an integer");
       }},
      {"threads", int_field(&ExperimentSpec::threads)},
      {"output_draws", int_field(&ExperimentSpec::output_draws)},
  };
  return table;
}

void check_spec(const ExperimentSpec &s, const std::vector<std::string> &seen) {
  auto has = [&](const char *k) { return std::find(seen.begin(), seen.end(), k) != seen.end(); };
  std::string missing;
  for (const char *k : {"objective", "topology", "m", "epsilon", "seeds"})
    if (!has(k)) missing += missing.empty() ? k : std::string(", ") + k;
  if (s.objective == "logistic" && !has("dataset"))
    missing += missing.empty() ? "dataset" : ", dataset";
  if (s.objective == "quadratic")
    for (const char *k : {"n", "d"})
      if (!has(k)) missing += missing.empty() ? k : std::string(", ") + k;
  if (!missing.empty()) throw ConfigError("missing required keys: " + missing);

  if (s.objective != "logistic" && s.objective != "quadratic")
    throw ConfigError("objective must be logistic or quadratic, got '" + s.objective + "'");
  if (s.m < 2) throw ConfigError("m must be >= 2");
  if (!(s.epsilon > 0.0)) throw ConfigError("epsilon must be positive");
  if (s.topology == "random" && !(s.edge_prob > 0.0 && s.edge_prob <= 1.0))
    throw ConfigError("topology random needs edge_prob in (0, 1]");
  if (s.topology == "file" && s.graph.empty()) throw ConfigError("topology file needs graph");
  if (s.topology != "ring" && s.topology != "complete" && s.topology != "path" &&
      s.topology != "random" && s.topology != "file")
    throw ConfigError("unknown topology '" + s.topology + "'");
  if (s.objective == "logistic" && s.dataset == "synthetic" &&
      (s.synthetic_samples < 1 || s.synthetic_features < 1))
    throw ConfigError("synthetic dataset needs samples and features");
  if (s.telemetry_stride < 0) throw ConfigError("telemetry_stride must be >= 0");
  if (s.threads < 1) throw ConfigError("threads must be >= 1");
  if (s.output_draws < 1) throw ConfigError("output_draws must be >= 1");
  if (!(s.lambda >= 0.0)) throw ConfigError("lambda must be >= 0");
}

Graph build_graph(const ExperimentSpec &s) {
  if (s.topology == "ring") return build_ring(s.m);
  if (s.topology == "complete") return build_complete(s.m);
  if (s.topology == "path") return build_path(s.m);
  if (s.topology == "random") return build_random(s.m, s.edge_prob, s.data_seed);
  Graph g = read_graph(s.graph);
  if (g.size() != s.m)
    throw ConfigError("graph file has " + std::to_string(g.size()) + " nodes but m = " +
                      std::to_string(s.m));
  return g;
}

std::unique_ptr<FiniteSumObjective> build_objective(const ExperimentSpec &s) {
  if (s.objective == "quadratic")
    return std::make_unique<QuadraticObjective>(make_quadratic(s.m, s.n, s.d, s.data_seed));
  SampleSet samples = s.dataset == "synthetic"
                          ? make_synthetic_binary(s.synthetic_samples, s.synthetic_features,
                                                  s.data_seed)
                          : read_libsvm(s.dataset, s.dim);
  if (s.normalize) normalize_rows(samples);
  const Partition part = partition(samples, s.m, s.data_seed);
  return std::make_unique<LogisticNCObjective>(build_logistic(samples, part, s.lambda));
}

void write_file(const std::filesystem::path &path, const std::string &content) {
  std::ofstream out(path, std::ios::binary);
  out << content;
  if (!out) throw Error("cannot write '" + path.string() + "'");
}

}  // namespace

ExperimentSpec parse_spec(std::istream &in) {
  ExperimentSpec spec;
  std::vector<std::string> seen;
  std::string raw;
  long lineno = 0;
  while (std::getline(in, raw)) {
    ++lineno;
    std::string_view line = raw;
    if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string_view::npos)
      throw ConfigError("line " + std::to_string(lineno) + ": expected 'key = value', got '" +
                        std::string(line) + "'");
    const std::string key(trim(line.substr(0, eq)));
    const auto value = trim(line.substr(eq + 1));
    const auto it = setters().find(key);
    if (it == setters().end())
      throw ConfigError("line " + std::to_string(lineno) + ": unknown key '" + key + "'");
    if (std::find(seen.begin(), seen.end(), key) != seen.end())
      throw ConfigError("line " + std::to_string(lineno) + ": key '" + key + "' given twice");
    it->second(spec, key, lineno, value);
    seen.push_back(key);
  }
  check_spec(spec, seen);
  return spec;
}

ExperimentSpec load_spec(const std::string &path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open experiment file '" + path + "'");
  return parse_spec(in);
}

RunConfig resolve_config(const ExperimentSpec &spec, const FiniteSumObjective &obj,
                         const GossipMatrix &w, const Vector &x0_bar) {
  RunConfig cfg = theorem1_config_for(obj, w, x0_bar, spec.epsilon);
  if (spec.eta) cfg.eta = *spec.eta;
  if (spec.b) cfg.b = *spec.b;
  if (spec.p) cfg.p = *spec.p;
  if (spec.big_k) cfg.big_k = *spec.big_k;
  if (spec.hat_k) cfg.hat_k = *spec.hat_k;
  if (spec.k_in) cfg.k_in = *spec.k_in;
  if (spec.t_max) cfg.t_max = *spec.t_max;
  cfg.threads = spec.threads;
  return cfg;
}

std::vector<SummaryRow> execute_experiment(const ExperimentSpec &spec, std::ostream &log) {
  std::filesystem::path out_dir = spec.output_dir;
  if (const char *env = std::getenv(kOutputDirEnv); env && *env) out_dir = env;

  const auto obj = build_objective(spec);
  const Graph graph = build_graph(spec);
  const GossipMatrix w = gossip_for(graph);
  const Vector x0 = Vector::Zero(obj->dim());
  RunConfig base = resolve_config(spec, *obj, w, x0);
  assign_seeds(base, 0, obj->agents());
  base.validate(obj->agents());
  if (base.t_max <= 0) throw ConfigError("T = 0 leaves the output set empty");

  log << "m=" << obj->agents() << " n=" << obj->samples() << " d=" << obj->dim()
      << " L=" << obj->smoothness() << " lambda2=" << w.lambda2() << " eta=" << base.eta
      << " b=" << base.b << " p=" << base.p << " K=" << base.big_k << " K_hat=" << base.hat_k
      << " K_in=" << base.k_in << " T=" << base.t_max << '\n';

  std::vector<SummaryRow> rows;
  std::vector<std::pair<std::string, std::string>> files;
  for (const auto seed : spec.seeds) {
    RunConfig cfg = base;
    assign_seeds(cfg, seed, obj->agents());
    RunOptions options;
    options.telemetry_stride = spec.telemetry_stride;
    options.output_draws = spec.output_draws;

    const auto start = std::chrono::steady_clock::now();
    RunResult result = run(*obj, w, cfg, x0, options);
    const std::chrono::duration<double> elapsed = std::chrono::steady_clock::now() - start;

    std::ostringstream csv;
    write_telemetry_csv(csv, result.telemetry);
    files.emplace_back("telemetry_" + std::to_string(seed) + ".csv", csv.str());

    SummaryRow row;
    row.seed = seed;
    row.m = obj->agents();
    row.n = obj->samples();
    row.d = obj->dim();
    row.t_max = cfg.t_max;
    row.grad_norm_out = obj->global_grad(result.x_out).norm();
    row.f_out = obj->global_value(result.x_out);
    const auto &st = result.final_state;
    row.ifo = st.ifo_count;
    row.ifo_evaluations = st.ifo_evaluations;
    row.comm_rounds = st.comm_rounds;
    row.comm_rounds_both = st.comm_rounds_both;
    row.gossip_products = st.gossip_products;
    row.wall_seconds = elapsed.count();
    rows.push_back(row);
    log << "seed " << seed << ": |grad f(x_out)| = " << row.grad_norm_out << " (" << row.wall_seconds
        << " s)\n";
  }

  std::ostringstream summary;
  summary << kSummaryHeader << '\n';
  for (const auto &r : rows)
    summary << r.seed << ',' << r.m << ',' << r.n << ',' << r.d << ',' << r.t_max << ','
            << format_double(r.grad_norm_out) << ',' << format_double(r.f_out) << ',' << r.ifo
            << ',' << r.ifo_evaluations << ',' << r.comm_rounds << ',' << r.comm_rounds_both << ','
            << r.gossip_products << ',' << format_double(r.wall_seconds) << '\n';
  files.emplace_back("summary.csv", summary.str());

  std::filesystem::create_directories(out_dir);
  for (const auto &[name, content] : files) write_file(out_dir / name, content);
  return rows;
}

int run_experiment(const ExperimentSpec &spec, std::ostream &log, std::ostream &err) {
  try {
    execute_experiment(spec, log);
    return 0;
  } catch (const std::exception &e) {
    err << "error: " << e.what() << '\n';
    return 1;
  }
}

}  // namespace dearest
